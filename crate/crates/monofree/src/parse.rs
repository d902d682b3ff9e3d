//! Textual word syntax used by the CLI and tests:
//!
//! ```text
//! q3            lattice projection q_3
//! p2            expanded at parse time to q_2 - q_1
//! X'(1)         prime copy, F0 schema
//! X''(4)*       starred doubleprime copy
//! Y(2)          plain copy, H0 schema
//! A:q1          label prefix, needed when the presentation is ambiguous
//! ```
//!
//! Letters are juxtaposed with whitespace; `+` and `-` separate terms;
//! rational coefficients are written like `3/4`.

use num_bigint::BigInt;
use num_traits::One;
use std::str::FromStr;

use crate::algebras::AlgebraPresentation;
use crate::error::{EngineError, Result};
use crate::ncpoly::{Coeff, Decoration, Letter, Level, NCPolynomial, Word};
use crate::symbol::Symbol;

fn parse_err(msg: impl Into<String>) -> EngineError {
    EngineError::Parse(msg.into())
}

/// Parses `p` or `p/q` into an exact rational.
pub fn parse_rational(tok: &str) -> Option<Coeff> {
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n, d),
        None => (tok, "1"),
    };
    let n = BigInt::from_str(num).ok()?;
    let d = BigInt::from_str(den).ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(Coeff::new(n, d))
}

fn looks_like_number(tok: &str) -> bool {
    let t = tok.strip_prefix('-').unwrap_or(tok);
    !t.is_empty() && t.chars().next().unwrap().is_ascii_digit()
}

enum Factor {
    Letter(Letter),
    /// `p_k`, expanded into `q_k - q_{k-1}` when the term is assembled.
    OrthProj(Symbol, u32),
}

fn resolve_label(
    prefix: Option<&str>,
    gen_name: Option<&str>,
    pres: &AlgebraPresentation,
) -> Result<Symbol> {
    if let Some(p) = prefix {
        let sym = Symbol::new(p);
        if !pres.has_label(sym) {
            return Err(parse_err(format!("unknown algebra label `{p}`")));
        }
        return Ok(sym);
    }
    if let Some(sole) = pres.sole_label() {
        return Ok(sole);
    }
    if let Some(name) = gen_name {
        let sym = Symbol::new(name);
        let owners: Vec<Symbol> = pres
            .labels()
            .filter(|l| pres.generators_of(*l).contains(&sym))
            .collect();
        if owners.len() == 1 {
            return Ok(owners[0]);
        }
    }
    Err(parse_err(
        "ambiguous algebra label; use an `algebra:` prefix".to_string(),
    ))
}

fn parse_letter_token(tok: &str, pres: &AlgebraPresentation) -> Result<Factor> {
    let (prefix, body) = match tok.split_once(':') {
        Some((p, b)) => (Some(p), b),
        None => (None, tok),
    };
    if body.is_empty() {
        return Err(parse_err(format!("empty letter token `{tok}`")));
    }

    // Projections: q<m>, qinf, p<k>.
    if let Some(rest) = body.strip_prefix('q') {
        if rest == "inf" {
            let label = resolve_label(prefix, None, pres)?;
            return Ok(Factor::Letter(Letter::proj(label, Level::INF)));
        }
        if let Ok(m) = rest.parse::<u32>() {
            let label = resolve_label(prefix, None, pres)?;
            return Ok(Factor::Letter(Letter::proj(label, Level(m))));
        }
    }
    if let Some(rest) = body.strip_prefix('p') {
        if let Ok(k) = rest.parse::<u32>() {
            if k == 0 {
                return Err(parse_err("p0 is not a lattice element"));
            }
            let label = resolve_label(prefix, None, pres)?;
            return Ok(Factor::OrthProj(label, k));
        }
    }

    // Generator copies: NAME[' | ''](copy)[*]
    let (body, star) = match body.strip_suffix('*') {
        Some(b) => (b, true),
        None => (body, false),
    };
    let open = body
        .find('(')
        .ok_or_else(|| parse_err(format!("expected `(copy)` in `{tok}`")))?;
    let close = body
        .rfind(')')
        .filter(|c| *c > open)
        .ok_or_else(|| parse_err(format!("unbalanced parentheses in `{tok}`")))?;
    let copy: u32 = body[open + 1..close]
        .parse()
        .map_err(|_| parse_err(format!("bad copy index in `{tok}`")))?;
    if copy == 0 {
        return Err(parse_err(format!("copy index must be >= 1 in `{tok}`")));
    }
    let head = &body[..open];
    let (name, dec) = if let Some(n) = head.strip_suffix("''") {
        (n, Decoration::DoublePrime)
    } else if let Some(n) = head.strip_suffix('\'') {
        (n, Decoration::Prime)
    } else {
        (head, Decoration::Plain)
    };
    if name.is_empty() || !name.chars().next().unwrap().is_ascii_alphabetic() {
        return Err(parse_err(format!("bad generator name in `{tok}`")));
    }
    let label = resolve_label(prefix, Some(name), pres)?;
    let letter = Letter::gen(label, Symbol::new(name), copy, dec, star);
    pres.check_letter(&letter)?;
    Ok(Factor::Letter(letter))
}

/// Parses a polynomial in the textual word syntax. The result is not
/// reduced; `p_k` letters are already expanded over the lattice basis so the
/// polynomial lives in the span of `q`-words.
pub fn parse_poly(input: &str, pres: &AlgebraPresentation) -> Result<NCPolynomial> {
    let tokens: Vec<&str> = input.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(parse_err("empty input"));
    }
    let mut out = NCPolynomial::zero();
    let mut idx = 0;
    let mut sign = Coeff::one();
    let mut first = true;
    while idx < tokens.len() {
        // Sign / operator handling between terms.
        match tokens[idx] {
            "+" => {
                if first {
                    return Err(parse_err("leading `+`"));
                }
                sign = Coeff::one();
                idx += 1;
            }
            "-" => {
                sign = -Coeff::one();
                idx += 1;
            }
            _ if !first => {
                return Err(parse_err(format!(
                    "expected `+` or `-` before `{}`",
                    tokens[idx]
                )));
            }
            _ => {}
        }
        if idx >= tokens.len() {
            return Err(parse_err("dangling operator"));
        }

        // Optional coefficient.
        let mut coeff = sign.clone();
        if looks_like_number(tokens[idx]) {
            let c = parse_rational(tokens[idx])
                .ok_or_else(|| parse_err(format!("bad coefficient `{}`", tokens[idx])))?;
            coeff *= c;
            idx += 1;
        }

        // Letters until the next operator; a bare coefficient is a scalar term.
        // Terms are built as (letters, coeff) pairs so p_k expansion stays local.
        let mut expansion: Vec<(Vec<Letter>, Coeff)> = vec![(Vec::new(), coeff)];
        while idx < tokens.len() && tokens[idx] != "+" && tokens[idx] != "-" {
            match parse_letter_token(tokens[idx], pres)? {
                Factor::Letter(l) => {
                    for (w, _) in expansion.iter_mut() {
                        w.push(l);
                    }
                }
                Factor::OrthProj(label, k) => {
                    let mut next = Vec::with_capacity(expansion.len() * 2);
                    for (w, c) in expansion {
                        let mut hi = w.clone();
                        hi.push(Letter::proj(label, Level(k)));
                        next.push((hi, c.clone()));
                        let mut lo = w;
                        lo.push(Letter::proj(label, Level(k - 1)));
                        next.push((lo, -c));
                    }
                    expansion = next;
                }
            }
            idx += 1;
        }
        for (letters, c) in expansion {
            out.add_term(Word::intern(&letters), c);
        }
        first = false;
        sign = Coeff::one();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::reduce;

    fn f0() -> AlgebraPresentation {
        AlgebraPresentation::f0("G", &["X", "Y"]).unwrap()
    }

    #[test]
    fn parses_projection_words() {
        let pres = f0();
        let p = parse_poly("q3 X'(1) q2", &pres).unwrap();
        assert_eq!(p.num_terms(), 1);
        let (w, c) = &p.sorted_terms()[0];
        assert_eq!(w.to_string(), "q3 X'(1) q2");
        assert!(c.is_one());
    }

    #[test]
    fn expands_p_letters() {
        let pres = f0();
        // p1 = q1 - q0 and q0 = 0, so reduce leaves just q1.
        let p = reduce(&parse_poly("p1", &pres).unwrap(), &pres);
        assert_eq!(p.to_string(), "q1");
        let p2 = reduce(&parse_poly("p2", &pres).unwrap(), &pres);
        assert_eq!(p2.to_string(), "- q1 + q2");
    }

    #[test]
    fn parses_coefficients_and_signs() {
        let pres = f0();
        let p = parse_poly("3/4 X'(1) - 2 Y''(2)*", &pres).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.to_string(), "3/4 X'(1) - 2 Y''(2)*");
    }

    #[test]
    fn rejects_unknown_generator() {
        let pres = f0();
        assert!(parse_poly("Z'(1)", &pres).is_err());
    }

    #[test]
    fn rejects_wrong_schema_decoration() {
        let pres = AlgebraPresentation::h0(&[("A", &["X"])]).unwrap();
        assert!(parse_poly("X'(1)", &pres).is_err());
        assert!(parse_poly("X(1)", &pres).is_ok());
    }

    #[test]
    fn label_prefix_resolves_ambiguity() {
        let pres = AlgebraPresentation::h0(&[("A", &["X"]), ("B", &["Y"])]).unwrap();
        assert!(parse_poly("q1", &pres).is_err());
        assert!(parse_poly("A:q1", &pres).is_ok());
        // Generator names pick their label automatically.
        assert!(parse_poly("Y(2)", &pres).is_ok());
    }
}
