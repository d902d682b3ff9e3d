//! Tensor-product representation of free random variables: the embeddings
//! sending an algebra element `a` to `sum_k a(k) (x) p_k` (with the composite
//! projection over the remaining legs), mixed-moment evaluation with a
//! truncation-stabilization certificate, and the m-free hierarchy whose
//! bottom level reproduces boolean independence.

use std::sync::Arc;

use crate::algebras::AlgebraPresentation;
use crate::error::{EngineError, Result};
use crate::monotone::MsddDescriptor;
use crate::ncpoly::{Coeff, Letter, NCPolynomial, Word};
use crate::states::{evaluate_poly, tensor_state, Certified, MomentSpec};
use crate::symbol::Symbol;
use crate::tensorspace::{Leg, TensorMonotoneOp, TensorMsdd, TensorPoly, TensorSpace};

/// Builds the tensor space whose legs are fresh single-generator plain-copy
/// algebras with the given (label, generator) names.
pub fn plain_tensor_space(names: &[(&str, &str)]) -> Result<TensorSpace> {
    let mut legs = Vec::with_capacity(names.len());
    for (label, gen) in names {
        let pres = Arc::new(AlgebraPresentation::h0(&[(label, &[*gen][..])])?);
        legs.push(Leg::new(pres, Symbol::new(label)));
    }
    TensorSpace::new(legs)
}

/// Checks that `a` is a base element of its leg: every letter a generator at
/// copy index 1, no projections.
fn check_base(a: &NCPolynomial, leg: &Leg) -> Result<()> {
    leg.pres.check_poly(a)?;
    for (w, _) in a.terms() {
        for l in w.letters() {
            match l {
                Letter::Gen { copy: 1, .. } => {}
                _ => {
                    return Err(EngineError::Presentation(
                        "base elements are polynomials in the copy-1 generators".into(),
                    ))
                }
            }
        }
    }
    Ok(())
}

/// The copy of a base element at index `k`: every letter's copy index moved
/// from 1 to `k`.
pub fn at_copy(a: &NCPolynomial, k: u32) -> NCPolynomial {
    let mut out = NCPolynomial::zero();
    for (w, c) in a.terms() {
        let letters: Vec<Letter> = w
            .letters()
            .iter()
            .map(|l| match *l {
                Letter::Gen {
                    label,
                    gen,
                    dec,
                    star,
                    ..
                } => Letter::gen(label, gen, k, dec, star),
                p => p,
            })
            .collect();
        out.add_term(Word::intern(&letters), c.clone());
    }
    out
}

/// Mean of a base element under its leg's state.
pub fn mean(a: &NCPolynomial, spec: &MomentSpec) -> Result<Coeff> {
    evaluate_poly(a, spec)
}

/// `a` minus its mean: the centered element.
pub fn centered(a: &NCPolynomial, spec: &MomentSpec) -> Result<NCPolynomial> {
    let m = mean(a, spec)?;
    Ok(a.sub(&NCPolynomial::from_term(Word::unit(), m)))
}

/// One summand of the embedding: `a(k)` on the chosen leg, the composite
/// projection difference `q_k (x) ... - q_{k-1} (x) ...` on the others (the
/// `k = 1` low term drops since `q_0 = 0`).
fn embed_summand(space: &TensorSpace, leg_idx: usize, a: &NCPolynomial, k: u32) -> TensorPoly {
    let n = space.num_legs();
    let a_k = at_copy(a, k);
    let mut out = TensorPoly::zero(space);
    let mut build = |level: u32, sign: i64| {
        let factors: Vec<NCPolynomial> = (0..n)
            .map(|i| {
                if i == leg_idx {
                    a_k.clone()
                } else {
                    NCPolynomial::from_word(Word::single(Letter::proj(
                        space.legs()[i].label,
                        crate::ncpoly::Level(level),
                    )))
                }
            })
            .collect();
        out = out.add(&TensorPoly::pure(space, &factors).scale(&crate::ncpoly::coeff(sign)));
    };
    build(k, 1);
    if k > 1 {
        build(k - 1, -1);
    }
    out
}

/// Embedding of a base element of leg `leg_idx` as a tensor monotone
/// operator: `z_m = sum_{k<=m} a(k) (x) p_k` with the lockstep diagonal MSDD.
pub fn embed_element(
    a: &NCPolynomial,
    leg_idx: usize,
    space: &TensorSpace,
    cap: u32,
) -> Result<TensorMonotoneOp> {
    if leg_idx >= space.num_legs() {
        return Err(EngineError::Presentation(format!(
            "leg index {leg_idx} out of range for {} legs",
            space.num_legs()
        )));
    }
    check_base(a, &space.legs()[leg_idx])?;
    let space_c = space.clone();
    let a = a.clone();
    let n = space.num_legs();
    Ok(TensorMonotoneOp::from_rule(
        space.clone(),
        cap,
        TensorMsdd(vec![MsddDescriptor::LatticeShift(0); n]),
        move |m| {
            let mut z = TensorPoly::zero(&space_c);
            for k in 1..=m {
                z = z.add(&embed_summand(&space_c, leg_idx, &a, k));
            }
            z
        },
    ))
}

/// Product of the embeddings of a mixed word, left-associated.
pub fn embedded_product(
    word: &[(usize, NCPolynomial)],
    space: &TensorSpace,
    cap: u32,
) -> Result<TensorMonotoneOp> {
    if word.is_empty() {
        return Ok(TensorMonotoneOp::identity(space.clone(), cap));
    }
    let mut acc: Option<TensorMonotoneOp> = None;
    for (leg, a) in word {
        let e = embed_element(a, *leg, space, cap)?;
        acc = Some(match acc {
            None => e,
            Some(p) => p.mul(&e)?,
        });
    }
    Ok(acc.unwrap())
}

/// The all-ones marker tuple `q1 (x) ... (x) q1`: leading markers are no-ops
/// under the boolean-extended states, so seeding a product accumulation with
/// it preserves the tensor state value while the compression collapses all
/// but the near-diagonal terms of each partial product.
fn q1_seed(space: &TensorSpace) -> TensorPoly {
    let factors: Vec<NCPolynomial> = space
        .legs()
        .iter()
        .map(|l| {
            NCPolynomial::from_word(Word::single(Letter::proj(l.label, crate::ncpoly::Level(1))))
        })
        .collect();
    TensorPoly::pure(space, &factors)
}

/// Tensor state of the product of embeddings at a fixed truncation index,
/// computed with left-compressed accumulation.
fn embedded_product_value(
    word: &[(usize, NCPolynomial)],
    space: &TensorSpace,
    specs: &[MomentSpec],
    m: u32,
) -> Result<Coeff> {
    let mut acc = q1_seed(space);
    for (leg, a) in word {
        if *leg >= space.num_legs() {
            return Err(EngineError::Presentation(format!(
                "leg index {leg} out of range"
            )));
        }
        check_base(a, &space.legs()[*leg])?;
        let mut factor = TensorPoly::zero(space);
        for k in 1..=m {
            factor = factor.add(&embed_summand(space, *leg, a, k));
        }
        acc = acc.mul(&factor);
    }
    tensor_state(&acc, specs)
}

/// Mixed moment of a word of (leg, base element) factors under the tensor
/// product state, evaluated at truncation `K` and certified by recomputation
/// at `K + 1`; disagreement raises a non-stabilized error with both values.
pub fn mixed_moment(
    word: &[(usize, NCPolynomial)],
    space: &TensorSpace,
    specs: &[MomentSpec],
    truncation: Option<u32>,
) -> Result<Certified<Coeff>> {
    let k = truncation.unwrap_or(word.len().max(1) as u32);
    let lo = embedded_product_value(word, space, specs, k)?;
    let hi = embedded_product_value(word, space, specs, k + 1)?;
    if lo != hi {
        return Err(EngineError::NonStabilized {
            cap: k + 1,
            at: k,
            at_next: k + 1,
            lo,
            hi,
        });
    }
    Ok(Certified {
        value: hi,
        stabilized_at: k,
        checked_at: k + 1,
    })
}

/// The m-free mixed moment: every factor embedded with the hard truncation
/// `sum_{k<=m} a(k) (x) p_k` and NO stabilization requirement. `m = 1` is the
/// boolean product; `m` at or above the stabilization scale reproduces the
/// free value.
pub fn m_free_moment(
    word: &[(usize, NCPolynomial)],
    space: &TensorSpace,
    specs: &[MomentSpec],
    m: u32,
) -> Result<Coeff> {
    if m < 1 {
        return Err(EngineError::Presentation(
            "the m-free hierarchy starts at m = 1".into(),
        ));
    }
    let mut acc = q1_seed(space);
    for (leg, a) in word {
        if *leg >= space.num_legs() {
            return Err(EngineError::Presentation(format!(
                "leg index {leg} out of range"
            )));
        }
        check_base(a, &space.legs()[*leg])?;
        let mut factor = TensorPoly::zero(space);
        for k in 1..=m {
            factor = factor.add(&embed_summand(space, *leg, a, k));
        }
        acc = acc.mul(&factor);
    }
    tensor_state(&acc, specs)
}

/// True when some leg word of the term contains a factor `q_k X(k) q_k`
/// modulo the defining relations: a generator letter at copy `k` such that
/// inserting `q_k` on both sides of it reduces back to the same word (the
/// inserted projections being swallowed by absorption or lattice meets).
pub fn has_singleton_factor(tuple: &[Word], space: &TensorSpace) -> bool {
    tuple.iter().zip(space.legs()).any(|(w, leg)| {
        let ls = w.letters();
        (0..ls.len()).any(|i| {
            let (copy, label) = match ls[i] {
                Letter::Gen { copy, label, .. } => (copy, label),
                _ => return false,
            };
            let q = Letter::proj(label, crate::ncpoly::Level(copy));
            let mut padded = Vec::with_capacity(ls.len() + 2);
            padded.extend_from_slice(&ls[..i]);
            padded.push(q);
            padded.push(ls[i]);
            padded.push(q);
            padded.extend_from_slice(&ls[i + 1..]);
            crate::rewrite::reduce_word(&Word::intern(&padded), &leg.pres) == Some(w.clone())
        })
    })
}
