//! Moment functionals and their evaluation: univariate moment specs with
//! standard presets, the boolean extension, the site-wise homomorphism into
//! the infinite tensor product, and stabilized evaluation of monotone
//! operators.

use num_traits::{One, Zero};
use std::fmt;

use crate::error::{EngineError, Result};
use crate::monotone::{LatticeElem, MonotoneOp};
use crate::ncpoly::{Coeff, Letter, NCPolynomial, Word};
use crate::parse::parse_rational;
use crate::tensorspace::{TensorMonotoneOp, TensorPoly};

/// Moment presets; all generate exact rational moment sequences on demand.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    /// Semicircle law with the given variance: odd moments vanish, even
    /// moments are Catalan numbers times variance powers.
    Semicircle { variance: Coeff },
    /// Two-point mass: weight at `a`, complementary weight at `b`.
    TwoPoint { a: Coeff, b: Coeff, weight: Coeff },
    /// Point mass at `c`.
    Point { c: Coeff },
    /// Explicit list of moments m_1, m_2, ... .
    Custom { moments: Vec<Coeff> },
}

/// A state given by its moment sequence on a single self-adjoint generator,
/// with mu(1) = 1 and a hard budget on the orders it can produce.
#[derive(Clone, Debug)]
pub struct MomentSpec {
    pub label: String,
    pub max_order: usize,
    pub preset: Preset,
    moments: Vec<Coeff>,
}

fn catalan_numbers(n: usize) -> Vec<Coeff> {
    // C_0 .. C_n by the convolution recursion C_{k+1} = sum C_i C_{k-i}.
    let mut c = vec![Coeff::one()];
    for k in 0..n {
        let mut next = Coeff::zero();
        for i in 0..=k {
            next += &c[i] * &c[k - i];
        }
        c.push(next);
    }
    c
}

impl MomentSpec {
    fn build(label: &str, preset: Preset, max_order: usize) -> Result<MomentSpec> {
        let moments = match &preset {
            Preset::Semicircle { variance } => {
                let cat = catalan_numbers(max_order / 2);
                (1..=max_order)
                    .map(|n| {
                        if n % 2 == 1 {
                            Coeff::zero()
                        } else {
                            let half = n / 2;
                            let mut v = cat[half].clone();
                            for _ in 0..half {
                                v *= variance;
                            }
                            v
                        }
                    })
                    .collect()
            }
            Preset::TwoPoint { a, b, weight } => {
                let co_weight = Coeff::one() - weight;
                let (mut pa, mut pb) = (Coeff::one(), Coeff::one());
                (1..=max_order)
                    .map(|_| {
                        pa *= a;
                        pb *= b;
                        weight * &pa + &co_weight * &pb
                    })
                    .collect()
            }
            Preset::Point { c } => {
                let mut p = Coeff::one();
                (1..=max_order)
                    .map(|_| {
                        p *= c;
                        p.clone()
                    })
                    .collect()
            }
            Preset::Custom { moments } => {
                if moments.len() < max_order {
                    return Err(EngineError::Parse(format!(
                        "custom spec `{label}` lists {} moments but max_order is {max_order}",
                        moments.len()
                    )));
                }
                moments[..max_order].to_vec()
            }
        };
        Ok(MomentSpec {
            label: label.to_string(),
            max_order,
            preset,
            moments,
        })
    }

    pub fn semicircle(label: &str, variance: Coeff, max_order: usize) -> MomentSpec {
        MomentSpec::build(label, Preset::Semicircle { variance }, max_order)
            .expect("semicircle preset is total")
    }

    pub fn two_point(label: &str, a: Coeff, b: Coeff, weight: Coeff, max_order: usize) -> MomentSpec {
        MomentSpec::build(label, Preset::TwoPoint { a, b, weight }, max_order)
            .expect("two-point preset is total")
    }

    pub fn point(label: &str, c: Coeff, max_order: usize) -> MomentSpec {
        MomentSpec::build(label, Preset::Point { c }, max_order).expect("point preset is total")
    }

    pub fn custom(label: &str, moments: Vec<Coeff>) -> MomentSpec {
        let max_order = moments.len();
        MomentSpec::build(label, Preset::Custom { moments }, max_order)
            .expect("length checked above")
    }

    /// `m_n`; `m_0 = 1`. Orders above the budget raise a spec-exhausted
    /// error rather than fabricating values.
    pub fn moment(&self, n: usize) -> Result<Coeff> {
        if n == 0 {
            return Ok(Coeff::one());
        }
        self.moments.get(n - 1).cloned().ok_or(EngineError::SpecExhausted {
            label: self.label.clone(),
            needed: n,
            max_order: self.max_order,
        })
    }

    /// Warn-level positivity probe: leading principal minors of the Hankel
    /// moment matrix `[m_{i+j}]` over the available orders. Returns false
    /// when some minor is negative (the spec is not a state on polynomials).
    pub fn hankel_psd(&self) -> bool {
        let dim = self.max_order / 2 + 1;
        for size in 1..=dim {
            let mut mat: Vec<Vec<Coeff>> = (0..size)
                .map(|i| {
                    (0..size)
                        .map(|j| self.moment(i + j).expect("i+j <= max_order"))
                        .collect()
                })
                .collect();
            if determinant(&mut mat) < Coeff::zero() {
                return false;
            }
        }
        true
    }

    /// Parses the JSON moment-spec format:
    /// `{"label": "mu", "preset": "two_point", "params": {"a": "-1", "b": "1",
    /// "weight": "1/2"}, "max_order": 12}` or
    /// `{"preset": "custom", "moments": ["0", "1", "0", "2"]}`.
    pub fn from_json(input: &str) -> Result<MomentSpec> {
        let v: serde_json::Value = serde_json::from_str(input)
            .map_err(|e| EngineError::Parse(format!("bad moment-spec JSON: {e}")))?;
        let label = v
            .get("label")
            .and_then(|l| l.as_str())
            .unwrap_or("mu")
            .to_string();
        let preset = v
            .get("preset")
            .and_then(|p| p.as_str())
            .ok_or_else(|| EngineError::Parse("moment spec needs a `preset`".into()))?;
        let rat = |node: &serde_json::Value, what: &str| -> Result<Coeff> {
            node.as_str()
                .and_then(parse_rational)
                .or_else(|| node.as_i64().map(|n| Coeff::from_integer(n.into())))
                .ok_or_else(|| {
                    EngineError::Parse(format!("bad rational for `{what}` in moment spec"))
                })
        };
        let param = |name: &str| -> Result<Coeff> {
            let p = v
                .get("params")
                .and_then(|p| p.get(name))
                .ok_or_else(|| EngineError::Parse(format!("missing param `{name}`")))?;
            rat(p, name)
        };
        if preset == "custom" {
            let arr = v
                .get("moments")
                .and_then(|m| m.as_array())
                .ok_or_else(|| EngineError::Parse("custom spec needs `moments`".into()))?;
            let moments = arr
                .iter()
                .map(|n| rat(n, "moments"))
                .collect::<Result<Vec<Coeff>>>()?;
            return Ok(MomentSpec::custom(&label, moments));
        }
        let max_order = v
            .get("max_order")
            .and_then(|m| m.as_u64())
            .ok_or_else(|| EngineError::Parse("moment spec needs `max_order`".into()))?
            as usize;
        match preset {
            "semicircle" => Ok(MomentSpec::semicircle(&label, param("variance")?, max_order)),
            "two_point" => Ok(MomentSpec::two_point(
                &label,
                param("a")?,
                param("b")?,
                param("weight")?,
                max_order,
            )),
            "point" => Ok(MomentSpec::point(&label, param("c")?, max_order)),
            other => Err(EngineError::Parse(format!("unknown preset `{other}`"))),
        }
    }
}

impl fmt::Display for MomentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (max order {})", self.label, self.max_order)
    }
}

/// Exact determinant by fraction-preserving Gaussian elimination.
fn determinant(mat: &mut [Vec<Coeff>]) -> Coeff {
    let n = mat.len();
    let mut det = Coeff::one();
    for col in 0..n {
        let pivot_row = match (col..n).find(|&r| !mat[r][col].is_zero()) {
            Some(r) => r,
            None => return Coeff::zero(),
        };
        if pivot_row != col {
            mat.swap(pivot_row, col);
            det = -det;
        }
        let pivot = mat[col][col].clone();
        det *= &pivot;
        for row in col + 1..n {
            let factor = &mat[row][col] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let delta = &factor * &mat[col][k];
                mat[row][k] -= delta;
            }
        }
    }
    det
}

/// One site's letter sequence under the homomorphism into the infinite
/// tensor product: the generator at that copy index contributes its symbol,
/// every projection of level <= site contributes the marker `P`.
enum SiteLetter {
    Gen,
    Marker,
}

/// Evaluates the composed state on a word of the plain-copy algebra:
/// each site i carries the subword of letters occupying it (generator copies
/// X(i), markers P from projections q_m with m <= i); the boolean extension
/// splits the site word at markers and multiplies the base moments of the
/// maximal marker-free segments. Sites above every copy index carry only
/// markers and contribute 1.
pub fn xi_evaluate(w: &Word, spec: &MomentSpec) -> Result<Coeff> {
    let mut max_copy = 0u32;
    for l in w.letters() {
        match l {
            Letter::Gen { copy, .. } => max_copy = max_copy.max(*copy),
            Letter::Proj { level, .. } => {
                if level.is_zero() || level.is_inf() {
                    return Err(EngineError::Presentation(
                        "state evaluation expects words in normal form".into(),
                    ));
                }
            }
        }
    }
    let mut product = Coeff::one();
    for site in 1..=max_copy {
        let mut letters = Vec::new();
        for l in w.letters() {
            match l {
                Letter::Gen { copy, dec, .. } => {
                    if *dec != crate::ncpoly::Decoration::Plain {
                        return Err(EngineError::Presentation(
                            "state evaluation is defined on plain (undecorated) copies".into(),
                        ));
                    }
                    if *copy == site {
                        letters.push(SiteLetter::Gen);
                    }
                }
                Letter::Proj { level, .. } => {
                    if level.0 <= site {
                        letters.push(SiteLetter::Marker);
                    }
                }
            }
        }
        // Boolean split: product of base moments over marker-free segments.
        let mut segment = 0usize;
        for sl in &letters {
            match sl {
                SiteLetter::Gen => segment += 1,
                SiteLetter::Marker => {
                    if segment > 0 {
                        product *= spec.moment(segment)?;
                        segment = 0;
                    }
                }
            }
        }
        if segment > 0 {
            product *= spec.moment(segment)?;
        }
    }
    Ok(product)
}

/// State value of a polynomial: linear extension of `xi_evaluate`.
pub fn evaluate_poly(p: &NCPolynomial, spec: &MomentSpec) -> Result<Coeff> {
    let mut acc = Coeff::zero();
    for (w, c) in p.terms() {
        acc += c * xi_evaluate(w, spec)?;
    }
    Ok(acc)
}

/// Product state on a tensor polynomial: sum over terms of coefficient times
/// the product of leg-wise evaluations.
pub fn tensor_state(w: &TensorPoly, specs: &[MomentSpec]) -> Result<Coeff> {
    if specs.len() != w.space().num_legs() {
        return Err(EngineError::Presentation(
            "one moment spec per tensor leg required".into(),
        ));
    }
    let mut acc = Coeff::zero();
    for (tuple, c) in w.terms() {
        let mut term = c.clone();
        for (word, spec) in tuple.iter().zip(specs.iter()) {
            term *= xi_evaluate(word, spec)?;
        }
        acc += term;
    }
    Ok(acc)
}

/// A stabilized limit value: the index where the q1-compression became
/// symbolically stationary and the value agreed with the next index.
#[derive(Clone, Debug, PartialEq)]
pub struct Certified<T> {
    pub value: T,
    pub stabilized_at: u32,
    pub checked_at: u32,
}

/// Evaluates the state on a monotone operator as a stabilized limit of the
/// values at finite indices. Stabilization requires the symbolic equality of
/// the q1-compressions `q1 x_m q1` for two consecutive indices AND equality
/// of the two values; value-only agreement can be coincidental.
pub fn mco_state(z: &MonotoneOp, spec: &MomentSpec) -> Result<Certified<Coeff>> {
    let cap = z.truncation_cap();
    let label = z.label();
    let pres = z.pres().clone();
    let compress = |m: u32| -> NCPolynomial {
        let x = z.x_at(m);
        let left = LatticeElem::Q(1).apply(&x, label, false, &pres);
        LatticeElem::Q(1).apply(&left, label, true, &pres)
    };
    let mut prev_comp = compress(1);
    let mut prev_val = evaluate_poly(&z.x_at(1), spec)?;
    for m in 2..=cap {
        let comp = compress(m);
        let val = evaluate_poly(&z.x_at(m), spec)?;
        if comp == prev_comp && val == prev_val {
            return Ok(Certified {
                value: val,
                stabilized_at: m - 1,
                checked_at: m,
            });
        }
        prev_comp = comp;
        prev_val = val;
    }
    let lo = evaluate_poly(&z.x_at(cap - 1), spec)?;
    let hi = evaluate_poly(&z.x_at(cap), spec)?;
    Err(EngineError::NonStabilized {
        cap,
        at: cap - 1,
        at_next: cap,
        lo,
        hi,
    })
}

/// Tensor analog of [`mco_state`]: leg-wise q1-compression and the product
/// state, with the same two-part stabilization certificate.
pub fn tensor_mco_state(
    z: &TensorMonotoneOp,
    specs: &[MomentSpec],
) -> Result<Certified<Coeff>> {
    let cap = z.truncation_cap();
    let n = z.space().num_legs();
    let q1 = vec![LatticeElem::Q(1); n];
    let compress = |m: u32| -> TensorPoly {
        z.z_at(m).apply_lattice(&q1, false).apply_lattice(&q1, true)
    };
    let mut prev_comp = compress(1);
    let mut prev_val = tensor_state(&z.z_at(1), specs)?;
    for m in 2..=cap {
        let comp = compress(m);
        let val = tensor_state(&z.z_at(m), specs)?;
        if comp == prev_comp && val == prev_val {
            return Ok(Certified {
                value: val,
                stabilized_at: m - 1,
                checked_at: m,
            });
        }
        prev_comp = comp;
        prev_val = val;
    }
    let lo = tensor_state(&z.z_at(cap - 1), specs)?;
    let hi = tensor_state(&z.z_at(cap), specs)?;
    Err(EngineError::NonStabilized {
        cap,
        at: cap - 1,
        at_next: cap,
        lo,
        hi,
    })
}
