//! Operators with monotone closure: MSDD lattice bookkeeping, the
//! inverse-image projection `x^{-1}(e)`, the four arithmetic operations on
//! coherent sequences `(x_m, e_m)`, equivalence testing, and pre-free random
//! variables with their product law.

use dashmap::DashMap;
use std::fmt;
use std::sync::Arc;

use crate::algebras::AlgebraPresentation;
use crate::error::{EngineError, Result};
use crate::ncpoly::{Coeff, Decoration, Letter, Level, NCPolynomial, Word};
use crate::rewrite::{multiply_unchecked, reduce};
use crate::symbol::Symbol;

/// An element of the extended projection lattice `P ∪ {0, 1}`.
/// Totally ordered: `Zero < Q(1) < Q(2) < ... < One`; the meet of two
/// elements is their minimum.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LatticeElem {
    Zero,
    Q(u32),
    One,
}

impl LatticeElem {
    fn rank(self) -> u64 {
        match self {
            LatticeElem::Zero => 0,
            LatticeElem::Q(j) => {
                debug_assert!(j >= 1);
                j as u64
            }
            LatticeElem::One => u64::MAX,
        }
    }

    pub fn meet(self, other: LatticeElem) -> LatticeElem {
        if self.rank() <= other.rank() {
            self
        } else {
            other
        }
    }

    /// `q_j` for finite positive j, normalizing the boundary levels.
    pub fn from_level(level: Level) -> LatticeElem {
        if level.is_zero() {
            LatticeElem::Zero
        } else if level.is_inf() {
            LatticeElem::One
        } else {
            LatticeElem::Q(level.0)
        }
    }

    pub fn to_poly(self, label: Symbol) -> NCPolynomial {
        match self {
            LatticeElem::Zero => NCPolynomial::zero(),
            LatticeElem::One => NCPolynomial::unit(),
            LatticeElem::Q(j) => {
                NCPolynomial::from_word(Word::single(Letter::proj(label, Level(j))))
            }
        }
    }

    /// `x * e` (or `e * x`), reduced.
    pub fn apply(
        self,
        x: &NCPolynomial,
        label: Symbol,
        on_right: bool,
        pres: &AlgebraPresentation,
    ) -> NCPolynomial {
        match self {
            LatticeElem::Zero => NCPolynomial::zero(),
            LatticeElem::One => reduce(x, pres),
            LatticeElem::Q(_) => {
                let q = self.to_poly(label);
                if on_right {
                    multiply_unchecked(x, &q, pres)
                } else {
                    multiply_unchecked(&q, x, pres)
                }
            }
        }
    }
}

impl PartialOrd for LatticeElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LatticeElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for LatticeElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeElem::Zero => write!(f, "0"),
            LatticeElem::Q(j) => write!(f, "q{j}"),
            LatticeElem::One => write!(f, "1"),
        }
    }
}

/// Closed-form monotone strongly dense domains.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MsddDescriptor {
    /// `e_m = q_{m-k}` (zero while `m <= k`).
    LatticeShift(u32),
    /// `e_m = 1` for `m > k`, else zero. Used to embed plain algebra elements.
    UnitShift(u32),
    /// Finite prefix of explicit lattice elements, then a shift rule.
    Explicit {
        prefix: Vec<LatticeElem>,
        tail: Box<MsddDescriptor>,
    },
}

impl MsddDescriptor {
    pub fn at(&self, m: u32) -> LatticeElem {
        match self {
            MsddDescriptor::LatticeShift(k) => {
                if m <= *k {
                    LatticeElem::Zero
                } else {
                    LatticeElem::Q(m - k)
                }
            }
            MsddDescriptor::UnitShift(k) => {
                if m <= *k {
                    LatticeElem::Zero
                } else {
                    LatticeElem::One
                }
            }
            MsddDescriptor::Explicit { prefix, tail } => {
                if m >= 1 && (m as usize) <= prefix.len() {
                    prefix[m as usize - 1]
                } else {
                    tail.at(m)
                }
            }
        }
    }
}

/// The largest projection `g` in `P ∪ {0, 1}` with `(1 - e) x g = 0`,
/// i.e. `e x g = x g`. Computed by descending threshold search: the solution
/// set is downward closed in the total order, and absorption caps the search
/// at the filtration level of `x`.
pub fn inverse_image(
    x: &NCPolynomial,
    e: LatticeElem,
    label: Symbol,
    pres: &AlgebraPresentation,
) -> LatticeElem {
    let ex = e.apply(x, label, false, pres);
    let y = reduce(x, pres).sub(&ex);
    if y.is_zero() {
        return LatticeElem::One;
    }
    let top = y.filtration();
    for j in (1..=top).rev() {
        if LatticeElem::Q(j).apply(&y, label, true, pres).is_zero() {
            return LatticeElem::Q(j);
        }
    }
    LatticeElem::Zero
}

type PolyFn = dyn Fn(u32) -> NCPolynomial + Send + Sync;
type LatticeFn = dyn Fn(u32) -> LatticeElem + Send + Sync;

struct OpInner {
    x_fn: Box<PolyFn>,
    x_memo: DashMap<u32, NCPolynomial>,
    e_fn: Box<LatticeFn>,
    e_memo: DashMap<u32, LatticeElem>,
    /// Closed-form MSDD when known at construction time.
    descriptor: Option<MsddDescriptor>,
}

/// An operator with monotone closure: a rule `m -> x_m` together with an
/// MSDD, materializable up to `truncation_cap`. A monotone closed operator is
/// such a witness considered up to [`MonotoneOp::equivalent`].
#[derive(Clone)]
pub struct MonotoneOp {
    pres: Arc<AlgebraPresentation>,
    label: Symbol,
    cap: u32,
    inner: Arc<OpInner>,
}

/// Default materialization cap for a requested moment order.
pub fn default_cap(order: u32) -> u32 {
    2 * order + 2
}

impl MonotoneOp {
    pub fn from_rule<F>(
        pres: Arc<AlgebraPresentation>,
        label: Symbol,
        cap: u32,
        descriptor: MsddDescriptor,
        x_fn: F,
    ) -> MonotoneOp
    where
        F: Fn(u32) -> NCPolynomial + Send + Sync + 'static,
    {
        let d = descriptor.clone();
        MonotoneOp {
            pres,
            label,
            cap,
            inner: Arc::new(OpInner {
                x_fn: Box::new(x_fn),
                x_memo: DashMap::new(),
                e_fn: Box::new(move |m| d.at(m)),
                e_memo: DashMap::new(),
                descriptor: Some(descriptor),
            }),
        }
    }

    fn from_closures(
        pres: Arc<AlgebraPresentation>,
        label: Symbol,
        cap: u32,
        x_fn: Box<PolyFn>,
        e_fn: Box<LatticeFn>,
    ) -> MonotoneOp {
        MonotoneOp {
            pres,
            label,
            cap,
            inner: Arc::new(OpInner {
                x_fn,
                x_memo: DashMap::new(),
                e_fn,
                e_memo: DashMap::new(),
                descriptor: None,
            }),
        }
    }

    /// Embedding of a plain algebra element with filtration level `k`:
    /// `x_m = x` for `m > k`, zero below, with the unit-shift MSDD.
    pub fn embed(
        x: &NCPolynomial,
        pres: Arc<AlgebraPresentation>,
        label: Symbol,
        cap: u32,
    ) -> MonotoneOp {
        let x = reduce(x, &pres);
        let k = x.filtration();
        let xc = x.clone();
        MonotoneOp::from_rule(
            pres,
            label,
            cap,
            MsddDescriptor::UnitShift(k),
            move |m| {
                if m <= k {
                    NCPolynomial::zero()
                } else {
                    xc.clone()
                }
            },
        )
    }

    pub fn pres(&self) -> &Arc<AlgebraPresentation> {
        &self.pres
    }

    pub fn label(&self) -> Symbol {
        self.label
    }

    pub fn truncation_cap(&self) -> u32 {
        self.cap
    }

    pub fn descriptor(&self) -> Option<&MsddDescriptor> {
        self.inner.descriptor.as_ref()
    }

    pub fn x_at(&self, m: u32) -> NCPolynomial {
        if let Some(hit) = self.inner.x_memo.get(&m) {
            return hit.clone();
        }
        let v = (self.inner.x_fn)(m);
        self.inner.x_memo.insert(m, v.clone());
        v
    }

    pub fn e_at(&self, m: u32) -> LatticeElem {
        if let Some(hit) = self.inner.e_memo.get(&m) {
            return *hit;
        }
        let v = (self.inner.e_fn)(m);
        self.inner.e_memo.insert(m, v);
        v
    }

    /// Verifies the OWMC laws up to `up_to`: `x_m` lives in the filtration
    /// level `m`, the MSDD is monotone, and consecutive coherence
    /// `x_{m+1} e_m = x_m e_m` (plus its starred form) holds. For a monotone
    /// MSDD consecutive coherence implies the general `n > m` law.
    pub fn check_coherence(&self, up_to: u32) -> Result<()> {
        let up_to = up_to.min(self.cap);
        for m in 1..=up_to {
            let x_m = self.x_at(m);
            if x_m.filtration() > m {
                return Err(EngineError::Closure(format!(
                    "x_{m} has filtration level {} > {m}",
                    x_m.filtration()
                )));
            }
            if m + 1 <= up_to {
                let e_m = self.e_at(m);
                if self.e_at(m + 1) < e_m {
                    return Err(EngineError::Closure(format!(
                        "MSDD not monotone at m = {m}"
                    )));
                }
                let x_n = self.x_at(m + 1);
                let lhs = e_m.apply(&x_n, self.label, true, &self.pres);
                let rhs = e_m.apply(&x_m, self.label, true, &self.pres);
                if lhs != rhs {
                    return Err(EngineError::Closure(format!(
                        "coherence violated at m = {m}: x_{}' e_{m} != x_{m} e_{m}",
                        m + 1
                    )));
                }
                let lhs_star = e_m.apply(&x_n.involute(), self.label, true, &self.pres);
                let rhs_star = e_m.apply(&x_m.involute(), self.label, true, &self.pres);
                if lhs_star != rhs_star {
                    return Err(EngineError::Closure(format!(
                        "starred coherence violated at m = {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn compatible(&self, other: &MonotoneOp) -> Result<()> {
        if self.pres.id() != other.pres.id() || self.label != other.label {
            return Err(EngineError::Presentation(
                "monotone operands come from different presentations".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &MonotoneOp) -> Result<MonotoneOp> {
        self.compatible(other)?;
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        Ok(MonotoneOp::from_closures(
            self.pres.clone(),
            self.label,
            self.cap.min(other.cap),
            Box::new(move |m| a.x_at(m).add(&b.x_at(m))),
            Box::new(move |m| a2.e_at(m).meet(b2.e_at(m))),
        ))
    }

    pub fn scale(&self, c: &Coeff) -> MonotoneOp {
        let a = self.clone();
        let a2 = self.clone();
        let c = c.clone();
        MonotoneOp::from_closures(
            self.pres.clone(),
            self.label,
            self.cap,
            Box::new(move |m| a.x_at(m).scale(&c)),
            Box::new(move |m| a2.e_at(m)),
        )
    }

    pub fn star(&self) -> MonotoneOp {
        let a = self.clone();
        let a2 = self.clone();
        MonotoneOp::from_closures(
            self.pres.clone(),
            self.label,
            self.cap,
            Box::new(move |m| reduce(&a.x_at(m).involute(), a.pres())),
            Box::new(move |m| a2.e_at(m)),
        )
    }

    /// Product per the closed-operator law: `x y = (x_m y_m, k_m)` with
    /// `k_m = f_m * y_m^{-1}(e_m) * e_m * (x_m^*)^{-1}(f_m)`, the factors
    /// meeting in the totally ordered lattice.
    pub fn mul(&self, other: &MonotoneOp) -> Result<MonotoneOp> {
        self.compatible(other)?;
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        Ok(MonotoneOp::from_closures(
            self.pres.clone(),
            self.label,
            self.cap.min(other.cap),
            Box::new(move |m| multiply_unchecked(&a.x_at(m), &b.x_at(m), a.pres())),
            Box::new(move |m| {
                let e_m = a2.e_at(m);
                let f_m = b2.e_at(m);
                let y_inv = inverse_image(&b2.x_at(m), e_m, a2.label, a2.pres());
                let x_star_inv = inverse_image(
                    &a2.x_at(m).involute(),
                    f_m,
                    a2.label,
                    a2.pres(),
                );
                f_m.meet(y_inv).meet(e_m).meet(x_star_inv)
            }),
        ))
    }

    /// Equivalence of witnesses at truncation: with `g_m` the meet of the two
    /// MSDDs, tests `x_m g_m = y_m g_m` and the starred analog for all
    /// `m <= up_to`. The verdict holds "up to truncation" only. Coherence of
    /// the operands is a precondition, not enforced here: some useful
    /// witnesses (e.g. the staggered product form) carry `x_m` above
    /// filtration level `m` yet still represent the same closed operator.
    pub fn equivalent(&self, other: &MonotoneOp, up_to: u32) -> Result<Equivalence> {
        self.compatible(other)?;
        let up_to = up_to.min(self.cap).min(other.cap);
        let mut witness = Vec::with_capacity(up_to as usize);
        for m in 1..=up_to {
            let g = self.e_at(m).meet(other.e_at(m));
            witness.push(g);
            let x = self.x_at(m);
            let y = other.x_at(m);
            if g.apply(&x, self.label, true, &self.pres)
                != g.apply(&y, self.label, true, &self.pres)
                || g.apply(&x.involute(), self.label, true, &self.pres)
                    != g.apply(&y.involute(), self.label, true, &self.pres)
            {
                return Ok(Equivalence {
                    equivalent: false,
                    failed_at: Some(m),
                    up_to,
                    witness,
                });
            }
        }
        Ok(Equivalence {
            equivalent: true,
            failed_at: None,
            up_to,
            witness,
        })
    }
}

/// Outcome of an equivalence test, including the implementing MSDD values.
#[derive(Clone, Debug)]
pub struct Equivalence {
    pub equivalent: bool,
    pub failed_at: Option<u32>,
    pub up_to: u32,
    pub witness: Vec<LatticeElem>,
}

/// A pre-free random variable: the witness `(sum_{k<=m} dX(k), q_m)` where
/// `dX(1) = X'(1)` and `dX(k) = X'(k) - X''(k)` for `k > 1`.
#[derive(Clone)]
pub struct PreFreeVariable {
    pub gen: Symbol,
    pub op: MonotoneOp,
}

/// `dX(k)` as a polynomial.
pub fn delta_gen(label: Symbol, gen: Symbol, k: u32) -> NCPolynomial {
    assert!(k >= 1);
    let prime = NCPolynomial::from_word(Word::single(Letter::gen(
        label,
        gen,
        k,
        Decoration::Prime,
        false,
    )));
    if k == 1 {
        prime
    } else {
        let dp = NCPolynomial::from_word(Word::single(Letter::gen(
            label,
            gen,
            k,
            Decoration::DoublePrime,
            false,
        )));
        prime.sub(&dp)
    }
}

impl PreFreeVariable {
    pub fn new(
        pres: Arc<AlgebraPresentation>,
        label: Symbol,
        gen: Symbol,
        cap: u32,
    ) -> PreFreeVariable {
        let op = MonotoneOp::from_rule(
            pres,
            label,
            cap,
            MsddDescriptor::LatticeShift(0),
            move |m| {
                let mut acc = NCPolynomial::zero();
                for k in 1..=m {
                    acc = acc.add(&delta_gen(label, gen, k));
                }
                acc
            },
        );
        PreFreeVariable { gen, op }
    }
}
