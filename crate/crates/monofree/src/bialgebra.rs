//! Coalgebra structure on the decorated word algebra: the coproduct sending
//! each primed generator copy to its two-leg primitive form over companion
//! projections, the counit character, iterated coproducts over n legs, the
//! one-leg summand maps, the lift of a monotone operator through the
//! coproduct, the identification of both decorations with plain copies, and
//! the additive convolution of moment specifications built from all of it.

use std::sync::Arc;

use crate::algebras::AlgebraPresentation;
use crate::error::{EngineError, Result};
use crate::monotone::{MonotoneOp, PreFreeVariable};
use crate::ncpoly::{Coeff, Decoration, Letter, Level, NCPolynomial, Word};
use crate::states::{tensor_state, Certified, MomentSpec};
use crate::symbol::Symbol;
use crate::tensorspace::{map_legs, Leg, LegHom, TensorMonotoneOp, TensorMsdd, TensorPoly, TensorSpace};

/// Tensor space with `n` legs all carrying the same presentation and label —
/// the codomain of the (iterated) coproduct.
pub fn delta_space(pres: &Arc<AlgebraPresentation>, label: Symbol, n: usize) -> Result<TensorSpace> {
    if n < 2 {
        return Err(EngineError::Presentation(
            "a coproduct codomain needs at least two legs".into(),
        ));
    }
    TensorSpace::new(vec![Leg::new(pres.clone(), label); n])
}

/// Companion projection level of a generator letter: the copy index for a
/// prime (or plain) letter, one less for a doubleprime letter.
fn companion_level(copy: u32, dec: Decoration) -> Level {
    match dec {
        Decoration::DoublePrime => Level(copy - 1),
        _ => Level(copy),
    }
}

/// Image of a single letter under the `n`-leg coproduct: projections go to
/// their diagonal, a generator letter to the sum over legs of itself flanked
/// by companion projections on the remaining legs.
fn letter_image(l: &Letter, space: &TensorSpace) -> TensorPoly {
    let n = space.num_legs();
    match *l {
        Letter::Proj { label, level } => {
            let q = NCPolynomial::from_word(Word::single(Letter::proj(label, level)));
            TensorPoly::pure(space, &vec![q; n])
        }
        Letter::Gen {
            label, copy, dec, ..
        } => {
            let j = companion_level(copy, dec);
            let q = NCPolynomial::from_word(Word::single(Letter::proj(label, j)));
            let g = NCPolynomial::from_word(Word::single(*l));
            let mut out = TensorPoly::zero(space);
            for i in 0..n {
                let factors: Vec<NCPolynomial> = (0..n)
                    .map(|p| if p == i { g.clone() } else { q.clone() })
                    .collect();
                out = out.add(&TensorPoly::pure(space, &factors));
            }
            out
        }
    }
}

/// The coproduct, extended multiplicatively from the letter images; works
/// over any `delta_space`, the two-leg case being the coproduct proper and
/// `n > 2` its iterated form.
pub fn coproduct(x: &NCPolynomial, space: &TensorSpace) -> Result<TensorPoly> {
    let leg = &space.legs()[0];
    for l in space.legs() {
        if !Arc::ptr_eq(&l.pres, &leg.pres) || l.label != leg.label {
            return Err(EngineError::Presentation(
                "coproduct legs must share one presentation and label".into(),
            ));
        }
    }
    leg.pres.check_poly(x)?;
    let mut out = TensorPoly::zero(space);
    for (w, c) in x.terms() {
        let mut acc = TensorPoly::unit(space);
        for l in w.letters() {
            acc = acc.mul(&letter_image(l, space));
        }
        out = out.add(&acc.scale(c));
    }
    Ok(out)
}

/// The counit: 1 on lattice projections, 0 on every word containing a
/// generator letter; a character.
pub fn counit(x: &NCPolynomial, pres: &AlgebraPresentation) -> Result<Coeff> {
    pres.check_poly(x)?;
    let reduced = crate::rewrite::reduce(x, pres);
    let mut out = Coeff::from_integer(0.into());
    for (w, c) in reduced.terms() {
        if w.letters()
            .iter()
            .all(|l| matches!(l, Letter::Proj { .. }))
        {
            out += c.clone();
        }
    }
    Ok(out)
}

/// Applies the counit to one leg of a two-leg tensor polynomial, collapsing
/// it back to a one-leg polynomial — the building block of the counit-axiom
/// checks.
pub fn counit_on_leg(t: &TensorPoly, which: usize) -> Result<NCPolynomial> {
    let legs = t.space().legs();
    if legs.len() != 2 || which > 1 {
        return Err(EngineError::Presentation(
            "counit collapse expects a two-leg polynomial".into(),
        ));
    }
    let mut out = NCPolynomial::zero();
    for (tuple, c) in t.terms() {
        let e = counit(
            &NCPolynomial::from_word(tuple[which].clone()),
            &legs[which].pres,
        )?;
        out.add_term(tuple[1 - which].clone(), c.clone() * e);
    }
    Ok(crate::rewrite::reduce(&out, &legs[0].pres))
}

/// Applies the coproduct to one leg of a two-leg tensor polynomial, yielding
/// a three-leg polynomial — used to state coassociativity.
pub fn coproduct_on_leg(t: &TensorPoly, which: usize) -> Result<TensorPoly> {
    let legs = t.space().legs();
    if legs.len() != 2 || which > 1 {
        return Err(EngineError::Presentation(
            "coproduct expansion expects a two-leg polynomial".into(),
        ));
    }
    let leg = legs[0].clone();
    let two = TensorSpace::new(vec![leg.clone(), leg.clone()])?;
    let three = TensorSpace::new(vec![leg.clone(), leg.clone(), leg])?;
    let mut out = TensorPoly::zero(&three);
    for (tuple, c) in t.terms() {
        let inner = coproduct(&NCPolynomial::from_word(tuple[which].clone()), &two)?;
        for (pair, d) in inner.terms() {
            let tuple3 = if which == 0 {
                vec![pair[0].clone(), pair[1].clone(), tuple[1].clone()]
            } else {
                vec![tuple[0].clone(), pair[0].clone(), pair[1].clone()]
            };
            out.add_term(tuple3, c.clone() * d.clone());
        }
    }
    Ok(out)
}

/// One-leg summand of the lifted coproduct of a pre-free variable: on leg
/// `leg_idx` the partial sums of `X'(k) (x) q_k - X''(k) (x) q_{k-1}` (with
/// the generator factor on that leg and the companion projection on the
/// other), as a tensor monotone operator with the lockstep diagonal MSDD.
pub fn j_map(space: &TensorSpace, gen: Symbol, leg_idx: usize, cap: u32) -> Result<TensorMonotoneOp> {
    if space.num_legs() != 2 || leg_idx > 1 {
        return Err(EngineError::Presentation(
            "the summand maps are defined over two legs".into(),
        ));
    }
    let label = space.legs()[0].label;
    let space_c = space.clone();
    Ok(TensorMonotoneOp::from_rule(
        space.clone(),
        cap,
        TensorMsdd(vec![crate::monotone::MsddDescriptor::LatticeShift(0); 2]),
        move |m| {
            let mut z = TensorPoly::zero(&space_c);
            for k in 1..=m {
                for dec in [Decoration::Prime, Decoration::DoublePrime] {
                    let g = NCPolynomial::from_word(Word::single(Letter::gen(
                        label, gen, k, dec, false,
                    )));
                    let q = NCPolynomial::from_word(Word::single(Letter::proj(
                        label,
                        companion_level(k, dec),
                    )));
                    let factors = if leg_idx == 0 {
                        [g, q]
                    } else {
                        [q, g]
                    };
                    let sign = if dec == Decoration::Prime { 1 } else { -1 };
                    z = z.add(&TensorPoly::pure(&space_c, &factors).scale(&Coeff::from_integer(sign.into())));
                }
            }
            z
        },
    ))
}

/// Lifts a monotone operator through the coproduct: the approximants mapped
/// by the coproduct, the lattice descriptor duplicated onto the diagonal.
/// The input must carry a lattice-valued descriptor and pass its coherence
/// checks up to the truncation cap.
pub fn lift_coproduct(z: &MonotoneOp, space: &TensorSpace) -> Result<TensorMonotoneOp> {
    let d = z
        .descriptor()
        .ok_or_else(|| EngineError::Closure("lift needs a lattice-valued descriptor".into()))?
        .clone();
    z.check_coherence(z.truncation_cap())?;
    let zc = z.clone();
    let space_c = space.clone();
    Ok(TensorMonotoneOp::from_rule(
        space.clone(),
        z.truncation_cap(),
        TensorMsdd(vec![d; space.num_legs()]),
        move |m| coproduct(&zc.x_at(m), &space_c).expect("legs validated at lift time"),
    ))
}

/// Leg homomorphism identifying both decorated copies with the plain copy of
/// the same index: generator decorations dropped, lattice levels fixed.
pub fn identification(source: &Leg, target: &Leg) -> LegHom {
    let label = target.label;
    LegHom::new(
        source.clone(),
        target.clone(),
        move |gen, copy, _dec| {
            NCPolynomial::from_word(Word::single(Letter::gen(
                label,
                gen,
                copy,
                Decoration::Plain,
                false,
            )))
        },
        |l| l,
    )
}

/// Default truncation for a convolution moment of order `n`.
pub fn convolution_truncation(n: u32) -> u32 {
    n + 1
}

/// Additive convolution of two moment specifications through the
/// representation: the pre-free variable is lifted through the coproduct,
/// both legs identified with plain copies, and the powers of the resulting
/// sum evaluated under the tensor product state; each order `n` is computed
/// at truncation `K` (given, or `convolution_truncation(n)`) and certified
/// against `K + 1`.
pub fn convolve_states_with_truncation(
    mu: &MomentSpec,
    nu: &MomentSpec,
    max_order: usize,
    truncation: Option<u32>,
) -> Result<Vec<Certified<Coeff>>> {
    let top = truncation.unwrap_or_else(|| convolution_truncation(max_order as u32));
    let cap = top + 1;
    let f0 = Arc::new(AlgebraPresentation::f0("G", &["X"])?);
    let label = Symbol::new("G");
    let gen = Symbol::new("X");
    let tau = PreFreeVariable::new(f0.clone(), label, gen, cap);
    let space = delta_space(&f0, label, 2)?;
    let lifted = lift_coproduct(&tau.op, &space)?;

    let h0_a = Arc::new(AlgebraPresentation::h0(&[("A", &["X"][..])])?);
    let h0_b = Arc::new(AlgebraPresentation::h0(&[("B", &["X"][..])])?);
    let leg_a = Leg::new(h0_a, Symbol::new("A"));
    let leg_b = Leg::new(h0_b, Symbol::new("B"));
    let homs = [
        identification(&space.legs()[0], &leg_a),
        identification(&space.legs()[1], &leg_b),
    ];
    let sum = map_legs(&lifted, &homs)?;

    let specs = [mu.clone(), nu.clone()];
    let target = sum.space().clone();
    let n_max = max_order as u32;
    let ks: Vec<u32> = (1..=n_max)
        .map(|n| truncation.unwrap_or_else(|| convolution_truncation(n)).min(top))
        .collect();

    // Left-compressed accumulation: the tensor state ignores leading
    // markers, so (q1 (x) q1) S^n evaluates like S^n while the compression
    // collapses all but the near-diagonal terms of each partial product and
    // keeps the symbolic powers from blowing up.
    let q1_tuple: Vec<NCPolynomial> = target
        .legs()
        .iter()
        .map(|l| NCPolynomial::from_word(Word::single(Letter::proj(l.label, Level(1)))))
        .collect();
    let mut values: std::collections::HashMap<(u32, u32), Coeff> = std::collections::HashMap::new();
    let m_lo = *ks.iter().min().expect("at least one order");
    let m_hi = ks.iter().max().expect("at least one order") + 1;
    for m in m_lo..=m_hi {
        let orders_at_m: Vec<u32> = (1..=n_max)
            .filter(|n| {
                let k = ks[(n - 1) as usize];
                k == m || k + 1 == m
            })
            .collect();
        let Some(&deepest) = orders_at_m.iter().max() else {
            continue;
        };
        let factor = sum.z_at(m);
        let mut acc = TensorPoly::pure(&target, &q1_tuple);
        for n in 1..=deepest {
            acc = acc.mul(&factor);
            if orders_at_m.contains(&n) {
                values.insert((n, m), tensor_state(&acc, &specs)?);
            }
        }
    }

    let mut out = Vec::with_capacity(max_order);
    for n in 1..=n_max {
        let k = ks[(n - 1) as usize];
        let lo = values[&(n, k)].clone();
        let hi = values[&(n, k + 1)].clone();
        if lo != hi {
            return Err(EngineError::NonStabilized {
                cap,
                at: k,
                at_next: k + 1,
                lo,
                hi,
            });
        }
        out.push(Certified {
            value: hi,
            stabilized_at: k,
            checked_at: k + 1,
        });
    }
    Ok(out)
}

/// `convolve_states_with_truncation` with the default truncation schedule.
pub fn convolve_states(
    mu: &MomentSpec,
    nu: &MomentSpec,
    max_order: usize,
) -> Result<Vec<Certified<Coeff>>> {
    convolve_states_with_truncation(mu, nu, max_order, None)
}
