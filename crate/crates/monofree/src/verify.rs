//! Seeded, reproducible property suites. Each suite exercises one pillar of
//! the engine — freeness vanishing, coalgebra laws, rewrite confluence,
//! monotone operator algebra, the independence hierarchy — and returns a
//! machine-readable report; the command-line interface and the acceptance
//! tests both run through these entry points.

use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebras::{AlgebraPresentation, Schema};
use crate::bialgebra::{coproduct, coproduct_on_leg, counit_on_leg, delta_space};
use crate::error::Result;
use crate::freeness::{centered, m_free_moment, mixed_moment, plain_tensor_space};
use crate::monotone::{MonotoneOp, PreFreeVariable};
use crate::ncpoly::{Coeff, Decoration, Letter, Level, NCPolynomial, Word};
use crate::oracle::{boolean_convolve_oracle, free_convolve_oracle};
use crate::rewrite::{
    multiply_unchecked, reduce, reduce_word, reduce_word_with_strategy, Strategy,
};
use crate::states::MomentSpec;
use crate::symbol::Symbol;
use crate::tensorspace::TensorSpace;

/// Result of one property within a suite.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub instances: u32,
    pub failures: u32,
    /// First failure description, when any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyResult {
    fn new(name: &str) -> PropertyResult {
        PropertyResult {
            name: name.to_string(),
            instances: 0,
            failures: 0,
            detail: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.detail.is_none() {
                self.detail = Some(detail());
            }
        }
    }
}

/// Report for one suite run; serializable for the JSON output mode.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
    pub passed: bool,
}

impl SuiteReport {
    fn assemble(suite: &str, seed: u64, properties: Vec<PropertyResult>) -> SuiteReport {
        let passed = properties.iter().all(|p| p.failures == 0);
        SuiteReport {
            suite: suite.to_string(),
            seed,
            properties,
            passed,
        }
    }
}

/// The available property suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Freeness,
    Bialgebra,
    Confluence,
    Monotone,
    Hierarchy,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Suite, String> {
        match s {
            "freeness" => Ok(Suite::Freeness),
            "bialgebra" => Ok(Suite::Bialgebra),
            "confluence" => Ok(Suite::Confluence),
            "monotone" => Ok(Suite::Monotone),
            "hierarchy" => Ok(Suite::Hierarchy),
            other => Err(format!(
                "unknown suite `{other}` (expected freeness|bialgebra|confluence|monotone|hierarchy)"
            )),
        }
    }
}

/// Runs a suite with the given seed; `size` scales the instance count where
/// the suite is open-ended (randomized word counts), with suite defaults
/// when absent.
pub fn run_suite(suite: Suite, seed: u64, size: Option<u32>) -> Result<SuiteReport> {
    match suite {
        Suite::Freeness => verify_freeness(seed, size.unwrap_or(20)),
        Suite::Bialgebra => verify_bialgebra(seed, size.unwrap_or(100)),
        Suite::Confluence => verify_confluence(seed, size.unwrap_or(1000)),
        Suite::Monotone => verify_monotone(seed, size.unwrap_or(100)),
        Suite::Hierarchy => verify_hierarchy(seed),
    }
}

// ---------------------------------------------------------------------------
// Random generation helpers
// ---------------------------------------------------------------------------

fn random_letter(rng: &mut ChaCha8Rng, pres: &AlgebraPresentation, allow_boundary: bool) -> Letter {
    let label = pres.sole_label().expect("single-label presentation");
    if rng.gen_bool(0.4) {
        let level = if allow_boundary && rng.gen_bool(0.1) {
            if rng.gen_bool(0.5) {
                Level(0)
            } else {
                Level::INF
            }
        } else {
            Level(rng.gen_range(1..=5))
        };
        Letter::proj(label, level)
    } else {
        let gens = pres.generators_of(label);
        let gen = gens[rng.gen_range(0..gens.len())];
        let dec = match pres.schema() {
            Schema::H0 => Decoration::Plain,
            Schema::F0 => {
                if rng.gen_bool(0.5) {
                    Decoration::Prime
                } else {
                    Decoration::DoublePrime
                }
            }
        };
        let copy = rng.gen_range(1..=4);
        Letter::gen(label, gen, copy, dec, rng.gen_bool(0.25))
    }
}

fn random_word(
    rng: &mut ChaCha8Rng,
    pres: &AlgebraPresentation,
    max_len: usize,
    allow_boundary: bool,
) -> Word {
    let len = rng.gen_range(1..=max_len);
    let letters: Vec<Letter> = (0..len)
        .map(|_| random_letter(rng, pres, allow_boundary))
        .collect();
    Word::intern(&letters)
}

/// A random reduced polynomial: a short combination of reduced random words
/// with small integer coefficients.
fn random_poly(rng: &mut ChaCha8Rng, pres: &AlgebraPresentation, max_len: usize) -> NCPolynomial {
    let terms = rng.gen_range(1..=2);
    let mut out = NCPolynomial::zero();
    for _ in 0..terms {
        let w = random_word(rng, pres, max_len, false);
        let c = Coeff::from_integer(rng.gen_range(-3i64..=3).into());
        if !c.is_zero() {
            out.add_term(w, c);
        }
    }
    reduce(&out, pres)
}

// ---------------------------------------------------------------------------
// Confluence suite
// ---------------------------------------------------------------------------

/// Dual-strategy confluence, involution compatibility, and idempotence of
/// reduction on seeded random words over both schemas.
pub fn verify_confluence(seed: u64, count: u32) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = AlgebraPresentation::f0("G", &["X", "Y"])?;
    let h0 = AlgebraPresentation::h0(&[("A", &["X", "Y"][..])])?;
    let mut normal_forms = PropertyResult::new("dual-strategy normal forms agree");
    let mut involution = PropertyResult::new("reduction commutes with involution");
    let mut idempotent = PropertyResult::new("reduction is idempotent");
    for i in 0..count {
        let pres = if i % 2 == 0 { &f0 } else { &h0 };
        let w = random_word(&mut rng, pres, 10, true);
        let stack = reduce_word(&w, pres);
        let left = reduce_word_with_strategy(&w, pres, Strategy::LeftmostFirst);
        let right = reduce_word_with_strategy(&w, pres, Strategy::RightmostFirst);
        normal_forms.record(stack == left && stack == right, || {
            format!("word {w}: stack {stack:?}, leftmost {left:?}, rightmost {right:?}")
        });
        let p = NCPolynomial::from_word(w.clone());
        let lhs = reduce(&p.involute(), pres);
        let rhs = reduce(&p, pres).involute();
        involution.record(lhs == rhs, || format!("word {w}: {lhs} vs {rhs}"));
        let again = stack.as_ref().and_then(|r| reduce_word(r, pres));
        idempotent.record(stack == again, || format!("word {w}: {stack:?} vs {again:?}"));
    }
    Ok(SuiteReport::assemble(
        "confluence",
        seed,
        vec![normal_forms, involution, idempotent],
    ))
}

// ---------------------------------------------------------------------------
// Monotone suite
// ---------------------------------------------------------------------------

/// A random monotone operator: a product of one to three pre-free variables,
/// optionally scaled.
fn random_prefree_product(
    rng: &mut ChaCha8Rng,
    pres: &Arc<AlgebraPresentation>,
    cap: u32,
    max_factors: u32,
) -> Result<MonotoneOp> {
    let label = Symbol::new("G");
    let gens = [Symbol::new("X"), Symbol::new("Y")];
    let n = rng.gen_range(1..=max_factors);
    let mut acc: Option<MonotoneOp> = None;
    for _ in 0..n {
        let v = PreFreeVariable::new(pres.clone(), label, gens[rng.gen_range(0..2)], cap);
        acc = Some(match acc {
            None => v.op,
            Some(p) => p.mul(&v.op)?,
        });
    }
    Ok(acc.expect("at least one factor"))
}

/// Lattice-domain shape of pre-free products, monotonicity of the lattice
/// part under multiplication, and well-definedness of the product under
/// equivalent witness replacement.
pub fn verify_monotone(seed: u64, instances: u32) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pres = Arc::new(AlgebraPresentation::f0("G", &["X", "Y"])?);
    let label = Symbol::new("G");
    let cap = 10u32;
    let up_to = 6u32;

    // Products of n pre-free variables live on the shifted lattice domain
    // q_{m-n+1}; checked deterministically for n up to 5.
    let mut shape = PropertyResult::new("pre-free n-fold products have lattice domain q_{m-n+1}");
    for n in 1..=5u32 {
        let mut acc: Option<MonotoneOp> = None;
        for i in 0..n {
            let gen = if i % 2 == 0 { Symbol::new("X") } else { Symbol::new("Y") };
            let v = PreFreeVariable::new(pres.clone(), label, gen, cap).op;
            acc = Some(match acc {
                None => v,
                Some(p) => p.mul(&v)?,
            });
        }
        let prod = acc.expect("factors");
        for m in n..=(n + 2).min(7) {
            let e = prod.e_at(m);
            let want = crate::monotone::LatticeElem::Q(m - n + 1);
            shape.record(e == want, || format!("n = {n}, m = {m}: {e:?} vs {want:?}"));
        }
    }

    let mut monotone = PropertyResult::new("product lattice parts are monotone to truncation 10");
    for _ in 0..instances.div_ceil(5) {
        let a = random_prefree_product(&mut rng, &pres, cap, 2)?;
        let b = random_prefree_product(&mut rng, &pres, cap, 2)?;
        let prod = a.mul(&b)?;
        let mut ok = true;
        let mut last = prod.e_at(1);
        for m in 2..=10 {
            let e = prod.e_at(m);
            if e < last {
                ok = false;
                break;
            }
            last = e;
        }
        monotone.record(ok, || "lattice part decreased".to_string());
    }

    let mut welldef = PropertyResult::new("products respect equivalent witness replacement");
    for _ in 0..instances {
        let a = random_prefree_product(&mut rng, &pres, cap, 2)?;
        let b = random_prefree_product(&mut rng, &pres, cap, 2)?;

        // Equivalent replacement: perturb the witness by a two-sided
        // multiple of (1 - g_m), which dies against the domain projections.
        let noise = random_poly(&mut rng, &pres, 3);
        let a2 = {
            let base = a.clone();
            let noise = noise.clone();
            let pres_c = pres.clone();
            // Products built by `mul` carry no closed-form descriptor, so
            // freeze their lattice parts into an explicit prefix.
            let d = crate::monotone::MsddDescriptor::Explicit {
                prefix: (1..=cap).map(|m| a.e_at(m)).collect(),
                tail: Box::new(crate::monotone::MsddDescriptor::LatticeShift(0)),
            };
            MonotoneOp::from_rule(pres.clone(), label, cap, d.clone(), move |m| {
                let g = d.at(m).to_poly(label);
                let one = NCPolynomial::unit();
                let annihilator = one.sub(&g);
                let sandwich = multiply_unchecked(
                    &multiply_unchecked(&annihilator, &noise, &pres_c),
                    &annihilator,
                    &pres_c,
                );
                base.x_at(m).add(&sandwich)
            })
        };
        let eq = a.equivalent(&a2, up_to)?;
        let right = a.mul(&b)?.equivalent(&a2.mul(&b)?, up_to)?;
        let left = b.mul(&a)?.equivalent(&b.mul(&a2)?, up_to)?;
        welldef.record(
            eq.equivalent && right.equivalent && left.equivalent,
            || format!("replacement broke at {:?}/{:?}/{:?}", eq.failed_at, right.failed_at, left.failed_at),
        );
    }
    Ok(SuiteReport::assemble(
        "monotone",
        seed,
        vec![shape, monotone, welldef],
    ))
}

// ---------------------------------------------------------------------------
// Freeness suite
// ---------------------------------------------------------------------------

fn two_leg_specs() -> (MomentSpec, MomentSpec) {
    (
        MomentSpec::two_point(
            "two_point",
            Coeff::from_integer((-1).into()),
            Coeff::from_integer(1.into()),
            crate::ncpoly::ratio(1, 2),
            16,
        ),
        MomentSpec::semicircle("semicircle", Coeff::from_integer(1.into()), 16),
    )
}

/// A random self-adjoint base element of one leg with zero-free content:
/// `X + c X^2` for a small random `c` (sometimes just `X`).
fn random_base(rng: &mut ChaCha8Rng, space: &TensorSpace, leg: usize) -> NCPolynomial {
    let l = &space.legs()[leg];
    let gen = l.pres.generators_of(l.label)[0];
    let x = NCPolynomial::from_word(Word::single(Letter::gen(
        l.label,
        gen,
        1,
        Decoration::Plain,
        false,
    )));
    if rng.gen_bool(0.4) {
        return x;
    }
    let x2 = multiply_unchecked(&x, &x, &l.pres);
    let c = Coeff::from_integer(rng.gen_range(-2i64..=2).into());
    x.add(&x2.scale(&c))
}

/// Alternating centered words vanish (two and three legs) and single-leg
/// powers reproduce the base distribution, all with certified truncations.
pub fn verify_freeness(seed: u64, variants: u32) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = plain_tensor_space(&[("A", "X"), ("B", "Y")])?;
    let (mu, nu) = two_leg_specs();
    let specs = [mu.clone(), nu.clone()];

    let mut vanish = PropertyResult::new("two-leg alternating centered words vanish");
    for len in 2..=6usize {
        for start in [0usize, 1] {
            for _ in 0..variants.div_ceil(10).max(1) * 4 {
                let word: Result<Vec<(usize, NCPolynomial)>> = (0..len)
                    .map(|i| {
                        let leg = (start + i) % 2;
                        let a = random_base(&mut rng, &space, leg);
                        Ok((leg, centered(&a, &specs[leg])?))
                    })
                    .collect();
                let word = word?;
                let v = mixed_moment(&word, &space, &specs, None)?;
                vanish.record(v.value.is_zero(), || {
                    format!("length {len}, start {start}: got {}", v.value)
                });
            }
        }
    }

    let mut three = PropertyResult::new("three-leg alternating centered words vanish");
    let space3 = plain_tensor_space(&[("A", "X"), ("B", "Y"), ("C", "Z")])?;
    let rho = MomentSpec::custom(
        "rho",
        (1..=12u64)
            .map(|n| Coeff::from_integer((n * n).into()))
            .collect(),
    );
    let specs3 = [mu.clone(), nu.clone(), rho];
    for len in 2..=5usize {
        for _ in 0..4 {
            let mut legs = Vec::with_capacity(len);
            let mut prev = 3usize;
            for _ in 0..len {
                let mut l = rng.gen_range(0..3usize);
                while l == prev {
                    l = rng.gen_range(0..3usize);
                }
                prev = l;
                legs.push(l);
            }
            let word: Result<Vec<(usize, NCPolynomial)>> = legs
                .iter()
                .map(|&l| {
                    let a = random_base(&mut rng, &space3, l);
                    Ok((l, centered(&a, &specs3[l])?))
                })
                .collect();
            let v = mixed_moment(&word?, &space3, &specs3, None)?;
            three.record(v.value.is_zero(), || {
                format!("legs {legs:?}: got {}", v.value)
            });
        }
    }

    let mut preserve = PropertyResult::new("single-leg powers reproduce the base distribution");
    for (leg, spec) in [(0usize, &mu), (1usize, &nu)] {
        let l = &space.legs()[leg];
        let x = NCPolynomial::from_word(Word::single(Letter::gen(
            l.label,
            l.pres.generators_of(l.label)[0],
            1,
            Decoration::Plain,
            false,
        )));
        for n in 1..=8usize {
            let word: Vec<(usize, NCPolynomial)> = vec![(leg, x.clone()); n];
            let got = mixed_moment(&word, &space, &specs, None)?;
            let want = spec.moment(n)?;
            preserve.record(got.value == want, || {
                format!("{}^{n}: got {}, want {want}", spec.label, got.value)
            });
        }
    }

    Ok(SuiteReport::assemble(
        "freeness",
        seed,
        vec![vanish, three, preserve],
    ))
}

// ---------------------------------------------------------------------------
// Bialgebra suite
// ---------------------------------------------------------------------------

/// Coassociativity, counit axioms, homomorphism property, and ideal
/// preservation on seeded random reduced words.
pub fn verify_bialgebra(seed: u64, count: u32) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pres = Arc::new(AlgebraPresentation::f0("G", &["X", "Y"])?);
    let label = Symbol::new("G");
    let space = delta_space(&pres, label, 2)?;
    let space3 = delta_space(&pres, label, 3)?;

    let mut coassoc = PropertyResult::new("coproduct is coassociative");
    let mut counits = PropertyResult::new("both counit axioms hold");
    let mut homo = PropertyResult::new("coproduct is a *-homomorphism");
    let mut ideal = PropertyResult::new("coproduct annihilates the defining relations");

    for _ in 0..count {
        let p = random_poly(&mut rng, &pres, 4);
        let d = coproduct(&p, &space)?;
        let lhs = coproduct_on_leg(&d, 0)?;
        let rhs = coproduct_on_leg(&d, 1)?;
        let iterated = coproduct(&p, &space3)?;
        coassoc.record(lhs == rhs && lhs == iterated, || format!("word {p}"));
        counits.record(
            counit_on_leg(&d, 0)? == p && counit_on_leg(&d, 1)? == p,
            || format!("word {p}"),
        );
        let q = random_poly(&mut rng, &pres, 3);
        let dq = coproduct(&q, &space)?;
        let prod_ok = coproduct(&multiply_unchecked(&p, &q, &pres), &space)? == d.mul(&dq);
        let star_ok = coproduct(&p.involute(), &space)? == d.involute();
        homo.record(prod_ok && star_ok, || format!("pair {p} | {q}"));

        // q_m (X'(k) - X''(k)) with k > m, multiplied out from the images
        // of the unreduced factors, sandwiched by random words.
        let m = rng.gen_range(1..=3u32);
        let k = rng.gen_range(m + 1..=m + 3);
        let gens = pres.generators_of(label);
        let gen = gens[rng.gen_range(0..gens.len())];
        let qm = NCPolynomial::from_word(Word::single(Letter::proj(label, Level(m))));
        let prime =
            NCPolynomial::from_word(Word::single(Letter::gen(label, gen, k, Decoration::Prime, false)));
        let dprime = NCPolynomial::from_word(Word::single(Letter::gen(
            label,
            gen,
            k,
            Decoration::DoublePrime,
            false,
        )));
        let relation = coproduct(&qm, &space)?.mul(&coproduct(&prime.sub(&dprime), &space)?);
        let sandwich = coproduct(&random_poly(&mut rng, &pres, 2), &space)?
            .mul(&relation)
            .mul(&coproduct(&random_poly(&mut rng, &pres, 2), &space)?);
        ideal.record(relation.is_zero() && sandwich.is_zero(), || {
            format!("q{m} (g'({k}) - g''({k}))")
        });
    }

    Ok(SuiteReport::assemble(
        "bialgebra",
        seed,
        vec![coassoc, counits, homo, ideal],
    ))
}

// ---------------------------------------------------------------------------
// Hierarchy suite
// ---------------------------------------------------------------------------

/// The m-free hierarchy: the bottom level matches the boolean convolution,
/// intermediate levels match the free values up to order 2m, and the free
/// and boolean values genuinely differ at order 4.
pub fn verify_hierarchy(seed: u64) -> Result<SuiteReport> {
    let space = plain_tensor_space(&[("A", "X"), ("B", "Y")])?;
    let (mu, nu) = two_leg_specs();
    let specs = [mu.clone(), nu.clone()];
    let gens: Vec<NCPolynomial> = space
        .legs()
        .iter()
        .map(|l| {
            NCPolynomial::from_word(Word::single(Letter::gen(
                l.label,
                l.pres.generators_of(l.label)[0],
                1,
                Decoration::Plain,
                false,
            )))
        })
        .collect();
    let sum_moment = |m: u32, n: usize| -> Result<Coeff> {
        let mut total = Coeff::zero();
        for mask in 0u32..(1 << n) {
            let word: Vec<(usize, NCPolynomial)> = (0..n)
                .map(|i| {
                    let l = ((mask >> i) & 1) as usize;
                    (l, gens[l].clone())
                })
                .collect();
            total += m_free_moment(&word, &space, &specs, m)?;
        }
        Ok(total)
    };

    let mut boolean = PropertyResult::new("level 1 equals the boolean convolution to order 6");
    let bool_oracle = boolean_convolve_oracle(&mu, &nu, 6)?;
    for n in 1..=6usize {
        let got = sum_moment(1, n)?;
        boolean.record(got == bool_oracle[n - 1], || {
            format!("order {n}: got {got}, want {}", bool_oracle[n - 1])
        });
    }

    let mut free_levels = PropertyResult::new("levels 2 and 3 match the free values to order 2m");
    let free_oracle = free_convolve_oracle(&mu, &nu, 6)?;
    for m in [2u32, 3] {
        for n in 1..=(2 * m as usize) {
            let got = sum_moment(m, n)?;
            free_levels.record(got == free_oracle[n - 1], || {
                format!("m = {m}, order {n}: got {got}, want {}", free_oracle[n - 1])
            });
        }
    }

    let mut strict = PropertyResult::new("level 1 differs from free at order 4");
    let b4 = sum_moment(1, 4)?;
    let f4 = free_oracle[3].clone();
    // Canonical numbers for the symmetric two-point law on both legs.
    let tp = mu.clone();
    let canon_bool = boolean_convolve_oracle(&tp, &tp, 4)?[3].clone();
    let canon_free = free_convolve_oracle(&tp, &tp, 4)?[3].clone();
    strict.record(
        b4 != f4
            && canon_bool == Coeff::from_integer(4.into())
            && canon_free == Coeff::from_integer(6.into()),
        || {
            format!(
                "boolean m4 = {b4} vs free m4 = {f4}; two-point pair gave {canon_bool} vs {canon_free}"
            )
        },
    );

    Ok(SuiteReport::assemble(
        "hierarchy",
        seed,
        vec![boolean, free_levels, strict],
    ))
}
