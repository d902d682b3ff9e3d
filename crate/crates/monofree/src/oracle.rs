//! Independent brute-force ground truth for the representation engine:
//! non-crossing and interval partition enumeration, moment/cumulant
//! conversion, free and boolean additive convolution, and a recursive
//! evaluator for mixed moments under the free product of states.
//!
//! Everything here is partition combinatorics and centering recursions —
//! deliberately different machinery from the tensor representation, so that
//! agreement between the two is evidence rather than tautology.

use dashmap::DashMap;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::ncpoly::Coeff;
use crate::states::MomentSpec;

/// A partition of `{1..n}` into disjoint blocks, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// No `a < b < c < d` with `a, c` in one block and `b, d` in another.
    pub fn is_non_crossing(&self) -> bool {
        for (i, bi) in self.blocks.iter().enumerate() {
            for bj in self.blocks.iter().skip(i + 1) {
                for w in bi.windows(2) {
                    let (a, c) = (w[0], w[1]);
                    if bj.iter().any(|&b| a < b && b < c)
                        && bj.iter().any(|&d| d < a || d > c)
                    {
                        return false;
                    }
                }
                for w in bj.windows(2) {
                    let (a, c) = (w[0], w[1]);
                    if bi.iter().any(|&b| a < b && b < c)
                        && bi.iter().any(|&d| d < a || d > c)
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Every block is a contiguous run of indices.
    pub fn is_interval(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.last().unwrap() - b.first().unwrap() + 1 == b.len())
    }
}

fn enumerate_all(n: usize) -> Vec<SetPartition> {
    // Restricted growth strings: element i joins block rgs[i] with
    // rgs[i] <= 1 + max(previous).
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max_used: usize, rgs: &mut Vec<usize>, out: &mut Vec<SetPartition>) {
        let n = rgs.len();
        if i == n {
            let nblocks = max_used + 1;
            let mut blocks = vec![Vec::new(); nblocks];
            for (idx, &b) in rgs.iter().enumerate() {
                blocks[b].push(idx + 1);
            }
            out.push(SetPartition { blocks });
            return;
        }
        for b in 0..=max_used + 1 {
            rgs[i] = b;
            rec(i + 1, max_used.max(b), rgs, out);
        }
    }
    if n == 0 {
        return out;
    }
    rgs[0] = 0;
    rec(1, 0, &mut rgs, &mut out);
    out
}

static NC_CACHE: Lazy<DashMap<usize, Arc<Vec<SetPartition>>>> = Lazy::new(DashMap::new);
static INTERVAL_CACHE: Lazy<DashMap<usize, Arc<Vec<SetPartition>>>> = Lazy::new(DashMap::new);

fn check_range(n: usize) -> Result<()> {
    if !(1..=12).contains(&n) {
        return Err(EngineError::Parse(format!(
            "partition enumeration supports 1 <= n <= 12, got {n}"
        )));
    }
    Ok(())
}

/// All non-crossing partitions of `{1..n}`; count is the n-th Catalan number.
pub fn enumerate_nc(n: usize) -> Result<Arc<Vec<SetPartition>>> {
    check_range(n)?;
    if let Some(hit) = NC_CACHE.get(&n) {
        return Ok(hit.clone());
    }
    let v = Arc::new(
        enumerate_all(n)
            .into_iter()
            .filter(SetPartition::is_non_crossing)
            .collect::<Vec<_>>(),
    );
    NC_CACHE.insert(n, v.clone());
    Ok(v)
}

/// All interval partitions of `{1..n}`; count is `2^(n-1)`.
pub fn enumerate_interval(n: usize) -> Result<Arc<Vec<SetPartition>>> {
    check_range(n)?;
    if let Some(hit) = INTERVAL_CACHE.get(&n) {
        return Ok(hit.clone());
    }
    let v = Arc::new(
        enumerate_all(n)
            .into_iter()
            .filter(SetPartition::is_interval)
            .collect::<Vec<_>>(),
    );
    INTERVAL_CACHE.insert(n, v.clone());
    Ok(v)
}

/// Moment/cumulant conversion over an arbitrary partition family. With the
/// full partition included, `m_n = sum_pi prod_{V in pi} k_{|V|}` is
/// triangular in `k_n` and solved order by order.
fn moments_to_cumulants_via(
    moments: &[Coeff],
    family: fn(usize) -> Result<Arc<Vec<SetPartition>>>,
) -> Result<Vec<Coeff>> {
    let mut kappa: Vec<Coeff> = Vec::with_capacity(moments.len());
    for (n0, m_n) in moments.iter().enumerate() {
        let n = n0 + 1;
        let mut rest = Coeff::zero();
        for pi in family(n)?.iter() {
            if pi.blocks.len() == 1 {
                continue;
            }
            let mut prod = Coeff::one();
            for block in &pi.blocks {
                prod *= &kappa[block.len() - 1];
            }
            rest += prod;
        }
        kappa.push(m_n - rest);
    }
    Ok(kappa)
}

fn cumulants_to_moments_via(
    kappa: &[Coeff],
    family: fn(usize) -> Result<Arc<Vec<SetPartition>>>,
) -> Result<Vec<Coeff>> {
    let mut moments = Vec::with_capacity(kappa.len());
    for n in 1..=kappa.len() {
        let mut m_n = Coeff::zero();
        for pi in family(n)?.iter() {
            let mut prod = Coeff::one();
            for block in &pi.blocks {
                prod *= &kappa[block.len() - 1];
            }
            m_n += prod;
        }
        moments.push(m_n);
    }
    Ok(moments)
}

pub fn moments_to_free_cumulants(moments: &[Coeff]) -> Result<Vec<Coeff>> {
    moments_to_cumulants_via(moments, enumerate_nc)
}

pub fn free_cumulants_to_moments(kappa: &[Coeff]) -> Result<Vec<Coeff>> {
    cumulants_to_moments_via(kappa, enumerate_nc)
}

pub fn moments_to_boolean_cumulants(moments: &[Coeff]) -> Result<Vec<Coeff>> {
    moments_to_cumulants_via(moments, enumerate_interval)
}

pub fn boolean_cumulants_to_moments(kappa: &[Coeff]) -> Result<Vec<Coeff>> {
    cumulants_to_moments_via(kappa, enumerate_interval)
}

fn spec_moments(spec: &MomentSpec, n: usize) -> Result<Vec<Coeff>> {
    (1..=n).map(|k| spec.moment(k)).collect()
}

/// Moments `1..=n` of the free additive convolution: free cumulants add.
pub fn free_convolve_oracle(mu: &MomentSpec, nu: &MomentSpec, n: usize) -> Result<Vec<Coeff>> {
    let ka = moments_to_free_cumulants(&spec_moments(mu, n)?)?;
    let kb = moments_to_free_cumulants(&spec_moments(nu, n)?)?;
    let sum: Vec<Coeff> = ka.iter().zip(kb.iter()).map(|(a, b)| a + b).collect();
    free_cumulants_to_moments(&sum)
}

/// Moments `1..=n` of the boolean additive convolution: boolean cumulants add.
pub fn boolean_convolve_oracle(mu: &MomentSpec, nu: &MomentSpec, n: usize) -> Result<Vec<Coeff>> {
    let ka = moments_to_boolean_cumulants(&spec_moments(mu, n)?)?;
    let kb = moments_to_boolean_cumulants(&spec_moments(nu, n)?)?;
    let sum: Vec<Coeff> = ka.iter().zip(kb.iter()).map(|(a, b)| a + b).collect();
    boolean_cumulants_to_moments(&sum)
}

/// A univariate polynomial in one algebra's generator, by coefficients of
/// ascending powers (index 0 = constant term).
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly(pub Vec<Coeff>);

impl UniPoly {
    pub fn gen() -> UniPoly {
        UniPoly(vec![Coeff::zero(), Coeff::one()])
    }

    pub fn constant(c: Coeff) -> UniPoly {
        UniPoly(vec![c])
    }

    pub fn power(n: usize) -> UniPoly {
        let mut v = vec![Coeff::zero(); n + 1];
        v[n] = Coeff::one();
        UniPoly(v)
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        let mut out = vec![Coeff::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly(out)
    }

    pub fn sub_constant(&self, c: &Coeff) -> UniPoly {
        let mut v = self.0.clone();
        if v.is_empty() {
            v.push(Coeff::zero());
        }
        v[0] -= c;
        UniPoly(v)
    }

    /// Expected value under the spec: sum of coefficients times moments.
    pub fn expect(&self, spec: &MomentSpec) -> Result<Coeff> {
        let mut acc = Coeff::zero();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc += c * spec.moment(i)?;
        }
        Ok(acc)
    }
}

/// A mixed word: factors tagged with the index of the algebra they live in.
pub type MixedWord = Vec<(usize, UniPoly)>;

fn merge_adjacent(word: &[(usize, UniPoly)]) -> MixedWord {
    let mut out: MixedWord = Vec::with_capacity(word.len());
    for (leg, p) in word {
        match out.last_mut() {
            Some((last_leg, last_p)) if last_leg == leg => {
                *last_p = last_p.mul(p);
            }
            _ => out.push((*leg, p.clone())),
        }
    }
    out
}

/// The free product state by recursive centering: write each factor as its
/// centered part plus a scalar, expand, use that alternating products of
/// centered elements vanish, and recurse on the strictly shorter leftovers.
pub fn free_product_state(word: &[(usize, UniPoly)], specs: &[MomentSpec]) -> Result<Coeff> {
    let word = merge_adjacent(word);
    let n = word.len();
    if n == 0 {
        return Ok(Coeff::one());
    }
    for (leg, _) in &word {
        if *leg >= specs.len() {
            return Err(EngineError::Presentation(format!(
                "mixed word references algebra index {leg}, only {} specs given",
                specs.len()
            )));
        }
    }
    if n == 1 {
        let (leg, p) = &word[0];
        return p.expect(&specs[*leg]);
    }
    let means: Vec<Coeff> = word
        .iter()
        .map(|(leg, p)| p.expect(&specs[*leg]))
        .collect::<Result<Vec<_>>>()?;
    // phi(prod a_i) = sum over proper subsets S of positions kept centered:
    // prod of means outside S times phi(prod of centered parts in S); the
    // full subset vanishes because the merged word alternates.
    let mut acc = Coeff::zero();
    for mask in 0..(1u32 << n) - 1 {
        let mut scalar = Coeff::one();
        let mut leftover: MixedWord = Vec::new();
        for (i, (leg, p)) in word.iter().enumerate() {
            if mask & (1 << i) != 0 {
                leftover.push((*leg, p.sub_constant(&means[i])));
            } else {
                scalar *= &means[i];
            }
        }
        if scalar.is_zero() {
            continue;
        }
        acc += scalar * free_product_state(&leftover, specs)?;
    }
    Ok(acc)
}

/// Moments of `a + b` with `a`, `b` free, by expanding `(a+b)^n` into mixed
/// words and evaluating each under the free product state. Cross-checks the
/// cumulant pipeline with entirely different bookkeeping.
pub fn free_sum_moment(mu: &MomentSpec, nu: &MomentSpec, n: usize) -> Result<Coeff> {
    let specs = [mu.clone(), nu.clone()];
    let mut acc = Coeff::zero();
    for mask in 0u32..(1 << n) {
        let word: MixedWord = (0..n)
            .map(|i| {
                let leg = ((mask >> i) & 1) as usize;
                (leg, UniPoly::gen())
            })
            .collect();
        acc += free_product_state(&word, &specs)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::{coeff, ratio};

    fn two_point() -> MomentSpec {
        MomentSpec::two_point("mu", coeff(-1), coeff(1), ratio(1, 2), 12)
    }

    #[test]
    fn partition_counts() {
        assert_eq!(enumerate_nc(1).unwrap().len(), 1);
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert_eq!(enumerate_nc(6).unwrap().len(), 132);
        assert_eq!(enumerate_interval(4).unwrap().len(), 8);
        assert_eq!(enumerate_interval(6).unwrap().len(), 32);
        assert!(enumerate_nc(0).is_err());
        assert!(enumerate_nc(13).is_err());
    }

    #[test]
    fn crossing_detection() {
        let crossing = SetPartition {
            blocks: vec![vec![1, 3], vec![2, 4]],
        };
        assert!(!crossing.is_non_crossing());
        let nested = SetPartition {
            blocks: vec![vec![1, 4], vec![2, 3]],
        };
        assert!(nested.is_non_crossing());
        assert!(!nested.is_interval());
        let runs = SetPartition {
            blocks: vec![vec![1, 2], vec![3], vec![4, 5, 6]],
        };
        assert!(runs.is_interval());
    }

    #[test]
    fn free_cumulants_of_presets() {
        // Point mass: kappa_1 = c, the rest vanish.
        let point = MomentSpec::point("p", coeff(3), 6);
        let k = moments_to_free_cumulants(
            &(1..=6).map(|n| point.moment(n).unwrap()).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(k[0], coeff(3));
        assert!(k[1..].iter().all(Coeff::is_zero));

        // Semicircle: kappa_2 = variance, all others vanish.
        let sc = MomentSpec::semicircle("s", coeff(1), 6);
        let k = moments_to_free_cumulants(
            &(1..=6).map(|n| sc.moment(n).unwrap()).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(k, vec![coeff(0), coeff(1), coeff(0), coeff(0), coeff(0), coeff(0)]);

        // Symmetric two-point: kappa_2 = 1, kappa_4 = -1 (m_4 = k_4 + 2 k_2^2).
        let k = moments_to_free_cumulants(
            &(1..=4).map(|n| two_point().moment(n).unwrap()).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(k, vec![coeff(0), coeff(1), coeff(0), coeff(-1)]);
    }

    #[test]
    fn cumulant_round_trips() {
        let m: Vec<Coeff> = vec![
            ratio(1, 2),
            coeff(2),
            ratio(-3, 4),
            coeff(5),
            ratio(7, 3),
            coeff(-1),
            ratio(11, 6),
            coeff(4),
            ratio(-2, 9),
            coeff(10),
        ];
        let k = moments_to_free_cumulants(&m).unwrap();
        assert_eq!(free_cumulants_to_moments(&k).unwrap(), m);
        let b = moments_to_boolean_cumulants(&m).unwrap();
        assert_eq!(boolean_cumulants_to_moments(&b).unwrap(), m);
    }

    #[test]
    fn free_convolution_frozen_values() {
        // two_point(+-1, 1/2) with itself: arcsine moments 2, 6, 20.
        let mu = two_point();
        let m = free_convolve_oracle(&mu, &mu, 6).unwrap();
        assert_eq!(m[1], coeff(2));
        assert_eq!(m[3], coeff(6));
        assert_eq!(m[5], coeff(20));
        assert!(m[0].is_zero() && m[2].is_zero() && m[4].is_zero());

        // Semicircle is stable: variance adds.
        let sc = MomentSpec::semicircle("s", coeff(1), 8);
        let m = free_convolve_oracle(&sc, &sc, 4).unwrap();
        assert_eq!(m[1], coeff(2));
        assert_eq!(m[3], coeff(8));

        // Neutral element.
        let zero = MomentSpec::point("z", coeff(0), 8);
        let m = free_convolve_oracle(&mu, &zero, 6).unwrap();
        assert_eq!(m, (1..=6).map(|n| mu.moment(n).unwrap()).collect::<Vec<_>>());
    }

    #[test]
    fn boolean_convolution_frozen_values() {
        let mu = two_point();
        let m = boolean_convolve_oracle(&mu, &mu, 4).unwrap();
        assert_eq!(m[1], coeff(2));
        assert_eq!(m[3], coeff(4));
        let c = MomentSpec::point("c", coeff(3), 4);
        let d = MomentSpec::point("d", ratio(1, 2), 4);
        let m = boolean_convolve_oracle(&c, &d, 2).unwrap();
        assert_eq!(m[0], ratio(7, 2));
        let zero = MomentSpec::point("z", coeff(0), 6);
        let m = boolean_convolve_oracle(&mu, &zero, 6).unwrap();
        assert_eq!(m, (1..=6).map(|n| mu.moment(n).unwrap()).collect::<Vec<_>>());
    }

    #[test]
    fn free_product_state_recursion() {
        let mu = MomentSpec::custom("mu", vec![coeff(2), coeff(7), coeff(9)]);
        let nu = MomentSpec::custom("nu", vec![coeff(5), coeff(11), coeff(13)]);
        let specs = [mu.clone(), nu.clone()];
        // phi(a b) = mu(a) nu(b).
        let ab = vec![(0, UniPoly::gen()), (1, UniPoly::gen())];
        assert_eq!(free_product_state(&ab, &specs).unwrap(), coeff(10));
        // Centered alternating product vanishes.
        let centered = vec![
            (0, UniPoly::gen().sub_constant(&coeff(2))),
            (1, UniPoly::gen().sub_constant(&coeff(5))),
        ];
        assert_eq!(free_product_state(&centered, &specs).unwrap(), coeff(0));
        // phi(a b a) with mu(a) = 0: mu(a^2) nu(b).
        let mu0 = MomentSpec::custom("mu0", vec![coeff(0), coeff(7), coeff(0)]);
        let specs0 = [mu0, nu];
        let aba = vec![
            (0, UniPoly::gen()),
            (1, UniPoly::gen()),
            (0, UniPoly::gen()),
        ];
        assert_eq!(free_product_state(&aba, &specs0).unwrap(), coeff(35));
        // Single-algebra words reproduce the base spec.
        let aa = vec![(0, UniPoly::gen()), (0, UniPoly::gen())];
        assert_eq!(free_product_state(&aa, &specs).unwrap(), coeff(7));
    }

    #[test]
    fn free_sum_cross_checks_cumulant_pipeline() {
        let mu = two_point();
        let sc = MomentSpec::semicircle("s", coeff(1), 12);
        for (a, b) in [(&mu, &mu), (&mu, &sc), (&sc, &sc)] {
            let oracle = free_convolve_oracle(a, b, 6).unwrap();
            for n in 1..=6 {
                assert_eq!(
                    free_sum_moment(a, b, n).unwrap(),
                    oracle[n - 1],
                    "order {n}"
                );
            }
        }
    }
}
