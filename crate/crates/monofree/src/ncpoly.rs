//! Exact noncommutative polynomials over words in generator copies and
//! lattice projections.
//!
//! Words are hash-consed: every [`Word`] in the process points into a global
//! intern table, so equality and hashing are pointer operations while ordering
//! stays structural. Coefficients are arbitrary-precision rationals; there is
//! no floating point anywhere in the core.

use dashmap::DashSet;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::symbol::Symbol;

pub type Coeff = BigRational;

pub fn coeff(n: i64) -> Coeff {
    BigRational::from_integer(n.into())
}

pub fn ratio(num: i64, den: i64) -> Coeff {
    BigRational::new(num.into(), den.into())
}

/// A lattice level `m` with `0 <= m <= infinity`. Level 0 is the zero
/// projection `q_0` and [`Level::INF`] is the unit `q_inf = 1`; both are
/// eliminated during reduction and never appear in normal forms.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(pub u32);

impl Level {
    pub const ZERO: Level = Level(0);
    pub const INF: Level = Level(u32::MAX);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_inf(self) -> bool {
        self.0 == u32::MAX
    }
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Which copy family a generator letter belongs to. `Plain` letters live in
/// the H0-style algebras (copies `X(k)`), `Prime`/`DoublePrime` in F0
/// (copies `X'(k)`, `X''(k)`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Decoration {
    Plain,
    Prime,
    DoublePrime,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Letter {
    Gen {
        label: Symbol,
        gen: Symbol,
        copy: u32,
        dec: Decoration,
        star: bool,
    },
    Proj {
        label: Symbol,
        level: Level,
    },
}

impl Letter {
    pub fn gen(label: Symbol, name: Symbol, copy: u32, dec: Decoration, star: bool) -> Letter {
        assert!(copy >= 1, "copy index must be >= 1");
        Letter::Gen {
            label,
            gen: name,
            copy,
            dec,
            star,
        }
    }

    pub fn proj(label: Symbol, level: Level) -> Letter {
        Letter::Proj { label, level }
    }

    pub fn label(&self) -> Symbol {
        match *self {
            Letter::Gen { label, .. } | Letter::Proj { label, .. } => label,
        }
    }

    pub fn starred(&self) -> Letter {
        match *self {
            Letter::Gen {
                label,
                gen,
                copy,
                dec,
                star,
            } => Letter::Gen {
                label,
                gen,
                copy,
                dec,
                star: !star,
            },
            p @ Letter::Proj { .. } => p,
        }
    }

    /// Smallest filtration level containing this letter: the copy index for a
    /// generator, the lattice level for a projection.
    pub fn filtration(&self) -> u32 {
        match *self {
            Letter::Gen { copy, .. } => copy,
            Letter::Proj { level, .. } => level.0,
        }
    }
}

static WORDS: Lazy<DashSet<Arc<[Letter]>>> = Lazy::new(DashSet::new);

/// An interned word: a finite sequence of letters, the empty sequence being
/// the unit. Two `Word`s with equal content are always pointer-equal.
#[derive(Clone)]
pub struct Word(Arc<[Letter]>);

impl Word {
    pub fn intern(letters: &[Letter]) -> Word {
        loop {
            if let Some(existing) = WORDS.get(letters) {
                return Word(existing.clone());
            }
            let arc: Arc<[Letter]> = letters.into();
            if WORDS.insert(arc.clone()) {
                return Word(arc);
            }
            // Lost a race with a concurrent intern of the same word; retry so
            // pointer equality holds.
        }
    }

    pub fn unit() -> Word {
        Word::intern(&[])
    }

    pub fn single(letter: Letter) -> Word {
        Word::intern(&[letter])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stable identity of the interned allocation, usable as a memo key.
    pub fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as *const Letter as usize
    }

    pub fn concat(&self, other: &Word) -> Word {
        if self.is_unit() {
            return other.clone();
        }
        if other.is_unit() {
            return self.clone();
        }
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(self.letters());
        v.extend_from_slice(other.letters());
        Word::intern(&v)
    }

    /// Reversed word with stars toggled on generator letters.
    pub fn involute(&self) -> Word {
        let mut v: Vec<Letter> = self.letters().iter().rev().map(Letter::starred).collect();
        if v.is_empty() {
            return self.clone();
        }
        v.shrink_to_fit();
        Word::intern(&v)
    }

    pub fn filtration(&self) -> u32 {
        self.letters().iter().map(Letter::filtration).max().unwrap_or(0)
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        // Structural order; consistent with pointer Eq because words are
        // interned, so content-equal implies pointer-equal.
        self.letters().cmp(other.letters())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        for (i, l) in self.letters().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match *l {
                Letter::Proj { level, .. } => write!(f, "q{level}")?,
                Letter::Gen {
                    gen,
                    copy,
                    dec,
                    star,
                    ..
                } => {
                    let tick = match dec {
                        Decoration::Plain => "",
                        Decoration::Prime => "'",
                        Decoration::DoublePrime => "''",
                    };
                    write!(f, "{gen}{tick}({copy}){}", if star { "*" } else { "" })?;
                }
            }
        }
        Ok(())
    }
}

/// A finite linear combination of words with exact rational coefficients.
/// Zero-coefficient terms are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct NCPolynomial {
    terms: HashMap<Word, Coeff>,
}

impl NCPolynomial {
    pub fn zero() -> NCPolynomial {
        NCPolynomial::default()
    }

    pub fn unit() -> NCPolynomial {
        NCPolynomial::from_word(Word::unit())
    }

    pub fn from_word(w: Word) -> NCPolynomial {
        NCPolynomial::from_term(w, Coeff::one())
    }

    pub fn from_term(w: Word, c: Coeff) -> NCPolynomial {
        let mut p = NCPolynomial::zero();
        p.add_term(w, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Coeff)> {
        self.terms.iter()
    }

    /// Terms sorted by word, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(Word, Coeff)> {
        let mut v: Vec<(Word, Coeff)> =
            self.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn coefficient(&self, w: &Word) -> Coeff {
        self.terms.get(w).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn add_term(&mut self, w: Word, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &NCPolynomial) -> NCPolynomial {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &NCPolynomial) -> NCPolynomial {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> NCPolynomial {
        self.scale(&-Coeff::one())
    }

    pub fn scale(&self, c: &Coeff) -> NCPolynomial {
        if c.is_zero() {
            return NCPolynomial::zero();
        }
        let mut out = NCPolynomial::zero();
        for (w, k) in self.terms() {
            out.add_term(w.clone(), k * c);
        }
        out
    }

    /// The involution: letters reversed per word, stars toggled on generator
    /// letters, projections fixed. Rational coefficients are self-conjugate.
    pub fn involute(&self) -> NCPolynomial {
        let mut out = NCPolynomial::zero();
        for (w, c) in self.terms() {
            out.add_term(w.involute(), c.clone());
        }
        out
    }

    /// Maximal filtration level over the words of the polynomial; 0 for the
    /// zero polynomial.
    pub fn filtration(&self) -> u32 {
        self.terms.keys().map(Word::filtration).max().unwrap_or(0)
    }
}

impl fmt::Debug for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.sorted_terms().iter().enumerate() {
            let neg = c < &Coeff::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "- ")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if abs.is_one() && !w.is_unit() {
                write!(f, "{w}")?;
            } else if w.is_unit() {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs} {w}")?;
            }
        }
        Ok(())
    }
}
