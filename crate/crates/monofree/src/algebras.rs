//! Concrete presentations of the two quotient algebras the engine works in:
//! the F0 schema (generator copies `X'(k)`, `X''(k)` with the decoration-flip
//! relation) and the H0 schema (plain copies `X(k)` with projection
//! absorption only), each over a totally ordered projection lattice per
//! algebra label.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{EngineError, Result};
use crate::ncpoly::{Decoration, Letter, NCPolynomial};
use crate::symbol::Symbol;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Schema {
    F0,
    H0,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// A relation system defining a quotient algebra: which labels and generators
/// exist and which rewrite schema applies. Immutable after construction; the
/// `id` keys the global reduction memo.
#[derive(Clone, Debug)]
pub struct AlgebraPresentation {
    id: u64,
    schema: Schema,
    generators: BTreeMap<Symbol, Vec<Symbol>>,
}

impl AlgebraPresentation {
    /// Presentation of `F0(G)`: one algebra label, prime and doubleprime
    /// copies of each generator, relations (3.2)-(3.4) plus the lattice rules
    /// and `A''(1) = {0}`.
    pub fn f0(label: &str, generators: &[&str]) -> Result<AlgebraPresentation> {
        if generators.is_empty() {
            return Err(EngineError::Presentation(
                "F0 presentation needs a nonempty generator set".into(),
            ));
        }
        let mut map = BTreeMap::new();
        map.insert(
            Symbol::new(label),
            generators.iter().map(|g| Symbol::new(g)).collect(),
        );
        Ok(AlgebraPresentation {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            schema: Schema::F0,
            generators: map,
        })
    }

    /// Presentation of the `H0` family: one quotient of `*_k A_l(k)` per
    /// label, each extended by its own projection sequence. Units of all
    /// copies are identified with the empty word.
    pub fn h0(family: &[(&str, &[&str])]) -> Result<AlgebraPresentation> {
        if family.is_empty() {
            return Err(EngineError::Presentation(
                "H0 presentation needs at least one label".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for (label, gens) in family {
            let sym = Symbol::new(label);
            if map.insert(sym, gens.iter().map(|g| Symbol::new(g)).collect::<Vec<_>>())
                .is_some()
            {
                return Err(EngineError::Presentation(format!(
                    "duplicate algebra label `{label}`"
                )));
            }
        }
        Ok(AlgebraPresentation {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            schema: Schema::H0,
            generators: map,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn labels(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.generators.keys().copied()
    }

    pub fn has_label(&self, label: Symbol) -> bool {
        self.generators.contains_key(&label)
    }

    /// The unique label, when the presentation has exactly one.
    pub fn sole_label(&self) -> Option<Symbol> {
        if self.generators.len() == 1 {
            self.generators.keys().next().copied()
        } else {
            None
        }
    }

    pub fn generators_of(&self, label: Symbol) -> &[Symbol] {
        self.generators.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Checks that a letter is declared in this presentation and uses the
    /// decoration family of its schema.
    pub fn check_letter(&self, letter: &Letter) -> Result<()> {
        let label = letter.label();
        let Some(gens) = self.generators.get(&label) else {
            return Err(EngineError::Presentation(format!(
                "algebra label `{label}` not declared in presentation"
            )));
        };
        if let Letter::Gen { gen, dec, .. } = letter {
            if !gens.contains(gen) {
                return Err(EngineError::Presentation(format!(
                    "generator `{gen}` not declared for algebra `{label}`"
                )));
            }
            let ok = match self.schema {
                Schema::F0 => matches!(dec, Decoration::Prime | Decoration::DoublePrime),
                Schema::H0 => matches!(dec, Decoration::Plain),
            };
            if !ok {
                return Err(EngineError::Presentation(format!(
                    "decoration {dec:?} is not valid in the {:?} schema",
                    self.schema
                )));
            }
        }
        Ok(())
    }

    pub fn check_poly(&self, p: &NCPolynomial) -> Result<()> {
        for (w, _) in p.terms() {
            for l in w.letters() {
                self.check_letter(l)?;
            }
        }
        Ok(())
    }
}

/// The filtration index of the subalgebra `B^(m)`: words using copy indices
/// and projection levels up to `m`. `B^(0)` holds only projection words.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FiltrationLevel(pub u32);

/// Smallest `m` with every letter of `x` using copy index <= m and projection
/// level <= m. Assumes `x` is in normal form; the level of 0 is 0.
pub fn filtration_level(x: &NCPolynomial) -> FiltrationLevel {
    FiltrationLevel(x.filtration())
}
