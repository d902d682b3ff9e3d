//! Tiny global string interner for algebra labels and generator names.

use dashmap::DashMap;
use once_cell::sync::Lazy;
use std::fmt;
use std::sync::RwLock;

static LOOKUP: Lazy<DashMap<String, u32>> = Lazy::new(DashMap::new);
static NAMES: Lazy<RwLock<Vec<&'static str>>> = Lazy::new(|| RwLock::new(Vec::new()));

/// An interned string, cheap to copy and compare.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(u32);

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        if let Some(id) = LOOKUP.get(name) {
            return Symbol(*id);
        }
        // Leak once per distinct string; the interner lives for the process.
        let mut names = NAMES.write().unwrap();
        // Re-check under the write lock so concurrent interns agree.
        if let Some(id) = LOOKUP.get(name) {
            return Symbol(*id);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = names.len() as u32;
        names.push(leaked);
        LOOKUP.insert(name.to_owned(), id);
        Symbol(id)
    }

    pub fn as_str(self) -> &'static str {
        NAMES.read().unwrap()[self.0 as usize]
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Order by name so displayed output is independent of interning order.
        self.as_str().cmp(other.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let a = Symbol::new("mu");
        let b = Symbol::new("mu");
        let c = Symbol::new("nu");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.as_str(), "mu");
    }
}
