//! Label-insertion oracles for the tree counts.
//!
//! Every lemniscate tree of size `n + 1` arises from exactly one tree of size
//! `n` by attaching label `n + 1` to a vertex of outdegree at most one. In a
//! state with `a` leaves and `b` unary vertices, attaching to a leaf gives
//! `(a, b + 1)` and attaching to a unary vertex gives `(a + 1, b - 1)` with one
//! more outdegree-2 vertex.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::treecore::LemnTree;

/// Largest size [`enumerate_trees`] accepts.
pub const ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("size {0} is outside 1..={ENUMERATION_LIMIT}")]
    SizeGuard(usize),
}

/// `c(n, a, b)`: trees with `n` vertices, `a` leaves and `b` unary vertices.
#[derive(Debug, Clone)]
pub struct StateCount {
    levels: Vec<BTreeMap<(usize, usize), BigInt>>,
}

impl StateCount {
    /// Runs the insertion recurrence up to `n_max` vertices.
    pub fn compute(n_max: usize) -> Self {
        let mut levels = vec![BTreeMap::new(); n_max.max(1) + 1];
        levels[1].insert((1, 0), BigInt::one());
        for n in 1..n_max {
            let (lo, hi) = levels.split_at_mut(n + 1);
            let cur = &lo[n];
            let next = &mut hi[0];
            for (&(a, b), c) in cur {
                if a > 0 {
                    *next.entry((a, b + 1)).or_insert_with(BigInt::zero) += c * BigInt::from(a);
                }
                if b > 0 {
                    *next.entry((a + 1, b - 1)).or_insert_with(BigInt::zero) += c * BigInt::from(b);
                }
            }
        }
        Self { levels }
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn get(&self, n: usize, a: usize, b: usize) -> BigInt {
        self.levels
            .get(n)
            .and_then(|m| m.get(&(a, b)))
            .cloned()
            .unwrap_or_default()
    }

    /// Nonzero states at size `n`.
    pub fn states(&self, n: usize) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.levels[n].iter().map(|(&(a, b), c)| (a, b, c))
    }

    /// Counts of size-`n` trees by number of outdegree-2 vertices
    /// `k = n - a - b`; equals row `n - 1` of the coefficient table.
    pub fn marginal(&self, n: usize) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = vec![BigInt::zero(); n / 2 + 1];
        for (a, b, c) in self.states(n) {
            let k = n - a - b;
            out[k] += c;
        }
        while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    pub fn total(&self, n: usize) -> BigInt {
        self.levels[n].values().sum()
    }
}

/// Every lemniscate tree of the given size, once each, as canonical
/// encodings.
pub fn enumerate_trees(size: usize) -> Result<Vec<String>, EnumerationError> {
    Ok(enumerate_tree_values(size)?
        .iter()
        .map(LemnTree::canonical_encode)
        .collect())
}

/// Like [`enumerate_trees`] but returns the trees.
pub fn enumerate_tree_values(size: usize) -> Result<Vec<LemnTree>, EnumerationError> {
    if size == 0 || size > ENUMERATION_LIMIT {
        return Err(EnumerationError::SizeGuard(size));
    }
    let mut out = Vec::new();
    let mut parent = Vec::with_capacity(size - 1);
    let mut outdeg = vec![0u8; size + 1];
    insert_next(size, &mut parent, &mut outdeg, &mut out);
    let mut seen = HashSet::with_capacity(out.len());
    for t in &out {
        assert!(seen.insert(t.canonical_encode()), "duplicate insertion history");
    }
    Ok(out)
}

fn insert_next(size: usize, parent: &mut Vec<usize>, outdeg: &mut [u8], out: &mut Vec<LemnTree>) {
    let next = parent.len() + 2;
    if next > size {
        out.push(LemnTree::from_parents(parent.clone()).expect("insertion keeps invariants"));
        return;
    }
    for v in 1..next {
        if outdeg[v] < 2 {
            outdeg[v] += 1;
            parent.push(v);
            insert_next(size, parent, outdeg, out);
            parent.pop();
            outdeg[v] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcomb::series::expand_f;

    #[test]
    fn state_examples() {
        let s = StateCount::compute(10);
        assert_eq!(s.get(1, 1, 0), BigInt::from(1));
        assert_eq!(s.get(3, 2, 0), BigInt::from(1));
        assert_eq!(s.get(3, 1, 2), BigInt::from(1));
        assert_eq!(s.get(3, 1, 1), BigInt::from(0));
        let table = expand_f(9);
        assert_eq!(s.total(10), table.row_sum(9));
    }

    #[test]
    fn states_obey_leaf_identity() {
        let s = StateCount::compute(25);
        for n in 1..=25 {
            for (a, b, c) in s.states(n) {
                assert!(a >= 1 && a + b <= n);
                assert_eq!(a, (n - a - b) + 1);
                assert!(c > &BigInt::zero());
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_trees(1).unwrap(), vec!["1".to_string()]);
        assert_eq!(enumerate_trees(3).unwrap().len(), 2);
        assert_eq!(enumerate_trees(4).unwrap().len(), 5);
        assert_eq!(enumerate_trees(0), Err(EnumerationError::SizeGuard(0)));
        assert_eq!(enumerate_trees(13), Err(EnumerationError::SizeGuard(13)));
    }

    #[test]
    fn marginal_matches_table() {
        let s = StateCount::compute(30);
        let t = expand_f(29);
        for n in 1..=30 {
            assert_eq!(s.marginal(n), t.row(n - 1), "size {n}");
        }
    }
}
