//! Lemniscate trees: rooted nonplane binary trees on labels `1..=N` whose
//! labels increase away from the root.
//!
//! A tree is stored as a parent array over labels `2..=N` (label 1 is the
//! root). Children are unordered; [`LemnTree::canonical_encode`] gives a string
//! that identifies a tree up to nonplane isomorphism.
//!
//! Canonical encoding grammar (ASCII):
//!
//! ```text
//! node     := label [ "(" node [ "," node ] ")" ]
//! label    := decimal integer
//! ```
//!
//! Children are listed in increasing label order. Because labels increase
//! along root paths, the root label of a subtree is also its minimum label, so
//! this is the "children ordered by minimum subtree label" order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("invalid lemniscate tree: {0}")]
    Invalid(ValidityReport),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("empty permutation")]
    EmptyPermutation,
}

/// Wire form of a tree: `{"size": N, "parent": [p2, ..., pN]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTree {
    pub size: usize,
    pub parent: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// `size` must be at least 1.
    EmptyTree,
    /// The parent array must have exactly `size - 1` entries.
    ParentLength { expected: usize, found: usize },
    /// A parent label outside `1..=size`.
    ParentOutOfRange { child: usize, parent: usize },
    /// A child label not larger than its parent's label.
    NotIncreasing { child: usize, parent: usize },
    /// More than two children.
    TooManyChildren { label: usize, children: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTree => write!(f, "size must be positive"),
            Violation::ParentLength { expected, found } => {
                write!(f, "parent array has {found} entries, expected {expected}")
            }
            Violation::ParentOutOfRange { child, parent } => {
                write!(f, "parent {parent} of label {child} is out of range")
            }
            Violation::NotIncreasing { child, parent } => {
                write!(f, "child label {child} is not larger than parent {parent}")
            }
            Violation::TooManyChildren { label, children } => {
                write!(f, "label {label} has {children} children")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every lemniscate-tree invariant and lists the violated ones.
///
/// Connectivity and acyclicity follow from the parent-array form once every
/// parent label is smaller than its child's.
pub fn validate(raw: &RawTree) -> ValidityReport {
    let mut violations = Vec::new();
    if raw.size == 0 {
        violations.push(Violation::EmptyTree);
        return ValidityReport { violations };
    }
    if raw.parent.len() + 1 != raw.size {
        violations.push(Violation::ParentLength {
            expected: raw.size - 1,
            found: raw.parent.len(),
        });
        return ValidityReport { violations };
    }
    let mut outdeg = vec![0usize; raw.size + 1];
    for (i, &p) in raw.parent.iter().enumerate() {
        let child = i + 2;
        if p == 0 || p > raw.size {
            violations.push(Violation::ParentOutOfRange { child, parent: p });
            continue;
        }
        if p >= child {
            violations.push(Violation::NotIncreasing { child, parent: p });
        }
        outdeg[p] += 1;
    }
    for (label, &d) in outdeg.iter().enumerate().skip(1) {
        if d > 2 {
            violations.push(Violation::TooManyChildren { label, children: d });
        }
    }
    ValidityReport { violations }
}

/// Counts of vertices with 0, 1 and 2 children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OutdegreeProfile {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
}

impl OutdegreeProfile {
    pub fn size(&self) -> usize {
        self.n0 + self.n1 + self.n2
    }

    /// Number of plane embeddings of a tree with this profile: each only
    /// child picks a side and each pair of children picks an order.
    pub fn plane_embeddings_log2(&self) -> usize {
        self.n1 + self.n2
    }
}

/// A validated lemniscate tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LemnTree {
    parent: Vec<usize>,
}

impl LemnTree {
    pub fn singleton() -> Self {
        Self { parent: Vec::new() }
    }

    /// Builds a tree from the parent labels of `2..=N`.
    pub fn from_parents(parent: Vec<usize>) -> Result<Self, TreeError> {
        let raw = RawTree {
            size: parent.len() + 1,
            parent,
        };
        Self::try_from(raw)
    }

    pub fn size(&self) -> usize {
        self.parent.len() + 1
    }

    /// Parent of `label`, or `None` for the root.
    pub fn parent(&self, label: usize) -> Option<usize> {
        if label <= 1 {
            None
        } else {
            Some(self.parent[label - 2])
        }
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Children of every label, sorted increasingly. Index 0 is unused.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.size() + 1];
        for (i, &p) in self.parent.iter().enumerate() {
            ch[p].push(i + 2);
        }
        ch
    }

    pub fn outdegree_profile(&self) -> OutdegreeProfile {
        let n = self.size();
        let mut outdeg = vec![0u8; n + 1];
        for &p in &self.parent {
            outdeg[p] += 1;
        }
        let mut prof = OutdegreeProfile::default();
        for &d in &outdeg[1..] {
            match d {
                0 => prof.n0 += 1,
                1 => prof.n1 += 1,
                _ => prof.n2 += 1,
            }
        }
        prof
    }

    /// Canonical string; equal iff the trees are equal as labeled nonplane
    /// trees.
    pub fn canonical_encode(&self) -> String {
        let children = self.children();
        let mut out = String::with_capacity(4 * self.size());
        // Explicit stack: chains of length N would otherwise recurse N deep.
        enum Step {
            Open(usize),
            Text(&'static str),
        }
        let mut stack = vec![Step::Open(1)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Text(t) => out.push_str(t),
                Step::Open(v) => {
                    out.push_str(&v.to_string());
                    let ch = &children[v];
                    if ch.is_empty() {
                        continue;
                    }
                    out.push('(');
                    stack.push(Step::Text(")"));
                    for (i, &c) in ch.iter().enumerate().rev() {
                        stack.push(Step::Open(c));
                        if i > 0 {
                            stack.push(Step::Text(","));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_raw(&self) -> RawTree {
        RawTree {
            size: self.size(),
            parent: self.parent.clone(),
        }
    }
}

impl TryFrom<RawTree> for LemnTree {
    type Error = TreeError;

    fn try_from(raw: RawTree) -> Result<Self, Self::Error> {
        let report = validate(&raw);
        if !report.is_valid() {
            return Err(TreeError::Invalid(report));
        }
        Ok(Self { parent: raw.parent })
    }
}

impl Serialize for LemnTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LemnTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawTree::deserialize(d)?;
        LemnTree::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for LemnTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_encode())
    }
}

/// A permutation of `1..=n`, stored as its one-line word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self, TreeError> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n || seen[v] {
                return Err(TreeError::InvalidPermutation(format!(
                    "{values:?} is not a permutation of 1..={n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self(values))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    /// Ranks of `keys` in decreasing order: the largest key gets 1.
    ///
    /// Ties are broken by position, so the result is always a permutation.
    pub fn from_decreasing_ranks(keys: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&i, &j| keys[j].total_cmp(&keys[i]).then(i.cmp(&j)));
        let mut values = vec![0; keys.len()];
        for (rank, &i) in idx.iter().enumerate() {
            values[i] = rank + 1;
        }
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = TreeError;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// The increasing binary tree of `sigma` with its plane embedding forgotten.
///
/// The root is the position of the minimum; the words to its left and right
/// generate the two subtrees. Built with the usual Cartesian-tree stack in
/// linear time.
pub fn tree_from_permutation(sigma: &Permutation) -> Result<LemnTree, TreeError> {
    let w = sigma.values();
    if w.is_empty() {
        return Err(TreeError::EmptyPermutation);
    }
    let n = w.len();
    let mut parent = vec![0usize; n + 1];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    for &v in w {
        let mut last = None;
        while let Some(&top) = stack.last() {
            if top > v {
                last = stack.pop();
            } else {
                break;
            }
        }
        if let Some(l) = last {
            parent[l] = v;
        }
        if let Some(&top) = stack.last() {
            parent[v] = top;
        }
        stack.push(v);
    }
    Ok(LemnTree {
        parent: parent[2..].to_vec(),
    })
}

/// Number of descents immediately followed by an ascent.
pub fn count_valleys(sigma: &Permutation) -> usize {
    sigma.values().windows(3).filter(|t| t[0] > t[1] && t[1] < t[2]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
        // Heap's algorithm.
        let mut a: Vec<usize> = (1..=n).collect();
        let mut c = vec![0usize; n];
        f(&a);
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    a.swap(0, i);
                } else {
                    a.swap(c[i], i);
                }
                f(&a);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn validate_examples() {
        let single = RawTree {
            size: 1,
            parent: vec![],
        };
        assert!(validate(&single).is_valid());
        let cherry = RawTree {
            size: 3,
            parent: vec![1, 1],
        };
        assert!(validate(&cherry).is_valid());
        let bad = RawTree {
            size: 3,
            parent: vec![3, 1],
        };
        let report = validate(&bad);
        assert_eq!(
            report.violations,
            vec![Violation::NotIncreasing { child: 2, parent: 3 }]
        );
    }

    #[test]
    fn validate_reports_every_violation() {
        let raw = RawTree {
            size: 5,
            parent: vec![1, 1, 1, 9],
        };
        let report = validate(&raw);
        assert!(report
            .violations
            .contains(&Violation::TooManyChildren { label: 1, children: 3 }));
        assert!(report
            .violations
            .contains(&Violation::ParentOutOfRange { child: 5, parent: 9 }));
        assert!(!validate(&RawTree {
            size: 0,
            parent: vec![]
        })
        .is_valid());
        assert!(!validate(&RawTree {
            size: 3,
            parent: vec![1]
        })
        .is_valid());
        assert!(LemnTree::try_from(raw).is_err());
    }

    #[test]
    fn profile_examples() {
        let p = LemnTree::singleton().outdegree_profile();
        assert_eq!((p.n0, p.n1, p.n2), (1, 0, 0));
        let chain = LemnTree::from_parents(vec![1, 2]).unwrap();
        let p = chain.outdegree_profile();
        assert_eq!((p.n0, p.n1, p.n2), (1, 2, 0));
        let cherry = LemnTree::from_parents(vec![1, 1]).unwrap();
        let p = cherry.outdegree_profile();
        assert_eq!((p.n0, p.n1, p.n2), (2, 0, 1));
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(tree_from_permutation(&perm(&[1])).unwrap().size(), 1);
        let t = tree_from_permutation(&perm(&[1, 2, 3])).unwrap();
        assert_eq!(t.parents(), &[1, 2]);
        assert_eq!(t.outdegree_profile().n2, 0);
        let t = tree_from_permutation(&perm(&[2, 1, 3])).unwrap();
        assert_eq!(t.parents(), &[1, 1]);
        assert_eq!(t.outdegree_profile().n2, 1);
        assert!(tree_from_permutation(&Permutation::identity(0)).is_err());
    }

    #[test]
    fn valley_examples() {
        assert_eq!(count_valleys(&perm(&[1, 2, 3])), 0);
        assert_eq!(count_valleys(&perm(&[2, 1, 3])), 1);
        assert_eq!(count_valleys(&perm(&[3, 1, 4, 2, 5])), 2);
        assert_eq!(count_valleys(&perm(&[2, 1])), 0);
    }

    #[test]
    fn encoding_examples() {
        assert_eq!(LemnTree::singleton().canonical_encode(), "1");
        let cherry = LemnTree::from_parents(vec![1, 1]).unwrap();
        assert_eq!(cherry.canonical_encode(), "1(2,3)");
        let a = tree_from_permutation(&perm(&[2, 1, 3])).unwrap();
        let b = tree_from_permutation(&perm(&[3, 1, 2])).unwrap();
        assert_eq!(a.canonical_encode(), b.canonical_encode());
        let chain = LemnTree::from_parents(vec![1, 2, 2]).unwrap();
        assert_eq!(chain.canonical_encode(), "1(2(3,4))");
    }

    #[test]
    fn deep_chain_encodes_without_recursion() {
        let n = 100_000;
        let t = LemnTree::from_parents((1..n).collect()).unwrap();
        let enc = t.canonical_encode();
        assert!(enc.ends_with(&")".repeat(n - 1)));
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let t = LemnTree::from_parents(vec![1, 1, 2]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"size":4,"parent":[1,1,2]}"#);
        let back: LemnTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<LemnTree>(r#"{"size":3,"parent":[3,1]}"#).is_err());
    }

    #[test]
    fn valleys_match_branching_exhaustively() {
        for n in 1..=7 {
            for_each_permutation(n, |w| {
                let s = perm(w);
                let t = tree_from_permutation(&s).unwrap();
                let prof = t.outdegree_profile();
                assert_eq!(prof.n2, count_valleys(&s), "{w:?}");
                assert_eq!(prof.n0, prof.n2 + 1);
            });
        }
    }

    #[test]
    fn plane_embedding_multiplicity() {
        for n in 1..=8 {
            let mut groups: HashMap<String, (usize, OutdegreeProfile)> = HashMap::new();
            let mut total = 0usize;
            for_each_permutation(n, |w| {
                let t = tree_from_permutation(&perm(w)).unwrap();
                let e = groups.entry(t.canonical_encode()).or_insert((0, t.outdegree_profile()));
                e.0 += 1;
                total += 1;
            });
            let mut sum = 0usize;
            for (count, prof) in groups.values() {
                assert_eq!(*count, 1 << prof.plane_embeddings_log2());
                sum += 1 << prof.plane_embeddings_log2();
            }
            assert_eq!(sum, total);
        }
    }

    proptest! {
        #[test]
        fn valley_identity_random(seed in any::<u64>(), n in 1usize..200) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut w: Vec<usize> = (1..=n).collect();
            w.shuffle(&mut rng);
            let s = perm(&w);
            let t = tree_from_permutation(&s).unwrap();
            let prof = t.outdegree_profile();
            prop_assert_eq!(prof.n2, count_valleys(&s));
            prop_assert_eq!(prof.n0, prof.n2 + 1);
            prop_assert_eq!(prof.size(), n);
        }
    }
}
