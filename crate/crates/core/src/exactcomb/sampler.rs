//! Exactly uniform sampling from the lemniscate trees of a fixed size.
//!
//! `W(n, a, b)` counts the ways to grow a partial tree with `n` vertices, `a`
//! leaves and `b` unary vertices to the target size by label insertions. A
//! single uniform integer below `W(1, 1, 0) = |LT_N|` is unranked into an
//! insertion history: at each step the leaf class owns the first
//! `a·W(n+1, a, b+1)` ranks and the unary class the rest, and within a class
//! the quotient picks the vertex. Insertion histories and trees are in
//! bijection, so the result is uniform.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use crate::treecore::LemnTree;

/// Above this size the completion counts are kept as logarithms in `f64`;
/// exact tables grow as `O(N²)` big integers of `O(N log N)` bits.
pub const EXACT_SAMPLER_LIMIT: usize = 1000;

#[derive(Debug, Clone)]
enum Weights {
    /// `exact[n][k]` for a state with `n` vertices and `k` outdegree-2
    /// vertices, i.e. `a = k + 1`, `b = n - 2k - 1`.
    Exact(Vec<Vec<BigUint>>),
    /// Natural logs of the same counts.
    Log(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct UniformSampler {
    size: usize,
    weights: Weights,
}

impl UniformSampler {
    pub fn new(size: usize) -> Self {
        assert!(size >= 1, "tree size must be positive");
        if size <= EXACT_SAMPLER_LIMIT {
            Self::exact(size)
        } else {
            Self::approximate(size)
        }
    }

    pub fn exact(size: usize) -> Self {
        assert!(size >= 1, "tree size must be positive");
        let mut w: Vec<Vec<BigUint>> = vec![Vec::new(); size + 1];
        w[size] = vec![BigUint::one(); (size - 1) / 2 + 1];
        for n in (1..size).rev() {
            let kmax = (n - 1) / 2;
            let mut row = Vec::with_capacity(kmax + 1);
            for k in 0..=kmax {
                let (a, b) = (k + 1, n - 2 * k - 1);
                let mut v = &w[n + 1][k] * BigUint::from(a);
                if b > 0 {
                    v += &w[n + 1][k + 1] * BigUint::from(b);
                }
                row.push(v);
            }
            w[n] = row;
        }
        Self {
            size,
            weights: Weights::Exact(w),
        }
    }

    /// Log-domain weights with probabilities formed from differences of
    /// logarithms. Relative error of each branch probability is a few ulps,
    /// so the law is uniform only up to that accuracy.
    pub fn approximate(size: usize) -> Self {
        assert!(size >= 1, "tree size must be positive");
        let mut w: Vec<Vec<f64>> = vec![Vec::new(); size + 1];
        w[size] = vec![0.0; (size - 1) / 2 + 1];
        for n in (1..size).rev() {
            let kmax = (n - 1) / 2;
            let mut row = Vec::with_capacity(kmax + 1);
            for k in 0..=kmax {
                let (a, b) = (k + 1, n - 2 * k - 1);
                let leaf = (a as f64).ln() + w[n + 1][k];
                let v = if b > 0 {
                    let unary = (b as f64).ln() + w[n + 1][k + 1];
                    log_add_exp(leaf, unary)
                } else {
                    leaf
                };
                row.push(v);
            }
            w[n] = row;
        }
        Self {
            size,
            weights: Weights::Log(w),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact(_))
    }

    /// `|LT_N|` when exact.
    pub fn total(&self) -> Option<&BigUint> {
        match &self.weights {
            Weights::Exact(w) => Some(&w[1][0]),
            Weights::Log(_) => None,
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> LemnTree {
        let mut builder = Builder::new(self.size);
        match &self.weights {
            Weights::Exact(w) => {
                let mut rank = random_below(&w[1][0], rng);
                for n in 1..self.size {
                    let k = builder.two;
                    let a = builder.leaves.len();
                    let leaf_w = &w[n + 1][k];
                    let leaf_block = leaf_w * BigUint::from(a);
                    if rank < leaf_block {
                        let (idx, rem) = rank.div_rem(leaf_w);
                        rank = rem;
                        builder.attach_to_leaf(idx.to_usize().expect("index below a"));
                    } else {
                        rank -= leaf_block;
                        let unary_w = &w[n + 1][k + 1];
                        let (idx, rem) = rank.div_rem(unary_w);
                        rank = rem;
                        builder.attach_to_unary(idx.to_usize().expect("index below b"));
                    }
                }
            }
            Weights::Log(w) => {
                for n in 1..self.size {
                    let k = builder.two;
                    let a = builder.leaves.len();
                    let b = builder.unary.len();
                    let p_leaf = ((a as f64).ln() + w[n + 1][k] - w[n][k]).exp();
                    if b == 0 || rng.random::<f64>() < p_leaf {
                        builder.attach_to_leaf(rng.random_range(0..a));
                    } else {
                        builder.attach_to_unary(rng.random_range(0..b));
                    }
                }
            }
        }
        builder.finish()
    }
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

struct Builder {
    parent: Vec<usize>,
    leaves: Vec<usize>,
    unary: Vec<usize>,
    two: usize,
}

impl Builder {
    fn new(size: usize) -> Self {
        let mut leaves = Vec::with_capacity(size);
        leaves.push(1);
        Self {
            parent: Vec::with_capacity(size.saturating_sub(1)),
            leaves,
            unary: Vec::new(),
            two: 0,
        }
    }

    fn next_label(&self) -> usize {
        self.parent.len() + 2
    }

    fn attach_to_leaf(&mut self, idx: usize) {
        let label = self.next_label();
        let v = self.leaves.swap_remove(idx);
        self.unary.push(v);
        self.leaves.push(label);
        self.parent.push(v);
    }

    fn attach_to_unary(&mut self, idx: usize) {
        let label = self.next_label();
        let v = self.unary.swap_remove(idx);
        self.two += 1;
        self.leaves.push(label);
        self.parent.push(v);
    }

    fn finish(self) -> LemnTree {
        LemnTree::from_parents(self.parent).expect("insertion keeps invariants")
    }
}

/// Uniform integer in `[0, bound)` by rejection on the bit length.
pub fn random_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let mask = if top_bits == 32 {
        u32::MAX
    } else {
        (1u32 << top_bits) - 1
    };
    let mut digits = vec![0u32; words];
    loop {
        for d in digits.iter_mut() {
            *d = rng.next_u32();
        }
        digits[words - 1] &= mask;
        let x = BigUint::from_slice(&digits);
        if &x < bound {
            return x;
        }
    }
}
