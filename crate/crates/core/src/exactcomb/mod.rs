//! Exact combinatorics of lemniscate trees: counts by size and number of
//! outdegree-2 vertices, exact moments of that number, exactly uniform
//! sampling and the asymptotic constants.
//!
//! Indexing: row `n` of a [`CoefficientTable`] counts trees of size `n + 1`.
//! Every public function taking a tree *size* converts internally.

pub mod asymptotics;
pub mod sampler;
pub mod series;
pub mod states;

pub use asymptotics::{asymptotic_constants, closed_form_constants, AsymptoticConstants};
pub use sampler::UniformSampler;
pub use series::{
    exact_moments, exact_pgf, expand_f, CoefficientTable, ExactRational, MomentJets, Moments, SeriesError, UPolynomial,
};
pub use states::{enumerate_tree_values, enumerate_trees, EnumerationError, StateCount};

/// Default expansion depth for the full coefficient table.
pub const DEFAULT_N_MAX: usize = 400;
