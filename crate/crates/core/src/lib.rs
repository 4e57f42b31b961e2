//! Lemniscate trees of complex polynomials.
//!
//! * [`treecore`]: the tree data model, permutation bijection and statistics.
//! * [`exactcomb`]: exact enumeration by outdegree-2 count, exact moments and
//!   exactly uniform sampling.
//! * [`polymodels`]: random polynomial models and Chebyshev-series tools.
//! * [`lemgeo`]: numerical extraction of the lemniscate tree of a polynomial.
//! * [`exprunner`]: reproducible Monte Carlo experiments and data files.

pub mod exactcomb;
pub mod exprunner;
pub mod lemgeo;
pub mod polymodels;
pub mod treecore;

pub use treecore::{LemnTree, OutdegreeProfile, Permutation};
