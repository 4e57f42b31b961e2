//! Lemniscate trees of concrete polynomials.
//!
//! Critical points come from a simultaneous root finder on `p'`; each
//! singular level curve `{|p| = |p(w)|}` is traced from its saddle into two
//! closed petals, the zeros inside each petal are found, and the nesting of
//! these zero sets in decreasing critical value gives the tree.

mod export;
mod pairing;
mod poly;
mod roots;
mod trace;

use num_complex::Complex64;
use thiserror::Error;

pub use export::{component_export, lemniscate_export, PetalExport};
pub use pairing::{paired_fraction, pairing_from_analysis, pairing_stats, PairingStats, DEFAULT_PAIRING_RADIUS};
pub use poly::{expand_zeros, PolynomialRep, ZeroForm};
pub use roots::{
    critical_points, genericity_check, CriticalData, GenericityReport, ABERTH_MAX_ITER, RESIDUAL_TOL, TAU_GAP, TAU_SEP,
};
pub use trace::{
    analyze, build_lemniscate_tree, point_in_polygon, trace_component_log, trace_singular_component, zeros_in_petal,
    LemniscateAnalysis, PetalCurve, SingularComponent, CAPTURE_STEPS, INITIAL_STEP, MAX_CHORD_ANGLE, MAX_PETAL_POINTS,
};

use crate::treecore::{tree_from_permutation, LemnTree, Permutation};

type C = Complex64;

/// Imaginary parts below this (relative to the zero spread) count as real.
pub const REAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("degree {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what} did not converge (residual {residual:e})")]
    NonConvergence { what: &'static str, residual: f64 },
    #[error("polynomial is not lemniscate generic: {0:?}")]
    NotGeneric(GenericityReport),
    #[error("tracing failed: {0}")]
    TracingFailure(String),
    #[error("argument principle gives {winding}, polygon test gives {inside}")]
    ArgumentMismatch { winding: f64, inside: usize },
    #[error("petal zero sets do not split a block: {0}")]
    PartitionInconsistency(String),
    #[error("critical point off the real line (imaginary part {0:e})")]
    NonRealCritical(f64),
    #[error("evaluation at a zero of p")]
    EvaluationAtZero,
}

impl GeoError {
    /// Short machine-readable tag.
    pub fn reason(&self) -> &'static str {
        match self {
            GeoError::DegreeTooSmall(_) => "degree_too_small",
            GeoError::InvalidInput(_) => "invalid_input",
            GeoError::NonConvergence { .. } => "non_convergence",
            GeoError::NotGeneric(_) => "not_generic",
            GeoError::TracingFailure(_) => "tracing_failure",
            GeoError::ArgumentMismatch { .. } => "argument_mismatch",
            GeoError::PartitionInconsistency(_) => "partition_inconsistency",
            GeoError::NonRealCritical(_) => "non_real_critical",
            GeoError::EvaluationAtZero => "evaluation_at_zero",
        }
    }
}

/// `p'(w)/p(w)`, from the zeros when they are known.
pub fn log_derivative_field(p: &PolynomialRep, w: C) -> Result<C, GeoError> {
    let v = if let Some(zeros) = p.zeros() {
        zeros.iter().map(|z| (w - z).inv()).sum()
    } else if let Some(m) = p.monomial_coeffs() {
        let (f, df) = poly::horner_with_derivative(m, w);
        df / f
    } else {
        let c = p.cheb().expect("one form is present");
        c.derivative().eval_complex(w) / c.eval_complex(w)
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(GeoError::EvaluationAtZero)
    }
}

/// Critical points of a real-rooted polynomial from left to right with
/// `log |p|` at each.
pub fn real_critical_points(p: &PolynomialRep) -> Result<Vec<(f64, f64)>, GeoError> {
    let n = p.degree();
    if n < 2 {
        return Err(GeoError::DegreeTooSmall(n));
    }
    let mut out: Vec<(f64, f64)> = if let (None, Some(c)) = (p.zeros(), p.cheb()) {
        let d = c.derivative();
        let xs = d
            .real_roots(-1.05, 1.05, None)
            .map_err(|e| GeoError::InvalidInput(e.to_string()))?;
        if xs.len() != n - 1 {
            return Err(GeoError::NonRealCritical(f64::NAN));
        }
        xs.into_iter().map(|x| (x, c.eval(x).abs().ln())).collect()
    } else {
        let crit = critical_points(p)?;
        let zf = p.to_zero_form()?;
        let spread = zf.zeros.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let worst = crit.points.iter().map(|w| w.im.abs()).fold(0.0, f64::max);
        if worst > REAL_TOL * spread {
            return Err(GeoError::NonRealCritical(worst));
        }
        crit.points
            .iter()
            .map(|w| (w.re, zf.log_abs(C::new(w.re, 0.0))))
            .collect()
    };
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Critical-value ranks read from left to right: label 1 for the largest
/// `|p(w)|`.
pub fn real_rooted_permutation(p: &PolynomialRep) -> Result<Permutation, GeoError> {
    let crit = real_critical_points(p)?;
    let logs: Vec<f64> = crit.iter().map(|c| c.1).collect();
    let mut sorted = logs.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    for pair in sorted.windows(2) {
        let gap = -(pair[1] - pair[0]).exp_m1();
        if !(gap > TAU_GAP) {
            return Err(GeoError::NotGeneric(GenericityReport {
                min_relative_value_gap: gap,
                min_critical_separation: f64::NAN,
                zero_on_critical_level: false,
                generic: false,
            }));
        }
    }
    Ok(Permutation::from_decreasing_ranks(&logs))
}

/// Tree of a real-rooted polynomial through its critical-value permutation.
pub fn real_rooted_tree(p: &PolynomialRep) -> Result<LemnTree, GeoError> {
    let sigma = real_rooted_permutation(p)?;
    Ok(tree_from_permutation(&sigma).expect("nonempty permutation"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodels::ChebSeries;
    use crate::treecore::count_valleys;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn log_derivative_examples() {
        let p = PolynomialRep::from_zeros(vec![real(1.0), real(-1.0)]).unwrap();
        assert!(log_derivative_field(&p, real(0.0)).unwrap().norm() < 1e-15);
        let q = PolynomialRep::from_zeros(vec![real(1.0)]).unwrap();
        assert_eq!(log_derivative_field(&q, real(2.0)).unwrap(), real(1.0));
        assert_eq!(log_derivative_field(&q, real(1.0)), Err(GeoError::EvaluationAtZero));
    }

    #[test]
    fn log_derivative_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..10 {
            let zeros: Vec<C> = (0..30)
                .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let a = PolynomialRep::from_zeros(zeros).unwrap();
            let b = PolynomialRep::from_monomial(a.to_monomial().unwrap()).unwrap();
            let w = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let la = log_derivative_field(&a, w).unwrap();
            let lb = log_derivative_field(&b, w).unwrap();
            assert!((la - lb).norm() <= 1e-9 * la.norm());
        }
    }

    #[test]
    fn real_rooted_examples() {
        let p = PolynomialRep::from_zeros(vec![real(-1.0), real(2.0)]).unwrap();
        assert_eq!(real_rooted_tree(&p).unwrap(), LemnTree::singleton());
        let cubic = PolynomialRep::from_monomial(vec![real(0.0), real(-3.0), real(0.0), real(1.0)]).unwrap();
        assert!(matches!(real_rooted_tree(&cubic), Err(GeoError::NotGeneric(_))));
        // z³ + 4z: p' = 3z² + 4 has roots ±2i/√3.
        let complex = PolynomialRep::from_zeros(vec![C::new(0.0, 2.0), C::new(0.0, -2.0), real(0.0)]).unwrap();
        assert!(matches!(real_rooted_tree(&complex), Err(GeoError::NonRealCritical(_))));
    }

    #[test]
    fn perturbed_chebyshev_valleys() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let mut c: Vec<f64> = (0..10).map(|_| if rng.random::<bool>() { 0.1 } else { -0.1 }).collect();
            c.push(1.0);
            let p = PolynomialRep::from_cheb(ChebSeries::new(c)).unwrap();
            let sigma = real_rooted_permutation(&p).unwrap();
            let t = real_rooted_tree(&p).unwrap();
            assert_eq!(t.size(), 9);
            assert_eq!(t.outdegree_profile().n2, count_valleys(&sigma));
        }
    }

    #[test]
    fn geometric_and_permutation_pipelines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..10 {
            let mut zeros: Vec<C> = (0..8).map(|_| real(rng.random_range(-1.0..1.0))).collect();
            zeros.sort_by(|a, b| a.re.total_cmp(&b.re));
            let p = PolynomialRep::from_zeros(zeros).unwrap();
            let geo = build_lemniscate_tree(&p).unwrap();
            let perm = real_rooted_tree(&p).unwrap();
            assert_eq!(geo.canonical_encode(), perm.canonical_encode());
        }
    }
}
