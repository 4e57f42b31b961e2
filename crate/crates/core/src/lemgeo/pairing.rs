//! Zero / critical-point pairing diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::PolynomialRep;
use super::roots::CriticalData;
use super::trace::{analyze, LemniscateAnalysis};
use super::GeoError;

type C = Complex64;

/// Pairing radius multiplier `r`; `arcsin(1/r) ≤ 1/10` needs `r ≥ 10.02`.
pub const DEFAULT_PAIRING_RADIUS: f64 = 11.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingStats {
    /// Among zeros with `|ζ| ≥ N^(-1/4)`, the fraction with exactly one
    /// critical point within `r·|ζ|/N`. Zero when no zero is eligible.
    pub paired_fraction: f64,
    /// Number of zeros with `|ζ| ≥ N^(-1/4)`.
    pub eligible: usize,
    /// Fraction of critical points whose smaller petal holds one zero.
    pub small_petal_fraction: Option<f64>,
    /// Distance from each zero to its nearest critical point.
    pub nearest_critical: Vec<f64>,
}

/// Pairing census from the zeros and critical points alone.
pub fn paired_fraction(zeros: &[C], crit: &CriticalData, r: f64) -> PairingStats {
    let n = zeros.len() as f64;
    let cutoff = n.powf(-0.25);
    let mut eligible = 0;
    let mut paired = 0;
    let mut nearest = Vec::with_capacity(zeros.len());
    for z in zeros {
        let radius = r * z.norm() / n;
        let mut inside = 0;
        let mut best = f64::INFINITY;
        for w in &crit.points {
            let d = (w - z).norm();
            best = best.min(d);
            if d <= radius {
                inside += 1;
            }
        }
        nearest.push(best);
        if z.norm() >= cutoff {
            eligible += 1;
            if inside == 1 {
                paired += 1;
            }
        }
    }
    PairingStats {
        paired_fraction: if eligible > 0 {
            paired as f64 / eligible as f64
        } else {
            0.0
        },
        eligible,
        small_petal_fraction: None,
        nearest_critical: nearest,
    }
}

/// Pairing census plus the petal census of a full analysis.
pub fn pairing_from_analysis(a: &LemniscateAnalysis, r: f64) -> PairingStats {
    let mut s = paired_fraction(&a.zero_form.zeros, &a.critical, r);
    let single = a.components.iter().filter(|c| c.smaller_petal_zeros() == 1).count();
    s.small_petal_fraction = Some(single as f64 / a.components.len() as f64);
    s
}

/// Traces every singular component and reports both censuses.
pub fn pairing_stats(p: &PolynomialRep, r: f64) -> Result<PairingStats, GeoError> {
    if !(r > 0.0) {
        return Err(GeoError::InvalidInput("pairing radius must be positive".into()));
    }
    let a = analyze(p)?;
    Ok(pairing_from_analysis(&a, r))
}
