//! Asymptotic constants of the outdegree-2 count, evaluated numerically from
//! the moving singularity `ρ(u)` of the generating function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Finite-difference step for the derivatives of `β` at `u = 1`.
pub const DIFF_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    /// Dominant singularity of `F(z, 1)`.
    pub rho1: f64,
    /// Linear growth rate of the mean.
    pub mean_slope: f64,
    /// Linear growth rate of the variance.
    pub var_slope: f64,
}

/// Reference values in closed form.
pub fn closed_form_constants() -> AsymptoticConstants {
    AsymptoticConstants {
        rho1: PI / 2.0,
        mean_slope: 1.0 - 2.0 / PI,
        var_slope: 4.0 / (PI * PI) + 2.0 / PI - 1.0,
    }
}

/// `ρ(u) = log((1 + √(1-2u)) / (1 - √(1-2u))) / √(1-2u)` on the principal
/// branch. Near `u = 1` the square root is close to `i` and the value is
/// real.
pub fn rho(u: f64) -> Complex64 {
    let s = Complex64::new(1.0 - 2.0 * u, 0.0).sqrt();
    let one = Complex64::new(1.0, 0.0);
    ((one + s) / (one - s)).ln() / s
}

fn beta(u: f64) -> f64 {
    rho(1.0).re / rho(u).re
}

/// Sixth-order central differences for the first and second derivative.
fn central_derivatives(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let fp: Vec<f64> = (1..=3).map(|k| f(x + k as f64 * h)).collect();
    let fm: Vec<f64> = (1..=3).map(|k| f(x - k as f64 * h)).collect();
    let f0 = f(x);
    let d1 = (45.0 * (fp[0] - fm[0]) - 9.0 * (fp[1] - fm[1]) + (fp[2] - fm[2])) / (60.0 * h);
    let d2 = (270.0 * (fp[0] + fm[0]) - 27.0 * (fp[1] + fm[1]) + 2.0 * (fp[2] + fm[2]) - 490.0 * f0) / (180.0 * h * h);
    (d1, d2)
}

pub fn asymptotic_constants() -> AsymptoticConstants {
    let rho1 = rho(1.0).re;
    let b0 = beta(1.0);
    let (b1, b2) = central_derivatives(beta, 1.0, DIFF_STEP);
    let mean_slope = b1 / b0;
    let var_slope = b2 / b0 + mean_slope - mean_slope * mean_slope;
    AsymptoticConstants {
        rho1,
        mean_slope,
        var_slope,
    }
}
