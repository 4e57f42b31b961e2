//! Critical points by simultaneous iteration, and the genericity test.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{expand_zeros, horner_with_derivative, monomial_derivative, PolynomialRep, ZeroForm};
use super::GeoError;

type C = Complex64;

/// Iteration budget for the simultaneous root finder.
pub const ABERTH_MAX_ITER: usize = 500;
/// Relative critical-value gap below which a polynomial counts as
/// non-generic.
pub const TAU_GAP: f64 = 1e-9;
/// Critical-point separation threshold, relative to the largest pairwise
/// zero distance.
pub const TAU_SEP: f64 = 1e-8;
/// Residual bound on `|p'(w)|` relative to the coefficient scale of `p'`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// `n` points on a slightly irregular circle.
pub(crate) fn ring_guesses(n: usize, centre: C, radius: f64) -> Vec<C> {
    (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64 + 0.4;
            let r = radius * (1.0 + 0.05 * (1.7 * k as f64 + 0.3).sin());
            centre + C::from_polar(r, theta)
        })
        .collect()
}

/// Aberth–Ehrlich iteration. `newton(z)` returns the Newton correction
/// `f(z)/f'(z)`. Returns the approximations and whether every one converged.
pub(crate) fn aberth(mut z: Vec<C>, newton: impl Fn(C) -> C) -> (Vec<C>, bool) {
    let n = z.len();
    if n == 0 {
        return (z, true);
    }
    let scale = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let mut done = vec![false; n];
    let mut prev = vec![f64::INFINITY; n];
    for iter in 0..ABERTH_MAX_ITER {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let mut nw = newton(z[i]);
            if !nw.re.is_finite() || !nw.im.is_finite() {
                // Landed on a pole of the correction; nudge off it.
                let bump = C::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                z[i] += bump;
                all = false;
                continue;
            }
            let mut s = C::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let denom = C::new(1.0, 0.0) - nw * s;
            if denom.norm() > 0.0 && denom.re.is_finite() {
                nw /= denom;
            }
            z[i] -= nw;
            let size = z[i].norm().max(1e-3 * scale);
            let step = nw.norm();
            // Converged, or stalled at the evaluation noise floor.
            if step <= 4.0 * f64::EPSILON * size
                || (step <= 1e-7 * size && step >= prev[i])
                || (iter > 50 && step == 0.0)
            {
                done[i] = true;
            } else {
                all = false;
            }
            prev[i] = step;
        }
        if all {
            return (z, true);
        }
    }
    (z, false)
}

/// Critical points of `p` with their critical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub points: Vec<C>,
    /// `log |p(w_i)|`.
    pub log_values: Vec<f64>,
    /// `|p(w_i)|`; may underflow or overflow at high degree, use
    /// `log_values` for comparisons.
    pub values: Vec<f64>,
    /// Indices of `points` sorted by decreasing critical value.
    pub order: Vec<usize>,
    /// `ranks[i]` is the 1-based rank of `points[i]` in `order`.
    pub ranks: Vec<usize>,
    /// `|p'(w_i)|` divided by the larger of the largest coefficient modulus
    /// of `p'` and `Σ |c_k| |w_i|^k` over those coefficients.
    pub residuals: Vec<f64>,
    /// Whether the simultaneous iteration met its stopping rule.
    pub converged: bool,
}

impl CriticalData {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }

    fn assemble(points: Vec<C>, log_values: Vec<f64>, residuals: Vec<f64>, converged: bool) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| log_values[j].total_cmp(&log_values[i]).then(i.cmp(&j)));
        let mut ranks = vec![0; points.len()];
        for (r, &i) in order.iter().enumerate() {
            ranks[i] = r + 1;
        }
        Self {
            values: log_values.iter().map(|v| v.exp()).collect(),
            points,
            log_values,
            order,
            ranks,
            residuals,
            converged,
        }
    }
}

/// All `deg - 1` zeros of `p'`.
///
/// Works on the zero form when it is present (Newton ratio
/// `p'/p'' = L/(L' + L²)` with `L = p'/p`), otherwise on the coefficients.
/// Fails when the iteration stalls with residuals far above tolerance.
pub fn critical_points(p: &PolynomialRep) -> Result<CriticalData, GeoError> {
    let n = p.degree();
    if n < 2 {
        return Err(GeoError::DegreeTooSmall(n));
    }
    let (points, converged) = if let Some(zeros) = p.zeros() {
        let zf = ZeroForm {
            lead: C::new(1.0, 0.0),
            zeros: zeros.to_vec(),
        };
        let centre = zeros.iter().sum::<C>() / n as f64;
        let radius = zeros.iter().map(|z| (z - centre).norm()).fold(0.0, f64::max);
        let guesses = ring_guesses(n - 1, centre, 0.8 * radius.max(1e-300));
        let newton = |w: C| {
            let (l, dl) = zf.log_deriv2(w);
            l / (dl + l * l)
        };
        let (mut pts, ok) = aberth(guesses, newton);
        polish(&mut pts, newton);
        (pts, ok)
    } else if let Some(c) = p.cheb() {
        let d1 = c.derivative();
        let d2 = d1.derivative();
        let guesses = ring_guesses(n - 1, C::new(0.0, 0.0), 0.8);
        let newton = |w: C| d1.eval_complex(w) / d2.eval_complex(w);
        let (mut pts, ok) = aberth(guesses, newton);
        polish(&mut pts, newton);
        (pts, ok)
    } else {
        let m = p.to_monomial()?;
        let dm = monomial_derivative(&m);
        let guesses = super::poly::monomial_ring(&dm);
        let newton = |w: C| {
            let (f, df) = horner_with_derivative(&dm, w);
            f / df
        };
        let (mut pts, ok) = aberth(guesses, newton);
        polish(&mut pts, newton);
        (pts, ok)
    };

    let (log_values, residuals) = critical_values_and_residuals(p, &points)?;
    let data = CriticalData::assemble(points, log_values, residuals, converged);
    let worst = data.max_residual();
    if !(worst <= 1e-6) {
        return Err(GeoError::NonConvergence {
            what: "critical points",
            residual: worst,
        });
    }
    Ok(data)
}

fn polish(pts: &mut [C], newton: impl Fn(C) -> C) {
    for z in pts.iter_mut() {
        for _ in 0..2 {
            let step = newton(*z);
            if step.re.is_finite() && step.im.is_finite() {
                *z -= step;
            }
        }
    }
}

fn critical_values_and_residuals(p: &PolynomialRep, pts: &[C]) -> Result<(Vec<f64>, Vec<f64>), GeoError> {
    let mut lv = Vec::with_capacity(pts.len());
    let mut res = Vec::with_capacity(pts.len());
    if let Some(zeros) = p.zeros() {
        let zf = p.to_zero_form()?;
        let dm = monomial_derivative(&expand_zeros(zeros, zf.lead));
        let cmax = dm.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for &w in pts {
            let scale = cmax.max(abs_horner(&dm, w.norm()));
            let (lg, l) = zf.log_abs_and_log_deriv(w);
            lv.push(lg);
            // |p'(w)| = |p(w)|·|L(w)|, falling back to Horner on a zero of p.
            let r = (lg + l.norm().ln() - scale.ln()).exp();
            res.push(if r.is_finite() {
                r
            } else {
                horner_with_derivative(&dm, w).0.norm() / scale
            });
        }
    } else if let Some(m) = p.monomial_coeffs() {
        let dm = monomial_derivative(m);
        let cmax = dm.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for &w in pts {
            let scale = cmax.max(abs_horner(&dm, w.norm()));
            lv.push(p.eval(w).norm().ln());
            res.push(horner_with_derivative(&dm, w).0.norm() / scale);
        }
    } else {
        let c = p.cheb().expect("one form is present");
        let d = c.derivative();
        let cmax = d.max_abs_coeff();
        for &w in pts {
            let scale = cmax.max(d.abs_scale(w));
            lv.push(c.eval_complex(w).norm().ln());
            res.push(d.eval_complex(w).norm() / scale);
        }
    }
    Ok((lv, res))
}

fn abs_horner(c: &[C], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Genericity margins of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    /// Smallest `|v_i - v_j| / max(v_i, v_j)` over distinct critical values.
    pub min_relative_value_gap: f64,
    /// Smallest distance between two critical points, divided by the largest
    /// distance between two zeros.
    pub min_critical_separation: f64,
    /// Some critical point coincides with a zero of `p`.
    pub zero_on_critical_level: bool,
    pub generic: bool,
}

/// Checks distinct critical values, distinct critical points and critical
/// points away from the zeros.
///
/// The value gap is measured between neighbouring values relative to the
/// larger of the two, so widely spread critical values are compared on a
/// logarithmic scale.
pub fn genericity_check(p: &PolynomialRep, crit: &CriticalData) -> Result<GenericityReport, GeoError> {
    let zf = p.to_zero_form()?;
    let zeros = &zf.zeros;
    let mut diam = 0.0f64;
    for i in 0..zeros.len() {
        for j in i + 1..zeros.len() {
            diam = diam.max((zeros[i] - zeros[j]).norm());
        }
    }
    let diam = if diam > 0.0 { diam } else { 1.0 };

    let mut gap = f64::INFINITY;
    for pair in crit.order.windows(2) {
        let hi = crit.log_values[pair[0]];
        let lo = crit.log_values[pair[1]];
        let g = -(lo - hi).exp_m1();
        gap = gap.min(if g.is_nan() { 0.0 } else { g });
    }

    let pts = &crit.points;
    let mut sep = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            sep = sep.min((pts[i] - pts[j]).norm() / diam);
        }
    }

    let mut on_zero = false;
    for (i, &w) in pts.iter().enumerate() {
        let near = zeros.iter().map(|z| (w - z).norm()).fold(f64::INFINITY, f64::min);
        if near <= TAU_SEP * diam || crit.log_values[i] == f64::NEG_INFINITY {
            on_zero = true;
        }
    }

    Ok(GenericityReport {
        min_relative_value_gap: gap,
        min_critical_separation: sep,
        zero_on_critical_level: on_zero,
        generic: gap > TAU_GAP && sep > TAU_SEP && !on_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodels::ChebSeries;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn sorted_re(v: &[C]) -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    #[test]
    fn small_examples_in_every_form() {
        let forms = [
            PolynomialRep::from_zeros(vec![real(1.0), real(-1.0)]).unwrap(),
            PolynomialRep::from_monomial(vec![real(-1.0), real(0.0), real(1.0)]).unwrap(),
            PolynomialRep::from_cheb(ChebSeries::new(vec![-0.5, 0.0, 0.5])).unwrap(),
        ];
        for p in &forms {
            let c = critical_points(p).unwrap();
            assert_eq!(c.points.len(), 1);
            assert!(c.points[0].norm() < 1e-14);
            assert!((c.values[0] - 1.0).abs() < 1e-14);
        }
        let cubic = PolynomialRep::from_monomial(vec![real(0.0), real(-3.0), real(0.0), real(1.0)]).unwrap();
        let c = critical_points(&cubic).unwrap();
        let r = sorted_re(&c.points);
        assert!((r[0] + 1.0).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_degree_ten_residuals_and_centroid() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let zeros: Vec<C> = (0..10)
                .map(|_| C::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI)))
                .collect();
            let p = PolynomialRep::from_zeros(zeros.clone()).unwrap();
            let c = critical_points(&p).unwrap();
            assert_eq!(c.points.len(), 9);
            assert!(c.max_residual() <= RESIDUAL_TOL, "{}", c.max_residual());
            // p' = 10 z^9 - 9 (Σζ) z^8 + ... so Σ w = (9/10) Σ ζ.
            let sw: C = c.points.iter().sum();
            let sz: C = zeros.iter().sum();
            assert!((sw - sz * 0.9).norm() < 1e-8);
        }
    }

    #[test]
    fn forms_give_the_same_critical_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let zeros: Vec<C> = (0..15)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = PolynomialRep::from_zeros(zeros.clone()).unwrap();
        let b = PolynomialRep::from_monomial(a.to_monomial().unwrap()).unwrap();
        let ca = critical_points(&a).unwrap();
        let cb = critical_points(&b).unwrap();
        for w in &ca.points {
            let d = cb.points.iter().map(|v| (v - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8);
        }
        assert!(cb.max_residual() <= RESIDUAL_TOL);
    }

    #[test]
    fn genericity_examples() {
        let p = PolynomialRep::from_zeros(vec![real(1.0), real(-1.0)]).unwrap();
        let c = critical_points(&p).unwrap();
        assert!(genericity_check(&p, &c).unwrap().generic);

        let roots: Vec<C> = (0..8).map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / 8.0)).collect();
        let p = PolynomialRep::from_zeros(roots).unwrap();
        let c = critical_points(&p).unwrap();
        assert!(!genericity_check(&p, &c).unwrap().generic);

        // z³ - 3z: |p(±1)| = 2 tie.
        let p = PolynomialRep::from_monomial(vec![real(0.0), real(-3.0), real(0.0), real(1.0)]).unwrap();
        let c = critical_points(&p).unwrap();
        let g = genericity_check(&p, &c).unwrap();
        assert!(!g.generic && g.min_relative_value_gap < TAU_GAP);

        // A repeated zero is a critical point on level zero.
        let p = PolynomialRep::from_zeros(vec![real(0.0), real(0.0), real(2.0)]).unwrap();
        let c = critical_points(&p).unwrap();
        assert!(genericity_check(&p, &c).unwrap().zero_on_critical_level);
    }

    #[test]
    fn gaussian_chebyshev_degree_twenty_is_not_generic() {
        // Real coefficients give conjugate critical pairs with equal values,
        // so any non-real critical point forces a value-gap failure.
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let m = crate::polymodels::ModelSpec::new(crate::polymodels::ModelKind::GaussianChebyshev, 20).unwrap();
        let mut nongeneric = 0;
        for _ in 0..200 {
            let p = crate::polymodels::sample_coeffs(&m, &mut rng)
                .unwrap()
                .with_zeros()
                .unwrap();
            let c = critical_points(&p).unwrap();
            let g = genericity_check(&p, &c).unwrap();
            if c.points.iter().any(|w| w.im.abs() > 1e-6) {
                assert!(!g.generic && g.min_relative_value_gap < TAU_GAP);
            }
            if !g.generic {
                nongeneric += 1;
            }
        }
        assert!(nongeneric >= 160, "{nongeneric}");
    }
}
