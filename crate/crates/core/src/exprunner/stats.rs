//! Summary statistics in fixed order with compensated sums.

use serde::{Deserialize, Serialize};

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Sample mean, unbiased variance and standard error. `None` for an empty
/// sample; the variance is 0 for a single value.
pub fn mean_var_se(xs: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let var = if xs.len() > 1 {
        compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var, (var / n).sqrt()))
}

/// Standard normal CDF through the error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_n(x) - Φ(x)|` for the empirical CDF of `xs`.
pub fn ks_statistic_normal(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Option<Regression> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = compensated_sum(x.iter().copied()) / n;
    let my = compensated_sum(y.iter().copied()) / n;
    let sxx = compensated_sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let syy = compensated_sum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Some(Regression {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// `(value, count)` pairs in increasing value order.
pub fn histogram(values: impl IntoIterator<Item = i64>) -> Vec<(i64, usize)> {
    let mut m = std::collections::BTreeMap::new();
    for v in values {
        *m.entry(v).or_insert(0) += 1;
    }
    m.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_keeps_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn normal_cdf_values() {
        // Reference values of Φ to 10 digits.
        for (x, p) in [
            (0.0, 0.5),
            (1.0, 0.8413447461),
            (-1.96, 0.0249978952),
            (3.0, 0.9986501020),
        ] {
            assert!((normal_cdf(x) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn ks_of_perfect_quantiles_is_small() {
        // Midpoint quantiles give D = 1/(2n).
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                // bisection for Φ^{-1}(p)
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..100 {
                    let m = 0.5 * (lo + hi);
                    if normal_cdf(m) < p {
                        lo = m
                    } else {
                        hi = m
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        assert!((ks_statistic_normal(&xs) - 0.5 / n as f64).abs() < 1e-9);
    }

    #[test]
    fn regression_on_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let r = linear_regression(&x, &y).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-12 && (r.intercept - 1.0).abs() < 1e-12);
        assert_eq!(r.r_squared, 1.0);
        assert!(linear_regression(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn moments_and_histogram() {
        let (m, v, se) = mean_var_se(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m, v), (2.0, 1.0));
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_var_se(&[]).is_none());
        assert_eq!(histogram([2, 1, 2]), vec![(1, 1), (2, 2)]);
    }
}
