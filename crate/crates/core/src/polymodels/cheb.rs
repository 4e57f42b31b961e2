//! Chebyshev series (first kind): Clenshaw evaluation, differentiation and
//! real-root isolation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest degree allowed for conversion to monomial coefficients; the
/// change of basis is ill-conditioned beyond this.
pub const MONOMIAL_CONVERSION_LIMIT: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebError {
    #[error("found {found} real roots, expected {expected}")]
    RootCountMismatch { found: usize, expected: usize },
    #[error("interval [{lo}, {hi}] is not inside [-1.05, 1.05]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("degree {0} is too large for monomial conversion")]
    ConversionTooLarge(usize),
}

/// `Σ b_k T_k(x)`, coefficients low degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChebJson", into = "ChebJson")]
pub struct ChebSeries {
    coeffs: Vec<f64>,
}

/// Wire form `{"basis": "chebyshev-T", "coeffs": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChebJson {
    basis: String,
    coeffs: Vec<f64>,
}

impl TryFrom<ChebJson> for ChebSeries {
    type Error = String;
    fn try_from(j: ChebJson) -> Result<Self, String> {
        if j.basis != "chebyshev-T" {
            return Err(format!("unsupported basis {:?}", j.basis));
        }
        if j.coeffs.iter().any(|c| !c.is_finite()) {
            return Err("coefficients must be finite".into());
        }
        Ok(ChebSeries::new(j.coeffs))
    }
}

impl From<ChebSeries> for ChebJson {
    fn from(s: ChebSeries) -> Self {
        ChebJson {
            basis: "chebyshev-T".into(),
            coeffs: s.coeffs,
        }
    }
}

impl ChebSeries {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// The single basis polynomial `T_n`.
    pub fn basis(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Clenshaw backward recurrence. Outside `[-1, 1]` this is the analytic
    /// continuation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = 2.0 * z * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        z * b1 - b2 + self.coeffs[0]
    }

    /// `Σ |b_k| |T_k(z)|`, the natural scale for residuals at `z`.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let mut t0 = Complex64::new(1.0, 0.0);
        let mut t1 = z;
        let mut acc = self.coeffs[0].abs();
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            if k > 1 {
                let t2 = 2.0 * z * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            acc += c.abs() * t1.norm();
        }
        acc
    }

    /// Coefficients of the derivative, via
    /// `b'_{k-1} = b'_{k+1} + 2k·b_k` and a final halving of `b'_0`.
    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::new(vec![0.0]);
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..=n).rev() {
            d[k - 1] = d.get(k + 1).copied().unwrap_or(0.0) + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n);
        Self::new(d)
    }

    /// Monomial coefficients, low degree first.
    pub fn to_monomial(&self) -> Result<Vec<f64>, ChebError> {
        let n = self.degree();
        if n > MONOMIAL_CONVERSION_LIMIT {
            return Err(ChebError::ConversionTooLarge(n));
        }
        let mut out = vec![0.0; n + 1];
        let mut t_prev = vec![1.0];
        let mut t_cur = vec![0.0, 1.0];
        out[0] += self.coeffs[0];
        if n >= 1 {
            out[1] += self.coeffs[1];
        }
        for k in 2..=n {
            let mut t_next = vec![0.0; k + 1];
            for (i, &c) in t_cur.iter().enumerate() {
                t_next[i + 1] += 2.0 * c;
            }
            for (i, &c) in t_prev.iter().enumerate() {
                t_next[i] -= c;
            }
            for (i, &c) in t_next.iter().enumerate() {
                out[i] += self.coeffs[k] * c;
            }
            t_prev = std::mem::replace(&mut t_cur, t_next);
        }
        Ok(out)
    }

    /// All simple real roots in `[lo, hi]`, increasing.
    ///
    /// Sign changes are isolated on `8·degree` Chebyshev points of
    /// `[-1, 1]` (plus geometrically spaced points beyond `±1`), then each bracket is narrowed by bisection and finished with
    /// guarded Newton steps. With `expected = Some(m)`, finding fewer than `m`
    /// roots is an error.
    pub fn real_roots(&self, lo: f64, hi: f64, expected: Option<usize>) -> Result<Vec<f64>, ChebError> {
        if !(lo >= -1.05 - 1e-12 && hi <= 1.05 + 1e-12 && lo < hi) {
            return Err(ChebError::BadInterval { lo, hi });
        }
        let n = self.degree();
        let mut roots = Vec::new();
        if n > 0 {
            let deriv = self.derivative();
            let m = (8 * n).max(16);
            let grid = sample_grid(lo, hi, m);
            let m = grid.len() - 1;
            let vals: Vec<f64> = grid.iter().map(|&x| self.eval(x)).collect();
            for i in 0..m {
                let (a, b) = (grid[i], grid[i + 1]);
                let (fa, fb) = (vals[i], vals[i + 1]);
                if fa == 0.0 {
                    roots.push(a);
                    continue;
                }
                if fa.signum() != fb.signum() && fb != 0.0 {
                    roots.push(self.refine(&deriv, a, b, fa));
                }
            }
            if vals[m] == 0.0 {
                roots.push(grid[m]);
            }
        }
        if let Some(expected) = expected {
            if roots.len() < expected {
                return Err(ChebError::RootCountMismatch {
                    found: roots.len(),
                    expected,
                });
            }
        }
        Ok(roots)
    }

    fn refine(&self, deriv: &ChebSeries, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            let fc = self.eval(c);
            if fc == 0.0 {
                return c;
            }
            if fc.signum() == fa.signum() {
                a = c;
                fa = fc;
            } else {
                b = c;
            }
            if b - a <= 1e-9 * a.abs().max(b.abs()).max(1e-3) {
                break;
            }
        }
        // Newton from the better end, kept inside the bracket.
        let mut x = 0.5 * (a + b);
        for _ in 0..6 {
            let fx = self.eval(x);
            let dx = deriv.eval(x);
            if fx == 0.0 || dx == 0.0 {
                break;
            }
            let next = x - fx / dx;
            if !(next >= a && next <= b) {
                break;
            }
            x = next;
        }
        x
    }
}

/// Increasing grid on `[lo, hi]`: the Chebyshev points of `[-1, 1]`, whose
/// spacing near `±1` matches the root spacing of near-Chebyshev
/// polynomials, continued outward from `±1` with ratio 1.2.
fn sample_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let first = 0.5 * (std::f64::consts::PI / m as f64).powi(2);
    let mut g: Vec<f64> = (0..=m)
        .map(|j| -(std::f64::consts::PI * j as f64 / m as f64).cos())
        .collect();
    let mut h = first;
    while h < 0.1 {
        g.push(1.0 + h);
        g.push(-1.0 - h);
        h *= 1.2;
    }
    g.push(lo);
    g.push(hi);
    g.retain(|&x| x >= lo && x <= hi);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_series(rng: &mut ChaCha8Rng, n: usize) -> ChebSeries {
        ChebSeries::new((0..=n).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ChebSeries::basis(0).eval(0.37), 1.0);
        assert!((ChebSeries::basis(3).eval(0.5) - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn clenshaw_matches_trigonometric_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_series(&mut rng, 25);
        for _ in 0..100 {
            let x: f64 = rng.random_range(-1.0..1.0);
            let naive: f64 = s
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, b)| b * (k as f64 * x.acos()).cos())
                .sum();
            let clen = s.eval(x);
            assert!((naive - clen).abs() <= 1e-12 * naive.abs().max(1.0));
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(ChebSeries::basis(1).derivative().coeffs(), &[1.0]);
        assert_eq!(ChebSeries::basis(2).derivative().coeffs(), &[0.0, 4.0]);
        assert_eq!(ChebSeries::basis(0).derivative().coeffs(), &[0.0]);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_series(&mut rng, 12);
        let d = s.derivative();
        let h = 1e-5;
        for j in 0..50 {
            let x = -0.98 + 1.96 * j as f64 / 49.0;
            let fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
            assert!((fd - d.eval(x)).abs() < 1e-6 * d.eval(x).abs().max(1.0));
        }
    }

    #[test]
    fn chebyshev_roots_of_t4() {
        let roots = ChebSeries::basis(4).real_roots(-1.0, 1.0, Some(4)).unwrap();
        assert_eq!(roots.len(), 4);
        for (j, r) in roots.iter().enumerate() {
            // increasing order: cos((2(4-j)-1)π/8)
            let exact = ((2.0 * (4 - j) as f64 - 1.0) * PI / 8.0).cos();
            assert!((r - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn no_sign_change_gives_no_roots() {
        let s = ChebSeries::new(vec![2.0, 0.5]);
        assert!(s.real_roots(-1.0, 1.0, None).unwrap().is_empty());
        assert_eq!(
            s.real_roots(-1.0, 1.0, Some(1)),
            Err(ChebError::RootCountMismatch { found: 0, expected: 1 })
        );
        assert!(s.real_roots(-2.0, 1.0, None).is_err());
    }

    #[test]
    fn root_residuals_are_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let s = random_series(&mut rng, 40);
            for r in s.real_roots(-1.0, 1.0, None).unwrap() {
                assert!(s.eval(r).abs() <= 1e-10 * s.max_abs_coeff());
            }
        }
    }

    #[test]
    fn monomial_conversion_agrees() {
        // Through degree 20 the stored monomial coefficients carry enough
        // digits for 1e-8 relative agreement. Beyond that the coefficients
        // themselves grow like 2.4^n, so rounding them to doubles costs about
        // eps·Σ|m_j||x|^j; compare against that scale instead.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [0, 1, 2, 7, 20, 25, 30] {
            let s = random_series(&mut rng, n);
            let m = s.to_monomial().unwrap();
            for _ in 0..16 {
                let x: f64 = rng.random_range(-1.0..1.0);
                let v: f64 = m.iter().rev().fold(0.0, |acc, c| acc * x + c);
                let abs: f64 = m.iter().rev().fold(0.0, |acc, c| acc * x.abs() + c.abs());
                let scale = if n <= 20 { s.eval(x).abs().max(1.0) } else { abs };
                assert!((v - s.eval(x)).abs() <= 1e-8 * scale, "n = {n}");
            }
        }
        assert!(random_series(&mut rng, 31).to_monomial().is_err());
    }

    #[test]
    fn json_wire_form() {
        let s = ChebSeries::new(vec![0.5, -1.0, 2.0]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"basis":"chebyshev-T","coeffs":[0.5,-1.0,2.0]}"#);
        assert_eq!(serde_json::from_str::<ChebSeries>(&j).unwrap(), s);
        assert!(serde_json::from_str::<ChebSeries>(r#"{"basis":"monomial","coeffs":[1]}"#).is_err());
    }
}
