//! Exact expansion of the bivariate generating function
//!
//! ```text
//! F(z,u) = G(z,u)^-2,   G = cosh((z/2)√(1-2u)) - sinh((z/2)√(1-2u)) / √(1-2u)
//! ```
//!
//! whose coefficients `a_{n,k} = n! [z^n u^k] F` count lemniscate trees of
//! size `n + 1` with `k` vertices of outdegree two.
//!
//! Working in the variable `s = 1 - 2u`, every exponential-generating
//! coefficient of `G` is a single signed monomial `±2^-j s^⌊j/2⌋`, so `G²`
//! has at most two monomials per coefficient and `F·G² = 1` can be solved by
//! forward substitution on integer polynomials in `s`. Only integer powers of
//! `s` occur, so no square root is ever formed.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("tree size must be at least 1")]
    ZeroSize,
    #[error("table expanded to n = {n_max} but row {needed} is required")]
    TableTooSmall { n_max: usize, needed: usize },
}

/// A polynomial in `u` with exact rational coefficients, low degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPolynomial {
    coeffs: Vec<BigRational>,
}

impl UPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, u: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * u + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
        Self::new(coeffs)
    }
}

/// Exact integer counts `a_{n,k}` for `0 <= n <= n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    rows: Vec<Vec<BigInt>>,
}

impl CoefficientTable {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Row `n`: counts of trees of size `n + 1`, indexed by `k`.
    pub fn row(&self, n: usize) -> &[BigInt] {
        &self.rows[n]
    }

    pub fn get(&self, n: usize, k: usize) -> BigInt {
        self.rows.get(n).and_then(|r| r.get(k)).cloned().unwrap_or_default()
    }

    pub fn row_sum(&self, n: usize) -> BigInt {
        self.rows[n].iter().sum()
    }

    /// Row for trees of `size` vertices.
    pub fn size_row(&self, size: usize) -> Result<&[BigInt], SeriesError> {
        if size == 0 {
            return Err(SeriesError::ZeroSize);
        }
        if size - 1 > self.n_max() {
            return Err(SeriesError::TableTooSmall {
                n_max: self.n_max(),
                needed: size - 1,
            });
        }
        Ok(&self.rows[size - 1])
    }

    /// Writes the `n,k,a_nk` CSV, one line per stored entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,k,a_nk")?;
        for (n, row) in self.rows.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                writeln!(w, "{n},{k},{a}")?;
            }
        }
        Ok(())
    }
}

/// `ĥ_j = 2^j · j! [z^j] G²` as at most two `(exponent of s, coefficient)`
/// terms.
///
/// With `γ_i = (-1)^i s^⌊i/2⌋` the scaled coefficients of `G`, the binomial
/// convolution `Σ_i C(j,i) γ_i γ_{j-i}` collapses: for odd `j` every term has
/// exponent `(j-1)/2`, for even `j` the even and odd `i` each contribute
/// `2^(j-1)`.
pub(crate) fn g_squared_term(j: usize) -> Vec<(usize, BigInt)> {
    if j == 0 {
        return vec![(0, BigInt::one())];
    }
    if j % 2 == 1 {
        vec![((j - 1) / 2, -(BigInt::one() << j))]
    } else {
        let c = BigInt::one() << (j - 1);
        vec![(j / 2, c.clone()), (j / 2 - 1, c)]
    }
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for j in 1..=n {
        c = c * BigInt::from(n - j + 1) / BigInt::from(j);
        row.push(c.clone());
    }
    row
}

/// Solves `F·G² = 1` in the `s` basis: returns `b_n = 2^n · n! [z^n] F` as
/// integer polynomials in `s`.
fn solve_s_basis(n_max: usize) -> Vec<Vec<BigInt>> {
    let hhat: Vec<_> = (0..=n_max).map(g_squared_term).collect();
    let mut b: Vec<Vec<BigInt>> = Vec::with_capacity(n_max + 1);
    b.push(vec![BigInt::one()]);
    for n in 1..=n_max {
        let binom = binomial_row(n);
        let mut out = vec![BigInt::zero(); n / 2 + 1];
        for j in 1..=n {
            let prev = &b[n - j];
            for (e, h) in &hhat[j] {
                let t = -(&binom[j] * h);
                for (m, c) in prev.iter().enumerate() {
                    if !c.is_zero() {
                        out[m + e] += &t * c;
                    }
                }
            }
        }
        b.push(out);
    }
    b
}

/// Expands `F` and returns `a_{n,k}` for `n <= n_max`.
pub fn expand_f(n_max: usize) -> CoefficientTable {
    let b = solve_s_basis(n_max);
    let rows = b
        .into_iter()
        .enumerate()
        .map(|(n, bs)| s_basis_to_u_row(&bs, n))
        .collect();
    CoefficientTable { rows }
}

/// `2^-n · b(1 - 2u)` as exact integer coefficients in `u`.
fn s_basis_to_u_row(bs: &[BigInt], n: usize) -> Vec<BigInt> {
    // Horner in u: acc <- acc·(1 - 2u) + b_m.
    let mut acc: Vec<BigInt> = Vec::with_capacity(bs.len());
    for c in bs.iter().rev() {
        let mut next = vec![BigInt::zero(); acc.len() + 1];
        for (k, a) in acc.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= a << 1;
        }
        next[0] += c;
        acc = next;
    }
    let denom = BigInt::one() << n;
    let mut row: Vec<BigInt> = acc
        .into_iter()
        .map(|a| {
            let (q, r) = a.div_rem(&denom);
            debug_assert!(r.is_zero(), "row {n} is not integral");
            q
        })
        .collect();
    while row.len() > 1 && row.last().is_some_and(|c| c.is_zero()) {
        row.pop();
    }
    row
}

/// Second-order jet `(f(1), f'(1), f''(1)/2)` of a polynomial in `u`.
type Jet = [BigInt; 3];

fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    [
        &a[0] * &b[0],
        &a[0] * &b[1] + &a[1] * &b[0],
        &a[0] * &b[2] + &a[1] * &b[1] + &a[2] * &b[0],
    ]
}

/// `s^e` at `u = 1 + ε`, i.e. `(-1)^e (1 + 2ε)^e` truncated after `ε²`.
fn s_power_jet(e: usize) -> Jet {
    let e_big = BigInt::from(e);
    let j = [
        BigInt::one(),
        &e_big * 2,
        &e_big * BigInt::from(e.saturating_sub(1)) * 2,
    ];
    if e % 2 == 1 {
        j.map(|x| -x)
    } else {
        j
    }
}

/// The same `F·G² = 1` substitution truncated to second order around
/// `u = 1`.
///
/// Row `n` holds `Σ_k a_{n,k}`, `Σ_k k·a_{n,k}` and `Σ_k C(k,2)·a_{n,k}`,
/// which is everything the mean and variance of the outdegree-2 count need.
/// Cost is quadratic in `n_max`, so it reaches sizes where the full table is
/// impractical.
#[derive(Debug, Clone)]
pub struct MomentJets {
    rows: Vec<Jet>,
}

impl MomentJets {
    pub fn expand(n_max: usize) -> Self {
        let hhat: Vec<Jet> = (0..=n_max)
            .map(|j| {
                g_squared_term(j)
                    .into_iter()
                    .fold([BigInt::zero(), BigInt::zero(), BigInt::zero()], |acc, (e, c)| {
                        let sj = s_power_jet(e);
                        [&acc[0] + &c * &sj[0], &acc[1] + &c * &sj[1], &acc[2] + &c * &sj[2]]
                    })
            })
            .collect();
        let mut b: Vec<Jet> = Vec::with_capacity(n_max + 1);
        b.push([BigInt::one(), BigInt::zero(), BigInt::zero()]);
        for n in 1..=n_max {
            let binom = binomial_row(n);
            let mut out = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
            for j in 1..=n {
                let p = jet_mul(&hhat[j], &b[n - j]);
                for (o, x) in out.iter_mut().zip(p.iter()) {
                    *o -= &binom[j] * x;
                }
            }
            b.push(out);
        }
        let rows = b
            .into_iter()
            .enumerate()
            .map(|(n, jet)| {
                let d = BigInt::one() << n;
                jet.map(|x| {
                    let (q, r) = x.div_rem(&d);
                    debug_assert!(r.is_zero());
                    q
                })
            })
            .collect();
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `Σ_k a_{n,k}`, the number of trees of size `n + 1` (coefficients of
    /// `F(z, 1)`).
    pub fn total(&self, n: usize) -> &BigInt {
        &self.rows[n][0]
    }

    pub fn moments(&self, size: usize) -> Result<Moments, SeriesError> {
        if size == 0 {
            return Err(SeriesError::ZeroSize);
        }
        let n = size - 1;
        if n > self.n_max() {
            return Err(SeriesError::TableTooSmall {
                n_max: self.n_max(),
                needed: n,
            });
        }
        let [s0, s1, s2] = &self.rows[n];
        Ok(Moments::from_factorial_sums(s0, s1, &(s2 * 2)))
    }
}

/// Exact mean and variance of the outdegree-2 count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moments {
    pub mean: BigRational,
    pub variance: BigRational,
}

impl Moments {
    /// From `Σ a_k`, `Σ k a_k` and `Σ k(k-1) a_k`: `mean = p'(1)`,
    /// `variance = p''(1) + p'(1) - p'(1)²`.
    fn from_factorial_sums(total: &BigInt, first: &BigInt, second: &BigInt) -> Self {
        let d1 = BigRational::new(first.clone(), total.clone());
        let d2 = BigRational::new(second.clone(), total.clone());
        let variance = &d2 + &d1 - &d1 * &d1;
        Self { mean: d1, variance }
    }

    pub fn mean_f64(&self) -> f64 {
        ratio_to_f64(&self.mean)
    }

    pub fn variance_f64(&self) -> f64 {
        ratio_to_f64(&self.variance)
    }
}

/// Rational to nearest-ish double, safe for numerators and denominators far
/// beyond the `f64` exponent range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits() as i64 - d.bits() as i64;
    // Scale so the quotient carries 64+ significant bits.
    let scaled = if shift < 64 {
        (n << (64 - shift) as usize) / d
    } else {
        n / (d << (shift - 64) as usize)
    };
    let mant = scaled.to_f64().unwrap_or(f64::NAN);
    mant * 2f64.powi((shift - 64) as i32)
}

/// Exact rational in the JSON wire form `{"num", "den", "value"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRational {
    pub num: String,
    pub den: String,
    pub value: f64,
}

impl From<&BigRational> for ExactRational {
    fn from(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            value: ratio_to_f64(r),
        }
    }
}

/// PGF of the outdegree-2 count of a uniform tree of `size` vertices, built
/// from row `size - 1`.
pub fn exact_pgf(table: &CoefficientTable, size: usize) -> Result<UPolynomial, SeriesError> {
    let row = table.size_row(size)?;
    let total: BigInt = row.iter().sum();
    Ok(UPolynomial::new(
        row.iter().map(|a| BigRational::new(a.clone(), total.clone())).collect(),
    ))
}

pub fn exact_moments(table: &CoefficientTable, size: usize) -> Result<Moments, SeriesError> {
    let row = table.size_row(size)?;
    let mut s0 = BigInt::zero();
    let mut s1 = BigInt::zero();
    let mut s2 = BigInt::zero();
    for (k, a) in row.iter().enumerate() {
        s0 += a;
        s1 += a * BigInt::from(k);
        s2 += a * BigInt::from(k * k.saturating_sub(1));
    }
    Ok(Moments::from_factorial_sums(&s0, &s1, &s2))
}

/// Sign-aware check used by tests and the CLI: every entry nonnegative.
pub fn all_nonnegative(table: &CoefficientTable) -> bool {
    table.rows.iter().all(|r| r.iter().all(|a| !a.is_negative()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Direct binomial convolution of the scaled coefficients of `G`.
    fn g_squared_by_convolution(j: usize) -> Vec<BigInt> {
        let binom = binomial_row(j);
        let mut out = vec![BigInt::zero(); j / 2 + 1];
        for i in 0..=j {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            out[i / 2 + (j - i) / 2] += &binom[i] * sign;
        }
        out
    }

    #[test]
    fn g_squared_closed_form_matches_convolution() {
        for j in 0..40 {
            let mut dense = vec![BigInt::zero(); j / 2 + 1];
            for (e, c) in g_squared_term(j) {
                dense[e] += c;
            }
            assert_eq!(dense, g_squared_by_convolution(j), "j = {j}");
        }
    }

    #[test]
    fn small_rows() {
        let t = expand_f(6);
        assert_eq!(t.row(0), &[BigInt::from(1)]);
        assert_eq!(t.row(2), &[BigInt::from(1), BigInt::from(1)]);
        let sums: Vec<BigInt> = (0..=5).map(|n| t.row_sum(n)).collect();
        let expect: Vec<BigInt> = [1, 1, 2, 5, 16, 61].iter().map(|&x| x.into()).collect();
        assert_eq!(sums, expect);
        assert!(all_nonnegative(&t));
    }

    #[test]
    fn row_sums_match_u_equals_one_series() {
        let t = expand_f(30);
        let jets = MomentJets::expand(30);
        for n in 0..=30 {
            assert_eq!(&t.row_sum(n), jets.total(n));
        }
    }

    #[test]
    fn support_is_floor_half() {
        let t = expand_f(20);
        for n in 2..=20 {
            let row = t.row(n);
            assert_eq!(row.len() - 1, n / 2, "n = {n}");
            assert!(!row[n / 2].is_zero());
        }
    }

    #[test]
    fn pgf_examples() {
        let t = expand_f(10);
        assert_eq!(exact_pgf(&t, 1).unwrap().coeffs(), &[q(1, 1)]);
        assert_eq!(exact_pgf(&t, 3).unwrap().coeffs(), &[q(1, 2), q(1, 2)]);
        // LT_4: the chain 1-2-3-4 has no branching, the other four trees branch once.
        assert_eq!(exact_pgf(&t, 4).unwrap().coeffs(), &[q(1, 5), q(4, 5)]);
        for size in 1..=11 {
            let p = exact_pgf(&t, size).unwrap();
            assert_eq!(p.eval(&q(1, 1)), q(1, 1));
        }
        assert_eq!(
            exact_pgf(&t, 12),
            Err(SeriesError::TableTooSmall { n_max: 10, needed: 11 })
        );
        assert_eq!(exact_pgf(&t, 0), Err(SeriesError::ZeroSize));
    }

    #[test]
    fn moment_examples() {
        let t = expand_f(10);
        let m = exact_moments(&t, 3).unwrap();
        assert_eq!(m.mean, q(1, 2));
        assert_eq!(m.variance, q(1, 4));
        let m = exact_moments(&t, 1).unwrap();
        assert_eq!(m.mean, q(0, 1));
        assert_eq!(m.variance, q(0, 1));
    }

    #[test]
    fn pgf_derivatives_give_moments() {
        let t = expand_f(12);
        for size in 1..=13 {
            let p = exact_pgf(&t, size).unwrap();
            let d1 = p.derivative();
            let d2 = d1.derivative();
            let one = q(1, 1);
            let mean = d1.eval(&one);
            let var = d2.eval(&one) + &mean - &mean * &mean;
            let m = exact_moments(&t, size).unwrap();
            assert_eq!(m.mean, mean);
            assert_eq!(m.variance, var);
        }
    }

    #[test]
    fn jets_agree_with_full_table() {
        let t = expand_f(120);
        let jets = MomentJets::expand(120);
        for size in [1, 2, 3, 10, 57, 121] {
            assert_eq!(exact_moments(&t, size).unwrap(), jets.moments(size).unwrap());
        }
    }

    #[test]
    fn ratio_to_f64_handles_huge_parts() {
        let big = BigInt::from(3) << 5000usize;
        let r = BigRational::new(big.clone(), big * 7);
        assert!((ratio_to_f64(&r) - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(ratio_to_f64(&q(-3, 4)), -0.75);
    }

    #[test]
    fn csv_layout() {
        let t = expand_f(2);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,k,a_nk\n0,0,1\n1,0,1\n2,0,1\n2,1,1\n"
        );
    }
}
