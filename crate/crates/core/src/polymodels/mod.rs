//! Random polynomial models and Chebyshev-series utilities.
//!
//! Complex Gaussians have independent real and imaginary parts of variance
//! 1/2, so `E|g|² = 1`. The sphere model projects the unit sphere from its
//! north pole onto the equatorial plane, giving the plane density
//! `1 / (π (1 + |ζ|²)²)`.

mod cheb;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub use cheb::{ChebError, ChebSeries, MONOMIAL_CONVERSION_LIMIT};

use crate::lemgeo::PolynomialRep;

type C = Complex64;

/// Proposal budget per zero for the custom-density sampler.
pub const MAX_REJECTION_DRAWS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("model {0} cannot be sampled this way")]
    WrongKind(ModelKind),
    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    IidUniformDisk,
    IidUniformSphere,
    IidCustomDensity,
    Kac,
    Kostlan,
    Weyl,
    GaussianChebyshev,
    PerturbedChebyshev,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::IidUniformDisk,
        ModelKind::IidUniformSphere,
        ModelKind::IidCustomDensity,
        ModelKind::Kac,
        ModelKind::Kostlan,
        ModelKind::Weyl,
        ModelKind::GaussianChebyshev,
        ModelKind::PerturbedChebyshev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::IidUniformDisk => "iid_uniform_disk",
            ModelKind::IidUniformSphere => "iid_uniform_sphere",
            ModelKind::IidCustomDensity => "iid_custom_density",
            ModelKind::Kac => "kac",
            ModelKind::Kostlan => "kostlan",
            ModelKind::Weyl => "weyl",
            ModelKind::GaussianChebyshev => "gaussian_chebyshev",
            ModelKind::PerturbedChebyshev => "perturbed_chebyshev",
        }
    }

    pub fn is_iid(self) -> bool {
        matches!(
            self,
            ModelKind::IidUniformDisk | ModelKind::IidUniformSphere | ModelKind::IidCustomDensity
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

/// A density on the plane for i.i.d. zeros, with a bound `m` such that
/// `density(ζ) ≤ m / (π (1 + |ζ|²)²)` everywhere.
#[derive(Clone)]
pub struct CustomDensity {
    pub density: Arc<dyn Fn(C) -> f64 + Send + Sync>,
    pub bound: f64,
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity").field("bound", &self.bound).finish()
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub degree: usize,
    /// Real instead of complex Gaussian coefficients for kac, kostlan, weyl.
    pub real_coeffs: bool,
    pub density: Option<CustomDensity>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, degree: usize) -> Result<Self, ModelError> {
        if degree < 2 {
            return Err(ModelError::DegreeTooSmall(degree));
        }
        Ok(Self {
            kind,
            degree,
            real_coeffs: false,
            density: None,
        })
    }

    pub fn with_density(degree: usize, density: CustomDensity) -> Result<Self, ModelError> {
        if !(density.bound > 0.0 && density.bound.is_finite()) {
            return Err(ModelError::InvalidDensity("bound must be positive and finite".into()));
        }
        let mut s = Self::new(ModelKind::IidCustomDensity, degree)?;
        s.density = Some(density);
        Ok(s)
    }

    /// Draws one polynomial in its natural form.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<PolynomialRep, ModelError> {
        match self.kind {
            k if k.is_iid() => sample_zeros(self, rng),
            ModelKind::PerturbedChebyshev => {
                Ok(PolynomialRep::from_cheb(perturbed_chebyshev(self.degree, rng)).expect("degree is at least 2"))
            }
            _ => sample_coeffs(self, rng),
        }
    }
}

fn sphere_density(z: C) -> f64 {
    1.0 / (PI * (1.0 + z.norm_sqr()).powi(2))
}

pub fn uniform_disk_point<R: RngCore + ?Sized>(rng: &mut R) -> C {
    let r = rng.random::<f64>().sqrt();
    C::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

/// Uniform point on the unit sphere, projected from the north pole.
pub fn uniform_sphere_point<R: RngCore + ?Sized>(rng: &mut R) -> C {
    loop {
        let zc: f64 = rng.random_range(-1.0..1.0);
        if zc < 1.0 {
            let rho = (1.0 - zc * zc).sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            return C::from_polar(rho / (1.0 - zc), theta);
        }
    }
}

/// I.i.d. zeros for the `iid_*` kinds.
pub fn sample_zeros<R: RngCore + ?Sized>(model: &ModelSpec, rng: &mut R) -> Result<PolynomialRep, ModelError> {
    let n = model.degree;
    if n < 2 {
        return Err(ModelError::DegreeTooSmall(n));
    }
    let zeros: Vec<C> = match model.kind {
        ModelKind::IidUniformDisk => (0..n).map(|_| uniform_disk_point(rng)).collect(),
        ModelKind::IidUniformSphere => (0..n).map(|_| uniform_sphere_point(rng)).collect(),
        ModelKind::IidCustomDensity => {
            let d = model
                .density
                .as_ref()
                .ok_or_else(|| ModelError::InvalidDensity("no density given".into()))?;
            if !(d.bound > 0.0 && d.bound.is_finite()) {
                return Err(ModelError::InvalidDensity("bound must be positive and finite".into()));
            }
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push(rejection_draw(d, rng)?);
            }
            out
        }
        k => return Err(ModelError::WrongKind(k)),
    };
    Ok(PolynomialRep::from_zeros(zeros).expect("finite zeros"))
}

fn rejection_draw<R: RngCore + ?Sized>(d: &CustomDensity, rng: &mut R) -> Result<C, ModelError> {
    for _ in 0..MAX_REJECTION_DRAWS {
        let z = uniform_sphere_point(rng);
        let f = (d.density)(z);
        let envelope = d.bound * sphere_density(z);
        if !(f >= 0.0 && f.is_finite()) {
            return Err(ModelError::InvalidDensity(format!("density {f} at {z}")));
        }
        if f > envelope * (1.0 + 1e-12) {
            return Err(ModelError::InvalidDensity(format!("density exceeds its bound at {z}")));
        }
        if rng.random::<f64>() * envelope < f {
            return Ok(z);
        }
    }
    Err(ModelError::InvalidDensity("acceptance rate too low".into()))
}

/// Standard complex Gaussian, `E|g|² = 1`.
pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> C {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(s * re, s * im)
}

/// Coefficient scales `σ_k` of the Gaussian ensembles.
pub fn coefficient_scales(kind: ModelKind, n: usize) -> Result<Vec<f64>, ModelError> {
    Ok(match kind {
        ModelKind::Kac => vec![1.0; n + 1],
        ModelKind::Kostlan => {
            let mut b = 1.0f64;
            let mut out = Vec::with_capacity(n + 1);
            for k in 0..=n {
                out.push(b.sqrt());
                b = b * (n - k) as f64 / (k + 1) as f64;
            }
            out
        }
        ModelKind::Weyl => {
            let mut s = 1.0f64;
            let mut out = Vec::with_capacity(n + 1);
            for k in 0..=n {
                if k > 0 {
                    s /= (k as f64).sqrt();
                }
                out.push(s);
            }
            out
        }
        k => return Err(ModelError::WrongKind(k)),
    })
}

/// Gaussian coefficient ensembles. `gaussian_chebyshev` gives real standard
/// Gaussian Chebyshev coefficients; the others give monomial coefficients.
pub fn sample_coeffs<R: RngCore + ?Sized>(model: &ModelSpec, rng: &mut R) -> Result<PolynomialRep, ModelError> {
    let n = model.degree;
    if n < 2 {
        return Err(ModelError::DegreeTooSmall(n));
    }
    if model.kind == ModelKind::GaussianChebyshev {
        let mut b: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(rng)).collect();
        if b[n] == 0.0 {
            b[n] = f64::MIN_POSITIVE;
        }
        return Ok(PolynomialRep::from_cheb(ChebSeries::new(b)).expect("positive degree"));
    }
    let scales = coefficient_scales(model.kind, n)?;
    let coeffs: Vec<C> = scales
        .iter()
        .map(|&s| {
            let g = if model.real_coeffs {
                C::new(StandardNormal.sample(rng), 0.0)
            } else {
                complex_gaussian(rng)
            };
            g * s
        })
        .collect();
    PolynomialRep::from_monomial(coeffs).map_err(|_| ModelError::DegreeTooSmall(n))
}

/// `T_n + (1/n) Σ_{k<n} b_k T_k` with independent fair signs `b_k`.
pub fn perturbed_chebyshev<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> ChebSeries {
    assert!(n >= 2, "degree must be at least 2");
    let eps = 1.0 / n as f64;
    let mut c: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { eps } else { -eps }).collect();
    c.push(1.0);
    ChebSeries::new(c)
}
