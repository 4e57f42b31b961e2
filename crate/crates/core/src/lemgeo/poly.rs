//! Polynomial representations and the conversions between them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::{aberth, ring_guesses};
use super::GeoError;
use crate::polymodels::ChebSeries;

type C = Complex64;

/// A polynomial given by its zeros, its monomial coefficients (low degree
/// first) or its Chebyshev-T coefficients. At least one form is present.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialRep {
    degree: usize,
    /// Leading coefficient paired with `zeros`.
    lead: C,
    zeros: Option<Vec<C>>,
    monomial: Option<Vec<C>>,
    cheb: Option<ChebSeries>,
}

/// JSON form. Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct PolyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zeros: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leading: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    monomial_coeffs: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cheb_coeffs: Option<Vec<f64>>,
}

fn to_pairs(v: &[C]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> Vec<C> {
    v.iter().map(|p| C::new(p[0], p[1])).collect()
}

impl Serialize for PolynomialRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let lead = (self.zeros.is_some() && self.lead != C::new(1.0, 0.0)).then_some([self.lead.re, self.lead.im]);
        PolyJson {
            zeros: self.zeros.as_deref().map(to_pairs),
            leading: lead,
            monomial_coeffs: self.monomial.as_deref().map(to_pairs),
            cheb_coeffs: self.cheb.as_ref().map(|c| c.coeffs().to_vec()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolynomialRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = PolyJson::deserialize(d)?;
        let rep = if let Some(z) = j.zeros {
            let lead = j.leading.map(|p| C::new(p[0], p[1])).unwrap_or(C::new(1.0, 0.0));
            PolynomialRep::from_zeros_with_lead(from_pairs(&z), lead)
        } else if let Some(m) = j.monomial_coeffs {
            PolynomialRep::from_monomial(from_pairs(&m))
        } else if let Some(c) = j.cheb_coeffs {
            if c.iter().any(|x| !x.is_finite()) {
                return Err(D::Error::custom("coefficients must be finite"));
            }
            PolynomialRep::from_cheb(ChebSeries::new(c))
        } else {
            return Err(D::Error::custom("expected one of zeros, monomial_coeffs, cheb_coeffs"));
        };
        rep.map_err(D::Error::custom)
    }
}

impl PolynomialRep {
    pub fn from_zeros(zeros: Vec<C>) -> Result<Self, GeoError> {
        Self::from_zeros_with_lead(zeros, C::new(1.0, 0.0))
    }

    pub fn from_zeros_with_lead(zeros: Vec<C>, lead: C) -> Result<Self, GeoError> {
        if zeros.is_empty() {
            return Err(GeoError::InvalidInput("no zeros given".into()));
        }
        if zeros.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || lead.norm() == 0.0 {
            return Err(GeoError::InvalidInput("zeros must be finite".into()));
        }
        Ok(Self {
            degree: zeros.len(),
            lead,
            zeros: Some(zeros),
            monomial: None,
            cheb: None,
        })
    }

    pub fn from_monomial(mut coeffs: Vec<C>) -> Result<Self, GeoError> {
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GeoError::InvalidInput("coefficients must be finite".into()));
        }
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(GeoError::InvalidInput("degree must be positive".into()));
        }
        Ok(Self {
            degree: coeffs.len() - 1,
            lead: C::new(1.0, 0.0),
            zeros: None,
            monomial: Some(coeffs),
            cheb: None,
        })
    }

    pub fn from_cheb(s: ChebSeries) -> Result<Self, GeoError> {
        if s.degree() == 0 {
            return Err(GeoError::InvalidInput("degree must be positive".into()));
        }
        Ok(Self {
            degree: s.degree(),
            lead: C::new(1.0, 0.0),
            zeros: None,
            monomial: None,
            cheb: Some(s),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn zeros(&self) -> Option<&[C]> {
        self.zeros.as_deref()
    }

    pub fn monomial_coeffs(&self) -> Option<&[C]> {
        self.monomial.as_deref()
    }

    pub fn cheb(&self) -> Option<&ChebSeries> {
        self.cheb.as_ref()
    }

    /// Evaluates `p(z)` from whichever form is present.
    pub fn eval(&self, z: C) -> C {
        if let Some(m) = &self.monomial {
            horner(m, z)
        } else if let Some(c) = &self.cheb {
            c.eval_complex(z)
        } else {
            let zeros = self.zeros.as_ref().expect("one form is present");
            zeros.iter().fold(self.lead, |acc, r| acc * (z - r))
        }
    }

    /// Monomial coefficients, converting if needed.
    pub fn to_monomial(&self) -> Result<Vec<C>, GeoError> {
        if let Some(m) = &self.monomial {
            return Ok(m.clone());
        }
        if let Some(z) = &self.zeros {
            return Ok(expand_zeros(z, self.lead));
        }
        let c = self.cheb.as_ref().expect("one form is present");
        let m = c.to_monomial().map_err(|e| GeoError::InvalidInput(e.to_string()))?;
        Ok(m.into_iter().map(|x| C::new(x, 0.0)).collect())
    }

    /// Zero form, computing the zeros if only coefficients are known.
    pub fn to_zero_form(&self) -> Result<ZeroForm, GeoError> {
        if let Some(z) = &self.zeros {
            return Ok(ZeroForm {
                lead: self.lead,
                zeros: z.clone(),
            });
        }
        let n = self.degree;
        let (lead, zeros) = if let Some(m) = &self.monomial {
            let lead = m[n];
            let guesses = monomial_ring(m);
            let (zeros, ok) = aberth(guesses, |z| {
                let (p, dp) = horner_with_derivative(m, z);
                p / dp
            });
            if !ok {
                return Err(GeoError::NonConvergence {
                    what: "zeros of p",
                    residual: f64::NAN,
                });
            }
            (lead, zeros)
        } else {
            let c = self.cheb.as_ref().expect("one form is present");
            let lead = C::new(c.coeffs()[n] * 2f64.powi(n as i32 - 1), 0.0);
            let d = c.derivative();
            let guesses = ring_guesses(n, C::new(0.0, 0.0), 1.0);
            let (zeros, ok) = aberth(guesses, |z| c.eval_complex(z) / d.eval_complex(z));
            if !ok {
                return Err(GeoError::NonConvergence {
                    what: "zeros of p",
                    residual: f64::NAN,
                });
            }
            (lead, zeros)
        };
        Ok(ZeroForm { lead, zeros })
    }

    /// The same polynomial with its zero form attached.
    pub fn with_zeros(&self) -> Result<Self, GeoError> {
        let zf = self.to_zero_form()?;
        let mut out = self.clone();
        out.lead = zf.lead;
        out.zeros = Some(zf.zeros);
        Ok(out)
    }
}

/// `lead · Π (z - ζ)` as monomial coefficients.
pub fn expand_zeros(zeros: &[C], lead: C) -> Vec<C> {
    let mut c = vec![lead];
    for &r in zeros {
        c.push(C::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            let prev = c[k - 1];
            c[k] = prev - r * c[k];
        }
        c[0] = -r * c[0];
    }
    c
}

pub(crate) fn horner(c: &[C], z: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, &a| acc * z + a)
}

pub(crate) fn horner_with_derivative(c: &[C], z: C) -> (C, C) {
    let mut p = C::new(0.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

pub(crate) fn monomial_derivative(c: &[C]) -> Vec<C> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Ring of initial guesses around the root centroid with radius the
/// geometric mean of the root moduli about it.
pub(crate) fn monomial_ring(m: &[C]) -> Vec<C> {
    let n = m.len() - 1;
    let centre = -m[n - 1] / (m[n] * n as f64);
    // Fujiwara-type bound on |root| for scale, geometric mean for the ring.
    let lead = m[n].norm();
    let bound = (0..n)
        .map(|k| (m[k].norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        * 2.0;
    let geo = (m[0].norm() / lead).powf(1.0 / n as f64);
    let radius = if geo > 0.0 && geo.is_finite() {
        geo.min(bound)
    } else {
        0.5 * bound
    };
    ring_guesses(n, centre, radius.max(1e-12))
}

/// `p = lead · Π (z - ζ_j)` evaluated through logarithms so that high
/// degrees never overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroForm {
    pub lead: C,
    pub zeros: Vec<C>,
}

impl ZeroForm {
    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// `log |p(z)|`.
    pub fn log_abs(&self, z: C) -> f64 {
        self.log_abs_and_log_deriv(z).0
    }

    /// `log |p(z)|` and `L(z) = p'(z)/p(z)` in one pass.
    pub fn log_abs_and_log_deriv(&self, z: C) -> (f64, C) {
        let mut acc = self.lead.norm().ln();
        let mut prod = 1.0f64;
        let mut l = C::new(0.0, 0.0);
        for (i, r) in self.zeros.iter().enumerate() {
            let d = z - r;
            let n2 = d.norm_sqr();
            prod *= n2;
            l += d.conj() / n2;
            if i % 16 == 15 {
                acc += 0.5 * prod.ln();
                prod = 1.0;
            }
        }
        (acc + 0.5 * prod.ln(), l)
    }

    /// `L(z)` and `L'(z)`.
    pub fn log_deriv2(&self, z: C) -> (C, C) {
        let mut l = C::new(0.0, 0.0);
        let mut dl = C::new(0.0, 0.0);
        for r in &self.zeros {
            let inv = (z - r).inv();
            l += inv;
            dl -= inv * inv;
        }
        (l, dl)
    }

    /// Change of `arg p` along the segment `a → b`, principal valued.
    pub fn arg_increment(&self, a: C, b: C) -> f64 {
        let mut s = 0.0;
        for r in &self.zeros {
            s += ((b - r) / (a - r)).arg();
        }
        s
    }
}
