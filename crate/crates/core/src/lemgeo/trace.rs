//! Tracing the figure-eight level curve through a critical point, and the
//! tree built from the nesting of its petals.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{PolynomialRep, ZeroForm};
use super::roots::{critical_points, genericity_check, CriticalData, GenericityReport};
use super::GeoError;
use crate::treecore::LemnTree;

type C = Complex64;

/// Point budget per petal.
pub const MAX_PETAL_POINTS: usize = 1_000_000;
/// Largest accepted turn of the tangent over one step, in radians.
pub const MAX_CHORD_ANGLE: f64 = 0.2;
/// Initial step relative to the distance from the saddle to the nearest
/// zero.
pub const INITIAL_STEP: f64 = 1e-3;
/// Capture radius in initial steps.
pub const CAPTURE_STEPS: f64 = 3.0;

/// One loop of a singular level curve, as a closed polyline that starts and
/// ends at its critical point. Traversed counterclockwise, so `{|p| < t}` is
/// on the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetalCurve {
    pub vertices: Vec<C>,
    pub level: f64,
    pub log_level: f64,
    /// Indices into the zero list of the polynomial, increasing.
    pub enclosed_zeros: Vec<usize>,
    pub winding_count: i64,
    /// The argument-principle sum before rounding.
    pub winding_integral: f64,
}

/// The singular component through one critical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularComponent {
    pub critical_point: C,
    /// 1 for the largest critical value.
    pub rank: usize,
    pub petals: [PetalCurve; 2],
}

impl SingularComponent {
    /// Zero count of the petal with fewer zeros.
    pub fn smaller_petal_zeros(&self) -> usize {
        self.petals[0]
            .enclosed_zeros
            .len()
            .min(self.petals[1].enclosed_zeros.len())
    }
}

struct Tracer<'a> {
    zf: &'a ZeroForm,
    log_t: f64,
}

fn tangent(l: C) -> C {
    C::new(0.0, 1.0) * l.conj() / l.norm()
}

impl Tracer<'_> {
    /// Newton along the gradient line of `log|p| - log t`.
    fn correct(&self, mut z: C) -> Option<(C, C)> {
        for _ in 0..10 {
            let (lg, l) = self.zf.log_abs_and_log_deriv(z);
            let f = lg - self.log_t;
            if !f.is_finite() || l.norm() == 0.0 || !l.re.is_finite() {
                return None;
            }
            if f.abs() <= 1e-11 {
                return Some((z, l));
            }
            z -= C::new(f, 0.0) / l;
        }
        let (lg, l) = self.zf.log_abs_and_log_deriv(z);
        ((lg - self.log_t).abs() <= 1e-9).then_some((z, l))
    }

    fn petal(&self, w: C, phi_out: f64, phi_in: f64, d: f64) -> Result<Vec<C>, GeoError> {
        let h0 = INITIAL_STEP * d;
        let rc = CAPTURE_STEPS * h0;
        let hmin = 1e-13 * d.max(w.norm());
        let start = w + C::from_polar(rc, phi_out);
        let (mut z, mut l) = self
            .correct(start)
            .filter(|(z, _)| (z - start).norm() <= 0.5 * rc)
            .ok_or_else(|| GeoError::TracingFailure("no level point near the saddle".into()))?;
        let mut t = tangent(l);
        let mut verts = vec![w, z];
        let mut h = h0;
        let mut left_capture = false;
        let dir_in = C::from_polar(1.0, phi_in);
        while verts.len() < MAX_PETAL_POINTS {
            let dist = (z - w).norm();
            let hh = h.min(0.5 * dist).min(0.5 / l.norm());
            if hh < hmin {
                return Err(GeoError::TracingFailure("step underflow".into()));
            }
            let pred = z + t * hh;
            let accepted = self
                .correct(pred)
                .filter(|(zn, _)| (zn - pred).norm() <= 0.5 * hh)
                .and_then(|(zn, ln)| {
                    let tn = tangent(ln);
                    let turn = (tn / t).arg().abs().max(((zn - z) / t).arg().abs());
                    (turn <= MAX_CHORD_ANGLE).then_some((zn, ln, tn, turn))
                });
            let Some((zn, ln, tn, turn)) = accepted else {
                h = 0.5 * hh;
                continue;
            };
            z = zn;
            l = ln;
            t = tn;
            verts.push(z);
            h = if turn < 0.05 { 1.5 * hh } else { hh };
            let dist = (z - w).norm();
            if dist > 2.0 * rc {
                left_capture = true;
            }
            if left_capture && dist <= rc {
                if ((z - w) / dir_in).arg().abs() > FRAC_PI_4 {
                    return Err(GeoError::TracingFailure("petal closed from the wrong side".into()));
                }
                verts.push(w);
                return Ok(verts);
            }
        }
        Err(GeoError::TracingFailure("point budget exhausted".into()))
    }
}

/// Traces the two petals through the critical point `w` at `log t = log_level`.
///
/// The lower region near `w` consists of two opposite sectors centred on
/// `φ_k = (π - arg c)/2 + kπ` with `c = p''(w)/(2p(w))`. Petal `k` leaves `w`
/// along `φ_k - π/4` and returns along `φ_k + π/4`.
pub fn trace_component_log(zf: &ZeroForm, w: C, log_level: f64) -> Result<[PetalCurve; 2], GeoError> {
    let (_, dl) = zf.log_deriv2(w);
    let c = dl * 0.5;
    if !(c.norm() > 0.0) || !c.re.is_finite() {
        return Err(GeoError::TracingFailure("degenerate saddle".into()));
    }
    let d = zf.zeros.iter().map(|z| (z - w).norm()).fold(f64::INFINITY, f64::min);
    let tracer = Tracer { zf, log_t: log_level };
    let base = 0.5 * (PI - c.arg());
    let mut out = Vec::with_capacity(2);
    for k in 0..2 {
        let phi = base + k as f64 * PI;
        let verts = tracer.petal(w, phi - FRAC_PI_4, phi + FRAC_PI_4, d)?;
        let mut petal = PetalCurve {
            vertices: verts,
            level: log_level.exp(),
            log_level,
            enclosed_zeros: Vec::new(),
            winding_count: 0,
            winding_integral: 0.0,
        };
        let (inside, winding) = membership(zf, &petal.vertices)?;
        if inside.is_empty() {
            return Err(GeoError::TracingFailure("petal encloses no zero".into()));
        }
        petal.winding_count = inside.len() as i64;
        petal.winding_integral = winding;
        petal.enclosed_zeros = inside;
        out.push(petal);
    }
    let b = out.pop().expect("two petals");
    let a = out.pop().expect("two petals");
    Ok([a, b])
}

/// [`trace_component_log`] for a polynomial and a plain level.
pub fn trace_singular_component(p: &PolynomialRep, w: C, level: f64) -> Result<[PetalCurve; 2], GeoError> {
    if !(level > 0.0) {
        return Err(GeoError::InvalidInput("level must be positive".into()));
    }
    let zf = p.to_zero_form()?;
    trace_component_log(&zf, w, level.ln())
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(poly: &[C], q: C) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > q.im) != (b.im > q.im) {
            let x = a.re + (q.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if q.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Zeros inside the polyline, cross-checked against the discrete argument
/// principle. Each edge contributes the principal value of its change in
/// `arg p`, so an under-resolved edge shows up as a mismatch.
fn membership(zf: &ZeroForm, verts: &[C]) -> Result<(Vec<usize>, f64), GeoError> {
    let inside: Vec<usize> = zf
        .zeros
        .iter()
        .enumerate()
        .filter(|(_, &z)| point_in_polygon(verts, z))
        .map(|(i, _)| i)
        .collect();
    let mut total = 0.0;
    for e in verts.windows(2) {
        let mut d = zf.arg_increment(e[0], e[1]);
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        total += d;
    }
    let winding = total / (2.0 * PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.1 || rounded != inside.len() as f64 {
        return Err(GeoError::ArgumentMismatch {
            winding,
            inside: inside.len(),
        });
    }
    Ok((inside, winding))
}

/// Zeros enclosed by a traced petal; fails on an argument-principle
/// mismatch.
pub fn zeros_in_petal(p: &PolynomialRep, petal: &PetalCurve) -> Result<Vec<usize>, GeoError> {
    let zf = p.to_zero_form()?;
    membership(&zf, &petal.vertices).map(|(inside, _)| inside)
}

/// Everything the geometric pipeline computes for one polynomial.
#[derive(Debug, Clone)]
pub struct LemniscateAnalysis {
    pub zero_form: ZeroForm,
    pub critical: CriticalData,
    pub genericity: GenericityReport,
    /// Indexed by rank minus one.
    pub components: Vec<SingularComponent>,
    pub tree: LemnTree,
}

/// Critical points, genericity, every singular component and the tree.
pub fn analyze(p: &PolynomialRep) -> Result<LemniscateAnalysis, GeoError> {
    let p = p.with_zeros()?;
    let zf = p.to_zero_form()?;
    let crit = critical_points(&p)?;
    let gen = genericity_check(&p, &crit)?;
    if !gen.generic {
        return Err(GeoError::NotGeneric(gen));
    }
    let m = crit.points.len();
    let mut blocks: Vec<(Vec<usize>, Option<usize>)> = vec![((0..zf.degree()).collect(), None)];
    let mut parent = vec![0usize; m + 1];
    let mut components = Vec::with_capacity(m);
    for (r, &i) in crit.order.iter().enumerate() {
        let label = r + 1;
        let w = crit.points[i];
        let petals = trace_component_log(&zf, w, crit.log_values[i])?;
        let (a, b) = (&petals[0].enclosed_zeros, &petals[1].enclosed_zeros);
        let bi = blocks
            .iter()
            .position(|(blk, _)| blk.binary_search(&a[0]).is_ok())
            .ok_or_else(|| GeoError::PartitionInconsistency(format!("rank {label}: no block")))?;
        let mut merged: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        merged.sort_unstable();
        if merged != blocks[bi].0 {
            return Err(GeoError::PartitionInconsistency(format!(
                "rank {label}: petals hold {} + {} zeros, block has {}",
                a.len(),
                b.len(),
                blocks[bi].0.len()
            )));
        }
        match blocks[bi].1 {
            Some(q) => parent[label] = q,
            None if label == 1 => {}
            None => {
                return Err(GeoError::PartitionInconsistency(format!(
                    "rank {label} split the root block"
                )))
            }
        }
        blocks[bi] = (a.clone(), Some(label));
        blocks.push((b.clone(), Some(label)));
        components.push(SingularComponent {
            critical_point: w,
            rank: label,
            petals,
        });
    }
    let tree =
        LemnTree::from_parents(parent[2..].to_vec()).map_err(|e| GeoError::PartitionInconsistency(e.to_string()))?;
    Ok(LemniscateAnalysis {
        zero_form: zf,
        critical: crit,
        genericity: gen,
        components,
        tree,
    })
}

/// The lemniscate tree of a generic polynomial; labels are critical-value
/// ranks.
pub fn build_lemniscate_tree(p: &PolynomialRep) -> Result<LemnTree, GeoError> {
    analyze(p).map(|a| a.tree)
}
