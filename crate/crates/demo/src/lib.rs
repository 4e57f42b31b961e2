//! Browser bindings: lemniscate petals of a polynomial, uniform random
//! trees, and perturbed Chebyshev trees. Every entry point returns JSON.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use lemtree::exactcomb::{MomentJets, UniformSampler};
use lemtree::exprunner::lemniscate_plot;
use lemtree::lemgeo::{analyze, real_rooted_permutation, PolynomialRep};
use lemtree::polymodels::{perturbed_chebyshev, ModelKind, ModelSpec};
use lemtree::treecore::{count_valleys, tree_from_permutation, LemnTree, OutdegreeProfile};

/// Largest degree the page may request; tracing cost grows quickly.
pub const MAX_TRACE_DEGREE: usize = 80;
pub const MAX_TREE_SIZE: usize = 600;

#[derive(Serialize)]
struct TreeJson {
    size: usize,
    parent: Vec<usize>,
    profile: OutdegreeProfile,
    canonical: String,
}

impl From<&LemnTree> for TreeJson {
    fn from(t: &LemnTree) -> Self {
        Self {
            size: t.size(),
            parent: t.to_raw().parent,
            profile: t.outdegree_profile(),
            canonical: t.canonical_encode(),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable")
}

/// Petals of the polynomial with the given zeros (`[[re, im], ...]`), plus
/// its tree when tracing succeeds.
pub fn trace_zeros_json(zeros: &str) -> Result<String, String> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(zeros).map_err(|e| e.to_string())?;
    if !(2..=MAX_TRACE_DEGREE).contains(&pairs.len()) {
        return Err(format!("need 2 to {MAX_TRACE_DEGREE} zeros"));
    }
    let p = PolynomialRep::from_zeros(pairs.iter().map(|z| Complex64::new(z[0], z[1])).collect())
        .map_err(|e| e.to_string())?;
    Ok(trace_poly(&p))
}

fn trace_poly(p: &PolynomialRep) -> String {
    #[derive(Serialize)]
    struct Out {
        plot: lemtree::exprunner::LemniscatePlot,
        tree: Option<TreeJson>,
    }
    let plot = lemniscate_plot(p);
    let tree = if plot.complete {
        analyze(p).ok().map(|a| TreeJson::from(&a.tree))
    } else {
        None
    };
    to_json(&Out { plot, tree })
}

/// Random polynomial from a named model, traced.
pub fn random_lemniscate_json(model: &str, degree: usize, seed: u64) -> Result<String, String> {
    let kind: ModelKind = model
        .parse()
        .map_err(|e: lemtree::polymodels::ModelError| e.to_string())?;
    if kind == ModelKind::IidCustomDensity {
        return Err("custom densities are not available here".into());
    }
    if degree > MAX_TRACE_DEGREE {
        return Err(format!("degree at most {MAX_TRACE_DEGREE}"));
    }
    let spec = ModelSpec::new(kind, degree).map_err(|e| e.to_string())?;
    let p = spec
        .sample(&mut ChaCha8Rng::seed_from_u64(seed))
        .map_err(|e| e.to_string())?;
    let p = p.with_zeros().map_err(|e| e.to_string())?;
    Ok(trace_poly(&p))
}

/// Uniform tree of the given size with the exact mean of its branching
/// count.
pub fn uniform_tree_json(size: usize, seed: u64) -> Result<String, String> {
    if size == 0 || size > MAX_TREE_SIZE {
        return Err(format!("size must be in 1..={MAX_TREE_SIZE}"));
    }
    #[derive(Serialize)]
    struct Out {
        tree: TreeJson,
        exact_mean_n2: f64,
        exact_variance_n2: f64,
    }
    let t = UniformSampler::new(size).sample(&mut ChaCha8Rng::seed_from_u64(seed));
    let m = MomentJets::expand(size - 1).moments(size).map_err(|e| e.to_string())?;
    Ok(to_json(&Out {
        tree: TreeJson::from(&t),
        exact_mean_n2: m.mean_f64(),
        exact_variance_n2: m.variance_f64(),
    }))
}

/// Perturbed Chebyshev draw: coefficients, critical-value permutation,
/// valley count and tree.
pub fn chebyshev_tree_json(degree: usize, seed: u64) -> Result<String, String> {
    if !(2..=400).contains(&degree) {
        return Err("degree must be in 2..=400".into());
    }
    #[derive(Serialize)]
    struct Out {
        coeffs: Vec<f64>,
        permutation: Vec<usize>,
        valleys: usize,
        tree: TreeJson,
    }
    let s = perturbed_chebyshev(degree, &mut ChaCha8Rng::seed_from_u64(seed));
    let coeffs = s.coeffs().to_vec();
    let p = PolynomialRep::from_cheb(s).map_err(|e| e.to_string())?;
    let sigma = real_rooted_permutation(&p).map_err(|e| e.to_string())?;
    let tree = tree_from_permutation(&sigma).map_err(|e| e.to_string())?;
    Ok(to_json(&Out {
        coeffs,
        valleys: count_valleys(&sigma),
        permutation: sigma.values().to_vec(),
        tree: TreeJson::from(&tree),
    }))
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = traceZeros)]
pub fn trace_zeros(zeros: &str) -> Result<String, JsValue> {
    js(trace_zeros_json(zeros))
}

#[wasm_bindgen(js_name = randomLemniscate)]
pub fn random_lemniscate(model: &str, degree: usize, seed: u64) -> Result<String, JsValue> {
    js(random_lemniscate_json(model, degree, seed))
}

#[wasm_bindgen(js_name = uniformTree)]
pub fn uniform_tree(size: usize, seed: u64) -> Result<String, JsValue> {
    js(uniform_tree_json(size, seed))
}

#[wasm_bindgen(js_name = chebyshevTree)]
pub fn chebyshev_tree(degree: usize, seed: u64) -> Result<String, JsValue> {
    js(chebyshev_tree_json(degree, seed))
}
