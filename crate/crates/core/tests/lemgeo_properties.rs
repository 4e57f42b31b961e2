use lemtree::exprunner::trial_rng;
use lemtree::lemgeo::{analyze, pairing_from_analysis, LemniscateAnalysis, DEFAULT_PAIRING_RADIUS};
use lemtree::polymodels::{ModelKind, ModelSpec};

fn analyses(kind: ModelKind, degree: usize, trials: u64, seed: u64) -> Vec<LemniscateAnalysis> {
    let spec = ModelSpec::new(kind, degree).unwrap();
    (0..trials)
        .filter_map(|i| analyze(&spec.sample(&mut trial_rng(seed, i)).unwrap()).ok())
        .collect()
}

#[test]
fn petal_census_matches_tree() {
    for kind in [
        ModelKind::IidUniformDisk,
        ModelKind::IidUniformSphere,
        ModelKind::Kostlan,
    ] {
        let all = analyses(kind, 15, 20, 1);
        assert!(all.len() >= 19, "{kind}: {} of 20 accepted", all.len());
        for a in &all {
            let children = a.tree.children();
            assert_eq!(a.components.len(), a.tree.size());
            for comp in &a.components {
                let big = comp.petals.iter().filter(|p| p.enclosed_zeros.len() >= 2).count();
                assert_eq!(children[comp.rank].len(), big, "{kind} rank {}", comp.rank);
            }
            // Root is the largest critical value.
            let top = a
                .components
                .iter()
                .max_by(|x, y| x.petals[0].level.total_cmp(&y.petals[0].level))
                .unwrap();
            assert_eq!(top.rank, 1);
            assert_eq!(a.tree.parent(1), None);
        }
    }
}

#[test]
fn zeros_are_conserved_and_windings_integral() {
    for a in analyses(ModelKind::IidUniformDisk, 20, 10, 2) {
        let n = a.zero_form.zeros.len();
        let root = &a.components[0];
        let mut all: Vec<usize> = root.petals.iter().flat_map(|p| p.enclosed_zeros.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        for comp in &a.components {
            for p in &comp.petals {
                let w = p.winding_integral;
                assert!((w - w.round()).abs() < 0.1);
                assert_eq!(w.round() as usize, p.enclosed_zeros.len());
                assert_eq!(p.winding_count as usize, p.enclosed_zeros.len());
                assert_eq!(p.vertices.first(), p.vertices.last());
            }
        }
    }
}

#[test]
fn small_petals_count_non_branching_nodes() {
    // A node with fewer than two children has a petal holding a single zero,
    // so the small-petal fraction is 1 - Y/(N-1) >= 1 - 2Y/N.
    let n = 50;
    for a in analyses(ModelKind::IidUniformDisk, n, 10, 3) {
        let y = a.tree.outdegree_profile().n2 as f64;
        let s = pairing_from_analysis(&a, DEFAULT_PAIRING_RADIUS)
            .small_petal_fraction
            .unwrap();
        assert!((s - (1.0 - y / (n - 1) as f64)).abs() < 1e-12);
        assert!(s >= 1.0 - 2.0 * y / n as f64);
    }
}
