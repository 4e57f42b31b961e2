//! Petal polylines in a plain JSON layout for external plotting.

use serde::{Deserialize, Serialize};

use super::trace::{LemniscateAnalysis, SingularComponent};

/// `{"critical_point": [re, im], "level": t, "petals": [[[re, im], ...], [...]],
/// "enclosed": [[...], [...]]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetalExport {
    pub critical_point: [f64; 2],
    pub level: f64,
    pub petals: [Vec<[f64; 2]>; 2],
    pub enclosed: [Vec<usize>; 2],
}

pub fn component_export(c: &SingularComponent) -> PetalExport {
    let pts = |i: usize| c.petals[i].vertices.iter().map(|v| [v.re, v.im]).collect();
    PetalExport {
        critical_point: [c.critical_point.re, c.critical_point.im],
        level: c.petals[0].level,
        petals: [pts(0), pts(1)],
        enclosed: [c.petals[0].enclosed_zeros.clone(), c.petals[1].enclosed_zeros.clone()],
    }
}

/// One record per singular component, in rank order.
pub fn lemniscate_export(a: &LemniscateAnalysis) -> Vec<PetalExport> {
    a.components.iter().map(component_export).collect()
}
