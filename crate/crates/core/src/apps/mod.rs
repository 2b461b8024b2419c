//! Manifold applications: gluings, doubles and branched coverings.

mod certify;
mod setup;

pub use certify::*;
pub use setup::*;

use crate::model::{GraphEdge, GraphOfGroups, Injection};

/// The graph of groups of a gluing: one vertex per piece, one edge per
/// pairing, carrying the fundamental group of the `+` side.
pub fn gluing_to_gog(s: &GluingSetup) -> GraphOfGroups {
    GraphOfGroups {
        name: format!("gluing({})", s.name),
        vertices: s.pieces.iter().map(|p| (p.name.clone(), p.pi1.clone())).collect(),
        edges: s
            .pairings
            .iter()
            .map(|p| GraphEdge {
                name: format!("{}--{}", s.boundary(p.plus).name, s.boundary(p.minus).name),
                from: p.plus.0,
                to: p.minus.0,
                group: s.boundary(p.plus).pi1.clone(),
                injections: Injection::Asserted,
            })
            .collect(),
    }
}
