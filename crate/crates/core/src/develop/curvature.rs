//! The local curvature condition at polygon vertices: the two edge groups
//! meet exactly in the face group.

use serde::Serialize;

use super::ConcretePolygon;
use crate::model::ElementSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexCurvature {
    pub vertex: usize,
    /// Intersection of the images of the two adjacent edge groups.
    pub intersection: ElementSet,
    /// Image of the face group.
    pub face_image: ElementSet,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvatureReport {
    pub holds: bool,
    pub vertices: Vec<VertexCurvature>,
    /// First failing vertex and the offending intersection.
    pub witness: Option<(usize, ElementSet)>,
}

pub fn check_curvature_concrete(p: &ConcretePolygon) -> CurvatureReport {
    let d = p.d;
    let vertices: Vec<VertexCurvature> = (0..d)
        .map(|v| {
            let prev = p.edge_vertex[(v + d - 1) % d].1.image();
            let next = p.edge_vertex[v].0.image();
            let intersection: ElementSet = prev.intersection(&next).copied().collect();
            let face_image = p.face_vertex[v].image();
            let holds = intersection == face_image;
            VertexCurvature { vertex: v, intersection, face_image, holds }
        })
        .collect();
    let witness = vertices.iter().find(|c| !c.holds).map(|c| (c.vertex, c.intersection.clone()));
    CurvatureReport { holds: witness.is_none(), vertices, witness }
}

/// Element-by-element check: every `x` in both edge images must come from a
/// face element mapped through the next edge.
pub fn brute_force_curvature(p: &ConcretePolygon) -> bool {
    let d = p.d;
    (0..d).all(|v| {
        let (a, _) = &p.edge_vertex[v];
        let (_, b) = &p.edge_vertex[(v + d - 1) % d];
        p.vertex_group(v).elements().all(|x| {
            let in_a = a.source().elements().any(|y| a.apply(y) == x);
            let in_b = b.source().elements().any(|y| b.apply(y) == x);
            let in_f = p.face_group().elements().any(|z| a.apply(p.face_edge[v].apply(z)) == x);
            (in_a && in_b) == in_f
        })
    })
}
