//! Finite pieces of Bass–Serre trees and polygon developments built from
//! concrete finite groups, stabilizer bookkeeping, and the curvature check.

mod bass_serre;
mod curvature;
mod polygon;

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::model::{
    ConcreteFiniteGroup, Elem, ElementSet, GraphOfGroups, GroupExpr, Homomorphism, Injection, PolygonMaps,
    PolygonOfGroups, Universe,
};

pub use bass_serre::bass_serre_ball_concrete;
pub use curvature::{brute_force_curvature, check_curvature_concrete, CurvatureReport, VertexCurvature};
pub use polygon::polygon_ball_concrete;

/// Largest radius a ball may be built with.
pub const RADIUS_LIMIT: usize = 4;
/// Largest number of cells a ball may contain.
pub const CELL_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DevelopError {
    #[error("{0} has no concrete finite model")]
    NotConcrete(String),
    #[error("radius {radius} exceeds the limit {limit}")]
    RadiusLimit { radius: usize, limit: usize },
    #[error("ball exceeds {CELL_LIMIT} cells")]
    TooLarge,
    #[error("element set is not a subgroup")]
    NotSubgroup,
    #[error("inclusion maps do not commute at vertex {vertex}")]
    Commutation { vertex: usize },
    #[error("inclusion map {0} is not injective")]
    NotInjective(String),
    #[error("inclusion map {0} has the wrong source or target")]
    Shape(String),
    #[error("polygon needs d ≥ 3, found {0}")]
    TooFewSides(usize),
    #[error("inconsistent development near {0}")]
    Inconsistent(String),
}

/// Left cosets `xH` of a subgroup, ordered by minimal representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    pub group: Arc<ConcreteFiniteGroup>,
    pub subgroup: ElementSet,
    pub cosets: Vec<ElementSet>,
    pub index: usize,
    lookup: Vec<usize>,
}

impl CosetTable {
    /// Position of the coset containing `x`.
    pub fn coset_of(&self, x: Elem) -> usize {
        self.lookup[x]
    }

    /// The representative used for the coset of `x`: the identity for the
    /// subgroup itself, the minimal element otherwise.
    pub fn representative(&self, x: Elem) -> Elem {
        let c = &self.cosets[self.lookup[x]];
        if c.contains(&self.group.identity()) {
            self.group.identity()
        } else {
            *c.iter().next().unwrap()
        }
    }
}

pub fn enumerate_cosets(g: &Arc<ConcreteFiniteGroup>, h: &ElementSet) -> Result<CosetTable, DevelopError> {
    if !g.is_subgroup(h) {
        return Err(DevelopError::NotSubgroup);
    }
    let mut lookup = vec![usize::MAX; g.order()];
    let mut cosets = Vec::new();
    for x in g.elements() {
        if lookup[x] != usize::MAX {
            continue;
        }
        let coset: ElementSet = h.iter().map(|&y| g.mul(x, y)).collect();
        for &y in &coset {
            lookup[y] = cosets.len();
        }
        cosets.push(coset);
    }
    Ok(CosetTable { group: Arc::clone(g), subgroup: h.clone(), index: cosets.len(), cosets, lookup })
}

/// One cell of a ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub id: usize,
    /// Vertex or edge name of the graph, or `v<i>`, `e<i>`, `f` for polygons.
    pub kind: String,
    pub group: String,
    pub stabilizer_order: usize,
    /// Stabilizer elements: normal forms for trees, local coordinates
    /// (elements of the cell's own group) for polygon developments.
    pub stabilizer: Vec<String>,
    /// Boundary cells one dimension down.
    pub boundary: Vec<usize>,
    /// Per boundary cell, the element `g_C^{-1} g_D` of the boundary cell's
    /// group relating the two frames (polygon developments only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub transforms: Vec<Elem>,
    /// Corner vertices of a polygon face with their transforms.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corners: Vec<(usize, Elem)>,
    /// Edge distance from the origin in the 1-skeleton (for vertices), or
    /// the least depth of a boundary vertex.
    pub depth: usize,
}

/// A finite piece of a development around an origin vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DevelopmentBall {
    pub kind: String,
    pub radius: usize,
    pub origin: usize,
    /// Cells by dimension.
    pub cells: Vec<Vec<Cell>>,
}

impl DevelopmentBall {
    pub fn count(&self, dim: usize) -> usize {
        self.cells.get(dim).map_or(0, Vec::len)
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..self.cells.len()).map(|k| if k % 2 == 0 { 1 } else { -1 } * self.count(k) as i64).sum()
    }

    /// Neighbours of every vertex in the 1-skeleton, sorted.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.count(0)];
        for e in self.cells.get(1).into_iter().flatten() {
            if let [a, b] = e.boundary[..] {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbours().iter().map(Vec::len).collect()
    }

    /// One line per vertex: `id kind: neighbour ids`.
    pub fn adjacency_list(&self) -> String {
        let mut out = String::new();
        for (v, adj) in self.neighbours().iter().enumerate() {
            let ids: Vec<String> = adj.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{v} {}: {}", self.cells[0][v].kind, ids.join(" "));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ball serializes")
    }

    fn check_size(&self) -> Result<(), DevelopError> {
        if self.cells.iter().map(Vec::len).sum::<usize>() > CELL_LIMIT {
            Err(DevelopError::TooLarge)
        } else {
            Ok(())
        }
    }
}

fn concrete(u: &Universe, e: &GroupExpr) -> Result<Arc<ConcreteFiniteGroup>, DevelopError> {
    u.concrete_of(e).ok_or_else(|| DevelopError::NotConcrete(e.to_string()))
}

/// A declared or canonical cyclic injection `src -> tgt`.
fn injection(u: &Universe, src: &GroupExpr, tgt: &GroupExpr, what: &str) -> Result<Homomorphism, DevelopError> {
    let a = concrete(u, src)?;
    let b = concrete(u, tgt)?;
    Homomorphism::canonical_cyclic(a, b).ok_or_else(|| DevelopError::NotConcrete(format!("the inclusion {what}")))
}

/// A graph of groups with every group and injection concrete.
#[derive(Debug, Clone)]
pub struct ConcreteGraph {
    pub name: String,
    pub vertices: Vec<(String, GroupExpr, Arc<ConcreteFiniteGroup>)>,
    /// `(name, group, from, to, into_from, into_to)`.
    pub edges: Vec<ConcreteEdge>,
}

#[derive(Debug, Clone)]
pub struct ConcreteEdge {
    pub name: String,
    pub group: GroupExpr,
    pub from: usize,
    pub to: usize,
    pub into_from: Homomorphism,
    pub into_to: Homomorphism,
}

impl ConcreteGraph {
    /// Resolves groups through the universe; asserted injections between
    /// cyclic groups use the canonical embedding.
    pub fn resolve(u: &Universe, g: &GraphOfGroups) -> Result<ConcreteGraph, DevelopError> {
        let vertices = g
            .vertices
            .iter()
            .map(|(n, e)| Ok((n.clone(), e.clone(), concrete(u, e)?)))
            .collect::<Result<Vec<_>, DevelopError>>()?;
        let mut edges = Vec::new();
        for e in &g.edges {
            let (into_from, into_to) = match &e.injections {
                Injection::Concrete { into_from, into_to } => (into_from.clone(), into_to.clone()),
                Injection::Asserted => (
                    injection(u, &e.group, &g.vertices[e.from].1, &format!("{} -> {}", e.name, g.vertices[e.from].0))?,
                    injection(u, &e.group, &g.vertices[e.to].1, &format!("{} -> {}", e.name, g.vertices[e.to].0))?,
                ),
            };
            edges.push(ConcreteEdge { name: e.name.clone(), group: e.group.clone(), from: e.from, to: e.to, into_from, into_to });
        }
        ConcreteGraph::new(&g.name, vertices, edges)
    }

    pub fn new(
        name: &str,
        vertices: Vec<(String, GroupExpr, Arc<ConcreteFiniteGroup>)>,
        edges: Vec<ConcreteEdge>,
    ) -> Result<ConcreteGraph, DevelopError> {
        for e in &edges {
            for (h, v) in [(&e.into_from, e.from), (&e.into_to, e.to)] {
                if v >= vertices.len() || h.target() != &vertices[v].2 || h.source() != e.into_from.source() {
                    return Err(DevelopError::Shape(e.name.clone()));
                }
                if !h.is_injective() {
                    return Err(DevelopError::NotInjective(e.name.clone()));
                }
            }
        }
        Ok(ConcreteGraph { name: name.to_string(), vertices, edges })
    }

    /// Index of the vertex with the lexicographically first name.
    pub fn base_vertex(&self) -> usize {
        (0..self.vertices.len()).min_by(|&a, &b| self.vertices[a].0.cmp(&self.vertices[b].0)).unwrap_or(0)
    }
}

/// A polygon of groups with concrete groups and verified inclusion maps.
#[derive(Debug, Clone)]
pub struct ConcretePolygon {
    pub d: usize,
    pub face_edge: Vec<Homomorphism>,
    pub edge_vertex: Vec<(Homomorphism, Homomorphism)>,
    /// `G_f -> G_{v_i}`, checked to be the same through both adjacent edges.
    pub face_vertex: Vec<Homomorphism>,
    pub labels: PolygonLabels,
}

/// Display names of the local groups.
#[derive(Debug, Clone, Default)]
pub struct PolygonLabels {
    pub vertex: Vec<String>,
    pub edge: Vec<String>,
    pub face: String,
}

impl ConcretePolygon {
    pub fn resolve(u: &Universe, p: &PolygonOfGroups) -> Result<ConcretePolygon, DevelopError> {
        let d = p.d;
        let (face_edge, edge_vertex) = match &p.maps {
            PolygonMaps::Concrete { face_edge, edge_vertex } => (face_edge.clone(), edge_vertex.clone()),
            PolygonMaps::Asserted => {
                let mut fe = Vec::new();
                let mut ev = Vec::new();
                for i in 0..d {
                    fe.push(injection(u, &p.face_group, &p.edge_groups[i], &format!("f -> e{i}"))?);
                    ev.push((
                        injection(u, &p.edge_groups[i], &p.vertex_groups[i], &format!("e{i} -> v{i}"))?,
                        injection(u, &p.edge_groups[i], &p.vertex_groups[(i + 1) % d], &format!("e{i} -> v{}", (i + 1) % d))?,
                    ));
                }
                (fe, ev)
            }
        };
        let labels = PolygonLabels {
            vertex: p.vertex_groups.iter().map(|g| g.to_string()).collect(),
            edge: p.edge_groups.iter().map(|g| g.to_string()).collect(),
            face: p.face_group.to_string(),
        };
        ConcretePolygon::new(face_edge, edge_vertex, labels)
    }

    /// Checks shapes, injectivity and commutation of the inclusion maps.
    pub fn new(
        face_edge: Vec<Homomorphism>,
        edge_vertex: Vec<(Homomorphism, Homomorphism)>,
        labels: PolygonLabels,
    ) -> Result<ConcretePolygon, DevelopError> {
        let d = face_edge.len();
        if d < 3 {
            return Err(DevelopError::TooFewSides(d));
        }
        if edge_vertex.len() != d {
            return Err(DevelopError::Shape("edge_vertex".into()));
        }
        let face = face_edge[0].source();
        for i in 0..d {
            let (a, b) = &edge_vertex[i];
            let name = |what: &str| format!("{what} at edge {i}");
            if face_edge[i].source() != face || face_edge[i].target() != a.source() || a.source() != b.source() {
                return Err(DevelopError::Shape(name("face_edge")));
            }
            let next = &edge_vertex[(i + 1) % d].0;
            if b.target() != next.target() {
                return Err(DevelopError::Shape(name("edge_vertex")));
            }
            for (h, what) in [(&face_edge[i], "face_edge"), (a, "edge_vertex"), (b, "edge_vertex")] {
                if !h.is_injective() {
                    return Err(DevelopError::NotInjective(name(what)));
                }
            }
        }
        let mut face_vertex = Vec::new();
        for v in 0..d {
            let prev = (v + d - 1) % d;
            let via_next = face_edge[v].compose(&edge_vertex[v].0).expect("shapes checked");
            let via_prev = face_edge[prev].compose(&edge_vertex[prev].1).expect("shapes checked");
            if face.elements().any(|x| via_next.apply(x) != via_prev.apply(x)) {
                return Err(DevelopError::Commutation { vertex: v });
            }
            face_vertex.push(via_next);
        }
        let mut labels = labels;
        if labels.vertex.len() != d {
            labels.vertex = (0..d).map(|i| format!("G_v{i}")).collect();
            labels.edge = (0..d).map(|i| format!("G_e{i}")).collect();
            labels.face = "G_f".into();
        }
        Ok(ConcretePolygon { d, face_edge, edge_vertex, face_vertex, labels })
    }

    pub fn vertex_group(&self, i: usize) -> &Arc<ConcreteFiniteGroup> {
        self.edge_vertex[i].0.target()
    }

    pub fn edge_group(&self, i: usize) -> &Arc<ConcreteFiniteGroup> {
        self.edge_vertex[i].0.source()
    }

    pub fn face_group(&self) -> &Arc<ConcreteFiniteGroup> {
        self.face_edge[0].source()
    }
}

pub fn bass_serre_ball(u: &Universe, g: &GraphOfGroups, radius: usize) -> Result<DevelopmentBall, DevelopError> {
    let cg = ConcreteGraph::resolve(u, g)?;
    bass_serre_ball_concrete(&cg, cg.base_vertex(), radius)
}

pub fn polygon_ball(u: &Universe, p: &PolygonOfGroups, radius: usize) -> Result<DevelopmentBall, DevelopError> {
    let cp = ConcretePolygon::resolve(u, p)?;
    polygon_ball_concrete(&cp, radius)
}

pub fn check_curvature(u: &Universe, p: &PolygonOfGroups) -> Result<CurvatureReport, DevelopError> {
    Ok(check_curvature_concrete(&ConcretePolygon::resolve(u, p)?))
}

/// What a ball was built from.
pub enum Expected<'a> {
    Graph(&'a ConcreteGraph),
    Polygon(&'a ConcretePolygon),
}

/// Outcome of [`verify_stabilizers`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizerReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
    /// Stabilizer orders by dimension and cell kind.
    pub orders: BTreeMap<String, Vec<usize>>,
}

impl StabilizerReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Confirms every stabilizer against the declared local groups.
pub fn verify_stabilizers(ball: &DevelopmentBall, expected: Expected<'_>) -> StabilizerReport {
    let mut report = StabilizerReport { checked: 0, mismatches: vec![], orders: BTreeMap::new() };
    for (dim, cells) in ball.cells.iter().enumerate() {
        let mut orders: Vec<usize> = cells.iter().map(|c| c.stabilizer_order).collect();
        orders.sort_unstable();
        orders.dedup();
        report.orders.insert(format!("dim{dim}"), orders);
    }
    match expected {
        Expected::Graph(g) => bass_serre::verify(ball, g, &mut report),
        Expected::Polygon(p) => polygon::verify(ball, p, &mut report),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosets_partition() {
        let z4 = Arc::new(ConcreteFiniteGroup::cyclic(4).unwrap());
        let t = enumerate_cosets(&z4, &ElementSet::from([0, 2])).unwrap();
        assert_eq!(t.index, 2);
        assert_eq!(t.cosets, vec![ElementSet::from([0, 2]), ElementSet::from([1, 3])]);
        assert_eq!(t.representative(2), 0);
        assert_eq!(t.representative(3), 1);
        let z6 = Arc::new(ConcreteFiniteGroup::cyclic(6).unwrap());
        assert_eq!(enumerate_cosets(&z6, &ElementSet::from([0, 3])).unwrap().index, 3);
        assert_eq!(enumerate_cosets(&z6, &z6.elements().collect()).unwrap().index, 1);
        assert_eq!(enumerate_cosets(&z6, &ElementSet::from([0, 1])), Err(DevelopError::NotSubgroup));
    }
}
