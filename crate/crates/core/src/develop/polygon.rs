//! Radius-limited developments of polygons of finite groups.
//!
//! Every cell `C` of type `σ` stands for a coset `g_C G_σ` of the (unknown,
//! usually infinite) fundamental group. The frames `g_C` are never
//! materialised; instead each incidence stores `g_C^{-1} g_D`, an element
//! of the larger local group. The star of a vertex is completed coset by
//! coset; the boundary of a new face is traced through already existing
//! edges in both directions and the remaining gap is filled with new cells
//! whose frame is the frame of the face.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Cell, ConcretePolygon, DevelopError, DevelopmentBall, StabilizerReport, CELL_LIMIT, RADIUS_LIMIT};
use crate::model::{Elem, ElementSet};

/// Coset key: minimal element of `x·H`.
fn coset_keys(group: &crate::model::ConcreteFiniteGroup, h: &ElementSet) -> Vec<Elem> {
    group.elements().map(|x| h.iter().map(|&y| group.mul(x, y)).min().unwrap()).collect()
}

struct Tables {
    /// Per vertex type: keys of `G_f`-cosets, of cosets of the previous
    /// edge group and of the next edge group.
    face_at_vertex: Vec<Vec<Elem>>,
    prev_at_vertex: Vec<Vec<Elem>>,
    next_at_vertex: Vec<Vec<Elem>>,
    /// Per edge type: keys of `G_f`-cosets.
    face_at_edge: Vec<Vec<Elem>>,
}

impl Tables {
    fn new(p: &ConcretePolygon) -> Tables {
        let d = p.d;
        let mut t = Tables { face_at_vertex: vec![], prev_at_vertex: vec![], next_at_vertex: vec![], face_at_edge: vec![] };
        for i in 0..d {
            let gv = p.vertex_group(i);
            t.face_at_vertex.push(coset_keys(gv, &p.face_vertex[i].image()));
            t.prev_at_vertex.push(coset_keys(gv, &p.edge_vertex[(i + d - 1) % d].1.image()));
            t.next_at_vertex.push(coset_keys(gv, &p.edge_vertex[i].0.image()));
            t.face_at_edge.push(coset_keys(p.edge_group(i), &p.face_edge[i].image()));
        }
        t
    }
}

struct PVertex {
    ty: usize,
    level: usize,
    complete: bool,
    faces: BTreeMap<Elem, usize>,
    prev_edges: BTreeMap<Elem, usize>,
    next_edges: BTreeMap<Elem, usize>,
}

struct PEdge {
    ty: usize,
    /// `(vertex, g_V^{-1} g_E)` at `v_ty` and at `v_{ty+1}`.
    ends: [(usize, Elem); 2],
    faces: BTreeMap<Elem, usize>,
}

struct PFace {
    /// Per edge type `j`: `(edge, g_E^{-1} g_F)`.
    edges: Vec<(usize, Elem)>,
    /// Per vertex type `j`: `(vertex, g_V^{-1} g_F)`.
    corners: Vec<(usize, Elem)>,
}

struct Builder<'a> {
    p: &'a ConcretePolygon,
    t: Tables,
    vertices: Vec<PVertex>,
    edges: Vec<PEdge>,
    faces: Vec<PFace>,
}

impl<'a> Builder<'a> {
    fn new_vertex(&mut self, ty: usize, level: usize) -> usize {
        self.vertices.push(PVertex {
            ty,
            level,
            complete: false,
            faces: BTreeMap::new(),
            prev_edges: BTreeMap::new(),
            next_edges: BTreeMap::new(),
        });
        self.vertices.len() - 1
    }

    fn inconsistent(&self, what: String) -> DevelopError {
        DevelopError::Inconsistent(what)
    }

    /// Creates the face `g_V x G_f` at vertex `v`.
    fn create_face(&mut self, v: usize, x: Elem) -> Result<(), DevelopError> {
        let d = self.p.d;
        let i = self.vertices[v].ty;
        let mut corners: Vec<Option<(usize, Elem)>> = vec![None; d];
        let mut edges: Vec<Option<(usize, Elem)>> = vec![None; d];
        corners[i] = Some((v, x));

        // forward through edges of type j from v_j to v_{j+1}
        let (mut at, mut t, mut j) = (v, x, i);
        for _ in 0..d {
            let key = self.t.next_at_vertex[j][t];
            let Some(&e) = self.vertices[at].next_edges.get(&key) else { break };
            let gv = self.p.vertex_group(j);
            let (_, u) = self.edges[e].ends[0];
            let r = self.p.edge_vertex[j].0.preimage(gv.mul(gv.inverse(u), t)).ok_or_else(|| self.inconsistent(format!("edge {e}")))?;
            edges[j] = Some((e, r));
            let (q, s) = self.edges[e].ends[1];
            let jn = (j + 1) % d;
            let tq = self.p.vertex_group(jn).mul(s, self.p.edge_vertex[j].1.apply(r));
            if let Some((w, tw)) = corners[jn] {
                if w != q || self.t.face_at_vertex[jn][tw] != self.t.face_at_vertex[jn][tq] {
                    return Err(self.inconsistent(format!("vertex {q}: face boundary does not close")));
                }
                break;
            }
            corners[jn] = Some((q, tq));
            (at, t, j) = (q, tq, jn);
        }
        // backward through edges of type j-1 from v_j to v_{j-1}
        let (mut at, mut t, mut j) = (v, x, i);
        for _ in 0..d {
            let jp = (j + d - 1) % d;
            if edges[jp].is_some() {
                break;
            }
            let key = self.t.prev_at_vertex[j][t];
            let Some(&e) = self.vertices[at].prev_edges.get(&key) else { break };
            let gv = self.p.vertex_group(j);
            let (_, u) = self.edges[e].ends[1];
            let r = self.p.edge_vertex[jp].1.preimage(gv.mul(gv.inverse(u), t)).ok_or_else(|| self.inconsistent(format!("edge {e}")))?;
            edges[jp] = Some((e, r));
            let (q, s) = self.edges[e].ends[0];
            let tq = self.p.vertex_group(jp).mul(s, self.p.edge_vertex[jp].0.apply(r));
            if let Some((w, tw)) = corners[jp] {
                if w != q || self.t.face_at_vertex[jp][tw] != self.t.face_at_vertex[jp][tq] {
                    return Err(self.inconsistent(format!("vertex {q}: face boundary does not close")));
                }
                break;
            }
            corners[jp] = Some((q, tq));
            (at, t, j) = (q, tq, jp);
        }

        // fill the gap with cells framed by the face itself
        let known: Vec<(usize, usize)> =
            (0..d).filter_map(|k| corners[k].map(|(w, _)| (k, self.vertices[w].level))).collect();
        for (k, slot) in corners.iter_mut().enumerate() {
            if slot.is_none() {
                let level = known
                    .iter()
                    .map(|&(kk, lvl)| {
                        let dist = (k + d - kk) % d;
                        lvl + dist.min(d - dist)
                    })
                    .min()
                    .unwrap();
                let w = self.new_vertex(k, level);
                *slot = Some((w, self.p.vertex_group(k).identity()));
            }
        }
        let corners: Vec<(usize, Elem)> = corners.into_iter().map(Option::unwrap).collect();
        for k in 0..d {
            if edges[k].is_some() {
                continue;
            }
            let kn = (k + 1) % d;
            let (a, ta) = corners[k];
            let (b, tb) = corners[kn];
            let ka = self.t.next_at_vertex[k][ta];
            let kb = self.t.prev_at_vertex[kn][tb];
            if self.vertices[a].next_edges.contains_key(&ka) || self.vertices[b].prev_edges.contains_key(&kb) {
                return Err(self.inconsistent(format!("edge between vertices {a} and {b}")));
            }
            let e = self.edges.len();
            self.edges.push(PEdge { ty: k, ends: [(a, ta), (b, tb)], faces: BTreeMap::new() });
            self.vertices[a].next_edges.insert(ka, e);
            self.vertices[b].prev_edges.insert(kb, e);
            edges[k] = Some((e, self.p.edge_group(k).identity()));
        }
        let edges: Vec<(usize, Elem)> = edges.into_iter().map(Option::unwrap).collect();

        let f = self.faces.len();
        for (k, &(w, tw)) in corners.iter().enumerate() {
            let key = self.t.face_at_vertex[k][tw];
            if self.vertices[w].faces.insert(key, f).is_some() {
                return Err(self.inconsistent(format!("vertex {w}: face registered twice")));
            }
        }
        for (k, &(e, r)) in edges.iter().enumerate() {
            let key = self.t.face_at_edge[k][r];
            if self.edges[e].faces.insert(key, f).is_some() {
                return Err(self.inconsistent(format!("edge {e}: face registered twice")));
            }
        }
        // relax levels around the new face
        for _ in 0..2 {
            for k in 0..d {
                let (a, _) = corners[k];
                let (b, _) = corners[(k + 1) % d];
                let (la, lb) = (self.vertices[a].level, self.vertices[b].level);
                self.vertices[a].level = la.min(lb + 1);
                self.vertices[b].level = lb.min(la + 1);
            }
        }
        self.faces.push(PFace { edges, corners });
        if self.vertices.len() + self.edges.len() + self.faces.len() > CELL_LIMIT {
            return Err(DevelopError::TooLarge);
        }
        Ok(())
    }

    fn complete_star(&mut self, v: usize) -> Result<(), DevelopError> {
        let i = self.vertices[v].ty;
        let gv = self.p.vertex_group(i).clone();
        for x in gv.elements() {
            let key = self.t.face_at_vertex[i][x];
            if !self.vertices[v].faces.contains_key(&key) {
                self.create_face(v, x)?;
            }
        }
        self.vertices[v].complete = true;
        Ok(())
    }
}

/// Completes the stars of all vertices at edge distance `< radius` from the
/// origin, a vertex of type `v0`.
pub fn polygon_ball_concrete(p: &ConcretePolygon, radius: usize) -> Result<DevelopmentBall, DevelopError> {
    if radius > RADIUS_LIMIT {
        return Err(DevelopError::RadiusLimit { radius, limit: RADIUS_LIMIT });
    }
    let mut b = Builder { p, t: Tables::new(p), vertices: vec![], edges: vec![], faces: vec![] };
    b.new_vertex(0, 0);
    loop {
        let next = (0..b.vertices.len())
            .filter(|&v| !b.vertices[v].complete && b.vertices[v].level < radius)
            .min_by_key(|&v| (b.vertices[v].level, v));
        let Some(v) = next else { break };
        b.complete_star(v)?;
    }
    Ok(export(&b, radius))
}

fn elements(set: &ElementSet) -> Vec<String> {
    set.iter().map(|x| x.to_string()).collect()
}

fn export(b: &Builder<'_>, radius: usize) -> DevelopmentBall {
    let p = b.p;
    // depths by breadth-first search in the 1-skeleton
    let mut adj = vec![Vec::new(); b.vertices.len()];
    for e in &b.edges {
        adj[e.ends[0].0].push(e.ends[1].0);
        adj[e.ends[1].0].push(e.ends[0].0);
    }
    let mut depth = vec![usize::MAX; b.vertices.len()];
    depth[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let vertices = b
        .vertices
        .iter()
        .enumerate()
        .map(|(id, v)| {
            let g = p.vertex_group(v.ty);
            Cell {
                id,
                kind: format!("v{}", v.ty),
                group: p.labels.vertex[v.ty].clone(),
                stabilizer_order: g.order(),
                stabilizer: g.elements().map(|x| x.to_string()).collect(),
                boundary: vec![],
                transforms: vec![],
                corners: vec![],
                depth: depth[id],
            }
        })
        .collect();
    let edges = b
        .edges
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let g = p.edge_group(e.ty);
            Cell {
                id,
                kind: format!("e{}", e.ty),
                group: p.labels.edge[e.ty].clone(),
                stabilizer_order: g.order(),
                stabilizer: g.elements().map(|x| x.to_string()).collect(),
                boundary: vec![e.ends[0].0, e.ends[1].0],
                transforms: vec![e.ends[0].1, e.ends[1].1],
                corners: vec![],
                depth: depth[e.ends[0].0].min(depth[e.ends[1].0]),
            }
        })
        .collect();
    let face_group = p.face_group();
    let faces = b
        .faces
        .iter()
        .enumerate()
        .map(|(id, f)| Cell {
            id,
            kind: "f".into(),
            group: p.labels.face.clone(),
            stabilizer_order: face_group.order(),
            stabilizer: elements(&face_group.elements().collect()),
            boundary: f.edges.iter().map(|&(e, _)| e).collect(),
            transforms: f.edges.iter().map(|&(_, r)| r).collect(),
            corners: f.corners.clone(),
            depth: f.corners.iter().map(|&(v, _)| depth[v]).min().unwrap_or(0),
        })
        .collect();
    DevelopmentBall { kind: "polygon".into(), radius, origin: 0, cells: vec![vertices, edges, faces] }
}

/// Checks orders, cell types, and that every face frame agrees with the
/// frames of its edges and corners modulo the face group: for a corner `t`,
/// an edge transform `u` and a face transform `r`, `t ≡ u·ι(r)`. This is
/// the nesting `g_F G_f g_F^{-1} ⊆ g_E G_e g_E^{-1} ⊆ g_V G_v g_V^{-1}`.
pub(super) fn verify(ball: &DevelopmentBall, p: &ConcretePolygon, report: &mut StabilizerReport) {
    let d = p.d;
    let t = Tables::new(p);
    let ty = |kind: &str| kind.get(1..).and_then(|s| s.parse::<usize>().ok()).unwrap_or(usize::MAX);
    for (dim, cells) in ball.cells.iter().enumerate() {
        for c in cells {
            report.checked += 1;
            let k = ty(&c.kind);
            let expected = match dim {
                0 if k < d => p.vertex_group(k).order(),
                1 if k < d => p.edge_group(k).order(),
                2 => p.face_group().order(),
                _ => usize::MAX,
            };
            if c.stabilizer_order != expected {
                report.mismatches.push(format!("dim {dim} cell {}: stabilizer order {} does not match {}", c.id, c.stabilizer_order, c.group));
            }
        }
    }
    let (vertices, edges) = (&ball.cells[0], ball.cells.get(1).map_or(&[][..], |c| &c[..]));
    for e in edges {
        let i = ty(&e.kind);
        report.checked += 1;
        let ok = i < d
            && e.boundary.len() == 2
            && vertices[e.boundary[0]].kind == format!("v{i}")
            && vertices[e.boundary[1]].kind == format!("v{}", (i + 1) % d);
        if !ok {
            report.mismatches.push(format!("edge {}: endpoints have the wrong types", e.id));
        }
    }
    for f in ball.cells.get(2).into_iter().flatten() {
        for j in 0..d {
            report.checked += 1;
            let (v, tv) = f.corners[j];
            let prev = (j + d - 1) % d;
            let (en, rn) = (&edges[f.boundary[j]], f.transforms[j]);
            let (ep, rp) = (&edges[f.boundary[prev]], f.transforms[prev]);
            let gv = p.vertex_group(j);
            let via_next = gv.mul(en.transforms[0], p.edge_vertex[j].0.apply(rn));
            let via_prev = gv.mul(ep.transforms[1], p.edge_vertex[prev].1.apply(rp));
            let ok = vertices[v].kind == format!("v{j}")
                && en.kind == format!("e{j}")
                && en.boundary[0] == v
                && ep.boundary[1] == v
                && t.face_at_vertex[j][via_next] == t.face_at_vertex[j][tv]
                && t.face_at_vertex[j][via_prev] == t.face_at_vertex[j][tv];
            if !ok {
                report.mismatches.push(format!("face {}: frames disagree at corner {v}", f.id));
            }
        }
    }
}

/// Faces around each vertex of the ball, for tests.
#[allow(dead_code)]
pub(super) fn faces_at(ball: &DevelopmentBall) -> Vec<BTreeSet<usize>> {
    let mut out = vec![BTreeSet::new(); ball.count(0)];
    for f in ball.cells.get(2).into_iter().flatten() {
        for &(v, _) in &f.corners {
            out[v].insert(f.id);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::*;
    use super::*;
    use crate::model::ConcreteFiniteGroup;

    fn hom(src: &Arc<ConcreteFiniteGroup>, tgt: &Arc<ConcreteFiniteGroup>, images: &[Elem]) -> Homomorphism {
        Homomorphism::from_generator_images(src.clone(), tgt.clone(), images).unwrap()
    }

    /// Square tiling: the right-angled Coxeter square.
    pub(crate) fn square_coxeter() -> ConcretePolygon {
        let z2 = Arc::new(ConcreteFiniteGroup::cyclic(2).unwrap());
        let one = Arc::new(ConcreteFiniteGroup::cyclic(1).unwrap());
        let v4 = Arc::new(ConcreteFiniteGroup::product(&z2, &z2).unwrap());
        let a = hom(&z2, &v4, &[2]);
        let b = hom(&z2, &v4, &[1]);
        let t = hom(&one, &z2, &[]);
        ConcretePolygon::new(vec![t; 4], vec![(a, b); 4], PolygonLabels::default()).unwrap()
    }

    fn trivial(d: usize) -> ConcretePolygon {
        let one = Arc::new(ConcreteFiniteGroup::cyclic(1).unwrap());
        let id = hom(&one, &one, &[]);
        ConcretePolygon::new(vec![id.clone(); d], vec![(id.clone(), id); d], PolygonLabels::default()).unwrap()
    }

    #[test]
    fn square_tiling_radius_one() {
        let p = square_coxeter();
        let ball = polygon_ball_concrete(&p, 1).unwrap();
        assert_eq!((ball.count(0), ball.count(1), ball.count(2)), (9, 12, 4));
        assert_eq!(ball.euler_characteristic(), 1);
        let r = verify_stabilizers(&ball, Expected::Polygon(&p));
        assert!(r.ok(), "{:?}", r.mismatches);
        assert_eq!(r.orders["dim0"], vec![4]);
        assert_eq!(r.orders["dim1"], vec![2]);
        assert_eq!(r.orders["dim2"], vec![1]);
    }

    #[test]
    fn square_tiling_radius_two_is_a_disc() {
        let p = square_coxeter();
        let ball = polygon_ball_concrete(&p, 2).unwrap();
        // a 4x4 block of squares without its corners
        assert_eq!((ball.count(0), ball.count(1), ball.count(2)), (21, 32, 12));
        assert!(verify_stabilizers(&ball, Expected::Polygon(&p)).ok());
        let ball = polygon_ball_concrete(&p, 3).unwrap();
        assert_eq!(ball.euler_characteristic(), 1);
        assert!(faces_at(&ball).iter().all(|f| f.len() <= 4));
    }

    #[test]
    fn trivial_polygon_is_one_face() {
        for radius in 0..=3 {
            let ball = polygon_ball_concrete(&trivial(5), radius).unwrap();
            if radius == 0 {
                assert_eq!(ball.count(0), 1);
            } else {
                assert_eq!((ball.count(0), ball.count(1), ball.count(2)), (5, 5, 1));
            }
        }
    }
}
