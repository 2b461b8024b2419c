//! Balls in Bass–Serre trees via reduced words.
//!
//! Oriented edge `y = 2e` runs from `from` to `to`, `y = 2e + 1` back.
//! `A_y` is the image of the edge group in the origin of `y`, and the
//! defining relation is `α_y(a) · y = y · α_ȳ(a)`. A vertex of the tree is
//! a reduced word `s1 y1 … sk yk` times its vertex group, where each `s_i`
//! is a transversal representative of `A_{y_i}` and `s_i = 1` never
//! follows `ȳ_i = y_{i-1}`.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{enumerate_cosets, Cell, ConcreteGraph, CosetTable, DevelopError, DevelopmentBall, StabilizerReport, RADIUS_LIMIT};
use crate::model::{ConcreteFiniteGroup, Elem, Homomorphism};

struct Oriented {
    origin: usize,
    terminus: usize,
    /// `α_y : G_e -> G_{o(y)}`.
    alpha: Homomorphism,
    label: String,
    cosets: CosetTable,
    /// Per element `c` of `G_{o(y)}`: `(s, a)` with `c = s · α_y(a)`.
    split: Vec<(Elem, Elem)>,
}

struct Tree<'a> {
    g: &'a ConcreteGraph,
    ys: Vec<Oriented>,
}

/// An element of the fundamental group in normal form:
/// `s1 y1 … sk yk · carry`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Word {
    letters: Vec<(Elem, usize)>,
    carry: Elem,
    at: usize,
}

impl<'a> Tree<'a> {
    fn new(g: &'a ConcreteGraph) -> Result<Self, DevelopError> {
        let mut ys = Vec::new();
        for e in &g.edges {
            for (origin, terminus, alpha, arrow) in
                [(e.from, e.to, &e.into_from, ">"), (e.to, e.from, &e.into_to, "<")]
            {
                let group = &g.vertices[origin].2;
                let cosets = enumerate_cosets(group, &alpha.image())?;
                let split = group
                    .elements()
                    .map(|c| {
                        let s = cosets.representative(c);
                        let a = alpha.preimage(group.mul(group.inverse(s), c)).expect("s^-1 c lies in A_y");
                        (s, a)
                    })
                    .collect();
                ys.push(Oriented {
                    origin,
                    terminus,
                    alpha: alpha.clone(),
                    label: format!("{}{arrow}", e.name),
                    cosets,
                    split,
                });
            }
        }
        Ok(Tree { g, ys })
    }

    fn group(&self, v: usize) -> &Arc<ConcreteFiniteGroup> {
        &self.g.vertices[v].2
    }

    fn start(&self, base: usize) -> Word {
        Word { letters: vec![], carry: self.group(base).identity(), at: base }
    }

    fn push_elem(&self, w: &mut Word, h: Elem) {
        w.carry = self.group(w.at).mul(w.carry, h);
    }

    fn push_edge(&self, w: &mut Word, y: usize) {
        let oy = &self.ys[y];
        debug_assert_eq!(oy.origin, w.at);
        let (s, a) = oy.split[w.carry];
        let backtrack = matches!(w.letters.last(), Some(&(_, last)) if last == y ^ 1);
        if backtrack && s == self.group(w.at).identity() {
            let (sm, ym) = w.letters.pop().unwrap();
            let om = &self.ys[ym];
            w.at = om.origin;
            w.carry = self.group(w.at).mul(sm, om.alpha.apply(a));
        } else {
            w.letters.push((s, y));
            w.at = oy.terminus;
            w.carry = self.ys[y ^ 1].alpha.apply(a);
        }
    }

    /// `P · h · P^{-1}` for a path word `P` ending where `h` lives.
    fn conjugate(&self, base: usize, path: &[(Elem, usize)], h: Elem) -> Word {
        let mut w = self.start(base);
        for &(s, y) in path {
            self.push_elem(&mut w, s);
            self.push_edge(&mut w, y);
        }
        self.push_elem(&mut w, h);
        for &(s, y) in path.iter().rev() {
            self.push_edge(&mut w, y ^ 1);
            let g = self.group(w.at);
            self.push_elem(&mut w, g.inverse(s));
        }
        debug_assert_eq!(w.at, base);
        w
    }

    fn render(&self, w: &Word) -> String {
        let mut s = String::new();
        for &(x, y) in &w.letters {
            s.push_str(&format!("{x} {} ", self.ys[y].label));
        }
        s.push_str(&format!("| {}", w.carry));
        s
    }
}

struct Node {
    path: Vec<(Elem, usize)>,
    vertex: usize,
    depth: usize,
}

/// The ball of the given radius around the base vertex `G_base`.
pub fn bass_serre_ball_concrete(g: &ConcreteGraph, base: usize, radius: usize) -> Result<DevelopmentBall, DevelopError> {
    if radius > RADIUS_LIMIT {
        return Err(DevelopError::RadiusLimit { radius, limit: RADIUS_LIMIT });
    }
    if base >= g.vertices.len() {
        return Err(DevelopError::Shape(format!("base vertex {base}")));
    }
    let tree = Tree::new(g)?;
    let mut nodes = vec![Node { path: vec![], vertex: base, depth: 0 }];
    let mut edges: Vec<(usize, usize, usize, Elem)> = Vec::new(); // (parent, child, y, s)
    let mut frontier = vec![0usize];
    for depth in 1..=radius {
        let mut next = Vec::new();
        for &n in &frontier {
            let (vertex, last) = (nodes[n].vertex, nodes[n].path.last().map(|&(_, y)| y));
            for (y, oy) in tree.ys.iter().enumerate().filter(|(_, oy)| oy.origin == vertex) {
                for coset in &oy.cosets.cosets {
                    let s = oy.cosets.representative(*coset.iter().next().unwrap());
                    if last == Some(y ^ 1) && s == tree.group(vertex).identity() {
                        continue;
                    }
                    let mut path = nodes[n].path.clone();
                    path.push((s, y));
                    edges.push((n, nodes.len(), y, s));
                    next.push(nodes.len());
                    nodes.push(Node { path, vertex: oy.terminus, depth });
                    if nodes.len() + edges.len() > super::CELL_LIMIT {
                        return Err(DevelopError::TooLarge);
                    }
                }
            }
        }
        frontier = next;
    }
    let vertex_cells = nodes
        .iter()
        .enumerate()
        .map(|(id, n)| {
            let gv = tree.group(n.vertex);
            let stab: BTreeSet<String> =
                gv.elements().map(|h| tree.render(&tree.conjugate(base, &n.path, h))).collect();
            Cell {
                id,
                kind: g.vertices[n.vertex].0.clone(),
                group: g.vertices[n.vertex].1.to_string(),
                stabilizer_order: stab.len(),
                stabilizer: stab.into_iter().collect(),
                boundary: vec![],
                transforms: vec![],
                corners: vec![],
                depth: n.depth,
            }
        })
        .collect();
    let edge_cells = edges
        .iter()
        .enumerate()
        .map(|(id, &(parent, child, y, s))| {
            let oy = &tree.ys[y];
            let gv = tree.group(oy.origin);
            let ge = oy.alpha.source();
            let stab: BTreeSet<String> = ge
                .elements()
                .map(|a| {
                    let h = gv.mul(gv.mul(s, oy.alpha.apply(a)), gv.inverse(s));
                    tree.render(&tree.conjugate(base, &nodes[parent].path, h))
                })
                .collect();
            let e = &g.edges[y / 2];
            Cell {
                id,
                kind: e.name.clone(),
                group: e.group.to_string(),
                stabilizer_order: stab.len(),
                stabilizer: stab.into_iter().collect(),
                boundary: vec![parent, child],
                transforms: vec![],
                corners: vec![],
                depth: nodes[parent].depth,
            }
        })
        .collect();
    let ball = DevelopmentBall { kind: "bass-serre".into(), radius, origin: 0, cells: vec![vertex_cells, edge_cells] };
    ball.check_size()?;
    Ok(ball)
}

pub(super) fn verify(ball: &DevelopmentBall, g: &ConcreteGraph, report: &mut StabilizerReport) {
    let order_of = |kind: &str, dim: usize| -> Option<usize> {
        if dim == 0 {
            g.vertices.iter().find(|v| v.0 == kind).map(|v| v.2.order())
        } else {
            g.edges.iter().find(|e| e.name == kind).map(|e| e.into_from.source().order())
        }
    };
    for (dim, cells) in ball.cells.iter().enumerate() {
        for c in cells {
            report.checked += 1;
            if order_of(&c.kind, dim) != Some(c.stabilizer_order) {
                report.mismatches.push(format!("dim {dim} cell {}: stabilizer order {} does not match {}", c.id, c.stabilizer_order, c.group));
            }
        }
    }
    for e in ball.cells.get(1).into_iter().flatten() {
        let [a, b] = e.boundary[..] else { continue };
        let sa: BTreeSet<&String> = ball.cells[0][a].stabilizer.iter().collect();
        let inter: BTreeSet<&String> = ball.cells[0][b].stabilizer.iter().filter(|x| sa.contains(x)).collect();
        let mine: BTreeSet<&String> = e.stabilizer.iter().collect();
        if inter != mine {
            report.mismatches.push(format!("edge {}: stabilizer differs from the intersection of its endpoint stabilizers", e.id));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::model::GroupExpr;

    fn amalgam(p: usize, q: usize, c: usize) -> ConcreteGraph {
        let gp = Arc::new(ConcreteFiniteGroup::cyclic(p).unwrap());
        let gq = Arc::new(ConcreteFiniteGroup::cyclic(q).unwrap());
        let gc = Arc::new(ConcreteFiniteGroup::cyclic(c).unwrap());
        let e = ConcreteEdge {
            name: "e".into(),
            group: GroupExpr::atom("C"),
            from: 0,
            to: 1,
            into_from: Homomorphism::canonical_cyclic(gc.clone(), gp.clone()).unwrap(),
            into_to: Homomorphism::canonical_cyclic(gc, gq.clone()).unwrap(),
        };
        let vs = vec![("a".into(), GroupExpr::atom("A"), gp), ("b".into(), GroupExpr::atom("B"), gq)];
        ConcreteGraph::new("G", vs, vec![e]).unwrap()
    }

    #[test]
    fn radius_one_star() {
        let g = amalgam(4, 6, 2);
        let ball = bass_serre_ball_concrete(&g, 0, 1).unwrap();
        assert_eq!(ball.count(0), 3);
        assert_eq!(ball.cells[0][0].stabilizer_order, 4);
        assert_eq!(ball.cells[0][1].stabilizer_order, 6);
        assert_eq!(ball.cells[1][0].stabilizer_order, 2);
        let r = verify_stabilizers(&ball, Expected::Graph(&g));
        assert!(r.ok(), "{:?}", r.mismatches);
    }

    #[test]
    fn free_product_of_order_two_groups_is_a_line() {
        let g = amalgam(2, 2, 1);
        let ball = bass_serre_ball_concrete(&g, 0, 2).unwrap();
        assert!(ball.degrees().iter().all(|&d| d <= 2));
        assert_eq!(ball.count(0), 5);
    }

    #[test]
    fn radius_zero_and_limit() {
        let g = amalgam(4, 6, 2);
        let ball = bass_serre_ball_concrete(&g, 0, 0).unwrap();
        assert_eq!(ball.count(0), 1);
        assert_eq!(ball.cells[0][0].stabilizer_order, 4);
        assert!(matches!(bass_serre_ball_concrete(&g, 0, 5), Err(DevelopError::RadiusLimit { .. })));
    }
}
