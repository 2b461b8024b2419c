//! Graphs of groups, polygons of groups and G-CW orbit descriptions.

use super::expr::GroupExpr;
use super::finite::Homomorphism;

/// The two edge-group monomorphisms of a graph-of-groups edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Injection {
    /// Trusted without a concrete model; recorded as an assumption.
    Asserted,
    Concrete { into_from: Homomorphism, into_to: Homomorphism },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub group: GroupExpr,
    pub injections: Injection,
}

impl GraphEdge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }
}

/// A finite connected graph of groups. Loops and multi-edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphOfGroups {
    pub name: String,
    pub vertices: Vec<(String, GroupExpr)>,
    pub edges: Vec<GraphEdge>,
}

impl GraphOfGroups {
    pub fn vertex_groups(&self) -> impl Iterator<Item = &GroupExpr> {
        self.vertices.iter().map(|(_, g)| g)
    }

    pub fn edge_groups(&self) -> impl Iterator<Item = &GroupExpr> {
        self.edges.iter().map(|e| &e.group)
    }

    /// Rank of the free quotient `|E| - |V| + 1` of a connected graph.
    pub fn first_betti_number(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.vertices.len())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let a = find(&mut parent, e.from);
            let b = find(&mut parent, e.to);
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == root)
    }

    /// The Bass–Serre tree as orbit data: vertices in dimension 0, edges in
    /// dimension 1.
    pub fn tree_description(&self) -> GcwDescription {
        GcwDescription {
            name: format!("tree({})", self.name),
            dims: vec![
                self.vertex_groups().cloned().collect(),
                self.edge_groups().cloned().collect(),
            ],
            contractible: true,
        }
    }

    pub fn asserted_injections(&self) -> Vec<String> {
        self.edges
            .iter()
            .filter(|e| e.injections == Injection::Asserted && e.group != GroupExpr::Trivial)
            .map(|e| format!("injections of edge {} in {}: asserted", e.name, self.name))
            .collect()
    }
}

/// Inclusion maps of a polygon of groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolygonMaps {
    Asserted,
    Concrete {
        /// `G_f -> G_{e_i}` for every edge `i`.
        face_edge: Vec<Homomorphism>,
        /// `(G_{e_i} -> G_{v_i}, G_{e_i} -> G_{v_{i+1}})`.
        edge_vertex: Vec<(Homomorphism, Homomorphism)>,
    },
}

/// A simple complex of groups over the face poset of a `d`-gon. Edge `i`
/// joins vertex `i` and vertex `i+1 mod d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolygonOfGroups {
    pub name: String,
    pub d: usize,
    pub vertex_groups: Vec<GroupExpr>,
    pub edge_groups: Vec<GroupExpr>,
    pub face_group: GroupExpr,
    pub maps: PolygonMaps,
    pub curvature_asserted: bool,
}

impl PolygonOfGroups {
    /// The two edges adjacent to vertex `v`: `(e_{v-1}, e_v)`.
    pub fn edges_at(&self, v: usize) -> (usize, usize) {
        ((v + self.d - 1) % self.d, v)
    }

    /// Orbit data of the geometric realisation of the development: one
    /// 0-cell per poset element, one 1-cell per strict chain of length two
    /// and one 2-cell per maximal chain.
    pub fn development_description(&self) -> GcwDescription {
        let d = self.d;
        let f = &self.face_group;
        let mut dim0: Vec<GroupExpr> = self.vertex_groups.clone();
        dim0.extend(self.edge_groups.iter().cloned());
        dim0.push(f.clone());
        let mut dim1 = Vec::new();
        for e in &self.edge_groups {
            dim1.push(e.clone());
            dim1.push(e.clone());
        }
        dim1.extend(std::iter::repeat_n(f.clone(), 2 * d));
        let dim2 = vec![f.clone(); 2 * d];
        GcwDescription {
            name: format!("development({})", self.name),
            dims: vec![dim0, dim1, dim2],
            contractible: true,
        }
    }
}

/// Orbit representatives of a G-CW-complex, recorded only through their
/// stabilizers, indexed by dimension `0..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcwDescription {
    pub name: String,
    pub dims: Vec<Vec<GroupExpr>>,
    pub contractible: bool,
}

impl GcwDescription {
    /// Top dimension `n`.
    pub fn top_dimension(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, &GroupExpr)> {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(i, cells)| cells.iter().map(move |g| (i, g)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(vertices: usize, edges: &[(usize, usize)]) -> GraphOfGroups {
        GraphOfGroups {
            name: "G".into(),
            vertices: (0..vertices).map(|i| (format!("v{i}"), GroupExpr::Trivial)).collect(),
            edges: edges
                .iter()
                .enumerate()
                .map(|(i, &(from, to))| GraphEdge {
                    name: format!("e{i}"),
                    from,
                    to,
                    group: GroupExpr::Trivial,
                    injections: Injection::Asserted,
                })
                .collect(),
        }
    }

    #[test]
    fn amalgam_and_hnn_shapes() {
        let amalgam = graph(2, &[(0, 1)]);
        assert!(amalgam.is_connected());
        assert_eq!(amalgam.first_betti_number(), 0);
        let hnn = graph(1, &[(0, 0)]);
        assert!(hnn.edges[0].is_loop());
        assert_eq!(hnn.first_betti_number(), 1);
        // both feed the same engine input shape
        assert_eq!(amalgam.tree_description().dims.len(), 2);
        assert_eq!(hnn.tree_description().dims.len(), 2);
    }

    #[test]
    fn disconnected_graph_detected() {
        assert!(!graph(3, &[(0, 1)]).is_connected());
        assert!(graph(3, &[(0, 1), (2, 1), (1, 1)]).is_connected());
    }

    #[test]
    fn development_cell_counts() {
        let p = PolygonOfGroups {
            name: "P".into(),
            d: 5,
            vertex_groups: vec![GroupExpr::atom("V"); 5],
            edge_groups: vec![GroupExpr::atom("E"); 5],
            face_group: GroupExpr::Trivial,
            maps: PolygonMaps::Asserted,
            curvature_asserted: true,
        };
        let dev = p.development_description();
        assert_eq!(dev.dims[0].len(), 11);
        assert_eq!(dev.dims[1].len(), 20);
        assert_eq!(dev.dims[2].len(), 10);
        assert_eq!(p.edges_at(0), (4, 0));
    }
}
