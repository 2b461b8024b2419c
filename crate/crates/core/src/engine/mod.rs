//! The bound calculator: every applicable rule is evaluated, the least value
//! wins, and the winner's derivation is returned as a trace.
//!
//! Candidates are tried in a fixed order and the *first* minimal one is
//! kept, so traces are deterministic.

pub mod recursion;
pub mod trace;

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use serde::Serialize;

use crate::develop::{self, DevelopError};
use crate::extnat::{ExtNat, Overflow};
use crate::facts::{membership, Family};
use crate::model::{GcwDescription, GraphOfGroups, GroupExpr, ModelError, PolygonMaps, PolygonOfGroups, Universe};

pub use recursion::{Level, SelectionSet};
pub use trace::{DerivationNode, ReplayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Invariant {
    Cat,
    Gd,
    Cd,
    Tc,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Cat => "cat",
            Invariant::Gd => "gd",
            Invariant::Cd => "cd",
            Invariant::Tc => "tc",
        })
    }
}

/// An upper bound with the derivation that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundResult {
    pub invariant: Invariant,
    pub family: Option<Family>,
    pub value: ExtNat,
    pub trace: DerivationNode,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

type Key = (GroupExpr, Option<Family>, Invariant);

/// A group presented as the fundamental group of a graph of groups; free
/// products become a path of trivial edge groups.
struct Tree {
    label: String,
    vertices: Vec<GroupExpr>,
    edges: Vec<GroupExpr>,
    assumptions: Vec<String>,
}

/// A contractible complex the group acts on, described by orbit data.
struct Complex {
    x: GcwDescription,
    assumptions: Vec<String>,
}

pub struct Engine<'u> {
    u: &'u Universe,
    memo: RwLock<HashMap<Key, DerivationNode>>,
}

fn leaf(rule: &str, cite: impl Into<String>, value: ExtNat) -> DerivationNode {
    DerivationNode::leaf(rule, cite, value)
}

fn node(rule: &str, cite: impl Into<String>, premises: Vec<DerivationNode>) -> Result<DerivationNode, EngineError> {
    Ok(DerivationNode::combine(rule, cite, premises)?)
}

/// `premise + k`; `k = 0` returns the premise unchanged.
fn plus(premise: DerivationNode, k: u32, what: &str) -> Result<DerivationNode, EngineError> {
    if k == 0 {
        return Ok(premise);
    }
    node("sum", what, vec![premise, DerivationNode::constant(k, &format!("the constant {k}"))])
}

/// First candidate with the least value.
fn best(candidates: Vec<DerivationNode>) -> DerivationNode {
    let mut it = candidates.into_iter();
    let mut win = it.next().expect("at least one candidate");
    for c in it {
        if c.value < win.value {
            win = c;
        }
    }
    win
}

fn product(a: &GroupExpr, b: &GroupExpr) -> GroupExpr {
    GroupExpr::DirectProduct(vec![a.clone(), b.clone()])
}

fn selection_cite(selection: &SelectionSet, n: usize) -> String {
    let all = selection.len() == n;
    let set: Vec<String> = selection.iter().map(|i| i.to_string()).collect();
    if all {
        format!("Thm 1.2 (Thm 2.7 with I = {{1..{n}}})")
    } else if selection.is_empty() {
        "Thm 1.3 (Thm 2.7 with I = ∅)".to_string()
    } else {
        format!("Thm 2.7 with I = {{{}}}", set.join(", "))
    }
}

impl<'u> Engine<'u> {
    pub fn new(u: &'u Universe) -> Self {
        Engine { u, memo: RwLock::new(HashMap::new()) }
    }

    pub fn universe(&self) -> &'u Universe {
        self.u
    }

    // ---- public queries -------------------------------------------------

    pub fn bound_cat(&self, g: &GroupExpr, f: &Family) -> Result<BoundResult, EngineError> {
        let g = self.u.resolve(g)?;
        self.check_family(f)?;
        let trace = self.cat(&g, f)?;
        Ok(BoundResult { invariant: Invariant::Cat, family: Some(f.clone()), value: trace.value, trace })
    }

    pub fn bound_gd(&self, g: &GroupExpr) -> Result<BoundResult, EngineError> {
        let g = self.u.resolve(g)?;
        let trace = self.gd(&g)?;
        Ok(BoundResult { invariant: Invariant::Gd, family: None, value: trace.value, trace })
    }

    /// `cd = cat_Tr`; the trace is the trivial-family category trace.
    pub fn bound_cd(&self, g: &GroupExpr) -> Result<BoundResult, EngineError> {
        let g = self.u.resolve(g)?;
        let trace = self.cat(&g, &Family::Trivial)?;
        Ok(BoundResult { invariant: Invariant::Cd, family: None, value: trace.value, trace })
    }

    pub fn bound_tc(&self, g: &GroupExpr) -> Result<BoundResult, EngineError> {
        let g = self.u.resolve(g)?;
        let trace = self.tc(&g)?;
        Ok(BoundResult { invariant: Invariant::Tc, family: None, value: trace.value, trace })
    }

    /// Per-dimension stabilizer bounds of `x` for the family `f`.
    pub fn levels(&self, x: &GcwDescription, f: &Family) -> Result<Vec<Level>, EngineError> {
        self.check_family(f)?;
        x.dims
            .iter()
            .map(|cells| {
                let mut level = Level::default();
                for g in cells {
                    let g = self.u.resolve(g)?;
                    level.cat.push(self.cat(&g, f)?.value);
                    level.gd.push(self.gd(&g)?.value);
                }
                Ok(level)
            })
            .collect()
    }

    /// `d_n` of the recursion for the selection set `selection`.
    pub fn eval_recursion(&self, x: &GcwDescription, f: &Family, selection: &SelectionSet) -> Result<ExtNat, EngineError> {
        Ok(recursion::evaluate(&self.levels(x, f)?, selection)?)
    }

    /// Greedy per-dimension choice of the selection set.
    pub fn optimize_selection(&self, x: &GcwDescription, f: &Family) -> Result<(SelectionSet, ExtNat), EngineError> {
        Ok(recursion::optimize(&self.levels(x, f)?)?)
    }

    /// The recursion for a given selection set, as a derivation.
    pub fn recursion_trace(&self, x: &GcwDescription, f: &Family, selection: &SelectionSet) -> Result<DerivationNode, EngineError> {
        let n = x.top_dimension();
        let zero = x.dims.first().map_or(&[][..], |c| &c[..]);
        let mut d = self.sup_cat(zero, f, "d_0 = sup over 0-cells of cat")?;
        for (i, cells) in x.dims.iter().enumerate().skip(1) {
            d = if selection.contains(&i) {
                let terms = cells
                    .iter()
                    .map(|g| plus(self.gd(&self.u.resolve(g)?)?, i as u32, "gd + dim"))
                    .collect::<Result<Vec<_>, _>>()?;
                let sup = node("sup", format!("sup over {i}-cells of gd + {i}"), terms)?;
                node("max-arm", format!("d_{i} = max(d_{}, sup(gd + {i}))", i - 1), vec![d, sup])?
            } else {
                let terms = cells
                    .iter()
                    .map(|g| plus(self.cat(&self.u.resolve(g)?, f)?, 1, "cat + 1"))
                    .collect::<Result<Vec<_>, _>>()?;
                let sup = node("sup", format!("sup over {i}-cells of cat + 1"), terms)?;
                node("sum-arm", format!("d_{i} = d_{} + sup(cat + 1)", i - 1), vec![d, sup])?
            };
        }
        let mut root = node("selection", format!("{} on {}", selection_cite(selection, n), x.name), vec![d])?;
        if !x.contractible {
            root = root.assuming([format!("{} contractible: not asserted", x.name)]);
        }
        Ok(root)
    }

    // ---- candidate lists ------------------------------------------------

    /// Every applicable `cat_F` rule instance for `e`, in preference order.
    pub fn cat_candidates(&self, e: &GroupExpr, f: &Family) -> Result<Vec<DerivationNode>, EngineError> {
        let u = self.u;
        let m = membership(u, e, f)?;
        if m.value.is_yes() {
            return Ok(vec![leaf("member", format!("R0: cat_{f} = 0 for members of {f} ({})", m.reason), ExtNat::ZERO)]);
        }
        let mut out = Vec::new();
        if let GroupExpr::Atom(n) = e {
            let a = u.atom(n)?;
            let declared = a.sheet.cat_for(f);
            if declared.is_finite() {
                let cite = format!("declared cat_{f}({n}) ≤ {declared}: {}", a.sheet.provenance_of(&format!("cat[{f}]")));
                out.push(leaf("fact", cite, declared));
            }
            if *f == Family::Trivial && a.sheet.cd_ub.is_finite() {
                let cd = leaf("fact", format!("declared cd({n}) ≤ {}: {}", a.sheet.cd_ub, a.sheet.provenance_of("cd")), a.sheet.cd_ub);
                out.push(node("cat-tr-eq-cd", "cat_tr = cd (Eilenberg–Ganea)", vec![cd])?);
            }
            if let Some(d) = &a.definition {
                out.push(node("definition", format!("{n} = {d}"), vec![self.cat(d, f)?])?);
            }
        }
        if let Some(t) = self.tree(e)? {
            out.extend(self.tree_cat_candidates(&t, f)?);
        }
        if let Some(c) = self.complex(e)? {
            let (selection, value) = recursion::optimize(&self.levels(&c.x, f)?)?;
            let trace = self.recursion_trace(&c.x, f, &selection)?.assuming(c.assumptions.clone());
            debug_assert_eq!(trace.value, value);
            out.push(trace);
        }
        if let Some((p, assumptions)) = self.polygon(e)? {
            out.push(self.polygon_max(p, f)?.assuming(assumptions));
        }
        if let GroupExpr::DirectProduct(xs) = e {
            if f.closed_under_products() {
                let parts = xs.iter().map(|x| self.cat(x, f)).collect::<Result<Vec<_>, _>>()?;
                out.push(node("product-sum", format!("cat_{f}(G × H) ≤ cat_{f}(G) + cat_{f}(H) ({f} is closed under products)"), parts)?);
            }
        }
        out.push(node("cat-le-gd", format!("cat_{f} ≤ cat_tr = cd ≤ gd"), vec![self.gd(e)?])?);
        let wider = match f {
            Family::Amenable => Some(Family::Finite),
            Family::Finite => Some(Family::Trivial),
            Family::Trivial => None,
            Family::Custom(n) => u.families.get(n).and_then(|c| c.contains.clone()),
        };
        if let Some(w) = wider {
            out.push(node("family-inclusion", format!("{w} ⊆ {f}, so cat_{f} ≤ cat_{w}"), vec![self.cat(e, &w)?])?);
        }
        Ok(out)
    }

    /// Cor 1.4 (both arms) and R1 on a graph of groups that need not be
    /// declared in the universe.
    pub fn graph_cat_candidates(&self, g: &GraphOfGroups, f: &Family) -> Result<Vec<DerivationNode>, EngineError> {
        self.check_family(f)?;
        self.tree_cat_candidates(&self.tree_of_graph(g)?, f)
    }

    fn tree_cat_candidates(&self, t: &Tree, f: &Family) -> Result<Vec<DerivationNode>, EngineError> {
        let mut out = Vec::new();
        let vertex_cats = self.sup_cat(&t.vertices, f, "sup over vertex groups of cat")?;
        let edge_gd = t
            .edges
            .iter()
            .map(|g| plus(self.gd(g)?, 1, "gd + 1"))
            .collect::<Result<Vec<_>, _>>()?;
        let edge_gd = node("sup", "sup over edge groups of gd + 1", edge_gd)?;
        out.push(node("gog-max", format!("Cor 1.4(i) on {}", t.label), vec![vertex_cats.clone(), edge_gd])?.assuming(t.assumptions.clone()));
        let edge_cat = t
            .edges
            .iter()
            .map(|g| plus(self.cat(g, f)?, 1, "cat + 1"))
            .collect::<Result<Vec<_>, _>>()?;
        let edge_cat = node("sup", "sup over edge groups of cat + 1", edge_cat)?;
        out.push(node("gog-sum", format!("Cor 1.4(ii) on {}", t.label), vec![vertex_cats, edge_cat])?.assuming(t.assumptions.clone()));
        let members = t
            .vertices
            .iter()
            .map(|g| membership(self.u, g, f).map(|m| (g, m)))
            .collect::<Result<Vec<_>, _>>()?;
        if members.iter().all(|(_, m)| m.value.is_yes()) {
            let leaves = members
                .into_iter()
                .map(|(g, m)| leaf("member", format!("{g} ∈ {f} ({})", m.reason), ExtNat::ZERO))
                .collect();
            out.push(node("vertex-members", format!("R1: all vertex groups of {} lie in {f}", t.label), leaves)?.assuming(t.assumptions.clone()));
        }
        Ok(out)
    }

    /// Cor 4.3 on a polygon of groups; applicability (`d ≥ 4`, curvature)
    /// is the caller's responsibility.
    pub fn polygon_max(&self, p: &PolygonOfGroups, f: &Family) -> Result<DerivationNode, EngineError> {
        self.check_family(f)?;
        let vertex_cats = self.sup_cat(&p.vertex_groups, f, "sup over vertex groups of cat")?;
        let edges = p
            .edge_groups
            .iter()
            .map(|g| plus(self.gd(&self.u.resolve(g)?)?, 1, "gd + 1"))
            .collect::<Result<Vec<_>, _>>()?;
        let edges = node("sup", "sup over edge groups of gd + 1", edges)?;
        let face = plus(self.gd(&self.u.resolve(&p.face_group)?)?, 2, "gd + 2")?;
        node("polygon-max", format!("Cor 4.3 on the {}-gon of groups {}", p.d, p.name), vec![vertex_cats, edges, face])
    }

    pub fn gd_candidates(&self, e: &GroupExpr) -> Result<Vec<DerivationNode>, EngineError> {
        let u = self.u;
        let m = membership(u, e, &Family::Trivial)?;
        if m.value.is_yes() {
            return Ok(vec![leaf("trivial", format!("gd of the trivial group is 0 ({})", m.reason), ExtNat::ZERO)]);
        }
        let mut out = Vec::new();
        if let GroupExpr::Atom(n) = e {
            let a = u.atom(n)?;
            if a.sheet.gd_ub.is_finite() || a.sheet.provenance.contains_key("gd") {
                out.push(leaf("fact", format!("declared gd({n}) ≤ {}: {}", a.sheet.gd_ub, a.sheet.provenance_of("gd")), a.sheet.gd_ub));
            }
            if let Some(d) = &a.definition {
                out.push(node("definition", format!("{n} = {d}"), vec![self.gd(d)?])?);
            }
        }
        if let Some(t) = self.tree(e)? {
            let mut terms = t.vertices.iter().map(|g| self.gd(g)).collect::<Result<Vec<_>, _>>()?;
            for g in &t.edges {
                terms.push(plus(self.gd(g)?, 1, "gd + dim")?);
            }
            out.push(node("gd-combination", format!("Thm 1.1 on the Bass–Serre tree of {}", t.label), terms)?.assuming(t.assumptions));
        }
        let complex = self.complex(e)?.or(self.polygon(e)?.map(|(p, assumptions)| Complex { x: p.development_description(), assumptions }));
        if let Some(c) = complex {
            let mut terms = Vec::new();
            for (dim, g) in c.x.cells() {
                terms.push(plus(self.gd(&u.resolve(g)?)?, dim as u32, "gd + dim")?);
            }
            out.push(node("gd-combination", format!("Thm 1.1 on {}", c.x.name), terms)?.assuming(c.assumptions));
        }
        if let GroupExpr::DirectProduct(xs) = e {
            let parts = xs.iter().map(|x| self.gd(x)).collect::<Result<Vec<_>, _>>()?;
            out.push(node("product-sum", "gd(G × H) ≤ gd(G) + gd(H) (product of models)", parts)?);
        }
        if out.is_empty() {
            out.push(leaf("no-bound", format!("no rule bounds gd({e})"), ExtNat::Infinity));
        }
        Ok(out)
    }

    pub fn tc_candidates(&self, e: &GroupExpr) -> Result<Vec<DerivationNode>, EngineError> {
        let u = self.u;
        let m = membership(u, e, &Family::Trivial)?;
        if m.value.is_yes() {
            return Ok(vec![leaf("trivial", format!("TC of the trivial group is 0: G × G lies in the diagonal family ({})", m.reason), ExtNat::ZERO)]);
        }
        let mut out = Vec::new();
        if let GroupExpr::Atom(n) = e {
            let a = u.atom(n)?;
            if a.sheet.tc_ub.is_finite() {
                out.push(leaf("fact", format!("declared TC({n}) ≤ {}: {}", a.sheet.tc_ub, a.sheet.provenance_of("tc")), a.sheet.tc_ub));
            }
            if let Some(d) = &a.definition {
                out.push(node("definition", format!("{n} = {d}"), vec![self.tc(d)?])?);
            }
        }
        if let Some(t) = self.tree(e)? {
            let tcs = t.vertices.iter().map(|g| self.tc(g)).collect::<Result<Vec<_>, _>>()?;
            let mut cds = Vec::new();
            for i in 0..t.vertices.len() {
                for j in i + 1..t.vertices.len() {
                    cds.push(self.cat(&product(&t.vertices[i], &t.vertices[j]), &Family::Trivial)?);
                }
            }
            let mut ve = Vec::new();
            for v in &t.vertices {
                for g in &t.edges {
                    ve.push(plus(self.gd(&product(v, g))?, 1, "gd + 1")?);
                }
            }
            let mut ee = Vec::new();
            for i in 0..t.edges.len() {
                for j in i..t.edges.len() {
                    ee.push(plus(self.gd(&product(&t.edges[i], &t.edges[j]))?, 2, "gd + 2")?);
                }
            }
            let terms = vec![
                node("sup", "sup over vertices of TC(G_v)", tcs)?,
                node("sup", "sup over distinct vertices of cd(G_v × G_w)", cds)?,
                node("sup", "sup over vertices and edges of gd(G_v × G_e) + 1", ve)?,
                node("sup", "sup over pairs of edges of gd(G_e × G_d) + 2", ee)?,
            ];
            out.push(node("tc-combination", format!("Cor 5.3 (Thm 5.2 on the Bass–Serre tree of {})", t.label), terms)?.assuming(t.assumptions));
        }
        let complex = self.complex(e)?.or(self.polygon(e)?.map(|(p, assumptions)| Complex { x: p.development_description(), assumptions }));
        if let Some(c) = complex {
            let zero: Vec<GroupExpr> = c.x.dims[0].iter().map(|g| u.resolve(g)).collect::<Result<_, _>>()?;
            let tcs = zero.iter().map(|g| self.tc(g)).collect::<Result<Vec<_>, _>>()?;
            let mut cds = Vec::new();
            for i in 0..zero.len() {
                for j in i + 1..zero.len() {
                    cds.push(self.cat(&product(&zero[i], &zero[j]), &Family::Trivial)?);
                }
            }
            let cells: Vec<(usize, GroupExpr)> = c.x.cells().map(|(d, g)| Ok((d, u.resolve(g)?))).collect::<Result<_, ModelError>>()?;
            let mut mixed = Vec::new();
            for (ds, s) in &cells {
                for (dt, t) in cells.iter().filter(|(d, _)| *d > 0) {
                    mixed.push(plus(self.gd(&product(s, t))?, (ds + dt) as u32, "gd + dim σ + dim τ")?);
                }
            }
            let terms = vec![
                node("sup", "sup over 0-cells of TC(G_v)", tcs)?,
                node("sup", "sup over distinct 0-cells of cd(G_v × G_w)", cds)?,
                node("sup", "sup over cells σ and positive-dimensional τ of gd(G_σ × G_τ) + dim σ + dim τ", mixed)?,
            ];
            out.push(node("tc-combination", format!("Thm 5.2 on {}", c.x.name), terms)?.assuming(c.assumptions));
        }
        if let GroupExpr::DirectProduct(xs) = e {
            let parts = xs.iter().map(|x| self.tc(x)).collect::<Result<Vec<_>, _>>()?;
            out.push(node("product-sum", "TC(G × H) ≤ TC(G) + TC(H)", parts)?);
        }
        out.push(node("tc-le-cd-square", "TC(G) ≤ cd(G × G)", vec![self.cat(&product(e, e), &Family::Trivial)?])?);
        Ok(out)
    }

    // ---- memoised evaluation --------------------------------------------

    fn memoised(
        &self,
        key: Key,
        compute: impl FnOnce() -> Result<Vec<DerivationNode>, EngineError>,
    ) -> Result<DerivationNode, EngineError> {
        if let Some(n) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(n.clone());
        }
        let n = best(compute()?);
        self.memo.write().expect("memo lock").insert(key, n.clone());
        Ok(n)
    }

    fn cat(&self, e: &GroupExpr, f: &Family) -> Result<DerivationNode, EngineError> {
        self.memoised((e.clone(), Some(f.clone()), Invariant::Cat), || self.cat_candidates(e, f))
    }

    fn gd(&self, e: &GroupExpr) -> Result<DerivationNode, EngineError> {
        self.memoised((e.clone(), None, Invariant::Gd), || self.gd_candidates(e))
    }

    fn tc(&self, e: &GroupExpr) -> Result<DerivationNode, EngineError> {
        self.memoised((e.clone(), None, Invariant::Tc), || self.tc_candidates(e))
    }

    fn sup_cat(&self, groups: &[GroupExpr], f: &Family, cite: &str) -> Result<DerivationNode, EngineError> {
        let terms = groups
            .iter()
            .map(|g| self.cat(&self.u.resolve(g)?, f))
            .collect::<Result<Vec<_>, _>>()?;
        node("sup", cite, terms)
    }

    fn check_family(&self, f: &Family) -> Result<(), EngineError> {
        match f {
            Family::Custom(n) if !self.u.families.contains_key(n) => Err(ModelError::UnknownFamily(n.clone()).into()),
            _ => Ok(()),
        }
    }

    // ---- structure recognition ------------------------------------------

    fn tree(&self, e: &GroupExpr) -> Result<Option<Tree>, EngineError> {
        Ok(match e {
            GroupExpr::GraphOfGroupsRef(n) => Some(self.tree_of_graph(self.u.graph(n)?)?),
            GroupExpr::FreeProduct(xs) if !xs.is_empty() => Some(Tree {
                label: format!("{e} (trivial edge groups)"),
                vertices: xs.clone(),
                edges: vec![GroupExpr::Trivial; xs.len() - 1],
                assumptions: vec![],
            }),
            _ => None,
        })
    }

    fn tree_of_graph(&self, g: &GraphOfGroups) -> Result<Tree, EngineError> {
        Ok(Tree {
            label: format!("the graph of groups {}", g.name),
            vertices: g.vertex_groups().map(|v| self.u.resolve(v)).collect::<Result<_, _>>()?,
            edges: g.edge_groups().map(|v| self.u.resolve(v)).collect::<Result<_, _>>()?,
            assumptions: g.asserted_injections(),
        })
    }

    /// A G-CW description with contractibility asserted.
    fn complex(&self, e: &GroupExpr) -> Result<Option<Complex>, EngineError> {
        let GroupExpr::GcwRef(n) = e else { return Ok(None) };
        let x = self.u.gcw(n)?;
        if !x.contractible {
            return Ok(None);
        }
        Ok(Some(Complex { x: x.clone(), assumptions: vec![format!("{n} contractible: asserted")] }))
    }

    /// A polygon of groups with `d ≥ 4` whose curvature condition is
    /// verified on concrete groups or asserted.
    fn polygon(&self, e: &GroupExpr) -> Result<Option<(&'u PolygonOfGroups, Vec<String>)>, EngineError> {
        let GroupExpr::PolygonRef(n) = e else { return Ok(None) };
        let p = self.u.polygon(n)?;
        if p.d < 4 {
            return Ok(None);
        }
        let mut assumptions = Vec::new();
        if p.maps == PolygonMaps::Asserted {
            assumptions.push(format!("inclusion maps of {n}: asserted"));
        }
        match develop::check_curvature(self.u, p) {
            Ok(r) if r.holds => {}
            Ok(_) => return Ok(None),
            Err(DevelopError::NotConcrete(_)) if p.curvature_asserted => {
                assumptions.push(format!("curvature condition of {n}: asserted"));
            }
            Err(_) => return Ok(None),
        }
        Ok(Some((p, assumptions)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl;

    fn universe(text: &str) -> Universe {
        Universe::with_prelude(&dsl::parse("t.catb", text).unwrap()).unwrap()
    }

    fn expr(s: &str) -> GroupExpr {
        dsl::parse_expr(s).unwrap()
    }

    #[test]
    fn free_group_of_rank_two() {
        let u = universe("");
        let e = Engine::new(&u);
        let r = e.bound_cat(&expr("Z * Z"), &Family::Trivial).unwrap();
        assert_eq!(r.value, ExtNat::ONE);
        assert_eq!(r.trace.replay(), Ok(ExtNat::ONE));
        assert_eq!(e.bound_gd(&expr("Z * Z")).unwrap().value, ExtNat::ONE);
        assert_eq!(e.bound_gd(&expr("Z2")).unwrap().value, ExtNat::Infinity);
        assert_eq!(e.bound_gd(&expr("Trivial")).unwrap().value, ExtNat::ZERO);
    }

    #[test]
    fn finite_amalgam_uses_the_sum_arm() {
        let u = universe("amalgam G = Z4 *[Z2] Z6");
        let e = Engine::new(&u);
        let r = e.bound_cat(&expr("G"), &Family::Finite).unwrap();
        assert_eq!(r.value, ExtNat::ONE);
        assert_eq!(r.trace.rule, "gog-sum");
        let x = u.graph("G").unwrap().tree_description();
        assert_eq!(e.eval_recursion(&x, &Family::Finite, &SelectionSet::from([1])), Ok(ExtNat::Infinity));
        assert_eq!(e.eval_recursion(&x, &Family::Finite, &SelectionSet::new()), Ok(ExtNat::ONE));
        assert_eq!(e.optimize_selection(&x, &Family::Finite), Ok((SelectionSet::new(), ExtNat::ONE)));
    }

    #[test]
    fn tc_of_free_group() {
        let u = universe("");
        let e = Engine::new(&u);
        let r = e.bound_tc(&expr("Z * Z")).unwrap();
        assert_eq!(r.value, ExtNat::Finite(2));
        assert!(r.trace.cite.contains("Thm 5.2"));
        assert_eq!(e.bound_tc(&expr("Z2 * Z3")).unwrap().value, ExtNat::Infinity);
        assert_eq!(e.bound_tc(&expr("Trivial")).unwrap().value, ExtNat::ZERO);
    }
}
