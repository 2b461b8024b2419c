//! Hypothesis ledgers and vanishing certificates.

use std::fmt::Write;

use serde::Serialize;

use super::{gluing_to_gog, BranchedSetup, DoubleSetup, GluingSetup, Pairing, Piece};
use crate::develop::{check_curvature_concrete, ConcretePolygon, PolygonLabels};
use crate::engine::{BoundResult, DerivationNode, Engine, EngineError, Invariant};
use crate::extnat::ExtNat;
use crate::facts::Family;
use crate::model::{GroupExpr, PolygonMaps, PolygonOfGroups};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    CatBound,
    VolumeVanishes,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Asserted,
    Failed,
}

/// One literal hypothesis with how it was settled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    /// Theorem item, e.g. `Thm 3.5(ii)`.
    pub id: String,
    pub statement: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub conclusion: Conclusion,
    /// Which chain of results was used.
    pub route: String,
    pub value: Option<ExtNat>,
    pub ledger: Vec<Hypothesis>,
    pub trace: Option<DerivationNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AppError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl Certificate {
    pub fn failed(&self) -> Vec<&Hypothesis> {
        self.ledger.iter().filter(|h| h.status == Status::Failed).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let conclusion = match self.conclusion {
            Conclusion::CatBound => "cat_am bound",
            Conclusion::VolumeVanishes => "simplicial volume vanishes",
            Conclusion::Inconclusive => "inconclusive",
        };
        let _ = writeln!(out, "conclusion: {conclusion}");
        let _ = writeln!(out, "route: {}", self.route);
        if let Some(v) = self.value {
            let _ = writeln!(out, "cat_am <= {v}");
        }
        let _ = writeln!(out, "hypotheses:");
        for h in &self.ledger {
            let status = match h.status {
                Status::Verified => "verified",
                Status::Asserted => "asserted",
                Status::Failed => "FAILED",
            };
            let _ = writeln!(out, "  [{status}] {}: {} ({})", h.id, h.statement, h.detail);
        }
        if let Some(t) = &self.trace {
            let _ = writeln!(out, "trace:");
            for line in t.render().lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
        out
    }
}

fn hyp(id: &str, statement: String, status: Status, detail: impl Into<String>) -> Hypothesis {
    Hypothesis { id: id.into(), statement, status, detail: detail.into() }
}

fn asserted(id: &str, statement: String, flag: bool) -> Hypothesis {
    if flag {
        hyp(id, statement, Status::Asserted, "asserted in the setup")
    } else {
        hyp(id, statement, Status::Failed, "not asserted")
    }
}

/// `bound ≤ limit`, checked against an engine result.
fn bounded(id: &str, statement: String, r: &BoundResult, limit: u32) -> Hypothesis {
    let ok = r.value <= ExtNat::Finite(limit);
    let detail = format!("engine bound {} via {} ({})", r.value, r.trace.rule, r.trace.cite);
    hyp(id, statement, if ok { Status::Verified } else { Status::Failed }, detail)
}

fn all_hold(ledger: &[Hypothesis]) -> bool {
    ledger.iter().all(|h| h.status != Status::Failed)
}

/// Thm 3.5 (i)–(iii) for a gluing, then vanishing via Thm 3.1 when the
/// result is closed, or via Lemma 3.2 / the "moreover" clause of Thm 3.5
/// otherwise.
pub fn certify_gluing(engine: &Engine<'_>, s: &GluingSetup) -> Result<Certificate, AppError> {
    let n = s.n;
    let am = Family::Amenable;
    let mut ledger = Vec::new();
    for p in &s.pairings {
        let (a, b) = (s.boundary(p.plus), s.boundary(p.minus));
        ledger.push(asserted(
            "Thm 3.5(i)",
            format!("{} is π1-injective in {} and {} is π1-injective in {}", a.name, s.pieces[p.plus.0].name, b.name, s.pieces[p.minus.0].name),
            a.pi1_injective && b.pi1_injective,
        ));
    }
    for p in &s.pairings {
        let a = s.boundary(p.plus);
        let r = engine.bound_gd(&a.pi1)?;
        ledger.push(bounded("Thm 3.5(ii)", format!("gd(π1({})) = gd({}) ≤ n − 2 = {}", a.name, a.pi1, n.saturating_sub(2)), &r, n.saturating_sub(2)));
    }
    for piece in &s.pieces {
        let r = engine.bound_cat(&piece.pi1, &am)?;
        ledger.push(bounded("Thm 3.5(iii)", format!("cat_am(π1({})) = cat_am({}) ≤ n − 1 = {}", piece.name, piece.pi1, n - 1), &r, n - 1));
    }
    let graph = gluing_to_gog(s);
    let trace = engine.graph_cat_candidates(&graph, &am)?.into_iter().next().expect("Cor 1.4(i) always applies");
    if !all_hold(&ledger) {
        return Ok(Certificate {
            conclusion: Conclusion::Inconclusive,
            route: "Thm 3.5 (hypotheses not established)".into(),
            value: None,
            ledger,
            trace: Some(trace),
        });
    }
    debug_assert!(trace.value <= ExtNat::Finite(n - 1));
    let value = Some(trace.value);
    if s.is_closed() {
        return Ok(Certificate {
            conclusion: Conclusion::VolumeVanishes,
            route: format!("Thm 3.5 via Cor 1.4(i), then Thm 3.1: cat_am(M) ≤ {} < {n} = dim M", trace.value),
            value,
            ledger,
            trace: Some(trace),
        });
    }
    // the glued manifold has boundary: two alternative hypothesis sets
    let mut lemma = Vec::new();
    for r in s.free_boundaries() {
        let b = s.boundary(r);
        lemma.push(asserted("Lemma 3.2(i)", format!("boundary component {} is π1-injective in M", b.name), b.pi1_injective));
        let g = engine.bound_gd(&b.pi1)?;
        lemma.push(bounded("Lemma 3.2(ii)", format!("gd(π1({})) ≤ n − 2 = {}", b.name, n - 2), &g, n.saturating_sub(2)));
    }
    lemma.push(hyp(
        "Lemma 3.2(iii)",
        format!("cat_am(π1(M)) ≤ n − 1 = {}", n - 1),
        Status::Verified,
        format!("established above with value {}", trace.value),
    ));
    let mut clause = Vec::new();
    for (j, piece) in s.pieces.iter().enumerate() {
        for (k, b) in piece.boundaries.iter().enumerate() {
            if s.pairings.iter().any(|p| p.plus == (j, k)) {
                continue; // checked by Thm 3.5(i)/(ii) already
            }
            clause.push(asserted("Thm 3.5 (moreover)", format!("{} is π1-injective in {}", b.name, piece.name), b.pi1_injective));
            let g = engine.bound_gd(&b.pi1)?;
            clause.push(bounded("Thm 3.5 (moreover)", format!("gd(π1({})) ≤ n − 2 = {}", b.name, n - 2), &g, n.saturating_sub(2)));
        }
    }
    let (extra, route) = if all_hold(&lemma) {
        (lemma, "Thm 3.5 via Cor 1.4(i), then Lemma 3.2")
    } else if all_hold(&clause) {
        (clause, "Thm 3.5 via Cor 1.4(i) with its 'moreover' clause")
    } else {
        ledger.extend(lemma);
        ledger.extend(clause);
        return Ok(Certificate {
            conclusion: Conclusion::CatBound,
            route: "Thm 3.5 via Cor 1.4(i); neither Lemma 3.2 nor the 'moreover' clause is established".into(),
            value,
            ledger,
            trace: Some(trace),
        });
    };
    ledger.extend(extra);
    Ok(Certificate { conclusion: Conclusion::VolumeVanishes, route: route.into(), value, ledger, trace: Some(trace) })
}

/// Space-level `cat_am` of a piece or boundary: the declared value or
/// the group-level bound, whichever is smaller.
fn space_cat(engine: &Engine<'_>, what: &str, pi1: &GroupExpr, declared: Option<ExtNat>) -> Result<DerivationNode, AppError> {
    let group = engine.bound_cat(pi1, &Family::Amenable)?;
    let via_group = DerivationNode::combine("space-le-group", format!("cat_am({what}) ≤ cat_am(π1({what})) = cat_am({pi1})"), vec![group.trace])
        .map_err(EngineError::from)?;
    Ok(match declared {
        Some(v) if v < via_group.value => DerivationNode::leaf("fact", format!("declared cat_am({what}) ≤ {v}"), v),
        _ => via_group,
    })
}

/// Prop 3.6: `max_j cat_am(M_j) + max_i (cat_am(S_i^+) + 1)`.
pub fn gluing_sum_bound(engine: &Engine<'_>, s: &GluingSetup) -> Result<BoundResult, AppError> {
    let pieces = s
        .pieces
        .iter()
        .map(|p| space_cat(engine, &p.name, &p.pi1, p.cat_am))
        .collect::<Result<Vec<_>, _>>()?;
    let mut boundaries = Vec::new();
    let mut assumptions = Vec::new();
    for p in &s.pairings {
        let b = s.boundary(p.plus);
        let c = space_cat(engine, &b.name, &b.pi1, b.cat_am)?;
        boundaries.push(DerivationNode::combine("sum", "cat + 1", vec![c, DerivationNode::constant(1, "one")]).map_err(EngineError::from)?);
        for r in [p.plus, p.minus] {
            if s.boundary(r).pi1_injective {
                assumptions.push(format!("{} π1-injective in {}: asserted", s.boundary(r).name, s.pieces[r.0].name));
            }
        }
    }
    let sup_p = DerivationNode::combine("sup", "max over pieces of cat_am(M_j)", pieces).map_err(EngineError::from)?;
    let sup_b = DerivationNode::combine("sup", "max over pairings of cat_am(S_i^+) + 1", boundaries).map_err(EngineError::from)?;
    let trace = DerivationNode::combine("gluing-sum", format!("Prop 3.6 on the gluing {}", s.name), vec![sup_p, sup_b])
        .map_err(EngineError::from)?
        .assuming(assumptions);
    Ok(BoundResult { invariant: Invariant::Cat, family: Some(Family::Amenable), value: trace.value, trace })
}

/// The gluing of `M` and `-M` along all boundary components.
pub fn double_to_gluing(s: &DoubleSetup) -> GluingSetup {
    let m = &s.manifold;
    let mut minus = m.clone();
    minus.name = format!("-{}", m.name);
    for b in &mut minus.boundaries {
        b.name = format!("-{}", b.name);
    }
    let pairings = (0..m.boundaries.len()).map(|i| Pairing { plus: (0, i), minus: (1, i) }).collect();
    GluingSetup { name: s.name.clone(), n: s.n, pieces: vec![m.clone(), minus], pairings, connected_asserted: true }
}

/// Cor 3.8 (max route) or Cor 3.9 (sum route), whichever succeeds.
pub fn certify_double(engine: &Engine<'_>, s: &DoubleSetup) -> Result<Certificate, AppError> {
    let g = double_to_gluing(s);
    let mut max_route = certify_gluing(engine, &g)?;
    if max_route.conclusion == Conclusion::VolumeVanishes {
        max_route.route = format!("Cor 3.8: {}", max_route.route);
        return Ok(max_route);
    }
    let sum_route = certify_double_sum(engine, s, &g)?;
    if sum_route.conclusion == Conclusion::VolumeVanishes {
        return Ok(sum_route);
    }
    // neither route: report every failed item of both
    let mut ledger = max_route.ledger;
    for h in sum_route.ledger {
        if !ledger.contains(&h) {
            ledger.push(h);
        }
    }
    Ok(Certificate {
        conclusion: Conclusion::Inconclusive,
        route: "neither Cor 3.8 nor Cor 3.9 is established".into(),
        value: None,
        ledger,
        trace: sum_route.trace,
    })
}

fn certify_double_sum(engine: &Engine<'_>, s: &DoubleSetup, g: &GluingSetup) -> Result<Certificate, AppError> {
    let n = s.n;
    let m: &Piece = &s.manifold;
    let mut ledger: Vec<Hypothesis> = m
        .boundaries
        .iter()
        .map(|b| asserted("Thm 3.5(i)", format!("boundary component {} is π1-injective in {}", b.name, m.name), b.pi1_injective))
        .collect();
    let bound = gluing_sum_bound(engine, g)?;
    let ok = bound.value < ExtNat::Finite(n);
    ledger.push(hyp(
        "Thm 3.1",
        format!("cat_am(D_f({})) ≤ cat_am(M) + max_i(cat_am(S_i) + 1) < n = {n}", m.name),
        if ok { Status::Verified } else { Status::Failed },
        format!("sum bound {}", bound.value),
    ));
    let conclusion = if all_hold(&ledger) { Conclusion::VolumeVanishes } else { Conclusion::Inconclusive };
    Ok(Certificate {
        conclusion,
        route: "Cor 3.9 via Prop 3.6, then Thm 3.1".into(),
        value: Some(bound.value),
        ledger,
        trace: Some(bound.trace),
    })
}

/// The `d`-gon of groups of a branched covering.
pub fn branched_polygon(s: &BranchedSetup, d: u32) -> PolygonOfGroups {
    let d = d as usize;
    let maps = match &s.maps {
        Some(m) => PolygonMaps::Concrete {
            face_edge: vec![m.dm_in_m.clone(); d],
            edge_vertex: vec![(m.neg_m_in_w.clone(), m.m_in_w.clone()); d],
        },
        None => PolygonMaps::Asserted,
    };
    PolygonOfGroups {
        name: format!("{}[d={d}]", s.name),
        d,
        vertex_groups: vec![s.w.clone(); d],
        edge_groups: vec![s.m.clone(); d],
        face_group: s.dm.clone(),
        maps,
        curvature_asserted: s.intersection_asserted,
    }
}

/// Thm 4.4 (i)–(v), Cor 4.3 on the `d`-gon of groups, then Thm 3.1.
pub fn certify_branched(engine: &Engine<'_>, s: &BranchedSetup, d: Option<u32>) -> Result<Certificate, AppError> {
    let n = s.n;
    let d = d.or(s.d).ok_or_else(|| AppError::Precondition("Thm 4.4 needs the number of sheets d (d ≥ 4)".into()))?;
    if d < 4 {
        return Err(AppError::Precondition(format!("Thm 4.4 requires d ≥ 4, got d = {d}")));
    }
    let am = Family::Amenable;
    let mut ledger = Vec::new();
    let statement = "M, −M and ∂M are π1-injective in W".to_string();
    ledger.push(match &s.maps {
        Some(_) => hyp("Thm 4.4(i)", statement, Status::Verified, "concrete inclusion maps are injective"),
        None => asserted("Thm 4.4(i)", statement, s.pi1_injective),
    });
    let statement = "π1(M) ∩ π1(−M) = π1(∂M) inside π1(W)".to_string();
    ledger.push(match &s.maps {
        Some(m) => {
            let fe = vec![m.dm_in_m.clone(); d as usize];
            let ev = vec![(m.neg_m_in_w.clone(), m.m_in_w.clone()); d as usize];
            match ConcretePolygon::new(fe, ev, PolygonLabels::default()) {
                Ok(p) => {
                    let r = check_curvature_concrete(&p);
                    match &r.witness {
                        None => hyp("Thm 4.4(ii)", statement, Status::Verified, "checked on concrete groups"),
                        Some((_, w)) => hyp("Thm 4.4(ii)", statement, Status::Failed, format!("intersection is {w:?}")),
                    }
                }
                Err(e) => hyp("Thm 4.4(ii)", statement, Status::Failed, e.to_string()),
            }
        }
        None => asserted("Thm 4.4(ii)", statement, s.intersection_asserted),
    });
    let r = engine.bound_gd(&s.dm)?;
    ledger.push(bounded("Thm 4.4(iii)", format!("gd(π1(∂M)) = gd({}) ≤ n − 3 = {}", s.dm, n - 3), &r, n - 3));
    let r = engine.bound_gd(&s.m)?;
    ledger.push(bounded("Thm 4.4(iv)", format!("gd(π1(M)) = gd({}) ≤ n − 2 = {}", s.m, n - 2), &r, n - 2));
    let r = engine.bound_cat(&s.w, &am)?;
    ledger.push(bounded("Thm 4.4(v)", format!("cat_am(π1(W)) = cat_am({}) ≤ n − 1 = {}", s.w, n - 1), &r, n - 1));
    let p = branched_polygon(s, d);
    let mut trace = engine.polygon_max(&p, &am)?;
    if s.maps.is_none() {
        trace = trace.assuming([format!("inclusion maps of {}: asserted", p.name)]);
    }
    if !all_hold(&ledger) {
        return Ok(Certificate {
            conclusion: Conclusion::Inconclusive,
            route: "Thm 4.4 (hypotheses not established)".into(),
            value: None,
            ledger,
            trace: Some(trace),
        });
    }
    debug_assert!(trace.value <= ExtNat::Finite(n - 1));
    Ok(Certificate {
        conclusion: Conclusion::VolumeVanishes,
        route: format!("Thm 4.4 via Cor 4.3, then Thm 3.1: cat_am ≤ {} < {n} = dim", trace.value),
        value: Some(trace.value),
        ledger,
        trace: Some(trace),
    })
}
