//! Name resolution and validation: turns parsed declarations into an
//! immutable, acyclic universe of groups, complexes and setups.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::complexes::{GcwDescription, GraphEdge, GraphOfGroups, Injection, PolygonMaps, PolygonOfGroups};
use super::expr::GroupExpr;
use super::finite::{ConcreteFiniteGroup, Elem, Homomorphism};
use crate::apps::{Boundary, BranchedMaps, BranchedSetup, DoubleSetup, GluingSetup, Pairing, Piece};
use crate::dsl::{self, ConcreteSpec, Decl, Diagnostic, FactKind, Namespace, SourceModel, Span};
use crate::extnat::ExtNat;
use crate::facts::{membership, CustomFamily, FactSheet, Family, Tri};

/// A named group with declared facts and optional definition or concrete model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub sheet: FactSheet,
    pub definition: Option<GroupExpr>,
    pub concrete: Option<Arc<ConcreteFiniteGroup>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedHom {
    pub source: String,
    pub target: String,
    pub map: Homomorphism,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unresolved reference `{0}`")]
    Unresolved(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("unknown setup `{0}`")]
    UnknownSetup(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GroupKind {
    Atom,
    Graph,
    Polygon,
    Gcw,
}

/// Everything declared in the prelude and the user file, resolved.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    pub atoms: BTreeMap<String, Atom>,
    pub families: BTreeMap<String, CustomFamily>,
    pub graphs: BTreeMap<String, GraphOfGroups>,
    pub polygons: BTreeMap<String, PolygonOfGroups>,
    pub gcws: BTreeMap<String, GcwDescription>,
    pub homs: BTreeMap<String, NamedHom>,
    pub gluings: BTreeMap<String, GluingSetup>,
    pub doubles: BTreeMap<String, DoubleSetup>,
    pub brancheds: BTreeMap<String, BranchedSetup>,
}

/// The bundled prelude, parsed.
pub fn prelude_model() -> SourceModel {
    dsl::parse("<prelude>", dsl::PRELUDE).expect("bundled prelude parses")
}

impl Universe {
    /// Loads `user` on top of an optional prelude.
    pub fn load(prelude: Option<&SourceModel>, user: &SourceModel) -> Result<Universe, Vec<Diagnostic>> {
        let mut loader = Loader::default();
        let mut entries: Vec<(&Decl, &str, Span)> = Vec::new();
        for m in prelude.into_iter().chain(std::iter::once(user)) {
            for (d, s) in m.iter() {
                entries.push((d, &m.file, s));
            }
        }
        loader.run(&entries);
        if loader.diags.is_empty() {
            Ok(loader.u)
        } else {
            Err(loader.diags)
        }
    }

    /// Loads a user file on top of the bundled prelude.
    pub fn with_prelude(user: &SourceModel) -> Result<Universe, Vec<Diagnostic>> {
        Universe::load(Some(&prelude_model()), user)
    }

    fn kind(&self, name: &str) -> Option<GroupKind> {
        if self.atoms.contains_key(name) {
            Some(GroupKind::Atom)
        } else if self.graphs.contains_key(name) {
            Some(GroupKind::Graph)
        } else if self.polygons.contains_key(name) {
            Some(GroupKind::Polygon)
        } else if self.gcws.contains_key(name) {
            Some(GroupKind::Gcw)
        } else {
            None
        }
    }

    /// Rewrites bare names into the matching reference variants.
    pub fn resolve(&self, e: &GroupExpr) -> Result<GroupExpr, ModelError> {
        e.map_refs(&mut |n| match self.kind(n) {
            Some(k) => Ok(make_ref(k, n)),
            None => Err(ModelError::Unresolved(n.to_string())),
        })
    }

    pub fn atom(&self, name: &str) -> Result<&Atom, ModelError> {
        self.atoms.get(name).ok_or_else(|| ModelError::Unresolved(name.to_string()))
    }

    pub fn graph(&self, name: &str) -> Result<&GraphOfGroups, ModelError> {
        self.graphs.get(name).ok_or_else(|| ModelError::Unresolved(name.to_string()))
    }

    pub fn polygon(&self, name: &str) -> Result<&PolygonOfGroups, ModelError> {
        self.polygons.get(name).ok_or_else(|| ModelError::Unresolved(name.to_string()))
    }

    pub fn gcw(&self, name: &str) -> Result<&GcwDescription, ModelError> {
        self.gcws.get(name).ok_or_else(|| ModelError::Unresolved(name.to_string()))
    }

    /// Parses a family name against built-ins and declared custom families.
    pub fn family(&self, name: &str) -> Result<Family, ModelError> {
        if let Some(f) = Family::builtin(name) {
            return Ok(f);
        }
        if self.families.contains_key(name) {
            Ok(Family::Custom(name.to_string()))
        } else {
            Err(ModelError::UnknownFamily(name.to_string()))
        }
    }

    /// The concrete finite group modelling `e`, if one is declared.
    pub fn concrete_of(&self, e: &GroupExpr) -> Option<Arc<ConcreteFiniteGroup>> {
        match e {
            GroupExpr::Trivial => Some(Arc::new(ConcreteFiniteGroup::cyclic(1).ok()?)),
            GroupExpr::Atom(n) => {
                let a = self.atoms.get(n)?;
                if let Some(c) = &a.concrete {
                    return Some(Arc::clone(c));
                }
                if a.sheet.trivial {
                    return Some(Arc::new(ConcreteFiniteGroup::cyclic(1).ok()?));
                }
                a.definition.as_ref().and_then(|d| self.concrete_of(d))
            }
            GroupExpr::DirectProduct(xs) => {
                let mut acc = ConcreteFiniteGroup::cyclic(1).ok()?;
                for x in xs {
                    acc = ConcreteFiniteGroup::product(&acc, self.concrete_of(x)?.as_ref()).ok()?;
                }
                Some(Arc::new(acc))
            }
            _ => None,
        }
    }

    /// Known group order, through declarations and finite direct products.
    pub fn known_order(&self, e: &GroupExpr) -> Option<u64> {
        match e {
            GroupExpr::Trivial => Some(1),
            GroupExpr::Atom(n) => {
                let a = self.atoms.get(n)?;
                a.sheet.order.or_else(|| a.definition.as_ref().and_then(|d| self.known_order(d)))
            }
            GroupExpr::DirectProduct(xs) => {
                xs.iter().try_fold(1u64, |acc, x| acc.checked_mul(self.known_order(x)?))
            }
            GroupExpr::FreeProduct(xs) => {
                // only the degenerate cases have a finite order
                let orders: Option<Vec<u64>> = xs.iter().map(|x| self.known_order(x)).collect();
                let nontrivial: Vec<u64> = orders?.into_iter().filter(|&o| o != 1).collect();
                match nontrivial.len() {
                    0 => Some(1),
                    1 => Some(nontrivial[0]),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

fn make_ref(k: GroupKind, n: &str) -> GroupExpr {
    match k {
        GroupKind::Atom => GroupExpr::Atom(n.to_string()),
        GroupKind::Graph => GroupExpr::GraphOfGroupsRef(n.to_string()),
        GroupKind::Polygon => GroupExpr::PolygonRef(n.to_string()),
        GroupKind::Gcw => GroupExpr::GcwRef(n.to_string()),
    }
}

#[derive(Default)]
struct Loader {
    u: Universe,
    diags: Vec<Diagnostic>,
    kinds: BTreeMap<String, GroupKind>,
    /// Where every group-namespace name was declared.
    origins: BTreeMap<String, (String, Span)>,
}

impl Loader {
    fn diag(&mut self, file: &str, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(file, span, msg));
    }

    fn resolve(&mut self, e: &GroupExpr, file: &str, span: Span, ctx: &str) -> Option<GroupExpr> {
        let kinds = &self.kinds;
        match e.map_refs(&mut |n| kinds.get(n).map(|k| make_ref(*k, n)).ok_or_else(|| n.to_string())) {
            Ok(r) => Some(r),
            Err(n) => {
                self.diag(file, span, format!("unresolved reference `{n}` in {ctx}"));
                None
            }
        }
    }

    fn run(&mut self, entries: &[(&Decl, &str, Span)]) {
        // name tables
        let mut seen: BTreeMap<(Namespace, String), (String, Span)> = BTreeMap::new();
        let mut live = Vec::new();
        for &(d, file, span) in entries {
            let key = (d.namespace(), d.name().to_string());
            if let Some((f0, s0)) = seen.get(&key) {
                let msg = format!("duplicate {} name `{}` (first declared at {f0}:{s0})", key.0, key.1);
                self.diag(file, span, msg);
                continue;
            }
            seen.insert(key, (file.to_string(), span));
            let kind = match d {
                Decl::Group(_) => Some(GroupKind::Atom),
                Decl::Graph(_) => Some(GroupKind::Graph),
                Decl::Polygon(_) => Some(GroupKind::Polygon),
                Decl::Gcw(_) => Some(GroupKind::Gcw),
                _ => None,
            };
            if let Some(k) = kind {
                self.kinds.insert(d.name().to_string(), k);
                self.origins.insert(d.name().to_string(), (file.to_string(), span));
            }
            live.push((d, file, span));
        }
        for &(d, file, span) in &live {
            if let Decl::Family(f) = d {
                self.family(f, file, span);
            }
        }
        let mut concrete_specs = BTreeMap::new();
        for &(d, file, span) in &live {
            if let Decl::Group(g) = d {
                if let Some(spec) = self.atom(g, file, span) {
                    concrete_specs.insert(g.name.clone(), (spec, file.to_string(), span));
                }
            }
        }
        self.concretes(&concrete_specs);
        self.close_sheets(&live);
        for &(d, file, span) in &live {
            if let Decl::Hom(h) = d {
                self.hom(h, file, span);
            }
        }
        for &(d, file, span) in &live {
            match d {
                Decl::Graph(g) => self.graph(g, file, span),
                Decl::Polygon(p) => self.polygon(p, file, span),
                Decl::Gcw(g) => self.gcw(g, file, span),
                _ => {}
            }
        }
        for &(d, file, span) in &live {
            match d {
                Decl::Gluing(g) => self.gluing(g, file, span),
                Decl::Double(dd) => self.double(dd, file, span),
                Decl::Branched(b) => self.branched(b, file, span),
                _ => {}
            }
        }
        if self.diags.is_empty() && self.cycles() {
            self.consistency();
        }
    }

    fn family(&mut self, f: &dsl::FamilyDecl, file: &str, span: Span) {
        let contains = match &f.contains {
            None => None,
            Some(c) => match Family::builtin(c) {
                Some(b) => Some(b),
                None => {
                    self.diag(file, span, format!("family `{}` may only contain a built-in family (tr, fin, am), not `{c}`", f.name));
                    return;
                }
            },
        };
        let closure = f.closure.clone().unwrap_or_else(|| "closed under conjugation and subgroups".into());
        self.u.families.insert(f.name.clone(), CustomFamily { name: f.name.clone(), closure, contains });
    }

    fn family_name(&mut self, name: &str, file: &str, span: Span) -> Option<Family> {
        if let Some(b) = Family::builtin(name) {
            return Some(b);
        }
        if self.u.families.contains_key(name) {
            return Some(Family::Custom(name.to_string()));
        }
        self.diag(file, span, format!("unknown family `{name}`"));
        None
    }

    /// Builds the fact sheet; returns the concrete spec for a later pass.
    fn atom(&mut self, g: &dsl::GroupDecl, file: &str, span: Span) -> Option<ConcreteSpec> {
        let mut sheet = FactSheet::new(&g.name);
        let mut spec = None;
        let set_tri = |slot: &mut Tri, t: Tri, what: &str, diags: &mut Vec<Diagnostic>| {
            if *slot != Tri::Unknown && t != Tri::Unknown && *slot != t {
                diags.push(Diagnostic::new(file, span, format!("conflicting `{what}` declarations for `{}`", g.name)));
            } else if t != Tri::Unknown {
                *slot = t;
            }
        };
        let mut diags = Vec::new();
        for fact in &g.facts {
            let prov = fact.provenance.clone().unwrap_or_else(|| format!("declared in {file}"));
            let key;
            match &fact.kind {
                FactKind::Gd(v) => {
                    sheet.gd_ub = sheet.gd_ub.min(*v);
                    key = "gd".to_string();
                }
                FactKind::Cd(v) => {
                    sheet.cd_ub = sheet.cd_ub.min(*v);
                    key = "cd".to_string();
                }
                FactKind::Tc(v) => {
                    sheet.tc_ub = sheet.tc_ub.min(*v);
                    key = "tc".to_string();
                }
                FactKind::Cat(fam, v) => {
                    let Some(f) = self.family_name(fam, file, span) else { continue };
                    let slot = sheet.cat_ub.entry(f).or_insert(ExtNat::Infinity);
                    *slot = (*slot).min(*v);
                    key = format!("cat[{fam}]");
                }
                FactKind::Amenable(t) => {
                    set_tri(&mut sheet.amenable, *t, "amenable", &mut diags);
                    key = "amenable".into();
                }
                FactKind::Finite(t) => {
                    set_tri(&mut sheet.finite, *t, "finite", &mut diags);
                    key = "finite".into();
                }
                FactKind::Trivial(b) => {
                    sheet.trivial |= *b;
                    key = "trivial".into();
                }
                FactKind::Order(n) => {
                    if sheet.order.is_some_and(|o| o != *n) {
                        diags.push(Diagnostic::new(file, span, format!("conflicting orders for `{}`", g.name)));
                    }
                    sheet.order = Some(*n);
                    key = "order".into();
                }
                FactKind::Member(fam, t) => {
                    if Family::builtin(fam).is_some() {
                        diags.push(Diagnostic::new(
                            file,
                            span,
                            format!("membership in built-in family `{fam}` follows from the trivial/finite/amenable flags"),
                        ));
                        continue;
                    }
                    if self.family_name(fam, file, span).is_none() {
                        continue;
                    }
                    let mut slot = sheet.members.get(fam).copied().unwrap_or_default();
                    set_tri(&mut slot, *t, &format!("member[{fam}]"), &mut diags);
                    sheet.members.insert(fam.clone(), slot);
                    key = format!("member[{fam}]");
                }
                FactKind::Concrete(c) => {
                    if spec.is_some() {
                        diags.push(Diagnostic::new(file, span, format!("`{}` has two concrete models", g.name)));
                    }
                    spec = Some(c.clone());
                    key = "concrete".into();
                }
            }
            sheet.provenance.insert(key, prov);
        }
        self.diags.extend(diags);
        let definition = match &g.definition {
            Some(d) => self.resolve(d, file, span, &format!("definition of `{}`", g.name)),
            None => None,
        };
        if g.definition.is_some() && definition.is_none() {
            return None;
        }
        self.u.atoms.insert(g.name.clone(), Atom { sheet, definition, concrete: None });
        spec
    }

    fn concretes(&mut self, specs: &BTreeMap<String, (ConcreteSpec, String, Span)>) {
        fn build(
            spec: &ConcreteSpec,
            specs: &BTreeMap<String, (ConcreteSpec, String, Span)>,
            done: &mut BTreeMap<String, Result<Arc<ConcreteFiniteGroup>, String>>,
            visiting: &mut BTreeSet<String>,
        ) -> Result<Arc<ConcreteFiniteGroup>, String> {
            match spec {
                ConcreteSpec::Cyclic(n) => {
                    let n = usize::try_from(*n).map_err(|_| format!("cyclic({n}) is too large"))?;
                    ConcreteFiniteGroup::cyclic(n).map(Arc::new).map_err(|e| e.to_string())
                }
                ConcreteSpec::Product(parts) => {
                    let mut acc = ConcreteFiniteGroup::cyclic(1).map_err(|e| e.to_string())?;
                    for p in parts {
                        let g = build(p, specs, done, visiting)?;
                        acc = if acc.order() == 1 {
                            (*g).clone()
                        } else {
                            ConcreteFiniteGroup::product(&acc, &g).map_err(|e| e.to_string())?
                        };
                    }
                    Ok(Arc::new(acc))
                }
                ConcreteSpec::Table { rows, gens } => {
                    let conv = |v: &u64| usize::try_from(*v).unwrap_or(usize::MAX);
                    let rows: Vec<Vec<Elem>> = rows.iter().map(|r| r.iter().map(conv).collect()).collect();
                    let gens: Option<Vec<Elem>> = gens.as_ref().map(|g| g.iter().map(conv).collect());
                    ConcreteFiniteGroup::from_table(&rows, gens.as_deref())
                        .map(Arc::new)
                        .map_err(|e| e.to_string())
                }
                ConcreteSpec::Named(n) => {
                    if let Some(r) = done.get(n) {
                        return r.clone().map_err(|_| format!("concrete model of `{n}` is invalid"));
                    }
                    let Some((s, _, _)) = specs.get(n) else {
                        return Err(format!("`{n}` has no concrete model"));
                    };
                    if !visiting.insert(n.clone()) {
                        return Err(format!("cyclic concrete model reference through `{n}`"));
                    }
                    let r = build(s, specs, done, visiting);
                    visiting.remove(n);
                    done.insert(n.clone(), r.clone());
                    r
                }
            }
        }
        let mut done: BTreeMap<String, Result<Arc<ConcreteFiniteGroup>, String>> = BTreeMap::new();
        for (name, (spec, file, span)) in specs {
            let mut visiting = BTreeSet::from([name.clone()]);
            let r = match done.get(name) {
                Some(r) => r.clone(),
                None => build(spec, specs, &mut done, &mut visiting),
            };
            done.insert(name.clone(), r.clone());
            match r {
                Ok(g) => {
                    let atom = self.u.atoms.get_mut(name).expect("atom inserted");
                    let order = g.order() as u64;
                    if atom.sheet.order.is_some_and(|o| o != order) {
                        let msg = format!("`{name}` declares order {} but its concrete model has order {order}", atom.sheet.order.unwrap());
                        self.diags.push(Diagnostic::new(file, *span, msg));
                    }
                    atom.sheet.order = Some(order);
                    atom.sheet.provenance.entry("order".into()).or_insert_with(|| "concrete model".into());
                    atom.concrete = Some(g);
                }
                Err(e) => self.diag(file, *span, format!("invalid concrete group for `{name}`: {e}")),
            }
        }
    }

    fn close_sheets(&mut self, live: &[(&Decl, &str, Span)]) {
        for &(d, file, span) in live {
            if let Decl::Group(g) = d {
                let Some(atom) = self.u.atoms.get_mut(&g.name) else { continue };
                match atom.sheet.clone().closed() {
                    Ok(s) => atom.sheet = s,
                    Err(e) => self.diags.push(Diagnostic::new(file, span, e.to_string())),
                }
            }
        }
    }

    fn concrete_atom(&mut self, name: &str, file: &str, span: Span, ctx: &str) -> Option<Arc<ConcreteFiniteGroup>> {
        if !self.u.atoms.contains_key(name) {
            self.diag(file, span, format!("unresolved group `{name}` in {ctx}"));
            return None;
        }
        let c = self.u.concrete_of(&GroupExpr::atom(name));
        if c.is_none() {
            self.diag(file, span, format!("group `{name}` in {ctx} has no concrete model"));
        }
        c
    }

    fn hom(&mut self, h: &dsl::HomDecl, file: &str, span: Span) {
        let ctx = format!("homomorphism `{}`", h.name);
        let src = self.concrete_atom(&h.source, file, span, &ctx);
        let tgt = self.concrete_atom(&h.target, file, span, &ctx);
        let (Some(src), Some(tgt)) = (src, tgt) else { return };
        let images: Vec<Elem> = h.images.iter().map(|&v| usize::try_from(v).unwrap_or(usize::MAX)).collect();
        match Homomorphism::from_generator_images(src, tgt, &images) {
            Ok(map) => {
                self.u.homs.insert(h.name.clone(), NamedHom { source: h.source.clone(), target: h.target.clone(), map });
            }
            Err(e) => self.diag(file, span, format!("{ctx}: {e}")),
        }
    }

    /// Looks up an injective homomorphism `src -> tgt` by name.
    fn injection(&mut self, name: &str, src: &GroupExpr, tgt: &GroupExpr, file: &str, span: Span, ctx: &str) -> Option<Homomorphism> {
        let Some(h) = self.u.homs.get(name).cloned() else {
            self.diag(file, span, format!("unknown homomorphism `{name}` in {ctx}"));
            return None;
        };
        let atoms = &self.u.atoms;
        let matches = |e: &GroupExpr, n: &str| match e {
            GroupExpr::Atom(a) => a == n,
            GroupExpr::Trivial => atoms.get(n).is_some_and(|a| a.sheet.trivial),
            _ => false,
        };
        if !matches(src, &h.source) || !matches(tgt, &h.target) {
            self.diag(
                file,
                span,
                format!("homomorphism `{name}` maps {} -> {} but {ctx} needs {src} -> {tgt}", h.source, h.target),
            );
            return None;
        }
        if !h.map.is_injective() {
            self.diag(file, span, format!("homomorphism `{name}` in {ctx} is not injective"));
            return None;
        }
        Some(h.map)
    }

    fn graph(&mut self, g: &dsl::GraphDecl, file: &str, span: Span) {
        let ctx = format!("graph `{}`", g.name);
        let mut ok = true;
        let mut vertices = Vec::new();
        let mut index = BTreeMap::new();
        for (v, e) in &g.vertices {
            if index.insert(v.clone(), vertices.len()).is_some() {
                self.diag(file, span, format!("duplicate vertex `{v}` in {ctx}"));
                ok = false;
            }
            match self.resolve(e, file, span, &ctx) {
                Some(r) => vertices.push((v.clone(), r)),
                None => ok = false,
            }
        }
        if g.vertices.is_empty() {
            self.diag(file, span, format!("{ctx} has no vertices"));
            ok = false;
        }
        let mut edges = Vec::new();
        let mut edge_names = BTreeSet::new();
        for e in &g.edges {
            if !edge_names.insert(e.name.clone()) {
                self.diag(file, span, format!("duplicate edge `{}` in {ctx}", e.name));
                ok = false;
            }
            let (Some(&from), Some(&to)) = (index.get(&e.from), index.get(&e.to)) else {
                self.diag(file, span, format!("edge `{}` in {ctx} joins undeclared vertices", e.name));
                ok = false;
                continue;
            };
            let Some(group) = self.resolve(&e.group, file, span, &ctx) else {
                ok = false;
                continue;
            };
            let injections = match &e.via {
                None => Injection::Asserted,
                Some((a, b)) => {
                    if !ok {
                        continue;
                    }
                    let ectx = format!("edge `{}` of {ctx}", e.name);
                    let i = self.injection(a, &group, &vertices[from].1, file, span, &ectx);
                    let j = self.injection(b, &group, &vertices[to].1, file, span, &ectx);
                    match (i, j) {
                        (Some(into_from), Some(into_to)) => Injection::Concrete { into_from, into_to },
                        _ => {
                            ok = false;
                            continue;
                        }
                    }
                }
            };
            edges.push(GraphEdge { name: e.name.clone(), from, to, group, injections });
        }
        if !ok {
            return;
        }
        let graph = GraphOfGroups { name: g.name.clone(), vertices, edges };
        if !graph.is_connected() {
            self.diag(file, span, format!("{ctx} is not connected"));
            return;
        }
        self.u.graphs.insert(g.name.clone(), graph);
    }

    fn polygon(&mut self, p: &dsl::PolygonDecl, file: &str, span: Span) {
        let ctx = format!("polygon `{}`", p.name);
        if p.d < 3 {
            self.diag(file, span, format!("{ctx}: d ≥ 3 required (found d = {})", p.d));
            return;
        }
        if p.d > 64 {
            self.diag(file, span, format!("{ctx}: d = {} exceeds the supported maximum of 64", p.d));
            return;
        }
        let d = p.d as usize;
        let expand = |l: &Option<dsl::Labels<GroupExpr>>, what: &str, this: &mut Self| -> Option<Vec<GroupExpr>> {
            let Some(l) = l else {
                this.diag(file, span, format!("{ctx} requires `{what} = ...`"));
                return None;
            };
            let Some(xs) = l.expand(d) else {
                this.diag(file, span, format!("{ctx}: `{what}` must list exactly {d} groups"));
                return None;
            };
            xs.iter().map(|x| this.resolve(x, file, span, &ctx)).collect()
        };
        let vertex_groups = expand(&p.vertex, "vertex", self);
        let edge_groups = expand(&p.edge, "edge", self);
        let face_group = match &p.face {
            Some(f) => self.resolve(f, file, span, &ctx),
            None => {
                self.diag(file, span, format!("{ctx} requires `face = ...`"));
                None
            }
        };
        let (Some(vertex_groups), Some(edge_groups), Some(face_group)) = (vertex_groups, edge_groups, face_group) else {
            return;
        };
        let maps = match (&p.face_edge, &p.edge_vertex) {
            (None, None) => PolygonMaps::Asserted,
            (Some(fe), Some(ev)) => {
                let (Some(fe), Some(ev)) = (fe.expand(d), ev.expand(d)) else {
                    self.diag(file, span, format!("{ctx}: map lists must have exactly {d} entries"));
                    return;
                };
                let mut face_edge = Vec::new();
                let mut edge_vertex = Vec::new();
                for i in 0..d {
                    let c = format!("{ctx} at edge {i}");
                    let f = self.injection(&fe[i], &face_group, &edge_groups[i], file, span, &c);
                    let a = self.injection(&ev[i].0, &edge_groups[i], &vertex_groups[i], file, span, &c);
                    let b = self.injection(&ev[i].1, &edge_groups[i], &vertex_groups[(i + 1) % d], file, span, &c);
                    match (f, a, b) {
                        (Some(f), Some(a), Some(b)) => {
                            face_edge.push(f);
                            edge_vertex.push((a, b));
                        }
                        _ => return,
                    }
                }
                PolygonMaps::Concrete { face_edge, edge_vertex }
            }
            _ => {
                self.diag(file, span, format!("{ctx}: give both `face_edge` and `edge_vertex` or neither"));
                return;
            }
        };
        self.u.polygons.insert(
            p.name.clone(),
            PolygonOfGroups {
                name: p.name.clone(),
                d,
                vertex_groups,
                edge_groups,
                face_group,
                maps,
                curvature_asserted: p.curvature_asserted,
            },
        );
    }

    fn gcw(&mut self, g: &dsl::GcwDecl, file: &str, span: Span) {
        let ctx = format!("complex `{}`", g.name);
        let mut by_dim: BTreeMap<u64, &Vec<GroupExpr>> = BTreeMap::new();
        for (k, cells) in &g.dims {
            if by_dim.insert(*k, cells).is_some() {
                self.diag(file, span, format!("{ctx}: dimension {k} listed twice"));
                return;
            }
        }
        let n = by_dim.keys().next_back().copied().unwrap_or(0);
        if n > 64 {
            self.diag(file, span, format!("{ctx}: dimension {n} exceeds the supported maximum of 64"));
            return;
        }
        let mut dims = Vec::new();
        for k in 0..=n {
            match by_dim.get(&k) {
                Some(cells) => {
                    let mut out = Vec::new();
                    for c in cells.iter() {
                        match self.resolve(c, file, span, &ctx) {
                            Some(r) => out.push(r),
                            None => return,
                        }
                    }
                    dims.push(out);
                }
                None if by_dim.is_empty() => dims.push(Vec::new()),
                None => {
                    self.diag(file, span, format!("{ctx}: dimension {k} missing (dimensions must be 0..=n)"));
                    return;
                }
            }
        }
        if g.contractible && dims[0].is_empty() {
            self.diag(file, span, format!("{ctx}: a contractible complex needs at least one 0-cell orbit"));
            return;
        }
        self.u.gcws.insert(g.name.clone(), GcwDescription { name: g.name.clone(), dims, contractible: g.contractible });
    }

    fn boundary(&mut self, b: &dsl::BoundaryDecl, file: &str, span: Span, ctx: &str) -> Option<Boundary> {
        let pi1 = self.resolve(&b.pi1, file, span, ctx)?;
        Some(Boundary { name: b.name.clone(), pi1, pi1_injective: b.pi1_injective, cat_am: b.cat_am })
    }

    fn piece(&mut self, p: &dsl::PieceDecl, file: &str, span: Span, ctx: &str) -> Option<Piece> {
        let pi1 = self.resolve(&p.pi1, file, span, ctx)?;
        let boundaries: Option<Vec<Boundary>> = p.boundaries.iter().map(|b| self.boundary(b, file, span, ctx)).collect();
        Some(Piece { name: p.name.clone(), pi1, cat_am: p.cat_am, boundaries: boundaries? })
    }

    fn dimension(&mut self, n: u64, file: &str, span: Span, ctx: &str) -> Option<u32> {
        match u32::try_from(n) {
            Ok(v) if v >= 1 => Some(v),
            _ => {
                self.diag(file, span, format!("{ctx}: dimension n = {n} out of range"));
                None
            }
        }
    }

    fn gluing(&mut self, g: &dsl::GluingDecl, file: &str, span: Span) {
        let ctx = format!("gluing `{}`", g.name);
        let Some(n) = self.dimension(g.n, file, span, &ctx) else { return };
        let pieces: Option<Vec<Piece>> = g.pieces.iter().map(|p| self.piece(p, file, span, &ctx)).collect();
        let Some(pieces) = pieces else { return };
        if pieces.is_empty() {
            self.diag(file, span, format!("{ctx} has no pieces"));
            return;
        }
        let mut names = BTreeMap::new();
        for (j, p) in pieces.iter().enumerate() {
            for (b, s) in p.boundaries.iter().enumerate() {
                if names.insert(s.name.clone(), (j, b)).is_some() {
                    self.diag(file, span, format!("{ctx}: boundary name `{}` used twice", s.name));
                    return;
                }
            }
        }
        let mut used = BTreeSet::new();
        let mut pairings = Vec::new();
        for (a, b) in &g.pairs {
            let (Some(&plus), Some(&minus)) = (names.get(a), names.get(b)) else {
                self.diag(file, span, format!("{ctx}: pairing {a} -- {b} names an unknown boundary component"));
                return;
            };
            for s in [a, b] {
                if !used.insert(s.clone()) {
                    self.diag(file, span, format!("{ctx}: boundary component `{s}` occurs in more than one pairing"));
                    return;
                }
            }
            pairings.push(Pairing { plus, minus });
        }
        let setup = GluingSetup { name: g.name.clone(), n, pieces, pairings, connected_asserted: g.connected };
        if g.connected && !crate::apps::gluing_to_gog(&setup).is_connected() {
            self.diag(file, span, format!("{ctx}: connectedness asserted but the pairings leave pieces disconnected"));
            return;
        }
        self.u.gluings.insert(g.name.clone(), setup);
    }

    fn double(&mut self, d: &dsl::DoubleDecl, file: &str, span: Span) {
        let ctx = format!("double `{}`", d.name);
        let Some(n) = self.dimension(d.n, file, span, &ctx) else { return };
        let piece = dsl::PieceDecl { name: d.name.clone(), pi1: d.pi1.clone(), cat_am: d.cat_am, boundaries: d.boundaries.clone() };
        let Some(manifold) = self.piece(&piece, file, span, &ctx) else { return };
        if manifold.boundaries.is_empty() {
            self.diag(file, span, format!("{ctx}: a double needs at least one boundary component"));
            return;
        }
        let names: BTreeSet<&str> = manifold.boundaries.iter().map(|b| b.name.as_str()).collect();
        if names.len() != manifold.boundaries.len() {
            self.diag(file, span, format!("{ctx}: boundary names must be distinct"));
            return;
        }
        self.u.doubles.insert(d.name.clone(), DoubleSetup { name: d.name.clone(), n, manifold, twist: d.twist });
    }

    fn branched(&mut self, b: &dsl::BranchedDecl, file: &str, span: Span) {
        let ctx = format!("branched covering `{}`", b.name);
        let Some(n) = self.dimension(b.n, file, span, &ctx) else { return };
        if n < 3 {
            self.diag(file, span, format!("{ctx}: n ≥ 3 required"));
            return;
        }
        let d = match b.d {
            None => None,
            Some(d) => match u32::try_from(d) {
                Ok(v) if v >= 1 => Some(v),
                _ => {
                    self.diag(file, span, format!("{ctx}: d ≥ 1 required"));
                    return;
                }
            },
        };
        let (Some(w), Some(m), Some(dm)) = (
            self.resolve(&b.w, file, span, &ctx),
            self.resolve(&b.m, file, span, &ctx),
            self.resolve(&b.dm, file, span, &ctx),
        ) else {
            return;
        };
        let maps = match &b.maps {
            None => None,
            Some((x, y, z)) => {
                let m_in_w = self.injection(x, &m, &w, file, span, &ctx);
                let neg_m_in_w = self.injection(y, &m, &w, file, span, &ctx);
                let dm_in_m = self.injection(z, &dm, &m, file, span, &ctx);
                match (m_in_w, neg_m_in_w, dm_in_m) {
                    (Some(m_in_w), Some(neg_m_in_w), Some(dm_in_m)) => Some(BranchedMaps { m_in_w, neg_m_in_w, dm_in_m }),
                    _ => return,
                }
            }
        };
        self.u.brancheds.insert(
            b.name.clone(),
            BranchedSetup {
                name: b.name.clone(),
                n,
                d,
                w,
                m,
                dm,
                pi1_injective: b.pi1_injective,
                intersection_asserted: b.intersection,
                maps,
            },
        );
    }

    /// Direct references of a group-namespace name.
    fn deps(&self, name: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |e: &GroupExpr| out.extend(e.references().into_iter().map(str::to_string));
        if let Some(a) = self.u.atoms.get(name) {
            if let Some(d) = &a.definition {
                add(d);
            }
        } else if let Some(g) = self.u.graphs.get(name) {
            g.vertex_groups().chain(g.edge_groups()).for_each(&mut add);
        } else if let Some(p) = self.u.polygons.get(name) {
            p.vertex_groups.iter().chain(&p.edge_groups).chain([&p.face_group]).for_each(&mut add);
        } else if let Some(x) = self.u.gcws.get(name) {
            x.cells().for_each(|(_, g)| add(g));
        }
        out
    }

    /// Reports reference cycles; returns whether the universe is acyclic.
    fn cycles(&mut self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        let names: Vec<String> = self.kinds.keys().cloned().collect();
        let mut mark: BTreeMap<String, Mark> = BTreeMap::new();
        let mut found = Vec::new();
        for root in &names {
            if mark.contains_key(root) {
                continue;
            }
            // iterative DFS with an explicit path
            let mut stack: Vec<(String, Vec<String>, usize)> = vec![(root.clone(), self.deps(root), 0)];
            mark.insert(root.clone(), Mark::Active);
            while let Some((node, deps, i)) = stack.last_mut() {
                if *i < deps.len() {
                    let next = deps[*i].clone();
                    *i += 1;
                    match mark.get(&next) {
                        None => {
                            mark.insert(next.clone(), Mark::Active);
                            let d = self.deps(&next);
                            stack.push((next, d, 0));
                        }
                        Some(Mark::Active) => {
                            let start = stack.iter().position(|(n, _, _)| *n == next).unwrap_or(0);
                            let mut cycle: Vec<String> = stack[start..].iter().map(|(n, _, _)| n.clone()).collect();
                            cycle.push(next);
                            found.push(cycle);
                        }
                        Some(Mark::Done) => {}
                    }
                } else {
                    mark.insert(node.clone(), Mark::Done);
                    stack.pop();
                }
            }
        }
        for cycle in &found {
            let (file, span) = self.origins.get(&cycle[0]).cloned().unwrap_or_default();
            self.diag(&file, span, format!("reference cycle: {}", cycle.join(" -> ")));
        }
        found.is_empty()
    }

    /// Declared flags of an atom must not contradict what its definition implies.
    fn consistency(&mut self) {
        let names: Vec<String> = self.u.atoms.iter().filter(|(_, a)| a.definition.is_some()).map(|(n, _)| n.clone()).collect();
        let mut families = vec![Family::Trivial, Family::Finite, Family::Amenable];
        families.extend(self.u.families.keys().map(|n| Family::Custom(n.clone())));
        for name in names {
            let sheet = self.u.atoms[&name].sheet.clone();
            let def = self.u.atoms[&name].definition.clone().expect("filtered");
            for f in &families {
                let declared = membership::from_flags(&self.u, &sheet, f);
                let derived = membership::membership(&self.u, &def, f).map(|m| m.value).unwrap_or(Tri::Unknown);
                if declared.value != Tri::Unknown && derived != Tri::Unknown && declared.value != derived {
                    let (file, span) = self.origins.get(&name).cloned().unwrap_or_default();
                    self.diag(
                        &file,
                        span,
                        format!(
                            "inconsistent facts for `{name}`: declared membership in {f} is {} but its definition gives {derived}",
                            declared.value
                        ),
                    );
                }
            }
        }
    }
}
