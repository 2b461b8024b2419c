//! Three-valued family membership of group expressions.
//!
//! Everything here is sound but incomplete: `Unknown` is returned whenever
//! none of the structural rules decides the question.

use crate::extnat::ExtNat;
use crate::model::{GroupExpr, ModelError, Universe};

use super::{FactSheet, Family, Tri};

/// A decided (or undecided) membership with the rule that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub value: Tri,
    pub reason: String,
}

impl Membership {
    fn new(value: Tri, reason: impl Into<String>) -> Self {
        Membership { value, reason: reason.into() }
    }

    fn unknown() -> Self {
        Membership::new(Tri::Unknown, "undecided")
    }
}

/// Triviality, finiteness and amenability of one expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub trivial: Membership,
    pub finite: Membership,
    pub amenable: Membership,
    pub order: Option<u64>,
}

impl Profile {
    fn trivial_group(why: &str) -> Profile {
        Profile {
            trivial: Membership::new(Tri::Yes, why),
            finite: Membership::new(Tri::Yes, why),
            amenable: Membership::new(Tri::Yes, why),
            order: Some(1),
        }
    }

    fn unknown() -> Profile {
        Profile {
            trivial: Membership::unknown(),
            finite: Membership::unknown(),
            amenable: Membership::unknown(),
            order: None,
        }
    }

    /// Propagates trivial ⇒ finite ⇒ amenable and their contrapositives.
    fn saturate(mut self) -> Profile {
        if self.order == Some(1) && self.trivial.value == Tri::Unknown {
            self.trivial = Membership::new(Tri::Yes, "order 1");
        }
        if matches!(self.order, Some(n) if n > 1) {
            if self.trivial.value == Tri::Unknown {
                self.trivial = Membership::new(Tri::No, "order > 1");
            }
            if self.finite.value == Tri::Unknown {
                self.finite = Membership::new(Tri::Yes, "finite order");
            }
        }
        if self.trivial.value.is_yes() && self.finite.value == Tri::Unknown {
            self.finite = Membership::new(Tri::Yes, "the trivial group is finite");
        }
        if self.finite.value.is_yes() && self.amenable.value == Tri::Unknown {
            self.amenable = Membership::new(Tri::Yes, "finite groups are amenable");
        }
        if self.amenable.value.is_no() && self.finite.value == Tri::Unknown {
            self.finite = Membership::new(Tri::No, "non-amenable groups are infinite");
        }
        if self.finite.value.is_no() && self.trivial.value == Tri::Unknown {
            self.trivial = Membership::new(Tri::No, "infinite groups are nontrivial");
        }
        self
    }

    pub fn get(&self, f: &Family) -> Option<&Membership> {
        match f {
            Family::Trivial => Some(&self.trivial),
            Family::Finite => Some(&self.finite),
            Family::Amenable => Some(&self.amenable),
            Family::Custom(_) => None,
        }
    }
}

/// Membership from an atom's declared flags alone.
pub fn from_flags(u: &Universe, sheet: &FactSheet, f: &Family) -> Membership {
    let p = flag_profile(sheet);
    match f {
        Family::Custom(name) => {
            if let Some(&t) = sheet.members.get(name) {
                if t != Tri::Unknown {
                    let key = format!("member[{name}]");
                    return Membership::new(t, format!("{}: {}", sheet.name, sheet.provenance_of(&key)));
                }
            }
            if p.trivial.value.is_yes() {
                return Membership::new(Tri::Yes, "families contain the trivial group");
            }
            if let Some(b) = u.families.get(name).and_then(|c| c.contains.clone()) {
                if p.get(&b).is_some_and(|m| m.value.is_yes()) {
                    return Membership::new(Tri::Yes, format!("{} ∈ {b} ⊆ {name}", sheet.name));
                }
            }
            Membership::unknown()
        }
        b => p.get(b).cloned().unwrap_or_else(Membership::unknown),
    }
}

fn flag_profile(sheet: &FactSheet) -> Profile {
    let at = |key: &str| format!("{}: {}", sheet.name, sheet.provenance_of(key));
    let mut p = Profile::unknown();
    if sheet.trivial {
        p.trivial = Membership::new(Tri::Yes, at("trivial"));
    }
    if sheet.finite != Tri::Unknown {
        p.finite = Membership::new(sheet.finite, at("finite"));
    }
    if sheet.amenable != Tri::Unknown {
        p.amenable = Membership::new(sheet.amenable, at("amenable"));
    }
    p.order = sheet.order;
    p.saturate()
}

/// Triviality, finiteness and amenability of `e`.
pub fn profile(u: &Universe, e: &GroupExpr) -> Result<Profile, ModelError> {
    let p = match e {
        GroupExpr::Trivial => Profile::trivial_group("the trivial group"),
        GroupExpr::Atom(n) => {
            let atom = u.atom(n)?;
            let flags = flag_profile(&atom.sheet);
            match &atom.definition {
                None => flags,
                Some(def) => {
                    let d = profile(u, def)?;
                    let pick = |a: Membership, b: Membership| if a.value != Tri::Unknown { a } else { b };
                    Profile {
                        trivial: pick(flags.trivial, d.trivial),
                        finite: pick(flags.finite, d.finite),
                        amenable: pick(flags.amenable, d.amenable),
                        order: flags.order.or(d.order),
                    }
                }
            }
        }
        GroupExpr::DirectProduct(xs) => {
            let ps = xs.iter().map(|x| profile(u, x)).collect::<Result<Vec<_>, _>>()?;
            let order = ps.iter().try_fold(1u64, |acc, p| acc.checked_mul(p.order?));
            Profile {
                trivial: all_or_any(&ps, |p| &p.trivial, "all factors trivial", "a factor is nontrivial"),
                finite: all_or_any(&ps, |p| &p.finite, "all factors finite", "a factor is infinite"),
                amenable: all_or_any(
                    &ps,
                    |p| &p.amenable,
                    "finite products of amenable groups are amenable",
                    "a factor is a non-amenable subgroup",
                ),
                order,
            }
        }
        GroupExpr::FreeProduct(xs) => {
            let ps = xs.iter().map(|x| profile(u, x)).collect::<Result<Vec<_>, _>>()?;
            free_product(ps)
        }
        GroupExpr::GraphOfGroupsRef(n) => graph(u, n)?,
        GroupExpr::PolygonRef(n) => {
            let p = u.polygon(n)?;
            let groups: Vec<&GroupExpr> =
                p.vertex_groups.iter().chain(&p.edge_groups).chain([&p.face_group]).collect();
            let ps = groups.iter().map(|g| profile(u, g)).collect::<Result<Vec<_>, _>>()?;
            if ps.iter().all(|q| q.trivial.value.is_yes()) {
                Profile::trivial_group("all local groups are trivial over a simply connected polygon")
            } else if p.curvature_asserted {
                // local groups embed in a developable complex of groups
                let mut out = Profile::unknown();
                for (get, what) in FIELDS {
                    if ps.iter().any(|q| get(q).value.is_no()) {
                        *field(&mut out, what) = Membership::new(Tri::No, format!("a local group of {n} is not {what}"));
                    }
                }
                out
            } else {
                Profile::unknown()
            }
        }
        GroupExpr::GcwRef(n) => {
            let x = u.gcw(n)?;
            let ps = x.cells().map(|(_, g)| profile(u, g)).collect::<Result<Vec<_>, _>>()?;
            let mut out = Profile::unknown();
            for (get, what) in FIELDS {
                if ps.iter().any(|q| get(q).value.is_no()) {
                    *field(&mut out, what) = Membership::new(Tri::No, format!("a stabilizer of {n} is not {what}"));
                }
            }
            out
        }
    };
    Ok(p.saturate())
}

type Getter = fn(&Profile) -> &Membership;

const FIELDS: [(Getter, &str); 3] = [(|p| &p.trivial, "trivial"), (|p| &p.finite, "finite"), (|p| &p.amenable, "amenable")];

fn field<'a>(p: &'a mut Profile, what: &str) -> &'a mut Membership {
    match what {
        "trivial" => &mut p.trivial,
        "finite" => &mut p.finite,
        _ => &mut p.amenable,
    }
}

fn all_or_any(ps: &[Profile], get: Getter, all_yes: &str, some_no: &str) -> Membership {
    if ps.iter().any(|p| get(p).value.is_no()) {
        Membership::new(Tri::No, some_no)
    } else if ps.iter().all(|p| get(p).value.is_yes()) {
        Membership::new(Tri::Yes, all_yes)
    } else {
        Membership::unknown()
    }
}

fn free_product(ps: Vec<Profile>) -> Profile {
    let live: Vec<Profile> = ps.into_iter().filter(|p| !p.trivial.value.is_yes()).collect();
    let nontrivial: Vec<&Profile> = live.iter().filter(|p| p.trivial.value.is_no()).collect();
    let undecided = live.len() - nontrivial.len();
    if live.is_empty() {
        return Profile::trivial_group("free product of trivial groups");
    }
    if live.len() == 1 {
        return live.into_iter().next().unwrap();
    }
    let mut out = Profile::unknown();
    if live.iter().any(|p| p.amenable.value.is_no()) {
        out.amenable = Membership::new(Tri::No, "a free factor is a non-amenable subgroup");
    }
    if live.iter().any(|p| p.finite.value.is_no()) {
        out.finite = Membership::new(Tri::No, "a free factor is infinite");
    }
    if !nontrivial.is_empty() {
        out.trivial = Membership::new(Tri::No, "a free factor is nontrivial");
    }
    if nontrivial.len() >= 2 {
        out.finite = Membership::new(Tri::No, "free products of two nontrivial groups are infinite");
        let big = |p: &&Profile| p.finite.value.is_no() || p.order.is_some_and(|o| o > 2);
        if nontrivial.len() >= 3 {
            out.amenable = Membership::new(Tri::No, "free products of three nontrivial groups contain free subgroups");
        } else if nontrivial.iter().any(big) {
            out.amenable = Membership::new(
                Tri::No,
                "a free product A * B with |A| ≥ 3 and |B| ≥ 2 contains a free subgroup of rank 2",
            );
        } else if undecided == 0 && nontrivial.iter().all(|p| p.order == Some(2)) {
            out.amenable = Membership::new(Tri::Yes, "Z/2 * Z/2 is infinite dihedral, which is virtually cyclic");
        }
    }
    out
}

/// Index `[G_v : G_e]` when both orders are known.
fn index(v: &Profile, e: &Profile) -> Option<u64> {
    Some(v.order? / e.order?)
}

fn graph(u: &Universe, name: &str) -> Result<Profile, ModelError> {
    let g = u.graph(name)?;
    let vs = g.vertex_groups().map(|x| profile(u, x)).collect::<Result<Vec<_>, _>>()?;
    let es = g.edge_groups().map(|x| profile(u, x)).collect::<Result<Vec<_>, _>>()?;
    if g.edges.is_empty() && vs.len() == 1 {
        return Ok(vs.into_iter().next().unwrap());
    }
    let b1 = g.first_betti_number();
    if b1 == 0 && vs.iter().all(|p| p.trivial.value.is_yes()) {
        return Ok(Profile::trivial_group("tree of trivial groups"));
    }
    let mut out = Profile::unknown();
    for (get, what) in FIELDS {
        if vs.iter().chain(&es).any(|q| get(q).value.is_no()) {
            *field(&mut out, what) = Membership::new(Tri::No, format!("a vertex or edge group of {name} is not {what}"));
        }
    }
    if b1 >= 1 {
        out.finite = Membership::new(Tri::No, format!("{name} has a loop, so its group surjects onto Z"));
    }
    if b1 >= 2 {
        out.amenable = Membership::new(Tri::No, format!("{name} has first Betti number {b1} ≥ 2, so its group surjects onto F2"));
    }
    for (e, ep) in g.edges.iter().zip(&es) {
        let (Some(p), Some(q)) = (index(&vs[e.from], ep), index(&vs[e.to], ep)) else { continue };
        if p >= 2 && q >= 2 {
            out.finite = Membership::new(Tri::No, format!("edge {} has indices {p}, {q} ≥ 2", e.name));
            if (p >= 3 || q >= 3 || e.is_loop()) && !out.amenable.value.is_no() {
                out.amenable = Membership::new(
                    Tri::No,
                    format!("edge {} has indices {p}, {q}, so the splitting contains a free subgroup of rank 2", e.name),
                );
            }
        }
    }
    Ok(out)
}

/// Membership of `e` in `f`.
pub fn membership(u: &Universe, e: &GroupExpr, f: &Family) -> Result<Membership, ModelError> {
    let p = profile(u, e)?;
    if let Some(m) = p.get(f) {
        return Ok(m.clone());
    }
    let Family::Custom(name) = f else { unreachable!() };
    if p.trivial.value.is_yes() {
        return Ok(Membership::new(Tri::Yes, "families contain the trivial group"));
    }
    if let Some(b) = u.families.get(name).and_then(|c| c.contains.clone()) {
        if p.get(&b).is_some_and(|m| m.value.is_yes()) {
            return Ok(Membership::new(Tri::Yes, format!("{e} ∈ {b} ⊆ {name}")));
        }
    }
    // subgroup closure: a subgroup outside the family excludes the group
    let subs: Vec<GroupExpr> = match e {
        GroupExpr::Atom(n) => {
            let atom = u.atom(n)?;
            let m = from_flags(u, &atom.sheet, f);
            if m.value != Tri::Unknown {
                return Ok(m);
            }
            match &atom.definition {
                Some(d) => return membership(u, d, f),
                None => vec![],
            }
        }
        GroupExpr::Trivial => vec![],
        GroupExpr::DirectProduct(xs) | GroupExpr::FreeProduct(xs) => xs.clone(),
        GroupExpr::GraphOfGroupsRef(n) => {
            let g = u.graph(n)?;
            g.vertex_groups().chain(g.edge_groups()).cloned().collect()
        }
        GroupExpr::PolygonRef(n) => {
            let p = u.polygon(n)?;
            if p.curvature_asserted {
                p.vertex_groups.iter().chain(&p.edge_groups).chain([&p.face_group]).cloned().collect()
            } else {
                vec![]
            }
        }
        GroupExpr::GcwRef(n) => u.gcw(n)?.cells().map(|(_, g)| g.clone()).collect(),
    };
    for s in &subs {
        let m = membership(u, s, f)?;
        if m.value.is_no() {
            return Ok(Membership::new(Tri::No, format!("subgroup {s} is not in {name}")));
        }
    }
    Ok(Membership::unknown())
}

/// `cat_F` read off declarations: 0 for members, else the declared bound.
pub fn lookup_cat(u: &Universe, e: &GroupExpr, f: &Family) -> Result<ExtNat, ModelError> {
    if membership(u, e, f)?.value.is_yes() {
        return Ok(ExtNat::ZERO);
    }
    Ok(match e {
        GroupExpr::Atom(n) => u.atom(n)?.sheet.cat_for(f),
        _ => ExtNat::Infinity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl;

    fn universe(text: &str) -> Universe {
        Universe::with_prelude(&dsl::parse("t.catb", text).unwrap()).unwrap()
    }

    fn am(u: &Universe, e: &str) -> Tri {
        let e = u.resolve(&dsl::parse_expr(e).unwrap()).unwrap();
        membership(u, &e, &Family::Amenable).unwrap().value
    }

    #[test]
    fn free_products() {
        let u = universe("");
        assert_eq!(am(&u, "Z2 * Z2"), Tri::Yes);
        assert_eq!(am(&u, "Z2 * Z3"), Tri::No);
        assert_eq!(am(&u, "Z * Z"), Tri::No);
        assert_eq!(am(&u, "Z2 * Z2 * Z2"), Tri::No);
        assert_eq!(am(&u, "Z * 1"), Tri::Yes);
        assert_eq!(am(&u, "Zn2 x Z4"), Tri::Yes);
        assert_eq!(am(&u, "F2 x Z"), Tri::No);
    }

    #[test]
    fn unknown_atoms_stay_unknown() {
        let u = universe("group P { gd <= 2 }");
        assert_eq!(am(&u, "P"), Tri::Unknown);
        assert_eq!(am(&u, "P x Z"), Tri::Unknown);
        assert_eq!(am(&u, "P * Z"), Tri::Unknown);
        let e = u.resolve(&dsl::parse_expr("P * Z").unwrap()).unwrap();
        assert_eq!(membership(&u, &e, &Family::Trivial).unwrap().value, Tri::No);
    }

    #[test]
    fn graphs() {
        let u = universe("amalgam A = Z4 *[Z2] Z6\namalgam B = Z4 *[Z2] Z4\nhnn H = Z *[1]");
        assert_eq!(am(&u, "A"), Tri::No);
        // virtually cyclic, but no rule decides it
        assert_eq!(am(&u, "B"), Tri::Unknown);
        let b = u.resolve(&GroupExpr::atom("B")).unwrap();
        assert_eq!(membership(&u, &b, &Family::Finite).unwrap().value, Tri::No);
        let h = u.resolve(&GroupExpr::atom("H")).unwrap();
        assert_eq!(membership(&u, &h, &Family::Finite).unwrap().value, Tri::No);
    }

    #[test]
    fn custom_families() {
        let u = universe("family G { contains = am }\ngroup P { member[G] = no }\ngroup Q { member[G] = yes }");
        let g = Family::Custom("G".into());
        let m = |e: &str| membership(&u, &u.resolve(&dsl::parse_expr(e).unwrap()).unwrap(), &g).unwrap().value;
        assert_eq!(m("Z"), Tri::Yes);
        assert_eq!(m("Q"), Tri::Yes);
        assert_eq!(m("P x Z"), Tri::No);
        assert_eq!(m("Q x F2"), Tri::Unknown);
        assert_eq!(lookup_cat(&u, &GroupExpr::atom("Z"), &g).unwrap(), ExtNat::ZERO);
    }
}
