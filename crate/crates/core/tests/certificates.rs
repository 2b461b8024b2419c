mod common;

use catbound::apps::*;
use catbound::engine::Engine;
use catbound::extnat::ExtNat;
use common::*;

fn ids(c: &Certificate) -> Vec<&str> {
    c.ledger.iter().map(|h| h.id.as_str()).collect()
}

#[test]
fn max_route_for_the_free_boundary_double() {
    let c = certify(&fixture(EX_DOUBLE_MAX.0), EX_DOUBLE_MAX.1, None).unwrap();
    assert_eq!(c.conclusion, Conclusion::VolumeVanishes);
    assert!(c.route.starts_with("Cor 3.8"), "{}", c.route);
    assert_eq!(c.value, Some(ExtNat::Finite(2)));
    assert_eq!(ids(&c), ["Thm 3.5(i)", "Thm 3.5(ii)", "Thm 3.5(iii)", "Thm 3.5(iii)"]);
    assert_eq!(c.trace.as_ref().unwrap().rule, "gog-max");
}

#[test]
fn sum_route_for_the_torus_boundary_double() {
    let c = certify(&fixture(EX_DOUBLE_SUM.0), EX_DOUBLE_SUM.1, None).unwrap();
    assert_eq!(c.conclusion, Conclusion::VolumeVanishes);
    assert!(c.route.starts_with("Cor 3.9"), "{}", c.route);
    assert_eq!(c.value, Some(ExtNat::Finite(3)));
    let t = c.trace.as_ref().unwrap();
    assert_eq!(t.rule, "gluing-sum");
    assert_eq!(t.premises.iter().map(|p| p.value).collect::<Vec<_>>(), [ExtNat::Finite(1), ExtNat::Finite(2)]);
}

#[test]
fn branched_covering_through_the_polygon() {
    let c = certify(&fixture(EX_BRANCHED.0), EX_BRANCHED.1, None).unwrap();
    assert_eq!(c.conclusion, Conclusion::VolumeVanishes);
    assert_eq!(ids(&c), ["Thm 4.4(i)", "Thm 4.4(ii)", "Thm 4.4(iii)", "Thm 4.4(iv)", "Thm 4.4(v)"]);
    let t = c.trace.as_ref().unwrap();
    assert_eq!(t.rule, "polygon-max");
    assert!(t.cite.contains("Cor 4.3") && t.cite.contains("5-gon"));
    assert_eq!(c.value, Some(ExtNat::Finite(2)));
    // every d ≥ 4 works, d ≤ 3 is refused
    for d in 4..9 {
        assert_eq!(certify(&fixture(EX_BRANCHED.0), EX_BRANCHED.1, Some(d)).unwrap().conclusion, Conclusion::VolumeVanishes);
    }
    for d in 0..4 {
        let e = certify(&fixture(EX_BRANCHED.0), EX_BRANCHED.1, Some(d)).unwrap_err();
        assert!(e.to_string().contains("d ≥ 4"), "{e}");
    }
}

#[test]
fn missing_sheet_count_is_a_precondition_error() {
    let text = fixture(EX_BRANCHED.0).replace("  d = 5\n", "");
    assert!(matches!(certify(&text, EX_BRANCHED.1, None), Err(AppError::Precondition(_))));
}

#[test]
fn each_mutation_names_its_hypothesis() {
    for m in mutations() {
        let c = certify(&m.text(), m.fixture.1, None).unwrap();
        assert_eq!(c.conclusion, Conclusion::Inconclusive, "{}", m.what);
        assert_eq!(c.value, None, "{}", m.what);
        assert!(c.failed().iter().any(|h| h.id == m.expect), "{}: {:?}", m.what, c.failed());
        assert!(c.render().contains("FAILED"), "{}", m.what);
    }
}

#[test]
fn vanishing_certificates_carry_a_bound_below_the_dimension() {
    for (file, target) in [EX_DOUBLE_MAX, EX_DOUBLE_SUM, EX_BRANCHED] {
        let c = certify(&fixture(file), target, None).unwrap();
        let t = c.trace.unwrap();
        assert_eq!(t.replay(), Ok(t.value));
        assert!(t.value < ExtNat::Finite(4), "{target}: {}", t.value);
        assert_eq!(c.value, Some(t.value));
        assert!(c.ledger.iter().all(|h| h.status != Status::Failed));
    }
}

#[test]
fn the_twist_is_never_read() {
    for (file, target) in [EX_DOUBLE_MAX, EX_DOUBLE_SUM] {
        let twisted = certify(&fixture(file), target, None).unwrap();
        let untwisted = certify(&fixture(file).replace("twist = yes", "twist = no"), target, None).unwrap();
        assert_eq!(twisted, untwisted);
    }
}

#[test]
fn ledger_items_are_literal_theorem_items() {
    let allowed = |id: &str| {
        ["Thm 3.5(i)", "Thm 3.5(ii)", "Thm 3.5(iii)", "Thm 3.5 (moreover)", "Thm 3.1"].contains(&id)
            || id.starts_with("Lemma 3.2(")
            || id.starts_with("Thm 4.4(")
    };
    let mut texts: Vec<(String, &str)> = [EX_DOUBLE_MAX, EX_DOUBLE_SUM, EX_BRANCHED].iter().map(|(f, t)| (fixture(f), *t)).collect();
    texts.extend(mutations().iter().map(|m| (m.text(), m.fixture.1)));
    for (text, target) in texts {
        let c = certify(&text, target, None).unwrap();
        for h in &c.ledger {
            assert!(allowed(&h.id), "{target}: {}", h.id);
        }
    }
}

#[test]
fn doubles_become_two_vertex_graphs() {
    let text = "double D { n = 5; pi1 = F3; boundary a { pi1 = Z; pi1_injective = assert } boundary b { pi1 = Zn2 } boundary c { pi1 = 1 } }";
    let u = universe(text);
    let g = gluing_to_gog(&double_to_gluing(&u.doubles["D"]));
    assert_eq!(g.vertices.len(), 2);
    assert_eq!(g.edges.len(), 3);
    assert!(g.edges.iter().all(|e| (e.from, e.to) == (0, 1)));
}

const GLUED: &str = "
group P2 { gd <= 2 }
group P4 { gd <= 4 }
gluing S {
  n = 4
  piece A { pi1 = P2 x Z; boundary s { pi1 = F2; pi1_injective = assert } }
  piece B { pi1 = P2; boundary t { pi1 = F2; pi1_injective = assert } }
  pair s -- t
}";

fn gluing(text: &str) -> (catbound::model::Universe, &'static str) {
    (universe(text), "S")
}

#[test]
fn closed_gluing_vanishes() {
    let (u, name) = gluing(GLUED);
    let c = certify_gluing(&Engine::new(&u), &u.gluings[name]).unwrap();
    assert_eq!(c.conclusion, Conclusion::VolumeVanishes);
    assert_eq!(c.value, Some(ExtNat::Finite(2)));
    assert!(c.route.contains("Thm 3.1"));
}

#[test]
fn gluing_hypothesis_breaches() {
    // gd of the glued boundary is n − 1
    let (u, name) = gluing(&GLUED.replace("s { pi1 = F2", "s { pi1 = P4 x 1").replace("group P4 { gd <= 4 }", "group P4 { gd <= 3 }"));
    let c = certify_gluing(&Engine::new(&u), &u.gluings[name]).unwrap();
    assert_eq!(c.conclusion, Conclusion::Inconclusive);
    assert_eq!(c.failed().iter().map(|h| h.id.as_str()).collect::<Vec<_>>(), ["Thm 3.5(ii)"]);
    // a piece whose category bound is n
    let (u, name) = gluing(&GLUED.replace("pi1 = P2 x Z;", "pi1 = P4;"));
    let c = certify_gluing(&Engine::new(&u), &u.gluings[name]).unwrap();
    assert_eq!(c.failed().iter().map(|h| h.id.as_str()).collect::<Vec<_>>(), ["Thm 3.5(iii)"]);
}

#[test]
fn boundary_hypotheses_decide_the_open_case() {
    // piece A keeps a free boundary component u
    let open = GLUED.replace("boundary s {", "boundary u { pi1 = Z; pi1_injective = assert } boundary s {");
    let (u, name) = gluing(&open);
    let c = certify_gluing(&Engine::new(&u), &u.gluings[name]).unwrap();
    assert_eq!(c.conclusion, Conclusion::VolumeVanishes);
    assert!(c.route.contains("Lemma 3.2"), "{}", c.route);
    assert!(ids(&c).contains(&"Lemma 3.2(i)"));

    // not injective: neither hypothesis set holds, only a bound is reported
    let weak = GLUED.replace("boundary s {", "boundary u { pi1 = Z } boundary s {");
    let (u, name) = gluing(&weak);
    let c = certify_gluing(&Engine::new(&u), &u.gluings[name]).unwrap();
    assert_eq!(c.conclusion, Conclusion::CatBound);
    assert_eq!(c.value, Some(ExtNat::Finite(2)));
    assert!(ids(&c).contains(&"Lemma 3.2(i)") && ids(&c).contains(&"Thm 3.5 (moreover)"));
}

#[test]
fn sum_bound_examples() {
    // every piece and boundary amenable: 0 + 1
    let u = universe("gluing S { n = 3; piece A { pi1 = Z; boundary s { pi1 = Zn2 } } piece B { pi1 = Zn2; boundary t { pi1 = Zn2 } } pair s -- t }");
    let e = Engine::new(&u);
    let r = gluing_sum_bound(&e, &u.gluings["S"]).unwrap();
    assert_eq!(r.value, ExtNat::Finite(1));
    assert_eq!(r.trace.replay(), Ok(r.value));
    // a single piece and no pairings: the empty supremum contributes 0
    let u = universe("group P { gd <= 3 }\ngluing S { n = 5; piece A { pi1 = P; boundary s { pi1 = Z } } }");
    let e = Engine::new(&u);
    assert_eq!(gluing_sum_bound(&e, &u.gluings["S"]).unwrap().value, ExtNat::Finite(3));
    // declared space-level bounds below the group bound win
    let u = universe("group P { gd <= 3 }\ngluing S { n = 5; piece A { pi1 = P; cat_am <= 1 } }");
    let e = Engine::new(&u);
    assert_eq!(gluing_sum_bound(&e, &u.gluings["S"]).unwrap().value, ExtNat::Finite(1));
}

#[test]
fn concrete_maps_settle_the_intersection_hypothesis() {
    let c = certify(&fixture("polygons.catb"), "Concrete", None).unwrap();
    let h = |id: &str| c.ledger.iter().find(|h| h.id == id).unwrap().status;
    assert_eq!(h("Thm 4.4(i)"), Status::Verified);
    assert_eq!(h("Thm 4.4(ii)"), Status::Verified);
    assert_eq!(h("Thm 4.4(iv)"), Status::Failed); // gd of a finite group is infinite

    // both sheets through the same subgroup: the intersection is too big
    let text = fixture("polygons.catb").replace("maps = (a, b, t)", "maps = (a, a, t)");
    let c = certify(&text, "Concrete", None).unwrap();
    let ii = c.ledger.iter().find(|h| h.id == "Thm 4.4(ii)").unwrap();
    assert_eq!(ii.status, Status::Failed);
    assert!(ii.detail.contains("{0, 2}"), "{}", ii.detail);
}

#[test]
fn json_export_has_the_documented_fields() {
    let c = certify(&fixture(EX_BRANCHED.0), EX_BRANCHED.1, None).unwrap();
    let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
    for key in ["conclusion", "value", "ledger", "trace", "route"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["conclusion"], "volume_vanishes");
    assert_eq!(v["ledger"][0]["status"], "asserted");
}
