//! Canonical text form of a [`SourceModel`].

use std::fmt::Write;

use super::ast::*;
use crate::model::GroupExpr;

pub fn serialize(model: &SourceModel) -> String {
    let mut out = String::new();
    for (i, decl) in model.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_decl(&mut out, decl);
    }
    out
}

pub fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn list<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn exprs(xs: &[GroupExpr]) -> String {
    list(xs, |x| x.to_string())
}

fn ints(xs: &[u64]) -> String {
    format!("[{}]", list(xs, |x| x.to_string()))
}

pub fn concrete(spec: &ConcreteSpec) -> String {
    match spec {
        ConcreteSpec::Cyclic(n) => format!("cyclic({n})"),
        ConcreteSpec::Product(parts) => format!("product({})", list(parts, concrete)),
        ConcreteSpec::Table { rows, gens } => {
            let mut s = format!("table [{}]", list(rows, |r| ints(r)));
            if let Some(g) = gens {
                write!(s, " gens {}", ints(g)).unwrap();
            }
            s
        }
        ConcreteSpec::Named(n) => n.clone(),
    }
}

pub fn fact(f: &Fact) -> String {
    let mut s = match &f.kind {
        FactKind::Gd(v) => format!("gd <= {v}"),
        FactKind::Cd(v) => format!("cd <= {v}"),
        FactKind::Tc(v) => format!("tc <= {v}"),
        FactKind::Cat(fam, v) => format!("cat[{fam}] <= {v}"),
        FactKind::Amenable(t) => format!("amenable = {t}"),
        FactKind::Finite(t) => format!("finite = {t}"),
        FactKind::Trivial(b) => format!("trivial = {b}"),
        FactKind::Order(n) => format!("order = {n}"),
        FactKind::Member(fam, t) => format!("member[{fam}] = {t}"),
        FactKind::Concrete(c) => format!("concrete = {}", concrete(c)),
    };
    if let Some(p) = &f.provenance {
        write!(s, " @ {}", quote(p)).unwrap();
    }
    s
}

fn labels<T>(l: &Labels<T>, f: impl Fn(&T) -> String) -> String {
    match l {
        Labels::Constant(x) => f(x),
        Labels::List(xs) => format!("[{}]", list(xs, f)),
    }
}

fn boundary(out: &mut String, b: &BoundaryDecl, indent: &str) {
    writeln!(out, "{indent}boundary {} {{", b.name).unwrap();
    writeln!(out, "{indent}  pi1 = {}", b.pi1).unwrap();
    if b.pi1_injective {
        writeln!(out, "{indent}  pi1_injective = assert").unwrap();
    }
    if let Some(c) = b.cat_am {
        writeln!(out, "{indent}  cat_am <= {c}").unwrap();
    }
    writeln!(out, "{indent}}}").unwrap();
}

fn write_decl(out: &mut String, decl: &Decl) {
    match decl {
        Decl::Group(g) => {
            write!(out, "group {}", g.name).unwrap();
            if let Some(def) = &g.definition {
                write!(out, " = {def}").unwrap();
            }
            if g.facts.is_empty() {
                out.push('\n');
            } else {
                out.push_str(" {\n");
                for f in &g.facts {
                    writeln!(out, "  {}", fact(f)).unwrap();
                }
                out.push_str("}\n");
            }
        }
        Decl::Family(f) => {
            writeln!(out, "family {} {{", f.name).unwrap();
            if let Some(c) = &f.closure {
                writeln!(out, "  closure = {}", quote(c)).unwrap();
            }
            if let Some(c) = &f.contains {
                writeln!(out, "  contains = {c}").unwrap();
            }
            out.push_str("}\n");
        }
        Decl::Graph(g) => {
            writeln!(out, "graph {} {{", g.name).unwrap();
            for (v, e) in &g.vertices {
                writeln!(out, "  vertex {v} = {e}").unwrap();
            }
            for e in &g.edges {
                write!(out, "  edge {}: {} -- {} = {}", e.name, e.from, e.to, e.group).unwrap();
                if let Some((a, b)) = &e.via {
                    write!(out, " via {a}, {b}").unwrap();
                }
                out.push('\n');
            }
            out.push_str("}\n");
        }
        Decl::Polygon(p) => {
            writeln!(out, "polygon {} {{", p.name).unwrap();
            writeln!(out, "  d = {}", p.d).unwrap();
            if let Some(v) = &p.vertex {
                writeln!(out, "  vertex = {}", labels(v, |x| x.to_string())).unwrap();
            }
            if let Some(e) = &p.edge {
                writeln!(out, "  edge = {}", labels(e, |x| x.to_string())).unwrap();
            }
            if let Some(f) = &p.face {
                writeln!(out, "  face = {f}").unwrap();
            }
            if let Some(fe) = &p.face_edge {
                writeln!(out, "  face_edge = {}", labels(fe, |x| x.clone())).unwrap();
            }
            if let Some(ev) = &p.edge_vertex {
                writeln!(out, "  edge_vertex = {}", labels(ev, |(a, b)| format!("({a}, {b})"))).unwrap();
            }
            if p.curvature_asserted {
                out.push_str("  curvature = assert\n");
            }
            out.push_str("}\n");
        }
        Decl::Gcw(g) => {
            writeln!(out, "gcw {} {{", g.name).unwrap();
            if g.contractible {
                out.push_str("  contractible = assert\n");
            }
            for (k, cells) in &g.dims {
                writeln!(out, "  dim {k} = [{}]", exprs(cells)).unwrap();
            }
            out.push_str("}\n");
        }
        Decl::Hom(h) => {
            writeln!(out, "hom {} : {} -> {} = {}", h.name, h.source, h.target, ints(&h.images)).unwrap();
        }
        Decl::Gluing(g) => {
            writeln!(out, "gluing {} {{", g.name).unwrap();
            writeln!(out, "  n = {}", g.n).unwrap();
            for p in &g.pieces {
                writeln!(out, "  piece {} {{", p.name).unwrap();
                writeln!(out, "    pi1 = {}", p.pi1).unwrap();
                if let Some(c) = p.cat_am {
                    writeln!(out, "    cat_am <= {c}").unwrap();
                }
                for b in &p.boundaries {
                    boundary(out, b, "    ");
                }
                out.push_str("  }\n");
            }
            for (a, b) in &g.pairs {
                writeln!(out, "  pair {a} -- {b}").unwrap();
            }
            if g.connected {
                out.push_str("  connected = assert\n");
            }
            out.push_str("}\n");
        }
        Decl::Double(d) => {
            writeln!(out, "double {} {{", d.name).unwrap();
            writeln!(out, "  n = {}", d.n).unwrap();
            writeln!(out, "  pi1 = {}", d.pi1).unwrap();
            if let Some(c) = d.cat_am {
                writeln!(out, "  cat_am <= {c}").unwrap();
            }
            for b in &d.boundaries {
                boundary(out, b, "  ");
            }
            if d.twist {
                out.push_str("  twist = yes\n");
            }
            out.push_str("}\n");
        }
        Decl::Branched(b) => {
            writeln!(out, "branched {} {{", b.name).unwrap();
            writeln!(out, "  n = {}", b.n).unwrap();
            if let Some(d) = b.d {
                writeln!(out, "  d = {d}").unwrap();
            }
            writeln!(out, "  W = {}", b.w).unwrap();
            writeln!(out, "  M = {}", b.m).unwrap();
            writeln!(out, "  dM = {}", b.dm).unwrap();
            if b.pi1_injective {
                out.push_str("  pi1_injective = assert\n");
            }
            if b.intersection {
                out.push_str("  intersection = assert\n");
            }
            if let Some((x, y, z)) = &b.maps {
                writeln!(out, "  maps = ({x}, {y}, {z})").unwrap();
            }
            out.push_str("}\n");
        }
    }
}
