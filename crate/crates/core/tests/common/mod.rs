//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use catbound::dsl::*;
use catbound::extnat::ExtNat;
use catbound::facts::Tri;
use catbound::model::{ConcreteFiniteGroup, Elem, GcwDescription, GroupExpr, Homomorphism, Universe};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn universe(text: &str) -> Universe {
    let m = parse("t.catb", text).unwrap_or_else(|d| panic!("{d:?}"));
    Universe::with_prelude(&m).unwrap_or_else(|d| panic!("{d:?}"))
}

// ---- source models ----

fn name(r: &mut impl Rng, prefix: &str, used: &mut BTreeSet<String>) -> String {
    loop {
        let n = format!("{prefix}{}", r.gen_range(0..1000));
        if used.insert(n.clone()) {
            return n;
        }
    }
}

fn ident(r: &mut impl Rng) -> String {
    const HEADS: [&str; 6] = ["A", "B", "Grp", "h", "T_", "_q"];
    format!("{}{}", HEADS.choose(r).unwrap(), r.gen_range(0..50))
}

fn extnat(r: &mut impl Rng) -> ExtNat {
    if r.gen_bool(0.15) {
        ExtNat::Infinity
    } else {
        ExtNat::Finite(r.gen_range(0..12))
    }
}

fn tri(r: &mut impl Rng) -> Tri {
    *[Tri::Yes, Tri::No, Tri::Unknown].choose(r).unwrap()
}

fn text(r: &mut impl Rng) -> String {
    const CHARS: &[char] = &['a', 'Z', ' ', '"', '\\', '\n', '\t', '≤', 'π', '1', '@', '{', '}', ';', '/'];
    (0..r.gen_range(0..12)).map(|_| *CHARS.choose(r).unwrap()).collect()
}

pub fn expr(r: &mut impl Rng, depth: usize) -> GroupExpr {
    let leaf = depth == 0 || r.gen_bool(0.4);
    if leaf {
        return if r.gen_bool(0.15) { GroupExpr::Trivial } else { GroupExpr::Atom(ident(r)) };
    }
    let k = r.gen_range(0..4);
    let xs = (0..k).map(|_| expr(r, depth - 1)).collect();
    if r.gen_bool(0.5) {
        GroupExpr::DirectProduct(xs)
    } else {
        GroupExpr::FreeProduct(xs)
    }
}

fn concrete(r: &mut impl Rng, depth: usize) -> ConcreteSpec {
    match r.gen_range(0..if depth == 0 { 3 } else { 4 }) {
        0 => ConcreteSpec::Cyclic(r.gen_range(1..30)),
        1 => ConcreteSpec::Named(ident(r)),
        2 => ConcreteSpec::Table {
            rows: (0..r.gen_range(1..4)).map(|_| (0..r.gen_range(0..4)).map(|_| r.gen_range(0..9)).collect()).collect(),
            gens: r.gen_bool(0.5).then(|| (0..r.gen_range(0..3)).map(|_| r.gen_range(0..9)).collect()),
        },
        _ => ConcreteSpec::Product((0..r.gen_range(1..4)).map(|_| concrete(r, depth - 1)).collect()),
    }
}

fn fact(r: &mut impl Rng) -> Fact {
    let kind = match r.gen_range(0..10) {
        0 => FactKind::Gd(extnat(r)),
        1 => FactKind::Cd(extnat(r)),
        2 => FactKind::Tc(extnat(r)),
        3 => FactKind::Cat(["tr", "fin", "am", "Cst"].choose(r).unwrap().to_string(), extnat(r)),
        4 => FactKind::Amenable(tri(r)),
        5 => FactKind::Finite(tri(r)),
        6 => FactKind::Trivial(r.gen()),
        7 => FactKind::Order(r.gen_range(1..100)),
        8 => FactKind::Member(ident(r), tri(r)),
        _ => FactKind::Concrete(concrete(r, 2)),
    };
    Fact { kind, provenance: r.gen_bool(0.5).then(|| text(r)) }
}

fn labels<T>(r: &mut impl Rng, mut one: impl FnMut(&mut ChaCha8Rng) -> T) -> Labels<T> {
    let mut rr = ChaCha8Rng::seed_from_u64(r.gen());
    if r.gen_bool(0.5) {
        Labels::Constant(one(&mut rr))
    } else {
        Labels::List((0..r.gen_range(0..5)).map(|_| one(&mut rr)).collect())
    }
}

fn boundary(r: &mut impl Rng, used: &mut BTreeSet<String>) -> BoundaryDecl {
    BoundaryDecl {
        name: name(r, "S", used),
        pi1: expr(r, 2),
        pi1_injective: r.gen(),
        cat_am: r.gen_bool(0.3).then(|| extnat(r)),
    }
}

fn decl(r: &mut impl Rng, groups: &mut BTreeSet<String>, others: &mut BTreeSet<String>) -> Decl {
    match r.gen_range(0..9) {
        0 => Decl::Group(GroupDecl {
            name: name(r, "G", groups),
            definition: r.gen_bool(0.5).then(|| expr(r, 3)),
            facts: (0..r.gen_range(0..4)).map(|_| fact(r)).collect(),
        }),
        1 => Decl::Family(FamilyDecl {
            name: name(r, "Fam", others),
            closure: r.gen_bool(0.5).then(|| text(r)),
            contains: r.gen_bool(0.5).then(|| ident(r)),
        }),
        2 => Decl::Graph(GraphDecl {
            name: name(r, "Gr", groups),
            vertices: (0..r.gen_range(0..4)).map(|i| (format!("v{i}"), expr(r, 2))).collect(),
            edges: (0..r.gen_range(0..3))
                .map(|i| EdgeDecl {
                    name: format!("e{i}"),
                    from: ident(r),
                    to: ident(r),
                    group: expr(r, 2),
                    via: r.gen_bool(0.3).then(|| (ident(r), ident(r))),
                })
                .collect(),
        }),
        3 => Decl::Polygon(PolygonDecl {
            name: name(r, "P", groups),
            d: r.gen_range(0..9),
            vertex: r.gen_bool(0.7).then(|| labels(r, |x| expr(x, 1))),
            edge: r.gen_bool(0.7).then(|| labels(r, |x| expr(x, 1))),
            face: r.gen_bool(0.7).then(|| expr(r, 1)),
            face_edge: r.gen_bool(0.5).then(|| labels(r, ident)),
            edge_vertex: r.gen_bool(0.5).then(|| labels(r, |x| (ident(x), ident(x)))),
            curvature_asserted: r.gen(),
        }),
        4 => Decl::Gcw(GcwDecl {
            name: name(r, "X", groups),
            contractible: r.gen(),
            dims: (0..r.gen_range(0..4)).map(|_| (r.gen_range(0..6), (0..r.gen_range(0..3)).map(|_| expr(r, 1)).collect())).collect(),
        }),
        5 => Decl::Hom(HomDecl {
            name: name(r, "f", others),
            source: ident(r),
            target: ident(r),
            images: (0..r.gen_range(0..4)).map(|_| r.gen_range(0..20)).collect(),
        }),
        6 => {
            let mut local = BTreeSet::new();
            Decl::Gluing(GluingDecl {
                name: name(r, "Glu", others),
                n: r.gen_range(0..8),
                pieces: (0..r.gen_range(0..3))
                    .map(|_| PieceDecl {
                        name: name(r, "M", &mut local),
                        pi1: expr(r, 2),
                        cat_am: r.gen_bool(0.3).then(|| extnat(r)),
                        boundaries: (0..r.gen_range(0..3)).map(|_| boundary(r, &mut local)).collect(),
                    })
                    .collect(),
                pairs: (0..r.gen_range(0..3)).map(|_| (ident(r), ident(r))).collect(),
                connected: r.gen(),
            })
        }
        7 => {
            let mut local = BTreeSet::new();
            Decl::Double(DoubleDecl {
                name: name(r, "Dbl", others),
                n: r.gen_range(0..8),
                pi1: expr(r, 3),
                cat_am: r.gen_bool(0.3).then(|| extnat(r)),
                boundaries: (0..r.gen_range(0..3)).map(|_| boundary(r, &mut local)).collect(),
                twist: r.gen(),
            })
        }
        _ => Decl::Branched(BranchedDecl {
            name: name(r, "Br", others),
            n: r.gen_range(0..8),
            d: r.gen_bool(0.7).then(|| r.gen_range(0..9)),
            w: expr(r, 2),
            m: expr(r, 2),
            dm: expr(r, 2),
            pi1_injective: r.gen(),
            intersection: r.gen(),
            maps: r.gen_bool(0.3).then(|| (ident(r), ident(r), ident(r))),
        }),
    }
}

/// A syntactically valid model in canonical form (names unique per
/// namespace; references need not resolve).
pub fn model(r: &mut impl Rng) -> SourceModel {
    let mut m = SourceModel::new("gen.catb");
    let (mut groups, mut others) = (BTreeSet::new(), BTreeSet::new());
    for _ in 0..r.gen_range(0..7) {
        // homs, families and setups have separate namespaces; keep their
        // names disjoint anyway so any namespace split is exercised safely
        m.push(decl(r, &mut groups, &mut others), Span::default());
    }
    m
}

// ---- G-CW descriptions with known stabilizer bounds ----

/// Atoms `C{c}G{g}` with `cat[am] <= c` and `gd <= g`, `c <= g`.
pub struct Pool {
    pub text: String,
    pub atoms: Vec<(String, u32, ExtNat)>,
}

pub fn pool() -> Pool {
    let mut text = String::new();
    let mut atoms = Vec::new();
    for c in 0..4u32 {
        for g in (c.max(1)..6).map(ExtNat::Finite).chain([ExtNat::Infinity]) {
            let name = format!("C{c}G{g}");
            text.push_str(&format!("group {name} {{ cat[am] <= {c}; gd <= {g} }}\n"));
            atoms.push((name, c, g));
        }
    }
    Pool { text, atoms }
}

/// Random description of dimension `n` with 1..=4 orbits per dimension;
/// returns it with the table of `(cat, gd)` per cell.
pub fn gcw(r: &mut impl Rng, pool: &Pool, n: usize) -> (GcwDescription, Vec<Vec<(u32, ExtNat)>>) {
    let mut dims = Vec::new();
    let mut table = Vec::new();
    for _ in 0..=n {
        let k = r.gen_range(1..=4);
        let picks: Vec<&(String, u32, ExtNat)> = (0..k).map(|_| pool.atoms.choose(r).unwrap()).collect();
        dims.push(picks.iter().map(|a| GroupExpr::atom(&a.0)).collect());
        table.push(picks.iter().map(|a| (a.1, a.2)).collect());
    }
    (GcwDescription { name: "X".into(), dims, contractible: true }, table)
}

fn plus(a: ExtNat, k: u32) -> ExtNat {
    match a {
        ExtNat::Finite(x) => ExtNat::Finite(x + k),
        ExtNat::Infinity => ExtNat::Infinity,
    }
}

/// `max{ sup cat G_v, sup over i ≥ 1 of (gd G_σ + i) }`.
pub fn closed_max(table: &[Vec<(u32, ExtNat)>]) -> ExtNat {
    let mut best = ExtNat::Finite(table[0].iter().map(|c| c.0).max().unwrap_or(0));
    for (i, cells) in table.iter().enumerate().skip(1) {
        for &(_, g) in cells {
            best = best.max(plus(g, i as u32));
        }
    }
    best
}

/// `sup cat G_v + Σ_i sup (cat G_σ + 1)`.
pub fn closed_sum(table: &[Vec<(u32, ExtNat)>]) -> ExtNat {
    let mut total = table[0].iter().map(|c| c.0).max().unwrap_or(0);
    for cells in &table[1..] {
        total += cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    }
    ExtNat::Finite(total)
}

/// `d_n` written out directly.
pub fn recursion_oracle(table: &[Vec<(u32, ExtNat)>], selected: impl Fn(usize) -> bool) -> ExtNat {
    let mut d = ExtNat::Finite(table[0].iter().map(|c| c.0).max().unwrap_or(0));
    for (i, cells) in table.iter().enumerate().skip(1) {
        d = if selected(i) {
            cells.iter().fold(d, |acc, &(_, g)| acc.max(plus(g, i as u32)))
        } else {
            let s = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
            match d {
                ExtNat::Finite(x) => ExtNat::Finite(x + s),
                ExtNat::Infinity => ExtNat::Infinity,
            }
        };
    }
    d
}

// ---- polygons of finite groups ----

pub struct RandomPolygon {
    pub face_edge: Vec<Homomorphism>,
    pub edge_vertex: Vec<(Homomorphism, Homomorphism)>,
}

fn small_group(r: &mut impl Rng) -> Arc<ConcreteFiniteGroup> {
    let c = |n| ConcreteFiniteGroup::cyclic(n).unwrap();
    let g = match r.gen_range(0..4) {
        0 | 1 => c(r.gen_range(1..=24)),
        2 => ConcreteFiniteGroup::product(&c(2), &c(*[2, 4, 6, 2].choose(r).unwrap())).unwrap(),
        _ => ConcreteFiniteGroup::product(&c(*[2, 3].choose(r).unwrap()), &c(*[3, 4, 6].choose(r).unwrap())).unwrap(),
    };
    Arc::new(g)
}

/// Elements `x` of `g` of order `k` with `x^e = target` (when given).
fn candidates(g: &ConcreteFiniteGroup, k: usize, root: Option<(usize, Elem)>) -> Vec<Elem> {
    g.elements()
        .filter(|&x| g.element_order(x) == k)
        .filter(|&x| root.is_none_or(|(e, t)| g.power(x, e) == t))
        .collect()
}

/// A random polygon of cyclic edge and face groups inside small vertex
/// groups (orders ≤ 24), with commuting inclusions.
pub fn polygon(r: &mut impl Rng) -> RandomPolygon {
    'retry: loop {
        let d = r.gen_range(3..=6);
        let vertices: Vec<_> = (0..d).map(|_| small_group(r)).collect();
        let f = *[1usize, 1, 2, 3].choose(r).unwrap();
        let face = Arc::new(ConcreteFiniteGroup::cyclic(f).unwrap());
        // image of the face generator in each vertex group
        let mut z = Vec::new();
        for v in &vertices {
            let c = candidates(v, f, None);
            let Some(&x) = c.choose(r) else { continue 'retry };
            z.push(x);
        }
        let mut face_edge = Vec::new();
        let mut edge_vertex = Vec::new();
        for i in 0..d {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % d]);
            let k = f * *[1usize, 1, 2, 3, 4].choose(r).unwrap();
            let edge = Arc::new(ConcreteFiniteGroup::cyclic(k).unwrap());
            let e = k / f;
            let ca = candidates(a, k, Some((e, z[i])));
            let cb = candidates(b, k, Some((e, z[(i + 1) % d])));
            let (Some(&xa), Some(&xb)) = (ca.choose(r), cb.choose(r)) else { continue 'retry };
            let gen = |x: Elem, tgt: &Arc<ConcreteFiniteGroup>| {
                let imgs: Vec<Elem> = if k == 1 { vec![] } else { vec![x] };
                Homomorphism::from_generator_images(edge.clone(), tgt.clone(), &imgs).unwrap()
            };
            let fe_imgs: Vec<Elem> = if f == 1 { vec![] } else { vec![edge.power(edge.generators()[0], e)] };
            face_edge.push(Homomorphism::from_generator_images(face.clone(), edge.clone(), &fe_imgs).unwrap());
            edge_vertex.push((gen(xa, a), gen(xb, b)));
        }
        return RandomPolygon { face_edge, edge_vertex };
    }
}

/// Curvature by direct enumeration: at every vertex, the elements hit by
/// both adjacent edge groups are exactly those hit by the face group.
/// Returns the first failing vertex with its intersection.
pub fn curvature_oracle(p: &RandomPolygon) -> Option<(usize, BTreeSet<Elem>)> {
    let d = p.face_edge.len();
    for v in 0..d {
        let next = &p.edge_vertex[v].0;
        let prev = &p.edge_vertex[(v + d - 1) % d].1;
        let hits = |h: &Homomorphism| -> BTreeSet<Elem> { h.source().elements().map(|x| h.apply(x)).collect() };
        let both: BTreeSet<Elem> = hits(next).intersection(&hits(prev)).copied().collect();
        let fe = &p.face_edge[v];
        let face: BTreeSet<Elem> = fe.source().elements().map(|x| next.apply(fe.apply(x))).collect();
        if both != face {
            return Some((v, both));
        }
    }
    None
}

/// Counts per depth of a ball of radius `r` in the `(p, q)`-biregular tree
/// around a vertex of degree `p`.
pub fn biregular_counts(p: usize, q: usize, r: usize) -> Vec<usize> {
    let mut counts = vec![1];
    for depth in 1..=r {
        let prev = counts[depth - 1];
        // children of a vertex at depth ≥ 1: its degree minus its parent
        let c = if depth == 1 { p } else if depth % 2 == 0 { prev * (q - 1) } else { prev * (p - 1) };
        counts.push(c);
    }
    counts
}

pub fn union_find_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

pub fn count_by<T: Ord + Clone>(xs: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

// ---- certificate fixtures and their single-hypothesis mutations ----

pub const EX_DOUBLE_MAX: (&str, &str) = ("ex_twisted_double_max.catb", "Ex310");
pub const EX_DOUBLE_SUM: (&str, &str) = ("ex_twisted_double_sum.catb", "Ex311");
pub const EX_BRANCHED: (&str, &str) = ("ex_branched.catb", "Ex46");

/// One hypothesis broken by a textual edit of a fixture.
pub struct Mutation {
    pub fixture: (&'static str, &'static str),
    pub what: &'static str,
    pub from: &'static str,
    pub to: &'static str,
    /// Extra declarations the edit needs.
    pub prepend: &'static str,
    /// Ledger id that must be reported as failed.
    pub expect: &'static str,
}

impl Mutation {
    pub fn text(&self) -> String {
        let base = fixture(self.fixture.0);
        assert!(base.contains(self.from), "{}: `{}` not in fixture", self.what, self.from);
        format!("{}\n{}", self.prepend, base.replacen(self.from, self.to, 1))
    }
}

const BIG: &str = "group B2 { gd <= 2 }\ngroup B3 { gd <= 3 }\ngroup P4 { gd <= 4 }";

pub fn mutations() -> Vec<Mutation> {
    let m = |fixture, what, from, to, expect| Mutation { fixture, what, from, to, prepend: BIG, expect };
    vec![
        m(EX_DOUBLE_MAX, "boundary not π1-injective", "; pi1_injective = assert", "", "Thm 3.5(i)"),
        m(EX_DOUBLE_MAX, "gd of the boundary group is n − 1", "pi1 = F2", "pi1 = B3", "Thm 3.5(ii)"),
        m(EX_DOUBLE_MAX, "cat_am of the piece group is n", "pi1 = (PV x Z) * (PV x Z)", "pi1 = P4 * P4", "Thm 3.5(iii)"),
        m(EX_DOUBLE_SUM, "boundary not π1-injective", "; pi1_injective = assert", "", "Thm 3.5(i)"),
        m(EX_DOUBLE_SUM, "boundary category too large", "pi1 = Zn3 * Zn3", "pi1 = B3", "Thm 3.1"),
        m(EX_DOUBLE_SUM, "piece category too large", "pi1 = (F2 x Zn2) * (F2 x Zn2)", "pi1 = B2 * B2", "Thm 3.1"),
        m(EX_BRANCHED, "(i) not asserted", "pi1_injective = assert", "", "Thm 4.4(i)"),
        m(EX_BRANCHED, "(ii) not asserted", "intersection = assert", "", "Thm 4.4(ii)"),
        m(EX_BRANCHED, "gd of dM is n − 2", "dM = 1", "dM = Zn2", "Thm 4.4(iii)"),
        m(EX_BRANCHED, "gd of M is n − 1", "M = Z\n", "M = Zn3\n", "Thm 4.4(iv)"),
        m(EX_BRANCHED, "cat_am of W is n", "W = (PV x Z) * (PV x Z)", "W = P4 * P4", "Thm 4.4(v)"),
    ]
}

/// Certifies the named double or branched setup in `text`.
pub fn certify(text: &str, target: &str, d: Option<u32>) -> Result<catbound::apps::Certificate, catbound::apps::AppError> {
    let u = universe(text);
    let e = catbound::engine::Engine::new(&u);
    if let Some(s) = u.doubles.get(target) {
        catbound::apps::certify_double(&e, s)
    } else if let Some(s) = u.gluings.get(target) {
        catbound::apps::certify_gluing(&e, s)
    } else {
        catbound::apps::certify_branched(&e, &u.brancheds[target], d)
    }
}
