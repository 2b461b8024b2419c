//! Syntax tree of a `.catb` file. Names are not resolved here.

use std::fmt;

use crate::extnat::ExtNat;
use crate::facts::Tri;
use crate::model::GroupExpr;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A positioned message from parsing or validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: String,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(file: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { file: file.to_string(), span, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.span, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConcreteSpec {
    Cyclic(u64),
    Product(Vec<ConcreteSpec>),
    Table { rows: Vec<Vec<u64>>, gens: Option<Vec<u64>> },
    /// Reuse the concrete group of another atom.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactKind {
    Gd(ExtNat),
    Cd(ExtNat),
    Tc(ExtNat),
    Cat(String, ExtNat),
    Amenable(Tri),
    Finite(Tri),
    Trivial(bool),
    Order(u64),
    Member(String, Tri),
    Concrete(ConcreteSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub kind: FactKind,
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDecl {
    pub name: String,
    pub definition: Option<GroupExpr>,
    pub facts: Vec<Fact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyDecl {
    pub name: String,
    pub closure: Option<String>,
    pub contains: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDecl {
    pub name: String,
    pub from: String,
    pub to: String,
    pub group: GroupExpr,
    /// Homomorphism names into the `from` and `to` vertex groups.
    pub via: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDecl {
    pub name: String,
    pub vertices: Vec<(String, GroupExpr)>,
    pub edges: Vec<EdgeDecl>,
}

/// Either one label repeated around the polygon or one label per position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labels<T> {
    Constant(T),
    List(Vec<T>),
}

impl<T: Clone> Labels<T> {
    /// Expands to exactly `d` entries, or `None` on a length mismatch.
    pub fn expand(&self, d: usize) -> Option<Vec<T>> {
        match self {
            Labels::Constant(x) => Some(vec![x.clone(); d]),
            Labels::List(xs) if xs.len() == d => Some(xs.clone()),
            Labels::List(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolygonDecl {
    pub name: String,
    pub d: u64,
    pub vertex: Option<Labels<GroupExpr>>,
    pub edge: Option<Labels<GroupExpr>>,
    pub face: Option<GroupExpr>,
    pub face_edge: Option<Labels<String>>,
    pub edge_vertex: Option<Labels<(String, String)>>,
    pub curvature_asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcwDecl {
    pub name: String,
    pub contractible: bool,
    /// `dim k = [...]` entries in file order.
    pub dims: Vec<(u64, Vec<GroupExpr>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub images: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryDecl {
    pub name: String,
    pub pi1: GroupExpr,
    pub pi1_injective: bool,
    pub cat_am: Option<ExtNat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceDecl {
    pub name: String,
    pub pi1: GroupExpr,
    pub cat_am: Option<ExtNat>,
    pub boundaries: Vec<BoundaryDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingDecl {
    pub name: String,
    pub n: u64,
    pub pieces: Vec<PieceDecl>,
    pub pairs: Vec<(String, String)>,
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleDecl {
    pub name: String,
    pub n: u64,
    pub pi1: GroupExpr,
    pub cat_am: Option<ExtNat>,
    pub boundaries: Vec<BoundaryDecl>,
    pub twist: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchedDecl {
    pub name: String,
    pub n: u64,
    pub d: Option<u64>,
    pub w: GroupExpr,
    pub m: GroupExpr,
    pub dm: GroupExpr,
    pub pi1_injective: bool,
    pub intersection: bool,
    /// `(M -> W, -M -> W, dM -> M)` homomorphism names.
    pub maps: Option<(String, String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Group(GroupDecl),
    Family(FamilyDecl),
    Graph(GraphDecl),
    Polygon(PolygonDecl),
    Gcw(GcwDecl),
    Hom(HomDecl),
    Gluing(GluingDecl),
    Double(DoubleDecl),
    Branched(BranchedDecl),
}

/// Separate name spaces of a universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Namespace {
    Groups,
    Families,
    Homs,
    Setups,
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Namespace::Groups => "group",
            Namespace::Families => "family",
            Namespace::Homs => "homomorphism",
            Namespace::Setups => "setup",
        })
    }
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Group(d) => &d.name,
            Decl::Family(d) => &d.name,
            Decl::Graph(d) => &d.name,
            Decl::Polygon(d) => &d.name,
            Decl::Gcw(d) => &d.name,
            Decl::Hom(d) => &d.name,
            Decl::Gluing(d) => &d.name,
            Decl::Double(d) => &d.name,
            Decl::Branched(d) => &d.name,
        }
    }

    pub fn namespace(&self) -> Namespace {
        match self {
            Decl::Group(_) | Decl::Graph(_) | Decl::Polygon(_) | Decl::Gcw(_) => Namespace::Groups,
            Decl::Family(_) => Namespace::Families,
            Decl::Hom(_) => Namespace::Homs,
            Decl::Gluing(_) | Decl::Double(_) | Decl::Branched(_) => Namespace::Setups,
        }
    }
}

/// Declarations in file order with a parallel list of positions.
/// Equality ignores positions.
#[derive(Debug, Clone, Default)]
pub struct SourceModel {
    pub file: String,
    pub decls: Vec<Decl>,
    pub spans: Vec<Span>,
}

impl PartialEq for SourceModel {
    fn eq(&self, other: &Self) -> bool {
        self.decls == other.decls
    }
}

impl Eq for SourceModel {}

impl SourceModel {
    pub fn new(file: &str) -> Self {
        SourceModel { file: file.to_string(), decls: Vec::new(), spans: Vec::new() }
    }

    pub fn push(&mut self, decl: Decl, span: Span) {
        self.decls.push(decl);
        self.spans.push(span);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Decl, Span)> {
        self.decls.iter().zip(self.spans.iter().copied())
    }

    pub fn find(&self, name: &str, ns: Namespace) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name() == name && d.namespace() == ns)
    }
}
