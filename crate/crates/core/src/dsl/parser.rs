//! Hand-written LL(1) parser for `.catb` files.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::extnat::ExtNat;
use crate::facts::Tri;
use crate::model::GroupExpr;

/// Identifiers with a fixed meaning inside group expressions.
pub const RESERVED: [&str; 4] = ["x", "free", "product", "freeprod"];

const DECL_KEYWORDS: [&str; 11] =
    ["group", "family", "graph", "amalgam", "hnn", "polygon", "gcw", "hom", "gluing", "double", "branched"];

const MAX_DEPTH: usize = 64;

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

/// Parses a whole file. Any input yields either a model or at least one
/// positioned diagnostic.
pub fn parse(file: &str, text: &str) -> Result<SourceModel, Vec<Diagnostic>> {
    let toks = match tokenize(text) {
        Ok(t) => t,
        Err(e) => return Err(vec![Diagnostic::new(file, e.span, e.message)]),
    };
    let mut p = Parser { file, toks, pos: 0, depth: 0 };
    let mut model = SourceModel::new(file);
    let mut diags = Vec::new();
    while p.peek() != &Tok::Eof {
        let span = p.span();
        match p.decl() {
            Ok(d) => model.push(d, span),
            Err(d) => {
                diags.push(d);
                p.recover();
            }
        }
    }
    diags.extend(duplicate_names(&model));
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(diags)
    }
}

/// Like [`parse`] but accepts raw bytes, reporting invalid UTF-8 as a
/// diagnostic.
pub fn parse_bytes(file: &str, bytes: &[u8]) -> Result<SourceModel, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(file, text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let text = String::from_utf8_lossy(valid);
            let line = text.matches('\n').count() + 1;
            let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![Diagnostic::new(file, Span { line, column }, "invalid UTF-8 in input")])
        }
    }
}

fn duplicate_names(model: &SourceModel) -> Vec<Diagnostic> {
    let mut seen: BTreeMap<(Namespace, &str), Span> = BTreeMap::new();
    let mut out = Vec::new();
    for (decl, span) in model.iter() {
        let key = (decl.namespace(), decl.name());
        if let Some(first) = seen.get(&key) {
            out.push(Diagnostic::new(
                &model.file,
                span,
                format!("duplicate {} name `{}` (first declared at {first})", key.0, key.1),
            ));
        } else {
            seen.insert(key, span);
        }
    }
    out
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::new(self.file, self.span(), format!("expected {expected}, found {}", self.peek())))
    }

    fn fail<T>(&self, span: Span, message: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(self.file, span, message))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&t.to_string())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    /// A name introduced by a declaration; reserved words are rejected.
    fn binder(&mut self, what: &str) -> PResult<String> {
        let span = self.span();
        let name = self.ident(what)?;
        if RESERVED.contains(&name.as_str()) {
            return self.fail(span, format!("`{name}` is reserved and cannot be used as a name"));
        }
        Ok(name)
    }

    fn int(&mut self, what: &str) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error(what),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("string literal"),
        }
    }

    fn extnat(&mut self) -> PResult<ExtNat> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                match u32::try_from(n) {
                    Ok(v) => Ok(ExtNat::Finite(v)),
                    Err(_) => self.fail(span, format!("bound {n} exceeds 2^32-1")),
                }
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(ExtNat::Infinity)
            }
            _ => self.error("a bound (integer or `inf`)"),
        }
    }

    fn tri(&mut self) -> PResult<Tri> {
        let span = self.span();
        let s = self.ident("`yes`, `no` or `unknown`")?;
        s.parse().or_else(|_| self.fail(span, format!("expected `yes`, `no` or `unknown`, found `{s}`")))
    }

    fn assert_kw(&mut self) -> PResult<bool> {
        self.expect(Tok::Eq)?;
        self.expect_kw("assert")?;
        Ok(true)
    }

    fn semis(&mut self) {
        while self.eat(&Tok::Semi) {}
    }

    /// Skips to the next top-level declaration keyword.
    fn recover(&mut self) {
        let mut depth = 0usize;
        // always make progress
        let start = self.pos;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth = depth.saturating_sub(1),
                Tok::Ident(s) if depth == 0 && self.pos > start && DECL_KEYWORDS.contains(&s.as_str()) => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.fail(self.span(), format!("nesting deeper than {MAX_DEPTH} levels"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // ---- declarations ----

    fn decl(&mut self) -> PResult<Decl> {
        let kw = match self.peek() {
            Tok::Ident(s) if DECL_KEYWORDS.contains(&s.as_str()) => s.clone(),
            _ => return self.error(&format!("a declaration ({})", DECL_KEYWORDS.join(", "))),
        };
        self.bump();
        let d = match kw.as_str() {
            "group" => self.group_decl()?,
            "family" => self.family_decl()?,
            "graph" => self.graph_decl()?,
            "amalgam" => self.amalgam_decl(false)?,
            "hnn" => self.amalgam_decl(true)?,
            "polygon" => self.polygon_decl()?,
            "gcw" => self.gcw_decl()?,
            "hom" => self.hom_decl()?,
            "gluing" => self.gluing_decl()?,
            "double" => self.double_decl()?,
            "branched" => self.branched_decl()?,
            _ => unreachable!("checked against DECL_KEYWORDS"),
        };
        self.semis();
        Ok(d)
    }

    fn group_decl(&mut self) -> PResult<Decl> {
        let name = self.binder("group name")?;
        let definition = if self.eat(&Tok::Eq) { Some(self.expr()?) } else { None };
        let mut facts = Vec::new();
        if self.eat(&Tok::LBrace) {
            self.semis();
            while !self.eat(&Tok::RBrace) {
                facts.push(self.fact()?);
                self.semis();
            }
        }
        Ok(Decl::Group(GroupDecl { name, definition, facts }))
    }

    fn fact(&mut self) -> PResult<Fact> {
        let span = self.span();
        let key = self.ident("a fact (gd, cd, tc, cat[..], amenable, finite, trivial, order, member[..], concrete)")?;
        let kind = match key.as_str() {
            "gd" | "cd" | "tc" => {
                self.expect(Tok::Le)?;
                let v = self.extnat()?;
                match key.as_str() {
                    "gd" => FactKind::Gd(v),
                    "cd" => FactKind::Cd(v),
                    _ => FactKind::Tc(v),
                }
            }
            "cat" => {
                self.expect(Tok::LBracket)?;
                let fam = self.ident("family name")?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Le)?;
                FactKind::Cat(fam, self.extnat()?)
            }
            "amenable" => {
                self.expect(Tok::Eq)?;
                FactKind::Amenable(self.tri()?)
            }
            "finite" => {
                self.expect(Tok::Eq)?;
                FactKind::Finite(self.tri()?)
            }
            "trivial" => {
                self.expect(Tok::Eq)?;
                let s = self.span();
                match self.ident("`true` or `false`")?.as_str() {
                    "true" => FactKind::Trivial(true),
                    "false" => FactKind::Trivial(false),
                    other => return self.fail(s, format!("expected `true` or `false`, found `{other}`")),
                }
            }
            "order" => {
                self.expect(Tok::Eq)?;
                FactKind::Order(self.int("group order")?)
            }
            "member" => {
                self.expect(Tok::LBracket)?;
                let fam = self.ident("family name")?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Eq)?;
                FactKind::Member(fam, self.tri()?)
            }
            "concrete" => {
                self.expect(Tok::Eq)?;
                FactKind::Concrete(self.concrete()?)
            }
            other => return self.fail(span, format!("unknown fact `{other}`")),
        };
        let provenance = if self.eat(&Tok::At) { Some(self.string()?) } else { None };
        Ok(Fact { kind, provenance })
    }

    fn concrete(&mut self) -> PResult<ConcreteSpec> {
        self.enter()?;
        let out = if self.eat_kw("cyclic") {
            self.expect(Tok::LParen)?;
            let n = self.int("cyclic group order")?;
            self.expect(Tok::RParen)?;
            ConcreteSpec::Cyclic(n)
        } else if self.eat_kw("product") {
            self.expect(Tok::LParen)?;
            let mut parts = vec![self.concrete()?];
            while self.eat(&Tok::Comma) {
                parts.push(self.concrete()?);
            }
            self.expect(Tok::RParen)?;
            ConcreteSpec::Product(parts)
        } else if self.eat_kw("table") {
            self.expect(Tok::LBracket)?;
            let mut rows = vec![self.int_list()?];
            while self.eat(&Tok::Comma) {
                rows.push(self.int_list()?);
            }
            self.expect(Tok::RBracket)?;
            let gens = if self.eat_kw("gens") { Some(self.int_list()?) } else { None };
            ConcreteSpec::Table { rows, gens }
        } else {
            ConcreteSpec::Named(self.ident("`cyclic(n)`, `product(..)`, `table [..]` or a group name")?)
        };
        self.leave();
        Ok(out)
    }

    fn int_list(&mut self) -> PResult<Vec<u64>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            out.push(self.int("integer")?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn family_decl(&mut self) -> PResult<Decl> {
        let span = self.span();
        let name = self.binder("family name")?;
        if crate::facts::Family::builtin(&name).is_some() {
            return self.fail(span, format!("`{name}` is a built-in family"));
        }
        let (mut closure, mut contains) = (None, None);
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            match self.ident("`closure` or `contains`")?.as_str() {
                "closure" if closure.is_none() => {
                    self.expect(Tok::Eq)?;
                    closure = Some(self.string()?);
                }
                "contains" if contains.is_none() => {
                    self.expect(Tok::Eq)?;
                    contains = Some(self.ident("family name")?);
                }
                other => return self.fail(s, format!("unexpected or repeated family item `{other}`")),
            }
            self.semis();
        }
        Ok(Decl::Family(FamilyDecl { name, closure, contains }))
    }

    fn via(&mut self) -> PResult<Option<(String, String)>> {
        if self.eat_kw("via") {
            let a = self.ident("homomorphism name")?;
            self.expect(Tok::Comma)?;
            let b = self.ident("homomorphism name")?;
            Ok(Some((a, b)))
        } else {
            Ok(None)
        }
    }

    fn graph_decl(&mut self) -> PResult<Decl> {
        let name = self.binder("graph name")?;
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("vertex") {
                let v = self.ident("vertex name")?;
                self.expect(Tok::Eq)?;
                vertices.push((v, self.expr()?));
            } else if self.eat_kw("edge") {
                let e = self.ident("edge name")?;
                self.expect(Tok::Colon)?;
                let from = self.ident("vertex name")?;
                self.expect(Tok::DashDash)?;
                let to = self.ident("vertex name")?;
                self.expect(Tok::Eq)?;
                let group = self.expr()?;
                let via = self.via()?;
                edges.push(EdgeDecl { name: e, from, to, group, via });
            } else {
                return self.error("`vertex`, `edge` or `}`");
            }
            self.semis();
        }
        Ok(Decl::Graph(GraphDecl { name, vertices, edges }))
    }

    /// `amalgam G = A *[C] B` and `hnn G = A *[C]`, desugared to graphs.
    fn amalgam_decl(&mut self, hnn: bool) -> PResult<Decl> {
        let name = self.binder("group name")?;
        self.expect(Tok::Eq)?;
        let left = self.term()?;
        self.expect(Tok::Star)?;
        self.expect(Tok::LBracket)?;
        let edge = self.expr()?;
        self.expect(Tok::RBracket)?;
        let mut vertices = vec![("v0".to_string(), left)];
        let to = if hnn {
            "v0"
        } else {
            vertices.push(("v1".to_string(), self.term()?));
            "v1"
        };
        let via = self.via()?;
        Ok(Decl::Graph(GraphDecl {
            name,
            vertices,
            edges: vec![EdgeDecl { name: "e0".into(), from: "v0".into(), to: to.into(), group: edge, via }],
        }))
    }

    fn expr_labels(&mut self) -> PResult<Labels<GroupExpr>> {
        if self.eat(&Tok::LBracket) {
            let xs = self.expr_list(Tok::RBracket)?;
            Ok(Labels::List(xs))
        } else {
            Ok(Labels::Constant(self.expr()?))
        }
    }

    fn name_labels(&mut self) -> PResult<Labels<String>> {
        if self.eat(&Tok::LBracket) {
            let mut xs = Vec::new();
            if !self.eat(&Tok::RBracket) {
                loop {
                    xs.push(self.ident("homomorphism name")?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
            }
            Ok(Labels::List(xs))
        } else {
            Ok(Labels::Constant(self.ident("homomorphism name or `[`")?))
        }
    }

    fn pair(&mut self) -> PResult<(String, String)> {
        self.expect(Tok::LParen)?;
        let a = self.ident("homomorphism name")?;
        self.expect(Tok::Comma)?;
        let b = self.ident("homomorphism name")?;
        self.expect(Tok::RParen)?;
        Ok((a, b))
    }

    fn pair_labels(&mut self) -> PResult<Labels<(String, String)>> {
        if self.eat(&Tok::LBracket) {
            let mut xs = Vec::new();
            if !self.eat(&Tok::RBracket) {
                loop {
                    xs.push(self.pair()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
            }
            Ok(Labels::List(xs))
        } else {
            Ok(Labels::Constant(self.pair()?))
        }
    }

    fn polygon_decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        let name = self.binder("polygon name")?;
        let mut p = PolygonDecl {
            name,
            d: 0,
            vertex: None,
            edge: None,
            face: None,
            face_edge: None,
            edge_vertex: None,
            curvature_asserted: false,
        };
        let mut have_d = false;
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            let key = self.ident("a polygon item (d, vertex, edge, face, face_edge, edge_vertex, curvature)")?;
            let repeated = match key.as_str() {
                "d" => std::mem::replace(&mut have_d, true),
                "vertex" => p.vertex.is_some(),
                "edge" => p.edge.is_some(),
                "face" => p.face.is_some(),
                "face_edge" => p.face_edge.is_some(),
                "edge_vertex" => p.edge_vertex.is_some(),
                "curvature" => p.curvature_asserted,
                other => return self.fail(s, format!("unknown polygon item `{other}`")),
            };
            if repeated {
                return self.fail(s, format!("polygon item `{key}` given twice"));
            }
            match key.as_str() {
                "d" => {
                    self.expect(Tok::Eq)?;
                    p.d = self.int("number of sides")?;
                }
                "vertex" => {
                    self.expect(Tok::Eq)?;
                    p.vertex = Some(self.expr_labels()?);
                }
                "edge" => {
                    self.expect(Tok::Eq)?;
                    p.edge = Some(self.expr_labels()?);
                }
                "face" => {
                    self.expect(Tok::Eq)?;
                    p.face = Some(self.expr()?);
                }
                "face_edge" => {
                    self.expect(Tok::Eq)?;
                    p.face_edge = Some(self.name_labels()?);
                }
                "edge_vertex" => {
                    self.expect(Tok::Eq)?;
                    p.edge_vertex = Some(self.pair_labels()?);
                }
                _ => p.curvature_asserted = self.assert_kw()?,
            }
            self.semis();
        }
        if !have_d {
            return self.fail(start, "polygon requires `d = <number of sides>`");
        }
        Ok(Decl::Polygon(p))
    }

    fn gcw_decl(&mut self) -> PResult<Decl> {
        let name = self.binder("complex name")?;
        let mut g = GcwDecl { name, contractible: false, dims: Vec::new() };
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("contractible") {
                g.contractible = self.assert_kw()?;
            } else if self.eat_kw("dim") {
                let k = self.int("dimension")?;
                self.expect(Tok::Eq)?;
                self.expect(Tok::LBracket)?;
                g.dims.push((k, self.expr_list(Tok::RBracket)?));
            } else {
                return self.error("`contractible`, `dim` or `}`");
            }
            self.semis();
        }
        Ok(Decl::Gcw(g))
    }

    fn hom_decl(&mut self) -> PResult<Decl> {
        let name = self.binder("homomorphism name")?;
        self.expect(Tok::Colon)?;
        let source = self.ident("source group")?;
        self.expect(Tok::Arrow)?;
        let target = self.ident("target group")?;
        self.expect(Tok::Eq)?;
        let images = self.int_list()?;
        Ok(Decl::Hom(HomDecl { name, source, target, images }))
    }

    fn boundary(&mut self) -> PResult<BoundaryDecl> {
        let start = self.span();
        let name = self.ident("boundary name")?;
        let (mut pi1, mut inj, mut cat) = (None, false, None);
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            match self.ident("`pi1`, `pi1_injective` or `cat_am`")?.as_str() {
                "pi1" if pi1.is_none() => {
                    self.expect(Tok::Eq)?;
                    pi1 = Some(self.expr()?);
                }
                "pi1_injective" if !inj => inj = self.assert_kw()?,
                "cat_am" if cat.is_none() => {
                    self.expect(Tok::Le)?;
                    cat = Some(self.extnat()?);
                }
                other => return self.fail(s, format!("unexpected or repeated boundary item `{other}`")),
            }
            self.semis();
        }
        let Some(pi1) = pi1 else {
            return self.fail(start, format!("boundary `{name}` requires `pi1 = <group>`"));
        };
        Ok(BoundaryDecl { name, pi1, pi1_injective: inj, cat_am: cat })
    }

    fn piece(&mut self) -> PResult<PieceDecl> {
        let start = self.span();
        let name = self.ident("piece name")?;
        let (mut pi1, mut cat, mut boundaries) = (None, None, Vec::new());
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            match self.ident("`pi1`, `cat_am` or `boundary`")?.as_str() {
                "pi1" if pi1.is_none() => {
                    self.expect(Tok::Eq)?;
                    pi1 = Some(self.expr()?);
                }
                "cat_am" if cat.is_none() => {
                    self.expect(Tok::Le)?;
                    cat = Some(self.extnat()?);
                }
                "boundary" => boundaries.push(self.boundary()?),
                other => return self.fail(s, format!("unexpected or repeated piece item `{other}`")),
            }
            self.semis();
        }
        let Some(pi1) = pi1 else {
            return self.fail(start, format!("piece `{name}` requires `pi1 = <group>`"));
        };
        Ok(PieceDecl { name, pi1, cat_am: cat, boundaries })
    }

    fn dimension(&mut self, n: &mut Option<u64>, s: Span) -> PResult<()> {
        if n.is_some() {
            return self.fail(s, "item `n` given twice");
        }
        self.expect(Tok::Eq)?;
        *n = Some(self.int("manifold dimension")?);
        Ok(())
    }

    fn gluing_decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        let name = self.binder("setup name")?;
        let (mut n, mut pieces, mut pairs, mut connected) = (None, Vec::new(), Vec::new(), false);
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            match self.ident("`n`, `piece`, `pair` or `connected`")?.as_str() {
                "n" => self.dimension(&mut n, s)?,
                "piece" => pieces.push(self.piece()?),
                "pair" => {
                    let a = self.ident("boundary name")?;
                    self.expect(Tok::DashDash)?;
                    let b = self.ident("boundary name")?;
                    pairs.push((a, b));
                }
                "connected" if !connected => connected = self.assert_kw()?,
                other => return self.fail(s, format!("unexpected or repeated gluing item `{other}`")),
            }
            self.semis();
        }
        let Some(n) = n else { return self.fail(start, "gluing requires `n = <dimension>`") };
        Ok(Decl::Gluing(GluingDecl { name, n, pieces, pairs, connected }))
    }

    fn double_decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        let name = self.binder("setup name")?;
        let (mut n, mut pi1, mut cat, mut boundaries, mut twist) = (None, None, None, Vec::new(), None);
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            match self.ident("`n`, `pi1`, `cat_am`, `boundary` or `twist`")?.as_str() {
                "n" => self.dimension(&mut n, s)?,
                "pi1" if pi1.is_none() => {
                    self.expect(Tok::Eq)?;
                    pi1 = Some(self.expr()?);
                }
                "cat_am" if cat.is_none() => {
                    self.expect(Tok::Le)?;
                    cat = Some(self.extnat()?);
                }
                "boundary" => boundaries.push(self.boundary()?),
                "twist" if twist.is_none() => {
                    self.expect(Tok::Eq)?;
                    let s = self.span();
                    twist = Some(match self.ident("`yes` or `no`")?.as_str() {
                        "yes" => true,
                        "no" => false,
                        other => return self.fail(s, format!("expected `yes` or `no`, found `{other}`")),
                    });
                }
                other => return self.fail(s, format!("unexpected or repeated double item `{other}`")),
            }
            self.semis();
        }
        let Some(n) = n else { return self.fail(start, "double requires `n = <dimension>`") };
        let Some(pi1) = pi1 else { return self.fail(start, "double requires `pi1 = <group>`") };
        Ok(Decl::Double(DoubleDecl { name, n, pi1, cat_am: cat, boundaries, twist: twist.unwrap_or(false) }))
    }

    fn branched_decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        let name = self.binder("setup name")?;
        let mut n = None;
        let mut d = None;
        let (mut w, mut m, mut dm) = (None, None, None);
        let (mut inj, mut inter, mut maps) = (false, false, None);
        self.expect(Tok::LBrace)?;
        self.semis();
        while !self.eat(&Tok::RBrace) {
            let s = self.span();
            let key = self.ident("`n`, `d`, `W`, `M`, `dM`, `pi1_injective`, `intersection` or `maps`")?;
            match key.as_str() {
                "n" => self.dimension(&mut n, s)?,
                "d" if d.is_none() => {
                    self.expect(Tok::Eq)?;
                    d = Some(self.int("number of sheets")?);
                }
                "W" | "M" | "dM" => {
                    let slot = match key.as_str() {
                        "W" => &mut w,
                        "M" => &mut m,
                        _ => &mut dm,
                    };
                    if slot.is_some() {
                        return self.fail(s, format!("item `{key}` given twice"));
                    }
                    self.expect(Tok::Eq)?;
                    *slot = Some(self.expr()?);
                }
                "pi1_injective" if !inj => inj = self.assert_kw()?,
                "intersection" if !inter => inter = self.assert_kw()?,
                "maps" if maps.is_none() => {
                    self.expect(Tok::Eq)?;
                    self.expect(Tok::LParen)?;
                    let a = self.ident("homomorphism M -> W")?;
                    self.expect(Tok::Comma)?;
                    let b = self.ident("homomorphism -M -> W")?;
                    self.expect(Tok::Comma)?;
                    let c = self.ident("homomorphism dM -> M")?;
                    self.expect(Tok::RParen)?;
                    maps = Some((a, b, c));
                }
                other => return self.fail(s, format!("unexpected or repeated branched item `{other}`")),
            }
            self.semis();
        }
        let Some(n) = n else { return self.fail(start, "branched requires `n = <dimension>`") };
        let (Some(w), Some(m), Some(dm)) = (w, m, dm) else {
            return self.fail(start, "branched requires `W`, `M` and `dM` groups");
        };
        Ok(Decl::Branched(BranchedDecl { name, n, d, w, m, dm, pi1_injective: inj, intersection: inter, maps }))
    }

    // ---- expressions ----

    fn expr_list(&mut self, close: Tok) -> PResult<Vec<GroupExpr>> {
        let mut xs = Vec::new();
        if self.eat(&close) {
            return Ok(xs);
        }
        loop {
            xs.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(close)?;
        Ok(xs)
    }

    /// `expr := term ('*' term)*`, but `*` directly followed by `[` is left
    /// for the amalgam syntax.
    pub(crate) fn expr(&mut self) -> PResult<GroupExpr> {
        self.enter()?;
        let first = self.term()?;
        let mut xs = vec![first];
        while self.peek() == &Tok::Star && self.peek_at(1) != &Tok::LBracket {
            self.bump();
            xs.push(self.term()?);
        }
        self.leave();
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { GroupExpr::FreeProduct(xs) })
    }

    fn term(&mut self) -> PResult<GroupExpr> {
        let first = self.factor()?;
        let mut xs = vec![first];
        while self.is_kw("x") {
            self.bump();
            xs.push(self.factor()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { GroupExpr::DirectProduct(xs) })
    }

    fn factor(&mut self) -> PResult<GroupExpr> {
        let base = self.base()?;
        if self.eat(&Tok::Caret) {
            let span = self.span();
            let k = self.int("exponent")?;
            if k > 64 {
                return self.fail(span, "exponent larger than 64");
            }
            return Ok(GroupExpr::power(base, k as usize));
        }
        Ok(base)
    }

    fn base(&mut self) -> PResult<GroupExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(1) => {
                self.bump();
                Ok(GroupExpr::Trivial)
            }
            Tok::LParen => {
                self.bump();
                self.enter()?;
                let e = self.expr()?;
                self.leave();
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "free" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let s2 = self.span();
                let k = self.int("free rank")?;
                if k > 64 {
                    return self.fail(s2, "free rank larger than 64");
                }
                self.expect(Tok::RParen)?;
                Ok(GroupExpr::free_group(k as usize))
            }
            Tok::Ident(s) if s == "product" || s == "freeprod" => {
                self.bump();
                self.expect(Tok::LParen)?;
                self.enter()?;
                let xs = self.expr_list(Tok::RParen)?;
                self.leave();
                Ok(if s == "product" { GroupExpr::DirectProduct(xs) } else { GroupExpr::FreeProduct(xs) })
            }
            Tok::Ident(s) if s == "x" => self.fail(span, "expected group expression, found operator `x`"),
            Tok::Ident(s) => {
                self.bump();
                Ok(GroupExpr::Atom(s))
            }
            _ => self.error("group expression"),
        }
    }
}

/// Parses a standalone group expression.
pub fn parse_expr(text: &str) -> Result<GroupExpr, Diagnostic> {
    let toks = tokenize(text).map_err(|e| Diagnostic::new("<expr>", e.span, e.message))?;
    let mut p = Parser { file: "<expr>", toks, pos: 0, depth: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return p.error("end of expression");
    }
    Ok(e)
}
