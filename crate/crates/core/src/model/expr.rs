use std::fmt;

/// A description of a group built from named pieces.
///
/// Bare names are parsed as [`GroupExpr::Atom`]; loading a universe rewrites
/// names of graphs, polygons and G-CW descriptions into the matching
/// reference variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupExpr {
    Atom(String),
    Trivial,
    DirectProduct(Vec<GroupExpr>),
    FreeProduct(Vec<GroupExpr>),
    GraphOfGroupsRef(String),
    PolygonRef(String),
    GcwRef(String),
}

impl GroupExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        GroupExpr::Atom(name.into())
    }

    /// Free group of rank `k` as a free product of copies of `Z`.
    pub fn free_group(k: usize) -> Self {
        match k {
            0 => GroupExpr::Trivial,
            1 => GroupExpr::atom("Z"),
            _ => GroupExpr::FreeProduct(vec![GroupExpr::atom("Z"); k]),
        }
    }

    /// `base^k` as a direct product of `k` copies.
    pub fn power(base: GroupExpr, k: usize) -> Self {
        match k {
            0 => GroupExpr::Trivial,
            1 => base,
            _ => GroupExpr::DirectProduct(vec![base; k]),
        }
    }

    /// Name referenced by this node, if it is a reference.
    pub fn reference(&self) -> Option<&str> {
        match self {
            GroupExpr::Atom(n)
            | GroupExpr::GraphOfGroupsRef(n)
            | GroupExpr::PolygonRef(n)
            | GroupExpr::GcwRef(n) => Some(n),
            _ => None,
        }
    }

    /// All names referenced anywhere in the expression.
    pub fn references(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            GroupExpr::DirectProduct(xs) | GroupExpr::FreeProduct(xs) => {
                xs.iter().for_each(|x| x.collect_refs(out))
            }
            GroupExpr::Trivial => {}
            other => out.push(other.reference().unwrap()),
        }
    }

    /// Rewrites every reference with `f`, which returns the replacement node.
    pub fn map_refs<E>(&self, f: &mut impl FnMut(&str) -> Result<GroupExpr, E>) -> Result<GroupExpr, E> {
        Ok(match self {
            GroupExpr::DirectProduct(xs) => {
                GroupExpr::DirectProduct(xs.iter().map(|x| x.map_refs(f)).collect::<Result<_, _>>()?)
            }
            GroupExpr::FreeProduct(xs) => {
                GroupExpr::FreeProduct(xs.iter().map(|x| x.map_refs(f)).collect::<Result<_, _>>()?)
            }
            GroupExpr::Trivial => GroupExpr::Trivial,
            other => f(other.reference().unwrap())?,
        })
    }

    /// Every reference collapsed back to a plain atom, as the parser sees it.
    pub fn unresolved(&self) -> GroupExpr {
        self.map_refs::<()>(&mut |n| Ok(GroupExpr::atom(n))).unwrap()
    }

    fn is_infix_list(xs: &[GroupExpr]) -> bool {
        xs.len() >= 2
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, xs: &[GroupExpr]) -> fmt::Result {
    write!(f, "{head}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

/// Canonical text form; it is also the DSL expression syntax.
///
/// `x` binds tighter than `*`. Lists of fewer than two factors use the
/// functional forms `product(..)` and `freeprod(..)`.
impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Trivial => f.write_str("1"),
            GroupExpr::DirectProduct(xs) if GroupExpr::is_infix_list(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" x ")?;
                    }
                    match x {
                        GroupExpr::DirectProduct(ys) | GroupExpr::FreeProduct(ys)
                            if GroupExpr::is_infix_list(ys) =>
                        {
                            write!(f, "({x})")?
                        }
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            GroupExpr::FreeProduct(xs) if GroupExpr::is_infix_list(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    match x {
                        GroupExpr::FreeProduct(ys) if GroupExpr::is_infix_list(ys) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            GroupExpr::DirectProduct(xs) => write_list(f, "product", xs),
            GroupExpr::FreeProduct(xs) => write_list(f, "freeprod", xs),
            other => f.write_str(other.reference().unwrap()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_respects_precedence() {
        let a = GroupExpr::atom("A");
        let b = GroupExpr::atom("B");
        let prod = GroupExpr::DirectProduct(vec![a.clone(), b.clone()]);
        let free = GroupExpr::FreeProduct(vec![prod.clone(), prod.clone()]);
        assert_eq!(free.to_string(), "A x B * A x B");
        let nested = GroupExpr::DirectProduct(vec![free.clone(), a.clone()]);
        assert_eq!(nested.to_string(), "(A x B * A x B) x A");
        assert_eq!(GroupExpr::FreeProduct(vec![a.clone()]).to_string(), "freeprod(A)");
        assert_eq!(GroupExpr::DirectProduct(vec![]).to_string(), "product()");
    }

    #[test]
    fn free_group_and_powers() {
        assert_eq!(GroupExpr::free_group(2).to_string(), "Z * Z");
        assert_eq!(GroupExpr::free_group(0), GroupExpr::Trivial);
        assert_eq!(GroupExpr::power(GroupExpr::atom("Z"), 3).to_string(), "Z x Z x Z");
    }

    #[test]
    fn references_in_order() {
        let e = GroupExpr::FreeProduct(vec![
            GroupExpr::atom("A"),
            GroupExpr::DirectProduct(vec![GroupExpr::GraphOfGroupsRef("G".into()), GroupExpr::Trivial]),
        ]);
        assert_eq!(e.references(), vec!["A", "G"]);
        assert_eq!(e.unresolved().references(), vec!["A", "G"]);
    }
}
