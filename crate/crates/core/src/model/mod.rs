//! Group expressions, concrete finite groups, complexes of groups and the
//! validated universe they live in.

pub mod complexes;
pub mod expr;
pub mod finite;
pub mod universe;

pub use complexes::{GcwDescription, GraphEdge, GraphOfGroups, Injection, PolygonMaps, PolygonOfGroups};
pub use expr::GroupExpr;
pub use finite::{ConcreteFiniteGroup, Elem, ElementSet, GroupError, HomError, Homomorphism};
pub use universe::{prelude_model, Atom, ModelError, NamedHom, Universe};

use crate::dsl::{Diagnostic, SourceModel};

/// All load diagnostics for `model` on top of `prelude`; empty when valid.
pub fn validate(model: &SourceModel, prelude: Option<&SourceModel>) -> Vec<Diagnostic> {
    Universe::load(prelude, model).err().unwrap_or_default()
}
