//! Upper bounds for the amenable category and related invariants of groups
//! built from graphs, polygons and G-CW-complexes of groups.

pub mod apps;
pub mod cli;
pub mod dsl;
pub mod extnat;
pub mod facts;
pub mod model;
pub mod develop;
pub mod engine;
