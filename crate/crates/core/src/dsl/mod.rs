//! The `.catb` input language: parsing, diagnostics and canonical printing.

pub mod ast;
mod lexer;
mod parser;
mod serialize;

pub use ast::*;
pub use parser::{parse, parse_bytes, parse_expr, RESERVED};
pub use serialize::{concrete as concrete_text, fact as fact_text, quote, serialize};

/// The bundled prelude of standard groups.
pub const PRELUDE: &str = include_str!("prelude.catb");
