//! Expression language: parsing, printing and series expansion.

mod ast;
mod expand;
mod parser;

pub use ast::Expr;
pub use expand::expand;
pub use parser::parse;
