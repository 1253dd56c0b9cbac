//! Arithmetic expressions: parsing, printing, symbolic differentiation, evaluation.

mod ast;
mod diff;
mod eval;
mod parse;

pub use ast::{BinOp, Constant, Expr, Func, Span};
pub use eval::{CompiledExpr, EvalError};
pub use parse::{parse_expression, parse_with_names, ParseError, ParseErrorKind};
