//! First-order logic with weight aggregation over weighted structures.

mod ast;
mod eval;
mod parser;

pub use ast::{CmpOp, Exponents, Formula, Polynomial, RationalFunction, StdTerm, Term};
pub use eval::{eval_formula, eval_weight_term, Valuation};
pub use parser::{parse_formula, parse_fosum, parse_term, ParseError, Parsed};
