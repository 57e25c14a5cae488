//! Reaction-network models: species, reactions, parameters and the
//! propensity expression language.

mod expr;
mod network;
mod parser;

pub use expr::{falling_factorial, Expr, ExprDisplay, ExprError};
pub use network::{ParamSet, PropensityError, Reaction, ReactionNetwork, UnknownParam};
pub use parser::{parse_model, ParseError, ParseErrorKind};
