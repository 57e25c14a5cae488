//! Propensity expression language.
//!
//! Expressions are built over species counts and named parameters, both
//! resolved to indices at parse time so evaluation does no name lookups.
//! `mass_action(c)` carries the reactant multiset of its reaction and
//! evaluates with the stochastic falling-factorial convention:
//!
//! ```text
//! mass_action(c; ν)(x) = c · Π_i x_i (x_i − 1) ··· (x_i − ν_i + 1)
//! ```
//!
//! which is zero as soon as any `x_i < ν_i`.

use std::fmt;

use thiserror::Error;

/// Arithmetic expression over species counts and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Species(usize),
    Param(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    /// Natural logarithm. Only produced by differentiation of `pow` with a
    /// parameter-dependent exponent, but also accepted as `ln(...)`.
    Ln(Box<Expr>),
    /// `coeff · Π falling_factorial(x_i, ν_i)` over `(species, ν)` pairs.
    MassAction {
        coeff: Box<Expr>,
        reactants: Vec<(usize, u32)>,
    },
}

/// Failure while evaluating an expression at a concrete state.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pow with negative base {base}")]
    NegativeBase { base: f64 },
    #[error("ln of negative value {value}")]
    NegativeLog { value: f64 },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const(value)
    }

    /// Evaluates the expression at integer state `x` with parameter values
    /// `params`. The result may be negative or non-finite; callers that need
    /// a propensity go through [`crate::model::ReactionNetwork::propensity`].
    ///
    /// Multiplication treats an exact zero factor as absorbing, even against
    /// an infinite or undefined partner, so that `0^β · ln 0` terms arising
    /// from differentiation evaluate to their limit 0.
    pub fn eval(&self, x: &[i64], params: &[f64]) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Species(i) => x[*i] as f64,
            Expr::Param(p) => params[*p],
            Expr::Neg(a) => -a.eval(x, params)?,
            Expr::Add(a, b) => a.eval(x, params)? + b.eval(x, params)?,
            Expr::Sub(a, b) => a.eval(x, params)? - b.eval(x, params)?,
            Expr::Mul(a, b) => {
                let lhs = a.eval(x, params)?;
                if lhs == 0.0 {
                    return Ok(0.0);
                }
                let rhs = b.eval(x, params)?;
                if rhs == 0.0 {
                    0.0
                } else {
                    lhs * rhs
                }
            }
            Expr::Div(a, b) => {
                let den = b.eval(x, params)?;
                if den == 0.0 {
                    return Err(ExprError::DivisionByZero);
                }
                a.eval(x, params)? / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x, params)?;
                if base < 0.0 {
                    return Err(ExprError::NegativeBase { base });
                }
                base.powf(b.eval(x, params)?)
            }
            Expr::Ln(a) => {
                let value = a.eval(x, params)?;
                if value < 0.0 {
                    return Err(ExprError::NegativeLog { value });
                }
                value.ln()
            }
            Expr::MassAction { coeff, reactants } => {
                let mut prod = 1.0;
                for &(s, nu) in reactants {
                    let xi = x[s];
                    if xi < nu as i64 {
                        return Ok(0.0);
                    }
                    for j in 0..nu as i64 {
                        prod *= (xi - j) as f64;
                    }
                }
                if prod == 0.0 {
                    return Ok(0.0);
                }
                coeff.eval(x, params)? * prod
            }
        })
    }

    /// True when the expression refers to parameter `param` anywhere.
    pub fn depends_on_param(&self, param: usize) -> bool {
        match self {
            Expr::Const(_) | Expr::Species(_) => false,
            Expr::Param(p) => *p == param,
            Expr::Neg(a) | Expr::Ln(a) => a.depends_on_param(param),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on_param(param) || b.depends_on_param(param),
            Expr::MassAction { coeff, .. } => coeff.depends_on_param(param),
        }
    }

    /// Exact symbolic partial derivative with respect to parameter `param`.
    ///
    /// Zero and one factors are folded as the tree is built, so the result
    /// for an expression without `param` is exactly `Const(0.0)`.
    pub fn diff_param(&self, param: usize) -> Expr {
        if !self.depends_on_param(param) {
            return Expr::Const(0.0);
        }
        match self {
            Expr::Const(_) | Expr::Species(_) => Expr::Const(0.0),
            Expr::Param(_) => Expr::Const(1.0),
            Expr::Neg(a) => neg(a.diff_param(param)),
            Expr::Add(a, b) => add(a.diff_param(param), b.diff_param(param)),
            Expr::Sub(a, b) => sub(a.diff_param(param), b.diff_param(param)),
            Expr::Mul(a, b) => add(
                mul(a.diff_param(param), (**b).clone()),
                mul((**a).clone(), b.diff_param(param)),
            ),
            Expr::Div(a, b) => {
                let da = a.diff_param(param);
                if !b.depends_on_param(param) {
                    return div(da, (**b).clone());
                }
                let db = b.diff_param(param);
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), Expr::Const(2.0)),
                )
            }
            Expr::Pow(a, b) => {
                let base_part = if a.depends_on_param(param) {
                    // w · u^(w−1) · u'
                    mul(
                        mul(
                            (**b).clone(),
                            pow((**a).clone(), sub((**b).clone(), Expr::Const(1.0))),
                        ),
                        a.diff_param(param),
                    )
                } else {
                    Expr::Const(0.0)
                };
                let exp_part = if b.depends_on_param(param) {
                    // u^w · (ln u · w')
                    mul(
                        pow((**a).clone(), (**b).clone()),
                        mul(Expr::Ln(a.clone()), b.diff_param(param)),
                    )
                } else {
                    Expr::Const(0.0)
                };
                add(base_part, exp_part)
            }
            Expr::Ln(a) => div(a.diff_param(param), (**a).clone()),
            Expr::MassAction { coeff, reactants } => {
                let dc = coeff.diff_param(param);
                if is_zero(&dc) {
                    Expr::Const(0.0)
                } else {
                    Expr::MassAction {
                        coeff: Box::new(dc),
                        reactants: reactants.clone(),
                    }
                }
            }
        }
    }

    /// Binding strength used by the pretty-printer.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Renders the expression in model-file syntax using the given names.
    /// `mass_action` reactants are implied by the enclosing reaction and are
    /// not printed.
    pub fn display<'a>(&'a self, species: &'a [String], params: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            species,
            params,
        }
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 1.0)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => neg(b),
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_zero(&a) || is_zero(&b) => Expr::Const(0.0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return Expr::Const(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_one(&b) {
        return a;
    }
    Expr::Pow(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    species: &'a [String],
    params: &'a [String],
}

impl ExprDisplay<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            species: self.species,
            params: self.params,
        }
    }

    fn operand(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec || matches!(e, Expr::Const(c) if *c < 0.0) {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Species(i) => f.write_str(&self.species[*i]),
            Expr::Param(p) => f.write_str(&self.params[*p]),
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.operand(f, a, 4)
            }
            // left-associative: the right operand needs strictly higher precedence
            Expr::Add(a, b) => {
                self.operand(f, a, 1)?;
                f.write_str(" + ")?;
                self.operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                self.operand(f, a, 1)?;
                f.write_str(" - ")?;
                self.operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.operand(f, a, 2)?;
                f.write_str("*")?;
                self.operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                self.operand(f, a, 2)?;
                f.write_str("/")?;
                self.operand(f, b, 3)
            }
            // right-associative
            Expr::Pow(a, b) => {
                self.operand(f, a, 5)?;
                f.write_str("^")?;
                self.operand(f, b, 3)
            }
            Expr::Ln(a) => write!(f, "ln({})", self.child(a)),
            Expr::MassAction { coeff, .. } => write!(f, "mass_action({})", self.child(coeff)),
        }
    }
}

/// Falling factorial `x (x−1) ··· (x−ν+1)`, zero when `x < ν`.
pub fn falling_factorial(x: i64, nu: u32) -> f64 {
    if x < nu as i64 {
        return 0.0;
    }
    (0..nu as i64).map(|j| (x - j) as f64).product()
}
