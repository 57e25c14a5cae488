use std::fmt;

use thiserror::Error;

use super::expr::{Expr, ExprError};

/// Global, real-valued parameters of a network, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown parameter `{0}`")]
pub struct UnknownParam(pub String);

impl ParamSet {
    pub fn new(entries: Vec<(String, f64)>) -> Self {
        let (names, values) = entries.into_iter().unzip();
        ParamSet { names, values }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, UnknownParam> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| UnknownParam(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<f64, UnknownParam> {
        Ok(self.values[self.index_of(name)?])
    }

    /// Copy with `name` shifted by `delta`; `self` is left untouched.
    pub fn perturb(&self, name: &str, delta: f64) -> Result<ParamSet, UnknownParam> {
        let idx = self.index_of(name)?;
        let mut out = self.clone();
        out.values[idx] += delta;
        Ok(out)
    }

    /// Copy with `name` set to `value`.
    pub fn with_value(&self, name: &str, value: f64) -> Result<ParamSet, UnknownParam> {
        let idx = self.index_of(name)?;
        let mut out = self.clone();
        out.values[idx] = value;
        Ok(out)
    }
}

/// One reaction channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    /// `(species index, stoichiometry)`, in order of first appearance.
    pub reactants: Vec<(usize, u32)>,
    pub products: Vec<(usize, u32)>,
    /// `products − reactants`, dense over all species.
    pub zeta: Vec<i64>,
    pub rate: Expr,
}

/// A propensity evaluated to something other than a finite nonnegative real.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropensityError {
    #[error("reaction {reaction}: {source}")]
    Expr {
        reaction: usize,
        #[source]
        source: ExprError,
    },
    #[error("reaction {reaction}: negative propensity {value}")]
    Negative { reaction: usize, value: f64 },
    #[error("reaction {reaction}: non-finite propensity {value}")]
    NonFinite { reaction: usize, value: f64 },
}

/// Reaction network with resolved species, parameters and propensities.
///
/// Immutable once built; evaluation borrows it shared, so one network can
/// back any number of concurrent path simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    pub name: String,
    pub species: Vec<String>,
    pub reactions: Vec<Reaction>,
    pub params: ParamSet,
    /// Initial state; species without an `init:` entry start at zero.
    pub init: Vec<i64>,
    /// When set, a channel whose firing would drive a count negative has
    /// propensity zero instead of producing a runtime error.
    pub clamp_nonneg: bool,
}

impl ReactionNetwork {
    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    /// Propensity of channel `k` at state `x`; rejects negative or
    /// non-finite values.
    #[inline]
    pub fn propensity(&self, k: usize, x: &[i64], params: &[f64]) -> Result<f64, PropensityError> {
        let reaction = &self.reactions[k];
        if self.clamp_nonneg
            && reaction
                .zeta
                .iter()
                .zip(x)
                .any(|(&dz, &xi)| dz < 0 && xi + dz < 0)
        {
            return Ok(0.0);
        }
        let value = reaction
            .rate
            .eval(x, params)
            .map_err(|source| PropensityError::Expr { reaction: k, source })?;
        if !value.is_finite() {
            return Err(PropensityError::NonFinite { reaction: k, value });
        }
        if value < 0.0 {
            return Err(PropensityError::Negative { reaction: k, value });
        }
        Ok(value)
    }

    /// Fills `out` with all propensities at `x`.
    #[inline]
    pub fn propensities(&self, x: &[i64], params: &[f64], out: &mut [f64]) -> Result<(), PropensityError> {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.propensity(k, x, params)?;
        }
        Ok(())
    }

    /// Drift `F(x) = Σ_k λ_k(x) ζ_k`.
    pub fn drift(&self, x: &[i64], params: &[f64]) -> Result<Vec<f64>, PropensityError> {
        let mut out = vec![0.0; self.num_species()];
        for (k, reaction) in self.reactions.iter().enumerate() {
            let rate = self.propensity(k, x, params)?;
            for (o, &z) in out.iter_mut().zip(&reaction.zeta) {
                *o += rate * z as f64;
            }
        }
        Ok(out)
    }

    /// Parses an expression over this network's species and parameters,
    /// e.g. an observable such as `P` or `X1 + X2`.
    pub fn parse_expr(&self, text: &str) -> Result<Expr, super::ParseError> {
        super::parser::parse_standalone_expr(text, &self.species, self.params.names())
    }

    pub fn render_expr(&self, expr: &Expr) -> String {
        expr.display(&self.species, self.params.names()).to_string()
    }
}

fn write_side(f: &mut fmt::Formatter<'_>, side: &[(usize, u32)], species: &[String]) -> fmt::Result {
    for (i, &(s, n)) in side.iter().enumerate() {
        if i > 0 {
            f.write_str(" + ")?;
        }
        if n != 1 {
            write!(f, "{n} ")?;
        }
        f.write_str(&species[s])?;
    }
    Ok(())
}

/// Model-file rendering; the output reparses to an identical network.
impl fmt::Display for ReactionNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "network {}", self.name)?;
        writeln!(f, "species: {}", self.species.join(" "))?;
        if !self.params.is_empty() {
            f.write_str("params:")?;
            for (n, v) in self.params.names().iter().zip(self.params.values()) {
                write!(f, " {n} = {v:?}")?;
            }
            writeln!(f)?;
        }
        if self.init.iter().any(|&v| v != 0) {
            f.write_str("init:")?;
            for (n, v) in self.species.iter().zip(&self.init) {
                write!(f, " {n} = {v}")?;
            }
            writeln!(f)?;
        }
        if self.clamp_nonneg {
            writeln!(f, "clamp_nonneg")?;
        }
        for r in &self.reactions {
            f.write_str("reaction: ")?;
            write_side(f, &r.reactants, &self.species)?;
            f.write_str(" -> ")?;
            write_side(f, &r.products, &self.species)?;
            writeln!(f, " ; rate = {}", self.render_expr(&r.rate))?;
        }
        Ok(())
    }
}
