//! Sensitivity estimators built on the path generators.
//!
//! Finite differences ([`estimate_fd`]) pair two paths at perturbed
//! parameter values using one of the couplings in [`Method`]; the
//! likelihood-ratio estimator ([`estimate_girsanov`]) weights a single path
//! by its score. [`variance_trace`] observes the same paths on a time grid.
//!
//! Paths are independent work items. Path `i` draws all of its streams from
//! `SeedPlan::derive(i, channel, role)`, results are collected in path
//! order and reduced sequentially, so a report depends only on the seed and
//! `R`, never on the worker count.

mod fd;
mod girsanov;
mod planning;
mod stats;
mod trace;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Expr, ExprError, ParseError, ReactionNetwork, UnknownParam};
use crate::sim::SimError;

pub use fd::{collect_fd, estimate_fd, simulate_pair, FdConfig, FdSamples};
pub use girsanov::{collect_girsanov, estimate_girsanov, GirsanovConfig, GirsanovSamples, ScoreAccumulator};
pub use planning::{plan_paths, suggest_epsilon, DEFAULT_EPSILON_CONSTANT};
pub use stats::{ci95_half_width, RunningStats, Z95};
pub use trace::{variance_trace, TraceConfig, TraceMethod, VarianceTrace};

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("path {index}: {source}")]
    Path {
        index: usize,
        #[source]
        source: SimError,
    },
    #[error("path {index}: observable: {source}")]
    Observable {
        index: usize,
        #[source]
        source: ExprError,
    },
    #[error("path {index}: observable is not finite")]
    NonFiniteObservable { index: usize },
    #[error(transparent)]
    UnknownParam(#[from] UnknownParam),
    #[error("epsilon must be > 0, got {0}")]
    Epsilon(f64),
    #[error("paths must be ≥ 1")]
    Paths,
    #[error("invalid horizon {0}")]
    Horizon(f64),
    #[error("time grid must be nonempty, nondecreasing and inside [0, T]")]
    Grid,
    #[error("initial state has length {got}, expected {expected}")]
    InitialState { got: usize, expected: usize },
    #[error("derivative of propensity {reaction}: {source}")]
    Derivative {
        reaction: usize,
        #[source]
        source: ExprError,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// Finite-difference pairing strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Crude Monte Carlo: independent paths.
    Cmc,
    /// Coupled finite differences.
    Cfd,
    /// Common reaction path.
    Crp,
    /// Gillespie with common random numbers.
    Crn,
    /// Naive split coupling (biased, demonstration only).
    Naive,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Cmc, Method::Cfd, Method::Crp, Method::Crn, Method::Naive];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cmc => "cmc",
            Method::Cfd => "cfd",
            Method::Crp => "crp",
            Method::Crn => "crn",
            Method::Naive => "naive",
        }
    }

    /// True for the strategies whose pair difference has `O(ε)` variance.
    pub fn is_coupled(&self) -> bool {
        !matches!(self, Method::Cmc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}` (expected cmc, cfd, crp, crn or naive)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FdMode {
    /// `(f(X^{θ+ε}) − f(X^θ)) / ε`
    Forward,
    /// `(f(X^{θ+ε/2}) − f(X^{θ−ε/2})) / ε`
    Centered,
}

impl FdMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FdMode::Forward => "forward",
            FdMode::Centered => "centered",
        }
    }

    /// Parameter offsets `(upper, lower)` applied to θ.
    pub fn offsets(&self, epsilon: f64) -> (f64, f64) {
        match self {
            FdMode::Forward => (epsilon, 0.0),
            FdMode::Centered => (epsilon / 2.0, -epsilon / 2.0),
        }
    }
}

impl fmt::Display for FdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(FdMode::Forward),
            "centered" | "centred" => Ok(FdMode::Centered),
            _ => Err(format!("unknown mode `{s}` (expected forward or centered)")),
        }
    }
}

/// Measured quantity `f(x)`, an expression over species (and parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub text: String,
    pub expr: Expr,
}

impl Observable {
    pub fn parse(net: &ReactionNetwork, text: &str) -> Result<Self, ParseError> {
        Ok(Observable {
            text: text.trim().to_string(),
            expr: net.parse_expr(text)?,
        })
    }

    /// Count of a single species.
    pub fn species(net: &ReactionNetwork, name: &str) -> Option<Self> {
        net.species_index(name).map(|i| Observable {
            text: name.to_string(),
            expr: Expr::Species(i),
        })
    }

    pub(crate) fn eval_at(&self, x: &[i64], params: &[f64], index: usize) -> Result<f64, EstimateError> {
        let v = self
            .expr
            .eval(x, params)
            .map_err(|source| EstimateError::Observable { index, source })?;
        if !v.is_finite() {
            return Err(EstimateError::NonFiniteObservable { index });
        }
        Ok(v)
    }
}

/// Outcome of one estimator run.
///
/// Every field except `elapsed_s` is a deterministic function of the inputs
/// and the seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub method: String,
    pub param: String,
    pub theta: f64,
    /// Zero for the likelihood-ratio estimator.
    pub epsilon: f64,
    pub mode: String,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    /// Mean of the per-path contributions `d`.
    pub estimate: f64,
    /// Unbiased sample variance of `d`; NaN when `paths == 1`.
    pub sample_variance: f64,
    pub ci95: f64,
    /// Reaction firings summed over all paths.
    pub n_updates: u64,
    pub elapsed_s: f64,
    pub warning: Option<String>,
}

impl EstimateReport {
    /// Standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.sample_variance / self.paths as f64).sqrt()
    }

    /// Bitwise equality of every field except `elapsed_s` (so that NaN
    /// variances of single-path runs compare equal).
    pub fn identical(&self, other: &EstimateReport) -> bool {
        let bits = |v: f64| v.to_bits();
        self.method == other.method
            && self.param == other.param
            && bits(self.theta) == bits(other.theta)
            && bits(self.epsilon) == bits(other.epsilon)
            && self.mode == other.mode
            && bits(self.horizon) == bits(other.horizon)
            && self.paths == other.paths
            && self.seed == other.seed
            && bits(self.estimate) == bits(other.estimate)
            && bits(self.sample_variance) == bits(other.sample_variance)
            && bits(self.ci95) == bits(other.ci95)
            && self.n_updates == other.n_updates
            && self.warning == other.warning
    }
}

pub(crate) const NAIVE_WARNING: &str =
    "biased coupling - demonstration only: the naive coupling does not preserve the marginal laws";

/// Runs `work(i)` for `i in 0..n` on `workers` threads and returns the
/// results in index order. The first failing index wins.
pub(crate) fn map_paths<T, F>(workers: usize, n: usize, work: F) -> Result<Vec<T>, EstimateError>
where
    T: Send,
    F: Fn(usize) -> Result<T, EstimateError> + Sync + Send,
{
    if workers <= 1 {
        return (0..n).map(&work).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EstimateError::Pool(e.to_string()))?;
    let results: Vec<Result<T, EstimateError>> = pool.install(|| (0..n).into_par_iter().map(&work).collect());
    results.into_iter().collect()
}

pub(crate) fn validate_grid(grid: &[f64], horizon: f64) -> Result<(), EstimateError> {
    let ok = !grid.is_empty()
        && grid.iter().all(|&g| (0.0..=horizon).contains(&g))
        && grid.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(EstimateError::Grid)
    }
}

pub(crate) fn validate_common(
    net: &ReactionNetwork,
    horizon: f64,
    paths: usize,
    x0: Option<&[i64]>,
) -> Result<(), EstimateError> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(EstimateError::Horizon(horizon));
    }
    if paths == 0 {
        return Err(EstimateError::Paths);
    }
    if let Some(x0) = x0 {
        if x0.len() != net.num_species() {
            return Err(EstimateError::InitialState {
                got: x0.len(),
                expected: net.num_species(),
            });
        }
    }
    Ok(())
}
