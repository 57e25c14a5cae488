use serde::Serialize;

use crate::model::ReactionNetwork;

use super::{
    collect_fd, collect_girsanov, EstimateError, FdConfig, FdMode, GirsanovConfig, GirsanovSamples, Method,
    Observable, RunningStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMethod {
    Fd(Method),
    Girsanov,
}

impl TraceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceMethod::Fd(m) => m.as_str(),
            TraceMethod::Girsanov => "girsanov",
        }
    }
}

impl std::str::FromStr for TraceMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("girsanov") {
            Ok(TraceMethod::Girsanov)
        } else {
            s.parse().map(TraceMethod::Fd)
        }
    }
}

/// Variance-versus-time run. The horizon is the last grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub method: TraceMethod,
    pub param: String,
    pub theta: f64,
    /// Ignored by the likelihood-ratio estimator.
    pub epsilon: f64,
    pub mode: FdMode,
    pub grid: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub workers: usize,
    pub x0: Option<Vec<i64>>,
    pub event_cap: u64,
}

impl TraceConfig {
    pub fn new(method: TraceMethod, param: &str, theta: f64, epsilon: f64, grid: Vec<f64>, paths: usize, seed: u64) -> Self {
        TraceConfig {
            method,
            param: param.to_string(),
            theta,
            epsilon,
            mode: FdMode::Centered,
            grid,
            paths,
            seed,
            workers: 1,
            x0: None,
            event_cap: crate::sim::DEFAULT_EVENT_CAP,
        }
    }
}

/// Per-time statistics of the per-path contribution `d(t)`, all observed on
/// one set of paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTrace {
    pub method: String,
    pub grid: Vec<f64>,
    pub mean_d: Vec<f64>,
    /// Sample variance of `d(t)`.
    pub var_d: Vec<f64>,
    /// Variance of the `R`-path estimator, `var_d / R`.
    pub var_estimator: Vec<f64>,
    pub paths: usize,
}

pub fn variance_trace(
    net: &ReactionNetwork,
    observable: &Observable,
    cfg: &TraceConfig,
) -> Result<VarianceTrace, EstimateError> {
    let grid_ok = !cfg.grid.is_empty() && cfg.grid[0] >= 0.0 && cfg.grid.windows(2).all(|w| w[0] < w[1]);
    if !grid_ok || !cfg.grid.iter().all(|g| g.is_finite()) {
        return Err(EstimateError::Grid);
    }
    let horizon = *cfg.grid.last().unwrap();
    let columns: Vec<Vec<f64>> = match cfg.method {
        TraceMethod::Fd(method) => {
            let fd = FdConfig {
                method,
                param: cfg.param.clone(),
                theta: cfg.theta,
                epsilon: cfg.epsilon,
                mode: cfg.mode,
                horizon,
                paths: cfg.paths,
                seed: cfg.seed,
                workers: cfg.workers,
                x0: cfg.x0.clone(),
                event_cap: cfg.event_cap,
            };
            collect_fd(net, observable, &fd, &cfg.grid)?.grid_values
        }
        TraceMethod::Girsanov => {
            let gc = GirsanovConfig {
                param: cfg.param.clone(),
                theta: cfg.theta,
                horizon,
                paths: cfg.paths,
                seed: cfg.seed,
                workers: cfg.workers,
                centered: false,
                x0: cfg.x0.clone(),
                event_cap: cfg.event_cap,
            };
            let s = collect_girsanov(net, observable, &gc, &cfg.grid)?;
            s.f_grid
                .iter()
                .zip(&s.score_grid)
                .map(|(f, sc)| GirsanovSamples::contributions(f, sc, false))
                .collect()
        }
    };
    let stats: Vec<RunningStats> = columns.iter().map(|c| c.iter().copied().collect()).collect();
    let var_d: Vec<f64> = stats.iter().map(|s| s.variance()).collect();
    Ok(VarianceTrace {
        method: cfg.method.as_str().to_string(),
        grid: cfg.grid.clone(),
        mean_d: stats.iter().map(|s| s.mean()).collect(),
        var_estimator: var_d.iter().map(|v| v / cfg.paths as f64).collect(),
        var_d,
        paths: cfg.paths,
    })
}
