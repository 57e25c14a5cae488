//! Likelihood-ratio (pathwise score) sensitivity estimator.
//!
//! For a path on `[0, t]` the score with respect to θ is
//!
//! ```text
//! S(t) = Σ_k [ Σ_{firings j of k} ∂θλ_k(X(t_j−)) / λ_k(X(t_j−)) − ∫_0^t ∂θλ_k(X(s)) ds ]
//! ```
//!
//! and `f(X(t)) · S(t)` is an unbiased estimate of `d/dθ E f(X(t))`.

use std::time::Instant;

use crate::model::{Expr, ExprError, ReactionNetwork};
use crate::sim::{simulate_nrm_observed, PathObserver, SimOptions};
use crate::streams::{ClockStream, SeedPlan};

use super::{ci95_half_width, map_paths, validate_common, validate_grid, EstimateError, EstimateReport, Observable, RunningStats};

#[derive(Debug, Clone, PartialEq)]
pub struct GirsanovConfig {
    pub param: String,
    pub theta: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub workers: usize,
    /// Use `(f − f̄) · S` with the sample mean `f̄` as a control variate.
    pub centered: bool,
    pub x0: Option<Vec<i64>>,
    pub event_cap: u64,
}

impl GirsanovConfig {
    pub fn new(param: &str, theta: f64, horizon: f64, paths: usize, seed: u64) -> Self {
        GirsanovConfig {
            param: param.to_string(),
            theta,
            horizon,
            paths,
            seed,
            workers: 1,
            centered: false,
            x0: None,
            event_cap: crate::sim::DEFAULT_EVENT_CAP,
        }
    }
}

/// Running score along one path; plugs into the simulator as an observer.
#[derive(Debug, Clone)]
pub struct ScoreAccumulator<'a> {
    /// `(channel, ∂θλ_k)` for channels whose propensity depends on θ.
    derivatives: &'a [(usize, Expr)],
    params: &'a [f64],
    score: f64,
    at_grid: Vec<f64>,
    error: Option<(usize, ExprError)>,
}

impl<'a> ScoreAccumulator<'a> {
    pub fn new(derivatives: &'a [(usize, Expr)], params: &'a [f64]) -> Self {
        ScoreAccumulator {
            derivatives,
            params,
            score: 0.0,
            at_grid: Vec::new(),
            error: None,
        }
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    /// Score at each grid time reached so far.
    pub fn grid_scores(&self) -> &[f64] {
        &self.at_grid
    }

    fn eval(&mut self, k: usize, e: &Expr, x: &[i64]) -> f64 {
        match e.eval(x, self.params) {
            Ok(v) => v,
            Err(err) => {
                self.error.get_or_insert((k, err));
                0.0
            }
        }
    }
}

impl PathObserver for ScoreAccumulator<'_> {
    #[inline]
    fn hold(&mut self, x: &[i64], _rates: &[f64], dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let mut drift = 0.0;
        for (k, e) in self.derivatives {
            drift += self.eval(*k, e, x);
        }
        self.score -= drift * dt;
    }

    #[inline]
    fn fire(&mut self, k: usize, x_before: &[i64], rates: &[f64]) {
        if let Some((_, e)) = self.derivatives.iter().find(|(j, _)| *j == k) {
            let d = self.eval(k, e, x_before);
            // a firing channel has positive propensity
            self.score += d / rates[k];
        }
    }

    #[inline]
    fn grid(&mut self, _index: usize, _x: &[i64]) {
        self.at_grid.push(self.score);
    }
}

/// Per-path observable values and scores.
#[derive(Debug, Clone, PartialEq)]
pub struct GirsanovSamples {
    pub f_terminal: Vec<f64>,
    pub score_terminal: Vec<f64>,
    /// `[grid index][path]`
    pub f_grid: Vec<Vec<f64>>,
    pub score_grid: Vec<Vec<f64>>,
    pub n_updates: u64,
}

impl GirsanovSamples {
    /// Contributions `f · S`, or `(f − f̄) · S` when `centered`.
    pub fn contributions(f: &[f64], s: &[f64], centered: bool) -> Vec<f64> {
        let shift = if centered {
            f.iter().sum::<f64>() / f.len() as f64
        } else {
            0.0
        };
        f.iter().zip(s).map(|(fv, sv)| (fv - shift) * sv).collect()
    }
}

pub fn collect_girsanov(
    net: &ReactionNetwork,
    observable: &Observable,
    cfg: &GirsanovConfig,
    grid: &[f64],
) -> Result<GirsanovSamples, EstimateError> {
    validate_common(net, cfg.horizon, cfg.paths, cfg.x0.as_deref())?;
    if !grid.is_empty() {
        validate_grid(grid, cfg.horizon)?;
    }
    let params = net.params.with_value(&cfg.param, cfg.theta)?;
    let p_idx = params.index_of(&cfg.param)?;
    let derivatives: Vec<(usize, Expr)> = net
        .reactions
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rate.depends_on_param(p_idx))
        .map(|(k, r)| (k, r.rate.diff_param(p_idx)))
        .collect();
    let x0 = cfg.x0.clone().unwrap_or_else(|| net.init.clone());
    let plan = SeedPlan::new(cfg.seed);
    let opts = SimOptions {
        grid: grid.to_vec(),
        event_cap: cfg.event_cap,
        ..SimOptions::default()
    };
    let m = net.num_reactions() as u64;
    let values = params.values();

    let per_path = map_paths(cfg.workers, cfg.paths, |i| {
        let mut clocks: Vec<ClockStream> = (0..m).map(|k| ClockStream::new(plan.derive(i as u64, k, 0))).collect();
        let mut acc = ScoreAccumulator::new(&derivatives, values);
        let rec = simulate_nrm_observed(net, values, &x0, cfg.horizon, &mut clocks, &opts, &mut acc)
            .map_err(|source| EstimateError::Path { index: i, source })?;
        if let Some((reaction, source)) = acc.error.take() {
            return Err(EstimateError::Derivative { reaction, source });
        }
        let f_t = observable.eval_at(&rec.terminal, values, i)?;
        let f_g = rec
            .snapshots
            .iter()
            .map(|x| observable.eval_at(x, values, i))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok((f_t, acc.score(), f_g, acc.at_grid, rec.n_updates))
    })?;

    let mut out = GirsanovSamples {
        f_terminal: Vec::with_capacity(cfg.paths),
        score_terminal: Vec::with_capacity(cfg.paths),
        f_grid: vec![Vec::with_capacity(cfg.paths); grid.len()],
        score_grid: vec![Vec::with_capacity(cfg.paths); grid.len()],
        n_updates: 0,
    };
    for (f_t, s_t, f_g, s_g, n) in per_path {
        out.f_terminal.push(f_t);
        out.score_terminal.push(s_t);
        for (g, (fv, sv)) in f_g.into_iter().zip(s_g).enumerate() {
            out.f_grid[g].push(fv);
            out.score_grid[g].push(sv);
        }
        out.n_updates += n;
    }
    Ok(out)
}

/// Likelihood-ratio estimate of `d/dθ E f(X(T))`.
pub fn estimate_girsanov(
    net: &ReactionNetwork,
    observable: &Observable,
    cfg: &GirsanovConfig,
) -> Result<EstimateReport, EstimateError> {
    let start = Instant::now();
    let samples = collect_girsanov(net, observable, cfg, &[])?;
    let d = GirsanovSamples::contributions(&samples.f_terminal, &samples.score_terminal, cfg.centered);
    let stats: RunningStats = d.into_iter().collect();
    let variance = stats.variance();
    Ok(EstimateReport {
        method: "girsanov".to_string(),
        param: cfg.param.clone(),
        theta: cfg.theta,
        epsilon: 0.0,
        mode: if cfg.centered { "centered-score" } else { "score" }.to_string(),
        horizon: cfg.horizon,
        paths: cfg.paths,
        seed: cfg.seed,
        estimate: stats.mean(),
        sample_variance: variance,
        ci95: ci95_half_width(variance, cfg.paths),
        n_updates: samples.n_updates,
        elapsed_s: start.elapsed().as_secs_f64(),
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const BIRTH: &str = "network b\nspecies: S\nparams: theta = 2\nreaction: -> S ; rate = theta\n";

    #[test]
    fn pure_birth_score_is_count_over_theta_minus_time() {
        let net = parse_model(BIRTH).unwrap();
        let f = Observable::species(&net, "S").unwrap();
        let cfg = GirsanovConfig::new("theta", 2.0, 3.0, 20, 9);
        let s = collect_girsanov(&net, &f, &cfg, &[1.5, 3.0]).unwrap();
        for (n, score) in s.f_terminal.iter().zip(&s.score_terminal) {
            assert!((score - (n / 2.0 - 3.0)).abs() < 1e-9);
        }
        for (n, score) in s.f_grid[1].iter().zip(&s.score_grid[1]) {
            assert!((score - (n / 2.0 - 3.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_birth_estimate_is_horizon() {
        let net = parse_model(BIRTH).unwrap();
        let f = Observable::species(&net, "S").unwrap();
        let cfg = GirsanovConfig::new("theta", 2.0, 5.0, 10_000, 3);
        let r = estimate_girsanov(&net, &f, &cfg).unwrap();
        assert!((r.estimate - 5.0).abs() < 3.0 * r.std_error(), "{} ± {}", r.estimate, r.std_error());
    }

    #[test]
    fn constant_observable_has_zero_mean() {
        let net = parse_model(BIRTH).unwrap();
        let f = Observable::parse(&net, "7").unwrap();
        let cfg = GirsanovConfig::new("theta", 2.0, 5.0, 10_000, 4);
        let r = estimate_girsanov(&net, &f, &cfg).unwrap();
        assert!(r.estimate.abs() < 3.0 * r.std_error(), "{} ± {}", r.estimate, r.std_error());
    }
}
