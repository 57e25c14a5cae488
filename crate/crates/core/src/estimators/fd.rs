use std::time::Instant;

use crate::model::ReactionNetwork;
use crate::sim::{
    simulate_cfd_pair, simulate_crn_pair, simulate_crp_pair, simulate_naive_pair, simulate_nrm, CoupledPath,
    CouplingKind, SimError, SimOptions,
};
use crate::streams::{ArrivalTape, ClockStream, SeedPlan, UniformTape};

use super::{
    ci95_half_width, map_paths, validate_common, validate_grid, EstimateError, EstimateReport, FdMode, Method,
    Observable, RunningStats, NAIVE_WARNING,
};

/// Finite-difference run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FdConfig {
    pub method: Method,
    pub param: String,
    pub theta: f64,
    pub epsilon: f64,
    pub mode: FdMode,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub workers: usize,
    /// Initial state override; the network's `init` otherwise.
    pub x0: Option<Vec<i64>>,
    pub event_cap: u64,
}

impl FdConfig {
    pub fn new(method: Method, param: &str, theta: f64, epsilon: f64, horizon: f64, paths: usize, seed: u64) -> Self {
        FdConfig {
            method,
            param: param.to_string(),
            theta,
            epsilon,
            mode: FdMode::Centered,
            horizon,
            paths,
            seed,
            workers: 1,
            x0: None,
            event_cap: crate::sim::DEFAULT_EVENT_CAP,
        }
    }

    pub fn mode(mut self, mode: FdMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Builds path `path`'s streams for `method` from `plan` and simulates the
/// pair at `(params_upper, params_lower)`.
///
/// Stream roles per channel `k`: CMC uses role 0 (upper) and 1 (lower);
/// CFD roles 0, 1, 2 for the shared, upper and lower sub-channels; CRP
/// role 0 for the channel tape; naive role 0 for the shared clock and 1
/// for the residual tape. CRN uses channel 0 with role 0 for the holding
/// process and role 1 for the selection uniforms.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pair(
    method: Method,
    net: &ReactionNetwork,
    params_upper: &[f64],
    params_lower: &[f64],
    x0: &[i64],
    horizon: f64,
    plan: &SeedPlan,
    path: u64,
    opts: &SimOptions,
) -> Result<CoupledPath, SimError> {
    let m = net.num_reactions() as u64;
    let clocks = |role: u64| -> Vec<ClockStream> { (0..m).map(|k| ClockStream::new(plan.derive(path, k, role))).collect() };
    let tapes = |role: u64| -> Vec<ArrivalTape> { (0..m).map(|k| ArrivalTape::new(plan.derive(path, k, role))).collect() };
    match method {
        Method::Cmc => {
            let upper = simulate_nrm(net, params_upper, x0, horizon, &mut clocks(0), opts)?;
            let lower = simulate_nrm(net, params_lower, x0, horizon, &mut clocks(1), opts)?;
            Ok(CoupledPath {
                kind: CouplingKind::Independent,
                n_updates: upper.n_updates + lower.n_updates,
                upper,
                lower,
                split_firings: Vec::new(),
            })
        }
        Method::Cfd => {
            let mut bank: Vec<ClockStream> = (0..m)
                .flat_map(|k| (0..3).map(move |i| (k, i)))
                .map(|(k, i)| ClockStream::new(plan.derive(path, k, i)))
                .collect();
            simulate_cfd_pair(net, params_upper, params_lower, x0, None, horizon, &mut bank, opts)
        }
        Method::Crp => simulate_crp_pair(net, params_upper, params_lower, x0, None, horizon, &mut tapes(0), opts),
        Method::Crn => {
            let mut holding = ArrivalTape::new(plan.derive(path, 0, 0));
            let mut xi = UniformTape::new(plan.derive(path, 0, 1));
            simulate_crn_pair(net, params_upper, params_lower, x0, None, horizon, &mut holding, &mut xi, opts)
        }
        Method::Naive => simulate_naive_pair(
            net,
            params_upper,
            params_lower,
            x0,
            None,
            horizon,
            &mut clocks(0),
            &mut tapes(1),
            opts,
        ),
    }
}

/// Per-path finite-difference contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSamples {
    /// `d_i = (f(X^upper_i(T)) − f(X^lower_i(T))) / ε`, in path order.
    pub terminal: Vec<f64>,
    /// `grid_values[g][i]`: path `i`'s contribution at grid time `g`.
    pub grid_values: Vec<Vec<f64>>,
    pub n_updates: u64,
}

/// Simulates `cfg.paths` pairs and returns each path's contribution at the
/// horizon and at every `grid` time.
pub fn collect_fd(
    net: &ReactionNetwork,
    observable: &Observable,
    cfg: &FdConfig,
    grid: &[f64],
) -> Result<FdSamples, EstimateError> {
    validate_common(net, cfg.horizon, cfg.paths, cfg.x0.as_deref())?;
    if !(cfg.epsilon > 0.0) {
        return Err(EstimateError::Epsilon(cfg.epsilon));
    }
    if !grid.is_empty() {
        validate_grid(grid, cfg.horizon)?;
    }
    let base = net.params.with_value(&cfg.param, cfg.theta)?;
    let (du, dl) = cfg.mode.offsets(cfg.epsilon);
    let upper = base.perturb(&cfg.param, du)?;
    let lower = base.perturb(&cfg.param, dl)?;
    let x0 = cfg.x0.clone().unwrap_or_else(|| net.init.clone());
    let plan = SeedPlan::new(cfg.seed);
    let opts = SimOptions {
        grid: grid.to_vec(),
        event_cap: cfg.event_cap,
        ..SimOptions::default()
    };
    let nominal = base.values();
    let eps = cfg.epsilon;

    let per_path = map_paths(cfg.workers, cfg.paths, |i| {
        let pair = simulate_pair(
            cfg.method,
            net,
            upper.values(),
            lower.values(),
            &x0,
            cfg.horizon,
            &plan,
            i as u64,
            &opts,
        )
        .map_err(|source| EstimateError::Path { index: i, source })?;
        let diff = |a: &[i64], b: &[i64]| -> Result<f64, EstimateError> {
            Ok((observable.eval_at(a, nominal, i)? - observable.eval_at(b, nominal, i)?) / eps)
        };
        let terminal = diff(&pair.upper.terminal, &pair.lower.terminal)?;
        let at_grid = pair
            .upper
            .snapshots
            .iter()
            .zip(&pair.lower.snapshots)
            .map(|(a, b)| diff(a, b))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok((terminal, at_grid, pair.n_updates))
    })?;

    let mut samples = FdSamples {
        terminal: Vec::with_capacity(cfg.paths),
        grid_values: vec![Vec::with_capacity(cfg.paths); grid.len()],
        n_updates: 0,
    };
    for (terminal, at_grid, n) in per_path {
        samples.terminal.push(terminal);
        for (column, v) in samples.grid_values.iter_mut().zip(at_grid) {
            column.push(v);
        }
        samples.n_updates += n;
    }
    Ok(samples)
}

/// Finite-difference sensitivity estimate `D_R(ε) = (1/R) Σ d_i`.
pub fn estimate_fd(net: &ReactionNetwork, observable: &Observable, cfg: &FdConfig) -> Result<EstimateReport, EstimateError> {
    let start = Instant::now();
    let samples = collect_fd(net, observable, cfg, &[])?;
    let stats: RunningStats = samples.terminal.iter().copied().collect();
    let variance = stats.variance();
    Ok(EstimateReport {
        method: cfg.method.to_string(),
        param: cfg.param.clone(),
        theta: cfg.theta,
        epsilon: cfg.epsilon,
        mode: cfg.mode.to_string(),
        horizon: cfg.horizon,
        paths: cfg.paths,
        seed: cfg.seed,
        estimate: stats.mean(),
        sample_variance: variance,
        ci95: ci95_half_width(variance, cfg.paths),
        n_updates: samples.n_updates,
        elapsed_s: start.elapsed().as_secs_f64(),
        warning: (cfg.method == Method::Naive).then(|| NAIVE_WARNING.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const MMQ: &str = "network mmq\nspecies: M\nparams: theta = 2\nreaction: -> M ; rate = theta\nreaction: M -> ; rate = 0.1*M\n";

    #[test]
    fn single_path_is_reproducible() {
        let net = parse_model(MMQ).unwrap();
        let f = Observable::species(&net, "M").unwrap();
        let cfg = FdConfig::new(Method::Cfd, "theta", 2.0, 0.5, 30.0, 1, 42);
        let a = estimate_fd(&net, &f, &cfg).unwrap();
        let b = estimate_fd(&net, &f, &cfg).unwrap();
        assert!(a.estimate.is_finite());
        assert!(a.identical(&b));
        assert!(a.sample_variance.is_nan());
    }

    #[test]
    fn config_errors() {
        let net = parse_model(MMQ).unwrap();
        let f = Observable::species(&net, "M").unwrap();
        let cfg = FdConfig::new(Method::Cfd, "theta", 2.0, 0.0, 30.0, 10, 1);
        assert!(matches!(estimate_fd(&net, &f, &cfg), Err(EstimateError::Epsilon(_))));
        let cfg = FdConfig::new(Method::Cfd, "theta", 2.0, 0.1, 30.0, 0, 1);
        assert!(matches!(estimate_fd(&net, &f, &cfg), Err(EstimateError::Paths)));
        let cfg = FdConfig::new(Method::Cfd, "nope", 2.0, 0.1, 30.0, 10, 1);
        assert!(matches!(estimate_fd(&net, &f, &cfg), Err(EstimateError::UnknownParam(_))));
    }

    #[test]
    fn naive_reports_warning() {
        let net = parse_model(MMQ).unwrap();
        let f = Observable::species(&net, "M").unwrap();
        let cfg = FdConfig::new(Method::Naive, "theta", 2.0, 0.1, 5.0, 10, 1);
        assert!(estimate_fd(&net, &f, &cfg).unwrap().warning.is_some());
        let cfg = FdConfig::new(Method::Crp, "theta", 2.0, 0.1, 5.0, 10, 1);
        assert!(estimate_fd(&net, &f, &cfg).unwrap().warning.is_none());
    }

    #[test]
    fn path_errors_carry_index() {
        let net = parse_model("network d\nspecies: A\nparams: k = 1\nreaction: A -> ; rate = k\n").unwrap();
        let f = Observable::species(&net, "A").unwrap();
        let mut cfg = FdConfig::new(Method::Cmc, "k", 1.0, 0.1, 10.0, 3, 1);
        cfg.x0 = Some(vec![0]);
        match estimate_fd(&net, &f, &cfg) {
            Err(EstimateError::Path { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
