use std::fmt::Write as _;
use std::io::Write;

use ctmc_sens::estimators::{
    estimate_fd, estimate_girsanov, simulate_pair, variance_trace, EstimateReport, FdConfig, GirsanovConfig,
    Observable, TraceConfig, TraceMethod, VarianceTrace,
};
use ctmc_sens::model::{parse_model, ParamSet, ReactionNetwork};
use ctmc_sens::oracle::{exact_expectation, mean_ode, mean_sensitivity_ode, StateBox, ORACLE_STEP};
use ctmc_sens::presets::{preset, Preset, PRESETS};
use ctmc_sens::sim::{simulate_gillespie, simulate_nrm, PathRecord, SimOptions, TraceMode};
use ctmc_sens::streams::{ArrivalTape, ClockStream, SeedPlan, UniformTape, UniformSource};

use crate::args::{
    Command, EstimateArgs, ModelArgs, OracleArgs, OracleQuantity, RunArgs, SimMethod, SimulateArgs, TraceArgs,
};
use crate::output::{append_csv, csv_string, parse_grid, render_svg, trace_csv, CsvRow};
use crate::{bench, Cli, CliError};

/// A model with its experiment defaults resolved from flags and preset.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub net: ReactionNetwork,
    pub preset: Option<&'static Preset>,
    pub param: String,
    pub theta: f64,
    pub observable: Observable,
    pub horizon: f64,
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Resolves `--preset`/`--model` and the parameter, observable and horizon.
pub fn load_model(args: &ModelArgs) -> Result<LoadedModel, CliError> {
    let (net, preset) = match (&args.preset, &args.model) {
        (Some(name), None) => {
            let p = preset(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                config(format!("unknown preset `{name}` (available: {})", names.join(", ")))
            })?;
            (p.network(), Some(p))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config(format!("cannot read model file {}: {e}", path.display())))?;
            let net = parse_model(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
            (net, None)
        }
        (None, None) => return Err(config("one of --preset or --model is required")),
        (Some(_), Some(_)) => return Err(config("--preset and --model are mutually exclusive")),
    };

    let param = match (&args.param, preset) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => p.param.to_string(),
        (None, None) if net.params.len() == 1 => net.params.names()[0].clone(),
        (None, None) => return Err(config("--param is required for this model")),
    };
    let theta = match args.theta {
        Some(t) => t,
        None => net.params.get(&param).map_err(|e| config(e.to_string()))?,
    };
    net.params.index_of(&param).map_err(|e| config(e.to_string()))?;

    let observable_text = match (&args.observable, preset) {
        (Some(o), _) => o.clone(),
        (None, Some(p)) => p.observable.to_string(),
        (None, None) if net.num_species() == 1 => net.species[0].clone(),
        (None, None) => return Err(config("--observable is required for this model")),
    };
    let observable =
        Observable::parse(&net, &observable_text).map_err(|e| config(format!("--observable `{observable_text}`: {e}")))?;

    let horizon = match (args.time, preset) {
        (Some(t), _) => t,
        (None, Some(p)) => p.horizon,
        (None, None) => return Err(config("--time is required for this model")),
    };
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(config(format!("--time must be a finite value >= 0, got {horizon}")));
    }
    Ok(LoadedModel {
        net,
        preset,
        param,
        theta,
        observable,
        horizon,
    })
}

fn resolve_paths(run: &RunArgs, model: &LoadedModel) -> Result<usize, CliError> {
    let paths = match (run.paths, model.preset) {
        (Some(r), _) => r,
        (None, Some(p)) => p.paths,
        (None, None) => return Err(config("--paths is required for this model")),
    };
    if paths == 0 {
        return Err(config("paths must be ≥ 1"));
    }
    if run.workers == 0 {
        return Err(config("--workers must be ≥ 1"));
    }
    Ok(paths)
}

fn resolve_epsilon(eps: Option<f64>, model: &LoadedModel) -> Result<f64, CliError> {
    let eps = match (eps, model.preset) {
        (Some(e), _) => e,
        (None, Some(p)) => p.epsilon,
        (None, None) => return Err(config("--epsilon is required for finite-difference methods")),
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(config(format!("--epsilon must be > 0, got {eps}")));
    }
    Ok(eps)
}

/// Runs one estimator as configured by `args`.
pub fn cmd_estimate(args: &EstimateArgs) -> Result<EstimateReport, CliError> {
    let model = load_model(&args.model)?;
    let paths = resolve_paths(&args.run, &model)?;
    let report = match args.method {
        TraceMethod::Fd(method) => {
            if args.centered_score {
                return Err(config("--centered-score applies only to --method girsanov"));
            }
            let eps = resolve_epsilon(args.epsilon, &model)?;
            let cfg = FdConfig::new(method, &model.param, model.theta, eps, model.horizon, paths, args.run.seed)
                .mode(args.mode.into())
                .workers(args.run.workers);
            estimate_fd(&model.net, &model.observable, &cfg)?
        }
        TraceMethod::Girsanov => {
            if args.epsilon.is_some() {
                return Err(config("--epsilon does not apply to --method girsanov"));
            }
            let mut cfg = GirsanovConfig::new(&model.param, model.theta, model.horizon, paths, args.run.seed);
            cfg.workers = args.run.workers;
            cfg.centered = args.centered_score;
            estimate_girsanov(&model.net, &model.observable, &cfg)?
        }
    };
    Ok(report)
}

pub(crate) fn summary(report: &EstimateReport, observable: &str) -> String {
    let mut s = String::new();
    if report.epsilon > 0.0 {
        let _ = writeln!(s, "method      {} ({}, epsilon = {})", report.method, report.mode, report.epsilon);
    } else {
        let _ = writeln!(s, "method      {} ({})", report.method, report.mode);
    }
    let _ = writeln!(s, "parameter   {} = {}", report.param, report.theta);
    let _ = writeln!(s, "observable  {} at T = {}", observable, report.horizon);
    let _ = writeln!(s, "paths       {} (seed {})", report.paths, report.seed);
    let _ = writeln!(s, "estimate    {:.4} ± {:.4} (95% CI)", report.estimate, report.ci95);
    let _ = writeln!(s, "var(d)      {:.6e}", report.sample_variance);
    let _ = writeln!(s, "updates     {}", report.n_updates);
    let _ = writeln!(s, "elapsed     {:.3} s", report.elapsed_s);
    if let Some(w) = &report.warning {
        let _ = writeln!(s, "WARNING     {w}");
    }
    s
}

/// Variance traces for each requested method, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOutcome {
    pub traces: Vec<VarianceTrace>,
    pub title: String,
}

pub fn cmd_trace(args: &TraceArgs) -> Result<TraceOutcome, CliError> {
    let model = load_model(&args.model)?;
    let paths = resolve_paths(&args.run, &model)?;
    let grid = parse_grid(&args.grid)?;
    if args.methods.is_empty() {
        return Err(config("--methods is empty"));
    }
    let needs_eps = args.methods.iter().any(|m| matches!(m, TraceMethod::Fd(_)));
    let eps = if needs_eps { resolve_epsilon(args.epsilon, &model)? } else { 0.0 };
    let mut traces = Vec::with_capacity(args.methods.len());
    for &method in &args.methods {
        let mut cfg = TraceConfig::new(method, &model.param, model.theta, eps, grid.clone(), paths, args.run.seed);
        cfg.mode = args.mode.into();
        cfg.workers = args.run.workers;
        traces.push(variance_trace(&model.net, &model.observable, &cfg)?);
    }
    let title = format!(
        "{}: {} = {}, f = {}, R = {}{}",
        model.net.name,
        model.param,
        model.theta,
        model.observable.text,
        paths,
        if needs_eps { format!(", epsilon = {eps}") } else { String::new() }
    );
    Ok(TraceOutcome { traces, title })
}

/// A reference value with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub quantity: OracleQuantity,
    pub value: f64,
    /// Accuracy claim for `value`.
    pub tolerance: f64,
    pub method: String,
    /// Probability lost from the truncation box (uniformization only).
    pub leak: Option<f64>,
}

/// Coefficients `(c0, c)` with `f(x) = c0 + c·x`, if the observable is affine.
fn affine_observable(net: &ReactionNetwork, obs: &Observable, params: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = net.num_species();
    let eval = |x: &[i64]| obs.expr.eval(x, params).ok().filter(|v| v.is_finite());
    let mut x = vec![0i64; n];
    let c0 = eval(&x)?;
    let mut c = vec![0.0; n];
    for i in 0..n {
        x[i] = 1;
        c[i] = eval(&x)? - c0;
        x[i] = 0;
    }
    let mut rng = UniformSource::new(17);
    for _ in 0..50 {
        for xi in x.iter_mut() {
            *xi = (rng.next_uniform() * 100.0) as i64;
        }
        let fit = c0 + c.iter().zip(&x).map(|(a, b)| a * *b as f64).sum::<f64>();
        let v = eval(&x)?;
        if (v - fit).abs() > 1e-9 * (1.0 + v.abs()) {
            return None;
        }
    }
    Some((c0, c))
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<OracleOutcome, CliError> {
    let model = load_model(&args.model)?;
    let net = &model.net;
    let params = net.params.with_value(&model.param, model.theta).map_err(|e| config(e.to_string()))?;
    let x0 = net.init.clone();
    match args.quantity {
        OracleQuantity::Mean | OracleQuantity::Sensitivity => {
            let (c0, c) = affine_observable(net, &model.observable, params.values()).ok_or_else(|| {
                config(format!(
                    "observable `{}` is not affine in the state; use `oracle exact`",
                    model.observable.text
                ))
            })?;
            let non_affine = |e: ctmc_sens::oracle::OracleError| -> CliError {
                match e {
                    ctmc_sens::oracle::OracleError::NonAffine { .. } => config(format!("{e}")),
                    other => other.into(),
                }
            };
            if args.quantity == OracleQuantity::Mean {
                let m = mean_ode(net, params.values(), &x0, model.horizon, ORACLE_STEP).map_err(non_affine)?;
                Ok(OracleOutcome {
                    quantity: args.quantity,
                    value: c0 + c.iter().zip(&m).map(|(a, b)| a * b).sum::<f64>(),
                    tolerance: 1e-6,
                    method: format!("first-moment equations, RK4 with step {ORACLE_STEP}"),
                    leak: None,
                })
            } else {
                let s = mean_sensitivity_ode(net, &params, &model.param, &x0, model.horizon).map_err(non_affine)?;
                Ok(OracleOutcome {
                    quantity: args.quantity,
                    value: c.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>(),
                    tolerance: 1e-4,
                    method: format!(
                        "central difference (delta = {:e}) of first-moment equations, RK4 with step {ORACLE_STEP}",
                        ctmc_sens::oracle::ORACLE_DELTA
                    ),
                    leak: None,
                })
            }
        }
        OracleQuantity::Exact => {
            let bounds = if !args.r#box.is_empty() {
                StateBox::from_upper(args.r#box.clone())
            } else if let Some(p) = model.preset {
                p.exact_box()
            } else {
                return Err(config("--box is required for `oracle exact` on a model file"));
            };
            let obs = &model.observable;
            let e = exact_expectation(
                net,
                params.values(),
                &x0,
                model.horizon,
                |x| obs.expr.eval(x, params.values()).unwrap_or(f64::NAN),
                &bounds,
                args.tol,
            )?;
            Ok(OracleOutcome {
                quantity: args.quantity,
                value: e.value,
                tolerance: args.tol,
                method: format!("uniformization on box {:?}..={:?}, {} terms", bounds.lo, bounds.hi, e.terms),
                leak: Some(e.leak),
            })
        }
    }
}

/// Simulates one path (or pair) and returns CSV rows
/// `component,t,<species...>`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let model = load_model(&args.model)?;
    let net = &model.net;
    if args.every == 0 {
        return Err(config("--every must be ≥ 1"));
    }
    let opts = SimOptions {
        trace: TraceMode::EveryNth(args.every),
        ..SimOptions::default()
    };
    let base = net.params.with_value(&model.param, model.theta).map_err(|e| config(e.to_string()))?;
    let plan = SeedPlan::new(args.seed);
    let x0 = net.init.clone();
    let m = net.num_reactions() as u64;
    let runtime = |e: ctmc_sens::sim::SimError| CliError::Runtime(e.to_string());
    let components: Vec<(&str, PathRecord)> = match args.method {
        SimMethod::Nrm => {
            let mut clocks: Vec<ClockStream> = (0..m).map(|k| ClockStream::new(plan.derive(0, k, 0))).collect();
            vec![("path", simulate_nrm(net, base.values(), &x0, model.horizon, &mut clocks, &opts).map_err(runtime)?)]
        }
        SimMethod::Gillespie => {
            let mut holding = ArrivalTape::new(plan.derive(0, 0, 0));
            let mut xi = UniformTape::new(plan.derive(0, 0, 1));
            vec![(
                "path",
                simulate_gillespie(net, base.values(), &x0, model.horizon, &mut holding, &mut xi, &opts).map_err(runtime)?,
            )]
        }
        coupled => {
            let method = match coupled {
                SimMethod::Cmc => ctmc_sens::estimators::Method::Cmc,
                SimMethod::Cfd => ctmc_sens::estimators::Method::Cfd,
                SimMethod::Crp => ctmc_sens::estimators::Method::Crp,
                SimMethod::Crn => ctmc_sens::estimators::Method::Crn,
                _ => ctmc_sens::estimators::Method::Naive,
            };
            let eps = resolve_epsilon(args.epsilon, &model)?;
            let mode: ctmc_sens::estimators::FdMode = args.mode.into();
            let (du, dl) = mode.offsets(eps);
            let pu: ParamSet = base.perturb(&model.param, du).map_err(|e| config(e.to_string()))?;
            let pl: ParamSet = base.perturb(&model.param, dl).map_err(|e| config(e.to_string()))?;
            let pair = simulate_pair(method, net, pu.values(), pl.values(), &x0, model.horizon, &plan, 0, &opts)
                .map_err(runtime)?;
            vec![("upper", pair.upper), ("lower", pair.lower)]
        }
    };
    let mut s = format!("component,t,{}\n", net.species.join(","));
    for (name, rec) in &components {
        let mut last_time = f64::NAN;
        for p in rec.trace.as_deref().unwrap_or(&[]) {
            let _ = writeln!(s, "{name},{},{}", p.time, join(&p.state));
            last_time = p.time;
        }
        if last_time != rec.horizon {
            let _ = writeln!(s, "{name},{},{}", rec.horizon, join(&rec.terminal));
        }
    }
    Ok(s)
}

fn join(x: &[i64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub(crate) fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(args) => {
            let report = cmd_estimate(args)?;
            let observable = args
                .model
                .observable
                .clone()
                .or_else(|| args.model.preset.as_deref().and_then(preset).map(|p| p.observable.to_string()))
                .unwrap_or_else(|| "f".into());
            if args.json {
                let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
                writeln!(out, "{json}")?;
            } else {
                write!(out, "{}", summary(&report, &observable))?;
            }
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            let row = CsvRow::from(&report);
            match &args.csv {
                Some(path) => append_csv(path, &[row])?,
                None if !args.json => write!(out, "\n{}", csv_string(&[row], true)?)?,
                None => {}
            }
        }
        Command::Trace(args) => {
            let outcome = cmd_trace(args)?;
            let csv = trace_csv(&outcome.traces);
            match &args.csv {
                Some(path) => std::fs::write(path, csv)?,
                None => write!(out, "{csv}")?,
            }
            if let Some(path) = &args.svg {
                std::fs::write(path, render_svg(&outcome.traces, &outcome.title))?;
            }
        }
        Command::Bench(args) => {
            let table = bench::cmd_bench(args)?;
            write!(out, "{}", table.render())?;
            if let Some(path) = &args.csv {
                let rows: Vec<CsvRow> = table.rows.iter().map(|r| CsvRow::from(&r.report)).collect();
                std::fs::write(path, csv_string(&rows, true)?)?;
            }
        }
        Command::Oracle(args) => {
            let o = cmd_oracle(args)?;
            writeln!(out, "{:.6} ± {:e}", o.value, o.tolerance)?;
            writeln!(out, "method: {}", o.method)?;
            if let Some(leak) = o.leak {
                writeln!(out, "leak: {leak:e}")?;
            }
        }
        Command::Simulate(args) => {
            let csv = cmd_simulate(args)?;
            match &args.out {
                Some(path) => std::fs::write(path, csv)?,
                None => write!(out, "{csv}")?,
            }
        }
    }
    Ok(())
}
