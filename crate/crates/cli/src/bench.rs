use std::fmt::Write as _;

use ctmc_sens::estimators::{
    estimate_fd, estimate_girsanov, plan_paths, EstimateReport, FdConfig, GirsanovConfig, Method, Observable,
    TraceMethod, Z95,
};
use ctmc_sens::model::ReactionNetwork;
use ctmc_sens::oracle::{mean_ode, mean_sensitivity_ode, ORACLE_STEP};
use ctmc_sens::presets::preset;

use crate::args::BenchArgs;
use crate::CliError;

/// Perturbations compared in table 1.
pub const TABLE1_EPSILONS: [f64; 2] = [1.0 / 20.0, 1.0 / 100.0];
/// Perturbation used when planning for a target interval.
pub const TABLE3_EPSILON: f64 = 1.0 / 40.0;
const TABLE1_DEFAULT_PATHS: [usize; 1] = [1_000];
const TABLE2_DEFAULT_PATHS: [usize; 3] = [1_000, 10_000, 40_000];
const MAX_PLAN_ROUNDS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub report: EstimateReport,
    /// Planning rounds used (table 3 only).
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub table: u8,
    pub rows: Vec<BenchRow>,
    pub footer: Vec<String>,
}

fn fd(
    net: &ReactionNetwork,
    obs: &Observable,
    method: Method,
    eps: f64,
    horizon: f64,
    paths: usize,
    args: &BenchArgs,
) -> Result<EstimateReport, CliError> {
    let theta = net.params.get("theta").map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = FdConfig::new(method, "theta", theta, eps, horizon, paths, args.seed).workers(args.workers);
    Ok(estimate_fd(net, obs, &cfg)?)
}

fn girsanov(net: &ReactionNetwork, obs: &Observable, horizon: f64, paths: usize, args: &BenchArgs) -> Result<EstimateReport, CliError> {
    let theta = net.params.get("theta").map_err(|e| CliError::Config(e.to_string()))?;
    let mut cfg = GirsanovConfig::new("theta", theta, horizon, paths, args.seed);
    cfg.workers = args.workers;
    Ok(estimate_girsanov(net, obs, &cfg)?)
}

fn run_method(
    net: &ReactionNetwork,
    obs: &Observable,
    method: TraceMethod,
    horizon: f64,
    paths: usize,
    args: &BenchArgs,
) -> Result<EstimateReport, CliError> {
    match method {
        TraceMethod::Fd(m) => fd(net, obs, m, TABLE3_EPSILON, horizon, paths, args),
        TraceMethod::Girsanov => girsanov(net, obs, horizon, paths, args),
    }
}

/// Reproduces one of the benchmark tables on the gene-expression preset.
///
/// * Table 1: CMC, CRP and CFD at each `--paths` value (default 1,000) and
///   `ε ∈ {1/20, 1/100}`.
/// * Table 2: the likelihood-ratio estimator at each `--paths` value
///   (default 1,000, 10,000, 40,000).
/// * Table 3: for each of `--methods`, the number of paths needed for a 95%
///   half-width of `--target-ci` at `ε = 1/40`, found by planning from a
///   pilot run and re-running until the target is met.
pub fn cmd_bench(args: &BenchArgs) -> Result<BenchTable, CliError> {
    if !args.preset.eq_ignore_ascii_case("gene") {
        return Err(CliError::Config(format!(
            "benchmark tables are defined for the gene preset only, got `{}`",
            args.preset
        )));
    }
    if args.paths.contains(&0) || args.pilot == 0 {
        return Err(CliError::Config("paths must be ≥ 1".into()));
    }
    if args.workers == 0 {
        return Err(CliError::Config("--workers must be ≥ 1".into()));
    }
    let p = preset("gene").expect("gene preset exists");
    let net = p.network();
    let obs = Observable::parse(&net, p.observable).expect("preset observable parses");
    let horizon = p.horizon;
    let species = net.species_index(p.observable).expect("observable is a species");

    let mut rows = Vec::new();
    let mut epsilons: Vec<f64> = Vec::new();
    match args.table {
        1 => {
            let paths = if args.paths.is_empty() { TABLE1_DEFAULT_PATHS.to_vec() } else { args.paths.clone() };
            for &r in &paths {
                for method in [Method::Cmc, Method::Crp, Method::Cfd] {
                    for &eps in &TABLE1_EPSILONS {
                        rows.push(BenchRow {
                            report: fd(&net, &obs, method, eps, horizon, r, args)?,
                            rounds: 1,
                        });
                    }
                }
            }
            epsilons.extend(TABLE1_EPSILONS);
        }
        2 => {
            let paths = if args.paths.is_empty() { TABLE2_DEFAULT_PATHS.to_vec() } else { args.paths.clone() };
            for &r in &paths {
                rows.push(BenchRow {
                    report: girsanov(&net, &obs, horizon, r, args)?,
                    rounds: 1,
                });
            }
        }
        _ => {
            if !(args.target_ci > 0.0) {
                return Err(CliError::Config("--target-ci must be > 0".into()));
            }
            let target_var = (args.target_ci / Z95).powi(2);
            for &method in &args.methods {
                let mut report = run_method(&net, &obs, method, horizon, args.pilot, args)?;
                let mut rounds = 1;
                while report.ci95 > args.target_ci && rounds < MAX_PLAN_ROUNDS {
                    let planned = plan_paths(target_var, &report)
                        .ok_or_else(|| CliError::Runtime("pilot variance is not finite".into()))?;
                    // grow by at least 5% so that a noisy variance cannot stall the search
                    let next = planned.max(report.paths + report.paths.div_ceil(20));
                    if next > args.max_paths {
                        return Err(CliError::Runtime(format!(
                            "{}: {next} paths needed, above --max-paths {}",
                            method.as_str(),
                            args.max_paths
                        )));
                    }
                    report = run_method(&net, &obs, method, horizon, next, args)?;
                    rounds += 1;
                }
                rows.push(BenchRow { report, rounds });
            }
            epsilons.push(TABLE3_EPSILON);
        }
    }

    let exact = mean_sensitivity_ode(&net, &net.params, "theta", &net.init, horizon)?[species];
    let mut footer = vec![format!("exact J'(theta) = {exact:.3} (first-moment equations)")];
    for eps in epsilons {
        let at = |d: f64| -> Result<f64, CliError> {
            let ps = net.params.perturb("theta", d).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(mean_ode(&net, ps.values(), &net.init, horizon, ORACLE_STEP)?[species])
        };
        let centered = (at(eps / 2.0)? - at(-eps / 2.0)?) / eps;
        footer.push(format!("centered difference at epsilon = {eps}: {centered:.3}"));
    }
    Ok(BenchTable {
        table: args.table,
        rows,
        footer,
    })
}

impl BenchTable {
    pub fn render(&self) -> String {
        let mut s = String::new();
        match self.table {
            1 => {
                let _ = writeln!(
                    s,
                    "{:<6} {:>8} {:>20} {:>20} {:>12} {:>10}",
                    "method", "R", "eps = 1/20", "eps = 1/100", "# updates", "CPU (s)"
                );
                for pair in self.rows.chunks(TABLE1_EPSILONS.len()) {
                    let a = &pair[0].report;
                    let updates = pair.iter().map(|r| r.report.n_updates as f64).sum::<f64>() / pair.len() as f64;
                    let cpu = pair.iter().map(|r| r.report.elapsed_s).sum::<f64>() / pair.len() as f64;
                    let cells: Vec<String> =
                        pair.iter().map(|r| format!("{:.1} ± {:.1}", r.report.estimate, r.report.ci95)).collect();
                    let _ = writeln!(
                        s,
                        "{:<6} {:>8} {:>20} {:>20} {:>12.3e} {:>10.2}",
                        a.method.to_uppercase(),
                        a.paths,
                        cells[0],
                        cells.get(1).cloned().unwrap_or_default(),
                        updates,
                        cpu
                    );
                }
            }
            2 => {
                let _ = writeln!(s, "{:>8} {:>20} {:>12} {:>10}", "R", "approximation", "# updates", "CPU (s)");
                for row in &self.rows {
                    let r = &row.report;
                    let _ = writeln!(
                        s,
                        "{:>8} {:>20} {:>12.3e} {:>10.2}",
                        r.paths,
                        format!("{:.1} ± {:.1}", r.estimate, r.ci95),
                        r.n_updates as f64,
                        r.elapsed_s
                    );
                }
            }
            _ => {
                let _ = writeln!(
                    s,
                    "{:<9} {:>8} {:>20} {:>12} {:>10} {:>7}",
                    "method", "R", "approximation", "# updates", "CPU (s)", "rounds"
                );
                for row in &self.rows {
                    let r = &row.report;
                    let _ = writeln!(
                        s,
                        "{:<9} {:>8} {:>20} {:>12.3e} {:>10.2} {:>7}",
                        r.method.to_uppercase(),
                        r.paths,
                        format!("{:.1} ± {:.1}", r.estimate, r.ci95),
                        r.n_updates as f64,
                        r.elapsed_s,
                        row.rounds
                    );
                }
            }
        }
        for line in &self.footer {
            let _ = writeln!(s, "{line}");
        }
        s
    }
}
