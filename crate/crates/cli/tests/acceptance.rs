//! Acceptance suite: one line per criterion, `PASS`, `FAIL` or `IGNORED`.
//!
//! Runs as a plain binary (no libtest harness). The slow decoupling check
//! (criterion 6) only runs with `--include-ignored`/`--ignored` or with
//! `CTMCSENS_ACCEPTANCE_SLOW=1`. Numeric arguments select criteria, e.g.
//! `cargo test --test acceptance -- 2 9`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use clap::Parser;
use ctmc_sens::estimators::{
    collect_fd, simulate_pair, EstimateReport, FdConfig, FdMode, Method, Observable, RunningStats,
};
use ctmc_sens::model::{parse_model, ReactionNetwork};
use ctmc_sens::oracle::{mean_ode, mm_infty_coupled_moments, naive_pure_death_scaled_difference, ORACLE_STEP};
use ctmc_sens::presets::{preset, PRESETS};
use ctmc_sens::sim::{simulate_nrm, toy_poisson_coupling, SimOptions};
use ctmc_sens::streams::{ClockStream, SeedPlan, UniformSource};
use ctmcsens_cli::{cmd_estimate, cmd_oracle, cmd_trace, Cli, Command, OracleOutcome, TraceOutcome};
use rayon::prelude::*;

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    slow: bool,
    check: Check,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "oracle values (gene)", slow: false, check: c1_oracle },
    Criterion { id: 2, title: "CFD correctness (gene)", slow: false, check: c2_cfd_gene },
    Criterion { id: 3, title: "variance ordering (gene)", slow: false, check: c3_variance_ordering },
    Criterion { id: 4, title: "M/M/inf coupled moments", slow: false, check: c4_coupled_moments },
    Criterion { id: 5, title: "CFD variance limit (mmq)", slow: false, check: c5_variance_limit },
    Criterion { id: 6, title: "CRP/CRN decoupling at t = 10^4", slow: true, check: c6_decoupling },
    Criterion { id: 7, title: "naive coupling regression", slow: false, check: c7_naive },
    Criterion { id: 8, title: "toy Poisson coupling", slow: false, check: c8_toy },
    Criterion { id: 9, title: "likelihood-ratio estimator", slow: false, check: c9_girsanov },
    Criterion { id: 10, title: "work accounting", slow: false, check: c10_work },
    Criterion { id: 11, title: "toggle-switch crossover", slow: false, check: c11_toggle },
    Criterion { id: 12, title: "law preservation and determinism", slow: false, check: c12_laws },
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let include_slow = args.iter().any(|a| a == "--include-ignored" || a == "--ignored")
        || std::env::var("CTMCSENS_ACCEPTANCE_SLOW").is_ok_and(|v| v == "1");
    let only: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();

    let mut failed = 0;
    for c in CRITERIA {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        if c.slow && !include_slow && !only.contains(&c.id) {
            println!("criterion {:>2}: IGNORED — {} (opt in with --include-ignored)", c.id, c.title);
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS — {}: {detail} ({secs:.1}s)", c.id, c.title),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL — {}: {detail} ({secs:.1}s)", c.id, c.title);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- helpers

fn workers() -> String {
    std::thread::available_parallelism().map_or(1, |n| n.get()).to_string()
}

fn command(argv: &[&str]) -> Command {
    let full = std::iter::once("ctmcsens").chain(argv.iter().copied());
    Cli::try_parse_from(full).unwrap_or_else(|e| panic!("bad test arguments {argv:?}: {e}")).command
}

fn estimate(argv: &[&str]) -> EstimateReport {
    let mut v = vec!["estimate"];
    v.extend_from_slice(argv);
    let w = workers();
    v.extend(["--workers", &w]);
    match command(&v) {
        Command::Estimate(a) => cmd_estimate(&a).unwrap_or_else(|e| panic!("{e}")),
        _ => unreachable!(),
    }
}

fn trace(argv: &[&str]) -> TraceOutcome {
    let mut v = vec!["trace"];
    v.extend_from_slice(argv);
    let w = workers();
    v.extend(["--workers", &w]);
    match command(&v) {
        Command::Trace(a) => cmd_trace(&a).unwrap_or_else(|e| panic!("{e}")),
        _ => unreachable!(),
    }
}

fn oracle(argv: &[&str]) -> OracleOutcome {
    let mut v = vec!["oracle"];
    v.extend_from_slice(argv);
    match command(&v) {
        Command::Oracle(a) => cmd_oracle(&a).unwrap_or_else(|e| panic!("{e}")),
        _ => unreachable!(),
    }
}

fn check(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Standard error of the sample variance, from the fourth central moment.
fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2) / n).max(0.0).sqrt()
}

fn gene_centered_difference(eps: f64) -> f64 {
    let p = preset("gene").unwrap();
    let net = p.network();
    let species = net.species_index("P").unwrap();
    let at = |d: f64| mean_ode(&net, net.params.perturb("theta", d).unwrap().values(), &net.init, 30.0, ORACLE_STEP).unwrap()[species];
    (at(eps / 2.0) - at(-eps / 2.0)) / eps
}

// --------------------------------------------------------------- criteria

fn c1_oracle() -> Result<String, String> {
    let sens = oracle(&["--preset", "gene", "sensitivity"]).value;
    let mean = oracle(&["--preset", "gene", "mean"]).value;
    check(
        (sens + 318.073).abs() <= 0.01 && (mean - 79.941).abs() <= 0.01,
        format!("sensitivity {sens:.4} (want -318.073), mean {mean:.4} (want 79.941)"),
    )
}

fn c2_cfd_gene() -> Result<String, String> {
    let r = estimate(&["--preset", "gene", "--method", "cfd", "--epsilon", "0.05", "-R", "10000", "--seed", "2"]);
    let target = gene_centered_difference(0.05);
    let z = (r.estimate - target) / r.std_error();
    check(
        z.abs() <= 3.0 && r.ci95 <= 5.0,
        format!("{:.2} ± {:.2} vs centered difference {target:.3} (z = {z:.2})", r.estimate, r.ci95),
    )
}

fn c3_variance_ordering() -> Result<String, String> {
    let var = |m: &str| {
        estimate(&["--preset", "gene", "--method", m, "--epsilon", "0.025", "-R", "5000", "--seed", "3"]).sample_variance
    };
    let (cmc, crp, cfd) = (var("cmc"), var("crp"), var("cfd"));
    let (a, b) = (cmc / cfd, crp / cfd);
    check(
        cfd < crp && crp < cmc && (25.0..=100.0).contains(&a) && (3.0..=15.0).contains(&b),
        format!("Var CMC/CFD = {a:.1} (want 25-100), CRP/CFD = {b:.2} (want 3-15)"),
    )
}

fn c4_coupled_moments() -> Result<String, String> {
    let p = preset("mmq").unwrap();
    let net = p.network();
    let obs = Observable::parse(&net, "M").unwrap();
    let eps = 0.01;
    let grid = [5.0, 10.0, 30.0];
    let mut cfg = FdConfig::new(Method::Cfd, "theta", 2.0, eps, 30.0, 10_000, 4).mode(FdMode::Forward);
    cfg.workers = workers().parse().unwrap();
    let samples = collect_fd(&net, &obs, &cfg, &grid).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (t, column) in grid.iter().zip(&samples.grid_values) {
        let raw: Vec<f64> = column.iter().map(|d| d * eps).collect();
        let s: RunningStats = raw.iter().copied().collect();
        let (m, v) = mm_infty_coupled_moments(2.0, eps, 0.1, *t);
        let zm = (s.mean() - m) / s.std_error();
        let zv = (s.variance() - v) / variance_se(&raw);
        ok &= zm.abs() <= 4.0 && zv.abs() <= 4.0;
        parts.push(format!("t={t}: mean {:.4}/{m:.4}, var {:.4}/{v:.4}", s.mean(), s.variance()));
    }
    check(ok, parts.join("; "))
}

fn c5_variance_limit() -> Result<String, String> {
    let out = trace(&["--preset", "mmq", "--methods", "cfd", "--epsilon", "0.01", "-R", "1000", "--grid", "0:100:1", "--seed", "5"]);
    let v = *out.traces[0].var_estimator.last().unwrap();
    check((0.7..=1.3).contains(&v), format!("variance of estimator at t = 100: {v:.3} (want 0.7-1.3)"))
}

fn c6_decoupling() -> Result<String, String> {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in ["crp", "crn"] {
        let r = estimate(&[
            "--preset", "mmq", "--method", m, "--epsilon", "0.01", "--mode", "forward", "-T", "10000", "-R", "1000", "--seed", "6",
        ]);
        let raw_var = r.sample_variance * r.epsilon * r.epsilon;
        ok &= (30.0..=50.0).contains(&raw_var);
        parts.push(format!("{m} raw-difference variance {raw_var:.1}"));
    }
    check(ok, format!("{} (want 30-50)", parts.join(", ")))
}

fn c7_naive() -> Result<String, String> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (eps, target) in [(0.5, -0.14870), (0.05, -0.01838)] {
        let e = eps.to_string();
        let r = estimate(&["--preset", "puredeath", "--method", "naive", "--epsilon", &e, "-R", "100000", "--seed", "7"]);
        let z = (r.estimate - target) / r.std_error();
        ok &= z.abs() <= 3.0 && r.warning.is_some();
        parts.push(format!(
            "eps={eps}: {:.5} ± {:.5} vs {target} (z = {z:.2}; closed form {:.5})",
            r.estimate,
            r.std_error(),
            naive_pure_death_scaled_difference(eps)
        ));
    }
    check(ok, parts.join("; "))
}

fn c8_toy() -> Result<String, String> {
    let plan = SeedPlan::new(8);
    let diffs: Vec<f64> = (0..100_000u64)
        .map(|i| toy_poisson_coupling(13.1, 13.0, 1.0, [plan.derive(i, 0, 0), plan.derive(i, 0, 1)]).difference() as f64)
        .collect();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let sq: Vec<f64> = diffs.iter().map(|d| d * d).collect();
    let (a, b): (RunningStats, RunningStats) = (abs.iter().copied().collect(), sq.iter().copied().collect());
    let za = (a.mean() - 0.1) / a.std_error();
    let zb = (b.mean() - 0.11) / b.std_error();
    check(
        za.abs() <= 4.0 && zb.abs() <= 4.0,
        format!("E|Z1-Z2| = {:.4} (z = {za:.2}), E(Z1-Z2)^2 = {:.4} (z = {zb:.2})", a.mean(), b.mean()),
    )
}

fn c9_girsanov() -> Result<String, String> {
    let r = estimate(&["--preset", "gene", "--method", "girsanov", "-R", "10000", "--seed", "9"]);
    let z = (r.estimate + 318.073) / r.std_error();
    let ci_ok = (49.2 / 2.0..=49.2 * 2.0).contains(&r.ci95);
    let out = trace(&["--preset", "mmq", "--methods", "girsanov", "-R", "10000", "--grid", "5:40:5", "--seed", "9"]);
    let v = &out.traces[0].var_d;
    let increasing = v.windows(2).all(|w| w[0] < w[1]);
    let ratio = v[7] / v[3];
    check(
        z.abs() <= 3.0 && ci_ok && increasing && (1.4..=2.8).contains(&ratio),
        format!(
            "{:.1} ± {:.1} (z = {z:.2}); mmq trace increasing: {increasing}, Var(40)/Var(20) = {ratio:.2}",
            r.estimate, r.ci95
        ),
    )
}

fn c10_work() -> Result<String, String> {
    let updates = |m: &str| {
        estimate(&["--preset", "gene", "--method", m, "--epsilon", "0.05", "-R", "1000", "--seed", "10"]).n_updates as f64
    };
    let (cfd, cmc) = (updates("cfd"), updates("cmc"));
    let near = |x: f64, target: f64| (x / target - 1.0).abs() <= 0.3;
    check(
        cfd <= 0.7 * cmc && near(cfd, 4.4e6) && near(cmc, 8.4e6),
        format!("CFD {cfd:.3e} (ref 4.4e6), CMC {cmc:.3e} (ref 8.4e6), ratio {:.3}", cfd / cmc),
    )
}

fn c11_toggle() -> Result<String, String> {
    let out = trace(&["--preset", "toggle", "--methods", "cfd,crp", "--epsilon", "0.1", "-R", "10000", "--grid", "2,20", "--seed", "11"]);
    let (cfd, crp) = (&out.traces[0].var_d, &out.traces[1].var_d);
    check(
        crp[0] < cfd[0] && cfd[1] < crp[1],
        format!("t=2: CRP {:.1} vs CFD {:.1}; t=20: CFD {:.1} vs CRP {:.1}", crp[0], cfd[0], cfd[1], crp[1]),
    )
}

/// Terminal protein counts of independent NRM paths at `params`.
fn nrm_terminals(net: &ReactionNetwork, params: &[f64], seed: u64, n: u64) -> Vec<f64> {
    let plan = SeedPlan::new(seed);
    let species = net.species_index("P").unwrap();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut clocks: Vec<ClockStream> =
                (0..net.num_reactions() as u64).map(|k| ClockStream::new(plan.derive(i, k, 0))).collect();
            simulate_nrm(net, params, &net.init, 30.0, &mut clocks, &SimOptions::default()).unwrap().terminal[species] as f64
        })
        .collect()
}

fn c12_laws() -> Result<String, String> {
    let mut failures = Vec::new();
    let p = preset("gene").unwrap();
    let net = p.network();
    let species = net.species_index("P").unwrap();
    let n = 10_000u64;
    let eps = 0.05;
    let upper = net.params.perturb("theta", eps / 2.0).unwrap();
    let lower = net.params.perturb("theta", -eps / 2.0).unwrap();
    let ref_upper = nrm_terminals(&net, upper.values(), 1001, n);
    let ref_lower = nrm_terminals(&net, lower.values(), 1002, n);
    let compare = |label: &str, xs: &[f64], reference: &[f64], failures: &mut Vec<String>| {
        let (a, b): (RunningStats, RunningStats) = (xs.iter().copied().collect(), reference.iter().copied().collect());
        let zm = (a.mean() - b.mean()) / (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
        let zv = (a.variance() - b.variance()) / (variance_se(xs).powi(2) + variance_se(reference).powi(2)).sqrt();
        if zm.abs() > 4.0 || zv.abs() > 4.0 {
            failures.push(format!("{label}: mean z {zm:.2}, variance z {zv:.2}"));
        }
    };
    for method in [Method::Cfd, Method::Crp, Method::Crn] {
        let plan = SeedPlan::new(12);
        let pairs: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let pair = simulate_pair(method, &net, upper.values(), lower.values(), &net.init, 30.0, &plan, i, &SimOptions::default())
                    .unwrap();
                (pair.upper.terminal[species] as f64, pair.lower.terminal[species] as f64)
            })
            .collect();
        let (u, l): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        compare(&format!("{method} upper"), &u, &ref_upper, &mut failures);
        compare(&format!("{method} lower"), &l, &ref_lower, &mut failures);
    }

    // bit-identical reports across worker counts, for every preset
    for p in PRESETS {
        let methods: &[&str] = if p.name == "puredeath" { &["naive", "cfd", "girsanov"] } else { &["cfd", "crp", "crn", "cmc", "girsanov"] };
        for m in methods {
            let run = |w: &str| {
                let v = ["estimate", "--preset", p.name, "--method", m, "-R", "300", "--seed", "12", "--workers", w];
                match command(&v) {
                    Command::Estimate(a) => cmd_estimate(&a).unwrap(),
                    _ => unreachable!(),
                }
            };
            let one = run("1");
            if !(one.identical(&run("2")) && one.identical(&run("8"))) {
                failures.push(format!("{} {m}: output depends on worker count", p.name));
            }
        }
    }

    // model printing round-trips
    for p in PRESETS {
        let net = p.network();
        match parse_model(&net.to_string()) {
            Ok(again) if again == net => {}
            _ => failures.push(format!("{}: printed model does not reparse identically", p.name)),
        }
    }

    // symbolic parameter derivatives against central differences
    let mut u = UniformSource::new(12);
    let mut checked = 0;
    for p in PRESETS {
        let net = p.network();
        for _ in 0..20 {
            let x: Vec<i64> = (0..net.num_species()).map(|_| (u.next_uniform() * 60.0) as i64).collect();
            let params: Vec<f64> = net.params.values().iter().map(|v| v * (0.5 + u.next_uniform())).collect();
            for reaction in &net.reactions {
                for j in 0..params.len() {
                    let d = reaction.rate.diff_param(j).eval(&x, &params).unwrap();
                    let h = 1e-6 * params[j].abs().max(1.0);
                    let (mut up, mut down) = (params.clone(), params.clone());
                    up[j] += h;
                    down[j] -= h;
                    let fd = (reaction.rate.eval(&x, &up).unwrap() - reaction.rate.eval(&x, &down).unwrap()) / (2.0 * h);
                    checked += 1;
                    if (d - fd).abs() > 1e-6 * d.abs().max(fd.abs()).max(1e-3) {
                        failures.push(format!("{}: derivative {d} vs difference {fd}", p.name));
                    }
                }
            }
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("marginals agree for CFD/CRP/CRN, reports worker-independent, {checked} derivative checks")
        } else {
            failures.join("; ")
        },
    )
}
