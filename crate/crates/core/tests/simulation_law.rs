//! Distributional checks of the path generators against known laws.

mod common;

use common::{ks_two_sample, ks_two_sample_critical, stats, variance_se, GENE, MMQ};
use ctmc_sens::estimators::{simulate_pair, Method};
use ctmc_sens::model::parse_model;
use ctmc_sens::oracle::{mm_infty_coupled_moments, mm_infty_mean};
use ctmc_sens::sim::{simulate_crn_pair, simulate_crp_pair, simulate_gillespie, simulate_nrm, SimOptions};
use ctmc_sens::streams::{ArrivalTape, ClockStream, SeedPlan, UniformTape};

const R: u64 = 10_000;

fn nrm_terminals(text: &str, species: usize, horizon: f64, seed: u64) -> Vec<f64> {
    let net = parse_model(text).unwrap();
    let plan = SeedPlan::new(seed);
    let m = net.num_reactions() as u64;
    (0..R)
        .map(|i| {
            let mut clocks: Vec<ClockStream> = (0..m).map(|k| ClockStream::new(plan.derive(i, k, 0))).collect();
            let rec = simulate_nrm(&net, net.params.values(), &net.init, horizon, &mut clocks, &SimOptions::default()).unwrap();
            rec.terminal[species] as f64
        })
        .collect()
}

fn gillespie_terminals(text: &str, species: usize, horizon: f64, seed: u64) -> Vec<f64> {
    let net = parse_model(text).unwrap();
    let plan = SeedPlan::new(seed);
    (0..R)
        .map(|i| {
            let mut holding = ArrivalTape::new(plan.derive(i, 0, 0));
            let mut xi = UniformTape::new(plan.derive(i, 0, 1));
            let rec = simulate_gillespie(&net, net.params.values(), &net.init, horizon, &mut holding, &mut xi, &SimOptions::default()).unwrap();
            rec.terminal[species] as f64
        })
        .collect()
}

fn assert_mean(xs: &[f64], expected: f64) {
    let s = stats(xs.iter().copied());
    assert!(
        (s.mean() - expected).abs() < 4.0 * s.std_error(),
        "mean {} vs {expected} (se {})",
        s.mean(),
        s.std_error()
    );
}

#[test]
fn nrm_pure_birth_mean() {
    let xs = nrm_terminals("network b\nspecies: S\nparams: theta = 2\nreaction: -> S ; rate = theta\n", 0, 30.0, 1);
    assert_mean(&xs, 60.0);
}

#[test]
fn nrm_birth_death_mean() {
    let xs = nrm_terminals(MMQ, 0, 30.0, 2);
    assert_mean(&xs, mm_infty_mean(2.0, 0.1, 30.0));
}

#[test]
fn gillespie_gene_protein_mean() {
    let xs = gillespie_terminals(GENE, 1, 30.0, 3);
    assert_mean(&xs, 79.941);
}

#[test]
fn gillespie_and_nrm_agree_for_single_channel() {
    let text = "network d\nspecies: X\nparams: k = 0.3\ninit: X = 20\nreaction: X -> ; rate = k*X\n";
    let mut a = nrm_terminals(text, 0, 3.0, 4);
    let mut b = gillespie_terminals(text, 0, 3.0, 5);
    let d = ks_two_sample(&mut a, &mut b);
    assert!(d < ks_two_sample_critical(a.len(), b.len()), "KS {d}");
}

#[test]
fn cfd_birth_death_difference_moments() {
    let net = parse_model(MMQ).unwrap();
    let plan = SeedPlan::new(6);
    let pu = net.params.with_value("theta", 2.01).unwrap();
    let pl = net.params.with_value("theta", 2.0).unwrap();
    let diffs: Vec<f64> = (0..R)
        .map(|i| {
            let pair = simulate_pair(Method::Cfd, &net, pu.values(), pl.values(), &[0], 30.0, &plan, i, &SimOptions::default()).unwrap();
            (pair.upper.terminal[0] - pair.lower.terminal[0]) as f64
        })
        .collect();
    let (mean, var) = mm_infty_coupled_moments(2.0, 0.01, 0.1, 30.0);
    assert_mean(&diffs, mean);
    let s = stats(diffs.iter().copied());
    assert!((s.variance() - var).abs() < 4.0 * variance_se(&diffs), "variance {}", s.variance());
}

#[test]
fn crp_constant_rate_difference() {
    let net = parse_model("network c\nspecies: S\nparams: theta = 13\nreaction: -> S ; rate = theta\n").unwrap();
    let plan = SeedPlan::new(7);
    let pu = net.params.with_value("theta", 13.1).unwrap();
    let diffs: Vec<f64> = (0..R)
        .map(|i| {
            let mut tapes = vec![ArrivalTape::new(plan.derive(i, 0, 0))];
            let pair = simulate_crp_pair(&net, pu.values(), net.params.values(), &[0], None, 10.0, &mut tapes, &SimOptions::default()).unwrap();
            let d = pair.upper.terminal[0] - pair.lower.terminal[0];
            assert!(d >= 0);
            d as f64
        })
        .collect();
    assert_mean(&diffs, 1.0);
}

#[test]
fn crn_and_crp_agree_for_single_channel() {
    let net = parse_model("network d\nspecies: X\nparams: k = 0.3\ninit: X = 20\nreaction: X -> ; rate = k*X\n").unwrap();
    let pu = net.params.with_value("k", 0.33).unwrap();
    let opts = SimOptions::default();
    let plan = SeedPlan::new(8);
    let mut crp: Vec<f64> = (0..R)
        .map(|i| {
            let mut tapes = vec![ArrivalTape::new(plan.derive(i, 0, 0))];
            let p = simulate_crp_pair(&net, pu.values(), net.params.values(), &net.init, None, 3.0, &mut tapes, &opts).unwrap();
            (p.upper.terminal[0] - p.lower.terminal[0]) as f64
        })
        .collect();
    let plan = SeedPlan::new(9);
    let mut crn: Vec<f64> = (0..R)
        .map(|i| {
            let mut holding = ArrivalTape::new(plan.derive(i, 0, 0));
            let mut xi = UniformTape::new(plan.derive(i, 0, 1));
            let p = simulate_crn_pair(&net, pu.values(), net.params.values(), &net.init, None, 3.0, &mut holding, &mut xi, &opts).unwrap();
            (p.upper.terminal[0] - p.lower.terminal[0]) as f64
        })
        .collect();
    let d = ks_two_sample(&mut crp, &mut crn);
    assert!(d < ks_two_sample_critical(crp.len(), crn.len()), "KS {d}");
}

/// Each component of each law-preserving coupling has the marginal law of
/// an independent path at its own parameter value.
#[test]
fn couplings_preserve_marginals_birth_death() {
    let net = parse_model(MMQ).unwrap();
    let pu = net.params.with_value("theta", 2.5).unwrap();
    let pl = net.params.with_value("theta", 2.0).unwrap();
    let reference_u = stats((0..R).map(|i| {
        let p = simulate_pair(Method::Cmc, &net, pu.values(), pl.values(), &[0], 30.0, &SeedPlan::new(10), i, &SimOptions::default()).unwrap();
        p.upper.terminal[0] as f64
    }));
    let reference_l = stats((0..R).map(|i| {
        let p = simulate_pair(Method::Cmc, &net, pu.values(), pl.values(), &[0], 30.0, &SeedPlan::new(10), i, &SimOptions::default()).unwrap();
        p.lower.terminal[0] as f64
    }));
    for method in [Method::Cfd, Method::Crp, Method::Crn] {
        let plan = SeedPlan::new(11);
        let pairs: Vec<(f64, f64)> = (0..R)
            .map(|i| {
                let p = simulate_pair(method, &net, pu.values(), pl.values(), &[0], 30.0, &plan, i, &SimOptions::default()).unwrap();
                (p.upper.terminal[0] as f64, p.lower.terminal[0] as f64)
            })
            .collect();
        let (u, l): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        for (xs, reference) in [(u, reference_u), (l, reference_l)] {
            let s = stats(xs.iter().copied());
            let se = (s.std_error().powi(2) + reference.std_error().powi(2)).sqrt();
            assert!((s.mean() - reference.mean()).abs() < 4.0 * se, "{method}: mean {} vs {}", s.mean(), reference.mean());
            let var_se = variance_se(&xs) * std::f64::consts::SQRT_2;
            assert!(
                (s.variance() - reference.variance()).abs() < 4.0 * var_se,
                "{method}: variance {} vs {}",
                s.variance(),
                reference.variance()
            );
        }
    }
}

/// Raw-difference variance scales like ε for the split coupling and is
/// insensitive to ε for independent pairs.
#[test]
fn difference_variance_scaling_on_gene() {
    let net = parse_model(GENE).unwrap();
    let raw_var = |method: Method, eps: f64, paths: u64, seed: u64| -> f64 {
        let pu = net.params.with_value("theta", 0.25 + eps).unwrap();
        let plan = SeedPlan::new(seed);
        stats((0..paths).map(|i| {
            let p = simulate_pair(method, &net, pu.values(), net.params.values(), &[0, 0], 30.0, &plan, i, &SimOptions::default()).unwrap();
            (p.upper.terminal[1] - p.lower.terminal[1]) as f64
        }))
        .variance()
    };
    let cfd = raw_var(Method::Cfd, 0.1, 3000, 12) / raw_var(Method::Cfd, 0.02, 3000, 13);
    assert!((3.0..=8.0).contains(&cfd), "CFD ratio {cfd}");
    let cmc = raw_var(Method::Cmc, 0.1, 3000, 14) / raw_var(Method::Cmc, 0.02, 3000, 15);
    assert!((0.8..=1.25).contains(&cmc), "independent ratio {cmc}");
}
