mod common;

use ctmc_sens::estimators::{
    estimate_fd, estimate_girsanov, variance_trace, FdConfig, GirsanovConfig, Method, Observable, TraceConfig,
    TraceMethod,
};
use ctmc_sens::model::{parse_model, ReactionNetwork};
use ctmc_sens::oracle::{mm_infty_mean_sensitivity, naive_pure_death_scaled_difference};
use ctmc_sens::presets::preset;

fn mmq() -> (ReactionNetwork, Observable) {
    let net = parse_model(common::MMQ).unwrap();
    let obs = Observable::parse(&net, "M").unwrap();
    (net, obs)
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let (net, obs) = mmq();
    for method in Method::ALL {
        let run = |workers| {
            let cfg = FdConfig::new(method, "theta", 2.0, 0.1, 15.0, 257, 99).workers(workers);
            estimate_fd(&net, &obs, &cfg).unwrap()
        };
        let one = run(1);
        for w in [2, 8] {
            assert!(one.identical(&run(w)), "{method} differs with {w} workers");
        }
    }
    let run = |workers| {
        let mut cfg = GirsanovConfig::new("theta", 2.0, 15.0, 257, 99);
        cfg.workers = workers;
        estimate_girsanov(&net, &obs, &cfg).unwrap()
    };
    let one = run(1);
    assert!(one.identical(&run(2)) && one.identical(&run(8)));
}

#[test]
fn single_path_has_undefined_variance() {
    let (net, obs) = mmq();
    let r = estimate_fd(&net, &obs, &FdConfig::new(Method::Cfd, "theta", 2.0, 0.1, 5.0, 1, 3)).unwrap();
    assert!(r.sample_variance.is_nan() && r.ci95.is_nan());
    assert!(r.estimate.is_finite());
}

#[test]
fn unbiased_couplings_agree_with_closed_form() {
    // E M(T) is linear in theta, so every centered difference equals the derivative.
    let (net, obs) = mmq();
    let exact = mm_infty_mean_sensitivity(0.1, 30.0);
    for method in [Method::Cmc, Method::Cfd, Method::Crp, Method::Crn] {
        let cfg = FdConfig::new(method, "theta", 2.0, 0.5, 30.0, 4000, 11);
        let r = estimate_fd(&net, &obs, &cfg).unwrap();
        let z = (r.estimate - exact) / r.std_error();
        assert!(z.abs() < 4.0, "{method}: {} ± {} vs {exact}", r.estimate, r.std_error());
    }
}

#[test]
fn naive_coupling_is_biased() {
    let p = preset("puredeath").unwrap();
    let net = p.network();
    let obs = Observable::parse(&net, "X").unwrap();
    let cfg = FdConfig::new(Method::Naive, "theta", 1.0, 0.05, 1.0, 20_000, 5);
    let r = estimate_fd(&net, &obs, &cfg).unwrap();
    let truth = -(-1.0f64).exp();
    assert!((r.estimate - truth).abs() > 10.0 * r.std_error(), "{} ± {}", r.estimate, r.std_error());
    let limit = naive_pure_death_scaled_difference(0.05);
    assert!((r.estimate - limit).abs() < 4.0 * r.std_error());
    assert!(r.warning.is_some());
}

#[test]
fn coupled_variances_are_below_independent_sampling() {
    let (net, obs) = mmq();
    let var = |method| {
        let cfg = FdConfig::new(method, "theta", 2.0, 0.1, 30.0, 2000, 21);
        estimate_fd(&net, &obs, &cfg).unwrap().sample_variance
    };
    let (cmc, cfd, crp, crn) = (var(Method::Cmc), var(Method::Cfd), var(Method::Crp), var(Method::Crn));
    assert!(cfd < crp, "cfd {cfd} crp {crp}");
    assert!(crp < cmc && crn < cmc, "crp {crp} crn {crn} cmc {cmc}");
    // the CFD difference at t = 30 is Poisson with mean (1 − e^{−3}) ε / γ
    let expected = (1.0 - (-3.0f64).exp()) / 0.1 / 0.1;
    assert!((cfd / expected - 1.0).abs() < 0.15, "{cfd} vs {expected}");
}

#[test]
fn likelihood_ratio_variance_grows_with_time() {
    let (net, obs) = mmq();
    let cfg = TraceConfig::new(TraceMethod::Girsanov, "theta", 2.0, 0.0, vec![10.0, 20.0, 40.0], 4000, 8);
    let tr = variance_trace(&net, &obs, &cfg).unwrap();
    let v = &tr.var_d;
    assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    let ratio = v[2] / v[1];
    assert!((1.4..=2.8).contains(&ratio), "{ratio}");
}

#[test]
fn coupled_pairs_do_less_work_than_independent_pairs() {
    let p = preset("gene").unwrap();
    let net = p.network();
    let obs = Observable::parse(&net, p.observable).unwrap();
    let work = |method| {
        let cfg = FdConfig::new(method, "theta", 0.25, 0.05, 30.0, 200, 4);
        estimate_fd(&net, &obs, &cfg).unwrap().n_updates as f64
    };
    let (cfd, cmc) = (work(Method::Cfd), work(Method::Cmc));
    assert!(cfd < 0.7 * cmc, "cfd {cfd} cmc {cmc}");
    // per path, an independent pair fires roughly twice the ~4,200 reactions of one path
    let per_path = cmc / 200.0;
    assert!((7_000.0..10_000.0).contains(&per_path), "{per_path}");
}
