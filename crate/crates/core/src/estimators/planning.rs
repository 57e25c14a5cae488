use super::EstimateReport;

/// Default constant `c` in [`suggest_epsilon`].
pub const DEFAULT_EPSILON_CONSTANT: f64 = 1.0;

/// Number of paths needed to bring the estimator variance down to
/// `target_variance`, given a pilot run: `ceil(Var(d) / V*)`, at least one.
///
/// A non-finite pilot variance (e.g. a single-path pilot) yields `None`.
pub fn plan_paths(target_variance: f64, pilot: &EstimateReport) -> Option<usize> {
    let var = pilot.sample_variance;
    if !var.is_finite() || !(target_variance > 0.0) {
        return None;
    }
    Some(((var / target_variance).ceil() as usize).max(1))
}

/// Perturbation size balancing squared bias against variance of the
/// centered estimator: `c · R^{-1/5}` for coupled methods, `c · R^{-1/6}`
/// for independent sampling.
pub fn suggest_epsilon(paths: usize, coupled: bool, c: f64) -> f64 {
    let r = paths.max(1) as f64;
    let exponent = if coupled { -1.0 / 5.0 } else { -1.0 / 6.0 };
    c * r.powf(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pilot(var: f64) -> EstimateReport {
        EstimateReport {
            method: "cfd".into(),
            param: "theta".into(),
            theta: 1.0,
            epsilon: 0.1,
            mode: "centered".into(),
            horizon: 1.0,
            paths: 100,
            seed: 0,
            estimate: 0.0,
            sample_variance: var,
            ci95: 0.0,
            n_updates: 0,
            elapsed_s: 0.0,
            warning: None,
        }
    }

    #[test]
    fn planned_paths() {
        assert_eq!(plan_paths(0.01, &pilot(40.0)), Some(4000));
        assert_eq!(plan_paths(0.01, &pilot(0.0)), Some(1));
        assert_eq!(plan_paths(0.01, &pilot(f64::NAN)), None);
        assert_eq!(plan_paths(0.0, &pilot(1.0)), None);
    }

    #[test]
    fn suggested_epsilon() {
        assert!((suggest_epsilon(100_000, true, 1.0) - 0.1).abs() < 1e-12);
        assert!((suggest_epsilon(1_000_000, false, 1.0) - 0.1).abs() < 1e-12);
        assert_eq!(suggest_epsilon(1, true, 1.0), 1.0);
        assert_eq!(suggest_epsilon(1, false, 1.0), 1.0);
        assert!((suggest_epsilon(100_000, true, 3.0) - 0.3).abs() < 1e-12);
    }
}
