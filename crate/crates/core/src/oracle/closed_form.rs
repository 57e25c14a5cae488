/// Mean of the birth–death chain `∅ →θ M, M →γ ∅` started empty:
/// `(θ/γ)(1 − e^{−γt})`.
pub fn mm_infty_mean(theta: f64, gamma: f64, t: f64) -> f64 {
    theta / gamma * (1.0 - (-gamma * t).exp())
}

/// Derivative of [`mm_infty_mean`] in the birth rate.
pub fn mm_infty_mean_sensitivity(gamma: f64, t: f64) -> f64 {
    (1.0 - (-gamma * t).exp()) / gamma
}

/// Mean and variance of `Z = X^{θ+ε} − X^θ` under the split coupling of the
/// birth–death chain with birth-rate perturbation. `Z` is itself a
/// birth–death chain with birth rate `ε`, so both moments equal
/// `(ε/γ)(1 − e^{−γt})`; the result does not depend on `θ`.
pub fn mm_infty_coupled_moments(_theta: f64, epsilon: f64, gamma: f64, t: f64) -> (f64, f64) {
    let m = epsilon / gamma * (1.0 - (-gamma * t).exp());
    (m, m)
}

/// `E X(t)` for a single molecule decaying at rate `θ`: `e^{−θt}`.
pub fn pure_death_mean(theta: f64, t: f64) -> f64 {
    (-theta * t).exp()
}

/// `ε⁻¹ E[X^{1+ε/2}(1) − X^{1−ε/2}(1)]` for the single-molecule pure-death
/// chain under the naive shared-auxiliary coupling:
/// `−e^{−1} · 2/(2+ε) · (e^{ε/2} − e^{−ε/2})`, which vanishes as `ε → 0`
/// instead of tending to the true derivative `−e^{−1}`.
pub fn naive_pure_death_scaled_difference(epsilon: f64) -> f64 {
    -(-1.0f64).exp() * 2.0 / (2.0 + epsilon) * ((epsilon / 2.0).exp() - (-epsilon / 2.0).exp())
}
