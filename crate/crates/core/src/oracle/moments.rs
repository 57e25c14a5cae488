use crate::model::{ParamSet, ReactionNetwork};
use crate::streams::UniformSource;

use super::OracleError;

/// Parameter step for central differences of the moment equations.
pub const ORACLE_DELTA: f64 = 1e-6;
/// Integration step used by [`mean_sensitivity_ode`].
pub const ORACLE_STEP: f64 = 1e-3;

const PROBE_STATES: usize = 50;
const PROBE_MAX_COUNT: u64 = 40;
const PROBE_SEED: u64 = 0x5eed_affe;
const PROBE_REL_TOL: f64 = 1e-9;

/// Drift written as `F(x) = A x + b`.
///
/// Built by evaluating `F` at the origin and the unit vectors, then checked
/// at random nonnegative states; `affine` is false when any check fails.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMomentSystem {
    /// Row-major `n × n`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub affine: bool,
    /// Largest probe deviation `|F(x) − (Ax + b)|`, and where it occurred.
    pub max_residual: f64,
    pub worst_state: Vec<i64>,
}

impl AffineMomentSystem {
    pub fn probe(net: &ReactionNetwork, params: &[f64]) -> Result<Self, OracleError> {
        let n = net.num_species();
        let b = net.drift(&vec![0; n], params)?;
        let mut a = vec![0.0; n * n];
        let mut unit = vec![0i64; n];
        for j in 0..n {
            unit[j] = 1;
            let f = net.drift(&unit, params)?;
            unit[j] = 0;
            for i in 0..n {
                a[i * n + j] = f[i] - b[i];
            }
        }
        let mut sys = AffineMomentSystem {
            a,
            b,
            affine: true,
            max_residual: 0.0,
            worst_state: vec![0; n],
        };
        let mut rng = UniformSource::new(PROBE_SEED);
        let mut x = vec![0i64; n];
        let mut xf = vec![0.0; n];
        let mut fit = vec![0.0; n];
        for _ in 0..PROBE_STATES {
            for (xi, xfi) in x.iter_mut().zip(xf.iter_mut()) {
                *xi = ((rng.next_uniform() * (PROBE_MAX_COUNT + 1) as f64).ceil() as i64 - 1).max(0);
                *xfi = *xi as f64;
            }
            let f = net.drift(&x, params)?;
            sys.rhs(&xf, &mut fit);
            for (fi, gi) in f.iter().zip(&fit) {
                let r = (fi - gi).abs();
                if r > PROBE_REL_TOL * (1.0 + fi.abs()) && r > sys.max_residual {
                    sys.affine = false;
                    sys.max_residual = r;
                    sys.worst_state = x.clone();
                }
            }
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `out = A m + b`.
    #[inline]
    pub fn rhs(&self, m: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            out[i] = self.b[i] + row.iter().zip(m).map(|(a, x)| a * x).sum::<f64>();
        }
    }

    fn require_affine(self) -> Result<Self, OracleError> {
        if self.affine {
            Ok(self)
        } else {
            Err(OracleError::NonAffine {
                residual: self.max_residual,
                state: self.worst_state,
            })
        }
    }

    /// Classical fourth-order Runge–Kutta for `m' = A m + b` from `m0`, with
    /// the largest step not exceeding `step` that divides `horizon` evenly.
    pub fn integrate(&self, m0: &[f64], horizon: f64, step: f64) -> Vec<f64> {
        let n = self.dim();
        let steps = (horizon / step).ceil().max(1.0) as usize;
        let h = horizon / steps as f64;
        let mut m = m0.to_vec();
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        if horizon == 0.0 {
            return m;
        }
        for _ in 0..steps {
            self.rhs(&m, &mut k1);
            for i in 0..n {
                tmp[i] = m[i] + 0.5 * h * k1[i];
            }
            self.rhs(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = m[i] + 0.5 * h * k2[i];
            }
            self.rhs(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = m[i] + h * k3[i];
            }
            self.rhs(&tmp, &mut k4);
            for i in 0..n {
                m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        m
    }
}

fn check_inputs(net: &ReactionNetwork, x0: &[i64], horizon: f64, step: f64) -> Result<(), OracleError> {
    if x0.len() != net.num_species() {
        return Err(OracleError::InitialState {
            got: x0.len(),
            expected: net.num_species(),
        });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(OracleError::Horizon(horizon));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(OracleError::Step(step));
    }
    Ok(())
}

/// `E X(T)` for an affine network, by integrating the first-moment
/// equations with fourth-order Runge–Kutta.
pub fn mean_ode(net: &ReactionNetwork, params: &[f64], x0: &[i64], horizon: f64, step: f64) -> Result<Vec<f64>, OracleError> {
    check_inputs(net, x0, horizon, step)?;
    let sys = AffineMomentSystem::probe(net, params)?.require_affine()?;
    let m0: Vec<f64> = x0.iter().map(|&v| v as f64).collect();
    Ok(sys.integrate(&m0, horizon, step))
}

/// `d/dθ E X(T)` by a central difference of [`mean_ode`] with
/// `δ = ORACLE_DELTA` and step `ORACLE_STEP`.
pub fn mean_sensitivity_ode(
    net: &ReactionNetwork,
    params: &ParamSet,
    param: &str,
    x0: &[i64],
    horizon: f64,
) -> Result<Vec<f64>, OracleError> {
    let up = params.perturb(param, ORACLE_DELTA)?;
    let down = params.perturb(param, -ORACLE_DELTA)?;
    let mu = mean_ode(net, up.values(), x0, horizon, ORACLE_STEP)?;
    let ml = mean_ode(net, down.values(), x0, horizon, ORACLE_STEP)?;
    Ok(mu.iter().zip(&ml).map(|(a, b)| (a - b) / (2.0 * ORACLE_DELTA)).collect())
}
