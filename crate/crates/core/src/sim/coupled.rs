use crate::model::ReactionNetwork;
use crate::streams::{ArrivalTape, ClockStream, StreamError, TapeCursor, UniformTape};

use super::engine::{run_split_pair, ClockBank, SplitRun};
use super::{gillespie::simulate_gillespie, nrm::simulate_nrm_on_tapes};
use super::{CoupledPath, CouplingKind, SimError, SimOptions};

/// Splits two channel rates into `[shared, upper-only, lower-only]`:
/// `a1 = min(a, b)`, `a2 = a − a1`, `a3 = b − a1`. At least one of the
/// residuals is exactly zero.
#[inline]
pub fn split_rates(upper: f64, lower: f64) -> [f64; 3] {
    if upper <= lower {
        [upper, 0.0, lower - upper]
    } else {
        [lower, upper - lower, 0.0]
    }
}

fn wrap(kind: CouplingKind, run: SplitRun) -> CoupledPath {
    CoupledPath {
        kind,
        upper: run.upper,
        lower: run.lower,
        split_firings: run.split_firings,
        n_updates: run.events,
    }
}

fn check_count(expected: usize, got: usize) -> Result<(), SimError> {
    if expected != got {
        return Err(SimError::StreamCount { got, expected });
    }
    Ok(())
}

/// Coupled finite-difference pair: per channel one shared clock at the
/// minimum of the two rates and one private clock for each residual.
///
/// `clocks[3k + i]` drives sub-channel `i` of channel `k`. `x0_lower`
/// defaults to `x0` when `None`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_cfd_pair(
    net: &ReactionNetwork,
    params_upper: &[f64],
    params_lower: &[f64],
    x0: &[i64],
    x0_lower: Option<&[i64]>,
    horizon: f64,
    clocks: &mut [ClockStream],
    opts: &SimOptions,
) -> Result<CoupledPath, SimError> {
    check_count(3 * net.num_reactions(), clocks.len())?;
    let run = run_split_pair(
        net,
        params_upper,
        params_lower,
        x0,
        x0_lower.unwrap_or(x0),
        horizon,
        clocks,
        opts,
    )?;
    Ok(wrap(CouplingKind::Cfd, run))
}

/// Shared private clocks for the min-rate streams, and one tape per channel
/// read by both residual streams at their own internal times.
struct NaiveBank<'a> {
    shared: &'a mut [ClockStream],
    aux: &'a mut [ArrivalTape],
    upper: Vec<TapeCursor>,
    lower: Vec<TapeCursor>,
}

impl ClockBank for NaiveBank<'_> {
    #[inline]
    fn residual(&mut self, j: usize) -> f64 {
        let k = j / 3;
        match j % 3 {
            0 => self.shared[k].residual(),
            1 => self.upper[k].residual(&mut self.aux[k]),
            _ => self.lower[k].residual(&mut self.aux[k]),
        }
    }

    #[inline]
    fn advance(&mut self, j: usize, du: f64) -> Result<(), StreamError> {
        let k = j / 3;
        match j % 3 {
            0 => self.shared[k].advance_internal(du),
            1 => self.upper[k].advance_internal(&mut self.aux[k], du),
            _ => self.lower[k].advance_internal(&mut self.aux[k], du),
        }
    }

    #[inline]
    fn fire(&mut self, j: usize) {
        let k = j / 3;
        match j % 3 {
            0 => self.shared[k].fire(),
            1 => self.upper[k].fire(&mut self.aux[k]),
            _ => self.lower[k].fire(&mut self.aux[k]),
        }
    }
}

/// The naive split coupling: like CFD, but both residual terms of channel
/// `k` read the same unit-rate process `aux[k]`.
///
/// The marginals of this pair are **not** the target laws and the resulting
/// difference estimator converges to the wrong limit. It exists to
/// demonstrate that failure.
#[allow(clippy::too_many_arguments)]
pub fn simulate_naive_pair(
    net: &ReactionNetwork,
    params_upper: &[f64],
    params_lower: &[f64],
    x0: &[i64],
    x0_lower: Option<&[i64]>,
    horizon: f64,
    shared: &mut [ClockStream],
    aux: &mut [ArrivalTape],
    opts: &SimOptions,
) -> Result<CoupledPath, SimError> {
    let m = net.num_reactions();
    check_count(m, shared.len())?;
    check_count(m, aux.len())?;
    let mut bank = NaiveBank {
        shared,
        aux,
        upper: vec![TapeCursor::new(); m],
        lower: vec![TapeCursor::new(); m],
    };
    let run = run_split_pair(
        net,
        params_upper,
        params_lower,
        x0,
        x0_lower.unwrap_or(x0),
        horizon,
        &mut bank,
        opts,
    )?;
    Ok(wrap(CouplingKind::Naive, run))
}

/// Common reaction path: both paths read channel `k`'s jumps from
/// `tapes[k]`, each at its own integrated intensity.
#[allow(clippy::too_many_arguments)]
pub fn simulate_crp_pair(
    net: &ReactionNetwork,
    params_upper: &[f64],
    params_lower: &[f64],
    x0: &[i64],
    x0_lower: Option<&[i64]>,
    horizon: f64,
    tapes: &mut [ArrivalTape],
    opts: &SimOptions,
) -> Result<CoupledPath, SimError> {
    let upper = simulate_nrm_on_tapes(net, params_upper, x0, horizon, tapes, opts)?;
    let lower = simulate_nrm_on_tapes(net, params_lower, x0_lower.unwrap_or(x0), horizon, tapes, opts)?;
    Ok(CoupledPath {
        kind: CouplingKind::Crp,
        n_updates: upper.n_updates + lower.n_updates,
        upper,
        lower,
        split_firings: Vec::new(),
    })
}

/// Gillespie with common random numbers: one shared holding-time process
/// and one shared selection sequence, each path indexing the sequence by
/// its own jump count.
#[allow(clippy::too_many_arguments)]
pub fn simulate_crn_pair(
    net: &ReactionNetwork,
    params_upper: &[f64],
    params_lower: &[f64],
    x0: &[i64],
    x0_lower: Option<&[i64]>,
    horizon: f64,
    holding: &mut ArrivalTape,
    xi: &mut UniformTape,
    opts: &SimOptions,
) -> Result<CoupledPath, SimError> {
    let upper = simulate_gillespie(net, params_upper, x0, horizon, holding, xi, opts)?;
    let lower = simulate_gillespie(net, params_lower, x0_lower.unwrap_or(x0), horizon, holding, xi, opts)?;
    Ok(CoupledPath {
        kind: CouplingKind::Crn,
        n_updates: upper.n_updates + lower.n_updates,
        upper,
        lower,
        split_firings: Vec::new(),
    })
}
