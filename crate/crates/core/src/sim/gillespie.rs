use crate::model::ReactionNetwork;
use crate::streams::{ArrivalTape, TapeCursor, UniformTape};

use super::engine::{apply_jump, Recorder};
use super::{PathRecord, SimError, SimOptions};

/// Picks the channel whose interval `(q_{k−1}, q_k]` contains `xi`, where
/// `q_k = Σ_{i≤k} λ_i / λ_0` and `q_M` is taken as exactly 1. Zero-rate
/// channels have empty intervals and are never selected.
fn select_channel(rates: &[f64], total: f64, xi: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (k, &r) in rates.iter().enumerate() {
        if r > 0.0 {
            cum += r;
            last_positive = k;
            if xi <= cum / total {
                return k;
            }
        }
    }
    last_positive
}

/// Gillespie direct method in random-time-change form.
///
/// Jump times come from the unit-rate process on `holding` run at the
/// total rate `λ_0(X)`; the `n`-th jump of this path uses `xi.get(n)` to
/// pick the channel. Both tapes are memoized, so calling this twice with
/// the same tapes and different parameters gives the common-random-numbers
/// partner path. With `λ_0 = 0` the path is absorbed and stays put until
/// the horizon.
pub fn simulate_gillespie(
    net: &ReactionNetwork,
    params: &[f64],
    x0: &[i64],
    horizon: f64,
    holding: &mut ArrivalTape,
    xi: &mut UniformTape,
    opts: &SimOptions,
) -> Result<PathRecord, SimError> {
    super::validate_inputs(net.num_species(), x0, horizon, opts)?;
    let m = net.num_reactions();
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut rates = vec![0.0; m];
    let mut firings = vec![0u64; m];
    let mut cursor = TapeCursor::new();
    let mut jumps = 0usize;
    let mut rec = Recorder::new(opts, x0);

    loop {
        net.propensities(&x, params, &mut rates)?;
        let total: f64 = rates.iter().sum();
        let delta = if total > 0.0 {
            cursor.residual(holding) / total
        } else {
            f64::INFINITY
        };
        let t_next = t + delta;
        if t_next > horizon {
            rec.pass(horizon, true, &x);
            break;
        }
        rec.pass(t_next, false, &x);
        cursor.fire(holding);
        let k = select_channel(&rates, total, xi.get(jumps));
        apply_jump(&mut x, &net.reactions[k].zeta, k, t_next)?;
        firings[k] += 1;
        jumps += 1;
        if jumps as u64 > opts.event_cap {
            return Err(SimError::EventCap {
                cap: opts.event_cap,
                time: t_next,
            });
        }
        t = t_next;
        rec.jumped(t, &x);
    }

    let (snapshots, trace) = rec.finish();
    Ok(PathRecord {
        initial: x0.to_vec(),
        terminal: x,
        horizon,
        n_updates: jumps as u64,
        firings,
        snapshots,
        trace,
    })
}
