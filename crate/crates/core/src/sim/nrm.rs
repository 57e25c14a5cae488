use crate::model::ReactionNetwork;
use crate::streams::{ArrivalTape, ClockStream};

use super::engine::{run_single, NoObserver, PathObserver, TapeBank};
use super::{PathRecord, SimError, SimOptions};

fn check_streams(expected: usize, got: usize) -> Result<(), SimError> {
    if expected != got {
        return Err(SimError::StreamCount { got, expected });
    }
    Ok(())
}

/// Next reaction method with one private clock per channel.
pub fn simulate_nrm(
    net: &ReactionNetwork,
    params: &[f64],
    x0: &[i64],
    horizon: f64,
    clocks: &mut [ClockStream],
    opts: &SimOptions,
) -> Result<PathRecord, SimError> {
    simulate_nrm_observed(net, params, x0, horizon, clocks, opts, &mut NoObserver)
}

/// [`simulate_nrm`] with an observer attached.
pub fn simulate_nrm_observed<O: PathObserver>(
    net: &ReactionNetwork,
    params: &[f64],
    x0: &[i64],
    horizon: f64,
    clocks: &mut [ClockStream],
    opts: &SimOptions,
    obs: &mut O,
) -> Result<PathRecord, SimError> {
    check_streams(net.num_reactions(), clocks.len())?;
    run_single(net, params, x0, horizon, clocks, opts, obs)
}

/// Next reaction method reading channel `k`'s jumps from `tapes[k]`.
///
/// The tapes are only read, never consumed, so a second call with the same
/// tapes and different parameters yields the common-reaction-path partner.
pub fn simulate_nrm_on_tapes(
    net: &ReactionNetwork,
    params: &[f64],
    x0: &[i64],
    horizon: f64,
    tapes: &mut [ArrivalTape],
    opts: &SimOptions,
) -> Result<PathRecord, SimError> {
    check_streams(net.num_reactions(), tapes.len())?;
    let mut bank = TapeBank::new(tapes);
    run_single(net, params, x0, horizon, &mut bank, opts, &mut NoObserver)
}
