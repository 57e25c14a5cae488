//! Exact path generators for reaction networks.
//!
//! Single paths come from the next reaction method ([`simulate_nrm`]) or
//! the Gillespie direct method ([`simulate_gillespie`]). Coupled pairs
//! `(X^a, X^b)` for two parameter sets come in four flavours, see
//! [`CouplingKind`]. Every generator is a pure function of its inputs and
//! the streams it is handed, so identical seeds give identical records.

mod coupled;
mod engine;
mod gillespie;
mod nrm;
mod toy;

use serde::Serialize;
use thiserror::Error;

use crate::model::PropensityError;
use crate::streams::StreamError;

pub use coupled::{simulate_cfd_pair, simulate_crn_pair, simulate_crp_pair, simulate_naive_pair, split_rates};
pub use engine::{NoObserver, PathObserver};
pub use gillespie::simulate_gillespie;
pub use nrm::{simulate_nrm, simulate_nrm_observed, simulate_nrm_on_tapes};
pub use toy::{toy_poisson_coupling, ToyCoupling};

/// Default per-path cap on reaction firings.
pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Propensity(#[from] PropensityError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("event cap of {cap} firings exceeded at t = {time}")]
    EventCap { cap: u64, time: f64 },
    #[error("reaction {reaction} drove species {species} negative at t = {time}")]
    NegativeState { reaction: usize, species: usize, time: f64 },
    #[error("invalid horizon {0}")]
    InvalidHorizon(f64),
    #[error("observation grid must be nondecreasing within [0, T]")]
    InvalidGrid,
    #[error("initial state has length {got}, expected {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("expected {expected} streams, got {got}")]
    StreamCount { got: usize, expected: usize },
}

/// Which `(X^a, X^b)` construction produced a [`CoupledPath`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CouplingKind {
    /// Shared min-rate stream plus two independent residual streams per
    /// channel (coupled finite differences).
    Cfd,
    /// Both paths read the same unit-rate process per channel at their own
    /// integrated intensities (common reaction path).
    Crp,
    /// Gillespie direct method with shared holding-time process and shared
    /// selection uniforms (common random numbers).
    Crn,
    /// CFD with one shared residual process per channel. Does not preserve
    /// the marginal laws; kept only as a cautionary comparison.
    Naive,
    /// Two independent next-reaction paths.
    Independent,
}

/// How much of the trajectory to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    #[default]
    Off,
    /// Keep the initial point and the state after every `n`-th jump.
    EveryNth(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Observation times; the state at each is stored in
    /// [`PathRecord::snapshots`]. Must be nondecreasing and inside `[0, T]`.
    pub grid: Vec<f64>,
    pub trace: TraceMode,
    pub event_cap: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            grid: Vec::new(),
            trace: TraceMode::Off,
            event_cap: DEFAULT_EVENT_CAP,
        }
    }
}

impl SimOptions {
    pub fn with_grid(grid: Vec<f64>) -> Self {
        SimOptions {
            grid,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub time: f64,
    pub state: Vec<i64>,
}

/// One simulated trajectory on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub initial: Vec<i64>,
    pub terminal: Vec<i64>,
    pub horizon: f64,
    /// Reaction firings of this path.
    pub n_updates: u64,
    pub firings: Vec<u64>,
    /// State at each [`SimOptions::grid`] time (right-continuous).
    pub snapshots: Vec<Vec<i64>>,
    pub trace: Option<Vec<TracePoint>>,
}

impl PathRecord {
    /// `initial + Σ_k firings_k ζ_k`; equals `terminal` for every valid record.
    pub fn reconstruct_terminal(&self, zetas: &[Vec<i64>]) -> Vec<i64> {
        let mut x = self.initial.clone();
        for (count, zeta) in self.firings.iter().zip(zetas) {
            for (xi, z) in x.iter_mut().zip(zeta) {
                *xi += *count as i64 * z;
            }
        }
        x
    }
}

/// Two trajectories on one time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPath {
    pub kind: CouplingKind,
    /// Path at the first parameter set (θ + ε, or θ + ε/2 when centered).
    pub upper: PathRecord,
    /// Path at the second parameter set.
    pub lower: PathRecord,
    /// Per channel, firings of the shared, upper-only and lower-only
    /// streams. Only filled for split couplings (CFD, naive).
    pub split_firings: Vec<[u64; 3]>,
    /// Work: events of the joint chain for split couplings, otherwise the
    /// sum of both paths' firings.
    pub n_updates: u64,
}

pub(crate) fn validate_inputs(
    num_species: usize,
    x0: &[i64],
    horizon: f64,
    opts: &SimOptions,
) -> Result<(), SimError> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(SimError::InvalidHorizon(horizon));
    }
    if x0.len() != num_species {
        return Err(SimError::StateLength {
            got: x0.len(),
            expected: num_species,
        });
    }
    let in_range = opts.grid.iter().all(|&g| (0.0..=horizon).contains(&g));
    let sorted = opts.grid.windows(2).all(|w| w[0] <= w[1]);
    if !in_range || !sorted {
        return Err(SimError::InvalidGrid);
    }
    Ok(())
}
