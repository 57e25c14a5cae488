//! Reference values for validating the stochastic estimators.
//!
//! * [`mean_ode`] / [`mean_sensitivity_ode`]: first-moment equations, exact
//!   for networks whose drift is affine in the state.
//! * [`exact_expectation`]: transient expectations by uniformization of the
//!   generator restricted to a finite box (any propensity form).
//! * Closed forms for the birth–death and pure-death examples.

mod closed_form;
mod moments;
mod uniformization;

use thiserror::Error;

use crate::model::{PropensityError, UnknownParam};

pub use closed_form::{mm_infty_coupled_moments, mm_infty_mean, mm_infty_mean_sensitivity, naive_pure_death_scaled_difference, pure_death_mean};
pub use moments::{mean_ode, mean_sensitivity_ode, AffineMomentSystem, ORACLE_DELTA, ORACLE_STEP};
pub use uniformization::{exact_expectation, ExactExpectation, StateBox, TruncatedGenerator};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("network is not affine: drift deviates from its affine fit by {residual:e} at state {state:?}; use the exact (uniformization) oracle instead")]
    NonAffine { residual: f64, state: Vec<i64> },
    #[error(transparent)]
    Propensity(#[from] PropensityError),
    #[error(transparent)]
    UnknownParam(#[from] UnknownParam),
    #[error("step must be > 0, got {0}")]
    Step(f64),
    #[error("invalid horizon {0}")]
    Horizon(f64),
    #[error("initial state has length {got}, expected {expected}")]
    InitialState { got: usize, expected: usize },
    #[error("box must give a nonempty range [lo, hi] for each of the {expected} species")]
    BoxShape { expected: usize },
    #[error("box has {0} states, above the limit of {max}", max = uniformization::MAX_STATES)]
    BoxTooLarge(usize),
    #[error("initial state {0:?} lies outside the box")]
    OutsideBox(Vec<i64>),
    #[error("box too small: probability {leak:e} leaves the box, tolerance {tol:e}")]
    Leak { leak: f64, tol: f64 },
    #[error("tolerance must be in (0, 1), got {0}")]
    Tolerance(f64),
    #[error("observable is not finite at state {0:?}")]
    Observable(Vec<i64>),
}
