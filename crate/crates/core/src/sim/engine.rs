//! Next-reaction loops shared by the single-path and split-pair generators.
//!
//! Both loops are generic over a [`ClockBank`], the set of unit-rate Poisson
//! processes that drive the channels, so the same code runs with private
//! clocks or with shared memoized tapes.

use crate::model::ReactionNetwork;
use crate::streams::{ArrivalTape, ClockStream, StreamError, TapeCursor};

use super::{PathRecord, SimError, SimOptions, TraceMode, TracePoint};

/// Indexed collection of unit-rate Poisson processes.
pub(crate) trait ClockBank {
    fn residual(&mut self, j: usize) -> f64;
    fn advance(&mut self, j: usize, du: f64) -> Result<(), StreamError>;
    fn fire(&mut self, j: usize);
}

impl ClockBank for [ClockStream] {
    #[inline]
    fn residual(&mut self, j: usize) -> f64 {
        self[j].residual()
    }
    #[inline]
    fn advance(&mut self, j: usize, du: f64) -> Result<(), StreamError> {
        self[j].advance_internal(du)
    }
    #[inline]
    fn fire(&mut self, j: usize) {
        self[j].fire()
    }
}

/// Each channel reads its own tape through a private cursor.
pub(crate) struct TapeBank<'a> {
    pub tapes: &'a mut [ArrivalTape],
    pub cursors: Vec<TapeCursor>,
}

impl<'a> TapeBank<'a> {
    pub fn new(tapes: &'a mut [ArrivalTape]) -> Self {
        let cursors = vec![TapeCursor::new(); tapes.len()];
        TapeBank { tapes, cursors }
    }
}

impl ClockBank for TapeBank<'_> {
    #[inline]
    fn residual(&mut self, j: usize) -> f64 {
        self.cursors[j].residual(&mut self.tapes[j])
    }
    #[inline]
    fn advance(&mut self, j: usize, du: f64) -> Result<(), StreamError> {
        self.cursors[j].advance_internal(&mut self.tapes[j], du)
    }
    #[inline]
    fn fire(&mut self, j: usize) {
        self.cursors[j].fire(&mut self.tapes[j])
    }
}

/// Hooks into a single-path simulation; used by the likelihood-ratio
/// estimator to accumulate the score along the path.
pub trait PathObserver {
    /// The path sits in state `x` with propensities `rates` for `dt`.
    fn hold(&mut self, _x: &[i64], _rates: &[f64], _dt: f64) {}
    /// Channel `k` fires from state `x_before`.
    fn fire(&mut self, _k: usize, _x_before: &[i64], _rates: &[f64]) {}
    /// Observation time `index` of the grid has been reached.
    fn grid(&mut self, _index: usize, _x: &[i64]) {}
}

pub struct NoObserver;

impl PathObserver for NoObserver {}

/// Grid snapshots and thinned traces for one path.
pub(crate) struct Recorder<'a> {
    grid: &'a [f64],
    next_grid: usize,
    snapshots: Vec<Vec<i64>>,
    every: Option<usize>,
    trace: Vec<TracePoint>,
    jumps: u64,
}

impl<'a> Recorder<'a> {
    pub fn new(opts: &'a SimOptions, x0: &[i64]) -> Self {
        let every = match opts.trace {
            TraceMode::Off => None,
            TraceMode::EveryNth(n) => Some(n.max(1)),
        };
        let trace = if every.is_some() {
            vec![TracePoint {
                time: 0.0,
                state: x0.to_vec(),
            }]
        } else {
            Vec::new()
        };
        Recorder {
            grid: &opts.grid,
            next_grid: 0,
            snapshots: Vec::with_capacity(opts.grid.len()),
            every,
            trace,
            jumps: 0,
        }
    }

    /// Handles the holding interval `[from, to)` in state `x`, recording
    /// grid points strictly before `to` (or up to and including `to` when
    /// `inclusive`, used for the final segment ending at the horizon).
    #[inline]
    pub fn hold<O: PathObserver>(
        &mut self,
        from: f64,
        to: f64,
        inclusive: bool,
        x: &[i64],
        rates: &[f64],
        obs: &mut O,
    ) {
        let mut cur = from;
        while let Some(&g) = self.grid.get(self.next_grid) {
            if g < to || (inclusive && g <= to) {
                obs.hold(x, rates, g - cur);
                cur = g;
                self.snapshots.push(x.to_vec());
                obs.grid(self.next_grid, x);
                self.next_grid += 1;
            } else {
                break;
            }
        }
        obs.hold(x, rates, to - cur);
    }

    /// Snapshot-only variant for paths without an observer.
    #[inline]
    pub fn pass(&mut self, to: f64, inclusive: bool, x: &[i64]) {
        while let Some(&g) = self.grid.get(self.next_grid) {
            if g < to || (inclusive && g <= to) {
                self.snapshots.push(x.to_vec());
                self.next_grid += 1;
            } else {
                break;
            }
        }
    }

    #[inline]
    pub fn jumped(&mut self, t: f64, x: &[i64]) {
        self.jumps += 1;
        if let Some(n) = self.every {
            if self.jumps % n as u64 == 0 {
                self.trace.push(TracePoint {
                    time: t,
                    state: x.to_vec(),
                });
            }
        }
    }

    pub fn finish(self) -> (Vec<Vec<i64>>, Option<Vec<TracePoint>>) {
        let trace = self.every.map(|_| self.trace);
        (self.snapshots, trace)
    }
}

#[inline]
pub(crate) fn apply_jump(
    x: &mut [i64],
    zeta: &[i64],
    reaction: usize,
    time: f64,
) -> Result<(), SimError> {
    for (species, (xi, z)) in x.iter_mut().zip(zeta).enumerate() {
        *xi += z;
        if *xi < 0 {
            return Err(SimError::NegativeState {
                reaction,
                species,
                time,
            });
        }
    }
    Ok(())
}

/// Next reaction method on one path: channel `k` is driven by clock `k`.
pub(crate) fn run_single<B: ClockBank + ?Sized, O: PathObserver>(
    net: &ReactionNetwork,
    params: &[f64],
    x0: &[i64],
    horizon: f64,
    bank: &mut B,
    opts: &SimOptions,
    obs: &mut O,
) -> Result<PathRecord, SimError> {
    super::validate_inputs(net.num_species(), x0, horizon, opts)?;
    let m = net.num_reactions();
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut rates = vec![0.0; m];
    let mut firings = vec![0u64; m];
    let mut n_updates = 0u64;
    let mut rec = Recorder::new(opts, x0);

    loop {
        net.propensities(&x, params, &mut rates)?;
        let mut delta = f64::INFINITY;
        let mut mu = usize::MAX;
        for (k, &rate) in rates.iter().enumerate() {
            if rate > 0.0 {
                let dt = bank.residual(k) / rate;
                if dt < delta {
                    delta = dt;
                    mu = k;
                }
            }
        }
        let t_next = t + delta;
        if t_next > horizon {
            rec.hold(t, horizon, true, &x, &rates, obs);
            break;
        }
        rec.hold(t, t_next, false, &x, &rates, obs);
        for (k, &rate) in rates.iter().enumerate() {
            if k == mu {
                bank.fire(k);
            } else if rate > 0.0 {
                bank.advance(k, rate * delta)?;
            }
        }
        obs.fire(mu, &x, &rates);
        apply_jump(&mut x, &net.reactions[mu].zeta, mu, t_next)?;
        firings[mu] += 1;
        n_updates += 1;
        if n_updates > opts.event_cap {
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
        n_updates,
        firings,
        snapshots,
        trace,
    })
}

/// Result of the split-pair loop before it is wrapped as a `CoupledPath`.
pub(crate) struct SplitRun {
    pub upper: PathRecord,
    pub lower: PathRecord,
    pub split_firings: Vec<[u64; 3]>,
    pub events: u64,
}

/// Next reaction method on the split-rate pair chain.
///
/// Clock `3k + i` drives sub-channel `i` of channel `k`: `i = 0` the shared
/// rate `min(λ_k^a(x^a), λ_k^b(x^b))`, `i = 1` the upper residual and
/// `i = 2` the lower residual. Ties go to the lowest clock index.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_split_pair<B: ClockBank + ?Sized>(
    net: &ReactionNetwork,
    params_upper: &[f64],
    params_lower: &[f64],
    x0_upper: &[i64],
    x0_lower: &[i64],
    horizon: f64,
    bank: &mut B,
    opts: &SimOptions,
) -> Result<SplitRun, SimError> {
    super::validate_inputs(net.num_species(), x0_upper, horizon, opts)?;
    super::validate_inputs(net.num_species(), x0_lower, horizon, opts)?;
    let m = net.num_reactions();
    let mut xa = x0_upper.to_vec();
    let mut xb = x0_lower.to_vec();
    let mut t = 0.0;
    let mut la = vec![0.0; m];
    let mut lb = vec![0.0; m];
    let mut sub = vec![0.0; 3 * m];
    let mut split_firings = vec![[0u64; 3]; m];
    let mut fa = vec![0u64; m];
    let mut fb = vec![0u64; m];
    let (mut na, mut nb, mut events) = (0u64, 0u64, 0u64);
    let mut rec_a = Recorder::new(opts, x0_upper);
    let mut rec_b = Recorder::new(opts, x0_lower);

    loop {
        net.propensities(&xa, params_upper, &mut la)?;
        net.propensities(&xb, params_lower, &mut lb)?;
        for k in 0..m {
            let [a1, a2, a3] = super::split_rates(la[k], lb[k]);
            debug_assert!(a2 == 0.0 || a3 == 0.0, "both residual rates nonzero");
            sub[3 * k] = a1;
            sub[3 * k + 1] = a2;
            sub[3 * k + 2] = a3;
        }
        let mut delta = f64::INFINITY;
        let mut mu = usize::MAX;
        for (j, &rate) in sub.iter().enumerate() {
            if rate > 0.0 {
                let dt = bank.residual(j) / rate;
                if dt < delta {
                    delta = dt;
                    mu = j;
                }
            }
        }
        let t_next = t + delta;
        if t_next > horizon {
            rec_a.pass(horizon, true, &xa);
            rec_b.pass(horizon, true, &xb);
            break;
        }
        rec_a.pass(t_next, false, &xa);
        rec_b.pass(t_next, false, &xb);
        for (j, &rate) in sub.iter().enumerate() {
            if j == mu {
                bank.fire(j);
            } else if rate > 0.0 {
                bank.advance(j, rate * delta)?;
            }
        }
        let (k, i) = (mu / 3, mu % 3);
        let zeta = &net.reactions[k].zeta;
        split_firings[k][i] += 1;
        events += 1;
        if i != 2 {
            apply_jump(&mut xa, zeta, k, t_next)?;
            fa[k] += 1;
            na += 1;
            rec_a.jumped(t_next, &xa);
        }
        if i != 1 {
            apply_jump(&mut xb, zeta, k, t_next)?;
            fb[k] += 1;
            nb += 1;
            rec_b.jumped(t_next, &xb);
        }
        if events > opts.event_cap {
            return Err(SimError::EventCap {
                cap: opts.event_cap,
                time: t_next,
            });
        }
        t = t_next;
    }

    let (snap_a, trace_a) = rec_a.finish();
    let (snap_b, trace_b) = rec_b.finish();
    Ok(SplitRun {
        upper: PathRecord {
            initial: x0_upper.to_vec(),
            terminal: xa,
            horizon,
            n_updates: na,
            firings: fa,
            snapshots: snap_a,
            trace: trace_a,
        },
        lower: PathRecord {
            initial: x0_lower.to_vec(),
            terminal: xb,
            horizon,
            n_updates: nb,
            firings: fb,
            snapshots: snap_b,
            trace: trace_b,
        },
        split_firings,
        events,
    })
}
