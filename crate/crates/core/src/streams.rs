//! Deterministic randomness for path simulation.
//!
//! Every stream is backed by `ChaCha8Rng` from `rand_chacha` 0.9, seeded
//! through `SeedableRng::seed_from_u64`. That generator and seeding routine
//! have a documented, platform-independent output, which is what makes
//! paths reproducible bit for bit. Uniforms are taken on `(0, 1]` from the
//! top 53 bits of a `u64` draw, and unit exponentials are `ln(1/u)`.
//!
//! Two realizations of a unit-rate Poisson process are provided:
//!
//! * [`ClockStream`]: next-reaction bookkeeping with constant memory. Each
//!   stream has exactly one consumer.
//! * [`ArrivalTape`]: a memoized arrival sequence that several consumers
//!   read at their own internal times through [`TapeCursor`]s.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Relative slack allowed when an internal-time advance lands past the
/// next jump point because of floating-point rounding.
const OVERSHOOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StreamError {
    #[error("internal time overshoot: consumed {consumed} would pass next jump {next_jump}")]
    Overshoot { consumed: f64, next_jump: f64 },
}

/// Uniform variates on `(0, 1]`.
#[derive(Debug, Clone)]
pub struct UniformSource {
    rng: ChaCha8Rng,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        UniformSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unit-rate exponential as `ln(1/u)`.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        (1.0 / self.next_uniform()).ln()
    }
}

/// Unit-rate Poisson clock in next-reaction form.
///
/// `next_jump` (P) is the internal time of the next jump, `consumed` (T) the
/// internal time used so far; `0 <= T <= P` always holds.
#[derive(Debug, Clone)]
pub struct ClockStream {
    next_jump: f64,
    consumed: f64,
    source: UniformSource,
}

impl ClockStream {
    pub fn new(seed: u64) -> Self {
        let mut source = UniformSource::new(seed);
        let next_jump = source.next_exp();
        ClockStream {
            next_jump,
            consumed: 0.0,
            source,
        }
    }

    pub fn next_jump(&self) -> f64 {
        self.next_jump
    }

    pub fn consumed(&self) -> f64 {
        self.consumed
    }

    /// Internal time left before the next jump.
    #[inline]
    pub fn residual(&self) -> f64 {
        self.next_jump - self.consumed
    }

    /// Real time until this clock fires when driven at `rate`; infinite for
    /// a zero rate.
    #[inline]
    pub fn next_jump_candidate(&self, rate: f64) -> f64 {
        if rate > 0.0 {
            self.residual() / rate
        } else {
            f64::INFINITY
        }
    }

    /// Consumes `rate * dt` of internal time without firing.
    #[inline]
    pub fn advance(&mut self, rate: f64, dt: f64) -> Result<(), StreamError> {
        self.advance_internal(rate * dt)
    }

    #[inline]
    pub fn advance_internal(&mut self, du: f64) -> Result<(), StreamError> {
        let target = self.consumed + du;
        if target > self.next_jump {
            if target - self.next_jump > OVERSHOOT_TOL * (1.0 + self.next_jump) {
                return Err(StreamError::Overshoot {
                    consumed: target,
                    next_jump: self.next_jump,
                });
            }
            self.consumed = self.next_jump;
        } else {
            self.consumed = target;
        }
        Ok(())
    }

    /// Fires the clock: `T = P`, then `P += ln(1/u)`.
    #[inline]
    pub fn fire(&mut self) {
        self.consumed = self.next_jump;
        self.next_jump += self.source.next_exp();
    }
}

/// Lazily generated, memoized jump points of one unit-rate Poisson process.
#[derive(Debug, Clone)]
pub struct ArrivalTape {
    arrivals: Vec<f64>,
    source: UniformSource,
}

impl ArrivalTape {
    pub fn new(seed: u64) -> Self {
        ArrivalTape {
            arrivals: Vec::new(),
            source: UniformSource::new(seed),
        }
    }

    /// The `index`-th jump point (0-based), generating gaps as needed.
    #[inline]
    pub fn arrival(&mut self, index: usize) -> f64 {
        while self.arrivals.len() <= index {
            let last = self.arrivals.last().copied().unwrap_or(0.0);
            let gap = self.source.next_exp();
            self.arrivals.push(last + gap);
        }
        self.arrivals[index]
    }

    /// Number of arrivals generated so far.
    pub fn generated(&self) -> usize {
        self.arrivals.len()
    }

    /// Number of arrivals in `(0, u]`.
    pub fn count_until(&mut self, u: f64) -> usize {
        let mut n = 0;
        while self.arrival(n) <= u {
            n += 1;
        }
        n
    }
}

/// One consumer's position on an [`ArrivalTape`].
#[derive(Debug, Clone, Default)]
pub struct TapeCursor {
    consumed: f64,
    next: usize,
}

impl TapeCursor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn consumed(&self) -> f64 {
        self.consumed
    }

    /// Jumps taken so far.
    pub fn jumps(&self) -> usize {
        self.next
    }

    #[inline]
    pub fn residual(&self, tape: &mut ArrivalTape) -> f64 {
        tape.arrival(self.next) - self.consumed
    }

    #[inline]
    pub fn advance_internal(&mut self, tape: &mut ArrivalTape, du: f64) -> Result<(), StreamError> {
        let next_jump = tape.arrival(self.next);
        let target = self.consumed + du;
        if target > next_jump {
            if target - next_jump > OVERSHOOT_TOL * (1.0 + next_jump) {
                return Err(StreamError::Overshoot {
                    consumed: target,
                    next_jump,
                });
            }
            self.consumed = next_jump;
        } else {
            self.consumed = target;
        }
        Ok(())
    }

    #[inline]
    pub fn fire(&mut self, tape: &mut ArrivalTape) {
        self.consumed = tape.arrival(self.next);
        self.next += 1;
    }
}

/// Memoized i.i.d. uniforms on `(0, 1]`, indexed from 0.
#[derive(Debug, Clone)]
pub struct UniformTape {
    values: Vec<f64>,
    source: UniformSource,
}

impl UniformTape {
    pub fn new(seed: u64) -> Self {
        UniformTape {
            values: Vec::new(),
            source: UniformSource::new(seed),
        }
    }

    #[inline]
    pub fn get(&mut self, index: usize) -> f64 {
        while self.values.len() <= index {
            let u = self.source.next_uniform();
            self.values.push(u);
        }
        self.values[index]
    }
}

/// Hierarchical seed derivation: `(path, channel, role) → seed`.
///
/// The triple is packed injectively into 64 bits (path: 40 bits, channel:
/// 16 bits, role: 8 bits), xored with a mixed base seed and passed through
/// the SplitMix64 finalizer. Xor with a constant and the finalizer are both
/// bijections on `u64`, so distinct triples within range always get
/// distinct seeds for a fixed base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPlan {
    pub base_seed: u64,
}

pub const MAX_PATHS: u64 = 1 << 40;
pub const MAX_CHANNELS: u64 = 1 << 16;
pub const MAX_ROLES: u64 = 1 << 8;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedPlan {
    pub fn new(base_seed: u64) -> Self {
        SeedPlan { base_seed }
    }

    /// # Panics
    /// If an index exceeds its field width.
    pub fn derive(&self, path: u64, channel: u64, role: u64) -> u64 {
        assert!(path < MAX_PATHS, "path index {path} out of range");
        assert!(channel < MAX_CHANNELS, "channel index {channel} out of range");
        assert!(role < MAX_ROLES, "role index {role} out of range");
        let packed = (path << 24) | (channel << 8) | role;
        splitmix64(splitmix64(self.base_seed) ^ packed)
    }
}
