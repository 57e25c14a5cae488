use crate::streams::ClockStream;

/// Two constant-rate Poisson processes coupled by splitting off their
/// common rate:
///
/// ```text
/// Z_a(t) = Y_1(rate_b · t) + Y_2((rate_a − rate_b) · t)
/// Z_b(t) = Y_1(rate_b · t)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ToyCoupling {
    pub z_a: u64,
    pub z_b: u64,
    /// Jumps shared by both processes, i.e. `Y_1(rate_b · t)`.
    pub shared: u64,
    /// Real jump times of `Z_a − Z_b = Y_2((rate_a − rate_b) t)` on `[0, T]`.
    pub difference_jumps: Vec<f64>,
}

impl ToyCoupling {
    pub fn difference(&self) -> i64 {
        self.z_a as i64 - self.z_b as i64
    }
}

/// Counts jumps of a unit-rate clock run at constant `rate` over `[0, horizon]`.
fn jump_times(clock: &mut ClockStream, rate: f64, horizon: f64) -> Vec<f64> {
    let mut times = Vec::new();
    if rate <= 0.0 {
        return times;
    }
    while clock.next_jump() / rate <= horizon {
        times.push(clock.next_jump() / rate);
        clock.fire();
    }
    times
}

/// Simulates the min-split coupling of two constant rates on `[0, horizon]`.
///
/// # Panics
/// If `rate_a < rate_b` or `rate_b < 0`.
pub fn toy_poisson_coupling(rate_a: f64, rate_b: f64, horizon: f64, seeds: [u64; 2]) -> ToyCoupling {
    assert!(rate_a >= rate_b && rate_b >= 0.0, "need rate_a >= rate_b >= 0");
    let mut shared_clock = ClockStream::new(seeds[0]);
    let mut extra_clock = ClockStream::new(seeds[1]);
    let shared = jump_times(&mut shared_clock, rate_b, horizon).len() as u64;
    let difference_jumps = jump_times(&mut extra_clock, rate_a - rate_b, horizon);
    ToyCoupling {
        z_a: shared + difference_jumps.len() as u64,
        z_b: shared,
        shared,
        difference_jumps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_rates_never_differ() {
        for s in 0..100 {
            let c = toy_poisson_coupling(13.0, 13.0, 5.0, [s, s + 1000]);
            assert_eq!(c.difference(), 0);
            assert!(c.difference_jumps.is_empty());
        }
    }

    #[test]
    fn shared_fraction_long_horizon() {
        let c = toy_poisson_coupling(13.1, 13.0, 20_000.0, [1, 2]);
        let frac = c.shared as f64 / c.z_a as f64;
        // 13 / 13.1 = 0.99237; sd of the fraction here is about 6e-5
        assert!((frac - 13.0 / 13.1).abs() < 5e-4, "{frac}");
    }
}
