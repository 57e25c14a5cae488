use statrs::distribution::{Discrete, DiscreteCDF, Poisson};

use crate::model::ReactionNetwork;

use super::OracleError;

/// Largest number of states a box may enumerate.
pub(crate) const MAX_STATES: usize = 20_000_000;

/// Axis-aligned box `lo[i] ..= hi[i]` of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl StateBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        StateBox { lo, hi }
    }

    /// `0 ..= hi[i]` in every coordinate.
    pub fn from_upper(hi: Vec<i64>) -> Self {
        StateBox {
            lo: vec![0; hi.len()],
            hi,
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }
}

/// Generator of the chain restricted to a box.
///
/// Transitions that would leave the box are dropped but still counted in the
/// diagonal, so probability that exits the box is lost rather than
/// redistributed; the lost mass is the truncation leak.
#[derive(Debug, Clone)]
pub struct TruncatedGenerator {
    bounds: StateBox,
    extents: Vec<usize>,
    /// Transitions out of state `i` are `targets/rates[offsets[i]..offsets[i+1]]`.
    offsets: Vec<usize>,
    targets: Vec<usize>,
    rates: Vec<f64>,
    /// Total outflow from each state, including transitions leaving the box.
    exit: Vec<f64>,
    lambda: f64,
}

impl TruncatedGenerator {
    pub fn build(net: &ReactionNetwork, params: &[f64], bounds: &StateBox) -> Result<Self, OracleError> {
        let n = net.num_species();
        if bounds.lo.len() != n || bounds.hi.len() != n || bounds.lo.iter().zip(&bounds.hi).any(|(l, h)| l > h) {
            return Err(OracleError::BoxShape { expected: n });
        }
        let extents: Vec<usize> = bounds.lo.iter().zip(&bounds.hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let total = extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .filter(|&t| t <= MAX_STATES)
            .ok_or(OracleError::BoxTooLarge(extents.iter().map(|&e| e as f64).product::<f64>() as usize))?;
        let mut gen = TruncatedGenerator {
            bounds: bounds.clone(),
            extents,
            offsets: Vec::with_capacity(total + 1),
            targets: Vec::new(),
            rates: Vec::new(),
            exit: Vec::with_capacity(total),
            lambda: 0.0,
        };
        let mut x = bounds.lo.clone();
        let mut y = vec![0i64; n];
        let mut rates = vec![0.0; net.num_reactions()];
        gen.offsets.push(0);
        for _ in 0..total {
            net.propensities(&x, params, &mut rates)?;
            let mut out = 0.0;
            for (k, &r) in rates.iter().enumerate() {
                if r <= 0.0 {
                    continue;
                }
                out += r;
                for ((yi, xi), z) in y.iter_mut().zip(&x).zip(&net.reactions[k].zeta) {
                    *yi = xi + z;
                }
                if bounds.contains(&y) {
                    gen.targets.push(gen.index_of(&y));
                    gen.rates.push(r);
                }
            }
            gen.exit.push(out);
            gen.lambda = gen.lambda.max(out);
            gen.offsets.push(gen.targets.len());
            // odometer increment, first species fastest
            for (i, xi) in x.iter_mut().enumerate() {
                if *xi < bounds.hi[i] {
                    *xi += 1;
                    break;
                }
                *xi = bounds.lo[i];
            }
        }
        Ok(gen)
    }

    pub fn num_states(&self) -> usize {
        self.exit.len()
    }

    /// Uniformization rate: the largest total outflow over the box.
    pub fn uniformization_rate(&self) -> f64 {
        self.lambda
    }

    pub fn index_of(&self, x: &[i64]) -> usize {
        let mut idx = 0;
        for i in (0..x.len()).rev() {
            idx = idx * self.extents[i] + (x[i] - self.bounds.lo[i]) as usize;
        }
        idx
    }

    pub fn state(&self, mut index: usize) -> Vec<i64> {
        self.extents
            .iter()
            .zip(&self.bounds.lo)
            .map(|(&e, &l)| {
                let v = (index % e) as i64 + l;
                index /= e;
                v
            })
            .collect()
    }

    /// Generator row sum at `index`: in-box outflow minus total outflow.
    /// Zero when no transition leaves the box, negative otherwise.
    pub fn row_sum(&self, index: usize) -> f64 {
        let kept: f64 = self.rates[self.offsets[index]..self.offsets[index + 1]].iter().sum();
        kept - self.exit[index]
    }

    /// `out = π (I + Q/Λ)`.
    fn step(&self, pi: &[f64], out: &mut [f64]) {
        let inv = 1.0 / self.lambda;
        for (o, (p, e)) in out.iter_mut().zip(pi.iter().zip(&self.exit)) {
            *o = p * (1.0 - e * inv);
        }
        for (i, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let w = p * inv;
            for j in self.offsets[i]..self.offsets[i + 1] {
                out[self.targets[j]] += w * self.rates[j];
            }
        }
    }
}

/// Result of [`exact_expectation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactExpectation {
    pub value: f64,
    /// Probability that left the box before `T`.
    pub leak: f64,
    /// Distribution over the box at `T`, indexed like the generator's states.
    pub distribution: Vec<f64>,
    /// Number of uniformized jumps summed.
    pub terms: usize,
}

/// `E f(X(T))` from `x0` by uniformization on `bounds`.
///
/// The Poisson series is cut once its remaining tail is below
/// `tol / (2 max|f|)` over the box. Fails if more than `tol` probability
/// leaves the box.
pub fn exact_expectation<F>(
    net: &ReactionNetwork,
    params: &[f64],
    x0: &[i64],
    horizon: f64,
    f: F,
    bounds: &StateBox,
    tol: f64,
) -> Result<ExactExpectation, OracleError>
where
    F: Fn(&[i64]) -> f64,
{
    if x0.len() != net.num_species() {
        return Err(OracleError::InitialState {
            got: x0.len(),
            expected: net.num_species(),
        });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(OracleError::Horizon(horizon));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(OracleError::Tolerance(tol));
    }
    let gen = TruncatedGenerator::build(net, params, bounds)?;
    if !bounds.contains(x0) {
        return Err(OracleError::OutsideBox(x0.to_vec()));
    }
    let fvals: Vec<f64> = (0..gen.num_states())
        .map(|i| {
            let x = gen.state(i);
            let v = f(&x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(OracleError::Observable(x))
            }
        })
        .collect::<Result<_, _>>()?;
    let start = gen.index_of(x0);
    let mut pi = vec![0.0; gen.num_states()];
    pi[start] = 1.0;
    let lt = gen.uniformization_rate() * horizon;
    if lt == 0.0 {
        return Ok(ExactExpectation {
            value: fvals[start],
            leak: 0.0,
            distribution: pi,
            terms: 0,
        });
    }

    let fmax = fvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail_tol = if fmax > 0.0 { tol / (2.0 * fmax) } else { tol };
    let poisson = Poisson::new(lt).expect("positive Poisson mean");
    let mut last = lt.floor() as u64;
    while poisson.sf(last) >= tail_tol {
        last += 1 + (lt.sqrt() as u64) / 8;
    }

    let mut acc = vec![0.0; pi.len()];
    let mut next = vec![0.0; pi.len()];
    let mut leak = 0.0;
    for n in 0..=last {
        let w = poisson.pmf(n);
        if w > 0.0 {
            let mut mass = 0.0;
            for (a, p) in acc.iter_mut().zip(&pi) {
                *a += w * p;
                mass += p;
            }
            leak += w * (1.0 - mass).max(0.0);
        }
        if n < last {
            gen.step(&pi, &mut next);
            std::mem::swap(&mut pi, &mut next);
        }
    }
    if leak > tol {
        return Err(OracleError::Leak { leak, tol });
    }
    Ok(ExactExpectation {
        value: acc.iter().zip(&fvals).map(|(p, v)| p * v).sum(),
        leak,
        distribution: acc,
        terms: last as usize + 1,
    })
}
