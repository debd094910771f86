//! Monte Carlo estimates for Markov renewal processes.
//!
//! Every trajectory draws from its own ChaCha8 stream, selected by the
//! trajectory index on a generator keyed by the user seed. Trajectories are
//! evaluated in parallel and reduced in index order, so results depend only
//! on `(seed, trials)` and not on the number of worker threads.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::chain::MrpSpec;
use crate::error::{Error, Result};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 20;

/// Holding-time law for one transition `i -> j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoldingDist {
    Exponential { mean: f64 },
    Deterministic { value: f64 },
    TwoPoint { low: f64, high: f64, prob_low: f64 },
}

impl HoldingDist {
    pub fn mean(&self) -> f64 {
        match *self {
            HoldingDist::Exponential { mean } => mean,
            HoldingDist::Deterministic { value } => value,
            HoldingDist::TwoPoint {
                low,
                high,
                prob_low,
            } => prob_low * low + (1.0 - prob_low) * high,
        }
    }

    /// Two-point law on `{mean/2, 2 mean}` with the weight that keeps the mean.
    pub fn two_point(mean: f64) -> Self {
        if mean == 0.0 {
            return HoldingDist::Deterministic { value: 0.0 };
        }
        let (low, high) = (0.5 * mean, 2.0 * mean);
        HoldingDist::TwoPoint {
            low,
            high,
            prob_low: (high - mean) / (high - low),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            HoldingDist::Exponential { mean } => {
                let x: f64 = Exp1.sample(rng);
                mean * x
            }
            HoldingDist::Deterministic { value } => value,
            HoldingDist::TwoPoint {
                low,
                high,
                prob_low,
            } => {
                if rng.random::<f64>() < prob_low {
                    low
                } else {
                    high
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HoldingShape {
    Exponential,
    Deterministic,
    TwoPoint,
}

impl HoldingShape {
    pub const ALL: [HoldingShape; 3] = [
        HoldingShape::Exponential,
        HoldingShape::Deterministic,
        HoldingShape::TwoPoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HoldingShape::Exponential => "exponential",
            HoldingShape::Deterministic => "deterministic",
            HoldingShape::TwoPoint => "two-point",
        }
    }

    fn dist(self, mean: f64) -> HoldingDist {
        match self {
            HoldingShape::Exponential => HoldingDist::Exponential { mean },
            HoldingShape::Deterministic => HoldingDist::Deterministic { value: mean },
            HoldingShape::TwoPoint => HoldingDist::two_point(mean),
        }
    }
}

/// Per-transition holding laws whose means match the spec's conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldingModel {
    m: usize,
    dists: Vec<Option<HoldingDist>>,
}

impl HoldingModel {
    pub fn from_shape(spec: &MrpSpec, shape: HoldingShape) -> Self {
        let m = spec.dim();
        let dists = (0..m * m)
            .map(|k| {
                spec.conditional_mean(k / m, k % m)
                    .map(|mean| shape.dist(mean))
            })
            .collect();
        Self { m, dists }
    }

    pub fn exponential(spec: &MrpSpec) -> Self {
        Self::from_shape(spec, HoldingShape::Exponential)
    }

    pub fn deterministic(spec: &MrpSpec) -> Self {
        Self::from_shape(spec, HoldingShape::Deterministic)
    }

    pub fn two_point(spec: &MrpSpec) -> Self {
        Self::from_shape(spec, HoldingShape::TwoPoint)
    }

    /// Builds a model from an arbitrary law per transition, rejecting laws
    /// whose mean differs from the spec's conditional mean.
    pub fn custom<F>(spec: &MrpSpec, mut law: F) -> Result<Self>
    where
        F: FnMut(usize, usize, f64) -> HoldingDist,
    {
        let m = spec.dim();
        let mut dists = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                match spec.conditional_mean(i, j) {
                    None => dists.push(None),
                    Some(target) => {
                        let d = law(i, j, target);
                        if (d.mean() - target).abs() > 1e-12 * target.max(1.0) {
                            return Err(Error::InvalidArgument(format!(
                                "holding law for {i}->{j} has mean {} instead of {target}",
                                d.mean()
                            )));
                        }
                        dists.push(Some(d));
                    }
                }
            }
        }
        Ok(Self { m, dists })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&HoldingDist> {
        self.dists[i * self.m + j].as_ref()
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Estimate {
    /// `(value - target) / std_error`; zero when both the error and the
    /// deviation vanish, infinite when only the error does.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = self.value - target;
        if self.std_error > 0.0 {
            dev / self.std_error
        } else if dev.abs() <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(dev)
        }
    }
}

/// Mean and standard error of an ordered sample.
fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Cumulative transition rows restricted to the support.
struct JumpTable {
    rows: Vec<Vec<(f64, usize)>>,
}

impl JumpTable {
    fn new(spec: &MrpSpec) -> Self {
        let p = spec.chain().matrix();
        let m = spec.dim();
        let rows = (0..m)
            .map(|i| {
                let mut acc = 0.0;
                (0..m)
                    .filter(|&j| p[(i, j)] > 0.0)
                    .map(|j| {
                        acc += p[(i, j)];
                        (acc, j)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn next<R: Rng>(&self, i: usize, rng: &mut R) -> usize {
        let row = &self.rows[i];
        let u: f64 = rng.random::<f64>() * row.last().map_or(1.0, |x| x.0);
        row.iter()
            .find(|(c, _)| u < *c)
            .unwrap_or(&row[row.len() - 1])
            .1
    }
}

fn check_state(state: usize, m: usize) -> Result<()> {
    if state < m {
        Ok(())
    } else {
        Err(Error::StateOutOfRange { state, m })
    }
}

/// Estimates `m_ij` by averaging first-passage times over independent
/// trajectories. When `from == to` the first return is measured, so at
/// least one jump is always made.
pub fn simulate_hitting(
    spec: &MrpSpec,
    model: &HoldingModel,
    from: usize,
    to: usize,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let m = spec.dim();
    check_state(from, m)?;
    check_state(to, m)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let table = JumpTable::new(spec);
    let times: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trajectory_rng(seed, t);
            let mut state = from;
            let mut elapsed = 0.0;
            loop {
                let next = table.next(state, &mut rng);
                let hold = model
                    .get(state, next)
                    .expect("jump table only yields supported transitions");
                elapsed += hold.sample(&mut rng);
                state = next;
                if state == to {
                    break elapsed;
                }
            }
        })
        .collect();
    let (value, std_error) = summarize(&times);
    Ok(Estimate {
        value,
        std_error,
        trials,
        seed,
    })
}

fn batch_estimates(batches: &[Vec<f64>], totals: &[f64], trials: u64, seed: u64) -> Vec<Estimate> {
    let m = totals.len();
    (0..m)
        .map(|s| {
            let per_batch: Vec<f64> = batches.iter().map(|b| b[s]).collect();
            let (_, se) = summarize(&per_batch);
            Estimate {
                value: totals[s],
                std_error: se,
                trials,
                seed,
            }
        })
        .collect()
}

/// Visit frequencies of the embedded chain over `steps` jumps, after a
/// burn-in of `steps / 10` jumps from state 1. For periodic chains these
/// are Cesaro averages.
pub fn estimate_embedded(spec: &MrpSpec, steps: u64, seed: u64) -> Result<Vec<Estimate>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let m = spec.dim();
    let table = JumpTable::new(spec);
    let mut rng = trajectory_rng(seed, 0);
    let mut state = 0usize;
    for _ in 0..steps / 10 {
        state = table.next(state, &mut rng);
    }
    let batch_len = (steps / BATCHES as u64).max(1);
    let mut counts = vec![0u64; m];
    let mut batches: Vec<Vec<f64>> = Vec::new();
    let mut current = vec![0u64; m];
    let mut in_batch = 0u64;
    for _ in 0..steps {
        counts[state] += 1;
        current[state] += 1;
        in_batch += 1;
        if in_batch == batch_len {
            batches.push(
                current
                    .iter()
                    .map(|&c| c as f64 / batch_len as f64)
                    .collect(),
            );
            current.iter_mut().for_each(|c| *c = 0);
            in_batch = 0;
        }
        state = table.next(state, &mut rng);
    }
    let totals: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
    Ok(batch_estimates(&batches, &totals, steps, seed))
}

/// Fraction of time spent in each state over `[horizon / 10, horizon]`,
/// starting from state 1 at time zero.
pub fn estimate_occupancy(
    spec: &MrpSpec,
    model: &HoldingModel,
    horizon: f64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let m = spec.dim();
    let table = JumpTable::new(spec);
    let mut rng = trajectory_rng(seed, 0);
    let start = horizon / 10.0;
    let window = (horizon - start) / BATCHES as f64;
    let mut occupancy = vec![0.0; m];
    let mut batches = vec![vec![0.0; m]; BATCHES];

    let mut add = |state: usize, a: f64, b: f64| {
        let (a, b) = (a.max(start), b.min(horizon));
        if b <= a {
            return;
        }
        occupancy[state] += b - a;
        let first = (((a - start) / window) as usize).min(BATCHES - 1);
        let last = (((b - start) / window) as usize).min(BATCHES - 1);
        for (k, batch) in batches.iter_mut().enumerate().take(last + 1).skip(first) {
            let lo = start + k as f64 * window;
            let hi = lo + window;
            let overlap = b.min(hi) - a.max(lo);
            if overlap > 0.0 {
                batch[state] += overlap;
            }
        }
    };

    let mut state = 0usize;
    let mut t = 0.0;
    while t < horizon {
        let next = table.next(state, &mut rng);
        let hold = model
            .get(state, next)
            .expect("jump table only yields supported transitions")
            .sample(&mut rng);
        add(state, t, t + hold);
        t += hold;
        state = next;
    }

    let span = horizon - start;
    let totals: Vec<f64> = occupancy.iter().map(|x| x / span).collect();
    let batches: Vec<Vec<f64>> = batches
        .into_iter()
        .map(|b| b.into_iter().map(|x| x / window).collect())
        .collect();
    Ok(batch_estimates(&batches, &totals, BATCHES as u64, seed))
}

/// Estimates every `m_ij`, seeding each pair with the same `seed`.
pub fn simulate_all_hitting(
    spec: &MrpSpec,
    model: &HoldingModel,
    trials: u64,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    let m = spec.dim();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| simulate_hitting(spec, model, i, j, trials, seed))
                .collect()
        })
        .collect()
}

/// Convenience: values of a vector of estimates.
pub fn values(estimates: &[Estimate]) -> DVector<f64> {
    DVector::from_iterator(estimates.len(), estimates.iter().map(|e| e.value))
}
