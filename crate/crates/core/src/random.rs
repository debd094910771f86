//! Seeded random instances for property tests and benchmarks.
//!
//! Rows are Dirichlet(1) draws on a randomly thinned support; reducible
//! draws are rejected and redrawn. The same seed always yields the same
//! population.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::chain::{validate_chain, MrpSpec, StochasticMatrix};
use crate::ctmc::Generator;
use crate::error::Error;

/// Seed used by the documented random populations.
pub const POPULATION_SEED: u64 = 0x6b65_6d65_6e79;

/// Probability that an off-support candidate entry is kept.
const SUPPORT_KEEP: f64 = 0.5;

pub const MIN_STATES: usize = 2;
pub const MAX_STATES: usize = 12;

/// Range for sojourn means and generator rates.
pub const RATE_RANGE: (f64, f64) = (0.1, 10.0);

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn support_row<R: Rng>(rng: &mut R, m: usize, exclude: Option<usize>) -> Vec<bool> {
    let mut keep: Vec<bool> = (0..m)
        .map(|j| Some(j) != exclude && rng.random::<f64>() < SUPPORT_KEEP)
        .collect();
    if !keep.iter().any(|&k| k) {
        let choices: Vec<usize> = (0..m).filter(|&j| Some(j) != exclude).collect();
        keep[choices[rng.random_range(0..choices.len())]] = true;
    }
    keep
}

/// A random irreducible transition matrix on `m` states.
pub fn random_chain<R: Rng>(rng: &mut R, m: usize) -> StochasticMatrix {
    loop {
        let mut p = DMatrix::zeros(m, m);
        for i in 0..m {
            let keep = support_row(rng, m, None);
            let mut total = 0.0;
            for j in 0..m {
                if keep[j] {
                    let w: f64 = Exp1.sample(rng);
                    let w = w.max(1e-3);
                    p[(i, j)] = w;
                    total += w;
                }
            }
            for j in 0..m {
                p[(i, j)] /= total;
            }
        }
        match validate_chain(p, 1e-9) {
            Ok(chain) => return chain,
            Err(Error::Reducible) => continue,
            Err(e) => unreachable!("random rows are stochastic: {e}"),
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    rng.random_range(lo..=hi)
}

/// How the holding-time means of a random MRP are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentStyle {
    /// Independent `mu_i`.
    Means,
    /// `mu = c e`.
    Constant,
    /// Independent conditional means per transition.
    Full,
}

pub fn random_mrp<R: Rng>(rng: &mut R, m: usize, style: MomentStyle) -> MrpSpec {
    let chain = random_chain(rng, m);
    match style {
        MomentStyle::Means => {
            let mu = DVector::from_fn(m, |_, _| uniform(rng, RATE_RANGE));
            MrpSpec::with_means(chain, mu).expect("positive means")
        }
        MomentStyle::Constant => {
            let c = uniform(rng, RATE_RANGE);
            MrpSpec::with_means(chain, DVector::from_element(m, c)).expect("positive means")
        }
        MomentStyle::Full => {
            let p = chain.matrix().clone();
            let p1 = DMatrix::from_fn(m, m, |i, j| {
                if p[(i, j)] > 0.0 {
                    p[(i, j)] * uniform(rng, RATE_RANGE)
                } else {
                    0.0
                }
            });
            MrpSpec::with_moment_matrix(chain, p1).expect("valid moment matrix")
        }
    }
}

/// A random irreducible generator with off-diagonal rates in [`RATE_RANGE`].
pub fn random_generator<R: Rng>(rng: &mut R, m: usize) -> Generator {
    assert!(m >= 2, "a generator needs at least two states");
    loop {
        let mut q = DMatrix::zeros(m, m);
        for i in 0..m {
            let keep = support_row(rng, m, Some(i));
            let mut out = 0.0;
            for j in 0..m {
                if keep[j] {
                    let r = uniform(rng, RATE_RANGE);
                    q[(i, j)] = r;
                    out += r;
                }
            }
            q[(i, i)] = -out;
        }
        let embedded = DMatrix::from_fn(
            m,
            m,
            |i, j| {
                if i == j {
                    0.0
                } else {
                    q[(i, j)] / -q[(i, i)]
                }
            },
        );
        if validate_chain(embedded, 1e-9).is_ok() {
            return Generator::new(q, 1e-9).expect("rows sum to zero");
        }
    }
}

fn random_dim<R: Rng>(rng: &mut R) -> usize {
    rng.random_range(MIN_STATES..=MAX_STATES)
}

/// `count` random MRPs with `m` in `2..=12`. Every fourth instance has
/// constant means and every fourth (offset by two) carries a full moment
/// matrix.
pub fn mrp_population(seed: u64, count: usize) -> Vec<MrpSpec> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|k| {
            let style = match k % 4 {
                1 => MomentStyle::Constant,
                2 => MomentStyle::Full,
                _ => MomentStyle::Means,
            };
            let m = random_dim(&mut rng);
            random_mrp(&mut rng, m, style)
        })
        .collect()
}

pub fn generator_population(seed: u64, count: usize) -> Vec<Generator> {
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let m = random_dim(&mut rng);
            random_generator(&mut rng, m)
        })
        .collect()
}
