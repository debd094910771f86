#![allow(dead_code)]

use kemeny_core::nalgebra::DVector;
use kemeny_core::prelude::*;
use kemeny_core::random::{random_generator, random_mrp, rng_from_seed, MomentStyle};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

pub const CASES: u32 = 1000;

pub fn config() -> Config {
    Config {
        cases: CASES,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..Config::default()
    }
}

pub fn mrp_with(style: MomentStyle) -> impl Strategy<Value = MrpSpec> {
    (2usize..=12, any::<u64>())
        .prop_map(move |(m, seed)| random_mrp(&mut rng_from_seed(seed), m, style))
}

pub fn any_mrp() -> impl Strategy<Value = MrpSpec> {
    prop_oneof![
        mrp_with(MomentStyle::Means),
        mrp_with(MomentStyle::Constant),
        mrp_with(MomentStyle::Full),
    ]
}

pub fn dtmc() -> impl Strategy<Value = MrpSpec> {
    (2usize..=12, any::<u64>()).prop_map(|(m, seed)| {
        let chain = kemeny_core::random::random_chain(&mut rng_from_seed(seed), m);
        MrpSpec::dtmc(chain)
    })
}

pub fn generator() -> impl Strategy<Value = Generator> {
    (2usize..=12, any::<u64>()).prop_map(|(m, seed)| random_generator(&mut rng_from_seed(seed), m))
}

pub fn e(m: usize) -> DVector<f64> {
    DVector::from_element(m, 1.0)
}

/// Relative infinity-norm distance, scaled by `max(1, ||b||)`.
pub fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}
