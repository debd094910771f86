use kemeny_core::ctmc::mrp_from_generator;
use kemeny_core::nalgebra::DVector;
use kemeny_core::prelude::*;
use kemeny_core::simulate::simulate_all_hitting;

fn example_mrp() -> MrpSpec {
    let chain = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]], 1e-12).unwrap();
    MrpSpec::with_means(chain, DVector::from_vec(vec![2.0, 4.0])).unwrap()
}

fn example_ctmc() -> MrpSpec {
    let gen = Generator::from_rows(&[vec![-1.0, 1.0], vec![2.0, -2.0]], 1e-12).unwrap();
    mrp_from_generator(&gen).unwrap()
}

#[test]
fn hitting_time_matches_for_every_shape() {
    let spec = example_mrp();
    for shape in HoldingShape::ALL {
        let model = HoldingModel::from_shape(&spec, shape);
        let est = simulate_hitting(&spec, &model, 1, 0, 100_000, 42).unwrap();
        let z = est.z_score(16.0);
        assert!(z.abs() <= 3.0, "{}: {est:?} z = {z}", shape.name());
    }
}

#[test]
fn shapes_agree_within_combined_band() {
    let spec = example_ctmc();
    let runs: Vec<_> = HoldingShape::ALL
        .iter()
        .map(|&s| {
            simulate_all_hitting(&spec, &HoldingModel::from_shape(&spec, s), 20_000, 7).unwrap()
        })
        .collect();
    for a in 0..runs.len() {
        for b in a + 1..runs.len() {
            let pairs = runs[a].iter().flatten().zip(runs[b].iter().flatten());
            for (x, y) in pairs {
                let band = 3.0 * (x.std_error.powi(2) + y.std_error.powi(2)).sqrt();
                assert!(
                    (x.value - y.value).abs() <= band.max(1e-12),
                    "{x:?} vs {y:?}"
                );
            }
        }
    }
}

#[test]
fn embedded_frequencies_match_stationary_vector() {
    let spec = example_mrp();
    let est = estimate_embedded(&spec, 1_000_000, 11).unwrap();
    for (e, target) in est.iter().zip([1.0 / 3.0, 2.0 / 3.0]) {
        assert!(e.z_score(target).abs() <= 3.0, "{e:?}");
    }
}

#[test]
fn occupancy_matches_semi_markov_vector() {
    for (spec, target) in [
        (example_mrp(), [0.2, 0.8]),
        (example_ctmc(), [2.0 / 3.0, 1.0 / 3.0]),
    ] {
        let model = HoldingModel::exponential(&spec);
        let est = estimate_occupancy(&spec, &model, 200_000.0, 5).unwrap();
        for (e, t) in est.iter().zip(target) {
            assert!(e.z_score(t).abs() <= 3.0, "{e:?} vs {t}");
        }
    }
}

#[test]
fn equal_deterministic_holds_give_embedded_frequencies() {
    let chain = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]], 1e-12).unwrap();
    let spec = MrpSpec::with_means(chain, DVector::from_element(2, 1.5)).unwrap();
    let model = HoldingModel::deterministic(&spec);
    let est = estimate_occupancy(&spec, &model, 300_000.0, 9).unwrap();
    let pi = stationary_embedded(spec.chain()).unwrap();
    for (e, p) in est.iter().zip(pi.iter()) {
        assert!(e.z_score(*p).abs() <= 3.0, "{e:?} vs {p}");
    }
}

#[test]
fn simulated_second_circle_mixture_is_state_independent() {
    let spec = example_mrp();
    let profile = stationary_profile(&spec).unwrap();
    let model = HoldingModel::two_point(&spec);
    let est = simulate_all_hitting(&spec, &model, 50_000, 3).unwrap();
    let mix = |i: usize| -> (f64, f64) {
        let j = 1 - i;
        (
            profile.varpi[j] * est[i][j].value,
            profile.varpi[j] * est[i][j].std_error,
        )
    };
    let (a, sa) = mix(0);
    let (b, sb) = mix(1);
    assert!(
        (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(),
        "{a} vs {b}"
    );
}

#[test]
fn worker_count_does_not_change_results() {
    let spec = example_mrp();
    let model = HoldingModel::exponential(&spec);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_hitting(&spec, &model, 0, 1, 20_000, 123).unwrap())
    };
    let serial = run(1);
    assert_eq!(serial, run(4));
    assert_eq!(serial.value.to_bits(), run(3).value.to_bits());
}
