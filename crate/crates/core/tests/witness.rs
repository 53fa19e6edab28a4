use std::f64::consts::PI;

use boundent::optim::NelderMead;
use boundent::qmat::{max_norm_distance, DensityMatrix, PureState, C64};
use boundent::rng::{random_pure_state, SplitMix64};
use boundent::states::{abls_direct, AblsParams};
use boundent::witness::{
    epsilon_min, epsilon_objective, expectation, product_state, wbar_explicit, wbar_generic,
    witness_operator, witness_value, WitnessCoefficients,
};
use proptest::prelude::*;

fn abls_params() -> impl Strategy<Value = AblsParams> {
    (-2.3f64..2.3, -2.3f64..2.3, -2.3f64..2.3)
        .prop_map(|(x, y, z)| (x.exp(), y.exp(), z.exp()))
        .prop_filter("ab far from c", |(a, b, c)| (a * b - c).abs() > 1e-3)
        .prop_map(|(a, b, c)| AblsParams::new(a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_construction_matches_closed_form(p in abls_params()) {
        let generic = wbar_generic(&abls_direct(&p)).unwrap();
        prop_assert!(max_norm_distance(&generic, &wbar_explicit(&p)).unwrap() <= 1e-9);
    }

    #[test]
    fn product_value_is_the_sandwich(
        p in abls_params(),
        angles in prop::array::uniform3(0.0f64..PI),
        phases in prop::array::uniform3(-PI..PI),
    ) {
        let v = product_state(angles, phases);
        let w = wbar_explicit(&p);
        let direct = w.sandwich(v.amplitudes(), v.amplitudes()).re;
        let closed = WitnessCoefficients::new(&p).product_value(angles, phases);
        prop_assert!((direct - closed).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witness_value_is_minus_epsilon(p in abls_params()) {
        let eps = epsilon_min(&p).epsilon;
        prop_assert!(eps > 0.0);
        prop_assert!((witness_value(&p) + eps).abs() <= 1e-9);
    }
}

fn random_product(rng: &mut SplitMix64) -> DensityMatrix {
    let e = random_pure_state(1, rng);
    let f = random_pure_state(1, rng);
    let g = random_pure_state(1, rng);
    e.tensor(&f).tensor(&g).to_density()
}

#[test]
fn witness_is_nonnegative_on_product_states() {
    let mut rng = SplitMix64::new(2024);
    for p in [
        AblsParams::optimal(),
        AblsParams::symmetric(0.7).unwrap(),
        AblsParams::new(0.5, 2.0, 3.0).unwrap(),
    ] {
        let w = witness_operator(&p, epsilon_min(&p).epsilon);
        for _ in 0..1000 {
            let v = expectation(&w, &random_product(&mut rng)).unwrap();
            assert!(v >= -1e-9, "{v}");
        }
    }
}

#[test]
fn no_probe_beats_epsilon() {
    let p = AblsParams::optimal();
    let eps = epsilon_min(&p).epsilon;
    let mut rng = SplitMix64::new(99);
    for _ in 0..1_000_000 {
        let angles = [
            rng.uniform(0.0, PI),
            rng.uniform(0.0, PI),
            rng.uniform(0.0, PI),
        ];
        assert!(epsilon_objective(&p, angles) >= eps - 1e-12);
    }
}

/// Minimum of `<efg|W̄|efg>` over unrestricted complex product vectors:
/// four real numbers per qubit, normalized inside the objective.
fn full_complex_minimum(p: &AblsParams) -> f64 {
    let w = wbar_explicit(p);
    let f = |x: &[f64]| {
        let qubit = |k: usize| {
            let amps = vec![
                C64::new(x[4 * k], x[4 * k + 1]),
                C64::new(x[4 * k + 2], x[4 * k + 3]),
            ];
            PureState::normalized(1, amps).ok()
        };
        match (qubit(0), qubit(1), qubit(2)) {
            (Some(e), Some(f), Some(g)) => {
                let v = e.tensor(&f).tensor(&g);
                w.sandwich(v.amplitudes(), v.amplitudes()).re
            }
            _ => f64::INFINITY,
        }
    };
    let mut rng = SplitMix64::new(17);
    let starts: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..12).map(|_| rng.normal()).collect())
        .collect();
    let nm = NelderMead {
        initial_step: 0.5,
        max_iter: 50_000,
        ..NelderMead::default()
    };
    nm.multistart(f, &starts).unwrap().value
}

#[test]
fn real_angles_suffice() {
    for p in [
        AblsParams::optimal(),
        AblsParams::symmetric(0.6).unwrap(),
        AblsParams::new(0.5, 2.0, 3.0).unwrap(),
    ] {
        let restricted = epsilon_min(&p).epsilon;
        let full = full_complex_minimum(&p);
        assert!(full >= restricted - 1e-6, "{full} < {restricted}");
        assert!((full - restricted).abs() <= 1e-6, "{full} vs {restricted}");
    }
}
