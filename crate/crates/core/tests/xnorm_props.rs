use std::f64::consts::PI;

use dbo_lab::spectral::FourierGrid;
use dbo_lab::xnorm::{xbs_equivalence_check, xbs_norm, SpaceTimeField, TimeWindow};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_field(seed: u64) -> SpaceTimeField {
    let grid = FourierGrid::new(32, 2.0 * PI).unwrap();
    let window = TimeWindow::new(4.0, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpaceTimeField::random_band_limited(window, grid, 6, 16.0, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_homogeneous(seed in 0u64..1000, c in -10.0..10.0f64, b in -1.0..1.0f64, s in -1.0..1.0f64) {
        let u = random_field(seed);
        let lhs = xbs_norm(&u.scale(c), b, s, 1.5);
        let rhs = c.abs() * xbs_norm(&u, b, s, 1.5);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn triangle_inequality(a in 0u64..1000, b_seed in 0u64..1000, b in -1.0..1.0f64) {
        let (u, v) = (random_field(a), random_field(b_seed + 1000));
        let sum = xbs_norm(&u.add(&v).unwrap(), b, 0.0, 1.0);
        prop_assert!(sum <= (xbs_norm(&u, b, 0.0, 1.0) + xbs_norm(&v, b, 0.0, 1.0)) * (1.0 + 1e-12));
    }

    #[test]
    fn monotone_in_both_indices(seed in 0u64..1000, b in -1.0..1.0f64, s in -1.0..1.0f64) {
        let u = random_field(seed);
        let base = xbs_norm(&u, b, s, 2.0);
        prop_assert!(xbs_norm(&u, b + 0.25, s, 2.0) >= base * (1.0 - 1e-12));
        prop_assert!(xbs_norm(&u, b, s + 0.25, 2.0) >= base * (1.0 - 1e-12));
    }

    #[test]
    fn plancherel_at_zero_weights(seed in 0u64..1000) {
        let u = random_field(seed);
        let lhs = xbs_norm(&u, 0.0, 0.0, 0.5);
        let rhs = 2.0 * PI * u.l2_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn split_norms_are_equivalent(seed in 0u64..1000, s in -1.0..1.0f64) {
        let r = xbs_equivalence_check(&random_field(seed), 0.5, s, 1.5).unwrap();
        prop_assert!((1.0 / 3.0..=3.0).contains(&r));
    }
}
