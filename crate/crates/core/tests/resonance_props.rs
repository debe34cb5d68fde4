use dbo_lab::dyadic::{
    block_indicator, estimate_block_norm, regime_classify, resonance, resonance_identity_check, sample_spec,
    DyadicBlockSpec, EstimateConfig, FrequencyTriple, Regime,
};
use dbo_lab::spectral::dispersion_p;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn identity_holds_on_the_hyperplane(a in -1e6..1e6f64, b in -1e6..1e6f64) {
        prop_assert!(resonance_identity_check(&FrequencyTriple::from_pair(a, b)));
    }

    #[test]
    fn resonance_is_odd_and_symmetric(a in -1e3..1e3f64, b in -1e3..1e3f64) {
        let t = FrequencyTriple::from_pair(a, b);
        let flipped = FrequencyTriple::from_pair(-a, -b);
        let swapped = FrequencyTriple::new(t.xi3, t.xi1, t.xi2).unwrap();
        prop_assert!((resonance(&flipped) + resonance(&t)).abs() <= 1e-9 * (1.0 + resonance(&t).abs()));
        prop_assert!((resonance(&swapped) - resonance(&t)).abs() <= 1e-9 * (1.0 + resonance(&t).abs()));
    }

    #[test]
    fn off_hyperplane_triples_are_rejected(a in 1.0..1e3f64, b in 1.0..1e3f64, gap in 1e-6..1.0f64) {
        prop_assert!(FrequencyTriple::new(a, b, -(a + b) + gap * (a + b)).is_err());
    }

    #[test]
    fn sampled_specs_have_the_requested_regime(seed in 0u64..1000, which in 0usize..4) {
        let regime = [Regime::HighModulation, Regime::PpCoherence, Regime::PmCoherence, Regime::Vanishing][which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = sample_spec(regime, 8, &mut rng).unwrap();
        prop_assert_eq!(regime_classify(&spec), regime);
        prop_assert_eq!(spec.support_conditions(), regime != Regime::Vanishing);
    }

    #[test]
    fn indicator_accepts_points_built_inside_the_block(
        x in 1.0..2.0f64, y in 1.0..2.0f64, l1 in -1.0..1.0f64, l2 in -1.0..1.0f64,
    ) {
        // (ξ₁, ξ₂) = (8x, 8y) puts both in [8, 16) and ξ₃ = −8(x + y) in [16, 32)
        let xi = [8.0 * x, 8.0 * y, -8.0 * (x + y)];
        let h: f64 = xi.iter().map(|&v| dispersion_p(v)).sum();
        let h_dyadic = 2f64.powi(h.abs().log2().floor() as i32);
        let lam = [l1, l2, -l1 - l2 - h];
        let tau = [0, 1, 2].map(|j| lam[j] + dispersion_p(xi[j]));
        let l_dyadic = lam.map(|v: f64| 2f64.powi(v.abs().log2().floor() as i32));
        prop_assume!(lam[0].abs() >= 0.25 && lam[1].abs() >= 0.25);
        let spec = DyadicBlockSpec::new([8.0, 8.0, 16.0], h_dyadic, l_dyadic).unwrap();
        prop_assert!(block_indicator(&spec, tau, xi).unwrap());
    }
}

#[test]
fn vanishing_blocks_estimate_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = EstimateConfig { resolution: 16, trials: 2, ..EstimateConfig::default() };
    for _ in 0..5 {
        let spec = sample_spec(Regime::Vanishing, 6, &mut rng).unwrap();
        let est = estimate_block_norm(&spec, &cfg).unwrap();
        assert_eq!(est.lower_bound, 0.0);
        assert_eq!(est.active_cells, 0);
    }
}

#[test]
fn estimates_are_reproducible_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = sample_spec(Regime::HighModulation, 6, &mut rng).unwrap();
    let cfg = EstimateConfig { resolution: 16, trials: 4, seed: 2, ..EstimateConfig::default() };
    let a = estimate_block_norm(&spec, &cfg).unwrap();
    let b = estimate_block_norm(&spec, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.active_cells > 0, a.lower_bound > 0.0, "{a:?}");
    assert!(a.ratio <= 10.0, "{a:?}");
}
