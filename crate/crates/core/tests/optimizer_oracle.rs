mod common;

use common::*;
use nlfm::optimizer::{minimum_error, phase_update, run_from_signal, unit_modulus_step};
use nlfm::spectral::naive_forward;
use nlfm::{
    BandMagnitude, Complex64, DesignGrid, OptimizerConfig, OutOfBand, Spectral, StopReason,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_8_32() -> Spectral {
    Spectral::new(DesignGrid::new(0.25, 8.0, 1.0, Some(32)).unwrap())
}

fn random_magnitude(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.gen_range(0.0..2.0)).collect()
}

#[test]
fn step_matches_per_entry_lagrangian_solution() {
    let s = toy_8_32();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mag = random_magnitude(&mut rng, 32);
        let theta = random_phases(&mut rng, 32);
        let dense = dense_iteration(&mag, &theta, 8);
        let lib = unit_modulus_step(&s, &mag, &theta).unwrap();
        assert_eq!(lib.degenerate, 0);
        assert!(max_abs_diff(&lib.samples, &dense.x) < 1e-10, "seed {seed}");
        for (l, inv) in dense.lambda.iter().zip(&dense.lambda1) {
            // Positive root: K + lambda equals the adjoint magnitude.
            assert!(32.0 + l > 0.0);
            assert!(((32.0 + l) * inv - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn phase_update_matches_naive_dft() {
    let s = toy_8_32();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x = random_unimodular(&mut rng, 8);
        let lib = phase_update(&s, &x).unwrap();
        let oracle: Vec<f64> = naive_forward(&x, 32)
            .iter()
            .map(|v| v.im.atan2(v.re))
            .collect();
        assert!(max_phase_diff(&lib, &oracle) < 1e-10, "seed {seed}");
    }
}

#[test]
fn minimum_error_matches_quadratic_form() {
    let s = toy_8_32();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let mag = random_magnitude(&mut rng, 32);
        let theta = random_phases(&mut rng, 32);
        let dense = dense_iteration(&mag, &theta, 8);
        let x = unit_modulus_step(&s, &mag, &theta).unwrap().samples;
        let e = minimum_error(&s, &mag, &theta, &x).unwrap();
        assert!(e >= 0.0);
        assert!(
            (e - dense.e_quadratic).abs() <= 1e-8 * dense.e_quadratic,
            "seed {seed}"
        );
        assert!((dense.e_residual - dense.e_quadratic).abs() <= 1e-9 * dense.e_residual);
    }
}

#[test]
fn one_iteration_matches_dense_in_both_modes() {
    for seed in 0..25 {
        for mode in [OutOfBand::Zero, OutOfBand::Free] {
            let c = check_run_iteration(seed, mode);
            assert!(c.worst() < 1e-9, "seed {seed} {mode:?}: {c:?}");
        }
    }
}

#[test]
fn realizable_target_is_a_fixed_point() {
    let s = toy_8_32();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_unimodular(&mut rng, 8);
    let spectrum = s.forward(&u).unwrap();
    let target = BandMagnitude::from_values(spectrum.iter().map(|v| v.norm()).collect());
    let free = run_from_signal(&s, &target, &u, &OptimizerConfig::default()).unwrap();
    assert_eq!(free.iterations_run, 1);
    assert_eq!(free.stop_reason, StopReason::Converged);
    assert!(free.e_min[0] < 1e-18);
}

fn toy_instance(seed: u64) -> (Spectral, BandMagnitude, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = toy_grid(&mut rng, 16, 64);
    let mask = grid.in_band_mask();
    let mag = mask
        .iter()
        .map(|&b| if b { rng.gen_range(0.1..1.0) } else { 0.0 })
        .collect();
    let x0 = random_unimodular(&mut rng, grid.n());
    (Spectral::new(grid), BandMagnitude::from_values(mag), x0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn e_min_is_nonincreasing_and_nonnegative(seed in any::<u64>(), zero in any::<bool>()) {
        let (s, target, x0) = toy_instance(seed);
        let cfg = OptimizerConfig {
            max_iterations: 60,
            rel_tolerance: 0.0,
            out_of_band: if zero { OutOfBand::Zero } else { OutOfBand::Free },
            ..OptimizerConfig::default()
        };
        let trace = run_from_signal(&s, &target, &x0, &cfg).unwrap();
        let slack = 1e-9 * trace.e_min[0];
        for w in trace.e_min.windows(2) {
            prop_assert!(w[1] <= w[0] + slack, "{} -> {}", w[0], w[1]);
        }
        prop_assert!(trace.e_min.iter().all(|&e| e >= 0.0));
        prop_assert!(trace.final_signal.max_modulus_error() < 1e-12);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let (s, target, x0) = toy_instance(seed);
        let cfg = OptimizerConfig { max_iterations: 20, ..OptimizerConfig::default() };
        let a = run_from_signal(&s, &target, &x0, &cfg).unwrap();
        let b = run_from_signal(&s, &target, &x0, &cfg).unwrap();
        prop_assert_eq!(a.e_min, b.e_min);
        prop_assert_eq!(a.final_signal, b.final_signal);
        prop_assert_eq!(a.final_spectral_phase, b.final_spectral_phase);
    }
}
