mod common;

use common::max_abs;
use hqrc::esn::{run_esn, run_esn_from, EsnConfig, EsnState};
use hqrc::experiment::linear_input_gain;
use hqrc::linalg::spectral_radius;
use hqrc::pipeline::*;
use hqrc::qreservoir::{run_reservoir, EnsembleSize, ReservoirConfig, ReservoirParams};
use hqrc::tasks::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const PLAN: PhasePlan = PhasePlan {
    washout: 100,
    train: 500,
    test: 200,
};

fn reservoir(n: usize, seed: u64, ensemble: EnsembleSize) -> ReservoirConfig {
    let params = ReservoirParams {
        n_modes: n,
        ensemble,
        ..ReservoirParams::default()
    };
    ReservoirConfig::sample(params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn features(seq: &InputSequence, cfg: &ReservoirConfig, noise_seed: u64) -> DMatrix<f64> {
    let inj = seq.injections(cfg.n_modes()).unwrap();
    run_reservoir(&inj, cfg, &mut ChaCha8Rng::seed_from_u64(noise_seed)).unwrap()
}

#[test]
fn esn_forgets_initial_state_at_default_gains() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inputs = DMatrix::from_fn(600, 3, |_, _| rng.random_range(0.0..10.0));
    for (rho, iota) in [(0.7, linear_input_gain()), (0.1, 0.01)] {
        let cfg = EsnConfig::sample(45, 3, rho, iota, &mut rng).unwrap();
        assert!((spectral_radius(cfg.weights()).unwrap() - 1.0).abs() < 1e-8);
        let a = run_esn(&inputs, &cfg).unwrap();
        let b = run_esn_from(EsnState::new(DVector::from_element(45, 1.0)), &inputs, &cfg).unwrap();
        assert!(a.iter().all(|v| *v > 0.0));
        assert!(max_abs(&(a.rows(500, 100) - b.rows(500, 100))) <= 1e-8);
    }
}

#[test]
fn target_series_are_exact_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let seq = sample_inputs(InputKind::SingleMode, 50, &mut rng).unwrap();
    let m0 = build_targets(&seq, &TaskSpec { kind: TaskKind::Trace, tau: 0, tau_prime: 0 }).unwrap();
    let m3 = build_targets(&seq, &TaskSpec { kind: TaskKind::Trace, tau: 3, tau_prime: 2 }).unwrap();
    for t in 3..50 {
        assert_eq!(m3.1[(t, 0)], m0.1[(t - 3, 0)]);
        assert_eq!(m3.0[(t, 0)], m0.0[(t - 2, 0)]);
    }
    assert!(m3.1[(2, 0)].is_nan());
}

#[test]
fn entanglement_target_vanishes_for_separable_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let seq = sample_inputs(InputKind::TwoMode, 500, &mut rng).unwrap();
    for (p, s) in seq.params().iter().zip(seq.sigmas()) {
        let StateParams::TwoModeSqueezedThermal { n_th, s: sq } = *p else { panic!() };
        let e = hqrc::gaussian::log_negativity(s).unwrap();
        assert!(e >= 0.0);
        if (1.0 + 2.0 * n_th) * (-2.0 * sq).exp() >= 1.0 {
            assert_eq!(e, 0.0);
        }
    }
}

#[test]
fn training_never_sees_test_rows() {
    let n = 5;
    let cfg = reservoir(n, 4, EnsembleSize::Finite(10_000));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let seq = sample_inputs(InputKind::SingleMode, PLAN.total(), &mut rng).unwrap();
    // Replace every test-phase input by a different state.
    let mut params = seq.params().to_vec();
    for p in &mut params[PLAN.test_rows()] {
        *p = StateParams::SqueezedThermal { n_th: 4.0, r: 0.1, phi: 1.0 };
    }
    let altered = InputSequence::from_params(InputKind::SingleMode, params).unwrap();
    let task = TaskSpec::with_default_split(TaskKind::Memory, 3);
    let esn = EsnConfig::sample(12, 3, 0.7, linear_input_gain(), &mut rng).unwrap();

    let fa = features(&seq, &cfg, 6);
    let fb = features(&altered, &cfg, 6);
    assert_eq!(fa.rows(0, PLAN.washout + PLAN.train), fb.rows(0, PLAN.washout + PLAN.train));
    let (ha, ea) = train_hybrid_on_features(&fa, &seq, &task, &esn, &PLAN, 0.0).unwrap();
    let (hb, eb) = train_hybrid_on_features(&fb, &altered, &task, &esn, &PLAN, 0.0).unwrap();
    assert_eq!(ha.w2, hb.w2);
    assert_eq!(ha.w_out, hb.w_out);
    assert_ne!(ea.value, eb.value);

    let (wa, _) = train_qrc_on_features(&[&fa], &seq, &task, &PLAN, 1e-6).unwrap();
    let (wb, _) = train_qrc_on_features(&[&fb], &altered, &task, &PLAN, 1e-6).unwrap();
    assert_eq!(wa, wb);
}

#[test]
fn constant_esn_reduces_hybrid_to_single_readout() {
    let n = 5;
    let cfg = reservoir(n, 7, EnsembleSize::Infinite);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let seq = sample_inputs(InputKind::SingleMode, PLAN.total(), &mut rng).unwrap();
    let f = features(&seq, &cfg, 9);
    for kind in [TaskKind::Trace, TaskKind::Determinant] {
        let task = TaskSpec::with_default_split(kind, 2);
        // Zero gains pin every neuron at ln 2.
        let esn = EsnConfig::sample(10, kind.qrc_target_dim(), 0.0, 0.0, &mut rng).unwrap();
        let (_, hybrid) = train_hybrid_on_features(&f, &seq, &task, &esn, &PLAN, 0.0).unwrap();
        let (_, single) = train_qrc_on_features(&[&f], &seq, &task, &PLAN, 0.0).unwrap();
        assert!(
            (hybrid.value - single.value).abs() < 1e-8 * (1.0 + single.value),
            "{kind}: {} vs {}",
            hybrid.value,
            single.value
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn readout_minimizes_training_error(seed in any::<u64>(), ridge_on in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(120, 6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DMatrix::from_fn(120, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = if ridge_on { 1e-3 } else { 0.0 };
        let w = train_readout(&x, &y, lambda).unwrap();
        let loss = |w: &DMatrix<f64>| {
            let e = apply_readout(&x, w) - &y;
            e.norm_squared() + lambda * w.norm_squared()
        };
        let base = loss(&w);
        for _ in 0..10 {
            let mut d = DMatrix::from_fn(w.nrows(), w.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
            d *= 1e-3 / d.norm();
            prop_assert!(loss(&(&w + d)) >= base - 1e-12);
        }
    }

    #[test]
    fn training_nmse_is_below_zero_predictor(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = with_bias(&DMatrix::from_fn(300, 8, |_, _| rng.sample::<f64, _>(StandardNormal)));
        let y = DMatrix::from_fn(300, 1, |r, _| x[(r, 0)] * 0.3 + rng.sample::<f64, _>(StandardNormal));
        let mean = y.mean();
        let yc = y.map(|v| v - mean);
        let w = train_readout(&x, &yc, 0.0).unwrap();
        let out = apply_readout(&x, &w);
        let e = nmse(out.as_slice(), yc.as_slice()).unwrap();
        prop_assert!(e <= 1.0 + 1e-12);
        prop_assert_eq!(nmse(&vec![0.0; 300], yc.as_slice()).unwrap(), 1.0);
    }
}

#[test]
fn entanglement_with_single_mode_reservoir_is_rejected() {
    assert!(matches!(TaskKind::Entanglement.check_modes(1), Err(hqrc::Error::TaskUndefined(_))));
    assert!(TaskKind::Entanglement.check_modes(3).is_ok());
}
