use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nwl_core::nonlocal_meas::{expectation_from_probs, kraus_xx, outcome_probabilities};
use nwl_core::qmath::DensityMatrix;
use nwl_core::states::{pure_system_state, StateParams};
use nwl_core::vew::{
    penalized_objective, separable_references, train, TrainConfig, TrainResult, WitnessFamily,
    WitnessParams,
};

fn train_pure(theta: f64, phi: f64, cfg: &TrainConfig) -> TrainResult {
    let rho = pure_system_state(StateParams::new(theta, phi)).density();
    train(
        &rho,
        WitnessFamily::ChshForm,
        &separable_references(false),
        cfg,
    )
    .unwrap()
}

fn default_cfg() -> TrainConfig {
    TrainConfig::for_family(WitnessFamily::ChshForm, 0)
}

/// Brute-force minimum of the penalized objective over a polar grid of the
/// capped disk, returning the unpenalized witness value at the best point.
fn grid_oracle(rho: &DensityMatrix, cfg: &TrainConfig) -> f64 {
    let refs = separable_references(false);
    let mut best = (f64::INFINITY, 0.0);
    let radii = 100;
    let angles = 1000;
    for r in 0..=radii {
        let rad = cfg.norm_cap * r as f64 / radii as f64;
        for a in 0..angles {
            let t = 2.0 * PI * a as f64 / angles as f64;
            let params =
                WitnessParams::new(WitnessFamily::ChshForm, vec![rad * t.cos(), rad * t.sin()])
                    .unwrap();
            let f = penalized_objective(&params, rho, &refs, cfg).unwrap();
            if f < best.0 {
                best = (f, nwl_core::vew::cost(&params, rho).unwrap());
            }
        }
    }
    best.1
}

#[test]
fn matches_grid_oracle() {
    let cfg = default_cfg();
    for (theta, phi) in [
        (FRAC_PI_4, 0.0),
        (PI / 8.0, FRAC_PI_4),
        (3.0 * PI / 8.0, 3.0 * FRAC_PI_4),
    ] {
        let rho = pure_system_state(StateParams::new(theta, phi)).density();
        let oracle = grid_oracle(&rho, &cfg);
        let trained = train_pure(theta, phi, &cfg).witness_value;
        assert!(
            (trained - oracle).abs() < 1e-3,
            "{theta} {phi}: {trained} vs {oracle}"
        );
    }
}

#[test]
fn optimum_tracks_xx_correlation() {
    let cfg = default_cfg();
    for k in 0..=8 {
        let theta = k as f64 * PI / 8.0;
        let rho = pure_system_state(StateParams::new(theta, 0.3)).density();
        let xx = expectation_from_probs(
            &outcome_probabilities(&rho, &kraus_xx()).unwrap(),
            &kraus_xx().signs,
        )
        .unwrap();
        let r = train_pure(theta, 0.3, &cfg);
        assert!(
            (r.witness_value + std::f64::consts::SQRT_2 * cfg.norm_cap * xx.abs()).abs() < 1e-3
        );
    }
}

#[test]
fn monotone_in_entanglement() {
    let cfg = default_cfg();
    let values: Vec<f64> = (0..=8)
        .map(|k| train_pure(k as f64 * FRAC_PI_4 / 8.0, 0.0, &cfg).witness_value)
        .collect();
    for w in values.windows(2) {
        assert!(w[1] <= w[0] + 10.0 * cfg.tol, "{values:?}");
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((values[8] - min).abs() < 10.0 * cfg.tol);
}

#[test]
fn cap_scales_the_witness() {
    for k in [0.5, 2.0, 3.0] {
        let base = default_cfg();
        let scaled = TrainConfig {
            norm_cap: base.norm_cap * k,
            ..base.clone()
        };
        for (theta, phi) in [(FRAC_PI_4, 0.0), (0.3, 1.0)] {
            let a = train_pure(theta, phi, &base).witness_value;
            let b = train_pure(theta, phi, &scaled).witness_value;
            assert!((b - k * a).abs() < 2.0 * base.tol, "k={k}: {a} {b}");
            assert!(a < 0.0 && b < 0.0);
        }
    }
}

#[test]
fn separable_constraints_hold() {
    let cfg = default_cfg();
    for k in 0..=8 {
        for j in 0..4 {
            let r = train_pure(k as f64 * PI / 8.0, j as f64 * FRAC_PI_4, &cfg);
            assert!(
                r.constraint_residuals.iter().all(|&c| c <= 10.0 * cfg.tol),
                "{:?}",
                r.constraint_residuals
            );
            let norm = r.alpha_star.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(norm <= cfg.norm_cap + 1e-9);
        }
    }
}

#[test]
fn undetectable_states_give_zero() {
    let cfg = default_cfg();
    for theta in [0.0, FRAC_PI_2, PI] {
        assert!(train_pure(theta, 0.0, &cfg).witness_value.abs() < 1e-3);
    }
    for k in 0..=8 {
        assert!(
            train_pure(k as f64 * PI / 8.0, FRAC_PI_2, &cfg)
                .witness_value
                .abs()
                < 1e-3
        );
    }
}

#[test]
fn pauli_family_trains_below_zero_on_bell_state() {
    let rho = pure_system_state(StateParams::new(FRAC_PI_4, 0.0)).density();
    let cfg = TrainConfig::for_family(WitnessFamily::PauliForm, 7);
    let r = train(
        &rho,
        WitnessFamily::PauliForm,
        &separable_references(false),
        &cfg,
    )
    .unwrap();
    assert!(r.witness_value < -1.0, "{}", r.witness_value);
    assert!(r.constraint_residuals.iter().all(|&c| c < 1e-3));
    assert_eq!(r.seed, 7);
}
