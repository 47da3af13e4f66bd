mod common;

use nwl_core::chsh::{chsh_expectation, chsh_operator, ChshSettings, LHV_BOUND, TSIRELSON_BOUND};
use nwl_core::entanglement::{
    concurrence, concurrence_with, ppt_min_eigenvalue, ConcurrenceMethod, ENTANGLEMENT_TOL,
};
use nwl_core::nonlocal_meas::{expectation_from_probs, kraus_xx, kraus_zz, outcome_probabilities};
use nwl_core::qmath::{tensor_product, DensityMatrix, PureState};
use nwl_core::states::{werner_state, WernerParam};

#[test]
fn ppt_and_concurrence_agree() {
    let mut rng = common::rng(31);
    let mut entangled = 0;
    for _ in 0..500 {
        let rho = common::random_density(&mut rng, 4);
        let c = concurrence(&rho).unwrap();
        let ppt = ppt_min_eigenvalue(&rho).unwrap();
        // skip states too close to the boundary for either test to resolve
        if c.abs() < 1e-7 && ppt.abs() < 1e-7 {
            continue;
        }
        assert_eq!(
            c > ENTANGLEMENT_TOL,
            ppt < -ENTANGLEMENT_TOL,
            "c={c} ppt={ppt}"
        );
        entangled += usize::from(c > ENTANGLEMENT_TOL);
    }
    assert!(entangled > 10);
}

#[test]
fn spin_flip_spectrum_matches_only_on_werner() {
    for k in 0..=20 {
        let p = k as f64 / 20.0;
        let rho = werner_state(WernerParam::new(p).unwrap());
        let a = concurrence_with(&rho, ConcurrenceMethod::Wootters).unwrap();
        let b = concurrence_with(&rho, ConcurrenceMethod::SpinFlipSpectrum).unwrap();
        assert!((a - b).abs() < 1e-9, "{p}: {a} {b}");
    }
    // a product pure state is separable, but its spin-flip spectrum is (1, 0, 0, 0)
    let rho = PureState::basis(2, 0).unwrap().density();
    assert_eq!(
        concurrence_with(&rho, ConcurrenceMethod::Wootters).unwrap(),
        0.0
    );
    assert!(
        (concurrence_with(&rho, ConcurrenceMethod::SpinFlipSpectrum).unwrap() - 1.0).abs() < 1e-12
    );
}

#[test]
fn pure_product_states_have_zero_concurrence() {
    let mut rng = common::rng(37);
    for _ in 0..2000 {
        let a = common::random_density_rank(&mut rng, 2, 1);
        let b = common::random_density_rank(&mut rng, 2, 1);
        let rho = DensityMatrix::new(tensor_product(a.matrix(), b.matrix())).unwrap();
        assert!(concurrence(&rho).unwrap() <= ENTANGLEMENT_TOL);
    }
}

#[test]
fn concurrence_local_unitary_invariant() {
    let mut rng = common::rng(33);
    for _ in 0..200 {
        let rho = common::random_density(&mut rng, 4);
        let u = tensor_product(&common::random_su2(&mut rng), &common::random_su2(&mut rng));
        let moved = common::conjugate(&u, &rho);
        assert!((concurrence(&rho).unwrap() - concurrence(&moved).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn product_states_are_local() {
    let mut rng = common::rng(34);
    let settings = ChshSettings::maximal_violation();
    for _ in 0..500 {
        let rho = common::random_product_state(&mut rng);
        assert!(ppt_min_eigenvalue(&rho).unwrap() >= -ENTANGLEMENT_TOL);
        assert!(concurrence(&rho).unwrap() <= ENTANGLEMENT_TOL);
        assert!(chsh_expectation(&rho, &settings).unwrap().abs() <= LHV_BOUND + 1e-9);
    }
}

#[test]
fn tsirelson_bound() {
    let mut rng = common::rng(35);
    for _ in 0..1000 {
        let rho = common::random_density(&mut rng, 4);
        let alice = [common::random_su2(&mut rng), common::random_su2(&mut rng)]
            .map(|u| &(&u * &nwl_core::qmath::pauli::z()) * &u.adjoint());
        let bob = [common::random_su2(&mut rng), common::random_su2(&mut rng)]
            .map(|u| &(&u * &nwl_core::qmath::pauli::z()) * &u.adjoint());
        let settings = ChshSettings::new(alice, bob).unwrap();
        assert!(chsh_expectation(&rho, &settings).unwrap().abs() <= TSIRELSON_BOUND + 1e-9);
        assert!(
            chsh_expectation(&rho, &ChshSettings::maximal_violation())
                .unwrap()
                .abs()
                <= TSIRELSON_BOUND + 1e-9
        );
    }
}

#[test]
fn chsh_equals_meter_combination() {
    let s = chsh_operator(&ChshSettings::maximal_violation());
    let combo =
        (&kraus_zz().observable() + &kraus_xx().observable()).scale_real(-std::f64::consts::SQRT_2);
    assert!(s.max_abs_diff(&combo) < 1e-12);
    let mut rng = common::rng(36);
    for _ in 0..100 {
        let rho = common::random_density(&mut rng, 4);
        let zz = expectation_from_probs(
            &outcome_probabilities(&rho, &kraus_zz()).unwrap(),
            &kraus_zz().signs,
        )
        .unwrap();
        let xx = expectation_from_probs(
            &outcome_probabilities(&rho, &kraus_xx()).unwrap(),
            &kraus_xx().signs,
        )
        .unwrap();
        let chsh = chsh_expectation(&rho, &ChshSettings::maximal_violation()).unwrap();
        assert!((chsh + std::f64::consts::SQRT_2 * (zz + xx)).abs() < 1e-12);
    }
}
