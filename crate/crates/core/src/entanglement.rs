//! Two-qubit entanglement measures and the Werner-state region map.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    hermitian_eigenvalues, partial_transpose_b, pauli, psd_sqrt, spectral_noise_floor,
    tensor_product, ComplexMatrix, DensityMatrix,
};

/// Threshold below which a PPT eigenvalue counts as negative.
pub const ENTANGLEMENT_TOL: f64 = 1e-9;

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState(format!(
            "expected a two-qubit density matrix, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of the partial transpose; negative iff entangled.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let pt = partial_transpose_b(rho)?;
    Ok(*hermitian_eigenvalues(&pt)?.last().expect("4 eigenvalues"))
}

/// `(Y (x) Y) rho* (Y (x) Y)`
pub fn spin_flip(rho: &DensityMatrix) -> ComplexMatrix {
    let yy = tensor_product(&pauli::y(), &pauli::y());
    &(&yy * &rho.matrix().conj()) * &yy
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcurrenceMethod {
    /// Square roots of the eigenvalues of `rho rho~`, via `sqrt(rho) rho~ sqrt(rho)`.
    #[default]
    Wootters,
    /// Eigenvalues of the spin-flipped state itself, no product and no roots.
    SpinFlipSpectrum,
}

const RHO_TILDE_NOISE: f64 = 16.0;

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    concurrence_with(rho, ConcurrenceMethod::default())
}

pub fn concurrence_with(rho: &DensityMatrix, method: ConcurrenceMethod) -> Result<f64> {
    require_two_qubits(rho)?;
    let flipped = spin_flip(rho);
    let lambdas = match method {
        ConcurrenceMethod::Wootters => {
            let root = psd_sqrt(rho.matrix())?;
            let r = &(&root * &flipped) * &root;
            let mu = hermitian_eigenvalues(&r)?;
            // rounding in R scales with Tr(rho) = 1, not with its own spectrum
            let floor =
                spectral_noise_floor(&mu).max(RHO_TILDE_NOISE * mu.len() as f64 * f64::EPSILON);
            mu.iter()
                .map(|&m| if m > floor { m.sqrt() } else { 0.0 })
                .collect::<Vec<_>>()
        }
        ConcurrenceMethod::SpinFlipSpectrum => hermitian_eigenvalues(&flipped)?,
    };
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    Ok(c.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub ppt_min_eigenvalue: f64,
    pub concurrence: f64,
    pub is_entangled: bool,
}

pub fn report(rho: &DensityMatrix) -> Result<EntanglementReport> {
    let ppt = ppt_min_eigenvalue(rho)?;
    Ok(EntanglementReport {
        ppt_min_eigenvalue: ppt,
        concurrence: concurrence(rho)?,
        is_entangled: ppt < -ENTANGLEMENT_TOL,
    })
}

/// Werner-state regimes: I separable, II entangled but CHSH-local,
/// III CHSH-violating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerRegion {
    pub region: Region,
    pub p: f64,
}

pub const SEPARABILITY_BOUNDARY: f64 = 1.0 / 3.0;
pub const NONLOCALITY_BOUNDARY: f64 = FRAC_1_SQRT_2;

/// Closed on the right: `p = 1/3` is region I, `p = 1/sqrt2` region II.
pub fn classify_werner(p: f64) -> Result<WernerRegion> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            value: p,
            min: 0.0,
            max: 1.0,
        });
    }
    let region = if p <= SEPARABILITY_BOUNDARY {
        Region::I
    } else if p <= NONLOCALITY_BOUNDARY {
        Region::II
    } else {
        Region::III
    };
    Ok(WernerRegion { region, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{pure_system_state, werner_state, StateParams, WernerParam};
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn pure_family_measures() {
        for i in 0..=16 {
            let theta = i as f64 * PI / 16.0;
            let rho = pure_system_state(StateParams::new(theta, 0.8)).density();
            let s = (2.0 * theta).sin().abs();
            assert!(
                (ppt_min_eigenvalue(&rho).unwrap() + s / 2.0).abs() < 1e-9,
                "theta {theta}"
            );
            assert!(
                (concurrence(&rho).unwrap() - s).abs() < 1e-9,
                "theta {theta}"
            );
        }
    }

    #[test]
    fn werner_measures() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let rho = werner_state(WernerParam::new(p).unwrap());
            assert!((ppt_min_eigenvalue(&rho).unwrap() - (1.0 - 3.0 * p) / 4.0).abs() < 1e-9);
            let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!((concurrence(&rho).unwrap() - want).abs() < 1e-9, "p {p}");
        }
    }

    #[test]
    fn mixed_and_product() {
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((ppt_min_eigenvalue(&mixed).unwrap() - 0.25).abs() < 1e-12);
        let zero = pure_system_state(StateParams::new(0.0, 0.0)).density();
        assert_eq!(concurrence(&zero).unwrap(), 0.0);
    }

    #[test]
    fn reports() {
        let bell = pure_system_state(StateParams::new(FRAC_PI_4, 0.0)).density();
        let r = report(&bell).unwrap();
        assert!((r.ppt_min_eigenvalue + 0.5).abs() < 1e-9 && (r.concurrence - 1.0).abs() < 1e-9);
        assert!(r.is_entangled);

        let w = werner_state(WernerParam::new(1.0 / 3.0).unwrap());
        let r = report(&w).unwrap();
        assert!(r.ppt_min_eigenvalue.abs() < 1e-9 && r.concurrence.abs() < 1e-9);
        assert!(!r.is_entangled);

        let r = report(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(
            (r.ppt_min_eigenvalue - 0.25).abs() < 1e-12 && r.concurrence == 0.0 && !r.is_entangled
        );
    }

    #[test]
    fn regions() {
        assert_eq!(classify_werner(0.2).unwrap().region, Region::I);
        assert_eq!(classify_werner(0.5).unwrap().region, Region::II);
        assert_eq!(classify_werner(0.9).unwrap().region, Region::III);
        assert_eq!(classify_werner(1.0 / 3.0).unwrap().region, Region::I);
        assert_eq!(classify_werner(FRAC_1_SQRT_2).unwrap().region, Region::II);
        assert!(classify_werner(1.2).is_err());
        assert!(classify_werner(-0.1).is_err());
    }

    #[test]
    fn spin_flip_variant_differs_from_wootters() {
        // For the singlet the spin-flipped state equals the state, so the
        // spectrum-only variant gives 1 - 0 = 1 as well; for I/4 it gives 0.
        // They part ways on partially entangled pure states.
        let rho = pure_system_state(StateParams::new(0.3, 0.0)).density();
        let literal = concurrence_with(&rho, ConcurrenceMethod::SpinFlipSpectrum).unwrap();
        let standard = concurrence(&rho).unwrap();
        assert!((standard - 0.6f64.sin()).abs() < 1e-9);
        assert!((literal - standard).abs() > 1e-3);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(ppt_min_eigenvalue(&rho).is_err());
        assert!(concurrence(&rho).is_err());
    }
}
