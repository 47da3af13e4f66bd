//! CHSH operator `S = (A0 + A1) (x) B0 + (A0 - A1) (x) B1`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};
use crate::qmath::{pauli, tensor_product, ComplexMatrix, DensityMatrix};

/// Local-hidden-variable bound on `|<S>|`.
pub const LHV_BOUND: f64 = 2.0;
/// Quantum maximum `2 sqrt2`.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;
pub const BOUND_TOL: f64 = 1e-9;

/// Alice's and Bob's two dichotomic observables each.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshSettings {
    alice: [ComplexMatrix; 2],
    bob: [ComplexMatrix; 2],
}

impl ChshSettings {
    pub fn new(alice: [ComplexMatrix; 2], bob: [ComplexMatrix; 2]) -> Result<Self> {
        for (who, op) in [
            ("alice", &alice[0]),
            ("alice", &alice[1]),
            ("bob", &bob[0]),
            ("bob", &bob[1]),
        ] {
            if op.rows() != 2 || op.cols() != 2 {
                return Err(Error::InvalidObservable(format!("{who}: not 2x2")));
            }
            if !op.is_hermitian(1e-12) {
                return Err(Error::InvalidObservable(format!("{who}: not Hermitian")));
            }
            if (op * op).max_abs_diff(&ComplexMatrix::identity(2)) > 1e-12 {
                return Err(Error::InvalidObservable(format!(
                    "{who}: does not square to I"
                )));
            }
        }
        Ok(Self { alice, bob })
    }

    /// Alice measures X and Z; Bob measures `P = -(Z + X)/sqrt2` and
    /// `Q = (Z - X)/sqrt2`. Gives `S = -sqrt2 (XX + ZZ)`.
    pub fn maximal_violation() -> Self {
        let (x, z) = (pauli::x(), pauli::z());
        let p = (&z + &x).scale_real(-FRAC_1_SQRT_2);
        let q = (&z - &x).scale_real(FRAC_1_SQRT_2);
        Self::new([x, z], [p, q]).expect("valid observables")
    }

    pub fn alice(&self) -> &[ComplexMatrix; 2] {
        &self.alice
    }

    pub fn bob(&self) -> &[ComplexMatrix; 2] {
        &self.bob
    }
}

impl Default for ChshSettings {
    fn default() -> Self {
        Self::maximal_violation()
    }
}

pub fn chsh_operator(s: &ChshSettings) -> ComplexMatrix {
    let [a0, a1] = &s.alice;
    let [b0, b1] = &s.bob;
    &tensor_product(&(a0 + a1), b0) + &tensor_product(&(a0 - a1), b1)
}

pub fn chsh_expectation(rho: &DensityMatrix, s: &ChshSettings) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState(format!(
            "expected a two-qubit density matrix, got dimension {}",
            rho.dim()
        )));
    }
    rho.expectation(&chsh_operator(s))
}

/// Whether `value` exceeds the local bound 2. Errors past Tsirelson.
pub fn violates_lhv(value: f64) -> Result<bool> {
    if !value.is_finite() || value.abs() > TSIRELSON_BOUND + BOUND_TOL {
        return Err(Error::OutOfPhysicalRange { value });
    }
    Ok(value.abs() > LHV_BOUND + BOUND_TOL)
}
