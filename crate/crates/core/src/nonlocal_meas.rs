//! Kraus/POVM description of the two Bell-state meters.
//!
//! Meter M1 (prepared in `(|00> + |11>)/sqrt2`, coupled by CX from the
//! system) reads out the parity of `ZZ`; meter M2 (prepared in
//! `(|01> + |10>)/sqrt2`, coupled by CX onto the system, read in the X
//! basis) reads out `XX`. Neither meter learns the individual spins.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{pauli, tensor_product, ComplexMatrix, DensityMatrix};

pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Which product observable a meter extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeterKind {
    /// M1: up/down basis, observable `Z (x) Z`.
    Zz,
    /// M2: circle/cross basis, observable `X (x) X`.
    Xx,
}

impl MeterKind {
    /// Display glyphs for a two-bit outcome `b0 b1` (0 -> first basis label).
    pub fn outcome_label(self, outcome: usize) -> String {
        let (zero, one) = match self {
            MeterKind::Zz => ('↑', '↓'),
            MeterKind::Xx => ('∘', '×'),
        };
        let glyph = |bit: usize| if bit == 0 { zero } else { one };
        format!("{}{}", glyph((outcome >> 1) & 1), glyph(outcome & 1))
    }
}

/// Four measurement operators indexed by the meter's two-bit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausSet {
    pub meter: MeterKind,
    pub operators: Vec<ComplexMatrix>,
    /// Eigenvalue of the product observable attached to each outcome.
    pub signs: [f64; 4],
}

impl KrausSet {
    pub fn labels(&self) -> Vec<String> {
        (0..4).map(|k| self.meter.outcome_label(k)).collect()
    }

    /// POVM elements `E_k = K_k^dagger K_k`.
    pub fn povm(&self) -> Vec<ComplexMatrix> {
        self.operators.iter().map(|k| &k.adjoint() * k).collect()
    }

    /// `max |sum_k K_k^dagger K_k - I|`
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .povm()
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, e| &acc + e);
        sum.max_abs_diff(&ComplexMatrix::identity(4))
    }

    /// `sum_k sign_k E_k`, the observable this meter measures.
    pub fn observable(&self) -> ComplexMatrix {
        self.povm()
            .iter()
            .zip(self.signs)
            .fold(ComplexMatrix::zeros(4, 4), |acc, (e, s)| {
                &acc + &e.scale_real(s)
            })
    }
}

const PARITY_SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// `M_uu = M_dd = (|00><00| + |11><11|)/sqrt2`,
/// `M_ud = M_du = (|01><01| + |10><10|)/sqrt2`.
pub fn kraus_zz() -> KrausSet {
    let even = ComplexMatrix::real_diagonal(&[1.0, 0.0, 0.0, 1.0]).scale_real(1.0 / SQRT_2);
    let odd = ComplexMatrix::real_diagonal(&[0.0, 1.0, 1.0, 0.0]).scale_real(1.0 / SQRT_2);
    KrausSet {
        meter: MeterKind::Zz,
        operators: vec![even.clone(), odd.clone(), odd, even],
        signs: PARITY_SIGNS,
    }
}

/// `N_oo = -N_xx = (IX + XI)/(2 sqrt2)`, `-N_ox = N_xo = (IX - XI)/(2 sqrt2)`.
pub fn kraus_xx() -> KrausSet {
    let ix = tensor_product(&pauli::id(), &pauli::x());
    let xi = tensor_product(&pauli::x(), &pauli::id());
    let k = 1.0 / (2.0 * SQRT_2);
    let sym = (&ix + &xi).scale_real(k);
    let anti = (&ix - &xi).scale_real(k);
    KrausSet {
        meter: MeterKind::Xx,
        operators: vec![
            sym.clone(),
            anti.scale_real(-1.0),
            anti,
            sym.scale_real(-1.0),
        ],
        signs: PARITY_SIGNS,
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState(format!(
            "expected a two-qubit density matrix, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `p_k = Tr(E_k rho)`
pub fn outcome_probabilities(rho: &DensityMatrix, ks: &KrausSet) -> Result<[f64; 4]> {
    require_two_qubits(rho)?;
    let mut probs = [0.0; 4];
    for (p, e) in probs.iter_mut().zip(ks.povm()) {
        *p = rho.expectation(&e)?;
    }
    Ok(probs)
}

/// `sum_k sign_k p_k`
pub fn expectation_from_probs(probs: &[f64; 4], signs: &[f64; 4]) -> Result<f64> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { sum });
    }
    let value: f64 = probs.iter().zip(signs).map(|(p, s)| p * s).sum();
    Ok(value.clamp(-1.0, 1.0))
}

/// Unconditioned state after the meter is read: `sum_k K_k rho K_k^dagger`.
pub fn post_measurement_state(rho: &DensityMatrix, ks: &KrausSet) -> Result<DensityMatrix> {
    require_two_qubits(rho)?;
    let out = ks
        .operators
        .iter()
        .fold(ComplexMatrix::zeros(4, 4), |acc, k| {
            &acc + &(&(k * rho.matrix()) * &k.adjoint())
        });
    DensityMatrix::new(out)
}

/// State on which the XX-meter probabilities are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum XxSource {
    /// The input state; both meters couple before any readout.
    #[default]
    PreMeasurement,
    /// The state left by the ZZ meter.
    AfterFirstMeter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub p_m1: [f64; 4],
    pub p_m2: [f64; 4],
    pub zz: f64,
    pub xx: f64,
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
}

pub fn run_protocol_analytic(rho: &DensityMatrix) -> Result<ProtocolOutcome> {
    run_protocol_analytic_with(rho, XxSource::default())
}

/// M1 then M2 applied to `rho`; `rho1`, `rho2` are the states after each.
pub fn run_protocol_analytic_with(
    rho: &DensityMatrix,
    source: XxSource,
) -> Result<ProtocolOutcome> {
    let zz_set = kraus_zz();
    let xx_set = kraus_xx();
    let p_m1 = outcome_probabilities(rho, &zz_set)?;
    let rho1 = post_measurement_state(rho, &zz_set)?;
    let p_m2 = match source {
        XxSource::PreMeasurement => outcome_probabilities(rho, &xx_set)?,
        XxSource::AfterFirstMeter => outcome_probabilities(&rho1, &xx_set)?,
    };
    let rho2 = post_measurement_state(&rho1, &xx_set)?;
    Ok(ProtocolOutcome {
        zz: expectation_from_probs(&p_m1, &zz_set.signs)?,
        xx: expectation_from_probs(&p_m2, &xx_set.signs)?,
        p_m1,
        p_m2,
        rho1,
        rho2,
    })
}
