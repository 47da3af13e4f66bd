//! Nine-setting Pauli tomography of the system after both meters, by
//! linear inversion `rho = 1/4 sum_ij <s_i s_j> s_i (x) s_j`.

use std::collections::BTreeMap;

use serde::Serialize;

use nwl_core::circuit::{
    bitstring, build_tomography_circuit, exact_distribution, sample_distribution, PauliBasis,
};
use nwl_core::nonlocal_meas::run_protocol_analytic;
use nwl_core::qmath::{hermitian_eigen, pauli, tensor_product, ComplexMatrix, HermitianEigen};
use nwl_core::states::{pure_system_state, StateParams};

use crate::commands::{par_map, sub_seed, Sampling};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyRecord {
    /// Bases on `(q0, q1)`, e.g. `"XZ"`.
    pub setting: String,
    /// System readout counts keyed `b0 b1`; absent in exact mode.
    pub counts: Option<BTreeMap<String, u64>>,
    pub estimated_expectation: f64,
    #[serde(skip)]
    system_probs: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyResult {
    pub theta: f64,
    pub phi: f64,
    pub shots: u64,
    pub seed: u64,
    pub exact: bool,
    pub psd_projected: bool,
    pub settings: Vec<TomographyRecord>,
    /// Rows of `[re, im]` pairs.
    pub rho_estimate: Vec<Vec<[f64; 2]>>,
    pub rho_analytic: Vec<Vec<[f64; 2]>>,
    pub max_abs_error: f64,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn measure_setting(
    params: StateParams,
    a: PauliBasis,
    b: PauliBasis,
    sampling: Sampling,
    seed: u64,
) -> Result<TomographyRecord, CliError> {
    let dist = exact_distribution(&build_tomography_circuit(params, a, b))?;
    // last two classical bits are the system readout (q0, q1)
    let (counts, system_probs) = if sampling.exact {
        let mut probs = [0.0; 4];
        for (i, p) in dist.iter().enumerate() {
            probs[i & 3] += p;
        }
        (None, probs)
    } else {
        let sampled = sample_distribution(&dist, sampling.shots, seed);
        let mut tally = [0u64; 4];
        for (i, n) in sampled.to_vec().into_iter().enumerate() {
            tally[i & 3] += n;
        }
        let probs = tally.map(|n| n as f64 / sampling.shots as f64);
        let counts = (0..4).map(|s| (bitstring(s, 2), tally[s])).collect();
        (Some(counts), probs)
    };
    let estimated_expectation = (0..4).map(|s| parity_sign(s) * system_probs[s]).sum();
    Ok(TomographyRecord {
        setting: format!("{}{}", a.label(), b.label()),
        counts,
        estimated_expectation,
        system_probs,
    })
}

/// Reconstructs the two-qubit state from the nine product-basis records,
/// ordered `(a, b)` with `a` major over `X, Y, Z`.
pub fn linear_inversion(records: &[TomographyRecord]) -> ComplexMatrix {
    assert_eq!(records.len(), 9);
    let ops = [pauli::id(), pauli::x(), pauli::y(), pauli::z()];
    // corr[i][j] = <s_i (x) s_j>, index 0 is identity
    let mut corr = [[0.0f64; 4]; 4];
    corr[0][0] = 1.0;
    for (k, rec) in records.iter().enumerate() {
        let (i, j) = (k / 3 + 1, k % 3 + 1);
        let p = rec.system_probs;
        corr[i][j] = rec.estimated_expectation;
        // single-qubit marginals, averaged over the three partner bases
        corr[i][0] += (p[0] + p[1] - p[2] - p[3]) / 3.0;
        corr[0][j] += (p[0] - p[1] + p[2] - p[3]) / 3.0;
    }
    let mut rho = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            rho = &rho + &tensor_product(&ops[i], &ops[j]).scale_real(corr[i][j] / 4.0);
        }
    }
    rho
}

/// Clips negative eigenvalues and restores unit trace.
pub fn project_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, CliError> {
    let eig = hermitian_eigen(m)?;
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let values = if total > 0.0 {
        clipped.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / clipped.len() as f64; clipped.len()]
    };
    Ok(HermitianEigen {
        values,
        vectors: eig.vectors,
    }
    .reconstruct())
}

pub fn tomography(
    params: StateParams,
    sampling: Sampling,
    psd_projection: bool,
) -> Result<TomographyResult, CliError> {
    sampling.validate()?;
    let settings: Vec<(PauliBasis, PauliBasis)> = PauliBasis::ALL
        .iter()
        .flat_map(|&a| PauliBasis::ALL.iter().map(move |&b| (a, b)))
        .collect();
    let records = par_map(&settings, |k, &(a, b)| {
        measure_setting(params, a, b, sampling, sub_seed(sampling.seed, k))
    })?;
    let mut estimate = linear_inversion(&records);
    if psd_projection {
        estimate = project_psd(&estimate)?;
    }
    let analytic = run_protocol_analytic(&pure_system_state(params).density())?.rho2;
    Ok(TomographyResult {
        theta: params.theta,
        phi: params.phi,
        shots: sampling.shots,
        seed: sampling.seed,
        exact: sampling.exact,
        psd_projected: psd_projection,
        max_abs_error: estimate.max_abs_diff(analytic.matrix()),
        rho_estimate: matrix_to_json(&estimate),
        rho_analytic: matrix_to_json(analytic.matrix()),
        settings: records,
    })
}
