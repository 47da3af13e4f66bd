//! Data behind each subcommand, independent of output formatting.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use nwl_core::chsh::{chsh_expectation, ChshSettings};
use nwl_core::circuit::{
    build_protocol_circuit, exact_distribution, marginalize, marginalize_distribution,
    sample_distribution, OutcomeCounts,
};
use nwl_core::entanglement::{classify_werner, concurrence, ppt_min_eigenvalue};
use nwl_core::nonlocal_meas::{expectation_from_probs, kraus_xx, kraus_zz, run_protocol_analytic};
use nwl_core::states::{pure_system_state, werner_state, StateParams, WernerParam};
use nwl_core::vew::{separable_references, train, TrainConfig, TrainResult, WitnessFamily};

use crate::CliError;

pub const THREADS_ENV: &str = "NWL_THREADS";

/// Runs `f` over `items` on a pool capped by `NWL_THREADS`, preserving order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R, CliError> + Sync + Send,
{
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::InvalidArgs(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::InvalidArgs(e.to_string()))?;
    pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
}

/// Per-point seed, independent of scheduling.
pub fn sub_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub shots: u64,
    pub seed: u64,
    /// Use the exact distribution in place of sampled frequencies.
    pub exact: bool,
}

impl Sampling {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.shots == 0 {
            return Err(CliError::InvalidArgs("--shots must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeterEstimate {
    pub distribution: Vec<f64>,
    pub counts: Option<OutcomeCounts>,
    pub p_m1: [f64; 4],
    pub p_m2: [f64; 4],
    pub zz: f64,
    pub xx: f64,
}

/// Runs the protocol circuit once and reads both meters.
pub fn estimate_meters(
    params: StateParams,
    shots: u64,
    seed: u64,
    exact: bool,
) -> Result<MeterEstimate, CliError> {
    let dist = exact_distribution(&build_protocol_circuit(params))?;
    let (counts, (p_m1, p_m2)) = if exact {
        (None, marginalize_distribution(&dist)?)
    } else {
        let counts = sample_distribution(&dist, shots, seed);
        let marginals = marginalize(&counts)?;
        (Some(counts), marginals)
    };
    Ok(MeterEstimate {
        zz: expectation_from_probs(&p_m1, &kraus_zz().signs)?,
        xx: expectation_from_probs(&p_m2, &kraus_xx().signs)?,
        distribution: dist,
        counts,
        p_m1,
        p_m2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshSweepRow {
    pub theta: f64,
    pub phi: f64,
    pub chsh_analytic: f64,
    pub chsh_sampled: f64,
    pub zz_sampled: f64,
    pub xx_sampled: f64,
    pub ppt: f64,
    pub concurrence: f64,
    pub square_error: f64,
}

/// Grid points in theta-major order.
pub fn chsh_sweep(
    thetas: &[f64],
    phis: &[f64],
    sampling: Sampling,
) -> Result<Vec<ChshSweepRow>, CliError> {
    sampling.validate()?;
    if thetas.is_empty() || phis.is_empty() {
        return Err(CliError::InvalidArgs("grids must be non-empty".into()));
    }
    let points: Vec<StateParams> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| StateParams::new(t, p)))
        .collect();
    let settings = ChshSettings::maximal_violation();
    par_map(&points, |i, &params| {
        let rho = pure_system_state(params).density();
        let chsh_analytic = chsh_expectation(&rho, &settings)?;
        let est = estimate_meters(
            params,
            sampling.shots,
            sub_seed(sampling.seed, i),
            sampling.exact,
        )?;
        let chsh_sampled = -SQRT_2 * (est.zz + est.xx);
        Ok(ChshSweepRow {
            theta: params.theta,
            phi: params.phi,
            chsh_analytic,
            chsh_sampled,
            zz_sampled: est.zz,
            xx_sampled: est.xx,
            ppt: ppt_min_eigenvalue(&rho)?,
            concurrence: concurrence(&rho)?,
            square_error: (chsh_sampled - chsh_analytic).powi(2),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitRun {
    pub theta: f64,
    pub phi: f64,
    pub shots: u64,
    pub seed: u64,
    pub exact: bool,
    /// Absent in exact mode.
    pub counts: Option<BTreeMap<String, u64>>,
    /// Sampled frequencies, or exact probabilities in exact mode.
    pub probabilities: BTreeMap<String, f64>,
    #[serde(rename = "P_M1")]
    pub p_m1: [f64; 4],
    #[serde(rename = "P_M2")]
    pub p_m2: [f64; 4],
    pub m1_labels: Vec<String>,
    pub m2_labels: Vec<String>,
    pub zz: f64,
    pub xx: f64,
}

pub fn circuit_run(params: StateParams, sampling: Sampling) -> Result<CircuitRun, CliError> {
    sampling.validate()?;
    let est = estimate_meters(params, sampling.shots, sampling.seed, sampling.exact)?;
    let probabilities = match &est.counts {
        Some(c) => c
            .counts
            .iter()
            .map(|(k, &n)| (k.clone(), n as f64 / c.shots as f64))
            .collect(),
        None => est
            .distribution
            .iter()
            .enumerate()
            .map(|(i, &p)| (nwl_core::circuit::bitstring(i, 4), p))
            .collect(),
    };
    Ok(CircuitRun {
        theta: params.theta,
        phi: params.phi,
        shots: sampling.shots,
        seed: sampling.seed,
        exact: sampling.exact,
        counts: est.counts.map(|c| c.counts),
        probabilities,
        p_m1: est.p_m1,
        p_m2: est.p_m2,
        m1_labels: kraus_zz().labels(),
        m2_labels: kraus_xx().labels(),
        zz: est.zz,
        xx: est.xx,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WernerSweepRow {
    pub p: f64,
    pub chsh: f64,
    pub ppt: f64,
    pub concurrence: f64,
    pub region: String,
    pub zz: f64,
    pub xx: f64,
    pub rho2_corner: f64,
    pub rho2_concurrence: f64,
}

pub fn werner_sweep(ps: &[f64]) -> Result<Vec<WernerSweepRow>, CliError> {
    if ps.is_empty() {
        return Err(CliError::InvalidArgs("p grid must be non-empty".into()));
    }
    let settings = ChshSettings::maximal_violation();
    par_map(ps, |_, &p| {
        let rho = werner_state(WernerParam::new(p)?);
        let out = run_protocol_analytic(&rho)?;
        Ok(WernerSweepRow {
            p,
            chsh: chsh_expectation(&rho, &settings)?,
            ppt: ppt_min_eigenvalue(&rho)?,
            concurrence: concurrence(&rho)?,
            region: classify_werner(p)?.region.to_string(),
            zz: out.zz,
            xx: out.xx,
            rho2_corner: out.rho2.matrix()[(0, 3)].re,
            rho2_concurrence: concurrence(&out.rho2)?,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Pure { theta: f64, phi: f64 },
    Werner { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VewTrainOutput {
    pub state: StateSpec,
    #[serde(flatten)]
    pub result: TrainResult,
}

/// Werner runs add `I/4` to the separable reference set.
pub fn vew_train(
    state: StateSpec,
    family: WitnessFamily,
    cfg: &TrainConfig,
) -> Result<VewTrainOutput, CliError> {
    let (rho, refs) = match state {
        StateSpec::Pure { theta, phi } => (
            pure_system_state(StateParams::new(theta, phi)).density(),
            separable_references(false),
        ),
        StateSpec::Werner { p } => (
            werner_state(WernerParam::new(p)?),
            separable_references(true),
        ),
    };
    Ok(VewTrainOutput {
        state,
        result: train(&rho, family, &refs, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn sub_seeds_distinct() {
        assert_eq!(sub_seed(0, 5), 5);
        assert_eq!(sub_seed(7, 0), 7);
        assert_ne!(sub_seed(7, 1), sub_seed(7, 2));
    }

    #[test]
    fn exact_sweep_rows() {
        let rows = chsh_sweep(
            &[0.0, FRAC_PI_4],
            &[0.0],
            Sampling {
                shots: 1,
                seed: 0,
                exact: true,
            },
        )
        .unwrap();
        assert!((rows[0].chsh_analytic + SQRT_2).abs() < 1e-12);
        assert!(rows[0].concurrence.abs() < 1e-12);
        assert!((rows[1].chsh_analytic + 2.0 * SQRT_2).abs() < 1e-12);
        assert!((rows[1].ppt + 0.5).abs() < 1e-9);
        assert!((rows[1].concurrence - 1.0).abs() < 1e-9);
        for r in &rows {
            assert!(r.square_error < 1e-20);
        }
    }

    #[test]
    fn zero_shots_rejected() {
        let s = Sampling {
            shots: 0,
            seed: 0,
            exact: false,
        };
        assert!(matches!(
            chsh_sweep(&[0.0], &[0.0], s),
            Err(CliError::InvalidArgs(_))
        ));
        assert!(circuit_run(StateParams::new(0.0, 0.0), s).is_err());
    }

    #[test]
    fn werner_rows() {
        let rows = werner_sweep(&[1.0 / 3.0, std::f64::consts::FRAC_1_SQRT_2, 1.0]).unwrap();
        assert!(rows[0].ppt.abs() < 1e-12 && rows[0].concurrence.abs() < 1e-9);
        assert_eq!(rows[0].region, "I");
        assert!((rows[1].chsh - 2.0).abs() < 1e-12);
        assert_eq!(rows[1].region, "II");
        assert!((rows[2].chsh - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((rows[2].concurrence - 1.0).abs() < 1e-9);
        assert!((rows[2].rho2_corner + 0.5).abs() < 1e-12);
        assert!(werner_sweep(&[1.5]).is_err());
    }

    #[test]
    fn circuit_run_exact() {
        let run = circuit_run(
            StateParams::new(PI / 4.0, 0.0),
            Sampling {
                shots: 10,
                seed: 1,
                exact: true,
            },
        )
        .unwrap();
        assert!(run.counts.is_none());
        assert!((run.probabilities["1111"] - 0.25).abs() < 1e-12);
        assert!((run.zz - 1.0).abs() < 1e-12 && (run.xx - 1.0).abs() < 1e-12);
    }
}
