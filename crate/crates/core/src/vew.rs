//! Variational entanglement witnesses.
//!
//! A witness family `W(alpha)` is trained by minimizing `Tr[W(alpha) rho]`
//! while holding `Tr[W(alpha) rho_sep]` at zero on a reference set of
//! separable states. The equality constraints enter as an absolute-value
//! penalty; the parameter norm is held at or below `norm_cap`.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{pauli, tensor_product, ComplexMatrix, DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessFamily {
    /// `-sqrt2 (a1 ZZ + a2 XX)`
    ChshForm,
    /// `a1 XX + a2 YY + a3 ZZ`
    PauliForm,
}

impl WitnessFamily {
    pub fn n_params(self) -> usize {
        match self {
            WitnessFamily::ChshForm => 2,
            WitnessFamily::PauliForm => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub family: WitnessFamily,
    pub alpha: Vec<f64>,
}

impl WitnessParams {
    pub fn new(family: WitnessFamily, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != family.n_params() {
            return Err(Error::LengthMismatch {
                expected: family.n_params(),
                got: alpha.len(),
            });
        }
        Ok(Self { family, alpha })
    }

    pub fn norm(&self) -> f64 {
        l2(&self.alpha)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn pauli_pair(p: fn() -> ComplexMatrix) -> ComplexMatrix {
    tensor_product(&p(), &p())
}

pub fn witness_matrix(params: &WitnessParams) -> Result<ComplexMatrix> {
    if params.alpha.len() != params.family.n_params() {
        return Err(Error::LengthMismatch {
            expected: params.family.n_params(),
            got: params.alpha.len(),
        });
    }
    let a = &params.alpha;
    Ok(match params.family {
        WitnessFamily::ChshForm => {
            let zz = pauli_pair(pauli::z).scale_real(a[0]);
            let xx = pauli_pair(pauli::x).scale_real(a[1]);
            (&zz + &xx).scale_real(-SQRT_2)
        }
        WitnessFamily::PauliForm => {
            let xx = pauli_pair(pauli::x).scale_real(a[0]);
            let yy = pauli_pair(pauli::y).scale_real(a[1]);
            let zz = pauli_pair(pauli::z).scale_real(a[2]);
            &(&xx + &yy) + &zz
        }
    })
}

/// `Tr[W(alpha) rho]`
pub fn cost(params: &WitnessParams, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState(format!(
            "expected a two-qubit density matrix, got dimension {}",
            rho.dim()
        )));
    }
    rho.expectation(&witness_matrix(params)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub initial_alpha: Vec<f64>,
    pub max_evals: usize,
    /// Target accuracy in `alpha`; the last trust radius is `tol / 10`.
    pub tol: f64,
    pub penalty_weight: f64,
    pub norm_cap: f64,
    pub seed: u64,
    /// Initial trust-region radius.
    pub initial_step: f64,
}

impl TrainConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_EVALS: usize = 2000;
    pub const DEFAULT_PENALTY_WEIGHT: f64 = 10.0;
    pub const DEFAULT_NORM_CAP: f64 = SQRT_2;
    pub const DEFAULT_INITIAL_STEP: f64 = 0.5;

    /// Defaults for `family`: ChshForm starts at `(4, 0)`, PauliForm at a
    /// seeded uniform draw from `[-1, 1]^3`.
    pub fn for_family(family: WitnessFamily, seed: u64) -> Self {
        let initial_alpha = match family {
            WitnessFamily::ChshForm => vec![4.0, 0.0],
            WitnessFamily::PauliForm => {
                let mut rng = SplitMix64::seed_from_u64(seed);
                (0..3).map(|_| rng.random_range(-1.0..=1.0)).collect()
            }
        };
        Self {
            initial_alpha,
            max_evals: Self::DEFAULT_MAX_EVALS,
            tol: Self::DEFAULT_TOL,
            penalty_weight: Self::DEFAULT_PENALTY_WEIGHT,
            norm_cap: Self::DEFAULT_NORM_CAP,
            seed,
            initial_step: Self::DEFAULT_INITIAL_STEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidState(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("tol", self.tol)?;
        positive("penalty_weight", self.penalty_weight)?;
        positive("norm_cap", self.norm_cap)?;
        positive("initial_step", self.initial_step)?;
        Ok(())
    }
}

/// `cost + w * sum_s |Tr[W rho_s]| + w * max(0, |alpha| - cap)^2`
pub fn penalized_objective(
    params: &WitnessParams,
    rho: &DensityMatrix,
    separable_refs: &[DensityMatrix],
    cfg: &TrainConfig,
) -> Result<f64> {
    let w = witness_matrix(params)?;
    let mut value = rho.expectation(&w)?;
    for s in separable_refs {
        value += cfg.penalty_weight * s.expectation(&w)?.abs();
    }
    let excess = (params.norm() - cfg.norm_cap).max(0.0);
    Ok(value + cfg.penalty_weight * excess * excess)
}

/// The four computational-basis projectors, plus `I/4` when requested.
pub fn separable_references(include_maximally_mixed: bool) -> Vec<DensityMatrix> {
    let mut refs: Vec<DensityMatrix> = (0..4)
        .map(|i| PureState::basis(2, i).expect("index < 4").density())
        .collect();
    if include_maximally_mixed {
        refs.push(DensityMatrix::maximally_mixed(4));
    }
    refs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

/// Derivative-free minimization with linear models over an `n + 1` point
/// simplex and a shrinking trust-region radius, in the manner of COBYLA
/// without explicit constraints (they are expected inside `objective`).
/// When the model step fails on fresh geometry the coordinate directions
/// are polled before the radius shrinks, which keeps progress along kinks
/// of nonsmooth penalties.
///
/// Starts from radius `cfg.initial_step` and stops once the radius drops
/// below `cfg.tol / 10` or `cfg.max_evals` evaluations have been spent. The
/// returned point is the best one evaluated, so `f <= objective(x0)`.
pub fn cobyla_minimize<F>(mut objective: F, x0: &[f64], cfg: &TrainConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evals);
    if n == 0 {
        return Minimum {
            x: best_x,
            f: best_f,
            evals,
        };
    }

    let stop_radius = cfg.tol * FINAL_RADIUS_FRACTION;
    let mut radius = cfg.initial_step.max(stop_radius);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);

    'outer: loop {
        // (re)build the simplex around the incumbent at the current radius
        simplex.clear();
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            if evals >= cfg.max_evals {
                break 'outer;
            }
            let mut x = best_x.clone();
            x[i] += radius;
            let f = eval(&x, &mut evals);
            simplex.push((x, f));
        }
        let mut fresh = true;

        loop {
            if evals >= cfg.max_evals {
                break 'outer;
            }
            let b = argmin(&simplex);
            if simplex[b].1 < best_f {
                best_x = simplex[b].0.clone();
                best_f = simplex[b].1;
            }

            let grad = match linear_model_gradient(&simplex, b) {
                Some(g) => g,
                None => continue 'outer,
            };
            let gnorm = l2(&grad);
            if gnorm <= f64::EPSILON * best_f.abs().max(1.0) {
                if !shrink(&mut radius, stop_radius) {
                    break 'outer;
                }
                continue 'outer;
            }

            let trial: Vec<f64> = simplex[b]
                .0
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - radius * g / gnorm)
                .collect();
            let f_trial = eval(&trial, &mut evals);
            if f_trial < simplex[b].1 {
                let worst = argmax(&simplex);
                simplex[worst] = (trial, f_trial);
                fresh = false;
                continue;
            }

            // model step failed: retry once with fresh geometry at this
            // radius, then poll the coordinate directions, then shrink
            best_x = simplex[b].0.clone();
            best_f = simplex[b].1;
            if !fresh {
                continue 'outer;
            }
            for i in 0..n {
                for dir in [1.0, -1.0] {
                    if evals >= cfg.max_evals {
                        break 'outer;
                    }
                    let mut x = best_x.clone();
                    x[i] += dir * radius;
                    let f = eval(&x, &mut evals);
                    if f < best_f {
                        best_x = x;
                        best_f = f;
                        continue 'outer;
                    }
                }
            }
            if !shrink(&mut radius, stop_radius) {
                break 'outer;
            }
            continue 'outer;
        }
    }

    if let Some(b) = (!simplex.is_empty()).then(|| argmin(&simplex)) {
        if simplex[b].1 < best_f {
            best_x = simplex[b].0.clone();
            best_f = simplex[b].1;
        }
    }
    Minimum {
        x: best_x,
        f: best_f,
        evals,
    }
}

/// Last trust radius relative to `tol`, so the optimum is located to well
/// within `tol`.
const FINAL_RADIUS_FRACTION: f64 = 0.1;

fn shrink(radius: &mut f64, tol: f64) -> bool {
    if *radius <= tol {
        return false;
    }
    *radius = (*radius * 0.5).max(tol * 0.5);
    *radius >= tol
}

fn argmin(s: &[(Vec<f64>, f64)]) -> usize {
    (0..s.len())
        .min_by(|&a, &b| s[a].1.total_cmp(&s[b].1).then(a.cmp(&b)))
        .expect("non-empty")
}

fn argmax(s: &[(Vec<f64>, f64)]) -> usize {
    (0..s.len())
        .max_by(|&a, &b| s[a].1.total_cmp(&s[b].1).then(b.cmp(&a)))
        .expect("non-empty")
}

/// Gradient of the affine interpolant through the simplex, relative to
/// vertex `base`. `None` when the simplex is (nearly) degenerate.
fn linear_model_gradient(simplex: &[(Vec<f64>, f64)], base: usize) -> Option<Vec<f64>> {
    let n = simplex[0].0.len();
    let (xb, fb) = &simplex[base];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (i, (x, f)) in simplex.iter().enumerate() {
        if i == base {
            continue;
        }
        let mut row: Vec<f64> = x.iter().zip(xb).map(|(a, b)| a - b).collect();
        row.push(f - fb);
        rows.push(row);
    }
    let scale = rows
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    // Gaussian elimination with partial pivoting on [D | df].
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))?;
        if rows[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        rows.swap(col, piv);
        let (head, tail) = rows.split_at_mut(col + 1);
        let pivot = &head[col];
        for row in tail {
            let factor = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= factor * p;
            }
        }
    }
    let mut g = vec![0.0; n];
    for col in (0..n).rev() {
        let tail: f64 = ((col + 1)..n).map(|c| rows[col][c] * g[c]).sum();
        g[col] = (rows[col][n] - tail) / rows[col][col];
    }
    Some(g)
}

/// Radial projection onto `|alpha| <= cap`.
pub fn project_to_cap(alpha: &[f64], cap: f64) -> Vec<f64> {
    let norm = l2(alpha);
    if norm <= cap {
        alpha.to_vec()
    } else {
        alpha.iter().map(|a| a * cap / norm).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub family: WitnessFamily,
    pub alpha_star: Vec<f64>,
    pub witness_value: f64,
    /// `|Tr[W(alpha*) rho_s]|` per separable reference.
    pub constraint_residuals: Vec<f64>,
    pub evals_used: usize,
    pub initial_alpha: Vec<f64>,
    pub seed: u64,
    pub norm_cap: f64,
    pub penalty_weight: f64,
}

/// Minimizes the penalized objective over `alpha` projected onto the norm
/// cap, then reports the unpenalized witness value at the optimum.
pub fn train(
    rho: &DensityMatrix,
    family: WitnessFamily,
    separable_refs: &[DensityMatrix],
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    cfg.validate()?;
    if cfg.initial_alpha.len() != family.n_params() {
        return Err(Error::LengthMismatch {
            expected: family.n_params(),
            got: cfg.initial_alpha.len(),
        });
    }
    if rho.dim() != 4 || separable_refs.iter().any(|s| s.dim() != 4) {
        return Err(Error::InvalidState(
            "witness training needs two-qubit states".into(),
        ));
    }
    // witness evaluated at the projection, cap penalty on the raw iterate
    let objective = |x: &[f64]| {
        let params = WitnessParams {
            family,
            alpha: project_to_cap(x, cfg.norm_cap),
        };
        let excess = (l2(x) - cfg.norm_cap).max(0.0);
        penalized_objective(&params, rho, separable_refs, cfg).expect("shapes checked above")
            + cfg.penalty_weight * excess * excess
    };
    let min = cobyla_minimize(objective, &cfg.initial_alpha, cfg);
    let params = WitnessParams {
        family,
        alpha: project_to_cap(&min.x, cfg.norm_cap),
    };
    let w = witness_matrix(&params)?;
    let constraint_residuals = separable_refs
        .iter()
        .map(|s| s.expectation(&w).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainResult {
        family,
        witness_value: rho.expectation(&w)?,
        alpha_star: params.alpha,
        constraint_residuals,
        evals_used: min.evals,
        initial_alpha: cfg.initial_alpha.clone(),
        seed: cfg.seed,
        norm_cap: cfg.norm_cap,
        penalty_weight: cfg.penalty_weight,
    })
}
