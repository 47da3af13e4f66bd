//! Dense complex linear algebra for small quantum systems.
//!
//! Qubit `q_i` occupies tensor slot `i`; basis labels `|q0 q1 ...>` read
//! left-to-right with `q0` the most significant bit of the row index.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row slices. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        let e: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&e)
    }

    /// `|v><v|`
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `A - A^dagger`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                got: format!("{} rows", other.rows),
            });
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    m.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(m)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", self.cols),
                got: format!("length {}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.cols, self.rows),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Single-qubit operators used throughout.
pub mod pauli {
    use super::{ComplexMatrix, C64, I, ONE, ZERO};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
    }

    pub fn h() -> ComplexMatrix {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        ComplexMatrix::from_vec(2, 2, vec![s, s, s, -s]).unwrap()
    }

    /// Two-qubit Pauli product, e.g. `pair(x(), x())` for XX.
    pub fn pair(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix {
        super::tensor_product(&a, &b)
    }
}

/// Normalized state vector on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: format!("2^{n_qubits} amplitudes"),
                got: format!("{}", amplitudes.len()),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidIndex { index, limit: dim });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {deviation:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let lo = hermitian_eigenvalues(&matrix)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if lo < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self { matrix })
    }

    /// `I / dim`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(op * rho)`, real part. Callers pass Hermitian observables.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        Ok(op.trace_product(&self.matrix)?.re)
    }

    pub fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim} density matrix"),
                got: format!("{0}x{0}", self.dim()),
            });
        }
        Ok(())
    }
}

/// Kronecker product; `a` indexes the most significant block.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut m = ComplexMatrix::zeros(rows, cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let x = a[(ia, ja)];
            if x == ZERO {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    m[(ia * b.rows + ib, ja * b.cols + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    m
}

/// Partial transpose on the second qubit of a two-qubit operator.
pub fn partial_transpose_b_matrix(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out[(2 * a + d, 2 * c + b)] = m[(2 * a + b, 2 * c + d)];
                }
            }
        }
    }
    Ok(out)
}

pub fn partial_transpose_b(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    rho.require_dim(4)?;
    partial_transpose_b_matrix(rho.matrix())
}

/// Reduced state on the qubits in `keep` (in the given order) of an
/// `n`-qubit operator.
pub fn partial_trace(rho_full: &ComplexMatrix, keep: &[usize], n: usize) -> Result<DensityMatrix> {
    let dim = 1usize << n;
    if rho_full.rows() != dim || rho_full.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim}"),
            got: format!("{}x{}", rho_full.rows(), rho_full.cols()),
        });
    }
    for (i, &q) in keep.iter().enumerate() {
        if q >= n || keep[..i].contains(&q) {
            return Err(Error::InvalidIndex { index: q, limit: n });
        }
    }
    let deviation = rho_full.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let traced_mask: usize = (0..n)
        .filter(|q| !keep.contains(q))
        .map(|q| 1usize << (n - 1 - q))
        .sum();
    let kept_index = |full: usize| -> usize {
        keep.iter()
            .fold(0, |acc, &q| (acc << 1) | ((full >> (n - 1 - q)) & 1))
    };
    let mut out = ComplexMatrix::zeros(1 << keep.len(), 1 << keep.len());
    for i in 0..dim {
        for j in 0..dim {
            if i & traced_mask == j & traced_mask {
                out[(kept_index(i), kept_index(j))] += rho_full[(i, j)];
            }
        }
    }
    DensityMatrix::new(out)
}

/// Eigen-decomposition of a Hermitian matrix, values descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let d: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        let vd = &self.vectors * &ComplexMatrix::diagonal(&d);
        let mut out = &vd * &self.vectors.adjoint();
        debug_assert_eq!(out.rows(), n);
        for i in 0..n {
            out[(i, i)].im = 0.0;
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let deviation = a.hermitian_deviation();
    if deviation > 1e-10 {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.rows();
    // symmetrize so the rotations see an exactly Hermitian input
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) < JACOBI_OFF_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, k)] = v[(r, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `m[p][q]`: `m <- G^dagger m G`, `v <- v G`
/// with `G = diag(1, e^{-i arg m_pq}) R(c, s)` acting on the (p, q) plane.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = m[(p, q)];
    let mag = b.norm();
    if mag < 1e-300 {
        return;
    }
    let phase = b / mag;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = m.rows();
    for r in 0..n {
        let mp = m[(r, p)];
        let mq = m[(r, q)];
        m[(r, p)] = mp * g_pp + mq * g_qp;
        m[(r, q)] = mp * g_pq + mq * g_qq;
        let vp = v[(r, p)];
        let vq = v[(r, q)];
        v[(r, p)] = vp * g_pp + vq * g_qp;
        v[(r, q)] = vp * g_pq + vq * g_qq;
    }
    for col in 0..n {
        let mp = m[(p, col)];
        let mq = m[(q, col)];
        m[(p, col)] = g_pp.conj() * mp + g_qp.conj() * mq;
        m[(q, col)] = g_pq.conj() * mp + g_qq.conj() * mq;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
}

pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.values)
}

/// Eigenvalues at or below `n * eps * max|lambda|` are rounding noise.
pub fn spectral_noise_floor(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.len() as f64 * f64::EPSILON * scale
}

/// Principal square root of a PSD matrix. Negative eigenvalues and those
/// inside the rounding-noise floor are clipped to zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(a)?;
    let floor = spectral_noise_floor(&eig.values);
    let roots = HermitianEigen {
        values: eig
            .values
            .iter()
            .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
            .collect(),
        vectors: eig.vectors,
    };
    Ok(roots.reconstruct())
}
