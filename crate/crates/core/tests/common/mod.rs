#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nwl_core::circuit::u3_matrix;
use nwl_core::qmath::{tensor_product, ComplexMatrix, DensityMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let data = (0..n * n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::from_vec(n, n, data).unwrap()
}

/// `G G^dag / Tr`, with `rank` columns in `G`.
pub fn random_density_rank(rng: &mut impl Rng, n: usize, rank: usize) -> DensityMatrix {
    let data = (0..n * rank)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let g = ComplexMatrix::from_vec(n, rank, data).unwrap();
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale_real(1.0 / tr);
    // remove rounding asymmetry
    m = (&m + &m.adjoint()).scale_real(0.5);
    DensityMatrix::new(m).unwrap()
}

pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=n);
    random_density_rank(rng, n, rank)
}

pub fn random_su2(rng: &mut impl Rng) -> ComplexMatrix {
    let tau = std::f64::consts::TAU;
    u3_matrix(
        rng.random_range(0.0..tau),
        rng.random_range(0.0..tau),
        rng.random_range(0.0..tau),
    )
}

pub fn random_product_state(rng: &mut impl Rng) -> DensityMatrix {
    let a = random_density(rng, 2);
    let b = random_density(rng, 2);
    DensityMatrix::new(tensor_product(a.matrix(), b.matrix())).unwrap()
}

pub fn conjugate(u: &ComplexMatrix, rho: &DensityMatrix) -> DensityMatrix {
    let m = &(u * rho.matrix()) * &u.adjoint();
    DensityMatrix::new((&m + &m.adjoint()).scale_real(0.5)).unwrap()
}
