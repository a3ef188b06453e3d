//! Seeded random vectors and operators for the verification suites.

use nalgebra::DMatrix;
use rand::Rng;

use crate::C64;

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    let mut v = random_vector(rng, len);
    let n = crate::linalg::norm(&v);
    v.iter_mut().for_each(|z| *z /= n);
    v
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    DMatrix::from_vec(dim, dim, random_vector(rng, dim * dim))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let a = random_matrix(rng, dim);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Unitary factor of the QR decomposition of a random matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    random_matrix(rng, dim).qr().q()
}
