//! Dense linear-algebra helpers over complex matrices.

use nalgebra::DMatrix;

use crate::C64;

/// Numerical rank: singular values above `rel_tol · max(σ_max, 1)`, so that a matrix made of
/// roundoff alone has rank 0.
pub fn numerical_rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(1.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is trusted.
pub fn hermitian_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<C64>) -> f64 {
    m.singular_values().iter().sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_outer_product() {
        let u = DMatrix::from_fn(4, 1, |i, _| C64::new(i as f64, 1.0));
        let v = DMatrix::from_fn(1, 3, |_, j| C64::new(1.0, -(j as f64)));
        assert_eq!(numerical_rank(&(&u * &v), 1e-8), 1);
        assert_eq!(numerical_rank(&DMatrix::<C64>::identity(5, 5), 1e-8), 5);
        assert_eq!(numerical_rank(&DMatrix::<C64>::zeros(2, 2), 1e-8), 0);
        let noise = DMatrix::from_element(3, 3, C64::new(1e-17, 0.0));
        assert_eq!(numerical_rank(&noise, 1e-8), 0);
    }

    #[test]
    fn hermitian_spectrum() {
        let i = C64::i();
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), i, -i, C64::new(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
