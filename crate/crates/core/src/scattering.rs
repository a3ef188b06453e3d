//! Collision states, Møller maps and the S-matrix on a finite rapidity grid.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{multi_index, FockSpace, SectorTensor, MAX_SECTOR};
use crate::grid::RapidityGrid;
use crate::linalg::numerical_rank;
use crate::perm::{factorial, Permutation};
use crate::scatfn::ScatteringFunction;
use crate::C64;

/// Entries with modulus at most this count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-14;

/// First and last grid index carrying weight, or `None` for the zero vector.
pub fn support(psi: &[C64]) -> Option<(usize, usize)> {
    let first = psi.iter().position(|z| z.norm() > SUPPORT_TOL)?;
    let last = psi.iter().rposition(|z| z.norm() > SUPPORT_TOL)?;
    Some((first, last))
}

/// `ψ₁ ≺ ψ₂ ≺ …`: every support lies strictly to the left of the next one.
pub fn check_precedence(psis: &[Vec<C64>]) -> bool {
    let mut previous: Option<usize> = None;
    for psi in psis {
        match support(psi) {
            Some((lo, hi)) => {
                if previous.is_some_and(|p| lo <= p) {
                    return false;
                }
                previous = Some(hi);
            }
            None => return false,
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

fn ordered_product(space: &FockSpace, psis: &[Vec<C64>], reversed: bool) -> Result<SectorTensor> {
    let n = psis.len();
    if n > MAX_SECTOR {
        return Err(Error::TruncationOverflow {
            sector: n,
            n_max: MAX_SECTOR,
        });
    }
    if let Some(p) = psis.iter().find(|p| p.len() != space.d()) {
        return Err(Error::SizeMismatch {
            expected: space.d(),
            found: p.len(),
        });
    }
    let mut factors: Vec<&[C64]> = psis.iter().map(|p| p.as_slice()).collect();
    if reversed {
        factors.reverse();
    }
    let mut t = space.pn_project(&SectorTensor::product(space.d(), &factors));
    t.scale(C64::new(factorial(n).sqrt(), 0.0));
    Ok(t)
}

/// Outgoing collision state `√n! P_n(ψ₁ ⊗ … ⊗ ψ_n)`.
pub fn out_state(space: &FockSpace, psis: &[Vec<C64>]) -> Result<SectorTensor> {
    if !check_precedence(psis) {
        return Err(Error::Precedence);
    }
    ordered_product(space, psis, false)
}

/// Incoming collision state `√n! P_n(ψ_n ⊗ … ⊗ ψ₁)`.
pub fn in_state(space: &FockSpace, psis: &[Vec<C64>]) -> Result<SectorTensor> {
    if !check_precedence(psis) {
        return Err(Error::Precedence);
    }
    ordered_product(space, psis, true)
}

/// Plain symmetrizer `(1/n!) Σ_ρ t(i_ρ)`.
pub fn symmetrize(t: &SectorTensor) -> SectorTensor {
    let (n, d) = (t.n(), t.d());
    let perms = Permutation::all(n);
    let norm = 1.0 / factorial(n);
    let mut out = SectorTensor::zeros(n, d);
    let mut idx = [0usize; MAX_SECTOR];
    let mut src = vec![0usize; n];
    for flat in 0..t.len() {
        multi_index(flat, d, &mut idx[..n]);
        let mut acc = C64::new(0.0, 0.0);
        for rho in &perms {
            for j in 0..n {
                src[j] = idx[rho.apply(j)];
            }
            acc += t.get(&src);
        }
        out.amplitudes_mut()[flat] = acc * norm;
    }
    out
}

fn require_symmetric(t: &SectorTensor, tol: f64) -> Result<()> {
    let residual = t.max_abs_diff(&symmetrize(t));
    if residual > tol {
        return Err(Error::NonSymmetric(residual));
    }
    Ok(())
}

/// Region factor at a grid index tuple: `S^π` for out, `S^{πι}` for in, with `π` the stable
/// sorting permutation of the rapidities and `ι` the total inversion.
fn region_factor(space: &FockSpace, direction: Direction, idx: &[usize]) -> C64 {
    let pi = Permutation::sorting(idx);
    let rho = match direction {
        Direction::Out => pi,
        Direction::In => pi.compose(&Permutation::reversal(idx.len())),
    };
    space.srho_at(&rho, idx)
}

fn multiply<F: Fn(&[usize]) -> C64>(t: &SectorTensor, f: F) -> SectorTensor {
    let (n, d) = (t.n(), t.d());
    let mut out = t.clone();
    let mut idx = [0usize; MAX_SECTOR];
    for (flat, slot) in out.amplitudes_mut().iter_mut().enumerate() {
        multi_index(flat, d, &mut idx[..n]);
        *slot *= f(&idx[..n]);
    }
    out
}

/// Møller map on a Bose-symmetric tensor: multiplication by the region factor.
pub fn moller_apply(space: &FockSpace, direction: Direction, phi: &SectorTensor) -> Result<SectorTensor> {
    require_symmetric(phi, space.s2().tolerances().symmetric_input)?;
    Ok(multiply(phi, |idx| region_factor(space, direction, idx)))
}

/// `Ŝ_n(θ) = ∏_{l<k} S2(|θ_l − θ_k|)` applied entrywise.
pub fn s_matrix_apply(space: &FockSpace, phi: &SectorTensor) -> Result<SectorTensor> {
    require_symmetric(phi, space.s2().tolerances().symmetric_input)?;
    let nodes = space.grid().nodes();
    let s2 = space.s2();
    Ok(multiply(phi, |idx| {
        let mut acc = C64::new(1.0, 0.0);
        for l in 0..idx.len() {
            for k in (l + 1)..idx.len() {
                acc *= s2.eval_real((nodes[idx[l]] - nodes[idx[k]]).abs());
            }
        }
        acc
    }))
}

/// `V_out* V_in Φ`, with the adjoint as multiplication by the conjugate region factor.
pub fn s_matrix_bruteforce(space: &FockSpace, phi: &SectorTensor) -> Result<SectorTensor> {
    let v_in = moller_apply(space, Direction::In, phi)?;
    Ok(multiply(&v_in, |idx| {
        region_factor(space, Direction::Out, idx).conj()
    }))
}

/// Numerical rank of the span of outgoing states built from weakly ordered tuples of
/// single-node vectors, and the rank of `P_n`.
pub fn completeness_rank(s2: &ScatteringFunction, n: usize, grid: &RapidityGrid) -> Result<(usize, usize)> {
    let space = FockSpace::new(s2.clone(), grid.clone(), n)?;
    let d = space.d();
    let rel = s2.tolerances().rank;
    let mut columns: Vec<Vec<C64>> = Vec::new();
    let mut idx = vec![0usize; n];
    for flat in 0..d.pow(n as u32) {
        multi_index(flat, d, &mut idx);
        if idx.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        let psis: Vec<Vec<C64>> = idx.iter().map(|&i| space.mode(i)).collect();
        columns.push(ordered_product(&space, &psis, false)?.amplitudes().to_vec());
    }
    let len = d.pow(n as u32);
    let span = DMatrix::from_fn(len, columns.len(), |r, c| columns[c][r]);
    let rank = numerical_rank(&span, rel);
    let dim = numerical_rank(&space.pn_matrix(n), rel);
    Ok((rank, dim))
}
