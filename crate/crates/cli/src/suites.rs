//! The verification suites behind the subcommands.
//!
//! Each suite returns a serializable report whose `passed` field is the conjunction
//! of the invariants it asserts.

use std::f64::consts::PI;

use fsmat::fock::{flat_index, multi_index, FockSpace, FockVector, SectorTensor};
use fsmat::formfactor::{MatrixElements, OperatorRep};
use fsmat::grid::WeightRule;
use fsmat::linalg;
use fsmat::nuclearity::{
    rows_to_csv, s_min, sweep, KernelDiscretization, NuclearityRow, SMin,
};
use fsmat::perm::{binomial, factorial};
use fsmat::sample::{random_hermitian, random_vector};
use fsmat::scatfn::NormEstimate;
use fsmat::scattering::{completeness_rank, s_matrix_apply, s_matrix_bruteforce, symmetrize};
use fsmat::{RapidityGrid, Result, ScatteringFunction, C64};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

pub const RELATION_TOL: f64 = 1e-10;
pub const ZF_TOL: f64 = 1e-12;
pub const PROJECTION_TOL: f64 = 1e-11;
pub const RECURSION_TOL: f64 = 1e-9;
pub const SMATRIX_TOL: f64 = 1e-10;
pub const ROOT_TOL: f64 = 1e-8;
pub const STABILITY_TOL: f64 = 1e-6;

/// Equally spaced grid with `d` nodes on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub d: usize,
    pub min: f64,
    pub max: f64,
    pub rule: WeightRule,
}

impl GridSpec {
    pub fn new(d: usize, min: f64, max: f64) -> Self {
        Self {
            d,
            min,
            max,
            rule: WeightRule::Unit,
        }
    }

    pub fn build(&self, mass: f64) -> Result<RapidityGrid> {
        RapidityGrid::from_range(self.d, self.min, self.max, mass, self.rule)
    }
}

/// The three shipped families used when no spec file is given.
pub fn shipped_families() -> Vec<ScatteringFunction> {
    vec![
        ScatteringFunction::constant(-1).unwrap(),
        ScatteringFunction::product_poles(1, vec![C64::new(0.0, PI / 4.0)]).unwrap(),
        ScatteringFunction::sinh_gordon(1.0).unwrap(),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub family: String,
    pub samples: usize,
    pub unitarity: f64,
    pub crossing: f64,
    pub symmetry: f64,
    pub modulus: f64,
    pub strip_max: f64,
    pub sign_class: i32,
    pub kappa: f64,
    /// `null` for the constant families.
    pub kappa_tilde: Option<f64>,
    /// `|κ̃ − κ̃_root|` against Newton root-finding, for pole families.
    pub kappa_root_gap: Option<f64>,
    pub norm: Option<f64>,
    pub passed: bool,
}

pub fn check(s2: &ScatteringFunction, samples: usize) -> Result<CheckReport> {
    let props = s2.validate_properties(samples, samples);
    let reg = s2.regularity()?;
    let kappa_tilde = reg.kappa_tilde.is_finite().then_some(reg.kappa_tilde);
    let kappa_root_gap = kappa_tilde.map(|k| (k - s2.kappa_tilde_root_find()).abs());
    let norm = match reg.norm {
        NormEstimate::Finite { value, .. } => Some(value),
        NormEstimate::Divergent { .. } => None,
    };
    let passed = props.max_relation_residual() < RELATION_TOL
        && props.modulus < RELATION_TOL
        && kappa_root_gap.map_or(true, |g| g < ROOT_TOL);
    Ok(CheckReport {
        family: s2.label(),
        samples,
        unitarity: props.unitarity,
        crossing: props.crossing,
        symmetry: props.symmetry,
        modulus: props.modulus,
        strip_max: props.strip_max,
        sign_class: reg.sign_class,
        kappa: reg.kappa,
        kappa_tilde,
        kappa_root_gap,
        norm,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FockReport {
    pub family: String,
    pub d: usize,
    pub n_max: usize,
    pub trials: usize,
    /// `z_i z_j − S2(θ_i − θ_j) z_j z_i`.
    pub zz: f64,
    /// `z†_i z†_j − S2(θ_i − θ_j) z†_j z†_i`.
    pub zdzd: f64,
    /// `z_i z†_j − S2(θ_j − θ_i) z†_j z_i − δ_ij`.
    pub zzd: f64,
    pub p_idempotent: f64,
    pub p_selfadjoint: f64,
    pub s2_symmetry: f64,
    pub adjointness: f64,
    pub zdn: f64,
    pub z_bound_violations: usize,
    pub passed: bool,
}

/// Random vector in the S2-symmetric subspace whose top `empty_top` sectors vanish.
fn physical_vector<R: Rng + ?Sized>(space: &FockSpace, rng: &mut R, empty_top: usize) -> FockVector {
    let d = space.d();
    let sectors = (0..=space.n_max())
        .map(|n| {
            if n + empty_top > space.n_max() {
                SectorTensor::zeros(n, d)
            } else {
                let raw = SectorTensor::from_amplitudes(n, d, random_vector(rng, d.pow(n as u32))).unwrap();
                space.pn_project(&raw)
            }
        })
        .collect();
    FockVector::from_sectors(d, sectors).unwrap()
}

fn scaled(v: &FockVector, c: C64) -> FockVector {
    let mut out = v.clone();
    out.scale(c);
    out
}

fn residual(a: &FockVector, b: &FockVector) -> f64 {
    a.max_abs_diff(b)
}

/// Largest deviation of `u` from the exchange relation at every adjacent position.
fn exchange_residual(space: &FockSpace, u: &SectorTensor) -> f64 {
    let (n, d) = (u.n(), u.d());
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; n];
    for flat in 0..u.len() {
        multi_index(flat, d, &mut idx);
        for p in 0..n.saturating_sub(1) {
            let mut swapped = idx.clone();
            swapped.swap(p, p + 1);
            let lhs = u.amplitudes()[flat_index(&swapped, d)];
            let rhs = space.s(idx[p], idx[p + 1]) * u.amplitudes()[flat];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

pub fn fock_verify<R: Rng + ?Sized>(space: &FockSpace, trials: usize, rng: &mut R) -> Result<FockReport> {
    let d = space.d();
    let n_max = space.n_max();
    let mut r = FockReport {
        family: space.s2().label(),
        d,
        n_max,
        trials,
        zz: 0.0,
        zdzd: 0.0,
        zzd: 0.0,
        p_idempotent: 0.0,
        p_selfadjoint: 0.0,
        s2_symmetry: 0.0,
        adjointness: 0.0,
        zdn: 0.0,
        z_bound_violations: 0,
        passed: false,
    };

    for _ in 0..3 {
        let v = physical_vector(space, rng, 2.min(n_max));
        for i in 0..d {
            let ei = space.mode(i);
            for j in 0..d {
                let ej = space.mode(j);
                let s_ij = space.s(i, j);
                let s_ji = space.s(j, i);
                let zizj = space.zf_annihilate(&ei, &space.zf_annihilate(&ej, &v)?)?;
                let zjzi = space.zf_annihilate(&ej, &space.zf_annihilate(&ei, &v)?)?;
                r.zz = r.zz.max(residual(&zizj, &scaled(&zjzi, s_ij)));
                if n_max >= 2 {
                    let cicj = space.zf_create(&ei, &space.zf_create(&ej, &v)?)?;
                    let cjci = space.zf_create(&ej, &space.zf_create(&ei, &v)?)?;
                    r.zdzd = r.zdzd.max(residual(&cicj, &scaled(&cjci, s_ij)));
                }
                let zc = space.zf_annihilate(&ei, &space.zf_create(&ej, &v)?)?;
                let cz = space.zf_create(&ej, &space.zf_annihilate(&ei, &v)?)?;
                let mut rhs = scaled(&cz, s_ji);
                if i == j {
                    rhs = rhs.add(&v);
                }
                r.zzd = r.zzd.max(residual(&zc, &rhs));
            }
        }
    }

    for n in 1..=n_max.min(4) {
        let p = space.pn_matrix(n);
        let p2 = &p * &p;
        r.p_idempotent = r.p_idempotent.max(max_abs(&(&p2 - &p)));
        r.p_selfadjoint = r.p_selfadjoint.max(max_abs(&(&p - p.adjoint())));
        let raw = SectorTensor::from_amplitudes(n, d, random_vector(rng, d.pow(n as u32)))?;
        r.s2_symmetry = r.s2_symmetry.max(exchange_residual(space, &space.pn_project(&raw)));
    }

    for _ in 0..trials {
        let v = physical_vector(space, rng, 1);
        let psi = random_vector(rng, d);
        let psi_norm = linalg::norm(&psi);
        let created = space.zf_create(&psi, &v)?.norm();
        let annihilated = space.zf_annihilate(&psi, &v)?.norm();
        let slack = 1.0 + 1e-12;
        if created > psi_norm * v.number_weighted_norm(1.0) * slack {
            r.z_bound_violations += 1;
        }
        if annihilated > psi_norm * v.number_weighted_norm(0.0) * slack {
            r.z_bound_violations += 1;
        }
        let phi = physical_vector(space, rng, 0);
        let conj: Vec<C64> = psi.iter().map(|z| z.conj()).collect();
        let lhs = space.zf_annihilate(&conj, &phi)?.inner(&v);
        let rhs = phi.inner(&space.zf_create(&psi, &v)?);
        r.adjointness = r.adjointness.max((lhs - rhs).norm());
    }

    let target = physical_vector(space, rng, 0);
    for n in 1..=n_max.min(3) {
        let mut idx = vec![0usize; n];
        let root = factorial(n).sqrt();
        for flat in 0..d.pow(n as u32) {
            multi_index(flat, d, &mut idx);
            let mut chain = space.vacuum();
            for &i in idx.iter().rev() {
                chain = space.zf_create(&space.mode(i), &chain)?;
            }
            let lhs = chain.inner(&target);
            let rhs = target.sector(n).amplitudes()[flat] * root;
            r.zdn = r.zdn.max((lhs - rhs).norm());
        }
    }

    r.passed = r.zz.max(r.zdzd).max(r.zzd).max(r.adjointness) < ZF_TOL
        && r.p_idempotent.max(r.p_selfadjoint).max(r.s2_symmetry).max(r.zdn) < PROJECTION_TOL
        && r.z_bound_violations == 0;
    Ok(r)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct FormfactorRow {
    pub n: usize,
    pub k: usize,
    pub max_res1: f64,
    pub max_res2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormfactorReport {
    pub n: usize,
    /// `null` when every `k < n` was checked.
    pub k: Option<usize>,
    pub family: String,
    pub d: usize,
    pub trials: usize,
    pub max_res1: f64,
    pub max_res2: f64,
    pub rows: Vec<FormfactorRow>,
    pub passed: bool,
}

/// Commutator recursions for random hermitian operators at every `n' ≤ n` and `k < n'`,
/// or only at `(n, k)` when `k` is given.
pub fn formfactor_verify<R: Rng + ?Sized>(
    s2: &ScatteringFunction,
    grid: &RapidityGrid,
    n: usize,
    k: Option<usize>,
    trials: usize,
    rng: &mut R,
) -> Result<FormfactorReport> {
    if n == 0 || k.is_some_and(|k| k >= n) {
        return Err(fsmat::Error::InvalidParameter(format!(
            "need 0 ≤ k < n and n ≥ 1, got n = {n}, k = {k:?}"
        )));
    }
    let space = FockSpace::new(s2.clone(), grid.clone(), n)?;
    let configs: Vec<(usize, usize)> = match k {
        Some(k) => vec![(n, k)],
        None => (1..=n).flat_map(|m| (0..m).map(move |k| (m, k))).collect(),
    };
    let mut rows: Vec<FormfactorRow> = configs
        .iter()
        .map(|&(n, k)| FormfactorRow {
            n,
            k,
            max_res1: 0.0,
            max_res2: 0.0,
        })
        .collect();
    for _ in 0..trials {
        let op = OperatorRep::new(random_hermitian(rng, space.dim()), space.d(), n)?;
        let mut me = MatrixElements::new(&space, &op)?;
        for row in rows.iter_mut() {
            let (r1, r2) = me.lemma_tech_residual(row.n, row.k)?;
            row.max_res1 = row.max_res1.max(r1);
            row.max_res2 = row.max_res2.max(r2);
        }
    }
    let max_res1 = rows.iter().map(|r| r.max_res1).fold(0.0, f64::max);
    let max_res2 = rows.iter().map(|r| r.max_res2).fold(0.0, f64::max);
    Ok(FormfactorReport {
        n,
        k,
        family: s2.label(),
        d: grid.len(),
        trials,
        max_res1,
        max_res2,
        rows,
        passed: max_res1 < RECURSION_TOL && max_res2 < RECURSION_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmatrixReport {
    pub family: String,
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub rank: usize,
    pub dim: usize,
    /// `binom(d, n)` for sign class −1, `binom(d+n−1, n)` for +1.
    pub expected_dim: usize,
    pub passed: bool,
}

pub fn smatrix<R: Rng + ?Sized>(
    s2: &ScatteringFunction,
    grid: &RapidityGrid,
    n: usize,
    trials: usize,
    rng: &mut R,
) -> Result<SmatrixReport> {
    let space = FockSpace::new(s2.clone(), grid.clone(), n)?;
    let d = grid.len();
    let mut max_residual = 0.0f64;
    for _ in 0..trials {
        let raw = SectorTensor::from_amplitudes(n, d, random_vector(rng, d.pow(n as u32)))?;
        let phi = symmetrize(&raw);
        let brute = s_matrix_bruteforce(&space, &phi)?;
        let closed = s_matrix_apply(&space, &phi)?;
        max_residual = max_residual.max(brute.max_abs_diff(&closed));
    }
    let (rank, dim) = completeness_rank(s2, n, grid)?;
    let expected_dim = if s2.sign_class()? == -1 {
        binomial(d, n)
    } else {
        binomial(d + n - 1, n)
    };
    Ok(SmatrixReport {
        family: s2.label(),
        n,
        d,
        trials,
        max_residual,
        rank,
        dim,
        expected_dim,
        passed: max_residual < SMATRIX_TOL && rank == dim && dim == expected_dim,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NuclearityReport {
    pub family: String,
    pub mass: f64,
    pub s_min: f64,
    pub kappa_star: f64,
    pub level_star: f64,
    pub compton_margin: f64,
    pub compton_margin_2pi: f64,
    pub convergence: f64,
    pub lattice: usize,
    /// Strict decrease of `σ` and `‖T‖₁` along the s-list, for every κ.
    pub monotone: bool,
    /// Largest relative change of a trace norm under the last grid refinement.
    pub max_trace_delta: f64,
    pub rows: Vec<NuclearityRow>,
    pub passed: bool,
}

impl NuclearityReport {
    pub fn rows_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

/// `s_min` with its optimal κ, and the sweep over `s_list × kappa_list`
/// (`κ*` alone when `kappa_list` is empty).
pub fn nuclearity(
    s2: &ScatteringFunction,
    mass: f64,
    s_list: &[f64],
    kappa_list: &[f64],
    lattice: usize,
    disc: &KernelDiscretization,
) -> Result<NuclearityReport> {
    let best: SMin = s_min(s2, mass, None, lattice, disc)?;
    let kappas: Vec<f64> = if kappa_list.is_empty() {
        vec![best.kappa_star]
    } else {
        kappa_list.to_vec()
    };
    let rows = sweep(s2, mass, s_list, &kappas, disc)?;
    let monotone = kappas.iter().all(|&k| {
        let mut column: Vec<&NuclearityRow> = rows.iter().filter(|r| r.kappa == k).collect();
        column.sort_by(|a, b| a.s.total_cmp(&b.s));
        column
            .windows(2)
            .all(|w| w[1].sigma < w[0].sigma && w[1].t_trace < w[0].t_trace)
    });
    let max_trace_delta = rows.iter().map(|r| r.trace_delta).fold(best.convergence, f64::max);
    let passed = best.s_min.is_finite() && monotone && max_trace_delta < STABILITY_TOL;
    Ok(NuclearityReport {
        family: s2.label(),
        mass,
        s_min: best.s_min,
        kappa_star: best.kappa_star,
        level_star: best.level_star,
        compton_margin: best.compton_margin,
        compton_margin_2pi: best.compton_margin_2pi,
        convergence: best.convergence,
        lattice: best.lattice.len(),
        monotone,
        max_trace_delta,
        rows,
        passed,
    })
}
