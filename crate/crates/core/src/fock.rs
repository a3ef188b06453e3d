//! Finite-mode S2-symmetric Fock space over a rapidity grid.
//!
//! Sector tensors are dense and row-major with the first index most significant.
//! The inner product is the plain Kronecker one; quadrature weights only enter
//! through [`RapidityGrid::sample`](crate::grid::RapidityGrid::sample).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RapidityGrid;
use crate::linalg;
use crate::perm::{factorial, Permutation};
use crate::scatfn::ScatteringFunction;
use crate::C64;

/// Largest particle number supported by the dense representation.
pub const MAX_SECTOR: usize = 8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SectorTensor {
    n: usize,
    d: usize,
    amplitudes: Vec<C64>,
}

impl SectorTensor {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            amplitudes: vec![ZERO; d.pow(n as u32)],
        }
    }

    pub fn from_amplitudes(n: usize, d: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let expected = d.pow(n as u32);
        if amplitudes.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n, d, amplitudes })
    }

    /// Tensor product `v₁ ⊗ … ⊗ v_n` of one-particle vectors.
    pub fn product(d: usize, factors: &[&[C64]]) -> Self {
        let mut t = Self::zeros(0, d);
        t.amplitudes[0] = ONE;
        for f in factors {
            t = t.prepend_factor_after(f);
        }
        t
    }

    fn prepend_factor_after(&self, f: &[C64]) -> Self {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * self.d);
        for a in &self.amplitudes {
            amps.extend(f.iter().map(|x| a * x));
        }
        Self {
            n: self.n + 1,
            d: self.d,
            amplitudes: amps,
        }
    }

    /// `ψ ⊗ self`.
    pub fn left_mul(&self, psi: &[C64]) -> Self {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * self.d);
        for p in psi {
            amps.extend(self.amplitudes.iter().map(|a| p * a));
        }
        Self {
            n: self.n + 1,
            d: self.d,
            amplitudes: amps,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.amplitudes[flat_index(idx, self.d)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let i = flat_index(idx, self.d);
        self.amplitudes[i] = value;
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &Self) -> C64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|z| *z == ZERO)
    }

    pub fn scale(&mut self, c: C64) {
        self.amplitudes.iter_mut().for_each(|z| *z *= c);
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += b;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.amplitudes, &other.amplitudes)
    }
}

pub fn flat_index(idx: &[usize], d: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * d + i)
}

/// Writes the multi-index of `flat` into `out` (length `n`).
pub fn multi_index(mut flat: usize, d: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % d;
        flat /= d;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    d: usize,
    sectors: Vec<SectorTensor>,
}

impl FockVector {
    pub fn zero(d: usize, n_max: usize) -> Self {
        Self {
            d,
            sectors: (0..=n_max).map(|n| SectorTensor::zeros(n, d)).collect(),
        }
    }

    pub fn vacuum(d: usize, n_max: usize) -> Self {
        let mut v = Self::zero(d, n_max);
        v.sectors[0].amplitudes[0] = ONE;
        v
    }

    pub fn from_sectors(d: usize, sectors: Vec<SectorTensor>) -> Result<Self> {
        for (n, s) in sectors.iter().enumerate() {
            if s.n != n || s.d != d {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: s.n,
                });
            }
        }
        if sectors.is_empty() {
            return Err(Error::InvalidParameter("a Fock vector needs sector 0".into()));
        }
        Ok(Self { d, sectors })
    }

    /// Places `t` in an otherwise empty vector.
    pub fn from_sector(t: SectorTensor, n_max: usize) -> Self {
        let mut v = Self::zero(t.d, n_max.max(t.n));
        let n = t.n;
        v.sectors[n] = t;
        v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.sectors.len() - 1
    }

    pub fn sector(&self, n: usize) -> &SectorTensor {
        &self.sectors[n]
    }

    pub fn sector_mut(&mut self, n: usize) -> &mut SectorTensor {
        &mut self.sectors[n]
    }

    pub fn sectors(&self) -> &[SectorTensor] {
        &self.sectors
    }

    pub fn dim(&self) -> usize {
        self.sectors.iter().map(SectorTensor::len).sum()
    }

    pub fn to_flat(&self) -> Vec<C64> {
        self.sectors.iter().flat_map(|s| s.amplitudes.iter().copied()).collect()
    }

    pub fn from_flat(d: usize, n_max: usize, flat: &[C64]) -> Result<Self> {
        let expected: usize = (0..=n_max).map(|n| d.pow(n as u32)).sum();
        if flat.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: flat.len(),
            });
        }
        let mut offset = 0;
        let mut sectors = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let len = d.pow(n as u32);
            sectors.push(SectorTensor {
                n,
                d,
                amplitudes: flat[offset..offset + len].to_vec(),
            });
            offset += len;
        }
        Ok(Self { d, sectors })
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.sectors
            .iter()
            .zip(&other.sectors)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| s.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖N^{1/2} Ψ‖` shifted by `offset`, i.e. `(Σ (n + offset)‖Ψ_n‖²)^{1/2}`.
    pub fn number_weighted_norm(&self, offset: f64) -> f64 {
        self.sectors
            .iter()
            .enumerate()
            .map(|(n, s)| (n as f64 + offset) * s.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.sectors.iter_mut().zip(&other.sectors) {
            a.add_assign(b);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut neg = other.clone();
        neg.scale(-ONE);
        self.add(&neg)
    }

    pub fn scale(&mut self, c: C64) {
        self.sectors.iter_mut().for_each(|s| s.scale(c));
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sectors
            .iter()
            .zip(&other.sectors)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// True when the top sector vanishes, so one creation operator acts without truncation.
    pub fn is_guarded(&self) -> bool {
        self.sectors.last().is_some_and(SectorTensor::is_zero)
    }
}

/// Behavior of particle-number raising operators at the top sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// A nonzero top sector is an error.
    #[default]
    Strict,
    /// The overflowing sector is dropped and the result flagged.
    Permissive,
}

/// Fock space over a grid for a fixed scattering function, with the table `S2(θ_a − θ_b)`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    s2: ScatteringFunction,
    grid: RapidityGrid,
    n_max: usize,
    table: Vec<C64>,
    perms: Vec<Vec<Permutation>>,
    truncation: Truncation,
}

impl FockSpace {
    pub fn new(s2: ScatteringFunction, grid: RapidityGrid, n_max: usize) -> Result<Self> {
        if n_max > MAX_SECTOR {
            return Err(Error::InvalidParameter(format!(
                "n_max = {n_max} exceeds the dense cap {MAX_SECTOR}"
            )));
        }
        let d = grid.len();
        let nodes = grid.nodes();
        let table = (0..d * d)
            .map(|ab| s2.eval_real(nodes[ab / d] - nodes[ab % d]))
            .collect();
        let perms = (0..=n_max).map(Permutation::all).collect();
        Ok(Self {
            s2,
            grid,
            n_max,
            table,
            perms,
            truncation: Truncation::Strict,
        })
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn s2(&self) -> &ScatteringFunction {
        &self.s2
    }

    pub fn grid(&self) -> &RapidityGrid {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.grid.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        (0..=self.n_max).map(|n| self.d().pow(n as u32)).sum()
    }

    pub fn sector_offset(&self, n: usize) -> usize {
        (0..n).map(|k| self.d().pow(k as u32)).sum()
    }

    /// `S2(θ_a − θ_b)` for grid indices.
    #[inline]
    pub fn s(&self, a: usize, b: usize) -> C64 {
        self.table[a * self.d() + b]
    }

    pub fn vacuum(&self) -> FockVector {
        FockVector::vacuum(self.d(), self.n_max)
    }

    pub fn zero(&self) -> FockVector {
        FockVector::zero(self.d(), self.n_max)
    }

    /// Unit vector `e_i` of the one-particle space.
    pub fn mode(&self, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; self.d()];
        v[i] = ONE;
        v
    }

    fn check(&self, v: &FockVector) -> Result<()> {
        if v.d != self.d() || v.n_max() != self.n_max {
            return Err(Error::SizeMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    /// `S^ρ` at the grid rapidities `θ_{idx}`.
    pub(crate) fn srho_at(&self, rho: &Permutation, idx: &[usize]) -> C64 {
        let n = idx.len();
        let mut acc = ONE;
        for l in 0..n {
            for k in (l + 1)..n {
                let (a, b) = (rho.apply(l), rho.apply(k));
                if a > b {
                    acc *= self.s(idx[a], idx[b]);
                }
            }
        }
        acc
    }

    /// `(D_n(ρ) t)(i) = S^ρ(θ_i) · t(i_{ρ(1)}, …, i_{ρ(n)})`.
    pub fn dn_apply(&self, rho: &Permutation, t: &SectorTensor) -> Result<SectorTensor> {
        if rho.len() != t.n {
            return Err(Error::SizeMismatch {
                expected: t.n,
                found: rho.len(),
            });
        }
        let (n, d) = (t.n, t.d);
        let mut out = SectorTensor::zeros(n, d);
        let mut idx = [0usize; MAX_SECTOR];
        let mut src = [0usize; MAX_SECTOR];
        for (flat, slot) in out.amplitudes.iter_mut().enumerate() {
            multi_index(flat, d, &mut idx[..n]);
            for j in 0..n {
                src[j] = idx[rho.apply(j)];
            }
            *slot = self.srho_at(rho, &idx[..n]) * t.amplitudes[flat_index(&src[..n], d)];
        }
        Ok(out)
    }

    /// `P_n = (1/n!) Σ_ρ D_n(ρ)`.
    pub fn pn_project(&self, t: &SectorTensor) -> SectorTensor {
        let (n, d) = (t.n, t.d);
        if n <= 1 {
            return t.clone();
        }
        let owned;
        let perms = match self.perms.get(n) {
            Some(p) => p,
            None => {
                owned = Permutation::all(n);
                &owned
            }
        };
        let norm = 1.0 / factorial(n);
        let mut out = SectorTensor::zeros(n, d);
        let mut idx = [0usize; MAX_SECTOR];
        let mut src = [0usize; MAX_SECTOR];
        for (flat, slot) in out.amplitudes.iter_mut().enumerate() {
            multi_index(flat, d, &mut idx[..n]);
            let mut acc = ZERO;
            for rho in perms {
                for j in 0..n {
                    src[j] = idx[rho.apply(j)];
                }
                let v = t.amplitudes[flat_index(&src[..n], d)];
                if v != ZERO {
                    acc += self.srho_at(rho, &idx[..n]) * v;
                }
            }
            *slot = acc * norm;
        }
        out
    }

    /// `P_n` as a dense `dⁿ × dⁿ` matrix.
    pub fn pn_matrix(&self, n: usize) -> nalgebra::DMatrix<C64> {
        let d = self.d();
        let len = d.pow(n as u32);
        let mut m = nalgebra::DMatrix::zeros(len, len);
        for col in 0..len {
            let mut e = SectorTensor::zeros(n, d);
            e.amplitudes[col] = ONE;
            let p = self.pn_project(&e);
            for (row, v) in p.amplitudes.iter().enumerate() {
                m[(row, col)] = *v;
            }
        }
        m
    }

    /// `z†(ψ)`; the boolean reports whether a nonzero top sector was dropped.
    pub fn zf_create_flagged(&self, psi: &[C64], v: &FockVector) -> Result<(FockVector, bool)> {
        self.check(v)?;
        if psi.len() != self.d() {
            return Err(Error::SizeMismatch {
                expected: self.d(),
                found: psi.len(),
            });
        }
        let truncated = !v.is_guarded();
        let mut out = self.zero();
        for n in 1..=self.n_max {
            let prev = &v.sectors[n - 1];
            if prev.is_zero() {
                continue;
            }
            let mut t = self.pn_project(&prev.left_mul(psi));
            t.scale(C64::new((n as f64).sqrt(), 0.0));
            out.sectors[n] = t;
        }
        Ok((out, truncated))
    }

    /// `(z†(ψ)Ψ)_n = √n P_n(ψ ⊗ Ψ_{n−1})`.
    pub fn zf_create(&self, psi: &[C64], v: &FockVector) -> Result<FockVector> {
        let (out, truncated) = self.zf_create_flagged(psi, v)?;
        if truncated && self.truncation == Truncation::Strict {
            return Err(Error::TruncationOverflow {
                sector: self.n_max + 1,
                n_max: self.n_max,
            });
        }
        Ok(out)
    }

    /// `(z(ψ)Ψ)_{n−1}(i₂, …) = √n Σ_i ψ_i Ψ_n(i, i₂, …)`.
    pub fn zf_annihilate(&self, psi: &[C64], v: &FockVector) -> Result<FockVector> {
        self.check(v)?;
        if psi.len() != self.d() {
            return Err(Error::SizeMismatch {
                expected: self.d(),
                found: psi.len(),
            });
        }
        let d = self.d();
        let mut out = self.zero();
        for n in 1..=self.n_max {
            let src = &v.sectors[n].amplitudes;
            let block = d.pow(n as u32 - 1);
            let c = (n as f64).sqrt();
            let dst = &mut out.sectors[n - 1].amplitudes;
            for (i, p) in psi.iter().enumerate() {
                if *p == ZERO {
                    continue;
                }
                for (slot, a) in dst.iter_mut().zip(&src[i * block..(i + 1) * block]) {
                    *slot += p * a * c;
                }
            }
        }
        Ok(out)
    }

    pub fn number_op(&self, v: &FockVector) -> FockVector {
        let mut out = v.clone();
        for (n, s) in out.sectors.iter_mut().enumerate() {
            s.scale(C64::new(n as f64, 0.0));
        }
        out
    }

    /// Space-time translation by `x = (x₀, x₁)` with `p·x = p⁰x⁰ − p¹x¹`.
    pub fn translate(&self, x: [f64; 2], v: &FockVector) -> FockVector {
        let m = self.grid.mass();
        let phase: Vec<C64> = self
            .grid
            .nodes()
            .iter()
            .map(|t| C64::new(0.0, m * t.cosh() * x[0] - m * t.sinh() * x[1]).exp())
            .collect();
        let mut out = v.clone();
        let mut idx = [0usize; MAX_SECTOR];
        for s in out.sectors.iter_mut() {
            let n = s.n;
            for (flat, a) in s.amplitudes.iter_mut().enumerate() {
                multi_index(flat, s.d, &mut idx[..n]);
                *a *= idx[..n].iter().map(|&i| phase[i]).product::<C64>();
            }
        }
        out
    }

    /// `(JΨ)_n(i₁, …, i_n) = conj Ψ_n(i_n, …, i₁)`.
    pub fn reflect(&self, v: &FockVector) -> FockVector {
        let mut out = v.clone();
        let mut idx = [0usize; MAX_SECTOR];
        for (s, src) in out.sectors.iter_mut().zip(&v.sectors) {
            let n = s.n;
            for (flat, a) in s.amplitudes.iter_mut().enumerate() {
                multi_index(flat, s.d, &mut idx[..n]);
                idx[..n].reverse();
                *a = src.amplitudes[flat_index(&idx[..n], s.d)].conj();
            }
        }
        out
    }

    /// `φ(f) = z†(f⁺) + z(f⁻)`.
    pub fn field_apply(&self, fplus: &[C64], fminus: &[C64], v: &FockVector) -> Result<FockVector> {
        Ok(self.zf_create(fplus, v)?.add(&self.zf_annihilate(fminus, v)?))
    }
}

/// One Gaussian factor `a · exp(−(θ − θ₀)²/(2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
    pub amplitude: C64,
}

impl Gaussian {
    pub fn eval(&self, z: C64) -> C64 {
        let u = z - self.center;
        self.amplitude * (-(u * u) / (2.0 * self.width * self.width)).exp()
    }
}

/// Product of Gaussians, an entire function of all rapidities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormVector {
    factors: Vec<Gaussian>,
}

impl ClosedFormVector {
    pub fn new(factors: Vec<Gaussian>) -> Result<Self> {
        if let Some(g) = factors.iter().find(|g| !(g.width > 0.0)) {
            return Err(Error::InvalidParameter(format!("Gaussian width {} must be positive", g.width)));
        }
        Ok(Self { factors })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Gaussian] {
        &self.factors
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.factors.iter().zip(z).map(|(g, &x)| g.eval(x)).product()
    }
}

/// `∏_k e^{−ms cosh θ_{i_k}} · Ψ_n(θ_{i₁} − iπ/2, …, θ_{i_n} − iπ/2)` on `eval_nodes`.
pub fn xi_action(s: f64, mass: f64, v: &ClosedFormVector, eval_nodes: &[f64]) -> Result<SectorTensor> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("splitting distance s = {s} must be positive")));
    }
    let d = eval_nodes.len();
    let shift = C64::new(0.0, -FRAC_PI_2);
    let per_factor: Vec<Vec<C64>> = v
        .factors
        .iter()
        .map(|g| {
            eval_nodes
                .iter()
                .map(|&t| (-mass * s * t.cosh()).exp() * g.eval(t + shift))
                .collect()
        })
        .collect();
    let refs: Vec<&[C64]> = per_factor.iter().map(Vec::as_slice).collect();
    Ok(SectorTensor::product(d, &refs))
}

#[derive(Serialize, Deserialize)]
struct SectorJson {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct FockJson {
    grid: RapidityGrid,
    sectors: Vec<SectorJson>,
}

/// `{grid, sectors: [{n, amplitudes: [[re, im], …]}]}`.
pub fn fock_vector_to_json(grid: &RapidityGrid, v: &FockVector) -> String {
    let doc = FockJson {
        grid: grid.clone(),
        sectors: v
            .sectors
            .iter()
            .map(|s| SectorJson {
                n: s.n,
                amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("plain data serializes")
}

pub fn fock_vector_from_json(text: &str) -> Result<(RapidityGrid, FockVector)> {
    let doc: FockJson = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let d = doc.grid.len();
    let sectors = doc
        .sectors
        .into_iter()
        .map(|s| {
            SectorTensor::from_amplitudes(
                s.n,
                d,
                s.amplitudes.iter().map(|p| C64::new(p[0], p[1])).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((doc.grid, FockVector::from_sectors(d, sectors)?))
}
