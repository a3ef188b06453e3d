//! Contractions, contracted matrix elements and completely contracted matrix elements.
//!
//! Contraction pairs `(l, r)` use 1-based positions: `l ∈ {k+1, …, n}` on the bra side and
//! `r ∈ {1, …, k}` on the ket side. Grid indices are 0-based.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{flat_index, multi_index, FockSpace, FockVector, SectorTensor, MAX_SECTOR};
use crate::perm::{binomial, factorial};
use crate::scatfn::StripBound;
use crate::C64;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Contraction {
    n: usize,
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl Contraction {
    pub fn new(n: usize, k: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        check_pairs(n, k, &pairs)?;
        pairs.sort_unstable();
        Ok(Self { n, k, pairs })
    }

    pub fn empty(n: usize, k: usize) -> Self {
        Self { n, k, pairs: vec![] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sign(&self) -> i32 {
        if self.pairs.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn contracts_left(&self, l: usize) -> bool {
        self.pairs.iter().any(|p| p.0 == l)
    }

    pub fn contracts_right(&self, r: usize) -> bool {
        self.pairs.iter().any(|p| p.1 == r)
    }

    /// Uncontracted bra positions `k+1..=n`, ascending.
    pub fn free_left(&self) -> Vec<usize> {
        ((self.k + 1)..=self.n).filter(|&l| !self.contracts_left(l)).collect()
    }

    /// Uncontracted ket positions `1..=k`, ascending.
    pub fn free_right(&self) -> Vec<usize> {
        (1..=self.k).filter(|&r| !self.contracts_right(r)).collect()
    }
}

fn check_pairs(n: usize, k: usize, pairs: &[(usize, usize)]) -> Result<()> {
    if k > n {
        return Err(Error::MalformedContraction(format!("k = {k} exceeds n = {n}")));
    }
    for (j, &(l, r)) in pairs.iter().enumerate() {
        if !(l > k && l <= n) || !(r >= 1 && r <= k) {
            return Err(Error::MalformedContraction(format!(
                "pair ({l}, {r}) outside the left range {}..={n} or right range 1..={k}",
                k + 1
            )));
        }
        if pairs[..j].iter().any(|p| p.0 == l || p.1 == r) {
            return Err(Error::MalformedContraction(format!("index repeated in pair ({l}, {r})")));
        }
    }
    Ok(())
}

/// All of `C_{n,k}`, or `Ĉ_{n,k}` (no pair with `l = k + 1`) when `exclude_kplus1` is set,
/// in lexicographic order of the sorted pair lists.
pub fn enumerate_contractions(n: usize, k: usize, exclude_kplus1: bool) -> Vec<Contraction> {
    fn extend(
        l: usize,
        n: usize,
        k: usize,
        skip: Option<usize>,
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if l > n {
            out.push(current.clone());
            return;
        }
        extend(l + 1, n, k, skip, used, current, out);
        if Some(l) == skip {
            return;
        }
        for r in 1..=k {
            if !used[r] {
                used[r] = true;
                current.push((l, r));
                extend(l + 1, n, k, skip, used, current, out);
                current.pop();
                used[r] = false;
            }
        }
    }
    assert!(k <= n, "k must not exceed n");
    let skip = exclude_kplus1.then_some(k + 1);
    let mut out = Vec::new();
    extend(k + 1, n, k, skip, &mut vec![false; k + 1], &mut Vec::new(), &mut out);
    out.sort();
    out.into_iter()
        .map(|pairs| Contraction { n, k, pairs })
        .collect()
}

/// `Σ_N N! C(k, N) C(n − k, N)`, or with `n − k − 1` for `Ĉ_{n,k}`.
pub fn contraction_count(n: usize, k: usize, exclude_kplus1: bool) -> usize {
    let left = if exclude_kplus1 { (n - k).saturating_sub(1) } else { n - k };
    (0..=k.min(left))
        .map(|m| factorial(m) as usize * binomial(k, m) * binomial(left, m))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionFactor {
    /// Kronecker support: `i_l = i_r` for every pair.
    pub support: bool,
    /// `(−1)^{|C|}`.
    pub sign: i32,
    /// `S_C^{(k)}` at the grid rapidities.
    pub s_value: C64,
}

impl FockSpace {
    /// `S^{(k)}_{a,b}` at grid indices `idx` (positions 1-based).
    fn s_swapped(&self, idx: &[usize], a: usize, b: usize, k: usize) -> C64 {
        if (a <= k && k < b) || (b <= k && k < a) {
            self.s(idx[b - 1], idx[a - 1])
        } else {
            self.s(idx[a - 1], idx[b - 1])
        }
    }

    /// `δ_C` and `S_C^{(k)}` for the contraction `c` at grid indices `idx`.
    pub fn contraction_factor(&self, c: &Contraction, idx: &[usize], k: usize) -> Result<ContractionFactor> {
        check_pairs(c.n, k, &c.pairs)?;
        if idx.len() != c.n {
            return Err(Error::SizeMismatch {
                expected: c.n,
                found: idx.len(),
            });
        }
        if let Some(&i) = idx.iter().find(|&&i| i >= self.d()) {
            return Err(Error::InvalidParameter(format!("grid index {i} out of range")));
        }
        let support = c.pairs.iter().all(|&(l, r)| idx[l - 1] == idx[r - 1]);
        let mut s_value = ONE;
        for &(l, r) in &c.pairs {
            for m in (r + 1)..l {
                s_value *= self.s_swapped(idx, m, r, k);
            }
        }
        for &(li, ri) in &c.pairs {
            for &(lj, rj) in &c.pairs {
                if ri < rj && li < lj {
                    s_value *= self.s_swapped(idx, rj, li, k);
                }
            }
        }
        Ok(ContractionFactor {
            support,
            sign: c.sign(),
            s_value,
        })
    }
}

/// A bounded operator on the truncated Fock space, as a dense matrix in the flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRep {
    matrix: DMatrix<C64>,
    d: usize,
    n_max: usize,
}

impl OperatorRep {
    pub fn new(matrix: DMatrix<C64>, d: usize, n_max: usize) -> Result<Self> {
        let dim: usize = (0..=n_max).map(|n| d.pow(n as u32)).sum();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { matrix, d, n_max })
    }

    pub fn identity(space: &FockSpace) -> Self {
        Self {
            matrix: DMatrix::identity(space.dim(), space.dim()),
            d: space.d(),
            n_max: space.n_max(),
        }
    }

    /// Matrix of a linear map given by its action on Fock vectors.
    pub fn from_map<F>(space: &FockSpace, f: F) -> Result<Self>
    where
        F: Fn(&FockVector) -> Result<FockVector>,
    {
        let dim = space.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        for col in 0..dim {
            e[col] = ONE;
            let image = f(&FockVector::from_flat(space.d(), space.n_max(), &e)?)?.to_flat();
            m.set_column(col, &nalgebra::DVector::from_vec(image));
            e[col] = ZERO;
        }
        Self::new(m, space.d(), space.n_max())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).as_slice().to_vec()
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        self.matrix.singular_values().iter().cloned().fold(0.0, f64::max)
    }

    /// Compression `P A P` to the S2-symmetric subspace.
    pub fn project(&self, space: &FockSpace) -> Result<Self> {
        if space.d() != self.d || space.n_max() != self.n_max {
            return Err(Error::SizeMismatch {
                expected: space.dim(),
                found: self.matrix.nrows(),
            });
        }
        let p: Vec<DMatrix<C64>> = (0..=self.n_max).map(|n| space.pn_matrix(n)).collect();
        let mut out = DMatrix::zeros(self.matrix.nrows(), self.matrix.ncols());
        for a in 0..=self.n_max {
            let (ra, la) = (space.sector_offset(a), p[a].nrows());
            for b in 0..=self.n_max {
                let (rb, lb) = (space.sector_offset(b), p[b].nrows());
                let block = self.matrix.view((ra, rb), (la, lb));
                let projected = &p[a] * block * &p[b];
                out.view_mut((ra, rb), (la, lb)).copy_from(&projected);
            }
        }
        Ok(Self {
            matrix: out,
            d: self.d,
            n_max: self.n_max,
        })
    }
}

/// Cached states `z†(e_{s₁}) ⋯ z†(e_{s_m}) Ω` for every mode sequence of length `≤ n_max`,
/// together with the images needed for matrix elements and commutators.
pub struct MatrixElements<'a> {
    space: &'a FockSpace,
    op: OperatorRep,
    states: Vec<FockVector>,
    op_states: Vec<Option<Vec<C64>>>,
    annihilator_images: HashMap<(usize, usize), Vec<C64>>,
    creator_images: HashMap<(usize, usize), Vec<C64>>,
}

impl<'a> MatrixElements<'a> {
    /// `op` is compressed to the symmetric subspace first.
    pub fn new(space: &'a FockSpace, op: &OperatorRep) -> Result<Self> {
        let op = op.project(space)?;
        let d = space.d();
        let mut states: Vec<FockVector> = Vec::with_capacity(space.dim());
        states.push(space.vacuum());
        for m in 1..=space.n_max() {
            let mut seq = [0usize; MAX_SECTOR];
            for flat in 0..d.pow(m as u32) {
                multi_index(flat, d, &mut seq[..m]);
                let tail = space.sector_offset(m - 1) + flat_index(&seq[1..m], d);
                let (v, _) = space.zf_create_flagged(&space.mode(seq[0]), &states[tail])?;
                states.push(v);
            }
        }
        let n = states.len();
        Ok(Self {
            space,
            op,
            states,
            op_states: vec![None; n],
            annihilator_images: HashMap::new(),
            creator_images: HashMap::new(),
        })
    }

    fn id(&self, seq: &[usize]) -> usize {
        self.space.sector_offset(seq.len()) + flat_index(seq, self.space.d())
    }

    pub fn state(&self, seq: &[usize]) -> &FockVector {
        &self.states[self.id(seq)]
    }

    fn op_state(&mut self, seq: &[usize]) -> &[C64] {
        let id = self.id(seq);
        if self.op_states[id].is_none() {
            self.op_states[id] = Some(self.op.apply(&self.states[id].to_flat()));
        }
        self.op_states[id].as_deref().unwrap()
    }

    /// `⟨state(bra), w⟩` for a flat vector `w`.
    fn project_onto(&self, bra: &[usize], w: &[C64]) -> C64 {
        let sector = bra.len();
        let off = self.space.sector_offset(sector);
        let s = self.state(bra).sector(sector).amplitudes();
        s.iter().zip(&w[off..off + s.len()]).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨state(bra), A state(ket)⟩`.
    pub fn element(&mut self, bra: &[usize], ket: &[usize]) -> C64 {
        self.op_state(ket);
        let w = self.op_states[self.id(ket)].as_deref().unwrap();
        self.project_onto(bra, w)
    }

    /// `⟨state(bra), [z(e_j), A] state(ket)⟩`.
    pub fn element_annihilator_commutator(&mut self, bra: &[usize], j: usize, ket: &[usize]) -> Result<C64> {
        let key = (j, self.id(ket));
        if !self.annihilator_images.contains_key(&key) {
            let sp = self.space;
            let (d, n_max) = (sp.d(), sp.n_max());
            let e = sp.mode(j);
            let a_ket = FockVector::from_flat(d, n_max, self.op_state(ket))?;
            let za = sp.zf_annihilate(&e, &a_ket)?.to_flat();
            let z_ket = sp.zf_annihilate(&e, self.state(ket))?.to_flat();
            let az = self.op.apply(&z_ket);
            let image = za.iter().zip(&az).map(|(x, y)| x - y).collect();
            self.annihilator_images.insert(key, image);
        }
        Ok(self.project_onto(bra, &self.annihilator_images[&key]))
    }

    /// `⟨state(bra), [A, z†(e_j)] state(ket)⟩`.
    pub fn element_creator_commutator(&mut self, bra: &[usize], j: usize, ket: &[usize]) -> Result<C64> {
        let mut longer = Vec::with_capacity(ket.len() + 1);
        longer.push(j);
        longer.extend_from_slice(ket);
        let az = self.element(bra, &longer);
        let key = (j, self.id(ket));
        if !self.creator_images.contains_key(&key) {
            let sp = self.space;
            let a_ket = FockVector::from_flat(sp.d(), sp.n_max(), self.op_state(ket))?;
            let (za, _) = sp.zf_create_flagged(&sp.mode(j), &a_ket)?;
            self.creator_images.insert(key, za.to_flat());
        }
        Ok(az - self.project_onto(bra, &self.creator_images[&key]))
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n > self.space.n_max() {
            return Err(Error::TruncationOverflow {
                sector: n,
                n_max: self.space.n_max(),
            });
        }
        Ok(())
    }

    /// Bra and ket mode sequences of `⟨l_C|A|r_C⟩_{n,k}` at grid indices `idx`:
    /// bra in ascending, ket in descending position order, contracted positions omitted.
    fn sequences(c: &Contraction, idx: &[usize], k: usize, omit_left: Option<usize>) -> (Vec<usize>, Vec<usize>) {
        let bra = ((k + 1)..=c.n)
            .filter(|&l| !c.contracts_left(l) && Some(l) != omit_left)
            .map(|l| idx[l - 1])
            .collect();
        let ket = (1..=k)
            .rev()
            .filter(|&r| !c.contracts_right(r))
            .map(|r| idx[r - 1])
            .collect();
        (bra, ket)
    }

    /// `⟨l_C|A|r_C⟩_{n,k}` as a tensor over the free bra positions (ascending) followed by
    /// the free ket positions (ascending).
    pub fn contracted_me(&mut self, c: &Contraction) -> Result<SectorTensor> {
        self.check_n(c.n)?;
        let (left, right) = (c.free_left(), c.free_right());
        let free = left.len() + right.len();
        let d = self.space.d();
        let mut out = SectorTensor::zeros(free, d);
        let mut idx = vec![0usize; c.n];
        let mut f = [0usize; MAX_SECTOR];
        for flat in 0..d.pow(free as u32) {
            multi_index(flat, d, &mut f[..free]);
            for (slot, &p) in left.iter().chain(&right).enumerate() {
                idx[p - 1] = f[slot];
            }
            let (bra, ket) = Self::sequences(c, &idx, c.k, None);
            out.amplitudes_mut()[flat] = self.element(&bra, &ket);
        }
        Ok(out)
    }

    /// `⟨A⟩^con_{n,k}` as an `n`-index tensor.
    pub fn acon(&mut self, n: usize, k: usize) -> Result<SectorTensor> {
        self.check_n(n)?;
        let contractions = enumerate_contractions(n, k, false);
        let d = self.space.d();
        let mut out = SectorTensor::zeros(n, d);
        let mut idx = [0usize; MAX_SECTOR];
        for flat in 0..d.pow(n as u32) {
            multi_index(flat, d, &mut idx[..n]);
            let mut acc = ZERO;
            for c in &contractions {
                let f = self.space.contraction_factor(c, &idx[..n], k)?;
                if !f.support {
                    continue;
                }
                let (bra, ket) = Self::sequences(c, &idx[..n], k, None);
                acc += f.s_value * f.sign as f64 * self.element(&bra, &ket);
            }
            out.amplitudes_mut()[flat] = acc;
        }
        Ok(out)
    }

    /// Right-hand sides of the two commutator recursions, as `n`-index tensors:
    /// the first reproduces `⟨A⟩^con_{n,k}`, the second `⟨A⟩^con_{n,k+1}`.
    pub fn recursion_sides(&mut self, n: usize, k: usize) -> Result<(SectorTensor, SectorTensor)> {
        self.check_n(n)?;
        if k >= n {
            return Err(Error::InvalidParameter(format!("need k < n, got k = {k}, n = {n}")));
        }
        let hat = enumerate_contractions(n, k, true);
        let d = self.space.d();
        let mut first = SectorTensor::zeros(n, d);
        let mut second = SectorTensor::zeros(n, d);
        let mut idx = [0usize; MAX_SECTOR];
        for flat in 0..d.pow(n as u32) {
            multi_index(flat, d, &mut idx[..n]);
            let j = idx[k];
            let (mut a1, mut a2) = (ZERO, ZERO);
            for c in &hat {
                let f = self.space.contraction_factor(c, &idx[..n], k)?;
                if !f.support {
                    continue;
                }
                let g = self.space.contraction_factor(c, &idx[..n], k + 1)?;
                let (bra, ket) = Self::sequences(c, &idx[..n], k, Some(k + 1));
                let sign = f.sign as f64;
                a1 += f.s_value * sign * self.element_annihilator_commutator(&bra, j, &ket)?;
                a2 += g.s_value * sign * self.element_creator_commutator(&bra, j, &ket)?;
            }
            first.amplitudes_mut()[flat] = a1;
            second.amplitudes_mut()[flat] = a2;
        }
        Ok((first, second))
    }

    /// Max-abs residuals of the two commutator recursions at `(n, k)`.
    pub fn lemma_tech_residual(&mut self, n: usize, k: usize) -> Result<(f64, f64)> {
        let (first, second) = self.recursion_sides(n, k)?;
        let con_k = self.acon(n, k)?;
        let con_k1 = self.acon(n, k + 1)?;
        Ok((con_k.max_abs_diff(&first), con_k1.max_abs_diff(&second)))
    }
}

/// `⟨A⟩^con_{n,k}` for a single operator.
pub fn acon(space: &FockSpace, op: &OperatorRep, n: usize, k: usize) -> Result<SectorTensor> {
    MatrixElements::new(space, op)?.acon(n, k)
}

/// `⟨l_C|A|r_C⟩_{n,k}` for a single operator.
pub fn contracted_me(space: &FockSpace, op: &OperatorRep, c: &Contraction) -> Result<SectorTensor> {
    MatrixElements::new(space, op)?.contracted_me(c)
}

/// Residuals of the two commutator recursions for a single operator.
pub fn lemma_tech_residual(space: &FockSpace, op: &OperatorRep, n: usize, k: usize) -> Result<(f64, f64)> {
    MatrixElements::new(space, op)?.lemma_tech_residual(n, k)
}

/// The uniform bound constant `(8/π) ‖S2‖ / √(κ_S − κ)` on the continued form factors,
/// with `‖S2‖` taken on the strip of level `κ_S`.
pub fn master_bound(strip: &StripBound, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < strip.level) {
        return Err(Error::InvalidParameter(format!(
            "κ = {kappa} must lie in (0, {})",
            strip.level
        )));
    }
    Ok(8.0 / PI * strip.value / (strip.level - kappa).sqrt())
}
