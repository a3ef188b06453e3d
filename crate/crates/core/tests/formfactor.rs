use std::f64::consts::PI;

use fsmat::fock::{multi_index, FockSpace, FockVector, SectorTensor};
use fsmat::formfactor::*;
use fsmat::grid::WeightRule;
use fsmat::perm::factorial;
use fsmat::sample::{random_hermitian, random_matrix, random_vector};
use fsmat::{RapidityGrid, ScatteringFunction, C64};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<ScatteringFunction> {
    vec![
        ScatteringFunction::constant(-1).unwrap(),
        ScatteringFunction::product_poles(1, vec![C64::new(0.0, PI / 4.0)]).unwrap(),
        ScatteringFunction::sinh_gordon(1.0).unwrap(),
    ]
}

fn space(s2: ScatteringFunction, d: usize, n_max: usize) -> FockSpace {
    let grid = RapidityGrid::from_range(d, -1.0, 1.2, 1.0, WeightRule::Unit).unwrap();
    FockSpace::new(s2, grid, n_max).unwrap()
}

/// Every injective partial map from `{k+1..n}` to `{1..k}`, by brute force over all
/// assignments `l ↦ r or none`.
fn all_contractions(n: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let left: Vec<usize> = ((k + 1)..=n).collect();
    let mut out = Vec::new();
    let choices = (k + 1).pow(left.len() as u32);
    for code in 0..choices {
        let mut c = code;
        let mut pairs = Vec::new();
        for &l in &left {
            let r = c % (k + 1);
            c /= k + 1;
            if r > 0 {
                pairs.push((l, r));
            }
        }
        let mut rs: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        rs.sort();
        rs.dedup();
        if rs.len() == pairs.len() {
            out.push(pairs);
        }
    }
    out
}

fn oracle_factor(s2: &ScatteringFunction, nodes: &[f64], idx: &[usize], pairs: &[(usize, usize)], k: usize) -> C64 {
    let theta = |p: usize| nodes[idx[p - 1]];
    let s = |a: usize, b: usize| {
        let crosses = (a <= k && k < b) || (b <= k && k < a);
        let (x, y) = if crosses { (b, a) } else { (a, b) };
        s2.eval_real(theta(x) - theta(y))
    };
    let mut acc = C64::new(1.0, 0.0);
    for &(l, r) in pairs {
        for m in (r + 1)..l {
            acc *= s(m, r);
        }
    }
    for &(li, ri) in pairs {
        for &(lj, rj) in pairs {
            if ri < rj && li < lj {
                acc *= s(rj, li);
            }
        }
    }
    acc
}

/// `⟨A⟩^con_{n,k}` from explicit creation chains and the unprojected operator.
fn oracle_acon(sp: &FockSpace, a: &DMatrix<C64>, n: usize, k: usize) -> SectorTensor {
    let d = sp.d();
    let nodes = sp.grid().nodes().to_vec();
    let contractions = all_contractions(n, k);
    let mut out = SectorTensor::zeros(n, d);
    let mut idx = vec![0usize; n];
    for flat in 0..d.pow(n as u32) {
        multi_index(flat, d, &mut idx);
        let mut acc = C64::new(0.0, 0.0);
        for pairs in &contractions {
            if pairs.iter().any(|&(l, r)| idx[l - 1] != idx[r - 1]) {
                continue;
            }
            let mut bra = sp.vacuum();
            for l in ((k + 1)..=n).rev() {
                if !pairs.iter().any(|p| p.0 == l) {
                    bra = sp.zf_create(&sp.mode(idx[l - 1]), &bra).unwrap();
                }
            }
            let mut ket = sp.vacuum();
            for r in 1..=k {
                if !pairs.iter().any(|p| p.1 == r) {
                    ket = sp.zf_create(&sp.mode(idx[r - 1]), &ket).unwrap();
                }
            }
            let a_ket = a * nalgebra::DVector::from_vec(ket.to_flat());
            let me: C64 = bra
                .to_flat()
                .iter()
                .zip(a_ket.iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            let sign = if pairs.len() % 2 == 0 { 1.0 } else { -1.0 };
            acc += oracle_factor(sp.s2(), &nodes, &idx, pairs, k) * me * sign;
        }
        out.amplitudes_mut()[flat] = acc;
    }
    out
}

#[test]
fn enumeration_matches_brute_force() {
    for n in 0..=5 {
        for k in 0..=n {
            let mut brute: Vec<Vec<(usize, usize)>> = all_contractions(n, k)
                .into_iter()
                .map(|mut p| {
                    p.sort();
                    p
                })
                .collect();
            brute.sort();
            let listed: Vec<Vec<(usize, usize)>> = enumerate_contractions(n, k, false)
                .iter()
                .map(|c| c.pairs().to_vec())
                .collect();
            assert_eq!(listed, brute, "n={n} k={k}");
        }
    }
}

#[test]
fn acon_matches_independent_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for s2 in families() {
        let sp = space(s2, 3, 3);
        let a = random_matrix(&mut rng, sp.dim());
        let op = OperatorRep::new(a.clone(), 3, 3).unwrap();
        let mut me = MatrixElements::new(&sp, &op).unwrap();
        for n in 1..=3 {
            for k in 0..=n {
                let fast = me.acon(n, k).unwrap();
                let slow = oracle_acon(&sp, &a, n, k);
                assert!(fast.max_abs_diff(&slow) < 1e-12, "{} n={n} k={k}", sp.s2().label());
            }
        }
    }
}

#[test]
fn recursions_hold_for_random_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for s2 in families() {
        let sp = space(s2, 3, 4);
        for _ in 0..3 {
            let op = OperatorRep::new(random_hermitian(&mut rng, sp.dim()), 3, 4).unwrap();
            let mut me = MatrixElements::new(&sp, &op).unwrap();
            for n in 1..=4 {
                for k in 0..n {
                    let (r1, r2) = me.lemma_tech_residual(n, k).unwrap();
                    assert!(r1 < 1e-10 && r2 < 1e-10, "n={n} k={k}: {r1:e} {r2:e}");
                }
            }
        }
    }
}

#[test]
fn recursions_hold_for_creation_annihilation_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let sp = space(ScatteringFunction::sinh_gordon(1.0).unwrap(), 4, 4);
    let psi = random_vector(&mut rng, 4);
    let chi = random_vector(&mut rng, 4);
    let op = OperatorRep::from_map(&sp, |v: &FockVector| {
        let (w, _) = sp.zf_create_flagged(&psi, &sp.zf_annihilate(&chi, v)?)?;
        Ok(w)
    })
    .unwrap();
    let mut me = MatrixElements::new(&sp, &op).unwrap();
    for k in 0..4 {
        let (r1, r2) = me.lemma_tech_residual(4, k).unwrap();
        assert!(r1 < 1e-9 && r2 < 1e-9, "k={k}: {r1:e} {r2:e}");
    }
}

#[test]
fn contracted_elements_obey_the_factorial_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let sp = space(ScatteringFunction::sinh_gordon(1.0).unwrap(), 3, 4);
    let op = OperatorRep::new(random_hermitian(&mut rng, sp.dim()), 3, 4).unwrap();
    let norm = op.norm();
    let mut me = MatrixElements::new(&sp, &op).unwrap();
    for (n, k) in [(4, 2), (3, 1), (4, 1)] {
        for c in enumerate_contractions(n, k, false) {
            let t = me.contracted_me(&c).unwrap();
            let (a, b) = (c.free_left().len(), c.free_right().len());
            let rows = 3usize.pow(a as u32);
            let m = DMatrix::from_row_slice(rows, t.len() / rows, t.amplitudes());
            let sup = m.singular_values().iter().cloned().fold(0.0, f64::max);
            let bound = (factorial(a) * factorial(b)).sqrt() * norm;
            assert!(sup <= bound * (1.0 + 1e-12), "{c:?}: {sup} > {bound}");
        }
    }
}

#[test]
fn identity_operator_contractions() {
    let sp = space(ScatteringFunction::constant(1).unwrap(), 3, 3);
    let mut me = MatrixElements::new(&sp, &OperatorRep::identity(&sp)).unwrap();
    // ⟨l_C|1|r_C⟩ is nonzero only for equal particle numbers
    let c = Contraction::new(3, 1, vec![(2, 1)]).unwrap();
    assert!(me.contracted_me(&c).unwrap().is_zero());
    let t = me.contracted_me(&Contraction::empty(2, 1)).unwrap();
    assert!((t.get(&[1, 1]) - 1.0).norm() < 1e-14);
}

#[test]
fn master_bound_needs_interior_kappa() {
    let s2 = ScatteringFunction::product_poles(1, vec![C64::new(0.0, PI / 4.0)]).unwrap();
    let strip = s2.strip_bound(0.5).unwrap();
    let c = master_bound(&strip, 0.2).unwrap();
    assert!((c - 8.0 / PI * strip.value / 0.3f64.sqrt()).abs() < 1e-12);
    assert!(master_bound(&strip, 0.6).is_err());
    assert!(master_bound(&strip, 0.0).is_err());
}
