use std::f64::consts::PI;

use fsmat::fock::{FockSpace, SectorTensor};
use fsmat::grid::WeightRule;
use fsmat::sample::random_vector;
use fsmat::scattering::*;
use fsmat::{RapidityGrid, ScatteringFunction, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<ScatteringFunction> {
    vec![
        ScatteringFunction::constant(-1).unwrap(),
        ScatteringFunction::product_poles(1, vec![C64::new(0.0, PI / 4.0)]).unwrap(),
        ScatteringFunction::sinh_gordon(1.0).unwrap(),
    ]
}

fn space(s2: ScatteringFunction, d: usize, n: usize) -> FockSpace {
    let grid = RapidityGrid::from_range(d, -1.5, 2.0, 1.0, WeightRule::Unit).unwrap();
    FockSpace::new(s2, grid, n).unwrap()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, d: usize) -> SectorTensor {
    let raw = SectorTensor::from_amplitudes(n, d, random_vector(rng, d.pow(n as u32))).unwrap();
    symmetrize(&raw)
}

/// Zeroes amplitudes at coincident rapidities, which the S2-symmetric image of a
/// sign −1 family cannot carry.
fn off_diagonal(mut t: SectorTensor) -> SectorTensor {
    let (n, d) = (t.n(), t.d());
    let mut idx = vec![0usize; n];
    for flat in 0..t.len() {
        fsmat::fock::multi_index(flat, d, &mut idx);
        let coincident = (0..n).any(|a| (a + 1..n).any(|b| idx[a] == idx[b]));
        if coincident {
            t.amplitudes_mut()[flat] = C64::new(0.0, 0.0);
        }
    }
    t
}

fn p_residual(sp: &FockSpace, t: &SectorTensor) -> f64 {
    t.max_abs_diff(&sp.pn_project(t))
}

#[test]
fn s_matrix_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for s2 in families() {
        for n in [2, 3] {
            let sp = space(s2.clone(), 6, n);
            for _ in 0..20 {
                let phi = random_symmetric(&mut rng, n, 6);
                let brute = s_matrix_bruteforce(&sp, &phi).unwrap();
                let closed = s_matrix_apply(&sp, &phi).unwrap();
                let r = brute.max_abs_diff(&closed);
                assert!(r < 1e-10, "{} n={n}: {r:e}", s2.label());
                assert!((closed.norm() - phi.norm()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn moller_maps_are_isometric_onto_symmetric_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s2 in families() {
        let fermionic = s2.sign_class().unwrap() == -1;
        let sp = space(s2, 4, 3);
        for dir in [Direction::Out, Direction::In] {
            for _ in 0..5 {
                let mut phi = random_symmetric(&mut rng, 3, 4);
                if fermionic {
                    phi = off_diagonal(phi);
                }
                let v = moller_apply(&sp, dir, &phi).unwrap();
                assert!((v.norm() - phi.norm()).abs() < 1e-12);
                assert!(p_residual(&sp, &v) < 1e-11);
            }
        }
    }
}

#[test]
fn collision_states_are_s2_symmetric() {
    let sp = space(ScatteringFunction::sinh_gordon(1.0).unwrap(), 6, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let blocks = [(0, 2), (2, 4), (4, 6)];
    let psis: Vec<Vec<C64>> = blocks
        .iter()
        .map(|&(lo, hi)| {
            let mut v = vec![C64::new(0.0, 0.0); 6];
            for (slot, z) in v[lo..hi].iter_mut().zip(random_vector(&mut rng, hi - lo)) {
                *slot = z;
            }
            v
        })
        .collect();
    let out = out_state(&sp, &psis).unwrap();
    let inn = in_state(&sp, &psis).unwrap();
    assert!(p_residual(&sp, &out) < 1e-11 && p_residual(&sp, &inn) < 1e-11);
    let product: f64 = psis.iter().map(|p| fsmat::linalg::norm(p)).product();
    assert!((out.norm() - product).abs() < 1e-12);
    assert!((inn.norm() - product).abs() < 1e-12);
    let reversed: Vec<Vec<C64>> = psis.iter().rev().cloned().collect();
    assert!(matches!(out_state(&sp, &reversed), Err(fsmat::Error::Precedence)));
}

#[test]
fn out_and_in_agree_without_scattering() {
    let sp = space(ScatteringFunction::constant(1).unwrap(), 5, 2);
    let mut a = vec![C64::new(0.0, 0.0); 5];
    let mut b = a.clone();
    a[0] = C64::new(0.3, 0.1);
    a[1] = C64::new(-0.2, 0.5);
    b[3] = C64::new(1.0, -1.0);
    let psis = vec![a, b];
    let out = out_state(&sp, &psis).unwrap();
    assert!(out.max_abs_diff(&in_state(&sp, &psis).unwrap()) < 1e-15);
}

#[test]
fn single_particle_maps_are_trivial() {
    let sp = space(ScatteringFunction::sinh_gordon(1.0).unwrap(), 4, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi = random_vector(&mut rng, 4);
    let t = SectorTensor::from_amplitudes(1, 4, psi.clone()).unwrap();
    assert!(out_state(&sp, &[psi.clone()]).unwrap().max_abs_diff(&t) < 1e-15);
    assert!(in_state(&sp, &[psi]).unwrap().max_abs_diff(&t) < 1e-15);
    for dir in [Direction::Out, Direction::In] {
        assert!(moller_apply(&sp, dir, &t).unwrap().max_abs_diff(&t) < 1e-15);
    }
    assert!(s_matrix_apply(&sp, &t).unwrap().max_abs_diff(&t) < 1e-15);
}

#[test]
fn minus_one_three_particles_flips_sign() {
    let sp = space(ScatteringFunction::constant(-1).unwrap(), 4, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let phi = random_symmetric(&mut rng, 3, 4);
    let brute = s_matrix_bruteforce(&sp, &phi).unwrap();
    let mut neg = phi.clone();
    neg.scale(C64::new(-1.0, 0.0));
    assert!(brute.max_abs_diff(&neg) < 1e-14);
}

#[test]
fn sinh_gordon_pair_factor_at_unit_separation() {
    let grid = RapidityGrid::new(vec![0.0, 1.0], None, 1.0).unwrap();
    let s2 = ScatteringFunction::sinh_gordon(1.0).unwrap();
    let sp = FockSpace::new(s2.clone(), grid, 2).unwrap();
    let mut phi = SectorTensor::zeros(2, 2);
    phi.set(&[0, 1], C64::new(1.0, 0.0));
    phi.set(&[1, 0], C64::new(1.0, 0.0));
    let s = s_matrix_apply(&sp, &phi).unwrap();
    assert!((s.get(&[0, 1]) - s2.eval_real(1.0)).norm() < 1e-15);
}

#[test]
fn completeness_across_families() {
    for s2 in families() {
        for d in [3, 5, 6] {
            let grid = RapidityGrid::from_range(d, -1.0, 1.0, 1.0, WeightRule::Unit).unwrap();
            for n in 1..=3 {
                let (rank, dim) = completeness_rank(&s2, n, &grid).unwrap();
                assert_eq!(rank, dim, "{} d={d} n={n}", s2.label());
            }
        }
    }
}

#[test]
fn fermionic_sector_above_grid_size_is_empty() {
    let grid = RapidityGrid::from_range(2, -1.0, 1.0, 1.0, WeightRule::Unit).unwrap();
    let sg = ScatteringFunction::sinh_gordon(1.0).unwrap();
    assert_eq!(completeness_rank(&sg, 3, &grid).unwrap(), (0, 0));
    assert_eq!(completeness_rank(&sg, 2, &grid).unwrap(), (1, 1));
}
