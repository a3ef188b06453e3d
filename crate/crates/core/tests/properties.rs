use std::f64::consts::PI;

use fsmat::fock::{flat_index, multi_index, FockSpace, SectorTensor};
use fsmat::formfactor::{contraction_count, enumerate_contractions};
use fsmat::grid::WeightRule;
use fsmat::nuclearity::{bosonic_series, fermionic_series};
use fsmat::perm::Permutation;
use fsmat::{RapidityGrid, ScatteringFunction, C64};
use proptest::prelude::*;

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn pole_family() -> impl Strategy<Value = ScatteringFunction> {
    (
        prop::sample::select(vec![1, -1]),
        prop::collection::vec((-1.5f64..1.5, 0.1f64..3.0), 1..3),
    )
        .prop_map(|(sign, betas)| {
            let poles = betas
                .into_iter()
                .flat_map(|(re, im)| [C64::new(re, im), C64::new(-re, im)])
                .collect();
            ScatteringFunction::product_poles(sign, poles).unwrap()
        })
}

fn tensor(n: usize, d: usize) -> impl Strategy<Value = SectorTensor> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d.pow(n as u32)).prop_map(move |v| {
        let amps = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        SectorTensor::from_amplitudes(n, d, amps).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_and_inverse(p in permutation(5), q in permutation(5)) {
        let pq = p.compose(&q);
        for j in 0..5 {
            prop_assert_eq!(pq.apply(j), p.apply(q.apply(j)));
        }
        prop_assert!(p.compose(&p.inverse()).is_identity());
        prop_assert_eq!(pq.sign(), p.sign() * q.sign());
    }

    #[test]
    fn s2_relations_hold(s2 in pole_family(), theta in -6.0f64..6.0) {
        let s = s2.eval_real(theta);
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        prop_assert!((s.conj() - s2.eval_real(-theta)).norm() < 1e-10);
        if let Ok(up) = s2.eval(C64::new(theta, PI)) {
            prop_assert!((up - s2.eval_real(-theta)).norm() < 1e-8 * (1.0 + up.norm()));
        }
    }

    #[test]
    fn index_round_trip(idx in prop::collection::vec(0usize..4, 0..6)) {
        let flat = flat_index(&idx, 4);
        let mut back = vec![0usize; idx.len()];
        multi_index(flat, 4, &mut back);
        prop_assert_eq!(back, idx);
    }

    #[test]
    fn contraction_count_formula(n in 0usize..7, k in 0usize..7) {
        prop_assume!(k <= n);
        prop_assert_eq!(enumerate_contractions(n, k, false).len(), contraction_count(n, k, false));
    }

    #[test]
    fn series_bounds_are_monotone(x in 0.0f64..3.0, dx in 0.001f64..1.0) {
        let a = fermionic_series(x);
        let b = fermionic_series(x + dx);
        match (a, b) {
            (fsmat::nuclearity::SeriesBound::Finite { ln_value: la },
             fsmat::nuclearity::SeriesBound::Finite { ln_value: lb }) => prop_assert!(lb > la),
            _ => prop_assert!(false, "fermionic series must converge"),
        }
        prop_assert_eq!(bosonic_series(x).is_finite(), x < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_orthogonal(t in tensor(3, 3), u in tensor(3, 3)) {
        let grid = RapidityGrid::from_range(3, -1.0, 1.0, 1.0, WeightRule::Unit).unwrap();
        let sp = FockSpace::new(ScatteringFunction::sinh_gordon(1.3).unwrap(), grid, 3).unwrap();
        let pt = sp.pn_project(&t);
        prop_assert!(pt.max_abs_diff(&sp.pn_project(&pt)) < 1e-12);
        let lhs = pt.inner(&u);
        let rhs = t.inner(&sp.pn_project(&u));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn representation_law(p in permutation(3), q in permutation(3), t in tensor(3, 2)) {
        let grid = RapidityGrid::from_range(2, -0.5, 0.7, 1.0, WeightRule::Unit).unwrap();
        let s2 = ScatteringFunction::product_poles(1, vec![C64::new(0.3, 1.0), C64::new(-0.3, 1.0)]).unwrap();
        let sp = FockSpace::new(s2, grid, 3).unwrap();
        let lhs = sp.dn_apply(&p.compose(&q), &t).unwrap();
        let rhs = sp.dn_apply(&p, &sp.dn_apply(&q, &t).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
