use std::f64::consts::{FRAC_PI_2, PI};

use fsmat::nuclearity::*;
use fsmat::{Error, ScatteringFunction, C64};

fn disc() -> KernelDiscretization {
    KernelDiscretization::default()
}

#[test]
fn trace_norm_positive_and_decreasing_in_s() {
    let values: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&s| t_trace_norm(1.0, s, PI / 4.0, &disc()).unwrap().value)
        .collect();
    assert!(values[0].is_finite() && values[0] > 0.0);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn trace_norm_is_even_in_kappa() {
    for &(s, k) in &[(1.0, PI / 4.0), (3.0, 0.2)] {
        let plus = t_trace_norm(1.0, s, k, &disc()).unwrap();
        let minus = t_trace_norm(1.0, s, -k, &disc()).unwrap();
        assert!((plus.value / minus.value - 1.0).abs() < 1e-8);
        assert!(plus.delta < 1e-6);
    }
}

#[test]
fn gauss_legendre_rule_agrees() {
    let gl = KernelDiscretization {
        rule: KernelRule::GaussLegendre,
        refinement_tol: 1e-6,
        ..disc()
    };
    let a = t_trace_norm(1.0, 2.0, 0.5, &gl).unwrap().value;
    let b = t_trace_norm(1.0, 2.0, 0.5, &disc()).unwrap().value;
    assert!((a / b - 1.0).abs() < 1e-5, "{a} {b}");
}

#[test]
fn windowed_singular_values_approach_from_below() {
    let (s, k) = (5.0, 0.4);
    let exact = t_trace_norm(1.0, s, k, &disc()).unwrap().value;
    let narrow = t_trace_norm_windowed(1.0, s, k, 4.0, 6.0).unwrap();
    let wide = t_trace_norm_windowed(1.0, s, k, 8.0, 6.0).unwrap();
    assert!(narrow <= exact * (1.0 + 1e-6) && wide <= exact * (1.0 + 1e-6));
    assert!(exact - wide < exact - narrow, "{narrow} {wide} {exact}");
    assert!((exact - wide) / exact < 0.05);
}

#[test]
fn kosaki_inequality_on_lattice() {
    for &m in &[0.5, 1.0, 2.0] {
        for &s in &[0.5, 1.0, 3.0] {
            for &k in &[0.2, 0.5, 1.0] {
                let c = kosaki_check(m, s, k, &disc()).unwrap();
                assert!(c.holds(), "m={m} s={s} κ={k}: {c:?}");
            }
        }
    }
    let a = kosaki_check(1.0, 1.0, PI / 4.0, &disc()).unwrap();
    let b = kosaki_check(1.0, 1.0, -PI / 4.0, &disc()).unwrap();
    assert!((a.lhs / b.lhs - 1.0).abs() < 1e-10);
    let far = kosaki_check(1.0, 40.0, PI / 4.0, &disc()).unwrap();
    assert!(far.lhs < 1e-8 && far.rhs < 1e-8);
}

#[test]
fn hardy_factor_behaviour() {
    let h: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&s| hardy_norm_factor(1.0, s, 0.4).unwrap())
        .collect();
    assert!(h[1] < h[0] && h[2] < h[1]);
    let mut last = hardy_norm_factor(1.0, 1.0, FRAC_PI_2 - 1e-2).unwrap();
    for eps in [1e-4, 1e-6, 1e-8, 1e-10] {
        let next = hardy_norm_factor(1.0, 1.0, FRAC_PI_2 - eps).unwrap();
        assert!(next > last);
        last = next;
    }
    assert!(last > 2.0 * hardy_norm_factor(1.0, 1.0, FRAC_PI_2 - 1e-2).unwrap());
}

#[test]
fn sigma_decreases_and_vanishes() {
    let s2 = ScatteringFunction::sinh_gordon(1.0).unwrap();
    let values: Vec<f64> = (1..=50)
        .map(|j| sigma_bound(&s2, 1.0, 0.1 * j as f64, 0.4).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    // the ratio is √(K₀(50 c)/K₀(c)) with c = cos κ, about 7e-11 here
    let far = sigma_bound(&s2, 1.0, 50.0, 0.4).unwrap();
    assert!(far < 1e-10 * sigma_bound(&s2, 1.0, 1.0, 0.4).unwrap());
    assert!(sigma_bound(&s2, 1.0, 1.0, 1.2).is_err());
}

#[test]
fn sigma_for_constant_minus_one() {
    let s2 = ScatteringFunction::constant(-1).unwrap();
    let k = PI / 4.0;
    let expected = 8.0 / PI / (FRAC_PI_2 - k).sqrt() * hardy_norm_factor(1.0, 1.0, k).unwrap();
    assert!((sigma_bound(&s2, 1.0, 1.0, k).unwrap() - expected).abs() < 1e-14);
}

#[test]
fn product_decreases_and_threshold_is_consistent() {
    let s2 = ScatteringFunction::constant(-1).unwrap();
    let result = s_min(&s2, 1.0, None, 8, &disc()).unwrap();
    let k = result.kappa_star;
    let rows = sweep(&s2, 1.0, &[0.5, 1.0, 2.0, 4.0], &[k], &disc()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].product < w[0].product));
    let below = nuclearity_row(&s2, 1.0, result.s_min * 0.999, k, &disc()).unwrap();
    let above = nuclearity_row(&s2, 1.0, result.s_min * 1.001, k, &disc()).unwrap();
    assert!(below.product > 1.0 && above.product < 1.0);
    assert!(!below.bound_bosonic.is_finite() && above.bound_bosonic.is_finite());
    assert!(result.s_min.is_finite() && result.s_min > 0.0);
}

#[test]
fn s_min_scales_with_inverse_mass() {
    let s2 = ScatteringFunction::constant(-1).unwrap();
    let one = s_min(&s2, 1.0, None, 8, &disc()).unwrap();
    let two = s_min(&s2, 2.0, None, 8, &disc()).unwrap();
    assert!((two.s_min * 2.0 / one.s_min - 1.0).abs() < 1e-5);
    assert_eq!(one.lattice.len(), 8);
}

#[test]
fn s_min_rejects_bad_search_interval() {
    let s2 = ScatteringFunction::sinh_gordon(1.0).unwrap();
    assert!(s_min(&s2, 1.0, Some((0.5, 1.2)), 8, &disc()).is_err());
    assert!(s_min(&s2, 1.0, Some((0.0, 0.5)), 8, &disc()).is_err());
}

#[test]
fn fermionic_mode_requires_odd_sign() {
    let bosonic = ScatteringFunction::product_poles(1, vec![C64::new(0.0, PI / 4.0)]).unwrap();
    let r = xi_norm_bound(&bosonic, 1.0, 1.0, 0.3, SeriesMode::Fermionic, &disc());
    assert!(matches!(r, Err(Error::Mode(_))));
    let sg = ScatteringFunction::sinh_gordon(1.0).unwrap();
    for s in [0.05, 0.1, 0.5, 1.0, 2.0] {
        let b = xi_norm_bound(&sg, 1.0, s, 0.5, SeriesMode::Fermionic, &disc()).unwrap();
        assert!(b.is_finite(), "s={s}");
    }
    let small = xi_norm_bound(&sg, 1.0, 0.05, 0.5, SeriesMode::Bosonic, &disc()).unwrap();
    assert_eq!(small, SeriesBound::Divergent);
}

#[test]
fn csv_header_and_divergent_rendering() {
    let sg = ScatteringFunction::sinh_gordon(1.0).unwrap();
    let rows = sweep(&sg, 1.0, &[0.1, 8.0], &[0.4], &disc()).unwrap();
    let csv = rows_to_csv(&rows);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,kappa,sigma,t_trace,product,bound_bosonic,fermionic_x,bound_fermionic"
    );
    assert!(lines.next().unwrap().contains("divergent"));
    assert!(!csv.contains("inf") && !csv.contains("NaN"));
    let json = serde_json::to_string(&rows).unwrap();
    assert!(json.contains("\"divergent\""));
}
