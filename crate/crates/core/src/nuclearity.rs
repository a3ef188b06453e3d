//! Bounds on the nuclear norm of the modular map: the Hardy-norm factor, `σ(s,κ)`, the
//! trace norm of the kernel `T_{s,κ}`, the splitting distance `s_min` and the series bounds.
//!
//! Every quantity depends on the mass and the splitting distance only through `a = m·s`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::quad::{gauss_legendre, integrate};
use crate::scatfn::{ScatteringFunction, StripBound};
use crate::C64;

/// `ln` of the row damping `e^{−(a/2) cosh θ}` that the half-range must reach, relative to `θ = 0`.
const DAMPING_LOG: f64 = 36.84;
/// Default κ search window for `s_min`, as fractions of `κ(S2)`. Below the lower end the
/// trace norm grows like `1/κ` and the threshold only moves outward.
pub const DEFAULT_KAPPA_WINDOW: (f64, f64) = (0.15, 0.95);
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelRule {
    /// Equally spaced nodes; converges geometrically for the analytic kernel.
    #[default]
    Trapezoid,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDiscretization {
    /// Half-range `Θ` of the θ window; chosen from the damping when absent.
    pub half_range: Option<f64>,
    /// Initial node count; chosen from `Θ/κ` when absent.
    pub node_count: Option<usize>,
    pub rule: KernelRule,
    pub refinement_tol: f64,
    pub max_nodes: usize,
}

impl Default for KernelDiscretization {
    fn default() -> Self {
        Self {
            half_range: None,
            node_count: None,
            rule: KernelRule::Trapezoid,
            refinement_tol: 1e-8,
            max_nodes: 2048,
        }
    }
}

impl KernelDiscretization {
    /// `Θ` with `e^{−(a/2) cosh Θ} = e^{−a/2} e^{−36.84}`.
    pub fn half_range_for(&self, a: f64) -> f64 {
        self.half_range
            .unwrap_or_else(|| (1.0 + 2.0 * DAMPING_LOG / a).acosh())
    }

    fn initial_nodes(&self, theta: f64, kappa: f64) -> usize {
        self.node_count
            .unwrap_or_else(|| 64usize.max((7.0 * theta / kappa).ceil() as usize))
            .max(16)
    }

    fn nodes(&self, theta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        match self.rule {
            KernelRule::Trapezoid => {
                let h = 2.0 * theta / (n - 1) as f64;
                let x = (0..n).map(|i| -theta + h * i as f64).collect();
                let mut w = vec![h; n];
                w[0] *= 0.5;
                w[n - 1] *= 0.5;
                (x, w)
            }
            KernelRule::GaussLegendre => {
                let (x, w) = gauss_legendre(n);
                (
                    x.iter().map(|t| t * theta).collect(),
                    w.iter().map(|wi| wi * theta).collect(),
                )
            }
        }
    }
}

/// A converged trace norm with its refinement history `(node count, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceNorm {
    pub value: f64,
    pub nodes: usize,
    pub half_range: f64,
    /// Relative change between the last two refinements.
    pub delta: f64,
    pub history: Vec<(usize, f64)>,
}

fn check_mass_distance(m: f64, s: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) || !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("need m, s > 0, got m = {m}, s = {s}")));
    }
    Ok(m * s)
}

/// `(∫ e^{−m s cos κ cosh θ} dθ)^{1/2}`.
pub fn hardy_norm_factor(m: f64, s: f64, kappa: f64) -> Result<f64> {
    let a = check_mass_distance(m, s)?;
    if !(kappa > 0.0 && kappa < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("κ = {kappa} must lie in (0, π/2)")));
    }
    let c = a * kappa.cos();
    // e^{−c(cosh θ − 1)} < e^{−60} beyond the cut
    let cut = (1.0 + 60.0 / c).acosh();
    let f = |t: f64| (-c * (t.cosh() - 1.0)).exp();
    // the integrand is flat up to |θ| ~ ln(2/c) and then falls off doubly exponentially
    let knee = (1.0 + 1.0 / c).acosh().min(cut);
    let body = integrate(f, 0.0, knee, 1e-13).value + integrate(f, knee, cut, 1e-13).value;
    Ok((2.0 * body * (-c).exp()).sqrt())
}

/// Strip level `κ_S ∈ (κ, κ(S2)]` minimizing `‖S2‖_{κ_S} / √(κ_S − κ)`.
///
/// For constant `S2` this is `π/2` with norm 1. For pole families the norm on the full
/// strip `S(−κ(S2), π + κ(S2))` is infinite, so the level is kept strictly inside.
pub fn optimal_level(s2: &ScatteringFunction, kappa: f64) -> Result<StripBound> {
    let top = s2.kappa();
    if !(kappa > 0.0 && kappa < top) {
        return Err(Error::InvalidParameter(format!("κ = {kappa} must lie in (0, {top})")));
    }
    if s2.is_constant() || s2.kappa_tilde() > top {
        return s2.strip_bound(top);
    }
    let objective = |level: f64| -> Result<f64> {
        Ok(s2.strip_bound(level)?.value.ln() - 0.5 * (level - kappa).ln())
    };
    let margin = 1e-7 * (top - kappa);
    let (mut lo, mut hi) = (kappa + margin, top - margin);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (objective(x1)?, objective(x2)?);
    while hi - lo > 1e-9 * top {
        if f1 <= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - GOLDEN * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + GOLDEN * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    s2.strip_bound(if f1 <= f2 { x1 } else { x2 })
}

/// `(8/π) ‖S2‖ / √(κ_S − κ)` at the optimal strip level.
pub fn sigma_prefactor(strip: &StripBound, kappa: f64) -> f64 {
    8.0 / PI * strip.value / (strip.level - kappa).sqrt()
}

/// `σ(s,κ)`.
pub fn sigma_bound(s2: &ScatteringFunction, m: f64, s: f64, kappa: f64) -> Result<f64> {
    let strip = optimal_level(s2, kappa)?;
    Ok(sigma_prefactor(&strip, kappa) * hardy_norm_factor(m, s, kappa)?)
}

fn row_damping(a: f64, x: &[f64], w: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(w)
        .map(|(&t, &wi)| (-(a / 2.0) * (t.cosh() - 1.0)).exp() * wi.sqrt())
        .collect()
}

/// `Σ √λ` over the eigenvalues of the discretized `T T*` with `N` nodes.
///
/// `T T*(θ, θ'') = (2/π) g(θ) g(θ'') (|κ| + i sgn(κ) D) / (D² + κ²)` with `D = θ − θ''`.
fn trace_norm_at(a: f64, kappa: f64, theta: f64, n: usize, disc: &KernelDiscretization) -> f64 {
    let (x, w) = disc.nodes(theta, n);
    let g = row_damping(a, &x, &w);
    let k2 = kappa * kappa;
    let sgn = kappa.signum();
    let scale = (-a).exp() * 2.0 / PI;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = x[i] - x[j];
        C64::new(kappa.abs(), sgn * d) * (scale * g[i] * g[j] / (d * d + k2))
    });
    sqrt_eigen_sum(hermitian_eigenvalues(m))
}

fn sqrt_eigen_sum(ev: Vec<f64>) -> f64 {
    let max = ev.iter().cloned().fold(0.0, f64::max);
    ev.iter()
        .filter(|&&e| e > 1e-15 * max)
        .map(|e| e.sqrt())
        .sum()
}

fn refine<F: Fn(usize) -> f64>(start: usize, disc: &KernelDiscretization, theta: f64, f: F) -> Result<TraceNorm> {
    let mut n = start;
    let mut history = vec![(n, f(n))];
    loop {
        let next = 2 * n - 1;
        if next > disc.max_nodes {
            let last = history.len() - 1;
            let delta = if last > 0 {
                (history[last].1 / history[last - 1].1 - 1.0).abs()
            } else {
                f64::INFINITY
            };
            return Err(Error::NonConvergence {
                steps: history.len(),
                last_delta: delta,
            });
        }
        let v = f(next);
        let prev = history.last().unwrap().1;
        history.push((next, v));
        let delta = if v == prev { 0.0 } else { (v / prev - 1.0).abs() };
        if delta < disc.refinement_tol {
            return Ok(TraceNorm {
                value: v,
                nodes: next,
                half_range: theta,
                delta,
                history,
            });
        }
        n = next;
    }
}

/// `‖T_{s,κ}‖₁`, from the square roots of the eigenvalues of `T T*` (node doubling until the
/// relative change is below `disc.refinement_tol`).
pub fn t_trace_norm(m: f64, s: f64, kappa: f64, disc: &KernelDiscretization) -> Result<TraceNorm> {
    let a = check_mass_distance(m, s)?;
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("κ = {kappa} must be nonzero")));
    }
    let theta = disc.half_range_for(a);
    let start = disc.initial_nodes(theta, kappa.abs());
    refine(start, disc, theta, |n| trace_norm_at(a, kappa, theta, n, disc))
}

/// `‖T_{s,κ}‖₁` at a fixed node count.
pub fn t_trace_norm_fixed(m: f64, s: f64, kappa: f64, nodes: usize, disc: &KernelDiscretization) -> Result<f64> {
    let a = check_mass_distance(m, s)?;
    let theta = disc.half_range_for(a);
    Ok(trace_norm_at(a, kappa, theta, nodes.max(16), disc))
}

/// Sum of singular values of `T_{s,κ}` itself, with `θ'` truncated to `[−wΘ, wΘ]`.
///
/// Truncation compresses the operator, so this approaches [`t_trace_norm`] from below as
/// the window grows.
pub fn t_trace_norm_windowed(m: f64, s: f64, kappa: f64, window: f64, per_unit: f64) -> Result<f64> {
    let a = check_mass_distance(m, s)?;
    let disc = KernelDiscretization::default();
    let theta = disc.half_range_for(a);
    let h = kappa.abs() / per_unit;
    let rows = (2.0 * theta / h).ceil() as usize + 1;
    let cols = (2.0 * window * theta / h).ceil() as usize + 1;
    let (x, wx) = disc.nodes(theta, rows);
    let (y, wy) = disc.nodes(window * theta, cols);
    let g = row_damping(a, &x, &wx);
    let scale = (-a / 2.0).exp() / PI;
    let t = DMatrix::from_fn(rows, cols, |i, j| {
        // 1 / (iπ (θ' − θ − iκ/2))
        let z = C64::new(kappa / 2.0, y[j] - x[i]);
        z.inv() * (scale * g[i] * wy[j].sqrt())
    });
    Ok(t.singular_values().iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KosakiCheck {
    /// `‖T̂_{s,κ}‖₁` with `T̂² = |T*_{s,κ}|² + |T*_{s,−κ}|²`.
    pub lhs: f64,
    /// `2 ‖T_{s,κ}‖₁`.
    pub rhs: f64,
}

impl KosakiCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-6)
    }
}

/// Trace norms of `T̂_{s,κ}` and `2 T_{s,κ}`.
pub fn kosaki_check(m: f64, s: f64, kappa: f64, disc: &KernelDiscretization) -> Result<KosakiCheck> {
    let a = check_mass_distance(m, s)?;
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("κ = {kappa} must be nonzero")));
    }
    let theta = disc.half_range_for(a);
    let k = kappa.abs();
    let start = disc.initial_nodes(theta, k);
    let hat = refine(start, disc, theta, |n| {
        let (x, w) = disc.nodes(theta, n);
        let g = row_damping(a, &x, &w);
        let scale = (-a).exp() * 4.0 * k / PI;
        let mat = DMatrix::from_fn(n, n, |i, j| {
            let d = x[i] - x[j];
            scale * g[i] * g[j] / (d * d + k * k)
        });
        let ev: Vec<f64> = mat.symmetric_eigenvalues().iter().cloned().collect();
        sqrt_eigen_sum(ev)
    })?;
    Ok(KosakiCheck {
        lhs: hat.value,
        rhs: 2.0 * t_trace_norm(m, s, kappa, disc)?.value,
    })
}

/// A series bound on `‖Ξ(s)‖₁`; divergent series are an explicit variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesBound {
    /// Natural logarithm of the sum, so that very large bounds stay representable.
    Finite { ln_value: f64 },
    Divergent,
}

impl SeriesBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, SeriesBound::Finite { .. })
    }

    /// The value, when it fits in an `f64`.
    pub fn value(&self) -> Option<f64> {
        match self {
            SeriesBound::Finite { ln_value } if *ln_value < f64::MAX.ln() => Some(ln_value.exp()),
            _ => None,
        }
    }

    /// Decimal rendering; `divergent` for a divergent series, and `<mantissa>e<exponent>`
    /// beyond the `f64` range.
    pub fn render(&self) -> String {
        match self {
            SeriesBound::Divergent => "divergent".into(),
            SeriesBound::Finite { ln_value } => match self.value() {
                Some(v) => format!("{v:e}"),
                None => {
                    let l10 = ln_value / std::f64::consts::LN_10;
                    let e = l10.floor();
                    format!("{:.6}e{}", 10f64.powf(l10 - e), e as i64)
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    Bosonic,
    Fermionic,
}

/// `Σ xⁿ` (finite only for `x < 1`).
pub fn bosonic_series(x: f64) -> SeriesBound {
    if x < 1.0 {
        SeriesBound::Finite {
            ln_value: -(1.0 - x).ln(),
        }
    } else {
        SeriesBound::Divergent
    }
}

/// `Σ xⁿ/√n!`, summed in log space until the terms fall below `1e−16` of the partial sum.
pub fn fermionic_series(x: f64) -> SeriesBound {
    if x <= 0.0 {
        return SeriesBound::Finite { ln_value: 0.0 };
    }
    let lx = x.ln();
    let (mut ln_term, mut ln_sum) = (0.0f64, 0.0f64);
    let mut n = 0.0;
    loop {
        n += 1.0;
        ln_term += lx - 0.5 * f64::ln(n);
        let hi = ln_sum.max(ln_term);
        ln_sum = hi + ((ln_sum - hi).exp() + (ln_term - hi).exp()).ln();
        // terms decrease once n > x²
        if n > x * x && ln_term - ln_sum < (1e-16f64).ln() {
            return SeriesBound::Finite { ln_value: ln_sum };
        }
    }
}

/// The per-`(s, κ)` quantities of the nuclearity estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearityRow {
    pub s: f64,
    pub kappa: f64,
    pub level: f64,
    pub s2_norm: f64,
    pub sigma: f64,
    pub t_trace: f64,
    pub product: f64,
    pub bound_bosonic: SeriesBound,
    pub fermionic_x: f64,
    /// Only meaningful for sign class −1.
    pub bound_fermionic: Option<SeriesBound>,
    pub trace_history: Vec<(usize, f64)>,
    pub trace_delta: f64,
}

pub fn nuclearity_row(
    s2: &ScatteringFunction,
    m: f64,
    s: f64,
    kappa: f64,
    disc: &KernelDiscretization,
) -> Result<NuclearityRow> {
    let strip = optimal_level(s2, kappa)?;
    let sigma = sigma_prefactor(&strip, kappa) * hardy_norm_factor(m, s, kappa)?;
    let t = t_trace_norm(m, s, kappa, disc)?;
    let product = sigma * t.value;
    let fermionic_x = product * strip.value.sqrt();
    let fermionic = s2.sign_class()? == -1;
    Ok(NuclearityRow {
        s,
        kappa,
        level: strip.level,
        s2_norm: strip.value,
        sigma,
        t_trace: t.value,
        product,
        bound_bosonic: bosonic_series(product),
        fermionic_x,
        bound_fermionic: fermionic.then(|| fermionic_series(fermionic_x)),
        trace_history: t.history,
        trace_delta: t.delta,
    })
}

/// `xi_norm_bound` for a single `(s, κ)`.
pub fn xi_norm_bound(
    s2: &ScatteringFunction,
    m: f64,
    s: f64,
    kappa: f64,
    mode: SeriesMode,
    disc: &KernelDiscretization,
) -> Result<SeriesBound> {
    if mode == SeriesMode::Fermionic && s2.sign_class()? != -1 {
        return Err(Error::Mode("the fermionic series needs S2(0) = −1".into()));
    }
    let row = nuclearity_row(s2, m, s, kappa, disc)?;
    Ok(match mode {
        SeriesMode::Bosonic => row.bound_bosonic,
        SeriesMode::Fermionic => fermionic_series(row.fermionic_x),
    })
}

/// All rows of an `s × κ` sweep, in input order (s outer).
pub fn sweep(
    s2: &ScatteringFunction,
    m: f64,
    s_values: &[f64],
    kappas: &[f64],
    disc: &KernelDiscretization,
) -> Result<Vec<NuclearityRow>> {
    let cells: Vec<(f64, f64)> = s_values
        .iter()
        .flat_map(|&s| kappas.iter().map(move |&k| (s, k)))
        .collect();
    cells
        .par_iter()
        .map(|&(s, k)| nuclearity_row(s2, m, s, k, disc))
        .collect()
}

/// CSV rendering of sweep rows.
pub fn rows_to_csv(rows: &[NuclearityRow]) -> String {
    let mut out = String::from("s,kappa,sigma,t_trace,product,bound_bosonic,fermionic_x,bound_fermionic\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:e},{:e},{:e},{},{:e},{}\n",
            r.s,
            r.kappa,
            r.sigma,
            r.t_trace,
            r.product,
            r.bound_bosonic.render(),
            r.fermionic_x,
            r.bound_fermionic.map_or_else(|| "na".to_string(), |b| b.render()),
        ));
    }
    out
}

/// Threshold distance for one `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub kappa: f64,
    pub s: f64,
    pub level: f64,
    pub nodes: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SMin {
    pub s_min: f64,
    pub kappa_star: f64,
    pub level_star: f64,
    pub mass: f64,
    /// `1/m − s_min`; positive when `s_min` is below the reduced Compton wavelength.
    pub compton_margin: f64,
    /// `2π/m − s_min`.
    pub compton_margin_2pi: f64,
    pub lattice: Vec<Threshold>,
    /// Relative change of the trace norm in the final refinement at the optimum.
    pub convergence: f64,
}

struct ThresholdSolver<'a> {
    kappa: f64,
    prefactor: f64,
    disc: &'a KernelDiscretization,
    /// Multiplier on the rule-based node count.
    scale: f64,
    /// Node count pinned for the root search so that the objective is smooth.
    pinned: Option<usize>,
    evaluations: usize,
}

impl ThresholdSolver<'_> {
    fn nodes(&self, a: f64) -> usize {
        if let Some(n) = self.pinned {
            return n;
        }
        let theta = self.disc.half_range_for(a);
        (self.scale * self.disc.initial_nodes(theta, self.kappa) as f64).ceil() as usize
    }

    /// `ln(σ ‖T‖₁)` at `a = m·s`.
    fn ln_product(&mut self, a: f64) -> Result<f64> {
        self.evaluations += 1;
        let h = hardy_norm_factor(1.0, a, self.kappa)?;
        let t = t_trace_norm_fixed(1.0, a, self.kappa, self.nodes(a), self.disc)?;
        Ok((self.prefactor * h * t).ln())
    }

    /// Geometric search from `start` with ratio `factor` for a sign change of the objective.
    fn bracket(&mut self, start: f64, factor: f64) -> Result<(f64, f64, f64, f64)> {
        let (min, max) = (1e-4, 1e4);
        let mut a = start;
        let mut f = self.ln_product(a)?;
        let grow = f > 0.0;
        loop {
            let b = if grow { a * factor } else { a / factor };
            if !(min..=max).contains(&b) {
                return Err(Error::OutOfRange(format!(
                    "threshold for κ = {} not bracketed in m·s ∈ (1e-4, 1e4)",
                    self.kappa
                )));
            }
            let fb = self.ln_product(b)?;
            if (fb > 0.0) != (f > 0.0) {
                return Ok(if grow { (a, f, b, fb) } else { (b, fb, a, f) });
            }
            (a, f) = (b, fb);
        }
    }

    /// Illinois false position in `ln a`.
    fn root(&mut self, start: f64, factor: f64, tol: f64) -> Result<f64> {
        self.pinned = None;
        let (lo, _, hi, _) = self.bracket(start, factor)?;
        self.pinned = Some(self.nodes(lo));
        let (flo, fhi) = (self.ln_product(lo)?, self.ln_product(hi)?);
        let (mut x0, mut f0, mut x1, mut f1) = (lo.ln(), flo, hi.ln(), fhi);
        let mut side = 0;
        for _ in 0..200 {
            if x1.exp() - x0.exp() < tol {
                break;
            }
            let mut x = (x0 * f1 - x1 * f0) / (f1 - f0);
            if !(x > x0 && x < x1) {
                x = 0.5 * (x0 + x1);
            }
            let f = self.ln_product(x.exp())?;
            if f.abs() < 1e-13 {
                return Ok(x.exp());
            }
            if f > 0.0 {
                (x0, f0) = (x, f);
                if side == -1 {
                    f1 *= 0.5;
                }
                side = -1;
            } else {
                (x1, f1) = (x, f);
                if side == 1 {
                    f0 *= 0.5;
                }
                side = 1;
            }
        }
        Ok(0.5 * (x0.exp() + x1.exp()))
    }
}

/// Relative trace-norm accuracy demanded at a threshold; the slope of `ln(σ ‖T‖₁)` in `m·s`
/// is of order one, so this fixes the root far below the bisection tolerance.
const THRESHOLD_TRACE_TOL: f64 = 1e-7;

/// `m·s` at which `σ ‖T‖₁ = 1` for one `κ`; the node count is verified at the root against
/// 1.5 times as many nodes and raised if the trace norm moves.
fn threshold(
    s2: &ScatteringFunction,
    kappa: f64,
    disc: &KernelDiscretization,
    tol: f64,
) -> Result<(Threshold, f64)> {
    let strip = optimal_level(s2, kappa)?;
    let mut solver = ThresholdSolver {
        kappa,
        prefactor: sigma_prefactor(&strip, kappa),
        disc,
        scale: 1.0,
        pinned: None,
        evaluations: 0,
    };
    let mut last_delta = f64::NAN;
    let (mut start, mut factor) = (1.0, 2.0);
    for _ in 0..3 {
        let a = solver.root(start, factor, tol)?;
        let nodes = solver.nodes(a);
        let coarse = t_trace_norm_fixed(1.0, a, kappa, nodes, disc)?;
        let fine = t_trace_norm_fixed(1.0, a, kappa, nodes + nodes / 2, disc)?;
        last_delta = (fine / coarse - 1.0).abs();
        if last_delta < disc.refinement_tol.max(THRESHOLD_TRACE_TOL) {
            return Ok((
                Threshold {
                    kappa,
                    s: a,
                    level: strip.level,
                    nodes,
                    evaluations: solver.evaluations,
                },
                last_delta,
            ));
        }
        solver.scale *= 1.5;
        (start, factor) = (a, 1.001);
    }
    Err(Error::NonConvergence {
        steps: 3,
        last_delta,
    })
}

/// κ-optimized splitting distance: thresholds on a lattice of `lattice` points in
/// `kappa_search`, then golden-section refinement around the lattice minimum.
pub fn s_min(
    s2: &ScatteringFunction,
    m: f64,
    kappa_search: Option<(f64, f64)>,
    lattice: usize,
    disc: &KernelDiscretization,
) -> Result<SMin> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    s2.regularity()?;
    let top = s2.kappa();
    let (k_lo, k_hi) = kappa_search.unwrap_or((DEFAULT_KAPPA_WINDOW.0 * top, DEFAULT_KAPPA_WINDOW.1 * top));
    if !(k_lo > 0.0 && k_lo < k_hi && k_hi < top) {
        return Err(Error::InvalidParameter(format!(
            "κ search interval ({k_lo}, {k_hi}) must lie inside (0, {top})"
        )));
    }
    let lattice = lattice.max(2);
    let tol = s2.tolerances().bisection * m.min(1.0);
    let step = (k_hi - k_lo) / (lattice - 1) as f64;
    let kappas: Vec<f64> = (0..lattice).map(|j| k_lo + step * j as f64).collect();
    let points: Vec<(Threshold, f64)> = kappas
        .par_iter()
        .map(|&k| threshold(s2, k, disc, tol))
        .collect::<Result<_>>()?;
    let best = (0..points.len())
        .min_by(|&i, &j| points[i].0.s.total_cmp(&points[j].0.s))
        .unwrap();
    let (mut lo, mut hi) = (
        kappas[best.saturating_sub(1)],
        kappas[(best + 1).min(lattice - 1)],
    );
    let mut opt = points[best];
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut p1 = threshold(s2, x1, disc, tol)?;
    let mut p2 = threshold(s2, x2, disc, tol)?;
    while hi - lo > 1e-4 * top {
        if p1.0.s <= p2.0.s {
            hi = x2;
            (x2, p2) = (x1, p1);
            x1 = hi - GOLDEN * (hi - lo);
            p1 = threshold(s2, x1, disc, tol)?;
        } else {
            lo = x1;
            (x1, p1) = (x2, p2);
            x2 = lo + GOLDEN * (hi - lo);
            p2 = threshold(s2, x2, disc, tol)?;
        }
    }
    for p in [p1, p2] {
        if p.0.s < opt.0.s {
            opt = p;
        }
    }
    let s_min = opt.0.s / m;
    Ok(SMin {
        s_min,
        kappa_star: opt.0.kappa,
        level_star: opt.0.level,
        mass: m,
        compton_margin: 1.0 / m - s_min,
        compton_margin_2pi: 2.0 * PI / m - s_min,
        lattice: points
            .into_iter()
            .map(|(t, _)| Threshold { s: t.s / m, ..t })
            .collect(),
        convergence: opt.1,
    })
}
