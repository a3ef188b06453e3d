//! Two-particle scattering functions `S2`.
//!
//! Three families are supported: the constants `±1`, finite products of
//! pole factors `sign · ∏ (sinh β − sinh ζ)/(sinh β + sinh ζ)` and the
//! Sinh-Gordon function `(sinh ζ − i sin b)/(sinh ζ + i sin b)`. The latter is
//! the one-factor product with `β = ib` and prefactor `-1`, which is how it is
//! evaluated internally.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Constant { value: i32 },
    ProductPoles { sign: i32, poles: Vec<C64> },
    SinhGordon { b: f64 },
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Constant { .. } => "constant",
            Family::ProductPoles { .. } => "product_poles",
            Family::SinhGordon { .. } => "sinh_gordon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringFunction {
    family: Family,
    name: Option<String>,
    prefactor: f64,
    betas: Vec<C64>,
    sinh_betas: Vec<C64>,
    tol: Tolerances,
}

/// Where the supremum of `|S2|` on a boundary line is reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupLocation {
    /// At `Re ζ = ±theta`.
    Finite { theta: f64 },
    /// Only approached as `|Re ζ| → ∞`.
    Asymptotic,
}

/// `sup |S2|` over the strip `S(-level, π + level)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripBound {
    pub level: f64,
    pub value: f64,
    pub location: SupLocation,
    /// Largest modulus seen at interior spot checks; never above `value`.
    pub interior_max: f64,
    /// Half-width of the θ-range needed to reach the asymptotic value.
    pub theta_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormEstimate {
    Finite { value: f64, location: SupLocation },
    /// A pole of the continuation lies on the boundary of the extended strip.
    Divergent { pole_re: f64, pole_im: f64 },
}

impl NormEstimate {
    pub fn finite(&self) -> Option<f64> {
        match self {
            NormEstimate::Finite { value, .. } => Some(*value),
            NormEstimate::Divergent { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityData {
    /// `min(π/2, κ̃)`.
    pub kappa: f64,
    /// Distance of the nearest singularity below the real axis.
    pub kappa_tilde: f64,
    /// `sup |S2|` on `S(-kappa, π + kappa)`.
    pub norm: NormEstimate,
    pub sign_class: i32,
}

/// Residuals of the unitarity, crossing and symmetry relations on sampled points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    /// `max |conj S(θ) − S(θ)⁻¹|`.
    pub unitarity: f64,
    /// `max |S(θ)⁻¹ − S(θ + iπ)|`.
    pub crossing: f64,
    /// `max |S(θ + iπ) − S(−θ)|`.
    pub symmetry: f64,
    /// `max |S(ζ)|` over interior points of `S(0, π)`.
    pub strip_max: f64,
    /// `max ||S(θ)| − 1|`.
    pub modulus: f64,
}

impl PropertyReport {
    pub fn max_relation_residual(&self) -> f64 {
        self.unitarity.max(self.crossing).max(self.symmetry)
    }
}

impl ScatteringFunction {
    pub fn constant(value: i32) -> Result<Self> {
        Self::new(Family::Constant { value }, None)
    }

    pub fn product_poles(sign: i32, poles: Vec<C64>) -> Result<Self> {
        Self::new(Family::ProductPoles { sign, poles }, None)
    }

    pub fn sinh_gordon(b: f64) -> Result<Self> {
        Self::new(Family::SinhGordon { b }, None)
    }

    pub fn new(family: Family, name: Option<String>) -> Result<Self> {
        validate(&family, &Tolerances::default())?;
        Ok(Self::new_unchecked(family, name))
    }

    /// Builds the function without enforcing the family invariants.
    pub fn new_unchecked(family: Family, name: Option<String>) -> Self {
        let (prefactor, betas) = match &family {
            Family::Constant { value } => (*value as f64, vec![]),
            Family::ProductPoles { sign, poles } => (*sign as f64, poles.clone()),
            Family::SinhGordon { b } => (-1.0, vec![C64::new(0.0, *b)]),
        };
        let sinh_betas = betas.iter().map(|b| b.sinh()).collect();
        Self {
            family,
            name,
            prefactor,
            betas,
            sinh_betas,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// A label for reports: the given name or the family.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.family.label().to_string())
    }

    pub fn is_constant(&self) -> bool {
        self.betas.is_empty()
    }

    /// Poles of the continuation in `-π < Im ζ ≤ π`, each `β` contributing `-β` and `β - iπ`
    /// (mirrored above the strip at `iπ + β` and `2πi - β`).
    pub fn poles_below(&self) -> Vec<C64> {
        self.betas
            .iter()
            .flat_map(|&b| [-b, b - C64::new(0.0, PI)])
            .collect()
    }

    /// Distance of the nearest singularity below the real axis (closed form).
    pub fn kappa_tilde(&self) -> f64 {
        self.betas
            .iter()
            .map(|b| b.im.min(PI - b.im))
            .fold(f64::INFINITY, f64::min)
    }

    /// `κ(S2) = min(π/2, κ̃)`.
    pub fn kappa(&self) -> f64 {
        FRAC_PI_2.min(self.kappa_tilde())
    }

    fn nearest_pole(&self, z: C64) -> Option<(C64, f64)> {
        let two_pi = 2.0 * PI;
        self.betas
            .iter()
            .flat_map(|&b| [-b, b + C64::new(0.0, PI)])
            .map(|c| {
                let shift = ((z.im - c.im) / two_pi).round();
                let p = c + C64::new(0.0, two_pi * shift);
                (p, (z - p).norm())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Analytic continuation of `S2` at `z`.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if let Some((pole, distance)) = self.nearest_pole(z) {
            if distance <= self.tol.pole_distance {
                return Err(Error::PoleProximity { at: z, pole, distance });
            }
        }
        Ok(self.eval_unguarded(z))
    }

    /// Value on the real line, where no poles occur.
    pub fn eval_real(&self, theta: f64) -> C64 {
        self.eval_unguarded(C64::new(theta, 0.0))
    }

    fn eval_unguarded(&self, z: C64) -> C64 {
        let mut acc = C64::new(self.prefactor, 0.0);
        if self.betas.is_empty() {
            return acc;
        }
        if z.re.abs() > 20.0 {
            // with u = 1/sinh z: (sinh β − sinh z)/(sinh β + sinh z) = (u sinh β − 1)/(u sinh β + 1)
            let u = if z.re > 0.0 {
                let e = (-z).exp();
                2.0 * e / (1.0 - e * e)
            } else {
                let e = z.exp();
                -2.0 * e / (1.0 - e * e)
            };
            for sb in &self.sinh_betas {
                let x = u * sb;
                acc *= (x - 1.0) / (x + 1.0);
            }
        } else {
            let sz = z.sinh();
            for sb in &self.sinh_betas {
                acc *= (sb - sz) / (sb + sz);
            }
        }
        acc
    }

    /// Samples the relations `conj S(θ) = S(θ)⁻¹ = S(θ + iπ) = S(−θ)` on `[-15, 15]`
    /// and `|S|` inside `S(0, π)`.
    pub fn validate_properties(&self, n_samples: usize, strip_samples: usize) -> PropertyReport {
        let ipi = C64::new(0.0, PI);
        let mut r = PropertyReport {
            unitarity: 0.0,
            crossing: 0.0,
            symmetry: 0.0,
            strip_max: 0.0,
            modulus: 0.0,
        };
        let n = n_samples.max(1);
        for j in 0..n {
            let t = if n == 1 { 0.0 } else { -15.0 + 30.0 * j as f64 / (n - 1) as f64 };
            let s = self.eval_real(t);
            let inv = s.inv();
            let shifted = self.eval_unguarded(C64::new(t, 0.0) + ipi);
            let mirrored = self.eval_real(-t);
            r.unitarity = r.unitarity.max((s.conj() - inv).norm());
            r.crossing = r.crossing.max((inv - shifted).norm());
            r.symmetry = r.symmetry.max((shifted - mirrored).norm());
            r.modulus = r.modulus.max((s.norm() - 1.0).abs());
        }
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        for j in 0..strip_samples {
            let t = -15.0 + 30.0 * ((j as f64 + 0.5) * golden).fract();
            let lambda = PI * (j as f64 + 0.5) / strip_samples as f64;
            let v = self.eval_unguarded(C64::new(t, lambda)).norm();
            r.strip_max = r.strip_max.max(v);
        }
        r
    }

    /// `S2(0)` rounded to `±1`.
    pub fn sign_class(&self) -> Result<i32> {
        let s0 = self.eval_real(0.0);
        if (s0 - 1.0).norm() < self.tol.sign_class {
            Ok(1)
        } else if (s0 + 1.0).norm() < self.tol.sign_class {
            Ok(-1)
        } else {
            Err(Error::InvalidSign(s0))
        }
    }

    /// Regularity data on the extended strip `S(-κ(S2), π + κ(S2))`.
    pub fn regularity(&self) -> Result<RegularityData> {
        let sign_class = self.sign_class()?;
        if self.is_constant() {
            return Ok(RegularityData {
                kappa: FRAC_PI_2,
                kappa_tilde: f64::INFINITY,
                norm: NormEstimate::Finite {
                    value: 1.0,
                    location: SupLocation::Asymptotic,
                },
                sign_class,
            });
        }
        let kappa_tilde = self.kappa_tilde();
        let kappa = FRAC_PI_2.min(kappa_tilde);
        let line = C64::new(0.0, -kappa);
        let on_boundary = self
            .poles_below()
            .into_iter()
            .find(|p| (p.im - line.im).abs() <= self.tol.pole_distance);
        let norm = match on_boundary {
            Some(p) => NormEstimate::Divergent {
                pole_re: p.re,
                pole_im: p.im,
            },
            None => {
                let b = self.strip_bound(kappa)?;
                NormEstimate::Finite {
                    value: b.value,
                    location: b.location,
                }
            }
        };
        Ok(RegularityData {
            kappa,
            kappa_tilde,
            norm,
            sign_class,
        })
    }

    /// `sup |S2|` on `S(-level, π + level)` by sampling the lower boundary line.
    ///
    /// The upper line carries the same values since `S(θ + iπ + i·level) = S(−θ − i·level)`,
    /// and `|S(θ − i·level)|` is even in `θ`.
    pub fn strip_bound(&self, level: f64) -> Result<StripBound> {
        if !(level >= 0.0 && level.is_finite()) {
            return Err(Error::InvalidParameter(format!("strip level {level}")));
        }
        if self.is_constant() {
            return Ok(StripBound {
                level,
                value: 1.0,
                location: SupLocation::Asymptotic,
                interior_max: 1.0,
                theta_range: 0.0,
            });
        }
        if level >= self.kappa_tilde() - self.tol.pole_distance {
            return Err(Error::Regularity(format!(
                "level {level} reaches the pole distance {}",
                self.kappa_tilde()
            )));
        }
        let on_line = |t: f64| self.eval_unguarded(C64::new(t, -level)).norm();
        // the |θ| → ∞ limit of |S2| is 1 on every horizontal line
        let mut range = 4.0;
        while (on_line(range) - 1.0).abs() > self.tol.norm_tail {
            range *= 1.5;
            if range > 700.0 {
                return Err(Error::Regularity("boundary values do not settle".into()));
            }
        }
        let mut samples = 512;
        let mut previous: Option<f64> = None;
        let (mut best, mut at) = (0.0, 0.0);
        for _ in 0..12 {
            let h = range / samples as f64;
            let (j, v) = (0..=samples)
                .map(|j| (j, on_line(j as f64 * h)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let lo = (j as f64 - 1.0).max(0.0) * h;
            let hi = (j as f64 + 1.0).min(samples as f64) * h;
            let (t, w) = golden_max(&on_line, lo, hi, 1e-12);
            (best, at) = if w >= v { (w, t) } else { (v, j as f64 * h) };
            if best > 1e12 {
                return Err(Error::Regularity(format!(
                    "|S2| exceeds 1e12 on Im ζ = {}",
                    -level
                )));
            }
            if let Some(p) = previous {
                if ((best - p) / best).abs() < self.tol.norm_refinement {
                    break;
                }
            }
            previous = Some(best);
            samples *= 2;
        }
        let location = if best <= 1.0 + self.tol.norm_tail {
            SupLocation::Asymptotic
        } else {
            SupLocation::Finite { theta: at }
        };
        let interior_max = (1..8)
            .flat_map(|a| (0..16).map(move |b| (a, b)))
            .map(|(a, b)| {
                let t = -range + 2.0 * range * (b as f64 + 0.5) / 16.0;
                self.eval_unguarded(C64::new(t, -level * a as f64 / 8.0)).norm()
            })
            .fold(0.0, f64::max);
        Ok(StripBound {
            level,
            value: best.max(1.0),
            location,
            interior_max,
            theta_range: range,
        })
    }

    /// `κ̃` from Newton root-finding of `sinh ζ = −sinh β` in `-π < Im ζ < 0`.
    pub fn kappa_tilde_root_find(&self) -> f64 {
        let mut best = f64::INFINITY;
        for sb in &self.sinh_betas {
            for a in -4..=4 {
                for c in 1..16 {
                    let mut z = C64::new(a as f64, -PI * c as f64 / 16.0);
                    for _ in 0..60 {
                        let step = (z.sinh() + sb) / z.cosh();
                        z -= step;
                        if step.norm() < 1e-15 {
                            break;
                        }
                    }
                    if (z.sinh() + sb).norm() < 1e-12 {
                        let im = z.im.rem_euclid(2.0 * PI) - 2.0 * PI;
                        if im > -PI && im < 0.0 {
                            best = best.min(-im);
                        }
                    }
                }
            }
        }
        best
    }

    /// The phase shift `δ(θ)` with `S(θ) = S(0) e^{2iδ(θ)}`, `δ(0) = 0`.
    pub fn phase_shift(&self, theta: f64) -> Result<f64> {
        Ok(self.phase_shift_complex(C64::new(theta, 0.0))?.re)
    }

    /// Continuation of the phase shift to `|Im ζ| < κ̃`, unwrapped along `0 → Re ζ → ζ`.
    pub fn phase_shift_complex(&self, z: C64) -> Result<C64> {
        if self.is_constant() {
            return Ok(C64::new(0.0, 0.0));
        }
        let half_width = self.kappa_tilde();
        if z.im.abs() >= half_width {
            return Err(Error::OutsideStrip { value: z, half_width });
        }
        let s0 = self.eval_real(0.0);
        let mut phase = 0.0;
        let mut last = C64::new(1.0, 0.0);
        let unwrap_to = |from: C64, to: C64, last: &mut C64, phase: &mut f64| -> Result<()> {
            let length = (to - from).norm();
            if length == 0.0 {
                return Ok(());
            }
            let dir = (to - from) / length;
            let mut pos = 0.0;
            let mut h = self.tol.phase_step;
            while pos < length {
                let step = h.min(length - pos);
                let ratio = self.eval_unguarded(from + dir * (pos + step)) / s0;
                if ratio.norm() < 1e-300 || !ratio.norm().is_finite() {
                    return Err(Error::PhaseUnwrap(format!(
                        "S2 vanishes or diverges near {}",
                        from + dir * (pos + step)
                    )));
                }
                let jump = (ratio / *last).arg();
                if jump.abs() > FRAC_PI_2 {
                    h *= 0.5;
                    if h < 1e-10 {
                        return Err(Error::PhaseUnwrap("step underflow".into()));
                    }
                    continue;
                }
                *phase += jump;
                *last = ratio;
                pos += step;
                h = self.tol.phase_step;
            }
            Ok(())
        };
        let corner = C64::new(z.re, 0.0);
        unwrap_to(C64::new(0.0, 0.0), corner, &mut last, &mut phase)?;
        unwrap_to(corner, z, &mut last, &mut phase)?;
        // δ = (1/2i) log(S/S(0)) with the unwrapped argument
        Ok(C64::new(0.5 * phase, -0.5 * last.norm().ln()))
    }

    /// `S^ρ(θ) = ∏_{l<k, ρ(l)>ρ(k)} S2(θ_{ρ(l)} − θ_{ρ(k)})`.
    pub fn srho(&self, rho: &Permutation, theta: &[f64]) -> C64 {
        assert_eq!(rho.len(), theta.len());
        let n = rho.len();
        let mut acc = C64::new(1.0, 0.0);
        for l in 0..n {
            for k in (l + 1)..n {
                let (a, b) = (rho.apply(l), rho.apply(k));
                if a > b {
                    acc *= self.eval_real(theta[a] - theta[b]);
                }
            }
        }
        acc
    }

    /// `S^ρ` at complex rapidities.
    pub fn srho_complex(&self, rho: &Permutation, zeta: &[C64]) -> Result<C64> {
        assert_eq!(rho.len(), zeta.len());
        let n = rho.len();
        let mut acc = C64::new(1.0, 0.0);
        for l in 0..n {
            for k in (l + 1)..n {
                let (a, b) = (rho.apply(l), rho.apply(k));
                if a > b {
                    acc *= self.eval(zeta[a] - zeta[b])?;
                }
            }
        }
        Ok(acc)
    }

    /// `Y_n^±(ζ) = ∏_{k<l} (± e^{iδ(ζ_k − ζ_l)})`.
    pub fn y_factor(&self, sign: i32, zeta: &[C64]) -> Result<C64> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParameter(format!("sign {sign} is not ±1")));
        }
        let half_width = self.kappa();
        let mut acc = C64::new(1.0, 0.0);
        for k in 0..zeta.len() {
            for l in (k + 1)..zeta.len() {
                let d = zeta[k] - zeta[l];
                if d.im.abs() >= half_width {
                    return Err(Error::OutsideStrip { value: d, half_width });
                }
                let delta = self.phase_shift_complex(d)?;
                acc *= (C64::i() * delta).exp() * sign as f64;
            }
        }
        Ok(acc)
    }

    /// Serializes back to the spec-file format.
    pub fn to_spec_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("family".into(), self.family.label().into());
        match &self.family {
            Family::Constant { value } => {
                obj.insert("value".into(), (*value).into());
            }
            Family::ProductPoles { sign, poles } => {
                obj.insert("sign".into(), (*sign).into());
                let list: Vec<Value> = poles.iter().map(|p| format_complex(*p).into()).collect();
                obj.insert("poles".into(), list.into());
            }
            Family::SinhGordon { b } => {
                obj.insert("b".into(), (*b).into());
            }
        }
        if let Some(name) = &self.name {
            obj.insert("name".into(), name.clone().into());
        }
        Value::Object(obj).to_string()
    }
}

impl fmt::Display for ScatteringFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec_json())
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs() + b.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

fn validate(family: &Family, tol: &Tolerances) -> Result<()> {
    match family {
        Family::Constant { value } => {
            if *value != 1 && *value != -1 {
                return Err(Error::Semantic(format!("constant value {value} is not ±1")));
            }
        }
        Family::ProductPoles { sign, poles } => {
            if *sign != 1 && *sign != -1 {
                return Err(Error::Semantic(format!("sign {sign} is not ±1")));
            }
            for (k, b) in poles.iter().enumerate() {
                if !(b.re.is_finite() && b.im > 0.0 && b.im < PI) {
                    return Err(Error::Semantic(format!(
                        "pole {k} = {b}: imaginary part must lie in (0, π)"
                    )));
                }
                let partner = -b.conj();
                if !poles.iter().any(|c| (c - partner).norm() <= tol.pole_closure) {
                    return Err(Error::Semantic(format!(
                        "pole {k} = {b} lacks its partner -conj(β) = {partner}"
                    )));
                }
            }
        }
        Family::SinhGordon { b } => {
            if !(*b > 0.0 && *b < PI) {
                return Err(Error::Semantic(format!("coupling b = {b} must lie in (0, π)")));
            }
        }
    }
    Ok(())
}

/// Parses a scattering function from its JSON spec document.
pub fn parse_spec(text: &str) -> Result<ScatteringFunction> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(Error::Semantic("top level must be an object".into()));
    };
    let family = obj
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Semantic("missing string key `family`".into()))?;
    let allowed: &[&str] = match family {
        "constant" => &["family", "name", "value"],
        "product_poles" => &["family", "name", "sign", "poles"],
        "sinh_gordon" => &["family", "name", "b"],
        other => return Err(Error::Semantic(format!("unknown family `{other}`"))),
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Semantic(format!("unexpected key `{k}` for family {family}")));
    }
    let int_key = |key: &str| -> Result<i32> {
        obj.get(key)
            .and_then(Value::as_i64)
            .map(|v| v as i32)
            .ok_or_else(|| Error::Semantic(format!("key `{key}` must be an integer ±1")))
    };
    let name = match obj.get("name") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::Semantic("`name` must be a string".into())),
    };
    let fam = match family {
        "constant" => Family::Constant { value: int_key("value")? },
        "product_poles" => {
            let sign = int_key("sign")?;
            let list = obj
                .get("poles")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Semantic("`poles` must be an array".into()))?;
            let mut poles = Vec::with_capacity(list.len());
            for item in list {
                let s = item
                    .as_str()
                    .ok_or_else(|| Error::Semantic("poles must be complex strings".into()))?;
                let z = parse_complex(s).ok_or_else(|| {
                    let (line, column) = locate(text, s);
                    Error::Syntax {
                        line,
                        column,
                        message: format!("malformed complex literal \"{s}\""),
                    }
                })?;
                poles.push(z);
            }
            Family::ProductPoles { sign, poles }
        }
        _ => Family::SinhGordon {
            b: obj
                .get("b")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Semantic("`b` must be a number".into()))?,
        },
    };
    ScatteringFunction::new(fam, name)
}

fn locate(text: &str, literal: &str) -> (usize, usize) {
    let needle = format!("\"{literal}\"");
    let offset = text.find(&needle).map(|o| o + 1).unwrap_or(0);
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` with plain decimal literals.
pub fn parse_complex(s: &str) -> Option<C64> {
    fn number(s: &str) -> Option<(f64, &str)> {
        let int_len = s.bytes().take_while(u8::is_ascii_digit).count();
        if int_len == 0 {
            return None;
        }
        let mut len = int_len;
        if s[len..].starts_with('.') {
            let frac = s[len + 1..].bytes().take_while(u8::is_ascii_digit).count();
            if frac == 0 {
                return None;
            }
            len += 1 + frac;
        }
        Some((s[..len].parse().ok()?, &s[len..]))
    }
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (first, rest) = number(rest)?;
    let first = if neg { -first } else { first };
    if rest.is_empty() {
        return Some(C64::new(first, 0.0));
    }
    if rest == "i" {
        return Some(C64::new(0.0, first));
    }
    let (sign, rest) = match rest.as_bytes()[0] {
        b'+' => (1.0, &rest[1..]),
        b'-' => (-1.0, &rest[1..]),
        _ => return None,
    };
    let (second, rest) = number(rest)?;
    (rest == "i").then_some(C64::new(first, sign * second))
}

/// Inverse of [`parse_complex`].
pub fn format_complex(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format!("{}", z.re),
        (true, false) => format!("{}i", z.im),
        (false, false) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{}{}i", z.re, sign, z.im.abs())
        }
    }
}
