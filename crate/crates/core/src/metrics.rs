//! The metric family `||.||^(L)` on unstable lines and its cocycles.
//!
//! `D^(L)` is the component of `{G+ o psi < L}` containing 0 in the
//! coordinate of a normalized parametrization. With `chi` a Riemann map of
//! the unit disk onto `D^(L)`, `chi(0) = 0`, the metric is
//! `||v||^(L) = |v| / |chi'(0)|`. Schwarz and Koebe give
//! `delta <= |chi'(0)| <= 4 delta` for the inradius `delta`, so the density
//! is only known up to the interval `[1/(4 delta), 1/delta]`.

use crate::error::{QxError, Result};
use crate::geometry::NormalizedCycle;
use crate::green::GreenConfig;
use crate::henon::HenonMap;
use crate::manifold::{GreenProfile, UnstableParametrization};
use crate::scalar::{c64, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.lo - o.hi, self.hi - o.lo)
    }

    pub fn scale(self, s: f64) -> Self {
        if s >= 0.0 {
            Self::new(self.lo * s, self.hi * s)
        } else {
            Self::new(self.hi * s, self.lo * s)
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    /// `self ⊂ o`, with relative slack `tol`.
    pub fn within(&self, o: &Self, tol: f64) -> bool {
        self.lo >= o.lo - tol * o.lo.abs() && self.hi <= o.hi + tol * o.hi.abs()
    }

    /// Distance from `v` to the interval (0 when inside).
    pub fn distance_to(&self, v: f64) -> f64 {
        (self.lo - v).max(v - self.hi).max(0.0)
    }

    pub fn ln(self) -> Self {
        Self::new(self.lo.ln(), self.hi.ln())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub rays: usize,
    /// Absolute bisection tolerance on the inradius.
    pub tol: f64,
    /// Give up when a ray passes this normalized radius without reaching level `L`.
    pub limit: f64,
    pub green: GreenConfig,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { rays: 64, tol: 1e-8, limit: 1e4, green: GreenConfig { tol: 1e-13, budget: 200 } }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricInterval {
    /// Bounds on the density `1 / |chi'(0)|` of `||.||^(L)` at 0, in units of `|dz|`.
    pub lower: f64,
    pub upper: f64,
    pub inradius: f64,
    pub level: f64,
    /// Every sample of the circle `|z| = inradius / 2` lies below `L`.
    pub sweep_ok: bool,
}

impl MetricInterval {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }

    pub fn koebe_ok(&self) -> bool {
        self.lower <= self.upper && self.upper <= 4.0 * self.lower * (1.0 + 1e-12)
    }
}

fn level_at(p: &(impl GreenProfile + ?Sized), scale: f64, z: C64, cfg: &GreenConfig) -> f64 {
    let e = p.green_raw(z * scale, cfg);
    if e.is_bounded() {
        0.0
    } else {
        e.value
    }
}

fn hit_radius(p: &(impl GreenProfile + ?Sized), scale: f64, level: f64, theta: f64, cfg: &MetricConfig) -> Result<f64> {
    let u = C64::from_polar(1.0, theta);
    let mut lo = 0.0;
    let mut hi = 1.0 / 64.0;
    while level_at(p, scale, u * hi, &cfg.green) < level {
        lo = hi;
        hi *= 1.25;
        if hi > cfg.limit {
            return Err(QxError::Capacity(format!("level {level} not reached within radius {}", cfg.limit)));
        }
    }
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if level_at(p, scale, u * mid, &cfg.green) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inradius of `D^(L)` by ray bisection, the closest rays refined by a
/// golden-section search in angle, and the resulting density interval.
/// `scale` maps normalized radii to raw parameters of the profile.
pub fn metric_interval(p: &(impl GreenProfile + ?Sized), scale: f64, level: f64, cfg: &MetricConfig) -> Result<MetricInterval> {
    let h = TAU / cfg.rays as f64;
    let radii = (0..cfg.rays)
        .into_par_iter()
        .map(|i| hit_radius(p, scale, level, h * i as f64, cfg))
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..cfg.rays).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let refined = order
        .iter()
        .take(4)
        .map(|&i| {
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (h * (i as f64 - 1.0), h * (i as f64 + 1.0));
            let mut best = radii[i];
            for _ in 0..30 {
                let x1 = b - g * (b - a);
                let x2 = a + g * (b - a);
                let (f1, f2) = (hit_radius(p, scale, level, x1, cfg)?, hit_radius(p, scale, level, x2, cfg)?);
                best = best.min(f1).min(f2);
                if f1 < f2 {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let delta = refined.into_iter().fold(f64::INFINITY, f64::min);
    let m = 4 * cfg.rays;
    let sweep_ok = (0..m).all(|i| level_at(p, scale, C64::from_polar(0.5 * delta, TAU * i as f64 / m as f64), &cfg.green) < level);
    Ok(MetricInterval { lower: 1.0 / (4.0 * delta), upper: 1.0 / delta, inradius: delta, level, sweep_ok })
}

/// Metric interval at a saddle point from its normalized parametrization.
pub fn metric_l_interval(param: &UnstableParametrization, map: &HenonMap, level: f64, cfg: &MetricConfig) -> Result<MetricInterval> {
    if !param.normalized {
        return Err(QxError::Precondition("parametrization must be normalized".into()));
    }
    metric_interval(&param.profile(map), param.scale, level, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MetricFamily {
    /// `||v||^# = |v|` in the normalized coordinate.
    Sharp,
    /// `tau ||.||^#`.
    Scaled(f64),
    /// `||.||^(L)`.
    Level(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleSample {
    pub family: MetricFamily,
    /// Cycle indices of the orbit points `x_0, x_1, ...`.
    pub indices: Vec<usize>,
    /// `c(x_k, 1)`.
    pub values: Vec<Interval>,
    /// `log` of the density of the family at `x_k` (the comparison function
    /// against `||.||^#`).
    pub log_density: Vec<Interval>,
    /// True if a capacity error cut the series short.
    pub truncated: bool,
}

impl CocycleSample {
    /// `c(x_k, n) = sum_{i < n} c(x_{k+i}, 1)`.
    pub fn partial(&self, k: usize, n: usize) -> Interval {
        let mut acc = Interval::point(0.0);
        for i in k..k + n {
            acc = acc.add(self.values[i]);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.lo.abs().max(v.hi.abs())).fold(0.0, f64::max)
    }
}

/// Cocycle `c(x, 1) = log(||Df v||_{fx} / ||v||_x)` along `length` steps of
/// a cycle. In the normalized coordinates `Df v` is `lambda_x v`, so
/// `c(x, 1) = log |lambda_x| + log rho(fx) - log rho(x)` with `rho` the density.
pub fn cocycle_series(
    map: &HenonMap,
    cycle: &NormalizedCycle,
    family: MetricFamily,
    length: usize,
    cfg: &MetricConfig,
) -> CocycleSample {
    let n = cycle.params.len();
    let needed = (length + 1).min(n);
    let dens: Vec<Result<Interval>> = (0..needed)
        .into_par_iter()
        .map(|j| match family {
            MetricFamily::Sharp => Ok(Interval::point(0.0)),
            MetricFamily::Scaled(tau) => Ok(Interval::point(tau.ln())),
            MetricFamily::Level(l) => metric_l_interval(&cycle.params[j], map, l, cfg).map(|m| m.interval().ln()),
        })
        .collect();
    let mut log_density = Vec::new();
    let mut truncated = false;
    for d in dens {
        match d {
            Ok(v) => log_density.push(v),
            Err(_) => {
                truncated = true;
                break;
            }
        }
    }
    let mut values = Vec::new();
    let mut indices = Vec::new();
    for k in 0..length {
        let (a, b) = (k % n, (k + 1) % n);
        if a >= log_density.len() || b >= log_density.len() {
            truncated = true;
            break;
        }
        indices.push(a);
        values.push(Interval::point(cycle.steps[a].norm().ln()).add(log_density[b]).sub(log_density[a]));
    }
    let log_density = indices.iter().map(|&i| log_density[i]).collect();
    CocycleSample { family, indices, values, log_density, truncated }
}

/// Residual of `c1(x,1) - c2(x,1) = a(fx) - a(x)` with `a = log(||.||^1 / ||.||^2)`
/// measured as the interval difference of log-densities; interval-valued
/// residuals count as their distance from 0.
pub fn coboundary_residual(s1: &CocycleSample, s2: &CocycleSample) -> Result<f64> {
    if s1.indices != s2.indices {
        return Err(QxError::Precondition("series are not on the same orbit".into()));
    }
    let len = s1.values.len();
    let mut worst = 0.0f64;
    for k in 0..len.saturating_sub(1) {
        let a_x = s1.log_density[k].sub(s2.log_density[k]);
        let a_fx = s1.log_density[k + 1].sub(s2.log_density[k + 1]);
        let r = s1.values[k].sub(s2.values[k]).sub(a_fx.sub(a_x));
        worst = worst.max(r.distance_to(0.0));
    }
    Ok(worst)
}

/// Conformal map data used in the real-line bounds: `phi` maps the unit disk
/// onto the strip `|Im z| < 1` (or onto `{|Im sqrt z| < 1}` for a half-line)
/// and `rho = phi^{-1}((1/s) phi)` with `s = d` (or `d^2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripMap {
    pub half_line: bool,
    pub formula: String,
    pub inverse_formula: String,
    /// `phi'(0)`.
    pub phi_prime0: f64,
    /// `rho'(0)`, computed by a Cauchy integral of the composite.
    pub rho_prime0: f64,
    pub degree: usize,
}

/// `(2/pi) log((1+z)/(1-z))`, disk onto the strip `|Im| < 1`.
pub fn strip_phi(z: C64) -> C64 {
    ((c64(1.0, 0.0) + z) / (c64(1.0, 0.0) - z)).ln() * (2.0 / PI)
}

pub fn strip_phi_inv(w: C64) -> C64 {
    (w * (PI / 4.0)).tanh()
}

/// `phi(z) = strip_phi(sqrt z)^2`, even in `sqrt z` hence analytic on the disk.
pub fn half_line_phi(z: C64) -> C64 {
    let s = strip_phi(z.sqrt());
    s * s
}

pub fn half_line_phi_inv(w: C64) -> C64 {
    let t = (w.sqrt() * (PI / 4.0)).tanh();
    t * t
}

/// `f'(0)` for `f` analytic on `|z| <= r`, from the trapezoid rule on the
/// Cauchy integral (spectrally accurate).
pub fn derivative_at_zero(f: impl Fn(C64) -> C64, r: f64, samples: usize) -> C64 {
    let mut acc = c64(0.0, 0.0);
    for k in 0..samples {
        let z = C64::from_polar(r, TAU * k as f64 / samples as f64);
        acc += f(z) / z;
    }
    acc / samples as f64
}

impl StripMap {
    pub fn new(degree: usize, half_line: bool) -> Self {
        let d = degree as f64;
        let (formula, inverse_formula, phi_prime0, rho_prime0) = if half_line {
            let s = d * d;
            (
                "phi(z) = ((2/pi) log((1+sqrt z)/(1-sqrt z)))^2".to_string(),
                "phi^-1(w) = tanh(pi sqrt(w) / 4)^2".to_string(),
                derivative_at_zero(half_line_phi, 0.5, 128).re,
                derivative_at_zero(|z| half_line_phi_inv(half_line_phi(z) / s), 0.5, 128).re,
            )
        } else {
            (
                "phi(z) = (2/pi) log((1+z)/(1-z))".to_string(),
                "phi^-1(w) = tanh(pi w / 4)".to_string(),
                derivative_at_zero(strip_phi, 0.5, 128).re,
                derivative_at_zero(|z| strip_phi_inv(strip_phi(z) / d), 0.5, 128).re,
            )
        };
        Self { half_line, formula, inverse_formula, phi_prime0, rho_prime0, degree }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripBound {
    /// Lower bound for `c^(L)(x, 1)`: `log d`, or `2 log d` on a half-line.
    pub bound: f64,
    pub level: f64,
    pub map: StripMap,
}

/// Largest relative imaginary part among the coefficients, a measure of how
/// far the parametrization is from commuting with conjugation.
pub fn real_symmetry_defect(param: &UnstableParametrization) -> f64 {
    let mut worst = (param.base.x.im.abs() + param.base.y.im.abs()) / (1.0 + param.base.sup_norm());
    for c in &param.coeffs {
        let n = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
        if n > 0.0 {
            worst = worst.max((c[0].im.abs() + c[1].im.abs()) / n);
        }
    }
    worst
}

/// Lower bound for `c^(L)(x,1)` at a saddle of a real map whose unstable
/// line meets `J` only in the real axis (or a half-line).
pub fn strip_cocycle_bound(map: &HenonMap, param: &UnstableParametrization, level: f64, half_line: bool) -> Result<StripBound> {
    if !map.is_real() {
        return Err(QxError::Precondition("map is not real".into()));
    }
    let defect = real_symmetry_defect(param);
    if defect > 1e-10 {
        return Err(QxError::Precondition(format!("parametrization not real-symmetric (defect {defect:e})")));
    }
    let sm = StripMap::new(map.degree(), half_line);
    // the constructed map certifies rho'(0) = 1/d (or 1/d^2); the bound is its exact value
    let k = if half_line { 2.0 } else { 1.0 };
    Ok(StripBound { bound: k * (map.degree() as f64).ln(), level, map: sm })
}
