//! Parametrizations of unstable (and stable) manifolds at saddle cycles,
//! their m-functions, normalization and the per-step multipliers.
//!
//! At a point `x` of an `n`-cycle the raw parametrization `phi` solves
//! `f^n(phi(w)) = phi(lambda w)` with `phi'(0)` a unit eigenvector. The
//! normalized one is `psi(z) = phi(s z)` with `s` chosen so that
//! `max_{|z| <= 1} G+(psi(z)) = t`. Green values far out on the manifold are
//! pulled back into the trusted disk with `G+(phi(w)) = d^{nk} G+(phi(w/lambda^k))`.

use crate::error::{QxError, Result};
use crate::green::{GreenConfig, GreenEstimate};
use crate::oned::effective_order;
use crate::henon::{Backward, ComplexPoint, Forward, HenonMap, Mat2, PlaneMap};
use crate::saddles::PeriodicOrbit;
use crate::scalar::{c64, C64};
use crate::series::{norm2, VecSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

type Point = ComplexPoint<f64>;

/// Anything whose Green function can be sampled along a parametrized curve:
/// unstable manifolds of Hénon maps and one-variable linearizers.
pub trait GreenProfile: Sync {
    fn degree(&self) -> usize;
    /// Green value at raw parameter `w`.
    fn green_raw(&self, w: C64, cfg: &GreenConfig) -> GreenEstimate;
    /// `(|lambda|, d^n)` with `m(|lambda| r) = d^n m(r)` exactly.
    fn growth(&self) -> (f64, f64);
    /// Raw radius where direct evaluation is trusted.
    fn reference_radius(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MConfig {
    /// Equally spaced samples per circle.
    pub samples: usize,
    /// Number of sampled local maxima refined by golden-section search.
    pub refine: usize,
    /// Relative tolerance on the radius in level solves.
    pub level_tol: f64,
    pub max_iter: usize,
    pub green: GreenConfig,
    /// Also sample interior circles and flag any value above the boundary max.
    pub interior_check: bool,
}

impl Default for MConfig {
    fn default() -> Self {
        Self {
            samples: 256,
            refine: 3,
            level_tol: 1e-12,
            max_iter: 100,
            green: GreenConfig { tol: 1e-13, budget: 200 },
            interior_check: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleMax {
    pub value: f64,
    pub theta: f64,
    /// Samples whose Green estimate was inconclusive.
    pub unreliable: usize,
}

fn sample(p: &(impl GreenProfile + ?Sized), rho: f64, theta: f64, cfg: &MConfig) -> Option<f64> {
    let w = rho * c64(theta.cos(), theta.sin());
    let g = p.green_raw(w, &cfg.green);
    if g.is_conclusive() {
        return g.usable();
    }
    // slow escape (e.g. near parabolic points): one retry with a longer budget
    let long = GreenConfig { budget: cfg.green.budget * 16, ..cfg.green };
    p.green_raw(w, &long).usable()
}

/// Max of `G` over the circle of raw radius `rho`.
pub fn circle_max(p: &(impl GreenProfile + ?Sized), rho: f64, cfg: &MConfig) -> CircleMax {
    let k = cfg.samples.max(8);
    let h = TAU / k as f64;
    let mut vals = Vec::with_capacity(k);
    let mut unreliable = 0;
    for i in 0..k {
        match sample(p, rho, h * i as f64, cfg) {
            Some(v) => vals.push(v),
            None => {
                unreliable += 1;
                vals.push(f64::NEG_INFINITY);
            }
        }
    }
    let mut peaks: Vec<usize> =
        (0..k).filter(|&i| vals[i] >= vals[(i + k - 1) % k] && vals[i] >= vals[(i + 1) % k]).collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let (mut best, mut best_theta) = (f64::NEG_INFINITY, 0.0);
    for &i in &peaks {
        if vals[i] > best {
            best = vals[i];
            best_theta = h * i as f64;
        }
    }
    for &i in peaks.iter().take(cfg.refine) {
        if !vals[i].is_finite() {
            continue;
        }
        let (v, th) = golden_max(|th| sample(p, rho, th, cfg).unwrap_or(f64::NEG_INFINITY), h * i as f64, h);
        if v > best {
            best = v;
            best_theta = th;
        }
    }
    CircleMax { value: best.max(0.0), theta: best_theta.rem_euclid(TAU), unreliable }
}

/// Golden-section maximization of `f` on `[c - h, c + h]`.
fn golden_max(f: impl Fn(f64) -> f64, c: f64, h: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (c - h, c + h);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-9 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (f1, x1)
    } else {
        (f2, x2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MFunction {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub circle_samples: usize,
    /// Angular spacing of the initial samples.
    pub resolution: f64,
    /// Radii where some sample was inconclusive.
    pub unreliable: Vec<bool>,
    /// Interior samples exceeding the boundary max (only with `interior_check`).
    pub interior_violations: usize,
}

impl MFunction {
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
    }
}

/// `m(r)` at normalized radii `r`, i.e. raw radii `scale * r`.
pub fn m_function_raw(p: &(impl GreenProfile + ?Sized), scale: f64, radii: &[f64], cfg: &MConfig) -> MFunction {
    let mut values = Vec::with_capacity(radii.len());
    let mut unreliable = Vec::with_capacity(radii.len());
    let mut interior_violations = 0;
    for &r in radii {
        let cm = circle_max(p, scale * r, cfg);
        if cfg.interior_check {
            for frac in [0.25, 0.5, 0.75] {
                for i in 0..cfg.samples.max(8) / 4 {
                    let th = TAU * i as f64 / (cfg.samples.max(8) / 4) as f64;
                    if let Some(v) = sample(p, scale * r * frac, th, cfg) {
                        if v > cm.value * (1.0 + 1e-9) + 1e-14 {
                            interior_violations += 1;
                        }
                    }
                }
            }
        }
        values.push(cm.value);
        unreliable.push(cm.unreliable > 0);
    }
    MFunction {
        radii: radii.to_vec(),
        values,
        circle_samples: cfg.samples,
        resolution: TAU / cfg.samples as f64,
        unreliable,
        interior_violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSolve {
    /// Raw radius with `m(rho) = level`.
    pub rho: f64,
    pub iterations: usize,
    pub achieved: f64,
}

/// Solve `m_raw(rho) = level` on the monotone profile. The bracket comes
/// from the exact growth law; the root is refined by Illinois steps on
/// `log m` against `log rho`, which is close to linear.
pub fn solve_level(p: &(impl GreenProfile + ?Sized), level: f64, cfg: &MConfig) -> Result<LevelSolve> {
    solve_level_near(p, level, p.reference_radius(), cfg)
}

/// As [`solve_level`] with the bracket built around `guess`.
pub fn solve_level_near(p: &(impl GreenProfile + ?Sized), level: f64, guess: f64, cfg: &MConfig) -> Result<LevelSolve> {
    if !(level > 0.0) {
        return Err(QxError::Precondition(format!("level {level} must be positive")));
    }
    // Green tolerance and budget follow the level: tiny levels mean orbits
    // that need many more iterations to leave the bounded region.
    let extra = (-level.ln() / (p.degree() as f64).ln()).max(0.0).ceil() as usize;
    let cfg = &MConfig {
        green: GreenConfig { tol: cfg.green.tol * level.min(1.0), budget: cfg.green.budget + extra },
        ..*cfg
    };
    let (lam, dn) = p.growth();
    let mut guess = guess;
    let mut m0 = circle_max(p, guess, cfg).value;
    let mut iterations = 1;
    // the whole circle may sit in the filled set; move outward by |lambda|
    while !(m0 > 0.0) && iterations < 8 {
        guess *= lam;
        m0 = circle_max(p, guess, cfg).value;
        iterations += 1;
    }
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(QxError::Capacity(format!("m vanishes at raw radius {guess:e}; no bracket")));
    }
    let f0 = m0.ln() - level.ln();
    if f0.abs() < 1e-14 {
        return Ok(LevelSolve { rho: guess, iterations, achieved: m0 });
    }
    // bracket [x0 + j log lam, x0 + (j+1) log lam] or shrink toward guess
    let (ll, ld) = (lam.ln(), dn.ln());
    let x0 = guess.ln();
    let j = (-f0 / ld).floor();
    let (mut a, mut fa) = (x0 + j * ll, f0 + j * ld);
    let (mut b, mut fb) = (x0 + (j + 1.0) * ll, f0 + (j + 1.0) * ld);
    // tighten with the sample at the guess when it lies inside
    if j == 0.0 {
        a = x0;
        fa = f0;
    } else if j == -1.0 {
        b = x0;
        fb = f0;
    }
    let mut side = 0i8;
    let mut c = a;
    let mut fc = fa;
    for _ in 0..cfg.max_iter {
        if (b - a).abs() <= cfg.level_tol {
            break;
        }
        c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let cm = circle_max(p, c.exp(), cfg).value;
        iterations += 1;
        if !(cm > 0.0) {
            return Err(QxError::Capacity(format!("m vanishes inside bracket at raw radius {:e}", c.exp())));
        }
        fc = cm.ln() - level.ln();
        if fc.abs() < 1e-14 {
            break;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    let rho = c.exp();
    Ok(LevelSolve { rho, iterations, achieved: level * fc.exp() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Unstable,
    Stable,
}

/// Truncated parametrization `phi(w) = base + sum_k a_k w^k` of the unstable
/// (or stable) manifold at a cycle point, with normalization scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnstableParametrization {
    pub kind: ManifoldKind,
    pub base: Point,
    /// `a_1 ..= a_N`.
    pub coeffs: Vec<[C64; 2]>,
    /// `lambda` in `F^n(phi(w)) = phi(lambda w)`, with `F = f` or `f^{-1}`.
    pub multiplier: C64,
    pub period: usize,
    pub degree: usize,
    pub scale: f64,
    pub valid_radius: f64,
    /// Max functional-equation residual on `|w| <= valid_radius / |lambda|`.
    pub residual_bound: f64,
    pub normalized: bool,
    /// `t` with `m(1) = t`; 0 until normalized.
    pub level: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub t: f64,
    pub scale: f64,
    pub iterations: usize,
    /// `m(1)` of the normalized parametrization.
    pub achieved: f64,
}

fn cycle_differential(dir: &dyn PlaneMap<f64>, base: &Point, cycle: &[Point]) -> Mat2<f64> {
    let mut q = *base;
    let mut m = Mat2::identity();
    for next in cycle {
        m = dir.differential(&q).mul(&m);
        q = *next;
    }
    m
}

/// `F^n` applied to a series, re-anchoring the constant term on the stored
/// cycle after each step so the cycle's rounding is not amplified.
fn apply_n(dir: &dyn PlaneMap<f64>, s: &VecSeries<f64>, cycle: &[Point], order: usize) -> VecSeries<f64> {
    let mut out = s.clone();
    for q in cycle {
        out = dir.apply_series(&out, order);
        out.set_coeff(0, [q.x, q.y]);
    }
    out
}

/// Fix the phase: first component with modulus above 1e-3 made real positive.
fn unit_vector(v: [C64; 2]) -> [C64; 2] {
    let n = norm2(v);
    let pivot = if v[0].norm() > 1e-3 * n { v[0] } else { v[1] };
    let ph = pivot.conj() / pivot.norm();
    [v[0] * ph / n, v[1] * ph / n]
}

/// `cycle[i]` is the image of the base point under `F^{i+1}`.
fn solve_jet(dir: &dyn PlaneMap<f64>, base: Point, cycle: &[Point], lambda: C64, order: usize) -> Result<VecSeries<f64>> {
    let m = cycle_differential(dir, &base, cycle);
    let det = m.det();
    let (e1, e2) = m.eigenvalues_with_det(det);
    let (mu, other) = if (e1 - lambda).norm() <= (e2 - lambda).norm() { (e1, e2) } else { (e2, e1) };
    let v = unit_vector(m.eigenvector(mu));
    let mut phi = VecSeries::zeros(order);
    phi.set_coeff(0, [base.x, base.y]);
    phi.set_coeff(1, v);
    let mut lk = mu;
    for k in 2..=order {
        lk *= mu;
        let den = (lk - mu).norm().min((lk - other).norm());
        if den < 1e-10 {
            return Err(QxError::Resonance { order: k, denominator: den });
        }
        let comp = apply_n(dir, &phi, cycle, k);
        let b = comp.coeff(k);
        let mut a = m;
        a.m[0][0] = lk - a.m[0][0];
        a.m[0][1] = -a.m[0][1];
        a.m[1][0] = -a.m[1][0];
        a.m[1][1] = lk - a.m[1][1];
        let ak = a.solve(b).ok_or(QxError::Resonance { order: k, denominator: den })?;
        phi.set_coeff(k, ak);
    }
    Ok(phi)
}

/// Radius where the last few terms are below `1e-15 (1 + |base|)` and the
/// absolute series sum stays below `1e4 (1 + |base|)`.
fn trusted_radius(phi: &VecSeries<f64>) -> f64 {
    let n = phi.order();
    let b = 1.0 + norm2(phi.coeff(0));
    let mut r = 1e8f64;
    for k in n.saturating_sub(4).max(2)..=n {
        let ak = norm2(phi.coeff(k));
        if ak > 0.0 {
            r = r.min((1e-15 * b / ak).powf(1.0 / k as f64));
        }
    }
    let abs_sum = |r: f64| {
        (1..=n)
            .map(|k| norm2(phi.coeff(k)))
            .enumerate()
            .filter(|(_, a)| *a > 0.0)
            .map(|(k, a)| (a.ln() + (k + 1) as f64 * r.ln()).exp())
            .sum::<f64>()
    };
    if abs_sum(r) > 1e4 * b {
        let (mut lo, mut hi) = (0.0, r);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if abs_sum(mid) > 1e4 * b {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        r = lo;
    }
    r
}

impl UnstableParametrization {
    fn from_jet(kind: ManifoldKind, phi: VecSeries<f64>, lambda: C64, n: usize, d: usize) -> Self {
        let base = Point::new(phi.x.coeffs[0], phi.y.coeffs[0]);
        let coeffs = (1..=phi.order()).map(|k| phi.coeff(k)).collect();
        let valid_radius = trusted_radius(&phi);
        Self {
            kind,
            base,
            coeffs,
            multiplier: lambda,
            period: n,
            degree: d,
            scale: 1.0,
            valid_radius,
            residual_bound: f64::NAN,
            normalized: false,
            level: 0.0,
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn series(&self) -> VecSeries<f64> {
        let mut s = VecSeries::zeros(self.order());
        s.set_coeff(0, [self.base.x, self.base.y]);
        for (k, c) in self.coeffs.iter().enumerate() {
            s.set_coeff(k + 1, *c);
        }
        s
    }

    pub fn eval_raw(&self, w: C64) -> Point {
        let (mut x, mut y) = (c64(0.0, 0.0), c64(0.0, 0.0));
        for c in self.coeffs.iter().rev() {
            x = (x + c[0]) * w;
            y = (y + c[1]) * w;
        }
        Point::new(self.base.x + x, self.base.y + y)
    }

    pub fn derivative_raw(&self, w: C64) -> [C64; 2] {
        let (mut x, mut y) = (c64(0.0, 0.0), c64(0.0, 0.0));
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            let kk = (k + 1) as f64;
            x = x * w + c[0] * kk;
            y = y * w + c[1] * kk;
        }
        [x, y]
    }

    /// Normalized parametrization `psi(z) = phi(scale z)`.
    pub fn eval(&self, z: C64) -> Point {
        self.eval_raw(z * self.scale)
    }

    pub fn derivative(&self, z: C64) -> [C64; 2] {
        let d = self.derivative_raw(z * self.scale);
        [d[0] * self.scale, d[1] * self.scale]
    }

    /// Raw evaluation anywhere: `phi(w) = F^{nk}(phi(w / lambda^k))`.
    pub fn eval_global_raw(&self, map: &HenonMap, w: C64) -> Point {
        self.global_raw(map, w).0
    }

    /// Raw value and derivative anywhere, by the chain rule along `F^{nk}`.
    pub fn global_raw(&self, map: &HenonMap, w: C64) -> (Point, [C64; 2]) {
        let mut z = w;
        let mut k = 0;
        while z.norm() > self.valid_radius {
            z /= self.multiplier;
            k += 1;
        }
        let dir = self.direction(map);
        let mut q = self.eval_raw(z);
        let mut v = self.derivative_raw(z);
        let inv = C64::new(1.0, 0.0) / self.multiplier.powi(k as i32);
        v = [v[0] * inv, v[1] * inv];
        for _ in 0..self.period * k {
            v = dir.differential(&q).apply(v);
            q = dir.apply(&q);
        }
        (q, v)
    }

    /// Normalized coefficients `a_k scale^k`.
    pub fn normalized_coeffs(&self) -> Vec<[C64; 2]> {
        let mut sk = 1.0;
        self.coeffs
            .iter()
            .map(|c| {
                sk *= self.scale;
                [c[0] * sk, c[1] * sk]
            })
            .collect()
    }

    fn direction<'a>(&self, map: &'a HenonMap) -> Box<dyn PlaneMap<f64> + 'a> {
        match self.kind {
            ManifoldKind::Unstable => Box::new(Forward(map)),
            ManifoldKind::Stable => Box::new(Backward(map)),
        }
    }

    /// `max |F^n(phi(w)) - phi(lambda w)|` over `count` random points of
    /// `|w| <= radius`, in the sup norm.
    pub fn functional_residual(&self, map: &HenonMap, radius: f64, count: usize, seed: u64) -> f64 {
        let dir = self.direction(map);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..count {
            let r = radius * rng.gen::<f64>().sqrt();
            let th = TAU * rng.gen::<f64>();
            let w = c64(r * th.cos(), r * th.sin());
            let mut q = self.eval_raw(w);
            for _ in 0..self.period {
                q = dir.apply(&q);
            }
            worst = worst.max(q.dist_sup(&self.eval_raw(self.multiplier * w)));
        }
        worst
    }

    /// Radius of the disk on which the functional equation is checked.
    pub fn residual_radius(&self) -> f64 {
        self.valid_radius / self.multiplier.norm()
    }

    pub fn profile<'a>(&'a self, map: &'a HenonMap) -> ManifoldProfile<'a> {
        ManifoldProfile { map, param: self }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Green profile along a manifold parametrization: `G+` for unstable
/// manifolds, `G-` for stable ones.
pub struct ManifoldProfile<'a> {
    map: &'a HenonMap,
    param: &'a UnstableParametrization,
}

impl GreenProfile for ManifoldProfile<'_> {
    fn degree(&self) -> usize {
        self.param.degree
    }

    fn green_raw(&self, w: C64, cfg: &GreenConfig) -> GreenEstimate {
        let lam = self.param.multiplier;
        let mut z = w;
        let mut k = 0i32;
        while z.norm() > self.param.valid_radius {
            z /= lam;
            k += 1;
        }
        let q = self.param.eval_raw(z);
        // each pull-back by lambda costs n iterations and a factor d^n
        let steps = self.param.period * k as usize;
        let factor = (self.param.degree as f64).powi(steps as i32);
        let (tol, budget) = (cfg.tol / factor, cfg.budget + steps);
        let mut g = match self.param.kind {
            ManifoldKind::Unstable => self.map.green_plus(&q, tol, budget),
            ManifoldKind::Stable => self.map.green_minus(&q, tol, budget),
        };
        g.value *= factor;
        g.error_bound *= factor;
        g
    }

    fn growth(&self) -> (f64, f64) {
        (self.param.multiplier.norm(), (self.param.degree as f64).powi(self.param.period as i32))
    }

    fn reference_radius(&self) -> f64 {
        0.5 * self.param.valid_radius
    }
}

/// Raw parametrization of `W^u` at `orbit.points[0]` to order `order`.
pub fn linearize_unstable(map: &HenonMap, orbit: &PeriodicOrbit, order: usize) -> Result<UnstableParametrization> {
    let lam = orbit.eig_unstable;
    if !(lam.norm() > 1.0 + 1e-6) || !(orbit.eig_stable.norm() < 1.0) {
        return Err(QxError::Precondition(format!("orbit is not a saddle: |lambda+| = {}", lam.norm())));
    }
    let dir = Forward(map);
    let n = orbit.period;
    let cycle: Vec<Point> = (1..=n).map(|i| orbit.points[i % n]).collect();
    let phi = solve_jet(&dir, orbit.points[0], &cycle, lam, effective_order(order, lam.norm()))?;
    let mut p = UnstableParametrization::from_jet(ManifoldKind::Unstable, phi, lam, orbit.period, map.degree());
    p.residual_bound = p.functional_residual(map, p.residual_radius(), 64, 0x5eed);
    Ok(p)
}

/// Raw parametrization of `W^s` at `orbit.points[0]`, as the unstable
/// manifold of `f^{-1}`; its multiplier is `1/lambda-`.
pub fn linearize_stable(map: &HenonMap, orbit: &PeriodicOrbit, order: usize) -> Result<UnstableParametrization> {
    let mu = orbit.eig_stable.inv();
    if !(mu.norm() > 1.0 + 1e-6) || !(orbit.eig_unstable.norm() > 1.0) {
        return Err(QxError::Precondition(format!("orbit is not a saddle: |lambda-| = {}", orbit.eig_stable.norm())));
    }
    let dir = Backward(map);
    let n = orbit.period;
    // f^{-1} walks the cycle backwards
    let cycle: Vec<Point> = (1..=n).map(|i| orbit.points[(n - i % n) % n]).collect();
    let phi = solve_jet(&dir, orbit.points[0], &cycle, mu, effective_order(order, mu.norm()))?;
    let mut p = UnstableParametrization::from_jet(ManifoldKind::Stable, phi, mu, orbit.period, map.degree());
    p.residual_bound = p.functional_residual(map, p.residual_radius(), 64, 0x5eed);
    Ok(p)
}

/// Independent unstable parametrizations at every point of the cycle.
pub fn linearize_cycle(map: &HenonMap, orbit: &PeriodicOrbit, order: usize) -> Result<Vec<UnstableParametrization>> {
    (0..orbit.period)
        .map(|j| {
            let mut o = orbit.rotated(j);
            // eigenvalues of Df^n are the same at every cycle point
            o.eig_unstable = orbit.eig_unstable;
            o.eig_stable = orbit.eig_stable;
            linearize_unstable(map, &o, order)
        })
        .collect()
}

/// m-function of a (possibly normalized) parametrization at radii `r`.
pub fn m_function(param: &UnstableParametrization, map: &HenonMap, radii: &[f64], cfg: &MConfig) -> MFunction {
    m_function_raw(&param.profile(map), param.scale, radii, cfg)
}

/// Rescale so that `m(1) = t`.
pub fn normalize(
    param: &UnstableParametrization,
    map: &HenonMap,
    t: f64,
    cfg: &MConfig,
) -> Result<(UnstableParametrization, NormalizationRecord)> {
    let raw = UnstableParametrization { scale: 1.0, normalized: false, level: 0.0, ..param.clone() };
    let guess = if param.normalized { param.scale } else { raw.profile(map).reference_radius() };
    let sol = solve_level_near(&raw.profile(map), t, guess, cfg)?;
    let out = UnstableParametrization { scale: sol.rho, normalized: true, level: t, ..raw };
    let rec = NormalizationRecord { t, scale: sol.rho, iterations: sol.iterations, achieved: sol.achieved };
    Ok((out, rec))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMultiplier {
    /// `|lambda_x|` from `m_{fx}(|lambda_x|) = d t`.
    pub modulus: f64,
    /// Argument from the finite-difference derivative of `psi_{fx}^{-1} f psi_x`.
    pub argument: f64,
    /// Finite-difference modulus, a diagnostic.
    pub fd_modulus: f64,
    pub iterations: usize,
}

impl StepMultiplier {
    pub fn value(&self) -> C64 {
        C64::from_polar(self.modulus, self.argument)
    }
}

/// Local inverse of a raw parametrization near `w0` by projected Newton.
pub fn local_inverse(param: &UnstableParametrization, q: &Point, w0: C64) -> C64 {
    let mut w = w0;
    for _ in 0..50 {
        let p = param.eval_raw(w);
        let dv = param.derivative_raw(w);
        let r = [q.x - p.x, q.y - p.y];
        let num = dv[0].conj() * r[0] + dv[1].conj() * r[1];
        let den = dv[0].norm_sqr() + dv[1].norm_sqr();
        let step = num / den;
        w += step;
        if step.norm() <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
    }
    w
}

/// Per-step multiplier `lambda_x` in `f psi_x = psi_{fx} L_x`.
pub fn step_multiplier(
    map: &HenonMap,
    px: &UnstableParametrization,
    pfx: &UnstableParametrization,
    cfg: &MConfig,
) -> Result<StepMultiplier> {
    if !px.normalized || !pfx.normalized || (px.level - pfx.level).abs() > 1e-12 * px.level {
        return Err(QxError::Precondition("both parametrizations must be normalized to the same t".into()));
    }
    let d = map.degree() as f64;
    let level = d * px.level;
    let (lam, _) = pfx.profile(map).growth();
    // |lambda_x| is expected near |lambda|^{1/n}
    let guess = pfx.scale * lam.powf(1.0 / pfx.period as f64);
    let sol = solve_level_near(&pfx.profile(map), level, guess, cfg)?;
    let modulus = sol.rho / pfx.scale;
    let h = 1e-6;
    let q = map.evaluate(&px.eval(c64(h, 0.0)));
    let a1 = pfx.coeffs[0];
    let r = [q.x - pfx.base.x, q.y - pfx.base.y];
    let w0 = (a1[0].conj() * r[0] + a1[1].conj() * r[1]) / (a1[0].norm_sqr() + a1[1].norm_sqr());
    let w = local_inverse(pfx, &q, w0);
    let fd = w / pfx.scale / h;
    Ok(StepMultiplier { modulus, argument: fd.arg(), fd_modulus: fd.norm(), iterations: sol.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddles::{find_periodic_orbits, SearchConfig};

    #[test]
    fn golden_finds_cosine_peak() {
        let (v, th) = golden_max(|x| (x - 0.3).cos(), 0.25, 0.1);
        assert!((th - 0.3).abs() < 1e-7 && (v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn horseshoe_fixed_point_jet() {
        let map = HenonMap::quadratic(-6.0, 0.1);
        let cat = find_periodic_orbits(&map, 1, &SearchConfig::default());
        let o = cat.orbits.iter().find(|o| o.points[0].x.re > 0.0).unwrap();
        let p = linearize_unstable(&map, o, 40).unwrap();
        assert!((norm2(p.coeffs[0]) - 1.0).abs() < 1e-14);
        assert!(p.residual_bound < 1e-8, "{}", p.residual_bound);
    }
}
