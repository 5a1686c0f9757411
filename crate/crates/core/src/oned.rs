//! One-variable polynomials: repelling cycles, linearizers, per-step
//! multipliers and the semi-hyperbolicity verdict.

use crate::continuation::{ContinuationConfig, OrbitSystem};
use crate::error::{QxError, Result};
use crate::green::{escape_radius_1d, green_1d, GreenConfig, GreenEstimate};
use crate::certify::{assemble, Certificate, CertifyParams, Exclusion, OrbitRecord, PointRecord};
use crate::io::poly_digest;
use crate::manifold::{m_function_raw, solve_level_near, GreenProfile, MConfig};
use crate::poly::Polynomial;
use crate::scalar::{c64, C64};
use crate::series::Series;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Monic polynomial of degree at least two with its critical points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial1D {
    pub poly: Polynomial,
    pub critical_points: Vec<C64>,
}

impl Polynomial1D {
    pub fn new(poly: Polynomial) -> Result<Self> {
        if poly.degree() < 2 || !poly.is_monic() {
            return Err(QxError::InvalidMap("one-variable map must be monic of degree >= 2".into()));
        }
        let dp = poly.derivative();
        let mut critical_points = dp.roots();
        for c in critical_points.iter_mut() {
            // roots of p' up to the size of its coefficients
            for _ in 0..3 {
                let (v, dv) = dp.eval_with_derivative(*c);
                if dv.norm() > 0.0 {
                    *c -= v / dv;
                }
            }
            let scale = dp.coeffs().iter().map(|a| a.norm()).fold(1.0, f64::max);
            if dp.eval(*c).norm() > 1e-10 * scale {
                return Err(QxError::Precondition(format!("critical point {c} not verified")));
            }
        }
        critical_points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(Self { poly, critical_points })
    }

    /// `z^2 + c`.
    pub fn quadratic(c: C64) -> Self {
        Self::new(Polynomial::new(vec![c, c64(0.0, 0.0), c64(1.0, 0.0)])).expect("quadratic is valid")
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.poly.eval(z)
    }

    pub fn green(&self, z: C64, tol: f64, budget: usize) -> GreenEstimate {
        green_1d(&self.poly, z, tol, budget)
    }

    pub fn escape_radius(&self) -> f64 {
        escape_radius_1d(&self.poly)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle1D {
    pub points: Vec<C64>,
    pub period: usize,
    /// `(g^n)'` along the cycle.
    pub multiplier: C64,
    pub residual: f64,
}

impl Cycle1D {
    fn from_points(g: &Polynomial1D, mut points: Vec<C64>) -> Self {
        if g.poly.is_real() && points.iter().all(|z| z.im.abs() <= 1e-15 * (1.0 + z.re.abs())) {
            points.iter_mut().for_each(|z| z.im = 0.0);
        }
        let n = points.len();
        let k = (0..n)
            .min_by(|&i, &j| points[i].re.total_cmp(&points[j].re).then(points[i].im.total_cmp(&points[j].im)))
            .unwrap_or(0);
        points.rotate_left(k);
        let dp = g.poly.derivative();
        let multiplier = points.iter().fold(c64(1.0, 0.0), |m, &z| m * dp.eval(z));
        let residual = (0..n).map(|i| (g.eval(points[i]) - points[(i + 1) % n]).norm()).fold(0.0, f64::max);
        Self { points, period: n, multiplier, residual }
    }

    pub fn is_repelling(&self) -> bool {
        self.multiplier.norm() > 1.0 + 1e-6
    }

    pub fn is_rotation_of(&self, other: &Self, tol: f64) -> bool {
        self.period == other.period
            && (0..self.period)
                .any(|k| (0..self.period).all(|i| (self.points[i] - other.points[(i + k) % self.period]).norm() <= tol))
    }

    /// Rotate so that `points[k]` comes first.
    pub fn rotated(&self, k: usize) -> Self {
        let mut c = self.clone();
        c.points.rotate_left(k % self.period);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCatalog1D {
    /// Every cycle found, including attracting and indifferent ones.
    pub cycles: Vec<Cycle1D>,
    pub n_max: usize,
    /// Per period: number of points with period dividing `n`.
    pub points_dividing: Vec<usize>,
}

impl CycleCatalog1D {
    pub fn repelling(&self) -> impl Iterator<Item = &Cycle1D> {
        self.cycles.iter().filter(|c| c.is_repelling())
    }
}

/// All cycles of exact period `1..=n_max`; repelling ones via [`CycleCatalog1D::repelling`].
pub fn find_cycles(g: &Polynomial1D, n_max: usize) -> CycleCatalog1D {
    let sys = OrbitSystem::new(g.poly.clone(), c64(0.0, 0.0));
    let cfg = ContinuationConfig::default();
    let dedup = 1e-8;
    let mut cycles: Vec<Cycle1D> = Vec::new();
    for n in 1..=n_max.max(1) {
        let starts = crate::continuation::start_cycles(g.degree(), n);
        let tracked: Vec<Cycle1D> =
            starts.par_iter().map(|st| Cycle1D::from_points(g, sys.track(st, &cfg).xs)).collect();
        for c in tracked {
            let scale = 1.0 + c.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !(c.residual <= 1e-9 * scale) {
                continue;
            }
            // divisor periods collapse onto repeated points
            let prime = (1..=n)
                .find(|&m| n % m == 0 && (0..n).all(|i| (c.points[i] - c.points[(i + m) % n]).norm() <= dedup))
                .unwrap_or(n);
            if prime != n || cycles.iter().any(|o| o.is_rotation_of(&c, dedup)) {
                continue;
            }
            cycles.push(c);
        }
    }
    cycles.sort_by(|a, b| {
        a.period.cmp(&b.period).then(a.points[0].re.total_cmp(&b.points[0].re)).then(a.points[0].im.total_cmp(&b.points[0].im))
    });
    let points_dividing =
        (1..=n_max).map(|n| cycles.iter().filter(|c| n % c.period == 0).map(|c| c.period).sum()).collect();
    CycleCatalog1D { cycles, n_max, points_dividing }
}

/// Repelling cycles of exact period `1..=n_max`.
pub fn repelling_cycles(g: &Polynomial1D, n_max: usize) -> Vec<Cycle1D> {
    find_cycles(g, n_max).repelling().cloned().collect()
}

/// Long cycles shadowing a homoclinic chain at each non-attracting fixed
/// point `p`: for a preimage `p' != p`, pull `p'` back `n - 1` times along
/// the branch of `g^{-1}` fixing `p`; the chain `p'_{n-1}, ..., p'_0` closes
/// up to `|p - p'_{n-1}|` and Newton turns it into a period-`n` cycle. These
/// reach the slow-expansion regime near indifferent or weakly repelling
/// fixed points that exhaustive low-period search cannot see. Chains that
/// come closer to `p` than the working precision can resolve are dropped,
/// so in practice only weakly repelling fixed points produce long shadows.
pub fn shadow_cycles(g: &Polynomial1D, periods: &[usize]) -> Vec<Cycle1D> {
    let fixed = find_cycles(g, 1);
    let dp = g.poly.derivative();
    let sys = OrbitSystem::new(g.poly.clone(), c64(0.0, 0.0));
    let mut out: Vec<Cycle1D> = Vec::new();
    for fp in fixed.cycles.iter().filter(|c| c.multiplier.norm() >= 1.0 - 1e-6) {
        let p = fp.points[0];
        let mut pre = g.poly.shifted(p).roots();
        pre.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for &q in pre.iter().filter(|q| (**q - p).norm() > 1e-6) {
            if dp.eval(q).norm() < 1e-12 {
                continue;
            }
            for &n in periods {
                let mut chain = Vec::with_capacity(n);
                chain.push(q);
                for _ in 1..n {
                    let w = *chain.last().unwrap();
                    let roots = g.poly.shifted(w).roots();
                    let next = roots
                        .into_iter()
                        .min_by(|a, b| (*a - p).norm().total_cmp(&(*b - p).norm()).then(a.re.total_cmp(&b.re)))
                        .unwrap();
                    chain.push(next);
                }
                chain.reverse();
                if !sys.polish(&mut chain, 1e-13) {
                    continue;
                }
                let c = Cycle1D::from_points(g, chain);
                let scale = 1.0 + c.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let prime = (1..=n)
                    .find(|&m| n % m == 0 && (0..n).all(|i| (c.points[i] - c.points[(i + m) % n]).norm() <= 1e-8))
                    .unwrap_or(n);
                // a chain that reaches p to rounding is the fixed point repeated
                let gap = c.points.iter().map(|z| (z - p).norm()).fold(f64::INFINITY, f64::min);
                if c.residual <= 1e-9 * scale
                    && gap >= 1e-6 * (1.0 + p.norm())
                    && prime == n
                    && c.is_repelling()
                    && !out.iter().any(|o| o.is_rotation_of(&c, 1e-8))
                {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Linearizer `phi(w) = x + w + sum_{k>=2} c_k w^k` with `g^n(phi(w)) = phi(lambda w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linearizer1D {
    pub base: C64,
    pub period: usize,
    pub multiplier: C64,
    pub degree: usize,
    /// `c_1 ..= c_N`, with `c_1 = 1`.
    pub coeffs: Vec<C64>,
    pub valid_radius: f64,
    /// Max of `|g^n(phi(w)) - phi(lambda w)|` on `|w| <= valid_radius / |lambda|`.
    pub residual_bound: f64,
    /// The cycle, starting at `base`.
    pub orbit: Vec<C64>,
}

/// Truncation order capped so that `|lambda|^k` stays far from overflow;
/// strongly expanding cycles have rapidly decaying coefficients anyway.
pub fn effective_order(order: usize, lambda_modulus: f64) -> usize {
    let cap = (250.0 / lambda_modulus.log10()).floor() as usize;
    order.min(cap).max(2)
}

/// `a / b` without forming `|b|^2`, which overflows for high powers of a
/// multiplier.
fn scaled_div(a: C64, b: C64) -> C64 {
    let s = b.re.abs().max(b.im.abs());
    (a / s) / (b / s)
}

fn taylor_coeffs(g: &Polynomial1D, x: C64) -> Vec<C64> {
    g.poly.taylor_at(x)
}

impl Linearizer1D {
    pub fn series(&self) -> Series {
        let mut c = vec![self.base];
        c.extend_from_slice(&self.coeffs);
        Series::from_coeffs(c)
    }

    pub fn eval(&self, w: C64) -> C64 {
        let mut acc = c64(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * w;
        }
        self.base + acc
    }

    pub fn derivative(&self, w: C64) -> C64 {
        let mut acc = c64(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * w + c * (k + 1) as f64;
        }
        acc
    }

    /// Evaluate anywhere through `phi(w) = g^{nk}(phi(w / lambda^k))`.
    pub fn eval_global(&self, g: &Polynomial1D, w: C64) -> C64 {
        let mut z = w;
        let mut k = 0;
        while z.norm() > self.valid_radius {
            z /= self.multiplier;
            k += 1;
        }
        let mut v = self.eval(z);
        for _ in 0..k * self.period {
            v = g.eval(v);
        }
        v
    }

    pub fn profile<'a>(&'a self, g: &'a Polynomial1D) -> LinearizerProfile<'a> {
        let shifts = self.orbit.iter().map(|&x| taylor_coeffs(g, x)).collect();
        LinearizerProfile { g, lin: self, shifts }
    }
}

fn trusted_radius_1d(base: C64, coeffs: &[C64]) -> f64 {
    let n = coeffs.len();
    let b = 1.0 + base.norm();
    let mut r = 1e8f64;
    for k in n.saturating_sub(5).max(1)..n {
        let a = coeffs[k].norm();
        if a > 0.0 {
            r = r.min((1e-15 * b / a).powf(1.0 / (k + 1) as f64));
        }
    }
    let abs_sum = |r: f64| {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(k, a)| (a.norm().ln() + (k + 1) as f64 * r.ln()).exp())
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

/// Coefficient recursion `c_k = b_k / (lambda^k - lambda)`, where `b_k` is the
/// order-`k` coefficient of `g^n` applied to the series known so far.
pub fn linearizer_1d(g: &Polynomial1D, cycle: &Cycle1D, order: usize) -> Result<Linearizer1D> {
    let lam = cycle.multiplier;
    if !(lam.norm() > 1.0 + 1e-6) {
        return Err(QxError::Precondition(format!("cycle not repelling: |multiplier| = {}", lam.norm())));
    }
    let n = cycle.period;
    let x = cycle.points[0];
    let order = effective_order(order, lam.norm());
    let mut phi = Series::zeros(order);
    phi.coeffs[0] = x;
    phi.coeffs[1] = c64(1.0, 0.0);
    let mut lk = lam;
    for k in 2..=order {
        lk *= lam;
        let mut comp = Series::from_coeffs(phi.coeffs[..=k].to_vec());
        for i in 0..n {
            comp = comp.poly_compose(g.poly.coeffs(), k);
            // re-anchor on the stored cycle so its rounding is not amplified
            comp.coeffs[0] = cycle.points[(i + 1) % n];
        }
        phi.coeffs[k] = scaled_div(comp.coeffs[k], lk - lam);
    }
    let coeffs = phi.coeffs[1..].to_vec();
    let valid_radius = trusted_radius_1d(x, &coeffs);
    let mut lin = Linearizer1D { base: x, period: n, multiplier: lam, degree: g.degree(), coeffs, valid_radius, residual_bound: 0.0, orbit: cycle.points.clone() };
    let rr = valid_radius / lam.norm();
    let mut worst = 0.0f64;
    for i in 0..64 {
        let w = C64::from_polar(rr * ((i % 8) as f64 + 1.0) / 8.0, TAU * (i as f64 * 0.618_033_988_75).fract());
        let mut v = lin.eval(w);
        for _ in 0..n {
            v = g.eval(v);
        }
        worst = worst.max((v - lin.eval(lam * w)).norm() / (1.0 + v.norm()));
    }
    lin.residual_bound = worst;
    Ok(lin)
}

/// `phi(w) = lim_j g^{nj}(x + w / lambda^j)`, iterated in deviation
/// coordinates around the stored cycle points (Taylor shifts of `g`), so
/// the rounding of the cycle itself is not amplified.
pub fn direct_limit(g: &Polynomial1D, cycle: &Cycle1D, w: C64) -> C64 {
    let lam = cycle.multiplier;
    let n = cycle.period;
    let shifts: Vec<Vec<C64>> = cycle.points.iter().map(|&x| taylor_coeffs(g, x)).collect();
    // truncation error of the limit is about |w|^2 / |lambda|^j
    let target = (w.norm().max(1.0).powi(2) * 1e17).ln();
    let j = ((target / lam.norm().ln()).ceil() as i32).max(1);
    let mut delta = w / lam.powi(j);
    for _ in 0..j {
        for t in shifts.iter().take(n) {
            let mut acc = c64(0.0, 0.0);
            for c in t.iter().skip(1).rev() {
                acc = (acc + c) * delta;
            }
            delta = acc;
        }
    }
    cycle.points[0] + delta
}

/// Green profile of a linearizer, `G(phi(w)) = d^{nk} G(phi(w / lambda^k))`.
/// After pulling back, the orbit is followed in deviation coordinates until
/// the deviation is no longer tiny, so nothing is lost to the rounding of
/// `base + delta` on strongly expanding cycles.
pub struct LinearizerProfile<'a> {
    g: &'a Polynomial1D,
    lin: &'a Linearizer1D,
    shifts: Vec<Vec<C64>>,
}

impl GreenProfile for LinearizerProfile<'_> {
    fn degree(&self) -> usize {
        self.lin.degree
    }

    fn green_raw(&self, w: C64, cfg: &GreenConfig) -> GreenEstimate {
        let mut z = w;
        let mut k = 0usize;
        while z.norm() > self.lin.valid_radius {
            z /= self.lin.multiplier;
            k += 1;
        }
        let n = self.lin.period;
        let total = n * k;
        let mut delta = c64(0.0, 0.0);
        for c in self.lin.coeffs.iter().rev() {
            delta = (delta + c) * z;
        }
        let mut i = 0;
        while i < total && delta.norm() < 1e-3 * (1.0 + self.lin.orbit[i % n].norm()) {
            let t = &self.shifts[i % n];
            let mut acc = c64(0.0, 0.0);
            for c in t.iter().skip(1).rev() {
                acc = (acc + c) * delta;
            }
            delta = acc;
            i += 1;
        }
        let rest = total - i;
        let factor = (self.lin.degree as f64).powi(rest as i32);
        let mut est = self.g.green(self.lin.orbit[i % n] + delta, cfg.tol / factor, cfg.budget + rest);
        est.value *= factor;
        est.error_bound *= factor;
        est
    }

    fn growth(&self) -> (f64, f64) {
        (self.lin.multiplier.norm(), (self.lin.degree as f64).powi(self.lin.period as i32))
    }

    fn reference_radius(&self) -> f64 {
        0.5 * self.lin.valid_radius
    }
}

/// Normalized scales and per-step multipliers along one cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSteps {
    pub period: usize,
    pub multiplier: C64,
    /// `s_j` with `m_{x_j}(1) = t` for `psi_{x_j}(z) = g^j(phi(s_j z))`.
    pub scales: Vec<f64>,
    pub steps: Vec<C64>,
    /// Normalized m-function of each point on the requested radii.
    pub m_values: Vec<Vec<f64>>,
    pub unreliable: Vec<usize>,
    pub iterations: usize,
}

impl CycleSteps {
    pub fn min_step(&self) -> f64 {
        self.steps.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn product_modulus(&self) -> f64 {
        self.steps.iter().map(|s| s.norm()).product()
    }
}

/// Per-step multipliers along a cycle. Each point `x_j` gets its own
/// linearizer `phi_j` (so no scale is lost to rounding on strongly expanding
/// cycles), `s_j` solves `m_{x_j}(s_j) = t`, and since
/// `g o phi_j(w) = phi_{j+1}(g'(x_j) w)` the step is
/// `lambda_{x_j} = g'(x_j) s_j / s_{j+1}`. The normalized m-function of every
/// point is also sampled at `radii`.
pub fn cycle_steps(
    g: &Polynomial1D,
    cycle: &Cycle1D,
    order: usize,
    t: f64,
    radii: &[f64],
    cfg: &MConfig,
) -> Result<CycleSteps> {
    let n = cycle.period;
    let sols = (0..n)
        .into_par_iter()
        .map(|j| {
            let lin = linearizer_1d(g, &cycle.rotated(j), order)?;
            let prof = lin.profile(g);
            let sol = solve_level_near(&prof, t, prof.reference_radius(), cfg)?;
            let mf = m_function_raw(&prof, sol.rho, radii, cfg);
            Ok((sol, mf))
        })
        .collect::<Result<Vec<_>>>()?;
    let iterations = sols.iter().map(|s| s.0.iterations).sum();
    let scales: Vec<f64> = sols.iter().map(|s| s.0.rho).collect();
    let steps = (0..n)
        .map(|j| g.poly.eval_with_derivative(cycle.points[j]).1 * (scales[j] / scales[(j + 1) % n]))
        .collect();
    let unreliable = sols.iter().map(|s| s.1.unreliable.iter().filter(|u| **u).count()).collect();
    let m_values = sols.into_iter().map(|s| s.1.values).collect();
    Ok(CycleSteps { period: n, multiplier: cycle.multiplier, scales, steps, m_values, unreliable, iterations })
}

/// Cycle sample for the 1-D certificate: every repelling cycle of period
/// `<= n_max` plus the shadow cycles of the given periods.
pub fn sample_cycles(g: &Polynomial1D, n_max: usize, shadow_periods: &[usize]) -> Vec<Cycle1D> {
    let mut out = repelling_cycles(g, n_max);
    for c in shadow_cycles(g, shadow_periods) {
        if !out.iter().any(|o| o.is_rotation_of(&c, 1e-8)) {
            out.push(c);
        }
    }
    out
}

/// Quasi-expansion certificate of a polynomial over a cycle sample, with the
/// same conditions and constants as for Hénon maps.
pub fn certify_1d(g: &Polynomial1D, cycles: &[Cycle1D], params: &CertifyParams) -> Certificate {
    let radii = params.eval_radii();
    let results: Vec<Result<OrbitRecord>> = cycles
        .iter()
        .map(|c| {
            let st = cycle_steps(g, c, params.order, params.t, &radii, &params.mconfig)?;
            let points = st
                .steps
                .iter()
                .zip(st.m_values)
                .zip(st.unreliable)
                .map(|((s, m), u)| PointRecord { step: s.norm(), step_argument: s.arg(), m, unreliable: u, law_residual: None })
                .collect();
            Ok(OrbitRecord::new(c.period, c.multiplier.norm(), points))
        })
        .collect();
    let mut records = Vec::new();
    let mut exclusions = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => exclusions.push(Exclusion { period: cycles[i].period, index: i, reason: e.to_string() }),
        }
    }
    assemble(&poly_digest(&g.poly), g.degree(), params, records, exclusions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub point: C64,
    /// How the computed orbit ended.
    pub fate: CriticalFate,
    /// `min |c - z|` over the tail of the orbit (`None` when escaping).
    pub recurrence_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriticalFate {
    Escapes { step: usize },
    /// Converges to a cycle of the given period and multiplier.
    Cycle { period: usize, multiplier: C64 },
    /// No escape and no convergence within the budget.
    Wanders,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiHypConfig {
    /// Cycles up to this period are scanned for parabolic multipliers.
    pub period_bound: usize,
    pub orbit_length: usize,
    pub recurrence_threshold: f64,
    pub root_of_unity_order: usize,
    pub parabolic_band: f64,
}

impl Default for SemiHypConfig {
    fn default() -> Self {
        Self { period_bound: 8, orbit_length: 10_000, recurrence_threshold: 1e-3, root_of_unity_order: 20, parabolic_band: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiHypVerdict {
    pub parabolic_found: bool,
    pub parabolic_witness: Option<Cycle1D>,
    /// Indifferent cycles whose multiplier is not near a root of unity.
    pub irrational_indifferent: Vec<Cycle1D>,
    pub critical: Vec<CriticalRecord>,
    /// `(eta, A)` fitted so that `max_{B(x,r)} G >= eta r^A` on the samples.
    pub ball_growth: Option<(f64, f64)>,
    pub verdict: Answer,
    pub rationale: String,
}

/// Root of unity `exp(2 pi i p/q)` with `q <= order` within `band`, as `(p, q)`.
pub fn near_root_of_unity(lambda: C64, order: usize, band: f64) -> Option<(usize, usize)> {
    if (lambda.norm() - 1.0).abs() > band {
        return None;
    }
    for q in 1..=order {
        for p in 0..q {
            let w = C64::from_polar(1.0, TAU * p as f64 / q as f64);
            if (lambda - w).norm() <= band {
                return Some((p, q));
            }
        }
    }
    None
}

fn critical_fate(g: &Polynomial1D, c: C64, cfg: &SemiHypConfig) -> CriticalRecord {
    let r = g.escape_radius();
    let mut orbit = Vec::with_capacity(cfg.orbit_length + 1);
    let mut z = c;
    orbit.push(z);
    for step in 1..=cfg.orbit_length {
        z = g.eval(z);
        if !(z.norm() <= r) {
            return CriticalRecord { point: c, fate: CriticalFate::Escapes { step }, recurrence_distance: None };
        }
        orbit.push(z);
    }
    let tail = &orbit[orbit.len() / 2..];
    let recurrence = tail.iter().map(|w| (w - c).norm()).fold(f64::INFINITY, f64::min);
    let last = *orbit.last().unwrap();
    let dp = g.poly.derivative();
    let mut fate = CriticalFate::Wanders;
    for q in 1..=64.min(tail.len() - 1) {
        let prev = orbit[orbit.len() - 1 - q];
        if (last - prev).norm() <= 1e-10 * (1.0 + last.norm()) {
            let mut w = last;
            let mut m = c64(1.0, 0.0);
            for _ in 0..q {
                m *= dp.eval(w);
                w = g.eval(w);
            }
            fate = CriticalFate::Cycle { period: q, multiplier: m };
            break;
        }
    }
    CriticalRecord { point: c, fate, recurrence_distance: Some(recurrence) }
}

/// `(eta, A)` with `max_{|z - x| = r} G(z) >= eta r^A` at the sampled `x`, `r`.
fn fit_ball_growth(g: &Polynomial1D, centers: &[C64]) -> Option<(f64, f64)> {
    if centers.is_empty() {
        return None;
    }
    let radii = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let mut pts = Vec::new();
    for &r in &radii {
        let mut worst = f64::INFINITY;
        for &x in centers {
            let best = (0..64)
                .map(|i| g.green(x + C64::from_polar(r, TAU * i as f64 / 64.0), 1e-13, 400).value)
                .fold(0.0, f64::max);
            worst = worst.min(best);
        }
        if !(worst > 0.0) {
            return None;
        }
        pts.push((r.ln(), worst.ln()));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let eta = pts.iter().map(|p| (p.1 - a * p.0).exp()).fold(f64::INFINITY, f64::min);
    Some((eta, a))
}

/// Semi-hyperbolicity: no parabolic cycles and no recurrent critical points
/// in the Julia set.
pub fn semi_hyperbolic_verdict(g: &Polynomial1D, cfg: &SemiHypConfig) -> SemiHypVerdict {
    let cat = find_cycles(g, cfg.period_bound);
    let mut parabolic_witness = None;
    let mut irrational = Vec::new();
    for c in &cat.cycles {
        if (c.multiplier.norm() - 1.0).abs() <= cfg.parabolic_band {
            if near_root_of_unity(c.multiplier, cfg.root_of_unity_order, cfg.parabolic_band).is_some() {
                if parabolic_witness.is_none() {
                    parabolic_witness = Some(c.clone());
                }
            } else {
                irrational.push(c.clone());
            }
        }
    }
    let critical: Vec<CriticalRecord> = g.critical_points.iter().map(|&c| critical_fate(g, c, cfg)).collect();
    let mut recurrent = Vec::new();
    let mut unresolved = Vec::new();
    for rec in &critical {
        match &rec.fate {
            CriticalFate::Escapes { .. } => {}
            CriticalFate::Cycle { multiplier, .. } if multiplier.norm() < 1.0 - cfg.parabolic_band => {}
            _ => {
                if rec.recurrence_distance.is_some_and(|d| d <= cfg.recurrence_threshold) {
                    recurrent.push(rec.point);
                } else if matches!(rec.fate, CriticalFate::Wanders) && !irrational.is_empty() {
                    unresolved.push(rec.point);
                }
            }
        }
    }
    let j_points: Vec<C64> = cat.repelling().take(16).map(|c| c.points[0]).collect();
    let ball_growth = fit_ball_growth(g, &j_points);
    let (verdict, rationale) = if let Some(w) = &parabolic_witness {
        (Answer::No, format!("parabolic cycle of period {} with multiplier {:.3e}", w.period, w.multiplier))
    } else if !recurrent.is_empty() {
        (Answer::No, format!("{} critical point(s) recur within the threshold", recurrent.len()))
    } else if !irrational.is_empty() {
        (Answer::Unknown, "indifferent cycle with multiplier away from roots of unity".into())
    } else if !unresolved.is_empty() {
        (Answer::Unknown, "critical orbit neither escapes, converges, nor recurs".into())
    } else {
        (Answer::Yes, "no parabolic cycles; every critical point in J stays away from its limit set".into())
    };
    SemiHypVerdict {
        parabolic_found: parabolic_witness.is_some(),
        parabolic_witness,
        irrational_indifferent: irrational,
        critical,
        ball_growth,
        verdict,
        rationale,
    }
}
