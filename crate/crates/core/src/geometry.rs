//! Area, distortion and modulus evidence for local unstable varieties.
//!
//! `V(x, eps)` is the component containing `x` of `W^u(x) ∩ B(x, eps)`. In the
//! coordinate of a normalized parametrization it is `psi(D)` with `D` the
//! component of `psi^{-1}(B(x, eps))` containing 0, traced along rays under
//! the assumption that it is star-shaped about 0.

use crate::certify::{Certificate, Verdict};
use crate::error::{QxError, Result};
use crate::henon::{ComplexPoint, HenonMap};
use crate::manifold::{step_multiplier, MConfig, UnstableParametrization};
use crate::saddles::PeriodicOrbit;
use crate::scalar::{c64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

type Point = ComplexPoint<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Rays for boundary tracing (trapezoid rule in the angle).
    pub rays: usize,
    /// Gauss-Legendre nodes along each ray.
    pub nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { rays: 64, nodes: 16 }
    }
}

impl Quadrature {
    pub fn doubled(&self) -> Self {
        Self { rays: 2 * self.rays, nodes: 2 * self.nodes }
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs.push(0.5 * (1.0 - x));
        ws.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

fn dist(a: [C64; 2], b: &Point) -> f64 {
    ((a[0] - b.x).norm_sqr() + (a[1] - b.y).norm_sqr()).sqrt()
}

/// First crossing of `|f(r e^{i theta}) - base| = eps` on each ray, found by
/// marching then bisecting. Fails if a ray reaches `limit` first.
pub fn trace_component(
    f: &(impl Fn(C64) -> [C64; 2] + Sync),
    base: &Point,
    eps: f64,
    limit: f64,
    rays: usize,
) -> Result<Vec<f64>> {
    (0..rays)
        .into_par_iter()
        .map(|i| {
            let u = C64::from_polar(1.0, TAU * i as f64 / rays as f64);
            let h = limit / 512.0;
            let mut lo = 0.0;
            let mut hi = None;
            for k in 1..=512 {
                let r = h * k as f64;
                if dist(f(u * r), base) >= eps {
                    hi = Some(r);
                    break;
                }
                lo = r;
            }
            let mut hi = hi.ok_or_else(|| QxError::Capacity(format!("component reaches radius {limit:e} on ray {i}")))?;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if dist(f(u * mid), base) >= eps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect()
}

/// `int_D |df|^2` over the star-shaped domain with boundary radii `boundary`.
pub fn area_over(df: &(impl Fn(C64) -> [C64; 2] + Sync), boundary: &[f64], nodes: usize) -> f64 {
    let (xs, ws) = gauss_legendre(nodes);
    let m = boundary.len();
    let per_ray: Vec<f64> = boundary
        .par_iter()
        .enumerate()
        .map(|(i, &rho)| {
            let u = C64::from_polar(1.0, TAU * i as f64 / m as f64);
            xs.iter()
                .zip(&ws)
                .map(|(&x, &w)| {
                    let r = rho * x;
                    let v = df(u * r);
                    w * rho * r * (v[0].norm_sqr() + v[1].norm_sqr())
                })
                .sum()
        })
        .collect();
    TAU / m as f64 * per_ray.iter().sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalVariety {
    pub epsilon: f64,
    /// Boundary radius of `D` on each ray.
    pub boundary: Vec<f64>,
    pub area: f64,
    pub quadrature: Quadrature,
    /// `min` and `max` of the boundary radii: `{|z| < in} ⊂ D ⊂ {|z| < out}`.
    pub inradius: f64,
    pub outradius: f64,
}

impl LocalVariety {
    /// `a` in the sandwich `{|z| < a r} ⊂ D ⊂ {|z| < r}`, `r = outradius`.
    pub fn sandwich_ratio(&self) -> f64 {
        self.inradius / self.outradius
    }
}

/// Area of `V(x, eps)` for an explicit embedding `f` with derivative `df`,
/// traced inside `|z| < limit`.
pub fn local_variety(
    f: &(impl Fn(C64) -> [C64; 2] + Sync),
    df: &(impl Fn(C64) -> [C64; 2] + Sync),
    base: &Point,
    eps: f64,
    limit: f64,
    quad: Quadrature,
) -> Result<LocalVariety> {
    let boundary = trace_component(f, base, eps, limit, quad.rays)?;
    let area = area_over(df, &boundary, quad.nodes);
    let inradius = boundary.iter().cloned().fold(f64::INFINITY, f64::min);
    let outradius = boundary.iter().cloned().fold(0.0, f64::max);
    Ok(LocalVariety { epsilon: eps, boundary, area, quadrature: quad, inradius, outradius })
}

/// Area of `V(x, eps)` through a normalized parametrization, which must
/// contain the component inside its trusted disk.
pub fn area_of_local_variety(param: &UnstableParametrization, eps: f64, quad: Quadrature) -> Result<LocalVariety> {
    let f = |z: C64| param.eval(z).as_array();
    let df = |z: C64| param.derivative(z);
    local_variety(&f, &df, &param.base, eps, param.valid_radius / param.scale, quad)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub epsilon: f64,
    pub quadrature: Quadrature,
    pub areas: Vec<f64>,
    pub max_area: f64,
    /// Max area with doubled rays and nodes.
    pub refined_max_area: f64,
    pub relative_change: f64,
    /// `(inradius, outradius)` per saddle point.
    pub sandwich: Vec<(f64, f64)>,
}

pub fn area_report(params: &[UnstableParametrization], eps: f64, quad: Quadrature) -> Result<AreaReport> {
    let coarse: Vec<LocalVariety> = params.iter().map(|p| area_of_local_variety(p, eps, quad)).collect::<Result<_>>()?;
    let fine: Vec<LocalVariety> =
        params.iter().map(|p| area_of_local_variety(p, eps, quad.doubled())).collect::<Result<_>>()?;
    let max_area = coarse.iter().map(|v| v.area).fold(0.0, f64::max);
    let refined_max_area = fine.iter().map(|v| v.area).fold(0.0, f64::max);
    Ok(AreaReport {
        epsilon: eps,
        quadrature: quad,
        areas: coarse.iter().map(|v| v.area).collect(),
        max_area,
        refined_max_area,
        relative_change: (refined_max_area - max_area).abs() / max_area,
        sandwich: coarse.iter().map(|v| (v.inradius, v.outradius)).collect(),
    })
}

/// Normalized parametrizations along a cycle with their complex per-step
/// multipliers `lambda_{x_j}`.
#[derive(Clone, Debug)]
pub struct NormalizedCycle {
    pub params: Vec<UnstableParametrization>,
    pub steps: Vec<C64>,
}

pub fn normalized_cycle_with_steps(
    map: &HenonMap,
    orbit: &PeriodicOrbit,
    order: usize,
    t: f64,
    cfg: &MConfig,
) -> Result<NormalizedCycle> {
    let params = crate::certify::normalized_cycle(map, orbit, order, t, cfg)?;
    let n = params.len();
    let steps = (0..n)
        .into_par_iter()
        .map(|j| step_multiplier(map, &params[j], &params[(j + 1) % n], cfg).map(|s| s.value()))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedCycle { params, steps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub n: usize,
    pub max_diameter: f64,
    pub max_area: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub epsilon: f64,
    pub rows: Vec<ContractionRow>,
    /// `exp` of the least-squares slope of `log diam` against `n`.
    pub theta_fit: f64,
    /// `max_{n >= 1} diam_n^{1/n}`, so `diam_n <= theta^n` on every row.
    pub theta: f64,
    pub residuals: Vec<f64>,
}

/// Diameters and areas of `f^{-n} V(x, eps)`. Since
/// `f^n psi_{x_{-n}}(z) = psi_x(Lambda z)` with `Lambda` the product of the
/// `n` preceding step multipliers, `f^{-n} V(x, eps) = psi_{x_{-n}}(D / Lambda)`.
pub fn backward_contraction(
    cert: &Certificate,
    cycles: &[NormalizedCycle],
    eps: f64,
    n_max: usize,
    quad: Quadrature,
) -> Result<ContractionReport> {
    if cert.verdict != Verdict::Pass {
        return Err(QxError::Precondition("backward contraction needs a PASS certificate".into()));
    }
    let mut domains = Vec::new();
    for c in cycles {
        for p in &c.params {
            domains.push(trace_component(&|z: C64| p.eval(z).as_array(), &p.base, eps, p.valid_radius / p.scale, quad.rays)?);
        }
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut max_diameter = 0.0f64;
        let mut max_area = 0.0f64;
        let mut k = 0;
        for c in cycles {
            let len = c.params.len();
            for j in 0..len {
                let dom = &domains[k];
                k += 1;
                let mut lam = c64(1.0, 0.0);
                for i in 1..=n {
                    lam *= c.steps[(j + len * n - i) % len];
                }
                let q = &c.params[(j + len * n - n % len) % len];
                let inv = c64(1.0, 0.0) / lam;
                let m = dom.len();
                let bd: Vec<Point> =
                    (0..m).map(|i| q.eval(inv * C64::from_polar(dom[i], TAU * i as f64 / m as f64))).collect();
                for a in 0..m {
                    for b in a + 1..m {
                        max_diameter = max_diameter.max(bd[a].dist(&bd[b]));
                    }
                }
                let df = |u: C64| {
                    let v = q.derivative(inv * u);
                    [v[0] * inv, v[1] * inv]
                };
                max_area = max_area.max(area_over(&df, dom, quad.nodes));
            }
        }
        rows.push(ContractionRow { n, max_diameter, max_area });
    }
    let ns: Vec<f64> = rows.iter().filter(|r| r.n >= 1).map(|r| r.n as f64).collect();
    let ls: Vec<f64> = rows.iter().filter(|r| r.n >= 1).map(|r| r.max_diameter.ln()).collect();
    let (slope, icept) = linear_fit(&ns, &ls);
    let theta = rows.iter().filter(|r| r.n >= 1).map(|r| r.max_diameter.powf(1.0 / r.n as f64)).fold(0.0, f64::max);
    let residuals = ns.iter().zip(&ls).map(|(n, l)| l - (icept + slope * n)).collect();
    Ok(ContractionReport { epsilon: eps, rows, theta_fit: slope.exp(), theta, residuals })
}

/// `(slope, intercept)` of the least-squares line.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// The two boundary curves of an annulus `D - C` as radii on equally spaced
/// rays (star-shaped about 0), or concentric circles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Annulus {
    Concentric { inner: f64, outer: f64 },
    Polar { inner: Vec<f64>, outer: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusDatum {
    pub annulus: Annulus,
    /// Area of the image `phi(D)`, with multiplicity.
    pub area: f64,
    pub r0: f64,
    pub r1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    /// `Mod(D - C)`, normalized so that `{R0 < |z| < R1}` has modulus `log(R1/R0)`.
    pub lhs: f64,
    /// `log(R1/R0) / ((A / R1^2)(2 + 1/log(R1/R0)))`.
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub method: String,
}

impl ModulusDatum {
    /// Datum of a proper holomorphic map `phi: D -> B_{R1}` with `phi(0) = 0`,
    /// traced on `rays` rays: `C` and `D` are the components of
    /// `phi^{-1}(B_{R0})` and `phi^{-1}(B_{R1})` containing 0.
    pub fn from_map(
        phi: &(impl Fn(C64) -> [C64; 2] + Sync),
        dphi: &(impl Fn(C64) -> [C64; 2] + Sync),
        r0: f64,
        r1: f64,
        limit: f64,
        quad: Quadrature,
    ) -> Result<Self> {
        let o = Point::new(c64(0.0, 0.0), c64(0.0, 0.0));
        let inner = trace_component(phi, &o, r0, limit, quad.rays)?;
        let outer = trace_component(phi, &o, r1, limit, quad.rays)?;
        let area = area_over(dphi, &outer, quad.nodes);
        Ok(Self { annulus: Annulus::Polar { inner, outer }, area, r0, r1 })
    }
}

/// Modulus of an annulus. Concentric circles are exact; otherwise the
/// Dirichlet energy `E` of the harmonic measure is minimized with P1 finite
/// elements on a log-polar grid between the curves and `Mod = 2 pi / E`.
pub fn annulus_modulus(a: &Annulus) -> Result<(f64, String)> {
    match a {
        Annulus::Concentric { inner, outer } => {
            if !(0.0 < *inner && inner < outer) {
                return Err(QxError::Precondition("not an annulus: need 0 < inner < outer".into()));
            }
            Ok(((outer / inner).ln(), "concentric".into()))
        }
        Annulus::Polar { inner, outer } => {
            if inner.len() != outer.len() || inner.len() < 8 || inner.iter().zip(outer).any(|(i, o)| !(0.0 < *i && i < o)) {
                return Err(QxError::Precondition("not an annulus: inner curve must lie strictly inside outer".into()));
            }
            let e = dirichlet_energy(inner, outer, 48);
            Ok((TAU / e, format!("p1 finite elements, {} x 48 log-polar grid", inner.len())))
        }
    }
}

fn dirichlet_energy(inner: &[f64], outer: &[f64], layers: usize) -> f64 {
    let m = inner.len();
    let k = layers;
    let node = |i: usize, l: usize| -> [f64; 2] {
        let th = TAU * (i % m) as f64 / m as f64;
        let tau = l as f64 / k as f64;
        let r = inner[i % m].powf(1.0 - tau) * outer[i % m].powf(tau);
        [r * th.cos(), r * th.sin()]
    };
    let id = |i: usize, l: usize| (i % m) * (k + 1) + l;
    let nn = m * (k + 1);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nn];
    let mut add = |a: usize, b: usize, v: f64| {
        if let Some(e) = rows[a].iter_mut().find(|e| e.0 == b) {
            e.1 += v;
        } else {
            rows[a].push((b, v));
        }
    };
    for i in 0..m {
        for l in 0..k {
            let quad = [(i, l), (i + 1, l), (i + 1, l + 1), (i, l + 1)];
            for tri in [[0, 1, 2], [0, 2, 3]] {
                let ids: Vec<usize> = tri.iter().map(|&t| id(quad[t].0, quad[t].1)).collect();
                let ps: Vec<[f64; 2]> = tri.iter().map(|&t| node(quad[t].0, quad[t].1)).collect();
                let area2 = (ps[1][0] - ps[0][0]) * (ps[2][1] - ps[0][1]) - (ps[2][0] - ps[0][0]) * (ps[1][1] - ps[0][1]);
                let grads: Vec<[f64; 2]> = (0..3)
                    .map(|a| {
                        let (p, q) = (ps[(a + 1) % 3], ps[(a + 2) % 3]);
                        [(p[1] - q[1]) / area2, (q[0] - p[0]) / area2]
                    })
                    .collect();
                let area = 0.5 * area2.abs();
                for a in 0..3 {
                    for b in 0..3 {
                        add(ids[a], ids[b], area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]));
                    }
                }
            }
        }
    }
    // u = 0 on the inner curve, 1 on the outer; conjugate gradients on the rest
    let fixed = |n: usize| {
        let l = n % (k + 1);
        if l == 0 {
            Some(0.0)
        } else if l == k {
            Some(1.0)
        } else {
            None
        }
    };
    let mut u: Vec<f64> = (0..nn).map(|n| fixed(n).unwrap_or((n % (k + 1)) as f64 / k as f64)).collect();
    let apply = |u: &[f64], out: &mut [f64]| {
        for (n, row) in rows.iter().enumerate() {
            out[n] = if fixed(n).is_some() { 0.0 } else { row.iter().map(|(j, v)| if fixed(*j).is_some() { 0.0 } else { v * u[*j] }).sum() };
        }
    };
    let mut b = vec![0.0; nn];
    for (n, row) in rows.iter().enumerate() {
        if fixed(n).is_none() {
            b[n] = -row.iter().filter_map(|(j, v)| fixed(*j).map(|f| v * f)).sum::<f64>();
        }
    }
    let mut x: Vec<f64> = (0..nn).map(|n| if fixed(n).is_some() { 0.0 } else { u[n] }).collect();
    let mut ax = vec![0.0; nn];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = (0..nn).map(|n| b[n] - ax[n]).collect();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let tol = 1e-26 * b.iter().map(|v| v * v).sum::<f64>().max(1e-300);
    let mut ap = vec![0.0; nn];
    for _ in 0..20 * nn {
        if rr <= tol {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for n in 0..nn {
            x[n] += alpha * p[n];
            r[n] -= alpha * ap[n];
        }
        let rr2: f64 = r.iter().map(|v| v * v).sum();
        for n in 0..nn {
            p[n] = r[n] + rr2 / rr * p[n];
        }
        rr = rr2;
    }
    for n in 0..nn {
        if fixed(n).is_none() {
            u[n] = x[n];
        }
    }
    rows.iter().enumerate().map(|(a, row)| row.iter().map(|(b, v)| u[a] * v * u[*b]).sum::<f64>()).sum()
}

pub fn modulus_bound_check(datum: &ModulusDatum) -> Result<ModulusReport> {
    if !(0.0 < datum.r0 && datum.r0 < datum.r1) {
        return Err(QxError::Precondition("need 0 < R0 < R1".into()));
    }
    let (lhs, method) = annulus_modulus(&datum.annulus)?;
    let l = (datum.r1 / datum.r0).ln();
    let rhs = l / (datum.area / (datum.r1 * datum.r1) * (2.0 + 1.0 / l));
    Ok(ModulusReport { lhs, rhs, margin: lhs - rhs, holds: lhs >= rhs, method })
}

/// Evidence for `max_{B(x,r)} G+ >= C r^m`: for each radius, the minimum over
/// the points of the maximum of `G+(x + r v)` over random unit directions `v`,
/// fitted to a power law. Returns `(radii, values, fit)`.
pub fn green_ball_growth(
    map: &HenonMap,
    points: &[Point],
    radii: &[f64],
    directions: usize,
    seed: u64,
) -> (Vec<f64>, Option<(f64, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<[C64; 2]> = (0..directions)
        .map(|_| {
            let v: [C64; 2] = [c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5), c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)];
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / n, v[1] / n]
        })
        .collect();
    let values: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            points
                .iter()
                .map(|x| {
                    dirs.iter()
                        .filter_map(|v| map.green_plus(&Point::new(x.x + v[0] * r, x.y + v[1] * r), 1e-13, 400).usable())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let fit = crate::certify::power_law_fit(radii, &values);
    (values, fit)
}
