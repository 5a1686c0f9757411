//! Order and folding diagnostics on Taylor jets of parametrized curves in C^2.

use crate::error::{QxError, Result};
use crate::henon::ComplexPoint;
use crate::manifold::UnstableParametrization;
use crate::scalar::{c64, C64};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

type Point = ComplexPoint<f64>;

/// Default relative tolerance for vanishing coefficients.
pub const ORDER_TOL: f64 = 1e-7;

/// `zeta -> base + sum_{k>=1} a_k zeta^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorJet {
    pub base: Point,
    /// `a_1, a_2, ...`.
    pub coeffs: Vec<[C64; 2]>,
    /// Reference size for relative tolerances.
    pub scale: f64,
}

fn cnorm(v: [C64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

impl TaylorJet {
    /// Jet with the largest coefficient norm as scale reference.
    pub fn new(base: Point, coeffs: Vec<[C64; 2]>) -> Self {
        let scale = coeffs.iter().map(|c| cnorm(*c)).fold(0.0, f64::max);
        Self { base, coeffs, scale: if scale > 0.0 { scale } else { 1.0 } }
    }

    /// Jet at 0 from coefficient pairs.
    pub fn at_origin(coeffs: Vec<[C64; 2]>) -> Self {
        Self::new(Point::new(c64(0.0, 0.0), c64(0.0, 0.0)), coeffs)
    }

    /// Jet of a normalized parametrization.
    pub fn from_param(param: &UnstableParametrization) -> Self {
        Self::new(param.base, param.normalized_coeffs())
    }

    pub fn eval(&self, z: C64) -> Point {
        let (mut x, mut y) = (c64(0.0, 0.0), c64(0.0, 0.0));
        for c in self.coeffs.iter().rev() {
            x = (x + c[0]) * z;
            y = (y + c[1]) * z;
        }
        Point::new(self.base.x + x, self.base.y + y)
    }

    /// `zeta -> e^{i theta} zeta` reparametrization.
    pub fn rotated(&self, theta: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let u = C64::from_polar(1.0, theta * (k + 1) as f64);
                [c[0] * u, c[1] * u]
            })
            .collect();
        Self { coeffs, ..self.clone() }
    }

    fn component(&self, i: usize) -> Series {
        let mut c = vec![c64(0.0, 0.0)];
        c.extend(self.coeffs.iter().map(|v| v[i]));
        Series::from_coeffs(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Order(usize),
    /// Every coefficient below tolerance.
    Degenerate,
}

/// Least `k` with `|a_k| > tol * scale`.
pub fn order_of(jet: &TaylorJet, tol: f64) -> Order {
    jet.coeffs
        .iter()
        .position(|c| cnorm(*c) > tol * jet.scale)
        .map_or(Order::Degenerate, |k| Order::Order(k + 1))
}

/// Unit direction of the first non-vanishing coefficient (the tangent cone).
pub fn tangent_direction(jet: &TaylorJet, tol: f64) -> Option<[C64; 2]> {
    match order_of(jet, tol) {
        Order::Order(k) => {
            let a = jet.coeffs[k - 1];
            let n = cnorm(a);
            Some([a[0] / n, a[1] / n])
        }
        Order::Degenerate => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub winding: i64,
    pub radius: f64,
    /// `min |pi(psi(zeta)) - pi(base)|` on the circle.
    pub min_modulus: f64,
    pub samples: usize,
}

/// Winding number of `zeta -> <psi(zeta) - base, direction>` around 0 over
/// `|zeta| = r`, by accumulated argument. Samples double (up to `2^16`)
/// until no step jumps by more than `pi/2`. The winding is at most the jet
/// length, so sampling starts at no fewer than 8 points per coefficient.
pub fn projection_degree(jet: &TaylorJet, direction: [C64; 2], r: f64, tol: f64) -> Result<DegreeReport> {
    let proj = |z: C64| {
        let p = jet.eval(z);
        direction[0].conj() * (p.x - jet.base.x) + direction[1].conj() * (p.y - jet.base.y)
    };
    let mut samples = (8 * jet.coeffs.len()).next_power_of_two().max(1024);
    loop {
        let vals: Vec<C64> = (0..samples).map(|i| proj(C64::from_polar(r, TAU * i as f64 / samples as f64))).collect();
        let min_modulus = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if min_modulus <= 10.0 * tol * jet.scale {
            return Err(QxError::Capacity(format!("projected boundary comes within {min_modulus:e} of the center at r = {r}")));
        }
        let mut total = 0.0;
        let mut max_jump = 0.0f64;
        for i in 0..samples {
            let step = (vals[(i + 1) % samples] / vals[i]).arg();
            max_jump = max_jump.max(step.abs());
            total += step;
        }
        if max_jump <= FRAC_PI_2 {
            return Ok(DegreeReport { winding: (total / TAU).round() as i64, radius: r, min_modulus, samples });
        }
        if samples >= 1 << 16 {
            return Err(QxError::Capacity(format!("argument jumps persist at {samples} samples")));
        }
        samples *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub k: usize,
    /// `max over jets of |a_k|`.
    pub gamma: f64,
    /// `||v||^{#,k} = |v| / gamma_k`; `None` when `gamma_k = 0`.
    pub metric_factor: Option<f64>,
    /// `gamma_k = 0`: no jet of the sample has order `<= k`.
    pub stratum_mismatch: bool,
}

pub fn gamma_k(jets: &[TaylorJet], k: usize) -> Result<GammaReport> {
    let first = jets.first().ok_or_else(|| QxError::Precondition("no jets".into()))?;
    if k == 0 {
        return Err(QxError::Precondition("k must be at least 1".into()));
    }
    if jets.iter().any(|j| j.base.dist_sup(&first.base) > 1e-9) {
        return Err(QxError::Precondition("jets do not share a base point".into()));
    }
    let gamma = jets.iter().map(|j| j.coeffs.get(k - 1).map_or(0.0, |c| cnorm(*c))).fold(0.0, f64::max);
    Ok(GammaReport { k, gamma, metric_factor: (gamma > 0.0).then(|| 1.0 / gamma), stratum_mismatch: gamma == 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Contact {
    Order(usize),
    /// The graphs agree to the full truncation order.
    GermCoincidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyReport {
    pub contact: Contact,
    /// Index of the first coefficient where the graphs differ.
    pub first_differing: Option<usize>,
}

/// The jet as a graph `w = h(x)` over the line spanned by `e`, with `w` the
/// coordinate along `e_perp`.
fn graph_over(jet: &TaylorJet, e: [C64; 2]) -> Result<Series> {
    let perp = [-e[1].conj(), e[0].conj()];
    let xs = jet.component(0);
    let ys = jet.component(1);
    let along = xs.scale(e[0].conj()).add(&ys.scale(e[1].conj()));
    let across = xs.scale(perp[0].conj()).add(&ys.scale(perp[1].conj()));
    let inv = along
        .reversion()
        .ok_or_else(|| QxError::Precondition("jet is not a graph over its tangent line (order > 1)".into()))?;
    Ok(across.compose(&inv, along.order()))
}

/// Contact order of two jets at a common base point: 1 when the tangent
/// lines differ, otherwise the valuation of the difference of the graphs
/// over the common tangent line.
pub fn tangency_order(ju: &TaylorJet, js: &TaylorJet, tol: f64) -> Result<TangencyReport> {
    if ju.base.dist_sup(&js.base) > 1e-9 {
        return Err(QxError::Precondition("jets are based at different points".into()));
    }
    let eu = tangent_direction(ju, tol).ok_or_else(|| QxError::Precondition("degenerate jet".into()))?;
    let es = tangent_direction(js, tol).ok_or_else(|| QxError::Precondition("degenerate jet".into()))?;
    let cross = (eu[0] * es[1] - eu[1] * es[0]).norm();
    if cross > tol {
        return Ok(TangencyReport { contact: Contact::Order(1), first_differing: Some(1) });
    }
    let hu = graph_over(ju, eu)?;
    let hs = graph_over(js, eu)?;
    let diff = hu.add(&hs.scale(c64(-1.0, 0.0)));
    let order = hu.order().min(hs.order());
    let scale = ju.scale.max(js.scale);
    match diff.coeffs.iter().take(order + 1).position(|c| c.norm() > tol * scale) {
        Some(k) => Ok(TangencyReport { contact: Contact::Order(k), first_differing: Some(k) }),
        None => Ok(TangencyReport { contact: Contact::GermCoincidence, first_differing: None }),
    }
}
