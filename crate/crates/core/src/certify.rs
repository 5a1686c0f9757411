//! Quasi-expansion certificates over a finite sample of saddle cycles.
//!
//! Every cycle point `x` contributes its per-step multiplier `|lambda_x|`
//! and its normalized m-function on a radius grid. The certificate takes
//! `kappa = min |lambda_x|`, `beta = log d / log kappa` and `C = t kappa^beta`
//! (so `m_x(kappa^p) <= d^p t` becomes `m_x(r) <= C r^beta` for `r >= 1`),
//! and checks the other conditions against these constants.

use crate::error::Result;
use crate::henon::HenonMap;
use crate::manifold::{linearize_cycle, m_function, normalize, step_multiplier, MConfig, UnstableParametrization};
use crate::oned::SemiHypVerdict;
use crate::saddles::{PeriodicOrbit, SaddleCatalog};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative slack for comparisons that hold with equality in exact arithmetic.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    InsufficientSample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    /// Normalization level: `m_x(1) = t`.
    pub t: f64,
    /// PASS requires `kappa >= 1 + margin`.
    pub margin: f64,
    /// Radius grid for the m-profile.
    pub radii: Vec<f64>,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    /// Truncation order of the parametrizations.
    pub order: usize,
    /// Radii for the transformation-law residual (empty to skip).
    pub law_radii: Vec<f64>,
    pub mconfig: MConfig,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self {
            t: 1.0,
            margin: 0.05,
            radii: (1..=10).map(|i| i as f64 / 10.0).chain([1.25, 1.5, 1.75, 2.0]).collect(),
            r0: 2.0,
            r1: 0.5,
            r2: 2.0,
            order: 40,
            law_radii: (2..=10).map(|i| i as f64 / 10.0).collect(),
            mconfig: MConfig::default(),
        }
    }
}

impl CertifyParams {
    /// The grid actually evaluated: `radii` plus `1 + margin`, `r0`, `r1`, `r2`.
    pub fn eval_radii(&self) -> Vec<f64> {
        let mut r = self.radii.clone();
        r.extend([1.0, 1.0 + self.margin, self.r0, self.r1, self.r2]);
        r.retain(|x| *x > 0.0 && x.is_finite());
        r.sort_by(f64::total_cmp);
        r.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    /// `|lambda_x|`.
    pub step: f64,
    pub step_argument: f64,
    /// `m_x(r)` on the certificate's radius grid.
    pub m: Vec<f64>,
    /// Grid radii where a circle sample was inconclusive.
    pub unreliable: usize,
    /// `max |m_{fx}(|lambda_x| r) - d m_x(r)|` over the law radii.
    pub law_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub period: usize,
    /// `|lambda|` of the cycle (unstable eigenvalue, or the 1-D multiplier).
    pub multiplier: f64,
    /// `(1/n) log |lambda|`.
    pub exponent: f64,
    /// `|prod |lambda_x| - |lambda|| / |lambda|`.
    pub product_error: f64,
    pub points: Vec<PointRecord>,
}

impl OrbitRecord {
    pub fn new(period: usize, multiplier: f64, points: Vec<PointRecord>) -> Self {
        let prod: f64 = points.iter().map(|p| p.step.ln()).sum::<f64>().exp();
        Self {
            period,
            multiplier,
            exponent: multiplier.ln() / period as f64,
            product_error: (prod - multiplier).abs() / multiplier,
            points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub period: usize,
    /// Position of the cycle in the input catalog.
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub c1: ConditionReport,
    pub c2: ConditionReport,
    pub c3: ConditionReport,
    pub c4: ConditionReport,
    pub c5: ConditionReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub map_digest: String,
    pub degree: usize,
    pub t: f64,
    pub margin: f64,
    pub radii: Vec<f64>,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    /// Number of cycle points in the sample.
    pub sample_size: usize,
    pub orbit_count: usize,
    pub exclusions: Vec<Exclusion>,
    pub kappa: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// `M(r) = max_x m_x(r)` on the grid.
    pub m_profile: Vec<f64>,
    /// `max_x m_x(r2) / m_x(r1)`.
    pub ratio_bound: Option<f64>,
    pub conditions: Conditions,
    pub verdict: Verdict,
    pub caveats: Vec<String>,
    pub records: Vec<OrbitRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub semi_hyperbolicity: Option<SemiHypVerdict>,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn radius_index(&self, r: f64) -> Option<usize> {
        self.radii.iter().position(|x| (x - r).abs() <= 1e-14 * r.abs())
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize, &PointRecord)> {
        self.records.iter().enumerate().flat_map(|(i, o)| o.points.iter().enumerate().map(move |(j, p)| (i, j, p)))
    }

    /// Worst per-orbit product error.
    pub fn max_product_error(&self) -> f64 {
        self.records.iter().map(|o| o.product_error).fold(0.0, f64::max)
    }

    /// Worst transformation-law residual, when recorded.
    pub fn max_law_residual(&self) -> Option<f64> {
        self.points().filter_map(|(_, _, p)| p.law_residual).reduce(f64::max)
    }
}

fn cond(pass: bool, evidence: String) -> ConditionReport {
    ConditionReport { verdict: if pass { Verdict::Pass } else { Verdict::Fail }, evidence }
}

fn insufficient() -> ConditionReport {
    ConditionReport { verdict: Verdict::InsufficientSample, evidence: "empty sample".into() }
}

/// Upper envelope `C max(r, 1)^beta`; for `r < 1` it is `m_x(r) <= m_x(1) = t <= C`.
fn upper(c: f64, beta: f64, r: f64) -> f64 {
    c * r.max(1.0).powf(beta)
}

/// Combine per-orbit records into a certificate. The result depends only on
/// the multiset of records and exclusions, which are put in a canonical order.
pub fn assemble(
    map_digest: &str,
    degree: usize,
    params: &CertifyParams,
    mut records: Vec<OrbitRecord>,
    mut exclusions: Vec<Exclusion>,
) -> Certificate {
    records.sort_by(|a, b| {
        (a.period, a.multiplier.to_bits(), a.points.first().map(|p| p.step.to_bits()))
            .cmp(&(b.period, b.multiplier.to_bits(), b.points.first().map(|p| p.step.to_bits())))
    });
    exclusions.sort_by(|a, b| (a.period, a.index).cmp(&(b.period, b.index)));
    let radii = params.eval_radii();
    let d = degree as f64;
    let t = params.t;
    let pts: Vec<&PointRecord> = records.iter().flat_map(|o| o.points.iter()).collect();
    let mut m_profile = vec![0.0f64; radii.len()];
    for p in &pts {
        for (m, v) in m_profile.iter_mut().zip(&p.m) {
            *m = m.max(*v);
        }
    }
    let idx = |r: f64| radii.iter().position(|x| (x - r).abs() <= 1e-14 * r.abs()).unwrap();
    let (i0, i1, i2, im) = (idx(params.r0), idx(params.r1), idx(params.r2), idx(1.0 + params.margin));
    let mut caveats = vec!["finite-sample".to_string()];
    let unreliable: usize = pts.iter().map(|p| p.unreliable).sum();
    if unreliable > 0 {
        caveats.push(format!("{unreliable} grid evaluations had inconclusive Green samples"));
    }
    if !exclusions.is_empty() {
        caveats.push(format!("{} cycles excluded", exclusions.len()));
    }
    if pts.is_empty() {
        return Certificate {
            map_digest: map_digest.to_string(),
            degree,
            t,
            margin: params.margin,
            radii,
            r0: params.r0,
            r1: params.r1,
            r2: params.r2,
            sample_size: 0,
            orbit_count: 0,
            exclusions,
            kappa: None,
            beta: None,
            c: None,
            m_profile: Vec::new(),
            ratio_bound: None,
            conditions: Conditions {
                c1: insufficient(),
                c2: insufficient(),
                c3: insufficient(),
                c4: insufficient(),
                c5: insufficient(),
            },
            verdict: Verdict::InsufficientSample,
            caveats,
            records,
            semi_hyperbolicity: None,
        };
    }
    let kappa = pts.iter().map(|p| p.step).fold(f64::INFINITY, f64::min);
    let (beta, c) = if kappa > 1.0 {
        let beta = d.ln() / kappa.ln();
        (Some(beta), Some(t * kappa.powf(beta)))
    } else {
        (None, None)
    };
    let ratio = pts.iter().map(|p| p.m[i2] / p.m[i1]).fold(0.0, f64::max);
    let qe = kappa >= 1.0 + params.margin;

    let c4 = cond(qe, format!("kappa = {kappa:.12} over {} points; required >= {}", pts.len(), 1.0 + params.margin));
    // m_x(|lambda_x|) = d t, so M(1 + margin) < d t forces every |lambda_x| > 1 + margin
    let c2 = cond(
        m_profile[i0].is_finite() && m_profile[im] < d * t,
        format!(
            "M({}) = {:.6e}; M({}) = {:.6e} against d t = {}",
            params.r0,
            m_profile[i0],
            1.0 + params.margin,
            m_profile[im],
            d * t
        ),
    );
    let (c1, c3, c5) = match (beta, c) {
        (Some(beta), Some(cc)) if qe => {
            let prof_ok = radii.iter().zip(&m_profile).all(|(&r, &m)| m <= upper(cc, beta, r) * (1.0 + SLACK));
            let mut viol = 0;
            let mut checked = 0;
            for p in &pts {
                for (&r, &m) in radii.iter().zip(&p.m) {
                    if r >= 1.0 {
                        checked += 1;
                        if m > cc * r.powf(beta) * (1.0 + SLACK) {
                            viol += 1;
                        }
                    }
                }
            }
            let k = d * d * (params.r2 / params.r1).powf(beta);
            (
                cond(prof_ok, format!("M(r) <= C max(r,1)^beta on all {} grid radii: {prof_ok}", radii.len())),
                cond(ratio <= k * (1.0 + SLACK), format!("max m(r2)/m(r1) = {ratio:.6e}; bound d^2 (r2/r1)^beta = {k:.6e}")),
                cond(viol == 0, format!("{viol} violations of m(r) <= C r^beta among {checked} checks, C = {cc:.12}, beta = {beta:.12}")),
            )
        }
        _ => {
            let why = format!("kappa = {kappa:.6} below 1 + margin; no uniform constants");
            (cond(false, why.clone()), cond(false, format!("max m(r2)/m(r1) = {ratio:.6e}; {why}")), cond(false, why))
        }
    };
    let orbit_count = records.len();
    Certificate {
        map_digest: map_digest.to_string(),
        degree,
        t,
        margin: params.margin,
        radii,
        r0: params.r0,
        r1: params.r1,
        r2: params.r2,
        sample_size: pts.len(),
        orbit_count,
        exclusions,
        kappa: Some(kappa),
        beta,
        c,
        m_profile,
        ratio_bound: Some(ratio),
        conditions: Conditions { c1, c2, c3, c4, c5 },
        verdict: if qe { Verdict::Pass } else { Verdict::Fail },
        caveats,
        records,
        semi_hyperbolicity: None,
    }
}

/// Normalized parametrizations at every point of a saddle cycle.
pub fn normalized_cycle(
    map: &HenonMap,
    orbit: &PeriodicOrbit,
    order: usize,
    t: f64,
    cfg: &MConfig,
) -> Result<Vec<UnstableParametrization>> {
    linearize_cycle(map, orbit, order)?
        .par_iter()
        .map(|p| normalize(p, map, t, cfg).map(|x| x.0))
        .collect()
}

/// Per-point data of one saddle cycle of a Hénon map.
pub fn orbit_record(map: &HenonMap, orbit: &PeriodicOrbit, params: &CertifyParams) -> Result<OrbitRecord> {
    let cfg = &params.mconfig;
    let normed = normalized_cycle(map, orbit, params.order, params.t, cfg)?;
    let radii = params.eval_radii();
    let n = orbit.period;
    let d = map.degree() as f64;
    let points = (0..n)
        .into_par_iter()
        .map(|j| {
            let px = &normed[j];
            let pfx = &normed[(j + 1) % n];
            let sm = step_multiplier(map, px, pfx, cfg)?;
            let mf = m_function(px, map, &radii, cfg);
            let law_residual = if params.law_radii.is_empty() {
                None
            } else {
                let mx = m_function(px, map, &params.law_radii, cfg);
                let scaled: Vec<f64> = params.law_radii.iter().map(|r| r * sm.modulus).collect();
                let mfx = m_function(pfx, map, &scaled, cfg);
                Some(mx.values.iter().zip(&mfx.values).map(|(a, b)| (d * a - b).abs()).fold(0.0, f64::max))
            };
            Ok(PointRecord {
                step: sm.modulus,
                step_argument: sm.argument,
                unreliable: mf.unreliable.iter().filter(|u| **u).count(),
                m: mf.values,
                law_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitRecord::new(n, orbit.eig_unstable.norm(), points))
}

/// Evaluate the equivalent conditions for quasi-expansion over the saddles
/// of a catalog. Cycles whose parametrization or level solves fail are
/// listed as exclusions.
pub fn certify_theorem12(map: &HenonMap, catalog: &SaddleCatalog, params: &CertifyParams) -> Certificate {
    let results: Vec<(usize, &PeriodicOrbit, Result<OrbitRecord>)> = catalog
        .orbits
        .par_iter()
        .enumerate()
        .filter(|(_, o)| o.is_saddle())
        .map(|(i, o)| (i, o, orbit_record(map, o, params)))
        .collect();
    let mut records = Vec::new();
    let mut exclusions = Vec::new();
    for (i, o, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => exclusions.push(Exclusion { period: o.period, index: i, reason: e.to_string() }),
        }
    }
    assemble(&catalog.map_digest, map.degree(), params, records, exclusions)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub orbit: usize,
    pub point: usize,
    pub r: f64,
    pub m: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub kappa: f64,
    pub beta: f64,
    /// The constant in `m_x(r) >= t r^beta / C`; always `d`.
    #[serde(rename = "C")]
    pub c: f64,
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
    pub verdict: Verdict,
}

/// Check `m_x(r) >= t r^beta / d` for grid radii `r <= 1`, with
/// `beta = log d / log kappa`. `kappa_override` replaces the certificate's
/// kappa (a sensitivity harness).
pub fn check_lower_bound(cert: &Certificate, kappa_override: Option<f64>) -> Option<LowerBoundReport> {
    let kappa = kappa_override.or(cert.kappa)?;
    if kappa <= 1.0 {
        return None;
    }
    let d = cert.degree as f64;
    let beta = d.ln() / kappa.ln();
    let mut violations = Vec::new();
    let mut checked = 0;
    for (i, j, p) in cert.points() {
        for (&r, &m) in cert.radii.iter().zip(&p.m) {
            if r <= 1.0 {
                checked += 1;
                let bound = cert.t * r.powf(beta) / d;
                if m < bound * (1.0 - SLACK) {
                    violations.push(BoundViolation { orbit: i, point: j, r, m, bound });
                }
            }
        }
    }
    let verdict = if violations.is_empty() { Verdict::Pass } else { Verdict::Fail };
    Some(LowerBoundReport { kappa, beta, c: d, checked, violations, verdict })
}

/// Replay the stored `(C, beta)` against the stored m-values for `r >= 1`.
pub fn replay_upper_bound(cert: &Certificate) -> Option<Vec<BoundViolation>> {
    let (c, beta) = (cert.c?, cert.beta?);
    let mut out = Vec::new();
    for (i, j, p) in cert.points() {
        for (&r, &m) in cert.radii.iter().zip(&p.m) {
            let bound = c * r.powf(beta);
            if r >= 1.0 && m > bound * (1.0 + SLACK) {
                out.push(BoundViolation { orbit: i, point: j, r, m, bound });
            }
        }
    }
    Some(out)
}

/// `m_x(r0)` for the sample point attaining `M(r0)`.
pub fn sup_at(cert: &Certificate, r: f64) -> Option<f64> {
    let i = cert.radius_index(r)?;
    cert.points().map(|(_, _, p)| p.m[i]).reduce(f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// `(period, (1/n) log |lambda+|)` per saddle orbit.
    pub exponents: Vec<(usize, f64)>,
    pub min_exponent: f64,
    pub log_kappa: Option<f64>,
    /// `min_exponent >= log kappa - tol`.
    pub verdict: Option<Verdict>,
}

pub fn lyapunov_estimate(catalog: &SaddleCatalog, kappa: Option<f64>, tol: f64) -> LyapunovReport {
    let exponents: Vec<(usize, f64)> = catalog.saddles().map(|o| (o.period, o.lyapunov_exponent())).collect();
    let min_exponent = exponents.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let log_kappa = kappa.map(f64::ln);
    let verdict = log_kappa.map(|lk| if min_exponent >= lk - tol { Verdict::Pass } else { Verdict::Fail });
    LyapunovReport { exponents, min_exponent, log_kappa, verdict }
}

/// Least-squares fit of `log y = log C + m log r`, returning `(C, m)`.
pub fn power_law_fit(rs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rs.iter().zip(ys).filter(|(r, y)| **r > 0.0 && **y > 0.0).map(|(r, y)| (r.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let m = sxy / sxx;
    Some(((my - m * mx).exp(), m))
}
