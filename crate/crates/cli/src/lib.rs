//! Orchestration and report bundles for the `qxlab` command.

pub mod bundle;
pub mod config;

use anyhow::{anyhow, Context};
use bundle::{Bundle, Provenance};
use config::{Analysis, RunConfig};
use qxlab_core::certify::{
    certify_theorem12, check_lower_bound, lyapunov_estimate, replay_upper_bound, Certificate, CertifyParams, Verdict,
};
use qxlab_core::folding::{gamma_k, order_of, projection_degree, tangency_order, tangent_direction, Contact, Order, TaylorJet};
use qxlab_core::geometry::{area_report, backward_contraction, green_ball_growth, normalized_cycle_with_steps, NormalizedCycle, Quadrature};
use qxlab_core::io::{map_digest, poly_digest};
use qxlab_core::manifold::{linearize_stable, m_function, UnstableParametrization};
use qxlab_core::metrics::{
    coboundary_residual, cocycle_series, metric_l_interval, real_symmetry_defect, strip_cocycle_bound, Interval, MetricConfig,
    MetricFamily,
};
use qxlab_core::oned::{certify_1d, sample_cycles, semi_hyperbolic_verdict, Answer, Polynomial1D, SemiHypConfig};
use qxlab_core::saddles::{find_periodic_orbits, SaddleCatalog};
use qxlab_core::{c64, Henon};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run the selected analysis and write its bundle to `cfg.out`.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let b = run(cfg)?;
    b.write(&cfg.out).with_context(|| format!("writing bundle to {}", cfg.out.display()))?;
    Ok(b)
}

/// Run the selected analysis; nothing is written.
pub fn run(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    cfg.validate()?;
    match cfg.analysis {
        Analysis::Certify => certify(cfg),
        Analysis::Saddles => saddles(cfg),
        Analysis::Manifold => manifold(cfg),
        Analysis::Metrics => metrics(cfg),
        Analysis::Folding => folding(cfg),
        Analysis::Poly1d => poly1d(cfg),
        Analysis::Survey => survey(cfg),
    }
}

fn provenance(cfg: &RunConfig, digest: String) -> Provenance {
    Provenance {
        map_digest: digest,
        config_digest: cfg.digest(),
        version: VERSION.into(),
        seed: cfg.seed,
        analysis: serde_json::to_value(cfg.analysis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
    }
}

fn load_map(cfg: &RunConfig) -> anyhow::Result<Henon> {
    let src = cfg.map.as_ref().ok_or_else(|| anyhow!("this analysis needs a `map`"))?;
    Ok(src.load()?.build()?)
}

fn certify_params(cfg: &RunConfig) -> CertifyParams {
    CertifyParams { t: cfg.t, margin: cfg.margin, order: cfg.order, mconfig: cfg.tolerances.mconfig, ..Default::default() }
}

/// Catalog restricted to the configured period range, read from `--catalog`
/// or the cache directory when a matching one exists.
pub fn catalog(cfg: &RunConfig, map: &Henon) -> anyhow::Result<SaddleCatalog> {
    let search = &cfg.tolerances.search;
    if cfg.periods.is_empty() {
        let mut cat = find_periodic_orbits(map, 1, search);
        cat.orbits.clear();
        cat.metadata.n_max = 0;
        cat.metadata.periods.clear();
        cat.warnings.push("empty period range".into());
        return Ok(cat);
    }
    let n = cfg.periods.max;
    let cached = match (&cfg.catalog, &cfg.cache_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            let key = format!("{}{}{n}", map_digest(map), serde_json::to_string(search)?);
            Some(dir.join(format!("catalog-{}.json", &hex::encode(Sha256::digest(key.as_bytes()))[..16])))
        }
        (None, None) => None,
    };
    let mut cat = match cached.as_ref().filter(|p| p.exists()) {
        Some(p) => {
            let cat = SaddleCatalog::from_json(&std::fs::read_to_string(p)?)?;
            anyhow::ensure!(cat.matches(map, n), "catalog {} does not cover this map up to period {n}", p.display());
            cat
        }
        None => {
            let cat = find_periodic_orbits(map, n, search);
            if let Some(p) = &cached {
                if let Some(dir) = p.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(p, cat.to_json()?)?;
            }
            cat
        }
    };
    cat.orbits.retain(|o| cfg.periods.contains(o.period));
    Ok(cat)
}

#[derive(Serialize)]
struct SaddleRow {
    orbit: usize,
    period: usize,
    x_re: f64,
    x_im: f64,
    y_re: f64,
    y_im: f64,
    eig_unstable: f64,
    eig_stable: f64,
    classification: String,
    residual: f64,
    lyapunov: f64,
}

fn saddle_rows(cat: &SaddleCatalog) -> Vec<SaddleRow> {
    cat.orbits
        .iter()
        .enumerate()
        .map(|(i, o)| SaddleRow {
            orbit: i,
            period: o.period,
            x_re: o.points[0].x.re,
            x_im: o.points[0].x.im,
            y_re: o.points[0].y.re,
            y_im: o.points[0].y.im,
            eig_unstable: o.eig_unstable.norm(),
            eig_stable: o.eig_stable.norm(),
            classification: o.classification.map(|c| format!("{c:?}").to_lowercase()).unwrap_or_default(),
            residual: o.residual,
            lyapunov: o.lyapunov_exponent(),
        })
        .collect()
}

#[derive(Serialize)]
struct MRow {
    orbit: usize,
    point: usize,
    r: f64,
    m: f64,
}

#[derive(Serialize)]
struct StepRow {
    orbit: usize,
    period: usize,
    point: usize,
    step: f64,
    argument: f64,
    /// `c#(x, 1) = log |lambda_x|`.
    cocycle: f64,
    law_residual: Option<f64>,
}

fn certificate_rows(cert: &Certificate) -> (Vec<MRow>, Vec<StepRow>) {
    let mut m = Vec::new();
    let mut s = Vec::new();
    for (i, j, p) in cert.points() {
        m.extend(cert.radii.iter().zip(&p.m).map(|(&r, &v)| MRow { orbit: i, point: j, r, m: v }));
        s.push(StepRow {
            orbit: i,
            period: cert.records[i].period,
            point: j,
            step: p.step,
            argument: p.step_argument,
            cocycle: p.step.ln(),
            law_residual: p.law_residual,
        });
    }
    (m, s)
}

fn saddle_cycles(map: &Henon, cat: &SaddleCatalog, cfg: &RunConfig) -> Vec<(usize, Result<NormalizedCycle, String>)> {
    cat.orbits
        .par_iter()
        .enumerate()
        .filter(|(_, o)| o.is_saddle())
        .map(|(i, o)| (i, normalized_cycle_with_steps(map, o, cfg.order, cfg.t, &cfg.tolerances.mconfig).map_err(|e| e.to_string())))
        .collect()
}

#[derive(Serialize)]
struct CertifyDiagnostics {
    lower_bound: Option<qxlab_core::certify::LowerBoundReport>,
    upper_bound_violations: Option<usize>,
    lyapunov: qxlab_core::certify::LyapunovReport,
    area: Result<qxlab_core::geometry::AreaReport, String>,
    contraction: Result<qxlab_core::geometry::ContractionReport, String>,
    green_growth: Option<(f64, f64)>,
}

fn certify(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let map = load_map(cfg)?;
    let cat = catalog(cfg, &map)?;
    let cert = certify_theorem12(&map, &cat, &certify_params(cfg));
    let mut b = Bundle::new(provenance(cfg, map_digest(&map)));
    let (m, s) = certificate_rows(&cert);

    let cycles: Vec<NormalizedCycle> = saddle_cycles(&map, &cat, cfg).into_iter().filter_map(|(_, c)| c.ok()).collect();
    let params: Vec<UnstableParametrization> = cycles.iter().flat_map(|c| c.params.clone()).collect();
    let quad = Quadrature::default();
    let eps = cfg.geometry.epsilon;
    let area = if params.is_empty() { Err("empty sample".into()) } else { area_report(&params, eps, quad).map_err(|e| e.to_string()) };
    let contraction =
        backward_contraction(&cert, &cycles, eps, cfg.geometry.contraction_steps, quad).map_err(|e| e.to_string());
    let points: Vec<_> = cat.saddles().flat_map(|o| o.points.clone()).collect();
    let green_growth =
        if points.is_empty() { None } else { green_ball_growth(&map, &points, &[0.01, 0.02, 0.05, 0.1], 32, cfg.seed).1 };
    let diag = CertifyDiagnostics {
        lower_bound: check_lower_bound(&cert, None),
        upper_bound_violations: replay_upper_bound(&cert).map(|v| v.len()),
        lyapunov: lyapunov_estimate(&cat, cert.kappa, cfg.tolerances.lyapunov_tol),
        area,
        contraction,
        green_growth,
    };

    b.json("certificate.json", "certificate", &cert)?;
    b.json("diagnostics.json", "diagnostics", &diag)?;
    b.csv("saddles.csv", &saddle_rows(&cat))?;
    b.csv("mfunction.csv", &m)?;
    b.csv("cocycles.csv", &s)?;
    Ok(b)
}

fn saddles(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let map = load_map(cfg)?;
    let cat = catalog(cfg, &map)?;
    let mut b = Bundle::new(provenance(cfg, map_digest(&map)));
    b.json("catalog.json", "catalog", &cat)?;
    b.csv("saddles.csv", &saddle_rows(&cat))?;
    Ok(b)
}

#[derive(Serialize)]
struct MultiplierRow {
    orbit: usize,
    point: usize,
    scale: f64,
    valid_radius: f64,
    residual_bound: f64,
    fresh_residual: f64,
    step: f64,
    argument: f64,
}

#[derive(Serialize)]
struct Exclusion {
    orbit: usize,
    reason: String,
}

fn manifold(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let map = load_map(cfg)?;
    let cat = catalog(cfg, &map)?;
    let radii = certify_params(cfg).eval_radii();
    let mut params = Vec::new();
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut excluded = Vec::new();
    for (i, c) in saddle_cycles(&map, &cat, cfg) {
        match c {
            Ok(c) => {
                for (j, p) in c.params.iter().enumerate() {
                    let mf = m_function(p, &map, &radii, &cfg.tolerances.mconfig);
                    curves.extend(radii.iter().zip(&mf.values).map(|(&r, &m)| MRow { orbit: i, point: j, r, m }));
                    rows.push(MultiplierRow {
                        orbit: i,
                        point: j,
                        scale: p.scale,
                        valid_radius: p.valid_radius,
                        residual_bound: p.residual_bound,
                        fresh_residual: p.functional_residual(&map, p.residual_radius(), 64, cfg.seed ^ (i as u64) << 8 ^ j as u64),
                        step: c.steps[j].norm(),
                        argument: c.steps[j].arg(),
                    });
                }
                params.extend(c.params);
            }
            Err(reason) => excluded.push(Exclusion { orbit: i, reason }),
        }
    }
    let mut b = Bundle::new(provenance(cfg, map_digest(&map)));
    b.json("parametrizations.json", "parametrizations", &params)?;
    b.json("exclusions.json", "exclusions", &excluded)?;
    b.csv("mfunction.csv", &curves)?;
    b.csv("multipliers.csv", &rows)?;
    b.csv("saddles.csv", &saddle_rows(&cat))?;
    Ok(b)
}

#[derive(Serialize)]
struct MetricRow {
    orbit: usize,
    point: usize,
    level: f64,
    inradius: f64,
    lower: f64,
    upper: f64,
    koebe_ok: bool,
    sweep_ok: bool,
    /// Interval within `[1/4, 1]` times the sharp density.
    koebe_comparison: bool,
    /// Overlap with the `dL` interval at the image point scaled by `|lambda_x|`.
    relation_overlap: bool,
}

#[derive(Serialize)]
struct CocycleRow {
    orbit: usize,
    step: usize,
    point: usize,
    family: String,
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Default)]
struct MetricSummary {
    intervals: usize,
    koebe_ok: bool,
    koebe_comparison: bool,
    relation_overlap: bool,
    max_sharp_cocycle: f64,
    max_coboundary_residual: f64,
    strip_bound: Option<f64>,
    half_line_bound: Option<f64>,
    errors: Vec<String>,
}

fn metrics(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let map = load_map(cfg)?;
    let cat = catalog(cfg, &map)?;
    let mcfg = MetricConfig { green: cfg.tolerances.mconfig.green, ..Default::default() };
    let level = cfg.metrics.level;
    let sharp = Interval::new(0.25, 1.0);
    let mut rows = Vec::new();
    let mut cocycles = Vec::new();
    let mut sum = MetricSummary { koebe_ok: true, koebe_comparison: true, relation_overlap: true, ..Default::default() };
    for (i, c) in saddle_cycles(&map, &cat, cfg) {
        let c = match c {
            Ok(c) => c,
            Err(e) => {
                sum.errors.push(format!("orbit {i}: {e}"));
                continue;
            }
        };
        let n = c.params.len();
        let here: Vec<_> = c.params.par_iter().map(|p| metric_l_interval(p, &map, level, &mcfg)).collect();
        let there: Vec<_> = c.params.par_iter().map(|p| metric_l_interval(p, &map, 2.0 * level, &mcfg)).collect();
        for j in 0..n {
            match (&here[j], &there[(j + 1) % n]) {
                (Ok(m), Ok(next)) => {
                    let row = MetricRow {
                        orbit: i,
                        point: j,
                        level,
                        inradius: m.inradius,
                        lower: m.lower,
                        upper: m.upper,
                        koebe_ok: m.koebe_ok(),
                        sweep_ok: m.sweep_ok,
                        koebe_comparison: level != 1.0 || m.interval().within(&sharp, 1e-6),
                        relation_overlap: m.interval().overlaps(&next.interval().scale(c.steps[j].norm())),
                    };
                    sum.intervals += 1;
                    sum.koebe_ok &= row.koebe_ok;
                    sum.koebe_comparison &= row.koebe_comparison;
                    sum.relation_overlap &= row.relation_overlap;
                    rows.push(row);
                }
                (Err(e), _) | (_, Err(e)) => sum.errors.push(format!("orbit {i} point {j}: {e}")),
            }
        }
        let len = cfg.metrics.periods_per_orbit * n;
        let s1 = cocycle_series(&map, &c, MetricFamily::Sharp, len, &mcfg);
        let sl = cocycle_series(&map, &c, MetricFamily::Level(level), len, &mcfg);
        sum.max_sharp_cocycle = sum.max_sharp_cocycle.max(s1.max_abs());
        match coboundary_residual(&s1, &sl) {
            Ok(r) => sum.max_coboundary_residual = sum.max_coboundary_residual.max(r),
            Err(e) => sum.errors.push(format!("orbit {i}: {e}")),
        }
        for (name, s) in [("sharp", &s1), ("level", &sl)] {
            for (k, v) in s.values.iter().enumerate() {
                cocycles.push(CocycleRow { orbit: i, step: k, point: s.indices[k], family: name.into(), lo: v.lo, hi: v.hi });
            }
        }
        if map.is_real() && sum.strip_bound.is_none() {
            if let Some(p) = c.params.iter().find(|p| real_symmetry_defect(p) <= 1e-10) {
                sum.strip_bound = strip_cocycle_bound(&map, p, level, false).ok().map(|b| b.bound);
                sum.half_line_bound = strip_cocycle_bound(&map, p, level, true).ok().map(|b| b.bound);
            }
        }
    }
    let mut b = Bundle::new(provenance(cfg, map_digest(&map)));
    b.json("metrics.json", "summary", &sum)?;
    b.csv("metrics.csv", &rows)?;
    b.csv("cocycles.csv", &cocycles)?;
    Ok(b)
}

#[derive(Serialize)]
struct FoldingRow {
    orbit: usize,
    point: usize,
    order: Option<usize>,
    degree: Option<i64>,
    min_modulus: Option<f64>,
    gamma1: f64,
    metric_factor: Option<f64>,
    contact: Option<usize>,
    germ_coincidence: bool,
    note: String,
}

fn folding_row(orbit: usize, point: usize, ju: &TaylorJet, js: Option<&TaylorJet>, cfg: &RunConfig) -> FoldingRow {
    let tol = cfg.tolerances.order_tol;
    let order = match order_of(ju, tol) {
        Order::Order(k) => Some(k),
        Order::Degenerate => None,
    };
    let mut notes = Vec::new();
    let degree = tangent_direction(ju, tol).and_then(|d| match projection_degree(ju, d, cfg.folding.radius, tol) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    });
    let g = gamma_k(std::slice::from_ref(ju), 1).ok();
    let tangency = js.map(|js| tangency_order(ju, js, tol));
    let (contact, germ) = match &tangency {
        Some(Ok(r)) => match r.contact {
            Contact::Order(k) => (Some(k), false),
            Contact::GermCoincidence => (None, true),
        },
        Some(Err(e)) => {
            notes.push(e.to_string());
            (None, false)
        }
        None => (None, false),
    };
    if order.is_none() {
        notes.push("degenerate jet".into());
    }
    FoldingRow {
        orbit,
        point,
        order,
        degree: degree.as_ref().map(|d| d.winding),
        min_modulus: degree.as_ref().map(|d| d.min_modulus),
        gamma1: g.as_ref().map_or(0.0, |g| g.gamma),
        metric_factor: g.and_then(|g| g.metric_factor),
        contact,
        germ_coincidence: germ,
        note: notes.join("; "),
    }
}

fn load_jets(path: &std::path::Path) -> anyhow::Result<Vec<TaylorJet>> {
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    if let Ok(ps) = serde_json::from_str::<Vec<UnstableParametrization>>(&text) {
        return Ok(ps.iter().map(TaylorJet::from_param).collect());
    }
    // a manifold bundle file
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(ps) = v.get("parametrizations") {
            let ps: Vec<UnstableParametrization> = serde_json::from_value(ps.clone())?;
            return Ok(ps.iter().map(TaylorJet::from_param).collect());
        }
    }
    Ok(serde_json::from_str::<Vec<TaylorJet>>(&text)?)
}

fn folding(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let mut rows = Vec::new();
    let digest;
    if let Some(path) = &cfg.folding.jets {
        let jets = load_jets(path)?;
        anyhow::ensure!(!jets.is_empty(), "no jets in {}", path.display());
        // each jet against the first one based at the same point
        for (j, jet) in jets.iter().enumerate() {
            let partner = jets[..j].iter().find(|o| o.base.dist_sup(&jet.base) <= 1e-9);
            rows.push(folding_row(0, j, jet, partner, cfg));
        }
        digest = hex::encode(Sha256::digest(serde_json::to_vec(&jets)?));
    } else {
        let map = load_map(cfg)?;
        let cat = catalog(cfg, &map)?;
        for (i, c) in saddle_cycles(&map, &cat, cfg) {
            let Ok(c) = c else { continue };
            for (j, p) in c.params.iter().enumerate() {
                let ju = TaylorJet::from_param(p);
                let orbit = cat.orbits[i].rotated(j);
                let js = linearize_stable(&map, &orbit, cfg.order).ok().map(|s| TaylorJet::new(s.base, s.coeffs));
                rows.push(folding_row(i, j, &ju, js.as_ref(), cfg));
            }
        }
        digest = map_digest(&map);
    }
    let mut b = Bundle::new(provenance(cfg, digest));
    b.json("folding.json", "jets", &rows)?;
    b.csv("folding.csv", &rows)?;
    Ok(b)
}

#[derive(Serialize)]
struct CycleRow {
    cycle: usize,
    period: usize,
    x_re: f64,
    x_im: f64,
    multiplier: f64,
    residual: f64,
}

#[derive(Serialize)]
struct Poly1dDiagnostics {
    lower_bound: Option<qxlab_core::certify::LowerBoundReport>,
    upper_bound_violations: Option<usize>,
    /// PASS with YES, or a non-PASS verdict with NO.
    agrees_with_semi_hyperbolicity: bool,
}

fn poly1d(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let src = cfg.poly.as_ref().ok_or_else(|| anyhow!("poly1d needs a `poly`"))?;
    let g = Polynomial1D::new(src.load()?.build())?;
    let cycles = if cfg.periods.is_empty() {
        Vec::new()
    } else {
        let mut cs = sample_cycles(&g, cfg.periods.max, &cfg.poly1d.shadow_periods);
        cs.retain(|c| c.period >= cfg.periods.min);
        cs
    };
    let mut cert = certify_1d(&g, &cycles, &certify_params(cfg));
    let semi = semi_hyperbolic_verdict(&g, &SemiHypConfig::default());
    let agrees = matches!((cert.verdict, semi.verdict), (Verdict::Pass, Answer::Yes) | (Verdict::Fail, Answer::No));
    cert.semi_hyperbolicity = Some(semi);
    let diag = Poly1dDiagnostics {
        lower_bound: check_lower_bound(&cert, None),
        upper_bound_violations: replay_upper_bound(&cert).map(|v| v.len()),
        agrees_with_semi_hyperbolicity: agrees,
    };
    let rows: Vec<CycleRow> = cycles
        .iter()
        .enumerate()
        .map(|(i, c)| CycleRow {
            cycle: i,
            period: c.period,
            x_re: c.points[0].re,
            x_im: c.points[0].im,
            multiplier: c.multiplier.norm(),
            residual: c.residual,
        })
        .collect();
    let (m, s) = certificate_rows(&cert);
    let mut b = Bundle::new(provenance(cfg, poly_digest(&g.poly)));
    b.json("certificate.json", "certificate", &cert)?;
    b.json("diagnostics.json", "diagnostics", &diag)?;
    b.csv("cycles.csv", &rows)?;
    b.csv("mfunction.csv", &m)?;
    b.csv("cocycles.csv", &s)?;
    Ok(b)
}

#[derive(Serialize)]
struct SurveyRow {
    a: f64,
    c: f64,
    orbits: usize,
    kappa: Option<f64>,
    verdict: String,
    error: String,
}

fn survey(cfg: &RunConfig) -> anyhow::Result<Bundle> {
    let cells: Vec<(f64, f64)> =
        cfg.survey.a.values().into_iter().flat_map(|a| cfg.survey.c.values().into_iter().map(move |c| (a, c))).collect();
    anyhow::ensure!(!cells.is_empty(), "survey grid is empty");
    let params = certify_params(cfg);
    let rows: Vec<SurveyRow> = cells
        .par_iter()
        .map(|&(a, c)| {
            let map = match Henon::new(vec![c64(c, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)], c64(a, 0.0)) {
                Ok(m) => m,
                Err(e) => return SurveyRow { a, c, orbits: 0, kappa: None, verdict: String::new(), error: e.to_string() },
            };
            match catalog(&RunConfig { catalog: None, ..cfg.clone() }, &map) {
                Ok(cat) => {
                    let cert = certify_theorem12(&map, &cat, &params);
                    let verdict = serde_json::to_value(cert.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                    let error = cert.exclusions.iter().map(|e| format!("period {}: {}", e.period, e.reason)).collect::<Vec<_>>().join("; ");
                    SurveyRow { a, c, orbits: cat.orbits.len(), kappa: cert.kappa, verdict, error }
                }
                Err(e) => SurveyRow { a, c, orbits: 0, kappa: None, verdict: String::new(), error: e.to_string() },
            }
        })
        .collect();
    let digest = hex::encode(Sha256::digest(serde_json::to_vec(&cfg.survey)?));
    let mut b = Bundle::new(provenance(cfg, digest));
    b.csv("survey.csv", &rows)?;
    Ok(b)
}
