//! Periodic orbits of Hénon maps and the saddle sample built from them.

use crate::continuation::{start_cycles, ContinuationConfig, OrbitSystem};
use crate::error::Result;
use crate::henon::{ComplexPoint, HenonMap, Mat2};
use crate::io::map_digest;
use crate::scalar::{c64, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

type Point = ComplexPoint<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Saddle,
    Attracting,
    Repelling,
    Indifferent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub points: Vec<Point>,
    pub period: usize,
    pub eig_unstable: C64,
    pub eig_stable: C64,
    pub classification: Option<Classification>,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Track every start cycle of `x -> x^d` to the target map.
    Homotopy,
    /// Newton on `f^n(q) - q` from a `(grid x grid)` real seed grid over
    /// `[-R, R]^2`, plus midpoints of orbits already found.
    NewtonGrid { grid: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub tol: f64,
    pub polish_tol: f64,
    pub dedup_tol: f64,
    /// Eigenvalue moduli closer than this to 1 classify as indifferent.
    pub indifferent_band: f64,
    pub strategy: SearchStrategy,
    /// Compare the number of period-`n` points with `d^n`.
    pub count_check: bool,
    pub continuation: ContinuationConfig,
    pub max_retracks: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            polish_tol: 1e-12,
            dedup_tol: 1e-8,
            indifferent_band: 1e-8,
            strategy: SearchStrategy::Homotopy,
            count_check: true,
            continuation: ContinuationConfig::default(),
            max_retracks: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogStatus {
    Complete,
    /// Some period fell short of `d^n` points (or the check was off).
    Partial,
    /// Nothing converged.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodStats {
    pub period: usize,
    pub seeds: usize,
    pub orbits: usize,
    /// Sum over divisors `m` of `m * #orbits(m)`; `d^n` when complete.
    pub points_dividing: usize,
    pub expected_points: usize,
    pub rejected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchMetadata {
    pub n_max: usize,
    pub config: SearchConfig,
    pub periods: Vec<PeriodStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleCatalog {
    pub map_digest: String,
    pub orbits: Vec<PeriodicOrbit>,
    pub metadata: SearchMetadata,
    pub status: CatalogStatus,
    pub warnings: Vec<String>,
}

fn lex_cmp(p: &Point, q: &Point) -> Ordering {
    let a = [p.x.re, p.x.im, p.y.re, p.y.im];
    let b = [q.x.re, q.x.im, q.y.re, q.y.im];
    a.iter().zip(b.iter()).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

impl PeriodicOrbit {
    /// Build from a cycle of `x`-coordinates; `y_i = x_{i-1}`.
    pub fn from_xs(map: &HenonMap, xs: &[C64]) -> Self {
        let n = xs.len();
        let mut xs = xs.to_vec();
        // real cycles of real maps come back with denormal-size imaginary dust
        if map.is_real() && xs.iter().all(|x| x.im.abs() <= 1e-15 * (1.0 + x.re.abs())) {
            xs.iter_mut().for_each(|x| x.im = 0.0);
        }
        let points = (0..n).map(|i| Point::new(xs[i], xs[(i + n - 1) % n])).collect();
        let mut orbit = Self {
            points,
            period: n,
            eig_unstable: c64(0.0, 0.0),
            eig_stable: c64(0.0, 0.0),
            classification: None,
            residual: 0.0,
        };
        orbit.residual = orbit.orbit_residual(map);
        orbit.canonicalize();
        orbit
    }

    /// `max_i |f(q_i) - q_{i+1}|` in the sup norm.
    pub fn orbit_residual(&self, map: &HenonMap) -> f64 {
        let n = self.points.len();
        (0..n).map(|i| map.evaluate(&self.points[i]).dist_sup(&self.points[(i + 1) % n])).fold(0.0, f64::max)
    }

    /// Rotate so the lexicographically least point comes first.
    pub fn canonicalize(&mut self) {
        let k = (0..self.points.len())
            .min_by(|&i, &j| lex_cmp(&self.points[i], &self.points[j]))
            .unwrap_or(0);
        self.points.rotate_left(k);
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut o = self.clone();
        o.points.rotate_left(k % self.period.max(1));
        o
    }

    /// `Df^n` along the cycle starting from `points[0]`.
    pub fn cycle_differential(&self, map: &HenonMap) -> Mat2<f64> {
        self.points.iter().fold(Mat2::identity(), |m, q| map.jacobian(q).mul(&m))
    }

    pub fn is_rotation_of(&self, other: &Self, tol: f64) -> bool {
        self.period == other.period
            && (0..self.period).any(|k| {
                (0..self.period).all(|i| self.points[i].dist_sup(&other.points[(i + k) % self.period]) <= tol)
            })
    }

    /// Smallest `m` with `points[i + m] = points[i]` within `tol`.
    pub fn prime_period(&self, tol: f64) -> usize {
        let n = self.period;
        (1..=n)
            .find(|&m| n % m == 0 && (0..n).all(|i| self.points[i].dist_sup(&self.points[(i + m) % n]) <= tol))
            .unwrap_or(n)
    }

    pub fn is_saddle(&self) -> bool {
        self.classification == Some(Classification::Saddle)
    }

    /// `log|lambda^+| / n`.
    pub fn lyapunov_exponent(&self) -> f64 {
        self.eig_unstable.norm().ln() / self.period as f64
    }
}

/// Fill eigenvalues and classification from the cycle differential.
pub fn classify(map: &HenonMap, orbit: &PeriodicOrbit) -> PeriodicOrbit {
    classify_with_band(map, orbit, SearchConfig::default().indifferent_band)
}

pub fn classify_with_band(map: &HenonMap, orbit: &PeriodicOrbit, band: f64) -> PeriodicOrbit {
    let mut o = orbit.clone();
    let m = o.cycle_differential(map);
    let det = map.a().powu(o.period as u32);
    let (big, small) = m.eigenvalues_with_det(det);
    o.eig_unstable = big;
    o.eig_stable = small;
    let (u, s) = (big.norm(), small.norm());
    o.classification = Some(if (u - 1.0).abs() <= band || (s - 1.0).abs() <= band {
        Classification::Indifferent
    } else if u > 1.0 && s < 1.0 {
        Classification::Saddle
    } else if u < 1.0 {
        Classification::Attracting
    } else {
        Classification::Repelling
    });
    o
}

impl SaddleCatalog {
    pub fn saddles(&self) -> impl Iterator<Item = &PeriodicOrbit> {
        self.orbits.iter().filter(|o| o.is_saddle())
    }

    pub fn of_period(&self, n: usize) -> impl Iterator<Item = &PeriodicOrbit> {
        self.orbits.iter().filter(move |o| o.period == n)
    }

    /// Number of periodic points whose period divides `n`.
    pub fn points_dividing(&self, n: usize) -> usize {
        self.orbits.iter().filter(|o| n % o.period == 0).map(|o| o.period).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// True when this catalog was built for `map` and covers `n_max`.
    pub fn matches(&self, map: &HenonMap, n_max: usize) -> bool {
        self.map_digest == map_digest(map) && self.metadata.n_max >= n_max
    }
}

/// Insert unless a rotation is already present; keyed by canonical point.
fn merge(store: &mut Vec<PeriodicOrbit>, orbit: PeriodicOrbit, tol: f64) -> bool {
    if store.iter().any(|o| o.is_rotation_of(&orbit, tol)) {
        return false;
    }
    store.push(orbit);
    true
}

/// `f^n(q) - q` and its differential.
fn return_map(map: &HenonMap, q: &Point, n: usize) -> (Point, Mat2<f64>) {
    let mut p = *q;
    let mut m = Mat2::identity();
    for _ in 0..n {
        m = map.jacobian(&p).mul(&m);
        p = map.evaluate(&p);
    }
    (p, m)
}

fn newton_return(map: &HenonMap, seed: Point, n: usize, tol: f64, bound: f64) -> Option<Point> {
    let mut q = seed;
    for _ in 0..80 {
        let (fq, m) = return_map(map, &q, n);
        if !fq.is_finite() {
            return None;
        }
        let f = [fq.x - q.x, fq.y - q.y];
        let mut a = m;
        a.m[0][0] -= 1.0;
        a.m[1][1] -= 1.0;
        let dq = a.solve([-f[0], -f[1]])?;
        // damp long steps so seeds do not get thrown to infinity
        let len = dq[0].norm().max(dq[1].norm());
        let damp = if len > 1.0 { 1.0 / len } else { 1.0 };
        q = Point::new(q.x + dq[0] * damp, q.y + dq[1] * damp);
        if q.sup_norm() > 4.0 * bound {
            return None;
        }
        if len <= tol * (1.0 + q.sup_norm()) {
            return Some(q);
        }
    }
    None
}

fn finalize(map: &HenonMap, mut orbit: PeriodicOrbit, cfg: &SearchConfig) -> Option<PeriodicOrbit> {
    orbit.residual = orbit.orbit_residual(map);
    let scale = 1.0 + orbit.points.iter().map(|q| q.sup_norm()).fold(0.0, f64::max);
    if !(orbit.residual <= cfg.tol * scale) {
        return None;
    }
    let b = scale.powi(map.degree() as i32);
    let (fq, _) = return_map(map, &orbit.points[0], orbit.period);
    if !(fq.dist_sup(&orbit.points[0]) <= cfg.tol * b) {
        return None;
    }
    if orbit.prime_period(cfg.dedup_tol) != orbit.period {
        return None;
    }
    Some(classify_with_band(map, &orbit, cfg.indifferent_band))
}

fn homotopy_period(map: &HenonMap, n: usize, cfg: &SearchConfig) -> (Vec<PeriodicOrbit>, PeriodStats) {
    let sys = OrbitSystem::new(map.p().clone(), map.a());
    let starts = start_cycles(map.degree(), n);
    let mut ccfg = cfg.continuation;
    let mut finals: Vec<Option<PeriodicOrbit>> = starts
        .par_iter()
        .map(|st| {
            let t = sys.track(st, &ccfg);
            finalize(map, PeriodicOrbit::from_xs(map, &t.xs), cfg)
        })
        .collect();
    // Paths that land on an orbit already claimed by another path have
    // probably jumped; retrack them more cautiously.
    for _ in 0..cfg.max_retracks {
        let dup = duplicate_indices(&finals, cfg.dedup_tol);
        if dup.is_empty() {
            break;
        }
        ccfg.max_step *= 0.25;
        ccfg.initial_step *= 0.25;
        let redo: Vec<(usize, Option<PeriodicOrbit>)> = dup
            .par_iter()
            .map(|&i| {
                let t = sys.track(&starts[i], &ccfg);
                (i, finalize(map, PeriodicOrbit::from_xs(map, &t.xs), cfg))
            })
            .collect();
        for (i, o) in redo {
            finals[i] = o;
        }
    }
    let mut store = Vec::new();
    let mut rejected = 0;
    for o in finals {
        match o {
            Some(o) => {
                if !merge(&mut store, o, cfg.dedup_tol) {
                    rejected += 1;
                }
            }
            None => rejected += 1,
        }
    }
    let stats = PeriodStats {
        period: n,
        seeds: starts.len(),
        orbits: store.len(),
        points_dividing: 0,
        expected_points: map.degree().pow(n as u32),
        rejected,
    };
    (store, stats)
}

fn duplicate_indices(finals: &[Option<PeriodicOrbit>], tol: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..finals.len() {
        let Some(oi) = &finals[i] else {
            out.push(i);
            continue;
        };
        let clash = finals.iter().enumerate().any(|(j, oj)| j != i && oj.as_ref().is_some_and(|oj| oj.is_rotation_of(oi, tol)));
        if clash {
            out.push(i);
        }
    }
    out
}

fn grid_period(
    map: &HenonMap,
    n: usize,
    grid: usize,
    known: &[PeriodicOrbit],
    cfg: &SearchConfig,
) -> (Vec<PeriodicOrbit>, PeriodStats) {
    let r = map.escape_radius();
    let g = grid.max(2);
    let mut seeds = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let u = -r + 2.0 * r * i as f64 / (g - 1) as f64;
            let v = -r + 2.0 * r * j as f64 / (g - 1) as f64;
            seeds.push(Point::real(u, v));
        }
    }
    for o in known {
        for w in o.points.windows(2) {
            let m = Point::new((w[0].x + w[1].x) * 0.5, (w[0].y + w[1].y) * 0.5);
            seeds.push(m);
        }
    }
    let found: Vec<Option<PeriodicOrbit>> = seeds
        .par_iter()
        .map(|&s| {
            let q = newton_return(map, s, n, cfg.polish_tol, r)?;
            let mut xs = Vec::with_capacity(n);
            let mut p = q;
            for _ in 0..n {
                p = map.evaluate(&p);
                xs.push(p.y);
            }
            // xs[i] = x-coordinate of f^i(q), so the cycle starts at q
            let mut cyc = xs;
            let sys = OrbitSystem::new(map.p().clone(), map.a());
            sys.polish(&mut cyc, cfg.polish_tol);
            finalize(map, PeriodicOrbit::from_xs(map, &cyc), cfg)
        })
        .collect();
    let mut store = Vec::new();
    let mut rejected = 0;
    for o in found.into_iter().flatten() {
        if !merge(&mut store, o, cfg.dedup_tol) {
            rejected += 1;
        }
    }
    let stats = PeriodStats {
        period: n,
        seeds: seeds.len(),
        orbits: store.len(),
        points_dividing: 0,
        expected_points: map.degree().pow(n as u32),
        rejected,
    };
    (store, stats)
}

/// Periodic orbits of exact period `1..=n_max`, deduplicated up to rotation.
pub fn find_periodic_orbits(map: &HenonMap, n_max: usize, cfg: &SearchConfig) -> SaddleCatalog {
    let mut by_period: BTreeMap<usize, Vec<PeriodicOrbit>> = BTreeMap::new();
    let mut stats = Vec::new();
    for n in 1..=n_max.max(1) {
        let (orbits, st) = match cfg.strategy {
            SearchStrategy::Homotopy => homotopy_period(map, n, cfg),
            SearchStrategy::NewtonGrid { grid } => {
                let known: Vec<PeriodicOrbit> = by_period.values().flatten().cloned().collect();
                grid_period(map, n, grid, &known, cfg)
            }
        };
        by_period.insert(n, orbits);
        stats.push(st);
    }
    let mut orbits: Vec<PeriodicOrbit> = by_period.into_values().flatten().collect();
    orbits.sort_by(|a, b| a.period.cmp(&b.period).then_with(|| lex_cmp(&a.points[0], &b.points[0])));
    let mut warnings = Vec::new();
    let mut complete = true;
    for st in stats.iter_mut() {
        st.points_dividing = orbits.iter().filter(|o| st.period % o.period == 0).map(|o| o.period).sum();
        if st.points_dividing != st.expected_points {
            complete = false;
            if cfg.count_check {
                warnings.push(format!(
                    "period {}: {} points with period dividing n, expected {}",
                    st.period, st.points_dividing, st.expected_points
                ));
            }
        }
    }
    let status = if orbits.is_empty() {
        warnings.push("no seed converged".into());
        CatalogStatus::Empty
    } else if complete && cfg.count_check {
        CatalogStatus::Complete
    } else {
        CatalogStatus::Partial
    };
    SaddleCatalog {
        map_digest: map_digest(map),
        orbits,
        metadata: SearchMetadata { n_max, config: *cfg, periods: stats },
        status,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horseshoe_fixed_points() {
        let map = HenonMap::quadratic(-6.0, 0.1);
        let cat = find_periodic_orbits(&map, 1, &SearchConfig::default());
        let mut xs: Vec<f64> = cat.orbits.iter().map(|o| o.points[0].x.re).collect();
        xs.sort_by(f64::total_cmp);
        let disc = (1.1f64 * 1.1 + 24.0).sqrt();
        assert!((xs[0] - (1.1 - disc) / 2.0).abs() < 1e-12);
        assert!((xs[1] - (1.1 + disc) / 2.0).abs() < 1e-12);
        for o in &cat.orbits {
            assert!(map.evaluate(&o.points[0]).dist_sup(&o.points[0]) < 1e-12);
        }
    }

    #[test]
    fn grid_and_homotopy_agree_on_low_periods() {
        let map = HenonMap::quadratic(-6.0, 0.1);
        let cfg = SearchConfig { strategy: SearchStrategy::NewtonGrid { grid: 33 }, ..Default::default() };
        let grid = find_periodic_orbits(&map, 3, &cfg);
        let hom = find_periodic_orbits(&map, 3, &SearchConfig::default());
        for o in &grid.orbits {
            assert!(hom.orbits.iter().any(|h| h.is_rotation_of(o, 1e-8)));
        }
    }
}
