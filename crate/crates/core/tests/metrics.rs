use proptest::prelude::*;
use qxlab_core::geometry::{normalized_cycle_with_steps, NormalizedCycle};
use qxlab_core::green::{GreenConfig, GreenEstimate, GreenStatus};
use qxlab_core::manifold::{GreenProfile, MConfig};
use qxlab_core::metrics::*;
use qxlab_core::saddles::{find_periodic_orbits, SearchConfig};
use qxlab_core::{c64, Henon, C64};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// `G(w) = |w|^2 / s^2`, whose sublevel set `{G < L}` is the disk of radius `s sqrt L`.
struct Disk(f64);

impl GreenProfile for Disk {
    fn degree(&self) -> usize {
        2
    }
    fn green_raw(&self, w: C64, _: &GreenConfig) -> GreenEstimate {
        GreenEstimate { value: w.norm_sqr() / (self.0 * self.0), error_bound: 0.0, iterations_used: 0, status: GreenStatus::Escaped }
    }
    fn growth(&self) -> (f64, f64) {
        (2f64.sqrt(), 2.0)
    }
    fn reference_radius(&self) -> f64 {
        self.0
    }
}

fn horseshoe() -> &'static (Henon, Vec<NormalizedCycle>) {
    static F: OnceLock<(Henon, Vec<NormalizedCycle>)> = OnceLock::new();
    F.get_or_init(|| {
        let map = Henon::quadratic(-6.0, 0.1);
        let cat = find_periodic_orbits(&map, 3, &SearchConfig::default());
        let cycles = cat.orbits.iter().map(|o| normalized_cycle_with_steps(&map, o, 40, 1.0, &MConfig::default()).unwrap()).collect();
        (map, cycles)
    })
}

#[test]
fn unit_disk_domain() {
    let m = metric_interval(&Disk(1.0), 1.0, 1.0, &MetricConfig::default()).unwrap();
    assert!((m.inradius - 1.0).abs() < 1e-7);
    assert!(m.interval().contains(1.0));
    assert!((m.lower - 0.25).abs() < 1e-7 && (m.upper - 1.0).abs() < 1e-7);
    assert!(m.koebe_ok() && m.sweep_ok);
}

#[test]
fn larger_level_gives_smaller_density() {
    let cfg = MetricConfig::default();
    let a = metric_interval(&Disk(1.0), 1.0, 1.0, &cfg).unwrap();
    let b = metric_interval(&Disk(1.0), 1.0, 4.0, &cfg).unwrap();
    assert!(b.inradius > a.inradius);
    assert!(b.upper < a.upper && b.lower < a.lower);
    let (map, cycles) = horseshoe();
    let p = &cycles[0].params[0];
    let a = metric_l_interval(p, map, 1.0, &cfg).unwrap();
    let b = metric_l_interval(p, map, 2.0, &cfg).unwrap();
    assert!(b.inradius >= a.inradius);
}

#[test]
fn unnormalized_parametrization_is_rejected() {
    let (map, cycles) = horseshoe();
    let mut p = cycles[0].params[0].clone();
    p.normalized = false;
    assert!(metric_l_interval(&p, map, 1.0, &MetricConfig::default()).is_err());
}

#[test]
fn koebe_comparison_at_every_saddle_point() {
    // (1/4) ||.||^# <= ||.||^(1) <= ||.||^# with ||.||^# = |.| in normalized coordinates
    let (map, cycles) = horseshoe();
    let cfg = MetricConfig::default();
    let sharp = Interval::new(0.25, 1.0);
    for c in cycles {
        for (j, p) in c.params.iter().enumerate() {
            let m = metric_l_interval(p, map, 1.0, &cfg).unwrap();
            assert!(m.koebe_ok());
            assert!(m.interval().within(&sharp, 1e-6), "{m:?}");
            // ||v||^(L) at x equals ||Df v||^(dL) at fx
            let n = c.params.len();
            let next = metric_l_interval(&c.params[(j + 1) % n], map, 2.0, &cfg).unwrap();
            let lam = c.steps[j].norm();
            assert!(m.interval().overlaps(&next.interval().scale(lam)));
        }
    }
}

#[test]
fn sharp_cocycle_is_log_step() {
    let (map, cycles) = horseshoe();
    let cfg = MetricConfig::default();
    for c in cycles {
        let n = c.params.len();
        let s = cocycle_series(map, c, MetricFamily::Sharp, 2 * n, &cfg);
        assert!(!s.truncated);
        for (k, v) in s.values.iter().enumerate() {
            assert_eq!(v.lo, v.hi);
            assert!((v.lo - c.steps[k % n].norm().ln()).abs() < 1e-15);
            assert!(v.lo > 0.0);
        }
        assert!(s.max_abs().is_finite());
        // over a full period the cocycle is the Lyapunov sum
        let total = s.partial(0, n).lo;
        let lam: f64 = c.steps.iter().map(|z| z.norm().ln()).sum();
        assert!((total - lam).abs() < 1e-12);
    }
}

#[test]
fn coboundary_identities() {
    let (map, cycles) = horseshoe();
    let cfg = MetricConfig::default();
    let c = &cycles[2];
    let n = c.params.len();
    let sharp = cocycle_series(map, c, MetricFamily::Sharp, 2 * n, &cfg);
    assert_eq!(coboundary_residual(&sharp, &sharp).unwrap(), 0.0);
    let scaled = cocycle_series(map, c, MetricFamily::Scaled(3.7), 2 * n, &cfg);
    assert!(coboundary_residual(&scaled, &sharp).unwrap() < 1e-10);
    let level = cocycle_series(map, c, MetricFamily::Level(1.0), 2 * n, &cfg);
    assert_eq!(coboundary_residual(&sharp, &level).unwrap(), 0.0);
}

#[test]
fn level_cocycle_respects_the_entropy_bound() {
    // the interval for c^(L)(x,1) reaches log d, up to the factor-4 Koebe slack
    let (map, cycles) = horseshoe();
    let cfg = MetricConfig::default();
    for c in cycles {
        let s = cocycle_series(map, c, MetricFamily::Level(1.0), c.params.len(), &cfg);
        for v in &s.values {
            assert!(v.hi >= 2f64.ln() - 1e-9);
            assert!(v.lo >= 2f64.ln() - 2.0 * 4f64.ln());
        }
    }
}

#[test]
fn strip_maps() {
    let s = StripMap::new(2, false);
    assert!((s.phi_prime0 - 4.0 / PI).abs() < 1e-12);
    assert!((s.rho_prime0 - 0.5).abs() < 1e-10);
    let h = StripMap::new(2, true);
    assert!((h.rho_prime0 - 0.25).abs() < 1e-10);
    for &z in &[c64(0.3, 0.1), c64(-0.5, 0.4)] {
        assert!((strip_phi_inv(strip_phi(z)) - z).norm() < 1e-14);
        assert!((half_line_phi_inv(half_line_phi(z)) - z).norm() < 1e-12);
    }
    // the strip is the image of the disk
    assert!((strip_phi(c64(0.0, 0.999999)).im - 1.0).abs() < 1e-5);
}

#[test]
fn strip_bound_on_the_real_horseshoe() {
    let (map, cycles) = horseshoe();
    let p = cycles.iter().flat_map(|c| &c.params).find(|p| real_symmetry_defect(p) <= 1e-10).unwrap();
    let line = strip_cocycle_bound(map, p, 1.0, false).unwrap();
    let half = strip_cocycle_bound(map, p, 1.0, true).unwrap();
    assert_eq!(line.bound, 2f64.ln());
    assert_eq!(half.bound, 2.0 * line.bound);
    let complex = Henon::new(vec![c64(-6.0, 0.1), c64(0.0, 0.0), c64(1.0, 0.0)], c64(0.1, 0.0)).unwrap();
    assert!(strip_cocycle_bound(&complex, p, 1.0, false).is_err());
}

proptest! {
    #[test]
    fn telescoping(vals in prop::collection::vec(-3.0..3.0f64, 4..12), n in 0usize..4, m in 0usize..4) {
        let len = vals.len();
        prop_assume!(n + m <= len);
        let s = CocycleSample {
            family: MetricFamily::Sharp,
            indices: (0..len).collect(),
            values: vals.iter().map(|v| Interval::new(*v, v + 0.5)).collect(),
            log_density: vec![Interval::point(0.0); len],
            truncated: false,
        };
        let whole = s.partial(0, n + m);
        let split = s.partial(0, n).add(s.partial(n, m));
        prop_assert!((whole.lo - split.lo).abs() < 1e-12 && (whole.hi - split.hi).abs() < 1e-12);
    }

    #[test]
    fn koebe_sandwich_on_scaled_disks(s in 0.05..20.0f64, level in 0.1..5.0f64) {
        let m = metric_interval(&Disk(s), 1.0, level, &MetricConfig::default()).unwrap();
        prop_assert!(m.koebe_ok());
        prop_assert!((m.inradius - s * level.sqrt()).abs() < 1e-7);
    }
}
