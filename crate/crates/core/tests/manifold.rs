use qxlab_core::certify::{certify_theorem12, CertifyParams};
use qxlab_core::manifold::*;
use qxlab_core::saddles::{find_periodic_orbits, SaddleCatalog, SearchConfig};
use qxlab_core::{c64, Henon, C64};
use std::sync::OnceLock;

fn fixture() -> &'static (Henon, SaddleCatalog) {
    static F: OnceLock<(Henon, SaddleCatalog)> = OnceLock::new();
    F.get_or_init(|| {
        let map = Henon::quadratic(-6.0, 0.1);
        let cat = find_periodic_orbits(&map, 4, &SearchConfig::default());
        (map, cat)
    })
}

fn radii() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[test]
fn functional_equation_residual_at_fresh_points() {
    let (map, cat) = fixture();
    for o in &cat.orbits {
        let p = linearize_unstable(map, o, 40).unwrap();
        assert!(p.residual_bound < 1e-8, "period {}: {:e}", o.period, p.residual_bound);
        let fresh = p.functional_residual(map, p.residual_radius(), 64, 12345);
        assert!(fresh <= 10.0 * p.residual_bound.max(1e-13), "{fresh:e} vs {:e}", p.residual_bound);
        let s = linearize_stable(map, o, 40).unwrap();
        let sr = s.functional_residual(map, s.residual_radius(), 64, 99);
        assert!(sr <= 10.0 * s.residual_bound.max(1e-13), "stable period {}: {sr:e} bound {:e}", o.period, s.residual_bound);
    }
}

#[test]
fn fixed_point_residual_on_half_disk() {
    let (map, cat) = fixture();
    for o in cat.of_period(1) {
        let p = linearize_unstable(map, o, 40).unwrap();
        let (n, _) = normalize(&p, map, 1.0, &MConfig::default()).unwrap();
        // |zeta| <= 0.5 in the normalized coordinate
        let raw = 0.5 * n.scale;
        assert!(raw <= p.residual_radius());
        assert!(p.functional_residual(map, raw, 64, 3) < 1e-8);
    }
}

#[test]
fn m_function_shape_and_normalization() {
    let (map, cat) = fixture();
    let cfg = MConfig::default();
    for o in cat.orbits.iter().take(4) {
        let p = linearize_unstable(map, o, 40).unwrap();
        let (n, rec) = normalize(&p, map, 1.0, &cfg).unwrap();
        assert!((rec.achieved - 1.0).abs() < 1e-6);
        let mf = m_function(&n, map, &[1e-10, 0.25, 0.5, 0.75, 1.0], &cfg);
        assert!(mf.is_monotone());
        assert!(mf.values[0] < 1e-2);
        assert!((mf.values[4] - 1.0).abs() < 1e-6);
        // convex in log r
        let l: Vec<f64> = [0.25f64, 0.5, 1.0].iter().map(|r| r.ln()).collect();
        let v = m_function(&n, map, &[0.25, 0.5, 1.0], &cfg).values;
        assert!(v[1] <= v[0] + (v[2] - v[0]) * (l[1] - l[0]) / (l[2] - l[0]) + 1e-9);
    }
}

#[test]
fn normalization_is_idempotent_and_monotone_in_t() {
    let (map, cat) = fixture();
    let cfg = MConfig::default();
    let o = &cat.orbits[0];
    let p = linearize_unstable(map, o, 40).unwrap();
    let (n1, r1) = normalize(&p, map, 1.0, &cfg).unwrap();
    let (again, _) = normalize(&n1, map, 1.0, &cfg).unwrap();
    assert!((again.scale / n1.scale - 1.0).abs() < 1e-9);
    let (_, r2) = normalize(&p, map, 2.0, &cfg).unwrap();
    assert!(r2.scale > r1.scale);
}

#[test]
fn rotation_leaves_m_and_steps_unchanged() {
    let (map, cat) = fixture();
    let cfg = MConfig::default();
    let o = cat.of_period(2).next().unwrap();
    let ps = linearize_cycle(map, o, 40).unwrap();
    let ns: Vec<_> = ps.iter().map(|p| normalize(p, map, 1.0, &cfg).unwrap().0).collect();
    let rot = |p: &UnstableParametrization, th: f64| {
        let mut q = p.clone();
        for (k, c) in q.coeffs.iter_mut().enumerate() {
            let u = C64::from_polar(1.0, th * (k + 1) as f64);
            *c = [c[0] * u, c[1] * u];
        }
        q
    };
    let r = radii();
    let base = m_function(&ns[0], map, &r, &cfg).values;
    let turned = m_function(&rot(&ns[0], 0.7), map, &r, &cfg).values;
    for (a, b) in base.iter().zip(&turned) {
        assert!((a - b).abs() < 1e-10);
    }
    let s = step_multiplier(map, &ns[0], &ns[1], &cfg).unwrap();
    let st = step_multiplier(map, &rot(&ns[0], 0.7), &rot(&ns[1], -1.3), &cfg).unwrap();
    assert!((s.modulus - st.modulus).abs() < 1e-10 * s.modulus);
}

#[test]
fn step_multipliers_expand_and_multiply_to_the_eigenvalue() {
    let (map, cat) = fixture();
    let cfg = MConfig::default();
    for o in &cat.orbits {
        let ps = linearize_cycle(map, o, 40).unwrap();
        let ns: Vec<_> = ps.iter().map(|p| normalize(p, map, 1.0, &cfg).unwrap().0).collect();
        let mut prod = 1.0;
        let mut phase = c64(1.0, 0.0);
        for j in 0..o.period {
            let s = step_multiplier(map, &ns[j], &ns[(j + 1) % o.period], &cfg).unwrap();
            assert!(s.modulus > 1.0);
            prod *= s.modulus;
            phase *= s.value() / s.modulus;
            // transformation law d m_x(r) = m_fx(|lambda_x| r)
            let r = radii();
            let scaled: Vec<f64> = r.iter().map(|x| x * s.modulus).collect();
            let mx = m_function(&ns[j], map, &r[1..], &cfg).values;
            let mfx = m_function(&ns[(j + 1) % o.period], map, &scaled[1..], &cfg).values;
            for (a, b) in mx.iter().zip(&mfx) {
                assert!((2.0 * a - b).abs() < 1e-5);
            }
        }
        let lam = o.eig_unstable.norm();
        assert!((prod - lam).abs() < 1e-6 * lam);
        assert!((phase - o.eig_unstable / lam).norm() < 1e-4);
    }
}

#[test]
fn verdict_does_not_depend_on_t() {
    let (map, _) = fixture();
    let cat = find_periodic_orbits(map, 3, &SearchConfig::default());
    let a = certify_theorem12(map, &cat, &CertifyParams { t: 1.0, ..Default::default() });
    let b = certify_theorem12(map, &cat, &CertifyParams { t: 4.0, ..Default::default() });
    assert_eq!(a.verdict, b.verdict);
}

#[test]
fn parametrization_json_round_trip() {
    let (map, cat) = fixture();
    let p = linearize_unstable(map, &cat.orbits[0], 20).unwrap();
    let back: UnstableParametrization = serde_json::from_str(&p.to_json().unwrap()).unwrap();
    assert_eq!(back, p);
}
