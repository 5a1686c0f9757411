use qxlab_core::certify::*;
use qxlab_core::saddles::{find_periodic_orbits, SaddleCatalog, SearchConfig};
use qxlab_core::Henon;
use std::sync::OnceLock;

fn horseshoe() -> Henon {
    Henon::quadratic(-6.0, 0.1)
}

fn fixture() -> &'static (SaddleCatalog, Certificate) {
    static F: OnceLock<(SaddleCatalog, Certificate)> = OnceLock::new();
    F.get_or_init(|| {
        let map = horseshoe();
        let cat = find_periodic_orbits(&map, 4, &SearchConfig::default());
        let cert = certify_theorem12(&map, &cat, &CertifyParams::default());
        (cat, cert)
    })
}

#[test]
fn cone_field_oracle_agrees_with_pass() {
    // Df(u, v) = (2x u - a v, u) maps {|v| <= |u|} into itself and expands
    // |u| by at least 2|x| - a, so 2|x| - a > 1 on the sample means hyperbolic
    let (cat, cert) = fixture();
    for o in &cat.orbits {
        for q in &o.points {
            assert!(2.0 * q.x.norm() - 0.1 > 1.0);
        }
    }
    assert_eq!(cert.verdict, Verdict::Pass, "{:?}", cert.conditions);
    assert!(cert.kappa.unwrap() > 1.0);
    assert!(cert.exclusions.is_empty());
    assert_eq!(cert.sample_size, cat.orbits.iter().map(|o| o.period).sum::<usize>());
}

#[test]
fn every_condition_holds_on_the_horseshoe() {
    let (_, cert) = fixture();
    let c = &cert.conditions;
    for r in [&c.c1, &c.c2, &c.c3, &c.c4, &c.c5] {
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.evidence);
    }
    assert!(cert.max_product_error() < 1e-6);
    assert!(cert.max_law_residual().unwrap() < 1e-5);
}

#[test]
fn stored_constants_replay() {
    let (_, cert) = fixture();
    let kappa = cert.kappa.unwrap();
    let beta = 2f64.ln() / kappa.ln();
    assert!((cert.beta.unwrap() - beta).abs() < 1e-12);
    assert!((cert.c.unwrap() - cert.t * 2.0).abs() < 1e-9);
    assert!(replay_upper_bound(cert).unwrap().is_empty());
    let min_step = cert.points().map(|(_, _, p)| p.step).fold(f64::INFINITY, f64::min);
    assert_eq!(min_step, kappa);
}

#[test]
fn lower_bound_passes_and_is_sensitive_to_kappa() {
    let (_, cert) = fixture();
    let lb = check_lower_bound(cert, None).unwrap();
    assert_eq!(lb.verdict, Verdict::Pass);
    assert!(lb.violations.is_empty());
    assert!(lb.checked > 0);
    assert_eq!(lb.c, 2.0);
    let inflated = check_lower_bound(cert, Some(10.0 * cert.kappa.unwrap())).unwrap();
    assert_eq!(inflated.verdict, Verdict::Fail);
    assert!(!inflated.violations.is_empty());
}

#[test]
fn normalization_pins_m_at_one() {
    let (_, cert) = fixture();
    let i = cert.radii.iter().position(|r| *r == 1.0).unwrap();
    for (_, _, p) in cert.points() {
        assert!((p.m[i] - 1.0).abs() < 1e-8);
        assert!(p.m.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }
}

#[test]
fn lyapunov_exponents_dominate_log_kappa() {
    let (cat, cert) = fixture();
    let rep = lyapunov_estimate(cat, cert.kappa, 1e-9);
    assert_eq!(rep.verdict, Some(Verdict::Pass));
    let fixed = rep.exponents.iter().filter(|e| e.0 == 1).map(|e| e.1).fold(0.0, f64::max);
    assert!((fixed - 6.1046f64.ln()).abs() < 1e-4);
}

#[test]
fn empty_sample_is_insufficient() {
    let map = horseshoe();
    let mut cat = find_periodic_orbits(&map, 1, &SearchConfig::default());
    cat.orbits.clear();
    let cert = certify_theorem12(&map, &cat, &CertifyParams::default());
    assert_eq!(cert.verdict, Verdict::InsufficientSample);
    assert_eq!(cert.kappa, None);
}

#[test]
fn certificate_json_round_trip() {
    let (_, cert) = fixture();
    let json = cert.to_json().unwrap();
    assert_eq!(&Certificate::from_json(&json).unwrap(), cert);
    assert!(json.contains("\"verdict\": \"PASS\""));
    assert!(json.contains("finite-sample"));
}

#[test]
fn certification_is_deterministic() {
    let map = horseshoe();
    let cat = find_periodic_orbits(&map, 3, &SearchConfig::default());
    let a = certify_theorem12(&map, &cat, &CertifyParams::default()).to_json().unwrap();
    let b = certify_theorem12(&map, &cat, &CertifyParams::default()).to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn power_law_fit_recovers_exponent() {
    let rs = [0.5, 1.0, 2.0, 4.0];
    let ys: Vec<f64> = rs.iter().map(|r: &f64| 3.0 * r.powf(0.7)).collect();
    let (c, m) = power_law_fit(&rs, &ys).unwrap();
    assert!((c - 3.0).abs() < 1e-12 && (m - 0.7).abs() < 1e-12);
}
