use qxlab_core::saddles::{classify, find_periodic_orbits, CatalogStatus, Classification, SearchConfig};
use qxlab_core::{c64, Henon};

fn horseshoe() -> Henon {
    Henon::quadratic(-6.0, 0.1)
}

#[test]
fn horseshoe_counts_up_to_period_eight() {
    let map = horseshoe();
    let cat = find_periodic_orbits(&map, 8, &SearchConfig::default());
    assert_eq!(cat.status, CatalogStatus::Complete, "{:?}", cat.warnings);
    for n in 1..=8 {
        assert_eq!(cat.points_dividing(n), 1 << n, "n = {n}");
    }
    for o in &cat.orbits {
        assert_eq!(o.classification, Some(Classification::Saddle));
        let det = (o.eig_unstable * o.eig_stable).norm();
        assert!((det - 0.1f64.powi(o.period as i32)).abs() < 1e-8);
        assert!(o.residual < 1e-10);
    }
}

#[test]
fn fixed_point_eigenvalues_match_closed_form() {
    let map = horseshoe();
    let cat = find_periodic_orbits(&map, 1, &SearchConfig::default());
    let o = cat.orbits.iter().find(|o| o.points[0].x.re > 0.0).unwrap();
    let x = o.points[0].x.re;
    let lam = x + (x * x - 0.1).sqrt();
    assert!((o.eig_unstable - c64(lam, 0.0)).norm() < 1e-10);
    assert!((o.eig_unstable.re - 6.1046).abs() < 1e-4);
    assert!((o.eig_stable.re - 0.01638).abs() < 1e-5);
}

#[test]
fn rotation_leaves_eigenvalue_moduli_unchanged() {
    let map = horseshoe();
    let cat = find_periodic_orbits(&map, 5, &SearchConfig::default());
    for o in cat.of_period(5) {
        for k in 1..5 {
            let r = classify(&map, &o.rotated(k));
            assert!((r.eig_unstable.norm() - o.eig_unstable.norm()).abs() < 1e-10 * o.eig_unstable.norm());
            assert!((r.eig_stable.norm() - o.eig_stable.norm()).abs() < 1e-10);
        }
    }
}

#[test]
fn small_jacobian_limit_recovers_one_dimensional_multipliers() {
    // as a -> 0 the unstable eigenvalue tends to prod p'(x_i)
    let map = Henon::quadratic(-6.0, 1e-9);
    let cat = find_periodic_orbits(&map, 3, &SearchConfig::default());
    for o in &cat.orbits {
        let prod = o.points.iter().fold(c64(1.0, 0.0), |m, q| m * q.x * 2.0);
        assert!((o.eig_unstable - prod).norm() < 1e-6 * prod.norm());
    }
}

#[test]
fn catalog_json_roundtrip() {
    let map = horseshoe();
    let cat = find_periodic_orbits(&map, 3, &SearchConfig::default());
    let back = qxlab_core::saddles::SaddleCatalog::from_json(&cat.to_json().unwrap()).unwrap();
    assert_eq!(cat, back);
    assert!(back.matches(&map, 3));
    assert!(!back.matches(&map, 4));
}
