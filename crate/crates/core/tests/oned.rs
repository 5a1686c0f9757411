use qxlab_core::certify::{check_lower_bound, CertifyParams, Verdict};
use qxlab_core::oned::*;
use qxlab_core::{c64, C64};

fn chebyshev() -> Polynomial1D {
    Polynomial1D::quadratic(c64(-2.0, 0.0))
}

#[test]
fn chebyshev_cycle_counts_and_multipliers() {
    let g = chebyshev();
    let cat = find_cycles(&g, 8);
    for n in 1..=8 {
        assert_eq!(cat.points_dividing[n - 1], 1 << n, "n = {n}");
    }
    for c in &cat.cycles {
        assert!(c.is_repelling());
        // z = 2 cos(theta): (g^n)' = 2^n sin(2^n theta) / sin(theta)
        let z = c.points[0];
        assert!(z.im.abs() < 1e-12);
        let th = (z.re / 2.0).clamp(-1.0, 1.0).acos();
        let expected = if th.abs() < 1e-9 {
            4f64.powi(c.period as i32)
        } else {
            let n = c.period as i32;
            (2f64.powi(n) * (2f64.powi(n) * th).sin() / th.sin()).abs()
        };
        assert!((c.multiplier.norm() - expected).abs() < 1e-8 * expected, "{c:?}");
    }
}

#[test]
fn unit_circle_cycles_of_z_squared() {
    let g = Polynomial1D::quadratic(c64(0.0, 0.0));
    for c in repelling_cycles(&g, 5) {
        for z in &c.points {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        assert!((c.multiplier.norm() - 2f64.powi(c.period as i32)).abs() < 1e-9 * 2f64.powi(c.period as i32));
    }
}

#[test]
fn chebyshev_fixed_point_series() {
    let g = chebyshev();
    let c = repelling_cycles(&g, 1).into_iter().find(|c| (c.points[0].re - 2.0).abs() < 1e-12).unwrap();
    let lin = linearizer_1d(&g, &c, 20).unwrap();
    // phi(w) = 2 cosh(sqrt(w)) = 2 + w + w^2/12 + w^3/360 + ...
    let expected = [1.0, 1.0 / 12.0, 1.0 / 360.0, 1.0 / 20160.0];
    for (k, e) in expected.iter().enumerate() {
        assert!((lin.coeffs[k] - c64(*e, 0.0)).norm() < 1e-10, "k = {}", k + 1);
    }
}

#[test]
fn recursion_agrees_with_direct_limit() {
    let g = chebyshev();
    for c in repelling_cycles(&g, 6) {
        let lin = linearizer_1d(&g, &c, 40).unwrap();
        let r = lin.valid_radius / 2.0;
        for i in 0..16 {
            let w = C64::from_polar(r * (1 + i % 4) as f64 / 4.0, 0.39 * i as f64);
            let a = lin.eval(w);
            let b = direct_limit(&g, &c, w);
            assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()), "period {} w {w}: {a} vs {b}", c.period);
        }
    }
}

#[test]
fn chebyshev_steps_are_two_except_at_the_fixed_point() {
    let g = chebyshev();
    let cfg = CertifyParams::default();
    for c in repelling_cycles(&g, 5) {
        let st = cycle_steps(&g, &c, 40, 1.0, &[1.0], &cfg.mconfig).unwrap();
        let expected = if c.period == 1 && (c.points[0].re - 2.0).abs() < 1e-9 { 4.0 } else { 2.0 };
        for s in &st.steps {
            assert!((s.norm() - expected).abs() < 1e-6, "period {}: {}", c.period, s.norm());
        }
        let lam = c.multiplier.norm();
        assert!((st.product_modulus() - lam).abs() < 1e-10 * lam);
    }
}

#[test]
fn step_product_equals_multiplier_off_the_real_line() {
    let g = Polynomial1D::quadratic(c64(0.0, 1.0));
    let cfg = CertifyParams::default();
    for c in repelling_cycles(&g, 4) {
        let st = cycle_steps(&g, &c, 40, 1.0, &[0.5, 1.0], &cfg.mconfig).unwrap();
        let prod = st.steps.iter().fold(c64(1.0, 0.0), |a, s| a * s);
        assert!((prod - c.multiplier).norm() < 1e-9 * c.multiplier.norm());
        for m in &st.m_values {
            assert!((m[1] - 1.0).abs() < 1e-8);
            assert!(m[0] < m[1]);
        }
    }
}

#[test]
fn misiurewicz_orbit_of_z_squared_plus_i() {
    // 0 -> i -> i - 1 -> -i -> i - 1
    let g = Polynomial1D::quadratic(c64(0.0, 1.0));
    let mut z = c64(0.0, 0.0);
    let expected = [c64(0.0, 1.0), c64(-1.0, 1.0), c64(0.0, -1.0), c64(-1.0, 1.0), c64(0.0, -1.0)];
    for e in expected {
        z = g.eval(z);
        assert!((z - e).norm() < 1e-15);
    }
    let v = semi_hyperbolic_verdict(&g, &SemiHypConfig::default());
    assert_eq!(v.verdict, Answer::Yes, "{}", v.rationale);
    assert!(!v.parabolic_found);
}

#[test]
fn parabolic_map_is_not_semi_hyperbolic() {
    let g = Polynomial1D::quadratic(c64(0.25, 0.0));
    let v = semi_hyperbolic_verdict(&g, &SemiHypConfig::default());
    assert_eq!(v.verdict, Answer::No);
    assert!(v.parabolic_found);
    assert_eq!(v.parabolic_witness.unwrap().period, 1);
}

#[test]
fn chebyshev_certificate_passes_with_kappa_two() {
    let g = chebyshev();
    let cycles = sample_cycles(&g, 6, &[16]);
    let cert = certify_1d(&g, &cycles, &CertifyParams::default());
    assert_eq!(cert.verdict, Verdict::Pass, "{:?}", cert.conditions);
    assert!(cert.exclusions.is_empty());
    assert!((cert.kappa.unwrap() - 2.0).abs() < 1e-6);
    assert!(cert.max_product_error() < 1e-9);
    assert_eq!(check_lower_bound(&cert, None).unwrap().verdict, Verdict::Pass);
}

#[test]
fn long_shadow_cycles_stay_near_their_fixed_point() {
    let g = Polynomial1D::quadratic(c64(0.0, 1.0));
    let shadows = shadow_cycles(&g, &[32]);
    assert!(!shadows.is_empty());
    for c in &shadows {
        assert_eq!(c.period, 32);
        assert!(c.residual < 1e-8);
        assert!(c.is_repelling());
    }
}

#[test]
fn effective_order_is_capped_for_strong_expansion() {
    assert_eq!(effective_order(40, 2.0), 40);
    assert_eq!(effective_order(40, 1e50), 5);
    assert_eq!(effective_order(40, 1e300), 2);
}
