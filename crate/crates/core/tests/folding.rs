use proptest::prelude::*;
use qxlab_core::folding::*;
use qxlab_core::manifold::{linearize_stable, linearize_unstable, normalize, MConfig};
use qxlab_core::saddles::{find_periodic_orbits, SearchConfig};
use qxlab_core::{c64, Henon, C64};

fn z() -> C64 {
    c64(0.0, 0.0)
}

fn one() -> C64 {
    c64(1.0, 0.0)
}

fn jet(pairs: &[(f64, f64)]) -> TaylorJet {
    TaylorJet::at_origin(pairs.iter().map(|&(a, b)| [c64(a, 0.0), c64(b, 0.0)]).collect())
}

const E1: [C64; 2] = [C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: 0.0 }];

#[test]
fn order_examples() {
    assert_eq!(order_of(&jet(&[(1.0, 0.0)]), ORDER_TOL), Order::Order(1));
    assert_eq!(order_of(&jet(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]), ORDER_TOL), Order::Order(2));
    assert_eq!(order_of(&jet(&[(0.0, 0.0), (0.0, 0.0)]), ORDER_TOL), Order::Degenerate);
    // below the relative tolerance counts as vanishing
    assert_eq!(order_of(&jet(&[(1e-9, 0.0), (1.0, 0.0)]), ORDER_TOL), Order::Order(2));
}

#[test]
fn degree_examples() {
    let d = projection_degree(&jet(&[(1.0, 0.0)]), E1, 0.5, ORDER_TOL).unwrap();
    assert_eq!(d.winding, 1);
    assert!((d.min_modulus - 0.5).abs() < 1e-12);
    let d = projection_degree(&jet(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]), E1, 0.5, ORDER_TOL).unwrap();
    assert_eq!(d.winding, 2);
    // |0.01 z^3| < |z^2| on |z| = r < 100, so Rouche gives degree 2
    let d = projection_degree(&jet(&[(0.0, 0.0), (1.0, 0.0), (0.01, 1.0)]), E1, 0.1, ORDER_TOL).unwrap();
    assert_eq!(d.winding, 2);
    // past the dominance radius the cubic term takes over
    let d = projection_degree(&jet(&[(0.0, 0.0), (1.0, 0.0), (0.01, 1.0)]), E1, 200.0, ORDER_TOL).unwrap();
    assert_eq!(d.winding, 3);
}

#[test]
fn degree_rejects_boundary_through_center() {
    // z + z^2 vanishes at z = -1
    let j = jet(&[(1.0, 0.0), (1.0, 0.0)]);
    assert!(projection_degree(&j, E1, 1.0, ORDER_TOL).is_err());
}

#[test]
fn degree_resolves_fast_winding_by_doubling() {
    let mut coeffs = vec![[z(), z()]; 2000];
    coeffs[1999] = [one(), z()];
    let d = projection_degree(&TaylorJet::at_origin(coeffs), E1, 1.0, ORDER_TOL).unwrap();
    assert_eq!(d.winding, 2000);
    assert!(d.samples > 1024);
}

#[test]
fn gamma_examples() {
    let g = gamma_k(&[jet(&[(1.0, 0.0)])], 1).unwrap();
    assert_eq!(g.gamma, 1.0);
    assert_eq!(g.metric_factor, Some(1.0));
    let g = gamma_k(&[jet(&[(0.0, 0.0), (2.0, 0.0)]), jet(&[(0.0, 0.0), (1.0, 0.0)])], 2).unwrap();
    assert_eq!(g.gamma, 2.0);
    assert_eq!(g.metric_factor, Some(0.5));
    let g = gamma_k(&[jet(&[(1.0, 0.0)])], 2).unwrap();
    assert!(g.stratum_mismatch);
    assert_eq!(g.metric_factor, None);
    assert!(gamma_k(&[], 1).is_err());
    let mut far = jet(&[(1.0, 0.0)]);
    far.base.x = c64(1.0, 0.0);
    assert!(gamma_k(&[jet(&[(1.0, 0.0)]), far], 1).is_err());
}

#[test]
fn tangency_examples() {
    let lx = jet(&[(1.0, 0.0)]);
    let ly = jet(&[(0.0, 1.0)]);
    assert_eq!(tangency_order(&lx, &ly, ORDER_TOL).unwrap().contact, Contact::Order(1));
    let w0 = jet(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    let w2 = jet(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]);
    let w23 = jet(&[(1.0, 0.0), (0.0, 1.0), (0.0, 1.0)]);
    let r = tangency_order(&w0, &w2, ORDER_TOL).unwrap();
    assert_eq!(r.contact, Contact::Order(2));
    assert_eq!(r.first_differing, Some(2));
    assert_eq!(tangency_order(&w2, &w23, ORDER_TOL).unwrap().contact, Contact::Order(3));
    let r = tangency_order(&w23, &w23, ORDER_TOL).unwrap();
    assert_eq!(r.contact, Contact::GermCoincidence);
    assert_eq!(r.first_differing, None);
}

#[test]
fn tangency_is_independent_of_parametrization() {
    // (z + z^2, z^2) is the graph w = x^2 - 2x^3 + ... over the x-axis
    let a = jet(&[(1.0, 0.0), (1.0, 1.0), (0.0, 0.0), (0.0, 0.0)]);
    let b = jet(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0), (0.0, 0.0)]);
    assert_eq!(tangency_order(&a, &b, ORDER_TOL).unwrap().contact, Contact::Order(3));
}

#[test]
fn cusp_jets_are_out_of_scope_for_contact() {
    let cusp = jet(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
    let line = jet(&[(1.0, 0.0)]);
    assert!(tangency_order(&cusp, &line, ORDER_TOL).is_err());
}

#[test]
fn horseshoe_saddles_are_order_one_and_transverse() {
    let map = Henon::quadratic(-6.0, 0.1);
    let cat = find_periodic_orbits(&map, 3, &SearchConfig::default());
    let cfg = MConfig::default();
    for o in &cat.orbits {
        let u = linearize_unstable(&map, o, 40).unwrap();
        let (un, _) = normalize(&u, &map, 1.0, &cfg).unwrap();
        let ju = TaylorJet::from_param(&un);
        assert_eq!(order_of(&ju, ORDER_TOL), Order::Order(1));
        let dir = tangent_direction(&ju, ORDER_TOL).unwrap();
        assert_eq!(projection_degree(&ju, dir, 1e-3, ORDER_TOL).unwrap().winding, 1);

        let g = gamma_k(std::slice::from_ref(&ju), 1).unwrap();
        let d = un.derivative(z());
        let sharp = 1.0 / (d[0].norm_sqr() + d[1].norm_sqr()).sqrt();
        assert!((g.metric_factor.unwrap() - sharp).abs() < 1e-9 * sharp);

        let s = linearize_stable(&map, o, 40).unwrap();
        let js = TaylorJet::new(s.base, s.coeffs.clone());
        assert_eq!(tangency_order(&ju, &js, ORDER_TOL).unwrap().contact, Contact::Order(1));
    }
}

#[test]
fn jets_round_trip_through_json() {
    let j = jet(&[(1.0, 0.5), (0.25, -0.125)]);
    let back: TaylorJet = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
    assert_eq!(back, j);
}

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c64(a, b))
}

proptest! {
    #[test]
    fn degree_invariant_under_rotation_and_halving(
        k in 1usize..4,
        lead in coeff(),
        rest in prop::collection::vec((coeff(), coeff()), 3),
        theta in 0.0..6.28f64,
    ) {
        prop_assume!(lead.norm() > 0.3);
        let mut coeffs = vec![[z(), z()]; k - 1];
        coeffs.push([lead, coeff_y(lead)]);
        coeffs.extend(rest.iter().map(|&(a, b)| [a * 0.1, b * 0.1]));
        let j = TaylorJet::at_origin(coeffs);
        let dir = tangent_direction(&j, ORDER_TOL).unwrap();
        let r = 0.05;
        let base = projection_degree(&j, dir, r, ORDER_TOL).unwrap().winding;
        prop_assert_eq!(base, k as i64);
        prop_assert_eq!(projection_degree(&j.rotated(theta), dir, r, ORDER_TOL).unwrap().winding, base);
        prop_assert_eq!(projection_degree(&j, dir, r / 2.0, ORDER_TOL).unwrap().winding, base);
        if let Order::Order(o) = order_of(&j, ORDER_TOL) {
            prop_assert_eq!(o as i64, base);
        }
    }

    #[test]
    fn tangency_is_symmetric(h1 in prop::collection::vec(coeff(), 4), h2 in prop::collection::vec(coeff(), 4), e in coeff()) {
        let graph = |h: &[C64]| {
            let mut c = vec![[one(), e]];
            c.extend(h.iter().map(|&w| [z(), w]));
            TaylorJet::at_origin(c)
        };
        let (a, b) = (graph(&h1), graph(&h2));
        let ab = tangency_order(&a, &b, ORDER_TOL).unwrap();
        let ba = tangency_order(&b, &a, ORDER_TOL).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn gamma_monotone_under_sample_growth(cs in prop::collection::vec((coeff(), coeff()), 1..6), k in 1usize..3) {
        let jets: Vec<TaylorJet> = cs.iter().map(|&(a, b)| TaylorJet::at_origin(vec![[a, b], [b, a]])).collect();
        let mut prev = 0.0;
        for n in 1..=jets.len() {
            let g = gamma_k(&jets[..n], k).unwrap().gamma;
            prop_assert!(g >= prev);
            prev = g;
        }
    }
}

fn coeff_y(lead: C64) -> C64 {
    lead * c64(0.5, 0.25)
}
