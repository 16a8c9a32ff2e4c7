use motherbody::quaddiff::*;
use motherbody::{Poly, C64};

fn theta(p: &[f64], q: &[f64], r: &[f64]) -> QuadraticDifferential {
    build_theta(&Poly::from_real(p), &Poly::from_real(q), &Poly::from_real(r)).unwrap()
}

/// Ψ = −(z² − c²)/((z² − w²)(z² − w̄²)) with w = 1 + i: two zeros on the
/// real axis and four simple poles, symmetric under z ↦ −z and z ↦ z̄.
fn theta_graph() -> QuadraticDifferential {
    let w = C64::new(1.0, 1.0);
    let w2 = w * w;
    let p = Poly::from_c64(&[-w2, C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
        .mul(&Poly::from_c64(&[-w2.conj(), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]));
    let r = Poly::from_real(&[0.25, 0.0, -1.0]);
    build_theta(&p.chop(1e-15), &Poly::zero(), &r).unwrap()
}

#[test]
fn semicircle_dk0() {
    let qd = theta(&[1.0], &[0.0, -1.0], &[1.0]);
    let g = build_dk0(&qd, BuildOptions::default()).unwrap();
    assert_eq!(g.graph.vertices.len(), 2);
    assert_eq!(g.graph.edges.len(), 1);
    assert_eq!(g.d, 1);
    assert!(spans_all_branch_points(&g, &qd));
    assert_eq!(g.warnings.len(), 1);
}

#[test]
fn arcsine_strebel() {
    let qd = theta(&[-1.0, 0.0, 1.0], &[], &[-1.0]);
    let rep = strebel_surrogate(&qd, BuildOptions::default()).unwrap();
    assert!(rep.is_strebel());
    let g = rep.graph.unwrap();
    assert_eq!(g.graph.edges.len(), 1);
    assert_eq!(g.d, 1);
}

#[test]
fn theta_graph_has_three_regions() {
    let qd = theta_graph();
    let rep = strebel_surrogate(&qd, BuildOptions::default()).unwrap();
    let g = rep.graph.as_ref().unwrap();
    assert!(rep.is_strebel());
    assert_eq!(g.d, 3);
}

#[test]
fn escaping_zero_is_not_spanned() {
    // φ = −z²: the double zero at 0 sends all four trajectories to ∞.
    let qd = theta(&[1.0], &[0.0, -1.0], &[]);
    let g = build_dk0(&qd, BuildOptions::default()).unwrap();
    assert!(g.graph.edges.is_empty());
    assert!(!spans_all_branch_points(&g, &qd));
}

#[test]
fn third_order_pole_fails_gate() {
    let qd = theta(&[0.0, 0.0, 0.0, 1.0], &[], &[1.0]);
    let rep = strebel_surrogate(&qd, BuildOptions::default()).unwrap();
    assert_eq!(rep.verdict, StrebelVerdict::PoleGate);
    assert!(rep.graph.is_none());
}

#[test]
fn circles_around_double_pole_are_strebel() {
    let qd = theta(&[0.0, 0.0, 1.0], &[], &[-0.25]);
    let rep = strebel_surrogate(&qd, BuildOptions::default()).unwrap();
    assert!(rep.is_strebel());
    let g = rep.graph.unwrap();
    assert_eq!(g.graph.vertices.len(), 1);
    assert!(g.graph.edges.is_empty());
    assert_eq!(g.d, 1);
}

#[test]
fn phi_of_semicircle_has_three_directions_per_zero() {
    let qd = theta(&[1.0], &[0.0, -1.0], &[1.0]);
    let pts = singular_points(&qd).unwrap();
    assert_eq!(pts.len(), 2);
    for p in &pts {
        assert!(p.is_zero());
        assert_eq!(p.directions.len(), 3);
    }
    assert_eq!(qd.phi(C64::new(1.0, 0.0)), C64::new(3.0, 0.0));
}
