use motherbody::branch::rational_motherbody;
use motherbody::mother::*;
use motherbody::quaddiff::*;
use motherbody::verify::*;
use motherbody::{BiPoly64, Poly, C64};

fn c(x: f64, y: f64) -> C64 {
    C64::new(x, y)
}

fn arcsine() -> (QuadraticDifferential, CandidateReport) {
    let qd = build_theta(&Poly::from_real(&[-1.0, 0.0, 1.0]), &Poly::zero(), &Poly::from_real(&[-1.0])).unwrap();
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    (qd, rep)
}

#[test]
fn arcsine_moments_and_potential() {
    let (_, rep) = arcsine();
    let mu = &rep.candidates[0].measure;
    let m = moments(mu, 2);
    assert!((m[2].re - 0.5).abs() < 1e-6, "{}", m[2]);
    let want = (2.0 + 3f64.sqrt()).ln() - 2f64.ln();
    assert!((log_potential(mu, c(2.0, 0.0)).unwrap() - want).abs() < 1e-6);
    assert!((m[0].re - mu.total_mass).abs() < 1e-10);
}

#[test]
fn arcsine_branch_comparison() {
    let (qd, rep) = arcsine();
    let mu = &rep.candidates[0].measure;
    let eq = Equation::Triple { p: qd.p.clone(), q: qd.q.clone(), r: qd.r.clone() };
    let pts = sample_points(mu, 100, DEFAULT_SEED, 5.0);
    let g = &rep.graph.graph;
    let s = Section::new(&qd, g, rep.candidates[0].flips.clone()).unwrap();
    let good = compare_branch(mu, &eq, &pts, Some(&|z| s.value(z)));
    assert!(good.max_abs_error <= 1e-4, "{}", good.max_abs_error);
    assert_eq!(good.branch_mismatches, 0);
    let bad = compare_branch(mu, &eq, &pts, Some(&|z| s.other(z)));
    assert!(bad.branch_mismatches > 0);
    assert!(bad.max_equation_residual < 1e-6);
}

#[test]
fn atoms_against_linear_equation() {
    let mu = rational_motherbody(&Poly::from_real(&[1.0, 3.0]), &Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
    // (z² − 1)𝒞 − (3z + 1) = 0
    let eq = Equation::Bivariate(BiPoly64::from_int_terms(&[(1, 2, 1), (1, 0, -1), (0, 1, -3), (0, 0, -1)]));
    let pts = sample_points(&mu, 100, DEFAULT_SEED, 5.0);
    let f = |z: C64| (3.0 * z + 1.0) / (z * z - 1.0);
    let rep = compare_branch(&mu, &eq, &pts, Some(&f));
    assert!(rep.max_abs_error <= 1e-10, "{}", rep.max_abs_error);
}

#[test]
fn two_pole_level_curve() {
    // 1/(z − 1) + 1/(z + 1) = 2z/(z² − 1)
    let num = Poly::from_real(&[0.0, 2.0]);
    let den = Poly::from_real(&[-1.0, 0.0, 1.0]);
    let lc = level_curve_measure(&num, &den, 3.0).unwrap();
    assert!((lc.measure.total_mass - 2.0).abs() < 1e-6);
    for z in [c(8.0, 0.0), c(0.0, 9.0), c(-6.0, 6.0)] {
        let got = cauchy_quadrature(&lc.measure, z).unwrap();
        assert!((got - 2.0 * z / (z * z - 1.0)).norm() < 1e-6, "{z} {got}");
    }
    assert!(lc.interior_max < 1e-6);
}

#[test]
fn level_curve_needs_large_level() {
    let num = Poly::from_real(&[0.0, 2.0]);
    let den = Poly::from_real(&[-1.0, 0.0, 1.0]);
    assert!(level_curve_measure(&num, &den, -3.0).is_err());
}

#[test]
fn jump_check_detects_offset_arc() {
    let qd = build_theta(&Poly::from_real(&[1.0]), &Poly::from_real(&[0.0, -1.0]), &Poly::from_real(&[1.0])).unwrap();
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    let mu = &rep.candidates[0].measure;
    assert!(jump_density_check(mu, &qd) < 1e-6);
    let mut moved = mu.clone();
    for arc in &mut moved.arcs {
        for z in &mut arc.nodes {
            z.im += 1e-2 * (1.0 + z.re);
        }
        arc.tangents.clear();
    }
    assert!(jump_density_check(&moved, &qd) > 1e-4);
}

#[test]
fn large_z_expansion() {
    let (_, rep) = arcsine();
    for cand in &rep.candidates {
        assert!(expansion_error(&cand.measure, c(1e3, 0.0), 6).unwrap() < 1e-8);
    }
}
