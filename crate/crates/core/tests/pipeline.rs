use motherbody::mother::*;
use motherbody::quaddiff::*;
use motherbody::verify::*;
use motherbody::{Poly, C64};

fn theta(p: &[f64], q: &[f64], r: &[f64]) -> QuadraticDifferential {
    build_theta(&Poly::from_real(p), &Poly::from_real(q), &Poly::from_real(r)).unwrap()
}

fn c(x: f64, y: f64) -> C64 {
    C64::new(x, y)
}

#[test]
fn semicircle_single_candidate() {
    let qd = theta(&[1.0], &[0.0, -1.0], &[1.0]);
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    assert!(rep.spans_all);
    assert_eq!(rep.candidates.len(), 1);
    let mu = &rep.candidates[0].measure;
    assert!(rep.candidates[0].positive);
    assert!((mu.total_mass - 1.0).abs() < 1e-8, "{}", mu.total_mass);
    // Density against √(4 − x²)/(2π) at the nodes.
    for arc in &mu.arcs {
        for (z, d) in arc.nodes.iter().zip(&arc.density) {
            let want = (4.0 - z.re * z.re).max(0.0).sqrt() / (2.0 * std::f64::consts::PI);
            assert!((d - want).abs() < 1e-8, "{z} {d} {want}");
        }
    }
    let m = moments(mu, 4);
    for (k, want) in [1.0, 0.0, 1.0, 0.0, 2.0].iter().enumerate() {
        assert!((m[k].re - want).abs() < 1e-8 && m[k].im.abs() < 1e-8, "m{k} = {}", m[k]);
    }
    let got = cauchy_quadrature(mu, c(3.0, 0.0)).unwrap();
    assert!((got - c((3.0 - 5f64.sqrt()) / 2.0, 0.0)).norm() < 1e-8, "{got}");
    assert!(jump_density_check(mu, &qd) < 1e-6);
}

#[test]
fn semicircle_matches_branch() {
    let qd = theta(&[1.0], &[0.0, -1.0], &[1.0]);
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    let mu = &rep.candidates[0].measure;
    let eq = Equation::Triple { p: qd.p.clone(), q: qd.q.clone(), r: qd.r.clone() };
    let pts = sample_points(mu, 200, DEFAULT_SEED, 5.0);
    let rep = compare_branch(mu, &eq, &pts, None);
    assert!(rep.max_abs_error < 1e-6, "{}", rep.max_abs_error);
}

#[test]
fn arcsine_single_measure() {
    let qd = theta(&[-1.0, 0.0, 1.0], &[], &[-1.0]);
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    assert_eq!(rep.graph.d, 1);
    assert_eq!(rep.candidates.len(), 1);
    let mu = &rep.candidates[0].measure;
    assert!((mu.total_mass - 1.0).abs() < 1e-6, "{}", mu.total_mass);
    let got = cauchy_quadrature(mu, c(2.0, 0.0)).unwrap();
    assert!((got.re - 1.0 / 3f64.sqrt()).abs() < 1e-6 && got.im.abs() < 1e-8, "{got}");
}

#[test]
fn theta_graph_measures() {
    let w = c(1.0, 1.0);
    let w2 = w * w;
    let p = Poly::from_c64(&[-w2, c(0.0, 0.0), c(1.0, 0.0)])
        .mul(&Poly::from_c64(&[-w2.conj(), c(0.0, 0.0), c(1.0, 0.0)]));
    let r = Poly::from_real(&[0.25, 0.0, -1.0]);
    let qd = build_theta(&p.chop(1e-15), &Poly::zero(), &r).unwrap();
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    assert_eq!(rep.graph.d, 3);
    assert_eq!(rep.candidates.len(), 4);
    for cand in &rep.candidates {
        assert!(jump_density_check(&cand.measure, &qd) < 1e-6);
        assert!((cand.measure.total_mass - rep.alpha).abs() < 1e-6, "{} {}", cand.measure.total_mass, rep.alpha);
    }
}

#[test]
fn trajectory_reversal_retraces() {
    let qd = theta(&[-1.0, 0.0, 1.0], &[], &[-1.0]);
    let g = strebel_surrogate(&qd, BuildOptions::default()).unwrap().graph.unwrap();
    let t = &g.edges[0];
    let end = *t.polyline.last().unwrap();
    let heading = (-t.tangents.last().unwrap()).arg();
    let back = trace_trajectory(&qd, end, heading, 10.0).unwrap();
    assert_eq!(back.class, TrajectoryClass::DoubleSingular, "{:?} {:?} {} {:?}", back.class, back.polyline.last(), heading, t.end_dir);
    let start = t.polyline[0];
    assert!((back.polyline.last().unwrap() - start).norm() < 1e-6);
}

#[test]
fn graph_euler_relation() {
    let qd = theta(&[1.0], &[0.0, -1.0], &[1.0]);
    let g = build_dk0(&qd, BuildOptions::default()).unwrap();
    assert!(g.topology.euler_holds(&g.graph));
}

#[test]
fn affine_change_moves_the_graph() {
    let (a, b) = (c(0.0, 2.0), c(1.0, -1.0));
    let (p, q, r) = QuadraticDifferential::affine_triple(
        &Poly::from_real(&[1.0]),
        &Poly::from_real(&[0.0, -1.0]),
        &Poly::from_real(&[1.0]),
        a,
        b,
    );
    let qd = build_theta(&p, &q, &r).unwrap();
    let g = build_dk0(&qd, BuildOptions::default()).unwrap();
    let base = build_dk0(&theta(&[1.0], &[0.0, -1.0], &[1.0]), BuildOptions::default()).unwrap();
    let moved = base.graph.map_affine(a, b);
    assert_eq!(g.graph.edges.len(), moved.edges.len());
    for v in &moved.vertices {
        assert!(g.graph.vertices.iter().any(|w| (w - v).norm() < 1e-8), "{v}");
    }
}

#[test]
fn theta_graph_signs_follow_regions() {
    let w = c(1.0, 1.0);
    let w2 = w * w;
    let p = Poly::from_c64(&[-w2, c(0.0, 0.0), c(1.0, 0.0)])
        .mul(&Poly::from_c64(&[-w2.conj(), c(0.0, 0.0), c(1.0, 0.0)]));
    let qd = build_theta(&p.chop(1e-15), &Poly::zero(), &Poly::from_real(&[0.25, 0.0, -1.0])).unwrap();
    let rep = motherbody_candidates(&qd, BuildOptions::default()).unwrap();
    let g = &rep.graph;
    assert!(g.topology.euler_holds(&g.graph));
    assert_eq!(rep.candidates.len(), 1 << (g.d - 1));
    let signs = |cand: &MotherbodyCandidate| -> Vec<Option<f64>> {
        let mut arcs = cand.measure.arcs.iter();
        cand.flips.iter().map(|&f| if f { Some(arcs.next().unwrap().law.as_ref().unwrap().sign) } else { None }).collect()
    };
    let base = signs(&rep.candidates[0]);
    assert!(base.iter().all(|s| s.is_some()));
    for (pat, cand) in rep.candidates.iter().enumerate() {
        let region = |r: usize| if r == 0 || pat >> (r - 1) & 1 == 0 { 1.0 } else { -1.0 };
        for (e, s) in signs(cand).iter().enumerate() {
            let (l, r) = g.topology.edge_sides[e];
            match s {
                Some(s) => {
                    assert_eq!(region(l), region(r));
                    assert_eq!(*s, region(l) * base[e].unwrap(), "pattern {pat} edge {e}");
                }
                None => assert_ne!(region(l), region(r)),
            }
        }
    }
}

mod common;

#[test]
fn simple_poles_with_real_residues_never_reject_on_residues() {
    use motherbody::polyalg::{poly_roots, residue_at};
    let mut checked = 0;
    for [p, q, r] in common::random_triples(DEFAULT_SEED, 40) {
        let Ok(roots) = poly_roots(&p) else { continue };
        let hypothesis = roots.iter().all(|z| z.mult == 1 && residue_at(&q, &p, z.z).map_or(false, |res| res.im.abs() < 1e-9));
        if !hypothesis {
            continue;
        }
        let Ok(qd) = build_theta(&p, &q, &r) else { continue };
        let Ok(rep) = motherbody_candidates(&qd, BuildOptions::default()) else { continue };
        checked += 1;
        assert!(rep.rejected.iter().all(|r| !r.reason.contains("residue")), "{:?}", rep.rejected);
    }
    assert!(checked > 0);
}
