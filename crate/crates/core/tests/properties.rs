use motherbody::branch::rational_motherbody;
use motherbody::mother::enumerate_spanning_subgraphs;
use motherbody::polyalg::poly_roots;
use motherbody::quaddiff::{EmbeddedGraph, GraphEdge};
use motherbody::verify::cauchy_quadrature;
use motherbody::{Poly, C64};
use proptest::prelude::*;

fn distinct(points: &[(f64, f64)], gap: f64) -> bool {
    points.iter().enumerate().all(|(i, a)| points[..i].iter().all(|b| (a.0 - b.0).hypot(a.1 - b.1) > gap))
}

proptest! {
    #[test]
    fn roots_recovered(pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..8)) {
        prop_assume!(distinct(&pts, 0.1));
        let zs: Vec<C64> = pts.iter().map(|&(x, y)| C64::new(x, y)).collect();
        let p = Poly::from_roots(&zs);
        let found = poly_roots(&p).unwrap();
        prop_assert_eq!(found.len(), zs.len());
        for z in &zs {
            prop_assert!(found.iter().any(|r| (r.z - z).norm() < 1e-8));
        }
    }

    #[test]
    fn atoms_reproduce_partial_fractions(
        pts in prop::collection::vec((-2.0f64..2.0, 0.1f64..3.0), 1..6),
        probe in (3.0f64..6.0, -3.14f64..3.14),
    ) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        prop_assume!(xs.iter().enumerate().all(|(i, a)| xs[..i].iter().all(|b| (a - b).abs() > 0.1)));
        // Σ w_k/(z − x_k) as num/den.
        let den = Poly::from_roots(&xs.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let mut num = Poly::zero();
        for (k, &(x, w)) in pts.iter().enumerate() {
            let others: Vec<C64> = xs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &y)| C64::new(y, 0.0)).collect();
            num = num.add(&Poly::from_roots(&others).scale(&C64::new(w, 0.0)));
            let _ = x;
        }
        let mu = rational_motherbody(&num, &den).unwrap();
        let z = C64::from_polar(probe.0, probe.1);
        let want = num.eval(&z) / den.eval(&z);
        prop_assert!((cauchy_quadrature(&mu, z).unwrap() - want).norm() < 1e-9);
        let mass: f64 = pts.iter().map(|p| p.1).sum();
        prop_assert!((mu.total_mass - mass).abs() < 1e-9);
    }

    #[test]
    fn spanning_masks_cover_all_vertices(edges in prop::collection::vec((0usize..5, 0usize..5), 1..9)) {
        let g = EmbeddedGraph {
            vertices: (0..5).map(|k| C64::from_polar(1.0, k as f64)).collect(),
            edges: edges.iter().map(|&(a, b)| GraphEdge { a, b, polyline: vec![] }).collect(),
        };
        let masks = enumerate_spanning_subgraphs(&g).unwrap();
        let covers = |m: u64| {
            let mut seen = [false; 5];
            for (i, e) in g.edges.iter().enumerate() {
                if m >> i & 1 == 1 {
                    seen[e.a] = true;
                    seen[e.b] = true;
                }
            }
            seen.iter().all(|&s| s)
        };
        let brute: Vec<u64> = (1..1u64 << edges.len()).filter(|&m| covers(m)).collect();
        prop_assert_eq!(masks, brute);
    }
}
