//! Shared fixtures for integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use motherbody::quaddiff::{EmbeddedGraph, GraphEdge};
use motherbody::C64;

pub fn c(x: f64, y: f64) -> C64 {
    C64::new(x, y)
}

/// Quadratic Bézier from p0 to p2, `n` segments.
pub fn bezier(p0: C64, p1: C64, p2: C64, n: usize) -> Vec<C64> {
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            p0 * (1.0 - t) * (1.0 - t) + p1 * 2.0 * t * (1.0 - t) + p2 * t * t
        })
        .collect()
}

fn join(mut a: Vec<C64>, b: Vec<C64>) -> Vec<C64> {
    a.pop();
    a.extend(b);
    a
}

fn rev(mut a: Vec<C64>) -> Vec<C64> {
    a.reverse();
    a
}

fn circle_loop(center: C64, r: f64, start: f64) -> Vec<C64> {
    let mut v: Vec<C64> = (0..=96).map(|k| center + C64::from_polar(r, start + 2.0 * PI * k as f64 / 96.0)).collect();
    v[96] = v[0];
    v
}

/// Two loops joined by a bridge, each enclosing a free segment, all inside a
/// third loop with a pendant edge outside it.
/// Edges: 0, 1 loops; 2 bridge; 3, 4 inner segments; 5 outer loop; 6 pendant.
pub fn fig3_left() -> EmbeddedGraph {
    let a = c(97.0, 120.0);
    let b = c(113.0, 120.0);
    let cc = c(150.0, 120.0);
    let vertices = vec![
        a,
        b,
        c(80.0, 120.0),
        c(90.0, 120.0),
        c(120.0, 120.0),
        c(130.0, 120.0),
        cc,
        c(170.0, 120.0),
    ];
    let outer = join(
        rev(bezier(c(60.0, 120.0), c(75.0, 195.0), cc, 64)),
        bezier(c(60.0, 120.0), c(75.0, 45.0), cc, 64),
    );
    let edges = vec![
        GraphEdge { a: 0, b: 0, polyline: circle_loop(c(84.5, 120.0), 12.5, 0.0) },
        GraphEdge { a: 1, b: 1, polyline: circle_loop(c(125.5, 120.0), 12.5, PI) },
        GraphEdge { a: 0, b: 1, polyline: vec![] },
        GraphEdge { a: 2, b: 3, polyline: vec![] },
        GraphEdge { a: 4, b: 5, polyline: vec![] },
        GraphEdge { a: 6, b: 6, polyline: outer },
        GraphEdge { a: 6, b: 7, polyline: vec![] },
    ];
    EmbeddedGraph { vertices, edges }
}

/// An outer cycle through L and R split by the chord LR, a pendant hanging
/// into the upper half, and two free arcs.
pub fn fig3_right() -> EmbeddedGraph {
    let l = c(230.0, 120.0);
    let r = c(290.0, 120.0);
    let t = c(260.0, 145.0);
    let bottom = c(260.0, 85.0);
    let vertices = vec![l, r, t, c(260.0, 133.0), c(240.0, 130.0), c(280.0, 130.0), c(240.0, 105.0), c(280.0, 105.0)];
    let edges = vec![
        GraphEdge { a: 0, b: 1, polyline: vec![] },
        GraphEdge { a: 2, b: 1, polyline: bezier(t, c(310.0, 175.0), r, 64) },
        GraphEdge { a: 2, b: 0, polyline: bezier(t, c(210.0, 175.0), l, 64) },
        GraphEdge {
            a: 0,
            b: 1,
            polyline: join(rev(bezier(bottom, c(210.0, 90.0), l, 64)), bezier(bottom, c(310.0, 90.0), r, 64)),
        },
        GraphEdge { a: 2, b: 3, polyline: vec![] },
        GraphEdge { a: 4, b: 5, polyline: bezier(c(240.0, 130.0), c(260.0, 122.0), c(280.0, 130.0), 32) },
        GraphEdge { a: 6, b: 7, polyline: bezier(c(240.0, 105.0), c(260.0, 95.0), c(280.0, 105.0), 32) },
    ];
    EmbeddedGraph { vertices, edges }
}

/// True when the edges form no cycle.
pub fn is_forest(g: &EmbeddedGraph, edges: &[usize]) -> bool {
    let mut parent: Vec<usize> = (0..g.vertices.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &e in edges {
        let (a, b) = (find(&mut parent, g.edges[e].a), find(&mut parent, g.edges[e].b));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Real triples P = z² + p₁z + p₀, Q = q₁z + q₀, R = r₀ with coprime P, Q,
/// drawn from a fixed seed.
pub fn random_triples(seed: u64, n: usize) -> Vec<[motherbody::Poly; 3]> {
    use motherbody::polyalg::coprime;
    use motherbody::Poly;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let mut u = || (rng.gen_range(-2.0f64..2.0) * 8.0).round() / 8.0;
        let p = Poly::from_real(&[u(), u(), 1.0]);
        let q = Poly::from_real(&[u(), u()]);
        let r = Poly::from_real(&[u()]);
        if q.is_zero() || r.is_zero() || !coprime(&p, &q) {
            continue;
        }
        out.push([p, q, r]);
    }
    out
}

/// Worst values of the invariants over one differential's graph and
/// realised candidates.
#[derive(Debug, Default, Clone)]
pub struct Invariants {
    pub euler: bool,
    pub horizontality: f64,
    pub reversal_gap: f64,
    pub jump: f64,
    pub mass_vs_alpha: f64,
    pub mass_vs_m0: f64,
    pub expansion: f64,
    pub branch_error: f64,
    pub realised: usize,
    pub rejected: usize,
}

impl Invariants {
    pub fn holds(&self) -> bool {
        self.euler
            && self.horizontality <= 1e-6
            && self.reversal_gap <= 1e-6
            && self.jump <= 1e-4
            && self.mass_vs_alpha <= 1e-6
            && self.mass_vs_m0 <= 1e-10
            && self.expansion <= 1e-8
            && self.branch_error <= 1e-4
    }
}

/// Runs the candidate pipeline and measures every invariant. `Err` means
/// the differential was refused before any measure was built.
pub fn invariants(qd: &motherbody::quaddiff::QuadraticDifferential) -> Result<Invariants, String> {
    use motherbody::mother::{motherbody_candidates, Section};
    use motherbody::quaddiff::{horizontality_defect, trace_trajectory, BuildOptions, TrajectoryClass};
    use motherbody::verify::*;
    let rep = motherbody_candidates(qd, BuildOptions::default()).map_err(|e| e.to_string())?;
    let g = &rep.graph;
    let mut out = Invariants { euler: g.topology.euler_holds(&g.graph), rejected: rep.rejected.len(), ..Default::default() };
    for t in &g.edges {
        out.horizontality = out.horizontality.max(horizontality_defect(qd, &t.polyline));
    }
    for t in g.edges.iter().filter(|t| t.class == TrajectoryClass::DoubleSingular).take(1) {
        let end = *t.polyline.last().unwrap();
        let heading = (-t.tangents.last().unwrap()).arg();
        let back = trace_trajectory(qd, end, heading, 10.0 * t.arclength).map_err(|e| e.to_string())?;
        out.reversal_gap = (back.polyline.last().unwrap() - t.polyline[0]).norm();
    }
    let eq = Equation::Triple { p: qd.p.clone(), q: qd.q.clone(), r: qd.r.clone() };
    for cand in &rep.candidates {
        let mu = &cand.measure;
        out.realised += 1;
        out.jump = out.jump.max(jump_density_check(mu, qd));
        out.mass_vs_alpha = out.mass_vs_alpha.max((mu.total_mass - rep.alpha).abs());
        out.mass_vs_m0 = out.mass_vs_m0.max((moments(mu, 0)[0].re - mu.total_mass).abs());
        out.expansion = out.expansion.max(expansion_error(mu, C64::new(1e3, 0.0), 6).map_err(|e| e.to_string())?);
        let s = Section::new(qd, &g.graph, cand.flips.clone()).map_err(|e| e.to_string())?;
        let pts = sample_points(mu, 100, DEFAULT_SEED, 5.0);
        let cmp = compare_branch(mu, &eq, &pts, Some(&|z| s.value(z)));
        out.branch_error = out.branch_error.max(cmp.max_abs_error);
    }
    Ok(out)
}
