//! Motherbody candidates for quadratic equations: spanning subgraphs,
//! sections, pole gates, realised measures and the positivity criterion.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::measure::{AnalyticDensity, Arc, Atom, EndKind, SignedMeasure};
use crate::polyalg::{poly_roots, residue_at, Root};
use crate::quaddiff::{
    build_dk0, spans_all_branch_points, strebel_surrogate, BuildOptions, EmbeddedGraph, GraphError, QuadError,
    QuadraticDifferential, StrebelVerdict, TrajectoryGraph,
};
use crate::C64;

pub const MAX_EDGES: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotherError {
    #[error("{n} edges exceed the enumeration bound of {MAX_EDGES}")]
    TooManyEdges { n: usize },
    #[error("edge subset leaves a vertex uncovered")]
    NotSpanning,
    #[error("flip set is inconsistent with the branch points at vertex {vertex}")]
    InconsistentSection { vertex: usize },
    #[error("section selects the unbounded branch at a multiple zero {z} of P")]
    MultiplePoleOfP { z: C64 },
    #[error("residue {residue} at {z} is not real")]
    NonRealResidue { z: C64, residue: C64 },
    #[error("density on edge {edge} is not real (relative imaginary part {deviation:e})")]
    NonRealDensity { edge: usize, deviation: f64 },
    #[error("no jump across edge {edge}")]
    NoJump { edge: usize },
    #[error("differential is not Strebel ({0:?})")]
    NotStrebel(StrebelVerdict),
    #[error("edge-end angles tie at vertex {vertex}")]
    DegenerateEmbedding { vertex: usize },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Edge subsets (as bitmasks, ascending) touching every vertex.
pub fn enumerate_spanning_subgraphs(g: &EmbeddedGraph) -> Result<Vec<u64>, MotherError> {
    let ne = g.edges.len();
    if ne > MAX_EDGES {
        return Err(MotherError::TooManyEdges { n: ne });
    }
    let need: Vec<u64> = (0..g.vertices.len())
        .map(|v| {
            g.edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.a == v || e.b == v)
                .fold(0u64, |m, (i, _)| m | (1 << i))
        })
        .collect();
    if need.iter().any(|&m| m == 0) {
        return Ok(Vec::new());
    }
    Ok((0..1u64 << ne)
        .into_par_iter()
        .filter(|mask| need.iter().all(|n| n & mask != 0))
        .collect())
}

fn mask_to_flips(mask: u64, ne: usize) -> Vec<bool> {
    (0..ne).map(|i| mask >> i & 1 == 1).collect()
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(p: C64, q: C64, a: C64, b: C64) -> bool {
    let d1 = cross(q - p, a - p);
    let d2 = cross(q - p, b - p);
    let d3 = cross(b - a, p - a);
    let d4 = cross(b - a, q - a);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

/// A branch of (−Q ± √D)/(2P) over the complement of a graph: the marked
/// α/z branch at infinity, switched across every edge of the flip set.
#[derive(Debug, Clone)]
pub struct Section<'a> {
    qd: &'a QuadraticDifferential,
    graph: &'a EmbeddedGraph,
    pub flips: Vec<bool>,
    pub alpha: f64,
    far: f64,
    d_roots: Vec<Root>,
    guards: Vec<C64>,
    scale: f64,
}

impl<'a> Section<'a> {
    /// Checks that the flip set is consistent with the monodromy of √D:
    /// around every vertex the flip degree has the parity of ord_D.
    pub fn new(qd: &'a QuadraticDifferential, graph: &'a EmbeddedGraph, flips: Vec<bool>) -> Result<Self, MotherError> {
        qd.check_infinity()?;
        let alpha = qd.marked_germ()?;
        let d_roots = qd.d_roots();
        let tol = |z: C64| 1e-6 * (1.0 + z.norm());
        for r in &d_roots {
            if r.mult % 2 == 1 && !graph.vertices.iter().any(|v| (v - r.z).norm() <= tol(r.z)) {
                return Err(MotherError::InconsistentSection { vertex: usize::MAX });
            }
        }
        for (v, &z) in graph.vertices.iter().enumerate() {
            let ord = d_roots.iter().find(|r| (r.z - z).norm() <= tol(z)).map(|r| r.mult).unwrap_or(0);
            let deg: usize = graph
                .edges
                .iter()
                .enumerate()
                .filter(|(i, _)| flips[*i])
                .map(|(_, e)| (e.a == v) as usize + (e.b == v) as usize)
                .sum();
            if deg % 2 != ord % 2 {
                return Err(MotherError::InconsistentSection { vertex: v });
            }
        }
        let mut guards: Vec<C64> = graph.vertices.clone();
        guards.extend(d_roots.iter().map(|r| r.z));
        if qd.p.degree().unwrap_or(0) > 0 {
            guards.extend(poly_roots(&qd.p).unwrap_or_default().iter().map(|r| r.z));
        }
        let mut reach: f64 = guards.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for e in 0..graph.edges.len() {
            for z in graph.path(e) {
                reach = reach.max(z.norm());
            }
        }
        Ok(Section { qd, graph, flips, alpha, far: 4.0 * reach, d_roots, guards, scale: reach })
    }

    fn ray_origin(&self, z: C64) -> C64 {
        let mut best = (f64::NEG_INFINITY, C64::new(self.far, 0.0));
        for k in 0..24 {
            let zf = C64::from_polar(self.far.max(4.0 * z.norm()), 0.3719 + 0.7351 * k as f64);
            let margin = self
                .guards
                .iter()
                .map(|&g| crate::measure::point_segment_distance(g, zf, z))
                .fold(f64::INFINITY, f64::min);
            if margin > 1e-3 * self.scale {
                return zf;
            }
            if margin > best.0 {
                best = (margin, zf);
            }
        }
        best.1
    }

    /// Sign-carrying √D at z, continued from the marked branch at the end
    /// of a ray, times the flip parity along the ray.
    pub fn signed_sqrt_d(&self, z: C64) -> C64 {
        let zf = self.ray_origin(z);
        let (p, q) = (self.qd.p.eval(&zf), self.qd.q.eval(&zf));
        let sf = self.qd.d.eval(&zf).sqrt();
        let cand = |s: C64| ((-q + s) / (p * 2.0) * zf - self.alpha).norm();
        let sf = if cand(sf) <= cand(-sf) { sf } else { -sf };
        let mut phase = C64::new(0.0, 0.0);
        for r in &self.d_roots {
            phase += ((z - r.z) / (zf - r.z)).ln() * (r.mult as f64 * 0.5);
        }
        let cont = sf * phase.exp();
        let mut s = self.qd.d.eval(&z).sqrt();
        if (s * cont.conj()).re < 0.0 {
            s = -s;
        }
        let mut crossings = 0usize;
        for (e, &f) in self.flips.iter().enumerate() {
            if !f {
                continue;
            }
            let path = self.graph.path(e);
            crossings += path.windows(2).filter(|w| segments_cross(zf, z, w[0], w[1])).count();
        }
        if crossings % 2 == 1 {
            -s
        } else {
            s
        }
    }

    /// Value of the section at a point off the flip set.
    pub fn value(&self, z: C64) -> C64 {
        let s = self.signed_sqrt_d(z);
        (-self.qd.q.eval(&z) + s) / (self.qd.p.eval(&z) * 2.0)
    }

    /// The other root of the quadratic at z.
    pub fn other(&self, z: C64) -> C64 {
        let s = self.signed_sqrt_d(z);
        (-self.qd.q.eval(&z) - s) / (self.qd.p.eval(&z) * 2.0)
    }

    /// Section for the same graph with the given flips.
    pub fn graph(&self) -> &EmbeddedGraph {
        self.graph
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleResidue {
    pub z: C64,
    pub residue: f64,
}

/// Zeros of P at which the section takes the branch that blows up, with
/// the residue of −Q/P there.
pub fn poles_and_residues(section: &Section) -> Result<Vec<PoleResidue>, MotherError> {
    let qd = section.qd;
    if qd.q.is_zero() || qd.p.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for r in poly_roots(&qd.p).map_err(QuadError::from)? {
        let qv = qd.q.eval(&r.z);
        let s = section.signed_sqrt_d(r.z);
        let finite = (-qv + s).norm() < qv.norm();
        if finite {
            continue;
        }
        if r.mult > 1 {
            return Err(MotherError::MultiplePoleOfP { z: r.z });
        }
        let res = residue_at(&qd.q.neg(), &qd.p, r.z).map_err(QuadError::from)?;
        if res.im.abs() > 1e-8 * (1.0 + res.norm()) {
            return Err(MotherError::NonRealResidue { z: r.z, residue: res });
        }
        out.push(PoleResidue { z: r.z, residue: res.re });
    }
    Ok(out)
}

fn end_kind(qd: &QuadraticDifferential, d_roots: &[Root], z: C64) -> EndKind {
    let tol = 1e-6 * (1.0 + z.norm());
    let p_scale: f64 = qd.p.coeffs().iter().map(|c| c.norm()).sum::<f64>() * (1.0 + z.norm()).powi(qd.p.degree().unwrap_or(0) as i32);
    if qd.p.eval(&z).norm() <= 1e-9 * p_scale {
        return EndKind::InvSqrtPole;
    }
    match d_roots.iter().find(|r| (r.z - z).norm() <= tol) {
        Some(r) if r.mult % 2 == 1 => EndKind::SqrtZero,
        _ => EndKind::Regular,
    }
}

const REAL_TOL: f64 = 1e-6;

/// Measure whose Cauchy transform is the section: arcs on flipped edges
/// with density τ(𝒞_right − 𝒞_left)/(2πi) = ±|√D/P|/(2π), atoms at poles.
/// `tangents` gives exact unit tangents per edge node when known.
pub fn realize_measure(
    section: &Section,
    poles: &[PoleResidue],
    tangents: Option<&[Vec<C64>]>,
) -> Result<SignedMeasure, MotherError> {
    let qd = section.qd;
    let g = section.graph;
    let mut arcs = Vec::new();
    for (e, &f) in section.flips.iter().enumerate() {
        if !f {
            continue;
        }
        let nodes = g.path(e);
        let tg: Vec<C64> = match tangents {
            Some(t) if t[e].len() == nodes.len() => t[e].clone(),
            _ => estimate_tangents(&nodes),
        };
        // Both ends are singular points where the phase of D/P² is noise.
        let mut worst: f64 = 0.0;
        let inner = 1..nodes.len().saturating_sub(1);
        for (z, t) in nodes[inner.clone()].iter().zip(&tg[inner]) {
            let r = *t * qd.d.eval(z).sqrt() / qd.p.eval(z) / C64::new(0.0, 2.0 * PI);
            let m = r.norm();
            if m.is_finite() && m > 1e-12 {
                worst = worst.max(r.im.abs() / m);
            }
        }
        if worst > REAL_TOL {
            return Err(MotherError::NonRealDensity { edge: e, deviation: worst });
        }
        let k = longest_segment_mid(&nodes);
        let (zm, tm) = ((nodes[k] + nodes[k + 1]) * 0.5, (nodes[k + 1] - nodes[k]).unscale((nodes[k + 1] - nodes[k]).norm()));
        let delta = 1e-7 * section.scale;
        let off = C64::new(0.0, 1.0) * tm * delta;
        let (cl, cr) = (section.value(zm + off), section.value(zm - off));
        let rho = tm * (cr - cl) / C64::new(0.0, 2.0 * PI);
        let want = (qd.d.eval(&zm).sqrt() / qd.p.eval(&zm)).norm() / (2.0 * PI);
        if (rho.norm() - want).abs() > 1e-3 * want {
            return Err(MotherError::NoJump { edge: e });
        }
        let law = AnalyticDensity { sign: rho.re.signum(), num: qd.d.clone(), den: qd.p.clone(), sqrt_num: true };
        let ends = [
            end_kind(qd, &section.d_roots, nodes[0]),
            end_kind(qd, &section.d_roots, *nodes.last().expect("nonempty")),
        ];
        arcs.push(Arc::with_law(nodes, tg, false, ends, law));
    }
    let atoms = poles.iter().map(|p| Atom { z: p.z, weight: p.residue }).collect();
    Ok(SignedMeasure::from_parts(atoms, arcs))
}

fn longest_segment_mid(nodes: &[C64]) -> usize {
    (0..nodes.len() - 1)
        .max_by(|&a, &b| (nodes[a + 1] - nodes[a]).norm().total_cmp(&(nodes[b + 1] - nodes[b]).norm()))
        .unwrap_or(0)
}

fn estimate_tangents(nodes: &[C64]) -> Vec<C64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let (a, b) = (nodes[i.saturating_sub(1)], nodes[(i + 1).min(n - 1)]);
            let d = b - a;
            d / d.norm()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MotherbodyCandidate {
    /// Edge subset of the graph as a bitmask.
    pub subgraph: u64,
    pub flips: Vec<bool>,
    pub poles: Vec<PoleResidue>,
    pub measure: SignedMeasure,
    pub positive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub subgraph: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub alpha: f64,
    pub graph: TrajectoryGraph,
    pub spans_all: bool,
    pub candidates: Vec<MotherbodyCandidate>,
    pub rejected: Vec<Rejection>,
    /// Present for Q = 0.
    pub positivity: Option<PositivityVerdict>,
}

fn is_positive(m: &SignedMeasure) -> bool {
    m.atoms.iter().all(|a| a.weight >= 0.0) && m.arcs.iter().all(|a| a.density.iter().all(|&d| d >= -1e-12))
}

fn edge_tangents(g: &TrajectoryGraph) -> Vec<Vec<C64>> {
    g.edges.iter().map(|t| t.tangents.clone()).collect()
}

fn realize_flips(
    qd: &QuadraticDifferential,
    g: &TrajectoryGraph,
    mask: u64,
    flips: Vec<bool>,
    tangents: &[Vec<C64>],
) -> Result<MotherbodyCandidate, MotherError> {
    let s = Section::new(qd, &g.graph, flips)?;
    let poles = poles_and_residues(&s)?;
    let measure = realize_measure(&s, &poles, Some(tangents))?;
    let positive = is_positive(&measure);
    Ok(MotherbodyCandidate { subgraph: mask, flips: s.flips.clone(), poles, measure, positive })
}

/// Candidates supported on spanning subgraphs of DK⁰ (Q ≠ 0), or the
/// 2^{d−1} measures of a Strebel differential (Q = 0).
pub fn motherbody_candidates(qd: &QuadraticDifferential, opts: BuildOptions) -> Result<CandidateReport, MotherError> {
    if qd.q.is_zero() {
        let rep = strebel_surrogate(qd, opts)?;
        let g = match (rep.verdict, rep.graph) {
            (StrebelVerdict::Strebel, Some(g)) => g,
            (v, _) => return Err(MotherError::NotStrebel(v)),
        };
        let alpha = qd.marked_germ()?;
        let measures = q_zero_enumerate(qd, &g)?;
        let positivity = positivity_criterion(&g.graph).ok();
        let candidates = measures
            .into_iter()
            .map(|(mask, flips, measure)| MotherbodyCandidate {
                subgraph: mask,
                flips,
                poles: Vec::new(),
                positive: is_positive(&measure),
                measure,
            })
            .collect();
        let spans_all = spans_all_branch_points(&g, qd);
        return Ok(CandidateReport { alpha, graph: g, spans_all, candidates, rejected: Vec::new(), positivity });
    }
    let alpha = qd.marked_germ()?;
    if !qd.p_q_coprime() {
        return Err(MotherError::Quad(QuadError::NotCoprime));
    }
    let g = build_dk0(qd, opts)?;
    let spans_all = spans_all_branch_points(&g, qd);
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    if spans_all {
        let masks = enumerate_spanning_subgraphs(&g.graph)?;
        let ne = g.graph.edges.len();
        let tangents = edge_tangents(&g);
        let results: Vec<(u64, Result<MotherbodyCandidate, MotherError>)> = masks
            .par_iter()
            .map(|&m| (m, realize_flips(qd, &g, m, mask_to_flips(m, ne), &tangents)))
            .collect();
        for (m, r) in results {
            match r {
                Ok(c) => candidates.push(c),
                Err(e) => rejected.push(Rejection { subgraph: m, reason: e.to_string() }),
            }
        }
    }
    Ok(CandidateReport { alpha, graph: g, spans_all, candidates, rejected, positivity: None })
}

/// One measure per sign pattern on the bounded complement regions, the
/// unbounded region keeping the marked branch. Returned as (bitmask of
/// supporting edges, flips, measure), ordered by pattern.
pub fn q_zero_enumerate(
    qd: &QuadraticDifferential,
    g: &TrajectoryGraph,
) -> Result<Vec<(u64, Vec<bool>, SignedMeasure)>, MotherError> {
    let d = g.topology.regions;
    if d > 21 {
        return Err(MotherError::TooManyEdges { n: d - 1 });
    }
    let tangents = edge_tangents(g);
    let patterns: Vec<u64> = (0..1u64 << (d - 1)).collect();
    patterns
        .par_iter()
        .map(|&pat| {
            let sign = |r: usize| r == 0 || pat >> (r - 1) & 1 == 0;
            let flips: Vec<bool> = g.topology.edge_sides.iter().map(|&(l, r)| sign(l) == sign(r)).collect();
            let mask = flips.iter().enumerate().filter(|(_, f)| **f).fold(0u64, |m, (i, _)| m | 1 << i);
            let s = Section::new(qd, &g.graph, flips)?;
            let m = realize_measure(&s, &[], Some(&tangents))?;
            Ok((mask, s.flips.clone(), m))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityVerdict {
    pub admits: bool,
    /// Edges in no simple cycle.
    pub support: Vec<usize>,
    /// Simple cycles as edge lists.
    pub cycles: Vec<Vec<usize>>,
    /// (cycle, edge) pairs where an edge enters a cycle's interior.
    pub violations: Vec<(usize, usize)>,
}

const TIE: f64 = 1e-9;

/// No edge may be attached to a simple cycle from inside; the support of
/// the positive measure is then the forest left after removing all cycles.
pub fn positivity_criterion(g: &EmbeddedGraph) -> Result<PositivityVerdict, MotherError> {
    let top = g.topology()?;
    let cycles = g.simple_cycles();
    let mut violations = Vec::new();
    let mut in_cycle = vec![false; g.edges.len()];
    for (ci, cyc) in cycles.iter().enumerate() {
        for &h in cyc {
            in_cycle[h / 2] = true;
        }
        let ccw = crate::quaddiff::winding_area(&g.chain(cyc)) > 0.0;
        let n = cyc.len();
        for k in 0..n {
            let (hin, hout) = (cyc[k], cyc[(k + 1) % n]);
            let v = g.head(hin);
            let a_in = top.end_angle[hin ^ 1];
            let a_out = top.end_angle[hout];
            let (lo, hi) = if ccw { (a_out, a_in) } else { (a_in, a_out) };
            let width = (hi - lo).rem_euclid(2.0 * PI);
            for &h in &top.rotation[v] {
                if h == hout || h == hin ^ 1 {
                    continue;
                }
                let off = (top.end_angle[h] - lo).rem_euclid(2.0 * PI);
                if off < TIE || (off - width).abs() < TIE || 2.0 * PI - off < TIE {
                    return Err(MotherError::DegenerateEmbedding { vertex: v });
                }
                if off < width {
                    violations.push((ci, h / 2));
                }
            }
        }
    }
    let support = (0..g.edges.len()).filter(|&e| !in_cycle[e]).collect();
    Ok(PositivityVerdict {
        admits: violations.is_empty(),
        support,
        cycles: cycles.iter().map(|c| c.iter().map(|h| h / 2).collect()).collect(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaddiff::GraphEdge;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn spanning_counts() {
        let one = EmbeddedGraph { vertices: vec![c(0.0, 0.0), c(1.0, 0.0)], edges: vec![GraphEdge { a: 0, b: 1, polyline: vec![] }] };
        assert_eq!(enumerate_spanning_subgraphs(&one).unwrap(), vec![1]);
        let tri = EmbeddedGraph {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            edges: vec![
                GraphEdge { a: 0, b: 1, polyline: vec![] },
                GraphEdge { a: 1, b: 2, polyline: vec![] },
                GraphEdge { a: 2, b: 0, polyline: vec![] },
            ],
        };
        assert_eq!(enumerate_spanning_subgraphs(&tri).unwrap(), vec![3, 5, 6, 7]);
        let mut iso = one.clone();
        iso.vertices.push(c(3.0, 3.0));
        assert!(enumerate_spanning_subgraphs(&iso).unwrap().is_empty());
    }

    #[test]
    fn too_many_edges() {
        let g = EmbeddedGraph {
            vertices: (0..22).map(|i| c(i as f64, 0.0)).collect(),
            edges: (0..21).map(|i| GraphEdge { a: i, b: i + 1, polyline: vec![] }).collect(),
        };
        assert_eq!(enumerate_spanning_subgraphs(&g), Err(MotherError::TooManyEdges { n: 21 }));
    }

    #[test]
    fn segment_admits() {
        let g = EmbeddedGraph { vertices: vec![c(-1.0, 0.0), c(1.0, 0.0)], edges: vec![GraphEdge { a: 0, b: 1, polyline: vec![] }] };
        let v = positivity_criterion(&g).unwrap();
        assert!(v.admits);
        assert_eq!(v.support, vec![0]);
    }

    #[test]
    fn chord_inside_cycle_rejected() {
        // Two arcs and a chord between the same vertices.
        let g = EmbeddedGraph {
            vertices: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            edges: vec![
                GraphEdge { a: 0, b: 1, polyline: vec![c(-1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)] },
                GraphEdge { a: 0, b: 1, polyline: vec![c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)] },
                GraphEdge { a: 0, b: 1, polyline: vec![] },
            ],
        };
        assert!(!positivity_criterion(&g).unwrap().admits);
    }

    #[test]
    fn pendant_outside_loop_admitted() {
        let circle: Vec<C64> = (0..=64).map(|k| c(1.0, 0.0) + C64::from_polar(1.0, PI + 2.0 * PI * k as f64 / 64.0)).collect();
        let mut poly = circle;
        *poly.last_mut().unwrap() = c(0.0, 0.0);
        poly[0] = c(0.0, 0.0);
        let g = EmbeddedGraph {
            vertices: vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)],
            edges: vec![
                GraphEdge { a: 0, b: 0, polyline: poly },
                GraphEdge { a: 0, b: 1, polyline: vec![] },
            ],
        };
        let v = positivity_criterion(&g).unwrap();
        assert!(v.admits);
        assert_eq!(v.support, vec![1]);
        let mut inside = g.clone();
        inside.edges[1] = GraphEdge { a: 0, b: 2, polyline: vec![] };
        assert!(!positivity_criterion(&inside).unwrap().admits);
    }
}
