//! Rational quadratic differentials attached to P𝒞² + Q𝒞 + R = 0, their
//! horizontal trajectories and the embedded graph of singular trajectories.

mod graph;
mod trace;

pub use graph::{shoelace as winding_area, svg, winding, EmbeddedGraph, Face, GraphEdge, GraphError, Topology};
pub use trace::{
    horizontality_defect, trace_trajectory, Endpoint, Start, Trajectory, TrajectoryClass, Tracer,
};

use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::polyalg::{coprime, discriminant_d, poly_roots, PolyError, Root, UniPoly};
use crate::scalar::Real;
use crate::{Poly, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("the differential vanishes identically")]
    DegenerateDifferential,
    #[error("cannot launch a trajectory from a pole of order {order}")]
    StartAtHigherPole { order: usize },
    #[error("infinity is a branch point: deg D = {deg_d}, expected {expected}")]
    BranchPointAtInfinity { deg_d: i64, expected: i64 },
    #[error("polynomials are not coprime")]
    NotCoprime,
    #[error("no real branch with asymptotics alpha/z at infinity")]
    NoRealGerm,
    #[error("the quadratic term vanishes at infinity of every order")]
    ZeroLeading,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// φ(z)dz² with φ = (4PR − Q²)/P² in lowest terms.
///
/// When Q = 0 this is 4R/P, a positive multiple of Ψ = R/P, so the
/// trajectories agree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticDifferential {
    pub p: Poly,
    pub q: Poly,
    pub r: Poly,
    pub d: Poly,
    /// Numerator and monic denominator of φ.
    pub num: Poly,
    pub den: Poly,
    pub degenerate: bool,
}

/// Builds φ from a triple, reducing the fraction in the scalar field `T`.
pub fn build_theta<T: Real>(p: &UniPoly<T>, q: &UniPoly<T>, r: &UniPoly<T>) -> Result<QuadraticDifferential, QuadError> {
    if p.is_zero() {
        return Err(QuadError::ZeroLeading);
    }
    let d = discriminant_d(p, q, r);
    let num = d.neg();
    let den = p.mul(p);
    let (num, den) = if num.is_zero() {
        (num, UniPoly::one())
    } else {
        let g = num.gcd(&den, 1e-12);
        let (n, _) = num.div_rem(&g);
        let (dd, _) = den.div_rem(&g);
        let lead = dd.leading();
        let inv = Complex::new(T::one(), T::zero()) / lead;
        (n.scale(&inv), dd.scale(&inv))
    };
    let f = |x: &UniPoly<T>| x.to_f64().chop(0.0);
    Ok(QuadraticDifferential {
        p: f(p),
        q: f(q),
        r: f(r),
        d: f(&d),
        degenerate: num.is_zero(),
        num: f(&num),
        den: f(&den),
    })
}

impl QuadraticDifferential {
    pub fn phi(&self, z: C64) -> C64 {
        self.num.eval(&z) / self.den.eval(&z)
    }

    pub fn q_is_zero(&self) -> bool {
        self.q.is_zero()
    }

    /// Order of φdz² at infinity; negative values are poles.
    pub fn order_at_infinity(&self) -> i64 {
        let dn = self.num.degree().map(|d| d as i64).unwrap_or(0);
        let dd = self.den.degree().map(|d| d as i64).unwrap_or(0);
        dd - dn - 4
    }

    /// Triple of the pushforward under z ↦ az + b: the transform of the
    /// image measure is 𝒞((w − b)/a)/a.
    pub fn affine_triple(p: &Poly, q: &Poly, r: &Poly, a: C64, b: C64) -> (Poly, Poly, Poly) {
        let ia = a.inv();
        let sh = -b * ia;
        let pp = p.compose_affine(&ia, &sh).scale(&(a * a));
        let qq = q.compose_affine(&ia, &sh).scale(&a);
        let rr = r.compose_affine(&ia, &sh);
        (pp, qq, rr)
    }

    /// Real α for the branch α/z + O(1/z²) at infinity, from the dominant
    /// balance of p·α²z^{deg P−2}, q·αz^{deg Q−1} and r·z^{deg R}.
    /// The largest real root is marked.
    pub fn marked_germ(&self) -> Result<f64, QuadError> {
        let term = |x: &Poly, shift: i64| x.degree().map(|d| (d as i64 + shift, x.leading()));
        let parts = [term(&self.p, -2), term(&self.q, -1), term(&self.r, 0)];
        let top = parts.iter().flatten().map(|t| t.0).max().ok_or(QuadError::NoRealGerm)?;
        let pick = |i: usize| match parts[i] {
            Some((e, c)) if e == top => c,
            _ => C64::zero(),
        };
        let (c2, c1, c0) = (pick(0), pick(1), pick(2));
        let mut roots = Vec::new();
        if c2.is_zero() {
            if !c1.is_zero() {
                roots.push(-c0 / c1);
            }
        } else {
            let disc = (c1 * c1 - c2 * c0 * 4.0).sqrt();
            roots.push((-c1 + disc) / (c2 * 2.0));
            roots.push((-c1 - disc) / (c2 * 2.0));
        }
        roots
            .into_iter()
            .filter(|a| a.norm() > 0.0 && a.im.abs() <= 1e-10 * a.norm())
            .map(|a| a.re)
            .max_by(|a, b| a.total_cmp(b))
            .ok_or(QuadError::NoRealGerm)
    }

    /// Checks that infinity is not a branch point. Under the degree
    /// normalisation deg P = n + 2, deg Q ≤ n + 1, deg R ≤ n this requires
    /// deg D = 2n + 2; other triples only need deg D even, and a warning is
    /// returned.
    pub fn check_infinity(&self) -> Result<Option<String>, QuadError> {
        let deg = |x: &Poly| x.degree().map(|d| d as i64).unwrap_or(-1);
        let (dp, dq, dr, dd) = (deg(&self.p), deg(&self.q), deg(&self.r), deg(&self.d));
        let n = dp - 2;
        if n >= 0 && dq <= n + 1 && dr <= n {
            if dd != 2 * n + 2 {
                return Err(QuadError::BranchPointAtInfinity { deg_d: dd, expected: 2 * n + 2 });
            }
            return Ok(None);
        }
        if dd < 0 || dd % 2 != 0 {
            return Err(QuadError::BranchPointAtInfinity { deg_d: dd, expected: dd + 1 });
        }
        Ok(Some(format!(
            "degree normalisation deg P = n+2, deg Q <= n+1, deg R <= n not met (deg P = {dp}, deg Q = {dq}, deg R = {dr}); accepted because deg D = {dd} is even"
        )))
    }

    /// P and Q share no root (vacuous for Q = 0 only when P is constant).
    pub fn p_q_coprime(&self) -> bool {
        if self.q.is_zero() {
            return self.p.degree() == Some(0);
        }
        coprime(&self.p, &self.q)
    }

    pub fn d_roots(&self) -> Vec<Root> {
        if self.d.is_zero() {
            return Vec::new();
        }
        poly_roots(&self.d).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SingularKind {
    Zero { order: usize },
    SimplePole,
    DoublePole { lead: C64 },
    HigherPole { order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPoint {
    pub z: C64,
    pub kind: SingularKind,
    /// φ ≈ lead·(z − z0)^order near the point.
    pub lead: C64,
    pub directions: Vec<f64>,
}

impl SingularPoint {
    /// Whether trajectories can terminate here in finite length.
    pub fn is_endpoint(&self) -> bool {
        matches!(self.kind, SingularKind::Zero { .. } | SingularKind::SimplePole)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SingularKind::Zero { .. })
    }

    /// Local order of φ (negative for poles).
    pub fn order(&self) -> i64 {
        match self.kind {
            SingularKind::Zero { order } => order as i64,
            SingularKind::SimplePole => -1,
            SingularKind::DoublePole { .. } => -2,
            SingularKind::HigherPole { order } => -(order as i64),
        }
    }
}

/// Angles θ with arg(c) + (m + 2)θ ≡ 0 mod 2π, in [0, 2π).
pub fn launch_directions(lead: C64, order: i64) -> Vec<f64> {
    let k = order + 2;
    if k <= 0 {
        return Vec::new();
    }
    (0..k)
        .map(|j| (-lead.arg() + 2.0 * PI * j as f64) / k as f64)
        .map(|t| t.rem_euclid(2.0 * PI))
        .collect()
}

fn local_lead(top: &Poly, bottom: &Poly, z: C64, m_top: usize, m_bottom: usize) -> C64 {
    let t = top.taylor_at(&z, m_top)[m_top];
    let b = bottom.taylor_at(&z, m_bottom)[m_bottom];
    t / b
}

/// Zeros and finite poles of φ, sorted by position.
pub fn singular_points(qd: &QuadraticDifferential) -> Result<Vec<SingularPoint>, QuadError> {
    if qd.degenerate {
        return Err(QuadError::DegenerateDifferential);
    }
    let zeros = if qd.num.degree().unwrap_or(0) > 0 { poly_roots(&qd.num)? } else { Vec::new() };
    let poles = if qd.den.degree().unwrap_or(0) > 0 { poly_roots(&qd.den)? } else { Vec::new() };
    let mut out = Vec::new();
    for r in zeros {
        let lead = local_lead(&qd.num, &qd.den, r.z, r.mult, 0);
        out.push(SingularPoint {
            z: r.z,
            kind: SingularKind::Zero { order: r.mult },
            lead,
            directions: launch_directions(lead, r.mult as i64),
        });
    }
    for r in poles {
        let lead = local_lead(&qd.num, &qd.den, r.z, 0, r.mult);
        let kind = match r.mult {
            1 => SingularKind::SimplePole,
            2 => SingularKind::DoublePole { lead },
            m => SingularKind::HigherPole { order: m },
        };
        let directions = if r.mult == 1 { launch_directions(lead, -1) } else { Vec::new() };
        out.push(SingularPoint { z: r.z, kind, lead, directions });
    }
    out.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    Ok(out)
}

/// Which singular points become graph vertices and which launches are made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GraphKind {
    /// Edges joining zeros of φ.
    Dk0,
    /// Edges joining zeros and simple poles; double poles are vertices.
    Critical,
}

/// The embedded graph of double singular trajectories together with the
/// traces it was extracted from.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryGraph {
    pub singular: Vec<SingularPoint>,
    /// Indices into `singular` of the graph vertices.
    pub vertex_points: Vec<usize>,
    pub graph: EmbeddedGraph,
    pub edges: Vec<Trajectory>,
    /// Edges of DK that end at a simple pole (kept apart from DK⁰).
    pub pole_edges: Vec<Trajectory>,
    /// Every launch that did not end at a singular point.
    pub open_launches: Vec<Trajectory>,
    #[serde(skip)]
    pub topology: Topology,
    pub d: usize,
    pub warnings: Vec<String>,
}

impl TrajectoryGraph {
    pub fn vertex_of_point(&self, i: usize) -> Option<usize> {
        self.vertex_points.iter().position(|&j| j == i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Arclength budget per launch; `None` uses 50·diameter.
    pub budget: Option<f64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { budget: None }
    }
}

fn launch_all(tracer: &Tracer, kind: GraphKind, budget: f64) -> Vec<Trajectory> {
    let jobs: Vec<(usize, f64)> = tracer
        .points()
        .iter()
        .enumerate()
        .filter(|(_, s)| match kind {
            GraphKind::Dk0 => s.is_zero(),
            GraphKind::Critical => s.is_endpoint(),
        })
        .flat_map(|(i, s)| s.directions.iter().map(move |&t| (i, t)))
        .collect();
    jobs.par_iter()
        .map(|&(i, t)| tracer.trace(Start::Vertex(i), t, budget).expect("launch from an endpoint"))
        .collect()
}

/// Two traces are the same edge when their end vertices and end
/// directions coincide (up to reversal).
fn dedupe(traces: Vec<Trajectory>) -> Vec<Trajectory> {
    let mut out: Vec<Trajectory> = Vec::new();
    for t in traces {
        let key = t.end_key();
        if out.iter().any(|o| {
            let k = o.end_key();
            k == key || (k.0 == key.1 && k.1 == key.0)
        }) {
            continue;
        }
        out.push(t);
    }
    out
}

fn assemble(qd: &QuadraticDifferential, kind: GraphKind, opts: BuildOptions) -> Result<TrajectoryGraph, QuadError> {
    let tracer = Tracer::new(qd)?;
    let budget = opts.budget.unwrap_or_else(|| tracer.default_budget());
    let traces = launch_all(&tracer, kind, budget);
    let singular = tracer.points().to_vec();
    let is_vertex = |s: &SingularPoint| match kind {
        GraphKind::Dk0 => s.is_zero(),
        GraphKind::Critical => s.is_endpoint() || matches!(s.kind, SingularKind::DoublePole { .. }),
    };
    let vertex_points: Vec<usize> = (0..singular.len()).filter(|&i| is_vertex(&singular[i])).collect();
    let mut edges = Vec::new();
    let mut pole_edges = Vec::new();
    let mut open = Vec::new();
    for t in traces {
        match (t.start, t.end) {
            (Endpoint::Vertex(a), Endpoint::Vertex(b)) if singular[a].is_endpoint() && singular[b].is_endpoint() => {
                let zeros = singular[a].is_zero() && singular[b].is_zero();
                if kind == GraphKind::Critical || zeros {
                    edges.push(t);
                } else {
                    pole_edges.push(t);
                }
            }
            _ => open.push(t),
        }
    }
    let edges = dedupe(edges);
    let pole_edges = dedupe(pole_edges);
    let graph = EmbeddedGraph {
        vertices: vertex_points.iter().map(|&i| singular[i].z).collect(),
        edges: edges
            .iter()
            .map(|t| {
                let ix = |e: Endpoint| match e {
                    Endpoint::Vertex(i) => vertex_points.iter().position(|&j| j == i).expect("vertex"),
                    Endpoint::Open => unreachable!(),
                };
                GraphEdge { a: ix(t.start), b: ix(t.end), polyline: t.polyline.clone() }
            })
            .collect(),
    };
    let topology = graph.topology()?;
    let d = topology.regions;
    Ok(TrajectoryGraph {
        singular,
        vertex_points,
        graph,
        edges,
        pole_edges,
        open_launches: open,
        topology,
        d,
        warnings: Vec::new(),
    })
}

/// DK⁰: double singular trajectories with both ends at zeros of φ.
pub fn build_dk0(qd: &QuadraticDifferential, opts: BuildOptions) -> Result<TrajectoryGraph, QuadError> {
    let warn = qd.check_infinity()?;
    let mut g = assemble(qd, GraphKind::Dk0, opts)?;
    g.warnings.extend(warn);
    if !g.open_launches.is_empty() {
        let n = g.open_launches.iter().filter(|t| t.class == TrajectoryClass::BudgetExceeded).count();
        if n > 0 {
            g.warnings.push(format!("{n} launches exceeded the arclength budget"));
        }
    }
    Ok(g)
}

/// Every zero of D is a vertex of the graph with at least one edge.
pub fn spans_all_branch_points(g: &TrajectoryGraph, qd: &QuadraticDifferential) -> bool {
    let deg = g.graph.degrees();
    qd.d_roots().iter().all(|r| {
        g.graph
            .vertices
            .iter()
            .enumerate()
            .any(|(i, v)| (v - r.z).norm() <= 1e-6 * (1.0 + r.z.norm()) && deg[i] > 0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrebelVerdict {
    Strebel,
    /// A pole of order > 2, or a double pole whose lead is not negative.
    PoleGate,
    /// Some critical trajectory left every bounded region.
    Escaped,
    /// Some critical trajectory neither ended nor escaped within budget.
    BudgetExceeded,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrebelReport {
    pub verdict: StrebelVerdict,
    pub graph: Option<TrajectoryGraph>,
}

impl StrebelReport {
    pub fn is_strebel(&self) -> bool {
        self.verdict == StrebelVerdict::Strebel
    }
}

fn negative_real(c: C64) -> bool {
    c.re < 0.0 && c.im.abs() <= 1e-10 * c.norm()
}

/// Numerical Strebel test for Ψ = R/P dz² (Q = 0): pole gate at finite
/// points and at infinity, then every critical trajectory must end.
pub fn strebel_surrogate(qd: &QuadraticDifferential, opts: BuildOptions) -> Result<StrebelReport, QuadError> {
    if !qd.q.is_zero() {
        return Err(QuadError::NotCoprime);
    }
    if qd.r.is_zero() || !coprime(&qd.p, &qd.r) {
        return Err(QuadError::NotCoprime);
    }
    let pts = singular_points(qd)?;
    for s in &pts {
        match s.kind {
            SingularKind::HigherPole { .. } => return Ok(StrebelReport { verdict: StrebelVerdict::PoleGate, graph: None }),
            SingularKind::DoublePole { lead } if !negative_real(lead) => {
                return Ok(StrebelReport { verdict: StrebelVerdict::PoleGate, graph: None })
            }
            _ => {}
        }
    }
    let ord = qd.order_at_infinity();
    if ord < -2 {
        return Ok(StrebelReport { verdict: StrebelVerdict::PoleGate, graph: None });
    }
    if ord == -2 {
        // φ(1/w)/w⁴ ≈ (lead num / lead den)/w².
        let lead = qd.num.leading() / qd.den.leading();
        if !negative_real(lead) {
            return Ok(StrebelReport { verdict: StrebelVerdict::PoleGate, graph: None });
        }
    }
    let g = assemble(qd, GraphKind::Critical, opts)?;
    let verdict = if g.open_launches.iter().any(|t| t.class == TrajectoryClass::BudgetExceeded) {
        StrebelVerdict::BudgetExceeded
    } else if g.open_launches.is_empty() {
        StrebelVerdict::Strebel
    } else {
        StrebelVerdict::Escaped
    };
    Ok(StrebelReport { verdict, graph: Some(g) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(p: &[f64], q: &[f64], r: &[f64]) -> QuadraticDifferential {
        build_theta(&Poly::from_real(p), &Poly::from_real(q), &Poly::from_real(r)).unwrap()
    }

    #[test]
    fn semicircle_theta() {
        let qd = triple(&[1.0], &[0.0, -1.0], &[1.0]);
        assert!(qd.num.rel_distance(&Poly::from_real(&[4.0, 0.0, -1.0])) < 1e-15);
        assert_eq!(qd.den.degree(), Some(0));
        let s = singular_points(&qd).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|p| p.directions.len() == 3));
        assert_eq!(qd.order_at_infinity(), -6);
        assert_eq!(qd.marked_germ().unwrap(), 1.0);
    }

    #[test]
    fn arcsine_theta_reduces() {
        let qd = triple(&[-1.0, 0.0, 1.0], &[], &[-1.0]);
        assert!(qd.num.rel_distance(&Poly::from_real(&[-4.0])) < 1e-15);
        assert!(qd.den.rel_distance(&Poly::from_real(&[-1.0, 0.0, 1.0])) < 1e-15);
        let s = singular_points(&qd).unwrap();
        assert!(s.iter().all(|p| p.kind == SingularKind::SimplePole));
        let left = s.iter().find(|p| p.z.re < 0.0).unwrap();
        assert_eq!(left.directions.len(), 1);
        assert!(left.directions[0].abs() < 1e-12);
        assert_eq!(qd.marked_germ().unwrap(), 1.0);
    }

    #[test]
    fn degenerate_flagged() {
        let qd = triple(&[0.0, 0.0, 1.0], &[], &[]);
        assert!(qd.degenerate);
        assert_eq!(singular_points(&qd), Err(QuadError::DegenerateDifferential));
    }

    #[test]
    fn directions_of_z() {
        let d = launch_directions(C64::new(1.0, 0.0), 1);
        let want = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        // z·t² > 0 along each returned ray.
        for t in d {
            let u = C64::from_polar(1.0, t);
            let v = u * u * u;
            assert!(v.re > 0.0 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn infinity_checks() {
        let qd = triple(&[1.0], &[0.0, -1.0], &[1.0]);
        assert!(qd.check_infinity().unwrap().is_some());
        let arc = triple(&[-1.0, 0.0, 1.0], &[], &[-1.0]);
        assert_eq!(arc.check_infinity(), Ok(None));
        // P = z², Q = z + 1, R = 1/4: the z² terms of D cancel.
        let bad = triple(&[0.0, 0.0, 1.0], &[1.0, 1.0], &[0.25]);
        assert!(matches!(bad.check_infinity(), Err(QuadError::BranchPointAtInfinity { .. })));
    }
}
