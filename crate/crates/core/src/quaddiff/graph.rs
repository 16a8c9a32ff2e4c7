//! Planar multigraphs with geometric edges: rotation system, faces and
//! complement regions.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge {edge} references a missing vertex")]
    MissingVertex { edge: usize },
    #[error("polyline of edge {edge} does not start and end at its vertices")]
    EndpointMismatch { edge: usize },
    #[error("loop edge {edge} needs a polyline")]
    DegenerateLoop { edge: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    /// From vertex a to vertex b; empty means the straight segment.
    #[serde(default)]
    pub polyline: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmbeddedGraph {
    pub vertices: Vec<C64>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Face {
    /// Boundary half-edges, face on the left.
    pub half_edges: Vec<usize>,
    pub area: f64,
    pub component: usize,
    pub outer: bool,
    /// Complement region; 0 is the unbounded one.
    pub region: usize,
}

/// Half-edge 2e runs a→b along edge e, 2e+1 runs back.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Topology {
    pub end_angle: Vec<f64>,
    /// Outgoing half-edges at each vertex, counter-clockwise by angle.
    pub rotation: Vec<Vec<usize>>,
    pub face_of: Vec<usize>,
    pub faces: Vec<Face>,
    pub component: Vec<usize>,
    pub components: usize,
    /// Number of complement regions, the unbounded one included.
    pub regions: usize,
    /// (left, right) region of each edge oriented a→b.
    pub edge_sides: Vec<(usize, usize)>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Signed area enclosed by a closed chain.
pub fn shoelace(pts: &[C64]) -> f64 {
    pts.windows(2).map(|w| w[0].re * w[1].im - w[1].re * w[0].im).sum::<f64>() * 0.5
}

/// Winding number of a closed chain around p.
pub fn winding(chain: &[C64], p: C64) -> i64 {
    let mut tot = 0.0;
    for w in chain.windows(2) {
        let (a, b) = (w[0] - p, w[1] - p);
        if a.norm() == 0.0 || b.norm() == 0.0 {
            continue;
        }
        tot += (b / a).arg();
    }
    (tot / (2.0 * PI)).round() as i64
}

impl EmbeddedGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for e in &self.edges {
            d[e.a] += 1;
            d[e.b] += 1;
        }
        d
    }

    /// Polyline of edge e with the vertices filled in when absent.
    pub fn path(&self, e: usize) -> Vec<C64> {
        let ed = &self.edges[e];
        if ed.polyline.is_empty() {
            vec![self.vertices[ed.a], self.vertices[ed.b]]
        } else {
            ed.polyline.clone()
        }
    }

    /// Polyline of a half-edge in its direction of travel.
    pub fn half_path(&self, he: usize) -> Vec<C64> {
        let mut p = self.path(he / 2);
        if he % 2 == 1 {
            p.reverse();
        }
        p
    }

    pub fn tail(&self, he: usize) -> usize {
        let e = &self.edges[he / 2];
        if he % 2 == 0 {
            e.a
        } else {
            e.b
        }
    }

    pub fn head(&self, he: usize) -> usize {
        self.tail(he ^ 1)
    }

    fn extent(&self) -> f64 {
        let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        let mut any = false;
        for e in 0..self.edges.len() {
            for z in self.path(e) {
                lo = C64::new(lo.re.min(z.re), lo.im.min(z.im));
                hi = C64::new(hi.re.max(z.re), hi.im.max(z.im));
                any = true;
            }
        }
        for &z in &self.vertices {
            lo = C64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = C64::new(hi.re.max(z.re), hi.im.max(z.im));
            any = true;
        }
        if any {
            (hi - lo).norm().max(1e-300)
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<(), GraphError> {
        let tol = 1e-6 * self.extent();
        for (i, e) in self.edges.iter().enumerate() {
            if e.a >= self.vertices.len() || e.b >= self.vertices.len() {
                return Err(GraphError::MissingVertex { edge: i });
            }
            if e.polyline.is_empty() {
                if e.a == e.b {
                    return Err(GraphError::DegenerateLoop { edge: i });
                }
                continue;
            }
            let (s, t) = (e.polyline[0], *e.polyline.last().expect("nonempty"));
            if (s - self.vertices[e.a]).norm() > tol || (t - self.vertices[e.b]).norm() > tol {
                return Err(GraphError::EndpointMismatch { edge: i });
            }
        }
        Ok(())
    }

    /// Angle at which a half-edge leaves its tail, read at a short distance
    /// along the curve.
    fn leave_angle(&self, he: usize, r: f64) -> f64 {
        let p = self.half_path(he);
        let v = p[0];
        let len: f64 = p.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let reach = r.min(0.25 * len);
        let q = p.iter().skip(1).find(|q| (**q - v).norm() >= reach).copied().unwrap_or(p[1]);
        (q - v).arg()
    }

    pub fn topology(&self) -> Result<Topology, GraphError> {
        self.validate()?;
        let nv = self.vertices.len();
        let nh = 2 * self.edges.len();
        let r = 1e-3 * self.extent();
        let end_angle: Vec<f64> = (0..nh).map(|h| self.leave_angle(h, r)).collect();
        let mut rotation = vec![Vec::new(); nv];
        for h in 0..nh {
            rotation[self.tail(h)].push(h);
        }
        for rot in &mut rotation {
            rot.sort_by(|&x, &y| end_angle[x].total_cmp(&end_angle[y]));
        }
        let mut pos = vec![0; nh];
        for rot in &rotation {
            for (i, &h) in rot.iter().enumerate() {
                pos[h] = i;
            }
        }
        // Components.
        let mut parent: Vec<usize> = (0..nv).collect();
        for e in &self.edges {
            let (x, y) = (find(&mut parent, e.a), find(&mut parent, e.b));
            parent[x] = y;
        }
        let mut roots: Vec<usize> = (0..nv).map(|v| find(&mut parent, v)).collect();
        let mut ids: Vec<usize> = roots.clone();
        ids.sort_unstable();
        ids.dedup();
        for r in &mut roots {
            *r = ids.binary_search(r).expect("root");
        }
        let component = roots;
        let components = ids.len();
        // Faces.
        let mut face_of = vec![usize::MAX; nh];
        let mut faces: Vec<Face> = Vec::new();
        for h0 in 0..nh {
            if face_of[h0] != usize::MAX {
                continue;
            }
            let fid = faces.len();
            let mut cycle = Vec::new();
            let mut pts = Vec::new();
            let mut h = h0;
            loop {
                face_of[h] = fid;
                cycle.push(h);
                let mut p = self.half_path(h);
                if !pts.is_empty() {
                    p.remove(0);
                }
                pts.extend(p);
                let v = self.head(h);
                let twin = h ^ 1;
                let rot = &rotation[v];
                let nxt = rot[(pos[twin] + rot.len() - 1) % rot.len()];
                if nxt == h0 {
                    break;
                }
                h = nxt;
            }
            let comp = component[self.tail(h0)];
            faces.push(Face { half_edges: cycle, area: shoelace(&pts), component: comp, outer: false, region: 0 });
        }
        for c in 0..components {
            let best = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| f.component == c)
                .min_by(|a, b| a.1.area.total_cmp(&b.1.area))
                .map(|(i, _)| i);
            match best {
                Some(i) => faces[i].outer = true,
                None => faces.push(Face { half_edges: Vec::new(), area: 0.0, component: c, outer: true, region: 0 }),
            }
        }
        let mut next_region = 1;
        for f in &mut faces {
            if !f.outer {
                f.region = next_region;
                next_region += 1;
            }
        }
        let chains: Vec<Vec<C64>> = faces.iter().map(|f| self.chain(&f.half_edges)).collect();
        for i in 0..faces.len() {
            if !faces[i].outer {
                continue;
            }
            let c = faces[i].component;
            let v = (0..nv).find(|&v| component[v] == c).expect("component vertex");
            let p = self.vertices[v];
            let mut best: Option<(f64, usize)> = None;
            for (j, f) in faces.iter().enumerate() {
                if f.outer || f.component == c || winding(&chains[j], p) == 0 {
                    continue;
                }
                if best.map(|b| f.area < b.0).unwrap_or(true) {
                    best = Some((f.area, j));
                }
            }
            faces[i].region = best.map(|b| faces[b.1].region).unwrap_or(0);
        }
        let edge_sides = (0..self.edges.len())
            .map(|e| (faces[face_of[2 * e]].region, faces[face_of[2 * e + 1]].region))
            .collect();
        Ok(Topology { end_angle, rotation, face_of, faces, component, components, regions: next_region, edge_sides })
    }

    /// Closed point chain of a sequence of half-edges.
    pub fn chain(&self, hes: &[usize]) -> Vec<C64> {
        let mut pts: Vec<C64> = Vec::new();
        for &h in hes {
            let mut p = self.half_path(h);
            if !pts.is_empty() {
                p.remove(0);
            }
            pts.extend(p);
        }
        pts
    }

    /// Every simple cycle as a closed walk of half-edges; each cycle appears
    /// once.
    pub fn simple_cycles(&self) -> Vec<Vec<usize>> {
        let nv = self.vertices.len();
        let mut out = Vec::new();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut adj = vec![Vec::new(); nv];
        for h in 0..2 * self.edges.len() {
            adj[self.tail(h)].push(h);
        }
        for s in 0..nv {
            let mut path = Vec::new();
            let mut on = vec![false; nv];
            on[s] = true;
            self.cycles_from(s, s, &adj, &mut on, &mut path, &mut seen, &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn cycles_from(
        &self,
        s: usize,
        v: usize,
        adj: &[Vec<usize>],
        on: &mut [bool],
        path: &mut Vec<usize>,
        seen: &mut BTreeSet<Vec<usize>>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for &h in &adj[v] {
            if path.iter().any(|&p| p / 2 == h / 2) {
                continue;
            }
            let w = self.head(h);
            if w == s {
                path.push(h);
                let mut key: Vec<usize> = path.iter().map(|h| h / 2).collect();
                key.sort_unstable();
                if seen.insert(key) {
                    out.push(path.clone());
                }
                path.pop();
            } else if w > s && !on[w] {
                on[w] = true;
                path.push(h);
                self.cycles_from(s, w, adj, on, path, seen, out);
                path.pop();
                on[w] = false;
            }
        }
    }

    /// The image under z ↦ az + b.
    pub fn map_affine(&self, a: C64, b: C64) -> EmbeddedGraph {
        EmbeddedGraph {
            vertices: self.vertices.iter().map(|z| a * z + b).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| GraphEdge { a: e.a, b: e.b, polyline: e.polyline.iter().map(|z| a * z + b).collect() })
                .collect(),
        }
    }
}

impl Topology {
    /// V − E + F_total = 1 + components.
    pub fn euler_holds(&self, g: &EmbeddedGraph) -> bool {
        g.vertices.len() as i64 - g.edges.len() as i64 + self.regions as i64 == 1 + self.components as i64
    }

    /// Complement region containing a point off the graph.
    pub fn region_of(&self, g: &EmbeddedGraph, z: C64) -> usize {
        let mut best: Option<(f64, usize)> = None;
        for f in &self.faces {
            if f.outer {
                continue;
            }
            if winding(&g.chain(&f.half_edges), z) == 0 {
                continue;
            }
            if best.map(|b| f.area < b.0).unwrap_or(true) {
                best = Some((f.area, f.region));
            }
        }
        best.map(|b| b.1).unwrap_or(0)
    }
}

/// Minimal SVG: polylines, dots (zeros) and crosses (poles), y axis up.
pub fn svg(paths: &[Vec<C64>], dots: &[C64], crosses: &[C64]) -> String {
    // The view is fixed by the marked points; paths running further are clipped.
    let marked = dots.len() + crosses.len() > 0;
    let all: Box<dyn Iterator<Item = &C64>> =
        if marked { Box::new(dots.iter().chain(crosses)) } else { Box::new(paths.iter().flatten()) };
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in all {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (-1.0, -1.0, 1.0, 1.0);
    }
    let mut span = (x1 - x0).max(y1 - y0);
    if span < 1e-9 {
        span = 2.0;
        (x0, y0, x1, y1) = (x0 - 1.0, y0 - 1.0, x1 + 1.0, y1 + 1.0);
    }
    // Square view around the box with a 20% margin on each side.
    let half = 0.7 * span;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let (vx, vy, w, h) = (cx - half, -cy - half, 2.0 * half, 2.0 * half);
    let sw = span / 400.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.6} {vy:.6} {w:.6} {h:.6}">"#);
    for p in paths {
        let pts: Vec<String> = p.iter().map(|z| format!("{:.6},{:.6}", z.re, 0.0 - z.im)).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="black" stroke-width="{sw:.6}" points="{}"/>"#, pts.join(" "));
    }
    for z in dots {
        let _ = writeln!(s, r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="black"/>"#, z.re, 0.0 - z.im, 3.0 * sw);
    }
    for z in crosses {
        let r = 3.0 * sw;
        let (x, y) = (z.re, 0.0 - z.im);
        let _ = writeln!(
            s,
            r#"<path d="M{:.6},{:.6}L{:.6},{:.6}M{:.6},{:.6}L{:.6},{:.6}" stroke="red" stroke-width="{sw:.6}"/>"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    fn triangle() -> EmbeddedGraph {
        EmbeddedGraph {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            edges: vec![
                GraphEdge { a: 0, b: 1, polyline: vec![] },
                GraphEdge { a: 1, b: 2, polyline: vec![] },
                GraphEdge { a: 2, b: 0, polyline: vec![] },
            ],
        }
    }

    #[test]
    fn triangle_faces() {
        let g = triangle();
        let t = g.topology().unwrap();
        assert_eq!(t.regions, 2);
        assert!(t.euler_holds(&g));
        assert_eq!(t.region_of(&g, c(0.2, 0.2)), 1);
        assert_eq!(t.region_of(&g, c(2.0, 2.0)), 0);
        // Counter-clockwise triangle: interior on the left of 0→1.
        assert_eq!(t.edge_sides[0], (1, 0));
        assert_eq!(g.simple_cycles().len(), 1);
    }

    #[test]
    fn nested_components_and_isolated_vertex() {
        let mut g = triangle();
        g.vertices.push(c(0.2, 0.2));
        g.vertices.push(c(0.3, 0.2));
        g.edges.push(GraphEdge { a: 3, b: 4, polyline: vec![] });
        g.vertices.push(c(5.0, 5.0));
        let t = g.topology().unwrap();
        assert_eq!(t.components, 3);
        assert_eq!(t.regions, 2);
        assert!(t.euler_holds(&g));
        assert_eq!(t.edge_sides[3], (1, 1));
    }

    #[test]
    fn parallel_edges_make_a_face() {
        let g = EmbeddedGraph {
            vertices: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            edges: vec![
                GraphEdge { a: 0, b: 1, polyline: vec![c(-1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)] },
                GraphEdge { a: 0, b: 1, polyline: vec![c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)] },
                GraphEdge { a: 0, b: 1, polyline: vec![] },
            ],
        };
        let t = g.topology().unwrap();
        assert_eq!(t.regions, 3);
        assert!(t.euler_holds(&g));
        assert_eq!(g.simple_cycles().len(), 3);
    }

    #[test]
    fn endpoint_mismatch_reported() {
        let g = EmbeddedGraph {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0)],
            edges: vec![GraphEdge { a: 0, b: 1, polyline: vec![c(0.0, 0.0), c(2.0, 0.0)] }],
        };
        assert_eq!(g.topology(), Err(GraphError::EndpointMismatch { edge: 0 }));
    }
}
