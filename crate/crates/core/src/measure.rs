//! Signed measures made of atoms and weighted arcs, with the quadrature used
//! to integrate kernels against them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Poly, C64};

/// Point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: C64,
    pub weight: f64,
}

/// Endpoint behaviour of an arc density in arclength s from the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EndKind {
    /// Bounded and smooth.
    #[default]
    Regular,
    /// Vanishes like √s (simple zero of the discriminant).
    SqrtZero,
    /// Blows up like 1/√s (simple pole of the differential).
    InvSqrtPole,
}

impl EndKind {
    fn singular(self) -> bool {
        self != EndKind::Regular
    }
}

/// Closed-form density along an arc, evaluated pointwise:
/// `sign·|num|^(1/2)/|den|/(2π)` when `sqrt_num`, else `sign·|num/den|/(2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDensity {
    pub sign: f64,
    pub num: Poly,
    pub den: Poly,
    pub sqrt_num: bool,
}

impl AnalyticDensity {
    pub fn eval(&self, z: C64) -> f64 {
        let n = self.num.eval(&z).norm();
        let d = self.den.eval(&z).norm();
        let mag = if self.sqrt_num { n.sqrt() / d } else { n / d };
        self.sign * mag / (2.0 * PI)
    }
}

/// Curve with a real density per unit arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub nodes: Vec<C64>,
    /// Unit tangents at the nodes; estimated from the polyline when empty.
    #[serde(default)]
    pub tangents: Vec<C64>,
    pub density: Vec<f64>,
    #[serde(default)]
    pub closed: bool,
    #[serde(default)]
    pub ends: [EndKind; 2],
    #[serde(default)]
    pub law: Option<AnalyticDensity>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SignedMeasure {
    pub atoms: Vec<Atom>,
    pub arcs: Vec<Arc>,
    pub total_mass: f64,
}

impl SignedMeasure {
    pub fn atomic(atoms: Vec<Atom>) -> Self {
        let total_mass = atoms.iter().map(|a| a.weight).sum();
        SignedMeasure { atoms, arcs: Vec::new(), total_mass }
    }

    /// Builds from parts and sets `total_mass` by quadrature.
    pub fn from_parts(atoms: Vec<Atom>, arcs: Vec<Arc>) -> Self {
        let mut m = SignedMeasure { atoms, arcs, total_mass: 0.0 };
        m.total_mass = m.integrate(|_| C64::new(1.0, 0.0), None).re;
        m
    }

    /// ∫ k(ζ) dμ(ζ). `near` marks a point where `k` is singular so that
    /// segments close to it are subdivided.
    pub fn integrate<K: Fn(C64) -> C64>(&self, k: K, near: Option<C64>) -> C64 {
        let mut acc: C64 = self.atoms.iter().map(|a| k(a.z) * a.weight).sum();
        for arc in &self.arcs {
            acc += arc.integrate(&k, near);
        }
        acc
    }

    /// Smallest distance from `z` to an atom or arc node (segments are
    /// sampled, so this is an upper estimate of the true distance).
    pub fn distance_to_support(&self, z: C64) -> f64 {
        let mut d = f64::INFINITY;
        for a in &self.atoms {
            d = d.min((a.z - z).norm());
        }
        for arc in &self.arcs {
            d = d.min(arc.distance(z));
        }
        d
    }

    /// Every density sample and weight is finite.
    pub fn is_finite(&self) -> bool {
        self.atoms.iter().all(|a| a.weight.is_finite() && a.z.is_finite())
            && self
                .arcs
                .iter()
                .all(|a| a.density.iter().all(|d| d.is_finite()))
    }
}

impl Arc {
    /// Arc carrying a closed-form density; samples are filled from the law.
    pub fn with_law(nodes: Vec<C64>, tangents: Vec<C64>, closed: bool, ends: [EndKind; 2], law: AnalyticDensity) -> Self {
        let density = nodes.iter().map(|&z| law.eval(z)).collect();
        Arc { nodes, tangents, density, closed, ends, law: Some(law) }
    }

    fn segments(&self) -> usize {
        let n = self.nodes.len();
        if n < 2 {
            0
        } else if self.closed {
            n
        } else {
            n - 1
        }
    }

    fn tangent(&self, i: usize) -> C64 {
        if let Some(t) = self.tangents.get(i) {
            return *t;
        }
        let n = self.nodes.len();
        let (a, b) = if self.closed {
            (self.nodes[(i + n - 1) % n], self.nodes[(i + 1) % n])
        } else if i == 0 {
            (self.nodes[0], self.nodes[1])
        } else if i == n - 1 {
            (self.nodes[n - 2], self.nodes[n - 1])
        } else {
            (self.nodes[i - 1], self.nodes[i + 1])
        };
        let d = b - a;
        d / d.norm()
    }

    /// Cubic Hermite piece on segment `i`: position and derivative at u.
    fn geom(&self, i: usize, u: f64) -> (C64, C64) {
        let n = self.nodes.len();
        let j = (i + 1) % n;
        let (p0, p1) = (self.nodes[i], self.nodes[j]);
        let len = (p1 - p0).norm();
        let m0 = self.tangent(i) * len;
        let m1 = self.tangent(j) * len;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let pos = p0 * h00 + m0 * h10 + p1 * h01 + m1 * h11;
        let d00 = 6.0 * u2 - 6.0 * u;
        let d10 = 3.0 * u2 - 4.0 * u + 1.0;
        let d01 = -6.0 * u2 + 6.0 * u;
        let d11 = 3.0 * u2 - 2.0 * u;
        let der = p0 * d00 + m0 * d10 + p1 * d01 + m1 * d11;
        (pos, der)
    }

    fn end_of_segment(&self, i: usize) -> (EndKind, EndKind) {
        if self.closed {
            return (EndKind::Regular, EndKind::Regular);
        }
        let last = self.segments() - 1;
        let a = if i == 0 { self.ends[0] } else { EndKind::Regular };
        let b = if i == last { self.ends[1] } else { EndKind::Regular };
        (a, b)
    }

    /// Density at parameter u of segment i.
    fn density_at(&self, i: usize, u: f64, z: C64) -> f64 {
        if let Some(law) = &self.law {
            return law.eval(z);
        }
        let n = self.nodes.len();
        let j = (i + 1) % n;
        let (d0, d1) = (self.density[i], self.density[j]);
        match self.end_of_segment(i) {
            (EndKind::SqrtZero, _) => d1 * u.sqrt(),
            (EndKind::InvSqrtPole, _) => d1 / u.max(1e-300).sqrt(),
            (_, EndKind::SqrtZero) => d0 * (1.0 - u).sqrt(),
            (_, EndKind::InvSqrtPole) => d0 / (1.0 - u).max(1e-300).sqrt(),
            _ => d0 + (d1 - d0) * u,
        }
    }

    pub fn distance(&self, z: C64) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.segments() {
            let a = self.nodes[i];
            let b = self.nodes[(i + 1) % self.nodes.len()];
            d = d.min(point_segment_distance(z, a, b));
        }
        if self.nodes.len() == 1 {
            d = (self.nodes[0] - z).norm();
        }
        d
    }

    /// Arclength of the Hermite curve.
    pub fn length(&self) -> f64 {
        let (x, w) = gauss_legendre();
        let mut acc = 0.0;
        for i in 0..self.segments() {
            for (xi, wi) in x.iter().zip(w) {
                acc += wi * self.geom(i, *xi).1.norm();
            }
        }
        acc
    }

    pub fn integrate<K: Fn(C64) -> C64>(&self, k: &K, near: Option<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.segments() {
            let (a, b) = self.end_of_segment(i);
            acc += self.integrate_piece(k, near, i, 0.0, 1.0, a.singular(), b.singular(), 0);
        }
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn integrate_piece<K: Fn(C64) -> C64>(
        &self,
        k: &K,
        near: Option<C64>,
        i: usize,
        u0: f64,
        u1: f64,
        sing0: bool,
        sing1: bool,
        depth: u32,
    ) -> C64 {
        if let Some(z) = near {
            if depth < 40 {
                let (pa, _) = self.geom(i, u0);
                let (pb, _) = self.geom(i, u1);
                let (pm, _) = self.geom(i, 0.5 * (u0 + u1));
                let size = (pb - pa).norm().max((pm - pa).norm());
                let dist = point_segment_distance(z, pa, pb).min((pm - z).norm());
                if dist < 1.5 * size {
                    let um = 0.5 * (u0 + u1);
                    return self.integrate_piece(k, near, i, u0, um, sing0, false, depth + 1)
                        + self.integrate_piece(k, near, i, um, u1, false, sing1, depth + 1);
                }
            }
        }
        if sing0 && sing1 {
            let um = 0.5 * (u0 + u1);
            return self.integrate_piece(k, near, i, u0, um, true, false, depth)
                + self.integrate_piece(k, near, i, um, u1, false, true, depth);
        }
        let (x, w) = gauss_legendre();
        let h = u1 - u0;
        let mut acc = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(w) {
            // u = u0 + h t² (or mirrored) flattens √ and 1/√ endpoint laws.
            let (u, jac) = if sing0 {
                (u0 + h * xi * xi, 2.0 * h * xi)
            } else if sing1 {
                (u1 - h * xi * xi, 2.0 * h * xi)
            } else {
                (u0 + h * xi, h)
            };
            let (pos, der) = self.geom(i, u);
            let rho = self.density_at(i, u, pos);
            acc += k(pos) * (rho * der.norm() * jac * wi);
        }
        acc
    }
}

pub fn point_segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a) * d.conj()).re / l2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

const GL_N: usize = 32;

/// 32-point Gauss–Legendre rule on [0, 1].
pub fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_N))
}

/// Nodes and weights of the n-point rule mapped to [0, 1].
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}
