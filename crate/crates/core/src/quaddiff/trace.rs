//! Horizontal trajectories by Dormand–Prince stepping in arclength.

use serde::Serialize;

use super::{QuadError, QuadraticDifferential, SingularKind, SingularPoint};
use crate::measure::gauss_legendre;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Vertex(usize),
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryClass {
    /// Ended at a zero or simple pole.
    DoubleSingular,
    Closed,
    Escaped,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// Index into the tracer's singular points.
    Vertex(usize),
    Point(C64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub polyline: Vec<C64>,
    /// Unit tangents at the polyline nodes, in the direction of travel.
    pub tangents: Vec<C64>,
    pub start: Endpoint,
    pub end: Endpoint,
    pub class: TrajectoryClass,
    pub arclength: f64,
    pub launch_angle: f64,
    /// Index of the launch direction used at each end vertex.
    pub start_dir: usize,
    pub end_dir: usize,
}

impl Trajectory {
    pub(crate) fn end_key(&self) -> ((usize, usize), (usize, usize)) {
        let v = |e: Endpoint| match e {
            Endpoint::Vertex(i) => i,
            Endpoint::Open => usize::MAX,
        };
        ((v(self.start), self.start_dir), (v(self.end), self.end_dir))
    }
}

const SNAP_REL: f64 = 1e-6;
const CAPTURE_REL: f64 = 1e-5;

/// Shared state for tracing many trajectories of one differential.
pub struct Tracer<'a> {
    qd: &'a QuadraticDifferential,
    pts: Vec<SingularPoint>,
    scale: f64,
    box_radius: f64,
    diameter: f64,
    cap: Vec<f64>,
}

fn dp_tableau() -> ([[f64; 6]; 6], [f64; 7], [f64; 7]) {
    let a = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    let b5 = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    let b4 = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    (a, b5, b4)
}

impl<'a> Tracer<'a> {
    pub fn new(qd: &'a QuadraticDifferential) -> Result<Self, QuadError> {
        let pts = super::singular_points(qd)?;
        let radius = pts.iter().map(|p| p.z.norm()).fold(0.0, f64::max);
        let mut diameter: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                diameter = diameter.max((a.z - b.z).norm());
            }
        }
        let scale = if radius > 0.0 { radius.max(diameter) } else { 1.0 };
        let box_radius = if pts.is_empty() {
            f64::INFINITY
        } else if radius > 0.0 {
            4.0 * radius
        } else {
            4.0
        };
        let cap = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let sep = pts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| (q.z - p.z).norm())
                    .fold(f64::INFINITY, f64::min);
                1e-2 * scale.min(0.5 * sep)
            })
            .collect();
        Ok(Tracer { qd, pts, scale, box_radius, diameter, cap })
    }

    pub fn points(&self) -> &[SingularPoint] {
        &self.pts
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    /// 50 × the diameter of the singular set (the scale when it is a point).
    pub fn default_budget(&self) -> f64 {
        50.0 * if self.diameter > 0.0 { self.diameter } else { self.scale }
    }

    fn snap(&self, z: C64) -> f64 {
        SNAP_REL * (1.0 + z.norm())
    }

    /// Unit horizontal direction at z, signed to agree with `heading`.
    fn field(&self, z: C64, heading: C64) -> C64 {
        let s = self.qd.phi(z).sqrt();
        let m = s.norm();
        if !(m.is_finite() && m > 0.0) {
            return heading;
        }
        let u = s.conj() / m;
        if (u * heading.conj()).re < 0.0 {
            -u
        } else {
            u
        }
    }

    fn nearest(&self, z: C64) -> Option<(usize, f64)> {
        self.pts
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p.z - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// One Dormand–Prince step; returns (5th-order point, error, final slope).
    fn rk_step(&self, z: C64, heading: C64, h: f64) -> (C64, f64, C64) {
        let (a, b5, b4) = dp_tableau();
        let mut k = [C64::new(0.0, 0.0); 7];
        k[0] = self.field(z, heading);
        for s in 1..7 {
            let mut y = z;
            for (j, kj) in k.iter().enumerate().take(s) {
                y += *kj * (h * a[s - 1][j]);
            }
            k[s] = self.field(y, heading);
        }
        let mut y5 = z;
        let mut err = C64::new(0.0, 0.0);
        for j in 0..7 {
            y5 += k[j] * (h * b5[j]);
            err += k[j] * (h * (b5[j] - b4[j]));
        }
        (y5, err.norm(), k[6])
    }

    /// ∫_z^{z1} √φ along the chord, √φ continued from its value along the
    /// heading at z; t² substitution absorbs the endpoint singularity.
    fn chord_to_point(&self, z: C64, heading: C64, z1: C64) -> C64 {
        let s0 = {
            let s = self.qd.phi(z).sqrt();
            if (s * heading).re < 0.0 {
                -s
            } else {
                s
            }
        };
        let (x, w) = gauss_legendre();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
        let mut prev = s0;
        let mut acc = C64::new(0.0, 0.0);
        for i in idx {
            let t = x[i];
            let zeta = z1 + (z - z1) * (t * t);
            let mut s = self.qd.phi(zeta).sqrt();
            if (s - prev).norm() > (s + prev).norm() {
                s = -s;
            }
            prev = s;
            acc += s * (z1 - z) * (2.0 * t * w[i]);
        }
        acc
    }

    fn captured(&self, z: C64, heading: C64, j: usize) -> bool {
        let w = self.chord_to_point(z, heading, self.pts[j].z);
        w.re > 0.0 && w.im.abs() <= CAPTURE_REL * w.norm()
    }

    fn nearest_direction(&self, j: usize, angle: f64) -> usize {
        let dirs = &self.pts[j].directions;
        (0..dirs.len())
            .min_by(|&a, &b| ang_dist(dirs[a], angle).total_cmp(&ang_dist(dirs[b], angle)))
            .unwrap_or(0)
    }

    /// Traces from `start` along `direction` until a singular endpoint is
    /// reached, the trajectory closes or escapes, or the budget runs out.
    pub fn trace(&self, start: Start, direction: f64, budget: f64) -> Result<Trajectory, QuadError> {
        let mut heading = C64::from_polar(1.0, direction);
        let (z0, start_ep, start_dir) = match start {
            Start::Vertex(i) => {
                let p = &self.pts[i];
                match p.kind {
                    SingularKind::DoublePole { .. } => return Err(QuadError::StartAtHigherPole { order: 2 }),
                    SingularKind::HigherPole { order } => return Err(QuadError::StartAtHigherPole { order }),
                    _ => {}
                }
                (p.z, Endpoint::Vertex(i), self.nearest_direction(i, direction))
            }
            Start::Point(z) => (z, Endpoint::Open, 0),
        };
        let mut poly = vec![z0];
        let mut tang = vec![heading];
        let mut z = z0;
        let mut arclen = 0.0;
        let h_cap = (self.box_radius / 200.0).min(self.scale / 50.0);
        let tol = 1e-12 * self.scale;
        if let Endpoint::Vertex(i) = start_ep {
            let h0 = 1e-3 * self.cap[i];
            z = z0 + heading * h0;
            heading = self.field(z, heading);
            arclen = h0;
            poly.push(z);
            tang.push(heading);
        }
        let mut h = h_cap.min(1e-3 * self.scale);
        let mut far: f64 = 0.0;
        let finish = |poly: Vec<C64>, tang: Vec<C64>, arclen: f64, end: Endpoint, end_dir: usize, class| Trajectory {
            polyline: poly,
            tangents: tang,
            start: start_ep,
            end,
            class,
            arclength: arclen,
            launch_angle: direction,
            start_dir,
            end_dir,
        };
        loop {
            if arclen > budget {
                return Ok(finish(poly, tang, arclen, Endpoint::Open, 0, TrajectoryClass::BudgetExceeded));
            }
            if z.norm() > self.box_radius {
                return Ok(finish(poly, tang, arclen, Endpoint::Open, 0, TrajectoryClass::Escaped));
            }
            let near = self.nearest(z);
            if let Some((j, d)) = near {
                let p = &self.pts[j];
                let own = start_ep == Endpoint::Vertex(j);
                if p.is_endpoint() && d < self.cap[j] && (!own || arclen > 20.0 * self.cap[j]) && self.captured(z, heading, j) {
                    if let Some((pts, tg, len)) = self.approach(z, heading, j) {
                        let arrive = poly
                            .iter()
                            .chain(pts.iter())
                            .rev()
                            .find(|q| (**q - p.z).norm() >= 0.1 * self.cap[j])
                            .copied()
                            .unwrap_or(z);
                        poly.extend(pts);
                        tang.extend(tg);
                        arclen += len;
                        let end_dir = self.nearest_direction(j, (arrive - p.z).arg());
                        return Ok(finish(poly, tang, arclen, Endpoint::Vertex(j), end_dir, TrajectoryClass::DoubleSingular));
                    }
                }
                if !p.is_endpoint() && d < self.snap(p.z) {
                    return Ok(finish(poly, tang, arclen, Endpoint::Open, 0, TrajectoryClass::Escaped));
                }
            }
            let d_near = near.map(|n| n.1).unwrap_or(f64::INFINITY);
            let h_max = h_cap.min(0.2 * d_near);
            h = h.min(h_max);
            // Adaptive step with retries.
            let (znew, slope, used) = loop {
                let (y, err, k7) = self.rk_step(z, heading, h);
                if err <= tol || h < 1e-14 * self.scale {
                    let used = h;
                    let grow = if err > 0.0 { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) } else { 4.0 };
                    h = (h * grow).min(h_max.max(h));
                    break (y, k7, used);
                }
                h *= (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9);
            };
            let prev = z;
            far = far.max((z - z0).norm());
            z = znew;
            heading = slope;
            arclen += used;
            poly.push(z);
            tang.push(heading);
            if start_ep == Endpoint::Open && far > 100.0 * self.snap(z0) {
                let gap = crate::measure::point_segment_distance(z0, prev, z);
                let turn = ang_dist(heading.arg(), direction);
                // Chord sagitta allowance for curvature up to 1/scale.
                if gap <= self.snap(z0) + used * used / self.scale && turn <= 1e-3 + used / self.scale {
                    *poly.last_mut().expect("nonempty") = z0;
                    return Ok(finish(poly, tang, arclen, Endpoint::Open, 0, TrajectoryClass::Closed));
                }
            }
        }
    }

    /// Steps with h = d/5 towards the singular point j until within snap.
    fn approach(&self, mut z: C64, mut heading: C64, j: usize) -> Option<(Vec<C64>, Vec<C64>, f64)> {
        let target = self.pts[j].z;
        let snap = self.snap(target);
        let mut pts = Vec::new();
        let mut tg = Vec::new();
        let mut len = 0.0;
        let mut d = (z - target).norm();
        for _ in 0..400 {
            if d <= snap {
                let last = (target - z) / (target - z).norm().max(f64::MIN_POSITIVE);
                pts.push(target);
                tg.push(if last.is_finite() { last } else { heading });
                return Some((pts, tg, len + d));
            }
            let h = 0.2 * d;
            let (y, _, k7) = self.rk_step(z, heading, h);
            let nd = (y - target).norm();
            if nd >= d {
                return None;
            }
            z = y;
            heading = k7;
            d = nd;
            len += h;
            pts.push(z);
            tg.push(heading);
        }
        None
    }
}

fn ang_dist(a: f64, b: f64) -> f64 {
    let t = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    t.min(2.0 * std::f64::consts::PI - t)
}

/// Traces from an arbitrary point; `start` within snap radius of a
/// singular point launches from that point.
pub fn trace_trajectory(qd: &QuadraticDifferential, start: C64, direction: f64, budget: f64) -> Result<Trajectory, QuadError> {
    let tr = Tracer::new(qd)?;
    let at = tr
        .points()
        .iter()
        .position(|p| (p.z - start).norm() <= SNAP_REL * (1.0 + p.z.norm()));
    let s = match at {
        Some(i) => Start::Vertex(i),
        None => Start::Point(start),
    };
    tr.trace(s, direction, budget)
}

/// max_k |Im ∫_{p0}^{p_k} √φ dz| / arclength along a polyline.
pub fn horizontality_defect(qd: &QuadraticDifferential, poly: &[C64]) -> f64 {
    if poly.len() < 2 {
        return 0.0;
    }
    let singular = |z: C64| {
        let v = qd.phi(z);
        v.norm() == 0.0 || !v.is_finite() || v.norm() < 1e-14 || v.norm() > 1e14
    };
    let (x, w) = gauss_legendre();
    let mut acc = C64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    let mut len = 0.0;
    let mut prev: Option<C64> = None;
    let n = poly.len();
    for i in 0..n - 1 {
        let (a, b) = (poly[i], poly[i + 1]);
        let dz = b - a;
        len += dz.norm();
        if dz.norm() == 0.0 {
            continue;
        }
        let sa = i == 0 && singular(a);
        let sb = i == n - 2 && singular(b);
        let mid = qd.phi(a + dz * 0.5).sqrt();
        let mid = match prev {
            Some(p) if (mid - p).norm() > (mid + p).norm() => -mid,
            Some(_) => mid,
            None if (mid * dz).re < 0.0 => -mid,
            None => mid,
        };
        let mut seg = C64::new(0.0, 0.0);
        for (t, wt) in x.iter().zip(w) {
            let (zeta, jac) = if sa {
                (a + dz * (t * t), dz * (2.0 * t))
            } else if sb {
                (b - dz * (t * t), dz * (2.0 * t))
            } else {
                (a + dz * *t, dz)
            };
            let mut s = qd.phi(zeta).sqrt();
            if (s * mid.conj()).re < 0.0 {
                s = -s;
            }
            seg += s * jac * *wt;
        }
        acc += seg;
        worst = worst.max(acc.im.abs());
        prev = Some(mid);
    }
    if len > 0.0 {
        worst / len
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_theta;
    use super::*;
    use crate::Poly;

    fn qd(p: &[f64], q: &[f64], r: &[f64]) -> QuadraticDifferential {
        build_theta(&Poly::from_real(p), &Poly::from_real(q), &Poly::from_real(r)).unwrap()
    }

    #[test]
    fn semicircle_edge_on_real_segment() {
        let q = qd(&[1.0], &[0.0, -1.0], &[1.0]);
        let t = trace_trajectory(&q, C64::new(-2.0, 0.0), 0.0, 100.0).unwrap();
        assert_eq!(t.class, TrajectoryClass::DoubleSingular);
        assert_eq!(t.end, Endpoint::Vertex(1));
        for z in &t.polyline {
            assert!(z.im.abs() < 1e-8 && z.re >= -2.0 - 1e-12 && z.re <= 2.0 + 1e-12);
        }
        assert!((t.arclength - 4.0).abs() < 1e-5);
    }

    #[test]
    fn arcsine_pole_to_pole() {
        let q = qd(&[-1.0, 0.0, 1.0], &[], &[-1.0]);
        let t = trace_trajectory(&q, C64::new(-1.0, 0.0), 0.0, 100.0).unwrap();
        assert_eq!(t.class, TrajectoryClass::DoubleSingular);
        assert!((t.polyline.last().unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(horizontality_defect(&q, &t.polyline) < 1e-6);
    }

    #[test]
    fn constant_differential_runs_out() {
        let q = qd(&[1.0], &[], &[0.25]);
        let t = trace_trajectory(&q, C64::new(0.0, 0.0), 0.0, 10.0).unwrap();
        assert_eq!(t.class, TrajectoryClass::BudgetExceeded);
        assert!(t.polyline.iter().all(|z| z.im.abs() < 1e-14));
    }

    #[test]
    fn circles_close() {
        // −dz²/z²: trajectories are circles about 0.
        let q = qd(&[0.0, 0.0, 1.0], &[], &[-0.25]);
        let t = trace_trajectory(&q, C64::new(1.0, 0.0), std::f64::consts::FRAC_PI_2, 100.0).unwrap();
        assert_eq!(t.class, TrajectoryClass::Closed);
        assert!(t.polyline.iter().all(|z| (z.norm() - 1.0).abs() < 1e-8));
    }

    #[test]
    fn higher_pole_start_refused() {
        let q = qd(&[0.0, 0.0, 1.0], &[], &[-0.25]);
        let tr = Tracer::new(&q).unwrap();
        assert!(matches!(tr.trace(Start::Vertex(0), 0.0, 1.0), Err(QuadError::StartAtHigherPole { order: 2 })));
    }
}
