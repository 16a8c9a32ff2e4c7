//! Quadrature checks of candidate measures: Cauchy transforms, moments,
//! potentials, comparison with branches, and level-curve measures.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::measure::{AnalyticDensity, Arc, EndKind, SignedMeasure};
use crate::polyalg::{approximate_roots, poly_roots, residue_at, BiPoly};
use crate::quaddiff::QuadraticDifferential;
use crate::{Poly, C64};

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("{z} lies within {distance:e} of the support")]
    TooCloseToSupport { z: C64, distance: f64 },
    #[error("level set component is not a closed curve around the poles")]
    LevelCurveNotClosed,
    #[error("germ must be a0/z + O(1/z²) with a0 > 0")]
    NotAGerm,
    #[error("only simple poles with real residues are supported, failed at {z}")]
    UnsupportedPole { z: C64 },
}

/// Probes closer than this to the support are refused.
pub fn exclusion(z: C64) -> f64 {
    1e-3 * (1.0 + z.norm())
}

fn guard(mu: &SignedMeasure, z: C64) -> Result<(), VerifyError> {
    let d = mu.distance_to_support(z);
    if d <= exclusion(z) {
        return Err(VerifyError::TooCloseToSupport { z, distance: d });
    }
    Ok(())
}

/// ∫ dμ(ξ)/(z − ξ).
pub fn cauchy_quadrature(mu: &SignedMeasure, z: C64) -> Result<C64, VerifyError> {
    guard(mu, z)?;
    Ok(mu.integrate(|t| (z - t).inv(), Some(z)))
}

/// m_k = ∫ ξ^k dμ for k = 0..=k_max.
pub fn moments(mu: &SignedMeasure, k_max: usize) -> Vec<C64> {
    (0..=k_max).map(|k| mu.integrate(|t| t.powu(k as u32), None)).collect()
}

/// ∫ ln|z − ξ| dμ(ξ).
pub fn log_potential(mu: &SignedMeasure, z: C64) -> Result<f64, VerifyError> {
    guard(mu, z)?;
    Ok(mu.integrate(|t| C64::new((z - t).norm().ln(), 0.0), Some(z)).re)
}

/// |𝒞_μ(z) − Σ_{k≤k_max} m_k/z^{k+1}|.
pub fn expansion_error(mu: &SignedMeasure, z: C64, k_max: usize) -> Result<f64, VerifyError> {
    let c = cauchy_quadrature(mu, z)?;
    let m = moments(mu, k_max);
    let s: C64 = m.iter().enumerate().map(|(k, mk)| mk / z.powu(k as u32 + 1)).sum();
    Ok((c - s).norm())
}

/// Algebraic equation satisfied by the transform.
#[derive(Debug, Clone)]
pub enum Equation {
    Bivariate(BiPoly<f64>),
    Triple { p: Poly, q: Poly, r: Poly },
}

impl Equation {
    fn roots_at(&self, z: C64) -> Vec<C64> {
        match self {
            Equation::Bivariate(b) => approximate_roots(&b.in_c_at(&z)),
            Equation::Triple { p, q, r } => {
                let (a, b, c) = (p.eval(&z), q.eval(&z), r.eval(&z));
                if a.norm() == 0.0 {
                    return if b.norm() == 0.0 { Vec::new() } else { vec![-c / b] };
                }
                let s = (b * b - a * c * 4.0).sqrt();
                vec![(-b + s) / (a * 2.0), (-b - s) / (a * 2.0)]
            }
        }
    }

    /// |E(c, z)| relative to the sizes of its terms.
    fn residual(&self, c: C64, z: C64) -> f64 {
        match self {
            Equation::Bivariate(b) => {
                let mut num = C64::new(0.0, 0.0);
                let mut den = 0.0;
                for (&(i, j), a) in b.terms() {
                    let t = a * c.powu(i) * z.powu(j);
                    num += t;
                    den += t.norm();
                }
                num.norm() / den.max(f64::MIN_POSITIVE)
            }
            Equation::Triple { p, q, r } => {
                let t = [p.eval(&z) * c * c, q.eval(&z) * c, r.eval(&z)];
                let den: f64 = t.iter().map(|x| x.norm()).sum();
                (t[0] + t[1] + t[2]).norm() / den.max(f64::MIN_POSITIVE)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub sample_points: Vec<C64>,
    pub branch_values: Vec<C64>,
    pub quadrature_values: Vec<C64>,
    pub max_abs_error: f64,
    pub max_equation_residual: f64,
    /// Samples where the transform is nearer another root than the
    /// designated branch.
    pub branch_mismatches: usize,
    pub moments: Vec<C64>,
    pub mass_error: f64,
}

/// Uniform points in |z| ≤ radius outside the exclusion zone of the support.
pub fn sample_points(mu: &SignedMeasure, n: usize, seed: u64, radius: f64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = radius * rng.gen::<f64>().sqrt();
        let t = 2.0 * PI * rng.gen::<f64>();
        let z = C64::from_polar(r, t);
        if mu.distance_to_support(z) > exclusion(z) {
            out.push(z);
        }
    }
    out
}

/// Quadrature transform against the designated branch (or, without one,
/// the nearest root of the equation) at each sample.
pub fn compare_branch(
    mu: &SignedMeasure,
    eq: &Equation,
    samples: &[C64],
    designated: Option<&(dyn Fn(C64) -> C64 + Sync)>,
) -> VerificationReport {
    let rows: Vec<(C64, C64, f64, bool)> = samples
        .par_iter()
        .map(|&z| {
            let quad = cauchy_quadrature(mu, z).unwrap_or(C64::new(f64::NAN, f64::NAN));
            let roots = eq.roots_at(z);
            let nearest = roots
                .iter()
                .copied()
                .min_by(|a, b| (a - quad).norm().total_cmp(&(b - quad).norm()))
                .unwrap_or(C64::new(f64::NAN, f64::NAN));
            let (branch, mismatch) = match designated {
                Some(f) => {
                    let b = f(z);
                    (b, (nearest - b).norm() > 1e-9 * (1.0 + b.norm()) && (nearest - quad).norm() < (b - quad).norm())
                }
                None => (nearest, false),
            };
            (quad, branch, eq.residual(quad, z), mismatch)
        })
        .collect();
    let m = moments(mu, 6);
    let max_abs_error = rows.iter().map(|r| (r.0 - r.1).norm()).fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    VerificationReport {
        sample_points: samples.to_vec(),
        quadrature_values: rows.iter().map(|r| r.0).collect(),
        branch_values: rows.iter().map(|r| r.1).collect(),
        max_abs_error,
        max_equation_residual: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        branch_mismatches: rows.iter().filter(|r| r.3).count(),
        mass_error: (m[0].re - mu.total_mass).abs(),
        moments: m,
    }
}

/// max over interior arc nodes of |Im r|/|r| with r = τ·(√D/P)/(2πi), the
/// jump of the two branches across a tangent τ.
pub fn jump_density_check(mu: &SignedMeasure, qd: &QuadraticDifferential) -> f64 {
    let mut worst: f64 = 0.0;
    for arc in &mu.arcs {
        let n = arc.nodes.len();
        // Open arcs end at singular points, where the phase is meaningless.
        let inner = if arc.closed { 0..n } else { 1..n.saturating_sub(1) };
        for i in inner {
            let t = match arc.tangents.get(i) {
                Some(t) => *t,
                None => {
                    let (a, b) = (arc.nodes[i.saturating_sub(1)], arc.nodes[(i + 1).min(n - 1)]);
                    (b - a) / (b - a).norm()
                }
            };
            let z = arc.nodes[i];
            let r = t * qd.d.eval(&z).sqrt() / qd.p.eval(&z) / C64::new(0.0, 2.0 * PI);
            let m = r.norm();
            if m.is_finite() && m > 1e-12 {
                worst = worst.max(r.im.abs() / m);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCurve {
    pub measure: SignedMeasure,
    pub a0: f64,
    pub level: f64,
    /// max |𝒞_μ| at the poles of f and their centroid.
    pub interior_max: f64,
}

/// Measure on the outer component of {a0 ln|z| + Re∫(f − a0/z) = v} with
/// density |f|/(2π), whose transform is f outside and 0 inside.
pub fn level_curve_measure(num: &Poly, den: &Poly, v: f64) -> Result<LevelCurve, VerifyError> {
    let (dn, dd) = (num.degree(), den.degree());
    let a0 = match (dn, dd) {
        (Some(n), Some(d)) if n + 1 == d => num.leading() / den.leading(),
        _ => return Err(VerifyError::NotAGerm),
    };
    if a0.re <= 0.0 || a0.im.abs() > 1e-12 * a0.norm() {
        return Err(VerifyError::NotAGerm);
    }
    let a0 = a0.re;
    let mut poles = Vec::new();
    for r in poly_roots(den).map_err(|_| VerifyError::NotAGerm)? {
        let res = residue_at(num, den, r.z).map_err(|_| VerifyError::UnsupportedPole { z: r.z })?;
        if r.mult > 1 || res.im.abs() > 1e-10 * (1.0 + res.norm()) {
            return Err(VerifyError::UnsupportedPole { z: r.z });
        }
        poles.push((r.z, res.re));
    }
    let h = |z: C64| poles.iter().map(|(p, c)| c * (z - p).norm().ln()).sum::<f64>();
    let f = |z: C64| num.eval(&z) / den.eval(&z);
    let rmax = poles.iter().map(|p| p.0.norm()).fold(0.0, f64::max);
    let mut r_hi = 2.0 * rmax + 1.0;
    while h(C64::new(r_hi, 0.0)) <= v {
        r_hi *= 2.0;
        if r_hi > 1e300 {
            return Err(VerifyError::LevelCurveNotClosed);
        }
    }
    let mut r_lo = r_hi;
    while h(C64::new(r_lo, 0.0)) > v {
        r_hi = r_lo;
        r_lo *= 0.98;
        if r_lo <= rmax {
            return Err(VerifyError::LevelCurveNotClosed);
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (r_lo + r_hi);
        if h(C64::new(m, 0.0)) > v {
            r_hi = m;
        } else {
            r_lo = m;
        }
    }
    let start = C64::new(0.5 * (r_lo + r_hi), 0.0);
    let project = |mut z: C64| {
        for _ in 0..3 {
            let g = f(z).conj();
            z -= g * ((h(z) - v) / g.norm_sqr());
        }
        z
    };
    let dir = |z: C64| {
        let t = C64::new(0.0, 1.0) * f(z).conj();
        t / t.norm()
    };
    let step = 2.0 * PI * start.norm() / 1024.0;
    let mut nodes = vec![start];
    let mut z = start;
    let mut len = 0.0;
    loop {
        if !f(z).norm().is_normal() {
            return Err(VerifyError::LevelCurveNotClosed);
        }
        let k1 = dir(z);
        let k2 = dir(z + k1 * (0.5 * step));
        let k3 = dir(z + k2 * (0.5 * step));
        let k4 = dir(z + k3 * step);
        z = project(z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0));
        len += step;
        if len > 10.0 * step && (z - start).norm() < 1.5 * step {
            if (z - start).norm() < 0.5 * step {
                // Too close to the start to keep as a separate node.
            } else {
                nodes.push(z);
            }
            break;
        }
        nodes.push(z);
        if len > 50.0 * 2.0 * PI * start.norm() {
            return Err(VerifyError::LevelCurveNotClosed);
        }
    }
    // The curve must wind once around every pole.
    let mut ring = nodes.clone();
    ring.push(start);
    if poles.iter().any(|p| crate::quaddiff::winding(&ring, p.0) != 1) {
        return Err(VerifyError::LevelCurveNotClosed);
    }
    let tangents: Vec<C64> = nodes.iter().map(|&z| dir(z)).collect();
    let law = AnalyticDensity { sign: 1.0, num: num.clone(), den: den.clone(), sqrt_num: false };
    let arc = Arc::with_law(nodes, tangents, true, [EndKind::Regular; 2], law);
    let measure = SignedMeasure::from_parts(Vec::new(), vec![arc]);
    let mut probes: Vec<C64> = poles.iter().map(|p| p.0).collect();
    probes.push(probes.iter().sum::<C64>() / probes.len().max(1) as f64);
    let interior_max = probes
        .iter()
        .map(|&p| measure.integrate(|t| (p - t).inv(), Some(p)).norm())
        .fold(0.0, f64::max);
    Ok(LevelCurve { measure, a0, level: v, interior_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    #[test]
    fn atom_transform_and_moments() {
        let mu = SignedMeasure::atomic(vec![Atom { z: C64::new(0.0, 0.0), weight: 1.0 }]);
        assert_eq!(cauchy_quadrature(&mu, C64::new(2.0, 0.0)).unwrap(), C64::new(0.5, 0.0));
        let m = moments(&mu, 3);
        assert_eq!(m[0], C64::new(1.0, 0.0));
        assert!(m[1..].iter().all(|x| x.norm() == 0.0));
        let e = std::f64::consts::E;
        assert!((log_potential(&mu, C64::new(e, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(cauchy_quadrature(&mu, C64::new(1e-4, 0.0)), Err(VerifyError::TooCloseToSupport { .. })));
    }

    #[test]
    fn circle_level_curve() {
        let lc = level_curve_measure(&Poly::from_real(&[1.0]), &Poly::from_real(&[0.0, 1.0]), 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!(lc.measure.arcs[0].nodes.iter().all(|z| (z.norm() - e).abs() < 1e-12));
        assert!((lc.measure.total_mass - 1.0).abs() < 1e-10);
        assert!(lc.interior_max < 1e-8, "{}", lc.interior_max);
        let z = C64::new(2.0 * e, 0.0);
        assert!((cauchy_quadrature(&lc.measure, z).unwrap() - z.inv()).norm() < 1e-8);
    }

    #[test]
    fn uniform_circle_potential() {
        let lc = level_curve_measure(&Poly::from_real(&[1.0]), &Poly::from_real(&[0.0, 1.0]), 0.5).unwrap();
        let z = C64::new(3.0, 1.0);
        assert!((log_potential(&lc.measure, z).unwrap() - z.norm().ln()).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        let mu = SignedMeasure::atomic(vec![Atom { z: C64::new(0.0, 0.0), weight: 1.0 }]);
        assert_eq!(sample_points(&mu, 5, DEFAULT_SEED, 5.0), sample_points(&mu, 5, DEFAULT_SEED, 5.0));
    }
}
