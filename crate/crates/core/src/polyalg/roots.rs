use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::uni::{cabs, from_c64, to_c64, UniPoly};
use super::PolyError;
use crate::scalar::Real;
use crate::C64;

/// A root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: C64,
    pub mult: usize,
}

const MAX_ITER: usize = 600;
const CLUSTER_REL: f64 = 1e-8;

/// All roots of `p` with multiplicities, sorted by real then imaginary part.
///
/// Exact coefficient fields get a square-free split first, so multiplicities
/// there are exact. Floating fields cluster nearby approximations, with a
/// radius that grows with the perturbation sensitivity of a multiple root.
pub fn poly_roots<T: Real>(p: &UniPoly<T>) -> Result<Vec<Root>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let lo = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = UniPoly::new(p.coeffs()[lo..].to_vec());
    let mut out = Vec::new();
    if lo > 0 {
        out.push(Root { z: C64::new(0.0, 0.0), mult: lo });
    }
    if T::EXACT {
        for (mult, factor) in square_free(&reduced).into_iter().enumerate() {
            if factor.degree().unwrap_or(0) == 0 {
                continue;
            }
            for z in approximate_roots(&factor) {
                out.push(Root { z, mult: mult + 1 });
            }
        }
    } else {
        let approx = approximate_roots(&reduced);
        out.extend(cluster(&reduced, approx));
    }
    sort_roots(&mut out);
    Ok(out)
}

/// Roots repeated by multiplicity.
pub fn flat_roots(roots: &[Root]) -> Vec<C64> {
    roots
        .iter()
        .flat_map(|r| std::iter::repeat(r.z).take(r.mult))
        .collect()
}

pub fn sort_roots(r: &mut [Root]) {
    r.sort_by(|a, b| {
        a.z.re
            .total_cmp(&b.z.re)
            .then_with(|| a.z.im.total_cmp(&b.z.im))
    });
}

/// Yun's algorithm: element `i` is the product of the factors of
/// multiplicity `i + 1`.
pub fn square_free<T: Real>(p: &UniPoly<T>) -> Vec<UniPoly<T>> {
    let tol = 1e-12;
    let dp = p.derivative();
    let a0 = p.gcd(&dp, tol);
    let mut b = p.div_rem(&a0).0;
    let c = dp.div_rem(&a0).0;
    let mut d = c.sub(&b.derivative());
    let mut out = Vec::new();
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d, tol);
        let nb = b.div_rem(&a).0;
        let c = d.div_rem(&a).0;
        d = c.sub(&nb.derivative());
        b = nb;
        out.push(a);
    }
    out
}

/// Aberth-Ehrlich iteration with the Newton ratio evaluated in `T`.
/// Falls back to companion-matrix eigenvalues if the iteration diverges.
pub fn approximate_roots<T: Real>(p: &UniPoly<T>) -> Vec<C64> {
    let n = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(n) => n,
    };
    if n == 1 {
        let c = p.coeffs();
        return vec![to_c64(&(-c[0].clone() / c[1].clone()))];
    }
    let mag: Vec<f64> = p.coeffs().iter().map(cabs).collect();
    let eps = T::EPS.max(f64::MIN_POSITIVE);
    let mut z = initial_guesses(&mag);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut active = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            active = true;
            let zi = from_c64::<T>(z[i]);
            let (v, dv) = p.eval_with_deriv(&zi);
            if v.is_zero() {
                done[i] = true;
                continue;
            }
            let noise = 8.0 * n as f64 * eps * horner_bound(&mag, z[i].norm());
            let at_noise = cabs(&v) <= noise;
            let ratio = if dv.is_zero() {
                C64::new(f64::INFINITY, 0.0)
            } else {
                to_c64(&(v / dv))
            };
            let s: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let mut w = ratio / (C64::one() - ratio * s);
            if !w.is_finite() {
                // Nudge off a critical point.
                w = C64::from_polar(1e-3 * (1.0 + z[i].norm()), 0.7 + i as f64);
            }
            z[i] -= w;
            if at_noise || w.norm() <= 2.0 * f64::EPSILON * z[i].norm() || w.norm() < 1e-300 {
                done[i] = true;
            }
        }
        if !active {
            break;
        }
    }
    if z.iter().all(|v| v.is_finite()) {
        z
    } else {
        companion_roots(p)
    }
}

/// Upper-hull initialisation: rings of radii read off the Newton polygon of
/// log|a_i|, with staggered angular offsets.
fn initial_guesses(mag: &[f64]) -> Vec<C64> {
    let n = mag.len() - 1;
    let pts: Vec<(usize, f64)> = mag
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0)
        .map(|(i, m)| (i, m.ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let k = j - i;
        let r = ((li - lj) / k as f64).exp();
        for t in 0..k {
            let ang = 2.0 * PI * t as f64 / k as f64 + 2.0 * PI * i as f64 / n as f64 + sigma;
            out.push(C64::from_polar(r, ang));
        }
    }
    out
}

fn horner_bound(mag: &[f64], r: f64) -> f64 {
    mag.iter().rev().fold(0.0, |acc, m| acc * r + m)
}

/// Eigenvalues of the companion matrix, computed in double precision.
pub fn companion_roots<T: Real>(p: &UniPoly<T>) -> Vec<C64> {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    let m = p.to_f64().monic();
    let c = m.coeffs();
    let mut a = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = C64::one();
    }
    for i in 0..n {
        a[(i, n - 1)] = -c[i];
    }
    match Schur::new(a).eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => Vec::new(),
    }
}

/// Groups approximations into roots with multiplicity.
fn cluster<T: Real>(p: &UniPoly<T>, mut approx: Vec<C64>) -> Vec<Root> {
    approx.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mag: Vec<f64> = p.coeffs().iter().map(cabs).collect();
    let eps = (T::EPS * mag.len() as f64).max(f64::MIN_POSITIVE);
    let mut used = vec![false; approx.len()];
    let mut out = Vec::new();
    for i in 0..approx.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![approx[i]];
        let reach = 1e-3 * (1.0 + approx[i].norm());
        let mut cand: Vec<usize> = (0..approx.len())
            .filter(|&j| !used[j] && (approx[j] - approx[i]).norm() <= reach)
            .collect();
        cand.sort_by(|&a, &b| {
            (approx[a] - approx[i])
                .norm()
                .total_cmp(&(approx[b] - approx[i]).norm())
        });
        for j in cand {
            let mut trial = members.clone();
            trial.push(approx[j]);
            let m = trial.len();
            let c: C64 = trial.iter().sum::<C64>() / m as f64;
            let tay = p.taylor_at(&from_c64(c), m);
            let lead = cabs(&tay[m]);
            let rho = if lead > 0.0 {
                (eps * horner_bound(&mag, c.norm()) / lead).powf(1.0 / m as f64)
            } else {
                f64::INFINITY
            };
            let radius = (CLUSTER_REL * (1.0 + c.norm())).max(2.0 * rho);
            if trial.iter().all(|t| (t - c).norm() <= radius) {
                members = trial;
                used[j] = true;
            } else {
                break;
            }
        }
        let m = members.len();
        let c = members.iter().sum::<C64>() / m as f64;
        out.push(Root { z: c, mult: m });
    }
    out
}

/// leading coefficient · Π (z − r)^m
pub fn reconstruct(lead: C64, roots: &[Root]) -> UniPoly<f64> {
    let flat: Vec<Complex<f64>> = flat_roots(roots);
    UniPoly::from_roots(&flat).scale(&lead)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type P = UniPoly<f64>;

    #[test]
    fn simple_real_roots() {
        let r = poly_roots(&P::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].z + 1.0).norm() < 1e-14 && r[0].mult == 1);
        assert!((r[1].z - 1.0).norm() < 1e-14 && r[1].mult == 1);
    }

    #[test]
    fn double_root_float_and_exact() {
        let r = poly_roots(&P::from_real(&[4.0, -4.0, 1.0])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].mult, 2);
        assert!((r[0].z - 2.0).norm() < 1e-7);
        let e = poly_roots(&UniPoly::<BigRational>::from_ints(&[4, -4, 1])).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].mult, 2);
        assert!((e[0].z - 2.0).norm() < 1e-14);
    }

    #[test]
    fn zero_roots_stripped() {
        let r = poly_roots(&P::from_real(&[0.0, 0.0, -1.0, 0.0, 1.0])).unwrap();
        let zero = r.iter().find(|x| x.z.norm() < 1e-14).unwrap();
        assert_eq!(zero.mult, 2);
        assert_eq!(r.iter().map(|x| x.mult).sum::<usize>(), 4);
    }

    #[test]
    fn triple_root_clusters() {
        let p = P::from_roots(&[C64::new(1.0, 1.0); 3]).mul(&P::from_real(&[-3.0, 1.0]));
        let r = poly_roots(&p).unwrap();
        assert_eq!(r.len(), 2);
        let t = r.iter().find(|x| x.mult == 3).unwrap();
        assert!((t.z - C64::new(1.0, 1.0)).norm() < 1e-4);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(matches!(poly_roots(&P::zero()), Err(PolyError::ZeroPolynomial)));
    }

    #[test]
    fn companion_fallback_agrees() {
        let p = P::from_real(&[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let mut a = companion_roots(&p);
        let mut b = approximate_roots(&p);
        let key = |z: &C64| z.arg();
        a.sort_by(|x, y| key(x).total_cmp(&key(y)));
        b.sort_by(|x, y| key(x).total_cmp(&key(y)));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
