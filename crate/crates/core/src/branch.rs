//! Branches of an algebraic function at infinity.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::measure::{Atom, SignedMeasure};
use crate::polyalg::{cabs, coprime, newton_support, poly_roots, residue_at, to_c64, BiPoly, NewtonSupport, UniPoly};
use crate::scalar::Real;
use crate::C64;

const REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchError {
    #[error("diagonal coefficients do not sum to zero")]
    NecessaryConditionFails,
    #[error("weighted diagonal sum vanishes; the recursion step is not solvable")]
    SufficientConditionFails,
    #[error("pole at {z} is not simple")]
    MultiplePole { z: C64 },
    #[error("residue {residue} at {z} is not real")]
    NonRealResidue { z: C64, residue: C64 },
    #[error("numerator and denominator share a root")]
    NotCoprime,
    #[error("germ must vanish at infinity (deg num < deg den)")]
    NotProper,
}

/// The germ a0/z + Σ_{i≥2} a_i/z^i truncated at order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSeries<T> {
    pub a0: T,
    /// a_2..=a_n.
    pub tail: Vec<Complex<T>>,
    pub n: usize,
}

impl<T: Real> BranchSeries<T> {
    /// Coefficient a_i (a_1 is zero by normal form).
    pub fn coeff(&self, i: usize) -> Complex<T> {
        match i {
            0 => Complex::new(self.a0.clone(), T::zero()),
            1 => Complex::zero(),
            _ => self.tail.get(i - 2).cloned().unwrap_or_else(Complex::zero),
        }
    }

    /// Sum of the truncated series at z.
    pub fn eval(&self, z: C64) -> C64 {
        let w = z.inv();
        let mut acc = C64::new(self.a0.to_f64(), 0.0) * w;
        let mut wp = w;
        for a in &self.tail {
            wp *= w;
            acc += to_c64(a) * wp;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    #[serde(rename = "M")]
    pub m: i64,
    pub necessary_holds: bool,
    pub sufficient_holds: bool,
    pub diagonal_sum: C64,
    pub weighted_diagonal_sum: C64,
}

fn negligible<T: Real>(x: &Complex<T>, scale: f64) -> bool {
    if T::EXACT {
        x.is_zero()
    } else {
        cabs(x) <= REL_TOL * scale
    }
}

/// Σα_{i,i−M} and Σ i·α_{i,i−M} along the extremal diagonal.
fn diagonal_sums<T: Real>(p: &BiPoly<T>, m: i64) -> (Complex<T>, Complex<T>, f64, f64) {
    let mut s = Complex::zero();
    let mut ws = Complex::zero();
    let mut abs = 0.0;
    let mut wabs = 0.0;
    for (&(i, j), a) in p.terms() {
        if i as i64 - j as i64 == m {
            s = s + a.clone();
            ws = ws + a.clone() * T::from_i64(i as i64);
            abs += cabs(a);
            wabs += i as f64 * cabs(a);
        }
    }
    (s, ws, abs, wabs)
}

pub fn probability_branch_test<T: Real>(p: &BiPoly<T>) -> BranchReport {
    let m = newton_support(p).m;
    let (s, ws, abs, wabs) = diagonal_sums(p, m);
    BranchReport {
        m,
        necessary_holds: negligible(&s, abs),
        sufficient_holds: !negligible(&ws, wabs),
        diagonal_sum: to_c64(&s),
        weighted_diagonal_sum: to_c64(&ws),
    }
}

/// Truncated power series arithmetic mod w^len.
fn series_mul<T: Real>(a: &[Complex<T>], b: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Coefficients of P̃(d, w) = Σ α_{ij} d^i w^{i−j−M} mod w^len, for the
/// series d = 1 + a_2 w + a_3 w² + ...
pub fn substituted_series<T: Real>(p: &BiPoly<T>, d: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let m = newton_support(p).m;
    let kmax = p.degree_c() as usize;
    let mut powers = vec![{
        let mut one = vec![Complex::zero(); len];
        if len > 0 {
            one[0] = Complex::one();
        }
        one
    }];
    for k in 1..=kmax {
        let next = series_mul(&powers[k - 1], d, len);
        powers.push(next);
    }
    let mut out = vec![Complex::zero(); len];
    for (&(i, j), a) in p.terms() {
        let shift = (i as i64 - j as i64 - m) as usize;
        for (t, c) in powers[i as usize].iter().enumerate() {
            if t + shift >= len {
                break;
            }
            out[t + shift] = out[t + shift].clone() + a.clone() * c.clone();
        }
    }
    out
}

/// Probability branch C = 1/z + Σ_{i=2}^{n} a_i/z^i by the inductive
/// solve a_{r+2} = −b_{r+1} / Σ i·α_{i,i−M}.
pub fn expand_probability_branch<T: Real>(p: &BiPoly<T>, n: usize) -> Result<BranchSeries<T>, BranchError> {
    let rep = probability_branch_test(p);
    if !rep.necessary_holds {
        return Err(BranchError::NecessaryConditionFails);
    }
    if !rep.sufficient_holds {
        return Err(BranchError::SufficientConditionFails);
    }
    let (_, ws, _, _) = diagonal_sums(p, rep.m);
    let len = n.max(1);
    // d[k] is the coefficient of w^k, so d[k] = a_{k+1}.
    let mut d = vec![Complex::<T>::zero(); len];
    d[0] = Complex::one();
    for r in 0..len.saturating_sub(1) {
        let s = substituted_series(p, &d[..=r], r + 2);
        let b = s[r + 1].clone();
        d[r + 1] = -(b / ws.clone());
    }
    Ok(BranchSeries { a0: T::one(), tail: d.into_iter().skip(1).collect(), n })
}

pub fn is_balanced<T: Real>(p: &BiPoly<T>) -> bool {
    newton_support(p).m == 0
}

/// Generic irreducibility for the support: two-dimensional Newton polygon
/// and a point on each coordinate axis.
pub fn genericity_irreducible(s: &NewtonSupport) -> bool {
    let two_d = s.hull.len() >= 3;
    let on_c_axis = s.points.iter().any(|&(_, j)| j == 0);
    let on_z_axis = s.points.iter().any(|&(i, _)| i == 0);
    two_d && on_c_axis && on_z_axis
}

/// Atomic measure with Cauchy transform num/den, when every pole is simple
/// with a real residue.
pub fn rational_motherbody<T: Real>(num: &UniPoly<T>, den: &UniPoly<T>) -> Result<SignedMeasure, BranchError> {
    let dn = num.degree().map(|d| d as i64).unwrap_or(-1);
    let dd = den.degree().map(|d| d as i64).unwrap_or(-1);
    if dn >= dd {
        return Err(BranchError::NotProper);
    }
    if !num.is_zero() && !coprime(num, den) {
        return Err(BranchError::NotCoprime);
    }
    let roots = poly_roots(den).map_err(|_| BranchError::NotProper)?;
    let mut atoms = Vec::with_capacity(roots.len());
    for r in roots {
        if r.mult > 1 {
            return Err(BranchError::MultiplePole { z: r.z });
        }
        let res = residue_at(num, den, r.z).map_err(|_| BranchError::MultiplePole { z: r.z })?;
        if res.im.abs() > REL_TOL * (1.0 + res.norm()) {
            return Err(BranchError::NonRealResidue { z: r.z, residue: res });
        }
        atoms.push(Atom { z: r.z, weight: res.re });
    }
    Ok(SignedMeasure::atomic(atoms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type E = BiPoly<BigRational>;

    fn q(n: i64, d: i64) -> Complex<BigRational> {
        Complex::new(BigRational::new(n.into(), d.into()), BigRational::zero())
    }

    #[test]
    fn binomial_series_exact() {
        let p = E::from_int_terms(&[(2, 2, 1), (2, 0, -1), (0, 0, -1)]);
        let s = expand_probability_branch(&p, 7).unwrap();
        let want = [q(0, 1), q(1, 2), q(0, 1), q(3, 8), q(0, 1), q(5, 16)];
        assert_eq!(s.tail, want);
    }

    #[test]
    fn double_line_fails_sufficient() {
        let p = E::from_int_terms(&[(2, 2, 1), (1, 1, -2), (0, 0, 1)]);
        let r = probability_branch_test(&p);
        assert!(r.necessary_holds && !r.sufficient_holds);
        assert_eq!(expand_probability_branch(&p, 4), Err(BranchError::SufficientConditionFails));
    }

    #[test]
    fn not_proper_rejected() {
        let num = UniPoly::<f64>::from_real(&[1.0, 1.0]);
        let den = UniPoly::<f64>::from_real(&[1.0, 1.0]);
        assert_eq!(rational_motherbody(&num, &den), Err(BranchError::NotProper));
    }
}
