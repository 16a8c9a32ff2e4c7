//! Polynomial algebra over a generic scalar field.

mod bi;
pub mod json;
mod roots;
mod uni;

pub use bi::{convex_hull, newton_support, BiPoly, NewtonSupport};
pub use roots::{
    approximate_roots, companion_roots, flat_roots, poly_roots, reconstruct, sort_roots,
    square_free, Root,
};
pub use uni::{cabs, discriminant_d, from_c64, to_c64, UniPoly};

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::Real;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("zero polynomial has no finite root set")]
    ZeroPolynomial,
    #[error("{z} is not a simple zero of the denominator")]
    NotSimplePole { z: C64 },
}

const SIMPLE_TOL: f64 = 1e-10;

/// num(z0)/den′(z0) at a simple zero z0 of `den`.
pub fn residue_at<T: Real>(num: &UniPoly<T>, den: &UniPoly<T>, z0: C64) -> Result<C64, PolyError> {
    let d = den.derivative();
    let dv = d.eval_at(z0);
    let r = z0.norm().max(1.0);
    let scale: f64 = d
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| cabs(c) * r.powi(k as i32))
        .sum();
    if dv.norm() <= SIMPLE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(PolyError::NotSimplePole { z: z0 });
    }
    Ok(num.eval_at(z0) / dv)
}

/// Determinant by Gaussian elimination with modulus pivoting.
pub fn determinant<T: Real>(mut a: Vec<Vec<Complex<T>>>) -> Complex<T> {
    let n = a.len();
    let mut det = Complex::<T>::one();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| cabs(&a[x][col]).total_cmp(&cabs(&a[y][col])));
        let Some(piv) = piv else {
            return Complex::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / p.clone();
            for c in col..n {
                let t = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - t;
            }
        }
    }
    det
}

/// Sylvester resultant of two nonzero polynomials.
pub fn resultant<T: Real>(p: &UniPoly<T>, q: &UniPoly<T>) -> Complex<T> {
    let m = p.degree().unwrap_or(0);
    let n = q.degree().unwrap_or(0);
    if m + n == 0 {
        return Complex::one();
    }
    let size = m + n;
    let mut s = vec![vec![Complex::<T>::zero(); size]; size];
    // Rows hold descending coefficients shifted right.
    for r in 0..n {
        for k in 0..=m {
            s[r][r + k] = p.coeff(m - k);
        }
    }
    for r in 0..m {
        for k in 0..=n {
            s[n + r][r + k] = q.coeff(n - k);
        }
    }
    determinant(s)
}

/// True when `p` and `q` share no root. Exact fields test the resultant for
/// zero; floating fields probe `q` at the roots of `p`, since the resultant
/// of polynomials with clustered roots is tiny even when they are coprime.
pub fn coprime<T: Real>(p: &UniPoly<T>, q: &UniPoly<T>) -> bool {
    if p.is_zero() || q.is_zero() {
        return false;
    }
    if T::EXACT {
        return !resultant(p, q).is_zero();
    }
    let qm: Vec<f64> = q.coeffs().iter().map(cabs).collect();
    match poly_roots(p) {
        Ok(rs) => rs.iter().all(|r| {
            let b: f64 = qm.iter().rev().fold(0.0, |acc, c| acc * r.z.norm() + c);
            q.eval_at(r.z).norm() > 1e-8 * b
        }),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type P = UniPoly<f64>;
    type E = UniPoly<BigRational>;

    #[test]
    fn residues_of_partial_fractions() {
        let num = P::from_real(&[1.0, 3.0]);
        let den = P::from_real(&[-1.0, 0.0, 1.0]);
        assert!((residue_at(&num, &den, C64::new(1.0, 0.0)).unwrap() - 2.0).norm() < 1e-15);
        assert!((residue_at(&num, &den, C64::new(-1.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let r = residue_at(&P::one(), &P::from_real(&[0.0, 0.0, 1.0]), C64::new(0.0, 0.0));
        assert!(matches!(r, Err(PolyError::NotSimplePole { .. })));
    }

    #[test]
    fn coprime_examples() {
        assert!(!coprime(&P::from_real(&[-1.0, 0.0, 1.0]), &P::from_real(&[-1.0, 1.0])));
        assert!(coprime(&P::from_real(&[-1.0, 0.0, 1.0]), &P::from_real(&[0.0, 1.0])));
        assert!(!coprime(&E::from_ints(&[-1, 0, 1]), &E::from_ints(&[-1, 1])));
        assert!(coprime(&E::from_ints(&[1, 0, 1]), &E::from_ints(&[1, 2, 1])));
    }

    #[test]
    fn exact_resultant_value() {
        let r = resultant(&E::from_ints(&[1, 0, 1]), &E::from_ints(&[1, 2, 1]));
        assert_eq!(r, Complex::new(BigRational::from_integer(4.into()), BigRational::zero()));
    }
}
