use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;
use crate::C64;

/// Dense univariate polynomial with complex coefficients, ascending degree.
#[derive(Clone, PartialEq)]
pub struct UniPoly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: fmt::Debug> fmt::Debug for UniPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UniPoly").field("coeffs", &self.coeffs).finish()
    }
}

pub fn to_c64<T: Real>(c: &Complex<T>) -> C64 {
    C64::new(c.re.to_f64(), c.im.to_f64())
}

pub fn from_c64<T: Real>(c: C64) -> Complex<T> {
    Complex::new(T::from_f64(c.re), T::from_f64(c.im))
}

/// |c| evaluated in double precision.
pub fn cabs<T: Real>(c: &Complex<T>) -> f64 {
    to_c64(c).norm()
}

impl<T: Real> UniPoly<T> {
    /// Trailing zero coefficients are stripped so the leading one is nonzero.
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex::one())
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c z^k`.
    pub fn monomial(c: Complex<T>, k: usize) -> Self {
        let mut v = vec![Complex::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn from_real(c: &[f64]) -> Self {
        Self::new(c.iter().map(|&x| Complex::new(T::from_f64(x), T::zero())).collect())
    }

    pub fn from_c64(c: &[C64]) -> Self {
        Self::new(c.iter().map(|&x| from_c64(x)).collect())
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Complex::new(T::from_i64(x), T::zero())).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex<T>]) -> Self {
        let mut p = Self::one();
        for r in roots {
            p = p.mul(&Self::new(vec![-r.clone(), Complex::one()]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs.get(k).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True for exact (rational) coefficient fields.
    pub fn is_exact(&self) -> bool {
        T::EXACT
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex<T> {
        self.coeffs.last().cloned().unwrap_or_else(Complex::zero)
    }

    pub fn eval(&self, z: &Complex<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }

    /// Value and first derivative by a fused Horner pass.
    pub fn eval_with_deriv(&self, z: &Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p = Complex::zero();
        let mut dp = Complex::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp * z.clone() + p.clone();
            p = p * z.clone() + c.clone();
        }
        (p, dp)
    }

    /// Evaluation at a double-precision point, carried out in `T`.
    pub fn eval_at(&self, z: C64) -> C64 {
        to_c64(&self.eval(&from_c64(z)))
    }

    /// Taylor coefficients p^(j)(z)/j! for j = 0..=m.
    pub fn taylor_at(&self, z: &Complex<T>, m: usize) -> Vec<Complex<T>> {
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(m + 1);
        for j in 0..=m {
            if j >= n {
                out.push(Complex::zero());
                continue;
            }
            // Synthetic division by (x - z), in place on work[j..].
            for i in (j..n - 1).rev() {
                let t = work[i + 1].clone() * z.clone();
                work[i] = work[i].clone() + t;
            }
            out.push(work[j].clone());
        }
        out
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut v = vec![Complex::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(v)
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut p = Self::one();
        for _ in 0..e {
            p = p.mul(self);
        }
        p
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let inv = Complex::<T>::one() / self.leading();
        self.scale(&inv)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Complex::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() / lead.clone();
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].clone() - c.clone() * dc.clone();
            }
            // Force the cancelled slot to an exact zero in float mode too.
            r[k + dd] = Complex::zero();
            q[k] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    /// Monic gcd by the Euclidean algorithm. Reliable in exact mode only; in
    /// float mode remainders are truncated relative to `tol`.
    pub fn gcd(&self, o: &Self, tol: f64) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            let r = if T::EXACT { r } else { r.chop(tol * b.norm1()) };
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Zeroes coefficients with modulus at most `thr`.
    pub fn chop(&self, thr: f64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|c| if cabs(c) <= thr { Complex::zero() } else { c.clone() })
                .collect(),
        )
    }

    /// Sum of coefficient moduli.
    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(cabs).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|c| cabs(c).powi(2)).sum::<f64>().sqrt()
    }

    /// p(a z + b).
    pub fn compose_affine(&self, a: &Complex<T>, b: &Complex<T>) -> Self {
        let lin = Self::new(vec![b.clone(), a.clone()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::constant(c.clone()));
        }
        acc
    }

    /// Coefficientwise conversion to another scalar field through `f64`
    /// (exact for integer data).
    pub fn cast<U: Real>(&self) -> UniPoly<U> {
        UniPoly::new(self.coeffs.iter().map(|c| from_c64(to_c64(c))).collect())
    }

    pub fn to_f64(&self) -> UniPoly<f64> {
        self.cast()
    }

    /// Largest coefficient difference, relative to the larger norm.
    pub fn rel_distance(&self, o: &Self) -> f64 {
        let diff = self.sub(o);
        let d = diff.coeffs.iter().map(cabs).fold(0.0, f64::max);
        let s = self
            .coeffs
            .iter()
            .chain(o.coeffs.iter())
            .map(cabs)
            .fold(0.0, f64::max);
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }
}

/// D = Q² − 4PR.
pub fn discriminant_d<T: Real>(p: &UniPoly<T>, q: &UniPoly<T>, r: &UniPoly<T>) -> UniPoly<T> {
    let four = Complex::new(T::from_i64(4), T::zero());
    q.mul(q).sub(&p.mul(r).scale(&four))
}
