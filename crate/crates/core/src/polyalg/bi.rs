use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::uni::{to_c64, UniPoly};
use crate::scalar::Real;
use crate::C64;

/// Sparse bivariate polynomial Σ α_{i,j} C^i z^j keyed by (i, j).
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T> {
    terms: BTreeMap<(u32, u32), Complex<T>>,
}

impl<T: Real> BiPoly<T> {
    /// Zero coefficients are dropped and repeated keys summed.
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Complex<T>)>>(it: I) -> Self {
        let mut terms: BTreeMap<(u32, u32), Complex<T>> = BTreeMap::new();
        for (k, c) in it {
            let e = terms.entry(k).or_insert_with(Complex::zero);
            *e = e.clone() + c;
        }
        terms.retain(|_, c| !c.is_zero());
        BiPoly { terms }
    }

    /// Integer real coefficients, handy for fixtures.
    pub fn from_int_terms(t: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(
            t.iter()
                .map(|&(i, j, c)| ((i, j), Complex::new(T::from_i64(c), T::zero()))),
        )
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Complex<T>> {
        &self.terms
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex<T> {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent of C.
    pub fn degree_c(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc = Vec::new();
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &o.terms {
                acc.push(((i1 + i2, j1 + j2), a.clone() * b.clone()));
            }
        }
        Self::from_terms(acc)
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone() * s.clone())))
    }

    /// Coefficient of C^i as a polynomial in z.
    pub fn c_coeff(&self, i: u32) -> UniPoly<T> {
        let deg = self
            .terms
            .keys()
            .filter(|k| k.0 == i)
            .map(|k| k.1 as usize)
            .max();
        match deg {
            None => UniPoly::zero(),
            Some(d) => {
                let mut v = vec![Complex::zero(); d + 1];
                for (&(ii, j), c) in &self.terms {
                    if ii == i {
                        v[j as usize] = c.clone();
                    }
                }
                UniPoly::new(v)
            }
        }
    }

    /// Polynomial in C obtained by fixing z.
    pub fn in_c_at(&self, z: &Complex<T>) -> UniPoly<T> {
        let k = self.degree_c() as usize;
        UniPoly::new((0..=k).map(|i| self.c_coeff(i as u32).eval(z)).collect())
    }

    pub fn eval(&self, c: &Complex<T>, z: &Complex<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for (&(i, j), a) in &self.terms {
            acc = acc + a.clone() * pow(c, i) * pow(z, j);
        }
        acc
    }

    pub fn eval_f64(&self, c: C64, z: C64) -> C64 {
        self.terms
            .iter()
            .map(|(&(i, j), a)| to_c64(a) * c.powu(i) * z.powu(j))
            .sum()
    }

    pub fn cast<U: Real>(&self) -> BiPoly<U> {
        BiPoly::from_terms(
            self.terms
                .iter()
                .map(|(k, c)| (*k, super::uni::from_c64(to_c64(c)))),
        )
    }

    pub fn to_f64(&self) -> BiPoly<f64> {
        self.cast()
    }
}

fn pow<T: Real>(x: &Complex<T>, e: u32) -> Complex<T> {
    let mut r = Complex::one();
    for _ in 0..e {
        r = r * x.clone();
    }
    r
}

/// Support, Newton polygon and the diagonal offset M = min(i − j).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonSupport {
    pub points: BTreeSet<(i64, i64)>,
    pub hull: Vec<(i64, i64)>,
    pub m: i64,
}

impl NewtonSupport {
    pub fn from_points<I: IntoIterator<Item = (i64, i64)>>(pts: I) -> Self {
        let points: BTreeSet<(i64, i64)> = pts.into_iter().collect();
        let m = points.iter().map(|(i, j)| i - j).min().unwrap_or(0);
        let hull = convex_hull(&points.iter().copied().collect::<Vec<_>>());
        NewtonSupport { points, hull, m }
    }
}

pub fn newton_support<T: Real>(p: &BiPoly<T>) -> NewtonSupport {
    NewtonSupport::from_points(p.terms.keys().map(|&(i, j)| (i as i64, j as i64)))
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
/// Degenerate inputs yield one or two vertices.
pub fn convex_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p = pts.to_vec();
    p.sort();
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior() {
        let h = convex_hull(&[(0, 0), (2, 0), (2, 2), (0, 2), (1, 1), (1, 0)]);
        assert_eq!(h, vec![(0, 0), (2, 0), (2, 2), (0, 2)]);
    }

    #[test]
    fn collinear_hull_is_segment() {
        assert_eq!(convex_hull(&[(0, 0), (1, 1), (2, 2)]), vec![(0, 0), (2, 2)]);
    }

    #[test]
    fn in_c_at_matches_eval() {
        let p = BiPoly::<f64>::from_int_terms(&[(2, 2, 1), (2, 0, -1), (0, 0, -1)]);
        let z = C64::new(0.3, 2.0);
        let c = C64::new(-1.0, 0.5);
        let q = p.in_c_at(&z);
        assert!((q.eval(&c) - p.eval(&c, &z)).norm() < 1e-14);
    }
}
