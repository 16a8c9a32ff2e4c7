//! Exactly solvable operators, their homogenized spectral problem and the
//! root-counting measures of the eigenpolynomials.
//!
//! The operator is Σ Q_i(z) d^i/dz^i with deg Q_i ≤ i, and the degree-n
//! problem is Σ λ^{k−i} Q_i p^{(i)} = λ^k p. In the monomial basis the
//! operator is upper triangular, so p is found by back substitution. For
//! large n the monomial coefficients of p cancel massively on the root set,
//! so coefficients are computed and evaluated in a [`Wide`] float whose width
//! grows with n (see [`bits_for_degree`]).

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::branch::probability_branch_test;
use crate::polyalg::{cabs, flat_roots, from_c64, newton_support, poly_roots, to_c64, BiPoly, PolyError, UniPoly};
use crate::scalar::{Real, Wide};
use crate::C64;

const RESONANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("polynomial is not balanced (M = {0})")]
    NotBalanced(i64),
    #[error("polynomial has no constant term")]
    NoConstantTerm,
    #[error("polynomial has no probability branch at infinity")]
    NoProbabilityBranch,
    #[error("no coefficient Q_i has full degree i")]
    NotExactlySolvable,
    #[error("1 is not a root of the limiting eigenvalue equation")]
    NoUnitRoot,
    #[error("1 is a multiple root of the limiting eigenvalue equation")]
    MultipleRootLambda,
    #[error("diagonal entry at degree {m} collides with lambda^k")]
    Resonance { m: usize },
    #[error("lambda does not solve the degree-{n} eigenvalue equation")]
    NotAnEigenvalue { n: usize },
    #[error("degree {n} is below the operator order {k}")]
    DegreeTooLow { n: usize, k: usize },
    #[error("evaluation point is a root")]
    EvalAtRoot,
    #[error(transparent)]
    Root(#[from] PolyError),
}

/// Σ_{i=1}^k Q_i(z) d^i/dz^i with deg Q_i ≤ i.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactlySolvableOperator<T> {
    pub k: usize,
    /// Q_1..=Q_k.
    pub qs: Vec<UniPoly<T>>,
    pub nondegenerate: bool,
    pub j0: usize,
}

impl<T: Real> ExactlySolvableOperator<T> {
    pub fn new(qs: Vec<UniPoly<T>>) -> Result<Self, EigenError> {
        let mut qs = qs;
        while qs.last().is_some_and(|q| q.is_zero()) {
            qs.pop();
        }
        let k = qs.len();
        for (idx, q) in qs.iter().enumerate() {
            if q.degree().unwrap_or(0) > idx + 1 {
                return Err(EigenError::NotBalanced(idx as i64 + 1 - q.degree().unwrap() as i64));
            }
        }
        let j0 = (1..=k)
            .rev()
            .find(|&i| qs[i - 1].degree() == Some(i))
            .ok_or(EigenError::NotExactlySolvable)?;
        Ok(ExactlySolvableOperator { k, qs, nondegenerate: j0 == k, j0 })
    }

    /// a_{i,j}, the z^j coefficient of Q_i.
    pub fn a(&self, i: usize, j: usize) -> Complex<T> {
        if i == 0 || i > self.k {
            return Complex::zero();
        }
        self.qs[i - 1].coeff(j)
    }

    pub fn cast<U: Real>(&self) -> ExactlySolvableOperator<U> {
        ExactlySolvableOperator {
            k: self.k,
            qs: self.qs.iter().map(|q| q.cast()).collect(),
            nondegenerate: self.nondegenerate,
            j0: self.j0,
        }
    }

    /// Symbol Σ Q_i(z) C^i.
    pub fn symbol(&self) -> BiPoly<T> {
        let mut terms = Vec::new();
        for (idx, q) in self.qs.iter().enumerate() {
            for (j, c) in q.coeffs().iter().enumerate() {
                terms.push((((idx + 1) as u32, j as u32), c.clone()));
            }
        }
        BiPoly::from_terms(terms)
    }

    /// Coefficient list of the degree-n eigenvalue equation in λ,
    /// ascending: λ^k − Σ a_ii [n]_i λ^{k−i}.
    pub fn eigen_equation(&self, n: usize) -> UniPoly<T> {
        let k = self.k;
        let mut c = vec![Complex::<T>::zero(); k + 1];
        c[k] = Complex::one();
        for i in 1..=k {
            c[k - i] = -(self.a(i, i) * falling::<T>(n, i));
        }
        UniPoly::new(c)
    }

    /// The limiting equation λ̃^k − Σ a_ii λ̃^{k−i}.
    pub fn limit_equation(&self) -> UniPoly<T> {
        let k = self.k;
        let mut c = vec![Complex::<T>::zero(); k + 1];
        c[k] = Complex::one();
        for i in 1..=k {
            c[k - i] = -self.a(i, i);
        }
        UniPoly::new(c)
    }

    /// Σ λ^{k−i} Q_i p^{(i)}.
    pub fn apply_homogenized(&self, lambda: &Complex<T>, p: &UniPoly<T>) -> UniPoly<T> {
        let mut acc = UniPoly::zero();
        let mut d = p.clone();
        for i in 1..=self.k {
            d = d.derivative();
            let lp = pow(lambda, self.k - i);
            acc = acc.add(&self.qs[i - 1].mul(&d).scale(&lp));
        }
        acc
    }
}

fn pow<T: Real>(x: &Complex<T>, e: usize) -> Complex<T> {
    let mut r = Complex::one();
    for _ in 0..e {
        r = r * x.clone();
    }
    r
}

/// [n]_i = n(n−1)···(n−i+1).
fn falling<T: Real>(n: usize, i: usize) -> T {
    let mut r = T::one();
    for t in 0..i {
        r = r * T::from_i64(n as i64 - t as i64);
    }
    r
}

/// Operator whose symbol is P + 1 after scaling the constant term to −1.
pub fn operator_from_balanced<T: Real>(p: &BiPoly<T>) -> Result<ExactlySolvableOperator<T>, EigenError> {
    let m = newton_support(p).m;
    if m != 0 {
        return Err(EigenError::NotBalanced(m));
    }
    let c0 = p.coeff(0, 0);
    if c0.is_zero() {
        return Err(EigenError::NoConstantTerm);
    }
    let rep = probability_branch_test(p);
    if !(rep.necessary_holds && rep.sufficient_holds) {
        return Err(EigenError::NoProbabilityBranch);
    }
    let s = -(Complex::<T>::one() / c0);
    let scaled = p.scale(&s);
    let k = scaled.degree_c() as usize;
    let qs = (1..=k).map(|i| scaled.c_coeff(i as u32)).collect();
    ExactlySolvableOperator::new(qs)
}

/// All k roots of the degree-n eigenvalue equation, with multiplicity.
pub fn eigenvalues_for_degree<T: Real>(op: &ExactlySolvableOperator<T>, n: usize) -> Result<Vec<C64>, EigenError> {
    let eq = op.eigen_equation(n);
    Ok(flat_roots(&poly_roots(&eq)?))
}

/// Checks that λ̃ = 1 is a simple root of the limiting equation.
pub fn check_unit_root<T: Real>(op: &ExactlySolvableOperator<T>) -> Result<(), EigenError> {
    let f = op.limit_equation();
    let one = Complex::<T>::one();
    let scale = 1.0 + f.norm1();
    let v = f.eval(&one);
    let tol = |x: &Complex<T>| if T::EXACT { x.is_zero() } else { cabs(x) <= RESONANCE_TOL * scale };
    if !tol(&v) {
        return Err(EigenError::NoUnitRoot);
    }
    if tol(&f.derivative().eval(&one)) {
        return Err(EigenError::MultipleRootLambda);
    }
    Ok(())
}

/// λ_n for n = k..=n_max on the branch with λ_n/n → 1, anchored at n_max and
/// continued downward by nearest normalized value.
pub fn select_principal_sequence<T: Real>(
    op: &ExactlySolvableOperator<T>,
    n_max: usize,
) -> Result<Vec<(usize, C64)>, EigenError> {
    check_unit_root(op)?;
    let k = op.k;
    if n_max < k {
        return Err(EigenError::DegreeTooLow { n: n_max, k });
    }
    let roots: Vec<(usize, Vec<C64>)> = (k..=n_max)
        .into_par_iter()
        .map(|n| eigenvalues_for_degree(op, n).map(|r| (n, r)))
        .collect::<Result<_, _>>()?;
    let mut target = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(roots.len());
    for (n, rs) in roots.iter().rev() {
        let nf = *n as f64;
        let best = rs
            .iter()
            .min_by(|a, b| ((*a / nf) - target).norm().total_cmp(&((*b / nf) - target).norm()))
            .copied()
            .unwrap_or_default();
        target = best / nf;
        out.push((*n, best));
    }
    out.reverse();
    Ok(out)
}

/// Degree-n eigenpair with normalized eigenvalue nearest 1.
pub fn principal_eigenvalue<T: Real>(op: &ExactlySolvableOperator<T>, n: usize) -> Result<C64, EigenError> {
    check_unit_root(op)?;
    let rs = eigenvalues_for_degree(op, n)?;
    let nf = n as f64;
    Ok(rs
        .into_iter()
        .min_by(|a, b| (a / nf - 1.0).norm().total_cmp(&(b / nf - 1.0).norm()))
        .unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub n: usize,
    pub lambda: Complex<T>,
    /// Monic, degree n.
    pub p: UniPoly<T>,
}

/// Newton polish of λ on the degree-n eigenvalue equation inside `T`.
pub fn refine_lambda<T: Real>(op: &ExactlySolvableOperator<T>, n: usize, lambda: C64) -> Complex<T> {
    let mut l = from_c64::<T>(lambda);
    if T::EXACT || lambda == C64::zero() {
        return l;
    }
    let eq = op.eigen_equation(n);
    let d = eq.derivative();
    for _ in 0..40 {
        let dv = d.eval(&l);
        if dv.is_zero() {
            break;
        }
        let step = eq.eval(&l) / dv;
        let small = cabs(&step) <= T::EPS * cabs(&l).max(1e-300);
        l = l - step;
        if small {
            break;
        }
    }
    l
}

/// Monic degree-n solution of the homogenized problem by back substitution.
pub fn eigenpolynomial<T: Real>(op: &ExactlySolvableOperator<T>, n: usize, lambda: &Complex<T>) -> Result<EigenPair<T>, EigenError> {
    let k = op.k;
    if n < k {
        return Err(EigenError::DegreeTooLow { n, k });
    }
    let lp: Vec<Complex<T>> = (0..=k).map(|e| pow(lambda, e)).collect();
    let lk = lp[k].clone();
    // T_{m,l} = Σ_i λ^{k−i} [l]_i a_{i, i−(l−m)}
    let entry = |m: usize, l: usize| -> Complex<T> {
        let s = l - m;
        let mut acc = Complex::zero();
        for i in s.max(1)..=k {
            let a = op.a(i, i - s);
            if a.is_zero() || i > l {
                continue;
            }
            acc = acc + lp[k - i].clone() * a * falling::<T>(l, i);
        }
        acc
    };
    let collide = |d: &Complex<T>| -> bool {
        let gap = lk.clone() - d.clone();
        if T::EXACT {
            gap.is_zero()
        } else {
            cabs(&gap) <= RESONANCE_TOL * cabs(&lk).max(cabs(d))
        }
    };
    let dn = entry(n, n);
    if !T::EXACT && cabs(&(lk.clone() - dn.clone())) > 1e-8 * cabs(&lk).max(cabs(&dn)).max(1e-300) {
        return Err(EigenError::NotAnEigenvalue { n });
    }
    if T::EXACT && !(lk.clone() - dn).is_zero() {
        return Err(EigenError::NotAnEigenvalue { n });
    }
    let mut c = vec![Complex::<T>::zero(); n + 1];
    c[n] = Complex::one();
    for m in (0..n).rev() {
        let dm = entry(m, m);
        if collide(&dm) {
            return Err(EigenError::Resonance { m });
        }
        let mut rhs = Complex::<T>::zero();
        for l in m + 1..=(m + k).min(n) {
            if c[l].is_zero() {
                continue;
            }
            rhs = rhs + entry(m, l) * c[l].clone();
        }
        c[m] = rhs / (lk.clone() - dm);
    }
    Ok(EigenPair { n, lambda: lambda.clone(), p: UniPoly::new(c) })
}

/// Largest coefficient of T p − λ^k p relative to (1 + |λ|^k)·max|p_j|.
pub fn eigen_residual<T: Real>(op: &ExactlySolvableOperator<T>, pair: &EigenPair<T>) -> f64 {
    let lk = pow(&pair.lambda, op.k);
    let r = op.apply_homogenized(&pair.lambda, &pair.p).sub(&pair.p.scale(&lk));
    let num = r.coeffs().iter().map(cabs).fold(0.0, f64::max);
    let cmax = pair.p.coeffs().iter().map(cabs).fold(0.0, f64::max);
    num / ((1.0 + cabs(&lk)) * cmax.max(1e-300))
}

/// Uniform probability measure on the roots of an eigenpolynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMeasure {
    pub points: Vec<C64>,
}

impl RootMeasure {
    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }
}

pub fn root_measure<T: Real>(pair: &EigenPair<T>) -> Result<RootMeasure, EigenError> {
    Ok(RootMeasure { points: flat_roots(&poly_roots(&pair.p)?) })
}

/// p′(z)/(n p(z)).
pub fn cauchy_of_polynomial<T: Real>(p: &UniPoly<T>, z: C64) -> Result<C64, EigenError> {
    Ok(log_derivative(p, z)? / p.degree().unwrap_or(0).max(1) as f64)
}

/// p′(z)/p(z), evaluated in `T`.
pub fn log_derivative<T: Real>(p: &UniPoly<T>, z: C64) -> Result<C64, EigenError> {
    let (v, d) = p.eval_with_deriv(&from_c64(z));
    let bound: f64 = p.coeffs().iter().rev().fold(0.0, |a, c| a * z.norm() + cabs(c));
    if v.is_zero() || cabs(&v) <= 4.0 * T::EPS * bound * p.coeffs().len() as f64 {
        return Err(EigenError::EvalAtRoot);
    }
    Ok(to_c64(&(d / v)))
}

/// |Σ Q_i(z) L^i − 1|.
pub fn symbol_residual<T: Real>(op: &ExactlySolvableOperator<T>, l: C64, z: C64) -> f64 {
    let mut acc = C64::zero();
    let mut lp = C64::one();
    for q in &op.qs {
        lp *= l;
        acc += q.eval_at(z) * lp;
    }
    (acc - 1.0).norm()
}

/// Width of the float used for degree-n eigenpolynomials.
pub fn bits_for_degree(n: usize) -> usize {
    let need = 96 + 5 * n / 2;
    *TIERS.iter().find(|&&b| b >= need).unwrap_or(TIERS.last().unwrap())
}

const TIERS: [usize; 9] = [128, 256, 384, 512, 768, 1024, 1536, 2048, 4096];

/// Result of solving one degree in wide precision, reported in f64.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenRun {
    pub n: usize,
    pub lambda: C64,
    pub bits: usize,
    /// Monic coefficients rounded to double.
    pub coeffs: Vec<C64>,
    pub roots: Vec<C64>,
    pub residual: f64,
    /// p′/p at the requested probe points (`None` at a root).
    pub log_derivative: Vec<Option<C64>>,
}

impl EigenRun {
    /// L_n = p′/(λ p) at probe `i`.
    pub fn normalized_log_derivative(&self, i: usize) -> Option<C64> {
        self.log_derivative[i].map(|d| d / self.lambda)
    }

    /// p′/(n p) at probe `i`.
    pub fn cauchy(&self, i: usize) -> Option<C64> {
        self.log_derivative[i].map(|d| d / self.n as f64)
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

fn run_in<T: Real>(op: &ExactlySolvableOperator<f64>, n: usize, lambda: C64, with_roots: bool, probes: &[C64], bits: usize) -> Result<EigenRun, EigenError> {
    let opw: ExactlySolvableOperator<T> = op.cast();
    let lw = refine_lambda(&opw, n, lambda);
    let pair = eigenpolynomial(&opw, n, &lw)?;
    let roots = if with_roots { root_measure(&pair)?.points } else { Vec::new() };
    Ok(EigenRun {
        n,
        lambda: to_c64(&lw),
        bits,
        coeffs: pair.p.coeffs().iter().map(to_c64).collect(),
        roots,
        residual: eigen_residual(&opw, &pair),
        log_derivative: probes.iter().map(|&z| log_derivative(&pair.p, z).ok()).collect(),
    })
}

/// Solves degree n at the given eigenvalue in a float wide enough for n.
pub fn eigen_run(op: &ExactlySolvableOperator<f64>, n: usize, lambda: C64, with_roots: bool, probes: &[C64]) -> Result<EigenRun, EigenError> {
    let bits = bits_for_degree(n);
    match bits {
        128 => run_in::<Wide<128>>(op, n, lambda, with_roots, probes, bits),
        256 => run_in::<Wide<256>>(op, n, lambda, with_roots, probes, bits),
        384 => run_in::<Wide<384>>(op, n, lambda, with_roots, probes, bits),
        512 => run_in::<Wide<512>>(op, n, lambda, with_roots, probes, bits),
        768 => run_in::<Wide<768>>(op, n, lambda, with_roots, probes, bits),
        1024 => run_in::<Wide<1024>>(op, n, lambda, with_roots, probes, bits),
        1536 => run_in::<Wide<1536>>(op, n, lambda, with_roots, probes, bits),
        2048 => run_in::<Wide<2048>>(op, n, lambda, with_roots, probes, bits),
        _ => run_in::<Wide<4096>>(op, n, lambda, with_roots, probes, bits),
    }
}

/// Principal-branch runs for each requested degree, in parallel.
pub fn principal_runs(op: &ExactlySolvableOperator<f64>, degrees: &[usize], with_roots: bool, probes: &[C64]) -> Result<Vec<EigenRun>, EigenError> {
    check_unit_root(op)?;
    let n_max = degrees.iter().copied().max().unwrap_or(op.k);
    let seq = select_principal_sequence(op, n_max)?;
    degrees
        .par_iter()
        .map(|&n| {
            let lambda = seq
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, l)| *l)
                .ok_or(EigenError::DegreeTooLow { n, k: op.k })?;
            eigen_run(op, n, lambda, with_roots, probes)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedReport {
    pub max_modulus: Vec<(usize, f64)>,
    /// Some degree exceeds twice the median of the maxima.
    pub grows: bool,
    pub warning: Option<String>,
}

/// Max root modulus per degree along the principal sequence.
pub fn roots_bounded_check(op: &ExactlySolvableOperator<f64>, degrees: &[usize]) -> Result<BoundedReport, EigenError> {
    let mut warning = None;
    if !op.nondegenerate {
        warning = Some("operator is degenerate; root boundedness is not guaranteed".to_string());
    }
    let limit_simple = poly_roots(&op.limit_equation())
        .map(|r| r.iter().all(|x| x.mult == 1))
        .unwrap_or(false);
    if !limit_simple && warning.is_none() {
        warning = Some("limiting eigenvalue equation has a double root".to_string());
    }
    let runs = principal_runs(op, degrees, true, &[])?;
    let max_modulus: Vec<(usize, f64)> = runs.iter().map(|r| (r.n, r.max_modulus())).collect();
    let mut sorted: Vec<f64> = max_modulus.iter().map(|x| x.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
    let grows = max_modulus.iter().any(|&(_, m)| m > 2.0 * median + 1e-12);
    Ok(BoundedReport { max_modulus, grows, warning })
}
