//! Exact multivariate Laurent polynomials in z = (z_1, …, z_d) and
//! determinants of Laurent-polynomial matrices.
//!
//! Coefficients are generic over [`Ring`]; the exact backend uses Gaussian
//! rationals (or univariate E-polynomials over them, for characteristic
//! determinants), the floating backend uses `Complex64`. Terms live in a
//! `BTreeMap` keyed by exponent, so iteration order — and everything derived
//! from it — is canonical.

use crate::lattice::LatticeVector;
use crate::scalar::{Approx, Gaussian, Ring, RingOps};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("RankMismatch: operands have ranks {left} and {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("NonSquare: matrix is {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("ZeroComponent: evaluation point has a zero coordinate (index {index})")]
    ZeroComponent { index: usize },
    #[error("EmptyInput: operation needs at least one polynomial")]
    EmptyInput,
    #[error("ZeroPolynomial: roots of the zero polynomial are undefined")]
    ZeroPolynomial,
}

/// A Laurent polynomial Σ c_α z^α with finitely many nonzero terms.
///
/// Invariants: no stored zero coefficients; every exponent has length `rank`.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly<T> {
    rank: usize,
    terms: BTreeMap<LatticeVector, T>,
}

impl<T: RingOps> LaurentPoly<T> {
    pub fn zero(rank: usize) -> Self {
        LaurentPoly { rank, terms: BTreeMap::new() }
    }

    pub fn monomial(rank: usize, exponent: LatticeVector, coeff: T) -> Self {
        assert_eq!(exponent.rank(), rank, "exponent rank mismatch");
        let mut p = Self::zero(rank);
        p.insert_add(exponent, coeff);
        p
    }

    pub fn constant(rank: usize, coeff: T) -> Self {
        Self::monomial(rank, LatticeVector::zero(rank), coeff)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LatticeVector, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponent: &LatticeVector) -> Option<&T> {
        self.terms.get(exponent)
    }

    /// Adds `coeff · z^exponent`, dropping the term if it cancels to zero.
    pub fn insert_add(&mut self, exponent: LatticeVector, coeff: T) {
        debug_assert_eq!(exponent.rank(), self.rank);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exponent) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_rank(&self, rhs: &Self) -> Result<(), AlgebraError> {
        if self.rank == rhs.rank {
            Ok(())
        } else {
            Err(AlgebraError::RankMismatch { left: self.rank, right: rhs.rank })
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_rank(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_rank(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.check_rank(rhs)?;
        let mut out = Self::zero(self.rank);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.insert_add(ea.add(eb), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn negated(&self) -> Self {
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scaled(&self, s: &T) -> Self {
        let mut out = Self::zero(self.rank);
        for (e, c) in &self.terms {
            out.insert_add(e.clone(), c.mul(s));
        }
        out
    }

    pub fn map_coeffs<U: RingOps>(&self, f: impl Fn(&T) -> U) -> LaurentPoly<U> {
        let mut out = LaurentPoly::zero(self.rank);
        for (e, c) in &self.terms {
            out.insert_add(e.clone(), f(c));
        }
        out
    }

    /// Multiplies by the monomial z^shift.
    pub fn shifted(&self, shift: &LatticeVector) -> Self {
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, c)| (e.add(shift), c.clone())).collect(),
        }
    }

    /// Componentwise minimum exponent over all terms.
    pub fn min_exponents(&self) -> Option<LatticeVector> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, e| acc.component_min(e)))
    }

    /// Per-axis (min, max) exponent ranges.
    pub fn support_span(&self) -> Vec<(i64, i64)> {
        let mut span = vec![(0i64, 0i64); self.rank];
        for e in self.terms.keys() {
            for (k, &c) in e.components().iter().enumerate() {
                span[k].0 = span[k].0.min(c);
                span[k].1 = span[k].1.max(c);
            }
        }
        span
    }

    fn leading(&self) -> Option<(&LatticeVector, &T)> {
        self.terms.iter().next_back()
    }
}

impl<T: RingOps> RingOps for LaurentPoly<T> {
    fn zero_like(&self) -> Self {
        Self::zero(self.rank)
    }
    fn one_like(&self) -> Self {
        let witness = self
            .terms
            .values()
            .next()
            .expect("one_like needs a coefficient witness")
            .one_like();
        Self::constant(self.rank, witness)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, rhs: &Self) -> Self {
        self.try_add(rhs).expect("rank mismatch")
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.try_sub(rhs).expect("rank mismatch")
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("rank mismatch")
    }
    fn neg(&self) -> Self {
        self.negated()
    }

    /// Exact division in the Laurent ring. Both operands are normalized to
    /// ordinary polynomials (componentwise minimum exponent shifted to 0);
    /// divisibility is preserved by that normalization, and ordinary
    /// multivariate division by leading-term elimination does the rest.
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(self.zero_like());
        }
        let mp = self.min_exponents().unwrap();
        let mq = rhs.min_exponents().unwrap();
        let pn = self.shifted(&mp.neg());
        let qn = rhs.shifted(&mq.neg());
        let (qe, qc) = qn.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let mut rem = pn;
        let mut quo = self.zero_like();
        while !rem.is_zero() {
            let (le, lc) = rem.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
            let de = le.sub(&qe);
            if de.components().iter().any(|&c| c < 0) {
                return None;
            }
            let dc = lc.exact_div(&qc)?;
            let piece = LaurentPoly::monomial(self.rank, de.clone(), dc.clone());
            rem = rem.sub(&piece.mul(&qn));
            quo.insert_add(de, dc);
        }
        Some(quo.shifted(&mp.sub(&mq)))
    }
}

impl<T: RingOps + fmt::Display> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if e.is_zero() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*z^{e}")?;
            }
        }
        Ok(())
    }
}

impl<T: RingOps> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})*z^{e}")?;
        }
        Ok(())
    }
}

/// Dispatch threshold between cofactor expansion and fraction-free
/// elimination for symbolic determinants.
pub const DET_COFACTOR_MAX: usize = 6;

fn check_square<T>(m: &[Vec<LaurentPoly<T>>]) -> Result<usize, AlgebraError> {
    let n = m.len();
    if n == 0 {
        return Err(AlgebraError::NonSquare { rows: 0, cols: 0 });
    }
    for row in m {
        if row.len() != n {
            return Err(AlgebraError::NonSquare { rows: n, cols: row.len() });
        }
    }
    Ok(n)
}

/// Determinant of a square matrix of Laurent polynomials: cofactor expansion
/// for N ≤ 6, fraction-free (Bareiss) elimination above. Both routes give the
/// same exact result over an integral domain.
pub fn det_laurent<T: Ring>(m: &[Vec<LaurentPoly<T>>]) -> Result<LaurentPoly<T>, AlgebraError> {
    let n = check_square(m)?;
    if n <= DET_COFACTOR_MAX {
        det_laurent_cofactor(m)
    } else {
        det_laurent_fraction_free(m)
    }
}

/// Recursive cofactor expansion along the first row.
pub fn det_laurent_cofactor<T: Ring>(
    m: &[Vec<LaurentPoly<T>>],
) -> Result<LaurentPoly<T>, AlgebraError> {
    let n = check_square(m)?;
    let rank = m[0][0].rank();
    Ok(det_cofactor_inner(m, n, rank))
}

fn det_cofactor_inner<T: Ring>(m: &[Vec<LaurentPoly<T>>], n: usize, rank: usize) -> LaurentPoly<T> {
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = LaurentPoly::zero(rank);
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly<T>>> = (1..n)
            .map(|r| (0..n).filter(|&c| c != col).map(|c| m[r][c].clone()).collect())
            .collect();
        let sub = det_cofactor_inner(&minor, n - 1, rank);
        let term = m[0][col].mul(&sub);
        acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Bareiss fraction-free elimination over the polynomial ring; every division
/// by the previous pivot is exact (Sylvester identity).
pub fn det_laurent_fraction_free<T: Ring>(
    m: &[Vec<LaurentPoly<T>>],
) -> Result<LaurentPoly<T>, AlgebraError> {
    let n = check_square(m)?;
    let rank = m[0][0].rank();
    let mut a: Vec<Vec<LaurentPoly<T>>> = m.to_vec();
    let mut negate = false;
    let mut prev: Option<LaurentPoly<T>> = None;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(LaurentPoly::zero(rank));
            };
            a.swap(k, swap);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = match &prev {
                    None => num,
                    Some(p) => num.exact_div(p).expect("fraction-free division is exact"),
                };
            }
            a[i][k] = LaurentPoly::zero(rank);
        }
        prev = Some(a[k][k].clone());
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { det.negated() } else { det })
}

impl LaurentPoly<Gaussian> {
    /// Evaluation at a point of (C \ {0})^d.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64, AlgebraError> {
        assert_eq!(z.len(), self.rank, "evaluation point rank mismatch");
        if let Some(index) = z.iter().position(|c| c.re == 0.0 && c.im == 0.0) {
            return Err(AlgebraError::ZeroComponent { index });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = c.approx();
            for (k, &p) in e.components().iter().enumerate() {
                m *= z[k].powi(p as i32);
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Evaluation at z_k = e^{2πiθ_k}; the phase is accumulated in the angle
    /// so unit modulus is preserved exactly.
    pub fn eval_theta(&self, theta: &[f64]) -> Complex64 {
        assert_eq!(theta.len(), self.rank, "theta rank mismatch");
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            acc += c.approx() * Complex64::from_polar(1.0, TAU * e.dot_f64(theta));
        }
        acc
    }

    /// The Laurent polynomial with conjugated coefficients and reversed
    /// exponents; equals pointwise conjugation on the unit torus.
    pub fn conj_reverse(&self) -> Self {
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, c)| (e.neg(), c.conj())).collect(),
        }
    }
}

/// The `lp_arith` entry point: rank-checked ring operations.
pub fn lp_add<T: RingOps>(p: &LaurentPoly<T>, q: &LaurentPoly<T>) -> Result<LaurentPoly<T>, AlgebraError> {
    p.try_add(q)
}

pub fn lp_mul<T: RingOps>(p: &LaurentPoly<T>, q: &LaurentPoly<T>) -> Result<LaurentPoly<T>, AlgebraError> {
    p.try_mul(q)
}
