//! Univariate polynomials in the energy variable E, their gcd and roots, and
//! the split of det(h(z) − E) into per-monomial energy polynomials.
//!
//! The split is the computational form of the flat-band criterion: E is a
//! flat-band energy iff every z-coefficient q_α of det(h(z) − E·I) vanishes
//! at E, i.e. iff E is a root of gcd_α q_α.

use crate::eigen;
use crate::floquet::FiberMatrix;
use crate::lattice::LatticeVector;
use crate::laurent::{det_laurent, AlgebraError, LaurentPoly};
use crate::scalar::{
    gaussian_sqrt, rationalize, Approx, FieldScalar, Gaussian, Ring, RingOps,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// Polynomial c_0 + c_1 E + … + c_m E^m; empty coefficient list is the zero
/// polynomial, otherwise the leading coefficient is nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct EnergyPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> EnergyPoly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        EnergyPoly { coeffs }
    }

    pub fn zero_poly() -> Self {
        EnergyPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The linear polynomial E − r.
    pub fn linear_root(r: &T) -> Self {
        Self::new(vec![r.neg(), T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero_poly();
        }
        let mut k = T::zero();
        let coeffs = self.coeffs[1..]
            .iter()
            .map(|c| {
                k = k.add(&T::one());
                c.mul(&k)
            })
            .collect();
        Self::new(coeffs)
    }
}

impl<T: Ring> RingOps for EnergyPoly<T> {
    fn zero_like(&self) -> Self {
        EnergyPoly { coeffs: Vec::new() }
    }
    fn one_like(&self) -> Self {
        Self::constant(T::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::new(coeffs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        RingOps::add(self, &rhs.neg())
    }
    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return self.zero_like();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::new(coeffs)
    }
    fn neg(&self) -> Self {
        EnergyPoly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self>
    where
        Self: Sized,
    {
        // Polynomial long division with exact coefficient division; succeeds
        // iff the remainder vanishes identically.
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(self.zero_like());
        }
        let dd = rhs.coeffs.len() - 1;
        let lead = rhs.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![T::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let top = rem.last().unwrap();
            if top.is_zero() {
                rem.pop();
                continue;
            }
            let q = top.exact_div(lead)?;
            let pos = rem.len() - 1 - dd;
            for (k, b) in rhs.coeffs.iter().enumerate() {
                let s = q.mul(b);
                rem[pos + k] = rem[pos + k].sub(&s);
            }
            debug_assert!(rem.last().unwrap().is_zero());
            rem.pop();
            quo[pos] = q;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(Self::new(quo))
        } else {
            None
        }
    }
}

impl<T: Ring> Ring for EnergyPoly<T> {
    fn zero() -> Self {
        EnergyPoly { coeffs: Vec::new() }
    }
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: FieldScalar> EnergyPoly<T> {
    /// Euclidean division over a coefficient field.
    pub fn divrem(&self, den: &Self) -> (Self, Self) {
        assert!(!den.is_zero(), "division by zero polynomial");
        let dd = den.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero_poly(), self.clone());
        }
        let lead = den.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![T::zero(); self.coeffs.len() - dd];
        while rem.len() > dd {
            let top = rem.last().unwrap().clone();
            if top.is_zero() {
                rem.pop();
                continue;
            }
            let q = top.div(lead);
            let pos = rem.len() - 1 - dd;
            for (k, b) in den.coeffs.iter().enumerate() {
                let s = q.mul(b);
                rem[pos + k] = rem[pos + k].sub(&s);
            }
            rem.pop();
            quo[pos] = q;
        }
        (Self::new(quo), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(l) => {
                let inv = l.inv();
                Self::new(self.coeffs.iter().map(|c| c.mul(&inv)).collect())
            }
        }
    }
}

impl<T: Approx + Ring> EnergyPoly<T> {
    pub fn coeffs_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.approx()).collect()
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.approx();
        }
        acc
    }
}

impl<T: Ring + fmt::Display> fmt::Display for EnergyPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*E")?,
                _ => write!(f, "({c})*E^{k}")?,
            }
        }
        Ok(())
    }
}

impl<T: RingOps> fmt::Debug for EnergyPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})*E^{k}")?;
        }
        Ok(())
    }
}

/// Monic gcd over the coefficient field. `gcd(p, 0) = monic p`; the gcd of an
/// all-zero family is zero.
pub fn gcd_energy<T: FieldScalar>(polys: &[EnergyPoly<T>]) -> Result<EnergyPoly<T>, AlgebraError> {
    if polys.is_empty() {
        return Err(AlgebraError::EmptyInput);
    }
    let mut acc = EnergyPoly::zero_poly();
    for p in polys {
        acc = gcd_pair(&acc, p);
        if acc.degree() == Some(0) {
            break;
        }
    }
    Ok(acc.monic())
}

fn gcd_pair<T: FieldScalar>(a: &EnergyPoly<T>, b: &EnergyPoly<T>) -> EnergyPoly<T> {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let (_, r) = a.divrem(&b);
        a = b;
        b = r;
    }
    a
}

/// Root extraction for an exact energy polynomial.
#[derive(Clone, Debug)]
pub struct RootFind {
    /// Roots certified in ℚ(i) by exact substitution (with multiplicity).
    pub exact: Vec<Gaussian>,
    /// All roots numerically, from companion-matrix eigenvalues plus Newton
    /// polish (with multiplicity).
    pub numeric: Vec<Complex64>,
    /// max |p(root)| over the numeric roots.
    pub max_residual: f64,
}

/// Denominator caps tried in order when rationalizing a numeric root.
/// Clustered eigenvalues of multiple roots are only accurate to a few digits,
/// so small caps must come first; every candidate is verified exactly.
const RATIONALIZE_CAPS: [u64; 3] = [16, 4096, 1_000_000];

/// Finds roots of a nonzero polynomial over the Gaussian rationals.
///
/// Exact roots are taken from closed forms in degree ≤ 2 and, in higher
/// degree, from continued-fraction rationalizations of the numeric roots that
/// pass exact substitution; each certified root is deflated and the scan
/// repeats. Anything left is reported numerically only.
pub fn roots_energy(p: &EnergyPoly<Gaussian>) -> Result<RootFind, AlgebraError> {
    if p.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let numeric = numeric_roots(p);
    let max_coeff = p.coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max);
    let max_residual = numeric
        .iter()
        .map(|&r| p.eval_c64(r).norm())
        .fold(0.0, f64::max);
    debug_assert!(max_residual <= 1e-9 * (1.0 + max_coeff));

    let mut q = p.monic();
    let mut exact = Vec::new();
    'deflate: loop {
        match q.degree() {
            None | Some(0) => break,
            Some(1) => {
                exact.push(q.coeffs()[0].neg());
                break;
            }
            Some(2) => {
                // monic: E^2 + bE + c
                let b = &q.coeffs()[1];
                let c = &q.coeffs()[0];
                let disc = b.mul(b).sub(&c.mul(&Gaussian::from_int(4)));
                let Some(s) = gaussian_sqrt(&disc) else { break };
                let half = Gaussian::from_ratio(1, 2);
                exact.push(b.neg().add(&s).mul(&half));
                exact.push(b.neg().sub(&s).mul(&half));
                break;
            }
            Some(_) => {
                for r in &numeric {
                    for cap in RATIONALIZE_CAPS {
                        let Some(re) = rationalize(r.re, cap) else { continue };
                        let Some(im) = rationalize(r.im, cap) else { continue };
                        let cand = Gaussian::new(re, im);
                        if q.eval(&cand).is_zero() {
                            let (quo, rem) = q.divrem(&EnergyPoly::linear_root(&cand));
                            debug_assert!(rem.is_zero());
                            exact.push(cand);
                            q = quo;
                            continue 'deflate;
                        }
                    }
                }
                break;
            }
        }
    }
    Ok(RootFind { exact, numeric, max_residual })
}

fn numeric_roots(p: &EnergyPoly<Gaussian>) -> Vec<Complex64> {
    let Some(deg) = p.degree() else { return Vec::new() };
    if deg == 0 {
        return Vec::new();
    }
    let c = p.coeffs_c64();
    let lead = c[deg];
    let mut companion = DMatrix::from_element(deg, deg, Complex64::new(0.0, 0.0));
    for i in 1..deg {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -c[i] / lead;
    }
    let mut roots = eigen::general_eigenvalues(&companion).unwrap_or_default();
    let dc = p.derivative().coeffs_c64();
    for r in &mut roots {
        *r = newton_polish(&c, &dc, *r);
    }
    eigen::sort_complex(&mut roots);
    roots
}

fn newton_polish(coeffs: &[Complex64], dcoeffs: &[Complex64], mut x: Complex64) -> Complex64 {
    let horner = |cs: &[Complex64], x: Complex64| {
        cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    };
    for _ in 0..12 {
        let f = horner(coeffs, x);
        let df = horner(dcoeffs, x);
        if df.norm() < 1e-300 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.norm() < 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// det(h(z) − E) split by z-monomials: the finite family {q_α} with
/// det(h(z) − E·I) = Σ_α z^α q_α(E).
#[derive(Clone, Debug)]
pub struct CharSplit {
    n: usize,
    rank: usize,
    parts: BTreeMap<LatticeVector, EnergyPoly<Gaussian>>,
}

impl CharSplit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn parts(&self) -> impl Iterator<Item = (&LatticeVector, &EnergyPoly<Gaussian>)> {
        self.parts.iter()
    }

    pub fn part(&self, alpha: &LatticeVector) -> Option<&EnergyPoly<Gaussian>> {
        self.parts.get(alpha)
    }

    /// The z-free part; it has degree N with leading coefficient (−1)^N.
    pub fn part_zero(&self) -> EnergyPoly<Gaussian> {
        self.parts
            .get(&LatticeVector::zero(self.rank))
            .cloned()
            .unwrap_or_else(EnergyPoly::zero_poly)
    }

    pub fn gcd_all(&self) -> Result<EnergyPoly<Gaussian>, AlgebraError> {
        let parts: Vec<EnergyPoly<Gaussian>> = self.parts.values().cloned().collect();
        gcd_energy(&parts)
    }

    /// Exact flat-band test at E: all q_α(E) = 0.
    pub fn vanishes_at(&self, e: &Gaussian) -> bool {
        self.parts.values().all(|q| q.eval(e).is_zero())
    }

    /// Numeric reassembly Σ z^α q_α(E), for cross-checks against the
    /// evaluated determinant.
    pub fn eval(&self, z: &[Complex64], e: Complex64) -> Result<Complex64, AlgebraError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, q) in &self.parts {
            let mono = LaurentPoly::monomial(self.rank, alpha.clone(), Gaussian::one());
            acc += mono.eval(z)? * q.eval_c64(e);
        }
        Ok(acc)
    }
}

/// Computes the characteristic split of a fiber matrix by a symbolic
/// determinant over the ring of E-polynomials.
pub fn char_split(fiber: &FiberMatrix) -> Result<CharSplit, AlgebraError> {
    let n = fiber.n();
    let rank = fiber.rank();
    let minus_e = EnergyPoly::new(vec![Gaussian::zero(), Gaussian::from_int(-1)]);
    let mut rows: Vec<Vec<LaurentPoly<EnergyPoly<Gaussian>>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut entry = fiber.entry(i, j).map_coeffs(|c| EnergyPoly::constant(c.clone()));
            if i == j {
                entry.insert_add(LatticeVector::zero(rank), minus_e.clone());
            }
            row.push(entry);
        }
        rows.push(row);
    }
    let det = det_laurent(&rows)?;
    let parts: BTreeMap<LatticeVector, EnergyPoly<Gaussian>> =
        det.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
    Ok(CharSplit { n, rank, parts })
}
