//! Scalar backends for the toolkit.
//!
//! All structural data (edge weights, potentials, polynomial coefficients)
//! is carried by [`Gaussian`], a complex number with arbitrary-precision
//! rational real and imaginary parts. Decisions that must be sound — flat-band
//! existence, cancellation of loop contributions — are made in this exact
//! arithmetic. Floating-point `Complex64` is a second backend for eigenvalue
//! work; the projection from exact to floating is always the explicit
//! [`Gaussian::approx`], never an implicit coercion.

use num::bigint::BigInt;
use num::{BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Commutative-ring operations used by the polynomial layers.
///
/// `zero_like`/`one_like` exist because some implementors (polynomials with a
/// fixed variable rank) cannot construct constants without a witness.
pub trait RingOps: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact division: `Some(q)` with `self == q * rhs` when such `q` exists.
    fn exact_div(&self, rhs: &Self) -> Option<Self>;
}

/// A ring whose constants need no witness.
pub trait Ring: RingOps {
    fn zero() -> Self;
    fn one() -> Self;
}

/// A field: every nonzero element is invertible.
pub trait FieldScalar: Ring {
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self) -> Self;

    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inv())
    }
}

/// Numeric projection into double-precision complex.
pub trait Approx {
    fn approx(&self) -> Complex64;
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"a/b"` or `"a"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|e| format!("bad numerator {n:?}: {e}"))?;
            let d: BigInt = d.trim().parse().map_err(|e| format!("bad denominator {d:?}: {e}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
            Ok(BigRational::from_integer(n))
        }
    }
}

/// Exact rational square root, when one exists.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().sqrt();
    let den = r.denom().sqrt();
    if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
        Some(BigRational::new(num, den))
    } else {
        None
    }
}

/// A Gaussian rational: `re + im·i` with `re, im ∈ ℚ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gaussian {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gaussian {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gaussian { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Gaussian::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Gaussian::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    pub fn from_real(re: BigRational) -> Self {
        Gaussian::new(re, BigRational::zero())
    }

    /// Exact conversion of an IEEE double pair; every finite double is a
    /// dyadic rational, so nothing is lost here.
    pub fn from_f64_pair(re: f64, im: f64) -> Option<Self> {
        Some(Gaussian::new(BigRational::from_f64(re)?, BigRational::from_f64(im)?))
    }

    pub fn i() -> Self {
        Gaussian::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gaussian::new(self.re.clone(), -self.im.clone())
    }

    /// `|self|²` as an exact rational.
    pub fn abs2(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> f64 {
        rational_to_f64(&self.abs2()).sqrt()
    }
}

impl Approx for Gaussian {
    fn approx(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

impl RingOps for Gaussian {
    fn zero_like(&self) -> Self {
        Gaussian::zero()
    }
    fn one_like(&self) -> Self {
        Gaussian::one()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        Gaussian::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Gaussian::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Gaussian::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
    fn neg(&self) -> Self {
        Gaussian::new(-self.re.clone(), -self.im.clone())
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if RingOps::is_zero(rhs) {
            None
        } else {
            Some(FieldScalar::div(self, rhs))
        }
    }
}

impl Ring for Gaussian {
    fn zero() -> Self {
        Gaussian::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Gaussian::new(BigRational::one(), BigRational::zero())
    }
}

impl FieldScalar for Gaussian {
    fn inv(&self) -> Self {
        let n = self.abs2();
        assert!(!n.is_zero(), "inverse of zero Gaussian rational");
        Gaussian::new(&self.re / &n, -&self.im / &n)
    }
}

impl fmt::Debug for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for &Gaussian {
    type Output = Gaussian;
    fn add(self, rhs: &Gaussian) -> Gaussian {
        RingOps::add(self, rhs)
    }
}

impl Sub for &Gaussian {
    type Output = Gaussian;
    fn sub(self, rhs: &Gaussian) -> Gaussian {
        RingOps::sub(self, rhs)
    }
}

impl Mul for &Gaussian {
    type Output = Gaussian;
    fn mul(self, rhs: &Gaussian) -> Gaussian {
        RingOps::mul(self, rhs)
    }
}

impl Neg for &Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        RingOps::neg(self)
    }
}

/// Square root in ℚ(i), when one exists there.
///
/// For `a + bi` a root `p + qi` needs `p² − q² = a`, `2pq = b`; both `p²` and
/// `q²` are rational exactly when `a² + b²` is a rational square.
pub fn gaussian_sqrt(g: &Gaussian) -> Option<Gaussian> {
    if RingOps::is_zero(g) {
        return Some(Gaussian::zero());
    }
    if g.im.is_zero() {
        if !g.re.is_negative() {
            return rational_sqrt(&g.re).map(Gaussian::from_real);
        }
        let q = rational_sqrt(&(-g.re.clone()))?;
        return Some(Gaussian::new(BigRational::zero(), q));
    }
    let norm = rational_sqrt(&g.abs2())?;
    let two = BigRational::from_integer(2.into());
    let p2 = (&g.re + &norm) / &two;
    let p = rational_sqrt(&p2)?;
    if p.is_zero() {
        return None;
    }
    let q = &g.im / &(&two * &p);
    let cand = Gaussian::new(p, q);
    if RingOps::mul(&cand, &cand) == *g {
        Some(cand)
    } else {
        None
    }
}

impl RingOps for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if RingOps::is_zero(rhs) {
            None
        } else {
            Some(self / rhs)
        }
    }
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
}

impl FieldScalar for Complex64 {
    fn inv(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }
}

impl Approx for Complex64 {
    fn approx(&self) -> Complex64 {
        *self
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions. Used only to propose candidates that are then
/// verified by exact substitution.
pub fn rationalize(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() || x.abs() >= 9.2e18 {
        return None;
    }
    let mut a = x;
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(a.floor() as i64), BigInt::one());
    let cap = BigInt::from(max_den);
    let mut frac = a - a.floor();
    for _ in 0..64 {
        if frac.abs() < 1e-12 {
            break;
        }
        a = 1.0 / frac;
        if !a.is_finite() || a.abs() >= 9.2e18 {
            break;
        }
        let ai = BigInt::from(a.floor() as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        frac = a - a.floor();
    }
    if q1.is_zero() {
        None
    } else {
        Some(BigRational::new(p1, q1))
    }
}
