//! Arithmetic backends for points of `[0, 1]` under a fixed base.
//!
//! Every algorithm in the crate is written against [`Backend`], so the same
//! digit recursion runs on exact rationals, on the quadratic field `Q(beta)`
//! and on outward-rounded intervals.

pub mod interval;
pub mod quadratic;
pub mod real;

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub use interval::Interval;
pub use quadratic::{QuadElem, QuadraticField};
pub use real::{RealBeta, RealSource};

/// Arithmetic on points under a fixed base `beta`.
///
/// `floor` and `sign` return `None` when the backend cannot certify the
/// answer at its current precision; exact backends always answer.
pub trait Backend: Clone + Send + Sync {
    type Point: Clone + Debug + Send + Sync + PartialEq + Eq + std::hash::Hash;

    fn from_rational(&self, q: &BigRational) -> Self::Point;
    fn beta(&self) -> Self::Point;
    fn add(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn sub(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn mul(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    /// Reciprocal of a point certified nonzero.
    fn recip(&self, a: &Self::Point) -> Option<Self::Point>;
    fn floor(&self, a: &Self::Point) -> Option<BigInt>;
    fn sign(&self, a: &Self::Point) -> Option<Ordering>;
    /// Enclosure with roughly `bits` correct fractional bits.
    fn enclose(&self, a: &Self::Point, bits: u32) -> Interval;
    /// Whether points are represented exactly.
    fn is_exact(&self) -> bool;
    /// Current working precision in bits (0 for exact backends).
    fn bits(&self) -> u32 {
        0
    }

    /// `beta` itself when it is rational.
    fn rational_beta(&self) -> Option<BigRational> {
        None
    }

    fn from_int(&self, k: i64) -> Self::Point {
        self.from_rational(&BigRational::from_integer(k.into()))
    }

    fn zero(&self) -> Self::Point {
        self.from_int(0)
    }

    fn one(&self) -> Self::Point {
        self.from_int(1)
    }

    fn cmp(&self, a: &Self::Point, b: &Self::Point) -> Option<Ordering> {
        self.sign(&self.sub(a, b))
    }

    /// Width of the enclosure carried by the point itself.
    fn width(&self, a: &Self::Point) -> BigRational {
        if self.is_exact() {
            BigRational::zero()
        } else {
            self.enclose(a, self.bits()).width()
        }
    }

    /// Minimum; when the order is uncertain the result encloses both.
    fn min(&self, a: &Self::Point, b: &Self::Point) -> Self::Point {
        match self.cmp(a, b) {
            Some(Ordering::Greater) => b.clone(),
            Some(_) => a.clone(),
            None => self.hull_min(a, b),
        }
    }

    /// Componentwise minimum used when `min` cannot decide.
    fn hull_min(&self, a: &Self::Point, _b: &Self::Point) -> Self::Point {
        a.clone()
    }

    /// `beta^-n`.
    fn beta_pow_neg(&self, n: usize) -> Self::Point {
        let inv = self.recip(&self.beta()).expect("beta > 1 is invertible");
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, &inv);
        }
        acc
    }

    fn to_f64(&self, a: &Self::Point) -> f64 {
        self.enclose(a, 64).midpoint_f64()
    }

    /// Decimal rendering with `digits` places (midpoint of an enclosure).
    fn decimal(&self, a: &Self::Point, digits: usize) -> String {
        let bits = ((digits as f64) * 3.33) as u32 + 16;
        let i = self.enclose(a, bits.max(self.bits()));
        let mid = (i.lo() + i.hi()) / BigRational::from_integer(2.into());
        crate::numfmt::to_decimal(&mid, digits)
    }

    /// `ln a` for a positive point, from an enclosure with `bits` fractional bits.
    fn ln(&self, a: &Self::Point, bits: u32) -> f64 {
        let i = self.enclose(a, bits.max(self.bits()));
        let mid = (i.lo() + i.hi()) / BigRational::from_integer(2.into());
        crate::numfmt::ln_rational(&mid)
    }

    /// Runs `f`, retrying at higher precision where the backend supports it.
    fn escalate<T>(&self, mut f: impl FnMut(&Self) -> crate::Result<T>) -> crate::Result<T> {
        f(self)
    }
}

/// A rational base `beta = p/q > 1`; points are exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalField {
    beta: BigRational,
}

impl RationalField {
    pub fn new(beta: BigRational) -> Self {
        assert!(beta > BigRational::from_integer(1.into()), "base must exceed 1");
        RationalField { beta }
    }

    pub fn integer(b: u64) -> Self {
        Self::new(BigRational::from_integer(b.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.beta
    }

    pub fn is_integer(&self) -> bool {
        self.beta.is_integer()
    }
}

impl Backend for RationalField {
    type Point = BigRational;

    fn from_rational(&self, q: &BigRational) -> BigRational {
        q.clone()
    }
    fn beta(&self) -> BigRational {
        self.beta.clone()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn recip(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn floor(&self, a: &BigRational) -> Option<BigInt> {
        Some(a.floor().to_integer())
    }
    fn sign(&self, a: &BigRational) -> Option<Ordering> {
        Some(a.cmp(&BigRational::zero()))
    }
    fn enclose(&self, a: &BigRational, bits: u32) -> Interval {
        Interval::from_rational(a, bits)
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn to_f64(&self, a: &BigRational) -> f64 {
        a.to_f64().unwrap_or(f64::NAN)
    }
    fn rational_beta(&self) -> Option<BigRational> {
        Some(self.beta.clone())
    }
}

impl Backend for QuadraticField {
    type Point = QuadElem;

    fn from_rational(&self, q: &BigRational) -> QuadElem {
        QuadElem::rational(q.clone())
    }
    fn beta(&self) -> QuadElem {
        QuadraticField::beta(self)
    }
    fn add(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadraticField::add(self, a, b)
    }
    fn sub(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadraticField::sub(self, a, b)
    }
    fn mul(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadraticField::mul(self, a, b)
    }
    fn recip(&self, a: &QuadElem) -> Option<QuadElem> {
        QuadraticField::recip(self, a)
    }
    fn floor(&self, a: &QuadElem) -> Option<BigInt> {
        Some(QuadraticField::floor(self, a))
    }
    fn sign(&self, a: &QuadElem) -> Option<Ordering> {
        Some(QuadraticField::sign(self, a))
    }
    fn enclose(&self, a: &QuadElem, bits: u32) -> Interval {
        QuadraticField::enclose(self, a, bits)
    }
    fn is_exact(&self) -> bool {
        true
    }
}

/// A real base known by enclosures, evaluated at a fixed working precision.
#[derive(Clone, Debug)]
pub struct IntervalField {
    beta: std::sync::Arc<RealBeta>,
    bits: u32,
}

impl IntervalField {
    pub fn new(beta: std::sync::Arc<RealBeta>, bits: u32) -> Self {
        IntervalField { beta, bits }
    }

    pub fn real(&self) -> &RealBeta {
        &self.beta
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        IntervalField {
            beta: self.beta.clone(),
            bits,
        }
    }
}

impl Backend for IntervalField {
    type Point = Interval;

    fn from_rational(&self, q: &BigRational) -> Interval {
        Interval::from_rational(q, self.bits)
    }
    fn beta(&self) -> Interval {
        self.beta.enclose(self.bits)
    }
    fn add(&self, a: &Interval, b: &Interval) -> Interval {
        a.add(b)
    }
    fn sub(&self, a: &Interval, b: &Interval) -> Interval {
        a.sub(b)
    }
    fn mul(&self, a: &Interval, b: &Interval) -> Interval {
        a.mul(b)
    }
    fn recip(&self, a: &Interval) -> Option<Interval> {
        a.recip()
    }
    fn floor(&self, a: &Interval) -> Option<BigInt> {
        a.floor()
    }
    fn sign(&self, a: &Interval) -> Option<Ordering> {
        a.sign()
    }
    fn enclose(&self, a: &Interval, _bits: u32) -> Interval {
        a.clone()
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn bits(&self) -> u32 {
        self.bits
    }
    fn hull_min(&self, a: &Interval, b: &Interval) -> Interval {
        a.min(b)
    }
}
