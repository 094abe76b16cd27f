//! Outward-rounded dyadic intervals.
//!
//! An [`Interval`] is `[lo / 2^scale, hi / 2^scale]` with big-integer
//! numerators. Every operation rounds its result outward, so the true value
//! of any expression built from enclosed inputs stays inside.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    scale: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

impl Interval {
    /// Builds `[lo, hi] / 2^scale`. Panics if `lo > hi`.
    pub fn from_raw(lo: BigInt, hi: BigInt, scale: u32) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi, scale }
    }

    pub fn from_int(k: impl Into<BigInt>) -> Self {
        let k = k.into();
        Interval {
            lo: k.clone(),
            hi: k,
            scale: 0,
        }
    }

    /// Smallest interval at `scale` containing `q`.
    pub fn from_rational(q: &BigRational, scale: u32) -> Self {
        Self::from_bounds(q, q, scale)
    }

    /// Smallest interval at `scale` containing `[lo, hi]`.
    pub fn from_bounds(lo: &BigRational, hi: &BigRational, scale: u32) -> Self {
        let s = BigRational::from_integer(pow2(scale));
        let lo = (lo * &s).floor().to_integer();
        let hi = (hi * &s).ceil().to_integer();
        Interval::from_raw(lo, hi, scale)
    }

    /// Enclosure of `sqrt(q)` for `q >= 0`.
    pub fn sqrt(q: &BigRational, scale: u32) -> Self {
        assert!(!q.is_negative(), "sqrt of a negative number");
        let four_s = pow2(2 * scale);
        let num = q.numer() * &four_s;
        let (n, rem) = num.div_rem(q.denom());
        let root = n.sqrt();
        let exact = rem.is_zero() && &root * &root == n;
        let hi = if exact { root.clone() } else { &root + 1 };
        Interval::from_raw(root, hi, scale)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Re-expresses the interval at another scale, rounding outward.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let sh = (scale - self.scale) as usize;
                Interval {
                    lo: &self.lo << sh,
                    hi: &self.hi << sh,
                    scale,
                }
            }
            Ordering::Less => {
                let d = pow2(self.scale - scale);
                Interval {
                    lo: self.lo.div_floor(&d),
                    hi: ceil_div(&self.hi, &d),
                    scale,
                }
            }
        }
    }

    fn aligned(a: &Self, b: &Self) -> (Self, Self) {
        let s = a.scale.max(b.scale);
        (a.rescale(s), b.rescale(s))
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(self.lo.clone(), pow2(self.scale))
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(self.hi.clone(), pow2(self.scale))
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, pow2(self.scale))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        let m = BigRational::new(&self.lo + &self.hi, pow2(self.scale + 1));
        m.to_f64().unwrap_or(f64::NAN)
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo() <= q && q <= &self.hi()
    }

    /// True if `other` lies inside `self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        let (a, b) = Self::aligned(self, other);
        a.lo <= b.lo && b.hi <= a.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::aligned(self, other);
        Interval {
            lo: a.lo + b.lo,
            hi: a.hi + b.hi,
            scale: a.scale,
        }
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
            scale: self.scale,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let scale = self.scale.max(other.scale);
        let prods = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = prods.iter().min().unwrap().clone();
        let hi = prods.iter().max().unwrap().clone();
        Interval {
            lo,
            hi,
            scale: self.scale + other.scale,
        }
        .rescale(scale)
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        let (lo, hi) = if k.is_negative() {
            (&self.hi * k, &self.lo * k)
        } else {
            (&self.lo * k, &self.hi * k)
        };
        Interval {
            lo,
            hi,
            scale: self.scale,
        }
    }

    /// Reciprocal; `None` when the interval contains zero.
    pub fn recip(&self) -> Option<Self> {
        if self.sign().is_none() || self.lo.is_zero() || self.hi.is_zero() {
            return None;
        }
        if self.hi.is_negative() {
            return self.neg().recip().map(|r| r.neg());
        }
        let s = self.scale;
        let num = pow2(2 * s);
        Some(Interval {
            lo: num.div_floor(&self.hi),
            hi: ceil_div(&num, &self.lo),
            scale: s,
        })
    }

    /// `x^n` for a non-negative interval.
    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Interval::from_int(1).rescale(self.scale);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Floor of every point of the interval, if it is the same integer.
    pub fn floor(&self) -> Option<BigInt> {
        let d = pow2(self.scale);
        let a = self.lo.div_floor(&d);
        let b = self.hi.div_floor(&d);
        (a == b).then_some(a)
    }

    /// Certified sign, `None` if the interval straddles or touches zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        let (a, b) = Self::aligned(self, other);
        Interval {
            lo: a.lo.min(b.lo),
            hi: a.hi.min(b.hi),
            scale: a.scale,
        }
    }

    pub fn max(&self, other: &Self) -> Self {
        let (a, b) = Self::aligned(self, other);
        Interval {
            lo: a.lo.max(b.lo),
            hi: a.hi.max(b.hi),
            scale: a.scale,
        }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Interval {
                lo: BigInt::zero(),
                hi: (-&self.lo).max(self.hi.clone()),
                scale: self.scale,
            }
        }
    }

    /// Intersection, `None` if disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (a, b) = Self::aligned(self, other);
        let lo = a.lo.max(b.lo);
        let hi = a.hi.min(b.hi);
        (lo <= hi).then_some(Interval {
            lo,
            hi,
            scale: a.scale,
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.17e}, {:.17e}]",
            self.lo().to_f64().unwrap_or(f64::NAN),
            self.hi().to_f64().unwrap_or(f64::NAN)
        )
    }
}
