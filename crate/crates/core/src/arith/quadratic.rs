//! Exact arithmetic in `Q(beta)` for a quadratic irrational `beta`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::Interval;
use crate::error::{Error, Result};

/// `u + v * beta` with rational `u`, `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElem {
    pub u: BigRational,
    pub v: BigRational,
}

impl QuadElem {
    pub fn new(u: BigRational, v: BigRational) -> Self {
        QuadElem { u, v }
    }

    pub fn rational(u: BigRational) -> Self {
        QuadElem {
            u,
            v: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::rational(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*beta", self.u, self.v)
    }
}

/// The field `Q(beta)` where `beta` is the unique root of `a x^2 + b x + c`
/// in an isolating interval.
#[derive(Clone, Debug)]
pub struct QuadraticField {
    coeffs: [BigRational; 3],
    // beta^2 = p beta + q
    p: BigRational,
    q: BigRational,
    lo: BigRational,
    hi: BigRational,
    sign_at_lo: Ordering,
    plus_root: bool,
}

fn is_rational_square(q: &BigRational) -> bool {
    if q.is_negative() {
        return false;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    &(&n * &n) == q.numer() && &(&d * &d) == q.denom()
}

impl QuadraticField {
    /// Root of `a x^2 + b x + c` in `[lo, hi]`.
    ///
    /// Fails unless the polynomial is irreducible over `Q` and has exactly
    /// one root in the interval.
    pub fn new(
        a: BigRational,
        b: BigRational,
        c: BigRational,
        lo: BigRational,
        hi: BigRational,
    ) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidBeta("leading coefficient is zero".into()));
        }
        if lo > hi {
            return Err(Error::InvalidBeta("empty root interval".into()));
        }
        let p = -&b / &a;
        let q = -&c / &a;
        let disc = &p * &p + BigRational::from_integer(4.into()) * &q;
        if disc.is_negative() {
            return Err(Error::InvalidBeta("polynomial has no real root".into()));
        }
        if is_rational_square(&disc) {
            return Err(Error::InvalidBeta(
                "polynomial is reducible over Q; use a rational base".into(),
            ));
        }
        let monic = |t: &BigRational| t * t - &p * t - &q;
        let at_lo = monic(&lo);
        let at_hi = monic(&hi);
        let sign_at_lo = at_lo.cmp(&BigRational::zero());
        let sign_at_hi = at_hi.cmp(&BigRational::zero());
        if sign_at_lo == sign_at_hi || sign_at_lo == Ordering::Equal {
            return Err(Error::InvalidBeta(
                "interval does not isolate exactly one root".into(),
            ));
        }
        let mut field = QuadraticField {
            coeffs: [a, b, c],
            p,
            q,
            lo,
            hi,
            sign_at_lo,
            plus_root: true,
        };
        let half_p = &field.p / BigRational::from_integer(2.into());
        field.plus_root = field.cmp_beta(&half_p) == Ordering::Greater;
        if field.cmp_beta(&BigRational::one()) != Ordering::Greater {
            return Err(Error::InvalidBeta("root must exceed 1".into()));
        }
        Ok(field)
    }

    /// The golden ratio, root of `x^2 - x - 1` in `[1, 2]`.
    pub fn golden() -> Self {
        let r = |n: i64| BigRational::from_integer(n.into());
        QuadraticField::new(r(1), r(-1), r(-1), r(1), r(2)).expect("golden ratio field")
    }

    pub fn coeffs(&self) -> &[BigRational; 3] {
        &self.coeffs
    }

    pub fn isolating_interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    /// Exact comparison of `beta` against a rational.
    pub fn cmp_beta(&self, t: &BigRational) -> Ordering {
        if t < &self.lo {
            return Ordering::Greater;
        }
        if t > &self.hi {
            return Ordering::Less;
        }
        let val = t * t - &self.p * t - &self.q;
        let s = val.cmp(&BigRational::zero());
        debug_assert_ne!(s, Ordering::Equal, "irreducible polynomial has a rational root");
        if s == self.sign_at_lo {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub fn beta(&self) -> QuadElem {
        QuadElem::new(BigRational::zero(), BigRational::one())
    }

    pub fn add(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadElem::new(&a.u + &b.u, &a.v + &b.v)
    }

    pub fn sub(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadElem::new(&a.u - &b.u, &a.v - &b.v)
    }

    pub fn mul(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        let vv = &a.v * &b.v;
        QuadElem::new(
            &a.u * &b.u + &vv * &self.q,
            &a.u * &b.v + &a.v * &b.u + &vv * &self.p,
        )
    }

    pub fn norm(&self, a: &QuadElem) -> BigRational {
        &a.u * &a.u + &a.u * &a.v * &self.p - &a.v * &a.v * &self.q
    }

    /// Inverse of a nonzero element.
    pub fn recip(&self, a: &QuadElem) -> Option<QuadElem> {
        let n = self.norm(a);
        if n.is_zero() {
            return None;
        }
        Some(QuadElem::new((&a.u + &a.v * &self.p) / &n, -&a.v / &n))
    }

    /// Exact sign of `u + v beta`.
    pub fn sign(&self, a: &QuadElem) -> Ordering {
        if a.v.is_zero() {
            return a.u.cmp(&BigRational::zero());
        }
        let t = -&a.u / &a.v;
        let c = self.cmp_beta(&t);
        if a.v.is_positive() {
            c
        } else {
            c.reverse()
        }
    }

    /// Exact floor of `u + v beta`.
    pub fn floor(&self, a: &QuadElem) -> BigInt {
        let guess = self.enclose(a, 64);
        let mut k = guess.lo().floor().to_integer();
        let at = |k: &BigInt| {
            let shifted = QuadElem::new(&a.u - BigRational::from_integer(k.clone()), a.v.clone());
            self.sign(&shifted)
        };
        while at(&k) == Ordering::Less {
            k -= 1;
        }
        while at(&(&k + 1)) != Ordering::Less {
            k += 1;
        }
        k
    }

    /// Enclosure of `beta` of width at most about `2^-bits`.
    pub fn beta_interval(&self, bits: u32) -> Interval {
        let s = bits + 8;
        let two = BigRational::from_integer(2.into());
        let disc = &self.p * &self.p + BigRational::from_integer(4.into()) * &self.q;
        let root = Interval::sqrt(&disc, s);
        let half_p = Interval::from_rational(&(&self.p / &two), s);
        let half_root = root.mul(&Interval::from_rational(&BigRational::new(1.into(), 2.into()), s));
        if self.plus_root {
            half_p.add(&half_root)
        } else {
            half_p.sub(&half_root)
        }
    }

    /// Enclosure of an element with about `bits` correct bits after the point.
    pub fn enclose(&self, a: &QuadElem, bits: u32) -> Interval {
        if a.v.is_zero() {
            return Interval::from_rational(&a.u, bits);
        }
        let extra = a.v.abs().ceil().to_integer().bits() as u32;
        let s = bits + extra + 4;
        let b = self.beta_interval(s);
        Interval::from_rational(&a.u, s)
            .add(&Interval::from_rational(&a.v, s).mul(&b))
            .rescale(bits + 2)
    }
}
