//! Real bases known only through shrinkable enclosures.

use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::interval::Interval;

/// Where the enclosures of a real base come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealSource {
    /// A decimal literal `value` known to within `2^-bits`. It cannot be
    /// refined past that radius.
    Decimal { value: BigRational, bits: u32 },
    /// pi, computed to any requested precision.
    Pi,
}

impl RealSource {
    fn raw_enclosure(&self, bits: u32) -> Interval {
        match self {
            RealSource::Decimal { value, bits: b } => {
                let r = BigRational::new(BigInt::one(), BigInt::one() << *b as usize);
                Interval::from_bounds(&(value - &r), &(value + &r), bits.max(*b))
            }
            RealSource::Pi => pi_enclosure(bits),
        }
    }

    /// Best width this source can ever reach (`0` if unbounded refinement).
    pub fn width_floor(&self) -> BigRational {
        match self {
            RealSource::Decimal { bits, .. } => {
                BigRational::new(BigInt::from(2), BigInt::one() << *bits as usize)
            }
            RealSource::Pi => BigRational::zero(),
        }
    }
}

impl fmt::Display for RealSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSource::Decimal { value, bits } => {
                use num_traits::ToPrimitive;
                write!(f, "real:{}@{}", value.to_f64().unwrap_or(f64::NAN), bits)
            }
            RealSource::Pi => f.write_str("pi"),
        }
    }
}

/// A real number `> 1` with memoized, monotonically shrinking enclosures.
#[derive(Debug)]
pub struct RealBeta {
    source: RealSource,
    best: Mutex<Option<Interval>>,
}

impl RealBeta {
    pub fn new(source: RealSource) -> Self {
        RealBeta {
            source,
            best: Mutex::new(None),
        }
    }

    pub fn source(&self) -> &RealSource {
        &self.source
    }

    /// An enclosure of width about `2^-bits` (or the source's floor).
    ///
    /// Every returned interval lies inside every interval returned before.
    pub fn enclose(&self, bits: u32) -> Interval {
        let mut best = self.best.lock().expect("enclosure cache poisoned");
        if let Some(b) = best.as_ref() {
            if b.scale() >= bits {
                return b.clone();
            }
        }
        let fresh = self.source.raw_enclosure(bits);
        let next = match best.as_ref() {
            Some(prev) => fresh
                .intersect(prev)
                .expect("two valid enclosures of one real must overlap"),
            None => fresh,
        };
        *best = Some(next.clone());
        next
    }
}

impl Clone for RealBeta {
    fn clone(&self) -> Self {
        let best = self.best.lock().expect("enclosure cache poisoned").clone();
        RealBeta {
            source: self.source.clone(),
            best: Mutex::new(best),
        }
    }
}

/// `floor(2^prec * atan(1/k))` up to an additive error of `2 * terms + 1`.
fn atan_inv(k: u32, prec: u32) -> (BigInt, u64) {
    let k = BigInt::from(k);
    let k2 = &k * &k;
    let mut p = (BigInt::one() << prec as usize) / &k;
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !p.is_zero() {
        let term = &p / BigInt::from(2 * j + 1);
        if j.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        p /= &k2;
        j += 1;
    }
    (sum, 2 * j + 1)
}

fn pi_enclosure(bits: u32) -> Interval {
    let prec = bits + 32;
    let (a, ea) = atan_inv(5, prec);
    let (b, eb) = atan_inv(239, prec);
    let v = a * 16 - b * 4;
    let err = BigInt::from(16 * ea + 4 * eb);
    Interval::from_raw(&v - &err, &v + &err, prec).rescale(bits)
}
