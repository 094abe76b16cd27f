//! The base `beta > 1` and the values it acts on.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    Backend, Interval, IntervalField, QuadElem, QuadraticField, RationalField, RealBeta,
    RealSource,
};
use crate::error::{Error, Result};
use crate::numfmt::{parse_rational, to_decimal};

/// Working precision and how far it may escalate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCfg {
    pub working: u32,
    pub max: u32,
    pub factor: f64,
}

impl PrecisionCfg {
    pub fn new(working: u32, max: u32, factor: f64) -> Result<Self> {
        if working > max {
            return Err(Error::InvalidArgument(format!(
                "working precision {working} exceeds maximum {max}"
            )));
        }
        if !(factor > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "escalation factor must exceed 1, got {factor}"
            )));
        }
        Ok(PrecisionCfg {
            working,
            max,
            factor,
        })
    }

    /// Next precision after `bits`, or `None` once `max` was tried.
    pub fn escalate(&self, bits: u32) -> Option<u32> {
        if bits >= self.max {
            return None;
        }
        let next = ((bits as f64) * self.factor).ceil() as u32;
        Some(next.max(bits + 1).min(self.max))
    }
}

impl Default for PrecisionCfg {
    fn default() -> Self {
        PrecisionCfg {
            working: 128,
            max: 8192,
            factor: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaKind {
    Integer,
    Rational,
    Quadratic,
    RealEnclosure,
}

#[derive(Clone, Debug)]
enum Repr {
    Rational(RationalField),
    Quadratic(Arc<QuadraticField>),
    Real(Arc<RealBeta>),
}

/// A certified base `beta > 1`.
///
/// `Beta` is itself a [`Backend`] over [`Value`]; the interval kind works at
/// the precision returned by [`Backend::bits`] and [`Beta::escalate_with`] reruns
/// a computation at growing precision.
#[derive(Clone, Debug)]
pub struct Beta {
    repr: Repr,
    precision: PrecisionCfg,
    bits: u32,
}

/// A point handled by a [`Beta`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Rational(BigRational),
    Quadratic(QuadElem),
    Enclosure(Interval),
}

impl Value {
    pub fn rational(n: i64, d: i64) -> Self {
        Value::Rational(BigRational::new(n.into(), d.into()))
    }

    pub fn int(n: i64) -> Self {
        Value::Rational(BigRational::from_integer(n.into()))
    }

    /// `u + v beta` for a quadratic base.
    pub fn quadratic(u: BigRational, v: BigRational) -> Self {
        Value::Quadratic(QuadElem::new(u, v))
    }

    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Value::Rational)
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Value::Enclosure(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Rational(q) => Some(q),
            Value::Quadratic(e) if e.v.is_zero() => Some(&e.u),
            _ => None,
        }
    }

    /// Parses a point literal: `5/8`, `0.7`, `quad:u,v` (meaning `u + v beta`)
    /// or `real:<decimal>@<bits>` (the decimal plus or minus `2^-bits`).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("quad:") {
            let (u, v) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected quad:u,v, got {s:?}")))?;
            return Ok(Value::quadratic(parse_rational(u)?, parse_rational(v)?));
        }
        if let Some(rest) = s.strip_prefix("real:") {
            let (v, bits) = rest
                .split_once('@')
                .ok_or_else(|| Error::Parse(format!("expected real:<decimal>@<bits>, got {s:?}")))?;
            let v = parse_rational(v)?;
            let bits: u32 = bits
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad precision in {s:?}")))?;
            let r = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
            return Ok(Value::Enclosure(Interval::from_bounds(
                &(&v - &r),
                &(&v + &r),
                bits + 1,
            )));
        }
        parse_rational(s).map(Value::Rational)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(q) => write!(f, "{q}"),
            Value::Quadratic(e) => write!(f, "{e}"),
            Value::Enclosure(i) => write!(f, "{i}"),
        }
    }
}

impl Beta {
    fn from_repr(repr: Repr) -> Self {
        let precision = PrecisionCfg::default();
        Beta {
            repr,
            bits: precision.working,
            precision,
        }
    }

    pub fn integer(b: u64) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidBeta(format!("integer base must be >= 2, got {b}")));
        }
        Ok(Self::from_repr(Repr::Rational(RationalField::integer(b))))
    }

    pub fn rational(q: BigRational) -> Result<Self> {
        if q <= BigRational::one() {
            return Err(Error::InvalidBeta(format!("base must exceed 1, got {q}")));
        }
        Ok(Self::from_repr(Repr::Rational(RationalField::new(q))))
    }

    pub fn golden() -> Self {
        Self::from_repr(Repr::Quadratic(Arc::new(QuadraticField::golden())))
    }

    pub fn quadratic(field: QuadraticField) -> Self {
        Self::from_repr(Repr::Quadratic(Arc::new(field)))
    }

    pub fn real(source: RealSource) -> Result<Self> {
        let real = RealBeta::new(source);
        let e = real.enclose(64);
        if e.lo() <= BigRational::one() {
            return Err(Error::InvalidBeta(format!(
                "enclosure {e} is not certified above 1"
            )));
        }
        Ok(Self::from_repr(Repr::Real(Arc::new(real))))
    }

    pub fn pi() -> Self {
        Self::real(RealSource::Pi).expect("pi > 1")
    }

    pub fn with_precision(mut self, precision: PrecisionCfg) -> Self {
        self.precision = precision;
        self.bits = precision.working;
        self
    }

    pub fn precision(&self) -> PrecisionCfg {
        self.precision
    }

    /// The same base evaluated at `bits` of working precision.
    pub fn with_bits(&self, bits: u32) -> Self {
        Beta {
            repr: self.repr.clone(),
            precision: self.precision,
            bits,
        }
    }

    pub fn kind(&self) -> BetaKind {
        match &self.repr {
            Repr::Rational(f) if f.is_integer() => BetaKind::Integer,
            Repr::Rational(_) => BetaKind::Rational,
            Repr::Quadratic(_) => BetaKind::Quadratic,
            Repr::Real(_) => BetaKind::RealEnclosure,
        }
    }

    /// The integer value for integer bases.
    pub fn as_integer(&self) -> Option<u64> {
        match &self.repr {
            Repr::Rational(f) if f.is_integer() => f.value().to_integer().to_u64(),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rational(f) => Some(f.value()),
            _ => None,
        }
    }

    pub fn quadratic_field(&self) -> Option<&QuadraticField> {
        match &self.repr {
            Repr::Quadratic(f) => Some(f),
            _ => None,
        }
    }

    /// `floor(beta)`, the largest digit.
    pub fn max_digit(&self) -> u32 {
        let mut b = self.clone();
        loop {
            if let Some(k) = Backend::floor(&b, &b.beta()) {
                return k.to_u32().expect("digit range");
            }
            match self.precision.escalate(b.bits) {
                Some(bits) => b = b.with_bits(bits),
                // beta indistinguishable from an integer: the smaller floor
                // is the only safe digit bound for the enclosure
                None => {
                    return b.enclose(&b.beta(), b.bits).lo().floor().to_integer().to_u32().unwrap()
                }
            }
        }
    }

    /// Enclosure of beta itself.
    pub fn enclosure(&self, bits: u32) -> Interval {
        self.enclose(&self.beta(), bits)
    }

    pub fn approx_f64(&self) -> f64 {
        self.to_f64(&self.beta())
    }

    pub fn ln(&self) -> f64 {
        self.approx_f64().ln()
    }

    /// Runs `f` at the working precision and retries at escalating precision
    /// while it fails for lack of precision. Exact bases run once.
    pub fn escalate_with<T>(&self, mut f: impl FnMut(&Beta) -> Result<T>) -> Result<T> {
        let mut bits = self.precision.working;
        loop {
            let b = self.with_bits(bits);
            match f(&b) {
                Err(e) if e.is_certification() && !self.is_exact() => {
                    match self.precision.escalate(bits) {
                        Some(next) => bits = next,
                        None => return Err(e),
                    }
                }
                r => return r,
            }
        }
    }

    /// Checks that `v` can be handled by this base and puts it in canonical form.
    pub fn point(&self, v: &Value) -> Result<Value> {
        match (&self.repr, v) {
            (Repr::Rational(_), Value::Quadratic(e)) if !e.v.is_zero() => Err(Error::InvalidPoint(
                "quadratic-field point given for a rational base".into(),
            )),
            (Repr::Real(_), Value::Quadratic(e)) if !e.v.is_zero() => Err(Error::InvalidPoint(
                "quadratic-field point given for a real-enclosure base".into(),
            )),
            _ => Ok(self.lift(v)),
        }
    }

    fn lift(&self, v: &Value) -> Value {
        match (&self.repr, v) {
            (_, Value::Enclosure(_)) => v.clone(),
            (Repr::Rational(_), Value::Rational(_)) => v.clone(),
            (Repr::Rational(_), Value::Quadratic(e)) => Value::Rational(e.u.clone()),
            (Repr::Quadratic(_), Value::Rational(q)) => Value::Quadratic(QuadElem::rational(q.clone())),
            (Repr::Quadratic(_), Value::Quadratic(_)) => v.clone(),
            (Repr::Real(_), Value::Rational(q)) => Value::Enclosure(Interval::from_rational(q, self.bits)),
            (Repr::Real(_), Value::Quadratic(e)) => Value::Enclosure(Interval::from_rational(&e.u, self.bits)),
        }
    }

    fn to_interval(&self, v: &Value, scale: u32) -> Interval {
        match v {
            Value::Enclosure(i) => i.clone(),
            _ => self.enclose(v, scale),
        }
    }

    fn binary(
        &self,
        a: &Value,
        b: &Value,
        rat: impl Fn(&BigRational, &BigRational) -> BigRational,
        quad: impl Fn(&QuadraticField, &QuadElem, &QuadElem) -> QuadElem,
        int: impl Fn(&Interval, &Interval) -> Interval,
    ) -> Value {
        match (self.lift(a), self.lift(b)) {
            (Value::Rational(x), Value::Rational(y)) => Value::Rational(rat(&x, &y)),
            (Value::Quadratic(x), Value::Quadratic(y)) => match &self.repr {
                Repr::Quadratic(f) => Value::Quadratic(quad(f, &x, &y)),
                _ => unreachable!("lift keeps quadratic points in quadratic fields"),
            },
            (x, y) => {
                let scale = self.bits.max(self.scale_of(&x)).max(self.scale_of(&y));
                Value::Enclosure(int(&self.to_interval(&x, scale), &self.to_interval(&y, scale)))
            }
        }
    }

    fn scale_of(&self, v: &Value) -> u32 {
        match v {
            Value::Enclosure(i) => i.scale(),
            _ => 0,
        }
    }

    /// The backend-specific field, for code that wants to bypass [`Value`].
    pub fn rational_field(&self) -> Option<&RationalField> {
        match &self.repr {
            Repr::Rational(f) => Some(f),
            _ => None,
        }
    }

    pub fn interval_field(&self) -> Option<IntervalField> {
        match &self.repr {
            Repr::Real(r) => Some(IntervalField::new(r.clone(), self.bits)),
            _ => None,
        }
    }

    /// Renders a value with `digits` decimal places (midpoint for enclosures).
    pub fn to_decimal(&self, v: &Value, digits: usize) -> String {
        match self.lift(v) {
            Value::Rational(q) => to_decimal(&q, digits),
            other => {
                let bits = (digits as f64 * 3.33) as u32 + 16;
                let i = self.enclose(&other, bits);
                let mid = (i.lo() + i.hi()) / BigRational::from_integer(2.into());
                to_decimal(&mid, digits)
            }
        }
    }
}

impl Backend for Beta {
    type Point = Value;

    fn rational_beta(&self) -> Option<BigRational> {
        self.as_rational().cloned()
    }

    fn from_rational(&self, q: &BigRational) -> Value {
        self.lift(&Value::Rational(q.clone()))
    }

    fn beta(&self) -> Value {
        match &self.repr {
            Repr::Rational(f) => Value::Rational(f.value().clone()),
            Repr::Quadratic(f) => Value::Quadratic(f.beta()),
            Repr::Real(r) => Value::Enclosure(r.enclose(self.bits)),
        }
    }

    fn add(&self, a: &Value, b: &Value) -> Value {
        self.binary(a, b, |x, y| x + y, |f, x, y| f.add(x, y), |x, y| x.add(y))
    }

    fn sub(&self, a: &Value, b: &Value) -> Value {
        self.binary(a, b, |x, y| x - y, |f, x, y| f.sub(x, y), |x, y| x.sub(y))
    }

    fn mul(&self, a: &Value, b: &Value) -> Value {
        self.binary(a, b, |x, y| x * y, |f, x, y| f.mul(x, y), |x, y| x.mul(y))
    }

    fn recip(&self, a: &Value) -> Option<Value> {
        match (&self.repr, self.lift(a)) {
            (_, Value::Rational(q)) => (!q.is_zero()).then(|| Value::Rational(q.recip())),
            (Repr::Quadratic(f), Value::Quadratic(e)) => f.recip(&e).map(Value::Quadratic),
            (_, Value::Enclosure(i)) => i.recip().map(Value::Enclosure),
            _ => unreachable!(),
        }
    }

    fn floor(&self, a: &Value) -> Option<BigInt> {
        match (&self.repr, self.lift(a)) {
            (_, Value::Rational(q)) => Some(q.floor().to_integer()),
            (Repr::Quadratic(f), Value::Quadratic(e)) => Some(f.floor(&e)),
            (_, Value::Enclosure(i)) => i.floor(),
            _ => unreachable!(),
        }
    }

    fn sign(&self, a: &Value) -> Option<Ordering> {
        match (&self.repr, self.lift(a)) {
            (_, Value::Rational(q)) => Some(q.cmp(&BigRational::zero())),
            (Repr::Quadratic(f), Value::Quadratic(e)) => Some(f.sign(&e)),
            (_, Value::Enclosure(i)) => i.sign(),
            _ => unreachable!(),
        }
    }

    fn enclose(&self, a: &Value, bits: u32) -> Interval {
        match (&self.repr, a) {
            (_, Value::Rational(q)) => Interval::from_rational(q, bits),
            (Repr::Quadratic(f), Value::Quadratic(e)) => f.enclose(e, bits),
            (_, Value::Quadratic(e)) => Interval::from_rational(&e.u, bits),
            (_, Value::Enclosure(i)) => i.clone(),
        }
    }

    fn is_exact(&self) -> bool {
        !matches!(self.repr, Repr::Real(_))
    }

    fn bits(&self) -> u32 {
        self.bits
    }

    fn width(&self, a: &Value) -> BigRational {
        match a {
            Value::Enclosure(i) => i.width(),
            _ => BigRational::zero(),
        }
    }

    fn hull_min(&self, a: &Value, b: &Value) -> Value {
        let scale = self.bits.max(self.scale_of(a)).max(self.scale_of(b));
        Value::Enclosure(self.to_interval(a, scale).min(&self.to_interval(b, scale)))
    }

    fn escalate<T>(&self, f: impl FnMut(&Self) -> Result<T>) -> Result<T> {
        self.escalate_with(f)
    }

    fn to_f64(&self, a: &Value) -> f64 {
        match a {
            Value::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            _ => self.enclose(a, 64).midpoint_f64(),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rational(r) => write!(f, "{}", r.value()),
            Repr::Quadratic(q) => {
                let [a, b, c] = q.coeffs();
                let (lo, hi) = q.isolating_interval();
                write!(f, "quadratic:{a},{b},{c}@{lo},{hi}")
            }
            Repr::Real(r) => write!(f, "{}", r.source()),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    /// Base literals: `2`, `golden`, `pi`, `9/5`, `1.8`,
    /// `quadratic:a,b,c@lo,hi`, `real:<decimal>@<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => return Ok(Beta::golden()),
            "pi" => return Ok(Beta::pi()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("quadratic:") {
            let bad = || Error::Parse(format!("expected quadratic:a,b,c@lo,hi, got {s:?}"));
            let (coeffs, range) = rest.split_once('@').ok_or_else(bad)?;
            let c: Vec<BigRational> = coeffs
                .split(',')
                .map(parse_rational)
                .collect::<Result<_>>()?;
            let r: Vec<BigRational> = range
                .split(',')
                .map(parse_rational)
                .collect::<Result<_>>()?;
            if c.len() != 3 || r.len() != 2 {
                return Err(bad());
            }
            let field = QuadraticField::new(
                c[0].clone(),
                c[1].clone(),
                c[2].clone(),
                r[0].clone(),
                r[1].clone(),
            )?;
            return Ok(Beta::quadratic(field));
        }
        if let Some(rest) = s.strip_prefix("real:") {
            let (v, bits) = rest
                .split_once('@')
                .ok_or_else(|| Error::Parse(format!("expected real:<decimal>@<bits>, got {s:?}")))?;
            let value = parse_rational(v)?;
            let bits: u32 = bits
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad precision in {s:?}")))?;
            return Beta::real(RealSource::Decimal { value, bits });
        }
        let q = parse_rational(s)?;
        if q.is_integer() {
            let b = q
                .to_integer()
                .to_u64()
                .ok_or_else(|| Error::InvalidBeta(format!("integer base out of range: {s}")))?;
            Beta::integer(b)
        } else {
            Beta::rational(q)
        }
    }
}
