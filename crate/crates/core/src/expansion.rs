//! The map `T(x) = beta x mod 1`, greedy digits, reconstruction and the
//! digit sequence of 1.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::Backend;
use crate::error::{Error, Result};

/// The first `n` digits of a point together with the tail `T^n x`.
#[derive(Clone, Debug)]
pub struct DigitSeq<B: Backend> {
    pub digits: Vec<u32>,
    /// `T^n x`, so that `x = sum digits[i] beta^-(i+1) + terminal beta^-n`.
    pub terminal: B::Point,
    /// The base the digits were computed under (at its final precision).
    pub base: B,
}

impl<B: Backend> DigitSeq<B> {
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

fn ensure_in_unit<B: Backend>(beta: &B, x: &B::Point) -> Result<()> {
    if beta.sign(x) == Some(Ordering::Less) || beta.cmp(x, &beta.one()) == Some(Ordering::Greater)
    {
        return Err(Error::InvalidPoint(format!("{x:?} is not in [0, 1]")));
    }
    Ok(())
}

/// One step: returns `floor(beta x)` and `beta x - floor(beta x)`.
///
/// `index` is only used to label a failure.
pub(crate) fn step<B: Backend>(beta: &B, x: &B::Point, index: usize) -> Result<(u32, B::Point)> {
    let bx = beta.mul(&beta.beta(), x);
    let k = beta.floor(&bx).ok_or(Error::UncertifiedFloor {
        index,
        bits: beta.bits(),
    })?;
    let d = k.to_u32().ok_or_else(|| Error::InvalidPoint(format!("digit {k} out of range")))?;
    let rest = beta.sub(&bx, &beta.from_int(d as i64));
    Ok((d, rest))
}

/// `T(x) = beta x mod 1`.
pub fn t_beta_step<B: Backend>(beta: &B, x: &B::Point) -> Result<B::Point> {
    ensure_in_unit(beta, x)?;
    beta.escalate(|b| step(b, x, 1).map(|(_, t)| t))
}

fn digits_at<B: Backend>(beta: &B, x: &B::Point, n: usize) -> Result<DigitSeq<B>> {
    let mut digits = Vec::with_capacity(n);
    let mut t = x.clone();
    for i in 1..=n {
        let (d, next) = step(beta, &t, i)?;
        digits.push(d);
        t = next;
    }
    Ok(DigitSeq {
        digits,
        terminal: t,
        base: beta.clone(),
    })
}

/// The first `n` greedy digits of `x` and the certified tail `T^n x`.
///
/// `x = 1` is allowed and yields the expansion of 1.
pub fn digits<B: Backend>(beta: &B, x: &B::Point, n: usize) -> Result<DigitSeq<B>> {
    if n == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    ensure_in_unit(beta, x)?;
    beta.escalate(|b| digits_at(b, x, n))
}

/// `sum d_i beta^-i + tail beta^-n` evaluated by Horner's rule.
pub fn evaluate<B: Backend>(beta: &B, digits: &[u32], tail: &B::Point) -> B::Point {
    let inv = beta.recip(&beta.beta()).expect("beta > 1 is invertible");
    let mut acc = tail.clone();
    for &d in digits.iter().rev() {
        acc = beta.mul(&beta.add(&acc, &beta.from_int(d as i64)), &inv);
    }
    acc
}

/// Left endpoint `sum d_i beta^-i` of the cylinder of `digits`.
pub fn left_endpoint<B: Backend>(beta: &B, digits: &[u32]) -> B::Point {
    evaluate(beta, digits, &beta.zero())
}

/// Inverts [`digits`]: `sum d_i beta^-i + terminal beta^-n`.
pub fn reconstruct<B: Backend>(seq: &DigitSeq<B>) -> B::Point {
    evaluate(&seq.base, &seq.digits, &seq.terminal)
}

/// The infinite digit sequence `eps*` attached to the expansion of 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarSeq {
    /// `preperiod (period)^inf`. When the expansion of 1 is finite it is kept
    /// in `finite_expansion` and the period is that word with its last digit
    /// lowered by one.
    Periodic {
        preperiod: Vec<u32>,
        period: Vec<u32>,
        finite_expansion: Option<Vec<u32>>,
    },
    /// A certified prefix with no detected periodicity. `exhausted` means the
    /// prefix cannot be extended (enclosure too wide to decide finiteness).
    Prefix { digits: Vec<u32>, exhausted: bool },
}

impl StarSeq {
    /// Digit `i` (1-based), if known.
    pub fn digit(&self, i: usize) -> Option<u32> {
        assert!(i >= 1, "digits are 1-based");
        match self {
            StarSeq::Periodic {
                preperiod, period, ..
            } => {
                if i <= preperiod.len() {
                    Some(preperiod[i - 1])
                } else {
                    Some(period[(i - 1 - preperiod.len()) % period.len()])
                }
            }
            StarSeq::Prefix { digits, .. } => digits.get(i - 1).copied(),
        }
    }

    /// Number of certified digits, `None` if the sequence is fully known.
    pub fn known_len(&self) -> Option<usize> {
        match self {
            StarSeq::Periodic { .. } => None,
            StarSeq::Prefix { digits, .. } => Some(digits.len()),
        }
    }

    /// The first `n` digits.
    pub fn prefix(&self, n: usize) -> Result<Vec<u32>> {
        if let Some(k) = self.known_len() {
            if k < n {
                return Err(Error::UndecidedFiniteness {
                    certified: k,
                    needed: n,
                });
            }
        }
        Ok((1..=n).map(|i| self.digit(i).unwrap()).collect())
    }

    pub fn is_eventually_periodic(&self) -> bool {
        matches!(self, StarSeq::Periodic { .. })
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, StarSeq::Prefix { exhausted: true, .. })
    }

    /// Checks `shift^k(eps*) <= eps*` on `len`-digit windows for `1 <= k <= shifts`.
    pub fn is_self_maximal(&self, len: usize, shifts: usize) -> Result<bool> {
        let seq = self.prefix(len + shifts)?;
        Ok((1..=shifts).all(|k| seq[k..k + len] <= seq[..len]))
    }
}

impl fmt::Display for StarSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |d: &[u32]| {
            d.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            StarSeq::Periodic {
                preperiod, period, ..
            } => {
                if !preperiod.is_empty() {
                    write!(f, "{},", join(preperiod))?;
                }
                write!(f, "({})^inf", join(period))
            }
            StarSeq::Prefix { digits, exhausted } => {
                write!(f, "{}", join(digits))?;
                if *exhausted {
                    write!(f, ",?")
                } else {
                    write!(f, ",...")
                }
            }
        }
    }
}

/// How far exact bases look for a recurrence in the orbit of 1.
pub const PERIOD_SEARCH_DEPTH: usize = 256;

/// Computes `eps*`, detecting a finite or eventually periodic expansion of 1
/// for exact bases.
///
/// For enclosure bases the result is a prefix of at least `m` digits when
/// precision allows; otherwise a shorter, `exhausted` prefix is returned.
pub fn star_sequence<B: Backend>(beta: &B, m: usize) -> Result<StarSeq> {
    if m == 0 {
        return Err(Error::InvalidArgument("prefix length must be at least 1".into()));
    }
    if beta.is_exact() {
        return Ok(star_exact(beta, m.max(PERIOD_SEARCH_DEPTH)));
    }
    let mut best: Option<StarSeq> = None;
    let res = beta.escalate(|b| {
        let s = star_enclosure(b, m);
        let short = s.known_len().unwrap_or(usize::MAX) < m;
        let improves = match (&best, s.known_len()) {
            (Some(prev), Some(k)) => k > prev.known_len().unwrap_or(0),
            _ => true,
        };
        if improves {
            best = Some(s.clone());
        }
        if short {
            Err(Error::PrecisionExhausted {
                index: s.known_len().unwrap_or(0) + 1,
                bits: b.bits(),
            })
        } else {
            Ok(s)
        }
    });
    match res {
        Ok(s) => Ok(s),
        Err(e) if e.is_certification() => Ok(best.expect("at least one attempt")),
        Err(e) => Err(e),
    }
}

fn star_exact<B: Backend>(beta: &B, limit: usize) -> StarSeq {
    let mut seen: HashMap<B::Point, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut t = beta.one();
    for k in 1..=limit {
        let (d, next) = step(beta, &t, k).expect("exact floors always certify");
        digits.push(d);
        if beta.sign(&next) == Some(Ordering::Equal) {
            let mut period = digits.clone();
            *period.last_mut().unwrap() -= 1;
            return StarSeq::Periodic {
                preperiod: Vec::new(),
                period,
                finite_expansion: Some(digits),
            };
        }
        if let Some(&i) = seen.get(&next) {
            return StarSeq::Periodic {
                preperiod: digits[..i].to_vec(),
                period: digits[i..].to_vec(),
                finite_expansion: None,
            };
        }
        seen.insert(next.clone(), k);
        t = next;
    }
    StarSeq::Prefix {
        digits,
        exhausted: false,
    }
}

fn star_enclosure<B: Backend>(beta: &B, m: usize) -> StarSeq {
    let mut digits = Vec::new();
    let mut t = beta.one();
    for k in 1..=m {
        let (d, next) = match step(beta, &t, k) {
            Ok(r) => r,
            Err(_) => {
                return StarSeq::Prefix {
                    digits,
                    exhausted: true,
                }
            }
        };
        if beta.sign(&next) != Some(Ordering::Greater) {
            // the expansion may stop here, so digit k is ambiguous
            return StarSeq::Prefix {
                digits,
                exhausted: true,
            };
        }
        digits.push(d);
        t = next;
    }
    StarSeq::Prefix {
        digits,
        exhausted: false,
    }
}

/// `T^k(1)` for `k = 0..count`, with `T^0(1) = 1`.
pub fn orbit_of_one<B: Backend>(beta: &B, count: usize) -> Result<Vec<B::Point>> {
    let mut out = Vec::with_capacity(count);
    let mut t = beta.one();
    for k in 0..count {
        out.push(t.clone());
        if k + 1 < count {
            t = step(beta, &t, k + 1)?.1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{QuadElem, QuadraticField, RationalField};
    use crate::beta::{Beta, Value};
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn t_beta_examples() {
        let two = RationalField::integer(2);
        assert_eq!(t_beta_step(&two, &q(1, 4)).unwrap(), q(1, 2));
        let three_halves = RationalField::new(q(3, 2));
        assert_eq!(t_beta_step(&three_halves, &q(4, 5)).unwrap(), q(1, 5));
        let phi = QuadraticField::golden();
        let inv = QuadElem::new(q(-1, 1), q(1, 1));
        assert!(t_beta_step(&phi, &inv).unwrap().is_zero());
    }

    #[test]
    fn digits_examples() {
        let two = RationalField::integer(2);
        let d = digits(&two, &q(5, 8), 4).unwrap();
        assert_eq!(d.digits, vec![1, 0, 1, 0]);
        assert_eq!(d.terminal, q(0, 1));

        let three = RationalField::integer(3);
        let d = digits(&three, &q(1, 3), 3).unwrap();
        assert_eq!(d.digits, vec![1, 0, 0]);
        assert_eq!(d.terminal, q(0, 1));

        let phi = QuadraticField::golden();
        let d = digits(&phi, &QuadElem::rational(q(1, 1)), 2).unwrap();
        assert_eq!(d.digits, vec![1, 1]);
        assert!(d.terminal.is_zero());
    }

    #[test]
    fn reconstruct_examples() {
        let two = RationalField::integer(2);
        let seq = DigitSeq {
            digits: vec![1, 0],
            terminal: q(1, 2),
            base: two.clone(),
        };
        assert_eq!(reconstruct(&seq), q(5, 8));
        let zero = DigitSeq {
            digits: vec![0, 0, 0],
            terminal: q(0, 1),
            base: two,
        };
        assert_eq!(reconstruct(&zero), q(0, 1));

        let phi = QuadraticField::golden();
        let seq = DigitSeq {
            digits: vec![1, 0],
            terminal: QuadElem::zero(),
            base: phi.clone(),
        };
        let v = reconstruct(&seq);
        assert_eq!(v, QuadElem::new(q(-1, 1), q(1, 1)));
        assert!((phi.to_f64(&v) - 0.618_033_988_7).abs() < 1e-10);
    }

    #[test]
    fn rejects_points_outside_unit_interval() {
        let two = RationalField::integer(2);
        assert!(matches!(digits(&two, &q(3, 2), 2), Err(Error::InvalidPoint(_))));
        assert!(matches!(digits(&two, &q(-1, 2), 2), Err(Error::InvalidPoint(_))));
        assert!(digits(&two, &q(1, 2), 0).is_err());
    }

    #[test]
    fn star_examples() {
        let s2 = star_sequence(&RationalField::integer(2), 10).unwrap();
        assert_eq!(
            s2,
            StarSeq::Periodic {
                preperiod: vec![],
                period: vec![1],
                finite_expansion: Some(vec![2])
            }
        );
        let sphi = star_sequence(&QuadraticField::golden(), 10).unwrap();
        assert_eq!(
            sphi,
            StarSeq::Periodic {
                preperiod: vec![],
                period: vec![1, 0],
                finite_expansion: Some(vec![1, 1])
            }
        );
        let s3 = star_sequence(&RationalField::integer(3), 10).unwrap();
        assert_eq!(s3.prefix(4).unwrap(), vec![2, 2, 2, 2]);
        assert_eq!(s3.to_string(), "(2)^inf");
    }

    #[test]
    fn star_of_non_parry_rational_is_a_prefix() {
        let b = RationalField::new(q(9, 5));
        let s = star_sequence(&b, 20).unwrap();
        assert!(!s.is_eventually_periodic());
        // 1.8 -> 1, 0.8*1.8 = 1.44 -> 1, 0.44*1.8 = 0.792 -> 0, 1.4256 -> 1
        assert_eq!(s.prefix(4).unwrap(), vec![1, 1, 0, 1]);
        assert!(s.is_self_maximal(30, 30).unwrap());
    }

    #[test]
    fn star_of_pi_by_enclosure() {
        let pi = Beta::pi();
        let s = star_sequence(&pi, 40).unwrap();
        assert!(s.known_len().unwrap() >= 40);
        // pi = 3.14159..., 0.14159*pi = 0.4448 -> 0, 0.4448*pi = 1.397 -> 1
        assert_eq!(s.prefix(3).unwrap(), vec![3, 0, 1]);
    }

    #[test]
    fn star_of_integer_like_enclosure_is_flagged() {
        let b: Beta = "real:2.0@40".parse().unwrap();
        let s = star_sequence(&b, 10).unwrap();
        assert!(s.is_exhausted());
        assert!(matches!(
            s.prefix(3),
            Err(Error::UndecidedFiniteness { .. })
        ));
    }

    #[test]
    fn digits_escalate_for_enclosures() {
        let pi = Beta::pi();
        let x = Value::rational(1, 7);
        let d = digits(&pi, &x, 120).unwrap();
        assert!(d.base.bits() > pi.precision().working);
        assert_eq!(d.len(), 120);
    }

    #[test]
    fn uncertified_floor_for_fixed_enclosure() {
        let b: Beta = "real:1.5@20".parse().unwrap();
        let err = digits(&b, &Value::rational(1, 3), 200).unwrap_err();
        assert!(matches!(err, Error::UncertifiedFloor { .. }));
    }

    #[test]
    fn orbit_of_one_golden() {
        let phi = QuadraticField::golden();
        let o = orbit_of_one(&phi, 3).unwrap();
        assert_eq!(o[1], QuadElem::new(q(-1, 1), q(1, 1)));
        assert!(o[2].is_zero());
    }
}
