//! Shrinking targets: hit detection along orbits, Monte Carlo estimates of
//! hit statistics, and the grid and rectangle covers of the hit sets.

mod cover;
mod simulate;

pub(crate) use cover::cell_count_big;
pub use cover::{grid_cells, rectangle_cover, Centre, GridCell, Rect, RectCover, SQUARES_PER_RECT};
pub use simulate::{monte_carlo_measure, McOptions, McReport, SampleRow};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::Backend;
use crate::error::{Error, Result};
use crate::expansion::step;
use crate::measure::TargetFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitMode {
    /// `|T^n x - y| < Psi(n)`
    TwoSided,
    /// `0 <= T^n x - y < Psi(n)`
    OneSided,
}

impl fmt::Display for HitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HitMode::TwoSided => "two-sided",
            HitMode::OneSided => "one-sided",
        })
    }
}

impl FromStr for HitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" | "two" => Ok(HitMode::TwoSided),
            "one-sided" | "one" => Ok(HitMode::OneSided),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

/// Hits of one orbit up to depth `n_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRecord {
    pub x: String,
    pub y: String,
    pub n_max: usize,
    pub mode: HitMode,
    /// Whether `(x, y)` was given as a point of the square.
    pub planar: bool,
    pub hits: Vec<usize>,
    /// Indices where the comparison with `Psi(n)` could not be certified.
    pub uncertain: Vec<usize>,
}

/// The outcome of comparing `T^n x - y` with `Psi(n)`.
pub(crate) fn classify<B: Backend>(
    beta: &B,
    d: &B::Point,
    psi: &B::Point,
    mode: HitMode,
) -> Option<bool> {
    // hit iff lower < d < psi, lower = -psi (two-sided) or d >= 0 (one-sided)
    let below = beta.sign(&beta.sub(psi, d));
    let above = match mode {
        HitMode::TwoSided => beta.sign(&beta.add(psi, d)),
        HitMode::OneSided => beta.sign(d).map(|s| match s {
            Ordering::Equal => Ordering::Greater,
            s => s,
        }),
    };
    match (below, above) {
        (Some(a), _) if a != Ordering::Greater => Some(false),
        (_, Some(b)) if b != Ordering::Greater => Some(false),
        (Some(_), Some(_)) => Some(true),
        _ => None,
    }
}

/// `Psi(1), ..., Psi(n_max)` as rationals for this base.
pub(crate) fn psi_table<B: Backend>(beta: &B, psi: &TargetFn, n_max: usize) -> Result<Vec<BigRational>> {
    let ln_beta = beta.to_f64(&beta.beta()).ln();
    let rb = beta.rational_beta();
    (1..=n_max).map(|n| psi.rational(n, ln_beta, rb.as_ref())).collect()
}

fn check_unit<B: Backend>(beta: &B, p: &B::Point, what: &str) -> Result<()> {
    if beta.sign(p) == Some(Ordering::Less) || beta.cmp(p, &beta.one()) == Some(Ordering::Greater) {
        return Err(Error::InvalidPoint(format!("{what} = {p:?} is not in [0, 1]")));
    }
    Ok(())
}

fn hits_at<B: Backend>(
    beta: &B,
    x: &B::Point,
    y: &B::Point,
    psi: &[BigRational],
    mode: HitMode,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut hits = Vec::new();
    let mut uncertain = Vec::new();
    let mut t = x.clone();
    for (k, p) in psi.iter().enumerate() {
        let n = k + 1;
        t = step(beta, &t, n)?.1;
        let d = beta.sub(&t, y);
        match classify(beta, &d, &beta.from_rational(p), mode) {
            Some(true) => hits.push(n),
            Some(false) => {}
            None => uncertain.push(n),
        }
    }
    Ok((hits, uncertain))
}

fn record<B: Backend>(
    beta: &B,
    x: &B::Point,
    y: &B::Point,
    psi: &TargetFn,
    n_max: usize,
    mode: HitMode,
    planar: bool,
) -> Result<HitRecord> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    check_unit(beta, x, "x")?;
    check_unit(beta, y, "y")?;
    let table = psi_table(beta, psi, n_max)?;
    let mut last: Option<(Vec<usize>, Vec<usize>)> = None;
    let res = beta.escalate(|b| {
        let (hits, uncertain) = hits_at(b, x, y, &table, mode)?;
        let first = uncertain.first().copied();
        last = Some((hits.clone(), uncertain.clone()));
        match first {
            Some(index) => Err(Error::PrecisionExhausted { index, bits: b.bits() }),
            None => Ok((hits, uncertain)),
        }
    });
    let (hits, uncertain) = match res {
        Ok(r) => r,
        Err(Error::PrecisionExhausted { .. }) if last.is_some() => last.unwrap(),
        Err(Error::UncertifiedFloor { index, bits }) => {
            return Err(Error::PrecisionExhausted { index, bits })
        }
        Err(e) => return Err(e),
    };
    Ok(HitRecord {
        x: beta.decimal(x, 20),
        y: beta.decimal(y, 20),
        n_max,
        mode,
        planar,
        hits,
        uncertain,
    })
}

/// Indices `n <= n_max` with `T^n x` within `Psi(n)` of `y`.
pub fn hit_sequence<B: Backend>(
    beta: &B,
    x: &B::Point,
    y: &B::Point,
    psi: &TargetFn,
    n_max: usize,
    mode: HitMode,
) -> Result<HitRecord> {
    record(beta, x, y, psi, n_max, mode, false)
}

/// Indices `n <= n_max` with `(x, y)` in the set `W_n` of the square.
pub fn hit_sequence_2d<B: Backend>(
    beta: &B,
    x: &B::Point,
    y: &B::Point,
    psi: &TargetFn,
    n_max: usize,
) -> Result<HitRecord> {
    record(beta, x, y, psi, n_max, HitMode::TwoSided, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::RationalField;
    use crate::beta::{Beta, Value};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hit_examples() {
        let two = RationalField::integer(2);
        let c = |v: i64, d: i64| TargetFn::constant(q(v, d)).unwrap();
        let r = hit_sequence(&two, &q(0, 1), &q(0, 1), &c(1, 10), 100, HitMode::TwoSided).unwrap();
        assert_eq!(r.hits, (1..=100).collect::<Vec<_>>());
        let r = hit_sequence(&two, &q(1, 3), &q(1, 3), &c(1, 100), 10, HitMode::TwoSided).unwrap();
        assert_eq!(r.hits, vec![2, 4, 6, 8, 10]);
        let r = hit_sequence(&two, &q(1, 3), &q(2, 3), &c(1, 100), 10, HitMode::OneSided).unwrap();
        assert_eq!(r.hits, vec![1, 3, 5, 7, 9]);
        assert!(r.uncertain.is_empty());

        let r2 = hit_sequence_2d(&two, &q(1, 3), &q(1, 3), &c(1, 100), 10).unwrap();
        assert_eq!(r2.hits, vec![2, 4, 6, 8, 10]);
        assert!(r2.planar);
    }

    #[test]
    fn one_sided_is_a_subset() {
        let two = RationalField::integer(2);
        let psi = TargetFn::polynomial(q(1, 2), q(1, 2)).unwrap();
        let x = q(123_456_789, 1 << 30);
        let y = q(2, 5);
        let a = hit_sequence(&two, &x, &y, &psi, 30, HitMode::TwoSided).unwrap();
        let b = hit_sequence(&two, &x, &y, &psi, 30, HitMode::OneSided).unwrap();
        assert!(b.hits.iter().all(|n| a.hits.contains(n)));
    }

    #[test]
    fn enclosure_target_is_certified() {
        let two = Beta::integer(2).unwrap();
        let y = Value::parse("real:0.41421356237309504880168872420969807857@120").unwrap();
        let psi = TargetFn::polynomial(q(1, 4), q(1, 1)).unwrap();
        let r = hit_sequence(&two, &Value::rational(1, 7), &y, &psi, 50, HitMode::TwoSided).unwrap();
        assert!(r.uncertain.is_empty());
        assert!(!r.hits.is_empty());
    }

    #[test]
    fn pi_orbit_escalates() {
        let pi = Beta::pi();
        let psi = TargetFn::constant(q(1, 10)).unwrap();
        let r = hit_sequence(&pi, &Value::rational(1, 3), &Value::rational(1, 2), &psi, 60, HitMode::TwoSided)
            .unwrap();
        assert!(r.uncertain.is_empty());
    }
}
