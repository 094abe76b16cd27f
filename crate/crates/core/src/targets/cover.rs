//! The grid `J_n(i)` of `[0, 1]` and the rectangle cover of the planar hit
//! set `W_n`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::admissibility::{enumerate_admissible, Language, Word};
use crate::arith::Backend;
use crate::error::{Error, Result};
use crate::expansion::{digits, left_endpoint};

/// Squares of diameter `delta` used per rectangle in the dimension count.
pub const SQUARES_PER_RECT: u64 = 64;

/// `J_n(i) = [i delta, (i + 1) delta] ∩ [0, 1]` with `delta = Psi(n) beta^-n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridCell<P> {
    pub n: usize,
    pub i: u64,
    pub lo: P,
    pub hi: P,
}

fn beta_pow<B: Backend>(beta: &B, n: usize) -> B::Point {
    let mut p = beta.one();
    for _ in 0..n {
        p = beta.mul(&p, &beta.beta());
    }
    p
}

/// `floor(beta^n / Psi(n)) + 1`.
pub(crate) fn cell_count_big<B: Backend>(beta: &B, n: usize, psi_n: &BigRational) -> Result<BigInt> {
    let inv = psi_n.recip();
    let m = beta.escalate(|b| {
        let v = b.mul(&beta_pow(b, n), &b.from_rational(&inv));
        b.floor(&v).ok_or(Error::PrecisionExhausted { index: n, bits: b.bits() })
    })?;
    Ok(m + 1)
}

pub(crate) fn cell_count<B: Backend>(beta: &B, n: usize, psi_n: &BigRational) -> Result<u64> {
    let m = cell_count_big(beta, n, psi_n)?;
    m.to_u64().ok_or_else(|| Error::budget(m, u64::MAX))
}

fn check_psi(psi_n: &BigRational) -> Result<()> {
    if !psi_n.is_positive() {
        return Err(Error::InvalidArgument("Psi(n) must be positive".into()));
    }
    Ok(())
}

pub fn grid_cells<B: Backend>(
    beta: &B,
    n: usize,
    psi_n: &BigRational,
    cap: u64,
) -> Result<Vec<GridCell<B::Point>>> {
    check_psi(psi_n)?;
    let count = cell_count(beta, n, psi_n)?;
    if count > cap {
        return Err(Error::budget(count, cap));
    }
    let delta = beta.mul(&beta.from_rational(psi_n), &beta.beta_pow_neg(n));
    Ok((0..count)
        .map(|i| {
            let lo = beta.mul(&beta.from_int(i as i64), &delta);
            let hi = beta.add(&lo, &delta);
            GridCell {
                n,
                i,
                lo,
                hi: beta.min(&hi, &beta.one()),
            }
        })
        .collect())
}

/// Where the rectangle for `(w, i)` is centred horizontally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centre {
    /// `left(w) + i Psi(n) / beta^(2n)`, so that `T^n x` near `i delta`
    /// maps into the rectangle.
    Corrected,
    /// `left(w) + i Psi(n) / beta^n`, which misses hits.
    Unscaled,
}

/// `(z - 2 delta, z + 2 delta) x J_n(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect<P> {
    pub word: Word,
    pub i: u64,
    pub x_lo: P,
    pub x_hi: P,
    pub y_lo: P,
    pub y_hi: P,
}

/// The cover of `W_n` by `#D_{beta,n} (floor(beta^n / Psi(n)) + 1)`
/// rectangles of size `4 delta x delta`.
#[derive(Clone, Debug)]
pub struct RectCover<B: Backend> {
    beta: B,
    pub n: usize,
    pub psi_n: BigRational,
    pub delta: B::Point,
    pub words: BigUint,
    pub cells: u64,
    pub centre: Centre,
}

pub fn rectangle_cover<B: Backend>(
    beta: &B,
    n: usize,
    psi_n: &BigRational,
    centre: Centre,
) -> Result<RectCover<B>> {
    check_psi(psi_n)?;
    let words = Language::new(beta, n)?.automaton().count(n);
    let cells = cell_count(beta, n, psi_n)?;
    Ok(RectCover {
        beta: beta.clone(),
        n,
        psi_n: psi_n.clone(),
        delta: beta.mul(&beta.from_rational(psi_n), &beta.beta_pow_neg(n)),
        words,
        cells,
        centre,
    })
}

impl<B: Backend> RectCover<B> {
    pub fn cardinality(&self) -> BigUint {
        &self.words * self.cells
    }

    /// Number of squares of diameter `delta` in the refined cover.
    pub fn squares(&self) -> BigUint {
        self.cardinality() * SQUARES_PER_RECT
    }

    fn centre_of(&self, left: &B::Point, i: u64) -> B::Point {
        let b = &self.beta;
        let shift = b.mul(&b.from_int(i as i64), &self.delta);
        let shift = match self.centre {
            Centre::Corrected => b.mul(&shift, &b.beta_pow_neg(self.n)),
            Centre::Unscaled => shift,
        };
        b.add(left, &shift)
    }

    fn rect(&self, word: &Word, left: &B::Point, i: u64) -> Rect<B::Point> {
        let b = &self.beta;
        let z = self.centre_of(left, i);
        let two = b.mul(&b.from_int(2), &self.delta);
        let y_lo = b.mul(&b.from_int(i as i64), &self.delta);
        let y_hi = b.min(&b.add(&y_lo, &self.delta), &b.one());
        Rect {
            word: word.clone(),
            i,
            x_lo: b.sub(&z, &two),
            x_hi: b.add(&z, &two),
            y_lo,
            y_hi,
        }
    }

    /// Every rectangle, word-major; refuses when there are more than `cap`.
    pub fn rects(&self, cap: u64) -> Result<impl Iterator<Item = Rect<B::Point>> + '_> {
        let total = self.cardinality();
        if total > BigUint::from(cap) {
            return Err(Error::budget(total, cap));
        }
        let words = enumerate_admissible(&self.beta, self.n, cap)?;
        Ok(words.flat_map(move |w| {
            let left = left_endpoint(&self.beta, &w.0);
            (0..self.cells).map(move |i| self.rect(&w, &left, i))
        }))
    }

    /// Whether `(x, y)` lies in the open-by-closed rectangle `r`.
    pub fn rect_contains(&self, r: &Rect<B::Point>, x: &B::Point, y: &B::Point) -> Option<bool> {
        let b = &self.beta;
        let checks = [
            b.cmp(x, &r.x_lo).map(|o| o == Ordering::Greater),
            b.cmp(x, &r.x_hi).map(|o| o == Ordering::Less),
            b.cmp(y, &r.y_lo).map(|o| o != Ordering::Less),
            b.cmp(y, &r.y_hi).map(|o| o != Ordering::Greater),
        ];
        if checks.contains(&Some(false)) {
            Some(false)
        } else if checks.iter().all(|c| *c == Some(true)) {
            Some(true)
        } else {
            None
        }
    }

    /// Whether `(x, y)` is in the rectangle of its own cylinder, trying the
    /// one or two grid cells that contain `y`.
    pub fn contains(&self, x: &B::Point, y: &B::Point) -> Result<Option<bool>> {
        let b = &self.beta;
        let w = Word(digits(b, x, self.n)?.digits);
        let left = left_endpoint(b, &w.0);
        let q = b
            .mul(y, &b.recip(&self.delta).expect("delta > 0"))
            .clone();
        let i0 = b
            .floor(&q)
            .ok_or(Error::PrecisionExhausted { index: self.n, bits: b.bits() })?;
        let mut undecided = false;
        for i in [&i0 - 1, i0.clone()] {
            if i < BigInt::from(0) || i >= BigInt::from(self.cells) {
                continue;
            }
            let r = self.rect(&w, &left, i.to_u64().unwrap());
            match self.rect_contains(&r, x, y) {
                Some(true) => return Ok(Some(true)),
                Some(false) => {}
                None => undecided = true,
            }
        }
        Ok(if undecided { None } else { Some(false) })
    }
}
