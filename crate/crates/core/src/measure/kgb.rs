//! Greedy selection of disjoint blown-up balls inside a fixed interval,
//! generic over the float type.

use std::cmp::Ordering;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::functions::DimensionFn;
use crate::error::{Error, Result};

/// The closed interval `[center - radius, center + radius]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball<F> {
    pub center: F,
    pub radius: F,
}

impl<F: Float> Ball<F> {
    pub fn new(center: F, radius: F) -> Self {
        Ball { center, radius }
    }

    pub fn lo(&self) -> F {
        self.center - self.radius
    }

    pub fn hi(&self) -> F {
        self.center + self.radius
    }

    pub fn inside(&self, lo: F, hi: F) -> bool {
        self.lo() >= lo && self.hi() <= hi
    }

    /// Disjoint interiors.
    pub fn disjoint(&self, other: &Ball<F>) -> bool {
        (self.center - other.center).abs() >= self.radius + other.radius
    }
}

/// A ball tagged with its position `index` in the family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedBall<F> {
    pub index: usize,
    pub ball: Ball<F>,
}

pub type BallFamily<F> = Vec<IndexedBall<F>>;

/// Dyadic intervals of generations `from..=to`, indexed by generation.
pub fn dyadic_family<F: Float>(from: u32, to: u32) -> BallFamily<F> {
    let mut out = Vec::new();
    let two = F::one() + F::one();
    for m in from..=to {
        let r = two.powi(-(m as i32) - 1);
        for k in 0..(1u64 << m) {
            let c = F::from(2 * k + 1).expect("representable") * r;
            out.push(IndexedBall {
                index: m as usize,
                ball: Ball::new(c, r),
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KgbOptions<F> {
    /// Least fraction of `B` the admissible blow-ups must cover before the
    /// selection is attempted.
    pub min_coverage: F,
}

impl<F: Float> Default for KgbOptions<F> {
    fn default() -> Self {
        KgbOptions {
            min_coverage: F::from(0.5).unwrap(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KgbSelection<F> {
    /// Selected blow-ups `B(c, f(r))` with the index of the original ball.
    pub selected: Vec<IndexedBall<F>>,
    /// `sum f(r_L)` over the selection.
    pub mass: F,
    /// `|B| / 20`.
    pub bound: F,
    /// Fraction of `B` covered by all admissible blow-ups.
    pub coverage: F,
}

impl<F: Float> KgbSelection<F> {
    pub fn pairwise_disjoint(&self) -> bool {
        let mut v: Vec<_> = self.selected.iter().map(|b| b.ball).collect();
        v.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap_or(Ordering::Equal));
        v.windows(2).all(|w| w[0].disjoint(&w[1]))
    }
}

fn union_length<F: Float>(mut spans: Vec<(F, F)>) -> F {
    spans.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut total = F::zero();
    let mut cur: Option<(F, F)> = None;
    for (lo, hi) in spans {
        cur = match cur {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total = total + (b - a);
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = cur {
        total = total + (b - a);
    }
    total
}

/// Picks disjoint blow-ups `B(c, f(r))` of family members with index at
/// least `g` lying inside `[b.0, b.1]`, largest first, and checks that
/// their radii add up to at least `|B| / 20`.
pub fn kgb_select<F: Float>(
    family: &[IndexedBall<F>],
    f: &DimensionFn,
    b: (F, F),
    g: usize,
    opts: &KgbOptions<F>,
) -> Result<KgbSelection<F>> {
    let (lo, hi) = b;
    if !(hi > lo) {
        return Err(Error::InvalidArgument("B must have positive length".into()));
    }
    let len = hi - lo;
    let blow = |r: F| F::from(f.eval(r.to_f64().unwrap_or(0.0))).unwrap_or_else(F::zero);
    let mut cands: Vec<IndexedBall<F>> = family
        .iter()
        .filter(|ib| ib.index >= g)
        .map(|ib| IndexedBall {
            index: ib.index,
            ball: Ball::new(ib.ball.center, blow(ib.ball.radius)),
        })
        .filter(|ib| ib.ball.radius > F::zero() && ib.ball.inside(lo, hi))
        .collect();
    let coverage = union_length(cands.iter().map(|c| (c.ball.lo(), c.ball.hi())).collect()) / len;
    if coverage < opts.min_coverage {
        return Err(Error::HypothesisViolated(format!(
            "admissible blow-ups cover {:.4} of B, need {:.4}",
            coverage.to_f64().unwrap_or(f64::NAN),
            opts.min_coverage.to_f64().unwrap_or(f64::NAN)
        )));
    }
    cands.sort_by(|a, b| {
        b.ball
            .radius
            .partial_cmp(&a.ball.radius)
            .unwrap_or(Ordering::Equal)
            .then(a.ball.center.partial_cmp(&b.ball.center).unwrap_or(Ordering::Equal))
    });
    // accepted balls kept sorted by centre
    let mut accepted: Vec<IndexedBall<F>> = Vec::new();
    for c in cands {
        let pos = accepted.partition_point(|a| a.ball.center < c.ball.center);
        let left_ok = pos == 0 || accepted[pos - 1].ball.disjoint(&c.ball);
        let right_ok = pos == accepted.len() || accepted[pos].ball.disjoint(&c.ball);
        if left_ok && right_ok {
            accepted.insert(pos, c);
        }
    }
    let mass = accepted.iter().fold(F::zero(), |s, a| s + a.ball.radius);
    let bound = len / F::from(20).unwrap();
    if mass < bound {
        return Err(Error::HypothesisViolated(format!(
            "selected mass {:.6} is below |B|/20 = {:.6}",
            mass.to_f64().unwrap_or(f64::NAN),
            bound.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(KgbSelection {
        selected: accepted,
        mass,
        bound,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn id() -> DimensionFn {
        DimensionFn::power(BigRational::from_integer(1.into()))
    }

    #[test]
    fn dyadic_identity() {
        for g in [1, 4, 10] {
            let fam = dyadic_family::<f64>(g, g + 4);
            let sel = kgb_select(&fam, &id(), (0.0, 1.0), g as usize, &KgbOptions::default()).unwrap();
            assert!(sel.pairwise_disjoint());
            assert!(sel.selected.iter().all(|b| b.ball.inside(0.0, 1.0) && b.index >= g as usize));
            assert!(sel.mass >= 0.25);
            assert_eq!(sel.coverage, 1.0);
        }
    }

    #[test]
    fn works_in_f32() {
        let fam = dyadic_family::<f32>(3, 6);
        let sel = kgb_select(&fam, &id(), (0.25, 0.75), 3, &KgbOptions::default()).unwrap();
        assert!(sel.pairwise_disjoint());
        assert!(sel.mass >= 0.5 / 20.0);
    }

    #[test]
    fn sparse_family_is_rejected() {
        let fam = vec![IndexedBall { index: 5, ball: Ball::new(0.5f64, 0.01) }];
        assert!(matches!(
            kgb_select(&fam, &id(), (0.0, 1.0), 1, &KgbOptions::default()),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn indices_below_g_are_ignored() {
        let fam = dyadic_family::<f64>(1, 3);
        assert!(kgb_select(&fam, &id(), (0.0, 1.0), 4, &KgbOptions::default()).is_err());
    }
}
