//! Cylinders `I_n(w)`, the partition of `[0, 1]` they form, and the target
//! intervals `[y_n, y_n + r_n)` inside them.

use std::cmp::Ordering;
use std::io::Write;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::admissibility::{enumerate_admissible, Language, Word};
use crate::arith::Backend;
use crate::error::{Error, Result};
use crate::expansion::{left_endpoint, orbit_of_one};
use crate::measure::DimensionFn;

/// The cylinder of an admissible word: `[left, left + length)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder<P> {
    pub word: Word,
    pub left: P,
    pub length: P,
}

impl<P: Clone> Cylinder<P> {
    pub fn right<B: Backend<Point = P>>(&self, beta: &B) -> P {
        beta.add(&self.left, &self.length)
    }
}

/// Fractional bits needed to resolve quantities of size about `beta^-n`.
pub(crate) fn bits_for<B: Backend>(beta: &B, n: usize) -> u32 {
    let log2 = beta.to_f64(&beta.beta()).log2();
    (n as f64 * log2).ceil() as u32 + 96
}

fn inadmissible(w: &[u32]) -> Error {
    Error::InadmissibleWord(Word(w.to_vec()).to_string())
}

/// The cylinder of `w`; its length is the gap to the left endpoint of the
/// lexicographic successor, or to 1 for the last word.
pub fn cylinder<B: Backend>(beta: &B, w: &[u32]) -> Result<Cylinder<B::Point>> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    let lang = Language::new(beta, w.len())?;
    if !lang.is_admissible(w)? {
        return Err(inadmissible(w));
    }
    let left = left_endpoint(beta, w);
    let right = match lang.successor(w)? {
        Some(next) => left_endpoint(beta, &next),
        None => beta.one(),
    };
    Ok(Cylinder {
        word: Word(w.to_vec()),
        length: beta.sub(&right, &left),
        left,
    })
}

/// All cylinders of depth `n` in lexicographic (and spatial) order.
pub fn cylinders<B: Backend>(beta: &B, n: usize, cap: u64) -> Result<Vec<Cylinder<B::Point>>> {
    let words: Vec<Word> = enumerate_admissible(beta, n, cap)?.collect();
    let lefts: Vec<B::Point> = words.iter().map(|w| left_endpoint(beta, &w.0)).collect();
    Ok(words
        .into_iter()
        .enumerate()
        .map(|(k, word)| {
            let right = lefts.get(k + 1).cloned().unwrap_or_else(|| beta.one());
            Cylinder {
                word,
                length: beta.sub(&right, &lefts[k]),
                left: lefts[k].clone(),
            }
        })
        .collect())
}

/// Writes `word,left,length,exact` rows.
pub fn write_cylinders_csv<B: Backend, W: Write>(
    beta: &B,
    cyls: &[Cylinder<B::Point>],
    digits: usize,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    w.write_record(["word", "left", "length", "exact"]).map_err(io)?;
    for c in cyls {
        w.write_record([
            c.word.to_string(),
            beta.decimal(&c.left, digits),
            beta.decimal(&c.length, digits),
            beta.is_exact().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}

/// Upper bound on `|p|` from an enclosure; 0 when certified zero.
fn abs_bound<B: Backend>(beta: &B, p: &B::Point, bits: u32) -> f64 {
    if beta.sign(p) == Some(Ordering::Equal) {
        return 0.0;
    }
    let i = beta.enclose(p, bits.max(beta.bits()));
    let a = i.lo().abs().to_f64().unwrap_or(f64::INFINITY);
    let b = i.hi().abs().to_f64().unwrap_or(f64::INFINITY);
    a.max(b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub n: usize,
    pub cylinders: u64,
    /// Sum of the lengths, to 30 decimal places.
    pub total_length: String,
    /// Upper bound on `|total - 1|`.
    pub total_error: f64,
    /// Largest gap between consecutive cylinders (0 when they abut).
    pub max_gap: f64,
    /// Largest overlap between consecutive cylinders.
    pub max_overlap: f64,
    /// Largest enclosure width among the endpoints.
    pub max_width: f64,
    pub exact: bool,
}

impl PartitionReport {
    /// True when the cylinders tile `[0, 1]` up to `tol`.
    pub fn tiles(&self, tol: f64) -> bool {
        self.total_error <= tol && self.max_gap <= tol && self.max_overlap <= tol
    }
}

/// Checks that the depth-`n` cylinders tile `[0, 1]`.
///
/// Lengths are taken from the tail of the orbit of 1, `beta^-n T^j(1)` where
/// `j` is the length of the suffix of `w` tied with `eps*`, which does not
/// rely on the ordering used to enumerate the words.
pub fn partition_check<B: Backend>(beta: &B, n: usize, cap: u64) -> Result<PartitionReport> {
    let lang = Language::new(beta, n)?;
    let auto = lang.automaton();
    let orbit = orbit_of_one(beta, auto.states())?;
    let scale = beta.beta_pow_neg(n);
    let bits = bits_for(beta, n);
    let words: Vec<Word> = enumerate_admissible(beta, n, cap)?.collect();

    let mut total = beta.zero();
    let mut max_gap: f64 = 0.0;
    let mut max_overlap: f64 = 0.0;
    let mut max_width = BigRational::zero();
    let mut prev_right: Option<B::Point> = None;
    let mut check_gap = |gap: B::Point| {
        let mag = abs_bound(beta, &gap, bits);
        match beta.sign(&gap) {
            Some(Ordering::Equal) => {}
            Some(Ordering::Greater) => max_gap = max_gap.max(mag),
            Some(Ordering::Less) => max_overlap = max_overlap.max(mag),
            None => {
                max_gap = max_gap.max(mag);
                max_overlap = max_overlap.max(mag);
            }
        }
    };
    for w in &words {
        let left = left_endpoint(beta, &w.0);
        let state = *auto.trace(&w.0).expect("enumerated words are accepted").last().unwrap();
        let length = beta.mul(&orbit[state], &scale);
        match &prev_right {
            Some(r) => check_gap(beta.sub(&left, r)),
            None => check_gap(left.clone()),
        }
        let right = beta.add(&left, &length);
        let wd = beta.width(&right);
        if wd > max_width {
            max_width = wd;
        }
        total = beta.add(&total, &length);
        prev_right = Some(right);
    }
    if let Some(r) = &prev_right {
        check_gap(beta.sub(&beta.one(), r));
    }
    let err = beta.sub(&total, &beta.one());
    Ok(PartitionReport {
        n,
        cylinders: words.len() as u64,
        total_length: beta.decimal(&total, 30),
        total_error: abs_bound(beta, &err, bits),
        max_gap,
        max_overlap,
        max_width: max_width.to_f64().unwrap_or(f64::INFINITY),
        exact: beta.is_exact(),
    })
}

/// The target interval `[y_n, y_n + r_n)` in the cylinder of `word`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetInterval<P> {
    pub word: Word,
    pub y: P,
    /// `left + y beta^-n`.
    pub y_n: P,
    /// Right endpoint of the cylinder.
    pub b: P,
    /// `min(b - y_n, Psi(n) beta^-n)`, clipped at 0.
    pub r_n: P,
    /// `min(b - y_n, f(Psi(n) beta^-n))`, clipped at 0, when `f` is given.
    pub t_n: Option<f64>,
    /// `ln r_n` (`-inf` when `r_n = 0`).
    pub ln_r_n: f64,
    /// `ln t_n` (`-inf` when `t_n = 0`).
    pub ln_t_n: Option<f64>,
}

pub fn target_interval<B: Backend>(
    beta: &B,
    w: &[u32],
    y: &B::Point,
    psi_n: &BigRational,
    f: Option<&DimensionFn>,
) -> Result<TargetInterval<B::Point>> {
    if beta.sign(y) == Some(Ordering::Less) || beta.cmp(y, &beta.one()) != Some(Ordering::Less) {
        return Err(Error::InvalidPoint(format!("target {y:?} is not in [0, 1)")));
    }
    if !psi_n.is_positive() {
        return Err(Error::InvalidArgument("Psi(n) must be positive".into()));
    }
    let n = w.len();
    let cyl = cylinder(beta, w)?;
    let scale = beta.beta_pow_neg(n);
    let b = cyl.right(beta);
    let y_n = beta.add(&cyl.left, &beta.mul(y, &scale));
    let room = beta.sub(&b, &y_n);
    let rad = beta.mul(&beta.from_rational(psi_n), &scale);
    let bits = bits_for(beta, n);
    let empty = beta.sign(&room) != Some(Ordering::Greater);
    let r_n = if empty { beta.zero() } else { beta.min(&room, &rad) };
    let ln_r_n = if empty { f64::NEG_INFINITY } else { beta.ln(&r_n, bits) };
    let ln_t_n = f.map(|f| {
        if empty {
            f64::NEG_INFINITY
        } else {
            let ln_rad = crate::numfmt::ln_rational(psi_n) + beta.ln(&scale, bits);
            beta.ln(&room, bits).min(f.ln_eval(ln_rad))
        }
    });
    Ok(TargetInterval {
        word: cyl.word,
        y: y.clone(),
        y_n,
        b,
        r_n,
        t_n: ln_t_n.map(f64::exp),
        ln_r_n,
        ln_t_n,
    })
}

/// A sampled instance where `f(r_n) < t_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioWitness {
    pub word: Word,
    pub y: f64,
    pub psi_n: f64,
    pub ln_f_r_n: f64,
    pub ln_t_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub trials: usize,
    /// Trials where `t_n > 0`, so the inequality is not trivial.
    pub nontrivial: usize,
    /// Trials where `t_n > 0` but `r_n = 0`.
    pub positive_t_zero_r: usize,
    pub violations: Vec<RatioWitness>,
}

impl RatioReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.positive_t_zero_r == 0
    }
}

/// A random admissible word of length `n`, choosing each digit uniformly
/// among those the automaton allows.
pub fn random_word<R: Rng>(lang: &Language, n: usize, rng: &mut R) -> Vec<u32> {
    let auto = lang.automaton();
    let mut s = 0;
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        let d = rng.gen_range(0..=auto.top(s));
        w.push(d);
        s = auto.step(s, d).unwrap();
    }
    w
}

/// Samples words of length `n_min..n_min + 32` with random `y` and
/// `Psi(n)`, and checks `f(r_n) >= t_n` on each.
pub fn target_ratio_check<B: Backend>(
    beta: &B,
    f: &DimensionFn,
    n_min: usize,
    trials: usize,
    seed: u64,
) -> Result<RatioReport> {
    match f.ratio_unbounded(1) {
        Some(true) => {}
        Some(false) => {
            return Err(Error::HypothesisViolated(format!(
                "r^-1 f(r) stays bounded as r -> 0 for f = {f}"
            )))
        }
        None => {
            return Err(Error::PreconditionUnverifiable(format!(
                "cannot decide whether r^-1 f(r) -> infinity for f = {f}"
            )))
        }
    }
    let n_max = n_min.max(1) + 32;
    let lang = Language::new(beta, n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RatioReport {
        trials,
        nontrivial: 0,
        positive_t_zero_r: 0,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        let n = rng.gen_range(n_min.max(1)..n_max);
        let w = random_word(&lang, n, &mut rng);
        let y_num: u64 = rng.gen_range(0..1u64 << 53);
        let y = BigRational::new(y_num.into(), (1u64 << 53).into());
        let psi = BigRational::new(rng.gen_range(1..=1u64 << 53).into(), (1u64 << 53).into());
        let ti = target_interval(beta, &w, &beta.from_rational(&y), &psi, Some(f))?;
        let ln_t = ti.ln_t_n.unwrap();
        if ln_t == f64::NEG_INFINITY {
            continue;
        }
        report.nontrivial += 1;
        if ti.ln_r_n == f64::NEG_INFINITY {
            report.positive_t_zero_r += 1;
            continue;
        }
        let ln_f = f.ln_eval(ti.ln_r_n);
        if ln_f < ln_t - 1e-9 {
            report.violations.push(RatioWitness {
                word: ti.word,
                y: y.to_f64().unwrap(),
                psi_n: psi.to_f64().unwrap(),
                ln_f_r_n: ln_f,
                ln_t_n: ln_t,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{QuadElem, QuadraticField, RationalField};
    use crate::admissibility::DEFAULT_BUDGET;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn cylinder_examples() {
        let two = RationalField::integer(2);
        let c = cylinder(&two, &[1]).unwrap();
        assert_eq!((c.left, c.length), (q(1, 2), q(1, 2)));

        let phi = QuadraticField::golden();
        let c = cylinder(&phi, &[1, 0]).unwrap();
        // 1/phi = phi - 1, 1/phi^2 = 2 - phi
        assert_eq!(c.left, QuadElem::new(q(-1, 1), q(1, 1)));
        assert_eq!(c.length, QuadElem::new(q(2, 1), q(-1, 1)));
        let c = cylinder(&phi, &[0, 1]).unwrap();
        assert_eq!(c.left, QuadElem::new(q(2, 1), q(-1, 1)));
        // 1/phi^3 = 2 phi - 3
        assert_eq!(c.length, QuadElem::new(q(-3, 1), q(2, 1)));
        assert!(matches!(cylinder(&phi, &[1, 1]), Err(Error::InadmissibleWord(_))));
    }

    #[test]
    fn partition_examples() {
        let two = RationalField::integer(2);
        let r = partition_check(&two, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.cylinders, 8);
        assert!(r.tiles(0.0));
        let cyls = cylinders(&two, 3, DEFAULT_BUDGET).unwrap();
        assert!(cyls.iter().all(|c| c.length == q(1, 8)));

        let phi = QuadraticField::golden();
        let cyls = cylinders(&phi, 2, DEFAULT_BUDGET).unwrap();
        let lens: Vec<_> = cyls.iter().map(|c| c.length.clone()).collect();
        let inv2 = QuadElem::new(q(2, 1), q(-1, 1));
        let inv3 = QuadElem::new(q(-3, 1), q(2, 1));
        assert_eq!(lens, vec![inv2.clone(), inv3, inv2]);
        let r = partition_check(&phi, 10, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.cylinders, 144);
        assert!(r.tiles(0.0), "{r:?}");
    }

    #[test]
    fn rational_base_partition() {
        let b = RationalField::new(q(9, 5));
        let r = partition_check(&b, 8, DEFAULT_BUDGET).unwrap();
        assert!(r.tiles(0.0), "{r:?}");
    }

    #[test]
    fn target_interval_examples() {
        let two = RationalField::integer(2);
        let t = target_interval(&two, &[0], &q(1, 2), &q(1, 10), None).unwrap();
        assert_eq!(t.y_n, q(1, 4));
        assert_eq!(t.b, q(1, 2));
        assert_eq!(t.r_n, q(1, 20));

        let t = target_interval(&two, &[1, 0], &q(0, 1), &q(9, 10), None).unwrap();
        assert_eq!(t.y_n, q(1, 2));
        assert_eq!(t.r_n, q(9, 40));

        let phi = QuadraticField::golden();
        let y = QuadElem::rational(q(7, 10));
        let t = target_interval(&phi, &[0, 1], &y, &q(1, 10), None).unwrap();
        // (1 + 0.7) / phi^2
        assert!((phi.to_f64(&t.y_n) - 0.649_342).abs() < 1e-6);
        assert!(t.r_n.is_zero());
        assert_eq!(t.ln_r_n, f64::NEG_INFINITY);
    }

    #[test]
    fn target_ratio_examples() {
        let two = RationalField::integer(2);
        let f = DimensionFn::power(q(1, 2));
        let r = target_ratio_check(&two, &f, 30, 300, 7).unwrap();
        assert!(r.passed());
        assert!(r.nontrivial > 0);
        let id = DimensionFn::power(q(1, 1));
        assert!(matches!(
            target_ratio_check(&two, &id, 30, 10, 7),
            Err(Error::HypothesisViolated(_))
        ));
        let tab = DimensionFn::tabulated(vec![(0.01, 0.1), (0.1, 0.3)]).unwrap();
        assert!(matches!(
            target_ratio_check(&two, &tab, 30, 10, 7),
            Err(Error::PreconditionUnverifiable(_))
        ));
    }

    #[test]
    fn csv_dump() {
        let two = RationalField::integer(2);
        let cyls = cylinders(&two, 2, DEFAULT_BUDGET).unwrap();
        let mut buf = Vec::new();
        write_cylinders_csv(&two, &cyls, 4, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("word,left,length,exact\n"));
        assert!(text.contains("\"1,0\",0.5000,0.2500,true"));
    }
}
