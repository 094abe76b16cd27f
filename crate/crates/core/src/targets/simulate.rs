//! Monte Carlo hit statistics over uniformly sampled starting points.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hits_at, psi_table, HitMode};
use crate::arith::Backend;
use crate::beta::{Beta, Value};
use crate::error::{Error, Result};
use crate::measure::TargetFn;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    pub mode: HitMode,
    /// Thresholds `k` for the fraction of samples with at least `k` hits.
    pub ks: Vec<usize>,
    /// Hits beyond this index count towards `tail_frac`; default `N / 2`.
    pub tail_from: Option<usize>,
    /// Bits of the dyadic sample points; default `N log2(beta) + 64`.
    pub resolution_bits: Option<u32>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 1000,
            seed: 0,
            mode: HitMode::TwoSided,
            ks: vec![1, 2, 5, 10],
            tail_from: None,
            resolution_bits: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub beta: String,
    pub y: String,
    pub psi: String,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub mode: HitMode,
    pub tail_from: usize,
    pub resolution_bits: u32,
}

/// One sampled orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample: usize,
    /// Numerator of `x = a / 2^resolution_bits`, in hexadecimal.
    pub x_hex: String,
    pub hits: usize,
    pub last_hit: Option<usize>,
    pub tail_hit: bool,
    pub uncertain: usize,
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub params: McParams,
    pub mean_hits: f64,
    pub std_err: f64,
    /// Expected hit count under Lebesgue measure (integer bases only).
    pub oracle_mean: Option<f64>,
    pub frac_ge_k: BTreeMap<usize, f64>,
    pub tail_frac: f64,
    pub uncertain_count: usize,
    pub failed_samples: usize,
    #[serde(skip)]
    pub rows: Vec<SampleRow>,
}

impl McReport {
    pub fn write_rows_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)
                .map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

fn sample_numerator(seed: u64, index: usize, bits: u32) -> BigUint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let words = bits.div_ceil(32) as usize;
    let mut buf = vec![0u32; words];
    for w in buf.iter_mut() {
        *w = rng.next_u32();
    }
    let a = BigUint::from_slice(&buf);
    a & ((BigUint::one() << bits as usize) - 1u32)
}

/// `t` compared with a threshold that may be negative.
fn cmp_signed(t: &BigUint, th: &BigInt) -> Ordering {
    if th.is_negative() {
        Ordering::Greater
    } else {
        t.cmp(th.magnitude())
    }
}

/// Scaled bounds `[floor(lo 2^R), ceil(hi 2^R)]`.
fn scaled(lo: &BigRational, hi: &BigRational, bits: u32) -> (BigInt, BigInt) {
    let s = BigRational::from_integer(BigInt::one() << bits as usize);
    ((lo * &s).floor().to_integer(), (hi * &s).ceil().to_integer())
}

struct Thresholds {
    // hit iff gt < t < lt, certain when t > gt.1 and t < lt.0
    gt: Vec<(BigInt, BigInt)>,
    lt: Vec<(BigInt, BigInt)>,
    // one-sided lower bound is inclusive
    inclusive: bool,
}

impl Thresholds {
    fn new(ylo: &BigRational, yhi: &BigRational, psi: &[BigRational], mode: HitMode, bits: u32) -> Self {
        let mut gt = Vec::with_capacity(psi.len());
        let mut lt = Vec::with_capacity(psi.len());
        for p in psi {
            lt.push(scaled(&(ylo + p), &(yhi + p), bits));
            gt.push(match mode {
                HitMode::TwoSided => scaled(&(ylo - p), &(yhi - p), bits),
                HitMode::OneSided => scaled(ylo, yhi, bits),
            });
        }
        Thresholds {
            gt,
            lt,
            inclusive: mode == HitMode::OneSided,
        }
    }

    fn classify(&self, k: usize, t: &BigUint) -> Option<bool> {
        let (g_lo, g_hi) = &self.gt[k];
        let (l_lo, l_hi) = &self.lt[k];
        if cmp_signed(t, l_hi) != Ordering::Less {
            return Some(false);
        }
        let below = if self.inclusive {
            cmp_signed(t, g_lo) == Ordering::Less
        } else {
            cmp_signed(t, g_lo) != Ordering::Greater
        };
        if below {
            return Some(false);
        }
        let above_low = if self.inclusive {
            cmp_signed(t, g_hi) != Ordering::Less
        } else {
            cmp_signed(t, g_hi) == Ordering::Greater
        };
        if above_low && cmp_signed(t, l_lo) == Ordering::Less {
            Some(true)
        } else {
            None
        }
    }
}

struct Outcome {
    hits: Vec<usize>,
    uncertain: usize,
    failed: bool,
}

fn integer_orbit(base: u32, a: BigUint, bits: u32, th: &Thresholds) -> Outcome {
    let mask = (BigUint::one() << bits as usize) - 1u32;
    let mut t = a;
    let mut hits = Vec::new();
    let mut uncertain = 0;
    for k in 0..th.gt.len() {
        t *= base;
        t &= &mask;
        match th.classify(k, &t) {
            Some(true) => hits.push(k + 1),
            Some(false) => {}
            None => uncertain += 1,
        }
    }
    Outcome {
        hits,
        uncertain,
        failed: false,
    }
}

fn lebesgue_oracle(y: f64, psi: &[BigRational], mode: HitMode) -> f64 {
    psi.iter()
        .map(|p| {
            let p = p.to_f64().unwrap_or(f64::INFINITY);
            let hi = (y + p).min(1.0);
            let lo = match mode {
                HitMode::TwoSided => (y - p).max(0.0),
                HitMode::OneSided => y,
            };
            (hi - lo).max(0.0)
        })
        .sum()
}

/// Samples `x` uniformly (as dyadic rationals) and records the hits of each
/// orbit in the target around `y`.
///
/// Per-sample random streams are derived from `seed` and the sample index,
/// and the reduction runs in index order, so results do not depend on the
/// number of threads.
pub fn monte_carlo_measure(
    beta: &Beta,
    y: &Value,
    psi: &TargetFn,
    n_max: usize,
    opts: &McOptions,
) -> Result<McReport> {
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let y = beta.point(y)?;
    if beta.sign(&y) == Some(Ordering::Less) || beta.cmp(&y, &beta.one()) != Some(Ordering::Less) {
        return Err(Error::InvalidPoint(format!("target {y} is not in [0, 1)")));
    }
    let table = psi_table(beta, psi, n_max)?;
    let bits = opts
        .resolution_bits
        .unwrap_or((n_max as f64 * beta.approx_f64().log2()).ceil() as u32 + 64);
    let tail_from = opts.tail_from.unwrap_or(n_max / 2);
    let integer = beta.as_integer().and_then(|b| u32::try_from(b).ok());

    let outcomes: Vec<(BigUint, Outcome)> = match integer {
        Some(base) => {
            let yi = beta.enclose(&y, bits + 8);
            let th = Thresholds::new(&yi.lo(), &yi.hi(), &table, opts.mode, bits);
            (0..opts.samples)
                .into_par_iter()
                .map(|i| {
                    let a = sample_numerator(opts.seed, i, bits);
                    let out = integer_orbit(base, a.clone(), bits, &th);
                    (a, out)
                })
                .collect()
        }
        None => (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let a = sample_numerator(opts.seed, i, bits);
                let x = Value::Rational(BigRational::new(a.clone().into(), BigInt::one() << bits as usize));
                let res = beta.escalate(|b| {
                    let (h, u) = hits_at(b, &x, &y, &table, opts.mode)?;
                    Ok((h, u.len()))
                });
                let out = match res {
                    Ok((hits, uncertain)) => Outcome {
                        hits,
                        uncertain,
                        failed: false,
                    },
                    Err(_) => Outcome {
                        hits: Vec::new(),
                        uncertain: 0,
                        failed: true,
                    },
                };
                (a, out)
            })
            .collect(),
    };

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut counts = Vec::new();
    let mut tail = 0usize;
    let mut uncertain_count = 0;
    let mut failed = 0;
    for (i, (a, o)) in outcomes.into_iter().enumerate() {
        let tail_hit = o.hits.last().is_some_and(|&n| n > tail_from);
        if o.failed {
            failed += 1;
        } else {
            counts.push(o.hits.len() as f64);
            tail += tail_hit as usize;
            uncertain_count += o.uncertain;
        }
        rows.push(SampleRow {
            sample: i,
            x_hex: a.to_str_radix(16),
            hits: o.hits.len(),
            last_hit: o.hits.last().copied(),
            tail_hit,
            uncertain: o.uncertain,
            failed: o.failed,
        });
    }
    let m = counts.len();
    if m == 0 {
        return Err(Error::PrecisionExhausted {
            index: 1,
            bits: beta.precision().max,
        });
    }
    let mean = counts.iter().sum::<f64>() / m as f64;
    let var = if m > 1 {
        counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1) as f64
    } else {
        0.0
    };
    let frac_ge_k = opts
        .ks
        .iter()
        .map(|&k| (k, counts.iter().filter(|&&c| c >= k as f64).count() as f64 / m as f64))
        .collect();
    let oracle_mean = integer.map(|_| lebesgue_oracle(beta.to_f64(&y), &table, opts.mode));
    Ok(McReport {
        params: McParams {
            beta: beta.to_string(),
            y: beta.decimal(&y, 20),
            psi: psi.to_string(),
            n_max,
            samples: opts.samples,
            seed: opts.seed,
            mode: opts.mode,
            tail_from,
            resolution_bits: bits,
        },
        mean_hits: mean,
        std_err: (var / m as f64).sqrt(),
        oracle_mean,
        frac_ge_k,
        tail_frac: tail as f64 / m as f64,
        uncertain_count,
        failed_samples: failed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::hit_sequence;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fast_path_matches_exact_orbits() {
        let two = Beta::integer(2).unwrap();
        let psi = TargetFn::polynomial(q(1, 4), q(1, 1)).unwrap();
        let y = Value::rational(2, 5);
        let opts = McOptions {
            samples: 20,
            seed: 3,
            ..McOptions::default()
        };
        let r = monte_carlo_measure(&two, &y, &psi, 60, &opts).unwrap();
        for row in &r.rows {
            let a = BigInt::parse_bytes(row.x_hex.as_bytes(), 16).unwrap();
            let x = Value::Rational(BigRational::new(a, BigInt::one() << r.params.resolution_bits as usize));
            let h = hit_sequence(&two, &x, &y, &psi, 60, HitMode::TwoSided).unwrap();
            assert_eq!(h.hits.len(), row.hits);
            assert_eq!(h.hits.last().copied(), row.last_hit);
        }
    }

    #[test]
    fn saturated_target_hits_everywhere() {
        let two = Beta::integer(2).unwrap();
        let psi = TargetFn::constant(q(2, 1)).unwrap();
        let opts = McOptions {
            samples: 10,
            ..McOptions::default()
        };
        let r = monte_carlo_measure(&two, &Value::rational(1, 2), &psi, 50, &opts).unwrap();
        assert_eq!(r.mean_hits, 50.0);
        assert_eq!(r.oracle_mean, Some(50.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let phi = Beta::golden();
        let psi = TargetFn::polynomial(q(1, 2), q(1, 1)).unwrap();
        let opts = McOptions {
            samples: 16,
            seed: 9,
            ..McOptions::default()
        };
        let a = monte_carlo_measure(&phi, &Value::rational(1, 3), &psi, 40, &opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| monte_carlo_measure(&phi, &Value::rational(1, 3), &psi, 40, &opts))
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows, b.rows);
        assert!(a.oracle_mean.is_none());
    }
}
