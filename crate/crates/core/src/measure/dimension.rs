//! Box-counting estimates of the dimension of the limsup sets from the
//! covers at each level, with `Psi(n) = beta^(-n tau)`.

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::functions::TargetFn;
use super::series::{predicted_hausdorff, Ambient};
use crate::admissibility::Language;
use crate::arith::Backend;
use crate::error::{Error, Result};
use crate::expansion::orbit_of_one;
use crate::numfmt::ln_bigint;
use crate::targets::{cell_count_big, SQUARES_PER_RECT};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    /// `beta^(-n (1 + tau))`
    pub delta: f64,
    #[serde(with = "crate::admissibility::decimal")]
    pub count: BigUint,
    pub ln_inv_delta: f64,
    pub ln_count: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub ambient: Ambient,
    pub tau: String,
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
    pub predicted: f64,
    pub levels: Vec<Level>,
}

impl DimensionEstimate {
    /// Rows `n,delta,count` then `slope,<slope>,<residual>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        w.write_record(["n", "delta", "count"]).map_err(io)?;
        for l in &self.levels {
            w.write_record([l.n.to_string(), format!("{:e}", l.delta), l.count.to_string()])
                .map_err(io)?;
        }
        w.write_record(["slope".to_string(), self.slope.to_string(), self.residual.to_string()])
            .map_err(io)?;
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Number of words of length `n` whose target interval at `y` is nonempty:
/// those ending in a state `s` with `y < T^s(1)`.
pub fn nonempty_targets<B: Backend>(beta: &B, y: &B::Point, n: usize) -> Result<BigUint> {
    let auto = Language::new(beta, n)?.automaton();
    let by_state = auto.count_by_state(n);
    beta.escalate(|b| {
        let orbit = orbit_of_one(b, auto.states())?;
        let mut total = BigUint::default();
        for (s, c) in by_state.iter().enumerate() {
            match b.cmp(y, &orbit[s]) {
                Some(Ordering::Less) => total += c,
                Some(_) => {}
                None => return Err(Error::PrecisionExhausted { index: s, bits: b.bits() }),
            }
        }
        Ok(total)
    })
}

/// Least-squares `(slope, intercept, rms residual)`.
pub fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / k).sqrt())
}

/// Fits `ln N(delta_n)` against `ln(1/delta_n)` over the levels in `ns`.
/// On the line `N` counts nonempty target intervals; in the plane it counts
/// squares of diameter `delta_n` in the rectangle cover.
pub fn box_dimension_estimate<B: Backend>(
    beta: &B,
    y: &B::Point,
    tau: &BigRational,
    ns: &[usize],
    ambient: Ambient,
) -> Result<DimensionEstimate> {
    let mut ns: Vec<usize> = ns.iter().copied().filter(|&n| n > 0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::DegenerateRange(ns.len()));
    }
    let psi = TargetFn::exponential(tau.clone())?;
    let tau_f = tau.to_f64().unwrap_or(f64::NAN);
    let ln_beta = beta.to_f64(&beta.beta()).ln();
    let rb = beta.rational_beta();
    let mut levels = Vec::with_capacity(ns.len());
    for &n in &ns {
        let count = match ambient {
            Ambient::Line => nonempty_targets(beta, y, n)?,
            Ambient::Plane => {
                let words = Language::new(beta, n)?.automaton().count(n);
                let psi_n = psi.rational(n, ln_beta, rb.as_ref())?;
                let cells = cell_count_big(beta, n, &psi_n)?.to_biguint().expect("positive");
                words * cells * SQUARES_PER_RECT
            }
        };
        let ln_inv_delta = n as f64 * ln_beta * (1.0 + tau_f);
        let ln_count = if count == BigUint::default() {
            f64::NEG_INFINITY
        } else {
            ln_bigint(&BigInt::from(count.clone()))
        };
        levels.push(Level {
            n,
            delta: (-ln_inv_delta).exp(),
            count,
            ln_inv_delta,
            ln_count,
        });
    }
    if levels.iter().any(|l| !l.ln_count.is_finite()) {
        return Err(Error::InvalidPoint("y leaves every target interval empty".into()));
    }
    let pts: Vec<_> = levels.iter().map(|l| (l.ln_inv_delta, l.ln_count)).collect();
    let (slope, intercept, residual) = ols(&pts);
    Ok(DimensionEstimate {
        ambient,
        tau: tau.to_string(),
        slope,
        intercept,
        residual,
        predicted: predicted_hausdorff(tau_f, ambient)?,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{QuadraticField, RationalField};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_line_is_exact() {
        let two = RationalField::integer(2);
        let e = box_dimension_estimate(&two, &q(0, 1), &q(1, 1), &[4, 8, 12, 16], Ambient::Line).unwrap();
        assert!((e.slope - 0.5).abs() < 1e-12);
        assert!(e.residual < 1e-9);
        assert_eq!(e.predicted, 0.5);
    }

    #[test]
    fn binary_plane() {
        let two = RationalField::integer(2);
        let e = box_dimension_estimate(&two, &q(0, 1), &q(1, 1), &[10, 20, 30, 40], Ambient::Plane).unwrap();
        assert!((e.slope - 1.5).abs() < 0.05, "{}", e.slope);
        assert_eq!(e.levels[0].count, BigUint::from(64u64 * 1024 * (1 << 20 | 1)));
    }

    #[test]
    fn golden_counts_depend_on_y() {
        let phi = QuadraticField::golden();
        let n = 10;
        let all = Language::new(&phi, n).unwrap().automaton().count(n);
        assert_eq!(nonempty_targets(&phi, &phi.zero(), n).unwrap(), all);
        // T(1) = phi - 1, so words ending in 1 drop out once y >= phi - 1
        let y = phi.from_rational(&q(7, 10));
        assert_eq!(nonempty_targets(&phi, &y, n).unwrap(), BigUint::from(89u32));
        assert_eq!(all, BigUint::from(144u32));
    }

    #[test]
    fn too_few_levels() {
        let two = RationalField::integer(2);
        assert!(matches!(
            box_dimension_estimate(&two, &q(0, 1), &q(1, 1), &[3, 3, 5], Ambient::Line),
            Err(Error::DegenerateRange(2))
        ));
    }

    #[test]
    fn csv_has_summary() {
        let two = RationalField::integer(2);
        let e = box_dimension_estimate(&two, &q(0, 1), &q(1, 1), &[2, 3, 4], Ambient::Line).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("n,delta,count\n2,"));
        assert!(s.lines().last().unwrap().starts_with("slope,0.5"));
    }
}
