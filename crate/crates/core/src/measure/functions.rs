//! Parametric target functions `Psi` and dimension functions `f`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::{parse_rational, rational_from_f64};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn f(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// How `r^-d f(r)` moves as `r` decreases to 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
}

/// A dimension function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum DimensionFn {
    /// `r^s`
    Power { s: BigRational },
    /// `r^s (log 1/r)^b`
    PowerLog { s: BigRational, b: BigRational },
    /// Points `(r, f(r))` sorted by `r`, interpolated in log-log scale.
    Tabulated { points: Vec<(f64, f64)> },
}

impl DimensionFn {
    pub fn power(s: BigRational) -> Self {
        DimensionFn::Power { s }
    }

    pub fn power_log(s: BigRational, b: BigRational) -> Self {
        if b.is_zero() {
            DimensionFn::Power { s }
        } else {
            DimensionFn::PowerLog { s, b }
        }
    }

    pub fn tabulated(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a table needs at least two points".into()));
        }
        if points.iter().any(|&(r, v)| !(r > 0.0 && v > 0.0 && r.is_finite() && v.is_finite())) {
            return Err(Error::InvalidArgument("table entries must be positive".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DimensionFn::Tabulated { points })
    }

    /// `(s, b)` for the parametric families.
    pub fn params(&self) -> Option<(BigRational, BigRational)> {
        match self {
            DimensionFn::Power { s } => Some((s.clone(), BigRational::zero())),
            DimensionFn::PowerLog { s, b } => Some((s.clone(), b.clone())),
            DimensionFn::Tabulated { .. } => None,
        }
    }

    pub fn is_parametric(&self) -> bool {
        self.params().is_some()
    }

    /// `ln f(r)` given `ln r`, for `0 < r < 1`.
    pub fn ln_eval(&self, ln_r: f64) -> f64 {
        match self {
            DimensionFn::Power { s } => f(s) * ln_r,
            DimensionFn::PowerLog { s, b } => f(s) * ln_r + f(b) * (-ln_r).ln(),
            DimensionFn::Tabulated { points } => {
                let k = points.len();
                let (i, j) = match points.iter().position(|p| p.0.ln() >= ln_r) {
                    Some(0) => (0, 1),
                    Some(p) => (p - 1, p),
                    None => (k - 2, k - 1),
                };
                let (x0, y0) = (points[i].0.ln(), points[i].1.ln());
                let (x1, y1) = (points[j].0.ln(), points[j].1.ln());
                y0 + (y1 - y0) * (ln_r - x0) / (x1 - x0)
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.ln_eval(r.ln()).exp()
    }

    /// `f(r) / r`.
    pub fn divided_by_r(&self) -> Self {
        match self {
            DimensionFn::Power { s } => DimensionFn::Power { s: s - rat(1) },
            DimensionFn::PowerLog { s, b } => DimensionFn::PowerLog {
                s: s - rat(1),
                b: b.clone(),
            },
            DimensionFn::Tabulated { points } => DimensionFn::Tabulated {
                points: points.iter().map(|&(r, v)| (r, v / r)).collect(),
            },
        }
    }

    /// Trend of `r^-d f(r)` as `r -> 0`; `None` for tables.
    pub fn ratio_trend(&self, d: u32) -> Option<Trend> {
        let (s, b) = self.params()?;
        let e = s - rat(d as i64);
        Some(if e.is_negative() || (e.is_zero() && b.is_positive()) {
            Trend::Increasing
        } else if e.is_positive() || b.is_negative() {
            Trend::Decreasing
        } else {
            Trend::Constant
        })
    }

    /// Whether `r^-d f(r) -> infinity` as `r -> 0`.
    pub fn ratio_unbounded(&self, d: u32) -> Option<bool> {
        let (s, b) = self.params()?;
        let e = s - rat(d as i64);
        Some(e.is_negative() || (e.is_zero() && b.is_positive()))
    }

    /// Whether `f(r) -> 0` as `r -> 0`.
    pub fn vanishes_at_zero(&self) -> Option<bool> {
        let (s, b) = self.params()?;
        Some(s.is_positive() || (s.is_zero() && b.is_negative()))
    }
}

impl fmt::Display for DimensionFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionFn::Power { s } => write!(fm, "power:{s}"),
            DimensionFn::PowerLog { s, b } => write!(fm, "powerlog:{s},{b}"),
            DimensionFn::Tabulated { points } => {
                write!(fm, "table:")?;
                for (i, (r, v)) in points.iter().enumerate() {
                    if i > 0 {
                        write!(fm, ";")?;
                    }
                    write!(fm, "{r}={v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DimensionFn {
    type Err = Error;

    /// `power:<s>`, `powerlog:<s>,<b>` or `table:<r>=<f>;<r>=<f>;...`.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Parse(format!("bad dimension function {text:?}"));
        let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "power" => Ok(DimensionFn::power(parse_rational(rest)?)),
            "powerlog" => {
                let (s, b) = rest.split_once(',').ok_or_else(bad)?;
                Ok(DimensionFn::power_log(parse_rational(s)?, parse_rational(b)?))
            }
            "table" => {
                let points = rest
                    .split(';')
                    .map(|pair| {
                        let (r, v) = pair.split_once('=').ok_or_else(bad)?;
                        let r: f64 = r.trim().parse().map_err(|_| bad())?;
                        let v: f64 = v.trim().parse().map_err(|_| bad())?;
                        Ok((r, v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DimensionFn::tabulated(points)
            }
            _ => Err(bad()),
        }
    }
}

/// Which exponent to use for the logarithmic factor in [`TargetFn::log_refined`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogExponent {
    /// `(1 + eps)(tau + 1)/(tau + 2)`, which leaves a divergent series.
    Reduced,
    /// `(1 + eps)(tau + 1)`, which makes the series term `(n log beta)^-(1+eps)`.
    ExactOrder,
}

/// A target function `Psi(n) = C beta^(-n tau) n^(-a) (n log beta)^(-c)`,
/// or a table of values `Psi(1), Psi(2), ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum TargetFn {
    Family {
        c: BigRational,
        tau: BigRational,
        a: BigRational,
        log: BigRational,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

impl TargetFn {
    pub fn family(c: BigRational, tau: BigRational, a: BigRational, log: BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidArgument("the constant C must be positive".into()));
        }
        if tau.is_negative() {
            return Err(Error::InvalidArgument("tau must be non-negative".into()));
        }
        Ok(TargetFn::Family { c, tau, a, log })
    }

    /// `beta^(-n tau)`.
    pub fn exponential(tau: BigRational) -> Result<Self> {
        Self::family(rat(1), tau, rat(0), rat(0))
    }

    /// The constant function `c`.
    pub fn constant(c: BigRational) -> Result<Self> {
        Self::family(c, rat(0), rat(0), rat(0))
    }

    /// `c n^-a`.
    pub fn polynomial(c: BigRational, a: BigRational) -> Result<Self> {
        Self::family(c, rat(0), a, rat(0))
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("table values must be positive".into()));
        }
        Ok(TargetFn::Tabulated { values })
    }

    /// `beta^(-n tau) (log beta^n)^(-k)` with `k` chosen by `which`.
    pub fn log_refined(tau: BigRational, eps: BigRational, which: LogExponent) -> Result<Self> {
        let k = match which {
            LogExponent::Reduced => (rat(1) + &eps) * (&tau + rat(1)) / (&tau + rat(2)),
            LogExponent::ExactOrder => (rat(1) + &eps) * (&tau + rat(1)),
        };
        Self::family(rat(1), tau, rat(0), k)
    }

    /// `(C, tau, a, c)` for the parametric family.
    pub fn params(&self) -> Option<(&BigRational, &BigRational, &BigRational, &BigRational)> {
        match self {
            TargetFn::Family { c, tau, a, log } => Some((c, tau, a, log)),
            TargetFn::Tabulated { .. } => None,
        }
    }

    pub fn tau(&self) -> Option<&BigRational> {
        self.params().map(|p| p.1)
    }

    /// Largest `n` the function is defined for.
    pub fn max_n(&self) -> Option<usize> {
        match self {
            TargetFn::Family { .. } => None,
            TargetFn::Tabulated { values } => Some(values.len()),
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("Psi is indexed from n = 1".into()));
        }
        if let Some(m) = self.max_n() {
            if n > m {
                return Err(Error::InvalidArgument(format!(
                    "table of Psi has {m} values, asked for n = {n}"
                )));
            }
        }
        Ok(())
    }

    /// `ln Psi(n)`.
    pub fn ln_value(&self, n: usize, ln_beta: f64) -> Result<f64> {
        self.check_n(n)?;
        Ok(match self {
            TargetFn::Family { c, tau, a, log } => {
                let nf = n as f64;
                let mut v = f(c).ln() - nf * f(tau) * ln_beta;
                if !a.is_zero() {
                    v -= f(a) * nf.ln();
                }
                if !log.is_zero() {
                    v -= f(log) * (nf * ln_beta).ln();
                }
                v
            }
            TargetFn::Tabulated { values } => values[n - 1].ln(),
        })
    }

    pub fn value(&self, n: usize, ln_beta: f64) -> Result<f64> {
        Ok(self.ln_value(n, ln_beta)?.exp())
    }

    /// `Psi(n)` as an exact rational when it is one for the given base,
    /// otherwise the exact value of its `f64` approximation.
    pub fn rational(&self, n: usize, ln_beta: f64, beta: Option<&BigRational>) -> Result<BigRational> {
        self.check_n(n)?;
        if let TargetFn::Family { c, tau, a, log } = self {
            let beta_part = if tau.is_zero() {
                Some(rat(1))
            } else {
                match (beta, tau.is_integer()) {
                    (Some(b), true) => tau
                        .to_integer()
                        .to_i32()
                        .and_then(|t| t.checked_mul(n as i32))
                        .map(|e| b.pow(-e)),
                    _ => None,
                }
            };
            if let (Some(bp), true, true) = (beta_part, a.is_integer(), log.is_zero()) {
                if let Some(ai) = a.to_integer().to_i32() {
                    return Ok(c * bp * rat(n as i64).pow(-ai));
                }
            }
        }
        let v = self.value(n, ln_beta)?;
        match rational_from_f64(v) {
            Some(q) if q.is_positive() => Ok(q),
            _ => Err(Error::InvalidArgument(format!("Psi({n}) is not representable"))),
        }
    }

    /// Whether `Psi(n) -> 0`; `None` for tables.
    pub fn tends_to_zero(&self) -> Option<bool> {
        let (_, tau, a, log) = self.params()?;
        Some(
            tau.is_positive()
                || (tau.is_zero() && (a.is_positive() || (a.is_zero() && log.is_positive()))),
        )
    }
}

impl fmt::Display for TargetFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFn::Family { c, tau, a, log } => {
                write!(fm, "exp:{tau}")?;
                if !a.is_zero() {
                    write!(fm, ",poly:{a}")?;
                }
                if !log.is_zero() {
                    write!(fm, ",log:{log}")?;
                }
                if !c.is_one() {
                    write!(fm, ",C:{c}")?;
                }
                Ok(())
            }
            TargetFn::Tabulated { values } => {
                write!(fm, "table:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(fm, ",")?;
                    }
                    write!(fm, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for TargetFn {
    type Err = Error;

    /// `exp:<tau>[,poly:<a>][,log:<c>][,C:<const>]`, `const:<c>` or
    /// `table:<v1>,<v2>,...`. Missing parameters default to 0 (and C to 1).
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("table:") {
            let values = rest
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad table value {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return TargetFn::tabulated(values);
        }
        let (mut c, mut tau, mut a, mut log) = (rat(1), rat(0), rat(0), rat(0));
        for item in text.split(',') {
            let (key, val) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad target function {text:?}")))?;
            let val = parse_rational(val)?;
            match key.trim() {
                "exp" | "tau" => tau = val,
                "poly" => a = val,
                "log" => log = val,
                "C" | "c" | "const" => c = val,
                other => return Err(Error::Parse(format!("unknown key {other:?} in {text:?}"))),
            }
        }
        TargetFn::family(c, tau, a, log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parse_and_display() {
        let p: TargetFn = "exp:1,poly:2,C:1/4".parse().unwrap();
        assert_eq!(p, TargetFn::family(q(1, 4), q(1, 1), q(2, 1), q(0, 1)).unwrap());
        assert_eq!(p.to_string(), "exp:1,poly:2,C:1/4");
        assert_eq!(p.to_string().parse::<TargetFn>().unwrap(), p);
        let c: TargetFn = "const:0.1".parse().unwrap();
        assert_eq!(c, TargetFn::constant(q(1, 10)).unwrap());
        assert!("exp:-1".parse::<TargetFn>().is_err());
        assert!("wobble:1".parse::<TargetFn>().is_err());
        let t: TargetFn = "table:0.5,0.25".parse().unwrap();
        assert_eq!(t.max_n(), Some(2));

        let g: DimensionFn = "powerlog:1/2,3".parse().unwrap();
        assert_eq!(g, DimensionFn::power_log(q(1, 2), q(3, 1)));
        assert_eq!(g.to_string().parse::<DimensionFn>().unwrap(), g);
        assert_eq!("power:0.5".parse::<DimensionFn>().unwrap(), DimensionFn::power(q(1, 2)));
        assert!("table:0.1=0.3;0.01=0.1".parse::<DimensionFn>().is_ok());
    }

    #[test]
    fn exact_values() {
        let ln2 = 2f64.ln();
        let p: TargetFn = "poly:1,C:1/4".parse().unwrap();
        assert_eq!(p.rational(5, ln2, None).unwrap(), q(1, 20));
        let e = TargetFn::exponential(q(1, 1)).unwrap();
        assert_eq!(e.rational(3, ln2, Some(&q(2, 1))).unwrap(), q(1, 8));
        assert!((e.value(3, ln2).unwrap() - 0.125).abs() < 1e-15);
        let l = TargetFn::family(q(1, 1), q(0, 1), q(0, 1), q(1, 1)).unwrap();
        assert!((l.value(4, ln2).unwrap() - 1.0 / (4.0 * ln2)).abs() < 1e-15);
    }

    #[test]
    fn dimension_function_shape() {
        let f = DimensionFn::power(q(1, 2));
        assert!((f.eval(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(f.ratio_unbounded(1), Some(true));
        assert_eq!(DimensionFn::power(q(1, 1)).ratio_unbounded(1), Some(false));
        assert_eq!(DimensionFn::power_log(q(1, 1), q(1, 1)).ratio_unbounded(1), Some(true));
        assert_eq!(f.ratio_trend(1), Some(Trend::Increasing));
        assert_eq!(DimensionFn::power(q(2, 1)).ratio_trend(2), Some(Trend::Constant));
        assert_eq!(f.vanishes_at_zero(), Some(true));
        let t = DimensionFn::tabulated(vec![(0.01, 0.1), (0.1, 0.3)]).unwrap();
        assert!((t.eval(0.01) - 0.1).abs() < 1e-12);
        assert_eq!(t.ratio_unbounded(1), None);
    }

    #[test]
    fn psi_limits() {
        assert_eq!(TargetFn::exponential(q(1, 1)).unwrap().tends_to_zero(), Some(true));
        assert_eq!(TargetFn::constant(q(1, 2)).unwrap().tends_to_zero(), Some(false));
        assert_eq!(TargetFn::exponential(q(0, 1)).unwrap().tends_to_zero(), Some(false));
    }
}
