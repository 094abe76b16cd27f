//! Convergence of the series `sum f(Psi(n)/beta^n) beta^n` (line) and
//! `sum g(Psi(n)/beta^n) beta^(2n) / Psi(n)` (plane).

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::functions::{DimensionFn, TargetFn};
use crate::arith::Backend;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureVerdict {
    Zero,
    Full,
    Undetermined,
}

impl From<Verdict> for MeasureVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Convergent => MeasureVerdict::Zero,
            Verdict::Divergent => MeasureVerdict::Full,
            Verdict::Undetermined => MeasureVerdict::Undetermined,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Undetermined => "undetermined",
        })
    }
}

/// Ambient space: the line (first series) or the square (second series).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    Line,
    Plane,
}

impl Ambient {
    pub fn theorem(self) -> u8 {
        match self {
            Ambient::Line => 1,
            Ambient::Plane => 2,
        }
    }

    pub fn dim(self) -> u32 {
        self.theorem() as u32
    }
}

/// The series term as an explicit product
/// `C^sigma beta^(n E) n^a_exp (n log beta)^l_exp (log 1/r)^b`,
/// where `r = Psi(n)/beta^n` and `sigma` is the power of `r` in the term
/// once the plane series is rewritten as a line series with `f = g/r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermForm {
    pub constant: BigRational,
    pub sigma: BigRational,
    pub beta_exp: BigRational,
    pub n_exp: BigRational,
    pub log_exp: BigRational,
    pub log_inv_r_exp: BigRational,
}

impl TermForm {
    /// `(E, p)` such that the term is comparable to `beta^(nE) n^p`.
    pub fn rate(&self) -> (BigRational, BigRational) {
        (
            self.beta_exp.clone(),
            &self.n_exp + &self.log_exp + &self.log_inv_r_exp,
        )
    }

    pub fn verdict(&self) -> Verdict {
        let (e, p) = self.rate();
        if e.is_positive() {
            Verdict::Divergent
        } else if e.is_negative() || p < -BigRational::one() {
            Verdict::Convergent
        } else {
            Verdict::Divergent
        }
    }

    /// The exact term when every factor is rational, e.g. 1 when all
    /// exponents vanish.
    pub fn exact_value(&self, n: usize, beta: Option<&BigRational>) -> Option<BigRational> {
        if !self.log_exp.is_zero() || !self.log_inv_r_exp.is_zero() {
            return None;
        }
        let int = |q: &BigRational| q.is_integer().then(|| q.to_integer().to_i32()).flatten();
        let c = if self.sigma.is_zero() || self.constant.is_one() {
            BigRational::one()
        } else {
            self.constant.pow(int(&self.sigma)?)
        };
        let be = &self.beta_exp * BigRational::from_integer(n.into());
        let b = if be.is_zero() {
            BigRational::one()
        } else {
            beta?.pow(int(&be)?)
        };
        let nn = if self.n_exp.is_zero() {
            BigRational::one()
        } else {
            BigRational::from_integer(n.into()).pow(int(&self.n_exp)?)
        };
        Some(c * b * nn)
    }
}

/// Symbolic term for the parametric families; `None` for tables.
pub fn term_form(f: &DimensionFn, psi: &TargetFn, ambient: Ambient) -> Option<TermForm> {
    let (s, b) = f.params()?;
    let (c, tau, a, log) = psi.params()?;
    let one = BigRational::one();
    let sigma = match ambient {
        Ambient::Line => s,
        Ambient::Plane => s - &one,
    };
    Some(TermForm {
        constant: c.clone(),
        beta_exp: &one - &sigma * (tau + &one),
        n_exp: -(a * &sigma),
        log_exp: -(log * &sigma),
        log_inv_r_exp: b,
        sigma,
    })
}

/// `ln` of the `n`-th term.
pub fn term_ln(f: &DimensionFn, psi: &TargetFn, ambient: Ambient, ln_beta: f64, n: usize) -> Result<f64> {
    let ln_psi = psi.ln_value(n, ln_beta)?;
    let nb = n as f64 * ln_beta;
    let ln_r = ln_psi - nb;
    Ok(match ambient {
        Ambient::Line => f.ln_eval(ln_r) + nb,
        Ambient::Plane => f.ln_eval(ln_r) + 2.0 * nb - ln_psi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    /// `None` when the sum overflows `f64`.
    pub partial_sum: Option<f64>,
    pub log10_partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub theorem: u8,
    pub verdict: Verdict,
    pub measure_verdict: MeasureVerdict,
    pub checkpoints: Vec<Checkpoint>,
    /// `[E, p]` with the term comparable to `beta^(nE) n^p`, as exact rationals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Powers of ten up to `n_max`, then `n_max`.
fn checkpoints(n_max: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut k = 1;
    while k < n_max {
        v.push(k);
        k = k.saturating_mul(10);
    }
    v.push(n_max);
    v
}

fn series<B: Backend>(
    f: &DimensionFn,
    psi: &TargetFn,
    beta: &B,
    n_max: usize,
    ambient: Ambient,
) -> Result<SeriesReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    let ln_beta = beta.to_f64(&beta.beta()).ln();
    let mut notes = Vec::new();
    let form = term_form(f, psi, ambient);
    let mut verdict = form.as_ref().map_or(Verdict::Undetermined, TermForm::verdict);
    if form.is_none() {
        notes.push("tabulated input: no analytic verdict".into());
    }
    match f.ratio_trend(ambient.dim()) {
        Some(_) => {}
        None => {
            notes.push(format!("monotonicity of r^-{} f(r) not decidable", ambient.dim()));
            verdict = Verdict::Undetermined;
        }
    }
    if psi.tends_to_zero() == Some(false) {
        notes.push("Psi(n) does not tend to 0".into());
    }
    let marks = checkpoints(n_max);
    let mut out = Vec::with_capacity(marks.len());
    let mut acc = f64::NEG_INFINITY;
    let mut next = 0;
    for n in 1..=n_max {
        let t = term_ln(f, psi, ambient, ln_beta, n)?;
        acc = if acc == f64::NEG_INFINITY {
            t
        } else {
            let m = acc.max(t);
            m + ((acc - m).exp() + (t - m).exp()).ln()
        };
        if n == marks[next] {
            let v = acc.exp();
            out.push(Checkpoint {
                n,
                partial_sum: v.is_finite().then_some(v),
                log10_partial_sum: acc / std::f64::consts::LN_10,
            });
            next += 1;
        }
    }
    Ok(SeriesReport {
        theorem: ambient.theorem(),
        verdict,
        measure_verdict: verdict.into(),
        checkpoints: out,
        rate: form.map(|t| {
            let (e, p) = t.rate();
            [e.to_string(), p.to_string()]
        }),
        notes,
    })
}

/// The line series `sum f(Psi(n)/beta^n) beta^n`.
pub fn series_thm1<B: Backend>(f: &DimensionFn, psi: &TargetFn, beta: &B, n_max: usize) -> Result<SeriesReport> {
    series(f, psi, beta, n_max, Ambient::Line)
}

/// The plane series `sum g(Psi(n)/beta^n) beta^(2n) / Psi(n)`.
pub fn series_thm2<B: Backend>(g: &DimensionFn, psi: &TargetFn, beta: &B, n_max: usize) -> Result<SeriesReport> {
    series(g, psi, beta, n_max, Ambient::Plane)
}

/// `1/(1+tau)` on the line, `1 + 1/(1+tau)` in the plane.
pub fn predicted_hausdorff(tau: f64, ambient: Ambient) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument("tau must be non-negative".into()));
    }
    let d = 1.0 / (1.0 + tau);
    Ok(match ambient {
        Ambient::Line => d,
        Ambient::Plane => 1.0 + d,
    })
}
