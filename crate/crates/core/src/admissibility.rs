//! Admissible digit words: recognition, enumeration and counting.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::Backend;
use crate::error::{Error, Result};
use crate::expansion::{star_sequence, StarSeq};

/// Default cap on the number of words an enumeration may produce.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A finite digit string, not necessarily admissible.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn new(digits: Vec<u32>) -> Self {
        Word(digits)
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u32>> for Word {
    fn from(v: Vec<u32>) -> Self {
        Word(v)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.trim().is_empty() {
            return Ok(Word(Vec::new()));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad digit {t:?} in word")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// Lexicographic order; a proper prefix sorts first.
pub fn lex_compare(u: &[u32], v: &[u32]) -> Ordering {
    u.cmp(v)
}

/// The language of the beta-shift up to a fixed word length.
#[derive(Clone, Debug)]
pub struct Language {
    star: StarSeq,
    eps: Vec<u32>,
}

impl Language {
    /// Builds the language for words of length at most `n`.
    pub fn new<B: Backend>(beta: &B, n: usize) -> Result<Self> {
        Self::from_star(star_sequence(beta, n.max(1))?, n)
    }

    pub fn from_star(star: StarSeq, n: usize) -> Result<Self> {
        let eps = star.prefix(n.max(1))?;
        Ok(Language { star, eps })
    }

    pub fn star(&self) -> &StarSeq {
        &self.star
    }

    /// Longest word length this language can judge.
    pub fn depth(&self) -> usize {
        self.eps.len()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.depth() {
            return Err(Error::InvalidArgument(format!(
                "word length {n} exceeds language depth {}",
                self.depth()
            )));
        }
        Ok(())
    }

    /// Direct check that every suffix is at most the prefix of `eps*` of
    /// the same length.
    pub fn is_admissible(&self, w: &[u32]) -> Result<bool> {
        self.check_len(w.len())?;
        let n = w.len();
        Ok((0..n).all(|k| w[k..] <= self.eps[..n - k]))
    }

    pub fn automaton(&self) -> Automaton {
        match &self.star {
            StarSeq::Periodic {
                preperiod, period, ..
            } => {
                let top: Vec<u32> = preperiod.iter().chain(period).copied().collect();
                let s = top.len();
                let next = (0..s)
                    .map(|j| if j + 1 < s { j + 1 } else { preperiod.len() })
                    .collect();
                Automaton {
                    top,
                    next,
                    depth: None,
                }
            }
            StarSeq::Prefix { .. } => {
                let n = self.depth();
                let mut top = self.eps.clone();
                top.push(0);
                let next = (0..=n).map(|j| (j + 1).min(n)).collect();
                Automaton {
                    top,
                    next,
                    depth: Some(n),
                }
            }
        }
    }

    /// Next word of the same length in lex order, `None` after the last.
    pub fn successor(&self, w: &[u32]) -> Result<Option<Vec<u32>>> {
        if !self.is_admissible(w)? {
            return Err(Error::InadmissibleWord(Word(w.to_vec()).to_string()));
        }
        let auto = self.automaton();
        let states = auto.trace(w).expect("admissible word has a path");
        Ok(auto.increment(w, &states).map(|(v, _)| v))
    }

    /// Lex-maximal word of length `n`.
    pub fn max_word(&self, n: usize) -> Result<Vec<u32>> {
        self.check_len(n)?;
        let auto = self.automaton();
        let mut s = 0;
        let mut w = Vec::with_capacity(n);
        for _ in 0..n {
            let d = auto.top[s];
            w.push(d);
            s = auto.step(s, d).unwrap();
        }
        Ok(w)
    }
}

/// Deterministic automaton recognising admissible words.
///
/// From state `j` the digits below `top[j]` lead back to state 0 and the
/// digit `top[j]` leads to `next[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    top: Vec<u32>,
    next: Vec<usize>,
    depth: Option<usize>,
}

impl Automaton {
    pub fn states(&self) -> usize {
        self.top.len()
    }

    /// Longest word length the automaton is valid for; `None` when unbounded.
    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    /// Largest digit allowed from `state`.
    pub fn top(&self, state: usize) -> u32 {
        self.top[state]
    }

    pub fn step(&self, state: usize, d: u32) -> Option<usize> {
        match d.cmp(&self.top[state]) {
            Ordering::Less => Some(0),
            Ordering::Equal => Some(self.next[state]),
            Ordering::Greater => None,
        }
    }

    /// States visited by `w`, starting at 0; `None` if `w` is rejected.
    pub fn trace(&self, w: &[u32]) -> Option<Vec<usize>> {
        let mut states = Vec::with_capacity(w.len() + 1);
        let mut s = 0;
        states.push(s);
        for &d in w {
            s = self.step(s, d)?;
            states.push(s);
        }
        Some(states)
    }

    fn increment(&self, w: &[u32], states: &[usize]) -> Option<(Vec<u32>, Vec<usize>)> {
        let i = (0..w.len()).rev().find(|&i| w[i] < self.top[states[i]])?;
        let mut v = w.to_vec();
        let mut st = states.to_vec();
        v[i] += 1;
        for k in i..v.len() {
            if k > i {
                v[k] = 0;
            }
            st[k + 1] = self.step(st[k], v[k]).unwrap();
        }
        Some((v, st))
    }

    fn matrix(&self) -> Vec<Vec<BigUint>> {
        let s = self.states();
        let mut m = vec![vec![BigUint::zero(); s]; s];
        for j in 0..s {
            m[j][0] += BigUint::from(self.top[j]);
            m[j][self.next[j]] += BigUint::one();
        }
        m
    }

    /// Number of accepted words of length `n`.
    pub fn count(&self, n: usize) -> BigUint {
        self.count_by_state(n).into_iter().sum()
    }

    /// Number of accepted words of length `n` ending in each state.
    pub fn count_by_state(&self, n: usize) -> Vec<BigUint> {
        if self.depth.is_some() {
            return self.count_dp(n);
        }
        let m = self.matrix();
        let mut row = vec![BigUint::zero(); self.states()];
        row[0] = BigUint::one();
        let mut base = m;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                row = vec_mul(&row, &base);
            }
            e >>= 1;
            if e > 0 {
                base = mat_mul(&base, &base);
            }
        }
        row
    }

    fn count_dp(&self, n: usize) -> Vec<BigUint> {
        let s = self.states();
        let mut v = vec![BigUint::zero(); s];
        v[0] = BigUint::one();
        for _ in 0..n {
            let mut w = vec![BigUint::zero(); s];
            for (j, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                w[0] += c * self.top[j];
                w[self.next[j]] += c;
            }
            v = w;
        }
        v
    }
}

fn vec_mul(v: &[BigUint], m: &[Vec<BigUint>]) -> Vec<BigUint> {
    let s = v.len();
    (0..s)
        .map(|j| {
            v.iter()
                .zip(m)
                .filter(|(a, row)| !a.is_zero() && !row[j].is_zero())
                .map(|(a, row)| a * &row[j])
                .sum()
        })
        .collect()
}

fn mat_mul(a: &[Vec<BigUint>], b: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    a.iter().map(|row| vec_mul(row, b)).collect()
}

/// Lex-ordered stream of the admissible words of one length.
#[derive(Clone, Debug)]
pub struct Enumeration {
    auto: Automaton,
    word: Vec<u32>,
    states: Vec<usize>,
    started: bool,
    done: bool,
}

impl Iterator for Enumeration {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Word(self.word.clone()));
        }
        match self.auto.increment(&self.word, &self.states) {
            Some((w, s)) => {
                self.word = w;
                self.states = s;
                Some(Word(self.word.clone()))
            }
            None => {
                self.done = true;
                None
            }
        }
    }
}

pub fn is_admissible<B: Backend>(beta: &B, w: &[u32]) -> Result<bool> {
    if w.is_empty() {
        return Ok(true);
    }
    Language::new(beta, w.len())?.is_admissible(w)
}

/// Enumerates `D_{beta,n}` in increasing lex order, refusing when the count
/// exceeds `cap`.
pub fn enumerate_admissible<B: Backend>(beta: &B, n: usize, cap: u64) -> Result<Enumeration> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let auto = Language::new(beta, n)?.automaton();
    let projected = auto.count(n);
    if projected > BigUint::from(cap) {
        return Err(Error::budget(projected, cap));
    }
    let word = vec![0; n];
    let states = auto.trace(&word).expect("zero word is admissible");
    Ok(Enumeration {
        auto,
        word,
        states,
        started: false,
        done: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    BruteForce,
    TransferMatrix,
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::BruteForce => "brute-force",
            CountMethod::TransferMatrix => "transfer-matrix",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleCount {
    pub n: usize,
    #[serde(with = "decimal")]
    pub count: BigUint,
    pub method: CountMethod,
}

pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Exact `#D_{beta,n}` from the automaton.
pub fn count_admissible<B: Backend>(beta: &B, n: usize) -> Result<AdmissibleCount> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let auto = Language::new(beta, n)?.automaton();
    Ok(AdmissibleCount {
        n,
        count: auto.count(n),
        method: CountMethod::TransferMatrix,
    })
}

/// Exact `#D_{beta,n}` by depth-first search with the suffix condition
/// checked directly on every extension.
pub fn count_brute<B: Backend>(beta: &B, n: usize) -> Result<AdmissibleCount> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let lang = Language::new(beta, n)?;
    let eps = &lang.eps;
    // ties: suffix starts whose suffix still equals the prefix of eps*
    fn go(eps: &[u32], n: usize, depth: usize, ties: &mut [usize]) -> u64 {
        if depth == n {
            return 1;
        }
        let mut total = 0;
        for d in 0..=eps[0] {
            let ok = ties.iter().all(|&k| d <= eps[depth - k]);
            if !ok {
                break;
            }
            let mut next: Vec<usize> = ties
                .iter()
                .copied()
                .filter(|&k| d == eps[depth - k])
                .collect();
            if d == eps[0] {
                next.push(depth);
            }
            total += go(eps, n, depth + 1, &mut next);
        }
        total
    }
    let count = go(eps, n, 0, &mut Vec::new());
    Ok(AdmissibleCount {
        n,
        count: BigUint::from(count),
        method: CountMethod::BruteForce,
    })
}

/// Outcome of checking `beta^n <= count <= beta^(n+1)/(beta-1)`.
///
/// Each side is `Some(true)` if certified, `Some(false)` if certified to fail,
/// `None` if the enclosure straddles the count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n: usize,
    pub lower: Option<bool>,
    pub upper: Option<bool>,
    pub lower_value: f64,
    pub upper_value: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lower == Some(true) && self.upper == Some(true)
    }
}

pub fn bound_check<B: Backend>(beta: &B, n: usize, count: &BigUint) -> BoundCheck {
    let eval = |b: &B| {
        let c = b.from_rational(&num_rational::BigRational::from_integer(count.clone().into()));
        let mut pow = b.one();
        for _ in 0..n {
            pow = b.mul(&pow, &b.beta());
        }
        let denom = b.sub(&b.beta(), &b.one());
        let upper = b
            .recip(&denom)
            .map(|r| b.mul(&b.mul(&pow, &b.beta()), &r));
        let lower_ok = b.sign(&b.sub(&c, &pow)).map(|s| s != Ordering::Less);
        let upper_ok = upper
            .as_ref()
            .and_then(|u| b.sign(&b.sub(u, &c)))
            .map(|s| s != Ordering::Less);
        BoundCheck {
            n,
            lower: lower_ok,
            upper: upper_ok,
            lower_value: b.to_f64(&pow),
            upper_value: upper.map(|u| b.to_f64(&u)).unwrap_or(f64::INFINITY),
        }
    };
    let mut last = None;
    let res = beta.escalate(|b| {
        let r = eval(b);
        let decided = r.lower.is_some() && r.upper.is_some();
        last = Some(r.clone());
        if decided {
            Ok(r)
        } else {
            Err(Error::PrecisionExhausted { index: n, bits: b.bits() })
        }
    });
    res.unwrap_or_else(|_| last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{QuadraticField, RationalField};
    use crate::beta::Beta;

    fn words(beta: &impl Backend, n: usize) -> Vec<Vec<u32>> {
        enumerate_admissible(beta, n, DEFAULT_BUDGET)
            .unwrap()
            .map(|w| w.0)
            .collect()
    }

    #[test]
    fn lex_examples() {
        assert_eq!(lex_compare(&[1, 0], &[1, 1]), Ordering::Less);
        assert_eq!(lex_compare(&[1, 0, 1], &[1, 0, 1]), Ordering::Equal);
        assert_eq!(lex_compare(&[0, 5], &[1, 0]), Ordering::Less);
        assert_eq!(lex_compare(&[1], &[1, 0]), Ordering::Less);
    }

    #[test]
    fn word_text_round_trip() {
        let w: Word = "1,0,1".parse().unwrap();
        assert_eq!(w, Word(vec![1, 0, 1]));
        assert_eq!(w.to_string(), "1,0,1");
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, "\"1,0,1\"");
        assert_eq!(serde_json::from_str::<Word>(&js).unwrap(), w);
        assert!("1,x".parse::<Word>().is_err());
    }

    #[test]
    fn admissibility_examples() {
        let two = RationalField::integer(2);
        let phi = QuadraticField::golden();
        assert!(is_admissible(&two, &[1, 1, 0, 1]).unwrap());
        assert!(!is_admissible(&phi, &[1, 1]).unwrap());
        assert!(is_admissible(&phi, &[1, 0, 1, 0, 1]).unwrap());
    }

    #[test]
    fn enumeration_examples() {
        let two = RationalField::integer(2);
        assert_eq!(words(&two, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let phi = QuadraticField::golden();
        assert_eq!(words(&phi, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(
            words(&phi, 3),
            vec![
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![1, 0, 0],
                vec![1, 0, 1]
            ]
        );
    }

    #[test]
    fn count_examples() {
        let two = RationalField::integer(2);
        assert_eq!(count_admissible(&two, 10).unwrap().count, BigUint::from(1024u32));
        let phi = QuadraticField::golden();
        assert_eq!(count_admissible(&phi, 5).unwrap().count, BigUint::from(13u32));
        let c20 = count_admissible(&phi, 20).unwrap();
        assert_eq!(c20.count, BigUint::from(17711u32));
        assert_eq!(count_brute(&phi, 20).unwrap().count, c20.count);
        let b = bound_check(&phi, 20, &c20.count);
        assert!(b.holds());
        assert!((b.lower_value - 15126.99993).abs() < 1e-3);
        // phi^21 / (phi - 1) = phi^22
        assert!((b.upper_value - 39602.99997).abs() < 1e-3);
    }

    #[test]
    fn coordinatewise_reading_breaks_the_bound() {
        let phi = QuadraticField::golden();
        let eps = [1, 0, 1];
        let coordinatewise = |w: &[u32]| {
            let n = w.len();
            (0..n).all(|k| w[k..].iter().zip(&eps[..n - k]).all(|(a, b)| a <= b))
        };
        let all: Vec<Vec<u32>> = (0..8u32)
            .map(|m| vec![(m >> 2) & 1, (m >> 1) & 1, m & 1])
            .collect();
        let coord = all.iter().filter(|w| coordinatewise(w)).count();
        let lex = all.iter().filter(|w| is_admissible(&phi, w).unwrap()).count();
        assert_eq!(lex, 5);
        assert_eq!(coord, 2);
        // phi^3 > 4 > 2
        let b = bound_check(&phi, 3, &BigUint::from(coord));
        assert_eq!(b.lower, Some(false));
        assert!(bound_check(&phi, 3, &BigUint::from(lex)).holds());
    }

    #[test]
    fn rational_base_uses_prefix_automaton() {
        let b = Beta::from_str("9/5").unwrap();
        let tm = count_admissible(&b, 12).unwrap();
        let bf = count_brute(&b, 12).unwrap();
        assert_eq!(tm.count, bf.count);
        assert!(bound_check(&b, 12, &tm.count).holds());
        assert_eq!(words(&b, 12).len() as u64, u64::try_from(&tm.count).unwrap());
    }

    #[test]
    fn pi_counts_agree() {
        let pi = Beta::pi();
        for n in 1..=6 {
            let tm = count_admissible(&pi, n).unwrap();
            assert_eq!(tm.count, count_brute(&pi, n).unwrap().count);
            assert!(bound_check(&pi, n, &tm.count).holds(), "n={n}");
        }
    }

    #[test]
    fn successor_and_max_word() {
        let phi = QuadraticField::golden();
        let lang = Language::new(&phi, 4).unwrap();
        assert_eq!(lang.successor(&[0, 1, 0, 1]).unwrap(), Some(vec![1, 0, 0, 0]));
        assert_eq!(lang.max_word(4).unwrap(), vec![1, 0, 1, 0]);
        assert_eq!(lang.successor(&[1, 0, 1, 0]).unwrap(), None);
        assert!(lang.successor(&[1, 1, 0, 0]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let two = RationalField::integer(2);
        assert!(matches!(
            enumerate_admissible(&two, 20, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
