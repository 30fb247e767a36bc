//! Laurent polynomials in q, bigraded series, quantum integers and binomials,
//! and graded ranks of flag manifolds.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("block sizes {blocks:?} exceed N = {n}")]
    BlocksTooLarge { blocks: Vec<usize>, n: usize },
    #[error("cannot parse Laurent polynomial: {0}")]
    Parse(String),
}

/// Finite sum of integer multiples of q^k. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct LaurentPoly(BTreeMap<i64, i64>);

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly(BTreeMap::new())
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// c·q^e.
    pub fn monomial(c: i64, e: i64) -> Self {
        let mut m = BTreeMap::new();
        if c != 0 {
            m.insert(e, c);
        }
        LaurentPoly(m)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: i64, c: i64) {
        if c == 0 {
            return;
        }
        let v = self.0.entry(e).or_insert(0);
        *v = v.checked_add(c).expect("Laurent coefficient overflow");
        if *v == 0 {
            self.0.remove(&e);
        }
    }

    pub fn coeff(&self, e: i64) -> i64 {
        self.0.get(&e).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.0.iter().map(|(&e, &c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.0.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.0.keys().next_back().copied()
    }

    /// Multiplication by q^k.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly(self.0.iter().map(|(&e, &c)| (e + k, c)).collect())
    }

    /// q ↦ q⁻¹.
    pub fn mirror(&self) -> Self {
        LaurentPoly(self.0.iter().map(|(&e, &c)| (-e, c)).collect())
    }

    /// q ↦ q^k for k > 0.
    pub fn stretch(&self, k: i64) -> Self {
        LaurentPoly(self.0.iter().map(|(&e, &c)| (e * k, c)).collect())
    }

    pub fn eval_at_one(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn is_palindromic(&self) -> bool {
        match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => self.shift(-(lo + hi)).mirror() == *self,
            _ => true,
        }
    }

    /// Coefficients of degree ≤ d only.
    pub fn truncate(&self, d: i64) -> Self {
        LaurentPoly(self.0.range(..=d).map(|(&e, &c)| (e, c)).collect())
    }

    /// Shifts so that the polynomial is symmetric about degree 0 (if palindromic).
    pub fn centered(&self) -> Self {
        match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => self.shift(-(lo + hi) / 2),
            _ => self.clone(),
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly(self.0.iter().map(|(&e, &c)| (e, -c)).collect())
    }
}

// Exponents add under multiplication.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1.checked_mul(c2).expect("Laurent coefficient overflow"));
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, &c)) in self.0.iter().enumerate() {
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match (e, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "q")?,
                (1, _) => write!(f, "{a}q")?,
                (_, 1) => write!(f, "q^{e}")?,
                _ => write!(f, "{a}q^{e}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = LaurentError;

    /// Accepts the `Display` form: terms `c`, `cq`, `cq^e` joined by ` + ` / ` - `.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LaurentError::Parse(s.to_string());
        let t = s.trim();
        if t == "0" {
            return Ok(Self::zero());
        }
        let mut out = Self::zero();
        let mut sign = 1;
        let mut rest = t;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r;
        }
        loop {
            // A term ends at the next separating " + " or " - ".
            let cut = [rest.find(" + "), rest.find(" - ")].into_iter().flatten().min();
            let (term, tail) = match cut {
                Some(i) => (&rest[..i], &rest[i..]),
                None => (rest, ""),
            };
            let term = term.trim();
            let (coef, exp) = match term.find('q') {
                None => (term.parse::<i64>().map_err(|_| err())?, 0),
                Some(i) => {
                    let c = if i == 0 {
                        1
                    } else {
                        term[..i].parse::<i64>().map_err(|_| err())?
                    };
                    let e = match term[i + 1..].strip_prefix('^') {
                        Some(x) => x.parse::<i64>().map_err(|_| err())?,
                        None if term.len() == i + 1 => 1,
                        None => return Err(err()),
                    };
                    (c, e)
                }
            };
            out.add_term(exp, sign * coef);
            if tail.is_empty() {
                break;
            }
            sign = if tail.starts_with(" +") { 1 } else { -1 };
            rest = &tail[3..];
        }
        Ok(out)
    }
}

impl From<LaurentPoly> for String {
    fn from(p: LaurentPoly) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for LaurentPoly {
    type Error = LaurentError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A finitely supported function (h,q) ↦ integer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigradedSeries(BTreeMap<(i64, i64), i64>);

impl BigradedSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, h: i64, q: i64, c: i64) {
        if c == 0 {
            return;
        }
        let v = self.0.entry((h, q)).or_insert(0);
        *v += c;
        if *v == 0 {
            self.0.remove(&(h, q));
        }
    }

    pub fn get(&self, h: i64, q: i64) -> i64 {
        self.0.get(&(h, q)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), i64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    /// Σ (−1)^h c(h,q) q^q.
    pub fn euler_characteristic(&self) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for ((h, q), c) in self.iter() {
            p.add_term(q, if h.rem_euclid(2) == 0 { c } else { -c });
        }
        p
    }

    /// Σ c(h,q) t^h q^q evaluated at t = 1.
    pub fn collapse_h(&self) -> LaurentPoly {
        LaurentPoly::from_terms(self.iter().map(|((_, q), c)| (q, c)))
    }
}

impl FromIterator<((i64, i64), i64)> for BigradedSeries {
    fn from_iter<I: IntoIterator<Item = ((i64, i64), i64)>>(iter: I) -> Self {
        let mut s = Self::new();
        for ((h, q), c) in iter {
            s.add(h, q, c);
        }
        s
    }
}

/// [m] = (q^m − q^{−m})/(q − q^{−1}) = q^{m−1} + q^{m−3} + … + q^{1−m}.
pub fn quantum_integer(m: i64) -> LaurentPoly {
    let sign = m.signum();
    let n = m.abs();
    LaurentPoly::from_terms((0..n).map(|i| (n - 1 - 2 * i, sign)))
}

/// [m]! = [1][2]…[m].
pub fn quantum_factorial(m: u32) -> LaurentPoly {
    (1..=m as i64).fold(LaurentPoly::one(), |acc, i| &acc * &quantum_integer(i))
}

/// Gaussian binomial in t = q² with constant term 1 (bottom-normalized).
fn gaussian_binomial_t(n: usize, k: usize) -> LaurentPoly {
    if k > n {
        return LaurentPoly::zero();
    }
    // Pascal recursion [n,k] = [n−1,k−1] + t^k [n−1,k].
    let mut row = vec![LaurentPoly::one()];
    for m in 1..=n {
        let mut next = vec![LaurentPoly::zero(); m + 1];
        for j in 0..=m {
            let mut v = LaurentPoly::zero();
            if j >= 1 {
                v = &v + &row[j - 1];
            }
            if j < m {
                v = &v + &row[j].shift(2 * j as i64);
            }
            next[j] = v;
        }
        row = next;
    }
    row[k].clone()
}

/// Symmetric quantum binomial; zero unless 0 ≤ k ≤ n.
pub fn quantum_binomial(n: i64, k: i64) -> LaurentPoly {
    if n < 0 || k < 0 || k > n {
        return LaurentPoly::zero();
    }
    gaussian_binomial_t(n as usize, k as usize).shift(-k * (n - k))
}

/// Poincaré polynomial of the flag manifold 𝐅(blocks; N) in cohomological degree,
/// with the residual N − Σ blocks appended as a final block.
pub fn poincare_flag(blocks: &[usize], n: usize) -> Result<LaurentPoly, LaurentError> {
    let used: usize = blocks.iter().sum();
    if used > n {
        return Err(LaurentError::BlocksTooLarge {
            blocks: blocks.to_vec(),
            n,
        });
    }
    // Multinomial as a product of binomials [n₁+…+n_i choose n_i].
    let mut acc = LaurentPoly::one();
    let mut running = 0;
    for &b in blocks.iter().chain(std::iter::once(&(n - used))) {
        running += b;
        acc = &acc * &gaussian_binomial_t(running, b);
    }
    Ok(acc)
}

/// Real dimension N² − Σ nᵢ² of the flag manifold with the given blocks.
pub fn flag_dimension(blocks: &[usize], n: usize) -> usize {
    let used: usize = blocks.iter().sum();
    let rest = n.saturating_sub(used);
    n * n - blocks.iter().map(|b| b * b).sum::<usize>() - rest * rest
}

/// MOY polynomial of the closed web obtained by closing a flag web with edge
/// labels `blocks` (summing to at most N): the centered flag Poincaré polynomial.
pub fn moy_flag_web(blocks: &[usize], n: usize) -> Result<LaurentPoly, LaurentError> {
    let p = poincare_flag(blocks, n)?;
    Ok(p.shift(-(flag_dimension(blocks, n) as i64) / 2))
}

/// MOY polynomial of a circle labelled a: [N choose a].
pub fn moy_circle(n: usize, a: usize) -> LaurentPoly {
    quantum_binomial(n as i64, a as i64)
}
