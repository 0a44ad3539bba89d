//! Exact log-Laurent polynomials: finite sums `c * s^j * (ln s)^p` with
//! rational `c`, integer `j` and non-negative integer `p`.
//!
//! This ring is closed under the integrations performed by the radial
//! recurrence, so every interior series coefficient lives here and can be
//! compared against reference closed forms by exact equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent of `s` and power of `ln s` for one monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub exp: i32,
    pub log_pow: u32,
}

impl Monomial {
    pub const fn new(exp: i32, log_pow: u32) -> Self {
        Self { exp, log_pow }
    }
}

/// Shorthand for building exact rational coefficients in code and tests.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LogLaurentPoly {
    // invariant: no zero coefficients are stored
    terms: BTreeMap<Monomial, BigRational>,
}

impl LogLaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: BigRational, exp: i32, log_pow: u32) -> Self {
        let mut out = Self::zero();
        out.add_term(Monomial::new(exp, log_pow), c);
        out
    }

    /// `s^exp` with unit coefficient.
    pub fn power(exp: i32) -> Self {
        Self::monomial(BigRational::one(), exp, 0)
    }

    /// `ln s`.
    pub fn log() -> Self {
        Self::monomial(BigRational::one(), 0, 1)
    }

    /// Builds a polynomial from `(coefficient, exp, log_pow)` triples,
    /// merging repeated monomials.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BigRational, i32, u32)>,
    {
        let mut out = Self::zero();
        for (c, exp, log_pow) in terms {
            out.add_term(Monomial::new(exp, log_pow), c);
        }
        out
    }

    fn add_term(&mut self, key: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical `(exp, log_pow)` order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &BigRational)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, exp: i32, log_pow: u32) -> BigRational {
        self.terms
            .get(&Monomial::new(exp, log_pow))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.exp).min()
    }

    pub fn max_log_pow(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.log_pow).max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// Multiplies by `s^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (Monomial::new(k.exp + shift, k.log_pow), v.clone()))
                .collect(),
        }
    }

    /// Rational part at `s = 1`: every `(ln s)^p` term with `p >= 1` vanishes there.
    pub fn value_at_one(&self) -> BigRational {
        self.terms
            .iter()
            .filter(|(k, _)| k.log_pow == 0)
            .fold(BigRational::zero(), |acc, (_, c)| acc + c)
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if k.exp != 0 {
                out.add_term(
                    Monomial::new(k.exp - 1, k.log_pow),
                    c * BigRational::from_integer(BigInt::from(k.exp)),
                );
            }
            if k.log_pow > 0 {
                out.add_term(
                    Monomial::new(k.exp - 1, k.log_pow - 1),
                    c * BigRational::from_integer(BigInt::from(k.log_pow)),
                );
            }
        }
        out
    }

    /// Antiderivative with zero integration constant.
    pub fn antiderivative(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            integrate_monomial(*k, c.clone(), &mut out);
        }
        out
    }

    /// Antiderivative shifted by the rational constant that makes it vanish at `s = 1`.
    pub fn antiderivative_vanishing_at_1(&self) -> Self {
        let mut out = self.antiderivative();
        let at_one = out.value_at_one();
        out.add_term(Monomial::new(0, 0), -at_one);
        out
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveRadius(s));
        }
        Ok(self.eval_unchecked(s))
    }

    /// Evaluation without the domain check; callers guarantee `s > 0`.
    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        let ln_s = s.ln();
        self.terms
            .iter()
            .map(|(k, c)| rational_to_f64(c) * s.powi(k.exp) * ln_s.powi(k.log_pow as i32))
            .sum()
    }

    /// If `self == factor * other` for a single rational factor, returns it.
    pub fn proportionality_factor(&self, other: &Self) -> Option<BigRational> {
        if self.is_zero() || other.is_zero() {
            return None;
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut factor: Option<BigRational> = None;
        for ((ka, ca), (kb, cb)) in self.terms.iter().zip(other.terms.iter()) {
            if ka != kb {
                return None;
            }
            let ratio = ca / cb;
            match &factor {
                None => factor = Some(ratio),
                Some(f) if *f == ratio => {}
                Some(_) => return None,
            }
        }
        factor
    }
}

fn integrate_monomial(key: Monomial, c: BigRational, out: &mut LogLaurentPoly) {
    if key.exp == -1 {
        // ∫ s^-1 (ln s)^p ds = (ln s)^(p+1) / (p+1)
        let denom = BigRational::from_integer(BigInt::from(key.log_pow + 1));
        out.add_term(Monomial::new(0, key.log_pow + 1), c / denom);
        return;
    }
    // ∫ s^j L^p = s^(j+1) L^p/(j+1) - p/(j+1) ∫ s^j L^(p-1)
    let j1 = BigRational::from_integer(BigInt::from(key.exp + 1));
    let mut coeff = c / &j1;
    let mut p = key.log_pow;
    loop {
        out.add_term(Monomial::new(key.exp + 1, p), coeff.clone());
        if p == 0 {
            break;
        }
        coeff = -coeff * BigRational::from_integer(BigInt::from(p)) / &j1;
        p -= 1;
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range; fall back to log-scaled division
        let n = c.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = c.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Add for &LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn add(self, rhs: &LogLaurentPoly) -> LogLaurentPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Add for LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn add(self, rhs: LogLaurentPoly) -> LogLaurentPoly {
        &self + &rhs
    }
}

impl Neg for &LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn neg(self) -> LogLaurentPoly {
        LogLaurentPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Neg for LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn neg(self) -> LogLaurentPoly {
        -&self
    }
}

impl Sub for &LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn sub(self, rhs: &LogLaurentPoly) -> LogLaurentPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c);
        }
        out
    }
}

impl Sub for LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn sub(self, rhs: LogLaurentPoly) -> LogLaurentPoly {
        &self - &rhs
    }
}

impl Mul for &LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn mul(self, rhs: &LogLaurentPoly) -> LogLaurentPoly {
        let mut out = LogLaurentPoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(
                    Monomial::new(ka.exp + kb.exp, ka.log_pow + kb.log_pow),
                    ca * cb,
                );
            }
        }
        out
    }
}

impl Mul for LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn mul(self, rhs: LogLaurentPoly) -> LogLaurentPoly {
        &self * &rhs
    }
}

/// Text form `c1*s^j1*L^p1 + c2*s^j2*L^p2 + ...` with `c` written as
/// `num/den`; `L` stands for `ln s`. The zero polynomial is `0`.
impl fmt::Display for LogLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}/{}*s^{}*L^{}", c.numer(), c.denom(), k.exp, k.log_pow)?;
        }
        Ok(())
    }
}

impl FromStr for LogLaurentPoly {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "0" {
            return Ok(Self::zero());
        }
        let bad = |why: &str| Error::Parse(format!("log-Laurent term {why}: {text:?}"));
        let mut out = Self::zero();
        for raw in text.split(" + ") {
            let mut parts = raw.trim().split('*');
            let (coeff, s_part, l_part) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(c), Some(sp), Some(lp), None) => (c, sp, lp),
                _ => return Err(bad("must have the form c*s^j*L^p")),
            };
            let (num, den) = coeff.split_once('/').ok_or_else(|| bad("coefficient needs num/den"))?;
            let num: BigInt = num.parse().map_err(|_| bad("numerator"))?;
            let den: BigInt = den.parse().map_err(|_| bad("denominator"))?;
            if den.is_zero() || den.is_negative() {
                return Err(bad("denominator must be positive"));
            }
            let exp: i32 = s_part
                .strip_prefix("s^")
                .ok_or_else(|| bad("missing s^"))?
                .parse()
                .map_err(|_| bad("exponent"))?;
            let log_pow: u32 = l_part
                .strip_prefix("L^")
                .ok_or_else(|| bad("missing L^"))?
                .parse()
                .map_err(|_| bad("log power"))?;
            out.add_term(Monomial::new(exp, log_pow), BigRational::new(num, den));
        }
        Ok(out)
    }
}
