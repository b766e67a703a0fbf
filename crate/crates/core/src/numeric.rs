//! Exact rational arithmetic and dyadic source distributions.
//!
//! Every probability, cost and x-coordinate handled by the solvers is an
//! [`ExactScalar`]. Floating point appears only in reporting helpers
//! (`to_f64`, decimal rendering) and never feeds back into a decision.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExactScalar(BigRational);

impl ExactScalar {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self(BigRational::from_integer(v))
    }

    /// `num / den`, reduced. Errors when `den == 0`.
    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(BigRational::new(num.into(), den)))
    }

    /// `2^k` for any signed exponent.
    pub fn pow2(k: i64) -> Self {
        let p = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            Self(BigRational::from_integer(p))
        } else {
            Self(BigRational::new_raw(BigInt::one(), p))
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self(r)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(&self.0 / &rhs.0))
    }

    pub fn half(&self) -> Self {
        Self(&self.0 / BigInt::from(2))
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// If the denominator is `2^k`, returns `k`.
    pub fn dyadic_exponent(&self) -> Option<u64> {
        let d = self.denom().magnitude();
        if d.count_ones() == 1 {
            Some(d.bits() - 1)
        } else {
            None
        }
    }

    /// Lossy conversion for reports and plots.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering truncated to `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled: BigInt = (self.numer().abs() * &scale + self.denom() / 2) / self.denom();
        let (int, frac) = scaled.div_rem(&scale);
        let sign = if self.is_negative() && !scaled.is_zero() {
            "-"
        } else {
            ""
        };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    /// Accepts `a/b` or a bare integer `a`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidNumber(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Self::ratio(n, d)
            }
            None => Ok(Self::from_bigint(s.parse().map_err(|_| bad())?)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar(self.0.$m(rhs.0))
            }
        }
        impl $tr<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar(self.0.$m(&rhs.0))
            }
        }
        impl $tr<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar((&self.0).$m(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-self.0)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-&self.0)
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl From<i64> for ExactScalar {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

/// Parses a probability written either as a fraction with a power-of-two
/// denominator (`3/8`, `3/2^3`) or as a binary fraction (`0.011`).
/// The value must lie in `(0, 1]`.
pub fn parse_prob(text: &str) -> Result<ExactScalar> {
    let t = text.trim();
    let err = |reason| Error::InvalidProbability {
        text: t.to_string(),
        reason,
    };
    let value = if let Some((num, den)) = t.split_once('/') {
        let num: BigUint = num.trim().parse().map_err(|_| err("malformed numerator"))?;
        let den = den.trim();
        let den: BigUint = match den.strip_prefix("2^") {
            Some(k) => {
                let k: u32 = k.parse().map_err(|_| err("malformed exponent"))?;
                BigUint::one() << k
            }
            None => den.parse().map_err(|_| err("malformed denominator"))?,
        };
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        if den.count_ones() != 1 {
            return Err(err("denominator is not a power of two"));
        }
        ExactScalar::ratio(BigInt::from(num), BigInt::from(den))?
    } else if let Some((int, bits)) = t.split_once('.') {
        let mut v = match int {
            "0" | "" => ExactScalar::zero(),
            "1" => ExactScalar::one(),
            _ => return Err(err("integer part must be 0 or 1")),
        };
        if bits.is_empty() {
            return Err(err("missing binary digits"));
        }
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v = v + ExactScalar::pow2(-(i as i64) - 1),
                _ => return Err(err("binary fraction digits must be 0 or 1")),
            }
        }
        v
    } else if t == "1" {
        ExactScalar::one()
    } else {
        return Err(err("expected c/2^k or a binary fraction 0.bits"));
    };
    if !value.is_positive() {
        return Err(err("probability must be positive"));
    }
    if value > ExactScalar::one() {
        return Err(err("probability exceeds 1"));
    }
    Ok(value)
}

/// A source distribution sorted non-increasingly, with the bit-width `b`
/// of its finest probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDist {
    probs: Vec<ExactScalar>,
    bits: u32,
    /// `order[i]` is the input position of the i-th largest probability.
    order: Vec<usize>,
}

impl SourceDist {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[ExactScalar] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> &ExactScalar {
        &self.probs[i]
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sorted position of the symbol that appeared at `input` in the
    /// original sequence.
    pub fn sorted_index(&self, input: usize) -> Option<usize> {
        self.order.iter().position(|&o| o == input)
    }

    /// Probabilities as integer multiples of `2^-b`.
    pub fn units(&self) -> Vec<BigInt> {
        let scale = ExactScalar::pow2(self.bits as i64);
        self.probs
            .iter()
            .map(|p| (p * &scale).numer().clone())
            .collect()
    }

    /// Same as [`units`](Self::units) as machine integers, when `b < 64`.
    pub fn units_u64(&self) -> Option<Vec<u64>> {
        self.units().iter().map(|u| u.to_u64()).collect()
    }

    /// Probabilities in the input order they were supplied.
    pub fn input_order_probs(&self) -> Vec<ExactScalar> {
        let mut out = vec![ExactScalar::zero(); self.len()];
        for (i, &o) in self.order.iter().enumerate() {
            out[o] = self.probs[i].clone();
        }
        out
    }
}

/// Validates and sorts a probability vector.
pub fn make_dist(values: Vec<ExactScalar>) -> Result<SourceDist> {
    if values.len() < 2 {
        return Err(Error::InvalidDistribution(format!(
            "need at least 2 symbols, got {}",
            values.len()
        )));
    }
    let mut bits = 0u64;
    for (i, v) in values.iter().enumerate() {
        if !v.is_positive() {
            return Err(Error::InvalidDistribution(format!(
                "probability {i} = {v} is not positive"
            )));
        }
        match v.dyadic_exponent() {
            Some(k) => bits = bits.max(k),
            None => {
                return Err(Error::InvalidDistribution(format!(
                    "probability {i} = {v} has a non power-of-two denominator"
                )))
            }
        }
    }
    let total: ExactScalar = values.iter().sum();
    if total != ExactScalar::one() {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: equal probabilities keep input order
    order.sort_by(|&a, &b| values[b].cmp(&values[a]));
    let probs = order.iter().map(|&i| values[i].clone()).collect();
    Ok(SourceDist {
        probs,
        bits: bits as u32,
        order,
    })
}

/// Parses a distribution file: one probability per line, `#` comments.
pub fn parse_dist_text(text: &str) -> Result<SourceDist> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse_prob(line).map_err(|e| Error::Parse {
            line: lineno + 1,
            message: e.to_string(),
        })?;
        values.push(v);
    }
    make_dist(values)
}

/// Renders a distribution back into the file format, in input order.
pub fn format_dist(dist: &SourceDist) -> String {
    let mut s = String::new();
    for p in dist.input_order_probs() {
        s.push_str(&p.to_string());
        s.push('\n');
    }
    s
}

fn from_units(units: &[u64], bits: u32) -> SourceDist {
    let den = BigInt::one() << bits;
    let values = units
        .iter()
        .map(|&u| ExactScalar::ratio(BigInt::from(u), den.clone()).expect("nonzero"))
        .collect();
    make_dist(values).expect("units sum to 2^bits")
}

/// Every sorted distribution with `n` symbols whose probabilities are
/// positive multiples of `2^-bits`.
pub fn dyadic_grid(n: usize, bits: u32) -> Vec<SourceDist> {
    fn rec(left: u64, slots: usize, cap: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let hi = cap.min(left.saturating_sub(slots as u64 - 1));
        let lo = left.div_ceil(slots as u64).max(1);
        for c in (lo..=hi).rev() {
            cur.push(c);
            rec(left - c, slots - 1, c, cur, out);
            cur.pop();
        }
    }
    assert!(bits < 63, "grid bit-width too large");
    let total = 1u64 << bits;
    let mut raw = Vec::new();
    if n >= 2 {
        rec(total, n, total, &mut Vec::new(), &mut raw);
    }
    raw.iter().map(|u| from_units(u, bits)).collect()
}

/// A uniformly random composition of `2^bits` into `n` positive parts.
pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, n: usize, bits: u32) -> Result<SourceDist> {
    if n < 2 || bits >= 63 || (1u64 << bits) < n as u64 {
        return Err(Error::InvalidDistribution(format!(
            "cannot split 2^{bits} into {n} positive parts"
        )));
    }
    let total = 1u64 << bits;
    // choose n-1 distinct cut points in 1..total
    let mut cuts = std::collections::BTreeSet::new();
    while cuts.len() < n - 1 {
        cuts.insert(rng.gen_range(1..total));
    }
    let mut prev = 0;
    let mut units = Vec::with_capacity(n);
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        units.push(c - prev);
        prev = c;
    }
    Ok(from_units(&units, bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    #[test]
    fn parse_prob_forms() {
        assert_eq!(parse_prob("1/4").unwrap(), q("1/4"));
        assert_eq!(parse_prob("0.11").unwrap(), q("3/4"));
        assert_eq!(parse_prob("3/2^3").unwrap(), q("3/8"));
        assert_eq!(parse_prob("1").unwrap(), q("1"));
        assert_eq!(parse_prob("2/4").unwrap(), q("1/2"));
    }

    #[test]
    fn parse_prob_rejects() {
        assert!(parse_prob("3/10").is_err());
        assert!(parse_prob("0/4").is_err());
        assert!(parse_prob("5/4").is_err());
        assert!(parse_prob("0.12").is_err());
        assert!(parse_prob("abc").is_err());
        assert!(parse_prob("0.0").is_err());
        assert!(parse_prob("-1/2").is_err());
    }

    #[test]
    fn make_dist_sorts_and_measures_bits() {
        let d = make_dist(vec![q("1/4"), q("1/2"), q("1/4")]).unwrap();
        assert_eq!(d.probs(), &[q("1/2"), q("1/4"), q("1/4")]);
        assert_eq!(d.bits(), 2);
        assert_eq!(d.order(), &[1, 0, 2]);
        assert_eq!(d.sorted_index(0), Some(1));

        let d = make_dist(vec![q("3/4"), q("1/4")]).unwrap();
        assert_eq!(d.bits(), 2);
        assert_eq!(d.units_u64().unwrap(), vec![3, 1]);
    }

    #[test]
    fn make_dist_rejects() {
        assert!(make_dist(vec![q("1/2"), q("1/4")]).is_err());
        assert!(make_dist(vec![q("1")]).is_err());
        assert!(make_dist(vec![q("3/2"), q("-1/2")]).is_err());
        assert!(make_dist(vec![q("1/3"), q("2/3")]).is_err());
    }

    #[test]
    fn dist_file_with_comments() {
        let d = parse_dist_text("# header\n1/4\n\n0.1\n# x\n1/4\n").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.bits(), 2);
        let err = parse_dist_text("1/2\n3/10\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn grid_counts() {
        // partitions of 8 into 3 positive parts: 6+1+1, 5+2+1, 4+3+1, 4+2+2, 3+3+2
        assert_eq!(dyadic_grid(3, 3).len(), 5);
        assert_eq!(dyadic_grid(2, 1).len(), 1);
        for d in dyadic_grid(4, 4) {
            assert!(d.probs().windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(d.probs().iter().sum::<ExactScalar>(), ExactScalar::one());
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(q("3/2").to_decimal(3), "1.500");
        assert_eq!(q("-1/3").to_decimal(4), "-0.3333");
        assert_eq!(q("2/3").to_decimal(2), "0.67");
        assert_eq!(q("1/1").to_string(), "1/1");
    }

    #[test]
    fn division_by_zero_is_error() {
        assert!(q("1/2").checked_div(&ExactScalar::zero()).is_err());
        assert!(ExactScalar::ratio(1, 0).is_err());
    }

    fn small_rational() -> impl Strategy<Value = ExactScalar> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| ExactScalar::ratio(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn field_laws(a in small_rational(), b in small_rational(), c in small_rational()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            prop_assert_eq!(&a - &a, ExactScalar::zero());
        }

        #[test]
        fn comparison_matches_cross_multiplication(
            an in -1000i64..1000, ad in 1i64..1000, bn in -1000i64..1000, bd in 1i64..1000
        ) {
            let a = ExactScalar::ratio(an, ad).unwrap();
            let b = ExactScalar::ratio(bn, bd).unwrap();
            prop_assert_eq!(a.cmp(&b), (an * bd).cmp(&(bn * ad)));
        }

        #[test]
        fn canonical_form_roundtrips(c in 1u64..=256, k in 0u32..9) {
            prop_assume!(c <= 1u64 << k);
            let v = ExactScalar::ratio(c, 1u64 << k).unwrap();
            prop_assert_eq!(parse_prob(&v.to_string()).unwrap(), v);
        }

        #[test]
        fn lowest_terms(n in -500i64..500, d in 1i64..500) {
            let v = ExactScalar::ratio(n, d).unwrap();
            prop_assert!(v.denom().is_positive());
            prop_assert!(v.numer().gcd(v.denom()).is_one());
        }
    }
}
