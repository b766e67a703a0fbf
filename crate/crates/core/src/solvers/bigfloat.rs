//! Binary floating point with a configurable mantissa, rounding to nearest
//! after every operation. Values are `mant * 2^exp`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use crate::numeric::ExactScalar;

#[derive(Clone, PartialEq, Eq)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

fn shr_round(m: &BigInt, shift: u64) -> BigInt {
    if shift == 0 {
        return m.clone();
    }
    let mag = m.magnitude();
    let half = num_bigint::BigUint::one() << (shift - 1);
    let r = (mag + half) >> shift;
    BigInt::from_biguint(if m.is_negative() { Sign::Minus } else { Sign::Plus }, r)
}

impl BigFloat {
    pub fn zero() -> Self {
        Self {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    fn rounded(mant: BigInt, exp: i64, prec: u32) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let bits = mant.bits();
        if bits > u64::from(prec) {
            let shift = bits - u64::from(prec);
            Self {
                mant: shr_round(&mant, shift),
                exp: exp + shift as i64,
            }
        } else {
            Self { mant, exp }
        }
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Self::rounded(BigInt::from(v), 0, prec)
    }

    pub fn from_exact(v: &ExactScalar, prec: u32) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        let num = v.numer();
        let den = v.denom();
        // enough quotient bits to round correctly
        let shift = i64::from(prec) + 2 + den.bits() as i64 - num.bits() as i64;
        let shift = shift.max(0);
        let q = (num << shift as usize) / den;
        Self::rounded(q, -shift, prec)
    }

    /// Exact dyadic value.
    pub fn to_exact(&self) -> ExactScalar {
        ExactScalar::from_bigint(self.mant.clone()) * ExactScalar::pow2(self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = bits.min(60);
        let top = shr_round(&self.mant, (bits - keep) as u64);
        let top: f64 = top.to_string().parse().unwrap_or(0.0);
        top * 2f64.powi((self.exp + bits - keep) as i32)
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn neg(&self) -> Self {
        Self {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn add(&self, rhs: &Self, prec: u32) -> Self {
        if self.mant.is_zero() {
            return rhs.clone();
        }
        if rhs.mant.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(rhs.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &rhs.mant << (rhs.exp - e) as usize;
        Self::rounded(a + b, e, prec)
    }

    pub fn sub(&self, rhs: &Self, prec: u32) -> Self {
        self.add(&rhs.neg(), prec)
    }

    pub fn mul(&self, rhs: &Self, prec: u32) -> Self {
        Self::rounded(&self.mant * &rhs.mant, self.exp + rhs.exp, prec)
    }

    /// Panics on division by zero.
    pub fn div(&self, rhs: &Self, prec: u32) -> Self {
        assert!(!rhs.mant.is_zero(), "BigFloat division by zero");
        if self.mant.is_zero() {
            return Self::zero();
        }
        let shift = u64::from(prec) + 2 + rhs.mant.bits();
        let q = (&self.mant << shift as usize) / &rhs.mant;
        Self::rounded(q, self.exp - rhs.exp - shift as i64, prec)
    }

    /// Square root of a non-negative value; `None` for negative input.
    pub fn sqrt(&self, prec: u32) -> Option<Self> {
        if self.mant.is_negative() {
            return None;
        }
        if self.mant.is_zero() {
            return Some(Self::zero());
        }
        let mut shift = 2 * i64::from(prec) + 4 - self.mant.bits() as i64;
        shift = shift.max(0);
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let m = (&self.mant << shift as usize).sqrt();
        Some(Self::rounded(m, (self.exp - shift) / 2, prec))
    }

    /// Multiplies by `2^k` exactly.
    pub fn scale2(&self, k: i64) -> Self {
        Self {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    #[test]
    fn dyadic_values_are_exact() {
        for s in ["0", "1", "-3/8", "5/1024", "12345"] {
            assert_eq!(BigFloat::from_exact(&q(s), 64).to_exact(), q(s));
        }
    }

    #[test]
    fn rounding_error_is_bounded() {
        let p = 80;
        let third = BigFloat::from_exact(&q("1/3"), p);
        let err = (third.to_exact() - q("1/3")).abs();
        assert!(err <= ExactScalar::pow2(-(p as i64)));
        let two = BigFloat::from_int(2, p);
        let r = two.sqrt(p).unwrap();
        let sq = r.to_exact() * r.to_exact();
        assert!((sq - q("2")).abs() <= ExactScalar::pow2(-(p as i64) + 3));
        let x = third.mul(&BigFloat::from_int(3, p), p);
        assert!((x.to_exact() - q("1")).abs() <= ExactScalar::pow2(-(p as i64) + 1));
        let d = BigFloat::from_int(1, p).div(&BigFloat::from_int(3, p), p);
        assert!((d.to_exact() - q("1/3")).abs() <= ExactScalar::pow2(-(p as i64)));
    }

    #[test]
    fn arithmetic_and_order() {
        let p = 64;
        let a = BigFloat::from_exact(&q("3/4"), p);
        let b = BigFloat::from_exact(&q("-1/8"), p);
        assert_eq!(a.add(&b, p).to_exact(), q("5/8"));
        assert_eq!(a.sub(&b, p).to_exact(), q("7/8"));
        assert_eq!(a.mul(&b, p).to_exact(), q("-3/32"));
        assert_eq!(a.div(&b, p).to_exact(), q("-6"));
        assert!(b < a && b.neg() < a);
        assert!(b.sqrt(p).is_none());
        assert_eq!(a.scale2(2).to_exact(), q("3"));
        assert!((a.to_f64() - 0.75).abs() < 1e-15);
    }
}
