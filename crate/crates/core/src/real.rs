//! Binary fixed-point reals with roughly 90 decimal digits after the point.
//!
//! Enough for every product and sum in the heuristic model to stay exact far
//! beyond `f64` while remaining plain integer arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits of the fixed-point representation.
pub const FRAC_BITS: u32 = 300;

/// A real number `mantissa / 2^FRAC_BITS`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HiReal {
    mantissa: BigInt,
}

impl HiReal {
    pub fn zero() -> Self {
        Self { mantissa: BigInt::zero() }
    }

    pub fn one() -> Self {
        Self { mantissa: BigInt::one() << FRAC_BITS }
    }

    pub fn from_int(n: i64) -> Self {
        Self { mantissa: BigInt::from(n) << FRAC_BITS }
    }

    /// `num / den`, rounded to nearest.
    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        assert!(!den.is_zero(), "HiReal::from_ratio with zero denominator");
        let scaled: BigInt = num << FRAC_BITS;
        Self { mantissa: round_div(&scaled, den) }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Self::from_ratio(q.numer(), q.denom())
    }

    pub fn from_f64(x: f64) -> Self {
        let q = BigRational::from_float(x).expect("finite float");
        Self::from_rational(&q)
    }

    /// `1 / n` for an integer `n`.
    pub fn recip_int(n: &BigInt) -> Self {
        Self::from_ratio(&BigInt::one(), n)
    }

    pub fn div_int(&self, n: &BigInt) -> Self {
        Self { mantissa: round_div(&self.mantissa, n) }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        Self { mantissa: &self.mantissa * n }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn abs(&self) -> Self {
        Self { mantissa: self.mantissa.abs() }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        // keep 64 significant bits before converting
        let bits = self.mantissa.bits() as i64;
        let shift = (bits - 64).max(0) as u32;
        let top = (&self.mantissa >> shift).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi(shift as i32 - FRAC_BITS as i32)
    }

    /// Decimal expansion with `digits` digits after the point (truncated).
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.mantissa.is_negative();
        let ten = num_traits::pow(BigInt::from(10), digits);
        let scaled: BigInt = (self.mantissa.abs() * ten) >> FRAC_BITS;
        let s = scaled.to_string();
        let s = format!("{:0>width$}", s, width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
    }
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = a.div_mod_floor(b);
    if (&r * &two).abs() >= b.abs() {
        q + if b.is_positive() { 1 } else { -1 }
    } else {
        q
    }
}

impl Add for &HiReal {
    type Output = HiReal;
    fn add(self, rhs: &HiReal) -> HiReal {
        HiReal { mantissa: &self.mantissa + &rhs.mantissa }
    }
}

impl Sub for &HiReal {
    type Output = HiReal;
    fn sub(self, rhs: &HiReal) -> HiReal {
        HiReal { mantissa: &self.mantissa - &rhs.mantissa }
    }
}

impl Mul for &HiReal {
    type Output = HiReal;
    fn mul(self, rhs: &HiReal) -> HiReal {
        let prod = &self.mantissa * &rhs.mantissa;
        let half = BigInt::one() << (FRAC_BITS - 1);
        HiReal { mantissa: (prod + half) >> FRAC_BITS }
    }
}

impl Neg for &HiReal {
    type Output = HiReal;
    fn neg(self) -> HiReal {
        HiReal { mantissa: -&self.mantissa }
    }
}

impl PartialOrd for HiReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HiReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mantissa.cmp(&other.mantissa)
    }
}

impl fmt::Display for HiReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{}", self.to_decimal(digits))
    }
}
