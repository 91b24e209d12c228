//! Exact arithmetic in the cyclotomic field `Q(zeta_m) = Q[x]/(Phi_m)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::euler_phi;
use crate::error::Result;
use crate::padic::UnramifiedField;

/// The `m`-th cyclotomic polynomial, constant term first.
///
/// Computed as `(x^m - 1) / prod_{d | m, d < m} Phi_d` and memoised.
pub fn cyclotomic_polynomial(m: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    assert!(m >= 1);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&m) {
        return hit.clone();
    }
    let mut num: Vec<BigInt> = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    for d in (1..m).filter(|d| m % d == 0) {
        num = exact_div_monic(&num, &cyclotomic_polynomial(d));
    }
    let out = Arc::new(num);
    cache.lock().unwrap().insert(m, out.clone());
    out
}

fn exact_div_monic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &c * bj;
        }
        q[k] = c;
    }
    debug_assert!(r.iter().all(|c| c.is_zero()), "inexact cyclotomic division");
    q
}

/// An element of `Q(zeta_m)` in the power basis `1, x, ..., x^(phi(m)-1)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycRational {
    m: u64,
    coeffs: Vec<BigRational>,
}

impl CycRational {
    pub fn zero(m: u64) -> Self {
        Self { m, coeffs: vec![BigRational::zero(); euler_phi(m) as usize] }
    }

    pub fn from_rational(m: u64, c: BigRational) -> Self {
        let mut out = Self::zero(m);
        out.coeffs[0] = c;
        out
    }

    pub fn one(m: u64) -> Self {
        Self::from_rational(m, BigRational::one())
    }

    /// Builds an element from coefficients of arbitrary length, reducing modulo `Phi_m`.
    pub fn from_poly(m: u64, mut poly: Vec<BigRational>) -> Self {
        let phi = cyclotomic_polynomial(m);
        let deg = phi.len() - 1;
        for k in (deg..poly.len()).rev() {
            let c = std::mem::replace(&mut poly[k], BigRational::zero());
            if c.is_zero() {
                continue;
            }
            for (j, pj) in phi.iter().enumerate().take(deg) {
                if !pj.is_zero() {
                    poly[k - deg + j] -= &c * BigRational::from_integer(pj.clone());
                }
            }
        }
        poly.resize(deg, BigRational::zero());
        Self { m, coeffs: poly }
    }

    /// Coefficients with respect to `1, x, ..., x^(phi(m)-1)`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Returns the rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.m, other.m, "mixing elements of different cyclotomic fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self { m: self.m, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Self { m: self.m, coeffs }
    }

    pub fn neg(&self) -> Self {
        Self { m: self.m, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { m: self.m, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let n = self.coeffs.len();
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Self::from_poly(self.m, prod)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.m);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for CycRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let body = match (k, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => "z".to_string(),
                (1, false) => format!("{mag}*z"),
                (_, true) => format!("z^{k}"),
                (_, false) => format!("{mag}*z^{k}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `zeta_m^k` written in the power basis.
pub fn root_of_unity_power(m: u64, k: i64) -> CycRational {
    let e = k.rem_euclid(m as i64) as usize;
    let mut poly = vec![BigRational::zero(); e + 1];
    poly[e] = BigRational::one();
    CycRational::from_poly(m, poly)
}

/// Valuation of `x` at the prime of `Q(zeta_m)` fixed by `field`; `None` stands for `+inf`.
pub fn valuation_at_residue(x: &CycRational, field: &UnramifiedField) -> Result<Option<i64>> {
    if x.is_zero() {
        return Ok(None);
    }
    let mut k = field.precision().max(8);
    loop {
        let f = field.with_precision(k)?;
        let img = f.embed_cyclotomic(x)?;
        if !img.is_zero() {
            return Ok(Some(img.valuation()));
        }
        k *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn known_cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(*cyclotomic_polynomial(4), ints(&[1, 0, 1]));
        assert_eq!(*cyclotomic_polynomial(12), ints(&[1, 0, -1, 0, 1]));
        assert_eq!(*cyclotomic_polynomial(15), ints(&[1, -1, 0, 1, -1, 1, 0, -1, 1]));
        for m in 1..60u64 {
            assert_eq!(cyclotomic_polynomial(m).len() as u64 - 1, euler_phi(m));
        }
    }

    #[test]
    fn zeta_cubed_square() {
        let z2 = root_of_unity_power(3, 2);
        assert_eq!(z2.coeffs(), &[q(-1, 1), q(-1, 1)]);
        assert_eq!(root_of_unity_power(3, 3), CycRational::one(3));
        assert_eq!(root_of_unity_power(4, 2), CycRational::from_rational(4, q(-1, 1)));
    }

    #[test]
    fn powers_have_the_right_order() {
        for m in [5u64, 7, 8, 9, 12] {
            let z = root_of_unity_power(m, 1);
            assert_eq!(z.pow(m), CycRational::one(m));
            for d in (1..m).filter(|d| m % d == 0) {
                assert_ne!(z.pow(d), CycRational::one(m));
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(root_of_unity_power(3, 2).to_string(), "-1-z");
        assert_eq!(CycRational::zero(5).to_string(), "0");
    }
}
