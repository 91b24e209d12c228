//! p-adic numbers with tracked precision and the unramified extensions `Q_p(zeta_m)`.
//!
//! A nonzero value is stored as `p^val * unit` with the unit known modulo
//! `p^prec` (relative precision). A value indistinguishable from zero is
//! stored with `prec = 0`, and `val` then records the absolute precision, so
//! "zero" always means `O(p^val)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{gcd, multiplicative_order};
use crate::cyclotomic::{cyclotomic_polynomial, CycRational};
use crate::error::{domain, Error, Result};
use crate::finite_field::{self as ff, ExtField, Poly};

/// `p^k` as a big integer, memoised for small exponents.
pub fn pow_big(p: u64, k: u32) -> BigInt {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), BigInt>>> = OnceLock::new();
    if k > 256 {
        return num_traits::pow(BigInt::from(p), k as usize);
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(p, k)) {
        return v.clone();
    }
    let v = num_traits::pow(BigInt::from(p), k as usize);
    cache.lock().unwrap().insert((p, k), v.clone());
    v
}

/// Splits `n != 0` as `p^v * rest` with `p` not dividing `rest`.
pub fn split_valuation(n: &BigInt, p: u64) -> (u32, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

fn inv_mod_big(a: &BigInt, m: &BigInt) -> BigInt {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "inverse of a non-unit");
    e.x.mod_floor(m)
}

/// Element of `Q_p` with tracked relative precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicScalar {
    p: u64,
    val: i64,
    unit: BigInt,
    prec: u32,
}

impl PadicScalar {
    /// The value `O(p^abs_prec)`.
    pub fn zero(p: u64, abs_prec: i64) -> Self {
        Self { p, val: abs_prec, unit: BigInt::zero(), prec: 0 }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_i64(p, 1, prec)
    }

    /// `p^val * x` where `x` is known modulo `p^k`; strips any further powers of `p`.
    fn normalize(p: u64, val: i64, x: BigInt, k: u32) -> Self {
        let x = x.mod_floor(&pow_big(p, k));
        if x.is_zero() {
            return Self::zero(p, val + k as i64);
        }
        let (t, rest) = split_valuation(&x, p);
        Self { p, val: val + t as i64, unit: rest, prec: k - t }
    }

    /// An exact integer, kept to `prec` significant digits.
    pub fn from_bigint(p: u64, n: &BigInt, prec: u32) -> Self {
        if n.is_zero() {
            return Self::zero(p, prec as i64);
        }
        let (v, rest) = split_valuation(n, p);
        Self { p, val: v as i64, unit: rest.mod_floor(&pow_big(p, prec)), prec }
    }

    pub fn from_i64(p: u64, n: i64, prec: u32) -> Self {
        Self::from_bigint(p, &BigInt::from(n), prec)
    }

    pub fn from_rational(p: u64, q: &BigRational, prec: u32) -> Self {
        if q.is_zero() {
            return Self::zero(p, prec as i64);
        }
        let (a, num) = split_valuation(q.numer(), p);
        let (b, den) = split_valuation(q.denom(), p);
        let pk = pow_big(p, prec);
        let unit = (num * inv_mod_big(&den, &pk)).mod_floor(&pk);
        Self { p, val: a as i64 - b as i64, unit, prec }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.prec == 0
    }

    /// The valuation; for a value that is zero to the working precision this is
    /// the absolute precision, a lower bound for the true valuation.
    pub fn valuation(&self) -> i64 {
        self.val
    }

    /// Relative precision (number of known digits of the unit part).
    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn abs_precision(&self) -> i64 {
        self.val + self.prec as i64
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    /// Drops digits so that the relative precision is at most `prec`.
    pub fn truncate(&self, prec: u32) -> Self {
        if self.is_zero() || prec >= self.prec {
            return self.clone();
        }
        if prec == 0 {
            return Self::zero(self.p, self.val);
        }
        Self { p: self.p, val: self.val, unit: self.unit.mod_floor(&pow_big(self.p, prec)), prec }
    }

    /// Residue modulo `p^k` of an integral value known to absolute precision at least `k`.
    pub fn residue(&self, k: u32) -> Result<BigInt> {
        if self.val < 0 {
            return Err(Error::NonIntegral(format!("{self}")));
        }
        if self.abs_precision() < k as i64 {
            return Err(Error::PrecisionExhausted(format!("need {k} digits of {self}")));
        }
        if self.is_zero() || self.val >= k as i64 {
            return Ok(BigInt::zero());
        }
        Ok((&self.unit * pow_big(self.p, self.val as u32)).mod_floor(&pow_big(self.p, k)))
    }

    fn same_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing different primes");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_prime(other);
        let abs = self.abs_precision().min(other.abs_precision());
        let v = self.val.min(other.val);
        if v >= abs {
            return Self::zero(self.p, abs);
        }
        let k = (abs - v) as u32;
        let mut x = BigInt::zero();
        for t in [self, other] {
            let shift = t.val - v;
            if !t.is_zero() && shift < k as i64 {
                x += &t.unit * pow_big(self.p, shift as u32);
            }
        }
        Self::normalize(self.p, v, x, k)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let unit = (-&self.unit).mod_floor(&pow_big(self.p, self.prec));
        Self { unit, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_prime(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p, self.val + other.val);
        }
        let prec = self.prec.min(other.prec);
        let unit = (&self.unit * &other.unit).mod_floor(&pow_big(self.p, prec));
        Self { p: self.p, val: self.val + other.val, unit, prec }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return domain("inverse of a p-adic zero");
        }
        let unit = inv_mod_big(&self.unit, &pow_big(self.p, self.prec));
        Ok(Self { p: self.p, val: -self.val, unit, prec: self.prec })
    }

    /// Division; dividing by a non-unit lowers the valuation rather than failing.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p, self.prec.max(1));
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

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "O({}^{})", self.p, self.val)
        } else {
            write!(f, "{}^{} * {} + O({}^{})", self.p, self.val, self.unit, self.p, self.abs_precision())
        }
    }
}

/// Teichmüller representative `omega(a) = lim a^(p^k)` modulo `p^k`.
pub fn teichmuller(a: &BigInt, p: u64, k: u32) -> Result<PadicScalar> {
    if (a % BigInt::from(p)).is_zero() {
        return domain(format!("teichmuller: {p} divides {a}"));
    }
    let pk = pow_big(p, k);
    let pb = BigInt::from(p);
    let mut x = a.mod_floor(&pk);
    for _ in 0..k {
        x = x.modpow(&pb, &pk);
    }
    Ok(PadicScalar { p, val: 0, unit: x, prec: k })
}

/// Principal unit `<a> = a / omega(a)`, congruent to 1 modulo `p`.
pub fn principal_unit(a: &BigInt, p: u64, k: u32) -> Result<PadicScalar> {
    let w = teichmuller(a, p, k)?;
    PadicScalar::from_bigint(p, a, k).div(&w)
}

/// The p-adic logarithm of a principal unit `u = 1 (mod p)`.
pub fn padic_log(u: &PadicScalar) -> Result<PadicScalar> {
    let p = u.p;
    if p == 2 {
        return domain("padic_log: p = 2 is not supported");
    }
    if u.val != 0 || u.is_zero() {
        return domain(format!("padic_log: {u} is not a unit"));
    }
    let a = u.prec;
    let pa = pow_big(p, a);
    let y = (&u.unit - BigInt::one()).mod_floor(&pa);
    if y.is_zero() {
        return Ok(PadicScalar::zero(p, a as i64));
    }
    let (w, _) = split_valuation(&y, p);
    if w == 0 {
        return domain(format!("padic_log: {u} is not congruent to 1 mod p"));
    }
    let mut jmax = 1u64;
    while jmax as i64 * w as i64 - crate::arith::ilog(jmax, p) as i64 <= a as i64 {
        jmax += 1;
    }
    let extra = crate::arith::ilog(jmax, p);
    let big = pow_big(p, a + extra);
    let mut yj = BigInt::one();
    let mut sum = BigInt::zero();
    for j in 1..=jmax {
        yj = (&yj * &y).mod_floor(&big);
        let vj = crate::arith::valuation(j, p);
        let unit_j = j / crate::arith::checked_pow(p, vj).unwrap();
        let term = (&yj / pow_big(p, vj)) * inv_mod_big(&BigInt::from(unit_j), &pa);
        if j % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(PadicScalar::normalize(p, 0, sum, a))
}


/// Fixed-modulus helpers on machine words for inner loops.
pub mod small {
    use crate::arith::{checked_pow, inv_mod, mul_mod, pow_mod, valuation};

    /// Teichmüller representative of `a` modulo `p^k`.
    pub fn teichmuller(a: u64, p: u64, k: u32) -> u64 {
        let pk = checked_pow(p, k).expect("p^k overflows u64");
        let mut x = a % pk;
        for _ in 0..k {
            x = pow_mod(x, p, pk);
        }
        x
    }

    /// `log(u)` modulo `p^k` for `u = 1 (mod p)` given modulo `p^k`.
    pub fn log_one_unit(u: u64, p: u64, k: u32) -> u64 {
        let pk = checked_pow(p, k).expect("p^k overflows u64");
        let y = (u + pk - 1) % pk;
        if y == 0 {
            return 0;
        }
        debug_assert!(y % p == 0, "log_one_unit: argument is not 1 mod p");
        let w = valuation(y, p) as i64;
        let mut jmax = 1u64;
        while jmax as i64 * w - crate::arith::ilog(jmax, p) as i64 <= k as i64 {
            jmax += 1;
        }
        let extra = crate::arith::ilog(jmax, p);
        let big = checked_pow(p, k + extra).expect("working modulus overflows u64");
        let mut yj = 1u64;
        let mut sum = 0u64;
        for j in 1..=jmax {
            yj = mul_mod(yj, y, big);
            let vj = valuation(j, p);
            let pv = checked_pow(p, vj).unwrap();
            let unit = inv_mod((j / pv) % pk, pk).unwrap();
            let term = mul_mod((yj / pv) % pk, unit, pk);
            sum = if j % 2 == 1 { (sum + term) % pk } else { (sum + pk - term) % pk };
        }
        sum
    }
}

/// The ring of integers of `Q_p(zeta_m)`, presented as `Z_p[x]/(g_hat)` with `g_hat`
/// a monic irreducible factor of `Phi_m` known modulo `p^k`.
#[derive(Debug)]
pub struct UnramifiedField {
    p: u64,
    m: u64,
    f: usize,
    k: u32,
    choice: usize,
    residue_modulus: Poly,
    modulus: Vec<BigInt>,
    zeta_powers: Vec<Vec<BigInt>>,
}

/// Irreducible factors of `Phi_m` over `F_p`, sorted by their coefficient
/// vectors read from the constant term upward.
pub fn residue_factors(p: u64, m: u64) -> Result<Vec<Poly>> {
    if m % p == 0 {
        return Err(Error::Ramified { p, m });
    }
    let f = multiplicative_order(p % m.max(1), m) as usize;
    let k = ExtField::new(p, f);
    let zeta = k.root_of_unity(m);
    let mut seen = vec![false; m as usize];
    let mut out = Vec::new();
    for j in (1..=m).filter(|&j| gcd(j % m, m) == 1 || m == 1) {
        let j = j % m;
        if seen[j as usize] {
            continue;
        }
        // minimal polynomial of zeta^j: product over its Frobenius orbit
        let mut poly: Vec<Poly> = vec![vec![1]];
        let mut e = j;
        for _ in 0..f {
            seen[e as usize] = true;
            let root = k.pow(&zeta, e as u128);
            let neg_root = ff::sub(&[], &root, p);
            let mut next: Vec<Poly> = vec![Vec::new(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = ff::add(&next[i + 1], c, p);
                next[i] = ff::add(&next[i], &k.mul(c, &neg_root), p);
            }
            poly = next;
            e = e * p % m.max(1);
        }
        let flat: Poly = poly
            .iter()
            .map(|c| {
                debug_assert!(c.len() <= 1, "minimal polynomial escaped F_p");
                c.first().copied().unwrap_or(0)
            })
            .collect();
        out.push(flat);
    }
    out.sort();
    Ok(out)
}

/// `build_extension(p, m, k)` with the canonical (lexicographically smallest) factor.
pub fn build_extension(p: u64, m: u64, k: u32) -> Result<Arc<UnramifiedField>> {
    build_extension_with_choice(p, m, k, 0)
}

/// Builds the extension from the `choice`-th factor in the sorted factor list.
pub fn build_extension_with_choice(p: u64, m: u64, k: u32, choice: usize) -> Result<Arc<UnramifiedField>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, u32, usize), Arc<UnramifiedField>>>> = OnceLock::new();
    if p == 2 || !crate::arith::is_prime(p) {
        return domain(format!("{p} is not an odd prime"));
    }
    if m % p == 0 {
        return Err(Error::Ramified { p, m });
    }
    if k == 0 {
        return domain("precision must be positive");
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&(p, m, k, choice)) {
        return Ok(hit.clone());
    }
    let factors = residue_factors(p, m)?;
    let g = factors
        .get(choice)
        .cloned()
        .ok_or_else(|| Error::Domain(format!("factor index {choice} out of range")))?;
    let modulus = hensel_lift(&cyclotomic_polynomial(m), &g, p, k);
    let f = g.len() - 1;
    let field = UnramifiedField::assemble(p, m, f, k, choice, g, modulus);
    let field = Arc::new(field);
    cache.lock().unwrap().insert((p, m, k, choice), field.clone());
    Ok(field)
}

fn to_fp(poly: &[BigInt], p: u64) -> Poly {
    let pb = BigInt::from(p);
    ff::trim(poly.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect())
}

fn from_fp(poly: &[u64]) -> Vec<BigInt> {
    poly.iter().map(|&c| BigInt::from(c)).collect()
}

fn poly_mul_z(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lifts the monic factor `g` of `phi (mod p)` to a monic factor modulo `p^k`.
fn hensel_lift(phi: &[BigInt], g: &[u64], p: u64, k: u32) -> Vec<BigInt> {
    let phi_p = to_fp(phi, p);
    let (h, r) = ff::divrem(&phi_p, g, p);
    debug_assert!(r.is_empty(), "g does not divide Phi_m mod p");
    let (one, _, t) = ff::ext_gcd(g, &h, p);
    debug_assert_eq!(one, vec![1]);
    let mut big_g = from_fp(g);
    let mut big_h = from_fp(&h);
    for j in 1..k {
        let pj = pow_big(p, j);
        let prod = poly_mul_z(&big_g, &big_h);
        let diff: Vec<BigInt> = (0..phi.len())
            .map(|i| &phi[i] - prod.get(i).cloned().unwrap_or_default())
            .collect();
        let e: Vec<BigInt> = diff
            .iter()
            .map(|c| {
                debug_assert!((c % &pj).is_zero());
                c / &pj
            })
            .collect();
        let e = to_fp(&e, p);
        if e.is_empty() {
            continue;
        }
        let te = ff::mul(&t, &e, p);
        let dg = ff::rem(&te, g, p);
        let (dh, rr) = ff::divrem(&ff::sub(&e, &ff::mul(&h, &dg, p), p), g, p);
        debug_assert!(rr.is_empty());
        for (i, c) in dg.iter().enumerate() {
            big_g[i] += &pj * c;
        }
        for (i, c) in dh.iter().enumerate() {
            big_h[i] += &pj * c;
        }
    }
    let pk = pow_big(p, k);
    big_g.iter().map(|c| c.mod_floor(&pk)).collect()
}

impl UnramifiedField {
    fn assemble(p: u64, m: u64, f: usize, k: u32, choice: usize, g: Poly, modulus: Vec<BigInt>) -> Self {
        let mut field = Self {
            p,
            m,
            f,
            k,
            choice,
            residue_modulus: g,
            modulus,
            zeta_powers: Vec::new(),
        };
        let mut powers = Vec::with_capacity(m as usize);
        let mut cur = field.reduce(vec![BigInt::one()], k);
        for _ in 0..m {
            powers.push(cur.clone());
            let mut shifted = vec![BigInt::zero()];
            shifted.extend(cur);
            cur = field.reduce(shifted, k);
        }
        field.zeta_powers = powers;
        field
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Order of the root of unity generating the extension.
    pub fn conductor(&self) -> u64 {
        self.m
    }

    /// Residue degree `f`, the order of `p` modulo `m`.
    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn factor_choice(&self) -> usize {
        self.choice
    }

    /// The chosen irreducible factor of `Phi_m` over `F_p`.
    pub fn residue_modulus(&self) -> &[u64] {
        &self.residue_modulus
    }

    /// The Hensel-lifted factor modulo `p^k`, constant term first, monic.
    pub fn lifted_modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    /// The same extension (same factor choice) at another precision.
    pub fn with_precision(&self, k: u32) -> Result<Arc<UnramifiedField>> {
        build_extension_with_choice(self.p, self.m, k, self.choice)
    }

    fn pk(&self, r: u32) -> BigInt {
        pow_big(self.p, r)
    }

    /// Reduces an integer polynomial modulo `g_hat` and `p^r`.
    fn reduce(&self, mut poly: Vec<BigInt>, r: u32) -> Vec<BigInt> {
        let pr = self.pk(r);
        let f = self.f;
        for d in (f..poly.len()).rev() {
            let c = std::mem::take(&mut poly[d]).mod_floor(&pr);
            if c.is_zero() {
                continue;
            }
            for j in 0..f {
                poly[d - f + j] -= &c * &self.modulus[j];
            }
        }
        poly.resize(f, BigInt::zero());
        poly.iter().map(|c| c.mod_floor(&pr)).collect()
    }

    fn mul_raw(&self, a: &[BigInt], b: &[BigInt], r: u32) -> Vec<BigInt> {
        self.reduce(poly_mul_z(a, b), r)
    }

    /// Inverse of a unit vector modulo `p^r` (Newton iteration from the residue field).
    fn inv_raw(&self, a: &[BigInt], r: u32) -> Vec<BigInt> {
        let p = self.p;
        let a_bar = to_fp(a, p);
        let (one, s, _) = ff::ext_gcd(&a_bar, &self.residue_modulus, p);
        assert_eq!(one, vec![1], "inverse of a non-unit in the unramified extension");
        let mut y = from_fp(&s);
        y.resize(self.f, BigInt::zero());
        let mut prec = 1;
        while prec < r {
            prec = (2 * prec).min(r);
            let ay = self.mul_raw(a, &y, prec);
            let mut two_minus: Vec<BigInt> = ay.iter().map(|c| -c).collect();
            two_minus[0] += 2;
            y = self.mul_raw(&y, &two_minus, prec);
        }
        let pr = self.pk(r);
        y.iter().map(|c| c.mod_floor(&pr)).collect()
    }

    /// The element `x`, the image of `zeta_m`.
    pub fn zeta(self: &Arc<Self>) -> UnramifiedElem {
        self.zeta_power(1)
    }

    pub fn zeta_power(self: &Arc<Self>, e: i64) -> UnramifiedElem {
        let idx = e.rem_euclid(self.m as i64) as usize;
        UnramifiedElem::from_integral(self.clone(), 0, self.zeta_powers[idx].clone(), self.k)
    }

    /// Image of an element of `Q(zeta_m)` under `zeta_m -> x`.
    pub fn embed_cyclotomic(self: &Arc<Self>, x: &CycRational) -> Result<UnramifiedElem> {
        if x.modulus() != self.m {
            return domain(format!(
                "element of Q(zeta_{}) embedded into an extension built for m = {}",
                x.modulus(),
                self.m
            ));
        }
        let nonzero: Vec<(usize, &BigRational)> =
            x.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        if nonzero.is_empty() {
            return Ok(UnramifiedElem::zero(self.clone(), self.k as i64));
        }
        let p = self.p;
        let vals: Vec<i64> = nonzero
            .iter()
            .map(|(_, c)| split_valuation(c.numer(), p).0 as i64 - split_valuation(c.denom(), p).0 as i64)
            .collect();
        let vmin = *vals.iter().min().unwrap();
        let pk = self.pk(self.k);
        let mut acc = vec![BigInt::zero(); self.f];
        for ((j, c), v) in nonzero.iter().zip(&vals) {
            let scaled = PadicScalar::from_rational(p, c, self.k);
            let shift = (v - vmin) as u32;
            if shift >= self.k {
                continue;
            }
            let digit = (scaled.unit() * pow_big(p, shift)).mod_floor(&pk);
            for (slot, z) in acc.iter_mut().zip(&self.zeta_powers[*j]) {
                *slot += &digit * z;
            }
        }
        Ok(UnramifiedElem::from_integral(self.clone(), vmin, acc, self.k))
    }

    pub fn embed_scalar(self: &Arc<Self>, s: &PadicScalar) -> UnramifiedElem {
        assert_eq!(s.prime(), self.p);
        if s.is_zero() {
            return UnramifiedElem::zero(self.clone(), s.valuation());
        }
        let mut coeffs = vec![BigInt::zero(); self.f];
        coeffs[0] = s.unit().clone();
        UnramifiedElem { field: self.clone(), val: s.valuation(), coeffs, prec: s.precision() }
    }
}

/// Element of `Q_p(zeta_m)`: `p^val * (unit vector)` with relative precision `prec`.
#[derive(Clone, Debug)]
pub struct UnramifiedElem {
    field: Arc<UnramifiedField>,
    val: i64,
    coeffs: Vec<BigInt>,
    prec: u32,
}

impl UnramifiedElem {
    pub fn zero(field: Arc<UnramifiedField>, abs_prec: i64) -> Self {
        let f = field.f;
        Self { field, val: abs_prec, coeffs: vec![BigInt::zero(); f], prec: 0 }
    }

    pub fn one(field: Arc<UnramifiedField>) -> Self {
        let k = field.k;
        let mut coeffs = vec![BigInt::zero(); field.f];
        coeffs[0] = BigInt::one();
        Self { field, val: 0, coeffs, prec: k }
    }

    /// `p^val * x` where the integral vector `x` is known modulo `p^k`.
    pub fn from_integral(field: Arc<UnramifiedField>, val: i64, x: Vec<BigInt>, k: u32) -> Self {
        let p = field.p;
        let pk = pow_big(p, k);
        let x: Vec<BigInt> = x.iter().map(|c| c.mod_floor(&pk)).collect();
        let t = x.iter().filter(|c| !c.is_zero()).map(|c| split_valuation(c, p).0).min();
        match t {
            None => Self::zero(field, val + k as i64),
            Some(t) => {
                let pt = pow_big(p, t);
                let coeffs = x.iter().map(|c| c / &pt).collect();
                Self { field, val: val + t as i64, coeffs, prec: k - t }
            }
        }
    }

    pub fn field(&self) -> &Arc<UnramifiedField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.prec == 0
    }

    /// Valuation (a lower bound equal to the absolute precision for zero).
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn abs_precision(&self) -> i64 {
        self.val + self.prec as i64
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    /// Unit-part coefficients in the basis `1, x, ..., x^(f-1)`.
    pub fn unit_coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Reduction modulo the maximal ideal as a polynomial over `F_p`.
    pub fn residue(&self) -> Result<Poly> {
        if self.val < 0 {
            return Err(Error::NonIntegral("residue of a non-integral element".into()));
        }
        if self.is_zero() || self.val > 0 {
            if self.abs_precision() < 1 {
                return Err(Error::PrecisionExhausted("residue unknown".into()));
            }
            return Ok(Vec::new());
        }
        Ok(to_fp(&self.coeffs, self.field.p))
    }

    fn check(&self, other: &Self) {
        assert!(Arc::ptr_eq(&self.field, &other.field) || {
            let (a, b) = (&self.field, &other.field);
            a.p == b.p && a.m == b.m && a.choice == b.choice
        });
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let abs = self.abs_precision().min(other.abs_precision());
        let v = self.val.min(other.val);
        if v >= abs {
            return Self::zero(self.field.clone(), abs);
        }
        let k = (abs - v) as u32;
        let mut x = vec![BigInt::zero(); self.field.f];
        for t in [self, other] {
            let shift = t.val - v;
            if !t.is_zero() && shift < k as i64 {
                let ps = pow_big(self.field.p, shift as u32);
                for (slot, c) in x.iter_mut().zip(&t.coeffs) {
                    *slot += c * &ps;
                }
            }
        }
        Self::from_integral(self.field.clone(), v, x, k)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let pk = pow_big(self.field.p, self.prec);
        let coeffs = self.coeffs.iter().map(|c| (-c).mod_floor(&pk)).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field.clone(), self.val + other.val);
        }
        let prec = self.prec.min(other.prec).min(self.field.k);
        let coeffs = self.field.mul_raw(&self.coeffs, &other.coeffs, prec);
        Self { field: self.field.clone(), val: self.val + other.val, coeffs, prec }
    }

    pub fn mul_scalar(&self, s: &PadicScalar) -> Self {
        if self.is_zero() || s.is_zero() {
            return Self::zero(self.field.clone(), self.val + s.valuation());
        }
        let prec = self.prec.min(s.precision());
        let pk = pow_big(self.field.p, prec);
        let coeffs = self.coeffs.iter().map(|c| (c * s.unit()).mod_floor(&pk)).collect();
        Self { field: self.field.clone(), val: self.val + s.valuation(), coeffs, prec }
    }

    pub fn div_scalar(&self, s: &PadicScalar) -> Result<Self> {
        Ok(self.mul_scalar(&s.inverse()?))
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return domain("inverse of zero in the unramified extension");
        }
        let prec = self.prec.min(self.field.k);
        let coeffs = self.field.inv_raw(&self.coeffs, prec);
        Ok(Self { field: self.field.clone(), val: -self.val, coeffs, prec })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.field.clone());
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

    /// The value modulo `p^r` as an integral coefficient vector.
    pub fn integral_coeffs(&self, r: u32) -> Result<Vec<BigInt>> {
        if self.val < 0 {
            return Err(Error::NonIntegral("integral_coeffs of a non-integral element".into()));
        }
        if self.abs_precision() < r as i64 {
            return Err(Error::PrecisionExhausted(format!("need {r} digits, have {}", self.abs_precision())));
        }
        let pr = pow_big(self.field.p, r);
        if self.is_zero() || self.val >= r as i64 {
            return Ok(vec![BigInt::zero(); self.field.f]);
        }
        let pv = pow_big(self.field.p, self.val as u32);
        Ok(self.coeffs.iter().map(|c| (c * &pv).mod_floor(&pr)).collect())
    }
}

impl fmt::Display for UnramifiedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.field.p, self.val);
        }
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}^{} * [{}] + O({}^{})", self.field.p, self.val, parts.join(", "), self.field.p, self.abs_precision())
    }
}

/// The default working precision `C + 10` for `C` interpolation points.
pub fn default_precision(points: usize) -> u32 {
    points as u32 + 10
}

impl PartialEq for UnramifiedElem {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val && self.prec == other.prec && self.coeffs == other.coeffs
    }
}

/// Whether `x - y` has valuation at least `k`.
pub fn congruent(x: &UnramifiedElem, y: &UnramifiedElem, k: u32) -> bool {
    x.sub(y).valuation() >= k as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(&big(2), 5, 2).unwrap().unit(), &big(7));
        assert_eq!(teichmuller(&big(4), 5, 3).unwrap().unit(), &big(124));
        assert!(teichmuller(&big(10), 5, 2).is_err());
        let w = teichmuller(&big(3), 7, 6).unwrap();
        assert_eq!(w.pow(6), PadicScalar::one(7, 6));
    }

    #[test]
    fn principal_unit_example() {
        let u = principal_unit(&big(2), 5, 2).unwrap();
        assert_eq!(u.unit(), &big(11));
        assert_eq!(u.valuation(), 0);
    }

    #[test]
    fn log_of_one_plus_p_matches_series() {
        // log(6) for p = 5 to 3 digits, against the exact rational partial sum
        let u = PadicScalar::from_i64(5, 6, 3);
        let l = padic_log(&u).unwrap();
        let mut exact = BigRational::zero();
        for k in 1..=10i64 {
            let term = BigRational::new(num_traits::pow(big(5), k as usize), big(k));
            exact = if k % 2 == 1 { exact + term } else { exact - term };
        }
        let expected = PadicScalar::from_rational(5, &exact, 3);
        assert_eq!(l.residue(3).unwrap(), expected.residue(3).unwrap());
        assert_eq!(l.valuation(), 1);
        assert_eq!(small::log_one_unit(6, 5, 3) as i64, l.residue(3).unwrap().to_i64().unwrap());
    }

    #[test]
    fn division_by_non_unit_lowers_valuation() {
        let a = PadicScalar::from_i64(5, 3, 10);
        let b = PadicScalar::from_i64(5, 50, 10);
        let q = a.div(&b).unwrap();
        assert_eq!(q.valuation(), -2);
        assert!(q.mul(&b).sub(&a).is_zero());
        assert!(a.div(&PadicScalar::zero(5, 10)).is_err());
    }

    #[test]
    fn precision_is_minimum() {
        let a = PadicScalar::from_i64(7, 3, 10);
        let b = PadicScalar::from_i64(7, 5, 4);
        assert_eq!(a.add(&b).precision(), 4);
        assert_eq!(a.mul(&b).precision(), 4);
    }

    #[test]
    fn canonical_factor_choice() {
        let f53 = build_extension(5, 3, 6).unwrap();
        assert_eq!(f53.degree(), 2);
        assert_eq!(f53.residue_modulus(), &[1, 1, 1]);
        assert_eq!(f53.lifted_modulus(), &[big(1), big(1), big(1)]);
        let f73 = build_extension(7, 3, 6).unwrap();
        assert_eq!(f73.degree(), 1);
        assert_eq!(f73.residue_modulus(), &[3, 1]);
        assert_eq!(residue_factors(7, 3).unwrap(), vec![vec![3, 1], vec![5, 1]]);
        assert!(matches!(build_extension(5, 10, 6), Err(Error::Ramified { .. })));
    }

    #[test]
    fn lifted_root_is_a_root_of_unity() {
        for (p, m) in [(7u64, 3u64), (5, 3), (3, 4), (7, 9), (11, 5), (3, 13), (5, 12)] {
            let field = build_extension(p, m, 12).unwrap();
            let z = field.zeta();
            assert_eq!(z.pow(m), UnramifiedElem::one(field.clone()), "p={p} m={m}");
            for d in (1..m).filter(|d| m % d == 0) {
                assert!(!z.pow(d).sub(&UnramifiedElem::one(field.clone())).is_zero());
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let field = build_extension(5, 7, 10).unwrap();
        let a = field.zeta().add(&UnramifiedElem::one(field.clone()).add(&UnramifiedElem::one(field.clone())));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), UnramifiedElem::one(field.clone()));
    }

    #[test]
    fn embedding_respects_products() {
        let field = build_extension(7, 5, 10).unwrap();
        let x = crate::cyclotomic::root_of_unity_power(5, 2)
            .add(&CycRational::from_rational(5, BigRational::new(big(3), big(14))));
        let y = crate::cyclotomic::root_of_unity_power(5, 3);
        let lhs = field.embed_cyclotomic(&x.mul(&y)).unwrap();
        let rhs = field.embed_cyclotomic(&x).unwrap().mul(&field.embed_cyclotomic(&y).unwrap());
        assert!(lhs.sub(&rhs).is_zero());
        assert_eq!(field.embed_cyclotomic(&x).unwrap().valuation(), -1);
    }
}
