//! Dense polynomials over `F_p` and the finite fields `F_p[y]/(h)` built from them.
//!
//! Polynomials are coefficient vectors, constant term first, with no trailing zeros.

use crate::arith::{inv_mod, mul_mod, prime_divisors};

pub type Poly = Vec<u64>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn add(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
        .collect();
    trim(out)
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
        .collect();
    trim(out)
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(out)
}

pub fn scale(a: &[u64], c: u64, p: u64) -> Poly {
    trim(a.iter().map(|&x| mul_mod(x, c, p)).collect())
}

/// Quotient and remainder of `a` by a nonzero `b`.
pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_mod(b[db], p).expect("leading coefficient not invertible");
    let mut r: Poly = trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mul_mod(r[dr], lead_inv, p);
        q[dr - db] = c;
        for (j, &bj) in b.iter().enumerate().take(db + 1) {
            let idx = dr - db + j;
            r[idx] = (r[idx] + p - mul_mod(c, bj, p)) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub fn rem(a: &[u64], b: &[u64], p: u64) -> Poly {
    divrem(a, b, p).1
}

pub fn make_monic(a: &[u64], p: u64) -> Poly {
    match degree(a) {
        None => Vec::new(),
        Some(d) => scale(a, inv_mod(a[d], p).expect("unit leading coefficient"), p),
    }
}

pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(&x, p)
}

/// Returns `(g, s, t)` with `s a + t b = g` and `g` monic.
pub fn ext_gcd(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let d = degree(&r0).expect("gcd of zero polynomials");
    let inv = inv_mod(r0[d], p).unwrap();
    (scale(&r0, inv, p), scale(&s0, inv, p), scale(&t0, inv, p))
}

/// `base^exp mod modulus`.
pub fn pow_mod_poly(base: &[u64], mut exp: u128, modulus: &[u64], p: u64) -> Poly {
    let mut acc: Poly = rem(&[1], modulus, p);
    let mut b = rem(base, modulus, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), modulus, p);
        }
        b = rem(&mul(&b, &b, p), modulus, p);
        exp >>= 1;
    }
    acc
}

/// Rabin's irreducibility test for a monic polynomial over `F_p`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = match degree(f) {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    let x: Poly = vec![0, 1];
    // frob[k] = x^(p^k) mod f
    let mut frob = vec![rem(&x, f, p)];
    for k in 1..=n {
        let next = pow_mod_poly(&frob[k - 1], p as u128, f, p);
        frob.push(next);
    }
    if sub(&frob[n], &x, p).iter().any(|&c| c != 0) {
        return false;
    }
    prime_divisors(n as u64).into_iter().all(|r| {
        let k = n / r as usize;
        let g = gcd(f, &sub(&frob[k], &x, p), p);
        degree(&g) == Some(0)
    })
}

/// Lexicographically first monic irreducible polynomial of the given degree.
pub fn first_irreducible(deg: usize, p: u64) -> Poly {
    if deg == 1 {
        return vec![0, 1];
    }
    let mut lower = vec![0u64; deg];
    loop {
        let mut f = lower.clone();
        f.push(1);
        if lower[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
        // increment the base-p counter, constant term least significant
        let mut i = 0;
        loop {
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            i += 1;
            assert!(i < deg, "no irreducible polynomial found");
        }
    }
}

/// The field `F_q = F_p[y]/(h)` with `q = p^f`.
#[derive(Clone, Debug)]
pub struct ExtField {
    pub p: u64,
    pub f: usize,
    pub modulus: Poly,
}

impl ExtField {
    pub fn new(p: u64, f: usize) -> Self {
        Self { p, f, modulus: first_irreducible(f, p) }
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.f as u32)
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Poly {
        rem(&mul(a, b, self.p), &self.modulus, self.p)
    }

    pub fn pow(&self, a: &[u64], e: u128) -> Poly {
        pow_mod_poly(a, e, &self.modulus, self.p)
    }

    pub fn is_one(&self, a: &[u64]) -> bool {
        a == [1]
    }

    /// Element whose base-`p` digits (constant term first) spell `index`.
    pub fn element(&self, mut index: u128) -> Poly {
        let mut out = Vec::with_capacity(self.f);
        for _ in 0..self.f {
            out.push((index % self.p as u128) as u64);
            index /= self.p as u128;
        }
        trim(out)
    }

    pub fn index_of(&self, a: &[u64]) -> u128 {
        a.iter().rev().fold(0u128, |acc, &c| acc * self.p as u128 + c as u128)
    }

    /// An element of exact multiplicative order `m` (requires `m | q - 1`).
    pub fn root_of_unity(&self, m: u64) -> Poly {
        let q1 = self.order() - 1;
        assert!(q1 % m as u128 == 0, "F_q has no primitive {m}-th root of unity");
        let divs = prime_divisors(m);
        for idx in 1..=q1 {
            let z = self.pow(&self.element(idx), q1 / m as u128);
            if divs.iter().all(|&r| !self.is_one(&self.pow(&z, (m / r) as u128))) {
                return z;
            }
        }
        unreachable!("F_q^* is cyclic")
    }

    /// A generator of the cyclic group `F_q^*`.
    pub fn generator(&self) -> Poly {
        let q1 = self.order() - 1;
        if q1 == 1 {
            return vec![1];
        }
        let divs = prime_divisors(q1 as u64);
        (1..=q1)
            .map(|i| self.element(i))
            .find(|g| divs.iter().all(|&r| !self.is_one(&self.pow(g, q1 / r as u128))))
            .expect("F_q^* is cyclic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_round_trip() {
        let p = 7;
        let a = vec![3, 0, 5, 1, 6];
        let b = vec![2, 1, 1];
        let (q, r) = divrem(&a, &b, p);
        assert_eq!(add(&mul(&q, &b, p), &r, p), trim(a));
    }

    #[test]
    fn irreducibles() {
        assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(first_irreducible(2, 3), vec![1, 0, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 5));
        assert!(is_irreducible(&[1, 1, 1], 5));
    }

    #[test]
    fn bezout() {
        let p = 5;
        let a = vec![1, 1, 1];
        let b = vec![2, 1];
        let (g, s, t) = ext_gcd(&a, &b, p);
        assert_eq!(g, vec![1]);
        assert_eq!(add(&mul(&s, &a, p), &mul(&t, &b, p), p), vec![1]);
    }

    #[test]
    fn roots_of_unity_have_exact_order() {
        let k = ExtField::new(5, 2);
        let z = k.root_of_unity(3);
        assert!(!k.is_one(&z));
        assert!(k.is_one(&k.pow(&z, 3)));
        let g = k.generator();
        assert!(!k.is_one(&k.pow(&g, 8)));
        assert!(!k.is_one(&k.pow(&g, 12)));
    }
}
