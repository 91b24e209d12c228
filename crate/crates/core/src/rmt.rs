//! Random matrices over finite fields and the distribution `rho(q, r)`.
//!
//! For `A` uniform in `GL(n, F_q)` the degree of the associated polynomial is
//! the dimension of the generalised 1-eigenspace. Its law is known exactly for
//! every `n` ([`exact_distribution`]) and tends to `rho(q, r)` as `n` grows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::finite_field::ExtField;
use crate::real::HiReal;

/// `rho(q, r) = q^(-r) * prod_{t > r} (1 - q^(-t))` by direct truncated product.
pub fn rho(q: u64, r: u32) -> HiReal {
    assert!(q >= 2, "rho needs q >= 2");
    let y = HiReal::recip_int(&BigInt::from(q));
    // stop once q^(-t) drops below 2^(-310)
    let bits = 64 - q.leading_zeros() - 1;
    let t_max = r + 310 / bits.max(1) + 2;
    let mut yt = y.pow(r as u64 + 1);
    let mut prod = y.pow(r as u64);
    for _ in r + 1..=t_max {
        prod = &prod - &(&prod * &yt);
        yt = &yt * &y;
    }
    prod
}

/// `#GL(n, F_q) = prod_{i < n} (q^n - q^i)`.
pub fn gl_order(n: usize, q: u64) -> BigInt {
    let qn = num_traits::pow(BigInt::from(q), n);
    (0..n).fold(BigInt::one(), |acc, i| acc * (&qn - num_traits::pow(BigInt::from(q), i)))
}

/// The finite-`n` law of the associated-polynomial degree, `r = 0..=n`.
pub fn exact_distribution(n: usize, q: u64) -> Vec<BigRational> {
    let qq = BigInt::from(q);
    // inv_prod(i) = 1 / prod_{j <= i} (q^j - 1)
    let mut inv_prod = vec![BigRational::one()];
    for i in 1..=n {
        let den = num_traits::pow(qq.clone(), i) - 1;
        inv_prod.push(&inv_prod[i - 1] / BigRational::from_integer(den));
    }
    // q^(-r) / prod_{i <= r} (1 - q^(-i)) = q^(r(r-1)/2) * inv_prod(r)
    let head: Vec<BigRational> = (0..=n)
        .map(|r| &inv_prod[r] * BigRational::from_integer(num_traits::pow(qq.clone(), r * (r.max(1) - 1) / 2)))
        .collect();
    let mut tail = vec![BigRational::one()];
    for k in 1..=n {
        let term = if k % 2 == 0 { inv_prod[k].clone() } else { -inv_prod[k].clone() };
        tail.push(&tail[k - 1] + term);
    }
    (0..=n).map(|r| &head[r] * &tail[n - r]).collect()
}

/// The field `F_q` as lookup tables on element indices `0..q`; index 0 is
/// zero and index 1 is one.
#[derive(Clone, Debug)]
pub struct Fq {
    p: u64,
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl Fq {
    /// Largest supported field size.
    pub const MAX_ORDER: u64 = 1 << 10;

    pub fn new(q: u64) -> Result<Self> {
        let f = factorize(q);
        if f.len() != 1 {
            return Err(Error::Domain(format!("{q} is not a prime power")));
        }
        if q > Self::MAX_ORDER {
            return Err(Error::Budget(format!("field of order {q} exceeds {}", Self::MAX_ORDER)));
        }
        let (p, e) = f[0];
        let field = ExtField::new(p, e as usize);
        let qs = q as usize;
        let elems: Vec<Vec<u64>> = (0..qs).map(|i| field.element(i as u128)).collect();
        let idx = |v: &[u64]| field.index_of(v) as u16;
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        for a in 0..qs {
            for b in 0..qs {
                add[a * qs + b] = idx(&crate::finite_field::add(&elems[a], &elems[b], p));
                mul[a * qs + b] = idx(&field.mul(&elems[a], &elems[b]));
            }
        }
        let neg = (0..qs).map(|a| (0..qs).find(|&b| add[a * qs + b] == 0).unwrap() as u16).collect();
        let inv = (0..qs)
            .map(|a| if a == 0 { 0 } else { (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u16 })
            .collect();
        Ok(Self { p, q: qs, add, mul, neg, inv })
    }

    pub fn order(&self) -> u64 {
        self.q as u64
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }
}

/// Square matrix over `F_q`, entries as [`Fq`] indices in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMatrix {
    n: usize,
    entries: Vec<u16>,
}

impl FqMatrix {
    pub fn new(n: usize, entries: Vec<u16>) -> Self {
        assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self { n, entries }
    }

    /// Matrix number `index` in base-`q` order of entries.
    pub fn from_index(n: usize, q: u64, mut index: u64) -> Self {
        let entries = (0..n * n)
            .map(|_| {
                let e = (index % q) as u16;
                index /= q;
                e
            })
            .collect();
        Self { n, entries }
    }

    pub fn random(n: usize, fq: &Fq, rng: &mut impl Rng) -> Self {
        let entries = (0..n * n).map(|_| rng.random_range(0..fq.q as u16)).collect();
        Self { n, entries }
    }

    /// Uniform element of `GL(n, F_q)` by rejection; also returns the draw count.
    pub fn random_invertible(n: usize, fq: &Fq, rng: &mut impl Rng) -> (Self, u64) {
        let mut draws = 0;
        loop {
            draws += 1;
            let a = Self::random(n, fq, rng);
            if a.rank(fq) == n {
                return (a, draws);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.entries[i * self.n + j]
    }

    pub fn mul(&self, other: &Self, fq: &Fq) -> Self {
        let n = self.n;
        let mut out = vec![0u16; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let t = fq.mul(a, other.entries[k * n + j]);
                    out[i * n + j] = fq.add(out[i * n + j], t);
                }
            }
        }
        Self { n, entries: out }
    }

    pub fn sub_identity(&self, fq: &Fq) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.entries[i * self.n + i] = fq.sub(m.entries[i * self.n + i], 1);
        }
        m
    }

    pub fn rank(&self, fq: &Fq) -> usize {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut rank = 0;
        for col in 0..n {
            let Some(piv) = (rank..n).find(|&r| m[r * n + col] != 0) else { continue };
            if piv != rank {
                for j in 0..n {
                    m.swap(piv * n + j, rank * n + j);
                }
            }
            let inv = fq.inv(m[rank * n + col]);
            for r in rank + 1..n {
                let factor = fq.mul(m[r * n + col], inv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let t = fq.mul(factor, m[rank * n + j]);
                    m[r * n + j] = fq.sub(m[r * n + j], t);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self, fq: &Fq) -> Option<Self> {
        let n = self.n;
        let w = 2 * n;
        let mut m = vec![0u16; n * w];
        for i in 0..n {
            m[i * w..i * w + n].copy_from_slice(&self.entries[i * n..(i + 1) * n]);
            m[i * w + n + i] = 1;
        }
        for col in 0..n {
            let piv = (col..n).find(|&r| m[r * w + col] != 0)?;
            for j in 0..w {
                m.swap(piv * w + j, col * w + j);
            }
            let inv = fq.inv(m[col * w + col]);
            for j in 0..w {
                m[col * w + j] = fq.mul(m[col * w + j], inv);
            }
            for r in 0..n {
                if r == col || m[r * w + col] == 0 {
                    continue;
                }
                let factor = m[r * w + col];
                for j in 0..w {
                    let t = fq.mul(factor, m[col * w + j]);
                    m[r * w + j] = fq.sub(m[r * w + j], t);
                }
            }
        }
        let entries = (0..n).flat_map(|i| m[i * w + n..(i + 1) * w].to_vec()).collect();
        Some(Self { n, entries })
    }
}

/// Degree of the associated polynomial: `n - rank((A - I)^n)`.
pub fn assoc_poly_degree(a: &FqMatrix, fq: &Fq) -> Result<usize> {
    if a.rank(fq) < a.n {
        return Err(Error::Domain("matrix is singular".into()));
    }
    Ok(unipotent_part(a, fq))
}

fn unipotent_part(a: &FqMatrix, fq: &Fq) -> usize {
    let n = a.n;
    let mut b = a.sub_identity(fq);
    // B^(2^k) with 2^k >= n has the stable kernel
    let mut pw = 1;
    while pw < n {
        b = b.mul(&b, fq);
        pw *= 2;
    }
    n - b.rank(fq)
}

/// Brute-force counts over all of `GL(n, F_q)`, with the counting quantities
/// that the exact formula factors into.
#[derive(Clone, Debug)]
pub struct SmallEnumeration {
    pub n: usize,
    pub q: u64,
    /// Invertible matrices by associated-polynomial degree `r = 0..=n`.
    pub counts: Vec<u64>,
    pub gl_order: u64,
    /// Unipotent `k x k` matrices for `k = 0..=n`.
    pub unipotent: Vec<u64>,
    /// `k x k` matrices with neither 0 nor 1 as an eigenvalue, `k = 0..=n`.
    pub no_eigenvalue_zero_one: Vec<u64>,
    /// `#GL(n) / (#GL(r) #GL(n-r))`, the ordered decompositions into an
    /// `r`- and an `(n-r)`-dimensional summand.
    pub decompositions: Vec<u64>,
}

impl SmallEnumeration {
    pub fn proportions(&self) -> Vec<BigRational> {
        let total = BigInt::from(self.gl_order);
        self.counts.iter().map(|&c| BigRational::new(BigInt::from(c), total.clone())).collect()
    }
}

/// Default cap on `q^(n^2)` for [`enumerate_small`].
pub const ENUMERATION_BUDGET: u64 = 1 << 22;

pub fn enumerate_small(n: usize, q: u64, budget: u64) -> Result<SmallEnumeration> {
    let fq = Fq::new(q)?;
    let total = (n * n) as u32;
    let size = q
        .checked_pow(total)
        .filter(|&s| s <= budget)
        .ok_or_else(|| Error::Budget(format!("{q}^{total} matrices exceed the budget {budget}")))?;
    let mut counts = vec![0u64; n + 1];
    for idx in 0..size {
        let a = FqMatrix::from_index(n, q, idx);
        if a.rank(&fq) == n {
            counts[unipotent_part(&a, &fq)] += 1;
        }
    }
    let mut unipotent = Vec::with_capacity(n + 1);
    let mut neither = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (mut u, mut w) = (0u64, 0u64);
        for idx in 0..q.pow((k * k) as u32) {
            let a = FqMatrix::from_index(k, q, idx);
            if a.rank(&fq) < k {
                continue;
            }
            let r = unipotent_part(&a, &fq);
            if r == k {
                u += 1;
            }
            if r == 0 {
                w += 1;
            }
        }
        unipotent.push(u);
        neither.push(w);
    }
    let gl = |k: usize| gl_order(k, q);
    let decompositions = (0..=n)
        .map(|r| {
            let d = gl(n) / (gl(r) * gl(n - r));
            u64::try_from(d).expect("small")
        })
        .collect();
    Ok(SmallEnumeration {
        n,
        q,
        counts,
        gl_order: u64::try_from(gl(n)).expect("small"),
        unipotent,
        no_eigenvalue_zero_one: neither,
        decompositions,
    })
}

/// Empirical law of the associated-polynomial degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeHistogram {
    pub n: usize,
    pub q: u64,
    pub seed: u64,
    pub samples: u64,
    /// Matrices drawn including rejected singular ones.
    pub draws: u64,
    pub counts: Vec<u64>,
}

impl DegreeHistogram {
    fn empty(n: usize, q: u64, seed: u64) -> Self {
        Self { n, q, seed, samples: 0, draws: 0, counts: vec![0; n + 1] }
    }

    /// Adds the counts of `other` (same `n` and `q`).
    pub fn merge(&mut self, other: &Self) {
        assert_eq!((self.n, self.q), (other.n, other.q));
        self.samples += other.samples;
        self.draws += other.draws;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn proportions(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.samples.max(1) as f64).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.samples as f64 / self.draws.max(1) as f64
    }
}

/// Samples handled by one seeded stream.
pub const STREAM_CHUNK: u64 = 4096;

/// Monte Carlo over `GL(n, F_q)`; stream `s` draws samples
/// `s*STREAM_CHUNK..` from ChaCha8 with the given seed and stream number `s`,
/// so the result does not depend on the thread count.
pub fn montecarlo(n: usize, q: u64, samples: u64, seed: u64) -> Result<DegreeHistogram> {
    let fq = Fq::new(q)?;
    let streams = samples.div_ceil(STREAM_CHUNK);
    let parts: Vec<DegreeHistogram> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let count = STREAM_CHUNK.min(samples - s * STREAM_CHUNK);
            let mut h = DegreeHistogram::empty(n, q, seed);
            for _ in 0..count {
                let (a, draws) = FqMatrix::random_invertible(n, &fq, &mut rng);
                h.counts[unipotent_part(&a, &fq)] += 1;
                h.draws += draws;
                h.samples += 1;
            }
            h
        })
        .collect();
    let mut total = DegreeHistogram::empty(n, q, seed);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Probability that a uniform `n x n` matrix over `F_q` is invertible.
pub fn invertible_fraction(n: usize, q: u64) -> f64 {
    (1..=n).map(|i| 1.0 - (q as f64).powi(-(i as i32))).product()
}

/// Sum of a rational vector (used to check that distributions are normalised).
pub fn total(xs: &[BigRational]) -> BigRational {
    xs.iter().fold(BigRational::zero(), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn rho4(q: u64, r: u32) -> f64 {
        (rho(q, r).to_f64() * 1e4).round() / 1e4
    }

    #[test]
    fn rho_table_values() {
        let p3: Vec<f64> = (0..8).map(|r| rho4(3, r)).collect();
        assert_eq!(p3, vec![0.5601, 0.2801, 0.1050, 0.0364, 0.0123, 0.0041, 0.0014, 0.0005]);
        assert_eq!((0..3).map(|r| rho4(5, r)).collect::<Vec<_>>(), vec![0.7603, 0.1901, 0.0396]);
        assert_eq!((0..2).map(|r| rho4(25, r)).collect::<Vec<_>>(), vec![0.9584, 0.0399]);
        assert_eq!((0..2).map(|r| rho4(121, r)).collect::<Vec<_>>(), vec![0.9917, 0.0083]);
        assert_eq!((0..3).map(|r| rho4(9, r)).collect::<Vec<_>>(), vec![0.8766, 0.1096, 0.0123]);
    }

    #[test]
    fn rho_sums_to_one() {
        for q in [2u64, 3, 5, 9, 121] {
            let mut s = HiReal::zero();
            for r in 0..400 {
                s = &s + &rho(q, r);
            }
            assert!((s.to_f64() - 1.0).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn small_exact_cases() {
        assert_eq!(exact_distribution(2, 2), vec![frac(1, 3), frac(0, 1), frac(2, 3)]);
        for q in [2u64, 3, 4, 5, 7] {
            let d = exact_distribution(1, q);
            assert_eq!(d, vec![frac(q as i64 - 2, q as i64 - 1), frac(1, q as i64 - 1)]);
        }
        for (n, q) in [(2, 2), (2, 3), (3, 2)] {
            let e = enumerate_small(n, q, ENUMERATION_BUDGET).unwrap();
            assert_eq!(e.proportions(), exact_distribution(n, q), "n={n} q={q}");
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_small(2, 2, ENUMERATION_BUDGET).unwrap().gl_order, 6);
        assert_eq!(enumerate_small(2, 3, ENUMERATION_BUDGET).unwrap().gl_order, 48);
        let e = enumerate_small(3, 2, ENUMERATION_BUDGET).unwrap();
        assert_eq!(e.gl_order, 168);
        let e3 = enumerate_small(2, 3, ENUMERATION_BUDGET).unwrap();
        assert_eq!(e3.unipotent[2], 9);
        for e in [e, e3] {
            for r in 0..=e.n {
                assert_eq!(e.unipotent[r], e.q.pow((r * r - r) as u32));
                let product = e.unipotent[r] * e.no_eigenvalue_zero_one[e.n - r] * e.decompositions[r];
                assert_eq!(product, e.counts[r], "r = {r}");
            }
        }
        assert!(enumerate_small(4, 3, 1000).is_err());
    }

    #[test]
    fn degree_examples() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(assoc_poly_degree(&FqMatrix::identity(3), &f2).unwrap(), 3);
        // companion matrix of x^2 + x + 1
        assert_eq!(assoc_poly_degree(&FqMatrix::new(2, vec![0, 1, 1, 1]), &f2).unwrap(), 0);
        assert_eq!(assoc_poly_degree(&FqMatrix::new(2, vec![0, 1, 1, 0]), &f2).unwrap(), 2);
        assert!(assoc_poly_degree(&FqMatrix::new(2, vec![1, 1, 1, 1]), &f2).is_err());
    }

    #[test]
    fn finite_n_tends_to_rho() {
        for q in [2u64, 3, 5] {
            let limit: Vec<f64> = (0..=8).map(|r| rho(q, r).to_f64()).collect();
            let mut prev_gap = f64::INFINITY;
            for n in 1..=8 {
                let d = exact_distribution(n, q);
                let gap = (0..=8)
                    .map(|r| {
                        let x = d.get(r).map_or(0.0, |v| num_traits::ToPrimitive::to_f64(v).unwrap());
                        (x - limit[r]).abs()
                    })
                    .fold(0.0, f64::max);
                assert!(gap <= prev_gap + 1e-15, "q={q} n={n}");
                prev_gap = gap;
            }
            // for q = 2 the top bins r close to n converge slowly
            let d = exact_distribution(8, q);
            let low = (0..=4).map(|r| (num_traits::ToPrimitive::to_f64(&d[r]).unwrap() - limit[r]).abs()).fold(0.0, f64::max);
            assert!(low < 1e-3, "q={q}: {low}");
            assert!(q == 2 || prev_gap < 1e-3, "q={q}: {prev_gap}");
        }
    }

    #[test]
    fn montecarlo_is_deterministic() {
        let a = montecarlo(4, 3, 5000, 11).unwrap();
        let b = montecarlo(4, 3, 5000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 5000);
        assert_ne!(a, montecarlo(4, 3, 5000, 12).unwrap());
        let expected = invertible_fraction(4, 3);
        let sigma = (expected * (1.0 - expected) / a.draws as f64).sqrt();
        assert!((a.acceptance_rate() - expected).abs() < 3.0 * sigma + 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn distributions_are_normalised(n in 1usize..9, qi in 0usize..6) {
            let q = [2u64, 3, 4, 5, 7, 9][qi];
            prop_assert_eq!(total(&exact_distribution(n, q)), BigRational::one());
        }

        #[test]
        fn degree_is_conjugation_invariant(seed in any::<u64>(), n in 1usize..7, qi in 0usize..4) {
            let q = [2u64, 3, 4, 5][qi];
            let fq = Fq::new(q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, _) = FqMatrix::random_invertible(n, &fq, &mut rng);
            let (s, _) = FqMatrix::random_invertible(n, &fq, &mut rng);
            let si = s.inverse(&fq).unwrap();
            prop_assert_eq!(s.mul(&si, &fq), FqMatrix::identity(n));
            let conj = s.mul(&a, &fq).mul(&si, &fq);
            prop_assert_eq!(assoc_poly_degree(&conj, &fq).unwrap(), assoc_poly_degree(&a, &fq).unwrap());
        }
    }
}
