//! Predictions of the random-matrix model and sums of them over primes.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::arith::{gcd, multiplicative_order, euler_phi};
use crate::error::{Error, Result};
use crate::real::HiReal;
use crate::rmt::rho;

/// `prod_{t >= 1} (1 - y^t)` by Euler's pentagonal series with `terms` values of `k`.
pub fn pentagonal_product(y: &HiReal, terms: usize) -> HiReal {
    let mut acc = HiReal::one();
    for k in 1..=terms as u64 {
        let a = y.pow((3 * k * k - k) / 2);
        let b = y.pow((3 * k * k + k) / 2);
        if a.is_zero() && b.is_zero() {
            break;
        }
        let s = &a + &b;
        acc = if k % 2 == 1 { &acc - &s } else { &acc + &s };
    }
    acc
}

/// `prod_{t=1}^{terms} (1 - y^t)`.
pub fn direct_product(y: &HiReal, terms: usize) -> HiReal {
    let mut acc = HiReal::one();
    let mut yt = y.clone();
    for _ in 0..terms {
        acc = &acc - &(&acc * &yt);
        yt = &yt * y;
    }
    acc
}

/// `rho(q, r)` through the pentagonal series:
/// `q^(-r) * P(1/q) / prod_{t <= r} (1 - q^(-t))`.
pub fn rho_pentagonal(q: u64, r: u32) -> HiReal {
    let y = HiReal::recip_int(&BigInt::from(q));
    let full = pentagonal_product(&y, 64);
    let head = direct_product(&y, r as usize);
    // divide full by head with a Newton step on the fixed-point reciprocal
    let head_f = head.to_f64();
    let mut inv = HiReal::from_f64(1.0 / head_f);
    let two = HiReal::from_int(2);
    for _ in 0..4 {
        inv = &inv * &(&two - &(&head * &inv));
    }
    &(&full * &inv) * &y.pow(r as u64)
}

/// `(f, [rho(p^f, r) for r in 0..=r_max])` with `f` the order of `p` mod `m`.
pub fn predicted_lambda_distribution(p: u64, m: u64, r_max: u32) -> Result<(u64, Vec<HiReal>)> {
    if m == 0 || m % p == 0 {
        return Err(Error::Ramified { p, m });
    }
    let f = if m == 1 { 1 } else { multiplicative_order(p % m, m) };
    let q = p
        .checked_pow(f as u32)
        .ok_or_else(|| Error::Budget(format!("{p}^{f} overflows")))?;
    Ok((f, (0..=r_max).map(|r| rho(q, r)).collect()))
}

/// `1 + (e^(-1/2) - 1) / phi(m)`.
pub fn predicted_regular_proportion(m: u64) -> f64 {
    1.0 + ((-0.5f64).exp() - 1.0) / euler_phi(m) as f64
}

/// `exp(-prod gcd(m_i, p-1) / 2)`, or with `assume_p_regular` and a cyclic
/// group of order `m`, `exp(-(gcd(m, p-1) - 1) / 2)`.
pub fn predicted_field_regular(m_list: &[u64], p: u64, assume_p_regular: bool) -> Result<f64> {
    if m_list.iter().any(|&m| m % p == 0) {
        return Err(Error::Ramified { p, m: m_list.iter().product() });
    }
    if assume_p_regular {
        if m_list.len() != 1 {
            return Err(Error::Domain("the Q-regular refinement is stated for cyclic groups only".into()));
        }
        let g = gcd(m_list[0], p - 1) as f64;
        return Ok((-(g - 1.0) / 2.0).exp());
    }
    Ok((-(split_character_count(m_list, p) as f64) / 2.0).exp())
}

/// Characters of `prod Z/m_i` whose values generate a field in which `p` splits
/// completely: `prod gcd(m_i, p-1)`.
pub fn split_character_count(m_list: &[u64], p: u64) -> u64 {
    m_list.iter().map(|&m| gcd(m, p - 1)).product()
}

/// Primes up to a bound.
#[derive(Clone, Debug)]
pub struct PrimeSieve {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeSieve {
    pub fn new(bound: u64) -> Self {
        let n = bound as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        Self { bound, primes }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `pi(x)` for `x <= bound`.
    pub fn pi(&self, x: u64) -> usize {
        assert!(x <= self.bound, "pi({x}) beyond the sieve bound {}", self.bound);
        self.primes.partition_point(|&p| p <= x)
    }

    /// Primes `p <= x` with `p = a (mod m)`.
    pub fn in_class(&self, x: u64, m: u64, a: u64) -> impl Iterator<Item = u64> + '_ {
        let a = a % m;
        self.primes[..self.pi(x)].iter().copied().filter(move |p| p % m == a)
    }
}

/// An exact finite sum with the leading term the model predicts for it.
#[derive(Clone, Debug)]
pub struct PrimeSum {
    pub value: HiReal,
    /// Number of primes that contributed.
    pub terms: usize,
    pub predicted: Option<f64>,
}

/// `sum_{p <= x, p = a (mod m)} rho(p^f, r)`.
pub fn partial_sum_rho(sieve: &PrimeSieve, x: u64, m: u64, a: u64, f: u32, r: u32) -> Result<PrimeSum> {
    if gcd(a, m) != 1 {
        return Err(Error::Domain(format!("gcd({a}, {m}) != 1")));
    }
    let ps: Vec<u64> = if x < 2 { Vec::new() } else { sieve.in_class(x, m, a).collect() };
    let value = parallel_sum(&ps, |p| rho(p.pow(f), r));
    let terms = ps.len();
    let predicted = (x >= 3).then(|| {
        let phi = euler_phi(m) as f64;
        let pi = if x < 2 { 0.0 } else { sieve.pi(x) as f64 };
        let ll = (x as f64).ln().ln();
        match (f, r) {
            (1, 0) => Some((pi - ll) / phi),
            (1, 1) => Some(ll / phi),
            (_, 0) => Some(pi / phi),
            _ => None,
        }
    });
    Ok(PrimeSum { value, terms, predicted: predicted.flatten() })
}

/// Sums `term(p)` over blocks in parallel; fixed-point addition is exact, so
/// the result does not depend on the schedule.
fn parallel_sum(ps: &[u64], term: impl Fn(u64) -> HiReal + Sync) -> HiReal {
    ps.par_chunks(256)
        .map(|chunk| chunk.iter().fold(HiReal::zero(), |acc, &p| &acc + &term(p)))
        .collect::<Vec<_>>()
        .iter()
        .fold(HiReal::zero(), |acc, x| &acc + x)
}

#[derive(Clone, Debug)]
pub struct TotThmSum {
    pub sum: HiReal,
    pub pi_x: usize,
    /// `sum / pi(x)`.
    pub ratio: f64,
    /// `(phi(m) + e^(-1/2) - 1) / phi(m)`.
    pub predicted: f64,
}

/// `sum rho(p^(f_p), 0)^((p-1)/2)` over odd primes `p <= x` with `p !| m`,
/// where `f_p` is the order of `p` modulo `m`.
pub fn tot_thm_sum(sieve: &PrimeSieve, x: u64, m: u64) -> TotThmSum {
    let ps: Vec<u64> = if x < 3 {
        Vec::new()
    } else {
        sieve.primes()[..sieve.pi(x)].iter().copied().filter(|&p| p > 2 && m % p != 0).collect()
    };
    let sum = parallel_sum(&ps, |p| {
        let f = if m == 1 { 1 } else { multiplicative_order(p % m, m) };
        rho(p.pow(f as u32), 0).pow((p - 1) / 2)
    });
    let pi_x = if x < 2 { 0 } else { sieve.pi(x) };
    let ratio = if pi_x == 0 { 0.0 } else { sum.to_f64() / pi_x as f64 };
    TotThmSum { sum, pi_x, ratio, predicted: predicted_regular_proportion(m) }
}

/// `sum_{p <= x, p = a (mod m)} p^(-s)`, accumulated in increasing `p`.
pub fn hurwitz_prime_zeta_partial(sieve: &PrimeSieve, s: f64, m: u64, a: u64, x: u64) -> Result<f64> {
    if s <= 1.0 {
        return Err(Error::Domain(format!("s = {s} must exceed 1")));
    }
    if x < 2 {
        return Ok(0.0);
    }
    Ok(sieve.in_class(x, m, a).map(|p| (p as f64).powf(-s)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::CharGroup;

    fn close(a: &HiReal, b: &HiReal, tol: f64) -> bool {
        (a - b).abs().to_f64() < tol
    }

    #[test]
    fn pentagonal_matches_product() {
        for q in [2i64, 3, 5, 7, 9, 25, 121] {
            let y = HiReal::from_ratio(&1.into(), &q.into());
            assert!(close(&pentagonal_product(&y, 40), &direct_product(&y, 400), 1e-12), "1/{q}");
        }
        let tiny = HiReal::from_ratio(&1.into(), &BigInt::from(10).pow(30));
        assert!(close(&pentagonal_product(&tiny, 10), &HiReal::one(), 1e-25));
        let third = HiReal::from_ratio(&1.into(), &3.into());
        assert_eq!((pentagonal_product(&third, 20).to_f64() * 1e4).round() / 1e4, 0.5601);
        let ninth = HiReal::from_ratio(&1.into(), &9.into());
        assert_eq!((pentagonal_product(&ninth, 20).to_f64() * 1e4).round() / 1e4, 0.8766);
    }

    #[test]
    fn both_rho_routes_agree() {
        for q in [2u64, 3, 5, 9, 11, 121] {
            for r in 0..8 {
                assert!(close(&rho(q, r), &rho_pentagonal(q, r), 1e-12), "q={q} r={r}");
            }
        }
    }

    #[test]
    fn predicted_rows() {
        let row = |p, m, n| {
            let (f, v) = predicted_lambda_distribution(p, m, n).unwrap();
            (f, v.iter().map(|x| (x.to_f64() * 1e4).round() / 1e4).collect::<Vec<_>>())
        };
        assert_eq!(row(7, 3, 3), (1, vec![0.8368, 0.1395, 0.0203, 0.0029]));
        assert_eq!(row(13, 3, 2), (1, vec![0.9172, 0.0764, 0.0059]));
        assert_eq!(row(11, 3, 1), (2, vec![0.9917, 0.0083]));
        assert!(predicted_lambda_distribution(3, 3, 1).is_err());
    }

    #[test]
    fn conjecture_numbers() {
        assert_eq!((predicted_regular_proportion(2) * 1e4).round() / 1e4, 0.6065);
        assert!((predicted_regular_proportion(1) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((predicted_regular_proportion(3) - 0.8033).abs() < 1e-4);
        assert!((predicted_field_regular(&[2], 11, false).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((predicted_field_regular(&[3], 7, false).unwrap() - (-1.5f64).exp()).abs() < 1e-15);
        assert!((predicted_field_regular(&[3], 5, false).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((predicted_field_regular(&[3], 7, true).unwrap() - 0.3679).abs() < 1e-4);
        assert!(predicted_field_regular(&[3], 3, false).is_err());
    }

    /// Characters of `prod Z/m_i` with values in `F_p`, counted one by one.
    fn brute_split_count(m_list: &[u64], p: u64) -> u64 {
        let mut count = 0;
        let total: u64 = m_list.iter().product();
        for idx in 0..total {
            let mut rest = idx;
            let mut order = 1;
            for &m in m_list {
                let e = rest % m;
                rest /= m;
                order = crate::arith::lcm(order, m / gcd(e, m));
            }
            if (p - 1) % order == 0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn split_counts() {
        assert_eq!(split_character_count(&[7], 29), 7);
        assert_eq!(split_character_count(&[8], 5), 4);
        assert_eq!(split_character_count(&[2, 2], 7), 4);
        let lists: Vec<Vec<u64>> = (2..=200)
            .map(|m| vec![m])
            .chain((2..=14).flat_map(|a| (2..=14).map(move |b| vec![a, b])))
            .filter(|l| l.iter().product::<u64>() <= 200)
            .collect();
        let sieve = PrimeSieve::new(50);
        for l in &lists {
            for &p in sieve.primes() {
                if l.iter().any(|&m| m % p == 0) {
                    continue;
                }
                assert_eq!(split_character_count(l, p), brute_split_count(l, p), "{l:?} p={p}");
            }
        }
        // residue degree through actual Dirichlet characters: cyclic group of order 12 mod 13
        let g = CharGroup::new(13);
        let split = g.characters().filter(|c| (29 - 1) % c.order() == 0).count() as u64;
        assert_eq!(split, split_character_count(&[12], 29));
    }

    #[test]
    fn sieve_and_sums() {
        let sieve = PrimeSieve::new(100_000);
        assert_eq!(sieve.pi(100), 25);
        assert_eq!(sieve.pi(100_000), 9592);
        let s = partial_sum_rho(&sieve, 100, 1, 0, 1, 0).unwrap();
        let direct = sieve.primes()[..25].iter().fold(HiReal::zero(), |acc, &p| &acc + &rho(p, 0));
        assert_eq!(s.value, direct);
        assert_eq!(s.terms, 25);
        assert!(partial_sum_rho(&sieve, 1, 1, 0, 1, 0).unwrap().value.is_zero());
        let s = partial_sum_rho(&sieve, 100_000, 3, 1, 1, 0).unwrap();
        let rel = (s.value.to_f64() - s.predicted.unwrap()).abs() / s.predicted.unwrap();
        assert!(rel < 0.02, "{rel}");
        // bounded for f >= 2 and r = 1
        let lo = partial_sum_rho(&sieve, 1000, 3, 2, 2, 1).unwrap().value.to_f64();
        let hi = partial_sum_rho(&sieve, 100_000, 3, 2, 2, 1).unwrap().value.to_f64();
        assert!(hi - lo < 0.05);
    }

    #[test]
    fn tot_thm_ratios() {
        let sieve = PrimeSieve::new(100_000);
        for m in [1u64, 2] {
            let t = tot_thm_sum(&sieve, 100_000, m);
            assert!((t.ratio - (-0.5f64).exp()).abs() < 0.01, "m={m}: {}", t.ratio);
        }
        let t = tot_thm_sum(&sieve, 100_000, 3);
        assert!((t.ratio - 0.8033).abs() < 0.02);
        assert!(tot_thm_sum(&sieve, 2, 1).sum.is_zero());
    }

    #[test]
    fn prime_zeta() {
        let sieve = PrimeSieve::new(1000);
        assert_eq!(hurwitz_prime_zeta_partial(&sieve, 2.0, 1, 0, 1).unwrap(), 0.0);
        let oracle: f64 = (2..=1000u64)
            .filter(|&n| crate::arith::is_prime(n))
            .map(|p| 1.0 / (p as f64 * p as f64))
            .sum();
        let got = hurwitz_prime_zeta_partial(&sieve, 2.0, 1, 0, 1000).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        let mut prev = 0.0;
        for x in (0..1000).step_by(37) {
            let v = hurwitz_prime_zeta_partial(&sieve, 1.5, 4, 1, x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(hurwitz_prime_zeta_partial(&sieve, 1.0, 1, 0, 10).is_err());
    }
}
