//! Dirichlet characters via the CRT decomposition of `(Z/NZ)^*` into cyclic factors.
//!
//! Odd prime powers contribute one cyclic factor generated by the smallest
//! primitive root; `2^e` contributes `<-1>` (for `e >= 2`) and `<5>` (for `e >= 3`).
//! A character is an exponent vector `(e_1, ..., e_r)` sending generator `g_j`
//! to `exp(2 pi i e_j / ord_j)`. Labels read `N.e1.e2...`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;

use crate::arith::{checked_pow, factorize, gcd, inv_mod, lcm, multiplicative_order, smallest_primitive_root};
use crate::cyclotomic::{root_of_unity_power, CycRational};
use crate::error::{domain, Error, Result};
use crate::padic::{teichmuller, UnramifiedElem, UnramifiedField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FactorKind {
    /// `(Z/q^e)^*` with a primitive root.
    Odd { g: u64 },
    /// The `<-1>` part of `(Z/2^e)^*`.
    Sign,
    /// The `<5>` part of `(Z/2^e)^*`.
    Five,
}

/// One cyclic factor of `(Z/NZ)^*`.
#[derive(Clone, Debug)]
pub struct CyclicFactor {
    kind: FactorKind,
    /// The prime `q` of the prime-power component this factor lives in.
    pub prime: u64,
    /// The prime-power modulus `q^e` of that component.
    pub prime_power: u64,
    pub exponent: u32,
    /// Order of the cyclic factor.
    pub order: u64,
    /// Discrete logarithm table indexed by residues modulo `prime_power`.
    dlog: Vec<u32>,
}

impl CyclicFactor {
    /// Generator as an integer modulo the prime power.
    pub fn generator(&self) -> u64 {
        match self.kind {
            FactorKind::Odd { g } => g,
            FactorKind::Sign => self.prime_power - 1,
            FactorKind::Five => 5,
        }
    }

    fn log(&self, a: u64) -> u32 {
        self.dlog[(a % self.prime_power) as usize]
    }
}

const NO_LOG: u32 = u32::MAX;

/// The group `(Z/NZ)^*` with its cyclic decomposition and discrete-log tables.
#[derive(Debug)]
pub struct CharGroup {
    modulus: u64,
    factors: Vec<CyclicFactor>,
}

impl CharGroup {
    /// The (memoised) group for modulus `n >= 1`.
    pub fn new(n: u64) -> Arc<CharGroup> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CharGroup>>>> = OnceLock::new();
        assert!(n >= 1, "modulus must be positive");
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.lock().unwrap().get(&n) {
            return g.clone();
        }
        let group = Arc::new(Self::build(n));
        let mut lock = cache.lock().unwrap();
        if lock.len() > 4096 {
            lock.clear();
        }
        lock.insert(n, group.clone());
        group
    }

    fn build(n: u64) -> CharGroup {
        let mut factors = Vec::new();
        for (q, e) in factorize(n) {
            let qe = checked_pow(q, e).unwrap();
            if q == 2 {
                if e >= 2 {
                    let mut sign = vec![NO_LOG; qe as usize];
                    let mut five = vec![NO_LOG; qe as usize];
                    let five_order = if e >= 3 { qe / 4 } else { 1 };
                    let mut x = 1u64;
                    for t in 0..five_order {
                        sign[x as usize] = 0;
                        sign[(qe - x) as usize] = 1;
                        five[x as usize] = t as u32;
                        five[(qe - x) as usize] = t as u32;
                        x = x * 5 % qe;
                    }
                    factors.push(CyclicFactor { kind: FactorKind::Sign, prime: 2, prime_power: qe, exponent: e, order: 2, dlog: sign });
                    if e >= 3 {
                        factors.push(CyclicFactor { kind: FactorKind::Five, prime: 2, prime_power: qe, exponent: e, order: five_order, dlog: five });
                    }
                }
            } else {
                let g = smallest_primitive_root(q, e);
                let order = qe / q * (q - 1);
                let mut dlog = vec![NO_LOG; qe as usize];
                let mut x = 1u64;
                for t in 0..order {
                    dlog[x as usize] = t as u32;
                    x = x * g % qe;
                }
                factors.push(CyclicFactor { kind: FactorKind::Odd { g }, prime: q, prime_power: qe, exponent: e, order, dlog });
            }
        }
        CharGroup { modulus: n, factors }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    /// `phi(N)`, the number of characters.
    pub fn order(&self) -> u64 {
        self.factors.iter().map(|f| f.order).product()
    }

    /// Discrete logarithms of `a` with respect to each factor, or `None` if `gcd(a, N) > 1`.
    pub fn dlogs(&self, a: i64) -> Option<Vec<u64>> {
        let a = a.rem_euclid(self.modulus as i64) as u64;
        if gcd(a, self.modulus) != 1 {
            return None;
        }
        Some(self.factors.iter().map(|f| f.log(a) as u64).collect())
    }

    /// An integer that is the generator of factor `j` and trivial in every other factor.
    pub fn lift_generator(&self, j: usize) -> u64 {
        let target = &self.factors[j];
        let mut a = 0u64;
        let mut m = 1u64;
        let mut seen_two = false;
        for f in &self.factors {
            if f.prime == 2 {
                if seen_two {
                    continue;
                }
                seen_two = true;
            }
            let residue = if f.prime == target.prime { target.generator() } else { 1 };
            a = crt(a, m, residue, f.prime_power);
            m *= f.prime_power;
        }
        a
    }

    /// All characters in lexicographic exponent order.
    pub fn characters(self: &Arc<Self>) -> impl Iterator<Item = DirichletChar> + '_ {
        let orders: Vec<u64> = self.factors.iter().map(|f| f.order).collect();
        let total = self.order();
        (0..total).map(move |mut idx| {
            let mut exps = vec![0u64; orders.len()];
            for j in (0..orders.len()).rev() {
                exps[j] = idx % orders[j];
                idx /= orders[j];
            }
            DirichletChar::from_exponents_unchecked(self.clone(), exps)
        })
    }

    /// Primitive characters of exact order `order` (lexicographic exponent order).
    pub fn primitive_characters_of_order(self: &Arc<Self>, order: u64) -> Vec<DirichletChar> {
        if !self.admits_primitive() || self.exponent() % order != 0 {
            return Vec::new();
        }
        self.characters().filter(|c| c.order() == order && c.is_primitive()).collect()
    }

    /// Whether any primitive character exists modulo `N`.
    pub fn admits_primitive(&self) -> bool {
        self.modulus % 4 != 2
    }

    /// Exponent of the group (lcm of the factor orders).
    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |acc, f| lcm(acc, f.order))
    }
}

fn crt(a: u64, m: u64, b: u64, n: u64) -> u64 {
    if m == 1 {
        return b % n;
    }
    let inv = inv_mod(m % n, n).expect("coprime moduli");
    let t = ((b as i128 - a as i128).rem_euclid(n as i128) as u64) * inv % n;
    a + m * t
}

/// A Dirichlet character, with order, conductor and parity cached.
#[derive(Clone)]
pub struct DirichletChar {
    group: Arc<CharGroup>,
    exps: Vec<u64>,
    order: u64,
    conductor: u64,
    even: bool,
}

impl DirichletChar {
    pub fn new(group: Arc<CharGroup>, exps: Vec<u64>) -> Result<Self> {
        if exps.len() != group.factors.len() {
            return domain(format!(
                "modulus {} needs {} exponents, got {}",
                group.modulus,
                group.factors.len(),
                exps.len()
            ));
        }
        for (e, f) in exps.iter().zip(&group.factors) {
            if *e >= f.order {
                return domain(format!("exponent {e} out of range for a factor of order {}", f.order));
            }
        }
        Ok(Self::from_exponents_unchecked(group, exps))
    }

    fn from_exponents_unchecked(group: Arc<CharGroup>, exps: Vec<u64>) -> Self {
        let mut order = 1u64;
        let mut conductor = 1u64;
        let mut odd = false;
        let mut two_cond = 1u64;
        for (e, f) in exps.iter().zip(&group.factors) {
            let o = f.order / gcd(f.order, *e);
            order = lcm(order, o);
            match f.kind {
                FactorKind::Odd { .. } => {
                    if o > 1 {
                        conductor *= checked_pow(f.prime, crate::arith::valuation(o * f.prime, f.prime)).unwrap();
                    }
                    if e % 2 == 1 {
                        odd = !odd;
                    }
                }
                FactorKind::Sign => {
                    if *e == 1 {
                        odd = !odd;
                        two_cond = two_cond.max(4);
                    }
                }
                FactorKind::Five => {
                    if o > 1 {
                        two_cond = two_cond.max(checked_pow(2, crate::arith::valuation(o, 2) + 2).unwrap());
                    }
                }
            }
        }
        conductor *= two_cond;
        Self { group, exps, order, conductor, even: !odd }
    }

    /// The trivial character modulo `n`.
    pub fn trivial(n: u64) -> Self {
        let group = CharGroup::new(n);
        let exps = vec![0; group.factors.len()];
        Self::from_exponents_unchecked(group, exps)
    }

    /// Parses a label `N.e1.e2...`.
    pub fn parse(label: &str) -> Result<Self> {
        let mut parts = label.trim().split('.');
        let n: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Parse(format!("bad character label '{label}'")))?;
        let exps: Vec<u64> = parts
            .map(|s| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad exponent '{s}' in '{label}'"))))
            .collect::<Result<_>>()?;
        Self::new(CharGroup::new(n), exps)
    }

    pub fn label(&self) -> String {
        let mut s = self.group.modulus.to_string();
        for e in &self.exps {
            s.push('.');
            s.push_str(&e.to_string());
        }
        s
    }

    pub fn group(&self) -> &Arc<CharGroup> {
        &self.group
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// `k` with `chi(a) = zeta_m^k` where `m` is the order, or `None` when `gcd(a, N) > 1`.
    pub fn exponent_at(&self, a: i64) -> Option<u64> {
        let logs = self.group.dlogs(a)?;
        let m = self.order;
        let mut k = 0u64;
        for ((e, l), f) in self.exps.iter().zip(logs).zip(&self.group.factors) {
            // e * l * m / ord_j, computed without overflow
            let step = (*e as u128 * m as u128 / f.order as u128) as u64 % m;
            k = ((k as u128 + step as u128 * l as u128) % m as u128) as u64;
        }
        Some(k)
    }

    /// `chi(a)` as an element of `Q(zeta_m)`, `m` the order.
    pub fn evaluate(&self, a: i64) -> CycRational {
        match self.exponent_at(a) {
            Some(k) => root_of_unity_power(self.order, k as i64),
            None => CycRational::zero(self.order),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.group.modulus != other.group.modulus {
            return domain("characters of different moduli");
        }
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .zip(&self.group.factors)
            .map(|((a, b), f)| (a + b) % f.order)
            .collect();
        Ok(Self::from_exponents_unchecked(self.group.clone(), exps))
    }

    pub fn pow(&self, k: u64) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(&self.group.factors)
            .map(|(a, f)| ((*a as u128 * k as u128) % f.order as u128) as u64)
            .collect();
        Self::from_exponents_unchecked(self.group.clone(), exps)
    }

    pub fn conj(&self) -> Self {
        self.pow(self.order - 1)
    }

    /// Builds the character of `group` whose value at integers `a` coprime to the
    /// group modulus is `zeta_M^{value(a)}`.
    fn from_values(group: Arc<CharGroup>, big_m: u64, value: impl Fn(u64) -> u64) -> Result<Self> {
        let mut exps = Vec::with_capacity(group.factors.len());
        for (j, f) in group.factors.iter().enumerate() {
            let k = value(group.lift_generator(j)) as u128;
            let num = k * f.order as u128;
            if num % big_m as u128 != 0 {
                return Err(Error::Inconsistent("character does not factor through the target group".into()));
            }
            exps.push((num / big_m as u128 % f.order as u128) as u64);
        }
        Ok(Self::from_exponents_unchecked(group, exps))
    }

    /// The primitive character inducing `self`, living modulo the conductor.
    pub fn primitive(&self) -> Self {
        if self.is_primitive() {
            return self.clone();
        }
        let cond = self.conductor;
        let n = self.group.modulus;
        Self::from_values(CharGroup::new(cond), self.order, |a| {
            let mut b = a;
            while gcd(b, n) != 1 {
                b += cond;
            }
            self.exponent_at(b as i64).expect("coprime lift")
        })
        .expect("a character factors through its conductor")
    }

    /// The character modulo `n` (a multiple of the conductor) induced by `self`.
    pub fn induce(&self, n: u64) -> Result<Self> {
        if n % self.conductor != 0 {
            return domain(format!("{n} is not a multiple of the conductor {}", self.conductor));
        }
        let prim = self.primitive();
        let cond = self.conductor;
        Self::from_values(CharGroup::new(n), self.order, |a| {
            prim.exponent_at((a % cond) as i64).expect("coprime to the conductor")
        })
    }

    /// Whether two characters agree on all integers coprime to both moduli.
    pub fn same_primitive(&self, other: &Self) -> bool {
        let (a, b) = (self.primitive(), other.primitive());
        a.modulus() == b.modulus() && a.exps == b.exps
    }
}

impl PartialEq for DirichletChar {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exps == other.exps
    }
}

impl Eq for DirichletChar {}

impl std::hash::Hash for DirichletChar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.group.modulus.hash(state);
        self.exps.hash(state);
    }
}

impl fmt::Debug for DirichletChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletChar({})", self.label())
    }
}

impl fmt::Display for DirichletChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Primitive characters of exact order `order` with conductor in `[lo, hi)`,
/// ordered by conductor and then label.
pub fn primitive_characters(order: u64, lo: u64, hi: u64) -> Vec<DirichletChar> {
    (lo.max(1)..hi)
        .flat_map(|n| CharGroup::new(n).primitive_characters_of_order(order))
        .collect()
}

/// The character `chi = theta * omega^i` for an odd prime `p`.
#[derive(Clone, Debug)]
pub struct TwistedChar {
    pub theta: DirichletChar,
    pub i: u64,
    pub p: u64,
}

impl TwistedChar {
    /// `theta` is replaced by its primitive version; `i` is taken modulo `p - 1`.
    pub fn new(theta: &DirichletChar, i: u64, p: u64) -> Result<Self> {
        if p == 2 || !crate::arith::is_prime(p) {
            return domain(format!("{p} is not an odd prime"));
        }
        let theta = theta.primitive();
        if theta.conductor() % p == 0 {
            return domain(format!("p = {p} divides the conductor of {theta}"));
        }
        Ok(Self { theta, i: i % (p - 1), p })
    }

    pub fn is_even(&self) -> bool {
        self.theta.is_even() == (self.i % 2 == 0)
    }

    /// `chi` is the trivial character (the excluded pole case).
    pub fn is_trivial(&self) -> bool {
        self.theta.is_trivial() && self.i == 0
    }

    /// `i = 1 (mod p-1)`, `theta` odd and `theta(p) = 1`.
    pub fn has_trivial_zero(&self) -> bool {
        self.i == 1 % (self.p - 1)
            && !self.theta.is_even()
            && self.theta.exponent_at(self.p as i64) == Some(0)
    }

    /// Order of `theta * omega^i`.
    pub fn order(&self) -> u64 {
        let w = (self.p - 1) / gcd(self.i, self.p - 1);
        lcm(self.theta.order(), w)
    }

    /// Residue degree of `Z_p[chi]`, the order of `p` modulo `ord(theta)`.
    pub fn residue_degree(&self) -> u64 {
        let m = self.theta.order();
        if m == 1 {
            1
        } else {
            multiplicative_order(self.p % m, m)
        }
    }

    pub fn label(&self) -> String {
        format!("{}*w^{}@{}", self.theta.label(), self.i, self.p)
    }
}

/// `theta(a) * omega(a)^i` as an element of the extension built for `ord(theta)`.
pub fn evaluate_twist_padic(chi: &TwistedChar, a: i64, field: &Arc<UnramifiedField>) -> Result<UnramifiedElem> {
    let k = field.precision();
    let zero = UnramifiedElem::zero(field.clone(), k as i64);
    if a.rem_euclid(chi.p as i64) == 0 {
        return Ok(zero);
    }
    let Some(e) = chi.theta.exponent_at(a) else {
        return Ok(zero);
    };
    let w = teichmuller(&BigInt::from(a), chi.p, k)?.pow(chi.i);
    Ok(field.zeta_power(e as i64).mul_scalar(&w))
}
