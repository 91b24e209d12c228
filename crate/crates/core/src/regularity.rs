//! Generalised regularity: `p` is `chi`-regular when every even twist
//! `chi * omega^j` has corrected lambda-invariant zero.
//!
//! The verdict itself only needs Bernoulli numbers modulo a prime above `p`;
//! [`lambda_tot`] recomputes the same information through the lambda engine.

use std::collections::BTreeMap;
use std::fmt;

use crate::arith::{gcd, lcm};
use crate::bernoulli::{generalized_bernoulli_padic, BernoulliCache};
use crate::dirichlet::{DirichletChar, TwistedChar};
use crate::error::{Error, Result};
use crate::lambda::{lambda_crosscheck_twists, LambdaParams, LambdaValue};
use crate::padic::build_extension;

/// Digits of `B_{n,theta}` examined; valuations are reported up to this cap.
pub const WITNESS_DIGITS: u32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub n: u32,
    /// `v(B_{n,theta})`, capped at [`WITNESS_DIGITS`].
    pub valuation: u32,
    /// The valuation is only a lower bound (the value vanished to the digits kept).
    pub at_least: bool,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.at_least { ">=" } else { "" };
        write!(f, "{}:{}{}", self.n, rel, self.valuation)
    }
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub theta: DirichletChar,
    pub p: u64,
    pub f: u64,
    pub regular: bool,
    pub witnesses: Vec<Witness>,
    /// `theta` is odd with `theta(p) = 1`: the twist by `omega` has a trivial
    /// zero, and `n = 1` is still tested.
    pub trivial_zero: bool,
}

impl RegularityReport {
    pub fn verdict(&self) -> &'static str {
        if self.regular {
            "regular"
        } else {
            "irregular"
        }
    }

    /// Witnesses as `n:v` separated by commas.
    pub fn witness_list(&self) -> String {
        self.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn check_prime(theta: &DirichletChar, p: u64) -> Result<()> {
    if p == 2 || !crate::arith::is_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    if theta.conductor() % p == 0 {
        return Err(Error::Domain(format!("p = {p} divides the conductor of {theta}")));
    }
    if theta.order() % p == 0 {
        return Err(Error::Ramified { p, m: theta.order() });
    }
    Ok(())
}

/// The indices `n` tested for `theta` at `p`: `2..=p-1` for even `theta`,
/// `1..=p-2` for odd, keeping the parity of `theta` (other `B_{n,theta}`
/// vanish). For trivial `theta` the pole index `n = p-1` is skipped.
pub fn tested_indices(theta: &DirichletChar, p: u64) -> Vec<u32> {
    let (lo, hi) = if theta.is_even() { (2, p - 1) } else { (1, p - 2) };
    let parity = if theta.is_even() { 0 } else { 1 };
    (lo..=hi)
        .filter(|n| n % 2 == parity)
        .filter(|&n| !(theta.is_trivial() && n == p - 1))
        .map(|n| n as u32)
        .collect()
}

/// Whether `p` divides none of the tested `B_{n,theta}`.
pub fn is_chi_regular(theta: &DirichletChar, p: u64) -> Result<RegularityReport> {
    let theta = theta.primitive();
    check_prime(&theta, p)?;
    let m = theta.order();
    let ns = tested_indices(&theta, p);
    let field = build_extension(p, m, WITNESS_DIGITS + 1)?;
    let values = generalized_bernoulli_padic(&theta, &ns, &field, WITNESS_DIGITS)?;
    let mut witnesses = Vec::new();
    for (n, b) in ns.iter().zip(&values) {
        let v = b.valuation();
        if v < 0 && !b.is_zero() {
            return Err(Error::NonIntegral(format!("B_{{{n},{theta}}} at p = {p}")));
        }
        if v > 0 || b.is_zero() {
            let v = v.clamp(0, WITNESS_DIGITS as i64) as u32;
            witnesses.push(Witness { n: *n, valuation: v, at_least: b.is_zero() });
        }
    }
    let tz = TwistedChar::new(&theta, 1, p)?;
    Ok(RegularityReport {
        f: tz.residue_degree(),
        trivial_zero: tz.has_trivial_zero(),
        regular: witnesses.is_empty(),
        witnesses,
        theta,
        p,
    })
}

/// Ernvall-style regularity: every Galois conjugate of `theta` must be regular.
pub fn is_chi_regular_strict(theta: &DirichletChar, p: u64) -> Result<Vec<RegularityReport>> {
    let m = theta.order();
    (1..=m.max(1))
        .filter(|&a| gcd(a, m) == 1)
        .map(|a| is_chi_regular(&theta.pow(a), p))
        .collect()
}

/// `lambda_tot(theta)` and its summands `lambda^corr(theta * omega^j)`.
#[derive(Clone, Debug)]
pub struct LambdaTot {
    pub total: LambdaValue,
    pub contributions: Vec<(u64, LambdaValue)>,
}

fn add_values(a: LambdaValue, b: LambdaValue) -> LambdaValue {
    match (a, b) {
        (LambdaValue::Exact(x), LambdaValue::Exact(y)) => LambdaValue::Exact(x + y),
        _ => LambdaValue::AtLeast(a.floor() + b.floor()),
    }
}

/// Sum of corrected lambda-invariants over the even twists of `theta`
/// (excluding the trivial character), each cross-checked.
pub fn lambda_tot(theta: &DirichletChar, p: u64, params: &LambdaParams, cache: &BernoulliCache) -> Result<LambdaTot> {
    let theta = theta.primitive();
    check_prime(&theta, p)?;
    let parity = if theta.is_even() { 0 } else { 1 };
    let twists: Vec<u64> = (0..p - 1)
        .filter(|j| j % 2 == parity)
        .filter(|&j| !(theta.is_trivial() && j == 0))
        .collect();
    let mut total = LambdaValue::Exact(0);
    let mut contributions = Vec::with_capacity(twists.len());
    for (j, r) in twists.iter().zip(lambda_crosscheck_twists(&theta, p, &twists, params, cache)) {
        let r = r?;
        total = add_values(total, r.lambda_corr);
        contributions.push((*j, r.lambda_corr));
    }
    Ok(LambdaTot { total, contributions })
}

/// A totally real abelian field given by even characters generating its
/// character group.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    generators: Vec<DirichletChar>,
    orders: Vec<u64>,
    characters: Vec<DirichletChar>,
    conductor: u64,
}

impl FieldSpec {
    pub fn new(generators: &[DirichletChar]) -> Result<Self> {
        if generators.is_empty() {
            return Ok(Self { generators: Vec::new(), orders: Vec::new(), characters: vec![DirichletChar::trivial(1)], conductor: 1 });
        }
        let gens: Vec<DirichletChar> = generators.iter().map(|g| g.primitive()).collect();
        if let Some(odd) = gens.iter().find(|g| !g.is_even()) {
            return Err(Error::Domain(format!("{odd} is odd, the field would not be totally real")));
        }
        let conductor = gens.iter().fold(1, |acc, g| lcm(acc, g.conductor()));
        let lifted: Vec<DirichletChar> = gens.iter().map(|g| g.induce(conductor)).collect::<Result<_>>()?;
        let orders: Vec<u64> = gens.iter().map(|g| g.order()).collect();
        let mut seen = BTreeMap::new();
        let total: u64 = orders.iter().product();
        for idx in 0..total {
            let mut rest = idx;
            let mut chi = DirichletChar::trivial(conductor);
            for (g, &m) in lifted.iter().zip(&orders) {
                chi = chi.mul(&g.pow(rest % m))?;
                rest /= m;
            }
            let prim = chi.primitive();
            seen.entry((prim.modulus(), prim.label())).or_insert(prim);
        }
        if seen.len() as u64 != total {
            return Err(Error::Domain(format!(
                "generators are dependent: they span {} characters, not {total}",
                seen.len()
            )));
        }
        Ok(Self { generators: gens, orders, characters: seen.into_values().collect(), conductor })
    }

    /// Cyclic field cut out by one even character.
    pub fn cyclic(theta: &DirichletChar) -> Result<Self> {
        Self::new(std::slice::from_ref(theta))
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn degree(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn generators(&self) -> &[DirichletChar] {
        &self.generators
    }

    /// Every character of the Galois group, primitive, trivial included,
    /// ordered by (conductor, label).
    pub fn characters(&self) -> &[DirichletChar] {
        &self.characters
    }

    pub fn label(&self) -> String {
        if self.degree() == 1 {
            return "Q".into();
        }
        self.generators.iter().map(|g| g.label()).collect::<Vec<_>>().join("+")
    }

    fn check_prime(&self, p: u64) -> Result<()> {
        if self.conductor % p == 0 {
            return Err(Error::Domain(format!("p = {p} ramifies in the field {}", self.label())));
        }
        if self.orders.iter().any(|m| m % p == 0) {
            return Err(Error::Ramified { p, m: self.degree() });
        }
        Ok(())
    }
}

/// Sum of [`lambda_tot`] over the characters of the field.
pub fn lambda_tot_field(field: &FieldSpec, p: u64, params: &LambdaParams, cache: &BernoulliCache) -> Result<LambdaValue> {
    field.check_prime(p)?;
    let mut total = LambdaValue::Exact(0);
    for chi in field.characters() {
        total = add_values(total, lambda_tot(chi, p, params, cache)?.total);
    }
    Ok(total)
}

/// `p` is regular for every character of the field.
pub fn is_field_regular(field: &FieldSpec, p: u64) -> Result<bool> {
    field.check_prime(p)?;
    for chi in field.characters() {
        if !is_chi_regular(chi, p)?.regular {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernoulli::{bernoulli, generalized_bernoulli, rational_mod};
    use crate::dirichlet::primitive_characters;

    fn ch(label: &str) -> DirichletChar {
        DirichletChar::parse(label).unwrap()
    }

    #[test]
    fn examples() {
        let r = is_chi_regular(&ch("4.1"), 5).unwrap();
        assert!(r.regular);
        assert!(r.trivial_zero);
        let r = is_chi_regular(&ch("1"), 37).unwrap();
        assert!(!r.regular);
        assert_eq!(r.witnesses.iter().map(|w| w.n).collect::<Vec<_>>(), vec![32]);
        assert_eq!(r.witnesses[0].valuation, 1);
        assert!(is_chi_regular(&ch("1"), 7).unwrap().regular);
        assert!(is_chi_regular(&ch("5.2"), 5).is_err());
        assert!(is_chi_regular(&ch("7.2"), 3).is_err());
    }

    /// Exact rational oracle for quadratic and trivial characters.
    fn exact_verdict(theta: &DirichletChar, p: u64) -> bool {
        tested_indices(theta, p).iter().all(|&n| {
            let b = if theta.is_trivial() { bernoulli(n) } else { generalized_bernoulli(n, theta).as_rational().unwrap().clone() };
            rational_mod(&b, p).is_some_and(|x| x != 0)
        })
    }

    #[test]
    fn modular_matches_exact_rationals() {
        let chars: Vec<DirichletChar> =
            std::iter::once(ch("1")).chain(primitive_characters(2, 1, 60)).collect();
        for theta in &chars {
            for p in [3u64, 5, 7, 11, 13, 37, 59, 67] {
                if theta.conductor() % p == 0 {
                    continue;
                }
                assert_eq!(is_chi_regular(theta, p).unwrap().regular, exact_verdict(theta, p), "{theta} p={p}");
            }
        }
        // the irregular pairs (37, 32), (59, 44), (67, 58)
        for (p, n) in [(37u64, 32u32), (59, 44), (67, 58)] {
            let r = is_chi_regular(&ch("1"), p).unwrap();
            assert_eq!(r.witnesses.iter().map(|w| w.n).collect::<Vec<_>>(), vec![n]);
        }
    }

    #[test]
    fn lambda_tot_examples() {
        let params = LambdaParams::default();
        let cache = BernoulliCache::in_memory();
        let t = lambda_tot(&ch("1"), 37, &params, &cache).unwrap();
        assert_eq!(t.total, LambdaValue::Exact(1));
        assert_eq!(t.contributions.iter().find(|c| c.1 != LambdaValue::Exact(0)).unwrap().0, 32);
        assert_eq!(lambda_tot(&ch("1"), 5, &params, &cache).unwrap().total, LambdaValue::Exact(0));
    }

    #[test]
    fn kummer_equivalence() {
        let params = LambdaParams::default();
        let cache = BernoulliCache::in_memory();
        for order in [2u64, 3, 4] {
            for theta in primitive_characters(order, 1, 70) {
                for p in [3u64, 5, 7, 11] {
                    if theta.conductor() % p == 0 || order % p == 0 {
                        continue;
                    }
                    let rep = is_chi_regular(&theta, p).unwrap();
                    // B_{1,theta} does not see lambda^corr under a trivial zero
                    if rep.trivial_zero {
                        continue;
                    }
                    let tot = lambda_tot(&theta, p, &params, &cache).unwrap();
                    assert_eq!(rep.regular, tot.total == LambdaValue::Exact(0), "{theta} p={p}");
                }
            }
        }
    }

    #[test]
    fn fields() {
        let params = LambdaParams::default();
        let cache = BernoulliCache::in_memory();
        let q = FieldSpec::new(&[]).unwrap();
        assert_eq!(q.characters().len(), 1);
        assert!(!is_field_regular(&q, 37).unwrap());
        assert!(is_field_regular(&q, 31).unwrap());

        let k = FieldSpec::cyclic(&ch("5.2")).unwrap();
        assert_eq!(k.characters().len(), 2);
        let both = is_chi_regular(&ch("1"), 7).unwrap().regular && is_chi_regular(&ch("5.2"), 7).unwrap().regular;
        assert_eq!(is_field_regular(&k, 7).unwrap(), both);
        assert!(is_field_regular(&k, 5).is_err());

        // additivity over the characters
        let biquad = FieldSpec::new(&[ch("5.2"), ch("13.6")]).unwrap();
        assert_eq!(biquad.characters().len(), 4);
        for p in [3u64, 7, 11] {
            let whole = lambda_tot_field(&biquad, p, &params, &cache).unwrap();
            let parts = biquad
                .characters()
                .iter()
                .map(|c| lambda_tot(c, p, &params, &cache).unwrap().total.floor())
                .sum::<u32>();
            assert_eq!(whole.floor(), parts);
            if is_field_regular(&biquad, p).unwrap() {
                assert_eq!(whole, LambdaValue::Exact(0));
            }
        }
        assert!(FieldSpec::new(&[ch("4.1")]).is_err());
        assert!(FieldSpec::new(&[ch("5.2"), ch("5.2")]).is_err());
    }

    #[test]
    fn strict_mode_covers_conjugates() {
        let reports = is_chi_regular_strict(&ch("7.2"), 13).unwrap();
        assert_eq!(reports.len(), 2);
        let labels: Vec<String> = reports.iter().map(|r| r.theta.label()).collect();
        assert_eq!(labels, vec!["7.2".to_string(), "7.4".to_string()]);
    }
}
