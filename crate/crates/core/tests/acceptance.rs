//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not panicked on, so the line-per-criterion
//! output stays complete; the process exits 0 either way.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use iwasawa_core::bernoulli::{bernoulli, generalized_bernoulli, rational_mod, BernoulliCache};
use iwasawa_core::dirichlet::{primitive_characters, CharGroup, DirichletChar, TwistedChar};
use iwasawa_core::experiments::{regular_scan, scan_order, ScanConfig};
use iwasawa_core::heuristics::{
    direct_product, pentagonal_product, predicted_field_regular, predicted_regular_proportion, tot_thm_sum, PrimeSieve,
};
use iwasawa_core::lambda::{lambda_crosscheck_twists, lambda_method_one, lambda_method_two, Agreement, LambdaParams, LambdaValue};
use iwasawa_core::padic::PadicScalar;
use iwasawa_core::real::HiReal;
use iwasawa_core::regularity::is_chi_regular;
use iwasawa_core::rmt::{enumerate_small, exact_distribution, montecarlo, rho, ENUMERATION_BUDGET};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn run(no: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            o.passed = false;
            o.detail.push_str(&format!("; over the {:.0?} budget", b));
        }
    }
    let tag = if o.passed { "PASS" } else { "FAIL" };
    println!("{tag} criterion {no:>2}: {name} ({}) [{:.1}s]", o.detail, elapsed.as_secs_f64());
    o.passed
}

// ---------------------------------------------------------------------------

/// Published `rho(q, r)` rows, four decimals.
const PREDICTION_ROWS: &[(u64, &[f64])] = &[
    (3, &[0.5601, 0.2801, 0.1050, 0.0364, 0.0123, 0.0041, 0.0014, 0.0005]),
    (5, &[0.7603, 0.1901, 0.0396]),
    (7, &[0.8368, 0.1395, 0.0203, 0.0029]),
    (13, &[0.9172, 0.0764, 0.0059]),
    (121, &[0.9917, 0.0083]),
    (25, &[0.9584, 0.0399]),
    (9, &[0.8766, 0.1096, 0.0123]),
    (11, &[0.9008, 0.0901, 0.0083]),
];

fn prediction_table() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &(q, row) in PREDICTION_ROWS {
        for (r, want) in row.iter().enumerate() {
            let got = rho(q, r as u32).to_f64();
            worst = worst.max((got - want).abs());
            checked += 1;
        }
    }
    outcome(worst <= 5e-5, format!("{checked} entries, max deviation {worst:.2e}"))
}

fn conjecture_formulas() -> Outcome {
    let reg = predicted_regular_proportion(2);
    let mut ok = format!("{reg:.4}") == "0.6065";
    let mut worst = 0.0f64;
    for p in [3u64, 5, 7, 11, 13] {
        worst = worst.max((predicted_field_regular(&[2], p, false).unwrap() - (-1f64).exp()).abs());
    }
    for p in [7u64, 13, 19, 31] {
        worst = worst.max((predicted_field_regular(&[3], p, false).unwrap() - (-1.5f64).exp()).abs());
    }
    ok &= worst < 1e-12;
    outcome(ok, format!("m=2 proportion {reg:.4}, field formulas max error {worst:.1e}"))
}

fn rmt_exactness() -> Outcome {
    let mut notes = Vec::new();
    let third = BigRational::new(1.into(), 3.into());
    let mut ok = exact_distribution(2, 2) == vec![third.clone(), BigRational::zero(), third * BigInt::from(2)];
    for (n, q) in [(2usize, 2u64), (2, 3), (3, 2)] {
        let e = enumerate_small(n, q, ENUMERATION_BUDGET).unwrap();
        let same = e.proportions() == exact_distribution(n, q);
        ok &= same;
        notes.push(format!("enum({n},{q})={}", if same { "exact" } else { "MISMATCH" }));
    }
    let samples = 100_000u64;
    let hist = montecarlo(8, 3, samples, 2024).unwrap();
    let exact = exact_distribution(8, 3);
    let mut worst_sigma = 0.0f64;
    for (count, p) in hist.counts.iter().zip(&exact) {
        let p = p.to_f64().unwrap();
        let mean = samples as f64 * p;
        let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
        let z = if sigma > 0.0 { (*count as f64 - mean).abs() / sigma } else { (*count as f64 - mean).abs() * f64::INFINITY };
        worst_sigma = worst_sigma.max(z);
    }
    ok &= worst_sigma <= 3.0;
    let gap = exact.iter().enumerate().map(|(r, p)| (p.to_f64().unwrap() - rho(3, r as u32).to_f64()).abs()).fold(0.0, f64::max);
    ok &= gap <= 1e-3;
    notes.push(format!("MC worst {worst_sigma:.2} sigma"));
    notes.push(format!("|exact(8,3) - rho(3)| <= {gap:.1e}"));
    outcome(ok, notes.join(", "))
}

fn cross_method() -> Outcome {
    let params = LambdaParams::default();
    let cache = BernoulliCache::in_memory();
    let (mut identical, mut other) = (0u64, Vec::new());
    for order in [2u64, 3, 4] {
        let chars = primitive_characters(order, 1, 500);
        for p in [3u64, 5, 7] {
            if order % p == 0 {
                continue;
            }
            for theta in chars.iter().filter(|t| t.conductor() % p != 0) {
                let parity = if theta.is_even() { 0 } else { 1 };
                let twists: Vec<u64> = (0..p - 1).filter(|i| i % 2 == parity).collect();
                for (i, r) in twists.iter().zip(lambda_crosscheck_twists(theta, p, &twists, &params, &cache)) {
                    match r {
                        Ok(r) if r.agreement == Agreement::Identical => identical += 1,
                        Ok(r) => other.push(format!("{theta}*w^{i}@{p}: {:?}", r.agreement)),
                        Err(e) => other.push(format!("{theta}*w^{i}@{p}: {e}")),
                    }
                }
            }
        }
    }
    let mut detail = format!("{identical} characters identical, {} not", other.len());
    if let Some(first) = other.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    outcome(other.is_empty() && identical > 0, detail)
}

fn zero_proportion(cfg: &ScanConfig) -> (f64, u64, u64) {
    let t = &scan_order(cfg).unwrap()[0];
    let zeros: u64 = t.rows.iter().map(|r| r.counts[0]).sum();
    (zeros as f64 / t.total() as f64, t.total(), t.excluded.len() as u64)
}

fn desk_distribution() -> Outcome {
    let base = ScanConfig { cond_max: 1000, ..ScanConfig::default() };
    let cubic = ScanConfig { primes: vec![5], order: 3, twists: Some(vec![0, 2]), ..base.clone() };
    let (x5, n5, e5) = zero_proportion(&cubic);
    let ok5 = (x5 - 0.958).abs() <= 0.03 && e5 == 0;
    let quad = ScanConfig { primes: vec![3], order: 2, ..base };
    let (x3, n3, e3) = zero_proportion(&quad);
    let ok3 = (0.60..=0.70).contains(&x3) && e3 == 0;
    let mut detail = format!(
        "p=5 ord 3: {x5:.4} over {n5} [{}], p=3 ord 2: {x3:.4} over {n3} [{}]",
        if ok5 { "in band" } else { "out of band" },
        if ok3 { "in band" } else { "out of band" }
    );
    if !ok3 {
        detail.push_str("; the p=3 value matches an exact class-number count, the band is not met at this conductor range");
    }
    outcome(ok5 && ok3, detail)
}

/// `B_n` by the Akiyama-Tanigawa recurrence, kept separate from the library's route.
fn bernoulli_oracle(n: usize) -> BigRational {
    let mut a: Vec<BigRational> = (0..=n).map(|m| BigRational::new(BigInt::one(), BigInt::from(m + 1))).collect();
    for m in 0..=n {
        a[m] = BigRational::new(BigInt::one(), BigInt::from(m + 1));
        for j in (1..=m).rev() {
            a[j - 1] = (&a[j - 1] - &a[j]) * BigRational::from_integer(BigInt::from(j));
        }
    }
    // the recurrence yields B_1 = +1/2; irrelevant for even n
    a[0].clone()
}

fn irregular_pair() -> Outcome {
    let b32 = bernoulli_oracle(32);
    let oracle = b32.numer().mod_floor(&BigInt::from(37)).is_zero() && !b32.denom().mod_floor(&BigInt::from(37)).is_zero();
    let lib_agrees = bernoulli(32) == b32;
    let trivial = DirichletChar::trivial(1);
    let report = is_chi_regular(&trivial, 37).unwrap();
    let witnesses: Vec<u32> = report.witnesses.iter().map(|w| w.n).collect();
    let l = lambda_crosscheck_twists(&trivial, 37, &[32], &LambdaParams::default(), &BernoulliCache::in_memory())
        .pop()
        .unwrap()
        .unwrap();
    let ok = oracle && lib_agrees && !report.regular && witnesses == [32] && l.lambda == LambdaValue::Exact(1);
    outcome(
        ok,
        format!("37 | num(B_32): {oracle}, verdict {}, witnesses {witnesses:?}, lambda(w^32) = {}", report.verdict(), l.lambda),
    )
}

fn trivial_zero() -> Outcome {
    let chi = TwistedChar::new(&DirichletChar::parse("4.1").unwrap(), 1, 5).unwrap();
    let params = LambdaParams::default();
    let one = lambda_method_one(&chi, &params, &BernoulliCache::in_memory()).unwrap();
    let two = lambda_method_two(&chi, &params).unwrap();
    let check = |r: &iwasawa_core::lambda::LambdaResult| {
        r.trivial_zero && r.lambda.floor() >= 1 && r.lambda_corr.floor() + 1 == r.lambda.floor() && r.lambda.exact().is_some()
    };
    outcome(
        chi.has_trivial_zero() && check(&one) && check(&two),
        format!(
            "interpolation lambda {} corr {}, series lambda {} corr {}",
            one.lambda, one.lambda_corr, two.lambda, two.lambda_corr
        ),
    )
}

fn totient(m: u64) -> u64 {
    (1..=m).filter(|a| a.gcd(&m) == 1).count() as u64
}

fn tot_thm() -> Outcome {
    let x = 100_000u64;
    let sieve = PrimeSieve::new(x);
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 1..=4u64 {
        let s = tot_thm_sum(&sieve, x, m);
        let want = 1.0 + ((-0.5f64).exp() - 1.0) / totient(m) as f64;
        let ratio = s.sum.to_f64() / sieve.pi(x) as f64;
        ok &= (ratio - want).abs() <= 0.02;
        parts.push(format!("m={m}: {ratio:.4} vs {want:.4}"));
    }
    outcome(ok, parts.join(", "))
}

fn regularity_experiment() -> Outcome {
    let quad = regular_scan(2, 200, 25, 1, 0).unwrap();
    let cubic = regular_scan(3, 200, 100, 2, 0).unwrap();
    let (mq, mc) = (quad.mean().unwrap_or(f64::NAN), cubic.mean().unwrap_or(f64::NAN));
    let ok = (mq - 0.6065).abs() <= 0.06 && mc >= 0.99 && quad.excluded.is_empty() && cubic.excluded.is_empty();
    outcome(
        ok,
        format!(
            "order 2: mean {mq:.4} over {} characters; order 3 f=2: mean {mc:.4} over {} characters (100 primes each)",
            quad.characters.len(),
            cubic.characters.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// criterion 10: properties re-checked on fresh inputs

fn orthogonality() -> bool {
    [5u64, 8, 12, 15, 21, 40].iter().all(|&n| {
        let group = CharGroup::new(n);
        let phi = totient(n) as f64;
        (1..n as i64).filter(|a| a.gcd(&(n as i64)) == 1).all(|a| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for chi in group.characters() {
                let k = chi.exponent_at(a).unwrap() as f64;
                let t = std::f64::consts::TAU * k / chi.order() as f64;
                re += t.cos();
                im += t.sin();
            }
            let want = if a == 1 { phi } else { 0.0 };
            (re - want).abs() < 1e-9 && im.abs() < 1e-9
        })
    })
}

fn parity_vanishing() -> bool {
    ["5.2", "7.1", "8.1.1", "13.3", "9.2"].iter().all(|label| {
        let chi = DirichletChar::parse(label).unwrap();
        let odd = !chi.is_even();
        (2..9u32).filter(|n| (n % 2 == 1) != odd).all(|n| generalized_bernoulli(n, &chi).is_zero())
    })
}

fn kummer_congruences() -> bool {
    [5u64, 7, 11, 13].iter().all(|&p| {
        (2..p - 1).filter(|n| n % 2 == 0).all(|n| {
            let m = n + (p - 1);
            let term = |k: u64| {
                let euler = BigRational::one() - BigRational::from_integer(BigInt::from(p).pow(k as u32 - 1));
                euler * bernoulli(k as u32) / BigRational::from_integer(BigInt::from(k))
            };
            rational_mod(&term(n), p) == rational_mod(&term(m), p)
        })
    })
}

fn pentagonal_matches_product() -> bool {
    [2u64, 3, 5, 25, 121].iter().all(|&q| {
        let y = HiReal::recip_int(&BigInt::from(q));
        let diff = pentagonal_product(&y, 60).to_f64() - direct_product(&y, 60).to_f64();
        diff.abs() < 1e-15
    })
}

fn precision_idempotence() -> bool {
    let x = PadicScalar::from_rational(7, &BigRational::new(BigInt::from(-123456789), BigInt::from(98)), 20);
    let once = x.truncate(8);
    let stable = once.truncate(8) == once && once.truncate(12) == once;
    let params = LambdaParams::default();
    let cache = BernoulliCache::in_memory();
    let chi = TwistedChar::new(&DirichletChar::parse("13.4").unwrap(), 0, 7).unwrap();
    let a = lambda_method_one(&chi, &params, &cache).unwrap();
    let more = LambdaParams { precision: Some(params.precision_for(7, 0) + 10), ..params };
    let b = lambda_method_one(&chi, &more, &cache).unwrap();
    stable && a.lambda == b.lambda && !x.unit().is_negative()
}

fn seeded_determinism() -> bool {
    let a = montecarlo(6, 5, 20_000, 99).unwrap();
    let b = montecarlo(6, 5, 20_000, 99).unwrap();
    let cfg = ScanConfig { primes: vec![7], order: 3, cond_max: 120, ..ScanConfig::default() };
    let s1 = scan_order(&cfg).unwrap()[0].to_csv();
    let s2 = scan_order(&ScanConfig { jobs: 1, ..cfg }).unwrap()[0].to_csv();
    a.counts == b.counts && s1 == s2
}

type Property = (&'static str, fn() -> bool);

fn properties() -> Outcome {
    let checks: [Property; 6] = [
        ("orthogonality", orthogonality),
        ("parity vanishing", parity_vanishing),
        ("Kummer congruences", kummer_congruences),
        ("pentagonal = product", pentagonal_matches_product),
        ("precision idempotence", precision_idempotence),
        ("seeded determinism", seeded_determinism),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, f)| !f()).map(|(n, _)| *n).collect();
    let detail = if failed.is_empty() {
        format!("{} property groups hold; module property suites run under cargo test", checks.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    outcome(failed.is_empty(), detail)
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "prediction table", Some(secs(1)), prediction_table),
        run(2, "conjecture formulas", Some(secs(1)), conjecture_formulas),
        run(3, "random matrix exactness", Some(secs(30)), rmt_exactness),
        run(4, "cross-method lambda agreement", None, cross_method),
        run(5, "desk-scale distributions", Some(secs(15 * 60)), desk_distribution),
        run(6, "irregular pair (37, 32)", Some(secs(60)), irregular_pair),
        run(7, "trivial-zero forcing", Some(secs(60)), trivial_zero),
        run(8, "total regularity sums", Some(secs(60)), tot_thm),
        run(9, "regularity experiment", Some(secs(10 * 60)), regularity_experiment),
        run(10, "property suites", None, properties),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
}
