//! Scans over families of characters, producing the distribution,
//! regularity and field tables plus their CSV renderings.
//!
//! Every scan fans out over characters with rayon and reassembles results in
//! input order, so output bytes depend only on the configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::arith::{gcd, is_prime, multiplicative_order};
use crate::bernoulli::BernoulliCache;
use crate::dirichlet::{primitive_characters, CharGroup, DirichletChar, TwistedChar};
use crate::error::{Error, Result};
use crate::heuristics::{predicted_field_regular, predicted_lambda_distribution, predicted_regular_proportion};
use crate::lambda::{lambda_crosscheck_twists, LambdaParams, LambdaValue};
use crate::regularity::{is_chi_regular, lambda_tot, FieldSpec};
use crate::rmt::{enumerate_small, exact_distribution, montecarlo, rho, ENUMERATION_BUDGET};

/// Number of histogram bins; the last one collects `lambda >= BINS - 1`.
pub const BINS: usize = 8;

/// Settings shared by the scans.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub primes: Vec<u64>,
    pub order: u64,
    /// Conductors range over `cond_min..cond_max`.
    pub cond_min: u64,
    pub cond_max: u64,
    /// Restrict to these twists `i`; `None` keeps every even twist.
    pub twists: Option<Vec<u64>>,
    /// Drop twists with a trivial zero instead of tabulating `lambda^corr`.
    pub omit_trivial_zero: bool,
    pub params: LambdaParams,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            primes: vec![5],
            order: 2,
            cond_min: 1,
            cond_max: 1000,
            twists: None,
            omit_trivial_zero: true,
            params: LambdaParams::default(),
            jobs: 0,
            seed: 0,
            cache_dir: None,
            out: None,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(&p) = self.primes.iter().find(|&&p| p == 2 || !is_prime(p)) {
            return Err(Error::Domain(format!("{p} is not an odd prime")));
        }
        if self.cond_max < 3 {
            return Err(Error::Domain(format!("conductor bound {} is below 3", self.cond_max)));
        }
        if self.order == 0 {
            return Err(Error::Domain("character order must be positive".into()));
        }
        Ok(())
    }

    /// The Bernoulli cache selected by `cache_dir`.
    pub fn cache(&self) -> BernoulliCache {
        match &self.cache_dir {
            Some(dir) => BernoulliCache::on_disk(dir),
            None => BernoulliCache::in_memory(),
        }
    }

    /// Runs `f` on a pool of `jobs` threads.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        if self.jobs == 0 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }

    fn wants_twist(&self, i: u64) -> bool {
        self.twists.as_ref().is_none_or(|t| t.contains(&i))
    }
}

/// A character left out of a table because its computation failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excluded {
    pub label: String,
    pub reason: String,
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn bin_of(v: LambdaValue) -> Option<usize> {
    match v {
        LambdaValue::Exact(l) => Some((l as usize).min(BINS - 1)),
        LambdaValue::AtLeast(l) if l as usize >= BINS - 1 => Some(BINS - 1),
        LambdaValue::AtLeast(_) => None,
    }
}

fn proportions_of(counts: &[u64; BINS]) -> [f64; BINS] {
    let n: u64 = counts.iter().sum();
    let mut out = [0.0; BINS];
    if n > 0 {
        for (o, &c) in out.iter_mut().zip(counts) {
            *o = c as f64 / n as f64;
        }
    }
    out
}

fn residue_degree(p: u64, m: u64) -> u64 {
    if m == 1 {
        1
    } else {
        multiplicative_order(p % m, m)
    }
}

// ---------------------------------------------------------------------------
// Distribution of lambda by twist
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwistRow {
    pub i: u64,
    /// Characters tabulated (the denominator of the proportions).
    pub n: u64,
    pub counts: [u64; BINS],
    pub omitted_trivial_zero: u64,
    pub excluded: u64,
}

impl TwistRow {
    pub fn proportions(&self) -> [f64; BINS] {
        proportions_of(&self.counts)
    }
}

/// Lambda distribution for one prime and character order.
#[derive(Clone, Debug)]
pub struct DistributionTable {
    pub p: u64,
    pub order: u64,
    pub f: u64,
    pub cond_min: u64,
    pub cond_max: u64,
    /// `rho(p^f, r)` for the bins, when the order is prime to `p`.
    pub predicted: Option<[f64; BINS]>,
    pub rows: Vec<TwistRow>,
    pub excluded: Vec<Excluded>,
}

impl DistributionTable {
    pub fn row(&self, i: u64) -> Option<&TwistRow> {
        self.rows.iter().find(|r| r.i == i)
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.n).sum()
    }

    /// Pooled proportions over all twists.
    pub fn pooled(&self) -> [f64; BINS] {
        let mut counts = [0; BINS];
        for r in &self.rows {
            for (c, x) in counts.iter_mut().zip(&r.counts) {
                *c += x;
            }
        }
        proportions_of(&counts)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# p={} order={} f={} cond={}..{}", self.p, self.order, self.f, self.cond_min, self.cond_max).unwrap();
        s.push_str("i;N");
        for r in 0..BINS {
            write!(s, ";{r}").unwrap();
        }
        s.push_str(";omitted;excluded\n");
        if let Some(pred) = &self.predicted {
            s.push_str("pred.;");
            for x in pred {
                write!(s, ";{}", fmt4(*x)).unwrap();
            }
            s.push_str(";;\n");
        }
        for row in &self.rows {
            write!(s, "{};{}", row.i, row.n).unwrap();
            for x in row.proportions() {
                write!(s, ";{}", fmt4(x)).unwrap();
            }
            writeln!(s, ";{};{}", row.omitted_trivial_zero, row.excluded).unwrap();
        }
        s
    }
}

/// The twists `i` making `theta * omega^i` even, minus the pole.
fn even_twists(theta: &DirichletChar, p: u64) -> Vec<u64> {
    let parity = if theta.is_even() { 0 } else { 1 };
    (0..p - 1)
        .filter(|i| i % 2 == parity)
        .filter(|&i| !(theta.is_trivial() && i == 0))
        .collect()
}

enum Outcome {
    Value(LambdaValue),
    TrivialZeroOmitted,
    Failed(String),
}

fn scan_prime(cfg: &ScanConfig, p: u64, chars: &[DirichletChar], cache: &BernoulliCache) -> DistributionTable {
    let f = residue_degree(p, cfg.order);
    let predicted = predicted_lambda_distribution(p, cfg.order, BINS as u32 - 1).ok().map(|(_, v)| {
        let mut out = [0.0; BINS];
        for (o, x) in out.iter_mut().zip(v) {
            *o = x.to_f64();
        }
        out
    });
    let work: Vec<Vec<(String, u64, Outcome)>> = chars
        .par_iter()
        .filter(|theta| theta.conductor() % p != 0)
        .map(|theta| {
            let twists: Vec<u64> = even_twists(theta, p).into_iter().filter(|&i| cfg.wants_twist(i)).collect();
            let results = lambda_crosscheck_twists(theta, p, &twists, &cfg.params, cache);
            twists
                .iter()
                .zip(results)
                .map(|(&i, res)| {
                    let label = format!("{}*w^{i}@{p}", theta.label());
                    let outcome = match res {
                        Ok(r) if r.trivial_zero && cfg.omit_trivial_zero => Outcome::TrivialZeroOmitted,
                        Ok(r) => match bin_of(r.lambda_corr) {
                            Some(_) => Outcome::Value(r.lambda_corr),
                            None => Outcome::Failed(format!("undetermined lambda {}", r.lambda_corr)),
                        },
                        Err(e) => Outcome::Failed(e.to_string()),
                    };
                    (label, i, outcome)
                })
                .collect()
        })
        .collect();
    let mut rows: BTreeMap<u64, TwistRow> = BTreeMap::new();
    let mut excluded = Vec::new();
    for (label, i, outcome) in work.into_iter().flatten() {
        let row = rows.entry(i).or_insert_with(|| TwistRow { i, ..TwistRow::default() });
        match outcome {
            Outcome::Value(v) => {
                row.counts[bin_of(v).unwrap()] += 1;
                row.n += 1;
            }
            Outcome::TrivialZeroOmitted => row.omitted_trivial_zero += 1,
            Outcome::Failed(reason) => {
                log::debug!("{label}: {reason}");
                row.excluded += 1;
                excluded.push(Excluded { label, reason });
            }
        }
    }
    DistributionTable {
        p,
        order: cfg.order,
        f,
        cond_min: cfg.cond_min,
        cond_max: cfg.cond_max,
        predicted,
        rows: rows.into_values().collect(),
        excluded,
    }
}

/// Lambda distribution of `theta * omega^i` over primitive `theta` of the
/// configured order, one table per prime.
pub fn scan_order(cfg: &ScanConfig) -> Result<Vec<DistributionTable>> {
    scan_order_with_cache(cfg, &cfg.cache())
}

pub fn scan_order_with_cache(cfg: &ScanConfig, cache: &BernoulliCache) -> Result<Vec<DistributionTable>> {
    cfg.validate()?;
    let chars = primitive_characters(cfg.order, cfg.cond_min, cfg.cond_max);
    cfg.install(|| cfg.primes.iter().map(|&p| scan_prime(cfg, p, &chars, cache)).collect())
}

// ---------------------------------------------------------------------------
// Regularity proportions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct CharRegularity {
    pub label: String,
    pub primes: Vec<u64>,
    pub regular: usize,
}

impl CharRegularity {
    pub fn proportion(&self) -> f64 {
        self.regular as f64 / self.primes.len() as f64
    }
}

/// Per-character regular-prime proportions and their summary statistics.
#[derive(Clone, Debug)]
pub struct RegularSummary {
    pub order: u64,
    pub f: u64,
    pub cond_max: u64,
    pub prime_count: usize,
    pub characters: Vec<CharRegularity>,
    pub excluded: Vec<Excluded>,
    pub predicted: f64,
}

impl RegularSummary {
    fn proportions(&self) -> impl Iterator<Item = f64> + '_ {
        self.characters.iter().map(|c| c.proportion())
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.characters.len();
        (n > 0).then(|| self.proportions().sum::<f64>() / n as f64)
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> Option<f64> {
        let mean = self.mean()?;
        let n = self.characters.len() as f64;
        Some((self.proportions().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
    }

    pub fn min(&self) -> Option<f64> {
        self.proportions().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.proportions().reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt4).unwrap_or_else(|| "-".into());
        let mut s = String::new();
        writeln!(s, "# order={} f={} cond<{} primes={}", self.order, self.f, self.cond_max, self.prime_count).unwrap();
        s.push_str("N;proportion;std;min;max\n");
        writeln!(s, "pred.;{};-;-;-", fmt4(self.predicted)).unwrap();
        writeln!(
            s,
            "{};{};{};{};{}",
            self.characters.len(),
            opt(self.mean()),
            opt(self.std_dev()),
            opt(self.min()),
            opt(self.max())
        )
        .unwrap();
        s
    }

    /// One line per character: `label;primes;regular;proportion`.
    pub fn detail_csv(&self) -> String {
        let mut s = String::from("label;primes;regular;proportion\n");
        for c in &self.characters {
            writeln!(s, "{};{};{};{}", c.label, c.primes.len(), c.regular, fmt4(c.proportion())).unwrap();
        }
        s
    }
}

/// The first `count` odd primes `p` not dividing `cond * m` whose residue
/// degree modulo `m` is `f`.
pub fn admissible_primes(cond: u64, m: u64, f: u64, count: usize) -> Vec<u64> {
    (3..)
        .step_by(2)
        .filter(|&p| is_prime(p) && gcd(p, cond * m) == 1 && residue_degree(p, m) == f)
        .take(count)
        .collect()
}

/// Proportion of regular primes among the first `prime_count` admissible
/// primes of residue degree `f`, for each primitive character of the given
/// order with `1 < cond < cond_max`.
pub fn regular_scan(order: u64, cond_max: u64, prime_count: usize, f: u64, jobs: usize) -> Result<RegularSummary> {
    let cfg = ScanConfig { jobs, ..ScanConfig::default() };
    let predicted = if f == 1 { predicted_regular_proportion(order.max(2)) } else { 1.0 };
    let chars = primitive_characters(order, 2, cond_max);
    let work: Vec<std::result::Result<CharRegularity, Excluded>> = cfg.install(|| {
        chars
            .par_iter()
            .filter(|_| prime_count > 0)
            .map(|theta| {
                let primes = admissible_primes(theta.conductor(), order, f, prime_count);
                let mut regular = 0;
                for &p in &primes {
                    match is_chi_regular(theta, p) {
                        Ok(r) => regular += r.regular as usize,
                        Err(e) => return Err(Excluded { label: format!("{theta}@{p}"), reason: e.to_string() }),
                    }
                }
                Ok(CharRegularity { label: theta.label(), primes, regular })
            })
            .collect()
    })?;
    let mut characters = Vec::new();
    let mut excluded = Vec::new();
    for w in work {
        match w {
            Ok(c) => characters.push(c),
            Err(e) => excluded.push(e),
        }
    }
    Ok(RegularSummary { order, f, cond_max, prime_count, characters, excluded, predicted })
}

/// Regularity report rows `label;p;f;verdict;witnesses` for each character
/// of the given order and each prime.
pub fn regularity_rows(order: u64, cond_max: u64, primes: &[u64]) -> (String, Vec<Excluded>) {
    let chars: Vec<DirichletChar> = if order == 1 { vec![DirichletChar::trivial(1)] } else { primitive_characters(order, 2, cond_max) };
    let rows: Vec<std::result::Result<String, Excluded>> = chars
        .par_iter()
        .flat_map_iter(|theta| primes.iter().map(move |&p| (theta, p)))
        .filter(|(theta, p)| theta.conductor() % p != 0)
        .map(|(theta, p)| {
            is_chi_regular(theta, p)
                .map(|r| format!("{};{};{};{};{}", r.theta.label(), p, r.f, r.verdict(), r.witness_list()))
                .map_err(|e| Excluded { label: format!("{theta}@{p}"), reason: e.to_string() })
        })
        .collect();
    let mut s = String::from("label;p;f;verdict;witnesses\n");
    let mut excluded = Vec::new();
    for r in rows {
        match r {
            Ok(line) => {
                s.push_str(&line);
                s.push('\n');
            }
            Err(e) => excluded.push(e),
        }
    }
    (s, excluded)
}

// ---------------------------------------------------------------------------
// Cyclic fields
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FieldRow {
    pub field: String,
    pub conductor: u64,
    pub lambda_tot: LambdaValue,
}

#[derive(Clone, Debug)]
pub struct FieldHistogram {
    pub p: u64,
    pub degree: u64,
    pub f: u64,
    pub cond_max: u64,
    pub counts: [u64; BINS],
    pub fields: Vec<FieldRow>,
    pub excluded: Vec<Excluded>,
}

impl FieldHistogram {
    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn proportions(&self) -> [f64; BINS] {
        proportions_of(&self.counts)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# p={} degree={} f={} cond<{}", self.p, self.degree, self.f, self.cond_max).unwrap();
        s.push('N');
        for r in 0..BINS {
            write!(s, ";{r}").unwrap();
        }
        s.push_str(";excluded\n");
        write!(s, "{}", self.n()).unwrap();
        for x in self.proportions() {
            write!(s, ";{}", fmt4(x)).unwrap();
        }
        writeln!(s, ";{}", self.excluded.len()).unwrap();
        s
    }

    /// One line per field: `field;p;lambda_tot`.
    pub fn detail_csv(&self) -> String {
        let mut s = String::from("field;p;lambda_tot\n");
        for row in &self.fields {
            writeln!(s, "{};{};{}", row.field, self.p, row.lambda_tot).unwrap();
        }
        s
    }
}

/// One generating character per cyclic field of the given degree: the even
/// primitive characters of that order whose label is least among their
/// Galois conjugates.
pub fn cyclic_field_generators(degree: u64, cond_max: u64) -> Vec<DirichletChar> {
    if degree == 1 {
        return vec![DirichletChar::trivial(1)];
    }
    primitive_characters(degree, 1, cond_max)
        .into_iter()
        .filter(|theta| theta.is_even())
        .filter(|theta| {
            let own = theta.exponents().to_vec();
            (2..degree).filter(|&a| gcd(a, degree) == 1).all(|a| own <= theta.pow(a).exponents().to_vec())
        })
        .collect()
}

/// Histogram of `lambda_tot(F)` over cyclic fields of the given degree with
/// conductor below `cond_max` and prime to `p`.
pub fn field_scan(degree: u64, cond_max: u64, p: u64, params: &LambdaParams, cache: &BernoulliCache, jobs: usize) -> Result<FieldHistogram> {
    if p == 2 || !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    if degree % p == 0 {
        return Err(Error::Ramified { p, m: degree });
    }
    let cfg = ScanConfig { jobs, ..ScanConfig::default() };
    let fields: Vec<FieldSpec> = cyclic_field_generators(degree, cond_max)
        .iter()
        .filter(|theta| theta.conductor() % p != 0)
        .map(FieldSpec::cyclic)
        .collect::<Result<_>>()?;
    let distinct: BTreeSet<String> = fields.iter().flat_map(|f| f.characters().iter().map(|c| c.label())).collect();
    let distinct: Vec<DirichletChar> = distinct.iter().map(|l| DirichletChar::parse(l)).collect::<Result<_>>()?;
    let totals: Vec<std::result::Result<LambdaValue, String>> = cfg.install(|| {
        distinct
            .par_iter()
            .map(|chi| lambda_tot(chi, p, params, cache).map(|t| t.total).map_err(|e| e.to_string()))
            .collect()
    })?;
    let table: BTreeMap<String, std::result::Result<LambdaValue, String>> =
        distinct.iter().map(|c| c.label()).zip(totals).collect();

    let mut counts = [0; BINS];
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for field in &fields {
        let mut total = LambdaValue::Exact(0);
        let mut failure = None;
        for chi in field.characters() {
            match &table[&chi.label()] {
                Ok(v) => {
                    total = match (total, *v) {
                        (LambdaValue::Exact(a), LambdaValue::Exact(b)) => LambdaValue::Exact(a + b),
                        (a, b) => LambdaValue::AtLeast(a.floor() + b.floor()),
                    }
                }
                Err(e) => failure = Some(format!("{chi}: {e}")),
            }
        }
        let label = field.label();
        match (failure, bin_of(total)) {
            (None, Some(b)) => {
                counts[b] += 1;
                rows.push(FieldRow { field: label, conductor: field.conductor(), lambda_tot: total });
            }
            (Some(reason), _) => excluded.push(Excluded { label, reason }),
            (None, None) => excluded.push(Excluded { label, reason: format!("undetermined lambda_tot {total}") }),
        }
    }
    Ok(FieldHistogram { p, degree, f: residue_degree(p, degree), cond_max, counts, fields: rows, excluded })
}

// ---------------------------------------------------------------------------
// Appendix listing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppendixRow {
    pub lambda: LambdaValue,
    pub modulus: u64,
    pub label: String,
    pub i: u64,
    pub order: u64,
    pub f: u64,
    pub trivial_zero: bool,
}

impl AppendixRow {
    pub fn to_csv(&self) -> String {
        let tz = if self.trivial_zero { "yes" } else { "no" };
        format!("{};{};{};{};{};{};{}", self.lambda, self.modulus, self.label, self.i, self.order, self.f, tz)
    }
}

#[derive(Clone, Debug, Default)]
pub struct AppendixTable {
    pub p: u64,
    pub rows: Vec<AppendixRow>,
    pub failures: Vec<Excluded>,
}

impl AppendixTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            s.push_str(&row.to_csv());
            s.push('\n');
        }
        s
    }

    pub fn failures_csv(&self) -> String {
        let mut s = String::new();
        for e in &self.failures {
            writeln!(s, "{};{}", e.label, e.reason).unwrap();
        }
        s
    }
}

/// Even characters `theta * omega^i` with `cond(theta) < cond_max`, `p`
/// prime to the conductor and to the order, and residue degree `f < f_bound`,
/// whose corrected lambda-invariant is positive.
pub fn appendix_tables(p: u64, cond_max: u64, f_bound: u64, params: &LambdaParams, cache: &BernoulliCache, jobs: usize) -> Result<AppendixTable> {
    if p == 2 || !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    let cfg = ScanConfig { jobs, ..ScanConfig::default() };
    let params = LambdaParams { max_residue_degree: f_bound.saturating_sub(1), ..params.clone() };
    let chars: Vec<DirichletChar> = (1..cond_max)
        .filter(|n| n % p != 0)
        .flat_map(|n| {
            let group = CharGroup::new(n);
            if !group.admits_primitive() {
                return Vec::new();
            }
            group.characters().filter(|c| c.is_primitive()).collect::<Vec<_>>()
        })
        .filter(|theta| theta.order() % p != 0 && residue_degree(p, theta.order()) < f_bound)
        .collect();
    let work: Vec<Vec<std::result::Result<Option<AppendixRow>, Excluded>>> = cfg.install(|| {
        chars
            .par_iter()
            .map(|theta| {
                let twists = even_twists(theta, p);
                let results = lambda_crosscheck_twists(theta, p, &twists, &params, cache);
                twists
                    .iter()
                    .zip(results)
                    .map(|(&i, res)| {
                        let r = res.map_err(|e| Excluded { label: format!("{}*w^{i}@{p}", theta.label()), reason: e.to_string() })?;
                        let listed = r.lambda_corr.floor() > 0;
                        Ok(listed.then(|| AppendixRow {
                            lambda: r.lambda,
                            modulus: theta.modulus(),
                            label: theta.label(),
                            i,
                            order: TwistedChar::new(theta, i, p).map(|t| t.order()).unwrap_or(0),
                            f: r.residue_degree,
                            trivial_zero: r.trivial_zero,
                        }))
                    })
                    .collect()
            })
            .collect()
    })?;
    let mut table = AppendixTable { p, ..AppendixTable::default() };
    for item in work.into_iter().flatten() {
        match item {
            Ok(Some(row)) => table.rows.push(row),
            Ok(None) => {}
            Err(e) => table.failures.push(e),
        }
    }
    table.rows.sort_by(|a, b| (a.modulus, &a.label, a.i).cmp(&(b.modulus, &b.label, b.i)));
    Ok(table)
}

// ---------------------------------------------------------------------------
// Predictions and simulation
// ---------------------------------------------------------------------------

/// The (p, order) pairs of the published distribution tables.
pub const PREDICTION_ROWS: [(u64, u64); 9] = [(3, 2), (5, 2), (5, 3), (7, 3), (11, 3), (13, 3), (5, 4), (11, 5), (3, 8)];

/// Conjectured proportions followed by `rho(q, r)` rows, as CSV.
pub fn predict_csv() -> Result<String> {
    let mut s = String::from("quantity;input;value\n");
    writeln!(s, "regular_proportion;m=2;{}", fmt4(predicted_regular_proportion(2))).unwrap();
    writeln!(s, "regular_proportion;m=3;{}", fmt4(predicted_regular_proportion(3))).unwrap();
    writeln!(s, "field_regular;m=[2] p=5;{}", fmt4(predicted_field_regular(&[2], 5, false)?)).unwrap();
    writeln!(s, "field_regular;m=[3] p=7;{}", fmt4(predicted_field_regular(&[3], 7, false)?)).unwrap();
    writeln!(s, "field_regular;m=[2] p=5 Q-regular;{}", fmt4(predicted_field_regular(&[2], 5, true)?)).unwrap();
    writeln!(s, "field_regular;m=[3] p=7 Q-regular;{}", fmt4(predicted_field_regular(&[3], 7, true)?)).unwrap();
    s.push('\n');
    s.push_str("p;order;f");
    for r in 0..BINS {
        write!(s, ";{r}").unwrap();
    }
    s.push('\n');
    for (p, m) in PREDICTION_ROWS {
        let (f, values) = predicted_lambda_distribution(p, m, BINS as u32 - 1)?;
        write!(s, "{p};{m};{f}").unwrap();
        for v in values {
            write!(s, ";{}", fmt4(v.to_f64())).unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RmtRow {
    pub r: usize,
    pub count: u64,
    pub empirical: f64,
    pub exact: f64,
    pub rho: f64,
}

/// Monte Carlo degree histogram next to the exact finite-`n` law and `rho`.
pub fn rmt_sim(n: usize, q: u64, samples: u64, seed: u64) -> Result<Vec<RmtRow>> {
    let hist = montecarlo(n, q, samples, seed)?;
    let exact = exact_distribution(n, q);
    let empirical = hist.proportions();
    Ok((0..=n)
        .map(|r| RmtRow {
            r,
            count: hist.counts[r],
            empirical: empirical[r],
            exact: exact[r].to_f64().unwrap_or(f64::NAN),
            rho: rho(q, r as u32).to_f64(),
        })
        .collect())
}

pub fn rmt_csv(rows: &[RmtRow]) -> String {
    let mut s = String::from("r;count;empirical;exact;rho\n");
    for row in rows {
        writeln!(s, "{};{};{:.6};{:.6};{:.6}", row.r, row.count, row.empirical, row.exact, row.rho).unwrap();
    }
    s
}

// ---------------------------------------------------------------------------
// Quick self-check
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Fast consistency checks on known values, each computed independently.
pub fn verify(cache: &BernoulliCache) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name, r: Result<(bool, String)>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
        out.push(Check { name, passed, detail });
    };

    push("rho(3, 0..3)", {
        let got: Vec<f64> = (0..4).map(|r| rho(3, r).to_f64()).collect();
        let want = [0.5601, 0.2801, 0.1050, 0.0364];
        Ok((got.iter().zip(want).all(|(g, w)| (g - w).abs() < 5e-5), format!("{got:.4?}")))
    });
    push("regular proportion m=2", {
        let x = predicted_regular_proportion(2);
        Ok(((x - 0.6065).abs() < 5e-5, fmt4(x)))
    });
    push("enumeration n=2 q=3", (|| {
        let e = enumerate_small(2, 3, ENUMERATION_BUDGET)?;
        let ok = e.proportions() == exact_distribution(2, 3);
        Ok((ok, format!("{:?}", e.counts)))
    })());
    push("irregular pair (37, 32)", (|| {
        let r = is_chi_regular(&DirichletChar::trivial(1), 37)?;
        let witnesses: Vec<u32> = r.witnesses.iter().map(|w| w.n).collect();
        let chi = TwistedChar::new(&DirichletChar::trivial(1), 32, 37)?;
        let l = lambda_crosscheck_twists(&chi.theta, 37, &[32], &LambdaParams::default(), cache).pop().unwrap()?;
        Ok((witnesses == [32] && l.lambda == LambdaValue::Exact(1), format!("witnesses {witnesses:?}, lambda {}", l.lambda)))
    })());
    push("trivial zero 4.1*w^1@5", (|| {
        let theta = DirichletChar::parse("4.1")?;
        let l = lambda_crosscheck_twists(&theta, 5, &[1], &LambdaParams::default(), cache).pop().unwrap()?;
        let ok = l.trivial_zero && l.lambda.floor() >= 1 && l.lambda_corr.floor() + 1 == l.lambda.floor();
        Ok((ok, format!("lambda {}, corrected {}", l.lambda, l.lambda_corr)))
    })());
    out
}
