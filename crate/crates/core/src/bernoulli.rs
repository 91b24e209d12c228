//! Bernoulli numbers, Bernoulli polynomials and generalised Bernoulli numbers `B_{n,chi}`.
//!
//! Convention: `B_1 = -1/2`. Generalised numbers are always computed from the
//! primitive character, `B_{n,chi} = d^(n-1) sum_{a=1}^{d} chi(a) B_n(a/d)` with `d` the
//! conductor, which for the trivial character gives `B_{1,1} = +1/2`.
//!
//! Two evaluation routes exist: exact values in `Q(zeta_m)` (cached on disk in
//! blocks of 64 indices) and a modular route that produces `B_{n,chi}` directly
//! in the unramified extension to a requested number of digits.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{checked_pow, inv_mod, mul_mod};
use crate::cyclotomic::CycRational;
use crate::dirichlet::DirichletChar;
use crate::error::{domain, Error, Result};
use crate::padic::{split_valuation, UnramifiedElem, UnramifiedField};

/// Block size of the on-disk cache.
pub const CACHE_BLOCK: u32 = 64;

/// Environment variable relocating the on-disk cache.
pub const CACHE_ENV: &str = "IWASAWA_CACHE_DIR";

fn bernoulli_table() -> &'static RwLock<Vec<BigRational>> {
    static TABLE: OnceLock<RwLock<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Vec::new()))
}

/// Tangent numbers `T_1..T_k` (Brent-Harvey), giving `B_{2j} = (-1)^(j-1) 2j T_j / (4^j (4^j - 1))`.
fn tangent_numbers(k: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); k + 1];
    if k == 0 {
        return t;
    }
    t[1] = BigInt::one();
    for j in 2..=k {
        t[j] = &t[j - 1] * BigInt::from(j - 1);
    }
    for i in 2..=k {
        for j in i..=k {
            t[j] = &t[j - 1] * BigInt::from(j - i) + &t[j] * BigInt::from(j - i + 2);
        }
    }
    t
}

fn fill_table(n: usize) -> Vec<BigRational> {
    let half = n / 2;
    let t = tangent_numbers(half);
    let mut out = vec![BigRational::zero(); n + 1];
    out[0] = BigRational::one();
    if n >= 1 {
        out[1] = BigRational::new((-1).into(), 2.into());
    }
    for j in 1..=half {
        let four_j: BigInt = BigInt::one() << (2 * j);
        let den = &four_j * (&four_j - 1u32);
        let mut num = &t[j] * BigInt::from(2 * j);
        if j % 2 == 0 {
            num = -num;
        }
        out[2 * j] = BigRational::new(num, den);
    }
    out
}

/// The Bernoulli number `B_n` (memoised).
pub fn bernoulli(n: u32) -> BigRational {
    let n = n as usize;
    {
        let table = bernoulli_table().read().unwrap();
        if n < table.len() {
            return table[n].clone();
        }
    }
    let mut table = bernoulli_table().write().unwrap();
    if n >= table.len() {
        let target = (n + 1).max(2 * table.len()).max(64);
        *table = fill_table(target);
    }
    table[n].clone()
}

/// `B_0..=B_n`.
pub fn bernoulli_range(n: u32) -> Vec<BigRational> {
    bernoulli(n);
    bernoulli_table().read().unwrap()[..=n as usize].to_vec()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Coefficients of `B_n(x) = sum_k C(n,k) B_k x^(n-k)`, constant term first.
pub fn bernoulli_polynomial(n: u32) -> Vec<BigRational> {
    let b = bernoulli_range(n);
    (0..=n)
        .map(|deg| {
            let k = n - deg;
            &b[k as usize] * BigRational::from_integer(binomial(n as u64, k as u64))
        })
        .collect()
}

pub fn eval_polynomial(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Class power sums `P[k][t] = sum_{1 <= a <= d, chi(a) = zeta^k} a^t` for a primitive character.
struct ClassSums {
    sums: Vec<Vec<BigInt>>,
}

impl ClassSums {
    fn new(theta: &DirichletChar, t_max: u32) -> Self {
        let d = theta.conductor();
        let m = theta.order() as usize;
        let mut sums = vec![vec![BigInt::zero(); t_max as usize + 1]; m];
        for a in 1..=d {
            let Some(k) = theta.exponent_at(a as i64) else { continue };
            let row = &mut sums[k as usize];
            let mut pw = BigInt::one();
            for slot in row.iter_mut() {
                *slot += &pw;
                pw *= a;
            }
        }
        Self { sums }
    }
}

/// Exact `B_{n,theta}` for every `n` in `ns`, `theta` primitive.
fn compute_exact(theta: &DirichletChar, ns: &[u32]) -> Vec<CycRational> {
    let Some(&n_max) = ns.iter().max() else { return Vec::new() };
    let d = BigInt::from(theta.conductor());
    let m = theta.order();
    let sums = ClassSums::new(theta, n_max);
    let b = bernoulli_range(n_max);
    let common = b.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = b.iter().map(|x| x.numer() * (&common / x.denom())).collect();
    let mut d_pows = vec![BigInt::one()];
    for e in 1..=n_max as usize {
        let next = &d_pows[e - 1] * &d;
        d_pows.push(next);
    }
    let denom = &common * &d;
    ns.iter()
        .map(|&n| {
            let binoms = binomial_row(n);
            let coeffs: Vec<BigRational> = sums
                .sums
                .iter()
                .map(|row| {
                    let mut acc = BigInt::zero();
                    for e in 0..=n as usize {
                        if scaled[e].is_zero() || row[n as usize - e].is_zero() {
                            continue;
                        }
                        acc += &binoms[e] * &d_pows[e] * &scaled[e] * &row[n as usize - e];
                    }
                    BigRational::new(acc, denom.clone())
                })
                .collect();
            CycRational::from_poly(m, coeffs)
        })
        .collect()
}

fn binomial_row(n: u32) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(c.clone());
    }
    row
}

/// `B_{n,chi}` computed from the primitive character inducing `chi`.
pub fn generalized_bernoulli(n: u32, chi: &DirichletChar) -> CycRational {
    let theta = chi.primitive();
    compute_exact(&theta, &[n]).pop().unwrap()
}

/// Exact `B_{n,theta}` for many indices at once, through `cache`.
pub fn bulk_bernoulli(theta: &DirichletChar, ns: &[u32], cache: &BernoulliCache) -> Result<Vec<CycRational>> {
    Ok(cache.get_many(theta, ns)?.into_iter().map(|x| (*x).clone()).collect())
}

/// `B_{n,theta}` in the unramified extension for every `n` in `ns`, correct to
/// absolute precision `digits` (modular route, never forms the exact rationals).
///
/// Every `p * B_e` is `p`-integral, so the sum is carried out modulo `p^(digits+1)`
/// and divided by `p` at the end.
pub fn generalized_bernoulli_padic(
    theta: &DirichletChar,
    ns: &[u32],
    field: &Arc<UnramifiedField>,
    digits: u32,
) -> Result<Vec<UnramifiedElem>> {
    let theta = theta.primitive();
    let p = field.prime();
    if field.conductor() != theta.order() {
        return domain("extension does not match the character order");
    }
    if theta.conductor() % p == 0 {
        return domain("p divides the conductor");
    }
    if field.precision() < digits + 1 {
        return domain("extension precision too small for the requested digits");
    }
    let Some(&n_max) = ns.iter().max() else { return Ok(Vec::new()) };
    let modulus = checked_pow(p, digits + 1)
        .filter(|&m| m < (1 << 62))
        .ok_or_else(|| Error::Domain(format!("p^{} does not fit in a machine word", digits + 1)))?;
    let big_mod = BigInt::from(modulus);
    let d = theta.conductor();
    let m = theta.order() as usize;

    // class power sums modulo p^(digits+1)
    let mut sums = vec![vec![0u64; n_max as usize + 1]; m];
    for a in 1..=d {
        let Some(k) = theta.exponent_at(a as i64) else { continue };
        let row = &mut sums[k as usize];
        let mut pw = 1u64;
        let am = a % modulus;
        for slot in row.iter_mut() {
            *slot = (*slot + pw) % modulus;
            pw = mul_mod(pw, am, modulus);
        }
    }

    // p * B_e modulo p^(digits+1)
    let b = bernoulli_range(n_max);
    let pb: Vec<u64> = b
        .iter()
        .map(|x| {
            if x.is_zero() {
                return 0;
            }
            let (vd, den) = split_valuation(x.denom(), p);
            debug_assert!(vd <= 1);
            let num = if vd == 0 { x.numer() * BigInt::from(p) } else { x.numer().clone() };
            let den_inv = inv_mod(den.mod_floor(&big_mod).to_u64().unwrap(), modulus).unwrap();
            mul_mod(num.mod_floor(&big_mod).to_u64().unwrap(), den_inv, modulus)
        })
        .collect();

    // d^(e-1) for e = 0..=n_max
    let d_inv = inv_mod(d % modulus, modulus).expect("p does not divide d");
    let mut d_pows = vec![d_inv];
    for e in 1..=n_max as usize {
        d_pows.push(mul_mod(d_pows[e - 1], d % modulus, modulus));
    }

    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by_key(|&i| ns[i]);
    let mut out: Vec<Option<UnramifiedElem>> = vec![None; ns.len()];
    let mut row = vec![1u64];
    let mut row_n = 0u32;
    for idx in order {
        let n = ns[idx];
        while row_n < n {
            let mut next = vec![1u64; row.len() + 1];
            for k in 1..row.len() {
                next[k] = (row[k - 1] + row[k]) % modulus;
            }
            row = next;
            row_n += 1;
        }
        let mut vec_acc = vec![BigInt::zero(); field.degree()];
        for (k, class) in sums.iter().enumerate() {
            let mut s = 0u64;
            for e in 0..=n as usize {
                if pb[e] == 0 {
                    continue;
                }
                let term = mul_mod(mul_mod(row[e], pb[e], modulus), mul_mod(d_pows[e], class[n as usize - e], modulus), modulus);
                s = (s + term) % modulus;
            }
            if s != 0 {
                let z = field.zeta_power(k as i64);
                let zc = z.integral_coeffs(digits + 1)?;
                for (slot, c) in vec_acc.iter_mut().zip(zc) {
                    *slot += c * s;
                }
            }
        }
        out[idx] = Some(UnramifiedElem::from_integral(field.clone(), -1, vec_acc, digits + 1));
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Exact generalised Bernoulli numbers with an in-memory map and an optional
/// on-disk store at `<root>/bernoulli/<modulus>/<label>/<block>.txt`.
pub struct BernoulliCache {
    root: Option<PathBuf>,
    memory: Option<Mutex<HashMap<(String, u32), Arc<CycRational>>>>,
    computed: AtomicU64,
    repaired: AtomicU64,
}

const MEMORY_LIMIT: usize = 200_000;

impl BernoulliCache {
    /// Memoises in memory only.
    pub fn in_memory() -> Self {
        Self { root: None, memory: Some(Mutex::new(HashMap::new())), computed: AtomicU64::new(0), repaired: AtomicU64::new(0) }
    }

    /// Memoises in memory and persists under `root`.
    pub fn on_disk(root: impl Into<PathBuf>) -> Self {
        Self { root: Some(root.into()), ..Self::in_memory() }
    }

    /// Recomputes every request.
    pub fn disabled() -> Self {
        Self { root: None, memory: None, computed: AtomicU64::new(0), repaired: AtomicU64::new(0) }
    }

    /// On-disk cache at `$IWASAWA_CACHE_DIR`, or `./cache` when unset.
    pub fn from_env() -> Self {
        let root = std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("cache"));
        Self::on_disk(root)
    }

    /// Number of generalised Bernoulli numbers computed from scratch so far.
    pub fn computations(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    /// Number of corrupt cache blocks that were recomputed.
    pub fn repairs(&self) -> u64 {
        self.repaired.load(Ordering::Relaxed)
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn block_path(&self, theta: &DirichletChar, block: u32) -> Option<PathBuf> {
        self.root.as_ref().map(|r| {
            r.join("bernoulli")
                .join(theta.modulus().to_string())
                .join(theta.label())
                .join(format!("{block}.txt"))
        })
    }

    pub fn get_many(&self, theta: &DirichletChar, ns: &[u32]) -> Result<Vec<Arc<CycRational>>> {
        let theta = theta.primitive();
        let label = theta.label();
        let mut found: HashMap<u32, Arc<CycRational>> = HashMap::new();
        if let Some(mem) = &self.memory {
            let mem = mem.lock().unwrap();
            for &n in ns {
                if let Some(v) = mem.get(&(label.clone(), n)) {
                    found.insert(n, v.clone());
                }
            }
        }
        let mut missing: Vec<u32> = ns.iter().copied().filter(|n| !found.contains_key(n)).collect();
        missing.sort_unstable();
        missing.dedup();

        if self.root.is_some() && !missing.is_empty() {
            let mut blocks: Vec<u32> = missing.iter().map(|n| n / CACHE_BLOCK).collect();
            blocks.dedup();
            for block in blocks {
                let stored = self.read_block(&theta, block);
                for n in missing.iter().filter(|n| *n / CACHE_BLOCK == block) {
                    if let Some(v) = stored.get(n) {
                        found.insert(*n, Arc::new(v.clone()));
                    }
                }
            }
            missing.retain(|n| !found.contains_key(n));
        }

        if !missing.is_empty() {
            let fresh = compute_exact(&theta, &missing);
            self.computed.fetch_add(fresh.len() as u64, Ordering::Relaxed);
            let pairs: Vec<(u32, Arc<CycRational>)> =
                missing.iter().copied().zip(fresh.into_iter().map(Arc::new)).collect();
            if self.root.is_some() {
                self.write_blocks(&theta, &pairs)?;
            }
            for (n, v) in pairs {
                found.insert(n, v);
            }
        }

        if let Some(mem) = &self.memory {
            let mut mem = mem.lock().unwrap();
            if mem.len() > MEMORY_LIMIT {
                mem.clear();
            }
            for (n, v) in &found {
                mem.entry((label.clone(), *n)).or_insert_with(|| v.clone());
            }
        }
        Ok(ns.iter().map(|n| found[n].clone()).collect())
    }

    fn read_block(&self, theta: &DirichletChar, block: u32) -> HashMap<u32, CycRational> {
        let Some(path) = self.block_path(theta, block) else { return HashMap::new() };
        let Ok(text) = fs::read_to_string(&path) else { return HashMap::new() };
        match parse_block(&text, theta.order()) {
            Ok(map) => map,
            Err(e) => {
                log::warn!("corrupt Bernoulli cache entry {}: {e}; recomputing", path.display());
                self.repaired.fetch_add(1, Ordering::Relaxed);
                let _ = fs::remove_file(&path);
                HashMap::new()
            }
        }
    }

    fn write_blocks(&self, theta: &DirichletChar, pairs: &[(u32, Arc<CycRational>)]) -> Result<()> {
        let mut by_block: HashMap<u32, Vec<&(u32, Arc<CycRational>)>> = HashMap::new();
        for pair in pairs {
            by_block.entry(pair.0 / CACHE_BLOCK).or_default().push(pair);
        }
        for (block, items) in by_block {
            let path = self.block_path(theta, block).unwrap();
            let mut merged = self.read_block(theta, block);
            for (n, v) in items {
                merged.insert(*n, (**v).clone());
            }
            fs::create_dir_all(path.parent().unwrap())?;
            let mut keys: Vec<&u32> = merged.keys().collect();
            keys.sort();
            let mut body = String::new();
            for n in keys {
                body.push_str(&format_entry(*n, &merged[n]));
                body.push('\n');
            }
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            let mut fh = fs::File::create(&tmp)?;
            fh.write_all(body.as_bytes())?;
            drop(fh);
            fs::rename(&tmp, &path)?;
        }
        Ok(())
    }
}

fn format_entry(n: u32, x: &CycRational) -> String {
    let mut s = n.to_string();
    for c in x.coeffs() {
        s.push(';');
        s.push_str(&c.to_string());
    }
    s
}

fn parse_block(text: &str, m: u64) -> std::result::Result<HashMap<u32, CycRational>, String> {
    let width = crate::arith::euler_phi(m) as usize;
    let mut out = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(';');
        let n: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("line {}: bad index", lineno + 1))?;
        let coeffs: Vec<BigRational> = parts
            .map(|s| BigRational::from_str(s).map_err(|_| format!("line {}: bad rational '{s}'", lineno + 1)))
            .collect::<std::result::Result<_, _>>()?;
        if coeffs.len() != width {
            return Err(format!("line {}: expected {width} coefficients", lineno + 1));
        }
        out.insert(n, CycRational::from_poly(m, coeffs));
    }
    Ok(out)
}

/// Reduces a rational to its residue modulo a prime `p` (`None` if `p` divides the denominator).
pub fn rational_mod(x: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let den = x.denom().mod_floor(&pb).to_u64().unwrap();
    if den == 0 {
        return None;
    }
    let num = x.numer().mod_floor(&pb).to_u64().unwrap();
    Some(mul_mod(num, inv_mod(den, p).unwrap(), p))
}
