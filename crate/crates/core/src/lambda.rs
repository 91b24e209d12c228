//! Iwasawa lambda-invariants of `L_p(s, theta * omega^i)`.
//!
//! Two independent routes produce the power series `G(T)` with
//! `L_p(1 - s, chi) = G((1+p)^s - 1)`:
//!
//! * [`lambda_method_one`] interpolates `G` through its values at
//!   `T = (1+p)^(n-1) - 1`, which are Euler-corrected Bernoulli numbers;
//! * [`lambda_method_two`] expands a regularised finite Dirichlet sum in the
//!   variable `T = (1+pd)^s - 1` and divides out the regularisation factor by
//!   additivity of lambda.
//!
//! [`lambda_crosscheck`] runs both and refuses to answer when they disagree.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{checked_pow, factorial_valuation, gcd, ilog, inv_mod, mul_mod, pow_mod, valuation};
use crate::bernoulli::BernoulliCache;
use crate::cyclotomic::CycRational;
use crate::dirichlet::{DirichletChar, TwistedChar};
use crate::error::{Error, Result};
use crate::padic::{build_extension_with_choice, pow_big, small, PadicScalar, UnramifiedElem, UnramifiedField};

/// Tunable parameters shared by both methods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaParams {
    /// Interpolation points `C` of the first method.
    pub points: usize,
    /// Working precision `K` of the first method; `None` picks a safe default.
    pub precision: Option<u32>,
    /// Depth `N` of the second method (the sum runs to `d * p^N`).
    pub series_depth: u32,
    /// Number `J` of series coefficients; `None` means `p + 2`.
    pub series_terms: Option<usize>,
    /// Regularisation point `c`; `None` means 2 when admissible.
    pub regularization: Option<u64>,
    /// Characters whose residue degree exceeds this are excluded.
    pub max_residue_degree: u64,
    /// Which factor of `Phi_m mod p` defines the embedding (0 is canonical).
    pub factor_choice: usize,
}

impl Default for LambdaParams {
    fn default() -> Self {
        Self {
            points: 15,
            precision: None,
            series_depth: 4,
            series_terms: None,
            regularization: None,
            max_residue_degree: 12,
            factor_choice: 0,
        }
    }
}

impl LambdaParams {
    /// The precision `K` actually used for `chi`.
    ///
    /// Divided differences of order `C-1` divide by `p^(C-1 + v_p((C-1)!))`, and
    /// `1/n` at the largest node costs another `log_p(n)` digits.
    pub fn precision_for(&self, p: u64, i: u64) -> u32 {
        self.precision.unwrap_or_else(|| {
            let c = self.points as u64;
            let n_max = i + c * (p - 1);
            c as u32 + 10 + factorial_valuation(c.saturating_sub(1), p) + ilog(n_max.max(1), p)
        })
    }

    pub fn terms_for(&self, p: u64) -> usize {
        self.series_terms.unwrap_or(p as usize + 2)
    }

    /// The regularisation point for conductor `d`: the configured one, else 2
    /// when `d` is odd, else the smallest `c >= 3` prime to `p * d`.
    pub fn regularization_for(&self, p: u64, d: u64) -> u64 {
        self.regularization
            .unwrap_or_else(|| (2..).find(|&c| gcd(c, p * d) == 1).expect("infinitely many candidates"))
    }
}

/// A lambda-invariant, or a lower bound when no unit coefficient was in range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LambdaValue {
    Exact(u32),
    AtLeast(u32),
}

impl LambdaValue {
    pub fn exact(self) -> Option<u32> {
        match self {
            Self::Exact(l) => Some(l),
            Self::AtLeast(_) => None,
        }
    }

    /// The value itself, or the bound.
    pub fn floor(self) -> u32 {
        match self {
            Self::Exact(l) | Self::AtLeast(l) => l,
        }
    }

    fn minus_one(self) -> Self {
        match self {
            Self::Exact(l) => Self::Exact(l.saturating_sub(1)),
            Self::AtLeast(l) => Self::AtLeast(l.saturating_sub(1)),
        }
    }

    /// Whether a true value could be described by both `self` and `other`.
    pub fn compatible(self, other: Self) -> bool {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => a == b,
            (Self::Exact(a), Self::AtLeast(b)) | (Self::AtLeast(b), Self::Exact(a)) => a >= b,
            (Self::AtLeast(_), Self::AtLeast(_)) => true,
        }
    }
}

impl fmt::Display for LambdaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(l) => write!(f, "{l}"),
            Self::AtLeast(l) => write!(f, ">={l}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Interpolation,
    Series,
    Both,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Interpolation => "interpolation",
            Self::Series => "series",
            Self::Both => "both",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    /// Single method, nothing to compare.
    Unchecked,
    /// Both methods returned the same exact value.
    Identical,
    /// One method only produced a bound, consistent with the other.
    BoundConsistent,
}

#[derive(Clone, Debug)]
pub struct LambdaResult {
    pub theta: DirichletChar,
    pub i: u64,
    pub p: u64,
    pub lambda: LambdaValue,
    /// `lambda - 1` when the trivial zero is present, else `lambda`.
    pub lambda_corr: LambdaValue,
    pub trivial_zero: bool,
    /// Order of `theta`.
    pub order: u64,
    pub residue_degree: u64,
    pub method: Method,
    pub points: usize,
    pub precision: u32,
    pub series_depth: u32,
    pub regularization: Option<u64>,
    pub agreement: Agreement,
}

impl LambdaResult {
    pub fn label(&self) -> String {
        format!("{}*w^{}@{}", self.theta.label(), self.i, self.p)
    }
}

/// Rejects characters outside the scope of both methods.
pub fn check_admissible(chi: &TwistedChar, params: &LambdaParams) -> Result<()> {
    if !chi.is_even() {
        return Err(Error::Domain(format!("{} is odd", chi.label())));
    }
    if chi.is_trivial() {
        return Err(Error::Domain("the trivial character has a pole".into()));
    }
    if chi.theta.order() % chi.p == 0 {
        return Err(Error::Domain(format!("p = {} divides the order of {}", chi.p, chi.theta)));
    }
    let f = chi.residue_degree();
    if f > params.max_residue_degree {
        return Err(Error::Domain(format!("residue degree {f} exceeds the bound {}", params.max_residue_degree)));
    }
    Ok(())
}

fn base_result(chi: &TwistedChar, lambda: LambdaValue, method: Method, params: &LambdaParams) -> LambdaResult {
    let trivial_zero = chi.has_trivial_zero();
    LambdaResult {
        theta: chi.theta.clone(),
        i: chi.i,
        p: chi.p,
        lambda,
        lambda_corr: if trivial_zero { lambda.minus_one() } else { lambda },
        trivial_zero,
        order: chi.theta.order(),
        residue_degree: chi.residue_degree(),
        method,
        points: params.points,
        precision: params.precision_for(chi.p, chi.i),
        series_depth: params.series_depth,
        regularization: None,
        agreement: Agreement::Unchecked,
    }
}

// ---------------------------------------------------------------------------
// Method I
// ---------------------------------------------------------------------------

/// Nodes `(n_k, t_k)` with `n_k = i + k(p-1)`, `k = 1..=C`, and
/// `t_k = (1+p)^(n_k - 1) - 1`.
pub fn interpolation_nodes(p: u64, i: u64, c: usize) -> Vec<(u64, BigInt)> {
    let base = BigInt::from(p + 1);
    (1..=c as u64)
        .map(|k| {
            let n = i + k * (p - 1);
            (n, num_traits::pow(base.clone(), (n - 1) as usize) - 1)
        })
        .collect()
}

/// `G(t) = -(1 - theta(p) p^(n-1)) B_{n,theta} / n` for `t = (1+p)^(n-1) - 1`.
pub fn lvalue_at_node(chi: &TwistedChar, n: u64, field: &Arc<UnramifiedField>, cache: &BernoulliCache) -> Result<UnramifiedElem> {
    let p = chi.p;
    if n == 0 || (n + p - 1 - chi.i) % (p - 1) != 0 {
        return Err(Error::Domain(format!("n = {n} is not congruent to i = {} mod p-1", chi.i)));
    }
    let b = cache.get_many(&chi.theta, &[n as u32])?.pop().unwrap();
    node_value(chi, n, &b, field)
}

fn node_value(chi: &TwistedChar, n: u64, b: &CycRational, field: &Arc<UnramifiedField>) -> Result<UnramifiedElem> {
    let p = chi.p;
    let k = field.precision();
    let kp = chi
        .theta
        .exponent_at(p as i64)
        .ok_or_else(|| Error::Domain(format!("p = {p} divides the conductor")))?;
    let pn = PadicScalar::from_bigint(p, &pow_big(p, (n - 1) as u32), k);
    let euler = UnramifiedElem::one(field.clone()).sub(&field.zeta_power(kp as i64).mul_scalar(&pn));
    let bern = field.embed_cyclotomic(b)?;
    let nn = PadicScalar::from_i64(p, n as i64, k + 10);
    Ok(euler.mul(&bern).div_scalar(&nn)?.neg())
}

/// A truncated power series with a guaranteed absolute precision per coefficient.
#[derive(Clone, Debug)]
pub struct PowerSeriesApprox {
    pub coeffs: Vec<UnramifiedElem>,
    /// `e_j`: the coefficient `c_j` is correct modulo `p^(e_j)`.
    pub precisions: Vec<i64>,
}

impl PowerSeriesApprox {
    /// `lambda` by the first-unit rule.
    pub fn lambda(&self) -> Result<LambdaValue> {
        first_unit(&self.coeffs, &self.precisions).map(|j| match j {
            Some(j) => LambdaValue::Exact(j as u32),
            None => LambdaValue::AtLeast(self.coeffs.len() as u32),
        })
    }

    /// Horner evaluation at a scalar.
    pub fn evaluate(&self, t: &PadicScalar) -> UnramifiedElem {
        let mut it = self.coeffs.iter().rev();
        let mut acc = it.next().expect("empty series").clone();
        for c in it {
            acc = acc.mul_scalar(t).add(c);
        }
        acc
    }
}

/// Index of the first unit coefficient; every earlier one must be provably
/// divisible by `p`.
fn first_unit(coeffs: &[UnramifiedElem], precisions: &[i64]) -> Result<Option<usize>> {
    for (j, (c, &e)) in coeffs.iter().zip(precisions).enumerate() {
        if e < 1 {
            return Err(Error::PrecisionExhausted(format!("coefficient {j} is known to {e} digits only")));
        }
        let v = c.valuation();
        if v < 0 && !c.is_zero() {
            return Err(Error::NonIntegral(format!("coefficient {j} has valuation {v}")));
        }
        if v == 0 && !c.is_zero() {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// The interpolating polynomial of the first method in monomial form.
pub fn interpolate_series(chi: &TwistedChar, params: &LambdaParams, cache: &BernoulliCache) -> Result<PowerSeriesApprox> {
    check_admissible(chi, params)?;
    let (p, c) = (chi.p, params.points);
    if c < 2 {
        return Err(Error::Domain("at least two interpolation points are needed".into()));
    }
    let k = params.precision_for(p, chi.i);
    let field = build_extension_with_choice(p, chi.theta.order(), k, params.factor_choice)?;
    let nodes = interpolation_nodes(p, chi.i, c);
    let ns: Vec<u32> = nodes.iter().map(|(n, _)| *n as u32).collect();
    let bern = cache.get_many(&chi.theta, &ns)?;
    let tprec = k + c as u32 + 10;
    let ts: Vec<PadicScalar> = nodes.iter().map(|(_, t)| PadicScalar::from_bigint(p, t, tprec)).collect();
    let mut coef = nodes
        .iter()
        .zip(&bern)
        .map(|((n, _), b)| node_value(chi, *n, b, &field))
        .collect::<Result<Vec<_>>>()?;

    // Newton divided differences
    for level in 1..c {
        for j in (level..c).rev() {
            let diff = coef[j].sub(&coef[j - 1]);
            coef[j] = diff.div_scalar(&ts[j].sub(&ts[j - level]))?;
        }
    }
    // Newton form to monomial form
    let mut poly = vec![coef[c - 1].clone()];
    for j in (0..c - 1).rev() {
        let mut next = Vec::with_capacity(poly.len() + 1);
        next.push(coef[j].sub(&poly[0].mul_scalar(&ts[j])));
        for idx in 1..poly.len() {
            next.push(poly[idx - 1].sub(&poly[idx].mul_scalar(&ts[j])));
        }
        next.push(poly[poly.len() - 1].clone());
        poly = next;
    }
    let precisions = poly
        .iter()
        .enumerate()
        .map(|(j, x)| ((c - j) as i64).min(x.abs_precision()))
        .collect();
    Ok(PowerSeriesApprox { coeffs: poly, precisions })
}

/// Lambda by interpolation of `C` special values.
pub fn lambda_method_one(chi: &TwistedChar, params: &LambdaParams, cache: &BernoulliCache) -> Result<LambdaResult> {
    let series = interpolate_series(chi, params, cache)?;
    let lambda = series.lambda()?;
    if chi.has_trivial_zero() && lambda == LambdaValue::Exact(0) {
        return Err(Error::Inconsistent(format!("{}: G(0) is a unit despite the trivial zero", chi.label())));
    }
    Ok(base_result(chi, lambda, Method::Interpolation, params))
}

// ---------------------------------------------------------------------------
// Method II
// ---------------------------------------------------------------------------

/// Coefficients (modulo `p^digits`) of the regularised sum and of the
/// regularisation factor for one twist.
#[derive(Clone, Debug)]
pub struct SeriesExpansion {
    pub i: u64,
    pub lhs: Vec<UnramifiedElem>,
    pub factor: Vec<UnramifiedElem>,
    pub digits: u32,
    pub regularization: u64,
}

impl SeriesExpansion {
    pub fn lambda(&self) -> Result<LambdaValue> {
        let e = vec![self.digits as i64; self.lhs.len()];
        let lf = first_unit(&self.factor, &e)?.ok_or_else(|| {
            Error::Domain(format!(
                "regularisation at c = {} has no unit among {} coefficients; choose another c",
                self.regularization,
                self.factor.len()
            ))
        })?;
        match first_unit(&self.lhs, &e)? {
            Some(la) if la < lf => Err(Error::Inconsistent(format!(
                "lambda of the regularised sum ({la}) is below that of the factor ({lf})"
            ))),
            Some(la) => Ok(LambdaValue::Exact((la - lf) as u32)),
            None => Ok(LambdaValue::AtLeast((self.lhs.len() - lf) as u32)),
        }
    }
}

/// Machine-word context for one `(theta, p)` pass.
struct SeriesContext {
    p: u64,
    depth: u32,
    digits: u32,
    terms: usize,
    /// `p^(N-1)`, the modulus of `l(a)`.
    lmod: u64,
    /// `p^digits`, the modulus of every output coefficient.
    out_mod: u64,
    log_base_inv: u64,
    inv_pm1: u64,
    /// `p`-adic valuation and inverse of the unit part of `j!`.
    fact: Vec<(u32, u64)>,
}

impl SeriesContext {
    fn new(p: u64, d: u64, depth: u32, terms: usize) -> Result<Self> {
        let vmax = factorial_valuation(terms.saturating_sub(1) as u64, p);
        if depth < vmax + 2 {
            return Err(Error::PrecisionExhausted(format!(
                "series depth {depth} leaves no digits for {terms} coefficients"
            )));
        }
        let digits = depth - 1 - vmax;
        let pn = checked_pow(p, depth).filter(|&x| x < 1 << 40).ok_or_else(|| Error::Budget("p^N too large".into()))?;
        let lmod = pn / p;
        let out_mod = checked_pow(p, digits).unwrap();
        let lb = small::log_one_unit((1 + p * (d % pn)) % pn, p, depth) / p;
        let log_base_inv = inv_mod(lb % lmod, lmod).ok_or_else(|| Error::Inconsistent("log(1+pd)/p is not a unit".into()))?;
        let inv_pm1 = inv_mod(p - 1, lmod).unwrap();
        let mut fact = Vec::with_capacity(terms);
        let mut unit = 1u64;
        for j in 0..terms as u64 {
            if j > 0 {
                let v = valuation(j, p);
                unit = mul_mod(unit, (j / checked_pow(p, v).unwrap()) % lmod, lmod);
            }
            fact.push((factorial_valuation(j, p), inv_mod(unit, lmod).unwrap()));
        }
        Ok(Self { p, depth, digits, terms, lmod, out_mod, log_base_inv, inv_pm1, fact })
    }

    /// `l(a) = -log<a> / log(1+pd)` modulo `p^(N-1)`.
    fn ell(&self, a: u64) -> u64 {
        let pn = self.lmod * self.p;
        let u = pow_mod(a % pn, self.p - 1, pn);
        let lg = small::log_one_unit(u, self.p, self.depth) / self.p;
        let lg = mul_mod(lg, self.inv_pm1, self.lmod);
        (self.lmod - mul_mod(lg, self.log_base_inv, self.lmod)) % self.lmod
    }

    /// `binom(l, j)` modulo `p^digits` for `j < terms`.
    fn binomials(&self, l: u64, out: &mut Vec<u64>) {
        out.clear();
        let mut num = 1u64;
        for j in 0..self.terms {
            if j > 0 {
                num = mul_mod(num, (l + self.lmod - (j as u64 - 1) % self.lmod) % self.lmod, self.lmod);
            }
            let (v, inv) = self.fact[j];
            let pv = checked_pow(self.p, v).unwrap();
            debug_assert!(num % pv == 0);
            out.push(mul_mod(num / pv % self.out_mod, inv % self.out_mod, self.out_mod));
        }
    }
}

/// Largest weight table (`p^N * ord(theta)` entries) a series pass allocates.
pub const SERIES_TABLE_BUDGET: u64 = 1 << 24;

/// Upper bound on the automatic growth of the number of series terms.
pub const MAX_SERIES_TERMS: usize = 64;

/// Coefficients for every twist in `twists` from a single pass over `a <= d p^N`.
///
/// When `series_terms` is automatic and some twist has no unit among its
/// coefficients, that twist is recomputed with twice the terms and a depth
/// keeping the same number of digits, until a unit shows up or the budget
/// runs out.
pub fn series_expansions(theta: &DirichletChar, p: u64, twists: &[u64], params: &LambdaParams) -> Result<Vec<SeriesExpansion>> {
    let terms = params.terms_for(p);
    let mut out = series_pass(theta, p, twists, params, params.series_depth, terms)?;
    if params.series_terms.is_some() {
        return Ok(out);
    }
    let digits = out.first().map_or(0, |e| e.digits);
    let mut terms = terms;
    loop {
        let open: Vec<usize> = (0..out.len()).filter(|&k| matches!(out[k].lambda(), Ok(LambdaValue::AtLeast(_)))).collect();
        if open.is_empty() || terms >= MAX_SERIES_TERMS {
            return Ok(out);
        }
        terms = (2 * terms).min(MAX_SERIES_TERMS);
        let depth = params.series_depth.max(digits + 1 + factorial_valuation(terms as u64 - 1, p));
        let retry: Vec<u64> = open.iter().map(|&k| twists[k]).collect();
        match series_pass(theta, p, &retry, params, depth, terms) {
            Ok(more) => {
                for (k, e) in open.into_iter().zip(more) {
                    out[k] = e;
                }
            }
            Err(Error::Budget(_)) => return Ok(out),
            Err(e) => return Err(e),
        }
    }
}

fn series_pass(theta: &DirichletChar, p: u64, twists: &[u64], params: &LambdaParams, depth: u32, terms: usize) -> Result<Vec<SeriesExpansion>> {
    let theta = theta.primitive();
    let d = theta.conductor();
    if d % p == 0 {
        return Err(Error::Domain(format!("p = {p} divides the conductor of {theta}")));
    }
    let m = theta.order() as usize;
    let ctx = SeriesContext::new(p, d, depth, terms)?;
    let c = params.regularization_for(p, d);
    if c < 2 || gcd(c, p * d) != 1 {
        return Err(Error::Domain(format!("regularisation point {c} must be at least 2 and prime to p*d")));
    }
    let pn = ctx.lmod * p;
    let big_f = d
        .checked_mul(pn)
        .filter(|&f| f.checked_mul(c).is_some())
        .ok_or_else(|| Error::Budget(format!("d * p^N overflows for d = {d}")))?;

    // W[r][k]: twice the weight of all a = r mod p^N with theta(a) = zeta^k
    let class: Vec<i64> = (0..d).map(|a| theta.exponent_at(a as i64).map_or(-1, |e| e as i64)).collect();
    if pn as u128 * m as u128 > SERIES_TABLE_BUDGET as u128 {
        return Err(Error::Budget(format!("weight table of {pn} x {m} entries")));
    }
    let mut w = vec![0i64; pn as usize * m];
    let cinv = inv_mod(c % big_f, big_f).unwrap();
    let mut y = 0u64;
    let mut amod = 0u64;
    for _t in 0..d {
        let mut rp = 0u64;
        for r in 0..pn {
            let k = class[amod as usize];
            if rp != 0 && k >= 0 {
                let w2 = (c as i64 - 1) - 2 * ((c * y) / big_f) as i64;
                w[r as usize * m + k as usize] += w2;
            }
            y += cinv;
            if y >= big_f {
                y -= big_f;
            }
            amod += 1;
            if amod == d {
                amod = 0;
            }
            rp += 1;
            if rp == p {
                rp = 0;
            }
        }
    }

    // Acc[k][rho][j] with rho = r mod p
    let om = ctx.out_mod;
    let stride = (p as usize - 1) * terms;
    let mut acc = vec![0u64; m * stride];
    let mut bins = Vec::with_capacity(terms);
    for r in 1..pn {
        if r % p == 0 {
            continue;
        }
        let row = &w[r as usize * m..(r as usize + 1) * m];
        if row.iter().all(|&x| x == 0) {
            continue;
        }
        ctx.binomials(ctx.ell(r), &mut bins);
        let rho = (r % p) as usize - 1;
        for (k, &wk) in row.iter().enumerate() {
            if wk == 0 {
                continue;
            }
            let wm = wk.rem_euclid(om as i64) as u64;
            let base = k * stride + rho * terms;
            for (slot, b) in acc[base..base + terms].iter_mut().zip(&bins) {
                *slot = (*slot + mul_mod(wm, *b, om)) % om;
            }
        }
    }

    let field = build_extension_with_choice(p, m as u64, ctx.digits, params.factor_choice)?;
    let zc: Vec<Vec<BigInt>> = (0..m).map(|k| field.zeta_power(k as i64).integral_coeffs(ctx.digits)).collect::<Result<_>>()?;
    let inv2 = inv_mod(2, om).unwrap();
    let teich: Vec<u64> = (1..p).map(|a| small::teichmuller(a, p, ctx.digits)).collect();
    let c_class = theta.exponent_at(c as i64).expect("c is prime to d") as usize;
    ctx.binomials(ctx.ell(c), &mut bins);

    let mut out = Vec::with_capacity(twists.len());
    for &i in twists {
        let e = (i % (p - 1) + p - 2) % (p - 1);
        let wpow: Vec<u64> = teich.iter().map(|&t| pow_mod(t, e, om)).collect();
        let mut lhs = Vec::with_capacity(terms);
        for j in 0..terms {
            let mut vec_acc = vec![BigInt::zero(); field.degree()];
            for (k, z) in zc.iter().enumerate() {
                let mut s = 0u64;
                for (rho, wp) in wpow.iter().enumerate() {
                    s = (s + mul_mod(*wp, acc[k * stride + rho * terms + j], om)) % om;
                }
                if s == 0 {
                    continue;
                }
                let s = BigInt::from(mul_mod(s, inv2, om));
                for (slot, zz) in vec_acc.iter_mut().zip(z) {
                    *slot += &s * zz;
                }
            }
            lhs.push(UnramifiedElem::from_integral(field.clone(), 0, vec_acc, ctx.digits));
        }
        // theta(c) omega(c)^(i-1) c, times binom(l(c), j)
        let scal = mul_mod(pow_mod(small::teichmuller(c % om, p, ctx.digits), e, om), c % om, om);
        let factor = bins
            .iter()
            .enumerate()
            .map(|(j, b)| {
                let s = BigInt::from(mul_mod(scal, *b, om));
                let mut v: Vec<BigInt> = zc[c_class].iter().map(|z| -(z * &s)).collect();
                if j == 0 {
                    v[0] += BigInt::one();
                }
                UnramifiedElem::from_integral(field.clone(), 0, v, ctx.digits)
            })
            .collect();
        out.push(SeriesExpansion { i: i % (p - 1), lhs, factor, digits: ctx.digits, regularization: c });
    }
    Ok(out)
}

fn method_two_result(chi: &TwistedChar, exp: &SeriesExpansion, params: &LambdaParams) -> Result<LambdaResult> {
    let lambda = exp.lambda()?;
    if chi.has_trivial_zero() && lambda.floor() == 0 {
        return Err(Error::Inconsistent(format!("{}: series misses the trivial zero", chi.label())));
    }
    let mut res = base_result(chi, lambda, Method::Series, params);
    res.regularization = Some(exp.regularization);
    Ok(res)
}

/// Lambda from the regularised Dirichlet series.
pub fn lambda_method_two(chi: &TwistedChar, params: &LambdaParams) -> Result<LambdaResult> {
    check_admissible(chi, params)?;
    let exp = series_expansions(&chi.theta, chi.p, &[chi.i], params)?.pop().unwrap();
    method_two_result(chi, &exp, params)
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

fn residues(xs: &[UnramifiedElem]) -> String {
    xs.iter()
        .map(|x| match x.residue() {
            Ok(r) if x.valuation() == 0 && !x.is_zero() => format!("{r:?}"),
            _ => "0".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn combine(
    chi: &TwistedChar,
    one: &LambdaResult,
    two: &LambdaResult,
    series: &PowerSeriesApprox,
    exp: &SeriesExpansion,
) -> Result<LambdaResult> {
    if !one.lambda.compatible(two.lambda) {
        return Err(Error::MethodDisagreement {
            label: chi.label(),
            one: format!("lambda {} from residues {}", one.lambda, residues(&series.coeffs)),
            two: format!("lambda {} from residues {} / {}", two.lambda, residues(&exp.lhs), residues(&exp.factor)),
        });
    }
    let (lambda, agreement) = match (one.lambda, two.lambda) {
        (LambdaValue::Exact(a), LambdaValue::Exact(_)) => (LambdaValue::Exact(a), Agreement::Identical),
        (LambdaValue::Exact(a), _) | (_, LambdaValue::Exact(a)) => (LambdaValue::Exact(a), Agreement::BoundConsistent),
        (LambdaValue::AtLeast(a), LambdaValue::AtLeast(b)) => {
            return Err(Error::MuNonzero(format!(
                "{}: no unit coefficient below {} (interpolation) or {} (series)",
                chi.label(),
                a,
                b
            )))
        }
    };
    let mut res = one.clone();
    res.lambda = lambda;
    res.lambda_corr = if res.trivial_zero { lambda.minus_one() } else { lambda };
    res.method = Method::Both;
    res.regularization = two.regularization;
    res.agreement = agreement;
    Ok(res)
}

/// Both methods; a disagreement is an error.
pub fn lambda_crosscheck(chi: &TwistedChar, params: &LambdaParams, cache: &BernoulliCache) -> Result<LambdaResult> {
    lambda_crosscheck_twists(&chi.theta, chi.p, &[chi.i], params, cache).pop().unwrap()
}

/// [`lambda_crosscheck`] for several twists of one `theta`, sharing the
/// series pass. Inadmissible twists yield their own error.
pub fn lambda_crosscheck_twists(
    theta: &DirichletChar,
    p: u64,
    twists: &[u64],
    params: &LambdaParams,
    cache: &BernoulliCache,
) -> Vec<Result<LambdaResult>> {
    let chis: Vec<Result<TwistedChar>> = twists
        .iter()
        .map(|&i| TwistedChar::new(theta, i, p).and_then(|chi| check_admissible(&chi, params).map(|_| chi)))
        .collect();
    let good: Vec<u64> = chis.iter().filter_map(|c| c.as_ref().ok().map(|c| c.i)).collect();
    if good.is_empty() {
        return chis.into_iter().map(|c| c.map(|_| unreachable!())).collect();
    }
    let exps = match series_expansions(theta, p, &good, params) {
        Ok(e) => e,
        Err(e) => {
            let msg = e.to_string();
            return chis
                .into_iter()
                .map(|c| c.and_then(|_| Err(Error::Inconsistent(format!("series pass failed: {msg}")))))
                .collect();
        }
    };
    let mut exps = exps.into_iter();
    chis.into_iter()
        .map(|c| {
            let chi = c?;
            let exp = exps.next().unwrap();
            let series = interpolate_series(&chi, params, cache)?;
            let one = base_result(&chi, series.lambda()?, Method::Interpolation, params);
            if chi.has_trivial_zero() && one.lambda == LambdaValue::Exact(0) {
                return Err(Error::Inconsistent(format!("{}: G(0) is a unit despite the trivial zero", chi.label())));
            }
            let two = method_two_result(&chi, &exp, params)?;
            combine(&chi, &one, &two, &series, &exp)
        })
        .collect()
}
