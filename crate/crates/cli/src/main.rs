mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iwasawa_core::bernoulli::{BernoulliCache, CACHE_ENV};
use iwasawa_core::dirichlet::{DirichletChar, TwistedChar};
use iwasawa_core::experiments::{self, Excluded, ScanConfig};
use iwasawa_core::lambda::{lambda_crosscheck, lambda_method_one, lambda_method_two, LambdaParams};

use config::{parse_list, ConfigFile};

/// Lambda-invariants of p-adic Dirichlet L-functions and their statistics.
#[derive(Parser, Debug)]
#[command(name = "iwasawa", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Global {
    /// `key = value` file supplying defaults for the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Prime(s), comma separated
    #[arg(long, global = true)]
    prime: Option<String>,

    /// Order of theta (degree for field-scan)
    #[arg(long, global = true)]
    order: Option<u64>,

    /// Smallest conductor considered
    #[arg(long, global = true)]
    cond_min: Option<u64>,

    /// Conductors are strictly below this bound
    #[arg(long, global = true)]
    cond_max: Option<u64>,

    /// Twists i to keep, comma separated (ranges a-b allowed)
    #[arg(long, global = true)]
    twists: Option<String>,

    /// Interpolation points C
    #[arg(long, global = true)]
    points: Option<usize>,

    /// Series depth N
    #[arg(long, global = true)]
    series_depth: Option<u32>,

    /// Working precision K of the interpolation
    #[arg(long, global = true)]
    precision: Option<u32>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Bernoulli cache directory (default: $IWASAWA_CACHE_DIR, else memory only)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// More logging (-v, -vv)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Interpolation,
    Series,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conjectured proportions and rho(q, r) rows
    Predict,
    /// Lambda-invariant of a single theta * omega^i
    Lambda {
        /// Character label N.e1.e2...
        #[arg(long = "char")]
        label: String,
        #[arg(long, default_value_t = 0)]
        twist: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Lambda distribution by twist for characters of one order
    ScanOrder {
        /// Tabulate trivial-zero twists (lambda corrected) instead of omitting them
        #[arg(long)]
        keep_trivial_zero: bool,
    },
    /// Proportion of regular primes per character
    RegularScan {
        /// Admissible primes per character
        #[arg(long, default_value_t = 25)]
        primes_count: usize,
        /// Residue degree of the primes
        #[arg(long, default_value_t = 1)]
        f: u64,
        /// Print one line per character instead of the summary
        #[arg(long)]
        detail: bool,
        /// Print `label;p;f;verdict;witnesses` rows for the given --prime list
        #[arg(long)]
        report: bool,
    },
    /// Distribution of lambda_tot over cyclic fields
    FieldScan {
        /// Print `field;p;lambda_tot` rows instead of the histogram
        #[arg(long)]
        detail: bool,
    },
    /// Monte Carlo degree distribution of random invertible matrices
    RmtSim {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Characters with positive corrected lambda
    Appendix {
        /// Keep residue degrees strictly below this
        #[arg(long, default_value_t = 10)]
        f_bound: u64,
    },
    /// Quick self-check on known values
    Verify,
}

/// Flags merged with the config file.
struct Settings {
    primes: Option<Vec<u64>>,
    order: Option<u64>,
    cond_min: Option<u64>,
    cond_max: Option<u64>,
    twists: Option<Vec<u64>>,
    params: LambdaParams,
    seed: Option<u64>,
    jobs: usize,
    cache_dir: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Settings {
    fn resolve(g: &Global) -> Result<Self> {
        let file = match &g.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let list = |flag: &Option<String>, key: &str| -> Result<Option<Vec<u64>>> {
            match flag {
                Some(s) => parse_list(s).map(Some).with_context(|| format!("--{key}")),
                None => file.list(key),
            }
        };
        let mut params = LambdaParams::default();
        if let Some(c) = g.points.map(Ok).or_else(|| file.get("points").transpose()).transpose()? {
            params.points = c;
        }
        if let Some(n) = g.series_depth.map(Ok).or_else(|| file.get("series-depth").transpose()).transpose()? {
            params.series_depth = n;
        }
        params.precision = g.precision.map(Ok).or_else(|| file.get("precision").transpose()).transpose()?;
        let cache_dir = g
            .cache_dir
            .clone()
            .or_else(|| file.raw("cache-dir").map(PathBuf::from))
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
        Ok(Self {
            primes: list(&g.prime, "prime")?,
            order: g.order.map(Ok).or_else(|| file.get("order").transpose()).transpose()?,
            cond_min: g.cond_min.map(Ok).or_else(|| file.get("cond-min").transpose()).transpose()?,
            cond_max: g.cond_max.map(Ok).or_else(|| file.get("cond-max").transpose()).transpose()?,
            twists: list(&g.twists, "twists")?,
            params,
            seed: g.seed.map(Ok).or_else(|| file.get("seed").transpose()).transpose()?,
            jobs: g.jobs.map(Ok).or_else(|| file.get("jobs").transpose()).transpose()?.unwrap_or(0),
            cache_dir,
            out: g.out.clone().or_else(|| file.raw("out").map(PathBuf::from)),
        })
    }

    fn prime(&self) -> Result<u64> {
        match self.primes.as_deref() {
            Some([p]) => Ok(*p),
            Some(_) => bail!("this command takes a single --prime"),
            None => bail!("--prime is required"),
        }
    }

    fn cache(&self) -> BernoulliCache {
        match &self.cache_dir {
            Some(dir) => BernoulliCache::on_disk(dir),
            None => BernoulliCache::in_memory(),
        }
    }

    fn scan_config(&self) -> Result<ScanConfig> {
        let defaults = ScanConfig::default();
        Ok(ScanConfig {
            primes: self.primes.clone().context("--prime is required")?,
            order: self.order.context("--order is required")?,
            cond_min: self.cond_min.unwrap_or(defaults.cond_min),
            cond_max: self.cond_max.unwrap_or(defaults.cond_max),
            twists: self.twists.clone(),
            params: self.params.clone(),
            jobs: self.jobs,
            seed: self.seed.unwrap_or(0),
            cache_dir: self.cache_dir.clone(),
            out: self.out.clone(),
            ..defaults
        })
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn report_excluded(excluded: &[Excluded]) -> bool {
    for e in excluded {
        eprintln!("excluded {}: {}", e.label, e.reason);
    }
    if !excluded.is_empty() {
        eprintln!("{} row(s) excluded", excluded.len());
    }
    !excluded.is_empty()
}

/// Runs the command; `Ok(true)` when some rows were excluded.
fn run(cli: Cli) -> Result<bool> {
    let s = Settings::resolve(&cli.global)?;
    let out = s.out.as_deref();
    match cli.command {
        Command::Predict => {
            emit(out, &experiments::predict_csv()?)?;
            Ok(false)
        }
        Command::Lambda { label, twist, method } => {
            let theta = DirichletChar::parse(&label)?;
            let chi = TwistedChar::new(&theta, twist, s.prime()?)?;
            let cache = s.cache();
            let r = match method {
                MethodArg::Interpolation => lambda_method_one(&chi, &s.params, &cache)?,
                MethodArg::Series => lambda_method_two(&chi, &s.params)?,
                MethodArg::Both => lambda_crosscheck(&chi, &s.params, &cache)?,
            };
            let text = format!(
                "label;p;i;lambda;lambda_corr;trivial_zero;order;f;method\n{};{};{};{};{};{};{};{};{}\n",
                r.theta.label(),
                r.p,
                r.i,
                r.lambda,
                r.lambda_corr,
                if r.trivial_zero { "yes" } else { "no" },
                chi.order(),
                r.residue_degree,
                r.method
            );
            emit(out, &text)?;
            Ok(false)
        }
        Command::ScanOrder { keep_trivial_zero } => {
            let cfg = ScanConfig { omit_trivial_zero: !keep_trivial_zero, ..s.scan_config()? };
            let tables = experiments::scan_order(&cfg)?;
            let text = tables.iter().map(|t| t.to_csv()).collect::<Vec<_>>().join("\n");
            emit(out, &text)?;
            Ok(report_excluded(&tables.iter().flat_map(|t| t.excluded.clone()).collect::<Vec<_>>()))
        }
        Command::RegularScan { primes_count, f, detail, report } => {
            let order = s.order.context("--order is required")?;
            let cond_max = s.cond_max.unwrap_or(1000);
            if report {
                let primes = s.primes.clone().context("--report needs --prime")?;
                let (text, excluded) = experiments::regularity_rows(order, cond_max, &primes);
                emit(out, &text)?;
                return Ok(report_excluded(&excluded));
            }
            let summary = experiments::regular_scan(order, cond_max, primes_count, f, s.jobs)?;
            emit(out, &if detail { summary.detail_csv() } else { summary.to_csv() })?;
            Ok(report_excluded(&summary.excluded))
        }
        Command::FieldScan { detail } => {
            let hist = experiments::field_scan(
                s.order.context("--order (the field degree) is required")?,
                s.cond_max.unwrap_or(1000),
                s.prime()?,
                &s.params,
                &s.cache(),
                s.jobs,
            )?;
            emit(out, &if detail { hist.detail_csv() } else { hist.to_csv() })?;
            Ok(report_excluded(&hist.excluded))
        }
        Command::RmtSim { n, q, samples } => {
            let rows = experiments::rmt_sim(n, q, samples, s.seed.unwrap_or(0))?;
            emit(out, &experiments::rmt_csv(&rows))?;
            Ok(false)
        }
        Command::Appendix { f_bound } => {
            let p = s.prime()?;
            let table = experiments::appendix_tables(p, s.cond_max.unwrap_or(1000), f_bound, &s.params, &s.cache(), s.jobs)?;
            emit(out, &table.to_csv())?;
            if !table.failures.is_empty() {
                let sidecar = match out {
                    Some(path) => path.with_extension("failures.csv"),
                    None => PathBuf::from(format!("appendix-{p}.failures.csv")),
                };
                std::fs::write(&sidecar, table.failures_csv()).with_context(|| format!("writing {}", sidecar.display()))?;
                eprintln!("failures written to {}", sidecar.display());
            }
            Ok(report_excluded(&table.failures))
        }
        Command::Verify => {
            let checks = experiments::verify(&s.cache());
            let mut text = String::new();
            for c in &checks {
                text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            emit(out, &text)?;
            if checks.iter().any(|c| !c.passed) {
                bail!("{} check(s) failed", checks.iter().filter(|c| !c.passed).count());
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
