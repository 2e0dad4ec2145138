//! Flags, the `key = value` config file, and the resolved [`RunConfig`].

use crate::CliError;
use clap::{Parser, ValueEnum};
use hr_sieve::sieve::{SieveConfig, DEFAULT_SEGMENT_SIZE};
use hr_sieve::sifted::SiftedFamily;
use hr_sieve::weights::Weight;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Count primes up to --x.
    Sieve,
    /// Histogram of ω(n/s) over the family up to --x.
    Count,
    /// Evaluate an envelope for k = 1..=--k-max.
    Bound,
    /// Fit envelope constants to the histogram at --x.
    Fit,
    /// Least B satisfying the sieve condition at --x.
    SieveCheck,
    /// Weighted sums over r with r P+(r) <= x, per ell and band.
    Lemma,
    /// Fit at one x and compare against histograms at every --xs.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// C1 (x/ln x)(lnln x + C2)^(k-1)/(k-1)!
    Hr,
    /// B x (G(x) + C)^(k-1)/((k-1)! ln^λ x)
    Theorem,
}

/// Raw flags. Every flag can also appear in the config file as
/// `name = value` (dashes or underscores); flags given on the command line win.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "hr-sieve", version, about = "Count integers by distinct prime factors over sifted sets")]
pub struct Flags {
    pub command: Option<Command>,
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// all | shifted:a=<int> | qe:<set> | shifted-qe:a=<int>,<set> | twin
    #[arg(long)]
    pub family: Option<String>,
    /// Upper bound; accepts 1e6-style shorthand.
    #[arg(long)]
    pub x: Option<String>,
    /// Comma-separated list of x for `report`.
    #[arg(long)]
    pub xs: Option<String>,
    /// x at which `report` fits its constants (default: first of --xs).
    #[arg(long)]
    pub fit_x: Option<String>,
    /// unit | phi | phi-qe:<set> | ind-qe:<set> | twin
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k_max: Option<u64>,
    #[arg(long)]
    pub ell_max: Option<u32>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub segment_size: Option<usize>,
    #[arg(long, env = "HR_SIEVE_CACHE")]
    pub cache_dir: Option<PathBuf>,
}

impl Flags {
    /// Fills every unset field from `file`.
    pub fn or(self, file: Flags) -> Flags {
        Flags {
            command: self.command.or(file.command),
            config: self.config,
            family: self.family.or(file.family),
            x: self.x.or(file.x),
            xs: self.xs.or(file.xs),
            fit_x: self.fit_x.or(file.fit_x),
            weight: self.weight.or(file.weight),
            lambda: self.lambda.or(file.lambda),
            kind: self.kind.or(file.kind),
            c1: self.c1.or(file.c1),
            c2: self.c2.or(file.c2),
            b: self.b.or(file.b),
            c: self.c.or(file.c),
            k_max: self.k_max.or(file.k_max),
            ell_max: self.ell_max.or(file.ell_max),
            format: self.format.or(file.format),
            output: self.output.or(file.output),
            threads: self.threads.or(file.threads),
            segment_size: self.segment_size.or(file.segment_size),
            cache_dir: self.cache_dir.or(file.cache_dir),
        }
    }
}

/// Parses a config file. Unknown keys and malformed lines are usage errors.
pub fn load_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Flags, CliError> {
    let mut args = vec!["hr-sieve".to_string()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "command" => args.insert(1, value.to_string()),
            "config" => {
                return Err(CliError::Usage(format!(
                    "config line {}: nested config files are not supported",
                    lineno + 1
                )))
            }
            _ => args.push(format!("--{key}={value}")),
        }
    }
    Flags::try_parse_from(args).map_err(|e| CliError::Usage(format!("config file: {}", e.kind())))
}

/// `123`, `1e6`, `25e3`: an integer mantissa with an optional decimal exponent.
pub fn parse_count(s: &str) -> Result<u64, CliError> {
    let bad = || CliError::Usage(format!("{s:?} is not an integer (forms: 1000000, 1e6)"));
    let s = s.trim();
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e),
        None => (s, "0"),
    };
    if mantissa.is_empty() || !mantissa.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if exp.is_empty() || !exp.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let m: u64 = mantissa.parse().map_err(|_| bad())?;
    let e: u32 = exp.parse().map_err(|_| bad())?;
    10u64
        .checked_pow(e)
        .and_then(|p| m.checked_mul(p))
        .ok_or_else(bad)
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub family: SiftedFamily,
    pub x: Option<u64>,
    pub xs: Vec<u64>,
    pub fit_x: Option<u64>,
    pub weight: Option<Weight>,
    pub lambda: Option<f64>,
    pub kind: Option<Kind>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub k_max: u64,
    pub ell_max: u32,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub sieve: SieveConfig,
}

impl RunConfig {
    pub fn from_flags(flags: Flags) -> Result<Self, CliError> {
        let usage = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
        let command = flags
            .command
            .ok_or_else(|| CliError::Usage("no command given".into()))?;
        let family = match &flags.family {
            Some(f) => f.parse::<SiftedFamily>().map_err(|e| usage(&e))?,
            None => SiftedFamily::all_integers(),
        };
        let weight = flags
            .weight
            .as_deref()
            .map(str::parse::<Weight>)
            .transpose()
            .map_err(|e| usage(&e))?;
        let xs = match &flags.xs {
            Some(list) => list.split(',').map(parse_count).collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        if let Some(l) = flags.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CliError::Usage(format!("lambda must be positive, got {l}")));
            }
        }
        if flags.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        let sieve = SieveConfig {
            segment_size: flags.segment_size.unwrap_or(DEFAULT_SEGMENT_SIZE),
            cache_dir: flags.cache_dir,
            parallel: flags.threads != Some(1),
        };
        sieve.validate().map_err(|e| usage(&e))?;
        Ok(RunConfig {
            command,
            family,
            x: flags.x.as_deref().map(parse_count).transpose()?,
            xs,
            fit_x: flags.fit_x.as_deref().map(parse_count).transpose()?,
            weight,
            lambda: flags.lambda,
            kind: flags.kind,
            c1: flags.c1,
            c2: flags.c2,
            b: flags.b,
            c: flags.c,
            k_max: flags.k_max.unwrap_or(10),
            ell_max: flags.ell_max.unwrap_or(10),
            format: flags.format.unwrap_or_default(),
            output: flags.output,
            threads: flags.threads,
            sieve,
        })
    }

    pub fn require_x(&self) -> Result<u64, CliError> {
        self.x
            .ok_or_else(|| CliError::Usage(format!("{:?} needs --x", self.command)))
    }

    /// Envelope kind: explicit `--kind`, else HR for the plain integers
    /// without a λ or weight, else the theorem envelope.
    pub fn envelope_kind(&self) -> Kind {
        self.kind.unwrap_or(
            if self.family.name == "all" && self.lambda.is_none() && self.weight.is_none() {
                Kind::Hr
            } else {
                Kind::Theorem
            },
        )
    }

    pub fn weight_or_natural(&self) -> Weight {
        self.weight.clone().unwrap_or_else(|| self.family.natural_weight())
    }

    pub fn lambda_or_natural(&self) -> f64 {
        self.lambda.unwrap_or_else(|| self.family.natural_lambda())
    }
}
