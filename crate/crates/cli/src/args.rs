//! Command-line surface and parsing of list, range and grid arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgamma::certifier::{GridSpec, Spacing};
use kgamma::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "kgamma",
    version,
    about = "k-gamma evaluation, identity checks and claim certification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
pub enum Function {
    #[value(name = "gammak")]
    #[serde(rename = "gammak")]
    GammaK,
    #[value(name = "lngammak")]
    #[serde(rename = "lngammak")]
    LnGammaK,
    #[value(name = "digammak")]
    #[serde(rename = "digammak")]
    DigammaK,
    #[value(name = "polygammak")]
    #[serde(rename = "polygammak")]
    PolygammaK,
    #[value(name = "ratioF")]
    #[serde(rename = "ratioF")]
    RatioF,
    #[value(name = "ratioG")]
    #[serde(rename = "ratioG")]
    RatioG,
    #[value(name = "logderivF")]
    #[serde(rename = "logderivF")]
    LogDerivF,
    #[value(name = "logderivInvG")]
    #[serde(rename = "logderivInvG")]
    LogDerivInvG,
}

impl Function {
    pub fn name(&self) -> &'static str {
        match self {
            Function::GammaK => "gammak",
            Function::LnGammaK => "lngammak",
            Function::DigammaK => "digammak",
            Function::PolygammaK => "polygammak",
            Function::RatioF => "ratioF",
            Function::RatioG => "ratioG",
            Function::LogDerivF => "logderivF",
            Function::LogDerivInvG => "logderivInvG",
        }
    }
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Evaluation backend: reduction, series or quadrature
    #[arg(long, default_value = "reduction")]
    pub backend: String,
    /// Requested significant digits of results
    #[arg(long, default_value_t = 16)]
    pub digits: u32,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Parameter lists; every value accepts a comma list, integers also `a..b`.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Derivative order r
    #[arg(long, allow_hyphen_values = true)]
    pub order: Option<String>,
    /// Lemma 3 index n
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Lemma 3 argument t
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Sample grid as min:max:points:log|lin
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one function at the given points
    Eval {
        #[arg(value_enum)]
        function: Function,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        common: Common,
    },
    /// Check an identity: recurrence, gauss-mult, euler-product,
    /// polygamma-mult, digamma-mult, lemma3 or power-kernel
    Identity {
        identity: String,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        common: Common,
    },
    /// Certify one claim (thm1a, thm1b, cor1, cor1-lower, cor1-upper,
    /// cor1-reversed, cor1-reversed-upper, cor2, cor3, cor3-lower, cor3-upper, lemma3)
    Certify {
        claim: String,
        #[command(flatten)]
        params: Params,
        /// Highest derivative order for thm1a / thm1b
        #[arg(long)]
        rmax: Option<u32>,
        /// Also check r = 0 (ln h >= 0) for thm1a / thm1b
        #[arg(long)]
        include_r0: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a list of claims over the Cartesian product of k and m
    Sweep {
        /// Comma-separated claim names
        #[arg(long)]
        claims: String,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        rmax: Option<u32>,
        #[arg(long)]
        include_r0: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn usage(msg: String) -> Error {
    Error::Config(msg)
}

/// Comma-separated reals.
pub fn parse_reals(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| usage(format!("--{flag}: '{p}' is not a finite number")))
        })
        .collect()
}

/// Comma-separated integers and inclusive ranges `a..b`.
pub fn parse_ints(flag: &str, s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let int = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("--{flag}: '{t}' is not a non-negative integer")))
        };
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
            if a > b {
                return Err(usage(format!("--{flag}: empty range '{part}'")));
            }
            out.extend(a..=b);
        } else {
            out.push(int(part)?);
        }
    }
    Ok(out)
}

/// `min:max:points:log|lin`.
pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(usage(format!(
            "--grid: expected min:max:points:log|lin, got '{s}'"
        )));
    }
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| usage(format!("--grid: '{t}' is not a number")))
    };
    let points = parts[2]
        .parse::<usize>()
        .map_err(|_| usage(format!("--grid: '{}' is not a point count", parts[2])))?;
    let spacing = match parts[3] {
        "log" => Spacing::Log,
        "lin" | "linear" => Spacing::Linear,
        other => {
            return Err(usage(format!(
                "--grid: spacing must be log or lin, got '{other}'"
            )))
        }
    };
    GridSpec::new(num(parts[0])?, num(parts[1])?, points, spacing)
}
