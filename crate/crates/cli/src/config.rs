use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use gue_gap_core::{PrecisionPolicy, Real, Tolerances};

use crate::CliError;

/// Bits used to hold the user's gap values before any rounding to a working
/// precision.
pub const INPUT_BITS: u32 = 4096;

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, requires_all = ["a_max", "a_steps"], conflicts_with = "a_list")]
    pub a_min: Option<String>,
    #[arg(long, requires = "a_min")]
    pub a_max: Option<String>,
    #[arg(long, requires = "a_min")]
    pub a_steps: Option<usize>,
    /// Comma-separated gap half-widths.
    #[arg(long, value_delimiter = ',')]
    pub a_list: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PrecisionArgs {
    /// Base working precision in bits.
    #[arg(long, default_value_t = PrecisionPolicy::default().base_bits)]
    pub prec_bits: u32,
    /// Digits two precision levels must agree on before a table is accepted.
    #[arg(long, default_value_t = PrecisionPolicy::default().target_certified_digits)]
    pub digits: u32,
}

impl PrecisionArgs {
    pub fn policy(&self) -> Result<PrecisionPolicy, CliError> {
        let defaults = PrecisionPolicy::default();
        let policy = PrecisionPolicy {
            base_bits: self.prec_bits,
            target_certified_digits: self.digits,
            max_bits: defaults.max_bits.max(4 * self.prec_bits),
            ..defaults
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Supplementary,
    Discrete,
    Continuous,
    Oracle,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Identities,
                Suite::Supplementary,
                Suite::Discrete,
                Suite::Continuous,
                Suite::Oracle,
            ],
            s => vec![s],
        }
    }
}

/// Which variants of equations that carry a corrected companion to report.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Forms {
    Printed,
    Corrected,
    Both,
}

/// Everything that determines the numbers a run produces. Output paths are
/// deliberately left out so relocating a report does not change its hash.
#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub n_max: usize,
    pub a_grid: Vec<String>,
    pub base_bits: u32,
    pub bits_per_n: u32,
    pub target_digits: u32,
    pub max_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_h: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forms: Option<Forms>,
}

impl RunConfig {
    pub fn new(
        command: &'static str,
        n_max: usize,
        a_grid: &[Real],
        policy: &PrecisionPolicy,
    ) -> Self {
        RunConfig {
            command,
            n_max,
            a_grid: a_grid.iter().map(canonical).collect(),
            base_bits: policy.base_bits,
            bits_per_n: policy.bits_per_n,
            target_digits: policy.target_certified_digits,
            max_bits: policy.max_bits,
            fd_h: None,
            tolerances: BTreeMap::new(),
            suite: None,
            forms: None,
        }
    }

    /// First 16 hex digits of the SHA-256 of the JSON serialisation.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(&json);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn header(&self) -> String {
        format!("# gue-gap-lab v1 config={}", self.hash())
    }
}

pub fn parse_real(text: &str) -> Result<Real, CliError> {
    Ok(Real::parse(text.trim(), INPUT_BITS)?)
}

/// Shortest scientific form that still carries 30 significant digits,
/// e.g. `1e0`, `2.5e-1`.
pub fn canonical(x: &Real) -> String {
    trim_mantissa(&x.to_sci(30))
}

pub fn trim_mantissa(s: &str) -> String {
    match s.split_once('e') {
        Some((mant, exp)) if mant.contains('.') => {
            let mant = mant.trim_end_matches('0').trim_end_matches('.');
            format!("{mant}e{exp}")
        }
        _ => s.to_string(),
    }
}

pub fn a_grid(args: &GridArgs) -> Result<Vec<Real>, CliError> {
    if !args.a_list.is_empty() {
        return args.a_list.iter().map(|s| parse_real(s)).collect();
    }
    let (Some(lo), Some(hi), Some(steps)) = (&args.a_min, &args.a_max, args.a_steps) else {
        return ["0.1", "0.25", "0.5", "1", "1.5", "2", "3"]
            .iter()
            .map(|s| parse_real(s))
            .collect();
    };
    let lo = parse_real(lo)?;
    let hi = parse_real(hi)?;
    if steps == 0 || hi < lo || (steps == 1 && hi != lo) {
        return Err(CliError::Usage(
            "--a-steps must be positive and --a-max at least --a-min".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let width = &hi - &lo;
    Ok((0..steps)
        .map(|i| &lo + &(&(&width * i as i64) / &Real::from_int(steps as i64 - 1, INPUT_BITS)))
        .collect())
}

pub fn check_grid(grid: &[Real], allow_zero: bool) -> Result<(), CliError> {
    for a in grid {
        if a.is_negative() || (!allow_zero && a.is_zero()) {
            let bound = if allow_zero { "a >= 0" } else { "a > 0" };
            return Err(CliError::Usage(format!(
                "gap value {} outside the domain {bound} for this command",
                canonical(a)
            )));
        }
    }
    Ok(())
}

pub fn tolerances(specs: &[String]) -> Result<(Tolerances, BTreeMap<String, String>), CliError> {
    let mut tol = Tolerances::new();
    let mut record = BTreeMap::new();
    for spec in specs {
        tol.set_from_str(spec)?;
        if let Some((name, value)) = spec.split_once('=') {
            record.insert(name.trim().to_string(), value.trim().to_string());
        }
    }
    Ok((tol, record))
}

pub fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn std::io::Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}
