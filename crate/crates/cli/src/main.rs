//! `gue-gap-lab`: grid sweeps, verification suites, probability records and
//! plots for the finite-n GUE gap probability.

mod config;
mod plot;
mod table;
mod verify;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use gue_gap_core::fredholm::{probability_record, FREDHOLM_BITS};

use config::{
    a_grid, canonical, check_grid, open_output, parse_real, tolerances, Format, Forms, GridArgs,
    PrecisionArgs, RunConfig, Suite,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Core(gue_gap_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<gue_gap_core::Error> for CliError {
    fn from(e: gue_gap_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "gue-gap-lab",
    version,
    about = "Finite-n GUE gap probabilities and their Painleve-type structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence data, ladder quantities and P(n, a) across the grid as CSV.
    Table {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        prec: PrecisionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG of prob against a.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Residual checks; exits 0 only when every reported residual passes.
    Verify {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        prec: PrecisionArgs,
        #[arg(long, default_value = "1e-8")]
        fd_h: String,
        /// Tolerance override `name=value`; `*` matches every residual.
        #[arg(long = "tol")]
        tol: Vec<String>,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, value_enum, default_value_t = Forms::Both)]
        forms: Forms,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P(n, a) by the Hankel ratio and by the overlap determinant.
    Prob {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: String,
        #[command(flatten)]
        prec: PrecisionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot one column of a table CSV against a, one line per n.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "prob")]
        quantity: String,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct ProbJson {
    n: usize,
    a: String,
    p_hankel: String,
    p_fredholm: Option<String>,
    discrepancy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<&'static str>,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Table {
            grid,
            prec,
            out,
            plot,
        } => {
            let policy = prec.policy()?;
            let a_values = a_grid(&grid)?;
            check_grid(&a_values, true)?;
            let config = RunConfig::new("table", grid.n_max, &a_values, &policy);
            let rows = table::sweep(&a_values, grid.n_max, &policy, prec.digits);
            let mut buf = Vec::new();
            table::write_csv(&mut buf, &config, &rows)?;
            open_output(&out)?.write_all(&buf)?;
            if let Some(path) = plot {
                let series = plot::read_series(buf.as_slice(), "prob", &[])?;
                fs::write(path, plot::render(&series, "prob"))?;
            }
            Ok(rows.iter().all(|r| r.status == "ok"))
        }
        Command::Verify {
            grid,
            prec,
            fd_h,
            tol,
            suite,
            forms,
            format,
            out,
        } => {
            let policy = prec.policy()?;
            let a_values = a_grid(&grid)?;
            check_grid(&a_values, false)?;
            let h = parse_real(&fd_h)?;
            let (tolerances, tol_record) = tolerances(&tol)?;
            let mut config = RunConfig::new("verify", grid.n_max, &a_values, &policy);
            config.fd_h = Some(canonical(&h));
            config.tolerances = tol_record;
            config.suite = Some(suite);
            config.forms = Some(forms);
            let plan = verify::VerifyPlan {
                grid: &a_values,
                n_max: grid.n_max,
                policy: &policy,
                fd_h: &h,
                tolerances: &tolerances,
                suites: suite.expand(),
            };
            let outcome = verify::run(&plan);
            let entries = verify::select_forms(&outcome.report.entries, forms);
            let mut sink = open_output(&out)?;
            match format {
                Format::Json => verify::write_json(&mut sink, &entries)?,
                Format::Csv => verify::write_csv(&mut sink, &config, &entries)?,
            }
            sink.flush()?;
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            for e in &outcome.errors {
                eprintln!("error: {e}");
            }
            let failed = entries.iter().filter(|e| !e.pass).count();
            eprintln!(
                "verify: {} residuals, {failed} failed, {} errors (config {})",
                entries.len(),
                outcome.errors.len(),
                config.hash()
            );
            Ok(failed == 0 && outcome.errors.is_empty() && !entries.is_empty())
        }
        Command::Prob { n, a, prec, out } => {
            let policy = prec.policy()?;
            let a = parse_real(&a)?;
            check_grid(std::slice::from_ref(&a), true)?;
            let rec = probability_record(n, &a, &policy, None, FREDHOLM_BITS)?;
            let digits = prec.digits as usize;
            let json = ProbJson {
                n,
                a: canonical(&a),
                p_hankel: rec.p_hankel.to_sci(digits),
                p_fredholm: rec.p_fredholm.as_ref().map(|p| p.to_sci(digits)),
                discrepancy: rec
                    .discrepancy
                    .as_ref()
                    .map(|d| d.to_sci(verify::RESIDUAL_DIGITS)),
                notice: a.is_zero().then_some("determinant route skipped at a = 0"),
            };
            let mut sink = open_output(&out)?;
            serde_json::to_writer_pretty(&mut sink, &json)?;
            writeln!(sink)?;
            Ok(true)
        }
        Command::Plot {
            input,
            quantity,
            n_list,
            out,
        } => {
            let series = plot::read_series(fs::File::open(&input)?, &quantity, &n_list)?;
            fs::write(out, plot::render(&series, &quantity))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
