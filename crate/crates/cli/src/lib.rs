//! Command-line front end: reads a job file, builds the word and its
//! operators, evaluates and verifies the eigenfunction.

pub mod job;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use bispectral::verify::{default_grid, symmetry_report};
use bispectral::{
    bispectral_quadruple, classify, eval_psi, verify_bispectral, IntegralRep, ParseError, QuadError, QuadratureSpec,
};
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::job::{parse_complex, JobSpec};
use crate::report::{ClassificationJson, OperatorsJson, ReportJson, SymmetryJson};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Job(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Quad(e) => e.exit_code(),
            _ => 1,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DIVERGENT: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bispectral", version, about = "Bispectral operators from Weyl algebra automorphism words")]
pub struct Cli {
    /// JSON job file describing the word, contours, grid and probes.
    #[arg(long, global = true)]
    pub job: Option<PathBuf>,
    /// Permit words with more than two factor pairs.
    #[arg(long = "allow-m-gt-2", global = true)]
    pub allow_high_m: bool,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print L, Lambda, D and Delta in normal order.
    Operators,
    /// Classify the word.
    Classify,
    /// Evaluate psi at one point.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Check every eigenvalue identity on the grid.
    Verify {
        /// Pass tolerance for the normalized residuals.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the residual table as CSV.
        #[arg(long)]
        grid_out: Option<PathBuf>,
        /// Write the report as JSON (printed to stdout otherwise).
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Symmetry of the four cubic eigenfunctions psi_kl.
    Symmetry,
}

fn load_job(cli: &Cli) -> Result<JobSpec, CliError> {
    let path = cli.job.as_ref().ok_or_else(|| CliError::Usage("this command needs --job <path>".into()))?;
    JobSpec::load(path)
}

fn json_line(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Job(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// Runs a parsed command, returning the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Operators => {
            let word = load_job(cli)?.word()?;
            let quad = bispectral_quadruple(&word);
            if cli.json {
                json_line(out, &OperatorsJson::from(&quad))?;
            } else {
                for (name, text) in quad.canonical_strings() {
                    writeln!(out, "{name} = {text}")?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Classify => {
            let word = load_job(cli)?.word()?;
            let c = ClassificationJson::from(&classify(&word));
            if cli.json {
                json_line(out, &c)?;
            } else {
                writeln!(out, "{}", c.verdict)?;
                writeln!(out, "{}", c.detail)?;
                if let (Some(m), Some(det)) = (&c.matrix, &c.determinant) {
                    writeln!(out, "a = [[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])?;
                    writeln!(out, "det = {det}")?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Eval { x, z } => {
            let job = load_job(cli)?;
            let (x, z) = (parse_complex(x)?, parse_complex(z)?);
            let rep = IntegralRep::new(&job.word()?, job.contours.as_deref())?;
            let r = eval_psi(&rep, x, z, &job.spec(cli.allow_high_m))?;
            if cli.json {
                json_line(out, &serde_json::json!({
                    "psi": {"re": r.value.re, "im": r.value.im},
                    "est_error": r.est_error,
                }))?;
            } else {
                writeln!(out, "psi = {} {} {}i", r.value.re, if r.value.im < 0.0 { '-' } else { '+' }, r.value.im.abs())?;
                writeln!(out, "est_error = {:e}", r.est_error)?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify { tol, grid_out, report_out } => {
            let job = load_job(cli)?;
            let task = job.task(cli.allow_high_m, *tol)?;
            let report = verify_bispectral(&task)?;
            let json = ReportJson::from(&report);
            if let Some(path) = grid_out {
                std::fs::write(path, report::residual_csv(&report))?;
            }
            match report_out {
                Some(path) => {
                    let text = serde_json::to_string_pretty(&json).map_err(|e| CliError::Job(e.to_string()))?;
                    std::fs::write(path, text + "\n")?;
                    writeln!(out, "{}", report::summary(&report))?;
                }
                None if cli.json => json_line(out, &json)?,
                None => writeln!(out, "{}", report::summary(&report))?,
            }
            Ok(if report.pass {
                EXIT_OK
            } else if !report.inconclusive.is_empty() {
                EXIT_TRUNCATION
            } else {
                EXIT_FAIL
            })
        }
        Command::Symmetry => {
            let spec = QuadratureSpec { allow_high_m: cli.allow_high_m, ..Default::default() };
            let rep = symmetry_report(&spec, &default_grid())?;
            let json = SymmetryJson::from(&rep);
            if cli.json {
                json_line(out, &json)?;
            } else {
                writeln!(out, "{}", report::symmetry_summary(&json))?;
            }
            Ok(if json.pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

/// Parses `args`, runs the command and reports errors on `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAIL } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
