//! The `sigma-closure` command line.
//!
//! Exit codes: 0 success, 1 internal error, 2 domain or range error (including
//! bad arguments), 3 undecidable comparison, 4 verification failure, 5 I/O error.

pub mod report;
pub mod scan;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Rational;

use crate::closure::closure;
use crate::endpoints::Evaluator;
use crate::error::Error;
use crate::oracle::{self, intervals_from_closure, DensityReport, DEFAULT_LIMIT, MAX_LIMIT};
use crate::realnum::{format_decimal, parse_rational, Exponent, PrecisionPolicy};
use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_COMPARISON: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "sigma-closure",
    version,
    about = "Closure of the image of sigma_{-r} as disjoint intervals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the closure for one value of r.
    Closure {
        #[arg(long, value_parser = parse_exponent)]
        r: Exponent,
        /// Base working precision in bits.
        #[arg(long, default_value_t = 128)]
        prec: u32,
        /// Largest precision tried before a comparison is declared undecidable.
        #[arg(long, default_value_t = 4096)]
        max_prec: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sweep r over a range and write one CSV row per value.
    Scan {
        #[arg(long, value_parser = parse_rational)]
        r_min: Rational,
        #[arg(long, value_parser = parse_rational)]
        r_max: Rational,
        #[arg(long, value_parser = parse_rational)]
        step: Rational,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 128)]
        prec: u32,
    },
    /// Render a scan as a PGM or SVG image.
    Plot {
        #[arg(long)]
        scan: PathBuf,
        #[arg(long, default_value_t = 1000)]
        width: usize,
        /// Defaults to one pixel row per scan row.
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the closure against sigma_{-r}(n) for all n up to a limit.
    Verify {
        #[arg(long, value_parser = parse_exponent)]
        r: Exponent,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u64,
        /// Permit limits above the default, up to 10^8.
        #[arg(long)]
        large: bool,
        /// Verify the intervals of this JSON report instead of computing them.
        #[arg(long)]
        intervals_override: Option<PathBuf>,
    },
    /// Bracket the threshold eta below which the image is dense.
    Eta {
        #[arg(long, value_parser = parse_rational, default_value = "0.000001")]
        tol: Rational,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Symbolic,
}

fn parse_exponent(s: &str) -> Result<Exponent, Error> {
    s.parse()
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    Verify(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl CliError {
    fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(Error::Domain(_) | Error::Range(_) | Error::Parse(_)) => EXIT_DOMAIN,
            Self::Core(Error::Comparison { .. }) => EXIT_COMPARISON,
            Self::Core(Error::DuplicatePrime(_) | Error::Internal(_)) => EXIT_INTERNAL,
            Self::Verify(_) => EXIT_VERIFY,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(m) => write!(f, "I/O error: {m}"),
            Self::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_DOMAIN } else { EXIT_OK };
        }
    };
    match run(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match command {
        Command::Closure {
            r,
            prec,
            max_prec,
            format,
        } => {
            let policy = PrecisionPolicy {
                base: prec,
                max: max_prec.max(prec),
            };
            let res = closure(&r, policy)?;
            match format {
                Format::Json => Report::new(&res)?.to_json() + "\n",
                Format::Text => report::text(&Report::new(&res)?),
                Format::Symbolic => report::symbolic(&res),
            }
        }
        Command::Scan {
            r_min,
            r_max,
            step,
            out: path,
            prec,
        } => {
            let points = scan::scan_points(&r_min, &r_max, &step)?;
            let policy = PrecisionPolicy {
                base: prec,
                ..PrecisionPolicy::default()
            };
            let rows = scan::scan(&points, policy);
            let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            scan::write_csv(&rows, std::io::BufWriter::new(file))
                .map_err(|e| CliError::io(&path, e))?;
            let errors = rows.iter().filter(|r| r.error.is_some()).count();
            format!(
                "{} rows, {errors} with errors, written to {}\n",
                rows.len(),
                path.display()
            )
        }
        Command::Plot {
            scan: input,
            width,
            height,
            out: path,
        } => {
            let file = std::fs::File::open(&input).map_err(|e| CliError::io(&input, e))?;
            let rows = scan::read_csv(file)?;
            let height = height.unwrap_or(rows.len());
            let bytes = scan::render_plot(&rows, width, height, &path)?;
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            format!("{width}x{height} image written to {}\n", path.display())
        }
        Command::Verify {
            r,
            limit,
            large,
            intervals_override,
        } => verify(r, limit, large, intervals_override)?,
        Command::Eta { tol } => {
            let (lo, hi) = oracle::eta_solve(&tol)?;
            format!(
                "eta in [{}, {}]\nwidth {}\n",
                format_decimal(&lo),
                format_decimal(&hi),
                format_decimal(&Rational::from(&hi - &lo))
            )
        }
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn verify(
    r: Exponent,
    limit: u64,
    large: bool,
    intervals_override: Option<PathBuf>,
) -> Result<String, CliError> {
    let cap = if large { MAX_LIMIT } else { DEFAULT_LIMIT };
    if limit > cap {
        return Err(Error::Range(format!(
            "limit {limit} exceeds {cap}; pass --large for up to {MAX_LIMIT}"
        ))
        .into());
    }
    let (ev, intervals, exact) = match intervals_override {
        Some(path) => {
            let json = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let rep = Report::from_json(&json)?;
            let ev = Evaluator::new(r, PrecisionPolicy::default());
            let intervals = rep.oracle_intervals(&ev)?;
            (std::sync::Arc::new(ev), intervals, rep.densities()?)
        }
        None => {
            let res = closure(&r, PrecisionPolicy::default())?;
            let intervals = intervals_from_closure(&res);
            (
                res.evaluator.clone(),
                intervals,
                res.final_level().densities.clone(),
            )
        }
    };
    let rep = oracle::verify(&ev, limit, &intervals)?;
    let text = render_verify(&rep, &exact);
    if rep.gap_violations.is_empty() {
        Ok(text + "PASS\n")
    } else {
        print!("{text}");
        Err(CliError::Verify(format!(
            "{} value(s) in gaps, first n = {}",
            rep.gap_violations.len(),
            rep.gap_violations[0]
        )))
    }
}

fn render_verify(rep: &DensityReport, exact: &[Rational]) -> String {
    let mut s = format!("N = {}\n", rep.limit);
    for (k, (count, d)) in rep.counts.iter().zip(&rep.densities).enumerate() {
        let expected = exact
            .get(k)
            .map(|q| format!("{q} ~ {:.6}", q.to_f64()))
            .unwrap_or_default();
        writeln!(
            s,
            "  I{}: count {count}, empirical {d:.6}, exact {expected}",
            k + 1
        )
        .unwrap();
    }
    writeln!(s, "unclassified {}", rep.unclassified).unwrap();
    writeln!(s, "gap violations {}", rep.gap_violations.len()).unwrap();
    s
}
