//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::catalog;
use crate::dsl::{builtin_suites, load, run_suite, RunOptions};
use crate::error::{Error, Result};
use crate::report::{CheckReport, Settings, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DEFINITION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lcsg", version, about = "Verification engine for locally conformal symplectic groupoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a suite on a definition file or a catalog item.
    Run(RunArgs),
    /// List the shipped examples, or print one with `--show`.
    Catalog {
        #[arg(long, value_name = "ID")]
        show: Option<String>,
    },
    /// List the built-in suites.
    Suites,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Path to a `.geo` file, or a catalog id or file name.
    pub file: String,
    #[arg(long, default_value = "full")]
    pub suite: String,
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_u64)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub fail_fast: bool,
    /// Record wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

/// Accepts decimal or `0x`-prefixed hexadecimal.
fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

/// Definition text for a path, falling back to the catalog.
pub fn read_definition(file: &str) -> Result<String> {
    let path = Path::new(file);
    if path.is_file() {
        return Ok(std::fs::read_to_string(path)?);
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or(file);
    let stem = path.file_stem().and_then(|n| n.to_str()).unwrap_or(file);
    catalog::find(name)
        .or_else(|_| catalog::find(stem))
        .or_else(|_| catalog::find(&format!("{stem}.geo")))
        .map(|c| c.source.to_string())
        .map_err(|_| Error::Io(format!("no such file or catalog item: {file}")))
}

fn summary(r: &CheckReport) -> String {
    let mut out = String::new();
    for e in &r.entries {
        let v = if e.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{v} {:<64} {:<22} {:.3e}", e.id, e.paper_tag, e.max_residual));
        if let Some(n) = &e.note {
            out.push_str(&format!("  ({n})"));
        }
        out.push('\n');
    }
    let failed = r.failures().count();
    out.push_str(&format!(
        "suite {}: {} of {} conditions pass (seed {:#x}, {} samples, tol {:e})\n",
        r.suite,
        r.entries.len() - failed,
        r.entries.len(),
        r.seed,
        r.samples,
        r.tolerance
    ));
    out
}

/// Runs `args`, writing the summary to `out`; returns the report.
pub fn run(args: &RunArgs, out: &mut dyn Write) -> Result<CheckReport> {
    let defs = load(&read_definition(&args.file)?)?;
    let opts = RunOptions {
        settings: Settings::new(args.samples, args.seed, args.tol),
        fail_fast: args.fail_fast,
        timing: args.timing,
    };
    let report = run_suite(&defs, &args.suite, &opts)?;
    match args.json.as_deref() {
        Some(p) if p == Path::new("-") => writeln!(out, "{}", report.to_json())?,
        Some(p) => {
            std::fs::write(p, report.to_json() + "\n")?;
            write!(out, "{}", summary(&report))?;
        }
        None => write!(out, "{}", summary(&report))?,
    }
    Ok(report)
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => run(args, out).map(|r| if r.passed() { EXIT_PASS } else { EXIT_FAIL }),
        Command::Catalog { show: None } => write!(out, "{}", catalog::list_catalog()).map(|_| EXIT_PASS).map_err(Error::from),
        Command::Catalog { show: Some(id) } => {
            catalog::find(id).and_then(|c| write!(out, "{}", c.source).map_err(Error::from)).map(|_| EXIT_PASS)
        }
        Command::Suites => {
            let mut text = String::new();
            for (name, desc) in builtin_suites() {
                text.push_str(&format!("{name:<18} {desc}\n"));
            }
            write!(out, "{text}").map(|_| EXIT_PASS).map_err(Error::from)
        }
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_DEFINITION
    })
}
