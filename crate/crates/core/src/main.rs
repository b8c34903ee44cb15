//! `nme-audit` command line.
//!
//! Exit codes: 0 success, 1 invalid input (flags, schema, content), 2 I/O
//! failure. Results go to stdout or `--out`; diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nme_audit::audit::{self, DEFAULT_ALPHA, DEFAULT_ZERO_BAND};
use nme_audit::ingest::{self, TestName};
use nme_audit::report::{self, RenderConfig, RenderFormat};
use nme_audit::simulate::{self, SimulationSpec};
use nme_audit::stats::{required_sample_size, PowerSpec};

#[derive(Parser)]
#[command(name = "nme-audit", version, about = "Subgroup bias audits for facial-landmark detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = RenderFormat::Markdown)]
    format: RenderFormat,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decimals for percentages.
    #[arg(long, default_value_t = 2)]
    precision: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TestArg {
    Welch,
    Permutation,
}

#[derive(Subcommand)]
enum Command {
    /// Audit one dataset described by a manifest.
    Audit {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        output: Output,
        /// Overrides the manifest's test.
        #[arg(long, value_enum)]
        test: Option<TestArg>,
        /// Overrides the manifest's alpha.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        bonferroni: bool,
        /// Seed for Monte-Carlo permutation tests.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare bias trends across two or more JSON audit reports.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = DEFAULT_ZERO_BAND)]
        zero_band: f64,
    },
    /// Per-group sample size needed to detect a mean difference.
    Power {
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        power: f64,
    },
    /// Write a synthetic dataset with planted biases.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the simulation file.
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum CliError {
    Invalid(String),
    Io(String),
}

impl From<ingest::IngestError> for CliError {
    fn from(e: ingest::IngestError) -> Self {
        if e.is_io() {
            Self::Io(e.to_string())
        } else {
            Self::Invalid(e.to_string())
        }
    }
}

impl From<simulate::SimError> for CliError {
    fn from(e: simulate::SimError) -> Self {
        match e {
            simulate::SimError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render_config(output: &Output) -> RenderConfig {
    RenderConfig { precision: output.precision, ..RenderConfig::new(output.format) }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Audit { manifest, output, test, alpha, bonferroni, seed } => {
            let mut m = ingest::load_manifest(&manifest)?;
            if let Some(t) = test {
                m.test = match t {
                    TestArg::Welch => TestName::Welch,
                    TestArg::Permutation => TestName::Permutation,
                };
            }
            if let Some(a) = alpha {
                m.alpha = a;
            }
            if let Some(s) = seed {
                m.seed = s;
            }
            m.bonferroni |= bonferroni;
            m.validate()?;
            let (records, summary) = ingest::build_records(&m)?;
            eprintln!(
                "{}: {} faces, {} without prediction, {} without attributes, {} orphan predictions",
                m.dataset, summary.joined, summary.missing_pred, summary.missing_attr, summary.orphan_pred
            );
            let entries = audit::audit_dataset(&records, &m.canonical_attributes(), &m.audit_config()?).map_err(invalid)?;
            for e in &entries {
                if let audit::AuditEntry::Failed { attribute, reason, .. } = e {
                    eprintln!("warning: attribute `{attribute}` failed: {reason}");
                }
            }
            let text = report::render_audit_table(&entries, &render_config(&output)).map_err(invalid)?;
            emit(&text, output.out.as_deref())
        }
        Command::Compare { reports, output, zero_band } => {
            let mut entries = Vec::new();
            for path in &reports {
                let parsed = report::parse_audit_report(&read(path)?)
                    .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
                entries.extend(parsed);
            }
            let trends = audit::compare_trends(&entries, zero_band).map_err(invalid)?;
            let text = report::render_trend_table(&trends, &render_config(&output)).map_err(invalid)?;
            emit(&text, output.out.as_deref())
        }
        Command::Power { delta, sigma, alpha, power } => {
            let n = required_sample_size(&PowerSpec { delta, sigma, alpha, power }).map_err(invalid)?;
            println!("{n}");
            Ok(())
        }
        Command::Simulate { spec, out, seed } => {
            let text = read(&spec)?;
            let mut sim: SimulationSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Invalid(format!("{}: line {}: {e}", spec.display(), e.line())))?;
            if let Some(s) = seed {
                sim.seed = s;
            }
            let records = simulate::simulate_records(&sim)?;
            let manifest = simulate::write_dataset(&sim, &records, &out)?;
            eprintln!("wrote {} faces; manifest at {}", records.len(), manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
