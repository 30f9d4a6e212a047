mod exec;
mod gen;
mod query;

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tapescan::meter::{check_budget, Budget, Halt, RunReport};

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;
pub const EXIT_FORMAT: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

/// Metered scan-bounded algorithms, instance generators and streaming tree engines.
#[derive(Debug, Parser)]
#[command(name = "tapescan", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the resource report here instead of stderr.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Resource budget, e.g. `r=2,s=ceil(sqrt(n))+8`.
    #[arg(long, global = true)]
    pub budget: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a hard instance and its metadata sidecar.
    Gen(gen::GenArgs),
    /// Run one metered algorithm on an input file.
    Run(exec::RunArgs),
    /// Run a family over a size list and print a CSV table.
    Sweep(exec::SweepArgs),
    /// Evaluate, stream or compile a Core XPath query.
    Xpath(query::XPathArgs),
    /// Sort flat records by key with a bounded buffer.
    Sort(exec::SortArgs),
    /// Join two flat relations (or a relation-pair document) on the first column.
    Join(exec::SortArgs),
    /// Split a run at a tape boundary and replay it as a two-party protocol.
    Protocol(exec::ProtocolArgs),
}

/// Error carrying the process exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CmdResult = Result<u8, Failure>;

pub fn format_error(e: impl Display) -> Failure {
    Failure {
        code: EXIT_FORMAT,
        error: anyhow::anyhow!("{e}"),
    }
}

pub fn internal_error(e: impl Display) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        error: anyhow::anyhow!("{e}"),
    }
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map(|s| s.trim_end().to_string())
        .map_err(|e| format_error(format!("{}: {e}", path.display())))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| internal_error(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(internal_error),
    }
}

impl Global {
    pub fn budget(&self) -> Result<Option<Budget>, Failure> {
        self.budget
            .as_deref()
            .map(|b| b.parse::<Budget>().map_err(format_error))
            .transpose()
    }

    pub fn seed(&self, what: &str) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| format_error(format!("{what} needs --seed")))
    }

    /// Emits the report and maps the run to its exit status.
    pub fn finish(&self, report: &RunReport) -> CmdResult {
        let json = report.to_json();
        match &self.report {
            Some(p) => fs::write(p, format!("{json}\n"))
                .map_err(|e| internal_error(format!("{}: {e}", p.display())))?,
            None => eprintln!("{json}"),
        }
        if let Some(budget) = self.budget()? {
            if !check_budget(report, &budget).passed() {
                return Ok(EXIT_BUDGET);
            }
        }
        Ok(match report.halted {
            Halt::Reject => EXIT_REJECT,
            Halt::Accept | Halt::OutputComplete => EXIT_ACCEPT,
        })
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    cli.global.budget()?;
    match &cli.command {
        Command::Gen(a) => gen::cmd_gen(&cli.global, a),
        Command::Run(a) => exec::cmd_run(&cli.global, a),
        Command::Sweep(a) => exec::cmd_sweep(&cli.global, a),
        Command::Xpath(a) => query::cmd_xpath(&cli.global, a),
        Command::Sort(a) => exec::cmd_sort(&cli.global, a),
        Command::Join(a) => exec::cmd_join(&cli.global, a),
        Command::Protocol(a) => exec::cmd_protocol(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_FORMAT } else { EXIT_ACCEPT };
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
