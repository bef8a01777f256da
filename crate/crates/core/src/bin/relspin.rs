//! Command-line front end.
//!
//! Exit status: 0 on success, 2 when the scenario fails causal validation,
//! 1 on I/O, parse, or argument errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use relspin::causal::{linear_extensions, validate, Extensions, Validation};
use relspin::harness::{
    correlation_sweep, frame_report, render_frame, render_sweep, render_table, render_validation,
    run, Mode, OutputFormat, RunConfig,
};
use relspin::scenario::{load_scenario, Scenario};
use relspin::spacetime::Velocity;
use relspin::spin::Axis;
use relspin::Error;

#[derive(Parser)]
#[command(
    name = "relspin",
    version,
    about = "Spin measurements on an entangled pair in Minkowski spacetime"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check causal constraints and report violations.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        output: Format,
    },
    /// Compute outcome distributions and answer the scenario's queries.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Boost velocity `vx,vy,vz` for an extra frame report.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        frame: Option<[f64; 3]>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        output: Format,
    },
    /// List the test orderings compatible with the causal order.
    Orderings {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        output: Format,
    },
    /// Show the scenario's events and test order in a boosted frame.
    Boost {
        file: PathBuf,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        frame: [f64; 3],
        #[arg(long, value_enum, default_value_t = Format::Table)]
        output: Format,
    },
    /// Correlation E(a, b) as b rotates away from a through angle pi.
    Sweep {
        file: PathBuf,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        axis: [f64; 3],
        #[arg(long, default_value_t = 13)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        output: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    #[value(alias = "montecarlo")]
    Mc,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|e| format!("invalid number {part:?}: {e}"))?;
    }
    Ok(out)
}

enum Failure {
    Invalid(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Prints the validation and fails with exit status 2 if it has violations.
fn require_valid(v: &Validation, format: Format) -> Result<(), Failure> {
    if v.is_ok() {
        return Ok(());
    }
    Err(Failure::Invalid(match format {
        Format::Json => json(v),
        Format::Table => render_validation(v),
    }))
}

fn render_extensions(e: &Extensions) -> String {
    let mut out = String::new();
    for order in &e.orders {
        let _ = writeln!(out, "{}", order.join(" < "));
    }
    if e.truncated {
        out.push_str("(truncated)\n");
    }
    out
}

fn execute(command: Command) -> Result<String, Failure> {
    let load = |file: &PathBuf| -> Result<Scenario, Failure> { Ok(load_scenario(file)?) };
    match command {
        Command::Validate { file, output } => {
            let s = load(&file)?;
            let v = validate(&s);
            require_valid(&v, output)?;
            Ok(match output {
                Format::Json => json(&v),
                Format::Table => render_validation(&v),
            })
        }
        Command::Run {
            file,
            mode,
            samples,
            seed,
            frame,
            output,
        } => {
            let s = load(&file)?;
            let cfg = RunConfig {
                mode: match mode {
                    ModeArg::Exact => Mode::Exact,
                    ModeArg::Mc => Mode::Montecarlo,
                },
                samples,
                seed,
                frame: frame.map(|[x, y, z]| Velocity::new(x, y, z)).transpose()?,
                output: match output {
                    Format::Json => OutputFormat::Json,
                    Format::Table => OutputFormat::Table,
                },
            };
            let report = run(&s, &cfg)?;
            let text = match output {
                Format::Json => report.to_json() + "\n",
                Format::Table => render_table(&report),
            };
            if report.validation.is_ok() {
                Ok(text)
            } else {
                Err(Failure::Invalid(text))
            }
        }
        Command::Orderings { file, output } => {
            let s = load(&file)?;
            require_valid(&validate(&s), output)?;
            let e = linear_extensions(&s)?;
            Ok(match output {
                Format::Json => json(&e),
                Format::Table => render_extensions(&e),
            })
        }
        Command::Boost {
            file,
            frame,
            output,
        } => {
            let s = load(&file)?;
            let f = frame_report(&s, &Velocity::new(frame[0], frame[1], frame[2])?);
            Ok(match output {
                Format::Json => json(&f),
                Format::Table => render_frame(&f),
            })
        }
        Command::Sweep {
            file,
            axis,
            steps,
            output,
        } => {
            let s = load(&file)?;
            let sweep = correlation_sweep(&s, &Axis::new(axis[0], axis[1], axis[2])?, steps)?;
            Ok(match output {
                Format::Json => json(&sweep),
                Format::Table => render_sweep(&sweep),
            })
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; status 2 is reserved for invalid scenarios.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(text)) => {
            print!("{text}");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
