use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use nrals::driver::{self, OutputFormat, RunConfig};
use nrals::numeric::{parse_rational, Rational};
use nrals::search::{SearchParams, ValueMode};

/// Local search solver for quantifier-free nonlinear real arithmetic.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one SMT-LIB file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Write the move trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the statistics row as CSV instead of the model.
        #[arg(long)]
        csv: bool,
    },
    /// Solve every .smt2 file of a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// CSV destination; standard output if omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smoothing probability of the weighting scheme.
    #[arg(long, default_value_t = 0.006)]
    sp: f64,
    /// Non-improving steps before a minor restart.
    #[arg(long, default_value_t = 100)]
    t1: u64,
    /// Minor restarts before a major restart.
    #[arg(long, default_value_t = 100)]
    t2: u64,
    /// Complexity threshold, e.g. 1/10000.
    #[arg(long, value_parser = rational, default_value = "1/10000")]
    eps_v: Rational,
    /// Relaxation offset for non-strict atoms.
    #[arg(long, value_parser = rational, default_value = "1/10000")]
    eps_p: Rational,
    /// Recompute all scores after every change.
    #[arg(long)]
    no_incremental: bool,
    /// Never relax; reject values beyond the threshold instead.
    #[arg(long, conflicts_with = "full_order")]
    no_relax: bool,
    /// Never relax; always prefer the simplest value.
    #[arg(long)]
    full_order: bool,
    /// Skip re-evaluating models over the parsed assertions.
    #[arg(long)]
    no_verify: bool,
}

fn rational(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if r <= Rational::from_integer(0.into()) {
        return Err("must be positive".into());
    }
    Ok(r)
}

impl Opts {
    fn config(self) -> Result<RunConfig, String> {
        if !(0.0..=1.0).contains(&self.sp) {
            return Err("--sp must lie in [0, 1]".into());
        }
        let time_limit = match self.timeout {
            Some(t) => Some(Duration::try_from_secs_f64(t).map_err(|e| format!("--timeout: {e}"))?),
            None => None,
        };
        let mode = if self.no_relax {
            ValueMode::Threshold
        } else if self.full_order {
            ValueMode::FullOrder
        } else {
            ValueMode::Relaxation
        };
        Ok(RunConfig {
            params: SearchParams {
                sp: self.sp,
                t1: self.t1,
                t2: self.t2,
                eps_v: self.eps_v,
                eps_p: self.eps_p,
                max_steps: self.max_steps,
                time_limit,
                seed: self.seed,
                incremental: !self.no_incremental,
                mode,
                ..SearchParams::default()
            },
            verify: !self.no_verify,
            trace: None,
            format: OutputFormat::Human,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Solve {
            file,
            opts,
            trace,
            csv,
        } => {
            let mut config = match opts.config() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            config.trace = trace;
            config.format = if csv {
                OutputFormat::Csv
            } else {
                OutputFormat::Human
            };
            let run = driver::run_file(&file, &config);
            if run.exit_code == 2 {
                eprint!("{}", run.output);
            } else if config.format == OutputFormat::Csv {
                if let Err(e) =
                    driver::write_csv(io::stdout().lock(), std::slice::from_ref(&run.record))
                {
                    eprintln!("error: {e}");
                }
            } else {
                print!("{}", run.output);
            }
            ExitCode::from(run.exit_code as u8)
        }
        Cmd::Bench { dir, opts, csv } => {
            let config = match opts.config() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let records = match driver::run_suite(&dir, &config) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", dir.display());
                    return ExitCode::from(2);
                }
            };
            let out: Box<dyn Write> = match &csv {
                Some(p) => match File::create(p) {
                    Ok(f) => Box::new(f),
                    Err(e) => {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                },
                None => Box::new(io::stdout().lock()),
            };
            if let Err(e) = driver::write_csv(out, &records) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
    }
}
