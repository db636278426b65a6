use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use halpern_core::experiment::{
    cmd_check_geometry, cmd_example44, cmd_oracle, cmd_run_many, ExitStatus, RunOptions, OUT_DIR_ENV,
};

/// Halpern iterations with W-mappings on the sphere and on a segment.
#[derive(Parser)]
#[command(name = "halpern", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments; writes a trace CSV and a summary JSON per config.
    /// Exit 0 when every run met its stop rule, 2 when one hit max_iters,
    /// 1 on any error.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
        out_dir: PathBuf,
        /// Keep every k-th trace row.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        stride: Option<u64>,
    },
    /// Compute P_F u over the declared fixed sets.
    Oracle {
        config: PathBuf,
        /// Local grid spacing in radians.
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Randomized geometry batteries on S^2.
    CheckGeometry {
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb the interpolation by 1e-3; the batteries must fail.
        #[arg(long)]
        self_test_corrupt: bool,
    },
    /// T x = -x on [-0.7, 0.7]: quasinonexpansive, not strongly so.
    Example44,
}

// Stdout may be a closed pipe; output is best effort.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn print_json<T: serde::Serialize>(v: &T) {
    out!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let status = match cli.command {
        Command::Run {
            configs,
            out_dir,
            stride,
        } => {
            let opts = RunOptions {
                out_dir,
                stride: stride.map(|s| s as usize),
            };
            let outcomes = cmd_run_many(&configs, &opts);
            for o in &outcomes {
                let s = &o.summary;
                match &s.error {
                    Some(err) => eprintln!("{}: error: {err}", o.config.display()),
                    None => {
                        out!(
                            "{}: {:?} after {} iterations, d_oracle = {}",
                            o.config.display(),
                            s.stop_reason.expect("set on success"),
                            s.iterations.unwrap_or(0),
                            s.final_d_oracle.map_or("n/a".into(), |d| format!("{d:e}")),
                        );
                        for w in s.conditions.iter().flat_map(|c| &c.warnings) {
                            eprintln!("{}: warning: {w}", o.config.display());
                        }
                    }
                }
                if let Some(p) = &o.summary_path {
                    out!("  summary: {}", p.display());
                }
                if let Some(p) = &o.trace_path {
                    out!("  trace:   {}", p.display());
                }
            }
            outcomes.iter().map(|o| o.status).max().unwrap_or(ExitStatus::Success)
        }
        Command::Oracle {
            config,
            resolution,
            out_dir,
        } => match cmd_oracle(&config, resolution, &out_dir) {
            Ok((report, path)) => {
                print_json(&report);
                eprintln!("oracle written to {}", path.display());
                ExitStatus::Success
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitStatus::Failure
            }
        },
        Command::CheckGeometry {
            count,
            seed,
            self_test_corrupt,
        } => match cmd_check_geometry(count, seed, self_test_corrupt) {
            Ok((report, status)) => {
                print_json(&report);
                status
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitStatus::Failure
            }
        },
        Command::Example44 => match cmd_example44() {
            Ok(report) => {
                print_json(&report);
                if report.pass {
                    ExitStatus::Success
                } else {
                    ExitStatus::Failure
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitStatus::Failure
            }
        },
    };
    ExitCode::from(status.code() as u8)
}
