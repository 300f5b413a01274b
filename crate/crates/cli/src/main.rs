use std::io::{self, BufReader};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ifttpin_cli::commands::{self, SimulateArgs, EXIT_ERROR};
use ifttpin_cli::server::{serve_lines, serve_websocket, ServeOptions};
use ifttpin_core::planner::Strategy;
use ifttpin_core::simulator::SweepGrid;

#[derive(Parser)]
#[command(name = "ifttpin", version, about = "Self-calibrating PIN entry: simulate, decode, serve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enter a PIN with a simulated user and write the transcript.
    Simulate {
        #[arg(long)]
        pin: Option<String>,
        /// Length of the random PIN used when --pin is absent.
        #[arg(long, default_value_t = 4)]
        pin_length: usize,
        #[arg(long, default_value_t = 9)]
        buttons: usize,
        /// User's button colors, e.g. YYYYGGGGG. Random when absent.
        #[arg(long)]
        mapping: Option<String>,
        #[arg(long, env = "IFTT_SEED")]
        seed: Option<u64>,
        /// More than one trial writes a summary report instead of a transcript.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value = "greedy")]
        strategy: Strategy,
        /// Record identified digits in the transcript.
        #[arg(long)]
        reveal_digits: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid of simulated trials and write a JSON report.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "2,4,9")]
        buttons: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "greedy,random")]
        strategies: Vec<Strategy>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        pin_length: usize,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the PIN from an observed transcript.
    Decode {
        transcript: PathBuf,
        /// Print `press,episode,digit_candidates,pin_candidates` rows instead.
        #[arg(long)]
        curve: bool,
    },
    /// Run the line protocol over WebSocket, or over stdin/stdout.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        listen: String,
        #[arg(long)]
        stdio: bool,
        /// Write each connection's transcripts into this directory.
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long, env = "IFTT_SEED")]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<u8> {
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr().lock();
    match cli.command {
        Command::Simulate {
            pin,
            pin_length,
            buttons,
            mapping,
            seed,
            trials,
            strategy,
            reveal_digits,
            out,
        } => commands::simulate(
            &SimulateArgs {
                pin,
                pin_length,
                buttons,
                mapping,
                seed: seed.unwrap_or_else(rand::random),
                trials,
                strategy,
                reveal_digits,
                out,
            },
            &mut stderr,
        ),
        Command::Bench {
            buttons,
            strategies,
            seeds,
            trials,
            pin_length,
            out,
        } => {
            let grid = SweepGrid {
                n_buttons: buttons,
                strategies,
                seeds,
                pin_length,
            };
            match out {
                Some(path) => commands::bench_grid(&grid, trials, Some(&path), &mut stderr),
                None => commands::bench_grid(&grid, trials, None, &mut stdout),
            }
        }
        Command::Decode { transcript, curve } => commands::decode(&transcript, curve, &mut stdout),
        Command::Serve {
            listen,
            stdio,
            record,
            seed,
        } => {
            let opts = ServeOptions {
                base_seed: seed.unwrap_or_else(rand::random),
                record,
            };
            if stdio {
                serve_lines(BufReader::new(io::stdin().lock()), stdout, &opts)?;
            } else {
                let listener = TcpListener::bind(&listen).with_context(|| format!("cannot listen on {listen}"))?;
                eprintln!("listening on ws://{}", listener.local_addr()?);
                drop(stderr);
                serve_websocket(listener, opts)?;
            }
            Ok(0)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
