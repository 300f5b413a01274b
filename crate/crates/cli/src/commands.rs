//! `simulate`, `bench` and `decode`.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ifttpin_core::attacker::{ambiguity_curve, decode_transcript};
use ifttpin_core::format::{read_transcript, write_transcript};
use ifttpin_core::model::{format_pin, parse_pin, ButtonMapping};
use ifttpin_core::planner::{PlannerConfig, Strategy};
use ifttpin_core::session::SessionConfig;
use ifttpin_core::simulator::{run_sweep, run_trial, trial_seed, SimulatedUser, SweepGrid};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
/// Decoding left more than one candidate (or saw nothing at all).
pub const EXIT_AMBIGUOUS: u8 = 2;
/// No PIN fits the transcript.
pub const EXIT_INCONSISTENT: u8 = 3;

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub pin: Option<String>,
    pub pin_length: usize,
    pub buttons: usize,
    pub mapping: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub strategy: Strategy,
    pub reveal_digits: bool,
    pub out: PathBuf,
}

fn write_report(out: &Path, json: &str) -> Result<()> {
    std::fs::write(out, json).with_context(|| format!("cannot write {}", out.display()))
}

pub fn simulate(args: &SimulateArgs, log: &mut dyn Write) -> Result<u8> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if args.trials > 1 {
        if args.pin.is_some() || args.mapping.is_some() {
            bail!("--pin and --mapping apply to single trials; multi-trial runs draw them per trial");
        }
        let grid = SweepGrid {
            n_buttons: vec![args.buttons],
            strategies: vec![args.strategy],
            seeds: vec![args.seed],
            pin_length: args.pin_length,
        };
        return bench_grid(&grid, args.trials, Some(&args.out), log);
    }

    let pin = match &args.pin {
        Some(p) => parse_pin(p).with_context(|| format!("invalid digit in PIN {p:?}"))?,
        None => SimulatedUser::random(args.buttons.max(2), args.pin_length, args.seed)?
            .pin()
            .to_vec(),
    };
    let user_seed = trial_seed(args.seed, 0);
    let mapping = match &args.mapping {
        Some(m) => m
            .parse::<ButtonMapping>()
            .with_context(|| format!("invalid mapping {m:?}"))?,
        None => SimulatedUser::random(args.buttons, pin.len(), user_seed)?
            .mapping()
            .clone(),
    };
    if mapping.n_buttons() != args.buttons {
        bail!(
            "mapping {mapping} has {} buttons but --buttons is {}",
            mapping.n_buttons(),
            args.buttons
        );
    }
    let mut user = SimulatedUser::new(pin.clone(), mapping, user_seed)?;
    let config = SessionConfig {
        n_buttons: args.buttons,
        pin_length: pin.len(),
        planner: PlannerConfig {
            strategy: args.strategy,
            seed: args.seed,
        },
        reveal_digits: args.reveal_digits,
        ..SessionConfig::default()
    };
    config.validate()?;
    let report = run_trial(&mut user, &config)?;
    write_transcript(&args.out, &report.transcript)?;
    writeln!(
        log,
        "seed {} pin {} presses {:?} -> {}",
        args.seed,
        format_pin(&pin),
        report.presses_per_episode,
        args.out.display()
    )?;
    if report.success {
        Ok(EXIT_OK)
    } else {
        writeln!(
            log,
            "trial failed: {}",
            report.failure.as_deref().unwrap_or("unknown")
        )?;
        Ok(EXIT_ERROR)
    }
}

pub fn bench_grid(grid: &SweepGrid, trials: usize, out: Option<&Path>, log: &mut dyn Write) -> Result<u8> {
    let report = run_sweep(grid, trials)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    match out {
        Some(path) => write_report(path, &json)?,
        None => log.write_all(json.as_bytes())?,
    }
    let mut code = EXIT_OK;
    for cell in &report.cells {
        let means: Vec<String> = cell.episodes.iter().map(|e| format!("{:.2}", e.mean)).collect();
        writeln!(
            log,
            "buttons {} {} seed {}: success {}/{} mean presses per digit [{}]",
            cell.n_buttons,
            cell.strategy.short_name(),
            cell.seed,
            cell.successes,
            cell.trials,
            means.join(", ")
        )?;
        if cell.successes != cell.trials {
            code = EXIT_ERROR;
        }
    }
    Ok(code)
}

pub fn decode(path: &Path, curve: bool, out: &mut dyn Write) -> Result<u8> {
    let transcript = read_transcript(path)?;
    if curve {
        for p in ambiguity_curve(&transcript)? {
            writeln!(
                out,
                "{},{},{},{}",
                p.press, p.episode, p.digit_candidates, p.pin_candidates
            )?;
        }
        return Ok(EXIT_OK);
    }
    if transcript.total_presses() == 0 {
        writeln!(
            out,
            "no presses observed: every PIN of length {} remains a candidate",
            transcript.episodes.len().max(1)
        )?;
        return Ok(EXIT_AMBIGUOUS);
    }
    let candidates = decode_transcript(&transcript)?;
    match candidates.len() {
        0 => {
            writeln!(out, "no PIN is consistent with this transcript")?;
            Ok(EXIT_INCONSISTENT)
        }
        1 => {
            writeln!(out, "{}", format_pin(&candidates[0].pin))?;
            Ok(EXIT_OK)
        }
        n => {
            writeln!(out, "{n} candidate PINs:")?;
            for c in candidates.iter().take(100) {
                writeln!(out, "{}", format_pin(&c.pin))?;
            }
            if n > 100 {
                writeln!(out, "... {} more", n - 100)?;
            }
            Ok(EXIT_AMBIGUOUS)
        }
    }
}
