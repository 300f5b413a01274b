//! Simulated users and seeded Monte Carlo runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ButtonId, ButtonMapping, Color, Coloring, Digit, ModelError, Transcript};
use crate::planner::{PlannerConfig, Strategy};
use crate::session::{Phase, PressOutcome, Session, SessionConfig, SessionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("user mapping {0} must color every button and use both colors")]
    InvalidUserMapping(ButtonMapping),
    #[error("user has {user} buttons but the session has {session}")]
    ButtonCountMismatch { user: usize, session: usize },
    #[error("user PIN has {user} digits but the session expects {session}")]
    PinLengthMismatch { user: usize, session: usize },
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("at least one trial is required")]
    NoTrials,
}

/// An error-free user with a private button mapping.
#[derive(Debug, Clone)]
pub struct SimulatedUser {
    pin: Vec<Digit>,
    mapping: ButtonMapping,
    seed: u64,
    rng: ChaCha8Rng,
}

impl SimulatedUser {
    pub fn new(pin: Vec<Digit>, mapping: ButtonMapping, seed: u64) -> Result<Self, SimulationError> {
        if !mapping.is_valid_user_mapping() {
            return Err(SimulationError::InvalidUserMapping(mapping));
        }
        if pin.is_empty() {
            return Err(ModelError::InvalidConfiguration("PIN must not be empty".into()).into());
        }
        Ok(SimulatedUser {
            pin,
            mapping,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Uniform PIN and uniform valid mapping drawn from `seed`.
    pub fn random(n_buttons: usize, pin_length: usize, seed: u64) -> Result<Self, SimulationError> {
        crate::model::check_button_count(n_buttons)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pin = (0..pin_length)
            .map(|_| Digit::new(rng.gen_range(0..10)).expect("in range"))
            .collect();
        let mapping = loop {
            let colors: Vec<Color> = (0..n_buttons)
                .map(|_| if rng.gen() { Color::Yellow } else { Color::Grey })
                .collect();
            let m = ButtonMapping::from_colors(&colors);
            if m.is_valid_user_mapping() {
                break m;
            }
        };
        SimulatedUser::new(pin, mapping, rng.gen())
    }

    pub fn pin(&self) -> &[Digit] {
        &self.pin
    }

    pub fn mapping(&self) -> &ButtonMapping {
        &self.mapping
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A button whose private color matches the current color of the digit
    /// being entered, uniformly among such buttons.
    pub fn choose_press(&mut self, digit_index: usize, coloring: Coloring) -> ButtonId {
        let color = coloring.color_of(self.pin[digit_index]);
        let candidates = self.mapping.buttons_with(color);
        candidates[self.rng.gen_range(0..candidates.len())]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialReport {
    pub presses_per_episode: Vec<usize>,
    pub total_presses: usize,
    pub success: bool,
    pub recovered_pin: Vec<Digit>,
    /// Learned mapping right after the first digit was identified.
    pub learned_after_first: Option<ButtonMapping>,
    /// Buttons pressed during the first episode, sorted.
    pub pressed_in_first: Vec<ButtonId>,
    /// Presses after which the true digit was no longer consistent.
    pub soundness_violations: usize,
    pub non_convergence: bool,
    pub failure: Option<String>,
    #[serde(skip)]
    pub transcript: Transcript,
}

/// Drives a full session with `user` pressing.
pub fn run_trial(user: &mut SimulatedUser, config: &SessionConfig) -> Result<TrialReport, SimulationError> {
    if user.mapping.n_buttons() != config.n_buttons {
        return Err(SimulationError::ButtonCountMismatch {
            user: user.mapping.n_buttons(),
            session: config.n_buttons,
        });
    }
    if user.pin.len() != config.pin_length {
        return Err(SimulationError::PinLengthMismatch {
            user: user.pin.len(),
            session: config.pin_length,
        });
    }
    let mut session = Session::start(config.clone()).map_err(|e| match e {
        SessionError::Config(m) => SimulationError::Model(m),
        other => SimulationError::Model(ModelError::InvalidConfiguration(other.to_string())),
    })?;

    let mut presses = vec![0usize; config.pin_length];
    let mut learned_after_first = None;
    let mut pressed_in_first = Vec::new();
    let mut soundness_violations = 0;
    let mut failure = None;
    let mut non_convergence = false;

    while session.phase() == Phase::AwaitingPress || session.phase() == Phase::DigitIdentified {
        if session.phase() == Phase::DigitIdentified {
            if let Err(e) = session.advance() {
                failure = Some(e.to_string());
                break;
            }
            continue;
        }
        let position = session.entered_digits().len();
        let coloring = session.current_coloring().expect("awaiting press");
        let button = user.choose_press(position, coloring);
        presses[position] += 1;
        if position == 0 && !pressed_in_first.contains(&button) {
            pressed_in_first.push(button);
        }
        let truth = user.pin[position];
        match session.submit_press(button) {
            Ok(outcome) => {
                let still_possible = match outcome {
                    PressOutcome::NextColoring(_) => session.episode().consistent_digits().contains(truth),
                    PressOutcome::DigitIdentified { digit, .. } | PressOutcome::Complete { digit, .. } => {
                        digit == truth
                    }
                };
                if !still_possible {
                    soundness_violations += 1;
                }
                if position == 0 && session.entered_digits().len() == 1 {
                    learned_after_first = Some(session.learned_mapping().clone());
                }
            }
            Err(e) => {
                non_convergence = matches!(e, SessionError::NonConvergence { .. });
                if matches!(e, SessionError::UserInconsistent { .. }) {
                    soundness_violations += 1;
                }
                failure = Some(e.to_string());
            }
        }
    }
    pressed_in_first.sort();

    let recovered_pin = session.entered_digits().to_vec();
    let success = session.phase() == Phase::Complete && recovered_pin == user.pin;
    if !success && failure.is_none() {
        failure = Some(format!("recovered {recovered_pin:?}, expected {:?}", user.pin));
    }
    Ok(TrialReport {
        total_presses: presses.iter().sum(),
        presses_per_episode: presses,
        success,
        recovered_pin,
        learned_after_first,
        pressed_in_first,
        soundness_violations,
        non_convergence,
        failure,
        transcript: session.transcript().clone(),
    })
}

/// Seed for trial `index` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen()
}

/// The user and session config for one trial of a sweep cell.
pub fn trial_setup(
    n_buttons: usize,
    pin_length: usize,
    strategy: Strategy,
    seed: u64,
    index: usize,
) -> Result<(SimulatedUser, SessionConfig), SimulationError> {
    let s = trial_seed(seed, index);
    let user = SimulatedUser::random(n_buttons, pin_length, s)?;
    let config = SessionConfig {
        n_buttons,
        pin_length,
        planner: PlannerConfig {
            strategy,
            seed: s.rotate_left(17) ^ 0x5DEE_CE66_D1CE_4E5B,
        },
        ..SessionConfig::default()
    };
    Ok((user, config))
}

/// Runs `trials` trials in parallel; results are in trial order.
pub fn run_trials(
    n_buttons: usize,
    pin_length: usize,
    strategy: Strategy,
    seed: u64,
    trials: usize,
) -> Result<Vec<TrialReport>, SimulationError> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (mut user, config) = trial_setup(n_buttons, pin_length, strategy, seed, i)?;
            run_trial(&mut user, &config)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepGrid {
    pub n_buttons: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    pub pin_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeStats {
    pub episode: usize,
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub n_buttons: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub guard_trips: usize,
    pub soundness_violations: usize,
    pub mean_total_presses: f64,
    pub episodes: Vec<EpisodeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub version: u32,
    pub pin_length: usize,
    pub trials_per_cell: usize,
    pub cells: Vec<CellReport>,
}

fn median(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

pub fn summarize(
    n_buttons: usize,
    strategy: Strategy,
    seed: u64,
    pin_length: usize,
    reports: &[TrialReport],
) -> CellReport {
    let trials = reports.len();
    let successes = reports.iter().filter(|r| r.success).count();
    let episodes = (0..pin_length)
        .map(|e| {
            let mut counts: Vec<usize> = reports.iter().map(|r| r.presses_per_episode[e]).collect();
            counts.sort_unstable();
            EpisodeStats {
                episode: e,
                mean: counts.iter().sum::<usize>() as f64 / trials as f64,
                median: median(&counts),
                min: counts[0],
                max: counts[trials - 1],
            }
        })
        .collect();
    CellReport {
        n_buttons,
        strategy,
        seed,
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        guard_trips: reports.iter().filter(|r| r.non_convergence).count(),
        soundness_violations: reports.iter().map(|r| r.soundness_violations).sum(),
        mean_total_presses: reports.iter().map(|r| r.total_presses).sum::<usize>() as f64
            / trials as f64,
        episodes,
    }
}

/// One cell per (buttons, strategy, seed) combination, in grid order.
pub fn run_sweep(grid: &SweepGrid, trials: usize) -> Result<SweepReport, SimulationError> {
    if grid.n_buttons.is_empty() || grid.strategies.is_empty() || grid.seeds.is_empty() {
        return Err(SimulationError::EmptyGrid);
    }
    if trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    if grid.pin_length == 0 {
        return Err(ModelError::InvalidConfiguration("PIN length must be at least 1".into()).into());
    }
    let mut cells = Vec::new();
    for &n_buttons in &grid.n_buttons {
        for &strategy in &grid.strategies {
            for &seed in &grid.seeds {
                let reports = run_trials(n_buttons, grid.pin_length, strategy, seed, trials)?;
                cells.push(summarize(n_buttons, strategy, seed, grid.pin_length, &reports));
            }
        }
    }
    Ok(SweepReport {
        version: 1,
        pin_length: grid.pin_length,
        trials_per_cell: trials,
        cells,
    })
}
