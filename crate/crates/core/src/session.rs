//! Multi-digit PIN entry.
//!
//! A session runs one episode per PIN digit. Button colors learned when a
//! digit is identified seed the next episode's histories, so later digits
//! fall back to plain elimination on every button the user has already
//! used, while untouched buttons keep self-calibrating.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, EpisodeState, EpisodeStatus};
use crate::model::{
    check_button_count, format_pin, ButtonId, ButtonMapping, Color, Coloring, Digit, Episode,
    ModelError, PressEvent, Transcript,
};
use crate::planner::{choose_coloring, PlannerConfig, PlannerError};

/// Presses allowed in one episode before the session gives up.
pub const MAX_PRESSES_PER_EPISODE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ModelError),
    #[error("operation not allowed in phase {0:?}")]
    WrongPhase(Phase),
    #[error("no digit is consistent with the presses of digit {position}")]
    UserInconsistent { position: usize },
    #[error("digit {position} not identified after {presses} presses")]
    NonConvergence { position: usize, presses: usize },
    #[error("learned color of button {button} changed from {previous} to {new}")]
    MappingConflict {
        button: ButtonId,
        previous: Color,
        new: Color,
    },
    #[error(transparent)]
    Engine(EngineError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

impl From<EngineError> for SessionError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Model(m) => SessionError::Config(m),
            other => SessionError::Engine(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitingPress,
    DigitIdentified,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub n_buttons: usize,
    pub pin_length: usize,
    pub planner: PlannerConfig,
    /// Show button colors on the keypad once they are learned.
    pub reveal_learned_colors: bool,
    /// Show identified digits (otherwise only their count). Also decides
    /// whether transcripts record them.
    pub reveal_digits: bool,
    /// Button colors agreed with the user beforehand, if any.
    pub known_mapping: Option<ButtonMapping>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            n_buttons: 9,
            pin_length: 4,
            planner: PlannerConfig::default(),
            reveal_learned_colors: true,
            reveal_digits: false,
            known_mapping: None,
        }
    }
}

impl SessionConfig {
    /// Two colored buttons, left yellow and right grey.
    pub fn known_two_button() -> SessionConfig {
        SessionConfig {
            n_buttons: 2,
            known_mapping: Some(ButtonMapping::from_colors(&[Color::Yellow, Color::Grey])),
            ..SessionConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_button_count(self.n_buttons)?;
        if self.pin_length == 0 {
            return Err(ModelError::InvalidConfiguration(
                "PIN length must be at least 1".into(),
            ));
        }
        if let Some(known) = &self.known_mapping {
            if known.n_buttons() != self.n_buttons {
                return Err(ModelError::InvalidConfiguration(format!(
                    "known mapping has {} buttons, keypad has {}",
                    known.n_buttons(),
                    self.n_buttons
                )));
            }
        }
        Ok(())
    }
}

/// What a press led to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PressOutcome {
    /// Still undecided; the next question is shown.
    NextColoring(Coloring),
    /// A digit was identified and more remain. Call [`Session::advance`].
    DigitIdentified { position: usize, digit: Digit },
    /// The last digit was identified.
    Complete { digit: Digit, pin: Vec<Digit> },
}

fn mix_seed(seed: u64, episode: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add((episode as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    entered: Vec<Digit>,
    learned: ButtonMapping,
    episode: EpisodeState,
    coloring: Option<Coloring>,
    transcript: Transcript,
    phase: Phase,
    failure: Option<SessionError>,
}

impl Session {
    pub fn start(config: SessionConfig) -> Result<Session, SessionError> {
        config.validate()?;
        let learned = config
            .known_mapping
            .clone()
            .unwrap_or_else(|| ButtonMapping::unknown(config.n_buttons));
        let episode = EpisodeState::new(config.n_buttons, &learned)?;
        let mut session = Session {
            transcript: Transcript::new(config.n_buttons),
            config,
            entered: Vec::new(),
            learned,
            episode,
            coloring: None,
            phase: Phase::AwaitingPress,
            failure: None,
        };
        session.transcript.episodes.push(Episode::default());
        session.coloring = Some(session.plan()?);
        Ok(session)
    }

    fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            strategy: self.config.planner.strategy,
            seed: mix_seed(self.config.planner.seed, self.entered.len()),
        }
    }

    fn plan(&self) -> Result<Coloring, PlannerError> {
        choose_coloring(&self.episode, &self.planner_config())
    }

    fn fail(&mut self, err: SessionError) -> SessionError {
        self.phase = Phase::Failed;
        self.coloring = None;
        self.failure = Some(err.clone());
        err
    }

    pub fn submit_press(&mut self, button: ButtonId) -> Result<PressOutcome, SessionError> {
        if self.phase != Phase::AwaitingPress {
            return Err(SessionError::WrongPhase(self.phase));
        }
        ButtonId::checked(button.index(), self.config.n_buttons)?;
        let coloring = self.coloring.expect("coloring shown while awaiting a press");
        let press = PressEvent { coloring, button };
        self.episode.record_press(&press)?;
        self.transcript
            .episodes
            .last_mut()
            .expect("current episode")
            .presses
            .push(press);

        let position = self.entered.len();
        match self.episode.status() {
            EpisodeStatus::Inconsistent => Err(self.fail(SessionError::UserInconsistent { position })),
            EpisodeStatus::Undecided => {
                if self.episode.rounds_elapsed() >= MAX_PRESSES_PER_EPISODE {
                    return Err(self.fail(SessionError::NonConvergence {
                        position,
                        presses: self.episode.rounds_elapsed(),
                    }));
                }
                let next = self.plan()?;
                self.coloring = Some(next);
                Ok(PressOutcome::NextColoring(next))
            }
            EpisodeStatus::Identified(digit) => {
                let extracted = self.episode.extract_learned_mapping(digit)?;
                if let Err(e) = self.merge_learned(&extracted) {
                    return Err(self.fail(e));
                }
                self.entered.push(digit);
                if self.config.reveal_digits {
                    self.transcript
                        .episodes
                        .last_mut()
                        .expect("current episode")
                        .identified_digit = Some(digit);
                }
                self.coloring = None;
                if self.entered.len() == self.config.pin_length {
                    self.phase = Phase::Complete;
                    Ok(PressOutcome::Complete {
                        digit,
                        pin: self.entered.clone(),
                    })
                } else {
                    self.phase = Phase::DigitIdentified;
                    Ok(PressOutcome::DigitIdentified { position, digit })
                }
            }
        }
    }

    fn merge_learned(&mut self, extracted: &ButtonMapping) -> Result<(), SessionError> {
        for (button, new) in extracted.known() {
            match self.learned.get(button) {
                Some(previous) if previous != new => {
                    return Err(SessionError::MappingConflict {
                        button,
                        previous,
                        new,
                    })
                }
                _ => {}
            }
        }
        for (button, color) in extracted.known() {
            self.learned.set(button, Some(color));
        }
        Ok(())
    }

    /// Leaves the identified-digit phase and starts the next episode, seeded
    /// with everything learned so far. Returns the first question.
    pub fn advance(&mut self) -> Result<Coloring, SessionError> {
        if self.phase != Phase::DigitIdentified {
            return Err(SessionError::WrongPhase(self.phase));
        }
        self.episode = EpisodeState::new(self.config.n_buttons, &self.learned)?;
        self.transcript.episodes.push(Episode::default());
        let coloring = self.plan()?;
        self.coloring = Some(coloring);
        self.phase = Phase::AwaitingPress;
        Ok(coloring)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn failure(&self) -> Option<&SessionError> {
        self.failure.as_ref()
    }

    pub fn entered_digits(&self) -> &[Digit] {
        &self.entered
    }

    pub fn learned_mapping(&self) -> &ButtonMapping {
        &self.learned
    }

    pub fn episode(&self) -> &EpisodeState {
        &self.episode
    }

    /// Index of the digit being entered (or just identified).
    pub fn episode_index(&self) -> usize {
        self.transcript.episodes.len() - 1
    }

    pub fn current_coloring(&self) -> Option<Coloring> {
        self.coloring
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let presses = &self
            .transcript
            .episodes
            .last()
            .expect("current episode")
            .presses;
        let history = self.episode.history();
        let consistent = self.episode.consistent_digits();
        let digits = Digit::all()
            .map(|d| DigitPanel {
                digit: d,
                consistent: consistent.contains(d),
                dots: presses
                    .iter()
                    .map(|p| Dot {
                        button: p.button,
                        color: p.coloring.color_of(d),
                    })
                    .collect(),
                conflict_buttons: (0..self.config.n_buttons)
                    .map(ButtonId)
                    .filter(|b| history.colors_seen(d, *b).len() > 1)
                    .collect(),
            })
            .collect();
        let learned_buttons = if self.config.reveal_learned_colors {
            self.learned.clone()
        } else {
            ButtonMapping::unknown(self.config.n_buttons)
        };
        SessionSnapshot {
            phase: self.phase,
            n_buttons: self.config.n_buttons,
            pin_length: self.config.pin_length,
            episode: self.episode_index(),
            round: self.episode.rounds_elapsed(),
            coloring: self.coloring,
            digits,
            learned_buttons,
            digits_entered: self.entered.len(),
            pin: self.config.reveal_digits.then(|| format_pin(&self.entered)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dot {
    pub button: ButtonId,
    pub color: Color,
}

/// Dashboard panel for one interpretation hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitPanel {
    pub digit: Digit,
    pub consistent: bool,
    /// One dot per press of the current episode, colored as this digit was.
    pub dots: Vec<Dot>,
    /// Buttons that have been used for both colors under this hypothesis.
    pub conflict_buttons: Vec<ButtonId>,
}

/// Client-facing view of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub phase: Phase,
    pub n_buttons: usize,
    pub pin_length: usize,
    pub episode: usize,
    pub round: usize,
    pub coloring: Option<Coloring>,
    pub digits: Vec<DigitPanel>,
    /// Learned colors, or all unknown when they are hidden.
    pub learned_buttons: ButtonMapping,
    pub digits_entered: usize,
    pub pin: Option<String>,
}

impl SessionSnapshot {
    pub fn consistent_count(&self) -> usize {
        self.digits.iter().filter(|p| p.consistent).count()
    }
}
