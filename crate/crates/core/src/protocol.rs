//! Line-delimited JSON session protocol.
//!
//! Each message is one JSON object on one line. Clients send `start`,
//! `press` and `snapshot_request`; the engine answers with `started`,
//! `coloring`, `state`, `digit_identified`, `session_complete` and `error`.
//! A `coloring` message always precedes the press it expects. Transport is
//! left to the caller: [`Connection`] maps one input line to the reply lines.

use serde::{Deserialize, Serialize};

use crate::model::{ButtonId, ButtonMapping, Coloring, Digit, ModelError, Transcript};
use crate::planner::{PlannerConfig, Strategy};
use crate::session::{PressOutcome, Session, SessionConfig, SessionError, SessionSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartConfig {
    pub n_buttons: Option<usize>,
    pub pin_length: Option<usize>,
    pub strategy: Option<Strategy>,
    /// Omit for the connection's default seed.
    pub seed: Option<u64>,
    pub reveal_learned_colors: Option<bool>,
    pub reveal_digits: Option<bool>,
    pub known_mapping: Option<ButtonMapping>,
}

impl StartConfig {
    pub fn into_session_config(self, default_seed: u64) -> SessionConfig {
        let defaults = SessionConfig::default();
        SessionConfig {
            n_buttons: self.n_buttons.unwrap_or(defaults.n_buttons),
            pin_length: self.pin_length.unwrap_or(defaults.pin_length),
            planner: PlannerConfig {
                strategy: self.strategy.unwrap_or_default(),
                seed: self.seed.unwrap_or(default_seed),
            },
            reveal_learned_colors: self
                .reveal_learned_colors
                .unwrap_or(defaults.reveal_learned_colors),
            reveal_digits: self.reveal_digits.unwrap_or(defaults.reveal_digits),
            known_mapping: self.known_mapping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Start {
        #[serde(default)]
        config: StartConfig,
    },
    Press {
        button: usize,
    },
    SnapshotRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadJson,
    BadMessage,
    BadConfig,
    NotStarted,
    BadButton,
    WrongPhase,
    UserInconsistent,
    NonConvergence,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Started {
        seed: u64,
        n_buttons: usize,
        pin_length: usize,
        strategy: Strategy,
    },
    Coloring {
        colors: Coloring,
        episode: usize,
        round: usize,
    },
    State {
        snapshot: SessionSnapshot,
    },
    DigitIdentified {
        position: usize,
        digit: Option<Digit>,
    },
    SessionComplete {
        pin: Option<String>,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl ServerMessage {
    fn error(code: ErrorCode, message: impl Into<String>) -> ServerMessage {
        ServerMessage::Error {
            code,
            message: message.into(),
        }
    }

    /// One line of JSON, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

impl ClientMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

fn session_error_reply(e: &SessionError) -> ServerMessage {
    let code = match e {
        SessionError::Config(ModelError::ButtonOutOfRange { .. }) => ErrorCode::BadButton,
        SessionError::Config(_) => ErrorCode::BadConfig,
        SessionError::WrongPhase(_) => ErrorCode::WrongPhase,
        SessionError::UserInconsistent { .. } => ErrorCode::UserInconsistent,
        SessionError::NonConvergence { .. } => ErrorCode::NonConvergence,
        SessionError::MappingConflict { .. } | SessionError::Engine(_) | SessionError::Planner(_) => {
            ErrorCode::Internal
        }
    };
    ServerMessage::error(code, e.to_string())
}

/// Protocol state for one client.
#[derive(Debug)]
pub struct Connection {
    default_seed: u64,
    session: Option<Session>,
    finished: Vec<Transcript>,
}

impl Connection {
    /// `default_seed` is used by `start` messages that carry no seed.
    pub fn new(default_seed: u64) -> Connection {
        Connection {
            default_seed,
            session: None,
            finished: Vec::new(),
        }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    /// Every transcript this connection produced, the live one last.
    pub fn transcripts(&self) -> Vec<Transcript> {
        let mut all = self.finished.clone();
        all.extend(self.session.as_ref().map(|s| s.transcript().clone()));
        all
    }

    pub fn handle_line(&mut self, line: &str) -> Vec<ServerMessage> {
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return vec![ServerMessage::error(ErrorCode::BadJson, e.to_string())],
        };
        match serde_json::from_value::<ClientMessage>(value) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(ErrorCode::BadMessage, e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Start { config } => self.start(config),
            ClientMessage::Press { button } => self.press(button),
            ClientMessage::SnapshotRequest => match &self.session {
                Some(s) => vec![ServerMessage::State {
                    snapshot: s.snapshot(),
                }],
                None => vec![ServerMessage::error(ErrorCode::NotStarted, "no session; send start first")],
            },
        }
    }

    fn coloring_message(session: &Session) -> Option<ServerMessage> {
        session.current_coloring().map(|colors| ServerMessage::Coloring {
            colors,
            episode: session.episode_index(),
            round: session.episode().rounds_elapsed(),
        })
    }

    fn start(&mut self, config: StartConfig) -> Vec<ServerMessage> {
        let config = config.into_session_config(self.default_seed);
        match Session::start(config) {
            Ok(session) => {
                if let Some(old) = self.session.take() {
                    self.finished.push(old.transcript().clone());
                }
                let cfg = session.config();
                let mut out = vec![ServerMessage::Started {
                    seed: cfg.planner.seed,
                    n_buttons: cfg.n_buttons,
                    pin_length: cfg.pin_length,
                    strategy: cfg.planner.strategy,
                }];
                out.extend(Self::coloring_message(&session));
                self.session = Some(session);
                out
            }
            Err(e) => vec![session_error_reply(&e)],
        }
    }

    fn press(&mut self, button: usize) -> Vec<ServerMessage> {
        let Some(session) = self.session.as_mut() else {
            return vec![ServerMessage::error(ErrorCode::NotStarted, "no session; send start first")];
        };
        let reveal = session.config().reveal_digits;
        match session.submit_press(ButtonId(button)) {
            Ok(PressOutcome::NextColoring(_)) => Self::coloring_message(session).into_iter().collect(),
            Ok(PressOutcome::DigitIdentified { position, digit }) => {
                let mut out = vec![ServerMessage::DigitIdentified {
                    position,
                    digit: reveal.then_some(digit),
                }];
                match session.advance() {
                    Ok(_) => out.extend(Self::coloring_message(session)),
                    Err(e) => out.push(session_error_reply(&e)),
                }
                out
            }
            Ok(PressOutcome::Complete { digit, pin }) => vec![
                ServerMessage::DigitIdentified {
                    position: pin.len() - 1,
                    digit: reveal.then_some(digit),
                },
                ServerMessage::SessionComplete {
                    pin: reveal.then(|| crate::model::format_pin(&pin)),
                },
            ],
            Err(e) => vec![session_error_reply(&e)],
        }
    }
}
