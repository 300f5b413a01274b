//! Transcript files.
//!
//! ```json
//! {"version":1,"nButtons":9,"episodes":[
//!   {"presses":[{"coloring":"YYGGYGYGGY","button":3}],"identifiedDigit":null}]}
//! ```
//!
//! A coloring that is `null` or contains `?` marks a redacted observation;
//! such files parse but cannot be decoded.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ButtonId, Coloring, Digit, Episode, PressEvent, Transcript, MAX_BUTTONS};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed transcript JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported transcript version {0} (expected {TRANSCRIPT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("nButtons must be between 2 and {MAX_BUTTONS}, got {0}")]
    ButtonCount(usize),
    #[error("episode {episode}, press {press}: coloring is redacted; decoding needs every coloring")]
    Redacted { episode: usize, press: usize },
    #[error("episode {episode}, press {press}: invalid coloring {value:?}")]
    Coloring {
        episode: usize,
        press: usize,
        value: String,
    },
    #[error("episode {episode}, press {press}: button {button} out of range for {n_buttons} buttons")]
    Button {
        episode: usize,
        press: usize,
        button: usize,
        n_buttons: usize,
    },
    #[error("episode {episode}: identifiedDigit {value} is not a digit")]
    IdentifiedDigit { episode: usize, value: u32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TranscriptDoc {
    version: u32,
    n_buttons: usize,
    episodes: Vec<EpisodeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct EpisodeDoc {
    presses: Vec<PressDoc>,
    #[serde(default)]
    identified_digit: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PressDoc {
    coloring: Option<String>,
    button: usize,
}

pub fn transcript_to_json(transcript: &Transcript) -> String {
    let doc = TranscriptDoc {
        version: TRANSCRIPT_VERSION,
        n_buttons: transcript.n_buttons,
        episodes: transcript
            .episodes
            .iter()
            .map(|e| EpisodeDoc {
                presses: e
                    .presses
                    .iter()
                    .map(|p| PressDoc {
                        coloring: Some(p.coloring.to_string()),
                        button: p.button.index(),
                    })
                    .collect(),
                identified_digit: e.identified_digit.map(|d| d.value() as u32),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn parse_transcript(text: &str) -> Result<Transcript, FormatError> {
    let doc: TranscriptDoc = serde_json::from_str(text)?;
    if doc.version != TRANSCRIPT_VERSION {
        return Err(FormatError::UnsupportedVersion(doc.version));
    }
    if !(2..=MAX_BUTTONS).contains(&doc.n_buttons) {
        return Err(FormatError::ButtonCount(doc.n_buttons));
    }
    let mut episodes = Vec::with_capacity(doc.episodes.len());
    for (ei, e) in doc.episodes.into_iter().enumerate() {
        let mut presses = Vec::with_capacity(e.presses.len());
        for (pi, p) in e.presses.into_iter().enumerate() {
            let raw = match p.coloring {
                Some(s) if !s.contains('?') => s,
                _ => return Err(FormatError::Redacted { episode: ei, press: pi }),
            };
            let coloring: Coloring = raw.parse().map_err(|_| FormatError::Coloring {
                episode: ei,
                press: pi,
                value: raw.clone(),
            })?;
            let button = ButtonId::checked(p.button, doc.n_buttons).map_err(|_| FormatError::Button {
                episode: ei,
                press: pi,
                button: p.button,
                n_buttons: doc.n_buttons,
            })?;
            presses.push(PressEvent { coloring, button });
        }
        let identified_digit = e
            .identified_digit
            .map(|v| {
                u8::try_from(v)
                    .ok()
                    .and_then(|v| Digit::new(v).ok())
                    .ok_or(FormatError::IdentifiedDigit { episode: ei, value: v })
            })
            .transpose()?;
        episodes.push(Episode {
            presses,
            identified_digit,
        });
    }
    Ok(Transcript {
        n_buttons: doc.n_buttons,
        episodes,
    })
}

pub fn read_transcript(path: &Path) -> Result<Transcript, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_transcript(&text)
}

pub fn write_transcript(path: &Path, transcript: &Transcript) -> Result<(), FormatError> {
    std::fs::write(path, transcript_to_json(transcript)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"version":1,"nButtons":9,"episodes":[
        {"presses":[{"coloring":"YYGGYGYGGY","button":3},{"coloring":"GGYYYGYGGY","button":0}],"identifiedDigit":null},
        {"presses":[],"identifiedDigit":7}]}"#;

    #[test]
    fn parses_sample() {
        let t = parse_transcript(SAMPLE).unwrap();
        assert_eq!(t.n_buttons, 9);
        assert_eq!(t.episodes.len(), 2);
        assert_eq!(t.episodes[0].presses[1].button, ButtonId(0));
        assert_eq!(t.episodes[1].identified_digit, Some(Digit::new(7).unwrap()));
        assert_eq!(parse_transcript(&transcript_to_json(&t)).unwrap(), t);
    }

    #[test]
    fn coloring_written_as_ten_chars() {
        let t = parse_transcript(SAMPLE).unwrap();
        let text = transcript_to_json(&t);
        assert!(text.contains("\"coloring\": \"YYGGYGYGGY\""));
        assert!(text.contains("\"nButtons\": 9"));
        assert!(text.contains("\"identifiedDigit\": null"));
    }

    #[test]
    fn redacted_coloring_refused() {
        let text = SAMPLE.replace("\"GGYYYGYGGY\"", "null");
        assert!(matches!(
            parse_transcript(&text),
            Err(FormatError::Redacted { episode: 0, press: 1 })
        ));
        let text = SAMPLE.replace("YYGGYGYGGY", "??????????");
        assert!(matches!(
            parse_transcript(&text),
            Err(FormatError::Redacted { episode: 0, press: 0 })
        ));
    }

    #[test]
    fn errors_name_their_location() {
        let bad_button = SAMPLE.replace("\"button\":3", "\"button\":9");
        assert!(matches!(
            parse_transcript(&bad_button),
            Err(FormatError::Button { episode: 0, press: 0, button: 9, .. })
        ));
        let bad_coloring = SAMPLE.replace("GGYYYGYGGY", "GGYYYGYGG");
        assert!(matches!(
            parse_transcript(&bad_coloring),
            Err(FormatError::Coloring { episode: 0, press: 1, .. })
        ));
        let bad_digit = SAMPLE.replace("\"identifiedDigit\":7", "\"identifiedDigit\":12");
        assert!(matches!(
            parse_transcript(&bad_digit),
            Err(FormatError::IdentifiedDigit { episode: 1, value: 12 })
        ));
        match parse_transcript("{\"version\":1,\n\"nButtons\": \"nine\"}") {
            Err(FormatError::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let v2 = SAMPLE.replace("\"version\":1", "\"version\":2");
        assert!(matches!(parse_transcript(&v2), Err(FormatError::UnsupportedVersion(2))));
        let missing_version = SAMPLE.replace("\"version\":1,", "");
        assert!(matches!(parse_transcript(&missing_version), Err(FormatError::Json { .. })));
    }
}
