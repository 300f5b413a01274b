//! Decoding a recorded entry from the observer's side.
//!
//! Someone who saw every coloring and every press can replay the engine
//! exactly as the terminal did. The decoder does just that, keeping button
//! colors as partial mappings instead of enumerating every possible user
//! mapping.

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EngineError, EpisodeState};
use crate::model::{ButtonId, ButtonMapping, Digit, ModelError, PressEvent, Transcript, DIGIT_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("episode {episode}, press {press}: button {button} out of range for {n_buttons} buttons")]
    ButtonOutOfRange {
        episode: usize,
        press: usize,
        button: usize,
        n_buttons: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One digit still possible for an episode, with the button colors that
/// reading implies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpisodeCandidate {
    pub digit: Digit,
    pub mapping: ButtonMapping,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PinCandidate {
    pub pin: Vec<Digit>,
    pub mapping: ButtonMapping,
}

fn check_presses(n_buttons: usize, episode: usize, presses: &[PressEvent]) -> Result<(), DecodeError> {
    match presses
        .iter()
        .enumerate()
        .find(|(_, p)| p.button.index() >= n_buttons)
    {
        Some((press, p)) => Err(DecodeError::ButtonOutOfRange {
            episode,
            press,
            button: p.button.index(),
            n_buttons,
        }),
        None => Ok(()),
    }
}

/// Digits consistent with one episode's presses, given button colors
/// already pinned down by earlier episodes.
pub fn decode_episode(
    n_buttons: usize,
    presses: &[PressEvent],
    prior: Option<&ButtonMapping>,
) -> Result<Vec<EpisodeCandidate>, DecodeError> {
    check_presses(n_buttons, 0, presses)?;
    let unknown = ButtonMapping::unknown(n_buttons);
    let mut state = EpisodeState::new(n_buttons, prior.unwrap_or(&unknown)).map_err(|e| match e {
        EngineError::Model(m) => DecodeError::Model(m),
        other => DecodeError::Model(ModelError::InvalidConfiguration(other.to_string())),
    })?;
    for press in presses {
        state.record_press(press).expect("buttons checked");
    }
    Ok(state
        .consistent_digits()
        .iter()
        .map(|digit| EpisodeCandidate {
            digit,
            mapping: state.mapping_under(digit),
        })
        .collect())
}

/// All PINs (with their implied mappings) consistent with the transcript.
///
/// Every episode but the last was closed by the terminal, which only
/// happens once a single digit is left; readings that leave an earlier
/// episode ambiguous are dropped.
pub fn decode_transcript(transcript: &Transcript) -> Result<Vec<PinCandidate>, DecodeError> {
    let n_buttons = transcript.n_buttons;
    crate::model::check_button_count(n_buttons)?;
    for (i, e) in transcript.episodes.iter().enumerate() {
        check_presses(n_buttons, i, &e.presses)?;
    }
    let mut branches = vec![PinCandidate {
        pin: Vec::new(),
        mapping: ButtonMapping::unknown(n_buttons),
    }];
    let last = transcript.episodes.len().saturating_sub(1);
    for (i, episode) in transcript.episodes.iter().enumerate() {
        let mut next = Vec::new();
        for branch in &branches {
            let found = decode_episode(n_buttons, &episode.presses, Some(&branch.mapping))?;
            if i < last && found.len() != 1 {
                continue;
            }
            for c in found {
                let mut pin = branch.pin.clone();
                pin.push(c.digit);
                next.push(PinCandidate {
                    pin,
                    mapping: c.mapping,
                });
            }
        }
        branches = next;
    }
    Ok(branches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    /// Presses observed so far.
    pub press: usize,
    /// Episode the latest observation belongs to.
    pub episode: usize,
    /// Digits still possible for that episode.
    pub digit_candidates: usize,
    /// Full PINs still possible; digits of episodes not yet started count
    /// as ten choices each.
    pub pin_candidates: u128,
}

fn truncated(transcript: &Transcript, presses: usize) -> Transcript {
    let mut out = Transcript::new(transcript.n_buttons);
    let mut left = presses;
    for (i, e) in transcript.episodes.iter().enumerate() {
        if i > 0 && left == 0 {
            break;
        }
        let take = left.min(e.presses.len());
        out.episodes.push(crate::model::Episode {
            presses: e.presses[..take].to_vec(),
            identified_digit: None,
        });
        left -= take;
    }
    out
}

/// Residual ambiguity after each prefix of the observed presses, from zero
/// presses up to the full transcript.
pub fn ambiguity_curve(transcript: &Transcript) -> Result<Vec<CurvePoint>, DecodeError> {
    let total_episodes = transcript.episodes.len().max(1);
    (0..=transcript.total_presses())
        .map(|k| {
            let prefix = truncated(transcript, k);
            let started = prefix.episodes.len().max(1);
            let candidates = if prefix.episodes.is_empty() {
                Vec::new()
            } else {
                decode_transcript(&prefix)?
            };
            let (digits, branches) = if prefix.episodes.is_empty() {
                (DIGIT_COUNT, DIGIT_COUNT as u128)
            } else {
                let mut digits: Vec<Digit> = candidates.iter().map(|c| *c.pin.last().unwrap()).collect();
                digits.sort();
                digits.dedup();
                (digits.len(), candidates.len() as u128)
            };
            let unseen = (total_episodes - started) as u32;
            let pins = 10u128
                .checked_pow(unseen)
                .and_then(|f| f.checked_mul(branches))
                .unwrap_or(u128::MAX);
            Ok(CurvePoint {
                press: k,
                episode: started - 1,
                digit_candidates: digits,
                pin_candidates: pins,
            })
        })
        .collect()
}

/// Buttons an observer saw used in the transcript.
pub fn observed_buttons(transcript: &Transcript) -> Vec<ButtonId> {
    let mut seen: Vec<ButtonId> = transcript
        .episodes
        .iter()
        .flat_map(|e| e.presses.iter().map(|p| p.button))
        .collect();
    seen.sort();
    seen.dedup();
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Episode;

    fn press(coloring: &str, button: usize) -> PressEvent {
        PressEvent {
            coloring: coloring.parse().unwrap(),
            button: ButtonId(button),
        }
    }

    #[test]
    fn no_presses_means_every_digit() {
        let found = decode_episode(9, &[], None).unwrap();
        assert_eq!(found.len(), 10);
        assert!(found.iter().all(|c| c.mapping.known_count() == 0));
    }

    #[test]
    fn prior_constraints_eliminate_like_known_buttons() {
        let prior: ButtonMapping = "YG".parse().unwrap();
        let found = decode_episode(2, &[press("YYYYYGGGGG", 1)], Some(&prior)).unwrap();
        let digits: Vec<u8> = found.iter().map(|c| c.digit.value()).collect();
        assert_eq!(digits, vec![5, 6, 7, 8, 9]);
    }

    #[test]
    fn out_of_range_press_named() {
        let t = Transcript {
            n_buttons: 9,
            episodes: vec![
                Episode {
                    presses: vec![press("YYYYYGGGGG", 0)],
                    identified_digit: None,
                },
                Episode {
                    presses: vec![press("YYYYYGGGGG", 0), press("YYYYYGGGGG", 12)],
                    identified_digit: None,
                },
            ],
        };
        assert_eq!(
            decode_transcript(&t),
            Err(DecodeError::ButtonOutOfRange {
                episode: 1,
                press: 1,
                button: 12,
                n_buttons: 9
            })
        );
    }

    #[test]
    fn one_press_leaves_ambiguity() {
        let t = Transcript {
            n_buttons: 9,
            episodes: vec![Episode {
                presses: vec![press("YGYGYGYGYG", 4)],
                identified_digit: None,
            }],
        };
        assert_eq!(decode_transcript(&t).unwrap().len(), 10);
        let curve = ambiguity_curve(&t).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!(curve[0].digit_candidates, 10);
    }

    #[test]
    fn empty_transcript_curve() {
        let t = Transcript::new(9);
        let curve = ambiguity_curve(&t).unwrap();
        assert_eq!(curve.len(), 1);
        assert_eq!(curve[0].digit_candidates, 10);
        assert_eq!(curve[0].pin_candidates, 10);
    }
}
