//! Choosing the next balanced coloring.
//!
//! The greedy strategy scores each of the 252 balanced colorings by how many
//! hypotheses the user's next press is expected to eliminate, assuming each
//! consistent digit in turn is the true one and that the user picks
//! uniformly among the buttons that digit's hypothesis allows. Ties go to
//! the coloring that splits more pairs of consistent digits, then to a
//! seeded random draw.
//!
//! Counting only presses a consistent user could actually make matters: a
//! pair of digits whose histories are mirror images (one hypothesis reads
//! every press with the flipped mapping of the other) can only be separated
//! by showing both digits in the *same* color and having a known button
//! pressed. A plain "split the candidates" rule never does that.

use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EpisodeState;
use crate::model::{ButtonId, Coloring, DigitSet, DIGIT_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("episode already decided: {remaining} consistent digit(s) left")]
    AlreadyDecided { remaining: usize },
    #[error("coloring {0} is not balanced")]
    Unbalanced(Coloring),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    #[serde(alias = "greedy")]
    GreedyDiscrimination,
    #[serde(alias = "random")]
    RandomBalanced,
}

impl Strategy {
    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::GreedyDiscrimination => "greedy",
            Strategy::RandomBalanced => "random",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" | "greedy_discrimination" => Ok(Strategy::GreedyDiscrimination),
            "random" | "random_balanced" => Ok(Strategy::RandomBalanced),
            other => Err(format!("unknown strategy {other:?} (expected greedy or random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlannerConfig {
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub seed: u64,
}

static BALANCED: LazyLock<Vec<Coloring>> = LazyLock::new(|| {
    (0u16..1 << DIGIT_COUNT)
        .filter(|m| m.count_ones() == 5)
        .map(|m| Coloring::from_yellow_set(DigitSet::from_bits(m)))
        .collect()
});

/// All C(10,5) = 252 balanced colorings, in increasing yellow-bitmask order.
pub fn balanced_colorings() -> &'static [Coloring] {
    &BALANCED
}

/// Greedy score; compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColoringScore {
    /// Expected eliminations multiplied by [`ColoringScore::scale`].
    pub expected_eliminations: u128,
    /// Unordered pairs of consistent digits shown in different colors.
    pub split_pairs: u32,
    scale: u128,
}

impl ColoringScore {
    pub fn scale(&self) -> u128 {
        self.scale
    }

    pub fn expected_eliminations_f64(&self) -> f64 {
        self.expected_eliminations as f64 / self.scale as f64
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// lcm(1..=n); every possible count of pressable buttons divides it.
fn score_scale(n_buttons: usize) -> u128 {
    (1..=n_buttons as u128).fold(1, |acc, k| acc / gcd(acc, k) * k)
}

/// Consistent digits a press of `b` would eliminate under `coloring`.
pub fn eliminated_by(state: &EpisodeState, coloring: Coloring, b: ButtonId) -> DigitSet {
    let h = state.history();
    let clash = DigitSet::from_bits(
        h.digits_seen(b, crate::model::Color::Yellow)
            .intersection(coloring.grey_digits())
            .bits()
            | h.digits_seen(b, crate::model::Color::Grey)
                .intersection(coloring.yellow_digits())
                .bits(),
    );
    clash.intersection(state.consistent_digits())
}

pub fn score_coloring(state: &EpisodeState, coloring: Coloring) -> Result<ColoringScore, PlannerError> {
    if !coloring.is_balanced() {
        return Err(PlannerError::Unbalanced(coloring));
    }
    let consistent = state.consistent_digits();
    let n_buttons = state.n_buttons();
    let scale = score_scale(n_buttons);

    let eliminated: Vec<DigitSet> = (0..n_buttons)
        .map(|b| eliminated_by(state, coloring, ButtonId(b)))
        .collect();

    let mut expected = 0u128;
    for d in consistent.iter() {
        // buttons a user entering d could press without contradicting d
        let (count, total) = eliminated
            .iter()
            .filter(|e| !e.contains(d))
            .fold((0u128, 0u128), |(n, t), e| (n + 1, t + e.len() as u128));
        if let Some(share) = scale.checked_div(count) {
            expected += total * share;
        }
    }

    let yellow = consistent.intersection(coloring.yellow_digits()).len() as u32;
    let grey = consistent.len() as u32 - yellow;
    Ok(ColoringScore {
        expected_eliminations: expected,
        split_pairs: yellow * grey,
        scale,
    })
}

fn round_rng(state: &EpisodeState, config: &PlannerConfig) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(state.rounds_elapsed() as u64);
    rng
}

/// Picks the next coloring. Deterministic in `(state, config)`.
pub fn choose_coloring(state: &EpisodeState, config: &PlannerConfig) -> Result<Coloring, PlannerError> {
    let remaining = state.consistent_digits().len();
    if remaining <= 1 {
        return Err(PlannerError::AlreadyDecided { remaining });
    }
    let mut rng = round_rng(state, config);
    let all = balanced_colorings();
    match config.strategy {
        Strategy::RandomBalanced => Ok(all[rng.gen_range(0..all.len())]),
        Strategy::GreedyDiscrimination => {
            let mut best: Vec<Coloring> = Vec::new();
            let mut best_score: Option<ColoringScore> = None;
            for &coloring in all {
                let score = score_coloring(state, coloring)?;
                match best_score {
                    Some(s) if score < s => {}
                    Some(s) if score == s => best.push(coloring),
                    _ => {
                        best_score = Some(score);
                        best.clear();
                        best.push(coloring);
                    }
                }
            }
            // don't show the same question twice in a row when there is a choice
            if best.len() > 1 {
                if let Some(last) = state.last_coloring() {
                    best.retain(|c| *c != last);
                }
            }
            Ok(best[rng.gen_range(0..best.len())])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::HistoryPerDigit;
    use crate::model::{ButtonMapping, Color, Digit, PressEvent};

    fn digit(v: u8) -> Digit {
        Digit::new(v).unwrap()
    }

    fn fresh() -> EpisodeState {
        EpisodeState::new(9, &ButtonMapping::unknown(9)).unwrap()
    }

    /// History where only `keep` stays consistent and the kept digits have
    /// no recorded colors at all.
    fn only_consistent(keep: &[u8]) -> EpisodeState {
        let mut h = HistoryPerDigit::empty(9);
        for d in Digit::all().filter(|d| !keep.contains(&d.value())) {
            h.insert(d, ButtonId(8), Color::Yellow);
            h.insert(d, ButtonId(8), Color::Grey);
        }
        EpisodeState::from_history(h)
    }

    #[test]
    fn there_are_252_balanced_colorings() {
        assert_eq!(balanced_colorings().len(), 252);
        assert!(balanced_colorings().iter().all(|c| c.is_balanced()));
    }

    #[test]
    fn fresh_episode_scores_only_split_pairs() {
        for &c in balanced_colorings() {
            let s = score_coloring(&fresh(), c).unwrap();
            assert_eq!(s.expected_eliminations, 0);
            assert_eq!(s.split_pairs, 25);
        }
    }

    #[test]
    fn pair_bonus_for_two_digits() {
        let state = only_consistent(&[2, 7]);
        let split: Coloring = "GGYGGYYGYY".parse().unwrap();
        let same: Coloring = "GGYGGYYYGY".parse().unwrap();
        assert_eq!(score_coloring(&state, split).unwrap().split_pairs, 1);
        assert_eq!(score_coloring(&state, same).unwrap().split_pairs, 0);
    }

    #[test]
    fn unbalanced_rejected() {
        let c: Coloring = "YYYYYYGGGG".parse().unwrap();
        assert_eq!(score_coloring(&fresh(), c), Err(PlannerError::Unbalanced(c)));
    }

    #[test]
    fn decided_episode_rejected() {
        let state = only_consistent(&[4]);
        assert_eq!(
            choose_coloring(&state, &PlannerConfig::default()),
            Err(PlannerError::AlreadyDecided { remaining: 1 })
        );
    }

    #[test]
    fn random_strategy_is_a_function_of_seed() {
        let cfg = PlannerConfig {
            strategy: Strategy::RandomBalanced,
            seed: 99,
        };
        let a = choose_coloring(&fresh(), &cfg).unwrap();
        let b = choose_coloring(&fresh(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.is_balanced());
        let distinct: std::collections::HashSet<_> = (0..20)
            .map(|seed| {
                choose_coloring(
                    &fresh(),
                    &PlannerConfig {
                        strategy: Strategy::RandomBalanced,
                        seed,
                    },
                )
                .unwrap()
            })
            .collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn two_candidates_with_fresh_histories_get_split() {
        let state = only_consistent(&[2, 7]);
        for seed in 0..10 {
            let c = choose_coloring(&state, &PlannerConfig { seed, ..Default::default() }).unwrap();
            assert_ne!(c.color_of(digit(2)), c.color_of(digit(7)));
        }
    }

    #[test]
    fn three_candidates_split_two_to_one() {
        let state = only_consistent(&[1, 3, 5]);
        for seed in 0..10 {
            let c = choose_coloring(&state, &PlannerConfig { seed, ..Default::default() }).unwrap();
            let yellow = [1, 3, 5]
                .iter()
                .filter(|&&d| c.color_of(digit(d)) == Color::Yellow)
                .count();
            assert!(yellow == 1 || yellow == 2, "{c}");
        }
    }

    #[test]
    fn mirrored_pair_is_shown_in_one_color() {
        // digits 0 and 1 have opposite colors on every pressed button; only a
        // same-color question on a pressed button can tell them apart
        let mut state = only_consistent(&[0, 1]);
        state
            .record_press(&PressEvent {
                coloring: "YGYYGGYGGY".parse().unwrap(),
                button: ButtonId(0),
            })
            .unwrap();
        state
            .record_press(&PressEvent {
                coloring: "GYYYGGYGGY".parse().unwrap(),
                button: ButtonId(1),
            })
            .unwrap();
        assert_eq!(state.consistent_digits().len(), 2);
        let c = choose_coloring(&state, &PlannerConfig::default()).unwrap();
        assert_eq!(c.color_of(digit(0)), c.color_of(digit(1)), "{c}");
    }

    #[test]
    fn known_mapping_always_splits_candidates() {
        let mut state = EpisodeState::new(2, &"YG".parse().unwrap()).unwrap();
        let cfg = PlannerConfig::default();
        // follow digit 6 down to identification
        while state.consistent_digits().len() > 1 {
            let c = choose_coloring(&state, &cfg).unwrap();
            let cons = state.consistent_digits();
            let y = cons.intersection(c.yellow_digits()).len();
            assert!(y > 0 && y < cons.len());
            assert!(y.abs_diff(cons.len() - y) <= 1, "unbalanced split of candidates");
            let button = if c.color_of(digit(6)) == Color::Yellow { 0 } else { 1 };
            state
                .record_press(&PressEvent {
                    coloring: c,
                    button: ButtonId(button),
                })
                .unwrap();
        }
        assert_eq!(state.identified_digit(), Ok(Some(digit(6))));
    }

    #[test]
    fn previous_coloring_not_repeated_when_tied() {
        let mut state = fresh();
        let cfg = PlannerConfig::default();
        for _ in 0..5 {
            let c = choose_coloring(&state, &cfg).unwrap();
            if let Some(last) = state.last_coloring() {
                assert_ne!(c, last);
            }
            state
                .record_press(&PressEvent {
                    coloring: c,
                    button: ButtonId(state.rounds_elapsed() % 9),
                })
                .unwrap();
            if state.consistent_digits().len() <= 1 {
                break;
            }
        }
    }

    #[test]
    fn scale_is_lcm() {
        assert_eq!(score_scale(2), 2);
        assert_eq!(score_scale(9), 2520);
    }
}
