//! Interpretation hypotheses and the consistency test.
//!
//! For every digit `d` the engine keeps, per button `b`, the set of colors
//! `d` had whenever `b` was pressed. A digit stays a candidate while no
//! button has collected both colors under its hypothesis. Known button
//! colors are handled by pre-seeding each digit's history with that color,
//! so a known-mapping keypad and a self-calibrating one share this code.

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    check_button_count, ButtonId, ButtonMapping, Color, Digit, DigitSet, ModelError, PressEvent,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no digit is consistent with the presses: the user was inconsistent")]
    UserInconsistent,
    #[error("digit {digit} is not the unique consistent digit")]
    NotIdentified { digit: Digit },
    #[error("mapping has {got} buttons, episode has {expected}")]
    MappingSize { expected: usize, got: usize },
}

/// Colors seen on one (digit, button) cell. At most two, since there are
/// only two colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ColorSet {
    pub yellow: bool,
    pub grey: bool,
}

impl ColorSet {
    pub fn len(self) -> usize {
        self.yellow as usize + self.grey as usize
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn contains(self, c: Color) -> bool {
        match c {
            Color::Yellow => self.yellow,
            Color::Grey => self.grey,
        }
    }

    /// The color, when exactly one has been seen.
    pub fn single(self) -> Option<Color> {
        match (self.yellow, self.grey) {
            (true, false) => Some(Color::Yellow),
            (false, true) => Some(Color::Grey),
            _ => None,
        }
    }

    pub fn colors(self) -> impl Iterator<Item = Color> {
        Color::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

/// Per-button record of which digits have been seen in which color.
///
/// Stored transposed: for button `b`, `yellow[b]` is the set of digits `d`
/// with Yellow in `H^{d,b}`. A digit conflicts on `b` when it is in both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryPerDigit {
    yellow: Vec<DigitSet>,
    grey: Vec<DigitSet>,
}

impl HistoryPerDigit {
    pub fn empty(n_buttons: usize) -> HistoryPerDigit {
        HistoryPerDigit {
            yellow: vec![DigitSet::EMPTY; n_buttons],
            grey: vec![DigitSet::EMPTY; n_buttons],
        }
    }

    pub fn n_buttons(&self) -> usize {
        self.yellow.len()
    }

    pub fn colors_seen(&self, d: Digit, b: ButtonId) -> ColorSet {
        ColorSet {
            yellow: self.yellow[b.0].contains(d),
            grey: self.grey[b.0].contains(d),
        }
    }

    /// Adds `color` to `H^{d,b}`. Sets only grow.
    pub fn insert(&mut self, d: Digit, b: ButtonId, color: Color) {
        match color {
            Color::Yellow => self.yellow[b.0].insert(d),
            Color::Grey => self.grey[b.0].insert(d),
        }
    }

    /// Digits that have `color` somewhere in their history for `b`.
    pub fn digits_seen(&self, b: ButtonId, color: Color) -> DigitSet {
        match color {
            Color::Yellow => self.yellow[b.0],
            Color::Grey => self.grey[b.0],
        }
    }

    /// Digits whose history on `b` holds both colors.
    pub fn conflicts_on(&self, b: ButtonId) -> DigitSet {
        self.yellow[b.0].intersection(self.grey[b.0])
    }

    /// Digits for which every button has seen at most one color.
    pub fn consistent_digits(&self) -> DigitSet {
        let conflicted = (0..self.n_buttons())
            .map(|b| self.conflicts_on(ButtonId(b)))
            .fold(DigitSet::EMPTY, |acc, s| {
                DigitSet::from_bits(acc.bits() | s.bits())
            });
        DigitSet::ALL.difference(conflicted)
    }
}

/// Where an episode stands after its latest press.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeStatus {
    Undecided,
    Identified(Digit),
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeState {
    history: HistoryPerDigit,
    consistent: DigitSet,
    rounds_elapsed: usize,
    last_coloring: Option<crate::model::Coloring>,
}

impl EpisodeState {
    /// Starts an episode, seeding every digit's history with the colors in
    /// `known`. Pass [`ButtonMapping::unknown`] for pure self-calibration.
    pub fn new(n_buttons: usize, known: &ButtonMapping) -> Result<EpisodeState, EngineError> {
        check_button_count(n_buttons)?;
        if known.n_buttons() != n_buttons {
            return Err(EngineError::MappingSize {
                expected: n_buttons,
                got: known.n_buttons(),
            });
        }
        let mut history = HistoryPerDigit::empty(n_buttons);
        for (b, color) in known.known() {
            for d in Digit::all() {
                history.insert(d, b, color);
            }
        }
        Ok(EpisodeState::from_history(history))
    }

    /// Builds a state from an arbitrary history; the consistent set is
    /// derived from it.
    pub fn from_history(history: HistoryPerDigit) -> EpisodeState {
        let consistent = history.consistent_digits();
        EpisodeState {
            history,
            consistent,
            rounds_elapsed: 0,
            last_coloring: None,
        }
    }

    pub fn n_buttons(&self) -> usize {
        self.history.n_buttons()
    }

    pub fn history(&self) -> &HistoryPerDigit {
        &self.history
    }

    pub fn consistent_digits(&self) -> DigitSet {
        self.consistent
    }

    pub fn rounds_elapsed(&self) -> usize {
        self.rounds_elapsed
    }

    pub fn last_coloring(&self) -> Option<crate::model::Coloring> {
        self.last_coloring
    }

    /// Records a press for all ten hypotheses, eliminated ones included, and
    /// returns the digits this press eliminated.
    ///
    /// An empty consistent set afterwards is not an error here; it shows up
    /// as [`EpisodeStatus::Inconsistent`].
    pub fn record_press(&mut self, press: &PressEvent) -> Result<DigitSet, EngineError> {
        ButtonId::checked(press.button.0, self.n_buttons())?;
        for d in Digit::all() {
            self.history
                .insert(d, press.button, press.coloring.color_of(d));
        }
        let before = self.consistent;
        self.consistent = self.history.consistent_digits();
        self.rounds_elapsed += 1;
        self.last_coloring = Some(press.coloring);
        Ok(before.difference(self.consistent))
    }

    pub fn status(&self) -> EpisodeStatus {
        match self.consistent.len() {
            0 => EpisodeStatus::Inconsistent,
            1 => EpisodeStatus::Identified(self.consistent.single().expect("one digit")),
            _ => EpisodeStatus::Undecided,
        }
    }

    /// The digit, once it is the only consistent one.
    pub fn identified_digit(&self) -> Result<Option<Digit>, EngineError> {
        match self.status() {
            EpisodeStatus::Inconsistent => Err(EngineError::UserInconsistent),
            EpisodeStatus::Identified(d) => Ok(Some(d)),
            EpisodeStatus::Undecided => Ok(None),
        }
    }

    /// Button colors implied by hypothesis `d`. Buttons never pressed (and
    /// not seeded) stay unknown; conflicted buttons are reported unknown too.
    pub fn mapping_under(&self, d: Digit) -> ButtonMapping {
        ButtonMapping::from_assignment(
            (0..self.n_buttons())
                .map(|b| self.history.colors_seen(d, ButtonId(b)).single())
                .collect(),
        )
    }

    /// Reads the learned button colors off the identified digit's history.
    pub fn extract_learned_mapping(&self, d: Digit) -> Result<ButtonMapping, EngineError> {
        match self.status() {
            EpisodeStatus::Identified(found) if found == d => Ok(self.mapping_under(d)),
            _ => Err(EngineError::NotIdentified { digit: d }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Coloring;

    fn digit(v: u8) -> Digit {
        Digit::new(v).unwrap()
    }

    fn press(coloring: &str, button: usize) -> PressEvent {
        PressEvent {
            coloring: coloring.parse().unwrap(),
            button: ButtonId(button),
        }
    }

    #[test]
    fn fresh_episode_has_no_information() {
        let state = EpisodeState::new(9, &ButtonMapping::unknown(9)).unwrap();
        assert_eq!(state.consistent_digits(), DigitSet::ALL);
        assert_eq!(state.rounds_elapsed(), 0);
        for d in Digit::all() {
            for b in 0..9 {
                assert!(state.history().colors_seen(d, ButtonId(b)).is_empty());
            }
        }
    }

    #[test]
    fn known_two_button_mapping_is_seeded() {
        let state = EpisodeState::new(2, &"YG".parse().unwrap()).unwrap();
        assert_eq!(state.consistent_digits().len(), 10);
        for d in Digit::all() {
            assert_eq!(
                state.history().colors_seen(d, ButtonId(0)).single(),
                Some(Color::Yellow)
            );
            assert_eq!(
                state.history().colors_seen(d, ButtonId(1)).single(),
                Some(Color::Grey)
            );
        }
    }

    #[test]
    fn partial_seed_touches_only_known_button() {
        let state = EpisodeState::new(9, &"...G.....".parse().unwrap()).unwrap();
        for d in Digit::all() {
            for b in 0..9 {
                let seen = state.history().colors_seen(d, ButtonId(b));
                if b == 3 {
                    assert_eq!(seen.single(), Some(Color::Grey));
                } else {
                    assert!(seen.is_empty());
                }
            }
        }
    }

    #[test]
    fn single_press_never_eliminates() {
        let mut state = EpisodeState::new(9, &ButtonMapping::unknown(9)).unwrap();
        let eliminated = state.record_press(&press("YYYYYGGGGG", 2)).unwrap();
        assert!(eliminated.is_empty());
        for d in 0..10 {
            let expected = if d < 5 { Color::Yellow } else { Color::Grey };
            assert_eq!(
                state.history().colors_seen(digit(d), ButtonId(2)).single(),
                Some(expected)
            );
        }
        assert_eq!(state.consistent_digits(), DigitSet::ALL);
        assert_eq!(state.rounds_elapsed(), 1);
    }

    #[test]
    fn same_button_two_colors_eliminates() {
        let mut state = EpisodeState::new(9, &ButtonMapping::unknown(9)).unwrap();
        // digit 7 Yellow on button 3, then Grey on button 3
        state.record_press(&press("YYGGGGGYYY", 3)).unwrap();
        assert_eq!(
            state.history().colors_seen(digit(7), ButtonId(3)).single(),
            Some(Color::Yellow)
        );
        let eliminated = state.record_press(&press("YYGGGYYGGY", 3)).unwrap();
        assert!(eliminated.contains(digit(7)));
        assert_eq!(state.history().colors_seen(digit(7), ButtonId(3)).len(), 2);
        assert!(!state.consistent_digits().contains(digit(7)));
    }

    #[test]
    fn different_single_colors_on_same_button_both_survive() {
        let mut state = EpisodeState::new(9, &ButtonMapping::unknown(9)).unwrap();
        // digits 1 and 3 always opposite, so they disagree on button 4 but
        // neither is inconsistent
        state.record_press(&press("YYGGYYGGYG", 4)).unwrap();
        state.record_press(&press("GYGGYYGYYG", 4)).unwrap();
        let h = state.history();
        assert_eq!(h.colors_seen(digit(1), ButtonId(4)).single(), Some(Color::Yellow));
        assert_eq!(h.colors_seen(digit(3), ButtonId(4)).single(), Some(Color::Grey));
        assert!(state.consistent_digits().contains(digit(1)));
        assert!(state.consistent_digits().contains(digit(3)));
    }

    #[test]
    fn identification_and_errors() {
        let mut state = EpisodeState::new(2, &"YG".parse().unwrap()).unwrap();
        assert_eq!(state.identified_digit(), Ok(None));
        assert!(state.extract_learned_mapping(digit(4)).is_err());
        // press the yellow button while only digit 4 is yellow... not balanced
        // but the engine accepts any coloring
        let only_four = Coloring::from_yellow_set([digit(4)].into_iter().collect());
        state
            .record_press(&PressEvent {
                coloring: only_four,
                button: ButtonId(0),
            })
            .unwrap();
        assert_eq!(state.identified_digit(), Ok(Some(digit(4))));
        assert_eq!(
            state.extract_learned_mapping(digit(4)).unwrap().to_string(),
            "YG"
        );
        assert!(state.extract_learned_mapping(digit(3)).is_err());
        // now claim digit 4 is grey on the yellow button: nothing survives
        state
            .record_press(&PressEvent {
                coloring: Coloring::from_yellow_set(DigitSet::EMPTY),
                button: ButtonId(0),
            })
            .unwrap();
        assert_eq!(state.status(), EpisodeStatus::Inconsistent);
        assert_eq!(state.identified_digit(), Err(EngineError::UserInconsistent));
    }

    #[test]
    fn learned_mapping_read_off() {
        // digit 4: Yellow on 0..=2, Grey on 3..=7, button 8 never pressed
        let mut h = HistoryPerDigit::empty(9);
        for b in 0..8 {
            let c = if b < 3 { Color::Yellow } else { Color::Grey };
            h.insert(digit(4), ButtonId(b), c);
        }
        for d in Digit::all().filter(|d| d.value() != 4) {
            h.insert(d, ButtonId(0), Color::Yellow);
            h.insert(d, ButtonId(0), Color::Grey);
        }
        let state = EpisodeState::from_history(h);
        let m = state.extract_learned_mapping(digit(4)).unwrap();
        assert_eq!(m.to_string(), "YYYGGGGG.");
        assert_eq!(m.get(ButtonId(8)), None);
    }

    #[test]
    fn seeded_buttons_reappear_in_learned_mapping() {
        let mut state = EpisodeState::new(3, &"Y..".parse().unwrap()).unwrap();
        // known yellow button: grey digits 5..=9 go at once
        state.record_press(&press("YYYYYGGGGG", 0)).unwrap();
        assert_eq!(state.consistent_digits().bits(), 0b11111);
        // button 1 shown twice with only digit 0 keeping its color
        state.record_press(&press("YYYYYGGGGG", 1)).unwrap();
        state.record_press(&press("YGGGGYYYYG", 1)).unwrap();
        assert_eq!(state.identified_digit(), Ok(Some(digit(0))));
        let m = state.extract_learned_mapping(digit(0)).unwrap();
        assert_eq!(m.to_string(), "YY.");
    }

    #[test]
    fn out_of_range_button_rejected() {
        let mut state = EpisodeState::new(9, &ButtonMapping::unknown(9)).unwrap();
        assert!(state.record_press(&press("YYYYYGGGGG", 17)).is_err());
        assert_eq!(state.rounds_elapsed(), 0);
    }

    #[test]
    fn mapping_size_must_match() {
        assert!(matches!(
            EpisodeState::new(9, &ButtonMapping::unknown(2)),
            Err(EngineError::MappingSize { .. })
        ));
        assert!(EpisodeState::new(1, &ButtonMapping::unknown(1)).is_err());
    }
}
