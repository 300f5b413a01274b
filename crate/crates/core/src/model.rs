//! Domain types shared by the engine, planner, session and decoder.
//!
//! Digits are fixed to `0..=9`. Buttons are plain indices into a keypad of
//! `n_buttons` keys; what a button *means* (yellow or grey) is never stored
//! on the button itself, only in a [`ButtonMapping`] that is either the
//! user's private choice or what the engine has learned so far.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of digits a PIN is built from.
pub const DIGIT_COUNT: usize = 10;

/// Number of yellow digits in a balanced coloring.
pub const BALANCED_YELLOW: u32 = 5;

/// Largest keypad the engine accepts. Keeps planner scores exact in `u128`.
pub const MAX_BUTTONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid digit {0:?}")]
    InvalidDigit(String),
    #[error("button {button} out of range for a {n_buttons}-button keypad")]
    ButtonOutOfRange { button: usize, n_buttons: usize },
    #[error("invalid coloring {0:?}: expected 10 characters of 'Y' or 'G'")]
    InvalidColoring(String),
    #[error("invalid mapping {0:?}: expected characters 'Y', 'G' or '.'")]
    InvalidMapping(String),
}

pub(crate) fn check_button_count(n_buttons: usize) -> Result<(), ModelError> {
    if n_buttons < 2 {
        return Err(ModelError::InvalidConfiguration(format!(
            "at least 2 buttons are required, got {n_buttons}"
        )));
    }
    if n_buttons > MAX_BUTTONS {
        return Err(ModelError::InvalidConfiguration(format!(
            "at most {MAX_BUTTONS} buttons are supported, got {n_buttons}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::Yellow, Color::Grey];

    pub fn other(self) -> Color {
        match self {
            Color::Yellow => Color::Grey,
            Color::Grey => Color::Yellow,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Color::Yellow => 'Y',
            Color::Grey => 'G',
        }
    }

    pub fn from_char(c: char) -> Option<Color> {
        match c {
            'Y' | 'y' => Some(Color::Yellow),
            'G' | 'g' => Some(Color::Grey),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_char(self.as_char())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Color::from_char), chars.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(serde::de::Error::custom(format!(
                "invalid color {s:?}, expected \"Y\" or \"G\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Digit(u8);

impl Digit {
    pub fn new(value: u8) -> Result<Digit, ModelError> {
        if (value as usize) < DIGIT_COUNT {
            Ok(Digit(value))
        } else {
            Err(ModelError::InvalidDigit(value.to_string()))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Digit> {
        (0..DIGIT_COUNT as u8).map(Digit)
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<'de> Deserialize<'de> for Digit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(deserializer)?;
        Digit::new(v).map_err(serde::de::Error::custom)
    }
}

/// Parses a PIN written as a string of decimal digits, e.g. `"1234"`.
pub fn parse_pin(s: &str) -> Result<Vec<Digit>, ModelError> {
    if s.is_empty() {
        return Err(ModelError::InvalidDigit(String::new()));
    }
    s.chars()
        .map(|c| {
            c.to_digit(10)
                .map(|v| Digit(v as u8))
                .ok_or_else(|| ModelError::InvalidDigit(c.to_string()))
        })
        .collect()
}

pub fn format_pin(pin: &[Digit]) -> String {
    pin.iter().map(|d| d.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ButtonId(pub usize);

impl ButtonId {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn checked(index: usize, n_buttons: usize) -> Result<ButtonId, ModelError> {
        if index < n_buttons {
            Ok(ButtonId(index))
        } else {
            Err(ModelError::ButtonOutOfRange {
                button: index,
                n_buttons,
            })
        }
    }
}

impl fmt::Display for ButtonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of digits packed into the low ten bits of a `u16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DigitSet(u16);

impl DigitSet {
    pub const ALL: DigitSet = DigitSet((1 << DIGIT_COUNT) - 1);
    pub const EMPTY: DigitSet = DigitSet(0);

    pub fn from_bits(bits: u16) -> DigitSet {
        DigitSet(bits & Self::ALL.0)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, d: Digit) -> bool {
        self.0 & (1 << d.0) != 0
    }

    pub fn insert(&mut self, d: Digit) {
        self.0 |= 1 << d.0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: DigitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: DigitSet) -> DigitSet {
        DigitSet(self.0 & other.0)
    }

    pub fn difference(self, other: DigitSet) -> DigitSet {
        DigitSet(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Digit> {
        Digit::all().filter(move |d| self.contains(*d))
    }

    /// The single member, if there is exactly one.
    pub fn single(self) -> Option<Digit> {
        if self.len() == 1 {
            Some(Digit(self.0.trailing_zeros() as u8))
        } else {
            None
        }
    }
}

impl FromIterator<Digit> for DigitSet {
    fn from_iter<I: IntoIterator<Item = Digit>>(iter: I) -> Self {
        let mut set = DigitSet::EMPTY;
        for d in iter {
            set.insert(d);
        }
        set
    }
}

impl Serialize for DigitSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// One round's question: the color shown on each of the ten digits.
///
/// Stored as a bitmask of yellow digits. Text form is a fixed ten character
/// string such as `"YYGGYGYGGY"`, digit 0 first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coloring {
    yellow: u16,
}

impl Coloring {
    pub fn from_yellow_set(yellow: DigitSet) -> Coloring {
        Coloring {
            yellow: yellow.bits(),
        }
    }

    pub fn from_colors(colors: [Color; DIGIT_COUNT]) -> Coloring {
        let yellow = colors
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Color::Yellow)
            .fold(0u16, |acc, (i, _)| acc | (1 << i));
        Coloring { yellow }
    }

    pub fn color_of(self, d: Digit) -> Color {
        if self.yellow & (1 << d.0) != 0 {
            Color::Yellow
        } else {
            Color::Grey
        }
    }

    pub fn colors(self) -> [Color; DIGIT_COUNT] {
        let mut out = [Color::Grey; DIGIT_COUNT];
        for d in Digit::all() {
            out[d.index()] = self.color_of(d);
        }
        out
    }

    pub fn yellow_digits(self) -> DigitSet {
        DigitSet::from_bits(self.yellow)
    }

    pub fn grey_digits(self) -> DigitSet {
        DigitSet::ALL.difference(self.yellow_digits())
    }

    pub fn digits_with(self, color: Color) -> DigitSet {
        match color {
            Color::Yellow => self.yellow_digits(),
            Color::Grey => self.grey_digits(),
        }
    }

    pub fn yellow_count(self) -> u32 {
        self.yellow.count_ones()
    }

    pub fn is_balanced(self) -> bool {
        coloring_is_balanced(self)
    }
}

/// True iff exactly five digits are yellow.
pub fn coloring_is_balanced(coloring: Coloring) -> bool {
    coloring.yellow_count() == BALANCED_YELLOW
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.colors() {
            write!(f, "{}", c.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Coloring {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != DIGIT_COUNT {
            return Err(ModelError::InvalidColoring(s.to_string()));
        }
        let mut colors = [Color::Grey; DIGIT_COUNT];
        for (slot, c) in colors.iter_mut().zip(chars) {
            *slot = Color::from_char(c).ok_or_else(|| ModelError::InvalidColoring(s.to_string()))?;
        }
        Ok(Coloring::from_colors(colors))
    }
}

impl Serialize for Coloring {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coloring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Button to color assignment; `None` marks a button whose color is unknown
/// (drawn black on the keypad).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ButtonMapping {
    assignment: Vec<Option<Color>>,
}

impl ButtonMapping {
    pub fn unknown(n_buttons: usize) -> ButtonMapping {
        ButtonMapping {
            assignment: vec![None; n_buttons],
        }
    }

    pub fn from_colors(colors: &[Color]) -> ButtonMapping {
        ButtonMapping {
            assignment: colors.iter().copied().map(Some).collect(),
        }
    }

    pub fn from_assignment(assignment: Vec<Option<Color>>) -> ButtonMapping {
        ButtonMapping { assignment }
    }

    pub fn n_buttons(&self) -> usize {
        self.assignment.len()
    }

    pub fn get(&self, b: ButtonId) -> Option<Color> {
        self.assignment.get(b.0).copied().flatten()
    }

    pub fn set(&mut self, b: ButtonId, color: Option<Color>) {
        self.assignment[b.0] = color;
    }

    pub fn assignment(&self) -> &[Option<Color>] {
        &self.assignment
    }

    pub fn known(&self) -> impl Iterator<Item = (ButtonId, Color)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (ButtonId(i), c)))
    }

    pub fn known_count(&self) -> usize {
        self.assignment.iter().filter(|c| c.is_some()).count()
    }

    pub fn buttons_with(&self, color: Color) -> Vec<ButtonId> {
        self.known()
            .filter(|(_, c)| *c == color)
            .map(|(b, _)| b)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    /// A usable user mapping: every button colored, both colors present.
    pub fn is_valid_user_mapping(&self) -> bool {
        self.is_complete()
            && self.known().any(|(_, c)| c == Color::Yellow)
            && self.known().any(|(_, c)| c == Color::Grey)
    }

    /// Every known entry of `self` is also present, with the same color, in `other`.
    pub fn agrees_with(&self, other: &ButtonMapping) -> bool {
        self.known().all(|(b, c)| other.get(b) == Some(c))
    }
}

impl fmt::Display for ButtonMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.assignment {
            write!(f, "{}", c.map_or('.', Color::as_char))?;
        }
        Ok(())
    }
}

impl FromStr for ButtonMapping {
    type Err = ModelError;

    /// `"YYG.G"`: one character per button, `.` for unknown.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '.' | '?' | '-' => Ok(None),
                c => Color::from_char(c)
                    .map(Some)
                    .ok_or_else(|| ModelError::InvalidMapping(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ButtonMapping::from_assignment)
    }
}

impl Serialize for ButtonMapping {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ButtonMapping {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All complete mappings using both colors, `2^n - 2` of them.
///
/// Ordered lexicographically with button 0 most significant and Yellow
/// before Grey.
pub fn enumerate_valid_mappings(n_buttons: usize) -> Result<Vec<ButtonMapping>, ModelError> {
    check_button_count(n_buttons)?;
    if n_buttons > 24 {
        return Err(ModelError::InvalidConfiguration(format!(
            "refusing to enumerate 2^{n_buttons} mappings"
        )));
    }
    let total = 1u64 << n_buttons;
    // bit (n-1-i) set means button i is Grey; 0 and total-1 are monochrome
    Ok((1..total - 1)
        .map(|code| {
            ButtonMapping::from_assignment(
                (0..n_buttons)
                    .map(|i| {
                        if code & (1 << (n_buttons - 1 - i)) != 0 {
                            Some(Color::Grey)
                        } else {
                            Some(Color::Yellow)
                        }
                    })
                    .collect(),
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PressEvent {
    pub coloring: Coloring,
    pub button: ButtonId,
}

/// The presses that led (or are leading) to one PIN digit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Episode {
    pub presses: Vec<PressEvent>,
    /// Filled only when the identified digit was visible to an observer.
    pub identified_digit: Option<Digit>,
}

/// What someone watching the keypad and the digit rows can record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub n_buttons: usize,
    pub episodes: Vec<Episode>,
}

impl Transcript {
    pub fn new(n_buttons: usize) -> Transcript {
        Transcript {
            n_buttons,
            episodes: Vec::new(),
        }
    }

    pub fn total_presses(&self) -> usize {
        self.episodes.iter().map(|e| e.presses.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mapping_counts_match_two_to_the_n_minus_two() {
        for n in 2..=9 {
            let all = enumerate_valid_mappings(n).unwrap();
            assert_eq!(all.len(), (1usize << n) - 2, "n = {n}");
            assert!(all.iter().all(ButtonMapping::is_valid_user_mapping));
            let unique: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(unique.len(), all.len());
        }
        assert_eq!(enumerate_valid_mappings(9).unwrap().len(), 510);
    }

    #[test]
    fn two_button_mappings_in_order() {
        let all = enumerate_valid_mappings(2).unwrap();
        let text: Vec<String> = all.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, ["YG", "GY"]);
    }

    #[test]
    fn three_button_mappings_brute_force() {
        let all = enumerate_valid_mappings(3).unwrap();
        let mut brute = Vec::new();
        for a in Color::ALL {
            for b in Color::ALL {
                for c in Color::ALL {
                    if !(a == b && b == c) {
                        brute.push(ButtonMapping::from_colors(&[a, b, c]));
                    }
                }
            }
        }
        assert_eq!(all, brute);
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn too_few_buttons_rejected() {
        assert!(matches!(
            enumerate_valid_mappings(1),
            Err(ModelError::InvalidConfiguration(_))
        ));
        assert!(enumerate_valid_mappings(0).is_err());
    }

    #[test]
    fn balance_examples() {
        assert!(coloring_is_balanced("YYYYYGGGGG".parse().unwrap()));
        assert!(!coloring_is_balanced("YYYYYYYYYY".parse().unwrap()));
        assert!(coloring_is_balanced("YGYGYGYGYG".parse().unwrap()));
    }

    #[test]
    fn balance_agrees_with_direct_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let mut colors = [Color::Grey; DIGIT_COUNT];
            for c in colors.iter_mut() {
                if rng.gen_bool(0.5) {
                    *c = Color::Yellow;
                }
            }
            let direct = colors.iter().filter(|c| **c == Color::Yellow).count() == 5;
            assert_eq!(coloring_is_balanced(Coloring::from_colors(colors)), direct);
        }
    }

    #[test]
    fn coloring_text_form() {
        let c: Coloring = "YYGGYGYGGY".parse().unwrap();
        assert_eq!(c.to_string(), "YYGGYGYGGY");
        assert_eq!(c.color_of(Digit::new(2).unwrap()), Color::Grey);
        assert!("YYG".parse::<Coloring>().is_err());
        assert!("YYGGYGYGGX".parse::<Coloring>().is_err());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "\"YYGGYGYGGY\"");
    }

    #[test]
    fn pin_parsing() {
        let pin = parse_pin("1234").unwrap();
        assert_eq!(format_pin(&pin), "1234");
        assert_eq!(
            parse_pin("12X4"),
            Err(ModelError::InvalidDigit("X".to_string()))
        );
        assert!(parse_pin("").is_err());
        assert!(Digit::new(10).is_err());
    }

    #[test]
    fn mapping_text_and_validity() {
        let m: ButtonMapping = "YY.G".parse().unwrap();
        assert_eq!(m.known_count(), 3);
        assert!(!m.is_complete());
        assert_eq!(m.get(ButtonId(2)), None);
        assert_eq!(m.to_string(), "YY.G");
        assert!(!"YYYY".parse::<ButtonMapping>().unwrap().is_valid_user_mapping());
        assert!("YGYY".parse::<ButtonMapping>().unwrap().is_valid_user_mapping());
    }
}
