//! Six-dot Braille cells, alphabet tables and uncontracted encoding.

mod abbrev;
mod legend;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use abbrev::{abbreviate, AbbrevError, AbbrevKind, Abbreviation, Abbreviator, DEFAULT_STOPWORDS};
pub use legend::{Legend, LegendEntry, LegendError};

/// One Braille cell; bit `n - 1` is dot `n` (dots 1–3 left column top to
/// bottom, 4–6 right column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BrailleCell(u8);

impl BrailleCell {
    pub const EMPTY: BrailleCell = BrailleCell(0);
    /// Dots 3-4-5-6.
    pub const NUMBER_SIGN: BrailleCell = BrailleCell(0b11_1100);

    pub fn new(mask: u8) -> Option<Self> {
        (mask < 64).then_some(Self(mask))
    }

    /// Builds a cell from dot numbers 1–6.
    pub fn from_dots(dots: &[u8]) -> Option<Self> {
        let mut mask = 0u8;
        for &d in dots {
            if !(1..=6).contains(&d) {
                return None;
            }
            mask |= 1 << (d - 1);
        }
        Some(Self(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn has_dot(self, dot: u8) -> bool {
        (1..=6).contains(&dot) && self.0 & (1 << (dot - 1)) != 0
    }

    pub fn dots(self) -> impl Iterator<Item = u8> {
        (1..=6u8).filter(move |&d| self.has_dot(d))
    }

    /// Unicode Braille pattern character for display.
    pub fn to_char(self) -> char {
        char::from_u32(0x2800 + self.0 as u32).expect("valid braille pattern")
    }
}

impl fmt::Display for BrailleCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dots: Vec<String> = self.dots().map(|d| d.to_string()).collect();
        write!(f, "{}", dots.join("-"))
    }
}

/// Physical Braille dimensions in millimeters. Never scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrailleMetrics {
    pub dot_diameter: f64,
    pub dot_pitch: f64,
    pub cell_pitch: f64,
    pub line_pitch: f64,
}

impl Default for BrailleMetrics {
    fn default() -> Self {
        Self {
            dot_diameter: 1.5,
            dot_pitch: 2.5,
            cell_pitch: 6.0,
            line_pitch: 10.0,
        }
    }
}

impl BrailleMetrics {
    pub fn cell_height(&self) -> f64 {
        2.0 * self.dot_pitch + self.dot_diameter
    }

    pub fn cell_width(&self) -> f64 {
        self.dot_pitch + self.dot_diameter
    }

    /// Length of a one-line label of `cells` cells.
    pub fn label_length(&self, cells: usize) -> f64 {
        cells as f64 * self.cell_pitch
    }

    /// Center of `dot` relative to the top-left of its cell (y down).
    pub fn dot_offset(&self, dot: u8) -> (f64, f64) {
        let col = f64::from((dot - 1) / 3);
        let row = f64::from((dot - 1) % 3);
        let r = self.dot_diameter / 2.0;
        (r + col * self.dot_pitch, r + row * self.dot_pitch)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrailleError {
    #[error("character {ch:?} at position {position} has no Braille cell")]
    UnmappableCharacter { ch: char, position: usize },
    #[error("alphabet table line {line}: {message}")]
    Table { line: usize, message: String },
}

const LATIN: [(char, &[u8]); 26] = [
    ('a', &[1]),
    ('b', &[1, 2]),
    ('c', &[1, 4]),
    ('d', &[1, 4, 5]),
    ('e', &[1, 5]),
    ('f', &[1, 2, 4]),
    ('g', &[1, 2, 4, 5]),
    ('h', &[1, 2, 5]),
    ('i', &[2, 4]),
    ('j', &[2, 4, 5]),
    ('k', &[1, 3]),
    ('l', &[1, 2, 3]),
    ('m', &[1, 3, 4]),
    ('n', &[1, 3, 4, 5]),
    ('o', &[1, 3, 5]),
    ('p', &[1, 2, 3, 4]),
    ('q', &[1, 2, 3, 4, 5]),
    ('r', &[1, 2, 3, 5]),
    ('s', &[2, 3, 4]),
    ('t', &[2, 3, 4, 5]),
    ('u', &[1, 3, 6]),
    ('v', &[1, 2, 3, 6]),
    ('w', &[2, 4, 5, 6]),
    ('x', &[1, 3, 4, 6]),
    ('y', &[1, 3, 4, 5, 6]),
    ('z', &[1, 3, 5, 6]),
];

const CZECH_TABLE: &str = include_str!("../../data/czech.tsv");

/// Character → cell table. Letters are looked up in lower case; digits are
/// written as letters a–j after a number sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    cells: HashMap<char, BrailleCell>,
}

impl Default for Alphabet {
    /// Latin plus the Czech diacritic table.
    fn default() -> Self {
        Self::czech()
    }
}

impl Alphabet {
    /// Latin a–z, space and hyphen.
    pub fn latin() -> Self {
        let mut cells: HashMap<char, BrailleCell> = LATIN
            .iter()
            .map(|&(c, d)| (c, BrailleCell::from_dots(d).expect("static table")))
            .collect();
        cells.insert(' ', BrailleCell::EMPTY);
        cells.insert('-', BrailleCell::from_dots(&[3, 6]).expect("static"));
        Self { cells }
    }

    pub fn czech() -> Self {
        Self::latin()
            .extended(CZECH_TABLE)
            .expect("built-in Czech table parses")
    }

    /// Adds (or overrides) entries from a `<char>\t<dots>` table, e.g.
    /// `č\t1-4-6`. Lines starting with `#` followed by anything but a tab
    /// are comments.
    pub fn extended(mut self, table: &str) -> Result<Self, BrailleError> {
        for (i, line) in table.lines().enumerate() {
            let err = |message: &str| BrailleError::Table {
                line: i + 1,
                message: message.to_owned(),
            };
            if line.trim().is_empty() || (line.starts_with('#') && !line.starts_with("#\t")) {
                continue;
            }
            let (ch, dots) = line.split_once('\t').ok_or_else(|| err("expected <char>TAB<dots>"))?;
            let mut chars = ch.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(err("first column must be exactly one character"));
            };
            let dots: Vec<u8> = dots
                .trim()
                .split('-')
                .map(|d| d.parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|_| err("dot list must look like 1-2-4"))?;
            let cell = BrailleCell::from_dots(&dots).ok_or_else(|| err("dots must be 1..=6"))?;
            self.cells.insert(lower(c), cell);
        }
        Ok(self)
    }

    pub fn cell(&self, c: char) -> Option<BrailleCell> {
        self.cells.get(&lower(c)).copied()
    }

    /// Letters (alphabetic characters) the table can write.
    pub fn has_letter(&self, c: char) -> bool {
        c.is_alphabetic() && self.cell(c).is_some()
    }
}

fn lower(c: char) -> char {
    let mut l = c.to_lowercase();
    match (l.next(), l.next()) {
        (Some(x), None) => x,
        _ => c,
    }
}

/// Encodes text cell by cell. Each run of digits is preceded by one number
/// sign.
pub fn encode(text: &str, alphabet: &Alphabet) -> Result<Vec<BrailleCell>, BrailleError> {
    let mut out = Vec::with_capacity(text.len());
    let mut in_number = false;
    for (position, ch) in text.chars().enumerate() {
        if let Some(d) = ch.to_digit(10) {
            if !in_number {
                out.push(BrailleCell::NUMBER_SIGN);
                in_number = true;
            }
            let letter = if d == 0 { 'j' } else { (b'a' + d as u8 - 1) as char };
            out.push(alphabet.cell(letter).expect("latin a-j present"));
            continue;
        }
        in_number = false;
        let cell = alphabet
            .cell(ch)
            .ok_or(BrailleError::UnmappableCharacter { ch, position })?;
        out.push(cell);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(d: &[u8]) -> BrailleCell {
        BrailleCell::from_dots(d).unwrap()
    }

    #[test]
    fn letters() {
        let a = Alphabet::latin();
        assert_eq!(encode("a", &a).unwrap(), vec![cell(&[1])]);
        assert_eq!(
            encode("abc", &a).unwrap(),
            vec![cell(&[1]), cell(&[1, 2]), cell(&[1, 4])]
        );
        assert_eq!(encode("ABC", &a).unwrap(), encode("abc", &a).unwrap());
    }

    #[test]
    fn designation_uses_number_signs() {
        let a = Alphabet::default();
        let num = cell(&[3, 4, 5, 6]);
        assert_eq!(
            encode("C0R0", &a).unwrap(),
            vec![
                cell(&[1, 4]),
                num,
                cell(&[2, 4, 5]),
                cell(&[1, 2, 3, 5]),
                num,
                cell(&[2, 4, 5])
            ]
        );
        assert_eq!(
            encode("C-12R7", &a).unwrap(),
            vec![
                cell(&[1, 4]),
                cell(&[3, 6]),
                num,
                cell(&[1]),
                cell(&[1, 2]),
                cell(&[1, 2, 3, 5]),
                num,
                cell(&[1, 2, 4, 5])
            ]
        );
    }

    #[test]
    fn czech_letters_come_from_the_table() {
        let a = Alphabet::default();
        assert_eq!(encode("č", &a).unwrap(), vec![cell(&[1, 4, 6])]);
        assert_eq!(encode("Ž", &a).unwrap(), vec![cell(&[2, 3, 4, 6])]);
        assert_eq!(
            encode("ř", &Alphabet::latin()),
            Err(BrailleError::UnmappableCharacter { ch: 'ř', position: 0 })
        );
    }

    #[test]
    fn unmappable_reports_position() {
        assert_eq!(
            encode("ab?", &Alphabet::latin()),
            Err(BrailleError::UnmappableCharacter { ch: '?', position: 2 })
        );
    }

    #[test]
    fn table_parsing() {
        let a = Alphabet::latin()
            .extended("# comment\n#\t3-4-5-6\nä\t3-4-5\n")
            .unwrap();
        assert_eq!(a.cell('#'), Some(cell(&[3, 4, 5, 6])));
        assert_eq!(a.cell('Ä'), Some(cell(&[3, 4, 5])));
        assert!(matches!(
            Alphabet::latin().extended("ä\t7"),
            Err(BrailleError::Table { line: 1, .. })
        ));
        assert!(Alphabet::latin().extended("ab\t1").is_err());
    }

    #[test]
    fn metrics_fit_the_wide_corridor() {
        let m = BrailleMetrics::default();
        assert_eq!(m.cell_height(), 6.5);
        assert!(m.cell_height() <= 13.0);
        assert_eq!(m.dot_offset(1), (0.75, 0.75));
        assert_eq!(m.dot_offset(6), (3.25, 5.75));
    }
}
