use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AbbrevKind, Abbreviation};

/// One line of the abbreviation list. Entries not lettered on any sheet
/// are marked with `*` after the letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub letters: String,
    pub full_name: String,
    pub kind: AbbrevKind,
    pub placed: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("abbreviation {0:?} appears more than once")]
pub struct LegendError(pub String);

/// Validated abbreviation list: one entry per distinct abbreviation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Legend {
    entries: Vec<LegendEntry>,
}

impl Legend {
    pub fn new(mut entries: Vec<LegendEntry>) -> Result<Self, LegendError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.letters.as_str()) {
                return Err(LegendError(e.letters.clone()));
            }
        }
        entries.sort_by(|a, b| a.letters.cmp(&b.letters));
        Ok(Self { entries })
    }

    pub fn from_abbreviations(abbrs: &[Abbreviation]) -> Result<Self, LegendError> {
        Self::new(
            abbrs
                .iter()
                .map(|a| LegendEntry {
                    letters: a.letters.clone(),
                    full_name: a.full_name.clone(),
                    kind: a.kind,
                    placed: true,
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[LegendEntry] {
        &self.entries
    }

    /// The `abbreviations.txt` body: `STREETS` then `SQUARES`, one
    /// `<letters>\t<full name>` line per entry sorted by letters, UTF-8,
    /// trailing newline.
    pub fn to_text(&self) -> Vec<u8> {
        let mut out = String::new();
        for (header, kind) in [("STREETS", AbbrevKind::Street), ("SQUARES", AbbrevKind::Square)] {
            out.push_str(header);
            out.push('\n');
            for e in self.entries.iter().filter(|e| e.kind == kind) {
                out.push_str(&e.letters);
                if !e.placed {
                    out.push('*');
                }
                out.push('\t');
                out.push_str(&e.full_name);
                out.push('\n');
            }
        }
        out.into_bytes()
    }
}
