//! Short Braille names for streets (three letters) and squares (four),
//! unique within one job.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Alphabet;

pub const DEFAULT_STOPWORDS: [&str; 6] = ["ulice", "náměstí", "u", "na", "nad", "pod"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AbbrevKind {
    Street,
    Square,
}

impl AbbrevKind {
    pub fn letter_count(self) -> usize {
        match self {
            AbbrevKind::Street => 3,
            AbbrevKind::Square => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Abbreviation {
    pub target_id: i64,
    pub kind: AbbrevKind,
    pub letters: String,
    pub full_name: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbbrevError {
    #[error("name {0:?} has no writable letters")]
    EmptyName(String),
    #[error("no free abbreviation left for prefix {prefix:?} (names: {names:?})")]
    Exhausted { prefix: String, names: Vec<String> },
}

/// Abbreviation generator with its normalization settings.
#[derive(Debug, Clone)]
pub struct Abbreviator {
    alphabet: Alphabet,
    stopwords: Vec<String>,
}

impl Default for Abbreviator {
    fn default() -> Self {
        Self::new(Alphabet::default())
    }
}

struct Normalized {
    /// Remaining words joined by single spaces.
    key: String,
    first_word: Vec<char>,
    /// Letters of all remaining words, in order.
    letters: Vec<char>,
}

impl Abbreviator {
    pub fn new(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn with_stopwords(mut self, stopwords: impl IntoIterator<Item = String>) -> Self {
        self.stopwords = stopwords.into_iter().map(|s| s.to_lowercase()).collect();
        self
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Lower-cases, splits into words of writable letters and drops leading
    /// stopwords (always keeping at least one word).
    fn normalize(&self, name: &str) -> Option<Normalized> {
        let lower = name.to_lowercase();
        let mut words: Vec<String> = lower
            .split(|c: char| !c.is_alphabetic())
            .map(|w| w.chars().filter(|&c| self.alphabet.has_letter(c)).collect::<String>())
            .filter(|w| !w.is_empty())
            .collect();
        while words.len() > 1 && self.stopwords.iter().any(|s| *s == words[0]) {
            words.remove(0);
        }
        let first_word: Vec<char> = words.first()?.chars().collect();
        Some(Normalized {
            key: words.join(" "),
            first_word,
            letters: words.iter().flat_map(|w| w.chars()).collect(),
        })
    }

    /// Assigns every `(id, full name, kind)` a unique abbreviation. Output
    /// order follows the input; assignment order is by normalized name so
    /// the result does not depend on input order.
    pub fn abbreviate(
        &self,
        names: &[(i64, String, AbbrevKind)],
    ) -> Result<Vec<Abbreviation>, AbbrevError> {
        let mut prepared = Vec::with_capacity(names.len());
        for (i, (id, full, kind)) in names.iter().enumerate() {
            let n = self
                .normalize(full)
                .ok_or_else(|| AbbrevError::EmptyName(full.clone()))?;
            prepared.push((i, *id, full, *kind, n));
        }
        prepared.sort_by(|a, b| {
            (&a.4.key, a.3, a.2, a.1).cmp(&(&b.4.key, b.3, b.2, b.1))
        });

        let mut used: HashSet<String> = HashSet::new();
        let mut out: Vec<Option<Abbreviation>> = vec![None; names.len()];
        for (slot, id, full, kind, n) in prepared {
            let k = kind.letter_count();
            let mut base: Vec<char> = n.first_word.iter().copied().take(k).collect();
            let last = *base.last().expect("non-empty word");
            base.resize(k, last);
            let candidate: String = base.iter().collect();
            let letters = if used.contains(&candidate) {
                let stem: String = base[..k - 1].iter().collect();
                n.letters
                    .iter()
                    .skip(k)
                    .copied()
                    .chain('a'..='z')
                    .map(|c| format!("{stem}{c}"))
                    .find(|c| !used.contains(c))
                    .ok_or_else(|| AbbrevError::Exhausted {
                        prefix: stem.clone(),
                        names: names.iter().map(|(_, f, _)| f.clone()).collect(),
                    })?
            } else {
                candidate
            };
            used.insert(letters.clone());
            out[slot] = Some(Abbreviation {
                target_id: id,
                kind,
                letters,
                full_name: full.clone(),
            });
        }
        Ok(out.into_iter().map(|a| a.expect("every slot filled")).collect())
    }
}

/// [`Abbreviator::abbreviate`] with the default Czech alphabet and
/// stopwords.
pub fn abbreviate(names: &[(i64, String, AbbrevKind)]) -> Result<Vec<Abbreviation>, AbbrevError> {
    Abbreviator::default().abbreviate(names)
}
