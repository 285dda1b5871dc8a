//! Readers for empirical phoneme counts.
//!
//! Two UTF-8 text formats are accepted, with LF or CRLF line endings and
//! trailing blank lines ignored:
//!
//! * frequency CSV, header `language,phoneme,count`, one row per
//!   (language, phoneme) pair;
//! * wordlist TSV, header `language<TAB>tokens`, one word form per row given
//!   as space-separated phoneme symbols. Every token occurrence counts once.
//!
//! Phoneme labels are opaque strings. Languages appear in order of first
//! occurrence, phonemes within a language likewise.

use std::collections::HashMap;
use std::io::Read;

use thiserror::Error;

use crate::distribution::PhonemeDistribution;

pub const FREQUENCY_HEADER: &str = "language,phoneme,count";
pub const WORDLIST_HEADER: &str = "language\ttokens";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("reading input: {0}")]
    Io(#[from] std::io::Error),
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    Header {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: count `{value}` is not a non-negative integer")]
    BadCount { line: usize, value: String },
    #[error("line {line}: duplicate phoneme `{phoneme}` for language `{language}`")]
    Duplicate {
        line: usize,
        language: String,
        phoneme: String,
    },
    #[error("language `{language}` has {positive} phoneme(s) with positive count; at least 2 are needed")]
    TooSmallInventory { language: String, positive: usize },
}

/// Phoneme counts for one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageFrequencyTable {
    pub language_id: String,
    pub entries: Vec<(String, u64)>,
}

impl LanguageFrequencyTable {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn positive_count(&self) -> usize {
        self.entries.iter().filter(|(_, c)| *c > 0).count()
    }
}

/// Accumulates tables in first-seen order.
#[derive(Default)]
struct Collector {
    tables: Vec<LanguageFrequencyTable>,
    by_language: HashMap<String, (usize, HashMap<String, usize>)>,
}

impl Collector {
    /// Returns false when the phoneme was already present.
    fn add(&mut self, language: &str, phoneme: &str, count: u64, accumulate: bool) -> bool {
        let tables = &mut self.tables;
        let (t, phonemes) = self
            .by_language
            .entry(language.to_string())
            .or_insert_with(|| {
                tables.push(LanguageFrequencyTable {
                    language_id: language.to_string(),
                    entries: Vec::new(),
                });
                (tables.len() - 1, HashMap::new())
            });
        let entries = &mut tables[*t].entries;
        match phonemes.get(phoneme) {
            Some(&i) if accumulate => {
                entries[i].1 += count;
                true
            }
            Some(_) => false,
            None => {
                phonemes.insert(phoneme.to_string(), entries.len());
                entries.push((phoneme.to_string(), count));
                true
            }
        }
    }
}

fn read_text(mut input: impl Read) -> Result<String, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    String::from_utf8(bytes).map_err(|_| IngestError::Utf8)
}

/// Numbered lines with CR stripped and trailing blank lines dropped.
fn lines(text: &str) -> Vec<(usize, &str)> {
    let mut out: Vec<(usize, &str)> = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .collect();
    while out.last().is_some_and(|(_, l)| l.is_empty()) {
        out.pop();
    }
    out
}

fn check_header(lines: &[(usize, &str)], expected: &'static str) -> Result<(), IngestError> {
    let found = lines.first().map_or("", |(_, l)| l);
    let found = found.strip_prefix('\u{feff}').unwrap_or(found);
    if found != expected {
        return Err(IngestError::Header {
            line: 1,
            expected,
            found: found.to_string(),
        });
    }
    Ok(())
}

pub fn parse_frequency_csv(input: impl Read) -> Result<Vec<LanguageFrequencyTable>, IngestError> {
    let text = read_text(input)?;
    let lines = lines(&text);
    check_header(&lines, FREQUENCY_HEADER)?;
    let mut acc = Collector::default();
    for &(line, row) in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        let [language, phoneme, count] = fields[..] else {
            return Err(IngestError::Malformed {
                line,
                reason: format!("expected 3 comma-separated fields, found {}", fields.len()),
            });
        };
        if language.is_empty() || phoneme.is_empty() {
            return Err(IngestError::Malformed {
                line,
                reason: "empty language or phoneme field".into(),
            });
        }
        let count: u64 = count.parse().map_err(|_| IngestError::BadCount {
            line,
            value: count.to_string(),
        })?;
        if !acc.add(language, phoneme, count, false) {
            return Err(IngestError::Duplicate {
                line,
                language: language.to_string(),
                phoneme: phoneme.to_string(),
            });
        }
    }
    Ok(acc.tables)
}

pub fn parse_wordlist_tsv(input: impl Read) -> Result<Vec<LanguageFrequencyTable>, IngestError> {
    let text = read_text(input)?;
    let lines = lines(&text);
    check_header(&lines, WORDLIST_HEADER)?;
    let mut acc = Collector::default();
    for &(line, row) in &lines[1..] {
        let Some((language, tokens)) = row.split_once('\t') else {
            return Err(IngestError::Malformed {
                line,
                reason: "expected `language<TAB>tokens`".into(),
            });
        };
        if tokens.contains('\t') {
            return Err(IngestError::Malformed {
                line,
                reason: "more than two tab-separated fields".into(),
            });
        }
        if language.is_empty() {
            return Err(IngestError::Malformed {
                line,
                reason: "empty language field".into(),
            });
        }
        let mut any = false;
        for token in tokens.split(' ').filter(|t| !t.is_empty()) {
            acc.add(language, token, 1, true);
            any = true;
        }
        if !any {
            return Err(IngestError::Malformed {
                line,
                reason: "word form has no tokens".into(),
            });
        }
    }
    Ok(acc.tables)
}

/// Renders tables in the frequency CSV format.
pub fn write_frequency_csv(tables: &[LanguageFrequencyTable]) -> String {
    let mut out = String::from(FREQUENCY_HEADER);
    out.push('\n');
    for t in tables {
        for (phoneme, count) in &t.entries {
            out.push_str(&format!("{},{},{}\n", t.language_id, phoneme, count));
        }
    }
    out
}

/// Relative frequencies of the positive-count phonemes. The id of each
/// phoneme is its position in `table.entries`.
pub fn to_distribution(table: &LanguageFrequencyTable) -> Result<PhonemeDistribution, IngestError> {
    let positive = table.positive_count();
    if positive < 2 {
        return Err(IngestError::TooSmallInventory {
            language: table.language_id.clone(),
            positive,
        });
    }
    let weights: Vec<f64> = table.entries.iter().map(|(_, c)| *c as f64).collect();
    PhonemeDistribution::from_weights(&weights).map_err(|e| IngestError::Malformed {
        line: 0,
        reason: e.to_string(),
    })
}
