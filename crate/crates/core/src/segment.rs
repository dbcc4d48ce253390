//! Sentence segmentation of a provider's caption stream.
//!
//! Boundaries come from three signals: a speaker-change marker at the start of
//! a token, terminal punctuation closing a token, and a silence gap between
//! consecutive caption lines. A hard cap on sentence length forces a split
//! when none of those fire.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{CaptionLine, Millis, Provider};

#[derive(Debug, Error, PartialEq)]
pub enum RulesError {
    #[error("speaker_marker must be non-empty")]
    EmptyMarker,
    #[error("max_gap_ms must be > 0, got {0}")]
    NonPositiveGap(Millis),
    #[error("max_sentence_tokens must be > 0")]
    ZeroTokenCap,
    #[error("terminal_punctuation must be non-empty")]
    EmptyPunctuation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRules {
    pub speaker_marker: String,
    pub terminal_punctuation: Vec<char>,
    pub max_gap_ms: Millis,
    pub max_sentence_tokens: usize,
}

impl Default for SegmentationRules {
    fn default() -> Self {
        SegmentationRules {
            speaker_marker: ">>".into(),
            terminal_punctuation: vec!['.', '?', '!'],
            max_gap_ms: 5_000,
            max_sentence_tokens: 100,
        }
    }
}

impl SegmentationRules {
    pub fn validate(&self) -> Result<(), RulesError> {
        if self.speaker_marker.is_empty() {
            return Err(RulesError::EmptyMarker);
        }
        if self.max_gap_ms <= 0 {
            return Err(RulesError::NonPositiveGap(self.max_gap_ms));
        }
        if self.max_sentence_tokens == 0 {
            return Err(RulesError::ZeroTokenCap);
        }
        if self.terminal_punctuation.is_empty() {
            return Err(RulesError::EmptyPunctuation);
        }
        Ok(())
    }

    fn is_terminal(&self, word: &str) -> bool {
        word.chars()
            .last()
            .is_some_and(|c| self.terminal_punctuation.contains(&c))
    }
}

/// A segmented sentence.
///
/// `id` is `provider@start_ms.k`, where `k` numbers sentences of the same
/// provider that start on the same caption line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub provider: Provider,
    pub start_ms: Millis,
    pub end_ms: Millis,
    pub text: String,
    /// Indices of the first and last caption lines contributing words.
    pub source_line_span: (usize, usize),
}

/// Collapses whitespace runs to single spaces and trims. Case is preserved.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Strips a leading speaker marker from every token, dropping tokens that
/// consisted of the marker alone.
pub fn strip_markers(text: &str, marker: &str) -> String {
    text.split_whitespace()
        .map(|t| t.strip_prefix(marker).unwrap_or(t))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

struct Piece<'a> {
    line: usize,
    ts: Millis,
    word: &'a str,
    marker: bool,
    gap_before: bool,
}

#[derive(Default)]
struct Open<'a> {
    words: Vec<&'a str>,
    first_line: usize,
    last_line: usize,
    start: Millis,
    end: Millis,
}

/// Segments one provider's time-ordered caption lines into sentences.
pub fn segment(
    provider: &Provider,
    lines: &[CaptionLine],
    rules: &SegmentationRules,
) -> Vec<Sentence> {
    let mut pieces = Vec::new();
    for (li, line) in lines.iter().enumerate() {
        let gap = li > 0 && line.ts_ms - lines[li - 1].ts_ms > rules.max_gap_ms;
        for (wi, raw) in line.text.split_whitespace().enumerate() {
            let (word, marker) = match raw.strip_prefix(rules.speaker_marker.as_str()) {
                Some(rest) => (rest, true),
                None => (raw, false),
            };
            pieces.push(Piece {
                line: li,
                ts: line.ts_ms,
                word,
                marker,
                gap_before: gap && wi == 0,
            });
        }
    }

    let mut out = Vec::new();
    let mut per_start: BTreeMap<Millis, usize> = BTreeMap::new();
    let mut open = Open::default();
    let mut flush = |open: &mut Open, out: &mut Vec<Sentence>| {
        if open.words.is_empty() {
            return;
        }
        let k = per_start.entry(open.start).or_insert(0);
        out.push(Sentence {
            id: format!("{}@{}.{}", provider, open.start, k),
            provider: provider.clone(),
            start_ms: open.start,
            end_ms: open.end,
            text: open.words.join(" "),
            source_line_span: (open.first_line, open.last_line),
        });
        *k += 1;
        *open = Open::default();
    };

    for (i, piece) in pieces.iter().enumerate() {
        if piece.marker || piece.gap_before {
            flush(&mut open, &mut out);
        }
        if piece.word.is_empty() {
            continue;
        }
        if open.words.is_empty() {
            open.first_line = piece.line;
            open.start = piece.ts;
            open.end = piece.ts;
        }
        open.words.push(piece.word);
        open.last_line = piece.line;
        open.end = open.end.max(piece.ts);

        let terminal = rules.is_terminal(piece.word) && !continues_abbreviation(piece.word, pieces.get(i + 1));
        if terminal || open.words.len() >= rules.max_sentence_tokens {
            flush(&mut open, &mut out);
        }
    }
    flush(&mut open, &mut out);
    out
}

/// A period followed directly by a lowercase word does not end a sentence.
fn continues_abbreviation(word: &str, next: Option<&Piece>) -> bool {
    if !word.ends_with('.') {
        return false;
    }
    match next {
        Some(p) if !p.marker && !p.gap_before => {
            p.word.chars().next().is_some_and(char::is_lowercase)
        }
        _ => false,
    }
}
