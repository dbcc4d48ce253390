use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::annotate::Token;

/// Words with at least this many syllables count as complex.
pub const COMPLEX_SYLLABLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityStats {
    pub words_per_sentence: f64,
    pub complex_word_ratio: f64,
    pub fog_index: f64,
}

/// `0.4 * (words_per_sentence + 100 * complex_word_ratio)`, evaluated as a
/// single division so that e.g. 6 words per sentence gives exactly 2.4.
pub fn fog_index(words_per_sentence: f64, complex_word_ratio: f64) -> f64 {
    (words_per_sentence + 100.0 * complex_word_ratio) / 2.5
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count: maximal vowel groups, minus a silent final `e`.
///
/// The final `e` is silent when it follows a consonant, except in a
/// consonant + `le` ending (`table`, `bubble`). The result is at least 1.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let mut groups = 0;
    let mut in_group = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = letters.len();
    if groups > 1 && n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// Fog readability over a set of tokenized sentences. Punctuation tokens are
/// not words.
pub fn readability<'a, I>(sentences: I) -> Result<ReadabilityStats, ScoringError>
where
    I: IntoIterator<Item = &'a [Token]>,
{
    let (mut n_sentences, mut words, mut complex) = (0usize, 0usize, 0usize);
    for tokens in sentences {
        n_sentences += 1;
        for t in tokens.iter().filter(|t| !t.is_punctuation()) {
            words += 1;
            if count_syllables(&t.surface) >= COMPLEX_SYLLABLES {
                complex += 1;
            }
        }
    }
    if n_sentences == 0 {
        return Err(ScoringError::NoSentences);
    }
    let words_per_sentence = words as f64 / n_sentences as f64;
    let complex_word_ratio = if words == 0 {
        0.0
    } else {
        complex as f64 / words as f64
    };
    Ok(ReadabilityStats {
        words_per_sentence,
        complex_word_ratio,
        fog_index: fog_index(words_per_sentence, complex_word_ratio),
    })
}
