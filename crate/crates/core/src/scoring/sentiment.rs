use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::annotate::Token;
use crate::ingest::{read_to_string, tsv_rows};

/// Tokens before a hit that are searched for a negator.
pub const NEGATION_WINDOW: usize = 2;

/// Dual-scale sentiment of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentResult {
    /// Strongest positive valence, 1 (neutral) to 5.
    pub pos_strength: i32,
    /// Strongest negative valence, -1 (neutral) to -5.
    pub neg_strength: i32,
    pub score: i32,
    pub pos_word_count: usize,
    pub neg_word_count: usize,
}

impl SentimentResult {
    pub const NEUTRAL: SentimentResult = SentimentResult {
        pos_strength: 1,
        neg_strength: -1,
        score: 0,
        pos_word_count: 0,
        neg_word_count: 0,
    };
}

#[derive(Debug, Clone, Default)]
pub struct ValenceLexicon {
    pub valence: HashMap<String, i32>,
    pub negators: HashSet<String>,
    pub boosters: HashMap<String, i32>,
}

impl ValenceLexicon {
    pub fn new(
        valence: impl IntoIterator<Item = (String, i32)>,
        negators: impl IntoIterator<Item = String>,
        boosters: impl IntoIterator<Item = (String, i32)>,
    ) -> Self {
        ValenceLexicon {
            valence: valence
                .into_iter()
                .filter(|(_, v)| (1..=5).contains(&v.abs()))
                .map(|(w, v)| (w.to_lowercase(), v))
                .collect(),
            negators: negators.into_iter().map(|w| w.to_lowercase()).collect(),
            boosters: boosters
                .into_iter()
                .map(|(w, d)| (w.to_lowercase(), d))
                .collect(),
        }
    }

    pub fn parse(valence: &str, negators: &str, boosters: &str) -> Result<Self, ScoringError> {
        let valence = int_table(valence, "valence.tsv", true)?;
        let boosters = int_table(boosters, "boosters.tsv", false)?;
        let negators = negators
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string);
        Ok(Self::new(valence, negators, boosters))
    }

    /// Loads `valence.tsv`, plus `negators.txt` and `boosters.tsv` when present.
    pub fn load_dir(dir: &Path) -> Result<Self, ScoringError> {
        let valence = read_to_string(&dir.join("valence.tsv"))?;
        let optional = |name: &str| {
            let p = dir.join(name);
            if p.exists() {
                read_to_string(&p)
            } else {
                Ok(String::new())
            }
        };
        Self::parse(&valence, &optional("negators.txt")?, &optional("boosters.tsv")?)
    }
}

fn int_table(text: &str, file: &str, valence: bool) -> Result<Vec<(String, i32)>, ScoringError> {
    tsv_rows(text)
        .map(|(line, f)| {
            let err = |reason: String| ScoringError::Table {
                file: file.into(),
                line,
                reason,
            };
            if f.len() != 2 {
                return Err(err(format!("expected 2 columns, found {}", f.len())));
            }
            let v: i32 = f[1]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad integer `{}`", f[1])))?;
            if valence && !(1..=5).contains(&v.abs()) {
                return Err(err(format!("valence {v} outside [-5,-1] U [1,5]")));
            }
            Ok((f[0].trim().to_string(), v))
        })
        .collect()
}

/// Scores one sentence.
///
/// A booster directly before a hit moves its magnitude by the booster's delta
/// (kept within 1..=5); a negator up to two tokens before a hit flips its sign.
/// The positive strength is the maximum positive hit, the negative strength the
/// minimum negative hit, and the score is their sum.
pub fn score_sentiment(tokens: &[Token], lexicon: &ValenceLexicon) -> SentimentResult {
    let mut result = SentimentResult::NEUTRAL;
    for (i, token) in tokens.iter().enumerate() {
        let Some(&base) = lexicon.valence.get(&token.lower) else {
            continue;
        };
        let mut magnitude = base.abs();
        if let Some(delta) = i
            .checked_sub(1)
            .and_then(|j| lexicon.boosters.get(&tokens[j].lower))
        {
            magnitude = (magnitude + delta).clamp(1, 5);
        }
        let mut value = base.signum() * magnitude;
        let window = i.saturating_sub(NEGATION_WINDOW)..i;
        if tokens[window].iter().any(|t| lexicon.negators.contains(&t.lower)) {
            value = -value;
        }
        if value > 0 {
            result.pos_strength = result.pos_strength.max(value);
            result.pos_word_count += 1;
        } else {
            result.neg_strength = result.neg_strength.min(value);
            result.neg_word_count += 1;
        }
    }
    result.score = result.pos_strength + result.neg_strength;
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::tokenize;

    fn lex() -> ValenceLexicon {
        ValenceLexicon::parse(
            "great\t3\nterrible\t-4\ngood\t2\nbad\t-2\n",
            "not\nnever\n",
            "very\t1\nslightly\t-1\n",
        )
        .unwrap()
    }

    fn s(text: &str) -> SentimentResult {
        score_sentiment(&tokenize(text), &lex())
    }

    #[test]
    fn neutral_default() {
        assert_eq!(s("THE CAT SAT"), SentimentResult::NEUTRAL);
        assert_eq!(s(""), SentimentResult::NEUTRAL);
    }

    #[test]
    fn max_min_rule() {
        let r = s("a great and terrible day");
        assert_eq!((r.pos_strength, r.neg_strength, r.score), (3, -4, -1));
        assert_eq!((r.pos_word_count, r.neg_word_count), (1, 1));
    }

    #[test]
    fn negation_flips() {
        let r = s("not good");
        assert_eq!((r.pos_strength, r.neg_strength, r.score), (1, -2, -1));
        assert_eq!((r.pos_word_count, r.neg_word_count), (0, 1));
        // two tokens back still counts, three does not
        assert_eq!(s("never a bad").pos_strength, 2);
        assert_eq!(s("not a very bad").neg_strength, -3);
        assert_eq!(s("not x y bad").neg_strength, -2);
    }

    #[test]
    fn boosters_clamp() {
        assert_eq!(s("very great").pos_strength, 4);
        assert_eq!(s("very terrible").neg_strength, -5);
        let lex = ValenceLexicon::new(
            [("epic".to_string(), 5)],
            [],
            [("very".to_string(), 3), ("barely".to_string(), -9)],
        );
        assert_eq!(score_sentiment(&tokenize("very epic"), &lex).pos_strength, 5);
        assert_eq!(score_sentiment(&tokenize("barely epic"), &lex).pos_strength, 1);
        assert_eq!(s("slightly good").pos_strength, 1);
    }

    #[test]
    fn bad_valence_rejected() {
        assert!(ValenceLexicon::parse("meh\t0\n", "", "").is_err());
        assert!(ValenceLexicon::parse("meh\t6\n", "", "").is_err());
    }
}
