use std::collections::HashMap;
use std::path::Path;

use super::{AnnotateError, Token};
use crate::ingest::{read_to_string, tsv_rows};

/// A part-of-speech tagging strategy. Implementations must give every token a
/// non-empty tag.
pub trait PosTagger: Send + Sync {
    fn name(&self) -> &'static str;
    fn tag(&self, tokens: &mut [Token]);
}

/// Penn-style tag for a punctuation-only token.
pub fn punctuation_tag(s: &str) -> &'static str {
    match s.chars().next() {
        Some('.' | '?' | '!') => ".",
        Some(',') => ",",
        Some(';' | ':') => ":",
        _ => "SYM",
    }
}

/// Digits with optional sign, thousands separators and decimal point.
pub fn is_numeric(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    body.chars().any(|c| c.is_ascii_digit())
        && body.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
        && body.starts_with(|c: char| c.is_ascii_digit())
}

/// Most-frequent-tag lookup with suffix fallback and a capitalization rule.
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    lexicon: HashMap<String, String>,
    // longest suffix first
    suffixes: Vec<(String, String)>,
}

impl LexiconTagger {
    pub fn new(
        lexicon: impl IntoIterator<Item = (String, String)>,
        suffixes: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        let lexicon = lexicon
            .into_iter()
            .map(|(w, t)| (w.to_lowercase(), t))
            .collect();
        let mut suffixes: Vec<(String, String)> = suffixes
            .into_iter()
            .map(|(s, t)| (s.trim_start_matches('-').to_lowercase(), t))
            .filter(|(s, _)| !s.is_empty())
            .collect();
        suffixes.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        LexiconTagger { lexicon, suffixes }
    }

    pub fn parse(lexicon_tsv: &str, suffix_tsv: &str) -> Result<Self, AnnotateError> {
        Ok(Self::new(
            two_columns(lexicon_tsv, "tag_lexicon")?,
            two_columns(suffix_tsv, "suffix_rules")?,
        ))
    }

    /// Loads `tag_lexicon.tsv` and `suffix_rules.tsv`; a missing file is an error.
    pub fn load(lexicon: &Path, suffixes: &Path) -> Result<Self, AnnotateError> {
        let lex = read_to_string(lexicon)?;
        let suf = read_to_string(suffixes)?;
        Self::parse(&lex, &suf)
    }

    fn tag_word(&self, token: &Token, mixed_case: bool) -> String {
        if token.is_punctuation() {
            return punctuation_tag(&token.surface).to_string();
        }
        if is_numeric(&token.surface) {
            return "CD".to_string();
        }
        if let Some(tag) = self.lexicon.get(&token.lower) {
            return tag.clone();
        }
        if let Some((_, tag)) = self
            .suffixes
            .iter()
            .find(|(suf, _)| token.lower.len() > suf.len() && token.lower.ends_with(suf.as_str()))
        {
            return tag.clone();
        }
        match token.surface.chars().next() {
            Some(c) if mixed_case && c.is_lowercase() => "NN".into(),
            Some(c) if mixed_case && c.is_uppercase() => "NNP".into(),
            _ => "UNK".into(),
        }
    }
}

impl PosTagger for LexiconTagger {
    fn name(&self) -> &'static str {
        "lexicon"
    }

    fn tag(&self, tokens: &mut [Token]) {
        let mixed_case = tokens
            .iter()
            .any(|t| t.surface.chars().any(char::is_lowercase));
        for t in tokens.iter_mut() {
            t.pos = self.tag_word(t, mixed_case);
        }
    }
}

pub(crate) fn two_columns(text: &str, file: &str) -> Result<Vec<(String, String)>, AnnotateError> {
    tsv_rows(text)
        .map(|(line, f)| {
            if f.len() < 2 {
                Err(AnnotateError::Table {
                    file: file.into(),
                    line,
                    reason: format!("expected 2 columns, found {}", f.len()),
                })
            } else {
                Ok((f[0].trim().to_string(), f[1].trim().to_string()))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::tokenize;

    fn tagger() -> LexiconTagger {
        LexiconTagger::parse("basketball\tNN\nis\tVBZ\nwhat\tWP\n", "ing\tVBG\n-ed\tVBD\n").unwrap()
    }

    fn tags(text: &str) -> Vec<String> {
        let mut toks = tokenize(text);
        tagger().tag(&mut toks);
        toks.into_iter().map(|t| t.pos).collect()
    }

    #[test]
    fn lexicon_hit() {
        assert_eq!(tags("basketball"), ["NN"]);
        assert_eq!(tags("BASKETBALL"), ["NN"]);
    }

    #[test]
    fn numeric_and_punctuation() {
        assert_eq!(tags("1339"), ["CD"]);
        assert_eq!(tags("1,000 3.5 -2"), ["CD", "CD", "CD"]);
        assert_eq!(tags("IS IT?"), ["VBZ", "UNK", "."]);
    }

    #[test]
    fn suffix_fallback() {
        assert_eq!(tags("blorping"), ["VBG"]);
        assert_eq!(tags("zapped"), ["VBD"]);
        // the suffix alone is not a match
        assert_eq!(tags("ING"), ["UNK"]);
    }

    #[test]
    fn capitalization_rule_in_mixed_case() {
        assert_eq!(tags("Zorblax met the frobnitz"), ["NNP", "NN", "NN", "NN"]);
        assert_eq!(tags("ZORBLAX MET"), ["UNK", "UNK"]);
    }

    #[test]
    fn every_token_tagged() {
        let mut toks = tokenize("A b, C! ??? 12 ~");
        tagger().tag(&mut toks);
        assert!(toks.iter().all(|t| !t.pos.is_empty()));
    }

    #[test]
    fn missing_lexicon_is_a_load_error() {
        let dir = std::path::Path::new("/nonexistent/newsminer");
        assert!(LexiconTagger::load(&dir.join("a.tsv"), &dir.join("b.tsv")).is_err());
    }
}
