use std::path::Path;

use super::{recognize_entities, tokenize, AnnotateError, AnnotatedSentence, Gazetteer, Token};
use crate::ingest::read_to_string;
use crate::segment::Sentence;

/// Parses a token-per-line annotation file (`surface \t pos \t dep`), with
/// blank lines separating sentences. A missing or `_` dep column means no
/// dependency label.
pub fn parse_external_annotations(text: &str, file: &str) -> Result<Vec<Vec<Token>>, AnnotateError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 2 || f.len() > 3 || f[0].is_empty() {
            return Err(AnnotateError::Table {
                file: file.into(),
                line: i + 1,
                reason: format!("expected `surface\\tpos[\\tdep]`, got `{line}`"),
            });
        }
        let mut token = Token::new(f[0]).with_pos(f[1].trim());
        token.dep = f
            .get(2)
            .map(|d| d.trim())
            .filter(|d| !d.is_empty() && *d != "_")
            .map(str::to_string);
        current.push(token);
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// Attaches externally produced tokens to sentences in corpus order.
pub fn align_external_annotations(
    sentences: Vec<Sentence>,
    annotations: Vec<Vec<Token>>,
    gazetteer: &Gazetteer,
) -> Result<Vec<AnnotatedSentence>, AnnotateError> {
    for (index, (sentence, tokens)) in sentences.iter().zip(&annotations).enumerate() {
        let expected = tokenize(&sentence.text).len();
        if tokens.len() != expected {
            return Err(AnnotateError::Alignment {
                index,
                expected,
                found: tokens.len(),
            });
        }
    }
    if sentences.len() != annotations.len() {
        return Err(AnnotateError::SentenceCount {
            expected: sentences.len(),
            found: annotations.len(),
        });
    }
    Ok(sentences
        .into_iter()
        .zip(annotations)
        .map(|(sentence, tokens)| {
            let mentions = recognize_entities(&tokens, gazetteer);
            AnnotatedSentence {
                sentence,
                tokens,
                mentions,
            }
        })
        .collect())
}

pub fn ingest_external_annotations(
    path: &Path,
    sentences: Vec<Sentence>,
    gazetteer: &Gazetteer,
) -> Result<Vec<AnnotatedSentence>, AnnotateError> {
    let text = read_to_string(path)?;
    let parsed = parse_external_annotations(&text, &path.display().to_string())?;
    align_external_annotations(sentences, parsed, gazetteer)
}
