//! Token-level annotation: tokenization, part-of-speech tags, dependency
//! labels from external parses, and gazetteer-based entity mentions.

mod external;
mod gazetteer;
mod tagger;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::Sentence;

pub use external::{align_external_annotations, ingest_external_annotations, parse_external_annotations};
pub use gazetteer::{key_form, recognize_entities, AliasEntry, Gazetteer};
pub use tagger::{is_numeric, punctuation_tag, LexiconTagger, PosTagger};
pub use tokenize::{is_punctuation, tokenize};

/// Unresolved dependency label, kept as a category of its own.
pub const UNRESOLVED_DEP: &str = "dep";

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error(transparent)]
    Io(#[from] crate::ingest::IngestError),
    #[error("{file}:{line}: {reason}")]
    Table {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("sentence {index}: annotation has {found} tokens, sentence has {expected}")]
    Alignment {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("annotation file has {found} sentences, corpus has {expected}")]
    SentenceCount { expected: usize, found: usize },
    #[error("alias `{alias}` is marked preferred for both `{first}` and `{second}`")]
    DoublePreferred {
        alias: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TokenRecord", into = "TokenRecord")]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub pos: String,
    pub dep: Option<String>,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        Token {
            lower: surface.to_lowercase(),
            surface,
            pos: String::new(),
            dep: None,
        }
    }

    pub fn with_pos(mut self, pos: impl Into<String>) -> Self {
        self.pos = pos.into();
        self
    }

    pub fn is_punctuation(&self) -> bool {
        is_punctuation(&self.surface)
    }

    /// The linguistic category used by style vectors: `POS` or `POS/dep`.
    pub fn category(&self) -> String {
        match &self.dep {
            Some(dep) => format!("{}/{}", self.pos, dep),
            None => self.pos.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TokenRecord {
    surface: String,
    pos: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dep: Option<String>,
}

impl From<TokenRecord> for Token {
    fn from(r: TokenRecord) -> Self {
        Token {
            lower: r.surface.to_lowercase(),
            surface: r.surface,
            pos: r.pos,
            dep: r.dep,
        }
    }
}

impl From<Token> for TokenRecord {
    fn from(t: Token) -> Self {
        TokenRecord {
            surface: t.surface,
            pos: t.pos,
            dep: t.dep,
        }
    }
}

/// A resolved entity occurrence within a sentence's tokens, spanning
/// `span.0..span.1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub entity: String,
    pub span: (usize, usize),
    pub salience: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    #[serde(flatten)]
    pub sentence: Sentence,
    pub tokens: Vec<Token>,
    pub mentions: Vec<EntityMention>,
}

impl AnnotatedSentence {
    /// Words (non-punctuation tokens).
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| !t.is_punctuation())
    }
}

/// Tokenizes, tags and resolves entities for one sentence.
pub fn annotate(
    sentence: Sentence,
    tagger: &dyn PosTagger,
    gazetteer: &Gazetteer,
    min_salience: f64,
) -> AnnotatedSentence {
    let mut tokens = tokenize(&sentence.text);
    tagger.tag(&mut tokens);
    let mentions = recognize_entities(&tokens, gazetteer)
        .into_iter()
        .filter(|m| m.salience >= min_salience)
        .collect();
    AnnotatedSentence {
        sentence,
        tokens,
        mentions,
    }
}
