use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MatchError;
use crate::annotate::{recognize_entities, tokenize, Gazetteer};
use crate::ingest::{tsv_rows, Genre, Millis};

/// A story as stored in `stories.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryRecord {
    pub story_id: String,
    pub genre: Genre,
    pub published_ms: Millis,
    pub title: String,
    pub body: String,
}

/// An online news story with its resolved entities.
#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub story_id: String,
    pub genre: Genre,
    pub published_ms: Millis,
    pub title: String,
    /// Entity counts over title and body.
    pub entities: BTreeMap<String, usize>,
    pub title_entities: BTreeSet<String>,
}

impl Story {
    pub fn from_record(record: &StoryRecord, gazetteer: &Gazetteer) -> Result<Self, MatchError> {
        if record.published_ms <= 0 {
            return Err(MatchError::BadStory(record.story_id.clone()));
        }
        let title_entities: BTreeSet<String> =
            recognize_entities(&tokenize(&record.title), gazetteer)
                .into_iter()
                .map(|m| m.entity)
                .collect();
        let mut entities = BTreeMap::new();
        for text in [&record.title, &record.body] {
            for m in recognize_entities(&tokenize(text), gazetteer) {
                *entities.entry(m.entity).or_insert(0) += 1;
            }
        }
        Ok(Story {
            story_id: record.story_id.clone(),
            genre: record.genre,
            published_ms: record.published_ms,
            title: record.title.clone(),
            entities,
            title_entities,
        })
    }
}

/// Candidate stories indexed by genre, sorted by publication time then id.
#[derive(Debug, Clone, Default)]
pub struct StoryPool {
    by_genre: BTreeMap<Genre, Vec<Story>>,
}

impl StoryPool {
    pub fn new(stories: impl IntoIterator<Item = Story>) -> Self {
        let mut by_genre: BTreeMap<Genre, Vec<Story>> = BTreeMap::new();
        for s in stories {
            by_genre.entry(s.genre).or_default().push(s);
        }
        for list in by_genre.values_mut() {
            list.sort_by(|a, b| {
                a.published_ms
                    .cmp(&b.published_ms)
                    .then_with(|| a.story_id.cmp(&b.story_id))
            });
        }
        StoryPool { by_genre }
    }

    pub fn genre(&self, genre: Genre) -> &[Story] {
        self.by_genre.get(&genre).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Stories of `genre` published at or after `since`.
    pub fn published_since(&self, genre: Genre, since: Millis) -> &[Story] {
        let list = self.genre(genre);
        let idx = list.partition_point(|s| s.published_ms < since);
        &list[idx..]
    }

    pub fn get(&self, story_id: &str) -> Option<&Story> {
        self.by_genre
            .values()
            .flatten()
            .find(|s| s.story_id == story_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Story> {
        self.by_genre.values().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Same,
    Different,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub sentence_ref: String,
    pub story_id: String,
    pub label: Label,
}

/// Parses `sentence_ref \t story_id \t label` with labels `same`/`different` (or 1/0).
pub fn parse_labels(text: &str, file: &str) -> Result<Vec<LabelRow>, MatchError> {
    tsv_rows(text)
        .map(|(line, f)| {
            let err = |reason: String| MatchError::Table {
                file: file.into(),
                line,
                reason,
            };
            if f.len() != 3 {
                return Err(err(format!("expected 3 columns, found {}", f.len())));
            }
            let label = match f[2].trim().to_ascii_lowercase().as_str() {
                "same" | "1" => Label::Same,
                "different" | "0" => Label::Different,
                other => return Err(err(format!("unknown label `{other}`"))),
            };
            Ok(LabelRow {
                sentence_ref: f[0].trim().to_string(),
                story_id: f[1].trim().to_string(),
                label,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::AliasEntry;

    #[test]
    fn story_entities_from_title_and_body() {
        let g = Gazetteer::new([
            AliasEntry { alias: "obama".into(), entity: "Obama".into(), preferred: false },
            AliasEntry { alias: "romney".into(), entity: "Romney".into(), preferred: false },
        ])
        .unwrap();
        let s = Story::from_record(
            &StoryRecord {
                story_id: "s1".into(),
                genre: Genre::General,
                published_ms: 10,
                title: "Obama speaks".into(),
                body: "Obama and Romney debate.".into(),
            },
            &g,
        )
        .unwrap();
        assert_eq!(s.entities.get("Obama"), Some(&2));
        assert_eq!(s.entities.get("Romney"), Some(&1));
        assert!(s.title_entities.contains("Obama"));
        assert!(!s.title_entities.contains("Romney"));
    }

    #[test]
    fn labels() {
        let rows = parse_labels("a\ts1\tsame\nb\ts2\t0\n", "l").unwrap();
        assert_eq!(rows[1].label, Label::Different);
        assert!(parse_labels("a\ts1\tmaybe\n", "l").is_err());
    }

    #[test]
    fn pool_window() {
        let mk = |id: &str, t| Story {
            story_id: id.into(),
            genre: Genre::Sports,
            published_ms: t,
            title: String::new(),
            entities: BTreeMap::new(),
            title_entities: BTreeSet::new(),
        };
        let pool = StoryPool::new([mk("b", 30), mk("a", 10), mk("c", 20)]);
        let ids: Vec<_> = pool.published_since(Genre::Sports, 20).iter().map(|s| &s.story_id).collect();
        assert_eq!(ids, ["c", "b"]);
        assert!(pool.genre(Genre::General).is_empty());
    }
}
