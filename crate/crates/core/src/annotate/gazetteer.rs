use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use super::{tokenize, AnnotateError, EntityMention, Token};
use crate::ingest::{read_to_string, tsv_rows};

/// Case-folded matching key of a token; a possessive `'s` is dropped.
pub fn key_form(surface: &str) -> String {
    let lower = surface.to_lowercase();
    for suffix in ["'s", "\u{2019}s"] {
        if let Some(stem) = lower.strip_suffix(suffix) {
            if !stem.is_empty() {
                return stem.to_string();
            }
        }
    }
    lower
}

fn alias_key(alias: &str) -> Vec<String> {
    tokenize(alias).iter().map(|t| key_form(&t.surface)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasEntry {
    pub alias: String,
    pub entity: String,
    pub preferred: bool,
}

/// Alias dictionary for deterministic entity resolution.
///
/// An alias listed for several entities resolves to the one flagged
/// preferred; if none is flagged the alias never matches.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    resolved: HashMap<Vec<String>, String>,
    ambiguous: BTreeSet<Vec<String>>,
    aliases: BTreeMap<String, Vec<String>>,
    max_len: usize,
}

impl Gazetteer {
    pub fn new(entries: impl IntoIterator<Item = AliasEntry>) -> Result<Self, AnnotateError> {
        let mut candidates: BTreeMap<Vec<String>, Vec<AliasEntry>> = BTreeMap::new();
        let mut aliases: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for e in entries {
            let key = alias_key(&e.alias);
            if key.is_empty() {
                continue;
            }
            let list = aliases.entry(e.entity.clone()).or_default();
            if !list.contains(&e.alias) {
                list.push(e.alias.clone());
            }
            let slot = candidates.entry(key).or_default();
            if !slot.iter().any(|c| c.entity == e.entity) {
                slot.push(e);
            } else if e.preferred {
                for c in slot.iter_mut().filter(|c| c.entity == e.entity) {
                    c.preferred = true;
                }
            }
        }

        let mut resolved = HashMap::new();
        let mut ambiguous = BTreeSet::new();
        let mut max_len = 0;
        for (key, entries) in candidates {
            max_len = max_len.max(key.len());
            if entries.len() == 1 {
                resolved.insert(key, entries[0].entity.clone());
                continue;
            }
            let preferred: Vec<_> = entries.iter().filter(|e| e.preferred).collect();
            match preferred.as_slice() {
                [] => {
                    ambiguous.insert(key);
                }
                [one] => {
                    resolved.insert(key, one.entity.clone());
                }
                [a, b, ..] => {
                    return Err(AnnotateError::DoublePreferred {
                        alias: a.alias.clone(),
                        first: a.entity.clone(),
                        second: b.entity.clone(),
                    })
                }
            }
        }
        Ok(Gazetteer {
            resolved,
            ambiguous,
            aliases,
            max_len,
        })
    }

    /// Parses `alias \t entity_id \t preferred(0|1)`; the third column is optional.
    pub fn parse(text: &str, file: &str) -> Result<Self, AnnotateError> {
        let mut entries = Vec::new();
        for (line, f) in tsv_rows(text) {
            let err = |reason: String| AnnotateError::Table {
                file: file.into(),
                line,
                reason,
            };
            if f.len() < 2 || f.len() > 3 {
                return Err(err(format!("expected 2 or 3 columns, found {}", f.len())));
            }
            let preferred = match f.get(2).map(|s| s.trim()) {
                None | Some("0") => false,
                Some("1") => true,
                Some(other) => return Err(err(format!("preferred must be 0 or 1, got `{other}`"))),
            };
            entries.push(AliasEntry {
                alias: f[0].trim().to_string(),
                entity: f[1].trim().to_string(),
                preferred,
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self, AnnotateError> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn lookup(&self, key: &[String]) -> Option<&str> {
        self.resolved.get(key).map(String::as_str)
    }

    pub fn is_ambiguous(&self, key: &[String]) -> bool {
        self.ambiguous.contains(key)
    }

    /// Surface aliases per entity.
    pub fn entities(&self) -> &BTreeMap<String, Vec<String>> {
        &self.aliases
    }

    pub fn max_alias_len(&self) -> usize {
        self.max_len
    }
}

/// Resolves entity mentions by longest-match over token n-grams.
///
/// Candidate matches are accepted longest first, then leftmost, skipping any
/// that overlap an accepted one. Salience combines position and repetition:
/// `0.5 * (1 - start / n) + 0.5 * min(1, occurrences / 2)`.
pub fn recognize_entities(tokens: &[Token], gazetteer: &Gazetteer) -> Vec<EntityMention> {
    let n = tokens.len();
    let keys: Vec<String> = tokens.iter().map(|t| key_form(&t.surface)).collect();
    let mut candidates: Vec<(usize, usize, &str)> = Vec::new();
    for start in 0..n {
        for len in 1..=gazetteer.max_alias_len().min(n - start) {
            if let Some(entity) = gazetteer.lookup(&keys[start..start + len]) {
                candidates.push((start, len, entity));
            }
        }
    }
    candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut taken = vec![false; n];
    let mut accepted: Vec<(usize, usize, &str)> = Vec::new();
    for (start, len, entity) in candidates {
        if taken[start..start + len].iter().any(|&t| t) {
            continue;
        }
        taken[start..start + len].iter_mut().for_each(|t| *t = true);
        accepted.push((start, len, entity));
    }
    accepted.sort_by_key(|a| a.0);

    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for (_, _, e) in &accepted {
        *occurrences.entry(e).or_default() += 1;
    }
    accepted
        .into_iter()
        .map(|(start, len, entity)| {
            let position = 1.0 - start as f64 / n as f64;
            let repetition = (occurrences[entity] as f64 / 2.0).min(1.0);
            EntityMention {
                entity: entity.to_string(),
                span: (start, start + len),
                salience: 0.5 * position + 0.5 * repetition,
            }
        })
        .collect()
}
