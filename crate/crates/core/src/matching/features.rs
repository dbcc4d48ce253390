use std::collections::BTreeMap;

use super::Story;
use crate::annotate::EntityMention;
use crate::ingest::{Millis, MS_PER_DAY};

pub const N_FEATURES: usize = 6;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "shared_entity_count",
    "jaccard",
    "max_shared_salience",
    "sentence_entity_coverage",
    "recency",
    "title_hit",
];

pub type Features = [f64; N_FEATURES];

/// Entity co-occurrence features for a (sentence, story) pair.
pub fn extract_features(mentions: &[EntityMention], sentence_ts: Millis, story: &Story) -> Features {
    let mut salience: BTreeMap<&str, f64> = BTreeMap::new();
    for m in mentions {
        let s = salience.entry(m.entity.as_str()).or_insert(0.0);
        *s = s.max(m.salience);
    }
    let shared: Vec<(&str, f64)> = salience
        .iter()
        .filter(|(e, _)| story.entities.contains_key(**e))
        .map(|(e, s)| (*e, *s))
        .collect();
    let n_shared = shared.len() as f64;
    let union = (salience.len() + story.entities.len()) as f64 - n_shared;
    let jaccard = if union > 0.0 { n_shared / union } else { 0.0 };
    let max_salience = shared.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    let coverage = if salience.is_empty() {
        0.0
    } else {
        n_shared / salience.len() as f64
    };
    let age = sentence_ts - story.published_ms;
    let recency = if age <= 0 {
        1.0
    } else {
        (-(age as f64) / MS_PER_DAY as f64).exp().clamp(0.0, 1.0)
    };
    let title_hit = shared.iter().any(|(e, _)| story.title_entities.contains(*e));
    [
        n_shared,
        jaccard,
        max_salience,
        coverage,
        recency,
        if title_hit { 1.0 } else { 0.0 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Genre;
    use std::collections::BTreeSet;

    fn mention(e: &str, salience: f64) -> EntityMention {
        EntityMention {
            entity: e.into(),
            span: (0, 1),
            salience,
        }
    }

    fn story(entities: &[&str], title: &[&str], published_ms: Millis) -> Story {
        Story {
            story_id: "s".into(),
            genre: Genre::General,
            published_ms,
            title: String::new(),
            entities: entities.iter().map(|e| (e.to_string(), 1)).collect(),
            title_entities: title.iter().map(|e| e.to_string()).collect::<BTreeSet<_>>(),
        }
    }

    #[test]
    fn disjoint() {
        let f = extract_features(&[mention("A", 1.0)], 10, &story(&["B"], &["B"], 10));
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[5], 0.0);
    }

    #[test]
    fn identical_singletons() {
        let f = extract_features(&[mention("A", 0.7)], 10, &story(&["A"], &[], 10));
        assert_eq!(f, [1.0, 1.0, 0.7, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn one_day_later() {
        let f = extract_features(
            &[mention("A", 0.5), mention("B", 0.9)],
            MS_PER_DAY + 5,
            &story(&["B", "C"], &["B"], 5),
        );
        assert_eq!(f[0], 1.0);
        assert!((f[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f[2], 0.9);
        assert_eq!(f[3], 0.5);
        assert!((f[4] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(f[5], 1.0);
    }

    #[test]
    fn sentence_before_publication() {
        let f = extract_features(&[mention("A", 0.5)], 0, &story(&["A"], &[], 100));
        assert_eq!(f[4], 1.0);
    }
}
