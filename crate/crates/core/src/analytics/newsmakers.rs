use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MentionRecord;
use crate::ingest::Provider;

/// Bucket for entities missing from the professions map.
pub const OTHER_PROFESSION: &str = "Other/Other";

/// Mean sentence score over the entity's mentions on the provider, or `None`
/// with fewer than `min_support` mentions.
pub fn person_provider_sentiment(
    entity: &str,
    provider: &Provider,
    mentions: &[MentionRecord],
    min_support: usize,
) -> Option<f64> {
    let scores: Vec<i32> = mentions
        .iter()
        .filter(|m| m.entity == entity && &m.provider == provider)
        .map(|m| m.score)
        .collect();
    if scores.is_empty() || scores.len() < min_support {
        return None;
    }
    Some(scores.iter().map(|&s| s as f64).sum::<f64>() / scores.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfessionSummary {
    pub profession: String,
    pub mentions: usize,
    /// Up to three most mentioned entities with their share of the
    /// profession's mentions.
    pub top: Vec<(String, f64)>,
    pub mean_sentiment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfessionRollup {
    /// Sorted by mentions, descending, then name.
    pub professions: Vec<ProfessionSummary>,
    /// Fraction of mentions whose entity has a mapped profession.
    pub mapped_fraction: f64,
}

pub fn profession_rollup(
    mentions: &[MentionRecord],
    professions: &BTreeMap<String, String>,
) -> ProfessionRollup {
    let mut per: BTreeMap<&str, (BTreeMap<&str, usize>, i64)> = BTreeMap::new();
    let mut mapped = 0usize;
    for m in mentions {
        let profession = match professions.get(&m.entity) {
            Some(p) => {
                mapped += 1;
                p.as_str()
            }
            None => OTHER_PROFESSION,
        };
        let e = per.entry(profession).or_default();
        *e.0.entry(m.entity.as_str()).or_insert(0) += 1;
        e.1 += m.score as i64;
    }
    let mut out: Vec<ProfessionSummary> = per
        .into_iter()
        .map(|(profession, (counts, score_sum))| {
            let total: usize = counts.values().sum();
            let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            ProfessionSummary {
                profession: profession.to_string(),
                mentions: total,
                top: ranked
                    .into_iter()
                    .take(3)
                    .map(|(e, n)| (e.to_string(), n as f64 / total as f64))
                    .collect(),
                mean_sentiment: score_sum as f64 / total as f64,
            }
        })
        .collect();
    out.sort_by(|a, b| b.mentions.cmp(&a.mentions).then_with(|| a.profession.cmp(&b.profession)));
    ProfessionRollup {
        professions: out,
        mapped_fraction: if mentions.is_empty() {
            0.0
        } else {
            mapped as f64 / mentions.len() as f64
        },
    }
}
