use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SentenceMatch;
use crate::ingest::{Millis, Provider};

/// Evidence that a provider covered a story during `[first_ts, last_ts]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QualifiedMatching {
    pub provider: Provider,
    pub story_id: String,
    pub first_ts: Millis,
    pub last_ts: Millis,
    pub evidence_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualifyConfig {
    pub window_ms: Millis,
    pub min_evidence: usize,
}

impl Default for QualifyConfig {
    fn default() -> Self {
        QualifyConfig {
            window_ms: 600_000,
            min_evidence: 2,
        }
    }
}

/// Groups sentence-level matches per (provider, story).
///
/// Matches are sorted by time; a group collects matches while each stays
/// within `window_ms` of the group's first match. Each sentence counts once
/// per story. Groups with at least `min_evidence` matches are emitted.
pub fn qualify(matches: &[SentenceMatch], config: &QualifyConfig) -> Vec<QualifiedMatching> {
    let mut keyed: BTreeMap<(&Provider, &str), BTreeSet<(Millis, &str)>> = BTreeMap::new();
    for m in matches {
        keyed
            .entry((&m.provider, m.story_id.as_str()))
            .or_default()
            .insert((m.ts, m.sentence.as_str()));
    }

    let mut out = Vec::new();
    for ((provider, story_id), hits) in keyed {
        // a sentence repeated at different timestamps keeps its earliest
        let mut seen = BTreeSet::new();
        let times: Vec<Millis> = hits
            .into_iter()
            .filter(|(_, s)| seen.insert(*s))
            .map(|(t, _)| t)
            .collect();
        let mut i = 0;
        while i < times.len() {
            let first = times[i];
            let mut j = i;
            while j + 1 < times.len() && times[j + 1] - first <= config.window_ms {
                j += 1;
            }
            let count = j - i + 1;
            if count >= config.min_evidence {
                out.push(QualifiedMatching {
                    provider: provider.clone(),
                    story_id: story_id.to_string(),
                    first_ts: first,
                    last_ts: times[j],
                    evidence_count: count,
                });
            }
            i = j + 1;
        }
    }
    out.sort();
    out
}
