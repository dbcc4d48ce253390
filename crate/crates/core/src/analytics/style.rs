use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::annotate::Token;

/// Distribution over linguistic categories (`POS` or `POS/dep`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleVector {
    pub owner: String,
    pub category_freqs: BTreeMap<String, f64>,
}

pub fn style_vector<'a>(
    owner: &str,
    tokens: impl IntoIterator<Item = &'a Token>,
) -> Result<StyleVector, AnalyticsError> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.category()).or_insert(0) += 1;
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(AnalyticsError::EmptyOwner(owner.to_string()));
    }
    Ok(StyleVector {
        owner: owner.to_string(),
        category_freqs: counts
            .into_iter()
            .map(|(c, n)| (c, n as f64 / total as f64))
            .collect(),
    })
}
