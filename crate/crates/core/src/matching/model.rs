use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{extract_features, Features, MatchError, StoryPool, N_FEATURES, STORY_LIFETIME_MS};
use crate::annotate::AnnotatedSentence;
use crate::ingest::{Genre, Millis};

/// Threshold used when no held-out threshold reaches the precision target.
pub const FALLBACK_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchModel {
    pub genre: Genre,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
}

impl MatchModel {
    pub fn score(&self, features: &Features) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        logistic(z)
    }
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub precision_target: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            precision_target: 0.9,
            learning_rate: 0.5,
            max_epochs: 2000,
            holdout_fraction: 0.2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: MatchModel,
    /// Precision on the held-out split at the chosen threshold.
    pub holdout_precision: Option<f64>,
    pub epochs: usize,
    pub warning: Option<String>,
}

/// Precision of `score >= threshold` over labeled scores; `None` if nothing
/// is predicted positive.
pub fn precision_at(scored: &[(f64, bool)], threshold: f64) -> Option<f64> {
    let (mut tp, mut fp) = (0usize, 0usize);
    for &(s, label) in scored {
        if s >= threshold {
            if label {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64)
}

/// Smallest observed score whose precision reaches `target`.
///
/// A saturated score of exactly 1.0 is replaced by the largest double below
/// it, which selects the same examples while staying inside (0, 1).
pub fn select_threshold(scored: &[(f64, bool)], target: f64) -> Option<f64> {
    let below_one = 1.0 - f64::EPSILON / 2.0;
    let mut candidates: Vec<f64> = scored
        .iter()
        .map(|(s, _)| s.min(below_one))
        .filter(|t| *t > 0.0)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    candidates
        .into_iter()
        .find(|&t| precision_at(scored, t).is_some_and(|p| p >= target))
}

/// Fits a logistic same-story model by batch gradient descent and picks the
/// decision threshold on a stratified held-out split.
///
/// Features are standardized on the training split internally; the returned
/// weights apply to raw features.
pub fn train_matcher(
    examples: &[(Features, bool)],
    genre: Genre,
    config: &TrainConfig,
) -> Result<TrainReport, MatchError> {
    if let Some(i) = examples.iter().position(|(f, _)| f.iter().any(|x| !x.is_finite())) {
        return Err(MatchError::NonFinite(i));
    }
    let same = examples.iter().filter(|e| e.1).count();
    let different = examples.len() - same;
    if same == 0 || different == 0 {
        return Err(MatchError::SingleClass { genre });
    }
    if same < 2 || different < 2 {
        return Err(MatchError::TooFewExamples {
            genre,
            same,
            different,
        });
    }

    // one shuffle of all indices, then a per-class cut: the split does not
    // depend on which class is called positive
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let (mut train, mut holdout) = (Vec::new(), Vec::new());
    for (label, size) in [(true, same), (false, different)] {
        let k = ((size as f64 * config.holdout_fraction).ceil() as usize).clamp(1, size - 1);
        let class = order.iter().copied().filter(|&i| examples[i].1 == label);
        for (rank, i) in class.enumerate() {
            if rank < k {
                holdout.push(i);
            } else {
                train.push(i);
            }
        }
    }
    train.sort_unstable();
    holdout.sort_unstable();

    // standardization from the training split
    let mut mean = [0.0; N_FEATURES];
    let mut std = [0.0; N_FEATURES];
    for &i in &train {
        for (m, x) in mean.iter_mut().zip(&examples[i].0) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= train.len() as f64);
    for &i in &train {
        for j in 0..N_FEATURES {
            std[j] += (examples[i].0[j] - mean[j]).powi(2);
        }
    }
    for s in std.iter_mut() {
        *s = (*s / train.len() as f64).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    let standardized: Vec<(Features, f64)> = train
        .iter()
        .map(|&i| {
            let mut z = [0.0; N_FEATURES];
            for j in 0..N_FEATURES {
                z[j] = (examples[i].0[j] - mean[j]) / std[j];
            }
            (z, if examples[i].1 { 1.0 } else { 0.0 })
        })
        .collect();

    let mut w = [0.0; N_FEATURES];
    let mut b = 0.0;
    let n = standardized.len() as f64;
    let mut epochs = 0;
    while epochs < config.max_epochs {
        let mut gw = [0.0; N_FEATURES];
        let mut gb = 0.0;
        for (x, y) in &standardized {
            let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b;
            let err = logistic(z) - y;
            for j in 0..N_FEATURES {
                gw[j] += err * x[j] / n;
            }
            gb += err / n;
        }
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm < 1e-6 {
            break;
        }
        for j in 0..N_FEATURES {
            w[j] -= config.learning_rate * gw[j];
        }
        b -= config.learning_rate * gb;
        epochs += 1;
    }

    let weights: Vec<f64> = (0..N_FEATURES).map(|j| w[j] / std[j]).collect();
    let bias = b - (0..N_FEATURES).map(|j| w[j] * mean[j] / std[j]).sum::<f64>();
    let mut model = MatchModel {
        genre,
        weights,
        bias,
        threshold: FALLBACK_THRESHOLD,
    };

    let scored: Vec<(f64, bool)> = holdout
        .iter()
        .map(|&i| (model.score(&examples[i].0), examples[i].1))
        .collect();
    let warning = match select_threshold(&scored, config.precision_target) {
        Some(t) => {
            model.threshold = t;
            None
        }
        None => {
            let msg = format!(
                "{genre}: held-out precision target {} unattainable; using threshold {FALLBACK_THRESHOLD}",
                config.precision_target
            );
            tracing::warn!("{msg}");
            Some(msg)
        }
    };
    let holdout_precision = precision_at(&scored, model.threshold);
    Ok(TrainReport {
        model,
        holdout_precision,
        epochs,
        warning,
    })
}

/// Scores a sentence against same-genre stories no older than three days at
/// `now_ts`; returns `(story_id, score)` above the model threshold, best first.
pub fn classify(
    sentence: &AnnotatedSentence,
    pool: &StoryPool,
    model: &MatchModel,
    now_ts: Millis,
) -> Vec<(String, f64)> {
    let genre = sentence.sentence.provider.genre;
    if genre != model.genre {
        return Vec::new();
    }
    let mut out: Vec<(String, f64)> = pool
        .published_since(genre, now_ts - STORY_LIFETIME_MS)
        .iter()
        .filter_map(|story| {
            let f = extract_features(&sentence.mentions, sentence.sentence.start_ms, story);
            let s = model.score(&f);
            (s >= model.threshold).then(|| (story.story_id.clone(), s))
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(n: usize) -> Vec<(Features, bool)> {
        (0..n)
            .map(|i| {
                let same = i % 2 == 0;
                let k = (i % 7) as f64 / 10.0;
                let f = if same {
                    [2.0 + k, 0.6 + k / 3.0, 0.8, 1.0, 0.9, 1.0]
                } else {
                    [0.0, 0.0, 0.0, k / 2.0, 0.5 + k / 2.0, 0.0]
                };
                (f, same)
            })
            .collect()
    }

    #[test]
    fn separable_reaches_full_precision() {
        let data = separable(100);
        let r = train_matcher(&data, Genre::Sports, &TrainConfig::default()).unwrap();
        assert!(r.warning.is_none());
        assert_eq!(r.holdout_precision, Some(1.0));
        // any threshold just above the best-scoring negative is perfectly precise
        let scored: Vec<_> = data.iter().map(|(f, y)| (r.model.score(f), *y)).collect();
        let top_negative = scored.iter().filter(|s| !s.1).map(|s| s.0).fold(0.0, f64::max);
        let t = top_negative + 1e-9;
        assert!(t < FALLBACK_THRESHOLD);
        assert_eq!(precision_at(&scored, t), Some(1.0));
    }

    #[test]
    fn flipped_labels_negate_the_decision() {
        let data = separable(60);
        let flipped: Vec<_> = data.iter().map(|(f, y)| (*f, !y)).collect();
        let a = train_matcher(&data, Genre::Sports, &TrainConfig::default()).unwrap().model;
        let b = train_matcher(&flipped, Genre::Sports, &TrainConfig::default()).unwrap().model;
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x + y).abs() < 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }
        for (f, _) in &data {
            let (sa, sb) = (a.score(f), b.score(f));
            assert!((sa + sb - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_class_is_an_error() {
        let data: Vec<_> = separable(20).into_iter().map(|(f, _)| (f, true)).collect();
        assert!(matches!(
            train_matcher(&data, Genre::General, &TrainConfig::default()),
            Err(MatchError::SingleClass { .. })
        ));
    }

    #[test]
    fn threshold_tie_takes_smallest() {
        let scored = [(0.3, false), (0.6, true), (0.8, true)];
        // both 0.6 and 0.8 reach precision 1.0
        assert_eq!(select_threshold(&scored, 0.9), Some(0.6));
        assert_eq!(select_threshold(&[(0.5, false)], 0.9), None);
    }

    #[test]
    fn unattainable_target_falls_back() {
        // identical features with mixed labels cannot be separated
        let data: Vec<_> = (0..20).map(|i| ([1.0; N_FEATURES], i % 2 == 0)).collect();
        let r = train_matcher(&data, Genre::General, &TrainConfig::default()).unwrap();
        assert_eq!(r.model.threshold, FALLBACK_THRESHOLD);
        assert!(r.warning.is_some());
    }

    #[test]
    fn deterministic() {
        let data = separable(80);
        let a = train_matcher(&data, Genre::Sports, &TrainConfig::default()).unwrap();
        let b = train_matcher(&data, Genre::Sports, &TrainConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
