//! Pipeline configuration from a TOML file of dotted keys.
//!
//! ```toml
//! seed = 42
//! paths.captions = "captions"
//! match.window_ms = 600000
//!
//! [analytics]
//! min_support = 5
//! ```
//!
//! Relative paths resolve against the configuration file's directory. All
//! problems in a file are reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::analytics::AnalyticsParams;
use crate::factor::linkage_names;
use crate::matching::{QualifyConfig, TrainConfig};
use crate::segment::SegmentationRules;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Paths {
    /// Directory of caption files, one per channel (`<channel_id>.txt`).
    pub captions: Option<PathBuf>,
    pub guide: Option<PathBuf>,
    pub channels: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub tag_lexicon: Option<PathBuf>,
    pub suffix_rules: Option<PathBuf>,
    /// External token/POS/dependency annotations replacing the built-in tagger.
    pub annotations: Option<PathBuf>,
    /// Directory with `valence.tsv`, `negators.txt`, `boosters.tsv`.
    pub lexicon: Option<PathBuf>,
    pub stories: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub professions: Option<PathBuf>,
    /// One stopword per line; replaces the bundled list.
    pub stopwords: Option<PathBuf>,
    /// Artifact directory.
    pub work: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorParams {
    pub linkage: String,
    pub bicluster_k: usize,
    pub sparsity: f64,
    pub max_words: usize,
    pub ranks: [usize; 3],
    pub top_newsmakers: usize,
    /// Apply `ln(1 + x)` to tensor counts.
    pub log_counts: bool,
}

impl Default for FactorParams {
    fn default() -> Self {
        FactorParams {
            linkage: "average".into(),
            bicluster_k: 5,
            sparsity: 0.01,
            max_words: 500,
            ranks: [3, 2, 3],
            top_newsmakers: 30,
            log_counts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    pub segmentation: SegmentationRules,
    pub min_salience: f64,
    pub train: TrainConfig,
    pub qualify: QualifyConfig,
    pub analytics: AnalyticsParams,
    pub factor: FactorParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            paths: Paths {
                work: PathBuf::from("newsminer-out"),
                ..Default::default()
            },
            segmentation: SegmentationRules::default(),
            min_salience: 0.0,
            train: TrainConfig::default(),
            qualify: QualifyConfig::default(),
            analytics: AnalyticsParams::default(),
            factor: FactorParams::default(),
        }
    }
}

/// Every problem found in a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

struct Reader {
    values: BTreeMap<String, toml::Value>,
    errors: Vec<String>,
    base: PathBuf,
}

impl Reader {
    fn int(&mut self, key: &str, min: i64, max: i64, target: &mut i64) {
        if let Some(v) = self.values.remove(key) {
            match v.as_integer() {
                Some(x) if (min..=max).contains(&x) => *target = x,
                Some(x) if x < min => self.errors.push(format!("{key} = {x}: must be >= {min}")),
                Some(x) => self.errors.push(format!("{key} = {x}: must be <= {max}")),
                None => self.errors.push(format!("{key}: expected an integer, found {v}")),
            }
        }
    }

    fn count(&mut self, key: &str, min: usize, target: &mut usize) {
        let mut x = *target as i64;
        self.int(key, min as i64, i64::MAX, &mut x);
        *target = x as usize;
    }

    fn positive_ms(&mut self, key: &str, target: &mut i64) {
        if let Some(v) = self.values.get(key) {
            if let Some(x) = v.as_integer() {
                if x <= 0 {
                    self.errors.push(format!("{key} = {x}: must be > 0"));
                    self.values.remove(key);
                    return;
                }
            }
        }
        self.int(key, 1, i64::MAX, target);
    }

    /// `lo < x` (or `lo <= x` when `lo_inclusive`) and `x <= hi`.
    fn real(&mut self, key: &str, lo: f64, lo_inclusive: bool, hi: f64, target: &mut f64) {
        if let Some(v) = self.values.remove(key) {
            let x = match v {
                toml::Value::Float(f) => f,
                toml::Value::Integer(i) => i as f64,
                other => {
                    self.errors.push(format!("{key}: expected a number, found {other}"));
                    return;
                }
            };
            let above = if lo_inclusive { x >= lo } else { x > lo };
            if !x.is_finite() || !above || x > hi {
                let open = if lo_inclusive { "[" } else { "(" };
                self.errors.push(format!("{key} = {x}: must be in {open}{lo}, {hi}]"));
            } else {
                *target = x;
            }
        }
    }

    fn string(&mut self, key: &str, target: &mut String) {
        if let Some(v) = self.values.remove(key) {
            match v {
                toml::Value::String(s) => *target = s,
                other => self.errors.push(format!("{key}: expected a string, found {other}")),
            }
        }
    }

    fn boolean(&mut self, key: &str, target: &mut bool) {
        if let Some(v) = self.values.remove(key) {
            match v.as_bool() {
                Some(b) => *target = b,
                None => self.errors.push(format!("{key}: expected true or false, found {v}")),
            }
        }
    }

    fn path(&mut self, key: &str, must_exist: bool) -> Option<PathBuf> {
        let mut s = String::new();
        if !self.values.contains_key(key) {
            return None;
        }
        self.string(key, &mut s);
        if s.is_empty() {
            return None;
        }
        let p = self.base.join(&s);
        if must_exist && !p.exists() {
            self.errors.push(format!("{key}: path `{}` does not exist", p.display()));
        }
        Some(p)
    }
}

/// Parses and validates a configuration, filling defaults.
pub fn validate_config(text: &str, base_dir: &Path) -> Result<PipelineConfig, ConfigErrors> {
    let table: toml::Table = toml::from_str(text).map_err(|e| ConfigErrors(vec![e.to_string()]))?;
    let mut values = BTreeMap::new();
    flatten("", &table, &mut values);
    let mut r = Reader {
        values,
        errors: Vec::new(),
        base: base_dir.to_path_buf(),
    };
    let mut c = PipelineConfig::default();

    let mut seed = c.seed as i64;
    r.int("seed", 0, i64::MAX, &mut seed);
    c.seed = seed as u64;
    c.train.seed = c.seed;

    let p = &mut c.paths;
    p.captions = r.path("paths.captions", true);
    p.guide = r.path("paths.guide", true);
    p.channels = r.path("paths.channels", true);
    p.gazetteer = r.path("paths.gazetteer", true);
    p.tag_lexicon = r.path("paths.tag_lexicon", true);
    p.suffix_rules = r.path("paths.suffix_rules", true);
    p.annotations = r.path("paths.annotations", true);
    p.lexicon = r.path("paths.lexicon", true);
    p.stories = r.path("paths.stories", true);
    p.labels = r.path("paths.labels", true);
    p.professions = r.path("paths.professions", true);
    p.stopwords = r.path("paths.stopwords", true);
    if let Some(w) = r.path("paths.work", false) {
        p.work = w;
    } else {
        p.work = base_dir.join(&p.work);
    }

    read_segmentation(&mut r, "segment.", &mut c.segmentation);

    r.real("annotate.min_salience", 0.0, true, 1.0, &mut c.min_salience);

    r.positive_ms("match.window_ms", &mut c.qualify.window_ms);
    r.count("match.min_evidence", 1, &mut c.qualify.min_evidence);
    r.real("match.precision_target", 0.0, false, 1.0, &mut c.train.precision_target);
    r.real("match.learning_rate", 0.0, false, 100.0, &mut c.train.learning_rate);
    r.count("match.max_epochs", 1, &mut c.train.max_epochs);
    r.real("match.holdout_fraction", 0.0, false, 0.5, &mut c.train.holdout_fraction);

    let a = &mut c.analytics;
    r.count("analytics.min_support", 1, &mut a.min_support);
    r.count("analytics.table_entities", 1, &mut a.table_entities);
    r.count("analytics.min_mentions", 1, &mut a.outliers.min_mentions);
    r.real("analytics.smoothing_alpha", 0.0, false, 1e6, &mut a.outliers.alpha);
    r.count("analytics.top_outliers", 1, &mut a.outliers.top);
    r.count("analytics.coverage_bins", 1, &mut a.coverage_bins);
    r.count("analytics.histogram_bin_width", 1, &mut a.histogram_bin_width);
    r.positive_ms("analytics.breaking_window_ms", &mut a.breaking_window_ms);

    let f = &mut c.factor;
    r.string("factor.linkage", &mut f.linkage);
    if !linkage_names().any(|n| n == f.linkage) {
        let known: Vec<_> = linkage_names().collect();
        r.errors.push(format!("factor.linkage = {:?}: must be one of {}", f.linkage, known.join(", ")));
    }
    r.count("factor.bicluster_k", 1, &mut f.bicluster_k);
    r.real("factor.sparsity", 0.0, true, 1e6, &mut f.sparsity);
    r.count("factor.max_words", 1, &mut f.max_words);
    r.count("factor.top_newsmakers", 1, &mut f.top_newsmakers);
    r.boolean("factor.log_counts", &mut f.log_counts);
    if let Some(v) = r.values.remove("factor.ranks") {
        match parse_ranks_value(&v) {
            Ok(ranks) => f.ranks = ranks,
            Err(e) => r.errors.push(format!("factor.ranks: {e}")),
        }
    }

    for key in r.values.keys() {
        r.errors.push(format!("{key}: unknown key"));
    }
    if r.errors.is_empty() {
        Ok(c)
    } else {
        Err(ConfigErrors(r.errors))
    }
}

fn read_segmentation(r: &mut Reader, prefix: &str, rules: &mut SegmentationRules) {
    let key = |k: &str| format!("{prefix}{k}");
    r.string(&key("speaker_marker"), &mut rules.speaker_marker);
    if rules.speaker_marker.is_empty() {
        r.errors.push(format!("{}: must be non-empty", key("speaker_marker")));
    }
    let mut punct: String = rules.terminal_punctuation.iter().collect();
    r.string(&key("terminal_punctuation"), &mut punct);
    if punct.is_empty() {
        r.errors.push(format!("{}: must be non-empty", key("terminal_punctuation")));
    }
    rules.terminal_punctuation = punct.chars().collect();
    r.positive_ms(&key("max_gap_ms"), &mut rules.max_gap_ms);
    r.count(&key("max_sentence_tokens"), 1, &mut rules.max_sentence_tokens);
}

/// Segmentation rules from a TOML file of bare keys (`max_gap_ms = 5000`).
pub fn parse_rules(text: &str) -> Result<SegmentationRules, ConfigErrors> {
    let table: toml::Table = toml::from_str(text).map_err(|e| ConfigErrors(vec![e.to_string()]))?;
    let mut values = BTreeMap::new();
    flatten("", &table, &mut values);
    let mut r = Reader {
        values,
        errors: Vec::new(),
        base: PathBuf::new(),
    };
    let mut rules = SegmentationRules::default();
    read_segmentation(&mut r, "", &mut rules);
    for key in r.values.keys() {
        r.errors.push(format!("{key}: unknown key"));
    }
    if r.errors.is_empty() {
        Ok(rules)
    } else {
        Err(ConfigErrors(r.errors))
    }
}

fn parse_ranks_value(v: &toml::Value) -> Result<[usize; 3], String> {
    match v {
        toml::Value::String(s) => parse_ranks(s),
        toml::Value::Array(items) => {
            let s: Vec<String> = items.iter().map(|i| i.to_string()).collect();
            parse_ranks(&s.join(","))
        }
        other => Err(format!("expected three ranks, found {other}")),
    }
}

/// Parses `p,q,r` with every rank at least 1.
pub fn parse_ranks(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated ranks, found `{s}`"));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("bad rank `{p}`"))?;
        if *o == 0 {
            return Err("ranks must be >= 1".into());
        }
    }
    Ok(out)
}
