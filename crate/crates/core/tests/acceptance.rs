//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use newsminer::analytics::{
    breaking, duration, jensen_shannon, prominence, vocabulary_outliers, OutlierConfig,
    MAX_DURATION_HOURS,
};
use newsminer::annotate::{tokenize, AnnotatedSentence, EntityMention, Token};
use newsminer::factor::{bicluster, hac, linkage, tucker3, BiclusterConfig, Tensor3, TuckerConfig};
use newsminer::ingest::{parse_caption_stream, CaptionLine, Genre, Millis, Provider, MS_PER_DAY, MS_PER_HOUR};
use newsminer::matching::{
    classify, extract_features, qualify, train_matcher, QualifiedMatching, QualifyConfig,
    SentenceMatch, Story, StoryPool, TrainConfig,
};
use newsminer::scoring::{readability, score_sentiment, ValenceLexicon};
use newsminer::segment::{segment, Sentence, SegmentationRules};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn lines(rows: &[(Millis, &str)]) -> Vec<CaptionLine> {
    rows.iter()
        .map(|(ts, t)| CaptionLine {
            ts_ms: *ts,
            channel_id: "c".into(),
            text: t.to_string(),
        })
        .collect()
}

// 1
fn caption_golden() -> Outcome {
    let t = Instant::now();
    let block = "[1339302660.000]    WHAT MORE CAN YOU ASK FOR?\n\
                 [1339302662.169]    >> THIS IS WHAT NBA\n\
                 [1339302663.203]    BASKETBALL IS ABOUT.\n";
    let parsed = parse_caption_stream(block, "cnn");
    let ts: Vec<Millis> = parsed.lines.iter().map(|l| l.ts_ms).collect();
    check(parsed.rejects.is_empty(), || format!("rejects: {:?}", parsed.rejects))?;
    check(ts == [1_339_302_660_000, 1_339_302_662_169, 1_339_302_663_203], || {
        format!("timestamps {ts:?}")
    })?;
    let provider = Provider::new("CNN", Genre::Sports);
    let out = segment(&provider, &parsed.lines, &SegmentationRules::default());
    let texts: Vec<&str> = out.iter().map(|s| s.text.as_str()).collect();
    check(texts == ["WHAT MORE CAN YOU ASK FOR?", "THIS IS WHAT NBA BASKETBALL IS ABOUT."], || {
        format!("sentences {texts:?}")
    })?;
    check(out[1].start_ms == 1_339_302_662_169, || "second sentence start".into())?;
    within(t.elapsed(), 1.0)?;
    Ok("3 lines, 2 sentences".into())
}

// 2
fn segmentation_conservation() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vocab = ["NEWS", "TODAY", "HE", "SAID", "IT.", "WHY?", "NO!", "OK,", "U.S.", "dr.", "smith", "A"];
    let rules = SegmentationRules::default();
    let provider = Provider::new("X", Genre::General);
    for case in 0..1000 {
        let n_lines = rng.random_range(1..30);
        let mut ts: Millis = rng.random_range(1..1_000_000);
        let mut input = Vec::new();
        let mut expected: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..n_lines {
            let n_tok = rng.random_range(1..12);
            let mut toks = Vec::new();
            for _ in 0..n_tok {
                let w = *vocab.choose(&mut rng).unwrap();
                let tok = match rng.random_range(0..8) {
                    0 => ">>".to_string(),
                    1 => format!(">>{w}"),
                    _ => w.to_string(),
                };
                let stripped = tok.strip_prefix(">>").unwrap_or(&tok);
                if !stripped.is_empty() {
                    *expected.entry(stripped.to_string()).or_insert(0) += 1;
                }
                toks.push(tok);
            }
            input.push((ts, toks.join(" ")));
            // gaps sometimes exceed the 5 s limit; equal timestamps happen too
            ts += rng.random_range(0..8000);
        }
        let caption: Vec<(Millis, &str)> = input.iter().map(|(t, s)| (*t, s.as_str())).collect();
        let out = segment(&provider, &lines(&caption), &rules);
        let mut got: BTreeMap<String, usize> = BTreeMap::new();
        for s in &out {
            for w in s.text.split_whitespace() {
                *got.entry(w.to_string()).or_insert(0) += 1;
            }
        }
        check(got == expected, || format!("case {case}: token multiset differs"))?;
        check(out.windows(2).all(|w| w[0].start_ms <= w[1].start_ms), || {
            format!("case {case}: start times decrease")
        })?;
    }
    within(t.elapsed(), 10.0)?;
    Ok("1000 streams, 0 violations".into())
}

// 3
/// Syllable counts by hand.
const SYLLABLES: &[(&str, usize)] = &[
    ("the", 1), ("cat", 1), ("sat", 1), ("on", 1), ("mat", 1), ("and", 1), ("is", 1), ("a", 1),
    ("big", 1), ("of", 1), ("news", 1), ("vote", 1), ("make", 1), ("time", 1), ("very", 2),
    ("happy", 2), ("quickly", 2), ("today", 2), ("tonight", 2), ("about", 2), ("market", 2),
    ("people", 2), ("little", 2), ("congress", 2), ("debate", 2), ("crisis", 2), ("table", 2),
    ("senator", 3), ("reporter", 3), ("family", 3), ("government", 3), ("president", 3),
    ("basketball", 3), ("investors", 3), ("election", 3), ("yesterday", 3), ("beautiful", 3),
    ("terrible", 3), ("economy", 4), ("america", 4), ("television", 4), ("corporation", 4),
    ("unemployment", 4),
];

fn fog_oracle() -> Outcome {
    let cat = tokenize("THE CAT SAT ON THE MAT");
    let fog = readability([cat.as_slice()]).map_err(|e| e.to_string())?.fog_index;
    check(fog == 2.4, || format!("cat sentence fog {fog:?}, expected exactly 2.4"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.random_range(3..20);
        let words: Vec<(&str, usize)> = (0..n).map(|_| *SYLLABLES.choose(&mut rng).unwrap()).collect();
        let mut text: Vec<String> = words.iter().map(|(w, _)| w.to_uppercase()).collect();
        text.push(".".into());
        let complex = words.iter().filter(|(_, s)| *s >= 3).count() as f64;
        let expected = 0.4 * (n as f64 + 100.0 * complex / n as f64);
        let tokens = tokenize(&text.join(" "));
        let got = readability([tokens.as_slice()]).map_err(|e| e.to_string())?.fog_index;
        worst = worst.max((got - expected).abs());
        check((got - expected).abs() <= 1e-9, || {
            format!("case {case} `{}`: {got} vs {expected}", text.join(" "))
        })?;
    }
    Ok(format!("cat = 2.4 exactly; 50 sentences, max error {worst:.1e}"))
}

// 4
fn sentiment_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pool: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    for case in 0..2000 {
        let mut valence = Vec::new();
        let mut negators = Vec::new();
        let mut boosters = Vec::new();
        for w in &pool {
            match rng.random_range(0..6) {
                0 | 1 => {
                    let v = rng.random_range(1..=5) * if rng.random_bool(0.5) { 1 } else { -1 };
                    valence.push((w.clone(), v));
                }
                2 => negators.push(w.clone()),
                3 => boosters.push((w.clone(), rng.random_range(-3..=3))),
                _ => {}
            }
        }
        let lex = ValenceLexicon::new(valence, negators, boosters);
        let n = rng.random_range(0..25);
        let tokens: Vec<Token> = (0..n).map(|_| Token::new(pool.choose(&mut rng).unwrap().to_uppercase())).collect();
        let r = score_sentiment(&tokens, &lex);
        check((-4..=4).contains(&r.score), || format!("case {case}: score {}", r.score))?;
        let hits = tokens.iter().any(|t| lex.valence.contains_key(&t.lower));
        if !hits {
            check(r.score == 0 && r.pos_word_count + r.neg_word_count == 0, || {
                format!("case {case}: hit-free sentence scored {}", r.score)
            })?;
        }
    }

    // every 3-token sentence over a small grammar against a direct evaluation
    let lex = ValenceLexicon::parse("good\t2\nbad\t-3\nsuperb\t5\n", "not\n", "very\t1\nslightly\t-1\n")
        .map_err(|e| e.to_string())?;
    let alphabet = ["not", "very", "slightly", "good", "bad", "superb", "cat"];
    let valence = |w: &str| -> Option<i32> { match w {
        "good" => Some(2),
        "bad" => Some(-3),
        "superb" => Some(5),
        _ => None,
    } };
    let booster = |w: &str| match w {
        "very" => 1,
        "slightly" => -1,
        _ => 0,
    };
    let mut n = 0;
    for a in alphabet {
        for b in alphabet {
            for c in alphabet {
                let words = [a, b, c];
                let (mut pos, mut neg) = (1, -1);
                for i in 0..3 {
                    let Some(v) = valence(words[i]) else { continue };
                    let mag = if i > 0 { (v.abs() + booster(words[i - 1])).clamp(1, 5) } else { v.abs() };
                    let negated = words[i.saturating_sub(2)..i].contains(&"not");
                    let signed = v.signum() * mag * if negated { -1 } else { 1 };
                    if signed > 0 {
                        pos = pos.max(signed);
                    } else {
                        neg = neg.min(signed);
                    }
                }
                let tokens: Vec<Token> = words.iter().map(|w| Token::new(w.to_uppercase())).collect();
                let r = score_sentiment(&tokens, &lex);
                check((r.pos_strength, r.neg_strength, r.score) == (pos, neg, pos + neg), || {
                    format!("{words:?}: got {:?}, expected ({pos}, {neg})", (r.pos_strength, r.neg_strength))
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("2000 random lexicons in [-4, 4]; {n} grammar sentences agree"))
}

// 5
fn synthetic_story(id: &str, published_ms: Millis, entities: &[&str]) -> Story {
    Story {
        story_id: id.into(),
        genre: Genre::General,
        published_ms,
        title: id.into(),
        entities: entities.iter().map(|e| (e.to_string(), 2)).collect(),
        title_entities: entities.iter().take(1).map(|e| e.to_string()).collect(),
    }
}

fn synthetic_sentence(ts: Millis, entities: &[&str], salience: f64) -> AnnotatedSentence {
    let tokens: Vec<Token> = entities.iter().map(|e| Token::new(*e).with_pos("NNP")).collect();
    AnnotatedSentence {
        sentence: Sentence {
            id: format!("S:general@{ts}.0"),
            provider: Provider::new("S", Genre::General),
            start_ms: ts,
            end_ms: ts,
            text: entities.join(" "),
            source_line_span: (0, 0),
        },
        mentions: entities
            .iter()
            .enumerate()
            .map(|(i, e)| EntityMention {
                entity: e.to_string(),
                span: (i, i + 1),
                salience,
            })
            .collect(),
        tokens,
    }
}

fn matcher_precision() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let names: Vec<String> = (0..60).map(|i| format!("E{i}")).collect();
    let now: Millis = 1_339_000_000_000;
    let mut examples = Vec::new();
    for i in 0..200 {
        let mut pick: Vec<&str> = names.choose_multiple(&mut rng, 6).map(String::as_str).collect();
        let story_entities = pick.split_off(3);
        let story = synthetic_story(&format!("s{i}"), now - rng.random_range(0..2 * MS_PER_DAY), &story_entities);
        let same = i % 2 == 0;
        let sentence_entities: Vec<&str> = if same {
            story_entities[..rng.random_range(1..=3)].to_vec()
        } else {
            pick[..rng.random_range(1..=3)].to_vec()
        };
        let s = synthetic_sentence(now, &sentence_entities, rng.random_range(0.3..1.0));
        examples.push((extract_features(&s.mentions, now, &story), same));
    }
    let config = TrainConfig::default();
    let a = train_matcher(&examples, Genre::General, &config).map_err(|e| e.to_string())?;
    let b = train_matcher(&examples, Genre::General, &config).map_err(|e| e.to_string())?;
    check(a == b, || "training is not deterministic".into())?;
    let precision = a.holdout_precision.ok_or("no held-out positives")?;
    check(precision >= 0.9, || format!("held-out precision {precision}"))?;

    let entities = ["E1", "E2", "E3"];
    let pool = StoryPool::new([
        synthetic_story("fresh", now - MS_PER_DAY, &entities),
        synthetic_story("stale", now - 4 * MS_PER_DAY, &entities),
    ]);
    let s = synthetic_sentence(now, &entities, 1.0);
    let hits = classify(&s, &pool, &a.model, now);
    check(hits.iter().all(|(id, _)| id != "stale"), || "4-day-old story matched".into())?;
    check(hits.iter().any(|(id, _)| id == "fresh"), || "1-day-old story did not match".into())?;
    within(t.elapsed(), 5.0)?;
    Ok(format!("held-out precision {precision:.3}; stale story rejected"))
}

// 6
fn timeline_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let window = MS_PER_HOUR;
    let config = QualifyConfig::default();
    for case in 0..500 {
        let providers: Vec<Provider> = (0..rng.random_range(1..5))
            .map(|i| Provider::new(format!("N{i}"), Genre::General))
            .collect();
        let stories: Vec<String> = (0..rng.random_range(1..4)).map(|i| format!("s{i}")).collect();
        let span = if rng.random_bool(0.2) { 5 * MS_PER_DAY } else { 6 * MS_PER_HOUR };
        let base: Millis = 1_339_000_000_000;
        let matches: Vec<SentenceMatch> = (0..rng.random_range(0..60))
            .map(|_| {
                let p = providers.choose(&mut rng).unwrap().clone();
                let ts = base + rng.random_range(0..span / 60_000) * 60_000;
                // repeated sentence ids exercise the dedup rule
                let sid = format!("{p}@{}", if rng.random_bool(0.1) { base } else { ts });
                SentenceMatch {
                    sentence: sid,
                    provider: p,
                    story_id: stories.choose(&mut rng).unwrap().clone(),
                    ts,
                    score: 1.0,
                }
            })
            .collect();

        let got = qualify(&matches, &config);
        let expected = brute_qualify(&matches, &config);
        check(got == expected, || format!("case {case}: qualify differs"))?;

        for s in &stories {
            let firsts: Vec<(&Provider, Millis)> =
                expected.iter().filter(|q| &q.story_id == s).map(|q| (&q.provider, q.first_ts)).collect();
            match breaking(s, &got, window) {
                Ok(set) => {
                    let t0 = firsts.iter().map(|f| f.1).min().unwrap();
                    let want: BTreeSet<Provider> =
                        firsts.iter().filter(|f| f.1 - t0 <= window).map(|f| f.0.clone()).collect();
                    check(set == want, || format!("case {case}: breaking for {s}"))?;
                }
                Err(_) => check(firsts.is_empty(), || format!("case {case}: breaking error on covered {s}"))?,
            }
            for p in &providers {
                let mine: Vec<&QualifiedMatching> =
                    expected.iter().filter(|q| &q.story_id == s && &q.provider == p).collect();
                match duration(p, s, &got) {
                    Ok(h) => {
                        let first = mine.iter().map(|q| q.first_ts).min().unwrap();
                        let last = mine.iter().map(|q| q.last_ts).max().unwrap();
                        let want = ((last - first) as f64 / 3_600_000.0).min(MAX_DURATION_HOURS);
                        check(h == want, || format!("case {case}: duration {h} vs {want}"))?;
                        check((0.0..=MAX_DURATION_HOURS).contains(&h), || format!("duration {h} out of range"))?;
                    }
                    Err(_) => check(mine.is_empty(), || format!("case {case}: duration error on covered pair"))?,
                }
            }
        }
    }
    Ok("500 timelines agree".into())
}

fn brute_qualify(matches: &[SentenceMatch], config: &QualifyConfig) -> Vec<QualifiedMatching> {
    let mut out = Vec::new();
    let mut keys: Vec<(Provider, String)> =
        matches.iter().map(|m| (m.provider.clone(), m.story_id.clone())).collect();
    keys.sort();
    keys.dedup();
    for (p, s) in keys {
        // earliest timestamp of each distinct sentence
        let mut earliest: Vec<(String, Millis)> = Vec::new();
        for m in matches.iter().filter(|m| m.provider == p && m.story_id == s) {
            match earliest.iter_mut().find(|e| e.0 == m.sentence) {
                Some(e) => e.1 = e.1.min(m.ts),
                None => earliest.push((m.sentence.clone(), m.ts)),
            }
        }
        let mut times: Vec<Millis> = earliest.into_iter().map(|e| e.1).collect();
        times.sort();
        let mut start = 0;
        while start < times.len() {
            let mut end = start;
            while end + 1 < times.len() && times[end + 1] - times[start] <= config.window_ms {
                end += 1;
            }
            if end - start + 1 >= config.min_evidence {
                out.push(QualifiedMatching {
                    provider: p.clone(),
                    story_id: s.clone(),
                    first_ts: times[start],
                    last_ts: times[end],
                    evidence_count: end - start + 1,
                });
            }
            start = end + 1;
        }
    }
    out.sort();
    out
}

// 7
fn qm(p: &Provider, story: &str) -> QualifiedMatching {
    QualifiedMatching {
        provider: p.clone(),
        story_id: story.into(),
        first_ts: 1,
        last_ts: 2,
        evidence_count: 2,
    }
}

fn prominence_identities() -> Outcome {
    let providers: BTreeSet<Provider> = (0..7).map(|i| Provider::new(format!("N{i}"), Genre::Sports)).collect();
    let all: Vec<QualifiedMatching> = providers.iter().map(|p| qm(p, "s")).collect();
    let p = prominence("s", Genre::Sports, &all, &providers).map_err(|e| e.to_string())?;
    check(p.prominence == 1.0, || format!("covered by all: {}", p.prominence))?;
    let p = prominence("t", Genre::Sports, &all, &providers).map_err(|e| e.to_string())?;
    check(p.prominence == 0.0, || format!("covered by none: {}", p.prominence))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let n = rng.random_range(1..20);
        let providers: Vec<Provider> = (0..n).map(|i| Provider::new(format!("N{i}"), Genre::Business)).collect();
        let set: BTreeSet<Provider> = providers.iter().cloned().collect();
        let outsider = Provider::new("OUT", Genre::Business);
        let mut q = Vec::new();
        for _ in 0..rng.random_range(0..40) {
            let p = if rng.random_bool(0.1) { &outsider } else { providers.choose(&mut rng).unwrap() };
            q.push(qm(p, ["a", "b", "c"].choose(&mut rng).unwrap()));
        }
        let covering = providers.iter().filter(|p| q.iter().any(|m| &m.provider == *p && m.story_id == "a")).count();
        let want = covering as f64 / n as f64;
        let got = prominence("a", Genre::Business, &q, &set).map_err(|e| e.to_string())?.prominence;
        check((got - want).abs() <= 1e-12, || format!("case {case}: {got} vs {want}"))?;
    }
    Ok("all 1.0, none 0.0, 1000 random worlds agree".into())
}

// 8
fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    g.qr().q().columns(0, cols).into_owned()
}

fn orthonormality_residual(m: &DMatrix<f64>) -> f64 {
    (m.transpose() * m - DMatrix::identity(m.ncols(), m.ncols())).abs().max()
}

fn tucker_recovery() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (dims, ranks) = ([30, 13, 15], [3, 2, 3]);
    let f: Vec<DMatrix<f64>> = (0..3).map(|m| random_orthonormal(&mut rng, dims[m], ranks[m])).collect();
    let core = Tensor3::from_fn(ranks, |_, _, _| StandardNormal.sample(&mut rng));
    let x = Tensor3::from_fn(dims, |i, j, k| {
        let mut s = 0.0;
        for a in 0..ranks[0] {
            for b in 0..ranks[1] {
                for c in 0..ranks[2] {
                    s += core[(a, b, c)] * f[0][(i, a)] * f[1][(j, b)] * f[2][(k, c)];
                }
            }
        }
        s
    });
    let model = tucker3(&x, &TuckerConfig { ranks, ..Default::default() }).map_err(|e| e.to_string())?;
    check(model.fit >= 0.999, || format!("fit {}", model.fit))?;
    check(model.fit_history.windows(2).all(|w| w[1] >= w[0]), || {
        format!("fit decreased: {:?}", model.fit_history)
    })?;
    let residual = model.factors.iter().map(orthonormality_residual).fold(0.0, f64::max);
    check(residual < 1e-8, || format!("orthonormality residual {residual:e}"))?;
    within(t.elapsed(), 30.0)?;
    Ok(format!("fit {:.12}, orthonormality residual {residual:.1e}", model.fit))
}

// 9
fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

fn bicluster_recovery() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = Normal::new(0.0, 0.01).expect("sigma");
    let (m, n) = (100, 60);
    let blocks = [((0..30), (0..20), 1.0), ((50..70), (30..45), 0.8)];
    let x = DMatrix::from_fn(m, n, |i, j| {
        let planted: f64 = blocks
            .iter()
            .filter(|(r, c, _)| r.contains(&i) && c.contains(&j))
            .map(|b| b.2)
            .sum();
        // negative noise is clipped; the factorization takes non-negative data
        (planted + noise.sample(&mut rng)).max(0.0)
    });
    let result = bicluster(&x, &BiclusterConfig { k: 2, ..Default::default() }).map_err(|e| e.to_string())?;
    check(
        result.factors.windows(2).all(|w| w[0].cohesiveness >= w[1].cohesiveness),
        || "factors not ordered by cohesiveness".into(),
    )?;
    let mut report = Vec::new();
    for (r, c, _) in &blocks {
        let rows: BTreeSet<usize> = r.clone().collect();
        let cols: BTreeSet<usize> = c.clone().collect();
        let best = result
            .factors
            .iter()
            .map(|f| {
                let fr: BTreeSet<usize> = f.top_rows.iter().copied().collect();
                let fc: BTreeSet<usize> = f.top_cols.iter().copied().collect();
                jaccard(&rows, &fr).min(jaccard(&cols, &fc))
            })
            .fold(0.0, f64::max);
        check(best >= 0.9, || format!("block {r:?}x{c:?}: Jaccard {best}"))?;
        report.push(format!("{best:.3}"));
    }
    // the stronger block explains more of the matrix and comes first
    check(result.factors[0].top_rows.contains(&0), || "stronger block not first".into())?;
    within(t.elapsed(), 10.0)?;
    Ok(format!("Jaccard {}", report.join(", ")))
}

// 10
fn hac_sanity() -> Outcome {
    let avg = linkage("average").ok_or("average linkage missing")?;
    let labels: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
    let v = vec![vec![0.0, 1.0], vec![5.0, 5.0], vec![0.0, 1.0], vec![9.0, 0.0], vec![5.0, 5.0]];
    let d = hac(&labels, &v, avg).map_err(|e| e.to_string())?;
    let first: BTreeSet<(usize, usize)> = d.merges[..2].iter().map(|m| (m.a.min(m.b), m.a.max(m.b))).collect();
    check(d.merges[..2].iter().all(|m| m.distance == 0.0), || "duplicates not merged at 0".into())?;
    check(first == BTreeSet::from([(0, 2), (1, 4)]), || format!("first merges {first:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..100 {
        let n = rng.random_range(2..30);
        let dim = rng.random_range(1..5);
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
        let labels: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
        let d = hac(&labels, &vectors, avg).map_err(|e| e.to_string())?;
        let oracle = brute_average(&vectors);
        check(d.merges.len() == oracle.len(), || format!("case {case}: merge count"))?;
        let mut members: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for (t, (m, (set, h))) in d.merges.iter().zip(&oracle).enumerate() {
            let merged: BTreeSet<usize> = members[m.a].union(&members[m.b]).copied().collect();
            check(&merged == set, || format!("case {case}: merge {t} joins different clusters"))?;
            check((m.distance - h).abs() <= 1e-9 * h.max(1.0), || {
                format!("case {case}: merge {t} height {} vs {h}", m.distance)
            })?;
            members.push(merged);
        }
        check(d.merges.windows(2).all(|w| w[1].distance >= w[0].distance - 1e-12), || {
            format!("case {case}: heights decrease")
        })?;
    }
    Ok("duplicates merge at 0; 100 instances match the O(n^3) oracle".into())
}

/// Average linkage from scratch: each step recomputes every cluster distance
/// as the mean pairwise leaf distance.
fn brute_average(v: &[Vec<f64>]) -> Vec<(BTreeSet<usize>, f64)> {
    let dist = |a: usize, b: usize| -> f64 {
        v[a].iter().zip(&v[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let mut clusters: Vec<BTreeSet<usize>> = (0..v.len()).map(|i| BTreeSet::from([i])).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let mut s = 0.0;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        s += dist(a, b);
                    }
                }
                let d = s / (clusters[i].len() * clusters[j].len()) as f64;
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (h, i, j) = best;
        let b = clusters.remove(j);
        let a = clusters.remove(i);
        let merged: BTreeSet<usize> = a.union(&b).copied().collect();
        out.push((merged.clone(), h));
        clusters.push(merged);
    }
    out
}

// 11
fn annotated(provider: &Provider, entity: &str, words: &[&str]) -> AnnotatedSentence {
    let mut tokens = vec![Token::new(entity).with_pos("NNP")];
    tokens.extend(words.iter().map(|w| Token::new(*w).with_pos("NN")));
    AnnotatedSentence {
        sentence: Sentence {
            id: String::new(),
            provider: provider.clone(),
            start_ms: 1,
            end_ms: 1,
            text: String::new(),
            source_line_span: (0, 0),
        },
        tokens,
        mentions: vec![EntityMention {
            entity: entity.into(),
            span: (0, 1),
            salience: 1.0,
        }],
    }
}

fn vocabulary_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let n = rng.random_range(1..30);
        let mut p: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
        let mut q: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
        for v in [&mut p, &mut q] {
            let s: f64 = v.iter().sum();
            if s == 0.0 {
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x /= s);
            }
        }
        let (a, b) = (jensen_shannon(&p, &q), jensen_shannon(&q, &p));
        check(a == b, || format!("case {case}: asymmetric {a} vs {b}"))?;
        check((0.0..=std::f64::consts::LN_2).contains(&a), || format!("case {case}: {a} out of [0, ln 2]"))?;
    }

    let prov = Provider::new("P", Genre::General);
    let common = ["market", "rates", "growth", "bank", "jobs", "budget"];
    let config = OutlierConfig {
        min_mentions: 5,
        top: 10,
        ..Default::default()
    };

    // an entity present in every sentence has the provider's distribution
    let uniform: Vec<AnnotatedSentence> = (0..40)
        .map(|_| {
            let w: Vec<&str> = common.choose_multiple(&mut rng, 3).copied().collect();
            annotated(&prov, "Everywhere", &w)
        })
        .collect();
    let refs: Vec<&AnnotatedSentence> = uniform.iter().collect();
    let out = vocabulary_outliers(&prov, &refs, &config);
    check(out.len() == 1 && out[0].jsd.abs() < 1e-15, || format!("uniform entity: {out:?}"))?;

    let mut fixture = Vec::new();
    for entity in ["Alpha", "Beta", "Gamma"] {
        for _ in 0..20 {
            let w: Vec<&str> = common.choose_multiple(&mut rng, 3).copied().collect();
            fixture.push(annotated(&prov, entity, &w));
        }
    }
    for _ in 0..8 {
        fixture.push(annotated(&prov, "Outlier", &["wedding", "divorce", "premiere"]));
    }
    let refs: Vec<&AnnotatedSentence> = fixture.iter().collect();
    let out = vocabulary_outliers(&prov, &refs, &config);
    check(out.first().is_some_and(|o| o.entity == "Outlier"), || format!("ranking {out:?}"))?;
    Ok(format!("1000 pairs symmetric and bounded; uniform entity 0; disjoint entity first (jsd {:.4})", out[0].jsd))
}

// 12
fn end_to_end_determinism() -> Outcome {
    let t = Instant::now();
    let mut manifests = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_newsminer"))
            .args(["--toy", "--seed", "42", "--work"])
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || {
            format!("exit {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr))
        })?;
        manifests.push(std::fs::read_to_string(dir.path().join("out/manifest.tsv")).map_err(|e| e.to_string())?);
    }
    let files = manifests[0].lines().count();
    check(files > 10, || format!("only {files} artifacts"))?;
    check(manifests[0] == manifests[1], || "manifests differ".into())?;
    within(t.elapsed(), 60.0)?;
    Ok(format!("{files} artifacts identical, {:.2}s for two runs", t.elapsed().as_secs_f64()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("caption parsing golden block", caption_golden),
        ("segmentation conservation", segmentation_conservation),
        ("fog index oracle", fog_oracle),
        ("sentiment bounds and negation", sentiment_bounds),
        ("matcher precision and recency", matcher_precision),
        ("qualify/breaking/duration oracle", timeline_oracle),
        ("prominence identities", prominence_identities),
        ("tucker3 recovery", tucker_recovery),
        ("bicluster planted recovery", bicluster_recovery),
        ("hac sanity", hac_sanity),
        ("vocabulary outlier properties", vocabulary_properties),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
