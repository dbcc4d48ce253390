//! A small seeded corpus that exercises every stage: caption files, program
//! guide, lexicons, gazetteer, stories and match labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{format_timestamp, Genre, Millis, MS_PER_HOUR, MS_PER_SECOND};
use crate::matching::StoryRecord;
use crate::records::{write_jsonl, write_text, RecordError};

/// 2012-06-10 00:00:00 UTC.
pub const TOY_EPOCH_MS: Millis = 1_339_286_400_000;

const DAYS: i64 = 2;
const MINUTE: Millis = 60 * MS_PER_SECOND;

struct Network {
    channel: &'static str,
    name: &'static str,
    genre: Genre,
}

const NETWORKS: &[Network] = &[
    Network { channel: "ch01", name: "CNN", genre: Genre::General },
    Network { channel: "ch02", name: "FOXNEWS", genre: Genre::General },
    Network { channel: "ch03", name: "MSNBC", genre: Genre::General },
    Network { channel: "ch04", name: "ABC", genre: Genre::General },
    Network { channel: "ch05", name: "CBS", genre: Genre::General },
    Network { channel: "ch06", name: "ESPN", genre: Genre::Sports },
    Network { channel: "ch07", name: "FSN", genre: Genre::Sports },
    Network { channel: "ch08", name: "NBCSN", genre: Genre::Sports },
    Network { channel: "ch09", name: "CNBC", genre: Genre::Business },
    Network { channel: "ch10", name: "BLOOMBERG", genre: Genre::Business },
    Network { channel: "ch11", name: "FBN", genre: Genre::Business },
    Network { channel: "ch12", name: "EONLINE", genre: Genre::Entertainment },
    Network { channel: "ch13", name: "TMZ", genre: Genre::Entertainment },
    Network { channel: "ch14", name: "ACCESS", genre: Genre::Entertainment },
];

/// `(entity id, full name, profession)`; an empty profession is left unmapped.
fn people(genre: Genre) -> &'static [(&'static str, &'static str, &'static str)] {
    match genre {
        Genre::General => &[
            ("Barack_Obama", "Barack Obama", "Politics/US_DEM"),
            ("Mitt_Romney", "Mitt Romney", "Politics/US_REP"),
            ("Hillary_Clinton", "Hillary Clinton", "Politics/US_DEM"),
            ("Joe_Biden", "Joe Biden", "Politics/US_DEM"),
            ("John_Boehner", "John Boehner", "Politics/US_REP"),
            ("Nancy_Pelosi", "Nancy Pelosi", "Politics/US_DEM"),
            ("Eric_Holder", "Eric Holder", "Law/Attorney"),
            ("Scott_Walker", "Scott Walker", ""),
        ],
        Genre::Sports => &[
            ("LeBron_James", "LeBron James", "Sports/Basketball"),
            ("Kevin_Durant", "Kevin Durant", "Sports/Basketball"),
            ("Andrew_Luck", "Andrew Luck", "Sports/Football"),
            ("Tim_Tebow", "Tim Tebow", "Sports/Football"),
            ("Peyton_Manning", "Peyton Manning", "Sports/Football"),
            ("Serena_Williams", "Serena Williams", "Sports/Tennis"),
            ("Tiger_Woods", "Tiger Woods", "Sports/Golf"),
            ("Rafael_Nadal", "Rafael Nadal", "Sports/Tennis"),
        ],
        Genre::Business => &[
            ("Ben_Bernanke", "Ben Bernanke", "Economics/Central_Bank"),
            ("Mark_Zuckerberg", "Mark Zuckerberg", "Business/Tech"),
            ("Tim_Cook", "Tim Cook", "Business/Tech"),
            ("Jamie_Dimon", "Jamie Dimon", "Business/Finance"),
            ("Warren_Buffett", "Warren Buffett", "Business/Finance"),
            ("Angela_Merkel", "Angela Merkel", "Politics/Europe"),
            ("Mario_Draghi", "Mario Draghi", "Economics/Central_Bank"),
            ("Lloyd_Blankfein", "Lloyd Blankfein", "Business/Finance"),
        ],
        Genre::Entertainment => &[
            ("Katie_Holmes", "Katie Holmes", "Entertainment/Actor"),
            ("Tom_Cruise", "Tom Cruise", "Entertainment/Actor"),
            ("Kim_Kardashian", "Kim Kardashian", "Entertainment/TV"),
            ("Justin_Bieber", "Justin Bieber", "Entertainment/Music"),
            ("Taylor_Swift", "Taylor Swift", "Entertainment/Music"),
            ("Lady_Gaga", "Lady Gaga", "Entertainment/Music"),
            ("Brad_Pitt", "Brad Pitt", "Entertainment/Actor"),
            ("Angelina_Jolie", "Angelina Jolie", "Entertainment/Actor"),
        ],
    }
}

fn topic_words(genre: Genre) -> &'static [&'static str] {
    match genre {
        Genre::General => &[
            "campaign", "election", "budget", "debate", "senate", "congress", "vote", "jobs",
            "immigration", "deficit", "policy", "poll", "court", "healthcare", "taxes",
        ],
        Genre::Sports => &[
            "game", "season", "playoffs", "draft", "coach", "finals", "team", "contract",
            "injury", "championship", "quarterback", "match", "tournament", "record", "title",
        ],
        Genre::Business => &[
            "market", "stocks", "earnings", "shares", "rates", "economy", "bank", "investors",
            "profit", "growth", "bonds", "debt", "merger", "revenue", "inflation",
        ],
        Genre::Entertainment => &[
            "movie", "divorce", "album", "concert", "premiere", "wedding", "tour", "fans",
            "show", "award", "single", "couple", "film", "studio", "red carpet",
        ],
    }
}

const VERBS: &[&str] = &[
    "said", "announced", "faced", "discussed", "defended", "questioned", "praised", "criticized",
    "addressed", "rejected",
];
const CONNECTORS: &[&str] = &["about the", "after the", "over the", "during the", "before the"];
const POSITIVE: &[&str] = &["good", "great", "strong", "happy", "success", "win", "celebrate"];
const NEGATIVE: &[&str] = &["bad", "terrible", "weak", "crisis", "loss", "angry", "scandal", "fail"];
const FILLER: &[&str] = &[
    "we will be right back after this",
    "stay with us for more news tonight",
    "the weather looks clear across the region",
    "traffic is moving slowly on the bridge",
    "thanks for joining us this morning",
    "coming up next we have more on the top stories",
    "here is a look at what is happening now",
];

struct ToyStory {
    record: StoryRecord,
    people: Vec<usize>,
    topics: Vec<&'static str>,
    major: bool,
}

struct Event {
    ts: Millis,
    lines: Vec<String>,
    /// `(story, label)` pairs to emit for this sentence.
    labels: Vec<(String, &'static str)>,
}

fn upper(s: &str) -> String {
    s.to_uppercase()
}

fn last_name(full: &str) -> &str {
    full.rsplit(' ').next().unwrap_or(full)
}

fn sentence_text(
    rng: &mut ChaCha8Rng,
    genre: Genre,
    who: &[usize],
    topics: &[&str],
) -> String {
    let roster = people(genre);
    let name = |i: usize, rng: &mut ChaCha8Rng| {
        let full = roster[i].1;
        if rng.random_bool(0.5) {
            full.to_string()
        } else {
            last_name(full).to_string()
        }
    };
    let mut words = vec![name(who[0], rng), VERBS.choose(rng).unwrap().to_string()];
    words.push(CONNECTORS.choose(rng).unwrap().to_string());
    words.push(topics.choose(rng).unwrap().to_string());
    if who.len() > 1 && rng.random_bool(0.6) {
        words.push("with".into());
        words.push(name(who[1], rng));
    }
    if rng.random_bool(0.7) {
        let positive = rng.random_bool(0.5);
        if rng.random_bool(0.2) {
            words.push("not".into());
        } else if rng.random_bool(0.2) {
            words.push("very".into());
        }
        let list = if positive { POSITIVE } else { NEGATIVE };
        words.push(list.choose(rng).unwrap().to_string());
    }
    words.push(topics.choose(rng).unwrap().to_string());
    upper(&words.join(" ")) + "."
}

/// Splits a sentence over one or two caption lines.
fn caption_lines(rng: &mut ChaCha8Rng, text: &str, speaker: bool) -> Vec<String> {
    let text = if speaker { format!(">> {text}") } else { text.to_string() };
    let words: Vec<&str> = text.split(' ').collect();
    if words.len() > 6 && rng.random_bool(0.5) {
        let cut = words.len() / 2;
        vec![words[..cut].join(" "), words[cut..].join(" ")]
    } else {
        vec![text]
    }
}

/// Paths of the generated inputs, relative to the configuration file.
pub struct ToyCorpus {
    pub config: PathBuf,
    pub work: PathBuf,
}

/// Writes the corpus and a `newsminer.toml` into `dir`; artifacts go to
/// `dir/out`.
pub fn write_toy_corpus(dir: &Path, seed: u64) -> Result<ToyCorpus, RecordError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = dir.join("input");

    // stories
    let mut stories: Vec<(Genre, ToyStory)> = Vec::new();
    for genre in Genre::ALL {
        let roster = people(genre);
        for s in 0..6 {
            let mut idx: Vec<usize> = (0..roster.len()).collect();
            idx.shuffle(&mut rng);
            let who = vec![idx[0], idx[1]];
            let mut topics: Vec<&str> = topic_words(genre).to_vec();
            topics.shuffle(&mut rng);
            topics.truncate(3);
            let published = TOY_EPOCH_MS + rng.random_range(1..36) * MS_PER_HOUR + rng.random_range(0..60) * MINUTE;
            let (a, b) = (roster[who[0]].1, roster[who[1]].1);
            let title = format!("{a} and {b} in {} {}", topics[0], topics[1]);
            let body = format!(
                "{a} {} {} {}. {b} responded on the {}. Observers expect more on the {}.",
                VERBS.choose(&mut rng).unwrap(),
                CONNECTORS.choose(&mut rng).unwrap(),
                topics[0],
                topics[1],
                topics[2]
            );
            stories.push((
                genre,
                ToyStory {
                    record: StoryRecord {
                        story_id: format!("{}-{:02}", &genre.as_str()[..3], s + 1),
                        genre,
                        published_ms: published,
                        title,
                        body,
                    },
                    people: who,
                    topics,
                    major: s % 2 == 0,
                },
            ));
        }
    }

    // caption events per channel, plus labels
    let mut labels = String::new();
    let mut events: BTreeMap<&str, Vec<Event>> = BTreeMap::new();
    for net in NETWORKS {
        let list = events.entry(net.channel).or_default();
        let genre_stories: Vec<&ToyStory> =
            stories.iter().filter(|(g, _)| *g == net.genre).map(|(_, s)| s).collect();
        for story in &genre_stories {
            let p_cover = if story.major { 0.9 } else { 0.25 };
            if !rng.random_bool(p_cover) {
                continue;
            }
            let bursts = if rng.random_bool(0.4) { 2 } else { 1 };
            for b in 0..bursts {
                let mut t = story.record.published_ms
                    + rng.random_range(2..150) * MINUTE
                    + b * rng.random_range(4..20) * MS_PER_HOUR;
                for n in 0..rng.random_range(2..5) {
                    let text = sentence_text(&mut rng, net.genre, &story.people, &story.topics);
                    let lines = caption_lines(&mut rng, &text, n == 0);
                    let mut pairs = Vec::new();
                    if n < 2 {
                        pairs.push((story.record.story_id.clone(), "same"));
                        let other = genre_stories.iter().find(|o| {
                            o.record.story_id != story.record.story_id
                                && o.people.iter().all(|p| !story.people.contains(p))
                        });
                        if let Some(o) = other {
                            pairs.push((o.record.story_id.clone(), "different"));
                        }
                    }
                    list.push(Event { ts: t, lines, labels: pairs });
                    t += rng.random_range(20..120) * MS_PER_SECOND;
                }
            }
        }
        // background chatter, some mentioning people outside any story
        for _ in 0..60 {
            let t = TOY_EPOCH_MS + rng.random_range(0..DAYS * 24 * 60) * MINUTE;
            let text = if rng.random_bool(0.3) {
                let who = rng.random_range(0..people(net.genre).len());
                sentence_text(&mut rng, net.genre, &[who], topic_words(net.genre))
            } else {
                upper(FILLER.choose(&mut rng).unwrap()) + "."
            };
            let speaker = rng.random_bool(0.3);
            let lines = caption_lines(&mut rng, &text, speaker);
            list.push(Event { ts: t, lines, labels: Vec::new() });
        }
    }

    // caption files: lines two seconds apart, events kept apart
    let providers: BTreeMap<&str, String> = NETWORKS
        .iter()
        .map(|n| (n.channel, format!("{}:{}", n.name, n.genre.as_str())))
        .collect();
    for (channel, mut list) in events {
        list.sort_by_key(|e| e.ts);
        let mut text = String::new();
        let mut next_free = 0;
        for (i, e) in list.iter().enumerate() {
            let mut t = e.ts.max(next_free);
            for (story, label) in &e.labels {
                let _ = writeln!(labels, "{}@{t}.0\t{story}\t{label}", providers[channel]);
            }
            for line in &e.lines {
                let _ = writeln!(text, "[{}] {line}", format_timestamp(t));
                t += 2 * MS_PER_SECOND;
            }
            next_free = t + 8 * MS_PER_SECOND;
            if i == list.len() / 2 {
                text.push_str("CAPTION SIGNAL LOST\n");
            }
        }
        write_text(&input.join("captions").join(format!("{channel}.txt")), &text)?;
    }

    // program guide: news for 20 hours a day, entertainment programming after
    let mut guide = String::from("# channel_id\tstart_ms\tend_ms\tprogram\tgenre\tis_news\n");
    let mut channels = String::new();
    for net in NETWORKS {
        let _ = writeln!(channels, "{}\t{}", net.channel, net.name);
        for day in 0..DAYS + 1 {
            let start = TOY_EPOCH_MS + day * 24 * MS_PER_HOUR;
            let _ = writeln!(
                guide,
                "{}\t{}\t{}\t{} {} News\t{}\t1",
                net.channel,
                start,
                start + 20 * MS_PER_HOUR,
                net.name,
                net.genre.as_str(),
                net.genre.as_str()
            );
            let _ = writeln!(
                guide,
                "{}\t{}\t{}\tLate Movie\tentertainment\t0",
                net.channel,
                start + 20 * MS_PER_HOUR,
                start + 24 * MS_PER_HOUR
            );
        }
    }
    write_text(&input.join("guide.tsv"), &guide)?;
    write_text(&input.join("channel_map.tsv"), &channels)?;

    // gazetteer, professions, tagger lexicon
    let mut gazetteer = String::new();
    let mut professions = String::new();
    let mut tags: BTreeMap<String, &str> = BTreeMap::new();
    for genre in Genre::ALL {
        for (id, full, prof) in people(genre) {
            let _ = writeln!(gazetteer, "{}\t{id}\t1", full.to_lowercase());
            let _ = writeln!(gazetteer, "{}\t{id}\t1", last_name(full).to_lowercase());
            if !prof.is_empty() {
                let _ = writeln!(professions, "{id}\t{prof}");
            }
            for part in full.split(' ') {
                tags.insert(part.to_lowercase(), "NNP");
            }
        }
        for w in topic_words(genre) {
            for part in w.split(' ') {
                tags.entry(part.to_string()).or_insert("NN");
            }
        }
    }
    for w in VERBS {
        tags.insert(w.to_string(), "VBD");
    }
    for w in POSITIVE.iter().chain(NEGATIVE) {
        tags.entry(w.to_string()).or_insert("JJ");
    }
    for (w, t) in [
        ("the", "DT"), ("a", "DT"), ("this", "DT"), ("about", "IN"), ("after", "IN"),
        ("over", "IN"), ("during", "IN"), ("before", "IN"), ("with", "IN"), ("on", "IN"),
        ("for", "IN"), ("across", "IN"), ("of", "IN"), ("at", "IN"), ("in", "IN"),
        ("not", "RB"), ("very", "RB"), ("now", "RB"), ("next", "RB"), ("back", "RB"),
        ("and", "CC"), ("we", "PRP"), ("us", "PRP"), ("will", "MD"), ("be", "VB"),
        ("is", "VBZ"), ("looks", "VBZ"), ("have", "VBP"), ("here", "RB"), ("what", "WP"),
        ("stay", "VB"), ("thanks", "NNS"), ("right", "RB"), ("more", "JJR"), ("up", "RP"),
        ("coming", "VBG"), ("moving", "VBG"), ("happening", "VBG"), ("joining", "VBG"),
    ] {
        tags.insert(w.to_string(), t);
    }
    let lexicon: String = tags.iter().map(|(w, t)| format!("{w}\t{t}\n")).collect();
    write_text(&input.join("gazetteer.tsv"), &gazetteer)?;
    write_text(&input.join("professions.tsv"), &professions)?;
    write_text(&input.join("tag_lexicon.tsv"), &lexicon)?;
    write_text(
        &input.join("suffix_rules.tsv"),
        "ing\tVBG\ned\tVBD\nly\tRB\ntion\tNN\ns\tNNS\n",
    )?;

    // sentiment lexicon
    let valence = "good\t2\ngreat\t3\nstrong\t2\nhappy\t3\nsuccess\t3\nwin\t2\ncelebrate\t3\n\
                   bad\t-2\nterrible\t-4\nweak\t-2\ncrisis\t-3\nloss\t-2\nangry\t-3\nscandal\t-3\nfail\t-2\n";
    write_text(&input.join("lexicon/valence.tsv"), valence)?;
    write_text(&input.join("lexicon/negators.txt"), "not\nnever\nno\n")?;
    write_text(&input.join("lexicon/boosters.tsv"), "very\t1\nextremely\t2\nslightly\t-1\n")?;

    let records: Vec<StoryRecord> = stories.into_iter().map(|(_, s)| s.record).collect();
    write_jsonl(&input.join("stories.jsonl"), &records)?;
    write_text(&input.join("labels.tsv"), &labels)?;

    let config = "\
seed = 42

[paths]
captions = \"input/captions\"
guide = \"input/guide.tsv\"
channels = \"input/channel_map.tsv\"
gazetteer = \"input/gazetteer.tsv\"
tag_lexicon = \"input/tag_lexicon.tsv\"
suffix_rules = \"input/suffix_rules.tsv\"
lexicon = \"input/lexicon\"
stories = \"input/stories.jsonl\"
labels = \"input/labels.tsv\"
professions = \"input/professions.tsv\"
work = \"out\"

[analytics]
min_support = 2
min_mentions = 5

[factor]
max_words = 200
";
    let config_path = dir.join("newsminer.toml");
    write_text(&config_path, config)?;
    Ok(ToyCorpus {
        config: config_path,
        work: dir.join("out"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_toy_corpus(a.path(), 7).unwrap();
        write_toy_corpus(b.path(), 7).unwrap();
        let ma = crate::records::write_manifest(&a.path().join("input")).unwrap();
        let mb = crate::records::write_manifest(&b.path().join("input")).unwrap();
        assert_eq!(ma, mb);
    }
}
