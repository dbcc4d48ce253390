//! Caption stream ingestion.
//!
//! Raw caption files are line oriented: `[<seconds>.<millis>]<whitespace><payload>`.
//! Each channel is mapped to a network through a channel map, and each instant
//! is mapped to a program (and therefore a genre) through the programming
//! guide. Only lines that fall inside news programs survive partitioning.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Milliseconds since the Unix epoch.
pub type Millis = i64;

pub const MS_PER_SECOND: Millis = 1_000;
pub const MS_PER_HOUR: Millis = 3_600_000;
pub const MS_PER_DAY: Millis = 86_400_000;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unmapped channel `{0}`")]
    UnmappedChannel(String),
    #[error("unknown genre `{0}`")]
    UnknownGenre(String),
    #[error("invalid provider id `{0}` (expected `network:genre`)")]
    InvalidProvider(String),
    #[error("{file}:{line}: {reason}")]
    Table {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("guide entry for `{channel}` at {start}..{end}: {reason}")]
    Guide {
        channel: String,
        start: Millis,
        end: Millis,
        reason: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One timestamped caption payload from one channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionLine {
    pub ts_ms: Millis,
    pub channel_id: String,
    pub text: String,
}

impl CaptionLine {
    /// Renders the line back to the `[sec.mmm] text` caption form.
    pub fn to_caption_form(&self) -> String {
        format!("[{}] {}", format_timestamp(self.ts_ms), self.text)
    }
}

/// Formats milliseconds as `<seconds>.<millis>` with exactly three decimals.
pub fn format_timestamp(ts_ms: Millis) -> String {
    format!("{}.{:03}", ts_ms / MS_PER_SECOND, ts_ms % MS_PER_SECOND)
}

/// A caption line that could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reject {
    /// 1-based line number in the input blob.
    pub line_no: usize,
    pub content: String,
    pub reason: String,
}

/// A parsed line whose timestamp is earlier than its predecessor's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderViolation {
    pub line_no: usize,
    pub previous_ts: Millis,
    pub ts: Millis,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedStream {
    pub lines: Vec<CaptionLine>,
    pub rejects: Vec<Reject>,
    /// Out-of-order timestamps. Lines are kept in input order regardless.
    pub order_violations: Vec<OrderViolation>,
}

/// Parses a timestamp of the form `<digits>[.<1-3 digits>]` into milliseconds.
pub fn parse_timestamp(raw: &str) -> Result<Millis, String> {
    let (secs, frac) = match raw.split_once('.') {
        Some((s, f)) => (s, f),
        None => (raw, ""),
    };
    if secs.is_empty() || !secs.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("timestamp `{raw}` is not a non-negative decimal"));
    }
    if raw.contains('.') && frac.is_empty() {
        return Err(format!("timestamp `{raw}` has an empty fraction"));
    }
    if frac.len() > 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("timestamp `{raw}` needs at most millisecond precision"));
    }
    let secs: Millis = secs
        .parse()
        .map_err(|_| format!("timestamp `{raw}` is out of range"))?;
    let mut millis: Millis = 0;
    for (i, b) in frac.bytes().enumerate() {
        millis += Millis::from(b - b'0') * 10_i64.pow(2 - i as u32);
    }
    secs.checked_mul(MS_PER_SECOND)
        .and_then(|v| v.checked_add(millis))
        .ok_or_else(|| format!("timestamp `{raw}` is out of range"))
}

fn parse_caption_line(line: &str) -> Result<(Millis, String), String> {
    let rest = line
        .strip_prefix('[')
        .ok_or_else(|| "line does not start with `[`".to_string())?;
    let (stamp, payload) = rest
        .split_once(']')
        .ok_or_else(|| "unterminated timestamp".to_string())?;
    let ts = parse_timestamp(stamp.trim())?;
    if ts <= 0 {
        return Err("timestamp must be positive".into());
    }
    if !payload.is_empty() && !payload.starts_with(char::is_whitespace) {
        return Err("missing whitespace after timestamp".into());
    }
    let text = payload.trim();
    if text.is_empty() {
        return Err("empty payload".into());
    }
    Ok((ts, text.to_string()))
}

/// Parses a raw caption blob for one channel.
///
/// Blank lines are ignored. Every other line either becomes a [`CaptionLine`]
/// or a [`Reject`], so `lines.len() + rejects.len()` equals the number of
/// non-blank input lines.
pub fn parse_caption_stream(raw: &str, channel_id: &str) -> ParsedStream {
    let mut out = ParsedStream::default();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_caption_line(line.trim_start_matches('\u{feff}')) {
            Ok((ts_ms, text)) => {
                if let Some(prev) = out.lines.last() {
                    if ts_ms < prev.ts_ms {
                        out.order_violations.push(OrderViolation {
                            line_no: idx + 1,
                            previous_ts: prev.ts_ms,
                            ts: ts_ms,
                        });
                    }
                }
                out.lines.push(CaptionLine {
                    ts_ms,
                    channel_id: channel_id.to_string(),
                    text,
                });
            }
            Err(reason) => out.rejects.push(Reject {
                line_no: idx + 1,
                content: line.to_string(),
                reason,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Genre {
    General,
    Sports,
    Business,
    Entertainment,
}

impl Genre {
    pub const ALL: [Genre; 4] = [
        Genre::General,
        Genre::Sports,
        Genre::Business,
        Genre::Entertainment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::General => "general",
            Genre::Sports => "sports",
            Genre::Business => "business",
            Genre::Entertainment => "entertainment",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Genre {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "general" | "gen" => Ok(Genre::General),
            "sports" | "sport" | "spt" => Ok(Genre::Sports),
            "business" | "biz" => Ok(Genre::Business),
            "entertainment" | "ent" => Ok(Genre::Entertainment),
            _ => Err(IngestError::UnknownGenre(s.to_string())),
        }
    }
}

impl Serialize for Genre {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Genre {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// A news provider: a network broadcasting one genre of news.
///
/// Serialized as its id, `network:genre`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provider {
    pub network: String,
    pub genre: Genre,
}

impl Provider {
    pub fn new(network: impl Into<String>, genre: Genre) -> Self {
        Provider {
            network: network.into(),
            genre,
        }
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.network, self.genre)
    }
}

impl FromStr for Provider {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (network, genre) = s
            .rsplit_once(':')
            .ok_or_else(|| IngestError::InvalidProvider(s.to_string()))?;
        if network.is_empty() {
            return Err(IngestError::InvalidProvider(s.to_string()));
        }
        Ok(Provider::new(network, genre.parse()?))
    }
}

impl Serialize for Provider {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Provider {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One program slot of the programming guide, covering `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuideEntry {
    pub channel_id: String,
    pub start: Millis,
    pub end: Millis,
    pub program_name: String,
    pub genre: Genre,
    pub is_news: bool,
}

/// Programming guide indexed per channel, entries sorted by start time.
#[derive(Debug, Clone, Default)]
pub struct Guide {
    by_channel: BTreeMap<String, Vec<GuideEntry>>,
}

impl Guide {
    /// Builds a guide, rejecting empty intervals and overlapping entries on a channel.
    pub fn new(entries: Vec<GuideEntry>) -> Result<Self, IngestError> {
        let mut by_channel: BTreeMap<String, Vec<GuideEntry>> = BTreeMap::new();
        for e in entries {
            if e.start >= e.end {
                return Err(IngestError::Guide {
                    channel: e.channel_id,
                    start: e.start,
                    end: e.end,
                    reason: "start must precede end".into(),
                });
            }
            by_channel.entry(e.channel_id.clone()).or_default().push(e);
        }
        for list in by_channel.values_mut() {
            list.sort_by_key(|e| (e.start, e.end));
            for pair in list.windows(2) {
                if pair[1].start < pair[0].end {
                    return Err(IngestError::Guide {
                        channel: pair[1].channel_id.clone(),
                        start: pair[1].start,
                        end: pair[1].end,
                        reason: format!("overlaps `{}`", pair[0].program_name),
                    });
                }
            }
        }
        Ok(Guide { by_channel })
    }

    /// The entry whose half-open interval contains `ts`, if any.
    pub fn lookup(&self, channel_id: &str, ts: Millis) -> Option<&GuideEntry> {
        let list = self.by_channel.get(channel_id)?;
        // first entry starting strictly after ts; the candidate is its predecessor
        let idx = list.partition_point(|e| e.start <= ts);
        let entry = list.get(idx.checked_sub(1)?)?;
        (ts < entry.end).then_some(entry)
    }

    pub fn entries(&self) -> impl Iterator<Item = &GuideEntry> {
        self.by_channel.values().flatten()
    }
}

/// Maps channel ids to network names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChannelMap(pub BTreeMap<String, String>);

impl ChannelMap {
    pub fn network(&self, channel_id: &str) -> Option<&str> {
        self.0.get(channel_id).map(String::as_str)
    }
}

impl FromIterator<(String, String)> for ChannelMap {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        ChannelMap(iter.into_iter().collect())
    }
}

/// Resolves the news provider airing on `channel_id` at `ts`.
///
/// Returns `Ok(None)` when no guide entry covers the instant or the program is
/// not news.
pub fn resolve_provider(
    channel_id: &str,
    ts: Millis,
    guide: &Guide,
    channels: &ChannelMap,
) -> Result<Option<Provider>, IngestError> {
    let network = channels
        .network(channel_id)
        .ok_or_else(|| IngestError::UnmappedChannel(channel_id.to_string()))?;
    Ok(guide
        .lookup(channel_id, ts)
        .filter(|e| e.is_news)
        .map(|e| Provider::new(network, e.genre)))
}

/// Groups caption lines by provider, dropping lines outside news programs.
pub fn partition_by_provider(
    lines: &[CaptionLine],
    guide: &Guide,
    channels: &ChannelMap,
) -> Result<BTreeMap<Provider, Vec<CaptionLine>>, IngestError> {
    let mut out: BTreeMap<Provider, Vec<CaptionLine>> = BTreeMap::new();
    for line in lines {
        if let Some(p) = resolve_provider(&line.channel_id, line.ts_ms, guide, channels)? {
            out.entry(p).or_default().push(line.clone());
        }
    }
    Ok(out)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Iterates non-blank, non-comment TSV rows as `(1-based line, fields)`.
pub(crate) fn tsv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split('\t').collect()))
        }
    })
}

pub fn parse_channel_map(text: &str, file: &str) -> Result<ChannelMap, IngestError> {
    let mut map = BTreeMap::new();
    for (line, fields) in tsv_rows(text) {
        if fields.len() != 2 {
            return Err(IngestError::Table {
                file: file.into(),
                line,
                reason: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        map.insert(fields[0].trim().to_string(), fields[1].trim().to_string());
    }
    Ok(ChannelMap(map))
}

pub fn load_channel_map(path: &Path) -> Result<ChannelMap, IngestError> {
    parse_channel_map(&read_to_string(path)?, &path.display().to_string())
}

pub fn parse_guide(text: &str, file: &str) -> Result<Guide, IngestError> {
    let table_err = |line: usize, reason: String| IngestError::Table {
        file: file.into(),
        line,
        reason,
    };
    let mut entries = Vec::new();
    for (line, f) in tsv_rows(text) {
        if f.len() != 6 {
            return Err(table_err(line, format!("expected 6 columns, found {}", f.len())));
        }
        let start = f[1]
            .trim()
            .parse()
            .map_err(|_| table_err(line, format!("bad start_ms `{}`", f[1])))?;
        let end = f[2]
            .trim()
            .parse()
            .map_err(|_| table_err(line, format!("bad end_ms `{}`", f[2])))?;
        let genre = f[4]
            .parse()
            .map_err(|e: IngestError| table_err(line, e.to_string()))?;
        let is_news = match f[5].trim() {
            "1" => true,
            "0" => false,
            other => return Err(table_err(line, format!("is_news must be 0 or 1, got `{other}`"))),
        };
        entries.push(GuideEntry {
            channel_id: f[0].trim().to_string(),
            start,
            end,
            program_name: f[3].trim().to_string(),
            genre,
            is_news,
        });
    }
    Guide::new(entries)
}

pub fn load_guide(path: &Path) -> Result<Guide, IngestError> {
    parse_guide(&read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "[1339302660.000]    WHAT MORE CAN YOU ASK FOR? \n\
                           [1339302662.169]    >> THIS IS WHAT NBA\n\
                           [1339302663.203]    BASKETBALL IS ABOUT.\n";

    #[test]
    fn parses_the_example_block() {
        let parsed = parse_caption_stream(EXAMPLE, "cnn");
        assert!(parsed.rejects.is_empty());
        let ts: Vec<_> = parsed.lines.iter().map(|l| l.ts_ms).collect();
        assert_eq!(ts, vec![1_339_302_660_000, 1_339_302_662_169, 1_339_302_663_203]);
        assert_eq!(parsed.lines[0].text, "WHAT MORE CAN YOU ASK FOR?");
        assert_eq!(parsed.lines[1].text, ">> THIS IS WHAT NBA");
    }

    #[test]
    fn empty_input_is_empty() {
        assert_eq!(parse_caption_stream("", "x"), ParsedStream::default());
    }

    #[test]
    fn malformed_lines_are_rejected_with_line_numbers() {
        let parsed = parse_caption_stream("[10.500] A\n[notatime] B\n[11.000] C", "x");
        let ts: Vec<_> = parsed.lines.iter().map(|l| l.ts_ms).collect();
        assert_eq!(ts, vec![10_500, 11_000]);
        assert_eq!(parsed.rejects.len(), 1);
        assert_eq!(parsed.rejects[0].line_no, 2);
    }

    #[test]
    fn timestamp_forms() {
        assert_eq!(parse_timestamp("12"), Ok(12_000));
        assert_eq!(parse_timestamp("12.5"), Ok(12_500));
        assert_eq!(parse_timestamp("12.05"), Ok(12_050));
        assert!(parse_timestamp("-1.000").is_err());
        assert!(parse_timestamp("1.0001").is_err());
        assert!(parse_timestamp("1.").is_err());
        assert!(parse_timestamp("").is_err());
    }

    #[test]
    fn zero_timestamp_and_blank_payload_rejected() {
        let parsed = parse_caption_stream("[0.000] A\n[1.000]    \n[2.000]B", "x");
        assert!(parsed.lines.is_empty());
        assert_eq!(parsed.rejects.len(), 3);
    }

    #[test]
    fn out_of_order_is_flagged_not_reordered() {
        let parsed = parse_caption_stream("[5.000] A\n[4.000] B\n[6.000] C", "x");
        let texts: Vec<_> = parsed.lines.iter().map(|l| l.text.as_str()).collect();
        assert_eq!(texts, ["A", "B", "C"]);
        assert_eq!(parsed.order_violations.len(), 1);
        assert_eq!(parsed.order_violations[0].line_no, 2);
    }

    fn guide() -> Guide {
        let e = |start, end, name: &str, genre, is_news| GuideEntry {
            channel_id: "cnn".into(),
            start,
            end,
            program_name: name.into(),
            genre,
            is_news,
        };
        Guide::new(vec![
            e(0, 1000, "World Sport", Genre::Sports, true),
            e(1000, 2000, "Movie", Genre::Entertainment, false),
            e(3000, 4000, "Newsroom", Genre::General, true),
        ])
        .unwrap()
    }

    fn channels() -> ChannelMap {
        [("cnn".to_string(), "CNN".to_string())].into_iter().collect()
    }

    #[test]
    fn resolves_providers_through_the_guide() {
        let (g, c) = (guide(), channels());
        assert_eq!(
            resolve_provider("cnn", 500, &g, &c).unwrap(),
            Some(Provider::new("CNN", Genre::Sports))
        );
        assert_eq!(resolve_provider("cnn", 1500, &g, &c).unwrap(), None);
        assert_eq!(resolve_provider("cnn", 2500, &g, &c).unwrap(), None);
        assert!(matches!(
            resolve_provider("bbc", 500, &g, &c),
            Err(IngestError::UnmappedChannel(ch)) if ch == "bbc"
        ));
    }

    #[test]
    fn boundary_belongs_to_later_program() {
        let (g, c) = (guide(), channels());
        assert_eq!(resolve_provider("cnn", 1000, &g, &c).unwrap(), None);
        assert_eq!(
            resolve_provider("cnn", 999, &g, &c).unwrap(),
            Some(Provider::new("CNN", Genre::Sports))
        );
        assert_eq!(resolve_provider("cnn", 4000, &g, &c).unwrap(), None);
    }

    #[test]
    fn overlapping_guide_rejected() {
        let e = |start, end| GuideEntry {
            channel_id: "a".into(),
            start,
            end,
            program_name: "p".into(),
            genre: Genre::General,
            is_news: true,
        };
        assert!(Guide::new(vec![e(0, 10), e(5, 20)]).is_err());
        assert!(Guide::new(vec![e(10, 10)]).is_err());
        assert!(Guide::new(vec![e(0, 10), e(10, 20)]).is_ok());
    }

    #[test]
    fn partition_alternating_news() {
        // news [0,1000), non-news [1000,2000), news [2000,3000) ...
        let entries = (0..6)
            .map(|i| GuideEntry {
                channel_id: "cnn".into(),
                start: i * 1000,
                end: (i + 1) * 1000,
                program_name: format!("p{i}"),
                genre: Genre::General,
                is_news: i % 2 == 0,
            })
            .collect();
        let g = Guide::new(entries).unwrap();
        let lines: Vec<_> = (0..6)
            .map(|i| CaptionLine {
                ts_ms: i * 1000 + 10,
                channel_id: "cnn".into(),
                text: format!("L{i}"),
            })
            .collect();
        let parts = partition_by_provider(&lines, &g, &channels()).unwrap();
        assert_eq!(parts.len(), 1);
        let texts: Vec<_> = parts.values().next().unwrap().iter().map(|l| &l.text).collect();
        assert_eq!(texts, ["L0", "L2", "L4"]);
    }

    #[test]
    fn same_network_two_genres_are_distinct_providers() {
        let mk = |ch: &str, genre| GuideEntry {
            channel_id: ch.into(),
            start: 0,
            end: 100,
            program_name: "n".into(),
            genre,
            is_news: true,
        };
        let g = Guide::new(vec![mk("cnn1", Genre::General), mk("cnn2", Genre::Entertainment)])
            .unwrap();
        let c: ChannelMap = [("cnn1", "CNN"), ("cnn2", "CNN")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let lines = vec![
            CaptionLine { ts_ms: 1, channel_id: "cnn1".into(), text: "A".into() },
            CaptionLine { ts_ms: 2, channel_id: "cnn2".into(), text: "B".into() },
        ];
        let parts = partition_by_provider(&lines, &g, &c).unwrap();
        let keys: Vec<_> = parts.keys().map(Provider::id).collect();
        assert_eq!(keys, ["CNN:general", "CNN:entertainment"]);
    }

    #[test]
    fn all_non_news_is_empty() {
        let g = Guide::new(vec![GuideEntry {
            channel_id: "cnn".into(),
            start: 0,
            end: 100,
            program_name: "movie".into(),
            genre: Genre::Entertainment,
            is_news: false,
        }])
        .unwrap();
        let lines = vec![CaptionLine { ts_ms: 5, channel_id: "cnn".into(), text: "X".into() }];
        assert!(partition_by_provider(&lines, &g, &channels()).unwrap().is_empty());
    }

    #[test]
    fn provider_id_round_trips() {
        let p: Provider = "Fox News:gen".parse().unwrap();
        assert_eq!(p, Provider::new("Fox News", Genre::General));
        assert_eq!(p.id(), "Fox News:general");
        assert_eq!(p.id().parse::<Provider>().unwrap(), p);
        assert!("nogenre".parse::<Provider>().is_err());
    }

    #[test]
    fn guide_tsv() {
        let g = parse_guide("cnn\t0\t100\tWorld Sport\tsports\t1\n", "g").unwrap();
        assert_eq!(g.lookup("cnn", 50).unwrap().genre, Genre::Sports);
        assert!(parse_guide("cnn\t0\t100\tX\tsports\t2\n", "g").is_err());
        assert!(parse_guide("cnn\t0\t100\tX\tweather\t1\n", "g").is_err());
    }
}
