//! Tweet, follower-snapshot and debate-schedule loading, plus the per-tweet
//! covariate join that produces analysis rows.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{
    DateTime, Datelike, Duration, FixedOffset, NaiveDate, NaiveDateTime, Timelike, Utc, Weekday,
};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub likes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowerSnapshot {
    pub observed_at: DateTime<Utc>,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Democratic,
    Republican,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Democratic => f.write_str("Democratic"),
            Party::Republican => f.write_str("Republican"),
        }
    }
}

impl FromStr for Party {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "democratic" | "democrat" | "dem" | "d" => Ok(Party::Democratic),
            "republican" | "rep" | "gop" | "r" => Ok(Party::Republican),
            other => Err(format!("unknown party `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DebateSchedule {
    entries: Vec<(NaiveDate, Party)>,
}

impl DebateSchedule {
    pub fn new(entries: Vec<(NaiveDate, Party)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(date, party) in &entries {
            if !seen.insert((date, party)) {
                return Err(Error::DuplicateDebate {
                    date: date.to_string(),
                    party: party.to_string(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(NaiveDate, Party)] {
        &self.entries
    }

    /// True when `date` is a debate day for `party` or the day after one.
    pub fn in_window(&self, date: NaiveDate, party: Party) -> bool {
        self.entries.iter().any(|&(d, p)| {
            p == party && (d == date || d.succ_opt().is_some_and(|next| next == date))
        })
    }
}

/// Per-tweet covariates derived from the local calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariateFlags {
    pub local_hour: u32,
    pub is_weekend: bool,
    pub dem_debate: bool,
    pub rep_debate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub tweet: Tweet,
    /// Follower count in millions; `None` when no snapshot qualified.
    pub followers_millions: Option<f64>,
    pub local_hour: u32,
    pub is_weekend: bool,
    pub dem_debate: bool,
    pub rep_debate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetFormat {
    Jsonl,
    Csv,
}

impl TweetFormat {
    /// Guess the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => TweetFormat::Csv,
            _ => TweetFormat::Jsonl,
        }
    }
}

impl FromStr for TweetFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(TweetFormat::Jsonl),
            "csv" => Ok(TweetFormat::Csv),
            other => Err(format!("unknown tweet format `{other}`")),
        }
    }
}

pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        return Some(ts.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc());
        }
    }
    None
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn parse_count(raw: &str, line: usize, field: &str) -> Result<u64> {
    let value: i64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::malformed(line, field, format!("`{raw}` is not an integer")))?;
    if value < 0 {
        return Err(Error::NegativeCount { line });
    }
    Ok(value as u64)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_tweets(path: &Path, format: TweetFormat) -> Result<Vec<Tweet>> {
    let content = read_to_string(path)?;
    match format {
        TweetFormat::Jsonl => parse_tweets_jsonl(&content),
        TweetFormat::Csv => parse_tweets_csv(&content),
    }
}

fn json_string(
    obj: &serde_json::Map<String, serde_json::Value>,
    line: usize,
    field: &str,
) -> Result<String> {
    match obj.get(field) {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(Error::malformed(
            line,
            field,
            format!("expected a string, got {other}"),
        )),
        None => Err(Error::malformed(line, field, "missing")),
    }
}

pub fn parse_tweets_jsonl(content: &str) -> Result<Vec<Tweet>> {
    let mut tweets = Vec::new();
    let mut ids = HashSet::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw)
            .map_err(|e| Error::malformed(line, "record", e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::malformed(line, "record", "expected a JSON object"))?;
        let id = json_string(obj, line, "id")?;
        let text = json_string(obj, line, "text")?;
        let created_raw = json_string(obj, line, "created_at")?;
        let created_at = parse_timestamp(&created_raw).ok_or_else(|| {
            Error::malformed(
                line,
                "created_at",
                format!("`{created_raw}` is not ISO-8601"),
            )
        })?;
        let likes = match obj.get("likes") {
            Some(serde_json::Value::Number(n)) => parse_count(&n.to_string(), line, "likes")?,
            Some(serde_json::Value::String(s)) => parse_count(s, line, "likes")?,
            Some(other) => {
                return Err(Error::malformed(
                    line,
                    "likes",
                    format!("expected an integer, got {other}"),
                ))
            }
            None => return Err(Error::malformed(line, "likes", "missing")),
        };
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        tweets.push(Tweet {
            id,
            text,
            created_at,
            likes,
        });
    }
    Ok(tweets)
}

fn csv_field<'a>(
    record: &'a csv::StringRecord,
    headers: &csv::StringRecord,
    line: usize,
    field: &str,
) -> Result<&'a str> {
    let pos = headers
        .iter()
        .position(|h| h.trim() == field)
        .ok_or_else(|| Error::malformed(1, field, "missing column in header"))?;
    record
        .get(pos)
        .ok_or_else(|| Error::malformed(line, field, "missing"))
}

fn csv_records(content: &str) -> Result<(csv::StringRecord, Vec<(usize, csv::StringRecord)>)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(content.as_bytes());
    let headers = reader.headers()?.clone();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.push((line, record));
    }
    Ok((headers, out))
}

pub fn parse_tweets_csv(content: &str) -> Result<Vec<Tweet>> {
    if content.trim().is_empty() {
        return Ok(Vec::new());
    }
    let (headers, records) = csv_records(content)?;
    let mut tweets = Vec::with_capacity(records.len());
    let mut ids = HashSet::new();
    for (line, record) in records {
        let id = csv_field(&record, &headers, line, "id")?.to_string();
        let text = csv_field(&record, &headers, line, "text")?.to_string();
        let created_raw = csv_field(&record, &headers, line, "created_at")?;
        let created_at = parse_timestamp(created_raw).ok_or_else(|| {
            Error::malformed(
                line,
                "created_at",
                format!("`{created_raw}` is not ISO-8601"),
            )
        })?;
        let likes = parse_count(csv_field(&record, &headers, line, "likes")?, line, "likes")?;
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        tweets.push(Tweet {
            id,
            text,
            created_at,
            likes,
        });
    }
    Ok(tweets)
}

pub fn load_snapshots(path: &Path) -> Result<Vec<FollowerSnapshot>> {
    parse_snapshots_csv(&read_to_string(path)?)
}

pub fn parse_snapshots_csv(content: &str) -> Result<Vec<FollowerSnapshot>> {
    if content.trim().is_empty() {
        return Ok(Vec::new());
    }
    let (headers, records) = csv_records(content)?;
    records
        .into_iter()
        .map(|(line, record)| {
            let raw = csv_field(&record, &headers, line, "observed_at")?;
            let observed_at = parse_timestamp(raw).ok_or_else(|| {
                Error::malformed(line, "observed_at", format!("`{raw}` is not ISO-8601"))
            })?;
            let count = parse_count(csv_field(&record, &headers, line, "count")?, line, "count")?;
            Ok(FollowerSnapshot { observed_at, count })
        })
        .collect()
}

pub fn load_schedule(path: &Path) -> Result<DebateSchedule> {
    parse_schedule_csv(&read_to_string(path)?)
}

pub fn parse_schedule_csv(content: &str) -> Result<DebateSchedule> {
    if content.trim().is_empty() {
        return DebateSchedule::new(Vec::new());
    }
    let (headers, records) = csv_records(content)?;
    let entries = records
        .into_iter()
        .map(|(line, record)| {
            let raw = csv_field(&record, &headers, line, "date")?;
            let date = NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d")
                .map_err(|e| Error::malformed(line, "date", e.to_string()))?;
            let party = csv_field(&record, &headers, line, "party")?
                .parse::<Party>()
                .map_err(|e| Error::malformed(line, "party", e))?;
            Ok((date, party))
        })
        .collect::<Result<Vec<_>>>()?;
    DebateSchedule::new(entries)
}

pub fn write_tweets_jsonl(path: &Path, tweets: &[Tweet]) -> Result<()> {
    let mut buf = Vec::new();
    for t in tweets {
        let obj = serde_json::json!({
            "id": t.id,
            "text": t.text,
            "created_at": format_timestamp(&t.created_at),
            "likes": t.likes,
        });
        serde_json::to_writer(&mut buf, &obj)?;
        buf.push(b'\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn write_tweets_csv(path: &Path, tweets: &[Tweet]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "text", "created_at", "likes"])?;
    for t in tweets {
        w.write_record([
            t.id.as_str(),
            t.text.as_str(),
            &format_timestamp(&t.created_at),
            &t.likes.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_snapshots_csv(path: &Path, snapshots: &[FollowerSnapshot]) -> Result<()> {
    let mut out = String::from("observed_at,count\n");
    for s in snapshots {
        out.push_str(&format!(
            "{},{}\n",
            format_timestamp(&s.observed_at),
            s.count
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_schedule_csv(path: &Path, schedule: &DebateSchedule) -> Result<()> {
    let mut out = String::from("date,party\n");
    for (date, party) in schedule.entries() {
        out.push_str(&format!("{},{}\n", date.format("%Y-%m-%d"), party));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Pair each tweet with the follower count (in millions) of the most recent
/// snapshot taken at or before the tweet. Snapshots older than
/// `max_staleness` do not qualify; `None` means no staleness limit.
pub fn join_followers(
    tweets: &[Tweet],
    snapshots: &[FollowerSnapshot],
    max_staleness: Option<Duration>,
) -> Vec<(Tweet, Option<f64>)> {
    if snapshots.is_empty() {
        warn!("no follower snapshots supplied; every tweet lacks a follower count");
    }
    let mut sorted = snapshots.to_vec();
    sorted.sort_by_key(|s| s.observed_at);
    tweets
        .iter()
        .map(|t| {
            (
                t.clone(),
                follower_value(&sorted, t.created_at, max_staleness),
            )
        })
        .collect()
}

fn follower_value(
    sorted: &[FollowerSnapshot],
    at: DateTime<Utc>,
    max_staleness: Option<Duration>,
) -> Option<f64> {
    let idx = sorted.partition_point(|s| s.observed_at <= at);
    let snap = sorted.get(idx.checked_sub(1)?)?;
    if let Some(limit) = max_staleness {
        if at - snap.observed_at > limit {
            return None;
        }
    }
    Some(snap.count as f64 / 1e6)
}

pub fn flag_covariates(
    tweet: &Tweet,
    schedule: &DebateSchedule,
    offset: FixedOffset,
) -> CovariateFlags {
    let local = tweet.created_at.with_timezone(&offset);
    let date = local.date_naive();
    CovariateFlags {
        local_hour: local.hour(),
        is_weekend: matches!(local.weekday(), Weekday::Sat | Weekday::Sun),
        dem_debate: schedule.in_window(date, Party::Democratic),
        rep_debate: schedule.in_window(date, Party::Republican),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    /// Fixed offset from UTC, in minutes, applied before deriving calendar covariates.
    pub utc_offset_minutes: i32,
    /// Maximum age of a qualifying follower snapshot, in hours; `None` = unlimited.
    pub max_staleness_hours: Option<f64>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            utc_offset_minutes: 0,
            max_staleness_hours: Some(48.0),
        }
    }
}

impl IngestConfig {
    pub fn offset(&self) -> Result<FixedOffset> {
        FixedOffset::east_opt(self.utc_offset_minutes * 60).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "utc offset {} minutes out of range",
                self.utc_offset_minutes
            ))
        })
    }

    pub fn max_staleness(&self) -> Option<Duration> {
        self.max_staleness_hours
            .map(|h| Duration::milliseconds((h * 3_600_000.0).round() as i64))
    }
}

/// Join followers and calendar flags onto every tweet. All tweets are kept;
/// rows whose follower value is absent are dropped later by the design step.
pub fn build_rows(
    tweets: &[Tweet],
    snapshots: &[FollowerSnapshot],
    schedule: &DebateSchedule,
    config: &IngestConfig,
) -> Result<Vec<AnalysisRow>> {
    let offset = config.offset()?;
    Ok(join_followers(tweets, snapshots, config.max_staleness())
        .into_iter()
        .map(|(tweet, followers_millions)| {
            let flags = flag_covariates(&tweet, schedule, offset);
            AnalysisRow {
                tweet,
                followers_millions,
                local_hour: flags.local_hour,
                is_weekend: flags.is_weekend,
                dem_debate: flags.dem_debate,
                rep_debate: flags.rep_debate,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn tweet_at(id: &str, secs: i64) -> Tweet {
        Tweet {
            id: id.into(),
            text: String::new(),
            created_at: Utc.timestamp_opt(secs, 0).unwrap(),
            likes: 0,
        }
    }

    fn snaps() -> Vec<FollowerSnapshot> {
        vec![
            FollowerSnapshot {
                observed_at: Utc.timestamp_opt(200, 0).unwrap(),
                count: 4_600_000,
            },
            FollowerSnapshot {
                observed_at: Utc.timestamp_opt(100, 0).unwrap(),
                count: 4_500_000,
            },
        ]
    }

    #[test]
    fn empty_file_gives_no_tweets() {
        assert!(parse_tweets_jsonl("").unwrap().is_empty());
        assert!(parse_tweets_jsonl("\n  \n").unwrap().is_empty());
        assert!(parse_tweets_csv("").unwrap().is_empty());
    }

    #[test]
    fn jsonl_in_file_order() {
        let src = r#"{"id":"b","text":"hi","created_at":"2015-10-13T12:00:00Z","likes":5}

{"id":"a","text":"yo","created_at":"2015-10-14T01:02:03+02:00","likes":0}
"#;
        let tweets = parse_tweets_jsonl(src).unwrap();
        assert_eq!(tweets.len(), 2);
        assert_eq!(tweets[0].id, "b");
        assert_eq!(
            tweets[1].created_at,
            Utc.with_ymd_and_hms(2015, 10, 13, 23, 2, 3).unwrap()
        );
    }

    #[test]
    fn negative_likes_names_line() {
        let src = "{\"id\":\"a\",\"text\":\"x\",\"created_at\":\"2015-10-13T12:00:00Z\",\"likes\":1}\n{\"id\":\"b\",\"text\":\"x\",\"created_at\":\"2015-10-13T12:00:00Z\",\"likes\":-3}\n";
        let err = parse_tweets_jsonl(src).unwrap_err();
        assert_eq!(err.to_string(), "negative count, line 2");

        let csv = "id,text,created_at,likes\na,x,2015-10-13T12:00:00Z,-3\n";
        let err = parse_tweets_csv(csv).unwrap_err();
        assert_eq!(err.to_string(), "negative count, line 2");
    }

    #[test]
    fn malformed_and_duplicate_records() {
        let src = "{\"id\":\"a\",\"text\":\"x\",\"created_at\":\"yesterday\",\"likes\":1}\n";
        match parse_tweets_jsonl(src).unwrap_err() {
            Error::Malformed { line, field, .. } => {
                assert_eq!(line, 1);
                assert_eq!(field, "created_at");
            }
            other => panic!("unexpected {other}"),
        }
        let src = "{\"id\":\"a\",\"text\":\"x\",\"created_at\":\"2015-10-13T12:00:00Z\"}\n";
        assert!(
            matches!(parse_tweets_jsonl(src), Err(Error::Malformed { ref field, .. }) if field == "likes")
        );
        let dup =
            "id,text,created_at,likes\na,x,2015-10-13T12:00:00Z,1\na,y,2015-10-13T12:00:00Z,2\n";
        assert!(matches!(parse_tweets_csv(dup), Err(Error::DuplicateId(ref id)) if id == "a"));
    }

    #[test]
    fn csv_matches_jsonl() {
        let tweets = vec![
            Tweet {
                id: "1".into(),
                text: "Thank you, \"Iowa\"!".into(),
                created_at: Utc.timestamp_opt(1_444_000_000, 0).unwrap(),
                likes: 741,
            },
            Tweet {
                id: "2".into(),
                text: "line\nbreak".into(),
                created_at: Utc.timestamp_opt(1_444_100_000, 0).unwrap(),
                likes: 30612,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let j = dir.path().join("t.jsonl");
        let c = dir.path().join("t.csv");
        write_tweets_jsonl(&j, &tweets).unwrap();
        write_tweets_csv(&c, &tweets).unwrap();
        assert_eq!(load_tweets(&j, TweetFormat::Jsonl).unwrap(), tweets);
        assert_eq!(load_tweets(&c, TweetFormat::Csv).unwrap(), tweets);
    }

    #[test]
    fn join_most_recent_prior() {
        let tweets = vec![tweet_at("a", 150), tweet_at("b", 50), tweet_at("c", 200)];
        let joined = join_followers(&tweets, &snaps(), None);
        assert_eq!(joined[0].1, Some(4.5));
        assert_eq!(joined[1].1, None);
        assert_eq!(joined[2].1, Some(4.6));
    }

    #[test]
    fn join_respects_staleness_and_empty_snapshots() {
        let tweets = vec![tweet_at("a", 150), tweet_at("b", 260)];
        let joined = join_followers(&tweets, &snaps(), Some(Duration::seconds(50)));
        assert_eq!(joined[0].1, Some(4.5));
        assert_eq!(joined[1].1, None);
        let joined = join_followers(&tweets, &[], None);
        assert!(joined.iter().all(|(_, v)| v.is_none()));
    }

    #[test]
    fn debate_window_and_calendar_flags() {
        let schedule = DebateSchedule::new(vec![(
            NaiveDate::from_ymd_opt(2015, 10, 13).unwrap(),
            Party::Democratic,
        )])
        .unwrap();
        let utc = FixedOffset::east_opt(0).unwrap();
        let mut t = tweet_at("a", 0);
        t.created_at = Utc.with_ymd_and_hms(2015, 10, 14, 9, 0, 0).unwrap();
        let f = flag_covariates(&t, &schedule, utc);
        assert!(f.dem_debate && !f.rep_debate);
        t.created_at = Utc.with_ymd_and_hms(2015, 10, 15, 9, 0, 0).unwrap();
        assert!(!flag_covariates(&t, &schedule, utc).dem_debate);

        // 2015-10-17 is a Saturday.
        t.created_at = Utc.with_ymd_and_hms(2015, 10, 17, 14, 7, 0).unwrap();
        let f = flag_covariates(&t, &schedule, utc);
        assert!(f.is_weekend);
        assert_eq!(f.local_hour, 14);

        // Offset shifts the local date: 03:00 UTC on the 16th is the 15th in UTC-5.
        let est = FixedOffset::west_opt(5 * 3600).unwrap();
        t.created_at = Utc.with_ymd_and_hms(2015, 10, 15, 3, 0, 0).unwrap();
        let f = flag_covariates(&t, &schedule, est);
        assert!(f.dem_debate);
        assert_eq!(f.local_hour, 22);
    }

    #[test]
    fn schedule_rejects_duplicates() {
        let d = NaiveDate::from_ymd_opt(2015, 10, 13).unwrap();
        assert!(DebateSchedule::new(vec![(d, Party::Democratic), (d, Party::Republican)]).is_ok());
        assert!(DebateSchedule::new(vec![(d, Party::Democratic), (d, Party::Democratic)]).is_err());
        let parsed =
            parse_schedule_csv("date,party\n2015-10-13,Democratic\n2015-10-28,republican\n")
                .unwrap();
        assert_eq!(parsed.entries().len(), 2);
    }

    proptest! {
        #[test]
        fn join_is_monotone_and_accounts_for_every_tweet(
            mut counts in proptest::collection::vec(0u64..10_000_000, 1..20),
            times in proptest::collection::vec(0i64..100_000, 1..40),
            staleness in proptest::option::of(0i64..20_000),
        ) {
            counts.sort();
            let snapshots: Vec<_> = counts.iter().enumerate()
                .map(|(i, &c)| FollowerSnapshot { observed_at: Utc.timestamp_opt(i as i64 * 5_000, 0).unwrap(), count: c })
                .collect();
            let tweets: Vec<_> = times.iter().enumerate().map(|(i, &s)| tweet_at(&i.to_string(), s)).collect();
            let joined = join_followers(&tweets, &snapshots, None);
            let present = joined.iter().filter(|(_, v)| v.is_some()).count();
            let absent = joined.iter().filter(|(_, v)| v.is_none()).count();
            prop_assert_eq!(present + absent, tweets.len());

            let mut order: Vec<_> = joined.iter().collect();
            order.sort_by_key(|(t, _)| t.created_at);
            for pair in order.windows(2) {
                if let (Some(a), Some(b)) = (pair[0].1, pair[1].1) {
                    prop_assert!(a <= b);
                }
            }
            let limited = join_followers(&tweets, &snapshots, staleness.map(Duration::seconds));
            prop_assert_eq!(limited.len(), tweets.len());
        }

        #[test]
        fn flags_depend_only_on_local_date(day in 0i64..400, a in 0i64..86_400, b in 0i64..86_400, offset_h in -12i32..13) {
            let schedule = DebateSchedule::new(vec![
                (NaiveDate::from_ymd_opt(2015, 10, 13).unwrap(), Party::Democratic),
                (NaiveDate::from_ymd_opt(2015, 11, 10).unwrap(), Party::Republican),
            ]).unwrap();
            let offset = FixedOffset::east_opt(offset_h * 3600).unwrap();
            let base = 1_420_070_400 + day * 86_400 - offset_h as i64 * 3600;
            let fa = flag_covariates(&tweet_at("a", base + a), &schedule, offset);
            let fb = flag_covariates(&tweet_at("b", base + b), &schedule, offset);
            prop_assert_eq!(fa.dem_debate, fb.dem_debate);
            prop_assert_eq!(fa.rep_debate, fb.rep_debate);
            prop_assert_eq!(fa.is_weekend, fb.is_weekend);
        }
    }
}
