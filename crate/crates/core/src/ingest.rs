//! Normalized disturbance records.
//!
//! A [`RawRecord`] is one data row of an annual summary table, cells kept
//! verbatim. [`normalize_record`] turns it into an [`Event`] with parsed
//! timestamps and sentinel-aware measure values.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Column names of the normalized input schema, in canonical order.
pub const COLUMNS: [&str; 11] = [
    COL_YEAR,
    COL_DATE_BEGAN,
    COL_TIME_BEGAN,
    COL_DATE_RESTORED,
    COL_TIME_RESTORED,
    COL_AREA,
    COL_NERC_REGION,
    COL_ALERT_CRITERIA,
    COL_EVENT_TYPE,
    COL_DEMAND_LOSS,
    COL_CUSTOMERS,
];

pub const COL_YEAR: &str = "Year";
pub const COL_DATE_BEGAN: &str = "Date Event Began";
pub const COL_TIME_BEGAN: &str = "Time Event Began";
pub const COL_DATE_RESTORED: &str = "Date of Restoration";
pub const COL_TIME_RESTORED: &str = "Time of Restoration";
pub const COL_AREA: &str = "Area Affected";
pub const COL_NERC_REGION: &str = "NERC Region";
pub const COL_ALERT_CRITERIA: &str = "Alert Criteria";
pub const COL_EVENT_TYPE: &str = "Event Type";
pub const COL_DEMAND_LOSS: &str = "Demand Loss (MW)";
pub const COL_CUSTOMERS: &str = "Number of Customers Affected";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("unparsable {field} value {raw:?}")]
    UnparsableValue { field: SentinelField, raw: String },
    #[error("row {row_index}: invalid {column} {raw:?}")]
    InvalidDate {
        row_index: u32,
        column: &'static str,
        raw: String,
    },
    #[error("row {row_index}: year {year} outside accepted range {min}-{max}")]
    YearOutOfRange {
        row_index: u32,
        year: i32,
        min: i32,
        max: i32,
    },
    #[error("row {row_index}: alert criteria present for {year}, field exists only from {since}")]
    AlertCriteriaBeforeIntroduction { row_index: u32, year: i32, since: i32 },
    #[error("duplicate event id {0}")]
    DuplicateEventId(String),
}

/// One data row of an annual summary, cells trimmed of outer whitespace only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub year: i32,
    /// 1-based position among the data rows of the source file.
    pub row_index: u32,
    pub fields: Vec<(String, String)>,
}

impl RawRecord {
    pub fn get(&self, column: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(name, _)| name == column)
            .map(|(_, value)| value.as_str())
    }

    fn cell(&self, column: &str) -> &str {
        self.get(column).unwrap_or("")
    }
}

/// Which measure column a sentinel was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentinelField {
    /// Demand loss, in MW.
    Demand,
    /// Number of customers affected.
    Customers,
}

impl fmt::Display for SentinelField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SentinelField::Demand => "demand loss",
            SentinelField::Customers => "customers affected",
        })
    }
}

/// A demand-loss or customers-affected cell.
///
/// The reports mix numbers with the entries "Unknown", "N/A" and "None";
/// blank cells are kept apart as `Missing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SentinelValue {
    Zero,
    /// Strictly positive magnitude (MW or customer count).
    Positive(f64),
    Unknown,
    NotApplicable,
    NoneEntry,
    Missing,
}

impl SentinelValue {
    /// True for values that do not rule out a nonzero impact.
    pub fn is_possibly_nonzero(&self) -> bool {
        matches!(self, SentinelValue::Positive(_) | SentinelValue::Unknown)
    }
}

/// Parses a measure cell. Matching is case-insensitive over the trimmed text;
/// thousands separators are accepted in numbers.
pub fn parse_sentinel(raw: &str, field: SentinelField) -> Result<SentinelValue, IngestError> {
    let trimmed = raw.trim();
    let lowered = trimmed.to_lowercase();
    let value = match lowered.as_str() {
        "" => SentinelValue::Missing,
        "zero" => SentinelValue::Zero,
        "unknown" => SentinelValue::Unknown,
        "n/a" => SentinelValue::NotApplicable,
        "none" => SentinelValue::NoneEntry,
        other => {
            let digits: String = other.chars().filter(|c| *c != ',').collect();
            let numeric = !digits.is_empty()
                && digits.chars().any(|c| c.is_ascii_digit())
                && digits
                    .chars()
                    .all(|c| c.is_ascii_digit() || c == '.' || c == '+');
            match digits.parse::<f64>() {
                Ok(v) if numeric && v == 0.0 => SentinelValue::Zero,
                Ok(v) if numeric && v.is_finite() && v > 0.0 => SentinelValue::Positive(v),
                _ => {
                    return Err(IngestError::UnparsableValue {
                        field,
                        raw: raw.to_owned(),
                    })
                }
            }
        }
    };
    Ok(value)
}

/// Local wall-clock time at minute resolution. The time of day may be
/// unknown while the date is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Timestamp {
    year: i32,
    month: u8,
    day: u8,
    time: Option<(u8, u8)>,
}

impl Timestamp {
    pub fn new(year: i32, month: u8, day: u8, time: Option<(u8, u8)>) -> Option<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return None;
        }
        if let Some((h, m)) = time {
            if h > 23 || m > 59 {
                return None;
            }
        }
        Some(Timestamp {
            year,
            month,
            day,
            time,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn day(&self) -> u8 {
        self.day
    }

    pub fn time_of_day(&self) -> Option<(u8, u8)> {
        self.time
    }

    /// Strictly earlier than `other`. Times of day are compared only when
    /// both are known.
    pub fn is_before(&self, other: &Timestamp) -> bool {
        let a = (self.year, self.month, self.day);
        let b = (other.year, other.month, other.day);
        match a.cmp(&b) {
            core::cmp::Ordering::Less => true,
            core::cmp::Ordering::Greater => false,
            core::cmp::Ordering::Equal => match (self.time, other.time) {
                (Some(x), Some(y)) => x < y,
                _ => false,
            },
        }
    }

    fn date_string(&self) -> String {
        format!("{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 0,
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)?;
        if let Some((h, m)) = self.time {
            write!(f, "T{h:02}:{m:02}")?;
        }
        Ok(())
    }
}

/// Parses the `Display` form: `YYYY-MM-DD` or `YYYY-MM-DDTHH:MM`.
impl FromStr for Timestamp {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let (date, time) = match s.split_once('T') {
            Some((d, t)) => (d, Some(t)),
            None => (s, None),
        };
        let mut parts = date.splitn(3, '-');
        let year = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        let month = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        let day = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        let time = match time {
            Some(t) => Some(parse_clock(t).ok_or(())?),
            None => None,
        };
        Timestamp::new(year, month, day, time).ok_or(())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Timestamp;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a timestamp YYYY-MM-DD or YYYY-MM-DDTHH:MM")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Timestamp, E> {
                v.parse()
                    .map_err(|_| E::invalid_value(serde::de::Unexpected::Str(v), &self))
            }
        }
        deserializer.deserialize_str(Visitor)
    }
}

/// `H:MM` or `HH:MM`, 24-hour.
fn parse_clock(raw: &str) -> Option<(u8, u8)> {
    let (h, m) = raw.split_once(':')?;
    if h.is_empty() || h.len() > 2 || m.len() != 2 {
        return None;
    }
    if !h.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let (h, m) = (h.parse().ok()?, m.parse().ok()?);
    (h < 24 && m < 60).then_some((h, m))
}

/// `M/D/YYYY`.
fn parse_date(raw: &str) -> Option<(i32, u8, u8)> {
    let mut parts = raw.split('/');
    let (m, d, y) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || y.len() != 4 || m.is_empty() || d.is_empty() {
        return None;
    }
    if m.len() > 2 || d.len() > 2 {
        return None;
    }
    if !m.bytes().chain(d.bytes()).chain(y.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((y.parse().ok()?, m.parse().ok()?, d.parse().ok()?))
}

/// Date and time cells that mean "no value" rather than a malformed one.
fn is_unknown_token(raw: &str) -> bool {
    raw.is_empty()
        || ["unknown", "n/a", "none", "ongoing"]
            .iter()
            .any(|t| raw.eq_ignore_ascii_case(t))
}

fn parse_timestamp(
    row_index: u32,
    date_column: &'static str,
    date: &str,
    time_column: &'static str,
    time: &str,
) -> Result<Option<Timestamp>, IngestError> {
    let (date, time) = (date.trim(), time.trim());
    if is_unknown_token(date) {
        return Ok(None);
    }
    let invalid_date = || IngestError::InvalidDate {
        row_index,
        column: date_column,
        raw: date.to_owned(),
    };
    let (y, m, d) = parse_date(date).ok_or_else(invalid_date)?;
    let clock = if is_unknown_token(time) {
        None
    } else {
        Some(parse_clock(time).ok_or_else(|| IngestError::InvalidDate {
            row_index,
            column: time_column,
            raw: time.to_owned(),
        })?)
    };
    Timestamp::new(y, m, d, clock).map(Some).ok_or_else(invalid_date)
}

/// One normalized disturbance report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub event_id: String,
    pub year: i32,
    pub began: Option<Timestamp>,
    pub restored: Option<Timestamp>,
    pub area: String,
    pub nerc_region: String,
    pub raw_event_type: String,
    pub alert_criteria: Option<String>,
    pub demand_loss: SentinelValue,
    pub customers_affected: SentinelValue,
}

impl Event {
    /// Restoration strictly precedes the start, both being known.
    pub fn restored_before_began(&self) -> bool {
        match (self.began, self.restored) {
            (Some(b), Some(r)) => r.is_before(&b),
            _ => false,
        }
    }
}

/// Bounds applied while normalizing rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub min_year: i32,
    pub max_year: i32,
    /// First year in which the alert-criteria column exists.
    pub alert_criteria_since: i32,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            min_year: 2012,
            max_year: 2021,
            alert_criteria_since: 2015,
        }
    }
}

/// Stable identifier: `<year>-<row_index, 5 digits>-<8 hex digits of the
/// SHA-256 of the start date>`. Source files carry no native key.
pub fn event_id(year: i32, row_index: u32, began: Option<&Timestamp>) -> String {
    let date = began.map_or_else(|| "unknown".to_string(), Timestamp::date_string);
    let digest = Sha256::digest(date.as_bytes());
    let mut id = format!("{year}-{row_index:05}-");
    for byte in &digest[..4] {
        id.push_str(&format!("{byte:02x}"));
    }
    id
}

pub fn normalize_record(raw: &RawRecord, options: &NormalizeOptions) -> Result<Event, IngestError> {
    let row_index = raw.row_index;
    if raw.year < options.min_year || raw.year > options.max_year {
        return Err(IngestError::YearOutOfRange {
            row_index,
            year: raw.year,
            min: options.min_year,
            max: options.max_year,
        });
    }
    let began = parse_timestamp(
        row_index,
        COL_DATE_BEGAN,
        raw.cell(COL_DATE_BEGAN),
        COL_TIME_BEGAN,
        raw.cell(COL_TIME_BEGAN),
    )?;
    let restored = parse_timestamp(
        row_index,
        COL_DATE_RESTORED,
        raw.cell(COL_DATE_RESTORED),
        COL_TIME_RESTORED,
        raw.cell(COL_TIME_RESTORED),
    )?;
    let alert_criteria = Some(raw.cell(COL_ALERT_CRITERIA).trim())
        .filter(|s| !s.is_empty())
        .map(str::to_owned);
    if alert_criteria.is_some() && raw.year < options.alert_criteria_since {
        return Err(IngestError::AlertCriteriaBeforeIntroduction {
            row_index,
            year: raw.year,
            since: options.alert_criteria_since,
        });
    }
    Ok(Event {
        event_id: event_id(raw.year, row_index, began.as_ref()),
        year: raw.year,
        began,
        restored,
        area: raw.cell(COL_AREA).trim().to_owned(),
        nerc_region: raw.cell(COL_NERC_REGION).trim().to_owned(),
        raw_event_type: raw.cell(COL_EVENT_TYPE).trim().to_owned(),
        alert_criteria,
        demand_loss: parse_sentinel(raw.cell(COL_DEMAND_LOSS), SentinelField::Demand)?,
        customers_affected: parse_sentinel(raw.cell(COL_CUSTOMERS), SentinelField::Customers)?,
    })
}

/// Row accounting for one ingested file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub file: String,
    pub year: i32,
    /// Data rows read from the file.
    pub rows: usize,
    /// Rows skipped in lenient mode.
    pub rejected: usize,
}

/// Immutable set of events, sorted by `event_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetParts")]
pub struct EventDataset {
    events: Vec<Event>,
    provenance: Vec<SourceFile>,
    ingest_warnings: Vec<String>,
}

#[derive(Deserialize)]
struct DatasetParts {
    events: Vec<Event>,
    provenance: Vec<SourceFile>,
    ingest_warnings: Vec<String>,
}

impl TryFrom<DatasetParts> for EventDataset {
    type Error = IngestError;

    fn try_from(parts: DatasetParts) -> Result<Self, IngestError> {
        EventDataset::new(parts.events, parts.provenance, parts.ingest_warnings)
    }
}

impl EventDataset {
    pub fn new(
        mut events: Vec<Event>,
        provenance: Vec<SourceFile>,
        ingest_warnings: Vec<String>,
    ) -> Result<Self, IngestError> {
        events.sort_by(|a, b| a.event_id.cmp(&b.event_id));
        if let Some(pair) = events.windows(2).find(|w| w[0].event_id == w[1].event_id) {
            return Err(IngestError::DuplicateEventId(pair[0].event_id.clone()));
        }
        Ok(EventDataset {
            events,
            provenance,
            ingest_warnings,
        })
    }

    pub fn empty() -> Self {
        EventDataset {
            events: Vec::new(),
            provenance: Vec::new(),
            ingest_warnings: Vec::new(),
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn provenance(&self) -> &[SourceFile] {
        &self.provenance
    }

    pub fn ingest_warnings(&self) -> &[String] {
        &self.ingest_warnings
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Smallest and largest event year.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        let min = self.events.iter().map(|e| e.year).min()?;
        let max = self.events.iter().map(|e| e.year).max()?;
        Some((min, max))
    }

    /// A new dataset holding the events that satisfy `keep`. Provenance and
    /// warnings carry over unchanged.
    pub fn subset(&self, mut keep: impl FnMut(&Event) -> bool) -> EventDataset {
        EventDataset {
            events: self.events.iter().filter(|e| keep(e)).cloned().collect(),
            provenance: self.provenance.clone(),
            ingest_warnings: self.ingest_warnings.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn record(cells: &[(&str, &str)]) -> RawRecord {
        RawRecord {
            year: 2012,
            row_index: 1,
            fields: COLUMNS
                .iter()
                .map(|c| {
                    let v = cells.iter().find(|(k, _)| k == c).map_or("", |(_, v)| *v);
                    (c.to_string(), v.to_string())
                })
                .collect(),
        }
    }

    #[test]
    fn sentinel_vocabulary() {
        use SentinelValue::*;
        let f = SentinelField::Demand;
        assert_eq!(parse_sentinel("Unknown", f), Ok(Unknown));
        assert_eq!(parse_sentinel("0", f), Ok(Zero));
        assert_eq!(parse_sentinel("Zero", f), Ok(Zero));
        assert_eq!(parse_sentinel("1,250", f), Ok(Positive(1250.0)));
        assert_eq!(parse_sentinel(" N/A ", f), Ok(NotApplicable));
        assert_eq!(parse_sentinel("None", f), Ok(NoneEntry));
        assert_eq!(parse_sentinel("", f), Ok(Missing));
        assert_eq!(parse_sentinel("   ", f), Ok(Missing));
        assert_eq!(parse_sentinel("0.0", f), Ok(Zero));
        assert_eq!(parse_sentinel("12.5", f), Ok(Positive(12.5)));
    }

    #[test]
    fn sentinel_rejects_garbage() {
        for raw in ["about 50", "-5", "50-100", "inf", "NaN", ",", "."] {
            let err = parse_sentinel(raw, SentinelField::Customers).unwrap_err();
            assert_eq!(
                err,
                IngestError::UnparsableValue {
                    field: SentinelField::Customers,
                    raw: raw.to_string()
                }
            );
        }
    }

    proptest! {
        #[test]
        fn sentinel_is_case_insensitive(s in "[A-Za-z/0-9,. ]{0,12}") {
            let f = SentinelField::Demand;
            prop_assert_eq!(parse_sentinel(&s, f).is_ok(), parse_sentinel(&s.to_lowercase(), f).is_ok());
            if let (Ok(a), Ok(b)) = (parse_sentinel(&s, f), parse_sentinel(&s.to_lowercase(), f)) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn sentinel_total_over_numerals(n in 0u64..10_000_000, commas in any::<bool>()) {
            let raw = if commas {
                let digits = n.to_string();
                let mut out = String::new();
                for (i, c) in digits.chars().enumerate() {
                    if i > 0 && (digits.len() - i) % 3 == 0 {
                        out.push(',');
                    }
                    out.push(c);
                }
                out
            } else {
                n.to_string()
            };
            let parsed = parse_sentinel(&raw, SentinelField::Customers).unwrap();
            if n == 0 {
                prop_assert_eq!(parsed, SentinelValue::Zero);
            } else {
                prop_assert_eq!(parsed, SentinelValue::Positive(n as f64));
            }
        }
    }

    #[test]
    fn normalizes_dates_and_times() {
        let raw = record(&[
            ("Date Event Began", "6/29/2012"),
            ("Time Event Began", "14:30"),
            ("Event Type", "Severe Weather - Thunderstorms"),
        ]);
        let event = normalize_record(&raw, &NormalizeOptions::default()).unwrap();
        assert_eq!(event.began, Timestamp::new(2012, 6, 29, Some((14, 30))));
        assert_eq!(event.began.unwrap().to_string(), "2012-06-29T14:30");
        assert_eq!(event.restored, None);
        assert_eq!(event.demand_loss, SentinelValue::Missing);
        assert_eq!(event.alert_criteria, None);
    }

    #[test]
    fn event_id_is_deterministic() {
        let raw = record(&[("Date Event Began", "1/2/2012"), ("Time Event Began", "9:05")]);
        let a = normalize_record(&raw, &NormalizeOptions::default()).unwrap();
        let b = normalize_record(&raw, &NormalizeOptions::default()).unwrap();
        assert_eq!(a.event_id, b.event_id);
        assert!(a.event_id.starts_with("2012-00001-"));
        assert_eq!(a.event_id.len(), "2012-00001-".len() + 8);
    }

    #[test]
    fn invalid_dates() {
        let opts = NormalizeOptions::default();
        for (date, time) in [("2/30/2012", ""), ("13/1/2012", ""), ("June 5", ""), ("6/5/2012", "25:00"), ("6/5/2012", "1430")] {
            let raw = record(&[("Date Event Began", date), ("Time Event Began", time)]);
            assert!(matches!(
                normalize_record(&raw, &opts),
                Err(IngestError::InvalidDate { row_index: 1, .. })
            ), "{date} {time}");
        }
        let raw = record(&[("Date of Restoration", "Unknown"), ("Time of Restoration", "Unknown")]);
        assert_eq!(normalize_record(&raw, &opts).unwrap().restored, None);
        let raw = record(&[("Date Event Began", "2/29/2012")]);
        assert_eq!(
            normalize_record(&raw, &opts).unwrap().began,
            Timestamp::new(2012, 2, 29, None)
        );
    }

    #[test]
    fn alert_criteria_only_from_2015() {
        let mut raw = record(&[("Alert Criteria", "Load shedding of 100 MW")]);
        let opts = NormalizeOptions::default();
        assert_eq!(
            normalize_record(&raw, &opts),
            Err(IngestError::AlertCriteriaBeforeIntroduction {
                row_index: 1,
                year: 2012,
                since: 2015
            })
        );
        raw.year = 2019;
        assert_eq!(
            normalize_record(&raw, &opts).unwrap().alert_criteria.as_deref(),
            Some("Load shedding of 100 MW")
        );
    }

    #[test]
    fn year_bounds() {
        let mut raw = record(&[]);
        raw.year = 2022;
        assert!(matches!(
            normalize_record(&raw, &NormalizeOptions::default()),
            Err(IngestError::YearOutOfRange { year: 2022, .. })
        ));
        let opts = NormalizeOptions {
            max_year: 2023,
            ..NormalizeOptions::default()
        };
        assert!(normalize_record(&raw, &opts).is_ok());
    }

    #[test]
    fn restoration_order() {
        let raw = record(&[
            ("Date Event Began", "6/29/2012"),
            ("Time Event Began", "14:30"),
            ("Date of Restoration", "6/29/2012"),
            ("Time of Restoration", "9:00"),
        ]);
        let event = normalize_record(&raw, &NormalizeOptions::default()).unwrap();
        assert!(event.restored_before_began());
        let same_day_unknown_time = Timestamp::new(2012, 6, 29, None).unwrap();
        assert!(!same_day_unknown_time.is_before(&event.began.unwrap()));
    }

    #[test]
    fn timestamp_text_round_trip() {
        for s in ["2012-06-29T14:30", "2020-02-29", "2015-12-31T00:00"] {
            assert_eq!(s.parse::<Timestamp>().unwrap().to_string(), s);
        }
        assert!("2019-02-29".parse::<Timestamp>().is_err());
    }

    #[test]
    fn dataset_sorts_and_rejects_duplicates() {
        let opts = NormalizeOptions::default();
        let mut a = record(&[]);
        a.row_index = 2;
        let b = record(&[]);
        let ea = normalize_record(&a, &opts).unwrap();
        let eb = normalize_record(&b, &opts).unwrap();
        let ds = EventDataset::new(vec![ea.clone(), eb.clone()], vec![], vec![]).unwrap();
        assert_eq!(ds.events()[0].event_id, eb.event_id);
        assert_eq!(
            EventDataset::new(vec![ea.clone(), ea.clone()], vec![], vec![]),
            Err(IngestError::DuplicateEventId(ea.event_id.clone()))
        );
        assert_eq!(ds.year_span(), Some((2012, 2012)));
        assert!(EventDataset::empty().year_span().is_none());
    }
}
