//! Collision-report ingestion.
//!
//! Input is RFC 4180 CSV with a mandatory header naming at least the
//! columns in [`COLUMNS`]. Any further columns are kept, in header order, as
//! opaque extras. Every data row ends up either accepted or excluded with a
//! single reason; when several apply, the first in
//! [`ExclusionReason`] declaration order wins.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const COLUMNS: [&str; 10] = [
    "report_id",
    "date",
    "time",
    "manufacturer",
    "city",
    "state",
    "mode",
    "narrative",
    "damage",
    "injury",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("header is missing required columns: {}", .missing.join(", "))]
    HeaderMismatch { missing: Vec<String> },
    #[error("invalid date range: {from} is after {to}")]
    InvalidRange { from: NaiveDate, to: NaiveDate },
}

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($token => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{other}`", stringify!($name))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

token_enum!(DayPart {
    Dawn => "dawn",
    Day => "day",
    Dusk => "dusk",
    Night => "night",
    Unknown => "unknown",
});

token_enum!(DrivingMode {
    Autonomous => "autonomous",
    Conventional => "conventional",
    Transitioning => "transitioning",
    Unknown => "unknown",
});

token_enum!(Damage {
    None => "none",
    Minor => "minor",
    Moderate => "moderate",
    Major => "major",
    Unknown => "unknown",
});

impl DayPart {
    /// Day part for a clock time: dawn 05:00-07:59, day 08:00-17:59,
    /// dusk 18:00-20:59, night otherwise.
    pub fn from_clock(t: NaiveTime) -> DayPart {
        match t.hour() {
            5..=7 => DayPart::Dawn,
            8..=17 => DayPart::Day,
            18..=20 => DayPart::Dusk,
            _ => DayPart::Night,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeOfDay {
    Clock(NaiveTime),
    Part(DayPart),
}

impl TimeOfDay {
    pub fn day_part(self) -> DayPart {
        match self {
            TimeOfDay::Clock(t) => DayPart::from_clock(t),
            TimeOfDay::Part(p) => p,
        }
    }

    fn parse(s: &str) -> Result<Option<TimeOfDay>, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(None);
        }
        if let Ok(p) = s.parse::<DayPart>() {
            return Ok(Some(TimeOfDay::Part(p)));
        }
        NaiveTime::parse_from_str(s, "%H:%M")
            .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M:%S"))
            .map(|t| Some(TimeOfDay::Clock(t)))
            .map_err(|_| format!("unparseable time `{s}`"))
    }

    fn render(self) -> String {
        match self {
            TimeOfDay::Clock(t) if t.second() == 0 => t.format("%H:%M").to_string(),
            TimeOfDay::Clock(t) => t.format("%H:%M:%S").to_string(),
            TimeOfDay::Part(p) => p.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub report_id: String,
    pub date: NaiveDate,
    pub time_of_day: Option<TimeOfDay>,
    pub manufacturer: String,
    pub city: String,
    pub state: String,
    pub driving_mode: DrivingMode,
    pub narrative: String,
    pub damage: Damage,
    /// `None` when the report does not say.
    pub injury: Option<bool>,
    #[serde(default)]
    pub extras: Vec<(String, String)>,
}

impl CollisionReport {
    pub fn day_part(&self) -> DayPart {
        self.time_of_day.map_or(DayPart::Unknown, TimeOfDay::day_part)
    }

    pub fn location(&self) -> String {
        match (self.city.is_empty(), self.state.is_empty()) {
            (false, false) => format!("{}, {}", self.city, self.state),
            (false, true) => self.city.clone(),
            _ => self.state.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExclusionReason {
    MalformedRow,
    DuplicateId,
    EmptyNarrative,
    InconsistentFields,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    /// 1-based data row number; the header is row 0.
    pub row: usize,
    pub reason: ExclusionReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusValidationResult {
    pub accepted: Vec<CollisionReport>,
    pub excluded: Vec<Exclusion>,
}

impl CorpusValidationResult {
    pub fn rows(&self) -> usize {
        self.accepted.len() + self.excluded.len()
    }
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .map_err(|_| format!("unparseable date `{s}`"))
}

fn parse_injury(s: &str) -> Result<Option<bool>, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" | "true" | "y" | "1" => Ok(Some(true)),
        "no" | "false" | "n" | "0" => Ok(Some(false)),
        "" | "unknown" => Ok(None),
        other => Err(format!("unknown injury value `{other}`")),
    }
}

fn render_injury(i: Option<bool>) -> &'static str {
    match i {
        Some(true) => "yes",
        Some(false) => "no",
        None => "unknown",
    }
}

fn narrative_mode(narrative: &str) -> Option<DrivingMode> {
    let lowered = narrative.to_lowercase();
    let autonomous = lowered.contains("autonomous mode");
    let conventional = lowered.contains("conventional mode") || lowered.contains("manual mode");
    match (autonomous, conventional) {
        (true, false) => Some(DrivingMode::Autonomous),
        (false, true) => Some(DrivingMode::Conventional),
        _ => None,
    }
}

/// Why a well-formed report contradicts itself, if it does: the mode
/// column disagrees with the mode the narrative states, or no damage is
/// recorded alongside an injury.
pub fn inconsistency(report: &CollisionReport) -> Option<String> {
    if let Some(stated) = narrative_mode(&report.narrative) {
        let declared = report.driving_mode;
        if matches!(declared, DrivingMode::Autonomous | DrivingMode::Conventional) && declared != stated {
            return Some(format!("mode column says {declared} but narrative says {stated} mode"));
        }
    }
    if report.damage == Damage::None && report.injury == Some(true) {
        return Some("damage recorded as none with an injury".into());
    }
    None
}

struct HeaderMap {
    required: [usize; 10],
    extras: Vec<(usize, String)>,
}

impl HeaderMap {
    fn new(header: &csv::StringRecord) -> Result<Self, CorpusError> {
        let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        let mut required = [0usize; 10];
        let mut missing = Vec::new();
        for (slot, col) in required.iter_mut().zip(COLUMNS) {
            match names.iter().position(|n| n == col) {
                Some(i) => *slot = i,
                None => missing.push(col.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(CorpusError::HeaderMismatch { missing });
        }
        let extras = header
            .iter()
            .enumerate()
            .filter(|(i, _)| !required.contains(i))
            .map(|(i, h)| (i, h.trim().to_string()))
            .collect();
        Ok(Self { required, extras })
    }

    fn report(&self, record: &csv::StringRecord, width: usize) -> Result<CollisionReport, String> {
        if record.len() != width {
            return Err(format!("expected {width} fields, found {}", record.len()));
        }
        let field = |i: usize| record.get(self.required[i]).unwrap_or("");
        let report_id = field(0).trim().to_string();
        if report_id.is_empty() {
            return Err("empty report_id".into());
        }
        Ok(CollisionReport {
            report_id,
            date: parse_date(field(1))?,
            time_of_day: TimeOfDay::parse(field(2))?,
            manufacturer: field(3).trim().to_string(),
            city: field(4).trim().to_string(),
            state: field(5).trim().to_string(),
            driving_mode: match field(6).trim() {
                "" => DrivingMode::Unknown,
                s => s.parse()?,
            },
            narrative: field(7).trim().to_string(),
            damage: match field(8).trim() {
                "" => Damage::Unknown,
                s => s.parse()?,
            },
            injury: parse_injury(field(9))?,
            extras: self
                .extras
                .iter()
                .map(|(i, name)| (name.clone(), record.get(*i).unwrap_or("").to_string()))
                .collect(),
        })
    }
}

/// Parse a CSV document into accepted and excluded rows.
pub fn parse_reports(document: &str) -> Result<CorpusValidationResult, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(document.as_bytes());
    let header = reader
        .headers()
        .map_err(|_| CorpusError::HeaderMismatch {
            missing: COLUMNS.iter().map(|c| c.to_string()).collect(),
        })?
        .clone();
    let map = HeaderMap::new(&header)?;
    let width = header.len();

    let mut result = CorpusValidationResult::default();
    let mut seen: HashSet<String> = HashSet::new();
    for (n, record) in reader.records().enumerate() {
        let row = n + 1;
        let exclude = |reason, detail: String| Exclusion { row, reason, detail };
        let report = match record.map_err(|e| e.to_string()).and_then(|r| map.report(&r, width)) {
            Ok(r) => r,
            Err(detail) => {
                result.excluded.push(exclude(ExclusionReason::MalformedRow, detail));
                continue;
            }
        };
        if !seen.insert(report.report_id.clone()) {
            let detail = format!("report_id `{}` already seen", report.report_id);
            result.excluded.push(exclude(ExclusionReason::DuplicateId, detail));
        } else if report.narrative.is_empty() {
            result
                .excluded
                .push(exclude(ExclusionReason::EmptyNarrative, "narrative is empty".into()));
        } else if let Some(detail) = inconsistency(&report) {
            result
                .excluded
                .push(exclude(ExclusionReason::InconsistentFields, detail));
        } else {
            result.accepted.push(report);
        }
    }
    Ok(result)
}

pub fn read_reports_file(path: impl AsRef<Path>) -> Result<CorpusValidationResult, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    parse_reports(&text)
}

/// Serialize reports back to CSV: the fixed columns, then the extras of
/// the first report in their original order.
pub fn write_reports(reports: &[CollisionReport]) -> String {
    let extras: Vec<&str> = reports
        .first()
        .map(|r| r.extras.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.extend(&extras);
    writer.write_record(&header).expect("in-memory write");
    for r in reports {
        let time = r.time_of_day.map(TimeOfDay::render).unwrap_or_default();
        let date = r.date.format("%Y-%m-%d").to_string();
        let mut row: Vec<&str> = vec![
            &r.report_id,
            &date,
            &time,
            &r.manufacturer,
            &r.city,
            &r.state,
            r.driving_mode.as_str(),
            &r.narrative,
            r.damage.as_str(),
            render_injury(r.injury),
        ];
        for name in &extras {
            row.push(r.extras.iter().find(|(k, _)| k == name).map_or("", |(_, v)| v.as_str()));
        }
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub mode: Option<DrivingMode>,
    /// Case-insensitive substring of the manufacturer.
    pub manufacturer: Option<String>,
}

pub fn filter_corpus(reports: &[CollisionReport], filter: &CorpusFilter) -> Result<Vec<CollisionReport>, CorpusError> {
    if let (Some(from), Some(to)) = (filter.from, filter.to) {
        if from > to {
            return Err(CorpusError::InvalidRange { from, to });
        }
    }
    let needle = filter.manufacturer.as_ref().map(|m| m.to_lowercase());
    Ok(reports
        .iter()
        .filter(|r| filter.from.is_none_or(|d| r.date >= d))
        .filter(|r| filter.to.is_none_or(|d| r.date <= d))
        .filter(|r| filter.mode.is_none_or(|m| r.driving_mode == m))
        .filter(|r| {
            needle
                .as_ref()
                .is_none_or(|n| r.manufacturer.to_lowercase().contains(n.as_str()))
        })
        .cloned()
        .collect())
}
