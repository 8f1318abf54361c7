//! Per-email interaction attributes and per-user dominant profiles.
//!
//! Every email is reduced to five categorical tags: binned subject
//! length, body size, total size, attachment size, and a time-of-day
//! segment. A user's profile is the most representative tag per
//! attribute across the emails they take part in.

use std::collections::HashMap;

use chrono::{FixedOffset, Timelike};
use thiserror::Error;

use crate::corpus::{EmailRecord, HostSet};
use crate::graph::PiNet;

/// Tag ids for the five attributes, in fixed order: subject length,
/// text size, email size, attachment size, time segment. Ids are
/// 1-based within each attribute's own code book.
pub type TagVector = [u32; 5];

/// Number of attributes in a [`TagVector`].
pub const ATTRIBUTE_COUNT: usize = 5;

/// Attribute positions, usable as indices into a [`TagVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    SubjectLen = 0,
    TextSize = 1,
    EmailSize = 2,
    AttachSize = 3,
    Time = 4,
}

impl AttributeKind {
    pub const ALL: [AttributeKind; 5] = [
        AttributeKind::SubjectLen,
        AttributeKind::TextSize,
        AttributeKind::EmailSize,
        AttributeKind::AttachSize,
        AttributeKind::Time,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttributeKind::SubjectLen => "sublen",
            AttributeKind::TextSize => "txtsize",
            AttributeKind::EmailSize => "emailsize",
            AttributeKind::AttachSize => "attachsize",
            AttributeKind::Time => "time",
        }
    }
}

#[derive(Debug, Error)]
pub enum CpiError {
    #[error("time segmentation has no segments")]
    EmptySegmentation,
    #[error("bad time segment `{entry}`, expected `label=HH:MM`")]
    BadSegment { entry: String },
    #[error("two time segments start at minute {minute}")]
    DuplicateStart { minute: u32 },
    #[error("cannot fit attribute ranges on an empty record set")]
    NoRecords,
}

/// Equal-width binning over a closed value range. A collapsed range
/// (min == max) degenerates to a single bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub min: u64,
    pub max: u64,
    pub bin_count: u32,
}

impl BinSpec {
    pub fn fit(values: impl IntoIterator<Item = u64>, bin_count: u32) -> Result<Self, CpiError> {
        let mut min = u64::MAX;
        let mut max = 0u64;
        let mut any = false;
        for v in values {
            any = true;
            min = min.min(v);
            max = max.max(v);
        }
        if !any {
            return Err(CpiError::NoRecords);
        }
        Ok(BinSpec {
            min,
            max,
            bin_count: bin_count.max(1),
        })
    }

    /// 1-based bin id; values outside the fitted range clamp to the
    /// nearest end bin.
    pub fn tag(&self, value: u64) -> u32 {
        if self.max <= self.min {
            return 1;
        }
        let width = (self.max - self.min) as f64 / self.bin_count as f64;
        let raw = if value <= self.min {
            0.0
        } else {
            ((value - self.min) as f64 / width).floor()
        };
        (raw as u32 + 1).min(self.bin_count)
    }
}

/// One labeled segment of the day, identified by its starting minute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtsSegment {
    pub label: String,
    pub start_minute: u32,
}

/// Categorical time segmentation: the day is split at the segment
/// starts, cyclically, so the span before the earliest start belongs to
/// the latest one (a `night` starting at 21:00 covers 21:00–05:00).
/// Tag ids follow the listed order, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtsTable {
    segments: Vec<CtsSegment>,
}

impl CtsTable {
    /// morning 05:00, afternoon 12:00, evening 17:00, night 21:00.
    pub fn default_day() -> Self {
        CtsTable {
            segments: vec![
                CtsSegment { label: "morning".into(), start_minute: 5 * 60 },
                CtsSegment { label: "afternoon".into(), start_minute: 12 * 60 },
                CtsSegment { label: "evening".into(), start_minute: 17 * 60 },
                CtsSegment { label: "night".into(), start_minute: 21 * 60 },
            ],
        }
    }

    /// Parse entries of the form `label=HH:MM`.
    pub fn parse<S: AsRef<str>>(entries: &[S]) -> Result<Self, CpiError> {
        let mut segments = Vec::with_capacity(entries.len());
        for entry in entries {
            let entry = entry.as_ref();
            let bad = || CpiError::BadSegment { entry: entry.to_string() };
            let (label, time) = entry.split_once('=').ok_or_else(bad)?;
            let (h, m) = time.trim().split_once(':').ok_or_else(bad)?;
            let hours: u32 = h.trim().parse().map_err(|_| bad())?;
            let minutes: u32 = m.trim().parse().map_err(|_| bad())?;
            if hours >= 24 || minutes >= 60 || label.trim().is_empty() {
                return Err(bad());
            }
            segments.push(CtsSegment {
                label: label.trim().to_string(),
                start_minute: hours * 60 + minutes,
            });
        }
        if segments.is_empty() {
            return Err(CpiError::EmptySegmentation);
        }
        let mut starts: Vec<u32> = segments.iter().map(|s| s.start_minute).collect();
        starts.sort_unstable();
        for w in starts.windows(2) {
            if w[0] == w[1] {
                return Err(CpiError::DuplicateStart { minute: w[0] });
            }
        }
        Ok(CtsTable { segments })
    }

    pub fn segments(&self) -> &[CtsSegment] {
        &self.segments
    }

    pub fn segment_count(&self) -> u32 {
        self.segments.len() as u32
    }

    /// 1-based tag for a minute of the day (0..1440).
    pub fn tag_for_minute(&self, minute: u32) -> u32 {
        let minute = minute % (24 * 60);
        // segment with the greatest start <= minute, wrapping to the
        // latest start when the minute precedes every segment
        let mut best: Option<(usize, u32)> = None;
        let mut latest: (usize, u32) = (0, 0);
        for (idx, seg) in self.segments.iter().enumerate() {
            if seg.start_minute >= latest.1 {
                latest = (idx, seg.start_minute);
            }
            if seg.start_minute <= minute && best.map_or(true, |(_, s)| seg.start_minute > s) {
                best = Some((idx, seg.start_minute));
            }
        }
        let idx = best.map(|(i, _)| i).unwrap_or(latest.0);
        idx as u32 + 1
    }
}

/// Which clock reads the time-of-day tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimePolicy {
    /// Use each record's own UTC offset as written.
    AsRecorded,
    /// Convert every timestamp to one fixed offset first.
    Fixed(FixedOffset),
}

/// Fitted code books for turning a record into its tag vector.
#[derive(Debug, Clone)]
pub struct CpiExtractor {
    pub subject: BinSpec,
    pub text: BinSpec,
    pub email: BinSpec,
    pub attach: BinSpec,
    pub cts: CtsTable,
    pub time_policy: TimePolicy,
}

impl CpiExtractor {
    /// Fit equal-width bins for the four numeric attributes over
    /// `records`.
    pub fn fit(
        records: &[EmailRecord],
        bin_count: u32,
        cts: CtsTable,
        time_policy: TimePolicy,
    ) -> Result<Self, CpiError> {
        if records.is_empty() {
            return Err(CpiError::NoRecords);
        }
        Ok(CpiExtractor {
            subject: BinSpec::fit(records.iter().map(|r| r.subject_len), bin_count)?,
            text: BinSpec::fit(records.iter().map(|r| r.text_size), bin_count)?,
            email: BinSpec::fit(records.iter().map(|r| r.email_size), bin_count)?,
            attach: BinSpec::fit(records.iter().map(|r| r.attach_size), bin_count)?,
            cts,
            time_policy,
        })
    }

    fn minute_of_day(&self, record: &EmailRecord) -> u32 {
        let time = match self.time_policy {
            TimePolicy::AsRecorded => record.timestamp.time(),
            TimePolicy::Fixed(offset) => record.timestamp.with_timezone(&offset).time(),
        };
        time.hour() * 60 + time.minute()
    }

    pub fn record_cpi(&self, record: &EmailRecord) -> TagVector {
        [
            self.subject.tag(record.subject_len),
            self.text.tag(record.text_size),
            self.email.tag(record.email_size),
            self.attach.tag(record.attach_size),
            self.cts.tag_for_minute(self.minute_of_day(record)),
        ]
    }
}

/// Which records feed a user's profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpiMode {
    /// Every record the user participates in.
    All,
    /// Only records sent by a host account; captures how the host
    /// writes to each contact rather than overall traffic.
    Outgoing,
}

/// Tag vectors per address.
pub fn user_cpis(
    records: &[EmailRecord],
    extractor: &CpiExtractor,
    mode: CpiMode,
    host: &HostSet,
) -> HashMap<String, Vec<TagVector>> {
    let mut out: HashMap<String, Vec<TagVector>> = HashMap::new();
    for record in records {
        if mode == CpiMode::Outgoing && !host.contains(&record.sender) {
            continue;
        }
        let v = extractor.record_cpi(record);
        out.entry(record.sender.clone()).or_default().push(v);
        for r in &record.recipients {
            if *r != record.sender {
                out.entry(r.clone()).or_default().push(v);
            }
        }
    }
    out
}

/// The dominant tag vector of a user: per attribute, the tag backed by
/// the most-repeated complete vector carrying it (ties resolve to the
/// smallest tag id). Returns `None` for an empty history.
pub fn influential_cpi(vectors: &[TagVector]) -> Option<TagVector> {
    if vectors.is_empty() {
        return None;
    }
    let mut counts: HashMap<TagVector, u64> = HashMap::new();
    for v in vectors {
        *counts.entry(*v).or_insert(0) += 1;
    }
    let mut out = [0u32; ATTRIBUTE_COUNT];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut best_tag = 0u32;
        let mut best_score = 0u64;
        for (vector, &count) in &counts {
            let tag = vector[i];
            if count > best_score || (count == best_score && tag < best_tag) {
                best_score = count;
                best_tag = tag;
            }
        }
        *slot = best_tag;
    }
    Some(out)
}

/// Copy profiles onto matching vertices; everyone else keeps `None`.
/// Returns how many vertices received a profile.
pub fn annotate_graph(net: &mut PiNet, profiles: &HashMap<String, TagVector>) -> usize {
    let mut annotated = 0;
    for id in 0..net.vertex_count() as u32 {
        let addr = net.vertex(id).address.clone();
        if let Some(profile) = profiles.get(&addr) {
            net.vertex_mut(id).attributes = Some(*profile);
            annotated += 1;
        }
    }
    annotated
}

/// Fit, extract, reduce, and annotate in one step.
pub fn annotate_from_records(
    net: &mut PiNet,
    records: &[EmailRecord],
    extractor: &CpiExtractor,
    mode: CpiMode,
    host: &HostSet,
) -> usize {
    let per_user = user_cpis(records, extractor, mode, host);
    let profiles: HashMap<String, TagVector> = per_user
        .into_iter()
        .filter_map(|(addr, vectors)| influential_cpi(&vectors).map(|p| (addr, p)))
        .collect();
    annotate_graph(net, &profiles)
}
