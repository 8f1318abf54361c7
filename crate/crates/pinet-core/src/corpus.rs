//! Email metadata ingestion: CSV parsing, record validation, host
//! filtering, and alias handling.
//!
//! Input is pre-extracted header metadata, one row per email:
//! `msg_id,from,to,cc,bcc,timestamp,subject_len,text_size,attach_size[,email_size]`
//! with a mandatory header row, RFC-3339 timestamps, and `;`-separated
//! multi-address fields. Raw MIME is out of scope; see
//! `scripts/extract_maildir.py` for converting a maildir export.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use thiserror::Error;

/// One email's header metadata. Addresses are stored normalized
/// (lowercased, trimmed) and `recipients` is the deduplicated union of
/// To, CC, and (optionally) BCC in original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmailRecord {
    pub msg_id: String,
    pub sender: String,
    pub recipients: Vec<String>,
    pub timestamp: DateTime<FixedOffset>,
    pub subject_len: u64,
    pub text_size: u64,
    pub attach_size: u64,
    pub email_size: u64,
}

impl EmailRecord {
    /// True when `addr` (already normalized) participates in this email.
    pub fn involves(&self, addr: &str) -> bool {
        self.sender == addr || self.recipients.iter().any(|r| r == addr)
    }
}

/// The set of account addresses owned by one reference user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostSet {
    accounts: BTreeSet<String>,
    pub owner_label: Option<String>,
}

impl HostSet {
    pub fn new<I, S>(addresses: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let accounts: BTreeSet<String> = addresses
            .into_iter()
            .map(|a| normalize_address(a.as_ref()))
            .filter(|a| !a.is_empty())
            .collect();
        if accounts.is_empty() {
            return Err(CorpusError::EmptyHostSet);
        }
        Ok(HostSet {
            accounts,
            owner_label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.owner_label = Some(label.into());
        self
    }

    /// Resolve a CLI token: an alias group label expands to every address
    /// of that identity, anything else is taken as a single address.
    pub fn from_token(token: &str, aliases: Option<&AliasMap>) -> Result<Self, CorpusError> {
        let normalized = normalize_address(token);
        if let Some(map) = aliases {
            if let Some(group) = map.group(&normalized) {
                return HostSet::new(group.members.iter())
                    .map(|h| h.with_label(group.canonical.clone()));
            }
        }
        HostSet::new([normalized])
    }

    pub fn contains(&self, addr: &str) -> bool {
        self.accounts.contains(addr)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &str> {
        self.accounts.iter().map(|s| s.as_str())
    }

    pub fn label(&self) -> &str {
        self.owner_label
            .as_deref()
            .unwrap_or_else(|| self.accounts.iter().next().map(|s| s.as_str()).unwrap_or(""))
    }

    /// Union of several host sets, e.g. for a multi-account build.
    pub fn union<'a>(sets: impl IntoIterator<Item = &'a HostSet>) -> Result<Self, CorpusError> {
        let mut accounts = BTreeSet::new();
        for set in sets {
            accounts.extend(set.accounts.iter().cloned());
        }
        if accounts.is_empty() {
            return Err(CorpusError::EmptyHostSet);
        }
        Ok(HostSet {
            accounts,
            owner_label: None,
        })
    }
}

/// A loaded, deduplicated record collection with a dense address index.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<EmailRecord>,
    addresses: Vec<String>,
    address_ids: HashMap<String, u32>,
    pub provenance: Vec<PathBuf>,
}

impl Corpus {
    /// Index every address appearing in `records` in first-appearance order.
    pub fn from_records(records: Vec<EmailRecord>, provenance: Vec<PathBuf>) -> Self {
        let mut addresses = Vec::new();
        let mut address_ids = HashMap::new();
        let mut intern = |addr: &str, addresses: &mut Vec<String>| {
            if !address_ids.contains_key(addr) {
                address_ids.insert(addr.to_string(), addresses.len() as u32);
                addresses.push(addr.to_string());
            }
        };
        for record in &records {
            intern(&record.sender, &mut addresses);
            for r in &record.recipients {
                intern(r, &mut addresses);
            }
        }
        Corpus {
            records,
            addresses,
            address_ids,
            provenance,
        }
    }

    pub fn address_id(&self, addr: &str) -> Option<u32> {
        self.address_ids.get(addr).copied()
    }

    pub fn address(&self, id: u32) -> &str {
        &self.addresses[id as usize]
    }

    pub fn addresses(&self) -> &[String] {
        &self.addresses
    }

    pub fn address_count(&self) -> usize {
        self.addresses.len()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("row {row}: expected {expected} columns, found {found}")]
    MalformedRow {
        row: u64,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: unparseable timestamp `{value}`")]
    BadTimestamp { row: u64, value: String },
    #[error("row {row}: negative size in `{field}`")]
    NegativeSize { row: u64, field: &'static str },
    #[error("row {row}: `{field}` is not a number: `{value}`")]
    BadNumber {
        row: u64,
        field: &'static str,
        value: String,
    },
    #[error("row {row}: email_size {email_size} is smaller than attach_size {attach_size}")]
    SizeInvariant {
        row: u64,
        email_size: u64,
        attach_size: u64,
    },
    #[error("row {row}: empty sender address")]
    MissingSender { row: u64 },
    #[error("row {row}: no recipient addresses")]
    NoRecipients { row: u64 },
    #[error("header is missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("empty host set")]
    EmptyHostSet,
    #[error("address `{address}` appears in more than one alias group")]
    OverlappingGroups { address: String },
    #[error("alias line {line}: expected `label = addr1;addr2;...`")]
    MalformedAlias { line: u64 },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Column layout resolved from a CSV header row.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    msg_id: usize,
    from: usize,
    to: usize,
    cc: usize,
    bcc: usize,
    timestamp: usize,
    subject_len: usize,
    text_size: usize,
    attach_size: usize,
    email_size: Option<usize>,
    width: usize,
    pub include_bcc: bool,
}

impl CsvSchema {
    pub fn from_header(header: &csv::StringRecord, include_bcc: bool) -> Result<Self, CorpusError> {
        let find = |name: &'static str| -> Result<usize, CorpusError> {
            header
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or(CorpusError::MissingColumn(name))
        };
        Ok(CsvSchema {
            msg_id: find("msg_id")?,
            from: find("from")?,
            to: find("to")?,
            cc: find("cc")?,
            bcc: find("bcc")?,
            timestamp: find("timestamp")?,
            subject_len: find("subject_len")?,
            text_size: find("text_size")?,
            attach_size: find("attach_size")?,
            email_size: header
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case("email_size")),
            width: header.len(),
            include_bcc,
        })
    }
}

pub fn normalize_address(raw: &str) -> String {
    raw.trim().to_lowercase()
}

fn split_addresses(cell: &str, out: &mut Vec<String>, seen: &mut HashSet<String>) {
    for part in cell.split(';') {
        let addr = normalize_address(part);
        if !addr.is_empty() && seen.insert(addr.clone()) {
            out.push(addr);
        }
    }
}

fn parse_size(
    row: u64,
    field: &'static str,
    value: &str,
) -> Result<u64, CorpusError> {
    let trimmed = value.trim();
    let n: i64 = trimmed.parse().map_err(|_| CorpusError::BadNumber {
        row,
        field,
        value: trimmed.to_string(),
    })?;
    if n < 0 {
        return Err(CorpusError::NegativeSize { row, field });
    }
    Ok(n as u64)
}

/// Parse one data row against `schema`. `row` is the 1-based line number
/// used in error messages.
///
/// If the `email_size` column is absent or empty, the size defaults to
/// `subject_len + text_size + attach_size`.
pub fn parse_record(
    fields: &csv::StringRecord,
    schema: &CsvSchema,
    row: u64,
) -> Result<EmailRecord, CorpusError> {
    if fields.len() != schema.width {
        return Err(CorpusError::MalformedRow {
            row,
            expected: schema.width,
            found: fields.len(),
        });
    }
    let cell = |idx: usize| fields.get(idx).unwrap_or("");

    let sender = normalize_address(cell(schema.from));
    if sender.is_empty() {
        return Err(CorpusError::MissingSender { row });
    }

    let mut recipients = Vec::new();
    let mut seen = HashSet::new();
    split_addresses(cell(schema.to), &mut recipients, &mut seen);
    split_addresses(cell(schema.cc), &mut recipients, &mut seen);
    if schema.include_bcc {
        split_addresses(cell(schema.bcc), &mut recipients, &mut seen);
    }
    if recipients.is_empty() {
        return Err(CorpusError::NoRecipients { row });
    }

    let raw_ts = cell(schema.timestamp).trim();
    let timestamp =
        DateTime::parse_from_rfc3339(raw_ts).map_err(|_| CorpusError::BadTimestamp {
            row,
            value: raw_ts.to_string(),
        })?;

    let subject_len = parse_size(row, "subject_len", cell(schema.subject_len))?;
    let text_size = parse_size(row, "text_size", cell(schema.text_size))?;
    let attach_size = parse_size(row, "attach_size", cell(schema.attach_size))?;
    let email_size = match schema.email_size {
        Some(idx) if !cell(idx).trim().is_empty() => parse_size(row, "email_size", cell(idx))?,
        _ => subject_len + text_size + attach_size,
    };
    if email_size < attach_size {
        return Err(CorpusError::SizeInvariant {
            row,
            email_size,
            attach_size,
        });
    }

    Ok(EmailRecord {
        msg_id: cell(schema.msg_id).trim().to_string(),
        sender,
        recipients,
        timestamp,
        subject_len,
        text_size,
        attach_size,
        email_size,
    })
}

/// Load and concatenate metadata CSVs, deduplicating by `msg_id`
/// (first occurrence wins, duplicates logged as warnings).
///
/// Rows without a usable sender or recipient list are skipped with a
/// warning; structurally broken rows (wrong width, bad timestamp,
/// negative size) abort the load.
pub fn load_corpus(paths: &[PathBuf], include_bcc: bool) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for path in paths {
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_reader(BufReader::new(file));
        let header = reader
            .headers()
            .map_err(|source| CorpusError::Csv {
                path: path.clone(),
                source,
            })?
            .clone();
        if header.iter().all(|h| h.trim().is_empty()) {
            continue; // empty file
        }
        let schema = CsvSchema::from_header(&header, include_bcc)?;
        for result in reader.records() {
            let fields = result.map_err(|source| CorpusError::Csv {
                path: path.clone(),
                source,
            })?;
            let row = fields.position().map(|p| p.line()).unwrap_or(0);
            match parse_record(&fields, &schema, row) {
                Ok(record) => {
                    if seen_ids.insert(record.msg_id.clone()) {
                        records.push(record);
                    } else {
                        log::warn!(
                            "{}:{}: duplicate msg_id `{}`, keeping first occurrence",
                            path.display(),
                            row,
                            record.msg_id
                        );
                    }
                }
                Err(err @ (CorpusError::MissingSender { .. } | CorpusError::NoRecipients { .. })) => {
                    log::warn!("{}: skipping row: {}", path.display(), err);
                }
                Err(err) => return Err(err),
            }
        }
    }
    Ok(Corpus::from_records(records, paths.to_vec()))
}

/// How a domain allow-list is applied to non-host participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainMode {
    /// Drop the whole record when any non-host participant is outside
    /// the allowed domains.
    DropRecord,
    /// Remove outside recipients; drop the record only when the sender
    /// is outside or no recipient survives.
    StripParticipants,
}

/// Optional allow-list restricting participation to a set of domains.
#[derive(Debug, Clone)]
pub struct DomainFilter {
    domains: BTreeSet<String>,
    pub mode: DomainMode,
}

impl DomainFilter {
    pub fn new<I, S>(domains: I, mode: DomainMode) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        DomainFilter {
            domains: domains
                .into_iter()
                .map(|d| normalize_address(d.as_ref().trim_start_matches('@')))
                .filter(|d| !d.is_empty())
                .collect(),
            mode,
        }
    }

    fn allows(&self, addr: &str) -> bool {
        match addr.rsplit_once('@') {
            Some((_, domain)) => self.domains.contains(domain),
            None => false,
        }
    }
}

/// Keep exactly the records in which a host account appears as sender or
/// recipient, optionally applying a domain allow-list to everyone else.
pub fn filter_personalized(
    records: &[EmailRecord],
    host: &HostSet,
    domain: Option<&DomainFilter>,
) -> Vec<EmailRecord> {
    let mut kept = Vec::new();
    for record in records {
        let mentions_host =
            host.contains(&record.sender) || record.recipients.iter().any(|r| host.contains(r));
        if !mentions_host {
            continue;
        }
        match domain {
            None => kept.push(record.clone()),
            Some(filter) => match filter.mode {
                DomainMode::DropRecord => {
                    let all_inside = (host.contains(&record.sender)
                        || filter.allows(&record.sender))
                        && record
                            .recipients
                            .iter()
                            .all(|r| host.contains(r) || filter.allows(r));
                    if all_inside {
                        kept.push(record.clone());
                    }
                }
                DomainMode::StripParticipants => {
                    if !host.contains(&record.sender) && !filter.allows(&record.sender) {
                        continue;
                    }
                    let mut stripped = record.clone();
                    stripped
                        .recipients
                        .retain(|r| host.contains(r) || filter.allows(r));
                    if stripped.recipients.is_empty() {
                        continue;
                    }
                    let still_host = host.contains(&stripped.sender)
                        || stripped.recipients.iter().any(|r| host.contains(r));
                    if still_host {
                        kept.push(stripped);
                    }
                }
            },
        }
    }
    kept
}

/// One identity owning several addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasGroup {
    pub canonical: String,
    pub members: Vec<String>,
}

/// A partition of addresses into identities, parsed from lines of the
/// form `canonical_label = addr1;addr2;...`. The canonical label is
/// implicitly a member of its own group.
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    groups: Vec<AliasGroup>,
    lookup: HashMap<String, usize>,
}

impl AliasMap {
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut map = AliasMap::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (label, rest) = trimmed
                .split_once('=')
                .ok_or(CorpusError::MalformedAlias { line: line_no })?;
            let canonical = normalize_address(label);
            if canonical.is_empty() {
                return Err(CorpusError::MalformedAlias { line: line_no });
            }
            let mut members = vec![canonical.clone()];
            let mut seen: HashSet<String> = members.iter().cloned().collect();
            for part in rest.split(';') {
                let addr = normalize_address(part);
                if !addr.is_empty() && seen.insert(addr.clone()) {
                    members.push(addr);
                }
            }
            let group_idx = map.groups.len();
            for member in &members {
                if map.lookup.insert(member.clone(), group_idx).is_some() {
                    return Err(CorpusError::OverlappingGroups {
                        address: member.clone(),
                    });
                }
            }
            map.groups.push(AliasGroup { canonical, members });
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Canonical label for an address, if it belongs to any group.
    pub fn canonical_for(&self, addr: &str) -> Option<&str> {
        self.lookup
            .get(addr)
            .map(|&idx| self.groups[idx].canonical.as_str())
    }

    /// Group by canonical label.
    pub fn group(&self, label: &str) -> Option<&AliasGroup> {
        self.groups.iter().find(|g| g.canonical == label)
    }

    pub fn groups(&self) -> &[AliasGroup] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Write records back out in the normalized schema (all recipients in
/// the `to` column, explicit `email_size`). Re-parsing yields records
/// equal to the input.
pub fn write_corpus_csv<W: Write>(records: &[EmailRecord], writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "msg_id",
        "from",
        "to",
        "cc",
        "bcc",
        "timestamp",
        "subject_len",
        "text_size",
        "attach_size",
        "email_size",
    ])?;
    for r in records {
        w.write_record([
            r.msg_id.as_str(),
            r.sender.as_str(),
            &r.recipients.join(";"),
            "",
            "",
            &r.timestamp.to_rfc3339(),
            &r.subject_len.to_string(),
            &r.text_size.to_string(),
            &r.attach_size.to_string(),
            &r.email_size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
