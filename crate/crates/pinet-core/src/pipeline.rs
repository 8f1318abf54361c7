//! Config-driven orchestration: one flat config describes a whole run,
//! and each stage (ingest, build, annotate, distances, cluster,
//! evaluate) is a function over the previous stage's output so a CLI
//! can stop wherever it likes.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::cluster::{cluster, ClusterError, ClusterOptions, Clustering};
use crate::corpus::{
    filter_personalized, load_corpus, AliasMap, Corpus, CorpusError, DomainFilter, DomainMode,
    EmailRecord, HostSet,
};
use crate::cpi::{annotate_from_records, CpiError, CpiExtractor, CpiMode, CtsTable, TimePolicy};
use crate::evolution::{coverage, CoverageReport, EvolutionError};
use crate::graph::{build_pinet, fuse_accounts, merge_pinets, EdgePolicy, PiNet};
use crate::quality::{quality_report, QualityReport};
use crate::similarity::{
    build_distance_matrix, DirectRule, DistanceMatrix, PathCost, SimilarityParams,
    SimilarityError,
};

/// Everything a run needs, loadable from a flat TOML document. Every
/// field has a default, so a config can set only what differs.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Metadata CSV paths, concatenated in order.
    pub input: Vec<PathBuf>,
    /// Host account tokens: addresses, or alias-group labels when an
    /// alias file is configured.
    pub hosts: Vec<String>,
    pub alias_file: Option<PathBuf>,
    /// Collapse alias groups to single vertices after building.
    pub fuse_aliases: bool,
    /// Lines of `address = designation`, attached to matching vertices.
    pub designation_file: Option<PathBuf>,
    /// `sender-to-each-recipient` (default) or `outgoing-only`.
    pub edge_policy: String,
    /// Keep only edges that touch a host account.
    pub strict_host_edges: bool,
    pub include_bcc: bool,
    /// Domain allow-list; empty means no restriction.
    pub allow_domains: Vec<String>,
    /// `drop-record` (default) or `strip-participants`.
    pub domain_mode: String,
    /// Equal-width bin count for the numeric attributes.
    pub bins: u32,
    /// `label=HH:MM` day segments; empty uses the built-in four.
    pub cts_table: Vec<String>,
    /// `as-recorded` (default), `utc`, or a fixed `+HH:MM` offset.
    pub timezone: String,
    /// Profile users from host-sent mail only.
    pub cpi_outgoing_only: bool,
    pub alpha: f64,
    pub attribute_weights: [f64; 5],
    /// `reciprocal` (default) or `literal`.
    pub direct_rule: String,
    /// `neg-log` (default) or `reciprocal-sum`.
    pub path_cost: String,
    pub k: usize,
    pub max_iterations: u32,
    /// Record quality metrics along the clustering trace.
    pub trace_quality: bool,
    /// Worker threads; 0 leaves the pool at its default size.
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: Vec::new(),
            hosts: Vec::new(),
            alias_file: None,
            fuse_aliases: true,
            designation_file: None,
            edge_policy: "sender-to-each-recipient".into(),
            strict_host_edges: false,
            include_bcc: true,
            allow_domains: Vec::new(),
            domain_mode: "drop-record".into(),
            bins: 5,
            cts_table: Vec::new(),
            timezone: "as-recorded".into(),
            cpi_outgoing_only: false,
            alpha: 0.5,
            attribute_weights: [1.0; 5],
            direct_rule: "reciprocal".into(),
            path_cost: "neg-log".into(),
            k: 2,
            max_iterations: 100,
            trace_quality: false,
            threads: 0,
        }
    }
}

/// A failed stage, carrying where it failed and whether the cause is
/// bad input (exit 1) or a broken internal invariant (exit 2).
#[derive(Debug, Error)]
#[error("{module}: {operation}: {message}")]
pub struct PipelineError {
    pub module: &'static str,
    pub operation: &'static str,
    pub message: String,
    pub internal: bool,
}

impl PipelineError {
    pub fn input(
        module: &'static str,
        operation: &'static str,
        err: impl std::fmt::Display,
    ) -> Self {
        PipelineError {
            module,
            operation,
            message: err.to_string(),
            internal: false,
        }
    }

    pub fn internal(
        module: &'static str,
        operation: &'static str,
        err: impl std::fmt::Display,
    ) -> Self {
        PipelineError {
            module,
            operation,
            message: err.to_string(),
            internal: true,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.internal {
            2
        } else {
            1
        }
    }
}

impl From<CorpusError> for PipelineError {
    fn from(err: CorpusError) -> Self {
        PipelineError::input("corpus", "load", err)
    }
}

impl From<CpiError> for PipelineError {
    fn from(err: CpiError) -> Self {
        PipelineError::input("attributes", "extract", err)
    }
}

impl From<SimilarityError> for PipelineError {
    fn from(err: SimilarityError) -> Self {
        PipelineError::input("similarity", "parameters", err)
    }
}

impl From<ClusterError> for PipelineError {
    fn from(err: ClusterError) -> Self {
        match err {
            ClusterError::InvalidK { .. } => PipelineError::input("clustering", "run", err),
            // a shape mismatch means our own stages disagreed
            ClusterError::MatrixShape { .. } => PipelineError::internal("clustering", "run", err),
        }
    }
}

impl From<EvolutionError> for PipelineError {
    fn from(err: EvolutionError) -> Self {
        PipelineError::input("evolution", "compare", err)
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let config: PipelineConfig = toml::from_str(text)
            .map_err(|e| PipelineError::input("config", "parse", e))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::input("config", "read", format!("{}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Cheap checks that must pass before any input file is opened.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.params().validate()?;
        if self.k < 1 {
            return Err(PipelineError::input(
                "config",
                "validate",
                format!("k must be at least 1, got {}", self.k),
            ));
        }
        if self.bins < 1 {
            return Err(PipelineError::input(
                "config",
                "validate",
                "bins must be at least 1",
            ));
        }
        self.edge_policy()?;
        self.domain_filter()?;
        self.direct_rule()?;
        self.path_cost()?;
        self.time_policy()?;
        self.cts()?;
        Ok(())
    }

    pub fn params(&self) -> SimilarityParams {
        SimilarityParams {
            alpha: self.alpha,
            attribute_weights: self.attribute_weights,
            ..Default::default()
        }
    }

    pub fn edge_policy(&self) -> Result<EdgePolicy, PipelineError> {
        match self.edge_policy.as_str() {
            "sender-to-each-recipient" => Ok(EdgePolicy::SenderToEachRecipient),
            "outgoing-only" => Ok(EdgePolicy::OutgoingOnly),
            other => Err(PipelineError::input(
                "config",
                "validate",
                format!("unknown edge_policy `{other}`"),
            )),
        }
    }

    pub fn domain_filter(&self) -> Result<Option<DomainFilter>, PipelineError> {
        if self.allow_domains.is_empty() {
            return Ok(None);
        }
        let mode = match self.domain_mode.as_str() {
            "drop-record" => DomainMode::DropRecord,
            "strip-participants" => DomainMode::StripParticipants,
            other => {
                return Err(PipelineError::input(
                    "config",
                    "validate",
                    format!("unknown domain_mode `{other}`"),
                ))
            }
        };
        Ok(Some(DomainFilter::new(self.allow_domains.iter(), mode)))
    }

    pub fn direct_rule(&self) -> Result<DirectRule, PipelineError> {
        match self.direct_rule.as_str() {
            "reciprocal" => Ok(DirectRule::Reciprocal),
            "literal" => Ok(DirectRule::Literal),
            other => Err(PipelineError::input(
                "config",
                "validate",
                format!("unknown direct_rule `{other}`"),
            )),
        }
    }

    pub fn path_cost(&self) -> Result<PathCost, PipelineError> {
        match self.path_cost.as_str() {
            "neg-log" => Ok(PathCost::NegLog),
            "reciprocal-sum" => Ok(PathCost::ReciprocalSum),
            other => Err(PipelineError::input(
                "config",
                "validate",
                format!("unknown path_cost `{other}`"),
            )),
        }
    }

    pub fn time_policy(&self) -> Result<TimePolicy, PipelineError> {
        let tz = self.timezone.trim();
        if tz.is_empty() || tz == "as-recorded" {
            return Ok(TimePolicy::AsRecorded);
        }
        if tz.eq_ignore_ascii_case("utc") {
            return Ok(TimePolicy::Fixed(chrono::FixedOffset::east_opt(0).unwrap()));
        }
        let bad = || {
            PipelineError::input(
                "config",
                "validate",
                format!("timezone must be `as-recorded`, `utc`, or ±HH:MM, got `{tz}`"),
            )
        };
        let (sign, rest) = match tz.split_at_checked(1) {
            Some(("+", rest)) => (1i32, rest),
            Some(("-", rest)) => (-1i32, rest),
            _ => return Err(bad()),
        };
        let (h, m) = rest.split_once(':').ok_or_else(bad)?;
        let hours: i32 = h.parse().map_err(|_| bad())?;
        let minutes: i32 = m.parse().map_err(|_| bad())?;
        if hours > 23 || minutes > 59 || hours < 0 || minutes < 0 {
            return Err(bad());
        }
        chrono::FixedOffset::east_opt(sign * (hours * 3600 + minutes * 60))
            .map(TimePolicy::Fixed)
            .ok_or_else(bad)
    }

    pub fn cts(&self) -> Result<CtsTable, PipelineError> {
        if self.cts_table.is_empty() {
            Ok(CtsTable::default_day())
        } else {
            Ok(CtsTable::parse(&self.cts_table)?)
        }
    }

    pub fn cpi_mode(&self) -> CpiMode {
        if self.cpi_outgoing_only {
            CpiMode::Outgoing
        } else {
            CpiMode::All
        }
    }

    pub fn cluster_options(&self) -> ClusterOptions {
        ClusterOptions {
            max_iterations: self.max_iterations,
            trace_quality: self.trace_quality,
            attribute_weights: self.attribute_weights,
        }
    }
}

fn parse_designations(text: &str) -> Result<HashMap<String, String>, PipelineError> {
    let mut out = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (addr, title) = trimmed.split_once('=').ok_or_else(|| {
            PipelineError::input(
                "corpus",
                "designations",
                format!("line {}: expected `address = designation`", idx + 1),
            )
        })?;
        out.insert(
            crate::corpus::normalize_address(addr),
            title.trim().to_string(),
        );
    }
    Ok(out)
}

/// Load the corpus plus the optional alias map. Fails when no input
/// paths are configured.
pub fn load_stage(config: &PipelineConfig) -> Result<(Corpus, Option<AliasMap>), PipelineError> {
    if config.input.is_empty() {
        return Err(PipelineError::input(
            "corpus",
            "load",
            "no input files configured",
        ));
    }
    let corpus = load_corpus(&config.input, config.include_bcc)?;
    let aliases = match &config.alias_file {
        Some(path) => Some(AliasMap::load(path)?),
        None => None,
    };
    Ok((corpus, aliases))
}

/// One host set per configured token.
pub fn host_sets(
    config: &PipelineConfig,
    aliases: Option<&AliasMap>,
) -> Result<Vec<HostSet>, PipelineError> {
    if config.hosts.is_empty() {
        return Err(PipelineError::input(
            "corpus",
            "hosts",
            "no host accounts configured",
        ));
    }
    config
        .hosts
        .iter()
        .map(|token| {
            HostSet::from_token(token, aliases)
                .map_err(|e| PipelineError::input("corpus", "hosts", e))
        })
        .collect()
}

/// Build the (possibly multi-account) interaction network plus the
/// records that fed it, deduplicated across hosts.
pub fn build_stage(
    config: &PipelineConfig,
    corpus: &Corpus,
    aliases: Option<&AliasMap>,
) -> Result<(PiNet, Vec<EmailRecord>), PipelineError> {
    let hosts = host_sets(config, aliases)?;
    let policy = config.edge_policy()?;
    let domain = config.domain_filter()?;

    let mut nets = Vec::with_capacity(hosts.len());
    let mut records: Vec<EmailRecord> = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for host in &hosts {
        let filtered = filter_personalized(&corpus.records, host, domain.as_ref());
        let net = build_pinet(&filtered, host, policy, config.strict_host_edges);
        nets.push(net);
        for record in filtered {
            if seen_ids.insert(record.msg_id.clone()) {
                records.push(record);
            }
        }
    }
    let mut net = if nets.len() == 1 {
        nets.pop().unwrap()
    } else {
        merge_pinets(&nets.iter().collect::<Vec<_>>())
    };

    if config.fuse_aliases {
        if let Some(map) = aliases {
            if !map.is_empty() {
                net = fuse_accounts(&net, map);
            }
        }
    }
    if let Some(path) = &config.designation_file {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::input("corpus", "designations", format!("{}: {e}", path.display()))
        })?;
        net.set_designations(&parse_designations(&text)?);
    }
    Ok((net, records))
}

/// Fit attribute code books on the contributing records and annotate
/// the graph with per-user profiles. When accounts were fused, a
/// record mentioning any member address counts toward the fused vertex.
pub fn annotate_stage(
    config: &PipelineConfig,
    net: &mut PiNet,
    records: &[EmailRecord],
    aliases: Option<&AliasMap>,
) -> Result<usize, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::input(
            "attributes",
            "fit",
            "no records available to fit attribute ranges",
        ));
    }
    let union = HostSet::union(host_sets(config, aliases)?.iter())
        .map_err(|e| PipelineError::input("corpus", "hosts", e))?;
    let extractor = CpiExtractor::fit(records, config.bins, config.cts()?, config.time_policy()?)?;

    // route each record address to its graph vertex (fused or not)
    let records_for_graph: Vec<EmailRecord> = match aliases {
        Some(map) if config.fuse_aliases && !map.is_empty() => records
            .iter()
            .map(|r| {
                let mut r = r.clone();
                if let Some(canonical) = map.canonical_for(&r.sender) {
                    r.sender = canonical.to_string();
                }
                for addr in &mut r.recipients {
                    if let Some(canonical) = map.canonical_for(addr) {
                        *addr = canonical.to_string();
                    }
                }
                r
            })
            .collect(),
        _ => records.to_vec(),
    };
    Ok(annotate_from_records(
        net,
        &records_for_graph,
        &extractor,
        config.cpi_mode(),
        &union,
    ))
}

pub fn matrix_stage(
    config: &PipelineConfig,
    net: &PiNet,
) -> Result<DistanceMatrix, PipelineError> {
    let params = config.params();
    params.validate()?;
    Ok(build_distance_matrix(
        net,
        &params,
        config.direct_rule()?,
        config.path_cost()?,
    ))
}

pub fn cluster_stage(
    config: &PipelineConfig,
    net: &PiNet,
    matrix: &DistanceMatrix,
) -> Result<Clustering, PipelineError> {
    Ok(cluster(net, matrix, config.k, &config.cluster_options())?)
}

pub fn evaluate_stage(
    config: &PipelineConfig,
    net: &PiNet,
    clustering: &Clustering,
) -> QualityReport {
    quality_report(net, clustering, config.alpha, &config.attribute_weights)
}

/// Everything the full pipeline produces for one (k, alpha) setting.
pub struct RunOutput {
    pub net: PiNet,
    pub matrix: DistanceMatrix,
    pub clustering: Clustering,
    pub report: QualityReport,
}

/// ingest → build → annotate → distances → cluster → evaluate.
pub fn full_run(config: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let (corpus, aliases) = load_stage(config)?;
    let (mut net, records) = build_stage(config, &corpus, aliases.as_ref())?;
    annotate_stage(config, &mut net, &records, aliases.as_ref())?;
    let matrix = matrix_stage(config, &net)?;
    let clustering = cluster_stage(config, &net, &matrix)?;
    let report = evaluate_stage(config, &net, &clustering);
    Ok(RunOutput {
        net,
        matrix,
        clustering,
        report,
    })
}

/// One quality row per (k, alpha) pair. The distance matrix is rebuilt
/// once per alpha and shared across that alpha's k values.
pub fn sweep_stage(
    config: &PipelineConfig,
    net: &PiNet,
    ks: &[usize],
    alphas: &[f64],
) -> Result<Vec<QualityReport>, PipelineError> {
    let mut reports = Vec::with_capacity(ks.len() * alphas.len());
    for &alpha in alphas {
        let mut variant = config.clone();
        variant.alpha = alpha;
        let matrix = matrix_stage(&variant, net)?;
        for &k in ks {
            variant.k = k;
            let clustering = cluster_stage(&variant, net, &matrix)?;
            reports.push(evaluate_stage(&variant, net, &clustering));
        }
    }
    Ok(reports)
}

/// Per-account reach against a universe of known users (defaults to
/// every address in the corpus).
pub fn coverage_stage(
    config: &PipelineConfig,
    corpus: &Corpus,
    aliases: Option<&AliasMap>,
    universe_override: Option<usize>,
) -> Result<CoverageReport, PipelineError> {
    let hosts = host_sets(config, aliases)?;
    let policy = config.edge_policy()?;
    let domain = config.domain_filter()?;
    let mut labeled: Vec<(String, PiNet)> = Vec::with_capacity(hosts.len());
    for host in &hosts {
        let filtered = filter_personalized(&corpus.records, host, domain.as_ref());
        let net = build_pinet(&filtered, host, policy, config.strict_host_edges);
        labeled.push((host.label().to_string(), net));
    }
    let universe = universe_override.unwrap_or_else(|| corpus.address_count());
    let refs: Vec<(&str, &PiNet)> = labeled
        .iter()
        .map(|(label, net)| (label.as_str(), net))
        .collect();
    Ok(coverage(&refs, universe)?)
}

/// Parse a k specification: `4`, `2,4,8`, or an inclusive range `2..10`.
pub fn parse_k_list(spec: &str) -> Result<Vec<usize>, PipelineError> {
    let bad = |msg: String| PipelineError::input("config", "parse-k", msg);
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad range start `{lo}`: {e}")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad range end `{hi}`: {e}")))?;
        if lo < 1 || hi < lo {
            return Err(bad(format!("invalid k range {lo}..{hi}")));
        }
        return Ok((lo..=hi).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let k: usize = part
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad k `{part}`: {e}")))?;
        if k < 1 {
            return Err(bad("k must be at least 1".into()));
        }
        out.push(k);
    }
    if out.is_empty() {
        return Err(bad("empty k list".into()));
    }
    Ok(out)
}

/// Parse a comma-separated alpha list, each within [0, 1].
pub fn parse_alpha_list(spec: &str) -> Result<Vec<f64>, PipelineError> {
    let bad = |msg: String| PipelineError::input("config", "parse-alpha", msg);
    let mut out = Vec::new();
    for part in spec.split(',') {
        let alpha: f64 = part
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad alpha `{part}`: {e}")))?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(bad(format!("alpha {alpha} outside [0, 1]")));
        }
        out.push(alpha);
    }
    if out.is_empty() {
        return Err(bad("empty alpha list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    const FIXTURE_CSV: &str = "\
msg_id,from,to,cc,bcc,timestamp,subject_len,text_size,attach_size
m1,h@x.com,a@x.com;b@x.com,,,2001-05-01T09:30:00-07:00,10,100,0
m2,h@x.com,a@x.com,,,2001-05-01T13:30:00-07:00,12,200,0
m3,a@x.com,h@x.com,,,2001-05-02T09:00:00-07:00,8,150,0
m4,h@x.com,c@x.com,,,2001-05-02T18:30:00-07:00,30,50,500
m5,b@x.com,h@x.com;c@x.com,,,2001-05-03T10:00:00-07:00,11,120,0
m6,x@y.com,z@y.com,,,2001-05-03T11:00:00-07:00,9,90,0
";

    fn fixture_file() -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(FIXTURE_CSV.as_bytes()).unwrap();
        f
    }

    fn fixture_config(f: &tempfile::NamedTempFile) -> PipelineConfig {
        PipelineConfig {
            input: vec![f.path().to_path_buf()],
            hosts: vec!["h@x.com".into()],
            k: 2,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_parse_from_an_empty_document() {
        let config = PipelineConfig::from_toml_str("").unwrap();
        assert_eq!(config.alpha, 0.5);
        assert_eq!(config.bins, 5);
        assert_eq!(config.k, 2);
        assert_eq!(config.max_iterations, 100);
        assert!(config.include_bcc);
        assert!(config.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::from_toml_str("alhpa = 0.5\n").unwrap_err();
        assert_eq!(err.module, "config");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn validation_happens_before_any_file_access() {
        // nonexistent input path, but the alpha error must win
        let config = PipelineConfig {
            input: vec![PathBuf::from("/definitely/not/a/file.csv")],
            hosts: vec!["h@x.com".into()],
            alpha: 3.0,
            ..Default::default()
        };
        let err = match full_run(&config) {
            Err(e) => e,
            Ok(_) => panic!("expected validation to fail"),
        };
        assert!(err.message.contains("alpha"));
        let config = PipelineConfig {
            k: 0,
            alpha: 0.5,
            ..config
        };
        let err = config.validate().unwrap_err();
        assert!(err.message.contains('k'));
    }

    #[test]
    fn bad_enums_are_caught_in_validation() {
        for (key, value) in [
            ("edge_policy", "everything"),
            ("domain_mode", "whatever"),
            ("direct_rule", "both"),
            ("path_cost", "hops"),
            ("timezone", "5 o'clock"),
        ] {
            let mut config = PipelineConfig::default();
            match key {
                "edge_policy" => config.edge_policy = value.into(),
                "domain_mode" => {
                    config.allow_domains = vec!["x.com".into()];
                    config.domain_mode = value.into();
                }
                "direct_rule" => config.direct_rule = value.into(),
                "path_cost" => config.path_cost = value.into(),
                _ => config.timezone = value.into(),
            }
            assert!(config.validate().is_err(), "{key}={value} slipped through");
        }
    }

    #[test]
    fn timezone_offsets_parse() {
        let mut config = PipelineConfig::default();
        config.timezone = "+05:30".into();
        assert!(matches!(config.time_policy().unwrap(), TimePolicy::Fixed(_)));
        config.timezone = "-08:00".into();
        assert!(matches!(config.time_policy().unwrap(), TimePolicy::Fixed(_)));
        config.timezone = "utc".into();
        assert!(matches!(config.time_policy().unwrap(), TimePolicy::Fixed(_)));
        config.timezone = "as-recorded".into();
        assert!(matches!(config.time_policy().unwrap(), TimePolicy::AsRecorded));
    }

    #[test]
    fn full_run_produces_a_consistent_clustering() {
        let f = fixture_file();
        let config = fixture_config(&f);
        let out = full_run(&config).unwrap();
        // m6 never mentions the host, so x@y.com and z@y.com are absent
        assert_eq!(out.net.vertex_count(), 4);
        assert!(out.net.vertex_id("x@y.com").is_none());
        assert_eq!(out.clustering.assignment.len(), 4);
        assert_eq!(out.report.k, 2);
        assert!(out.report.entropy.is_some(), "all vertices annotated");
        assert!((0.0..=1.0).contains(&out.report.density));
        // determinism end to end
        let again = full_run(&config).unwrap();
        assert_eq!(again.clustering.assignment, out.clustering.assignment);
        assert_eq!(again.report.objective.to_bits(), out.report.objective.to_bits());
    }

    #[test]
    fn sweep_emits_one_row_per_combination() {
        let f = fixture_file();
        let config = fixture_config(&f);
        let (corpus, aliases) = load_stage(&config).unwrap();
        let (mut net, records) = build_stage(&config, &corpus, aliases.as_ref()).unwrap();
        annotate_stage(&config, &mut net, &records, aliases.as_ref()).unwrap();
        let ks = [1, 2, 3];
        let alphas = [0.0, 0.5, 1.0];
        let reports = sweep_stage(&config, &net, &ks, &alphas).unwrap();
        assert_eq!(reports.len(), 9);
        for report in &reports {
            assert!(ks.contains(&report.k));
            assert!(alphas.contains(&report.alpha));
            assert!((0.0..=1.0).contains(&report.density));
        }
    }

    #[test]
    fn coverage_stage_reports_each_host() {
        let f = fixture_file();
        let mut config = fixture_config(&f);
        config.hosts = vec!["h@x.com".into(), "b@x.com".into()];
        let (corpus, aliases) = load_stage(&config).unwrap();
        let report = coverage_stage(&config, &corpus, aliases.as_ref(), None).unwrap();
        assert_eq!(report.accounts.len(), 2);
        assert_eq!(report.accounts[0].account, "h@x.com");
        // h corresponds with a, b, c
        assert_eq!(report.accounts[0].distinct_contacts, 3);
        // b's net: m1 (h -> a, b) brings in fellow-recipient a,
        // m5 (b -> h, c) brings in h and c
        assert_eq!(report.accounts[1].distinct_contacts, 3);
        assert_eq!(report.universe_size, corpus.address_count());
    }

    #[test]
    fn alias_fusion_flows_through_the_stages() {
        let mut corpus_file = tempfile::NamedTempFile::new().unwrap();
        corpus_file
            .write_all(
                "msg_id,from,to,cc,bcc,timestamp,subject_len,text_size,attach_size\n\
                 m1,h@x.com,a1@x.com,,,2001-05-01T09:30:00-07:00,10,100,0\n\
                 m2,a2@x.com,h@x.com,,,2001-05-01T10:30:00-07:00,10,100,0\n\
                 m3,h@x.com,b@x.com,,,2001-05-01T11:30:00-07:00,10,100,0\n"
                    .as_bytes(),
            )
            .unwrap();
        let mut alias_file = tempfile::NamedTempFile::new().unwrap();
        alias_file
            .write_all("alice = a1@x.com;a2@x.com\n".as_bytes())
            .unwrap();
        let config = PipelineConfig {
            input: vec![corpus_file.path().to_path_buf()],
            hosts: vec!["h@x.com".into()],
            alias_file: Some(alias_file.path().to_path_buf()),
            k: 1,
            ..Default::default()
        };
        let out = full_run(&config).unwrap();
        assert_eq!(out.net.vertex_count(), 3); // h, alice, b
        let alice = out.net.vertex_id("alice").unwrap();
        assert_eq!(out.net.vertex(alice).source_addresses.len(), 2);
        assert_eq!(
            out.net.edge_weight(out.net.vertex_id("h@x.com").unwrap(), alice),
            Some(2)
        );
        // fused vertex still received a profile
        assert!(out.net.vertex(alice).attributes.is_some());
    }

    #[test]
    fn k_and_alpha_specs_parse() {
        assert_eq!(parse_k_list("4").unwrap(), vec![4]);
        assert_eq!(parse_k_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_k_list("2,4,8").unwrap(), vec![2, 4, 8]);
        assert!(parse_k_list("5..2").is_err());
        assert!(parse_k_list("0").is_err());
        assert_eq!(parse_alpha_list("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_alpha_list("1.5").is_err());
        assert!(parse_alpha_list("x").is_err());
    }

    #[test]
    fn designation_lines_attach_to_vertices() {
        let f = fixture_file();
        let mut titles = tempfile::NamedTempFile::new().unwrap();
        titles
            .write_all("a@x.com = Trader\n# comment\nh@x.com = Manager\n".as_bytes())
            .unwrap();
        let mut config = fixture_config(&f);
        config.designation_file = Some(titles.path().to_path_buf());
        let out = full_run(&config).unwrap();
        let a = out.net.vertex_id("a@x.com").unwrap();
        assert_eq!(out.net.vertex(a).designation.as_deref(), Some("Trader"));
        let c = out.net.vertex_id("c@x.com").unwrap();
        assert_eq!(out.net.vertex(c).designation, None);
    }
}
