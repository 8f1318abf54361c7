//! `pinet` — community detection over personal email networks.
//!
//! Every subcommand reads the same flat TOML config (`--config`), and
//! every config key can be overridden by a flag of the same name. The
//! process exits 0 on success, 1 on any input problem (bad flags, bad
//! config, malformed data files), and 2 if an internal invariant broke.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pinet_core::corpus::write_corpus_csv;
use pinet_core::export::{
    write_clustering_csv, write_cpi_csv, write_dot, write_edge_csv, write_graphml,
    write_quality_json, write_trace_jsonl,
};
use pinet_core::evolution::compare_communities;
use pinet_core::pipeline::{
    annotate_stage, build_stage, cluster_stage, coverage_stage, evaluate_stage, load_stage,
    matrix_stage, parse_alpha_list, parse_k_list, sweep_stage, PipelineConfig, PipelineError,
};
use pinet_core::quality::QualityReport;

#[derive(Parser)]
#[command(
    name = "pinet",
    version,
    about = "Detect and track communities in personal email networks",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Log verbosity (-v info, -vv debug); RUST_LOG overrides
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Pipeline settings; each flag overrides the matching config key.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// Flat TOML config file
    #[arg(short, long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Metadata CSV (repeatable, replaces the config's input list)
    #[arg(long, value_name = "PATH")]
    input: Vec<PathBuf>,
    /// Host mailbox address or alias label (repeatable or comma-separated)
    #[arg(long = "host", alias = "hosts", value_name = "ADDRESS", value_delimiter = ',')]
    hosts: Vec<String>,
    /// Alias groups, lines of `label = addr;addr`
    #[arg(long, value_name = "PATH")]
    alias_file: Option<PathBuf>,
    /// Collapse alias groups into single vertices
    #[arg(long, value_name = "BOOL")]
    fuse_aliases: Option<bool>,
    /// Designations, lines of `address = title`
    #[arg(long, value_name = "PATH")]
    designation_file: Option<PathBuf>,
    /// sender-to-each-recipient | outgoing-only
    #[arg(long, value_name = "POLICY")]
    edge_policy: Option<String>,
    /// Keep only edges touching a host account
    #[arg(long, value_name = "BOOL")]
    strict_host_edges: Option<bool>,
    /// Count BCC recipients
    #[arg(long, value_name = "BOOL")]
    include_bcc: Option<bool>,
    /// Restrict participants to a domain (repeatable)
    #[arg(long = "allow-domain", value_name = "DOMAIN")]
    allow_domains: Vec<String>,
    /// drop-record | strip-participants
    #[arg(long, value_name = "MODE")]
    domain_mode: Option<String>,
    /// Equal-width bin count for numeric attributes
    #[arg(long, value_name = "N")]
    bins: Option<u32>,
    /// Day segment `label=HH:MM` (repeatable, replaces the default table)
    #[arg(long = "segment", value_name = "LABEL=HH:MM")]
    cts_table: Vec<String>,
    /// as-recorded | utc | ±HH:MM
    #[arg(long, value_name = "TZ")]
    timezone: Option<String>,
    /// Profile users from host-sent mail only
    #[arg(long, value_name = "BOOL")]
    cpi_outgoing_only: Option<bool>,
    /// Structural/contextual blend in [0,1]; lists allowed for sweep
    #[arg(long, value_name = "A[,A..]")]
    alpha: Option<String>,
    /// Five comma-separated attribute weights
    #[arg(long, value_name = "W,W,W,W,W")]
    attribute_weights: Option<String>,
    /// reciprocal | literal (how adjacent pairs report distance)
    #[arg(long, value_name = "RULE")]
    direct_rule: Option<String>,
    /// neg-log | reciprocal-sum (path cost model)
    #[arg(long, value_name = "MODEL")]
    path_cost: Option<String>,
    /// Community count; `2..10` or `2,4,8` allowed for sweep
    #[arg(long, value_name = "K[..K]")]
    k: Option<String>,
    /// K-medoid iteration cap
    #[arg(long, value_name = "N")]
    max_iterations: Option<u32>,
    /// Record quality metrics per iteration in the trace
    #[arg(long, value_name = "BOOL")]
    trace_quality: Option<bool>,
    /// Worker threads (0 = library default)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

/// A config with the k/alpha flag values expanded into lists: single
/// runs require exactly one of each, sweeps take the whole grid.
struct Resolved {
    config: PipelineConfig,
    k_list: Vec<usize>,
    alpha_list: Vec<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Resolved, PipelineError> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if !self.input.is_empty() {
            config.input = self.input.clone();
        }
        if !self.hosts.is_empty() {
            config.hosts = self.hosts.clone();
        }
        if let Some(path) = &self.alias_file {
            config.alias_file = Some(path.clone());
        }
        if let Some(fuse) = self.fuse_aliases {
            config.fuse_aliases = fuse;
        }
        if let Some(path) = &self.designation_file {
            config.designation_file = Some(path.clone());
        }
        if let Some(policy) = &self.edge_policy {
            config.edge_policy = policy.clone();
        }
        if let Some(strict) = self.strict_host_edges {
            config.strict_host_edges = strict;
        }
        if let Some(bcc) = self.include_bcc {
            config.include_bcc = bcc;
        }
        if !self.allow_domains.is_empty() {
            config.allow_domains = self.allow_domains.clone();
        }
        if let Some(mode) = &self.domain_mode {
            config.domain_mode = mode.clone();
        }
        if let Some(bins) = self.bins {
            config.bins = bins;
        }
        if !self.cts_table.is_empty() {
            config.cts_table = self.cts_table.clone();
        }
        if let Some(tz) = &self.timezone {
            config.timezone = tz.clone();
        }
        if let Some(outgoing) = self.cpi_outgoing_only {
            config.cpi_outgoing_only = outgoing;
        }
        if let Some(weights) = &self.attribute_weights {
            config.attribute_weights = parse_weights(weights)?;
        }
        if let Some(rule) = &self.direct_rule {
            config.direct_rule = rule.clone();
        }
        if let Some(model) = &self.path_cost {
            config.path_cost = model.clone();
        }
        if let Some(iters) = self.max_iterations {
            config.max_iterations = iters;
        }
        if let Some(trace) = self.trace_quality {
            config.trace_quality = trace;
        }
        if let Some(threads) = self.threads {
            config.threads = threads;
        }
        let alpha_list = match &self.alpha {
            Some(spec) => parse_alpha_list(spec)?,
            None => vec![config.alpha],
        };
        let k_list = match &self.k {
            Some(spec) => parse_k_list(spec)?,
            None => vec![config.k],
        };
        config.alpha = alpha_list[0];
        config.k = k_list[0];
        config.validate()?;
        Ok(Resolved {
            config,
            k_list,
            alpha_list,
        })
    }

    /// Resolve for a single-run command: k and alpha must be scalars.
    fn resolve_single(&self) -> Result<PipelineConfig, PipelineError> {
        let resolved = self.resolve()?;
        if resolved.k_list.len() != 1 || resolved.alpha_list.len() != 1 {
            return Err(PipelineError::input(
                "config",
                "validate",
                "this command needs a single k and a single alpha; ranges are for `sweep`",
            ));
        }
        Ok(resolved.config)
    }
}

fn parse_weights(spec: &str) -> Result<[f64; 5], PipelineError> {
    let bad = |msg: String| PipelineError::input("config", "parse-weights", msg);
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 5 {
        return Err(bad(format!(
            "expected 5 attribute weights, got {}",
            parts.len()
        )));
    }
    let mut weights = [0.0; 5];
    for (slot, part) in weights.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| bad(format!("bad weight `{part}`: {e}")))?;
    }
    Ok(weights)
}

#[derive(Subcommand)]
enum Command {
    /// Parse and normalize metadata CSVs, re-emitting one clean corpus
    Ingest {
        #[command(flatten)]
        common: ConfigArgs,
        /// Output path (stdout when absent)
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Build the interaction network and emit its edges
    Build {
        #[command(flatten)]
        common: ConfigArgs,
        /// edges | dot | graphml
        #[arg(long, default_value = "edges", value_name = "FORMAT")]
        format: String,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Attach per-user profiles and emit them as CSV
    Annotate {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compute the all-pairs distance matrix
    Distances {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Partition the network into k communities around medoid users
    Cluster {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Write per-iteration trace as JSON lines
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Also write the quality report as JSON
        #[arg(long, value_name = "PATH")]
        quality: Option<PathBuf>,
    },
    /// Cluster and report quality metrics as JSON (or one CSV row)
    Evaluate {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Emit `k,alpha,density,entropy,f_measure` instead of JSON
        #[arg(long)]
        csv: bool,
    },
    /// Report each host account's contact coverage
    Coverage {
        #[command(flatten)]
        common: ConfigArgs,
        /// Total known users (defaults to every address in the corpus)
        #[arg(long, value_name = "N")]
        universe: Option<usize>,
        /// Emit JSON instead of a text table
        #[arg(long)]
        json: bool,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compare communities between an old and a new snapshot
    Compare {
        #[command(flatten)]
        common: ConfigArgs,
        /// Old snapshot metadata CSV (repeatable)
        #[arg(long = "old-input", value_name = "PATH", required = true)]
        old_input: Vec<PathBuf>,
        /// New snapshot metadata CSV (repeatable)
        #[arg(long = "new-input", value_name = "PATH", required = true)]
        new_input: Vec<PathBuf>,
        /// Key members ranked per community
        #[arg(long, default_value_t = 3, value_name = "N")]
        key_members: usize,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Render the network as DOT, GraphML, or an edge list
    Export {
        #[command(flatten)]
        common: ConfigArgs,
        /// dot | graphml | edges
        #[arg(long, default_value = "dot", value_name = "FORMAT")]
        format: String,
        /// Run the clustering and color communities in the output
        #[arg(long)]
        with_clusters: bool,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Quality rows across a k × alpha grid
    Sweep {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli.command) {
        eprintln!("pinet: {e}");
        std::process::exit(e.exit_code());
    }
}

fn init_threads(config: &PipelineConfig) -> Result<(), PipelineError> {
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .map_err(|e| PipelineError::input("config", "threads", e))?;
    }
    Ok(())
}

/// Run `f` against `--out` or stdout.
fn with_output<F>(out: Option<&Path>, f: F) -> Result<(), PipelineError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), PipelineError>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                PipelineError::input("io", "create", format!("{}: {e}", path.display()))
            })?;
            let mut writer = BufWriter::new(file);
            f(&mut writer)?;
            writer
                .flush()
                .map_err(|e| PipelineError::input("io", "write", e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn io_input(err: std::io::Error) -> PipelineError {
    PipelineError::input("io", "write", err)
}

fn json_output<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), PipelineError> {
    with_output(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)
            .map_err(|e| PipelineError::internal("io", "serialize", e))?;
        writeln!(w).map_err(io_input)
    })
}

fn annotated_net(
    config: &PipelineConfig,
) -> Result<pinet_core::graph::PiNet, PipelineError> {
    let (corpus, aliases) = load_stage(config)?;
    let (mut net, records) = build_stage(config, &corpus, aliases.as_ref())?;
    annotate_stage(config, &mut net, &records, aliases.as_ref())?;
    Ok(net)
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest { common, out } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let (corpus, _) = load_stage(&config)?;
            log::info!(
                "ingested {} records, {} distinct addresses",
                corpus.records.len(),
                corpus.address_count()
            );
            with_output(out.as_deref(), |w| {
                write_corpus_csv(&corpus.records, w).map_err(io_input)
            })
        }
        Command::Build {
            common,
            format,
            out,
        } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let (corpus, aliases) = load_stage(&config)?;
            let (net, _) = build_stage(&config, &corpus, aliases.as_ref())?;
            log::info!(
                "built network: {} vertices, {} edges",
                net.vertex_count(),
                net.edge_count()
            );
            with_output(out.as_deref(), |w| match format.as_str() {
                "edges" => write_edge_csv(&net, w).map_err(io_input),
                "dot" => write_dot(&net, None, w).map_err(io_input),
                "graphml" => write_graphml(&net, None, w).map_err(io_input),
                other => Err(PipelineError::input(
                    "export",
                    "format",
                    format!("unknown format `{other}` (expected edges, dot, or graphml)"),
                )),
            })
        }
        Command::Annotate { common, out } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let net = annotated_net(&config)?;
            with_output(out.as_deref(), |w| {
                write_cpi_csv(&net, w).map_err(io_input)
            })
        }
        Command::Distances { common, out } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let net = annotated_net(&config)?;
            let matrix = matrix_stage(&config, &net)?;
            with_output(out.as_deref(), |w| matrix.write_csv(w).map_err(io_input))
        }
        Command::Cluster {
            common,
            out,
            trace,
            quality,
        } => {
            let mut config = common.resolve_single()?;
            if trace.is_some() && !config.trace_quality {
                // a requested trace should carry the quality columns
                config.trace_quality = true;
            }
            init_threads(&config)?;
            let net = annotated_net(&config)?;
            let matrix = matrix_stage(&config, &net)?;
            let clustering = cluster_stage(&config, &net, &matrix)?;
            log::info!(
                "clustering converged={} after {} iterations, objective {:.6}",
                clustering.converged,
                clustering.iterations_run,
                clustering.objective
            );
            if let Some(path) = &trace {
                with_output(Some(path), |w| {
                    write_trace_jsonl(&clustering.history, w)
                        .map_err(|e| PipelineError::internal("io", "serialize", e))
                })?;
            }
            if let Some(path) = &quality {
                let report = evaluate_stage(&config, &net, &clustering);
                with_output(Some(path), |w| {
                    write_quality_json(&report, w)
                        .map_err(|e| PipelineError::internal("io", "serialize", e))
                })?;
            }
            with_output(out.as_deref(), |w| {
                write_clustering_csv(&net, &clustering, w).map_err(io_input)
            })
        }
        Command::Evaluate { common, out, csv } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let net = annotated_net(&config)?;
            let matrix = matrix_stage(&config, &net)?;
            let clustering = cluster_stage(&config, &net, &matrix)?;
            let report = evaluate_stage(&config, &net, &clustering);
            if csv {
                with_output(out.as_deref(), |w| {
                    writeln!(w, "{}", QualityReport::CSV_HEADER).map_err(io_input)?;
                    writeln!(w, "{}", report.csv_row()).map_err(io_input)
                })
            } else {
                with_output(out.as_deref(), |w| {
                    write_quality_json(&report, w)
                        .map_err(|e| PipelineError::internal("io", "serialize", e))
                })
            }
        }
        Command::Coverage {
            common,
            universe,
            json,
            out,
        } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let (corpus, aliases) = load_stage(&config)?;
            let report = coverage_stage(&config, &corpus, aliases.as_ref(), universe)?;
            if json {
                json_output(&report, out.as_deref())
            } else {
                with_output(out.as_deref(), |w| {
                    writeln!(
                        w,
                        "{:<28} {:>9} {:>8} {:>9} {:>10} {:>5}",
                        "account", "contacts", "local%", "global%", "exclusive", "new"
                    )
                    .map_err(io_input)?;
                    for acct in &report.accounts {
                        writeln!(
                            w,
                            "{:<28} {:>9} {:>8.1} {:>9.1} {:>10} {:>5}",
                            acct.account,
                            acct.distinct_contacts,
                            acct.local_pct,
                            acct.global_pct,
                            acct.exclusive_contacts,
                            acct.new_contacts
                        )
                        .map_err(io_input)?;
                    }
                    writeln!(
                        w,
                        "union {} of {} known users ({:.1}%), overlap {}",
                        report.union_size,
                        report.universe_size,
                        report.union_pct,
                        report.overlap_size
                    )
                    .map_err(io_input)
                })
            }
        }
        Command::Compare {
            common,
            old_input,
            new_input,
            key_members,
            out,
        } => {
            let base = common.resolve_single()?;
            init_threads(&base)?;
            let mut old_config = base.clone();
            old_config.input = old_input;
            let mut new_config = base;
            new_config.input = new_input;
            let old = pinet_core::pipeline::full_run(&old_config)?;
            let new = pinet_core::pipeline::full_run(&new_config)?;
            let report = compare_communities(
                &old.net,
                &old.clustering,
                &new.net,
                &new.clustering,
                key_members,
            )?;
            json_output(&report, out.as_deref())
        }
        Command::Export {
            common,
            format,
            with_clusters,
            out,
        } => {
            let config = common.resolve_single()?;
            init_threads(&config)?;
            let net;
            let clustering;
            if with_clusters {
                net = annotated_net(&config)?;
                let matrix = matrix_stage(&config, &net)?;
                clustering = Some(cluster_stage(&config, &net, &matrix)?);
            } else {
                let (corpus, aliases) = load_stage(&config)?;
                let (built, _) = build_stage(&config, &corpus, aliases.as_ref())?;
                net = built;
                clustering = None;
            }
            with_output(out.as_deref(), |w| match format.as_str() {
                "dot" => write_dot(&net, clustering.as_ref(), w).map_err(io_input),
                "graphml" => write_graphml(&net, clustering.as_ref(), w).map_err(io_input),
                "edges" => write_edge_csv(&net, w).map_err(io_input),
                other => Err(PipelineError::input(
                    "export",
                    "format",
                    format!("unknown format `{other}` (expected dot, graphml, or edges)"),
                )),
            })
        }
        Command::Sweep { common, out } => {
            let resolved = common.resolve()?;
            init_threads(&resolved.config)?;
            let net = annotated_net(&resolved.config)?;
            let reports = sweep_stage(
                &resolved.config,
                &net,
                &resolved.k_list,
                &resolved.alpha_list,
            )?;
            with_output(out.as_deref(), |w| {
                writeln!(w, "{}", QualityReport::CSV_HEADER).map_err(io_input)?;
                for report in &reports {
                    writeln!(w, "{}", report.csv_row()).map_err(io_input)?;
                }
                Ok(())
            })
        }
    }
}
