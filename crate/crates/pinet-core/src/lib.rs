//! Community detection over personal email networks.
//!
//! The crate turns email metadata into a weighted, attributed
//! interaction graph centered on one or more host mailboxes, profiles
//! each user from message statistics, scores user pairs with a blend
//! of structural and profile similarity, partitions the graph around
//! k representative members, and reports quality metrics plus how
//! communities drift between two snapshots.
//!
//! Data flows through the modules in pipeline order:
//!
//! 1. [`corpus`] — parse and normalize metadata CSVs
//! 2. [`graph`] — build, merge, and fuse interaction networks
//! 3. [`cpi`] — discretize message statistics into user profiles
//! 4. [`similarity`] — pairwise similarity and path-based distances
//! 5. [`cluster`] — k-medoid partitioning over the distance matrix
//! 6. [`quality`] — density, entropy, f-measure, network statistics
//! 7. [`evolution`] — coverage and between-snapshot community drift
//! 8. [`export`] — DOT / GraphML / CSV / JSON writers
//!
//! [`pipeline`] wires those stages behind one flat config, and
//! [`synthetic`] generates deterministic test graphs.

pub mod cluster;
pub mod corpus;
pub mod cpi;
pub mod evolution;
pub mod export;
pub mod graph;
pub mod pipeline;
pub mod quality;
pub mod similarity;
pub mod synthetic;

pub use cluster::{cluster, ClusterOptions, Clustering, IterationTrace};
pub use corpus::{AliasMap, Corpus, EmailRecord, HostSet};
pub use cpi::{CpiExtractor, CpiMode, CtsTable, TagVector, TimePolicy, ATTRIBUTE_COUNT};
pub use evolution::{compare_communities, coverage, CoverageReport, DynamicsReport};
pub use graph::{build_pinet, fuse_accounts, merge_pinets, EdgePolicy, PiNet, Vertex, VertexId};
pub use pipeline::{full_run, PipelineConfig, PipelineError, RunOutput};
pub use quality::{network_stats, quality_report, NetworkStats, QualityReport};
pub use similarity::{
    build_distance_matrix, collaborative_similarity, contextual_similarity, pairwise_distance,
    structural_similarity, DirectRule, DistanceMatrix, PathCost, SimilarityParams,
};
