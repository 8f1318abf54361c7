//! K-medoid community detection over a precomputed distance matrix.
//!
//! Fully deterministic: seeding ranks vertices by connectivity instead
//! of sampling, and every tie in assignment or medoid selection
//! resolves toward the smaller index. Running twice on the same input
//! produces identical clusterings.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{PiNet, VertexId};
use crate::similarity::DistanceMatrix;

#[derive(Debug, Clone)]
pub struct ClusterOptions {
    pub max_iterations: u32,
    /// Record density/entropy alongside each iteration of the trace.
    pub trace_quality: bool,
    /// Attribute weights for the entropy trace.
    pub attribute_weights: [f64; 5],
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            max_iterations: 100,
            trace_quality: false,
            attribute_weights: [1.0; 5],
        }
    }
}

/// Snapshot taken after each assignment pass.
#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub iteration: u32,
    pub medoids: Vec<VertexId>,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
}

/// Result of a clustering run. `assignment[v]` is a cluster index in
/// `0..k`, or exactly `k` for vertices unreachable from every medoid
/// (the overflow group).
#[derive(Debug, Clone, Serialize)]
pub struct Clustering {
    pub k: usize,
    pub assignment: Vec<u32>,
    pub medoids: Vec<VertexId>,
    pub iterations_run: u32,
    pub converged: bool,
    /// Sum of distances from each clustered vertex to its medoid;
    /// overflow vertices do not contribute.
    pub objective: f64,
    pub history: Vec<IterationTrace>,
}

impl Clustering {
    pub fn members(&self, cluster: u32) -> Vec<VertexId> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == cluster)
            .map(|(v, _)| v as VertexId)
            .collect()
    }

    /// The k proper communities, in medoid order. Overflow not included.
    pub fn communities(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            if (c as usize) < self.k {
                out[c as usize].push(v as VertexId);
            }
        }
        out
    }

    pub fn overflow_members(&self) -> Vec<VertexId> {
        self.members(self.k as u32)
    }

    pub fn has_overflow(&self) -> bool {
        self.assignment.iter().any(|&c| c as usize == self.k)
    }
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k must be between 1 and the vertex count ({n}), got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("distance matrix is {found}x{found} but the graph has {expected} vertices")]
    MatrixShape { expected: usize, found: usize },
}

/// Seed medoids: the k best-connected vertices, ranked by degree, then
/// total incident weight, then vertex id.
pub fn initial_medoids(net: &PiNet, k: usize) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..net.vertex_count() as VertexId).collect();
    order.sort_unstable_by(|&a, &b| {
        net.degree(b)
            .cmp(&net.degree(a))
            .then_with(|| net.incident_weight(b).cmp(&net.incident_weight(a)))
            .then_with(|| a.cmp(&b))
    });
    order.truncate(k);
    order
}

/// Assign every vertex to its nearest medoid (ties to the earliest
/// medoid) and total the objective. Vertices at infinite distance from
/// all medoids land in the overflow group `medoids.len()`.
pub fn assign_vertices(matrix: &DistanceMatrix, medoids: &[VertexId]) -> (Vec<u32>, f64) {
    let k = medoids.len();
    let assignment: Vec<u32> = (0..matrix.n())
        .into_par_iter()
        .map(|v| {
            let mut best = f64::INFINITY;
            let mut best_idx = k as u32;
            for (idx, &m) in medoids.iter().enumerate() {
                let d = matrix.get(v as VertexId, m);
                if d < best {
                    best = d;
                    best_idx = idx as u32;
                }
            }
            best_idx
        })
        .collect();
    let mut objective = 0.0;
    for (v, &c) in assignment.iter().enumerate() {
        if (c as usize) < k {
            objective += matrix.get(v as VertexId, medoids[c as usize]);
        }
    }
    (assignment, objective)
}

/// Re-center each cluster on the member with the smallest total
/// distance to its co-members (ties to the smallest id). A cluster that
/// somehow lost all members keeps its previous medoid.
pub fn update_medoids(
    matrix: &DistanceMatrix,
    assignment: &[u32],
    medoids: &[VertexId],
) -> Vec<VertexId> {
    let k = medoids.len();
    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); k];
    for (v, &c) in assignment.iter().enumerate() {
        if (c as usize) < k {
            members[c as usize].push(v as VertexId);
        }
    }
    members
        .par_iter()
        .enumerate()
        .map(|(q, cluster)| {
            if cluster.is_empty() {
                log::warn!("cluster {q} lost all members, keeping medoid {}", medoids[q]);
                return medoids[q];
            }
            let mut best = f64::INFINITY;
            let mut best_vertex = cluster[0];
            for &candidate in cluster {
                let total: f64 = cluster
                    .iter()
                    .map(|&other| matrix.get(candidate, other))
                    .sum();
                if total < best {
                    best = total;
                    best_vertex = candidate;
                }
            }
            best_vertex
        })
        .collect()
}

/// Alternate assignment and re-centering until the medoid set repeats
/// or `max_iterations` passes have run.
pub fn cluster(
    net: &PiNet,
    matrix: &DistanceMatrix,
    k: usize,
    options: &ClusterOptions,
) -> Result<Clustering, ClusterError> {
    let n = net.vertex_count();
    if matrix.n() != n {
        return Err(ClusterError::MatrixShape {
            expected: n,
            found: matrix.n(),
        });
    }
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }

    let mut medoids = initial_medoids(net, k);
    let (mut assignment, mut objective) = assign_vertices(matrix, &medoids);
    let mut history = Vec::new();
    let record = |iteration: u32,
                      medoids: &[VertexId],
                      assignment: &[u32],
                      objective: f64,
                      history: &mut Vec<IterationTrace>| {
        let (density, entropy) = if options.trace_quality {
            let communities = communities_of(assignment, k);
            let density = crate::quality::community_density(net, &communities);
            let entropy =
                crate::quality::community_entropy(net, &communities, &options.attribute_weights)
                    .ok();
            (Some(density), entropy)
        } else {
            (None, None)
        };
        history.push(IterationTrace {
            iteration,
            medoids: medoids.to_vec(),
            objective,
            density,
            entropy,
        });
    };
    record(0, &medoids, &assignment, objective, &mut history);

    let mut converged = false;
    let mut iterations_run = 0;
    while iterations_run < options.max_iterations {
        let next = update_medoids(matrix, &assignment, &medoids);
        if next == medoids {
            converged = true;
            break;
        }
        medoids = next;
        iterations_run += 1;
        let (a, o) = assign_vertices(matrix, &medoids);
        assignment = a;
        objective = o;
        record(iterations_run, &medoids, &assignment, objective, &mut history);
    }

    Ok(Clustering {
        k,
        assignment,
        medoids,
        iterations_run,
        converged,
        objective,
        history,
    })
}

fn communities_of(assignment: &[u32], k: usize) -> Vec<Vec<VertexId>> {
    let mut out = vec![Vec::new(); k];
    for (v, &c) in assignment.iter().enumerate() {
        if (c as usize) < k {
            out[c as usize].push(v as VertexId);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;
    use crate::similarity::{
        build_distance_matrix, DirectRule, PathCost, SimilarityParams,
    };
    use proptest::prelude::*;

    fn net_from(edges: &[(u32, u32, u64)], n: u32) -> PiNet {
        let vertices: Vec<Vertex> = (0..n).map(|i| Vertex::new(format!("v{i}"))).collect();
        PiNet::from_parts(vertices, edges.iter().copied()).unwrap()
    }

    /// Two 4-cliques with interleaved ids: evens form one, odds the other.
    fn two_cliques() -> PiNet {
        let mut edges = Vec::new();
        for group in [[0u32, 2, 4, 6], [1u32, 3, 5, 7]] {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edges.push((group[i], group[j], 1));
                }
            }
        }
        net_from(&edges, 8)
    }

    #[test]
    fn disjoint_cliques_separate_perfectly() {
        let net = two_cliques();
        let params = SimilarityParams::with_alpha(1.0);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let result = cluster(&net, &matrix, 2, &ClusterOptions::default()).unwrap();
        assert!(result.converged);
        assert!(!result.has_overflow());
        let communities = result.communities();
        let mut evens = communities
            .iter()
            .find(|c| c.contains(&0))
            .unwrap()
            .clone();
        evens.sort_unstable();
        assert_eq!(evens, vec![0, 2, 4, 6]);
        let mut odds = communities.iter().find(|c| c.contains(&1)).unwrap().clone();
        odds.sort_unstable();
        assert_eq!(odds, vec![1, 3, 5, 7]);
    }

    #[test]
    fn seeding_ranks_by_degree_weight_then_id() {
        // 0 has degree 3; 1 and 2 have degree 2, but 2 carries more weight
        let net = net_from(
            &[(0, 1, 1), (0, 2, 5), (0, 3, 1), (1, 3, 1), (2, 3, 5)],
            4,
        );
        // degrees: 0->3, 3->3, 1->2, 2->2; weight: 0->7, 3->7 (tie broken by id)
        assert_eq!(initial_medoids(&net, 3), vec![0, 3, 2]);
    }

    #[test]
    fn unreachable_vertices_land_in_overflow() {
        let net = net_from(&[(0, 1, 1), (1, 2, 1)], 4); // vertex 3 isolated
        let params = SimilarityParams::with_alpha(1.0);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let result = cluster(&net, &matrix, 1, &ClusterOptions::default()).unwrap();
        assert_eq!(result.assignment[3], 1); // k == 1, overflow index 1
        assert!(result.has_overflow());
        assert_eq!(result.overflow_members(), vec![3]);
        // the overflow vertex contributes nothing to the objective
        assert!(result.objective.is_finite());
    }

    #[test]
    fn k_equal_to_n_gives_singletons_with_zero_objective() {
        let net = net_from(&[(0, 1, 1), (1, 2, 1), (2, 3, 1)], 4);
        let params = SimilarityParams::with_alpha(1.0);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let result = cluster(&net, &matrix, 4, &ClusterOptions::default()).unwrap();
        assert_eq!(result.objective, 0.0);
        let mut medoid_clusters: Vec<u32> = result
            .medoids
            .iter()
            .map(|&m| result.assignment[m as usize])
            .collect();
        medoid_clusters.sort_unstable();
        assert_eq!(medoid_clusters, vec![0, 1, 2, 3]);
    }

    #[test]
    fn invalid_k_and_matrix_shape_are_rejected() {
        let net = net_from(&[(0, 1, 1)], 2);
        let params = SimilarityParams::with_alpha(1.0);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        assert!(matches!(
            cluster(&net, &matrix, 0, &ClusterOptions::default()),
            Err(ClusterError::InvalidK { .. })
        ));
        assert!(matches!(
            cluster(&net, &matrix, 3, &ClusterOptions::default()),
            Err(ClusterError::InvalidK { .. })
        ));
        let small = DistanceMatrix::from_fn(1, |_, _| 0.0);
        assert!(matches!(
            cluster(&net, &small, 1, &ClusterOptions::default()),
            Err(ClusterError::MatrixShape { .. })
        ));
    }

    #[test]
    fn assignment_ties_prefer_the_earliest_medoid() {
        // a 5-path: vertex 2 sits exactly between medoids 0 and 4
        let matrix = DistanceMatrix::from_fn(5, |i, j| (j - i) as f64);
        let (assignment, _) = assign_vertices(&matrix, &[0, 4]);
        assert_eq!(assignment[2], 0);
        assert_eq!(assignment, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn medoid_update_tie_prefers_smaller_id() {
        // symmetric triangle: every member has the same total distance
        let matrix = DistanceMatrix::from_fn(3, |_, _| 1.0);
        let new = update_medoids(&matrix, &[0, 0, 0], &[2]);
        assert_eq!(new, vec![0]);
    }

    #[test]
    fn quality_trace_records_each_pass() {
        let net = two_cliques();
        let params = SimilarityParams::with_alpha(1.0);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let options = ClusterOptions {
            trace_quality: true,
            ..Default::default()
        };
        let result = cluster(&net, &matrix, 2, &options).unwrap();
        assert!(!result.history.is_empty());
        for trace in &result.history {
            let density = trace.density.expect("density traced");
            assert!((0.0..=1.0 + 1e-12).contains(&density));
            assert!(trace.entropy.is_none()); // no profiles on this net
        }
        assert_eq!(result.history.last().unwrap().objective, result.objective);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn objective_never_increases_between_passes(
            edges in proptest::collection::vec((0u32..10, 0u32..10, 1u64..6), 5..30),
            k in 1usize..5,
        ) {
            let edges: Vec<(u32, u32, u64)> =
                edges.into_iter().filter(|(a, b, _)| a != b).collect();
            prop_assume!(!edges.is_empty());
            let net = net_from(&edges, 10);
            let params = SimilarityParams::with_alpha(1.0);
            let matrix = build_distance_matrix(
                &net, &params, DirectRule::Reciprocal, PathCost::NegLog);
            let result = cluster(&net, &matrix, k, &ClusterOptions::default()).unwrap();
            for pair in result.history.windows(2) {
                prop_assert!(pair[1].objective <= pair[0].objective + 1e-9,
                    "objective rose from {} to {}", pair[0].objective, pair[1].objective);
            }
        }

        #[test]
        fn clustering_is_deterministic(
            edges in proptest::collection::vec((0u32..9, 0u32..9, 1u64..6), 4..25),
            k in 1usize..4,
        ) {
            let edges: Vec<(u32, u32, u64)> =
                edges.into_iter().filter(|(a, b, _)| a != b).collect();
            prop_assume!(!edges.is_empty());
            let net = net_from(&edges, 9);
            let params = SimilarityParams::default();
            let matrix = build_distance_matrix(
                &net, &params, DirectRule::Reciprocal, PathCost::NegLog);
            let a = cluster(&net, &matrix, k, &ClusterOptions::default()).unwrap();
            let b = cluster(&net, &matrix, k, &ClusterOptions::default()).unwrap();
            prop_assert_eq!(a.assignment, b.assignment);
            prop_assert_eq!(a.medoids, b.medoids);
            prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        }
    }
}
