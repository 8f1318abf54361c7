//! Clustering quality measures and whole-network statistics.

use serde::Serialize;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

use crate::cluster::Clustering;
use crate::cpi::ATTRIBUTE_COUNT;
use crate::graph::{PiNet, VertexId};

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("vertex {vertex} has no attribute profile")]
    MissingAttributes { vertex: VertexId },
}

/// Share of all edges that run inside a community: the sum over
/// communities of their internal edge counts, divided by the total edge
/// count. 1.0 means no community is crossed by any edge; an edgeless
/// graph scores 0.
pub fn community_density(net: &PiNet, communities: &[Vec<VertexId>]) -> f64 {
    let total = net.edge_count();
    if total == 0 {
        return 0.0;
    }
    let internal: usize = communities.iter().map(|c| net.edges_within(c)).sum();
    internal as f64 / total as f64
}

/// Entropy of one attribute over a set of vertices: how mixed the tags
/// are, in bits. Uniform tags score 0; an even two-way split scores 1.
fn tag_entropy(
    net: &PiNet,
    members: &[VertexId],
    attribute: usize,
) -> Result<f64, QualityError> {
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &v in members {
        let tags = net
            .vertex(v)
            .attributes
            .ok_or(QualityError::MissingAttributes { vertex: v })?;
        *counts.entry(tags[attribute]).or_insert(0) += 1;
    }
    let total = members.len() as f64;
    let mut h = 0.0;
    for &count in counts.values() {
        let p = count as f64 / total;
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Attribute-weighted mean of per-community tag entropies, each
/// community weighted by its share of the whole vertex set. Lower is
/// purer; communities built from like-minded users approach 0.
pub fn community_entropy(
    net: &PiNet,
    communities: &[Vec<VertexId>],
    weights: &[f64; ATTRIBUTE_COUNT],
) -> Result<f64, QualityError> {
    let weight_total: f64 = weights.iter().sum();
    let n = net.vertex_count() as f64;
    if weight_total <= 0.0 || n == 0.0 {
        return Ok(0.0);
    }
    let mut result = 0.0;
    for (attribute, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut attr_entropy = 0.0;
        for members in communities {
            if members.is_empty() {
                continue;
            }
            let share = members.len() as f64 / n;
            attr_entropy += share * tag_entropy(net, members, attribute)?;
        }
        result += (w / weight_total) * attr_entropy;
    }
    Ok(result)
}

/// How well communities recover the grouping implied by each attribute.
///
/// Per attribute, every tag value defines a class; each class is scored
/// by the best F1 any single community achieves against it, classes are
/// combined weighted by their size, and the final score is the plain
/// mean over the five attributes. 1.0 means every attribute class maps
/// onto exactly one community.
pub fn f_measure(
    net: &PiNet,
    communities: &[Vec<VertexId>],
) -> Result<f64, QualityError> {
    let universe: Vec<VertexId> = communities.iter().flatten().copied().collect();
    if universe.is_empty() {
        return Ok(0.0);
    }
    let n = universe.len() as f64;
    let mut per_attribute_total = 0.0;
    for attribute in 0..ATTRIBUTE_COUNT {
        // class -> member set
        let mut classes: HashMap<u32, HashSet<VertexId>> = HashMap::new();
        for &v in &universe {
            let tags = net
                .vertex(v)
                .attributes
                .ok_or(QualityError::MissingAttributes { vertex: v })?;
            classes.entry(tags[attribute]).or_default().insert(v);
        }
        let mut attr_score = 0.0;
        for class in classes.values() {
            let mut best_f1 = 0.0f64;
            for members in communities {
                if members.is_empty() {
                    continue;
                }
                let overlap = members.iter().filter(|v| class.contains(v)).count() as f64;
                let precision = overlap / members.len() as f64;
                let recall = overlap / class.len() as f64;
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                best_f1 = best_f1.max(f1);
            }
            attr_score += best_f1 * (class.len() as f64 / n);
        }
        per_attribute_total += attr_score;
    }
    Ok(per_attribute_total / ATTRIBUTE_COUNT as f64)
}

/// Structure summary of a graph or an induced subgraph.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NetworkStats {
    pub vertices: usize,
    pub edges: usize,
    /// Realized fraction of all possible edges.
    pub graph_density: f64,
    /// Mean degree.
    pub avg_neighbors: f64,
    /// Mean local clustering coefficient; vertices with fewer than two
    /// neighbors contribute 0.
    pub clustering_coefficient: f64,
    /// Freeman centralization of the degree distribution: 0 when all
    /// degrees match, 1 for a perfect star.
    pub degree_centralization: f64,
}

/// Compute stats for the whole graph, or for the subgraph induced by
/// `subset`.
pub fn network_stats(net: &PiNet, subset: Option<&[VertexId]>) -> NetworkStats {
    // local ids + induced adjacency
    let ids: Vec<VertexId> = match subset {
        Some(s) => s.to_vec(),
        None => (0..net.vertex_count() as VertexId).collect(),
    };
    let position: HashMap<VertexId, usize> =
        ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (local, &v) in ids.iter().enumerate() {
        for &(u, _) in net.neighbors(v) {
            if let Some(&other) = position.get(&u) {
                if other != local {
                    adjacency[local].push(other);
                }
            }
        }
    }

    let n = ids.len();
    let edges = adjacency.iter().map(|row| row.len()).sum::<usize>() / 2;
    let graph_density = if n < 2 {
        0.0
    } else {
        2.0 * edges as f64 / (n as f64 * (n as f64 - 1.0))
    };
    let avg_neighbors = if n == 0 {
        0.0
    } else {
        2.0 * edges as f64 / n as f64
    };

    let neighbor_sets: Vec<HashSet<usize>> = adjacency
        .iter()
        .map(|row| row.iter().copied().collect())
        .collect();
    let mut cc_sum = 0.0;
    for row in &adjacency {
        let k = row.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[(i + 1)..] {
                if neighbor_sets[a].contains(&b) {
                    links += 1;
                }
            }
        }
        cc_sum += 2.0 * links as f64 / (k as f64 * (k as f64 - 1.0));
    }
    let clustering_coefficient = if n == 0 { 0.0 } else { cc_sum / n as f64 };

    let degree_centralization = if n < 3 {
        0.0
    } else {
        let max_degree = adjacency.iter().map(|r| r.len()).max().unwrap_or(0);
        let spread: usize = adjacency.iter().map(|r| max_degree - r.len()).sum();
        spread as f64 / ((n as f64 - 1.0) * (n as f64 - 2.0))
    };

    NetworkStats {
        vertices: n,
        edges,
        graph_density,
        avg_neighbors,
        clustering_coefficient,
        degree_centralization,
    }
}

/// One community's slice of a quality report.
#[derive(Debug, Clone, Serialize)]
pub struct CommunityReport {
    pub index: u32,
    /// `None` for the overflow group.
    pub medoid: Option<VertexId>,
    pub medoid_address: Option<String>,
    pub size: usize,
    pub internal_edges: usize,
}

/// Full evaluation of one clustering run.
#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub k: usize,
    pub alpha: f64,
    pub density: f64,
    /// `None` when vertices lack attribute profiles.
    pub entropy: Option<f64>,
    pub f_measure: Option<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: u32,
    pub overflow_size: usize,
    pub network: NetworkStats,
    pub communities: Vec<CommunityReport>,
}

impl QualityReport {
    pub const CSV_HEADER: &'static str = "k,alpha,density,entropy,f_measure";

    /// Flat row matching [`Self::CSV_HEADER`], for parameter sweeps.
    /// Missing scores print empty fields.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            self.k,
            self.alpha,
            self.density,
            opt(self.entropy),
            opt(self.f_measure)
        )
    }
}

/// Score a clustering. Density counts only the k proper communities;
/// entropy and the f-measure additionally require every clustered
/// vertex to carry a profile and come back `None` otherwise.
pub fn quality_report(
    net: &PiNet,
    clustering: &Clustering,
    alpha: f64,
    weights: &[f64; ATTRIBUTE_COUNT],
) -> QualityReport {
    let communities = clustering.communities();
    let density = community_density(net, &communities);
    let entropy = community_entropy(net, &communities, weights).ok();
    let f_measure = f_measure(net, &communities).ok();

    let mut reports = Vec::with_capacity(clustering.k + 1);
    for (idx, members) in communities.iter().enumerate() {
        let medoid = clustering.medoids[idx];
        reports.push(CommunityReport {
            index: idx as u32,
            medoid: Some(medoid),
            medoid_address: Some(net.vertex(medoid).address.clone()),
            size: members.len(),
            internal_edges: net.edges_within(members),
        });
    }
    let overflow = clustering.overflow_members();
    if !overflow.is_empty() {
        reports.push(CommunityReport {
            index: clustering.k as u32,
            medoid: None,
            medoid_address: None,
            size: overflow.len(),
            internal_edges: net.edges_within(&overflow),
        });
    }

    QualityReport {
        k: clustering.k,
        alpha,
        density,
        entropy,
        f_measure,
        objective: clustering.objective,
        converged: clustering.converged,
        iterations: clustering.iterations_run,
        overflow_size: overflow.len(),
        network: network_stats(net, None),
        communities: reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    fn net_from(edges: &[(u32, u32, u64)], n: u32) -> PiNet {
        let vertices: Vec<Vertex> = (0..n).map(|i| Vertex::new(format!("v{i}"))).collect();
        PiNet::from_parts(vertices, edges.iter().copied()).unwrap()
    }

    fn two_triangles() -> PiNet {
        net_from(&[(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)], 6)
    }

    #[test]
    fn density_is_one_when_no_edge_crosses_communities() {
        let net = two_triangles();
        let communities = vec![vec![0, 1, 2], vec![3, 4, 5]];
        assert_eq!(community_density(&net, &communities), 1.0);
    }

    #[test]
    fn density_counts_only_internal_edges() {
        let net = two_triangles();
        // everything in one community of the six, but listed as one group of 3
        let communities = vec![vec![0, 1, 2]];
        assert_eq!(community_density(&net, &communities), 0.5);
        assert_eq!(community_density(&net, &[]), 0.0);
    }

    #[test]
    fn density_of_edgeless_graph_is_zero() {
        let net = net_from(&[], 4);
        assert_eq!(community_density(&net, &[vec![0, 1], vec![2, 3]]), 0.0);
    }

    fn annotate_all(net: &mut PiNet, tags: &[[u32; 5]]) {
        for (i, t) in tags.iter().enumerate() {
            net.vertex_mut(i as u32).attributes = Some(*t);
        }
    }

    #[test]
    fn homogeneous_communities_have_zero_entropy() {
        let mut net = two_triangles();
        annotate_all(
            &mut net,
            &[[1; 5], [1; 5], [1; 5], [2; 5], [2; 5], [2; 5]],
        );
        let communities = vec![vec![0, 1, 2], vec![3, 4, 5]];
        let h = community_entropy(&net, &communities, &[1.0; 5]).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn even_split_on_one_attribute_is_one_bit() {
        let mut net = net_from(&[(0, 1, 1), (1, 2, 1), (2, 3, 1)], 4);
        annotate_all(
            &mut net,
            &[
                [1, 9, 9, 9, 9],
                [1, 8, 8, 8, 8],
                [2, 7, 7, 7, 7],
                [2, 6, 6, 6, 6],
            ],
        );
        let communities = vec![vec![0, 1, 2, 3]];
        let h = community_entropy(&net, &communities, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_requires_profiles() {
        let net = two_triangles(); // no attributes set
        let err = community_entropy(&net, &[vec![0, 1]], &[1.0; 5]).unwrap_err();
        assert!(matches!(err, QualityError::MissingAttributes { .. }));
    }

    #[test]
    fn mixing_communities_raises_entropy() {
        let mut net = two_triangles();
        annotate_all(
            &mut net,
            &[[1; 5], [1; 5], [1; 5], [2; 5], [2; 5], [2; 5]],
        );
        let aligned = community_entropy(&net, &[vec![0, 1, 2], vec![3, 4, 5]], &[1.0; 5]).unwrap();
        let mixed = community_entropy(&net, &[vec![0, 1, 3], vec![2, 4, 5]], &[1.0; 5]).unwrap();
        assert!(mixed > aligned);
    }

    #[test]
    fn f_measure_of_half_crossed_pairs_is_half() {
        // four vertices, tags x,x,y,y; communities {0,2} and {1,3}
        let mut net = net_from(&[(0, 1, 1), (1, 2, 1), (2, 3, 1)], 4);
        annotate_all(&mut net, &[[1; 5], [1; 5], [2; 5], [2; 5]]);
        let score = f_measure(&net, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert!((score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f_measure_is_one_for_perfect_alignment() {
        let mut net = two_triangles();
        annotate_all(
            &mut net,
            &[[1; 5], [1; 5], [1; 5], [2; 5], [2; 5], [2; 5]],
        );
        let score = f_measure(&net, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(score, 1.0);
        assert_eq!(f_measure(&net, &[]).unwrap(), 0.0);
    }

    #[test]
    fn stats_of_a_triangle() {
        let stats = network_stats(&net_from(&[(0, 1, 1), (1, 2, 1), (0, 2, 1)], 3), None);
        assert_eq!(stats.vertices, 3);
        assert_eq!(stats.edges, 3);
        assert_eq!(stats.graph_density, 1.0);
        assert_eq!(stats.avg_neighbors, 2.0);
        assert_eq!(stats.clustering_coefficient, 1.0);
        assert_eq!(stats.degree_centralization, 0.0);
    }

    #[test]
    fn stats_of_a_star_show_full_centralization() {
        let stats = network_stats(
            &net_from(&[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)], 5),
            None,
        );
        assert_eq!(stats.degree_centralization, 1.0);
        assert_eq!(stats.clustering_coefficient, 0.0);
        assert_eq!(stats.avg_neighbors, 8.0 / 5.0);
    }

    #[test]
    fn stats_handle_tiny_graphs_without_nan() {
        for n in 0..3u32 {
            let stats = network_stats(&net_from(&[], n), None);
            assert_eq!(stats.graph_density, 0.0);
            assert_eq!(stats.degree_centralization, 0.0);
            assert!(!stats.avg_neighbors.is_nan());
        }
    }

    #[test]
    fn subset_stats_use_the_induced_subgraph() {
        // K4; the subgraph on {0,1,2} is a triangle
        let net = net_from(
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)],
            4,
        );
        let sub = network_stats(&net, Some(&[0, 1, 2]));
        assert_eq!(sub.vertices, 3);
        assert_eq!(sub.edges, 3);
        assert_eq!(sub.graph_density, 1.0);
    }

    #[test]
    fn report_includes_overflow_group() {
        use crate::cluster::{cluster, ClusterOptions};
        use crate::similarity::{
            build_distance_matrix, DirectRule, PathCost, SimilarityParams,
        };
        let net = net_from(&[(0, 1, 1), (1, 2, 1)], 4); // vertex 3 isolated
        let params = SimilarityParams::with_alpha(1.0);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let clustering = cluster(&net, &matrix, 1, &ClusterOptions::default()).unwrap();
        let report = quality_report(&net, &clustering, 1.0, &[1.0; 5]);
        assert_eq!(report.overflow_size, 1);
        assert_eq!(report.communities.len(), 2);
        let overflow = report.communities.last().unwrap();
        assert_eq!(overflow.medoid, None);
        assert_eq!(overflow.size, 1);
        assert!(report.entropy.is_none()); // no profiles anywhere
        let row = report.csv_row();
        assert!(row.starts_with("1,1,"));
        assert_eq!(row.split(',').count(), 5);
    }
}
