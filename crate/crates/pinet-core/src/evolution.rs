//! Cross-account coverage and community dynamics over time.
//!
//! Coverage answers how much of a known user universe a handful of
//! mailboxes already reaches, account by account. Dynamics compares two
//! clusterings of (roughly) the same population taken at different
//! times — who moved, which communities map onto which, and whether the
//! key people stayed central.

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

use crate::cluster::Clustering;
use crate::graph::{PiNet, VertexId};
use crate::quality::{network_stats, NetworkStats};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("universe of {universe} users cannot contain a contact union of {union}")]
    UniverseTooSmall { union: usize, universe: usize },
    #[error("the two networks share no vertices")]
    DisjointVertexSets,
    #[error("key member count must be at least 1")]
    InvalidKeyCount,
}

/// Reach of one account's network.
#[derive(Debug, Clone, Serialize)]
pub struct AccountCoverage {
    pub account: String,
    /// Non-host addresses in this account's network.
    pub distinct_contacts: usize,
    /// Contacts as a percentage of the combined contact union.
    pub local_pct: f64,
    /// Contacts as a percentage of the full universe.
    pub global_pct: f64,
    /// Contacts no other account reaches.
    pub exclusive_contacts: usize,
    /// Contacts not already reached by an earlier-listed account.
    pub new_contacts: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub accounts: Vec<AccountCoverage>,
    pub union_size: usize,
    pub universe_size: usize,
    /// Contacts counted more than once across accounts.
    pub overlap_size: usize,
    pub union_pct: f64,
}

/// Measure how far the given accounts' contact sets reach into a
/// universe of `universe_size` known users. Account order matters only
/// for the incremental `new_contacts` column.
pub fn coverage(
    nets: &[(&str, &PiNet)],
    universe_size: usize,
) -> Result<CoverageReport, EvolutionError> {
    let contact_sets: Vec<BTreeSet<&str>> = nets
        .iter()
        .map(|(_, net)| {
            net.vertices()
                .iter()
                .filter(|v| !v.is_host)
                .map(|v| v.address.as_str())
                .collect()
        })
        .collect();

    let mut union: BTreeSet<&str> = BTreeSet::new();
    for set in &contact_sets {
        union.extend(set.iter().copied());
    }
    if union.len() > universe_size {
        return Err(EvolutionError::UniverseTooSmall {
            union: union.len(),
            universe: universe_size,
        });
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut accounts = Vec::with_capacity(nets.len());
    for (idx, ((label, _), contacts)) in nets.iter().zip(&contact_sets).enumerate() {
        let exclusive = contacts
            .iter()
            .filter(|&&c| {
                contact_sets
                    .iter()
                    .enumerate()
                    .all(|(other, set)| other == idx || !set.contains(c))
            })
            .count();
        let new_contacts = contacts.iter().filter(|&&c| !seen.contains(c)).count();
        seen.extend(contacts.iter().copied());
        let pct = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                100.0 * num as f64 / den as f64
            }
        };
        accounts.push(AccountCoverage {
            account: label.to_string(),
            distinct_contacts: contacts.len(),
            local_pct: pct(contacts.len(), union.len()),
            global_pct: pct(contacts.len(), universe_size),
            exclusive_contacts: exclusive,
            new_contacts,
        });
    }

    let total: usize = contact_sets.iter().map(|s| s.len()).sum();
    Ok(CoverageReport {
        union_size: union.len(),
        universe_size,
        overlap_size: total - union.len(),
        union_pct: if universe_size == 0 {
            0.0
        } else {
            100.0 * union.len() as f64 / universe_size as f64
        },
        accounts,
    })
}

/// Change in network statistics between two snapshots (new minus old).
#[derive(Debug, Clone, Serialize)]
pub struct StatsDelta {
    pub vertices: i64,
    pub edges: i64,
    pub graph_density: f64,
    pub avg_neighbors: f64,
    pub clustering_coefficient: f64,
    pub degree_centralization: f64,
}

pub fn stats_delta(old: &NetworkStats, new: &NetworkStats) -> StatsDelta {
    StatsDelta {
        vertices: new.vertices as i64 - old.vertices as i64,
        edges: new.edges as i64 - old.edges as i64,
        graph_density: new.graph_density - old.graph_density,
        avg_neighbors: new.avg_neighbors - old.avg_neighbors,
        clustering_coefficient: new.clustering_coefficient - old.clustering_coefficient,
        degree_centralization: new.degree_centralization - old.degree_centralization,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsReport {
    pub shared_vertices: usize,
    /// Jaccard overlap of every old community (rows) with every new
    /// community (columns), computed over shared addresses.
    pub overlap: Vec<Vec<f64>>,
    /// Best-matching new community per old community; `None` when no
    /// shared member of the old community reached any proper new
    /// community.
    pub matches: Vec<Option<usize>>,
    pub old_key_members: Vec<Vec<String>>,
    pub new_key_members: Vec<Vec<String>>,
    /// Old key members that are key members again in the new community
    /// they ended up in. Sorted.
    pub retained_key_members: Vec<String>,
    /// Shared addresses that did not follow their old community to its
    /// matched new community. Sorted.
    pub migrated: Vec<String>,
    pub stats: StatsDelta,
}

/// The `count` members of a community with the most edges to their own
/// co-members (ties toward the smaller vertex id), as addresses.
pub fn key_members(net: &PiNet, members: &[VertexId], count: usize) -> Vec<String> {
    let set: BTreeSet<VertexId> = members.iter().copied().collect();
    let mut ranked: Vec<(usize, VertexId)> = members
        .iter()
        .map(|&v| {
            let intra = net
                .neighbors(v)
                .iter()
                .filter(|(u, _)| set.contains(u))
                .count();
            (intra, v)
        })
        .collect();
    ranked.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    ranked
        .into_iter()
        .take(count)
        .map(|(_, v)| net.vertex(v).address.clone())
        .collect()
}

/// Compare an older and a newer clustering of overlapping populations.
/// Matching is by address, so the two graphs may index their vertices
/// differently.
pub fn compare_communities(
    old_net: &PiNet,
    old: &Clustering,
    new_net: &PiNet,
    new: &Clustering,
    key_count: usize,
) -> Result<DynamicsReport, EvolutionError> {
    if key_count == 0 {
        return Err(EvolutionError::InvalidKeyCount);
    }
    let shared: BTreeSet<&str> = old_net
        .vertices()
        .iter()
        .map(|v| v.address.as_str())
        .filter(|addr| new_net.vertex_id(addr).is_some())
        .collect();
    if shared.is_empty() {
        return Err(EvolutionError::DisjointVertexSets);
    }

    // address -> proper new community (overflow omitted)
    let mut new_home: HashMap<&str, usize> = HashMap::new();
    let new_communities = new.communities();
    for (c, members) in new_communities.iter().enumerate() {
        for &v in members {
            new_home.insert(new_net.vertex(v).address.as_str(), c);
        }
    }

    let old_communities = old.communities();
    let old_shared: Vec<BTreeSet<&str>> = old_communities
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&v| old_net.vertex(v).address.as_str())
                .filter(|a| shared.contains(a))
                .collect()
        })
        .collect();
    let new_shared: Vec<BTreeSet<&str>> = new_communities
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&v| new_net.vertex(v).address.as_str())
                .filter(|a| shared.contains(a))
                .collect()
        })
        .collect();

    let mut overlap = vec![vec![0.0; new_shared.len()]; old_shared.len()];
    let mut matches: Vec<Option<usize>> = vec![None; old_shared.len()];
    for (q, old_set) in old_shared.iter().enumerate() {
        let mut best = 0.0;
        for (c, new_set) in new_shared.iter().enumerate() {
            let inter = old_set.intersection(new_set).count();
            let uni = old_set.union(new_set).count();
            let j = if uni == 0 { 0.0 } else { inter as f64 / uni as f64 };
            overlap[q][c] = j;
            if j > best {
                best = j;
                matches[q] = Some(c);
            }
        }
    }

    let mut migrated: BTreeSet<String> = BTreeSet::new();
    for (q, old_set) in old_shared.iter().enumerate() {
        for &addr in old_set {
            let stayed = match (matches[q], new_home.get(addr)) {
                (Some(m), Some(&c)) => m == c,
                _ => false,
            };
            if !stayed {
                migrated.insert(addr.to_string());
            }
        }
    }

    let old_keys: Vec<Vec<String>> = old_communities
        .iter()
        .map(|members| key_members(old_net, members, key_count))
        .collect();
    let new_keys: Vec<Vec<String>> = new_communities
        .iter()
        .map(|members| key_members(new_net, members, key_count))
        .collect();
    let mut retained: BTreeSet<String> = BTreeSet::new();
    for keys in &old_keys {
        for addr in keys {
            if let Some(&c) = new_home.get(addr.as_str()) {
                if new_keys[c].contains(addr) {
                    retained.insert(addr.clone());
                }
            }
        }
    }

    let stats = stats_delta(
        &network_stats(old_net, None),
        &network_stats(new_net, None),
    );

    Ok(DynamicsReport {
        shared_vertices: shared.len(),
        overlap,
        matches,
        old_key_members: old_keys,
        new_key_members: new_keys,
        retained_key_members: retained.into_iter().collect(),
        migrated: migrated.into_iter().collect(),
        stats,
    })
}

/// Convenience map used by text output: community index -> matched
/// index and score.
pub fn match_summary(report: &DynamicsReport) -> BTreeMap<usize, (Option<usize>, f64)> {
    report
        .matches
        .iter()
        .enumerate()
        .map(|(q, &m)| {
            let score = m.map(|c| report.overlap[q][c]).unwrap_or(0.0);
            (q, (m, score))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::HostSet;
    use crate::graph::{build_pinet, EdgePolicy, Vertex};
    use chrono::DateTime;

    fn record(msg_id: &str, sender: &str, recipients: &[&str]) -> crate::corpus::EmailRecord {
        crate::corpus::EmailRecord {
            msg_id: msg_id.to_string(),
            sender: sender.to_string(),
            recipients: recipients.iter().map(|s| s.to_string()).collect(),
            timestamp: DateTime::parse_from_rfc3339("2001-05-01T09:30:00-07:00").unwrap(),
            subject_len: 1,
            text_size: 1,
            attach_size: 0,
            email_size: 2,
        }
    }

    fn star_net(host: &str, contacts: &[&str]) -> PiNet {
        let host_set = HostSet::new([host]).unwrap();
        let records: Vec<_> = contacts
            .iter()
            .enumerate()
            .map(|(i, c)| record(&format!("{host}-{i}"), host, &[c]))
            .collect();
        build_pinet(&records, &host_set, EdgePolicy::SenderToEachRecipient, false)
    }

    #[test]
    fn coverage_accounts_for_overlap_and_order() {
        let a = star_net("a@corp", &["x", "y", "z"]);
        let b = star_net("b@corp", &["y", "z", "w"]);
        let report = coverage(&[("a@corp", &a), ("b@corp", &b)], 5).unwrap();
        assert_eq!(report.union_size, 4);
        assert_eq!(report.overlap_size, 2); // y and z counted twice
        assert!((report.union_pct - 80.0).abs() < 1e-12);
        let first = &report.accounts[0];
        assert_eq!(first.distinct_contacts, 3);
        assert!((first.local_pct - 75.0).abs() < 1e-12);
        assert!((first.global_pct - 60.0).abs() < 1e-12);
        assert_eq!(first.exclusive_contacts, 1); // x
        assert_eq!(first.new_contacts, 3);
        let second = &report.accounts[1];
        assert_eq!(second.exclusive_contacts, 1); // w
        assert_eq!(second.new_contacts, 1); // only w is new
    }

    #[test]
    fn coverage_rejects_an_undersized_universe() {
        let a = star_net("a@corp", &["x", "y", "z"]);
        let err = coverage(&[("a@corp", &a)], 2).unwrap_err();
        assert!(matches!(err, EvolutionError::UniverseTooSmall { union: 3, universe: 2 }));
    }

    fn two_clique_net(groups: [&[&str]; 2]) -> PiNet {
        let mut addresses: Vec<&str> = Vec::new();
        for g in &groups {
            addresses.extend(g.iter().copied());
        }
        let vertices: Vec<Vertex> = addresses.iter().map(|a| Vertex::new(*a)).collect();
        let idx = |addr: &str| addresses.iter().position(|a| *a == addr).unwrap() as u32;
        let mut edges = Vec::new();
        for g in &groups {
            for i in 0..g.len() {
                for j in (i + 1)..g.len() {
                    edges.push((idx(g[i]), idx(g[j]), 1u64));
                }
            }
        }
        PiNet::from_parts(vertices, edges).unwrap()
    }

    /// Clustering literal for tests that exercise the comparison logic
    /// in isolation from the clustering algorithm.
    fn manual(k: usize, assignment: Vec<u32>, medoids: Vec<VertexId>) -> Clustering {
        Clustering {
            k,
            assignment,
            medoids,
            iterations_run: 0,
            converged: true,
            objective: 0.0,
            history: Vec::new(),
        }
    }

    #[test]
    fn comparing_a_clustering_with_itself_is_a_fixed_point() {
        let net = two_clique_net([&["a", "b", "c"], &["d", "e", "f"]]);
        let clustering = manual(2, vec![0, 0, 0, 1, 1, 1], vec![0, 3]);
        let report = compare_communities(&net, &clustering, &net, &clustering, 1).unwrap();
        assert_eq!(report.shared_vertices, 6);
        assert!(report.migrated.is_empty());
        for (q, m) in report.matches.iter().enumerate() {
            assert_eq!(*m, Some(q));
            assert_eq!(report.overlap[q][q], 1.0);
        }
        assert_eq!(report.stats.vertices, 0);
        assert_eq!(report.stats.edges, 0);
        // every key member trivially keeps its role
        assert_eq!(report.retained_key_members.len(), 2);
    }

    #[test]
    fn a_defector_shows_up_as_migrated() {
        let old = two_clique_net([&["a", "b", "c"], &["d", "e", "f"]]);
        let new = two_clique_net([&["a", "b"], &["c", "d", "e", "f"]]);
        let old_clustering = manual(2, vec![0, 0, 0, 1, 1, 1], vec![0, 3]);
        let new_clustering = manual(2, vec![0, 0, 1, 1, 1, 1], vec![0, 3]);
        let report =
            compare_communities(&old, &old_clustering, &new, &new_clustering, 1).unwrap();
        assert_eq!(report.migrated, vec!["c".to_string()]);
        assert_eq!(report.shared_vertices, 6);
        assert_eq!(report.matches, vec![Some(0), Some(1)]);
        assert!((report.overlap[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.overlap[1][1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn disjoint_populations_are_rejected() {
        let old = two_clique_net([&["a", "b", "c"], &["d", "e", "f"]]);
        let new = two_clique_net([&["g", "h", "i"], &["j", "k", "l"]]);
        let clustering = manual(2, vec![0, 0, 0, 1, 1, 1], vec![0, 3]);
        assert!(matches!(
            compare_communities(&old, &clustering, &new, &clustering, 1),
            Err(EvolutionError::DisjointVertexSets)
        ));
        assert!(matches!(
            compare_communities(&old, &clustering, &old, &clustering, 0),
            Err(EvolutionError::InvalidKeyCount)
        ));
    }

    #[test]
    fn key_members_rank_by_internal_connections() {
        // b is the hub of a triangle+pendant: a-b, b-c, a-c, b-d
        let vertices: Vec<Vertex> = ["a", "b", "c", "d"].iter().map(|s| Vertex::new(*s)).collect();
        let net =
            PiNet::from_parts(vertices, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (1, 3, 1)]).unwrap();
        assert_eq!(key_members(&net, &[0, 1, 2, 3], 1), vec!["b".to_string()]);
        assert_eq!(
            key_members(&net, &[0, 1, 2, 3], 3),
            vec!["b".to_string(), "a".to_string(), "c".to_string()]
        );
        // within the subgroup {a, c, d}, d has no internal edges
        assert_eq!(
            key_members(&net, &[0, 2, 3], 2),
            vec!["a".to_string(), "c".to_string()]
        );
    }

    #[test]
    fn match_summary_pairs_scores_with_matches() {
        let net = two_clique_net([&["a", "b", "c"], &["d", "e", "f"]]);
        let clustering = manual(2, vec![0, 0, 0, 1, 1, 1], vec![0, 3]);
        let report = compare_communities(&net, &clustering, &net, &clustering, 1).unwrap();
        let summary = match_summary(&report);
        assert_eq!(summary[&0], (Some(0), 1.0));
        assert_eq!(summary[&1], (Some(1), 1.0));
    }
}
