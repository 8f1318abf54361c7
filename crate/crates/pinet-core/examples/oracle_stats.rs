//! Scratch: measure how often the iterative clustering matches the
//! exhaustive medoid-set optimum across instance distributions.

use pinet_core::cluster::{cluster, ClusterOptions};
use pinet_core::graph::VertexId;
use pinet_core::similarity::{
    build_distance_matrix, DirectRule, DistanceMatrix, PathCost, SimilarityParams,
};
use pinet_core::synthetic::{community_net, random_net, SyntheticSpec};

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[VertexId])) {
    fn recurse(
        start: usize,
        n: usize,
        remaining: usize,
        chosen: &mut Vec<VertexId>,
        f: &mut impl FnMut(&[VertexId]),
    ) {
        if remaining == 0 {
            f(chosen);
            return;
        }
        for v in start..=(n - remaining) {
            chosen.push(v as VertexId);
            recurse(v + 1, n, remaining - 1, chosen, f);
            chosen.pop();
        }
    }
    recurse(0, n, k, &mut Vec::new(), f);
}

fn objective(matrix: &DistanceMatrix, medoids: &[VertexId]) -> f64 {
    let mut total = 0.0;
    for v in 0..matrix.n() as VertexId {
        let best = medoids
            .iter()
            .map(|&m| matrix.get(v, m))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            total += best;
        }
    }
    total
}

fn main() {
    let alphas = [0.0, 0.5, 1.0];
    let patterns: [&[usize]; 6] = [
        &[3, 3],
        &[3, 4],
        &[4, 4],
        &[2, 2, 2],
        &[2, 2, 3],
        &[2, 3, 3],
    ];
    let mut exact = 0;
    let mut by_combo: std::collections::BTreeMap<(usize, String), (u32, u32)> =
        std::collections::BTreeMap::new();
    for i in 0..100usize {
        let sizes = patterns[i % patterns.len()];
        let k = 1 + i % 3;
        let alpha = alphas[(i / 3) % alphas.len()];
        let net = community_net(0xACC0 + i as u64, sizes);
        let params = SimilarityParams::with_alpha(alpha);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let clustering = cluster(&net, &matrix, k, &ClusterOptions::default()).unwrap();
        let mut optimal = f64::INFINITY;
        for_each_subset(net.vertex_count(), k, &mut |m| {
            let o = objective(&matrix, m);
            if o < optimal {
                optimal = o;
            }
        });
        let tol = 1e-9 * optimal.abs().max(1.0);
        let entry = by_combo.entry((k, format!("{alpha}"))).or_insert((0, 0));
        entry.1 += 1;
        if (clustering.objective - optimal).abs() <= tol {
            exact += 1;
            entry.0 += 1;
        } else if clustering.objective < optimal - tol {
            println!("  !!! beat optimum at instance {i}");
        }
    }
    println!("structured: {exact}/100");
    for ((k, alpha), (hit, total)) in by_combo {
        println!("   k={k} alpha={alpha}: {hit}/{total}");
    }

    // variant: k always matches the planted group count (k=1 keeps any)
    let two_groups: [&[usize]; 3] = [&[3, 3], &[3, 4], &[4, 4]];
    let three_groups: [&[usize]; 3] = [&[2, 2, 2], &[2, 2, 3], &[2, 3, 3]];
    let mut exact = 0;
    let mut by_combo: std::collections::BTreeMap<(usize, String), (u32, u32)> =
        std::collections::BTreeMap::new();
    for i in 0..100usize {
        let k = 1 + i % 3;
        let sizes = match k {
            3 => three_groups[i % 3],
            _ => two_groups[i % 3],
        };
        let alpha = alphas[(i / 3) % alphas.len()];
        let net = community_net(0xACC0 + i as u64, sizes);
        let params = SimilarityParams::with_alpha(alpha);
        let matrix =
            build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
        let clustering = cluster(&net, &matrix, k, &ClusterOptions::default()).unwrap();
        let mut optimal = f64::INFINITY;
        for_each_subset(net.vertex_count(), k, &mut |m| {
            let o = objective(&matrix, m);
            if o < optimal {
                optimal = o;
            }
        });
        let tol = 1e-9 * optimal.abs().max(1.0);
        let entry = by_combo.entry((k, format!("{alpha}"))).or_insert((0, 0));
        entry.1 += 1;
        if (clustering.objective - optimal).abs() <= tol {
            exact += 1;
            entry.0 += 1;
        } else if clustering.objective < optimal - tol {
            println!("  !!! beat optimum at instance {i}");
        }
    }
    println!("matched-k: {exact}/100");
    for ((k, alpha), (hit, total)) in by_combo {
        println!("   k={k} alpha={alpha}: {hit}/{total}");
    }
    for (label, extra_lo, extra_span, tag_range) in [
        ("sparse tags3", 2usize, 5u64, 3u32),
        ("dense tags3", 6, 8, 3),
        ("sparse tags2", 2, 5, 2),
        ("dense tags2", 6, 8, 2),
    ] {
        let mut exact = 0;
        let mut by_combo: std::collections::BTreeMap<(usize, String), (u32, u32)> =
            std::collections::BTreeMap::new();
        for i in 0..100usize {
            let vertices = 5 + i % 4;
            let k = 1 + i % 3;
            let alpha = alphas[i % alphas.len()];
            let spec = SyntheticSpec {
                vertices,
                extra_edges: extra_lo + (i as u64 % extra_span) as usize,
                max_weight: 9,
                tag_range,
                pin_first_attribute: true,
            };
            let net = random_net(0xACC0 + i as u64, &spec);
            let params = SimilarityParams::with_alpha(alpha);
            let matrix =
                build_distance_matrix(&net, &params, DirectRule::Reciprocal, PathCost::NegLog);
            let clustering = cluster(&net, &matrix, k, &ClusterOptions::default()).unwrap();
            let mut optimal = f64::INFINITY;
            for_each_subset(net.vertex_count(), k, &mut |m| {
                let o = objective(&matrix, m);
                if o < optimal {
                    optimal = o;
                }
            });
            let tol = 1e-9 * optimal.abs().max(1.0);
            let entry = by_combo
                .entry((k, format!("{alpha}")))
                .or_insert((0, 0));
            entry.1 += 1;
            if (clustering.objective - optimal).abs() <= tol {
                exact += 1;
                entry.0 += 1;
            }
            if clustering.objective < optimal - tol {
                println!("  !!! beat optimum at instance {i}");
            }
        }
        println!("{label}: {exact}/100");
        for ((k, alpha), (hit, total)) in by_combo {
            println!("   k={k} alpha={alpha}: {hit}/{total}");
        }
    }
}
