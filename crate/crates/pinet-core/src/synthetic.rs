//! Seeded synthetic graphs for tests and benchmarks. Everything here is
//! a pure function of its seed.

use std::collections::HashSet;

use crate::graph::{PiNet, Vertex, VertexId};

/// Small, dependency-free PRNG (splitmix64). Good enough to scatter
/// edges and tags; not for anything security-minded.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` (n > 0).
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub vertices: usize,
    /// Edges added on top of the spanning tree that keeps the graph
    /// connected.
    pub extra_edges: usize,
    pub max_weight: u64,
    /// Tags are drawn from `1..=tag_range` per attribute.
    pub tag_range: u32,
    /// Force the first attribute to a shared constant so every pair
    /// keeps a non-zero contextual similarity.
    pub pin_first_attribute: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            vertices: 8,
            extra_edges: 6,
            max_weight: 9,
            tag_range: 3,
            pin_first_attribute: true,
        }
    }
}

/// Connected random graph with random profiles: a random spanning tree
/// plus `extra_edges` extra links, weights in `1..=max_weight`.
pub fn random_net(seed: u64, spec: &SyntheticSpec) -> PiNet {
    let mut rng = SplitMix64::new(seed);
    let n = spec.vertices;
    let mut vertices: Vec<Vertex> = (0..n).map(|i| Vertex::new(format!("u{i}"))).collect();
    for v in &mut vertices {
        let mut tags = [0u32; 5];
        for t in &mut tags {
            *t = rng.below(spec.tag_range as u64) as u32 + 1;
        }
        if spec.pin_first_attribute {
            tags[0] = 1;
        }
        v.attributes = Some(tags);
    }

    let mut edges: Vec<(VertexId, VertexId, u64)> = Vec::new();
    let mut present: HashSet<(VertexId, VertexId)> = HashSet::new();
    for i in 1..n {
        let parent = rng.below(i as u64) as VertexId;
        edges.push((parent, i as VertexId, rng.below(spec.max_weight) + 1));
        present.insert((parent, i as VertexId));
    }
    // duplicate draws don't count: the requested number of distinct
    // extras is delivered whenever the pair space allows it
    let mut attempts = 0;
    let mut added = 0;
    let budget = spec.extra_edges * 50 + 100;
    while added < spec.extra_edges && attempts < budget && n >= 2 {
        attempts += 1;
        let a = rng.below(n as u64) as VertexId;
        let b = rng.below(n as u64) as VertexId;
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !present.insert(key) {
            continue;
        }
        edges.push((key.0, key.1, rng.below(spec.max_weight) + 1));
        added += 1;
    }
    PiNet::from_parts(vertices, edges).expect("generated edges are valid")
}

/// `cliques` groups of `size` vertices each, tightly connected inside
/// and joined by single weak bridges so the graph stays connected.
///
/// Vertex ids interleave the groups (vertex v belongs to group
/// `v % cliques`), so id order carries no information about the planted
/// structure. Each group shares one profile, distinct per group.
pub fn planted_cliques(
    cliques: usize,
    size: usize,
    intra_weight: u64,
    bridge_weight: u64,
) -> PiNet {
    let n = cliques * size;
    let mut vertices: Vec<Vertex> = Vec::with_capacity(n);
    for v in 0..n {
        let group = v % cliques;
        let mut vertex = Vertex::new(format!("m{v}"));
        let tag = group as u32 + 1;
        vertex.attributes = Some([tag; 5]);
        vertices.push(vertex);
    }
    let member = |group: usize, slot: usize| (slot * cliques + group) as VertexId;
    let mut edges = Vec::new();
    for group in 0..cliques {
        for i in 0..size {
            for j in (i + 1)..size {
                edges.push((member(group, i), member(group, j), intra_weight));
            }
        }
    }
    // ring of weak bridges between first members of neighboring groups
    if cliques > 1 {
        for group in 0..cliques {
            let next = (group + 1) % cliques;
            if cliques == 2 && group == 1 {
                break; // avoid doubling the single bridge
            }
            edges.push((member(group, 0), member(next, 0), bridge_weight));
        }
    }
    PiNet::from_parts(vertices, edges).expect("planted edges are valid")
}

/// Random graph with planted community structure — the topology the
/// clustering stage is built for. Each group of `sizes` is internally
/// chained and densified with heavy random edges, consecutive groups
/// are joined by light bridges, and profiles carry a noisy per-group
/// signature. The first attribute is pinned so every pair keeps some
/// contextual similarity regardless of blend weighting.
pub fn community_net(seed: u64, sizes: &[usize]) -> PiNet {
    let mut rng = SplitMix64::new(seed);
    let n: usize = sizes.iter().sum();
    let mut group_of = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for (g, &size) in sizes.iter().enumerate() {
        starts.push(offset);
        for _ in 0..size {
            group_of.push(g);
        }
        offset += size;
    }

    let mut vertices: Vec<Vertex> = (0..n).map(|i| Vertex::new(format!("u{i}"))).collect();
    for (v, vertex) in vertices.iter_mut().enumerate() {
        let g = group_of[v];
        let mut tags = [0u32; 5];
        for (a, tag) in tags.iter_mut().enumerate() {
            *tag = if rng.next_f64() < 0.15 {
                rng.below(3) as u32 + 1
            } else {
                ((g + a) % 3) as u32 + 1
            };
        }
        tags[0] = 1;
        vertex.attributes = Some(tags);
    }

    let mut edges: Vec<(VertexId, VertexId, u64)> = Vec::new();
    for (g, &size) in sizes.iter().enumerate() {
        let base = starts[g];
        for i in 0..size {
            for j in (i + 1)..size {
                let chained = j == i + 1; // keeps the group connected
                if chained || rng.next_f64() < 0.85 {
                    edges.push((
                        (base + i) as VertexId,
                        (base + j) as VertexId,
                        5 + rng.below(5),
                    ));
                }
            }
        }
        if g + 1 < sizes.len() {
            let next = starts[g + 1];
            let a = base + rng.below(size as u64) as usize;
            let b = next + rng.below(sizes[g + 1] as u64) as usize;
            edges.push((a as VertexId, b as VertexId, 1 + rng.below(2)));
        }
    }
    PiNet::from_parts(vertices, edges).expect("community edges are valid")
}
