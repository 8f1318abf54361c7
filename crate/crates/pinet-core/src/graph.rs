//! The personalized interaction network: an undirected, weighted,
//! attributed graph over everyone a set of host accounts corresponds
//! with. Edge weight counts (record, recipient) deliveries between the
//! two endpoints.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::corpus::{AliasMap, EmailRecord, HostSet};
use crate::cpi::TagVector;

pub type VertexId = u32;

/// Sent/received counts for one vertex, accumulated per contributing
/// record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UserRole {
    pub sent: u64,
    pub received: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub address: String,
    /// Original addresses behind this vertex; more than one after
    /// account fusion. Sorted, deduplicated.
    pub source_addresses: Vec<String>,
    pub is_host: bool,
    pub designation: Option<String>,
    pub role: UserRole,
    /// Per-user dominant interaction profile, filled by annotation.
    pub attributes: Option<TagVector>,
}

impl Vertex {
    pub fn new(address: impl Into<String>) -> Self {
        let address = address.into();
        Vertex {
            source_addresses: vec![address.clone()],
            address,
            is_host: false,
            designation: None,
            role: UserRole::default(),
            attributes: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge references unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("duplicate vertex address `{0}`")]
    DuplicateAddress(String),
    #[error("edge ({0}, {1}) has zero weight")]
    ZeroWeight(VertexId, VertexId),
}

/// Which record/participant combinations produce edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgePolicy {
    /// Every record connects its sender to each recipient.
    SenderToEachRecipient,
    /// Only records sent by a host account contribute, connecting the
    /// host to each recipient. Models the network of outgoing mail.
    OutgoingOnly,
}

#[derive(Debug, Clone)]
pub struct PiNet {
    vertices: Vec<Vertex>,
    /// Sorted neighbor lists; every edge appears in both rows.
    adjacency: Vec<Vec<(VertexId, u64)>>,
    index: HashMap<String, VertexId>,
}

impl PiNet {
    /// Assemble from explicit parts. Parallel edges are summed;
    /// self-loops and zero weights are rejected.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, u64)>,
    ) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (id, v) in vertices.iter().enumerate() {
            if index.insert(v.address.clone(), id as VertexId).is_some() {
                return Err(GraphError::DuplicateAddress(v.address.clone()));
            }
        }
        let n = vertices.len() as VertexId;
        let mut weights: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= n {
                return Err(GraphError::UnknownVertex(a));
            }
            if b >= n {
                return Err(GraphError::UnknownVertex(b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if w == 0 {
                return Err(GraphError::ZeroWeight(a, b));
            }
            let key = (a.min(b), a.max(b));
            *weights.entry(key).or_insert(0) += w;
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (&(a, b), &w) in &weights {
            adjacency[a as usize].push((b, w));
            adjacency[b as usize].push((a, w));
        }
        for row in &mut adjacency {
            row.sort_unstable_by_key(|&(id, _)| id);
        }
        Ok(PiNet {
            vertices,
            adjacency,
            index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|row| row.len()).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id as usize]
    }

    pub fn vertex_mut(&mut self, id: VertexId) -> &mut Vertex {
        &mut self.vertices[id as usize]
    }

    pub fn vertex_id(&self, address: &str) -> Option<VertexId> {
        self.index.get(address).copied()
    }

    /// Neighbors with weights, ascending by vertex id.
    pub fn neighbors(&self, id: VertexId) -> &[(VertexId, u64)] {
        &self.adjacency[id as usize]
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.adjacency[id as usize].len()
    }

    /// Sum of weights of all edges incident to `id`.
    pub fn incident_weight(&self, id: VertexId) -> u64 {
        self.adjacency[id as usize].iter().map(|&(_, w)| w).sum()
    }

    pub fn edge_weight(&self, a: VertexId, b: VertexId) -> Option<u64> {
        let row = &self.adjacency[a as usize];
        row.binary_search_by_key(&b, |&(id, _)| id)
            .ok()
            .map(|i| row[i].1)
    }

    /// Each edge once, as (low id, high id, weight), ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, u64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, row)| {
            let a = a as VertexId;
            row.iter()
                .filter(move |&&(b, _)| a < b)
                .map(move |&(b, w)| (a, b, w))
        })
    }

    pub fn total_edge_weight(&self) -> u64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Number of edges with both endpoints in `members`.
    pub fn edges_within(&self, members: &[VertexId]) -> usize {
        let set: HashSet<VertexId> = members.iter().copied().collect();
        members
            .iter()
            .map(|&v| {
                self.adjacency[v as usize]
                    .iter()
                    .filter(|&&(u, _)| v < u && set.contains(&u))
                    .count()
            })
            .sum()
    }

    pub fn set_designations(&mut self, designations: &HashMap<String, String>) {
        for v in &mut self.vertices {
            if let Some(d) = designations.get(&v.address) {
                v.designation = Some(d.clone());
            }
        }
    }

    /// Vertex ids of the host accounts.
    pub fn host_ids(&self) -> Vec<VertexId> {
        (0..self.vertices.len() as VertexId)
            .filter(|&id| self.vertices[id as usize].is_host)
            .collect()
    }

    /// Non-host vertices, i.e. the host's contacts.
    pub fn contact_ids(&self) -> Vec<VertexId> {
        (0..self.vertices.len() as VertexId)
            .filter(|&id| !self.vertices[id as usize].is_host)
            .collect()
    }
}

/// Build the interaction network of `host` from pre-filtered records.
///
/// Vertices are created for every participant of every contributing
/// record, in first-appearance order (sender before recipients). With
/// [`EdgePolicy::OutgoingOnly`], records not sent by a host account are
/// ignored entirely. `strict_host_edges` drops edges between two
/// non-host participants (e.g. an outside sender and a co-recipient),
/// restricting the graph to the host's direct lines.
pub fn build_pinet(
    records: &[EmailRecord],
    host: &HostSet,
    policy: EdgePolicy,
    strict_host_edges: bool,
) -> PiNet {
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut weights: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();

    let intern = |addr: &str, vertices: &mut Vec<Vertex>, index: &mut HashMap<String, VertexId>| {
        if let Some(&id) = index.get(addr) {
            return id;
        }
        let id = vertices.len() as VertexId;
        let mut v = Vertex::new(addr);
        v.is_host = false; // set below once host set is consulted
        vertices.push(v);
        index.insert(addr.to_string(), id);
        id
    };

    for record in records {
        let host_sent = host.contains(&record.sender);
        if policy == EdgePolicy::OutgoingOnly && !host_sent {
            continue;
        }
        let sender = intern(&record.sender, &mut vertices, &mut index);
        vertices[sender as usize].role.sent += 1;
        for addr in &record.recipients {
            let recipient = intern(addr, &mut vertices, &mut index);
            vertices[recipient as usize].role.received += 1;
            if recipient == sender {
                continue;
            }
            if strict_host_edges && !host_sent && !host.contains(addr) {
                continue;
            }
            let key = (sender.min(recipient), sender.max(recipient));
            *weights.entry(key).or_insert(0) += 1;
        }
    }

    for v in &mut vertices {
        v.is_host = host.contains(&v.address);
    }

    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (&(a, b), &w) in &weights {
        adjacency[a as usize].push((b, w));
        adjacency[b as usize].push((a, w));
    }
    for row in &mut adjacency {
        row.sort_unstable_by_key(|&(id, _)| id);
    }
    PiNet {
        vertices,
        adjacency,
        index,
    }
}

/// Merge per-user networks into one multi-user view: vertices unify by
/// address, edge weights add up, roles add up, and per-user attribute
/// profiles survive only when every contributing network agrees.
pub fn merge_pinets(nets: &[&PiNet]) -> PiNet {
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut attr_conflict: Vec<bool> = Vec::new();

    for net in nets {
        for v in net.vertices() {
            match index.get(&v.address) {
                None => {
                    index.insert(v.address.clone(), vertices.len() as VertexId);
                    attr_conflict.push(false);
                    vertices.push(v.clone());
                }
                Some(&id) => {
                    let merged = &mut vertices[id as usize];
                    merged.is_host |= v.is_host;
                    merged.role.sent += v.role.sent;
                    merged.role.received += v.role.received;
                    for src in &v.source_addresses {
                        if !merged.source_addresses.contains(src) {
                            merged.source_addresses.push(src.clone());
                        }
                    }
                    if merged.designation.is_none() {
                        merged.designation = v.designation.clone();
                    }
                    if merged.attributes != v.attributes {
                        attr_conflict[id as usize] = true;
                    }
                }
            }
        }
    }
    for (v, conflict) in vertices.iter_mut().zip(&attr_conflict) {
        if *conflict {
            v.attributes = None;
        }
        v.source_addresses.sort_unstable();
        v.source_addresses.dedup();
    }

    let mut weights: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
    for net in nets {
        for (a, b, w) in net.edges() {
            let ma = index[&net.vertex(a).address];
            let mb = index[&net.vertex(b).address];
            let key = (ma.min(mb), ma.max(mb));
            *weights.entry(key).or_insert(0) += w;
        }
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (&(a, b), &w) in &weights {
        adjacency[a as usize].push((b, w));
        adjacency[b as usize].push((a, w));
    }
    for row in &mut adjacency {
        row.sort_unstable_by_key(|&(id, _)| id);
    }
    PiNet {
        vertices,
        adjacency,
        index,
    }
}

/// Collapse alias groups into single vertices. Edges between two
/// addresses of the same identity disappear; parallel edges created by
/// the collapse are summed. Fused vertices keep the ordering of their
/// lowest-numbered constituent.
pub fn fuse_accounts(net: &PiNet, aliases: &AliasMap) -> PiNet {
    // fused key per original vertex
    let keys: Vec<String> = net
        .vertices()
        .iter()
        .map(|v| {
            aliases
                .canonical_for(&v.address)
                .unwrap_or(&v.address)
                .to_string()
        })
        .collect();

    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut attr_state: Vec<Option<Option<TagVector>>> = Vec::new(); // None = unseen

    for (old_id, v) in net.vertices().iter().enumerate() {
        let key = &keys[old_id];
        match index.get(key) {
            None => {
                let id = vertices.len() as VertexId;
                index.insert(key.clone(), id);
                let mut fused = v.clone();
                fused.address = key.clone();
                fused.source_addresses = v.source_addresses.clone();
                vertices.push(fused);
                attr_state.push(Some(v.attributes));
            }
            Some(&id) => {
                let fused = &mut vertices[id as usize];
                fused.is_host |= v.is_host;
                fused.role.sent += v.role.sent;
                fused.role.received += v.role.received;
                for src in &v.source_addresses {
                    if !fused.source_addresses.contains(src) {
                        fused.source_addresses.push(src.clone());
                    }
                }
                if fused.designation.is_none() {
                    fused.designation = v.designation.clone();
                }
                if attr_state[id as usize] != Some(v.attributes) {
                    attr_state[id as usize] = Some(None);
                }
            }
        }
    }
    for (v, state) in vertices.iter_mut().zip(&attr_state) {
        v.attributes = state.flatten();
        v.source_addresses.sort_unstable();
        v.source_addresses.dedup();
    }

    let mut weights: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
    for (a, b, w) in net.edges() {
        let fa = index[&keys[a as usize]];
        let fb = index[&keys[b as usize]];
        if fa == fb {
            continue; // edge inside one identity
        }
        let key = (fa.min(fb), fa.max(fb));
        *weights.entry(key).or_insert(0) += w;
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (&(a, b), &w) in &weights {
        adjacency[a as usize].push((b, w));
        adjacency[b as usize].push((a, w));
    }
    for row in &mut adjacency {
        row.sort_unstable_by_key(|&(id, _)| id);
    }
    PiNet {
        vertices,
        adjacency,
        index,
    }
}
