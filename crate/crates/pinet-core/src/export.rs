//! Writers for the interchange formats: DOT and GraphML for graph
//! tools, flat CSV for spreadsheets and round-trips, JSONL for
//! iteration traces, and JSON for quality reports.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::cluster::{Clustering, IterationTrace};
use crate::graph::{GraphError, PiNet, Vertex, VertexId};
use crate::quality::QualityReport;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("edge list line {line}: {reason}")]
    EdgeParse { line: u64, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Distinguishable fill colors, reused cyclically for cluster ids.
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

fn cluster_color(cluster: u32, k: usize) -> &'static str {
    if cluster as usize >= k {
        return "#cccccc"; // overflow
    }
    PALETTE[cluster as usize % PALETTE.len()]
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Graphviz rendering; pass a clustering to color communities.
pub fn write_dot<W: Write>(
    net: &PiNet,
    clustering: Option<&Clustering>,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "graph interaction_network {{")?;
    writeln!(w, "  node [style=filled];")?;
    for (id, v) in net.vertices().iter().enumerate() {
        let mut attrs = vec![format!("label=\"{}\"", dot_escape(&v.address))];
        if v.is_host {
            attrs.push("shape=box".to_string());
        }
        if let Some(c) = clustering {
            let color = cluster_color(c.assignment[id], c.k);
            attrs.push(format!("fillcolor=\"{color}\""));
        } else {
            attrs.push("fillcolor=\"#dddddd\"".to_string());
        }
        writeln!(w, "  v{} [{}];", id, attrs.join(", "))?;
    }
    for (a, b, weight) in net.edges() {
        writeln!(w, "  v{a} -- v{b} [weight={weight}, label=\"{weight}\"];")?;
    }
    writeln!(w, "}}")
}

/// GraphML with address, host flag, optional cluster id, and edge
/// weight attributes.
pub fn write_graphml<W: Write>(
    net: &PiNet,
    clustering: Option<&Clustering>,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        w,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )?;
    writeln!(
        w,
        r#"  <key id="address" for="node" attr.name="address" attr.type="string"/>"#
    )?;
    writeln!(
        w,
        r#"  <key id="is_host" for="node" attr.name="is_host" attr.type="boolean"/>"#
    )?;
    if clustering.is_some() {
        writeln!(
            w,
            r#"  <key id="cluster" for="node" attr.name="cluster" attr.type="int"/>"#
        )?;
    }
    const TAG_KEYS: [&str; 5] = [
        "sublen_id",
        "txtsize_id",
        "emailsize_id",
        "attachsize_id",
        "time_id",
    ];
    for key in TAG_KEYS {
        writeln!(
            w,
            r#"  <key id="{key}" for="node" attr.name="{key}" attr.type="int"/>"#
        )?;
    }
    writeln!(
        w,
        r#"  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>"#
    )?;
    writeln!(w, r#"  <graph id="G" edgedefault="undirected">"#)?;
    for (id, v) in net.vertices().iter().enumerate() {
        writeln!(w, r#"    <node id="v{id}">"#)?;
        writeln!(
            w,
            r#"      <data key="address">{}</data>"#,
            xml_escape(&v.address)
        )?;
        writeln!(w, r#"      <data key="is_host">{}</data>"#, v.is_host)?;
        if let Some(c) = clustering {
            writeln!(w, r#"      <data key="cluster">{}</data>"#, c.assignment[id])?;
        }
        if let Some(tags) = v.attributes {
            for (key, tag) in TAG_KEYS.iter().zip(tags.iter()) {
                writeln!(w, r#"      <data key="{key}">{tag}</data>"#)?;
            }
        }
        writeln!(w, r#"    </node>"#)?;
    }
    for (idx, (a, b, weight)) in net.edges().enumerate() {
        writeln!(
            w,
            r#"    <edge id="e{idx}" source="v{a}" target="v{b}"><data key="weight">{weight}</data></edge>"#
        )?;
    }
    writeln!(w, r#"  </graph>"#)?;
    writeln!(w, r#"</graphml>"#)
}

/// Plain `source,target,weight` edge list using addresses.
pub fn write_edge_csv<W: Write>(net: &PiNet, mut w: W) -> std::io::Result<()> {
    writeln!(w, "source,target,weight")?;
    for (a, b, weight) in net.edges() {
        writeln!(
            w,
            "{},{},{weight}",
            net.vertex(a).address,
            net.vertex(b).address
        )?;
    }
    Ok(())
}

/// Rebuild a graph from a `write_edge_csv` edge list. Only structure
/// survives the round trip: host flags, roles, and profiles are not
/// part of the format.
pub fn read_edge_csv<R: BufRead>(reader: R) -> Result<PiNet, ExportError> {
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut index: BTreeMap<String, VertexId> = BTreeMap::new();
    let mut edges: Vec<(VertexId, VertexId, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx as u64 + 1;
        let trimmed = line.trim();
        if line_no == 1 || trimmed.is_empty() {
            continue; // header
        }
        let mut parts = trimmed.splitn(3, ',');
        let mut field = |name: &str| {
            parts.next().ok_or_else(|| ExportError::EdgeParse {
                line: line_no,
                reason: format!("missing {name}"),
            })
        };
        let source = field("source")?.trim().to_string();
        let target = field("target")?.trim().to_string();
        let weight: u64 = field("weight")?
            .trim()
            .parse()
            .map_err(|e| ExportError::EdgeParse {
                line: line_no,
                reason: format!("bad weight: {e}"),
            })?;
        let mut intern = |addr: String| -> VertexId {
            if let Some(&id) = index.get(&addr) {
                id
            } else {
                let id = vertices.len() as VertexId;
                vertices.push(Vertex::new(addr.clone()));
                index.insert(addr, id);
                id
            }
        };
        let a = intern(source);
        let b = intern(target);
        edges.push((a, b, weight));
    }
    Ok(PiNet::from_parts(vertices, edges)?)
}

/// One row per vertex: `vertex,address,cluster,is_medoid`. The overflow
/// group prints as cluster index k.
pub fn write_clustering_csv<W: Write>(
    net: &PiNet,
    clustering: &Clustering,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "vertex,address,cluster,is_medoid")?;
    for (id, v) in net.vertices().iter().enumerate() {
        let is_medoid = clustering.medoids.contains(&(id as VertexId));
        writeln!(
            w,
            "{},{},{},{}",
            id, v.address, clustering.assignment[id], is_medoid
        )?;
    }
    Ok(())
}

/// Per-user tag vectors:
/// `user,sublen_id,txtsize_id,emailsize_id,attachsize_id,time_id`.
/// Vertices without a profile keep their row with empty tag fields.
pub fn write_cpi_csv<W: Write>(net: &PiNet, mut w: W) -> std::io::Result<()> {
    writeln!(w, "user,sublen_id,txtsize_id,emailsize_id,attachsize_id,time_id")?;
    for v in net.vertices() {
        match v.attributes {
            Some(tags) => writeln!(
                w,
                "{},{},{},{},{},{}",
                v.address, tags[0], tags[1], tags[2], tags[3], tags[4]
            )?,
            None => writeln!(w, "{},,,,,", v.address)?,
        }
    }
    Ok(())
}

/// One JSON object per line, one line per recorded iteration.
pub fn write_trace_jsonl<W: Write>(
    history: &[IterationTrace],
    mut w: W,
) -> Result<(), ExportError> {
    for trace in history {
        serde_json::to_writer(&mut w, trace)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Pretty-printed quality report.
pub fn write_quality_json<W: Write>(report: &QualityReport, mut w: W) -> Result<(), ExportError> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    Ok(())
}
