//! Binary and text graph files.
//!
//! Binary layout, all integers little-endian `u64`, reals little-endian `f64`:
//! magic `HARDGRID`, version, d, q, number of points, resolution (0 for
//! non-grid point sets), seed, then `q` per-type weights, `qn + 1` offsets
//! and the flat neighbor array.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hardcore::Graph;

use super::graph::HardCoreGraph;

pub const MAGIC: &[u8; 8] = b"HARDGRID";
pub const VERSION: u64 = 1;
pub const TEXT_EXPORT_MAX_VERTICES: usize = 10_000;

/// A graph read back from a binary file.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub dimension: u64,
    pub q: u64,
    pub num_points: u64,
    pub resolution: f64,
    pub seed: u64,
    pub type_weights: Vec<f64>,
    pub graph: Graph,
}

pub fn write_binary(graph: &HardCoreGraph, path: &Path) -> Result<()> {
    let explicit = graph.to_graph();
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    for v in [
        VERSION,
        graph.dimension() as u64,
        graph.q() as u64,
        graph.num_points() as u64,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&graph.resolution().unwrap_or(0.0).to_le_bytes())?;
    out.write_all(&graph.seed().unwrap_or(0).to_le_bytes())?;
    for w in graph.type_weights() {
        out.write_all(&w.to_le_bytes())?;
    }
    for &o in explicit.offsets() {
        out.write_all(&(o as u64).to_le_bytes())?;
    }
    for &v in explicit.raw_neighbors() {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Whether the file starts with the binary graph magic.
pub fn is_binary_graph(path: &Path) -> bool {
    let mut buf = [0u8; 8];
    File::open(path).and_then(|mut f| f.read_exact(&mut buf)).is_ok() && &buf == MAGIC
}

pub fn read_binary(path: &Path) -> Result<GraphFile> {
    let bad = |reason: String| Error::GraphFormat { path: PathBuf::from(path), reason };
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| bad("file too short".into()))?;
    if &magic != MAGIC {
        return Err(bad("missing magic bytes".into()));
    }
    let mut word = || -> Result<[u8; 8]> {
        let mut b = [0u8; 8];
        input.read_exact(&mut b).map_err(|_| bad("truncated file".into()))?;
        Ok(b)
    };
    let version = u64::from_le_bytes(word()?);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let dimension = u64::from_le_bytes(word()?);
    let q = u64::from_le_bytes(word()?);
    let num_points = u64::from_le_bytes(word()?);
    let resolution = f64::from_le_bytes(word()?);
    let seed = u64::from_le_bytes(word()?);
    if q == 0 || q > 1 << 16 {
        return Err(bad(format!("implausible number of types {q}")));
    }
    let n = num_points
        .checked_mul(q)
        .filter(|&n| n <= u32::MAX as u64)
        .ok_or_else(|| bad("vertex count overflows".into()))? as usize;
    let type_weights = (0..q).map(|_| word().map(f64::from_le_bytes)).collect::<Result<Vec<_>>>()?;
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(u64::from_le_bytes(word()?) as usize);
    }
    if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(bad("offsets are not monotone".into()));
    }
    let total = offsets[n];
    let mut neighbors = Vec::with_capacity(total);
    for _ in 0..total {
        let v = u64::from_le_bytes(word()?);
        if v >= n as u64 {
            return Err(bad(format!("neighbor id {v} out of range")));
        }
        neighbors.push(v as u32);
    }
    let weights = (0..n).map(|v| type_weights[v % q as usize]).collect();
    let graph = Graph::from_csr(offsets, neighbors, weights);
    graph.validate().map_err(|e| bad(e.to_string()))?;
    Ok(GraphFile { dimension, q, num_points, resolution, seed, type_weights, graph })
}

/// Edge list: `v <id> <weight>` per vertex, then `e <u> <v>` per edge with `u < v`.
pub fn write_text(graph: &Graph, path: &Path) -> Result<()> {
    if graph.num_vertices() > TEXT_EXPORT_MAX_VERTICES {
        return Err(Error::invalid(
            "text",
            format!("text export is limited to {TEXT_EXPORT_MAX_VERTICES} vertices, graph has {}", graph.num_vertices()),
        ));
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# vertices {} edges {}", graph.num_vertices(), graph.num_edges())?;
    for v in 0..graph.num_vertices() {
        writeln!(out, "v {v} {:e}", graph.weight(v))?;
    }
    for (u, v) in graph.edges() {
        writeln!(out, "e {u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Whether the file starts like a text edge list written by [`write_text`].
pub fn is_text_graph(path: &Path) -> bool {
    let mut buf = [0u8; 10];
    File::open(path).and_then(|mut f| f.read_exact(&mut buf)).is_ok() && &buf == b"# vertices"
}

/// Reads a text edge list. Vertex lines may come in any order but must cover
/// `0..n` exactly once.
pub fn read_text(path: &Path) -> Result<Graph> {
    let bad = |line: usize, reason: String| Error::GraphFormat { path: PathBuf::from(path), reason: format!("line {line}: {reason}") };
    let text = std::fs::read_to_string(path)?;
    let mut weights: Vec<Option<f64>> = Vec::new();
    let mut edges = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let k = k + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [c, ..] if c.starts_with('#') => {}
            ["v", id, w] => {
                let id: usize = id.parse().map_err(|_| bad(k, format!("bad vertex id {id:?}")))?;
                let w: f64 = w.parse().map_err(|_| bad(k, format!("bad weight {w:?}")))?;
                if id >= weights.len() {
                    weights.resize(id + 1, None);
                }
                if weights[id].replace(w).is_some() {
                    return Err(bad(k, format!("vertex {id} listed twice")));
                }
            }
            ["e", u, v] => {
                let u: usize = u.parse().map_err(|_| bad(k, format!("bad vertex id {u:?}")))?;
                let v: usize = v.parse().map_err(|_| bad(k, format!("bad vertex id {v:?}")))?;
                edges.push((u, v));
            }
            _ => return Err(bad(k, format!("expected `v <id> <weight>` or `e <u> <v>`, got {line:?}"))),
        }
    }
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(v, w)| w.ok_or_else(|| bad(0, format!("vertex {v} has no weight line"))))
        .collect::<Result<Vec<_>>>()?;
    Graph::from_edges(weights, &edges).map_err(|e| bad(0, e.to_string()))
}
