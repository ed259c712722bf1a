//! File formats: `.mvd` vertex-function files (JSON header line plus a
//! little-endian `f64` payload), edge-list and position TSVs, and CSV/PLY
//! exports.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{VertexPositions, WeightedGraph};
use crate::manifold::Manifold;

pub const MVD_FORMAT: &str = "mvd";
pub const MVD_VERSION: u32 = 1;
pub const EDGES_MAGIC: &str = "# mvgraph-edges v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvdParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvdHeader {
    pub format: String,
    pub version: u32,
    pub manifold: String,
    pub params: MvdParams,
    pub shape: Vec<usize>,
    pub mask: bool,
}

impl MvdHeader {
    pub fn for_function(f: &VertexFunction) -> Self {
        let m = f.manifold();
        let params = match m {
            Manifold::Euclidean(d) => MvdParams { m: Some(d), n: None },
            Manifold::Spd(n) => MvdParams { m: None, n: Some(n) },
            Manifold::Circle | Manifold::Sphere2 => MvdParams { m: None, n: None },
        };
        MvdHeader {
            format: MVD_FORMAT.into(),
            version: MVD_VERSION,
            manifold: m.kind_name().into(),
            params,
            shape: f.shape().to_vec(),
            mask: f.mask().is_some(),
        }
    }

    pub fn manifold(&self) -> Result<Manifold> {
        let param = match self.manifold.as_str() {
            "euclidean" => self.params.m,
            "spd" => self.params.n,
            _ => None,
        };
        Manifold::new(&self.manifold, param).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn write_mvd<W: Write>(mut w: W, f: &VertexFunction) -> Result<()> {
    let header = serde_json::to_string(&MvdHeader::for_function(f)).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(header.as_bytes())?;
    w.write_all(b"\n")?;
    let mut payload = Vec::with_capacity(f.values().len() * 8);
    for v in f.values() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&payload)?;
    if let Some(mask) = f.mask() {
        let bytes: Vec<u8> = mask.iter().map(|&b| b as u8).collect();
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_mvd<R: Read>(r: R) -> Result<VertexFunction> {
    let mut r = BufReader::new(r);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let header: MvdHeader =
        serde_json::from_slice(&line[..line.len() - 1]).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.format != MVD_FORMAT || header.version != MVD_VERSION {
        return Err(Error::Format(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let m = header.manifold()?;
    let n: usize = header.shape.iter().product();
    if header.shape.is_empty() || n == 0 {
        return Err(Error::Format("shape must be non-empty with positive extents".into()));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    let floats = n * m.ambient_dim();
    let expected = floats * 8 + if header.mask { n } else { 0 };
    if rest.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {expected}",
            rest.len()
        )));
    }
    let values = rest[..floats * 8]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mask = if header.mask {
        let bytes = &rest[floats * 8..];
        if bytes.iter().any(|&b| b > 1) {
            return Err(Error::Format("mask bytes must be 0 or 1".into()));
        }
        Some(bytes.iter().map(|&b| b == 1).collect())
    } else {
        None
    };
    VertexFunction::new(m, header.shape, values, mask)
}

pub fn save_mvd(path: impl AsRef<Path>, f: &VertexFunction) -> Result<()> {
    write_mvd(BufWriter::new(File::create(path)?), f)
}

pub fn load_mvd(path: impl AsRef<Path>) -> Result<VertexFunction> {
    read_mvd(File::open(path)?)
}

pub fn write_edges<W: Write>(mut w: W, g: &WeightedGraph) -> Result<()> {
    writeln!(w, "{EDGES_MAGIC} n={} symmetric={}", g.n_vertices(), g.is_symmetric() as u8)?;
    for (u, v, weight) in g.edges() {
        writeln!(w, "{u}\t{v}\t{weight}")?;
    }
    w.flush()?;
    Ok(())
}

fn header_field<'a>(tokens: &[&'a str], key: &str) -> Result<&'a str> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("edge header lacks '{key}='")))
}

pub fn read_edges<R: Read>(r: R) -> Result<WeightedGraph> {
    let mut lines = BufReader::new(r).lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty edge file".into()))??;
    let rest = header
        .strip_prefix(EDGES_MAGIC)
        .ok_or_else(|| Error::Format(format!("expected '{EDGES_MAGIC}' header")))?;
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    let n: usize = header_field(&tokens, "n")?
        .parse()
        .map_err(|_| Error::Format("bad vertex count".into()))?;
    let symmetric = header_field(&tokens, "symmetric")?;
    let mut edges = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let bad = || Error::Format(format!("bad edge on line {}: '{line}'", i + 2));
        if parts.len() != 3 {
            return Err(bad());
        }
        let u: usize = parts[0].trim().parse().map_err(|_| bad())?;
        let v: usize = parts[1].trim().parse().map_err(|_| bad())?;
        let w: f64 = parts[2].trim().parse().map_err(|_| bad())?;
        edges.push((u, v, w));
    }
    let g = WeightedGraph::from_edges(n, edges)?;
    if symmetric == "1" && !g.is_symmetric() {
        return Err(Error::Format("header claims a symmetric graph but weights differ".into()));
    }
    Ok(g)
}

pub fn save_edges(path: impl AsRef<Path>, g: &WeightedGraph) -> Result<()> {
    write_edges(BufWriter::new(File::create(path)?), g)
}

pub fn load_edges(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    read_edges(File::open(path)?)
}

/// One line `idx<TAB>x<TAB>y<TAB>z` (as many coordinates as the dimension) per vertex.
pub fn write_positions<W: Write>(mut w: W, pos: &VertexPositions) -> Result<()> {
    for i in 0..pos.len() {
        write!(w, "{i}")?;
        for c in pos.get(i) {
            write!(w, "\t{c}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_positions<R: Read>(r: R) -> Result<VertexPositions> {
    let mut dim = None;
    let mut coords = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Format(format!("bad position on line {}: '{line}'", i + 1));
        let parts: Vec<&str> = line.split('\t').collect();
        let idx: usize = parts[0].trim().parse().map_err(|_| bad())?;
        if idx != coords.len() / dim.unwrap_or(1).max(1) || parts.len() < 2 {
            return Err(bad());
        }
        if *dim.get_or_insert(parts.len() - 1) != parts.len() - 1 {
            return Err(bad());
        }
        for p in &parts[1..] {
            coords.push(p.trim().parse::<f64>().map_err(|_| bad())?);
        }
    }
    let dim = dim.ok_or_else(|| Error::Format("empty positions file".into()))?;
    VertexPositions::new(dim, coords)
}

pub fn save_positions(path: impl AsRef<Path>, pos: &VertexPositions) -> Result<()> {
    write_positions(BufWriter::new(File::create(path)?), pos)
}

pub fn load_positions(path: impl AsRef<Path>) -> Result<VertexPositions> {
    read_positions(File::open(path)?)
}

/// Column names of the ambient coordinates.
pub fn coordinate_names(m: Manifold) -> Vec<String> {
    match m {
        Manifold::Euclidean(d) => (0..d).map(|i| format!("x{i}")).collect(),
        Manifold::Circle => vec!["angle".into()],
        Manifold::Sphere2 => vec!["x".into(), "y".into(), "z".into()],
        Manifold::Spd(n) => (0..n * n).map(|k| format!("m{}{}", k / n, k % n)).collect(),
    }
}

/// CSV with a header row and one row per vertex of ambient coordinates;
/// an `active` column is appended for masked functions.
pub fn write_csv<W: Write>(mut w: W, f: &VertexFunction) -> Result<()> {
    let mut names = coordinate_names(f.manifold());
    if f.mask().is_some() {
        names.push("active".into());
    }
    writeln!(w, "{}", names.join(","))?;
    for u in 0..f.len() {
        let mut row: Vec<String> = f.value(u).iter().map(|v| v.to_string()).collect();
        if f.mask().is_some() {
            row.push((f.is_active(u) as u8).to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`] for the given manifold and shape.
pub fn read_csv<R: Read>(r: R, m: Manifold, shape: Vec<usize>) -> Result<VertexFunction> {
    let mut lines = BufReader::new(r).lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty csv".into()))??;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let coords = coordinate_names(m);
    let has_mask = match names.len().checked_sub(coords.len()).unwrap_or(usize::MAX) {
        0 => false,
        1 if names.last() == Some(&"active") => true,
        _ => {
            return Err(Error::Format(format!(
                "csv header has {} columns, expected {} for {m}",
                names.len(),
                coords.len()
            )))
        }
    };
    let mut values = Vec::new();
    let mut mask = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("bad csv row {}: '{line}'", i + 2));
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(bad());
        }
        for c in &cells[..coords.len()] {
            values.push(c.parse::<f64>().map_err(|_| bad())?);
        }
        if has_mask {
            mask.push(match cells[coords.len()] {
                "1" => true,
                "0" => false,
                _ => return Err(bad()),
            });
        }
    }
    VertexFunction::new(m, shape, values, has_mask.then_some(mask))
}

/// ASCII PLY point cloud. Vertices sit at `positions` when given and at
/// `(col, row, 0)` of the grid otherwise; sphere values become normals
/// `nx ny nz`, SPD tensors `t00 … t(n-1)(n-1)`, other values `value0 …`.
pub fn write_ply<W: Write>(mut w: W, f: &VertexFunction, positions: Option<&VertexPositions>) -> Result<()> {
    let n = f.len();
    if let Some(p) = positions {
        if p.len() != n || p.dim() > 3 {
            return Err(Error::Config(format!(
                "positions must give at most 3 coordinates for each of {n} vertices"
            )));
        }
    }
    let m = f.manifold();
    let attrs: Vec<String> = match m {
        Manifold::Sphere2 => vec!["nx".into(), "ny".into(), "nz".into()],
        Manifold::Spd(k) => (0..k * k).map(|i| format!("t{}{}", i / k, i % k)).collect(),
        _ => (0..m.ambient_dim()).map(|i| format!("value{i}")).collect(),
    };
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {n}")?;
    for name in ["x", "y", "z"].iter().map(|s| s.to_string()).chain(attrs) {
        writeln!(w, "property double {name}")?;
    }
    writeln!(w, "end_header")?;
    let width = *f.shape().last().expect("non-empty shape");
    for u in 0..n {
        let mut xyz = [0.0; 3];
        match positions {
            Some(p) => xyz[..p.dim()].copy_from_slice(p.get(u)),
            None => {
                xyz[0] = (u % width) as f64;
                xyz[1] = (u / width) as f64;
            }
        }
        let row: Vec<String> = xyz.iter().chain(f.value(u)).map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
#[path = "io_tests.rs"]
mod tests;
