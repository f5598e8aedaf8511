//! OBJ and OFF readers/writers.
//!
//! OBJ: `v` records are vertices, `l` records are polylines (one edge per
//! consecutive pair), `f` records are polygons (fan-triangulated), `p`
//! records are points. Unreferenced vertices stay as isolated points.
//!
//! OFF: faces with 3+ indices are fan-triangulated; faces with two indices
//! are edges and faces with one index are points.
//!
//! Writers emit vertices in id order, then wire edges and triangles.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{ComplexError, SimplicialComplex};
use crate::Point;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unsupported mesh extension {0:?} (expected .obj or .off)")]
    UnknownFormat(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse { line, message: message.into() }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, MeshIoError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

fn obj_index(tok: &str, count: usize, line: usize) -> Result<u32, MeshIoError> {
    let head = tok.split('/').next().unwrap_or("");
    let i: i64 = head.parse().map_err(|_| parse_err(line, format!("bad index {tok:?}")))?;
    let resolved = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        return Err(parse_err(line, "index 0 is not valid in OBJ"));
    };
    if resolved < 0 || resolved >= count as i64 {
        return Err(parse_err(line, format!("index {i} out of range")));
    }
    Ok(resolved as u32)
}

pub fn parse_obj(text: &str) -> Result<SimplicialComplex, MeshIoError> {
    let mut positions = Vec::new();
    let mut simplices: Vec<Vec<u32>> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut it = content.split_whitespace();
        let Some(tag) = it.next() else { continue };
        match tag {
            "v" => {
                let x = parse_f64(it.next(), line)?;
                let y = parse_f64(it.next(), line)?;
                let z = parse_f64(it.next(), line)?;
                positions.push(Point::new(x, y, z));
            }
            "f" => {
                let idx = it.map(|t| obj_index(t, positions.len(), line)).collect::<Result<Vec<_>, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(line, "face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    simplices.push(vec![idx[0], idx[k], idx[k + 1]]);
                }
            }
            "l" => {
                let idx = it.map(|t| obj_index(t, positions.len(), line)).collect::<Result<Vec<_>, _>>()?;
                if idx.len() < 2 {
                    return Err(parse_err(line, "line needs at least two vertices"));
                }
                simplices.extend(idx.windows(2).map(|w| w.to_vec()));
            }
            "p" => {
                for t in it {
                    simplices.push(vec![obj_index(t, positions.len(), line)?]);
                }
            }
            _ => {}
        }
    }
    check_no_repeats(&simplices)?;
    Ok(SimplicialComplex::build(positions, simplices)?)
}

fn check_no_repeats(simplices: &[Vec<u32>]) -> Result<(), MeshIoError> {
    for s in simplices {
        for i in 0..s.len() {
            if s[i + 1..].contains(&s[i]) {
                return Err(ComplexError::RepeatedVertex(s.clone()).into());
            }
        }
    }
    Ok(())
}

pub fn write_obj(c: &SimplicialComplex) -> String {
    let mut out = String::new();
    for p in c.positions() {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for e in c.wire_edges() {
        let [a, b] = c.edge(e);
        let _ = writeln!(out, "l {} {}", a + 1, b + 1);
    }
    for t in c.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn parse_off(text: &str) -> Result<SimplicialComplex, MeshIoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut rest = header.strip_prefix("OFF").ok_or_else(|| parse_err(ln, "missing OFF header"))?.trim().to_string();
    let mut counts_line = ln;
    if rest.is_empty() {
        let (l, s) = lines.next().ok_or_else(|| parse_err(ln, "missing counts"))?;
        rest = s.to_string();
        counts_line = l;
    }
    let counts: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(counts_line, format!("bad count {t:?}"))))
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(parse_err(counts_line, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| parse_err(counts_line, "truncated vertex list"))?;
        let mut it = s.split_whitespace();
        let x = parse_f64(it.next(), l)?;
        let y = parse_f64(it.next(), l)?;
        let z = parse_f64(it.next(), l)?;
        positions.push(Point::new(x, y, z));
    }
    let mut simplices: Vec<Vec<u32>> = Vec::new();
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| parse_err(counts_line, "truncated face list"))?;
        let nums: Vec<u64> =
            s.split_whitespace().map(|t| t.parse().map_err(|_| parse_err(l, format!("bad index {t:?}")))).collect::<Result<_, _>>()?;
        let k = *nums.first().ok_or_else(|| parse_err(l, "empty face"))? as usize;
        if k == 0 || nums.len() < k + 1 {
            return Err(parse_err(l, "face index count mismatch"));
        }
        let idx: Vec<u32> = nums[1..=k]
            .iter()
            .map(|&i| if (i as usize) < nv { Ok(i as u32) } else { Err(parse_err(l, format!("index {i} out of range"))) })
            .collect::<Result<_, _>>()?;
        if k <= 2 {
            simplices.push(idx);
        } else {
            for j in 1..k - 1 {
                simplices.push(vec![idx[0], idx[j], idx[j + 1]]);
            }
        }
    }
    check_no_repeats(&simplices)?;
    Ok(SimplicialComplex::build(positions, simplices)?)
}

pub fn write_off(c: &SimplicialComplex) -> String {
    let wires: Vec<u32> = c.wire_edges().collect();
    let points: Vec<u32> = c.isolated_vertices().collect();
    let mut out = String::from("OFF\n");
    let faces = c.triangle_count() + wires.len() + points.len();
    let _ = writeln!(out, "{} {} {}", c.vertex_count(), faces, c.edge_count());
    for p in c.positions() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    for t in c.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    for e in wires {
        let [a, b] = c.edge(e);
        let _ = writeln!(out, "2 {a} {b}");
    }
    for v in points {
        let _ = writeln!(out, "1 {v}");
    }
    out
}

/// Reads a mesh, choosing the format from the file extension.
pub fn read_mesh(path: &Path) -> Result<SimplicialComplex, MeshIoError> {
    let text = std::fs::read_to_string(path)?;
    match extension(path).as_str() {
        "obj" => parse_obj(&text),
        "off" => parse_off(&text),
        other => Err(MeshIoError::UnknownFormat(other.to_string())),
    }
}

pub fn write_mesh(path: &Path, c: &SimplicialComplex) -> Result<(), MeshIoError> {
    let text = match extension(path).as_str() {
        "obj" => write_obj(c),
        "off" => write_off(c),
        other => return Err(MeshIoError::UnknownFormat(other.to_string())),
    };
    std::fs::write(path, text)?;
    Ok(())
}

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}
