//! Progressive simplicial complexes: a root point plus an ordered list of
//! vertex splits. Split `i` creates vertex `i + 1`, so every prefix of the
//! list reconstructs a coarser level of detail.

mod format;
mod labels;
mod split;

use std::collections::HashSet;

use half::f16;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{sorted2, sorted3, SimplicialComplex, VertexId};
use crate::gslim::CollapseLog;
use crate::quadric::Placement;
use crate::{Point, Vector};

pub use format::{read_psc, write_psc, FormatError, FormatErrorKind, HEADER_LEN};
pub use labels::{check_rules, LabelClass, Rule, RuleError, StarLayout, TopoLabel};
pub use split::{apply_vsplit, classify_split, ClassifyError, SplitError, VertexSplit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psc {
    pub root: Point,
    pub splits: Vec<VertexSplit>,
}

impl Psc {
    pub fn root_only(root: Point) -> Self {
        Psc { root, splits: Vec::new() }
    }

    pub fn vertex_count(&self) -> usize {
        self.splits.len() + 1
    }

    /// Replays every split; see [`reconstruct`].
    pub fn reconstruct_all(&self) -> Result<SimplicialComplex, ReplayError> {
        reconstruct(self, Lod::Steps(self.splits.len()))
    }

    /// Replaces every offset by its nearest binary16 value.
    pub fn quantized(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.splits {
            s.offset = quantize_offset(&s.offset);
        }
        out
    }
}

/// Rounds each component to the nearest binary16 value (ties to even).
pub fn quantize_offset(v: &Vector) -> Vector {
    v.map(|x| f16::from_f64(x).to_f64())
}

/// How many splits to apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lod {
    Steps(usize),
    /// Fraction of the splits, rounded up.
    Ratio(f64),
}

impl Lod {
    /// Resolves to a step count for a PSC with `splits` splits.
    ///
    /// Ratios use `⌈ratio · splits⌉`; a product within 1e-9 of an integer
    /// counts as that integer so that e.g. `0.1 · 30` gives 3.
    pub fn steps(self, splits: usize) -> Result<usize, ReplayError> {
        match self {
            Lod::Steps(k) if k <= splits => Ok(k),
            Lod::Steps(k) => Err(ReplayError::BadLod(format!("{k} steps requested, PSC has {splits}"))),
            Lod::Ratio(r) if (0.0..=1.0).contains(&r) => {
                let x = r * splits as f64;
                let nearest = x.round();
                let k = if (x - nearest).abs() <= 1e-9 { nearest } else { x.ceil() };
                Ok((k as usize).min(splits))
            }
            Lod::Ratio(r) => Err(ReplayError::BadLod(format!("ratio {r} is outside [0, 1]"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("{0}")]
    BadLod(String),
    #[error("split {step}: {source}")]
    Split { step: usize, source: SplitError },
}

impl ReplayError {
    pub fn step(&self) -> Option<usize> {
        match self {
            ReplayError::Split { step, .. } => Some(*step),
            _ => None,
        }
    }
}

/// Root point with the first `lod` splits applied. Aborts at the first
/// split that does not apply, reporting its index.
pub fn reconstruct(psc: &Psc, lod: Lod) -> Result<SimplicialComplex, ReplayError> {
    let steps = lod.steps(psc.splits.len())?;
    let mut c = SimplicialComplex::single_point(psc.root);
    for (step, vs) in psc.splits[..steps].iter().enumerate() {
        apply_vsplit(&mut c, vs).map_err(|source| ReplayError::Split { step, source })?;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffsetPrecision {
    #[default]
    F64,
    Binary16,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReverseError {
    #[error("collapse log ends with {0} vertices; a full simplification is required")]
    PartialLog(usize),
    #[error("collapse {step}: recorded adjacency is not a single merge ({reason})")]
    InconsistentDiff { step: usize, reason: String },
    #[error("collapse {step}: offset does not fit in binary16")]
    OffsetOverflow { step: usize },
    #[error("collapse {step}: {source}")]
    Split { step: usize, source: SplitError },
}

/// Turns a full collapse log into a PSC.
///
/// Collapses are visited last to first. For each, the vertex that kept the
/// merged position becomes the split source (the survivor for `KeepFirst`
/// and `Midpoint`, the removed vertex for `KeepSecond`) and the other one
/// becomes the new vertex. Labels come from the recorded adjacency diff.
///
/// Offsets are computed against the positions the decoder will actually
/// hold, so errors do not accumulate: a kept split targets the new vertex's
/// recorded position exactly, and a midpoint split uses half the recorded
/// difference. With [`OffsetPrecision::Binary16`] each offset is rounded
/// before the split is replayed, so later offsets compensate.
pub fn reverse_log(log: &CollapseLog, precision: OffsetPrecision) -> Result<Psc, ReverseError> {
    let (root_vertex, root) = match log.root {
        Some(r) if log.final_vertex_count == 1 => r,
        _ => return Err(ReverseError::PartialLog(log.final_vertex_count)),
    };
    let n = log.source_vertex_count;
    let mut psc_id = vec![u32::MAX; n];
    let mut orig_of: Vec<VertexId> = Vec::with_capacity(n);
    psc_id[root_vertex as usize] = 0;
    orig_of.push(root_vertex);
    let mut recon = SimplicialComplex::single_point(root);
    let mut splits = Vec::with_capacity(log.records.len());

    for rec in log.records.iter().rev() {
        let step = rec.step;
        let bad = |reason: String| ReverseError::InconsistentDiff { step, reason };
        let (src, new, target_src, target_new) = match rec.placement {
            Placement::KeepSecond => (rec.v2, rec.v1, rec.before[1], rec.before[0]),
            _ => (rec.v1, rec.v2, rec.before[0], rec.before[1]),
        };
        let merged = *psc_id
            .get(rec.survivor as usize)
            .filter(|&&p| p != u32::MAX)
            .ok_or_else(|| bad(format!("survivor {} is not alive", rec.survivor)))?;
        if psc_id.get(new.max(src) as usize).is_none() {
            return Err(bad("vertex id out of range".into()));
        }
        let pre: HashSet<Vec<VertexId>> = rec.diff.iter().map(|f| f.simplex.clone()).collect();
        let mut used = HashSet::new();
        let mut take = |s: Vec<VertexId>| {
            let hit = pre.contains(&s);
            if hit {
                used.insert(s);
            }
            hit
        };

        let layout = StarLayout::of(&recon, merged);
        let mut labels = Vec::with_capacity(layout.label_count());
        labels.push(if take(sorted2(src, new).to_vec()) { TopoLabel::V1 } else { TopoLabel::V0 });
        for &tri in &layout.triangles {
            let mut far = recon.triangle(tri).into_iter().filter(|&v| v != merged).map(|v| orig_of[v as usize]);
            let (a, b) = (far.next().unwrap(), far.next().unwrap());
            let on_src = take(sorted3(src, a, b).to_vec());
            let on_new = take(sorted3(new, a, b).to_vec());
            labels.push(match (on_src, on_new) {
                (true, false) => TopoLabel::F0,
                (false, true) => TopoLabel::F1,
                (true, true) => TopoLabel::F2,
                (false, false) => return Err(bad(format!("triangle ({a}, {b}) has no pre-image"))),
            });
        }
        for &e in &layout.edges {
            let [x, y] = recon.edge(e);
            let a = orig_of[if x == merged { y } else { x } as usize];
            let on_src = take(sorted2(src, a).to_vec());
            let on_new = take(sorted2(new, a).to_vec());
            let fan = take(sorted3(src, new, a).to_vec());
            labels.push(match (on_src, on_new, fan) {
                (true, false, false) => TopoLabel::E0,
                (false, true, false) => TopoLabel::E1,
                (true, true, false) => TopoLabel::E2,
                (true, true, true) => TopoLabel::E3,
                _ => return Err(bad(format!("edge to {a} has no consistent pre-image"))),
            });
        }
        if used.len() != pre.len() {
            return Err(bad(format!("{} recorded simplices unaccounted for", pre.len() - used.len())));
        }

        let q = recon.position(merged);
        let (midpoint, raw) = match rec.placement {
            Placement::Midpoint => (true, (target_new - target_src) * 0.5),
            _ => (false, target_new - q),
        };
        let offset = match precision {
            OffsetPrecision::F64 => raw,
            OffsetPrecision::Binary16 => quantize_offset(&raw),
        };
        if !offset.iter().all(|x| x.is_finite()) {
            return Err(ReverseError::OffsetOverflow { step });
        }
        let vs = VertexSplit { vsid: merged, midpoint, offset, labels };
        let t = apply_vsplit(&mut recon, &vs).map_err(|source| ReverseError::Split { step, source })?;
        psc_id[src as usize] = merged;
        psc_id[new as usize] = t;
        orig_of[merged as usize] = src;
        orig_of.push(new);
        splits.push(vs);
    }
    Ok(Psc { root, splits })
}
