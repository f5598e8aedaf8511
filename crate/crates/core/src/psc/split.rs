use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::labels::{check_rules, RuleError, StarLayout, TopoLabel};
use crate::complex::{SimplicialComplex, VertexId};
use crate::Vector;

/// One refinement step: split vertex `vsid` into itself and a new vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSplit {
    pub vsid: VertexId,
    /// When set, `vsid` moves to `p - offset`; otherwise it stays at `p`.
    pub midpoint: bool,
    /// The new vertex is placed at `p + offset`.
    pub offset: Vector,
    /// Vertex label, then triangle labels and edge labels of the star of
    /// `vsid`, each ascending by id.
    pub labels: Vec<TopoLabel>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("vertex {vsid} does not exist (complex has {vertex_count} vertices)")]
    VsidOutOfRange { vsid: VertexId, vertex_count: usize },
    #[error("offset is not finite")]
    NonFiniteOffset,
    #[error(transparent)]
    Rules(#[from] RuleError),
}

impl SplitError {
    pub fn rule(&self) -> Option<super::Rule> {
        match self {
            SplitError::Rules(r) => r.rule(),
            _ => None,
        }
    }
}

/// Applies `vs` to `c` in place and returns the new vertex id.
///
/// New simplices take the next free id of their dimension in this order:
/// the edge `s-t` (for `V1`); then, over edges ascending, the copy on `t`
/// and the triangle with `s-t` (for `E2`/`E3`); then, over triangles
/// ascending, the copy on `t` (for `F2`). Moved simplices (`E1`, `F1`) keep
/// their id. On error `c` is unchanged.
pub fn apply_vsplit(c: &mut SimplicialComplex, vs: &VertexSplit) -> Result<VertexId, SplitError> {
    let s = vs.vsid;
    if s as usize >= c.vertex_count() {
        return Err(SplitError::VsidOutOfRange { vsid: s, vertex_count: c.vertex_count() });
    }
    if !vs.offset.iter().all(|x| x.is_finite()) {
        return Err(SplitError::NonFiniteOffset);
    }
    let layout = StarLayout::of(c, s);
    check_rules(&vs.labels, &layout)?;

    let p = c.position(s);
    let t = c.push_vertex(p + vs.offset);
    if vs.midpoint {
        c.set_position(s, p - vs.offset);
    }
    if vs.labels[0] == TopoLabel::V1 {
        c.add_edge(s, t);
    }
    let nt = layout.triangles.len();
    for (j, &e) in layout.edges.iter().enumerate() {
        let [a, b] = c.edge(e);
        let far = if a == s { b } else { a };
        match vs.labels[1 + nt + j] {
            TopoLabel::E1 => c.reconnect_edge(e, s, t),
            TopoLabel::E2 => {
                c.add_edge(t, far);
            }
            TopoLabel::E3 => {
                c.add_edge(t, far);
                c.add_triangle(s, t, far);
            }
            _ => {}
        }
    }
    for (i, &tri) in layout.triangles.iter().enumerate() {
        match vs.labels[1 + i] {
            TopoLabel::F1 => c.reconnect_triangle(tri, s, t),
            TopoLabel::F2 => {
                let [a, b] = others(c.triangle(tri), s);
                c.add_triangle(t, a, b);
            }
            _ => {}
        }
    }
    Ok(t)
}

fn others(tri: [VertexId; 3], s: VertexId) -> [VertexId; 2] {
    let mut out = [0; 2];
    let mut k = 0;
    for v in tri {
        if v != s {
            out[k] = v;
            k += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("post-split complex must add exactly one vertex with id {expected}")]
    NotOneNewVertex { expected: usize },
    #[error("simplex {0:?} of the star of the split vertex has no pre-image")]
    Unclassifiable(Vec<VertexId>),
    #[error("complexes do not differ by a single vertex split")]
    NotASplit,
}

/// Recovers the labels of the split of `s` that turns `pre` into `post`,
/// where `t` is the vertex `post` adds.
///
/// Each simplex of the star of `s` in `pre` is classified by which of its
/// images exist in `post`. The result is then verified by replaying it on
/// `pre` and comparing simplex sets with `post`.
pub fn classify_split(
    pre: &SimplicialComplex,
    post: &SimplicialComplex,
    s: VertexId,
    t: VertexId,
) -> Result<Vec<TopoLabel>, ClassifyError> {
    if post.vertex_count() != pre.vertex_count() + 1 || t as usize != pre.vertex_count() || s >= t {
        return Err(ClassifyError::NotOneNewVertex { expected: pre.vertex_count() });
    }
    let layout = StarLayout::of(pre, s);
    let mut labels = Vec::with_capacity(layout.label_count());
    labels.push(if post.has_edge(s, t) { TopoLabel::V1 } else { TopoLabel::V0 });
    for &tri in &layout.triangles {
        let [a, b] = others(pre.triangle(tri), s);
        labels.push(match (post.has_triangle(s, a, b), post.has_triangle(t, a, b)) {
            (true, false) => TopoLabel::F0,
            (false, true) => TopoLabel::F1,
            (true, true) => TopoLabel::F2,
            (false, false) => return Err(ClassifyError::Unclassifiable(vec![s, a, b])),
        });
    }
    for &e in &layout.edges {
        let [a, b] = pre.edge(e);
        let far = if a == s { b } else { a };
        labels.push(match (post.has_edge(s, far), post.has_edge(t, far)) {
            (true, false) => TopoLabel::E0,
            (false, true) => TopoLabel::E1,
            (true, true) if post.has_triangle(s, t, far) => TopoLabel::E3,
            (true, true) => TopoLabel::E2,
            (false, false) => return Err(ClassifyError::Unclassifiable(vec![s, far])),
        });
    }

    let mut replay = pre.clone();
    let vs = VertexSplit { vsid: s, midpoint: false, offset: Vector::zeros(), labels: labels.clone() };
    apply_vsplit(&mut replay, &vs).map_err(|_| ClassifyError::NotASplit)?;
    let set = |c: &SimplicialComplex| c.simplex_tuples().into_iter().collect::<BTreeSet<_>>();
    if set(&replay) != set(post) {
        return Err(ClassifyError::NotASplit);
    }
    Ok(labels)
}
