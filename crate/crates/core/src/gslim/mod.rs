//! Greedy generalized quadric simplification of simplicial complexes.
//!
//! Candidate pairs are the mesh edges plus optional virtual pairs (Delaunay
//! or k-nearest-neighbour edges of the input points). The cheapest pair is
//! collapsed repeatedly. Heap entries carry the version stamps of both
//! endpoints and are discarded lazily once either endpoint has changed.

mod delaunay;
mod workspace;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{SimplicialComplex, VertexId};
use crate::quadric::{aggregate_vertex_quadric, edge_collapse_quadric, optimal_placement, PenaltyConfig, Placement, Quadric};
use crate::Point;

pub use delaunay::{delaunay_edges, knn_edges};
pub use workspace::{CollapseError, CollapseRecord, Fate, SimplexFate, SimplexTuple, Workspace};

/// Default neighbour count for [`VirtualEdges::Knn`].
pub const DEFAULT_KNN: usize = 8;

/// Which virtual pairs to add to the mesh edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VirtualEdges {
    None,
    #[default]
    Delaunay,
    Knn(usize),
}

impl FromStr for VirtualEdges {
    type Err = String;

    /// Accepts `none`, `delaunay`, `knn` and `knn:K`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(VirtualEdges::None),
            "delaunay" => Ok(VirtualEdges::Delaunay),
            "knn" => Ok(VirtualEdges::Knn(DEFAULT_KNN)),
            _ => match s.strip_prefix("knn:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(VirtualEdges::Knn(k)),
                _ => Err(format!("unknown virtual-edge mode {s:?} (expected none, delaunay, knn or knn:K)")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairKind {
    MeshEdge,
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexPair {
    pub v1: VertexId,
    pub v2: VertexId,
    pub kind: PairKind,
}

/// Delaunay edges of the complex's vertices that are not already edges.
pub fn delaunay_virtual_edges(c: &SimplicialComplex) -> BTreeSet<(VertexId, VertexId)> {
    delaunay_edges(c.positions()).into_iter().filter(|&(a, b)| !c.has_edge(a, b)).collect()
}

/// Mesh edges plus the virtual pairs selected by `mode`, sorted by `(v1, v2)`
/// with `v1 < v2`.
pub fn candidate_pairs(c: &SimplicialComplex, mode: VirtualEdges) -> Vec<VertexPair> {
    let mut out: Vec<VertexPair> = c.edges().iter().map(|&[v1, v2]| VertexPair { v1, v2, kind: PairKind::MeshEdge }).collect();
    let extra = match mode {
        VirtualEdges::None => BTreeSet::new(),
        VirtualEdges::Delaunay => delaunay_edges(c.positions()),
        VirtualEdges::Knn(k) => knn_edges(c.positions(), k),
    };
    out.extend(extra.into_iter().filter(|&(a, b)| !c.has_edge(a, b)).map(|(v1, v2)| VertexPair { v1, v2, kind: PairKind::Virtual }));
    out.sort_by_key(|p| (p.v1, p.v2));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    TargetVertices(usize),
    Full,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplifyError {
    #[error("cannot simplify an empty complex")]
    Empty,
    #[error("target of {target} vertices is unreachable from {vertices}")]
    UnreachableTarget { target: usize, vertices: usize },
    #[error(transparent)]
    Quadric(#[from] crate::quadric::QuadricError),
}

/// Everything needed to reverse a simplification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseLog {
    pub source_vertex_count: usize,
    /// [`fingerprint`] of the input complex.
    pub source_fingerprint: u64,
    pub records: Vec<CollapseRecord>,
    pub final_vertex_count: usize,
    /// The last surviving vertex and its position, when the run reached a
    /// single vertex.
    pub root: Option<(VertexId, Point)>,
}

impl CollapseLog {
    pub fn is_full(&self) -> bool {
        self.final_vertex_count == 1 && self.root.is_some()
    }
}

/// FNV-1a hash over positions (bit patterns) and simplex tuples.
pub fn fingerprint(c: &SimplicialComplex) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for p in c.positions() {
        for x in p.iter() {
            feed(&x.to_bits().to_le_bytes());
        }
    }
    for s in c.simplex_tuples() {
        feed(&[s.len() as u8]);
        for v in s {
            feed(&v.to_le_bytes());
        }
    }
    h
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    cost: f64,
    v1: VertexId,
    v2: VertexId,
    stamps: [u32; 2],
    placement: Placement,
    position: Point,
}

impl Entry {
    fn key(&self) -> (f64, VertexId, VertexId) {
        (self.cost, self.v1, self.v2)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(self.stamps.cmp(&other.stamps))
    }
}

/// Stepwise greedy simplifier.
pub struct Simplifier {
    ws: Workspace,
    quadrics: Vec<Quadric>,
    stamps: Vec<u32>,
    partners: Vec<BTreeSet<VertexId>>,
    heap: BinaryHeap<Reverse<Entry>>,
    steps: usize,
}

impl Simplifier {
    pub fn new(c: &SimplicialComplex, pc: &PenaltyConfig, mode: VirtualEdges) -> Result<Self, SimplifyError> {
        if c.is_empty() {
            return Err(SimplifyError::Empty);
        }
        let n = c.vertex_count();
        let quadrics = (0..n as u32).map(|v| aggregate_vertex_quadric(c, v, pc)).collect::<Result<Vec<_>, _>>()?;
        let mut partners = vec![BTreeSet::new(); n];
        for p in candidate_pairs(c, mode) {
            partners[p.v1 as usize].insert(p.v2);
            partners[p.v2 as usize].insert(p.v1);
        }
        let mut s = Simplifier { ws: Workspace::new(c), quadrics, stamps: vec![0; n], partners, heap: BinaryHeap::new(), steps: 0 };
        for v1 in 0..n as u32 {
            let ups: Vec<VertexId> = s.partners[v1 as usize].range(v1 + 1..).copied().collect();
            for v2 in ups {
                s.push(v1, v2);
            }
        }
        Ok(s)
    }

    fn push(&mut self, a: VertexId, b: VertexId) {
        let (v1, v2) = (a.min(b), a.max(b));
        let q = edge_collapse_quadric(&self.quadrics[v1 as usize], &self.quadrics[v2 as usize]);
        let (placement, position, cost) = optimal_placement(&q, &self.ws.position(v1), &self.ws.position(v2));
        self.heap.push(Reverse(Entry { cost, v1, v2, stamps: [self.stamps[v1 as usize], self.stamps[v2 as usize]], placement, position }));
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    pub fn quadric(&self, v: VertexId) -> &Quadric {
        &self.quadrics[v as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.ws.vertex_count()
    }

    /// Current candidate partners of `v` (mesh neighbours and remapped
    /// virtual pairs).
    pub fn partners(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.partners[v as usize].iter().copied()
    }

    /// Executes the cheapest valid collapse, or returns `None` when no
    /// candidate pair is left.
    pub fn step(&mut self) -> Option<CollapseRecord> {
        while let Some(Reverse(e)) = self.heap.pop() {
            let (v1, v2) = (e.v1, e.v2);
            if !self.ws.is_alive(v1) || !self.ws.is_alive(v2) || e.stamps != [self.stamps[v1 as usize], self.stamps[v2 as usize]] {
                continue;
            }
            let mut rec = self.ws.collapse(v1, v2, e.placement, e.position).expect("live heap entry refers to live vertices");
            rec.step = self.steps;
            rec.cost = e.cost;
            self.steps += 1;

            self.quadrics[v1 as usize] = edge_collapse_quadric(&self.quadrics[v1 as usize], &self.quadrics[v2 as usize]);
            self.stamps[v1 as usize] += 1;
            self.stamps[v2 as usize] += 1;
            let moved = std::mem::take(&mut self.partners[v2 as usize]);
            for a in moved {
                self.partners[a as usize].remove(&v2);
                if a != v1 {
                    self.partners[a as usize].insert(v1);
                    self.partners[v1 as usize].insert(a);
                }
            }
            let fresh: Vec<VertexId> = self.partners[v1 as usize].iter().copied().collect();
            for a in fresh {
                self.push(v1, a);
            }
            return Some(rec);
        }
        None
    }
}

/// Simplifies `c` until `stop` is met or no candidate pair remains.
///
/// With [`VirtualEdges::None`] on a disconnected input, or a sparse k-NN graph,
/// the run may stop above the target; the log's `final_vertex_count` says
/// where it ended.
pub fn simplify(
    c: &SimplicialComplex,
    pc: &PenaltyConfig,
    mode: VirtualEdges,
    stop: Stop,
) -> Result<(SimplicialComplex, CollapseLog), SimplifyError> {
    if c.is_empty() {
        return Err(SimplifyError::Empty);
    }
    let n = c.vertex_count();
    let target = match stop {
        Stop::Full => 1,
        Stop::TargetVertices(k) if k >= 1 && k <= n => k,
        Stop::TargetVertices(k) => return Err(SimplifyError::UnreachableTarget { target: k, vertices: n }),
    };
    let mut s = Simplifier::new(c, pc, mode)?;
    let mut records = Vec::with_capacity(n - target);
    while s.vertex_count() > target {
        match s.step() {
            Some(r) => records.push(r),
            None => break,
        }
    }
    let (out, old_ids) = s.workspace().to_complex();
    let root = (old_ids.len() == 1).then(|| (old_ids[0], out.position(0)));
    let log =
        CollapseLog { source_vertex_count: n, source_fingerprint: fingerprint(c), records, final_vertex_count: out.vertex_count(), root };
    Ok((out, log))
}
