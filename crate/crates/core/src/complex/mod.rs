//! Simplicial complexes of dimension at most two.
//!
//! A [`SimplicialComplex`] stores vertex positions together with a closed set
//! of edges and triangles. Every position is a vertex (a 0-simplex), so a
//! complex with no edges is a point cloud. Edge and triangle tuples are kept
//! with sorted vertex indices and each simplex carries a dense per-dimension
//! id.
//!
//! Ids are assigned deterministically by [`SimplicialComplex::build`]
//! (dimension-major, then lexicographic by vertex tuple). The only mutation
//! on this type is [`SimplicialComplex::apply_vsplit`], which is append-only:
//! existing ids never change meaning except for simplices that a split
//! reconnects to the new vertex, which keep their id.

mod chamfer;
mod equal;
pub mod io;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::{Point, Vector};

pub use chamfer::chamfer_distance;
pub use equal::complex_equal;

pub type VertexId = u32;
pub type EdgeId = u32;
pub type TriangleId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("vertex index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { index: u32, vertex_count: usize },
    #[error("simplex of arity {0} is not supported (expected 1 to 3 vertices)")]
    BadArity(usize),
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<u32>),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(u32),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("complex has more than u32::MAX simplices")]
    TooLarge,
    #[error("complex is empty")]
    Empty,
}

/// Edges and triangles incident to one vertex, ascending by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Star {
    pub vertex: VertexId,
    pub edges: Vec<EdgeId>,
    pub triangles: Vec<TriangleId>,
}

/// Incidence classification of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBoundary {
    /// Exactly one incident triangle.
    pub boundary: bool,
    /// No incident triangle (a wire).
    pub isolated: bool,
}

/// Result of [`SimplicialComplex::validate`].
///
/// Structural problems (broken closure, unsorted tuples, stale lookups) make
/// the complex invalid. Degenerate simplices are reported but allowed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub problems: Vec<String>,
    pub degenerate_edges: Vec<EdgeId>,
    pub degenerate_triangles: Vec<TriangleId>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimplicialComplex {
    positions: Vec<Point>,
    edges: Vec<[VertexId; 2]>,
    triangles: Vec<[VertexId; 3]>,
    edge_lookup: HashMap<[VertexId; 2], EdgeId>,
    triangle_lookup: HashMap<[VertexId; 3], TriangleId>,
    vertex_edges: Vec<Vec<EdgeId>>,
    vertex_triangles: Vec<Vec<TriangleId>>,
}

pub(crate) fn sorted2(a: u32, b: u32) -> [u32; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

pub(crate) fn sorted3(a: u32, b: u32, c: u32) -> [u32; 3] {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

fn insert_sorted(list: &mut Vec<u32>, id: u32) {
    if let Err(pos) = list.binary_search(&id) {
        list.insert(pos, id);
    }
}

fn remove_sorted(list: &mut Vec<u32>, id: u32) {
    if let Ok(pos) = list.binary_search(&id) {
        list.remove(pos);
    }
}

impl SimplicialComplex {
    /// Builds a complex from positions and simplex tuples.
    ///
    /// Missing sub-simplices are inserted, duplicates collapse to one entry
    /// and ids are assigned dimension-major, then lexicographically by the
    /// sorted vertex tuple.
    pub fn build<I, S>(positions: Vec<Point>, simplices: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u32]>,
    {
        let n = positions.len();
        if n > u32::MAX as usize {
            return Err(ComplexError::TooLarge);
        }
        for (i, p) in positions.iter().enumerate() {
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(ComplexError::NonFinite(i as u32));
            }
        }
        let mut edges = BTreeSet::new();
        let mut triangles = BTreeSet::new();
        for s in simplices {
            let s = s.as_ref();
            for &i in s {
                if i as usize >= n {
                    return Err(ComplexError::IndexOutOfRange { index: i, vertex_count: n });
                }
            }
            match *s {
                [_] => {}
                [a, b] => {
                    if a == b {
                        return Err(ComplexError::RepeatedVertex(s.to_vec()));
                    }
                    edges.insert(sorted2(a, b));
                }
                [a, b, c] => {
                    if a == b || b == c || a == c {
                        return Err(ComplexError::RepeatedVertex(s.to_vec()));
                    }
                    let t = sorted3(a, b, c);
                    edges.insert([t[0], t[1]]);
                    edges.insert([t[0], t[2]]);
                    edges.insert([t[1], t[2]]);
                    triangles.insert(t);
                }
                _ => return Err(ComplexError::BadArity(s.len())),
            }
        }
        let mut c =
            SimplicialComplex { vertex_edges: vec![Vec::new(); n], vertex_triangles: vec![Vec::new(); n], positions, ..Default::default() };
        for e in edges {
            c.push_edge(e);
        }
        for t in triangles {
            c.push_triangle(t);
        }
        Ok(c)
    }

    /// A complex holding a single point.
    pub fn single_point(p: Point) -> Self {
        SimplicialComplex { positions: vec![p], vertex_edges: vec![Vec::new()], vertex_triangles: vec![Vec::new()], ..Default::default() }
    }

    fn push_edge(&mut self, e: [VertexId; 2]) -> EdgeId {
        let id = self.edges.len() as EdgeId;
        self.edges.push(e);
        self.edge_lookup.insert(e, id);
        self.vertex_edges[e[0] as usize].push(id);
        self.vertex_edges[e[1] as usize].push(id);
        id
    }

    fn push_triangle(&mut self, t: [VertexId; 3]) -> TriangleId {
        let id = self.triangles.len() as TriangleId;
        self.triangles.push(t);
        self.triangle_lookup.insert(t, id);
        for v in t {
            self.vertex_triangles[v as usize].push(id);
        }
        id
    }

    pub(crate) fn push_vertex(&mut self, p: Point) -> VertexId {
        self.positions.push(p);
        self.vertex_edges.push(Vec::new());
        self.vertex_triangles.push(Vec::new());
        (self.positions.len() - 1) as VertexId
    }

    pub(crate) fn add_edge(&mut self, a: VertexId, b: VertexId) -> EdgeId {
        let e = sorted2(a, b);
        match self.edge_lookup.get(&e) {
            Some(&id) => id,
            None => self.push_edge(e),
        }
    }

    pub(crate) fn add_triangle(&mut self, a: VertexId, b: VertexId, c: VertexId) -> TriangleId {
        let t = sorted3(a, b, c);
        match self.triangle_lookup.get(&t) {
            Some(&id) => id,
            None => self.push_triangle(t),
        }
    }

    /// Replaces vertex `from` by `to` in edge `id`, keeping the id.
    pub(crate) fn reconnect_edge(&mut self, id: EdgeId, from: VertexId, to: VertexId) {
        let old = self.edges[id as usize];
        let other = if old[0] == from { old[1] } else { old[0] };
        let new = sorted2(other, to);
        self.edge_lookup.remove(&old);
        self.edge_lookup.insert(new, id);
        self.edges[id as usize] = new;
        remove_sorted(&mut self.vertex_edges[from as usize], id);
        insert_sorted(&mut self.vertex_edges[to as usize], id);
    }

    /// Replaces vertex `from` by `to` in triangle `id`, keeping the id.
    pub(crate) fn reconnect_triangle(&mut self, id: TriangleId, from: VertexId, to: VertexId) {
        let old = self.triangles[id as usize];
        let mut t = old;
        for v in t.iter_mut() {
            if *v == from {
                *v = to;
            }
        }
        t.sort_unstable();
        self.triangle_lookup.remove(&old);
        self.triangle_lookup.insert(t, id);
        self.triangles[id as usize] = t;
        remove_sorted(&mut self.vertex_triangles[from as usize], id);
        insert_sorted(&mut self.vertex_triangles[to as usize], id);
    }

    pub(crate) fn set_position(&mut self, v: VertexId, p: Point) {
        self.positions[v as usize] = p;
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: VertexId) -> Point {
        self.positions[v as usize]
    }

    /// Edge tuples indexed by edge id.
    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    /// Triangle tuples indexed by triangle id.
    pub fn triangles(&self) -> &[[VertexId; 3]] {
        &self.triangles
    }

    pub fn edge(&self, id: EdgeId) -> [VertexId; 2] {
        self.edges[id as usize]
    }

    pub fn triangle(&self, id: TriangleId) -> [VertexId; 3] {
        self.triangles[id as usize]
    }

    pub fn edge_id(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_lookup.get(&sorted2(a, b)).copied()
    }

    pub fn triangle_id(&self, a: VertexId, b: VertexId, c: VertexId) -> Option<TriangleId> {
        self.triangle_lookup.get(&sorted3(a, b, c)).copied()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_id(a, b).is_some()
    }

    pub fn has_triangle(&self, a: VertexId, b: VertexId, c: VertexId) -> bool {
        self.triangle_id(a, b, c).is_some()
    }

    pub fn star(&self, v: VertexId) -> Result<Star, ComplexError> {
        let i = v as usize;
        if i >= self.positions.len() {
            return Err(ComplexError::UnknownVertex(v));
        }
        Ok(Star { vertex: v, edges: self.vertex_edges[i].clone(), triangles: self.vertex_triangles[i].clone() })
    }

    pub(crate) fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.vertex_edges[v as usize]
    }

    pub(crate) fn incident_triangles(&self, v: VertexId) -> &[TriangleId] {
        &self.vertex_triangles[v as usize]
    }

    /// Number of triangles containing edge `e`.
    pub fn edge_triangle_count(&self, e: EdgeId) -> Result<usize, ComplexError> {
        let [a, b] = *self.edges.get(e as usize).ok_or(ComplexError::UnknownEdge(e))?;
        let ta = &self.vertex_triangles[a as usize];
        let tb = &self.vertex_triangles[b as usize];
        // both lists are sorted
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < ta.len() && j < tb.len() {
            match ta[i].cmp(&tb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(n)
    }

    pub fn is_boundary_edge(&self, e: EdgeId) -> Result<EdgeBoundary, ComplexError> {
        let n = self.edge_triangle_count(e)?;
        Ok(EdgeBoundary { boundary: n == 1, isolated: n == 0 })
    }

    /// Full rescan of every invariant.
    pub fn validate(&self) -> Validation {
        let mut v = Validation::default();
        let n = self.positions.len();
        if self.vertex_edges.len() != n || self.vertex_triangles.len() != n {
            v.problems.push("incidence tables do not match vertex count".into());
            return v;
        }
        for (i, p) in self.positions.iter().enumerate() {
            if !p.coords.iter().all(|c| c.is_finite()) {
                v.problems.push(format!("vertex {i} is not finite"));
            }
        }
        if self.edge_lookup.len() != self.edges.len() {
            v.problems.push("duplicate edge tuples".into());
        }
        if self.triangle_lookup.len() != self.triangles.len() {
            v.problems.push("duplicate triangle tuples".into());
        }
        for (id, e) in self.edges.iter().enumerate() {
            if e[0] >= e[1] || e[1] as usize >= n {
                v.problems.push(format!("edge {id} tuple {e:?} unsorted or out of range"));
                continue;
            }
            if self.edge_lookup.get(e) != Some(&(id as u32)) {
                v.problems.push(format!("edge {id} missing from lookup"));
            }
            if self.positions[e[0] as usize] == self.positions[e[1] as usize] {
                v.degenerate_edges.push(id as u32);
            }
        }
        for (id, t) in self.triangles.iter().enumerate() {
            if t[0] >= t[1] || t[1] >= t[2] || t[2] as usize >= n {
                v.problems.push(format!("triangle {id} tuple {t:?} unsorted or out of range"));
                continue;
            }
            if self.triangle_lookup.get(t) != Some(&(id as u32)) {
                v.problems.push(format!("triangle {id} missing from lookup"));
            }
            for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                if !self.has_edge(a, b) {
                    v.problems.push(format!("closure: triangle {id} lacks edge ({a},{b})"));
                }
            }
            let [p0, p1, p2] = t.map(|i| self.positions[i as usize]);
            if (p1 - p0).cross(&(p2 - p0)).norm_squared() == 0.0 {
                v.degenerate_triangles.push(id as u32);
            }
        }
        // incidence lists must equal a brute-force scan
        let mut ve = vec![Vec::new(); n];
        let mut vt = vec![Vec::new(); n];
        for (id, e) in self.edges.iter().enumerate() {
            for &x in e {
                if (x as usize) < n {
                    ve[x as usize].push(id as u32);
                }
            }
        }
        for (id, t) in self.triangles.iter().enumerate() {
            for &x in t {
                if (x as usize) < n {
                    vt[x as usize].push(id as u32);
                }
            }
        }
        if ve != self.vertex_edges || vt != self.vertex_triangles {
            v.problems.push("incidence lists disagree with simplex tables".into());
        }
        v
    }

    /// Edges that belong to no triangle.
    pub fn wire_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).filter(|&e| self.edge_triangle_count(e) == Ok(0))
    }

    /// Vertices that belong to no edge.
    pub fn isolated_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.positions.len() as u32).filter(|&v| self.vertex_edges[v as usize].is_empty())
    }

    /// All simplices as vertex tuples: points, then edges, then triangles.
    pub fn simplex_tuples(&self) -> Vec<Vec<u32>> {
        (0..self.positions.len() as u32)
            .map(|v| vec![v])
            .chain(self.edges.iter().map(|e| e.to_vec()))
            .chain(self.triangles.iter().map(|t| t.to_vec()))
            .collect()
    }

    /// Axis-aligned bounding box, `None` for an empty complex.
    pub fn bounds(&self) -> Option<(Point, Point)> {
        let first = *self.positions.first()?;
        Some(self.positions.iter().fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
    }

    /// Vertex positions translated by `delta`.
    pub fn translate(&mut self, delta: Vector) {
        for p in &mut self.positions {
            *p += delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    fn tetra() -> SimplicialComplex {
        SimplicialComplex::build(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(0., 0., 1.)],
            [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn closure_is_inserted() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)], [[0u32, 1, 2]]).unwrap();
        assert_eq!((c.vertex_count(), c.edge_count(), c.triangle_count()), (3, 3, 1));
        assert_eq!(c.edges(), &[[0, 1], [0, 2], [1, 2]]);
        assert!(c.validate().is_valid());
    }

    #[test]
    fn mixed_dimension() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(2., 0., 0.)], [vec![0u32], vec![1, 2]]).unwrap();
        assert_eq!((c.vertex_count(), c.edge_count(), c.triangle_count()), (3, 1, 0));
        assert_eq!(c.isolated_vertices().collect::<Vec<_>>(), vec![0]);
        assert_eq!(c.wire_edges().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn duplicates_are_merged() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.)], [[0u32, 1], [1, 0], [0, 1]]).unwrap();
        assert_eq!(c.edge_count(), 1);
    }

    #[test]
    fn build_errors() {
        let pts = vec![p(0., 0., 0.), p(1., 0., 0.)];
        assert_eq!(
            SimplicialComplex::build(pts.clone(), [[0u32, 2]]).unwrap_err(),
            ComplexError::IndexOutOfRange { index: 2, vertex_count: 2 }
        );
        assert_eq!(SimplicialComplex::build(pts.clone(), [vec![0u32, 1, 1, 0]]).unwrap_err(), ComplexError::BadArity(4));
        assert!(matches!(SimplicialComplex::build(vec![p(f64::NAN, 0., 0.)], [[0u32]]), Err(ComplexError::NonFinite(0))));
    }

    #[test]
    fn tetra_star() {
        let c = tetra();
        for v in 0..4 {
            let s = c.star(v).unwrap();
            assert_eq!((s.edges.len(), s.triangles.len()), (3, 3));
        }
        assert_eq!(c.star(9).unwrap_err(), ComplexError::UnknownVertex(9));
    }

    #[test]
    fn isolated_vertex_star_is_empty() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(3., 0., 0.)], [[0u32, 1]]).unwrap();
        let s = c.star(2).unwrap();
        assert!(s.edges.is_empty() && s.triangles.is_empty());
    }

    #[test]
    fn boundary_classification() {
        let one = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)], [[0u32, 1, 2]]).unwrap();
        for e in 0..3 {
            assert_eq!(one.is_boundary_edge(e).unwrap(), EdgeBoundary { boundary: true, isolated: false });
        }
        let two =
            SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(1., 1., 0.)], [[0u32, 1, 2], [1, 2, 3]]).unwrap();
        let shared = two.edge_id(1, 2).unwrap();
        assert_eq!(two.is_boundary_edge(shared).unwrap(), EdgeBoundary { boundary: false, isolated: false });
        let wire = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.)], [[0u32, 1]]).unwrap();
        assert_eq!(wire.is_boundary_edge(0).unwrap(), EdgeBoundary { boundary: false, isolated: true });
        assert_eq!(wire.is_boundary_edge(5).unwrap_err(), ComplexError::UnknownEdge(5));
    }

    #[test]
    fn degenerate_simplices_are_flagged_not_rejected() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(2., 0., 0.)], [[0u32, 1, 2]]).unwrap();
        let v = c.validate();
        assert!(v.is_valid());
        assert_eq!(v.degenerate_triangles, vec![0]);
    }
}
