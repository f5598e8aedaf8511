use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{sorted2, sorted3, SimplicialComplex, VertexId};
use crate::quadric::Placement;
use crate::Point;

/// A simplex as a sorted vertex tuple (length 2 or 3).
pub type SimplexTuple = Vec<VertexId>;

/// What happened to one simplex of the combined star during a collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fate {
    /// Contained the survivor only; untouched.
    KeptWithSurvivor,
    /// Contained the removed vertex; re-pointed to the survivor.
    Remapped,
    /// Contained the removed vertex; its image already existed.
    MergedAway,
    /// Contained both endpoints and dropped one dimension.
    DeletedDegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexFate {
    pub simplex: SimplexTuple,
    pub fate: Fate,
}

/// One executed collapse. Vertex ids refer to the input complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseRecord {
    pub step: usize,
    pub v1: VertexId,
    pub v2: VertexId,
    /// Always `v1`; `v2` is removed.
    pub survivor: VertexId,
    pub placement: Placement,
    /// Positions of `v1` and `v2` just before the collapse.
    pub before: [Point; 2],
    pub position: Point,
    pub cost: f64,
    /// Every edge and triangle of `star(v1) ∪ star(v2)` before the collapse.
    pub diff: Vec<SimplexFate>,
}

impl CollapseRecord {
    pub fn removed(&self) -> VertexId {
        self.v2
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapseError {
    #[error("vertex {0} does not exist or was already removed")]
    DeadVertex(VertexId),
    #[error("cannot collapse vertex {0} onto itself")]
    SameVertex(VertexId),
}

/// Mutable complex with stable vertex ids and tombstones, used while
/// simplifying.
#[derive(Debug, Clone)]
pub struct Workspace {
    positions: Vec<Point>,
    alive: Vec<bool>,
    alive_count: usize,
    /// Edge `(v, a)` exists iff `a ∈ edges[v]`.
    edges: Vec<BTreeSet<VertexId>>,
    /// Triangle `(v, a, b)` exists iff `(a, b) ∈ triangles[v]` with `a < b`.
    triangles: Vec<BTreeSet<(VertexId, VertexId)>>,
}

impl Workspace {
    pub fn new(c: &SimplicialComplex) -> Self {
        let n = c.vertex_count();
        let mut ws = Workspace {
            positions: c.positions().to_vec(),
            alive: vec![true; n],
            alive_count: n,
            edges: vec![BTreeSet::new(); n],
            triangles: vec![BTreeSet::new(); n],
        };
        for &[a, b] in c.edges() {
            ws.edges[a as usize].insert(b);
            ws.edges[b as usize].insert(a);
        }
        for &[a, b, t] in c.triangles() {
            ws.insert_triangle([a, b, t]);
        }
        ws
    }

    fn insert_triangle(&mut self, t: [VertexId; 3]) {
        let [a, b, c] = t;
        self.triangles[a as usize].insert((b, c));
        self.triangles[b as usize].insert((a, c));
        self.triangles[c as usize].insert((a, b));
    }

    fn remove_triangle(&mut self, t: [VertexId; 3]) {
        let [a, b, c] = t;
        self.triangles[a as usize].remove(&(b, c));
        self.triangles[b as usize].remove(&(a, c));
        self.triangles[c as usize].remove(&(a, b));
    }

    pub fn vertex_count(&self) -> usize {
        self.alive_count
    }

    pub fn capacity(&self) -> usize {
        self.positions.len()
    }

    pub fn is_alive(&self, v: VertexId) -> bool {
        self.alive.get(v as usize).copied().unwrap_or(false)
    }

    pub fn position(&self, v: VertexId) -> Point {
        self.positions[v as usize]
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges[a as usize].contains(&b)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.edges[v as usize].iter().copied()
    }

    /// Triangles through `v`, as their two other vertices.
    pub fn triangle_fan(&self, v: VertexId) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.triangles[v as usize].iter().copied()
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.positions.len() as u32).filter(|&v| self.alive[v as usize])
    }

    /// Number of triangles on edge `(a, b)`.
    pub fn edge_triangle_count(&self, a: VertexId, b: VertexId) -> usize {
        let (a, b) = (a.min(b), a.max(b));
        self.triangles[a as usize].iter().filter(|&&(x, y)| x == b || y == b).count()
    }

    /// Merges `v2` into `v1`, moving `v1` to `position`.
    ///
    /// Simplices through `v2` are re-pointed to `v1`; those that already
    /// exist merge and those containing both endpoints are dropped. `v2` is
    /// tombstoned.
    pub fn collapse(&mut self, v1: VertexId, v2: VertexId, placement: Placement, position: Point) -> Result<CollapseRecord, CollapseError> {
        if v1 == v2 {
            return Err(CollapseError::SameVertex(v1));
        }
        for v in [v1, v2] {
            if !self.is_alive(v) {
                return Err(CollapseError::DeadVertex(v));
            }
        }
        let (s, t) = (v1, v2);
        let mut diff = Vec::new();

        // star of the survivor first, then the removed vertex
        for &a in &self.edges[s as usize] {
            let fate = if a == t { Fate::DeletedDegenerate } else { Fate::KeptWithSurvivor };
            diff.push(SimplexFate { simplex: sorted2(s, a).to_vec(), fate });
        }
        for &(a, b) in &self.triangles[s as usize] {
            let fate = if a == t || b == t { Fate::DeletedDegenerate } else { Fate::KeptWithSurvivor };
            diff.push(SimplexFate { simplex: sorted3(s, a, b).to_vec(), fate });
        }
        for &a in &self.edges[t as usize] {
            if a == s {
                continue;
            }
            let fate = if self.edges[s as usize].contains(&a) { Fate::MergedAway } else { Fate::Remapped };
            diff.push(SimplexFate { simplex: sorted2(t, a).to_vec(), fate });
        }
        for &(a, b) in &self.triangles[t as usize] {
            if a == s || b == s {
                continue;
            }
            let fate = if self.triangles[s as usize].contains(&(a, b)) { Fate::MergedAway } else { Fate::Remapped };
            diff.push(SimplexFate { simplex: sorted3(t, a, b).to_vec(), fate });
        }

        let before = [self.positions[s as usize], self.positions[t as usize]];

        let fan: Vec<(VertexId, VertexId)> = self.triangles[t as usize].iter().copied().collect();
        for (a, b) in fan {
            self.remove_triangle(sorted3(t, a, b));
            if a != s && b != s {
                self.insert_triangle(sorted3(s, a, b));
            }
        }
        let nbrs: Vec<VertexId> = std::mem::take(&mut self.edges[t as usize]).into_iter().collect();
        for a in nbrs {
            self.edges[a as usize].remove(&t);
            if a != s {
                self.edges[a as usize].insert(s);
                self.edges[s as usize].insert(a);
            }
        }
        self.alive[t as usize] = false;
        self.alive_count -= 1;
        self.positions[s as usize] = position;

        Ok(CollapseRecord { step: 0, v1, v2, survivor: s, placement, before, position, cost: 0.0, diff })
    }

    /// Compacts live vertices (ascending old id) into a fresh complex.
    /// Returns the complex and the old id of every new vertex.
    pub fn to_complex(&self) -> (SimplicialComplex, Vec<VertexId>) {
        let old: Vec<VertexId> = self.alive_vertices().collect();
        let mut new_id = vec![u32::MAX; self.positions.len()];
        for (i, &v) in old.iter().enumerate() {
            new_id[v as usize] = i as u32;
        }
        let positions = old.iter().map(|&v| self.positions[v as usize]).collect();
        let mut simplices: Vec<Vec<u32>> = Vec::new();
        for &v in &old {
            for &a in &self.edges[v as usize] {
                if v < a {
                    simplices.push(vec![new_id[v as usize], new_id[a as usize]]);
                }
            }
            for &(a, b) in &self.triangles[v as usize] {
                if v < a {
                    simplices.push(vec![new_id[v as usize], new_id[a as usize], new_id[b as usize]]);
                }
            }
        }
        let c = SimplicialComplex::build(positions, simplices).expect("workspace is a valid complex");
        (c, old)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn lone_triangle_degenerates_to_an_edge() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)], [[0u32, 1, 2]]).unwrap();
        let mut ws = Workspace::new(&c);
        let rec = ws.collapse(0, 1, Placement::KeepFirst, p(0., 0., 0.)).unwrap();
        let (out, old) = ws.to_complex();
        assert_eq!((out.vertex_count(), out.edge_count(), out.triangle_count()), (2, 1, 0));
        assert_eq!(old, vec![0, 2]);
        let degenerate: Vec<_> = rec.diff.iter().filter(|f| f.fate == Fate::DeletedDegenerate).map(|f| f.simplex.clone()).collect();
        assert_eq!(degenerate, vec![vec![0, 1], vec![0, 1, 2]]);
        let merged: Vec<_> = rec.diff.iter().filter(|f| f.fate == Fate::MergedAway).collect();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].simplex, vec![1, 2]);
    }

    #[test]
    fn two_points_merge_into_one() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(2., 0., 0.)], Vec::<Vec<u32>>::new()).unwrap();
        let mut ws = Workspace::new(&c);
        let rec = ws.collapse(0, 1, Placement::Midpoint, p(1., 0., 0.)).unwrap();
        assert!(rec.diff.is_empty());
        let (out, _) = ws.to_complex();
        assert_eq!(out.vertex_count(), 1);
        assert_eq!(out.position(0), p(1., 0., 0.));
    }

    #[test]
    fn interior_edge_of_glued_triangles() {
        // triangles (0,1,2) and (1,2,3), collapse the shared edge (1,2)
        let c =
            SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(1., 1., 0.)], [[0u32, 1, 2], [1, 2, 3]]).unwrap();
        let mut ws = Workspace::new(&c);
        let before: BTreeSet<_> = ws.triangle_fan(1).chain(ws.triangle_fan(2)).collect();
        assert_eq!(before.len(), 4);
        let rec = ws.collapse(1, 2, Placement::Midpoint, p(0.5, 0.5, 0.)).unwrap();
        let (out, old) = ws.to_complex();
        assert_eq!(old, vec![0, 1, 3]);
        assert_eq!(out.triangle_count(), 0);
        assert_eq!(out.edges(), &[[0, 1], [1, 2]]);
        // rims (0,2) and (2,3) were remapped onto the survivor
        let fate = |s: &[u32]| rec.diff.iter().find(|f| f.simplex == s).unwrap().fate;
        assert_eq!(fate(&[0, 2]), Fate::MergedAway);
        assert_eq!(fate(&[2, 3]), Fate::MergedAway);
        assert_eq!(fate(&[1, 2]), Fate::DeletedDegenerate);
        assert_eq!(fate(&[0, 1, 2]), Fate::DeletedDegenerate);
        assert_eq!(fate(&[1, 2, 3]), Fate::DeletedDegenerate);
        assert_eq!(fate(&[0, 1]), Fate::KeptWithSurvivor);
    }

    #[test]
    fn errors() {
        let c = SimplicialComplex::build(vec![p(0., 0., 0.), p(1., 0., 0.)], [[0u32, 1]]).unwrap();
        let mut ws = Workspace::new(&c);
        assert_eq!(ws.collapse(1, 1, Placement::KeepFirst, p(0., 0., 0.)).unwrap_err(), CollapseError::SameVertex(1));
        ws.collapse(0, 1, Placement::KeepFirst, p(0., 0., 0.)).unwrap();
        assert_eq!(ws.collapse(0, 1, Placement::KeepFirst, p(0., 0., 0.)).unwrap_err(), CollapseError::DeadVertex(1));
    }
}
