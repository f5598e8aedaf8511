use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{SimplicialComplex, VertexId};

/// How one simplex adjacent to the split vertex `s` behaves when `s`
/// splits into `s` and a new vertex `t`.
///
/// - `V0`/`V1`: the edge `s-t` is not / is created.
/// - `E0`: the edge stays on `s`. `E1`: it moves to `t`. `E2`: it stays and
///   a copy on `t` is added. `E3`: as `E2`, plus the triangle spanned by the
///   edge's far vertex, `s` and `t`.
/// - `F0`: the triangle stays on `s`. `F1`: it moves to `t`. `F2`: it stays
///   and a copy on `t` is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum TopoLabel {
    V0 = 0,
    V1 = 1,
    E0 = 2,
    E1 = 3,
    E2 = 4,
    E3 = 5,
    F0 = 6,
    F1 = 7,
    F2 = 8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelClass {
    Vertex,
    Edge,
    Face,
}

impl TopoLabel {
    pub const ALL: [TopoLabel; 9] = [
        TopoLabel::V0,
        TopoLabel::V1,
        TopoLabel::E0,
        TopoLabel::E1,
        TopoLabel::E2,
        TopoLabel::E3,
        TopoLabel::F0,
        TopoLabel::F1,
        TopoLabel::F2,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn class(self) -> LabelClass {
        match self {
            TopoLabel::V0 | TopoLabel::V1 => LabelClass::Vertex,
            TopoLabel::E0 | TopoLabel::E1 | TopoLabel::E2 | TopoLabel::E3 => LabelClass::Edge,
            _ => LabelClass::Face,
        }
    }

    /// Labels of the same class, in code order.
    pub fn siblings(self) -> &'static [TopoLabel] {
        match self.class() {
            LabelClass::Vertex => &Self::ALL[0..2],
            LabelClass::Edge => &Self::ALL[2..6],
            LabelClass::Face => &Self::ALL[6..9],
        }
    }
}

impl fmt::Display for TopoLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Shape of the label list for splitting one vertex: its incident triangles
/// and edges in ascending id order, and for each triangle the positions (in
/// the edge list) of its two edges through the vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StarLayout {
    pub triangles: Vec<u32>,
    pub edges: Vec<u32>,
    pub triangle_edges: Vec<[usize; 2]>,
}

impl StarLayout {
    pub fn of(c: &SimplicialComplex, v: VertexId) -> Self {
        let triangles = c.incident_triangles(v).to_vec();
        let edges = c.incident_edges(v).to_vec();
        let triangle_edges = triangles
            .iter()
            .map(|&t| {
                let mut k = 0;
                let mut out = [0usize; 2];
                for w in c.triangle(t) {
                    if w == v {
                        continue;
                    }
                    let e = c.edge_id(v, w).expect("closed complex");
                    out[k] = edges.binary_search(&e).expect("edge in star");
                    k += 1;
                }
                out.sort_unstable();
                out
            })
            .collect();
        StarLayout { triangles, edges, triangle_edges }
    }

    /// Number of labels a split of this vertex carries.
    pub fn label_count(&self) -> usize {
        1 + self.triangles.len() + self.edges.len()
    }

    pub fn triangle_position(&self, i: usize) -> usize {
        1 + i
    }

    pub fn edge_position(&self, j: usize) -> usize {
        1 + self.triangles.len() + j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `V0` forbids `E3`.
    R1,
    /// An `F0` triangle's edges through `s` are not `E1`.
    R2,
    /// An `F1` triangle's edges through `s` are not `E0`.
    R3,
    /// An `F2` triangle's edges through `s` are neither `E0` nor `E1`.
    R4,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::R1 => 1,
            Rule::R2 => 2,
            Rule::R3 => 3,
            Rule::R4 => 4,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("expected {expected} labels, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("label {label} at position {position} has the wrong class")]
    WrongClass { position: usize, label: TopoLabel },
    #[error("rule {rule} violated at label positions {positions:?}")]
    Violation { rule: Rule, positions: Vec<usize> },
}

impl RuleError {
    pub fn rule(&self) -> Option<Rule> {
        match self {
            RuleError::Violation { rule, .. } => Some(*rule),
            _ => None,
        }
    }
}

/// Checks a label list against the star layout of the vertex being split.
///
/// Rules are tried in order R1 to R4 and the first violation found is
/// returned; within a rule, triangles (and then edges) are scanned in
/// ascending position.
pub fn check_rules(labels: &[TopoLabel], layout: &StarLayout) -> Result<(), RuleError> {
    let expected = layout.label_count();
    if labels.len() != expected {
        return Err(RuleError::LengthMismatch { expected, got: labels.len() });
    }
    let nt = layout.triangles.len();
    for (i, &l) in labels.iter().enumerate() {
        let want = if i == 0 {
            LabelClass::Vertex
        } else if i <= nt {
            LabelClass::Face
        } else {
            LabelClass::Edge
        };
        if l.class() != want {
            return Err(RuleError::WrongClass { position: i, label: l });
        }
    }
    let edge_label = |j: usize| labels[layout.edge_position(j)];

    if labels[0] == TopoLabel::V0 {
        if let Some(j) = (0..layout.edges.len()).find(|&j| edge_label(j) == TopoLabel::E3) {
            return Err(RuleError::Violation { rule: Rule::R1, positions: vec![0, layout.edge_position(j)] });
        }
    }
    let rules: [(Rule, TopoLabel, &[TopoLabel]); 3] = [
        (Rule::R2, TopoLabel::F0, &[TopoLabel::E1]),
        (Rule::R3, TopoLabel::F1, &[TopoLabel::E0]),
        (Rule::R4, TopoLabel::F2, &[TopoLabel::E0, TopoLabel::E1]),
    ];
    for (rule, face, banned) in rules {
        for (i, pair) in layout.triangle_edges.iter().enumerate() {
            if labels[layout.triangle_position(i)] != face {
                continue;
            }
            let bad: Vec<usize> = pair.iter().filter(|&&j| banned.contains(&edge_label(j))).map(|&j| layout.edge_position(j)).collect();
            if !bad.is_empty() {
                let mut positions = vec![layout.triangle_position(i)];
                positions.extend(bad);
                return Err(RuleError::Violation { rule, positions });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use TopoLabel::*;

    /// Two triangles sharing the edge through `s` at position 1.
    fn fan() -> StarLayout {
        StarLayout { triangles: vec![0, 1], edges: vec![0, 1, 2], triangle_edges: vec![[0, 1], [1, 2]] }
    }

    #[test]
    fn codes_round_trip() {
        for l in TopoLabel::ALL {
            assert_eq!(TopoLabel::from_code(l.code()), Some(l));
            assert!(l.siblings().contains(&l));
        }
        assert_eq!(TopoLabel::from_code(9), None);
    }

    #[test]
    fn lone_vertex() {
        let l = StarLayout::default();
        assert_eq!(check_rules(&[V1], &l), Ok(()));
        assert_eq!(check_rules(&[V0], &l), Ok(()));
        assert!(matches!(check_rules(&[], &l), Err(RuleError::LengthMismatch { .. })));
        assert!(matches!(check_rules(&[E0], &l), Err(RuleError::WrongClass { position: 0, .. })));
    }

    #[test]
    fn r1() {
        let l = StarLayout { edges: vec![4], ..Default::default() };
        let err = check_rules(&[V0, E3], &l).unwrap_err();
        assert_eq!(err, RuleError::Violation { rule: Rule::R1, positions: vec![0, 1] });
        assert_eq!(check_rules(&[V1, E3], &l), Ok(()));
    }

    #[test]
    fn face_rules() {
        let l = fan();
        assert_eq!(check_rules(&[V1, F2, F0, E2, E3, E0], &l), Ok(()));
        assert_eq!(check_rules(&[V0, F0, F1, E1, E2, E1], &l).unwrap_err().rule(), Some(Rule::R2));
        assert_eq!(check_rules(&[V0, F1, F1, E1, E0, E1], &l).unwrap_err().rule(), Some(Rule::R3));
        assert_eq!(check_rules(&[V0, F2, F0, E2, E1, E0], &l).unwrap_err().rule(), Some(Rule::R2));
        let err = check_rules(&[V0, F1, F2, E1, E2, E0], &l).unwrap_err();
        assert_eq!(err, RuleError::Violation { rule: Rule::R4, positions: vec![2, 5] });
    }
}
