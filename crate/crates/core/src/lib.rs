//! Level-of-detail geometry by reversing simplification.
//!
//! - [`complex`]: simplicial complexes of points, edges and triangles.
//! - [`quadric`]: fundamental quadrics, penalty weights and placement.
//! - [`gslim`]: greedy quadric simplification with virtual pairs.
//! - [`psc`]: progressive simplicial complexes (vertex-split codec).
//! - [`tokenizer`]: token layout, BPE, validity oracle and constrained
//!   generation.
//! - [`shapes`]: procedural test meshes.

pub mod complex;
pub mod gslim;
pub mod psc;
pub mod quadric;
pub mod shapes;
pub mod tokenizer;

pub type Point = nalgebra::Point3<f64>;
pub type Vector = nalgebra::Vector3<f64>;

pub use complex::{chamfer_distance, complex_equal, SimplicialComplex, Star};
pub use gslim::{simplify, CollapseLog, CollapseRecord, Stop, VirtualEdges};
pub use psc::{reconstruct, reverse_log, Lod, Psc, TopoLabel, VertexSplit};
pub use quadric::{PenaltyConfig, Placement, Quadric};
