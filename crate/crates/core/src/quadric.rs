//! Fundamental quadrics of points, edges and triangles.
//!
//! A quadric `(A, b, c)` evaluates `Q(x) = xᵀAx + 2bᵀx + c`. The fundamental
//! quadric of a simplex with tangent orthonormal basis `{eᵢ}` and barycenter
//! `p` uses `A = I − Σ eᵢeᵢᵀ`, `b = −Ap`, `c = pᵀAp`, so `Q(x)` is the
//! squared distance from `x` to the simplex's affine hull.

use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex, VertexId};
use crate::{Point, Vector};
use nalgebra::Matrix3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadricError {
    #[error("simplex must have 1 to 3 vertices, got {0}")]
    BadArity(usize),
    #[error("non-finite vertex position")]
    NonFinite,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric {
    pub a: Matrix3<f64>,
    pub b: Vector,
    pub c: f64,
}

impl Default for Quadric {
    fn default() -> Self {
        Self::zero()
    }
}

impl Quadric {
    pub fn zero() -> Self {
        Quadric { a: Matrix3::zeros(), b: Vector::zeros(), c: 0.0 }
    }

    /// Quadric with coefficient matrix `a` centred at `p`.
    fn centred(a: Matrix3<f64>, p: &Point) -> Self {
        let ap = a * p.coords;
        Quadric { a, b: -ap, c: p.coords.dot(&ap) }
    }

    /// `‖x − p‖²`.
    pub fn point(p: &Point) -> Self {
        Self::centred(Matrix3::identity(), p)
    }

    /// Squared distance to the line through `p` with unit direction `dir`.
    fn line(p: &Point, dir: &Vector) -> Self {
        Self::centred(Matrix3::identity() - dir * dir.transpose(), p)
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let v = x.coords;
        v.dot(&(self.a * v)) + 2.0 * self.b.dot(&v) + self.c
    }

    pub fn scaled(&self, w: f64) -> Self {
        Quadric { a: self.a * w, b: self.b * w, c: self.c * w }
    }

    /// Fundamental quadric of the simplex spanned by 1 to 3 points.
    ///
    /// Degenerate inputs fall back to the quadric of their affine hull: a
    /// collinear triangle becomes a line quadric, coincident points a point
    /// quadric.
    pub fn fundamental(points: &[Point]) -> Result<Self, QuadricError> {
        if points.is_empty() || points.len() > 3 {
            return Err(QuadricError::BadArity(points.len()));
        }
        if !points.iter().all(|p| p.coords.iter().all(|c| c.is_finite())) {
            return Err(QuadricError::NonFinite);
        }
        let n = points.len() as f64;
        let bary = Point::from(points.iter().map(|p| p.coords).sum::<Vector>() / n);
        let scale = points.iter().map(|p| (p - bary).norm()).fold(0.0, f64::max);
        let tiny = scale * 1e-12;

        match points {
            [_] => Ok(Self::point(&bary)),
            [p, q] => match (q - p).try_normalize(tiny) {
                Some(dir) => Ok(Self::line(&bary, &dir)),
                None => Ok(Self::point(&bary)),
            },
            [p0, p1, p2] => {
                // longest side first keeps Gram-Schmidt well conditioned
                let sides = [(*p0, *p1, *p2), (*p1, *p2, *p0), (*p2, *p0, *p1)];
                let (o, u, w) = sides.into_iter().max_by(|x, y| (x.1 - x.0).norm_squared().total_cmp(&(y.1 - y.0).norm_squared())).unwrap();
                let Some(e1) = (u - o).try_normalize(tiny) else {
                    return Ok(Self::point(&bary));
                };
                let r = w - o;
                let r = r - e1 * e1.dot(&r);
                match r.try_normalize(tiny) {
                    Some(e2) => {
                        let a = Matrix3::identity() - e1 * e1.transpose() - e2 * e2.transpose();
                        Ok(Self::centred(a, &bary))
                    }
                    None => Ok(Self::line(&bary, &e1)),
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Add for Quadric {
    type Output = Quadric;

    fn add(self, o: Quadric) -> Quadric {
        Quadric { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c }
    }
}

impl AddAssign for Quadric {
    fn add_assign(&mut self, o: Quadric) {
        self.a += o.a;
        self.b += o.b;
        self.c += o.c;
    }
}

/// Weights for the vertex, boundary-edge and face quadrics ("VEF").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub vertex: f64,
    pub boundary_edge: f64,
    pub face: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { vertex: 0.0, boundary_edge: 1.0, face: 1.0 }
    }
}

impl PenaltyConfig {
    pub fn new(vertex: f64, boundary_edge: f64, face: f64) -> Result<Self, String> {
        for (name, w) in [("vertex", vertex), ("boundary edge", boundary_edge), ("face", face)] {
            if !w.is_finite() || w < 0.0 {
                return Err(format!("{name} penalty must be finite and non-negative, got {w}"));
            }
        }
        Ok(PenaltyConfig { vertex, boundary_edge, face })
    }
}

impl FromStr for PenaltyConfig {
    type Err = String;

    /// Parses `"V,E,F"`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> =
            s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad penalty {t:?}"))).collect::<Result<_, _>>()?;
        match parts[..] {
            [v, e, f] => PenaltyConfig::new(v, e, f),
            _ => Err(format!("expected three comma-separated penalties, got {s:?}")),
        }
    }
}

/// Aggregated quadric of vertex `v`.
///
/// Sums, in this order: triangle quadrics of the star (ascending id) scaled
/// by the face weight, quadrics of boundary or wire edges of the star
/// (ascending id) scaled by the boundary-edge weight, and the point quadric
/// of `v` scaled by the vertex weight. Interior edges contribute nothing.
pub fn aggregate_vertex_quadric(c: &SimplicialComplex, v: VertexId, pc: &PenaltyConfig) -> Result<Quadric, QuadricError> {
    let star = c.star(v)?;
    let mut q = Quadric::zero();
    for &t in &star.triangles {
        let pts = c.triangle(t).map(|i| c.position(i));
        q += Quadric::fundamental(&pts)?.scaled(pc.face);
    }
    for &e in &star.edges {
        if c.edge_triangle_count(e)? <= 1 {
            let pts = c.edge(e).map(|i| c.position(i));
            q += Quadric::fundamental(&pts)?.scaled(pc.boundary_edge);
        }
    }
    q += Quadric::point(&c.position(v)).scaled(pc.vertex);
    Ok(q)
}

pub fn edge_collapse_quadric(q1: &Quadric, q2: &Quadric) -> Quadric {
    *q1 + *q2
}

/// Where the merged vertex of a collapse goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Placement {
    KeepFirst,
    KeepSecond,
    Midpoint,
}

/// Cheapest of `{p1, p2, (p1+p2)/2}` under `q`; ties go to the earlier
/// candidate in that order.
pub fn optimal_placement(q: &Quadric, p1: &Point, p2: &Point) -> (Placement, Point, f64) {
    let mid = Point::from((p1.coords + p2.coords) * 0.5);
    let mut best = (Placement::KeepFirst, *p1, q.eval(p1));
    for (pl, p) in [(Placement::KeepSecond, *p2), (Placement::Midpoint, mid)] {
        let cost = q.eval(&p);
        if cost < best.2 {
            best = (pl, p, cost);
        }
    }
    best
}
