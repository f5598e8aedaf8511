//! Procedural test meshes.
//!
//! Every generator snaps coordinates to a grid of 2^-12 model units. On that
//! grid, sums, differences and halvings of coordinates are exact in f64
//! (until about 40 nested midpoints), which is what lossless PSC round trips
//! need.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::SimplicialComplex;
use crate::{Point, Vector};

pub const GRID: f64 = 1.0 / 4096.0;

pub fn snap(p: Point) -> Point {
    p.map(|x| (x / GRID).round() * GRID)
}

fn finish(positions: Vec<Point>, simplices: Vec<Vec<u32>>) -> SimplicialComplex {
    let positions = positions.into_iter().map(snap).collect();
    SimplicialComplex::build(positions, simplices).expect("generator emits valid indices")
}

pub fn tetrahedron() -> SimplicialComplex {
    finish(
        vec![Point::new(1., 1., 1.), Point::new(1., -1., -1.), Point::new(-1., 1., -1.), Point::new(-1., -1., 1.)],
        vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
    )
}

pub fn cube() -> SimplicialComplex {
    let positions = (0..8).map(|i| Point::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)).collect();
    let quads = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]];
    let mut tris = Vec::new();
    for q in quads {
        tris.push(vec![q[0], q[1], q[2]]);
        tris.push(vec![q[0], q[2], q[3]]);
    }
    finish(positions, tris)
}

/// Unit icosphere; `subdivisions = 3` gives 642 vertices.
pub fn icosphere(subdivisions: u32) -> SimplicialComplex {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pos: Vec<Vector> = [
        [-1., t, 0.],
        [1., t, 0.],
        [-1., -t, 0.],
        [1., -t, 0.],
        [0., -1., t],
        [0., 1., t],
        [0., -1., -t],
        [0., 1., -t],
        [t, 0., -1.],
        [t, 0., 1.],
        [-t, 0., -1.],
        [-t, 0., 1.],
    ]
    .iter()
    .map(|v| Vector::from(*v).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, pos: &mut Vec<Vector>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                pos.push((pos[a as usize] + pos[b as usize]).normalize());
                (pos.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut pos);
            let bc = mid(b, c, &mut pos);
            let ca = mid(c, a, &mut pos);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    finish(pos.into_iter().map(Point::from).collect(), faces.into_iter().map(|f| f.to_vec()).collect())
}

/// Closed torus around the z axis with `nu` segments around the axis and
/// `nv` around the tube.
pub fn torus(major: f64, minor: f64, nu: u32, nv: u32) -> SimplicialComplex {
    let mut pos = Vec::new();
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            pos.push(Point::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: u32, j: u32| (i % nu) * nv + (j % nv);
    let mut tris = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    finish(pos, tris)
}

/// Flat ring in the plane z = 0 with `rings + 1` concentric vertex circles
/// of `segments` vertices each.
pub fn annulus(inner: f64, outer: f64, rings: u32, segments: u32) -> SimplicialComplex {
    let mut pos = Vec::new();
    for i in 0..=rings {
        let r = inner + (outer - inner) * i as f64 / rings as f64;
        for j in 0..segments {
            let a = TAU * j as f64 / segments as f64;
            pos.push(Point::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let id = |i: u32, j: u32| i * segments + (j % segments);
    let mut tris = Vec::new();
    for i in 0..rings {
        for j in 0..segments {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    finish(pos, tris)
}

/// Open square patch of `nx` by `ny` cells on [0, 1]^2 with a height bump.
pub fn patch(nx: u32, ny: u32, bump: f64) -> SimplicialComplex {
    let mut pos = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let (x, y) = (i as f64 / nx as f64, j as f64 / ny as f64);
            pos.push(Point::new(x, y, bump * (PI * x).sin() * (PI * y).sin()));
        }
    }
    let id = |i: u32, j: u32| j * (nx + 1) + i;
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    finish(pos, tris)
}

/// `k` triangles sharing the edge from (0,0,0) to (0,0,1): non-manifold
/// for `k > 2`.
pub fn book(k: u32) -> SimplicialComplex {
    let mut pos = vec![Point::new(0., 0., 0.), Point::new(0., 0., 1.)];
    let mut tris = Vec::new();
    for i in 0..k {
        let a = TAU * i as f64 / k as f64;
        pos.push(Point::new(a.cos(), a.sin(), 0.5));
        tris.push(vec![0, 1, 2 + i]);
    }
    finish(pos, tris)
}

/// Two triangle fans touching at a single vertex (a bow tie).
pub fn bowtie() -> SimplicialComplex {
    finish(
        vec![
            Point::new(0., 0., 0.),
            Point::new(1., 0.5, 0.),
            Point::new(1., -0.5, 0.),
            Point::new(-1., 0.5, 0.),
            Point::new(-1., -0.5, 0.),
        ],
        vec![vec![0, 1, 2], vec![0, 3, 4]],
    )
}

/// A helix polyline of `n` vertices.
pub fn helix(n: u32, turns: f64) -> SimplicialComplex {
    let pos = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1).max(1) as f64;
            let a = TAU * turns * t;
            Point::new(0.5 * a.cos(), 0.5 * a.sin(), t)
        })
        .collect();
    let edges = (1..n).map(|i| vec![i - 1, i]).collect();
    finish(pos, edges)
}

pub fn point_cloud(n: u32, seed: u64) -> SimplicialComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = (0..n).map(|_| Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    finish(pos, Vec::new())
}

/// Disjoint union of complexes.
pub fn union(parts: &[SimplicialComplex]) -> SimplicialComplex {
    let mut pos = Vec::new();
    let mut simplices = Vec::new();
    for c in parts {
        let base = pos.len() as u32;
        pos.extend_from_slice(c.positions());
        for s in c.simplex_tuples() {
            simplices.push(s.into_iter().map(|v| v + base).collect());
        }
    }
    finish(pos, simplices)
}

/// Scales by `s` and translates by `d`.
pub fn moved(c: &SimplicialComplex, s: f64, d: Vector) -> SimplicialComplex {
    let pos = c.positions().iter().map(|p| Point::from(p.coords * s + d)).collect();
    finish(pos, c.simplex_tuples())
}

/// Random rotation, uniform scale in [0.6, 1] and small translation.
pub fn transformed(c: &SimplicialComplex, seed: u64) -> SimplicialComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = Vector::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let axis = Unit::try_new(axis, 1e-6).unwrap_or(Vector::z_axis());
    let rot = Rotation3::from_axis_angle(&axis, rng.random_range(0.0..TAU));
    let s = rng.random_range(0.6..1.0);
    let d = Vector::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
    let pos = c.positions().iter().map(|p| Point::from(rot * p.coords * s + d)).collect();
    finish(pos, c.simplex_tuples())
}

/// Mixed-dimension complex: a triangle strip, a wire and loose points.
pub fn mixed(seed: u64) -> SimplicialComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strip_len = rng.random_range(3..9);
    let mut pos = Vec::new();
    let mut simplices = Vec::new();
    for i in 0..strip_len {
        let x = i as f64 * 0.2;
        pos.push(Point::new(x, 0.0, 0.0));
        pos.push(Point::new(x + 0.1, 0.2, rng.random_range(-0.05..0.05)));
    }
    for i in 0..(2 * strip_len - 2) {
        simplices.push(vec![i, i + 1, i + 2]);
    }
    let wire_len = rng.random_range(2..10);
    let base = pos.len() as u32;
    for i in 0..wire_len {
        pos.push(Point::new(i as f64 * 0.15, 0.6, 0.3 * (i as f64).sin()));
        if i > 0 {
            simplices.push(vec![base + i - 1, base + i]);
        }
    }
    for _ in 0..rng.random_range(1..6) {
        pos.push(Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..1.0)));
    }
    finish(pos, simplices)
}

/// Box surface with each face split into an `n` by `n` grid.
pub fn grid_box(size: Vector, n: u32) -> SimplicialComplex {
    let mut pos = Vec::new();
    let mut index: HashMap<[u32; 3], u32> = HashMap::new();
    let mut tris = Vec::new();
    let mut vid = |g: [u32; 3], pos: &mut Vec<Point>| {
        *index.entry(g).or_insert_with(|| {
            pos.push(Point::new(size.x * g[0] as f64 / n as f64, size.y * g[1] as f64 / n as f64, size.z * g[2] as f64 / n as f64));
            (pos.len() - 1) as u32
        })
    };
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, n] {
            for i in 0..n {
                for j in 0..n {
                    let corner = |di: u32, dj: u32| {
                        let mut g = [0; 3];
                        g[axis] = side;
                        g[u] = i + di;
                        g[v] = j + dj;
                        g
                    };
                    let a = vid(corner(0, 0), &mut pos);
                    let b = vid(corner(1, 0), &mut pos);
                    let c = vid(corner(1, 1), &mut pos);
                    let d = vid(corner(0, 1), &mut pos);
                    tris.push(vec![a, b, c]);
                    tris.push(vec![a, c, d]);
                }
            }
        }
    }
    finish(pos, tris)
}

/// A mechanical-part-like assembly: a base plate, posts and a bracket made
/// of gridded boxes, some touching, plus a mounting wire.
pub fn assembly(seed: u64, resolution: u32) -> SimplicialComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = vec![moved(&grid_box(Vector::new(1.6, 1.0, 0.2), resolution), 1.0, Vector::new(-0.8, -0.5, -0.1))];
    for _ in 0..rng.random_range(2..5) {
        let h = rng.random_range(0.3..0.8);
        let post = grid_box(Vector::new(0.2, 0.2, h), (resolution / 2).max(1));
        let d = Vector::new(rng.random_range(-0.7..0.5), rng.random_range(-0.4..0.2), 0.1);
        parts.push(moved(&post, 1.0, d));
    }
    parts.push(helix(12, 1.5));
    union(&parts)
}

/// A deterministic corpus mixing closed surfaces, open surfaces,
/// non-manifold and mixed-dimension complexes.
pub fn corpus(count: usize, seed: u64) -> Vec<(String, SimplicialComplex)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let s = rng.random::<u64>();
        let (name, c) = match i % 10 {
            0 => ("icosphere", icosphere(rng.random_range(1..3))),
            1 => ("torus", torus(0.7, rng.random_range(0.15..0.35), rng.random_range(8..20), rng.random_range(5..10))),
            2 => ("annulus", annulus(0.3, 1.0, rng.random_range(2..5), rng.random_range(10..30))),
            3 => ("patch", patch(rng.random_range(4..12), rng.random_range(4..12), rng.random_range(0.0..0.4))),
            4 => ("book", book(rng.random_range(3..7))),
            5 => ("mixed", mixed(s)),
            6 => ("bowtie+helix", union(&[bowtie(), moved(&helix(rng.random_range(4..20), 2.0), 0.5, Vector::new(0., 0., 1.))])),
            7 => ("cube+points", union(&[cube(), point_cloud(rng.random_range(3..12), s)])),
            8 => ("grid-box", grid_box(Vector::new(1.0, rng.random_range(0.3..1.0), rng.random_range(0.3..1.0)), rng.random_range(2..5))),
            _ => ("assembly", assembly(s, 2)),
        };
        out.push((format!("{i:03}-{name}"), transformed(&c, s)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(icosphere(3).vertex_count(), 642);
        let t = torus(1.0, 0.3, 24, 12);
        assert_eq!((t.vertex_count(), t.triangle_count()), (288, 576));
        assert_eq!(cube().triangle_count(), 12);
        assert_eq!(book(4).edge_count(), 1 + 8);
        let b = grid_box(Vector::new(1., 1., 1.), 3);
        assert_eq!(b.vertex_count(), 6 * 9 + 2);
    }

    #[test]
    fn on_grid_and_valid() {
        for (name, c) in corpus(20, 7) {
            assert!(c.validate().is_valid(), "{name}");
            for p in c.positions() {
                for x in p.iter() {
                    assert_eq!((x / GRID).fract(), 0.0, "{name}");
                }
            }
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = corpus(10, 3);
        let b = corpus(10, 3);
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert_eq!(x.positions(), y.positions());
            assert_eq!(x.simplex_tuples(), y.simplex_tuples());
        }
    }
}
