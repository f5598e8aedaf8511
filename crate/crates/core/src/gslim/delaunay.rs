//! Incremental Bowyer-Watson 3D Delaunay tetrahedralization, used only to
//! propose virtual collapse pairs.
//!
//! Points are inserted in Morton order into a large enclosing tetrahedron.
//! Each insertion walks to the containing tetrahedron, grows the cavity of
//! tetrahedra whose circumsphere strictly contains the point, and re-fans the
//! cavity boundary. Orientation and in-sphere tests are exact.
//!
//! Cospherical and duplicate inputs are broken by a deterministic per-index
//! jitter that only the predicates see.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust::Coord3D;

use crate::Point;

const NONE: u32 = u32::MAX;
const JITTER: f64 = 1e-9;
const SUPER_SCALE: f64 = 1e4;

#[derive(Clone)]
struct Tet {
    v: [u32; 4],
    /// `nbr[i]` shares the face opposite `v[i]`.
    nbr: [u32; 4],
    alive: bool,
}

struct Mesh {
    pts: Vec<[f64; 3]>,
    tets: Vec<Tet>,
    last: u32,
    rng: ChaCha8Rng,
}

fn c3(p: &[f64; 3]) -> Coord3D<f64> {
    Coord3D { x: p[0], y: p[1], z: p[2] }
}

impl Mesh {
    /// Sign convention of `robust::orient3d`: positive for our tetrahedra.
    fn orient(&self, a: u32, b: u32, c: u32, d: u32) -> f64 {
        let p = |i: u32| c3(&self.pts[i as usize]);
        robust::orient3d(p(a), p(b), p(c), p(d))
    }

    fn in_sphere(&self, t: &Tet, q: u32) -> f64 {
        let p = |i: u32| c3(&self.pts[i as usize]);
        robust::insphere(p(t.v[0]), p(t.v[1]), p(t.v[2]), p(t.v[3]), p(q))
    }

    fn locate(&mut self, q: u32) -> u32 {
        let mut cur = self.last;
        'walk: loop {
            let t = self.tets[cur as usize].clone();
            let start = self.rng.random_range(0..4);
            for k in 0..4 {
                let i = (start + k) % 4;
                let mut v = t.v;
                v[i] = q;
                if self.orient(v[0], v[1], v[2], v[3]) < 0.0 && t.nbr[i] != NONE {
                    cur = t.nbr[i];
                    continue 'walk;
                }
            }
            return cur;
        }
    }

    fn insert(&mut self, q: u32) {
        let start = self.locate(q);
        let mut in_cavity = HashMap::new();
        in_cavity.insert(start, ());
        let mut stack = vec![start];
        let mut cavity = Vec::new();
        while let Some(t) = stack.pop() {
            cavity.push(t);
            for &n in &self.tets[t as usize].nbr {
                if n == NONE || in_cavity.contains_key(&n) {
                    continue;
                }
                if self.in_sphere(&self.tets[n as usize], q) > 0.0 {
                    in_cavity.insert(n, ());
                    stack.push(n);
                }
            }
        }
        cavity.sort_unstable();

        // faces through q, keyed by their two other vertices
        let mut open: HashMap<[u32; 3], (u32, usize)> = HashMap::new();
        let mut created = Vec::new();
        for &t in &cavity {
            let tet = self.tets[t as usize].clone();
            for i in 0..4 {
                let n = tet.nbr[i];
                if n != NONE && in_cavity.contains_key(&n) {
                    continue;
                }
                let mut v = tet.v;
                v[i] = q;
                let id = self.tets.len() as u32;
                let mut nbr = [NONE; 4];
                nbr[i] = n;
                self.tets.push(Tet { v, nbr, alive: true });
                if n != NONE {
                    let back = &mut self.tets[n as usize];
                    for slot in back.nbr.iter_mut() {
                        if *slot == t {
                            *slot = id;
                        }
                    }
                }
                for j in 0..4 {
                    if j == i {
                        continue;
                    }
                    let mut key = [0u32; 3];
                    let mut k = 0;
                    for (m, &x) in v.iter().enumerate() {
                        if m != j {
                            key[k] = x;
                            k += 1;
                        }
                    }
                    key.sort_unstable();
                    if let Some((other, oj)) = open.remove(&key) {
                        self.tets[id as usize].nbr[j] = other;
                        self.tets[other as usize].nbr[oj] = id;
                    } else {
                        open.insert(key, (id, j));
                    }
                }
                created.push(id);
            }
        }
        debug_assert!(open.is_empty(), "cavity boundary is not closed");
        for &t in &cavity {
            self.tets[t as usize].alive = false;
        }
        self.last = *created.last().expect("cavity has a boundary");
    }
}

fn morton_key(p: &[f64; 3], lo: &[f64; 3], inv: f64) -> u64 {
    let spread = |x: u64| {
        let mut x = x & 0x1f_ffff;
        x = (x | (x << 32)) & 0x1f00000000ffff;
        x = (x | (x << 16)) & 0x1f0000ff0000ff;
        x = (x | (x << 8)) & 0x100f00f00f00f00f;
        x = (x | (x << 4)) & 0x10c30c30c30c30c3;
        (x | (x << 2)) & 0x1249249249249249
    };
    let q = |k: usize| (((p[k] - lo[k]) * inv).clamp(0.0, 1.0) * 2_097_151.0) as u64;
    spread(q(0)) | (spread(q(1)) << 1) | (spread(q(2)) << 2)
}

/// All edges of the Delaunay tetrahedralization of `positions`, as sorted
/// index pairs.
///
/// Fewer than two points give no edges. If every point coincides the result
/// is the star from point 0 to every other point.
pub fn delaunay_edges(positions: &[Point]) -> BTreeSet<(u32, u32)> {
    let n = positions.len();
    let mut out = BTreeSet::new();
    if n < 2 {
        return out;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    for p in positions {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt();
    if diag == 0.0 {
        return (1..n as u32).map(|i| (0, i)).collect();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_de1a);
    let mut pts: Vec<[f64; 3]> = positions
        .iter()
        .map(|p| {
            let j = |r: &mut ChaCha8Rng| (r.random::<f64>() - 0.5) * JITTER * diag;
            [p.x + j(&mut rng), p.y + j(&mut rng), p.z + j(&mut rng)]
        })
        .collect();

    let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])];
    let r = SUPER_SCALE * diag;
    let base = n as u32;
    for d in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
        pts.push([centre[0] + r * d[0], centre[1] + r * d[1], centre[2] + r * d[2]]);
    }
    let mut mesh = Mesh { pts, tets: Vec::new(), last: 0, rng: ChaCha8Rng::seed_from_u64(0x7a1c) };
    let mut sv = [base, base + 1, base + 2, base + 3];
    if mesh.orient(sv[0], sv[1], sv[2], sv[3]) < 0.0 {
        sv.swap(0, 1);
    }
    mesh.tets.push(Tet { v: sv, nbr: [NONE; 4], alive: true });

    let inv = 1.0 / (hi[0] - lo[0]).max(hi[1] - lo[1]).max(hi[2] - lo[2]);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&i| (morton_key(&mesh.pts[i as usize], &lo, inv), i));
    for q in order {
        mesh.insert(q);
    }

    for t in mesh.tets.iter().filter(|t| t.alive) {
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b) = (t.v[i], t.v[j]);
                if a < base && b < base {
                    out.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    out
}

/// The `k` nearest neighbours of every point (ties by index), as sorted pairs.
pub fn knn_edges(positions: &[Point], k: usize) -> BTreeSet<(u32, u32)> {
    let mut out = BTreeSet::new();
    let mut dist: Vec<(f64, u32)> = Vec::with_capacity(positions.len());
    for (i, p) in positions.iter().enumerate() {
        dist.clear();
        dist.extend(positions.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, q)| ((q - p).norm_squared(), j as u32)));
        let k = k.min(dist.len());
        if k == 0 {
            continue;
        }
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &dist[..k] {
            let i = i as u32;
            out.insert((i.min(j), i.max(j)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn small_inputs() {
        assert!(delaunay_edges(&[]).is_empty());
        assert!(delaunay_edges(&[p(1., 2., 3.)]).is_empty());
        assert_eq!(delaunay_edges(&[p(0., 0., 0.), p(1., 0., 0.)]), BTreeSet::from([(0, 1)]));
        let four = [p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(0., 0., 1.)];
        assert_eq!(delaunay_edges(&four).len(), 6);
    }

    #[test]
    fn coincident_points_form_a_star() {
        let pts = vec![p(1., 1., 1.); 4];
        assert_eq!(delaunay_edges(&pts), BTreeSet::from([(0, 1), (0, 2), (0, 3)]));
    }

    #[test]
    fn duplicates_are_connected() {
        let pts = [p(0., 0., 0.), p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(0., 0., 1.)];
        let e = delaunay_edges(&pts);
        assert!(e.contains(&(0, 1)));
    }

    #[test]
    fn knn_small() {
        let pts = [p(0., 0., 0.), p(1., 0., 0.), p(3., 0., 0.)];
        assert_eq!(knn_edges(&pts, 1), BTreeSet::from([(0, 1), (1, 2)]));
    }
}
