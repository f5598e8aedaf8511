use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ComplexError, SimplicialComplex};
use crate::{Point, Vector};

/// Symmetric mean closest-point distance between two complexes.
///
/// `samples` points are drawn from each complex and each sample's distance to
/// the other complex's geometry (triangles, wire edges and isolated points)
/// is averaged; the result is the mean of both directions. Samples are split
/// between triangles, wires and isolated points in proportion to how many of
/// each the complex has, and drawn area- or length-weighted within a kind.
pub fn chamfer_distance(a: &SimplicialComplex, b: &SimplicialComplex, samples: usize, seed: u64) -> Result<f64, ComplexError> {
    if a.is_empty() || b.is_empty() {
        return Err(ComplexError::Empty);
    }
    let pa = Primitives::new(a);
    let pb = Primitives::new(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sa = pa.sample(samples, &mut rng);
    let sb = pb.sample(samples, &mut rng);
    let ab = sa.iter().map(|p| pb.distance(p)).sum::<f64>() / sa.len() as f64;
    let ba = sb.iter().map(|p| pa.distance(p)).sum::<f64>() / sb.len() as f64;
    Ok(0.5 * (ab + ba))
}

#[derive(Clone, Copy)]
enum Shape {
    Triangle([Point; 3]),
    Segment([Point; 2]),
    Point(Point),
}

struct Primitive {
    shape: Shape,
    lo: Point,
    hi: Point,
}

struct Primitives {
    items: Vec<Primitive>,
    triangles: Vec<usize>,
    segments: Vec<usize>,
    points: Vec<usize>,
}

impl Primitives {
    fn new(c: &SimplicialComplex) -> Self {
        let mut out = Primitives { items: Vec::new(), triangles: Vec::new(), segments: Vec::new(), points: Vec::new() };
        let mut push = |shape: Shape, pts: &[Point]| {
            let (lo, hi) = pts[1..].iter().fold((pts[0], pts[0]), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
            out.items.push(Primitive { shape, lo, hi });
            out.items.len() - 1
        };
        let mut tris = Vec::new();
        for t in c.triangles() {
            let p = t.map(|v| c.position(v));
            tris.push(push(Shape::Triangle(p), &p));
        }
        let mut segs = Vec::new();
        for e in c.wire_edges() {
            let p = c.edge(e).map(|v| c.position(v));
            segs.push(push(Shape::Segment(p), &p));
        }
        let mut pts = Vec::new();
        for v in c.isolated_vertices() {
            let p = c.position(v);
            pts.push(push(Shape::Point(p), &[p]));
        }
        out.triangles = tris;
        out.segments = segs;
        out.points = pts;
        out
    }

    fn measure(&self, i: usize) -> f64 {
        match self.items[i].shape {
            Shape::Triangle([a, b, c]) => 0.5 * (b - a).cross(&(c - a)).norm(),
            Shape::Segment([a, b]) => (b - a).norm(),
            Shape::Point(_) => 1.0,
        }
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let groups = [&self.triangles, &self.segments, &self.points];
        let total: usize = groups.iter().map(|g| g.len()).sum();
        let mut out = Vec::with_capacity(n);
        let mut assigned = 0;
        for (k, g) in groups.iter().enumerate() {
            if g.is_empty() {
                continue;
            }
            let share = if k == groups.len() - 1 || groups[k + 1..].iter().all(|h| h.is_empty()) {
                n.saturating_sub(assigned)
            } else {
                (n * g.len()) / total
            }
            .max(1);
            assigned += share;
            let cdf: Vec<f64> = g
                .iter()
                .scan(0.0, |acc, &i| {
                    *acc += self.measure(i);
                    Some(*acc)
                })
                .collect();
            let sum = *cdf.last().unwrap();
            for _ in 0..share {
                let i = if sum > 0.0 {
                    let r = rng.random::<f64>() * sum;
                    g[cdf.partition_point(|&c| c <= r).min(g.len() - 1)]
                } else {
                    g[rng.random_range(0..g.len())]
                };
                out.push(sample_shape(&self.items[i].shape, rng));
            }
        }
        out
    }

    fn distance(&self, q: &Point) -> f64 {
        let mut best_sq = f64::INFINITY;
        for it in &self.items {
            let d = box_distance_sq(q, &it.lo, &it.hi);
            if d >= best_sq {
                continue;
            }
            let c = match it.shape {
                Shape::Triangle(t) => closest_on_triangle(q, &t),
                Shape::Segment([a, b]) => closest_on_segment(q, &a, &b),
                Shape::Point(p) => p,
            };
            best_sq = best_sq.min((q - c).norm_squared());
        }
        best_sq.sqrt()
    }
}

fn sample_shape(s: &Shape, rng: &mut ChaCha8Rng) -> Point {
    match *s {
        Shape::Triangle([a, b, c]) => {
            let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            a + (b - a) * u + (c - a) * v
        }
        Shape::Segment([a, b]) => a + (b - a) * rng.random::<f64>(),
        Shape::Point(p) => p,
    }
}

fn box_distance_sq(q: &Point, lo: &Point, hi: &Point) -> f64 {
    let d: Vector = (lo - q).sup(&Vector::zeros()).sup(&(q - hi));
    d.norm_squared()
}

pub(crate) fn closest_on_segment(q: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((q - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
pub(crate) fn closest_on_triangle(p: &Point, t: &[Point; 3]) -> Point {
    let [a, b, c] = *t;
    let ab = b - a;
    let ac = c - a;
    if ab.cross(&ac).norm_squared() <= f64::EPSILON * ab.norm_squared() * ac.norm_squared() {
        // degenerate: nearest of the three sides
        return [(a, b), (b, c), (a, c)]
            .iter()
            .map(|(u, v)| closest_on_segment(p, u, v))
            .min_by(|x, y| (p - x).norm_squared().total_cmp(&(p - y).norm_squared()))
            .unwrap();
    }
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}
