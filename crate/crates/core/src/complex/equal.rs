use std::collections::HashSet;

use super::{sorted2, sorted3, SimplicialComplex};

/// True iff some vertex bijection matches positions within `tol` per
/// coordinate and maps the simplex sets of `a` onto those of `b`.
///
/// Vertices are canonicalized by lexicographic position; each vertex of `a`
/// gets the candidates of `b` inside its tolerance box with the same edge and
/// triangle degree. Unambiguous vertices are matched directly, ambiguous
/// groups by backtracking with edge-consistency pruning.
pub fn complex_equal(a: &SimplicialComplex, b: &SimplicialComplex, tol: f64) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() || a.triangle_count() != b.triangle_count() {
        return false;
    }
    let n = a.vertex_count();
    let degree = |c: &SimplicialComplex, v: u32| (c.incident_edges(v).len(), c.incident_triangles(v).len());

    let mut b_order: Vec<u32> = (0..n as u32).collect();
    b_order.sort_by(|&i, &j| {
        let (p, q) = (b.position(i), b.position(j));
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z)).then(degree(b, i).cmp(&degree(b, j)))
    });
    let xs: Vec<f64> = b_order.iter().map(|&i| b.position(i).x).collect();

    let mut candidates: Vec<Vec<u32>> = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let p = a.position(v);
        let lo = xs.partition_point(|&x| x < p.x - tol);
        let hi = xs.partition_point(|&x| x <= p.x + tol);
        let da = degree(a, v);
        let c: Vec<u32> = b_order[lo..hi]
            .iter()
            .copied()
            .filter(|&w| {
                let q = b.position(w);
                (q - p).abs().max() <= tol && degree(b, w) == da
            })
            .collect();
        if c.is_empty() {
            return false;
        }
        candidates.push(c);
    }

    let mut map = vec![u32::MAX; n];
    let mut used = vec![false; n];
    let mut pending = Vec::new();
    for v in 0..n {
        if let [w] = candidates[v][..] {
            if used[w as usize] {
                return false;
            }
            used[w as usize] = true;
            map[v] = w;
        } else {
            pending.push(v as u32);
        }
    }
    pending.sort_by_key(|&v| candidates[v as usize].len());
    assign(a, b, &candidates, &pending, 0, &mut map, &mut used)
}

fn consistent(a: &SimplicialComplex, b: &SimplicialComplex, map: &[u32], v: u32, w: u32) -> bool {
    a.incident_edges(v).iter().all(|&e| {
        let [x, y] = a.edge(e);
        let other = if x == v { y } else { x };
        let m = map[other as usize];
        m == u32::MAX || b.has_edge(w, m)
    })
}

fn assign(
    a: &SimplicialComplex,
    b: &SimplicialComplex,
    candidates: &[Vec<u32>],
    pending: &[u32],
    k: usize,
    map: &mut [u32],
    used: &mut [bool],
) -> bool {
    let Some(&v) = pending.get(k) else {
        return simplices_match(a, b, map);
    };
    for &w in &candidates[v as usize] {
        if used[w as usize] || !consistent(a, b, map, v, w) {
            continue;
        }
        map[v as usize] = w;
        used[w as usize] = true;
        if assign(a, b, candidates, pending, k + 1, map, used) {
            return true;
        }
        map[v as usize] = u32::MAX;
        used[w as usize] = false;
    }
    false
}

fn simplices_match(a: &SimplicialComplex, b: &SimplicialComplex, map: &[u32]) -> bool {
    let be: HashSet<[u32; 2]> = b.edges().iter().copied().collect();
    let bt: HashSet<[u32; 3]> = b.triangles().iter().copied().collect();
    a.edges().iter().all(|&[x, y]| be.contains(&sorted2(map[x as usize], map[y as usize])))
        && a.triangles().iter().all(|&[x, y, z]| bt.contains(&sorted3(map[x as usize], map[y as usize], map[z as usize])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    fn cube() -> SimplicialComplex {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Point::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        let quads = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]];
        let tris: Vec<[u32; 3]> = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
        SimplicialComplex::build(pts, tris).unwrap()
    }

    fn permuted(c: &SimplicialComplex, perm: &[u32]) -> SimplicialComplex {
        // perm[old] = new
        let mut pts = vec![Point::origin(); c.vertex_count()];
        for (old, &new) in perm.iter().enumerate() {
            pts[new as usize] = c.position(old as u32);
        }
        let tris: Vec<Vec<u32>> = c.simplex_tuples().into_iter().map(|s| s.iter().map(|&v| perm[v as usize]).collect()).collect();
        SimplicialComplex::build(pts, tris).unwrap()
    }

    #[test]
    fn reflexive() {
        let c = cube();
        assert!(complex_equal(&c, &c, 0.0));
    }

    #[test]
    fn relabeling_invariant() {
        let c = cube();
        let d = permuted(&c, &[5, 2, 7, 0, 1, 6, 3, 4]);
        assert!(complex_equal(&c, &d, 0.0));
        assert!(complex_equal(&d, &c, 0.0));
    }

    #[test]
    fn moved_vertex_is_detected() {
        let tol = 1e-6;
        let c = cube();
        let mut pts = c.positions().to_vec();
        pts[3].x += 10.0 * tol;
        let d = SimplicialComplex::build(pts, c.triangles().iter().map(|t| t.to_vec())).unwrap();
        assert!(!complex_equal(&c, &d, tol));
        assert!(complex_equal(&c, &d, 20.0 * tol));
    }

    #[test]
    fn coincident_vertices_need_backtracking() {
        // two wires sharing both endpoint positions but wired differently
        let pts = vec![Point::new(0., 0., 0.), Point::new(0., 0., 0.), Point::new(1., 0., 0.), Point::new(1., 0., 0.)];
        let a = SimplicialComplex::build(pts.clone(), [[0u32, 2], [1, 3]]).unwrap();
        let b = SimplicialComplex::build(pts.clone(), [[0u32, 3], [1, 2]]).unwrap();
        assert!(complex_equal(&a, &b, 0.0));
        let c = SimplicialComplex::build(pts, [[0u32, 2], [0, 3]]).unwrap();
        assert!(!complex_equal(&a, &c, 0.0));
    }

    #[test]
    fn topology_difference_is_detected() {
        let c = cube();
        let mut tris: Vec<Vec<u32>> = c.triangles().iter().map(|t| t.to_vec()).collect();
        tris.pop();
        tris.push(vec![1, 5]);
        let d = SimplicialComplex::build(c.positions().to_vec(), tris).unwrap();
        assert!(!complex_equal(&c, &d, 0.0));
    }
}
