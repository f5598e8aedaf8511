use std::collections::BTreeSet;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psc_core::gslim::delaunay_virtual_edges;
use psc_core::psc::{read_psc, write_psc, OffsetPrecision};
use psc_core::shapes;
use psc_core::{chamfer_distance, reverse_log, simplify, PenaltyConfig, Point, Stop, Vector, VirtualEdges};

/// Circumcentre and squared radius of a tetrahedron, or `None` if flat.
fn circumsphere(p: [Point; 4]) -> Option<(Point, f64)> {
    let rows: Vec<Vector3<f64>> = (1..4).map(|i| p[i] - p[0]).collect();
    let m = Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()]);
    let rhs = Vector3::new(rows[0].norm_squared(), rows[1].norm_squared(), rows[2].norm_squared()) * 0.5;
    let x = m.lu().solve(&rhs)?;
    Some((p[0] + x, x.norm_squared()))
}

/// Edges of every tetrahedron whose circumsphere contains no other point.
fn brute_force_delaunay(pts: &[Point]) -> BTreeSet<(u32, u32)> {
    let n = pts.len();
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let Some((centre, r2)) = circumsphere([pts[a], pts[b], pts[c], pts[d]]) else {
                        continue;
                    };
                    let empty =
                        (0..n).filter(|&q| ![a, b, c, d].contains(&q)).all(|q| (pts[q] - centre).norm_squared() > r2 * (1.0 + 1e-9));
                    if empty {
                        for (i, j) in [(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)] {
                            edges.insert((i as u32, j as u32));
                        }
                    }
                }
            }
        }
    }
    edges
}

#[test]
fn delaunay_edges_match_empty_sphere_oracle() {
    for seed in 0..40 {
        let n = 5 + seed as u32 % 10;
        let cloud = shapes::point_cloud(n, seed);
        let got = delaunay_virtual_edges(&cloud);
        let want = brute_force_delaunay(cloud.positions());
        assert_eq!(got, want, "seed {seed}");
    }
}

#[test]
fn cube_corners_keep_cube_edges_and_cut_each_face() {
    // eight cospherical points: any triangulation is Delaunay, so only the
    // cube edges are forced
    let cube = shapes::cube();
    let pts = psc_core::SimplicialComplex::build(cube.positions().to_vec(), Vec::<Vec<u32>>::new()).unwrap();
    let got = delaunay_virtual_edges(&pts);
    for e in cube.edges() {
        let [a, b] = *e;
        if (cube.position(a) - cube.position(b)).norm() < 1.0 + 1e-9 {
            assert!(got.contains(&(a, b)), "cube edge {a}-{b} missing");
        }
    }
    // each face is cut by a diagonal; the jittered predicates may also keep a
    // flat sliver on a face, which adds the other one
    for axis in 0..3 {
        for side in [0.0, 1.0] {
            let on: Vec<u32> = (0..8).filter(|&v| cube.position(v)[axis] == side).collect();
            let diagonals = on
                .iter()
                .flat_map(|&a| on.iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| a < b && (cube.position(a) - cube.position(b)).norm() > 1.1)
                .filter(|e| got.contains(e))
                .count();
            assert!((1..=2).contains(&diagonals), "face {axis}={side}");
        }
    }
}

#[test]
fn chamfer_of_a_lifted_plane_is_the_lift() {
    let flat = shapes::patch(6, 5, 0.0);
    let (lo, hi) = flat.bounds().unwrap();
    assert_eq!(lo.z, hi.z);
    for d in [0.0, 0.125, 0.5, 2.0] {
        let lifted = shapes::moved(&flat, 1.0, Vector::new(0.0, 0.0, d));
        let got = chamfer_distance(&flat, &lifted, 2000, 3).unwrap();
        assert!((got - d).abs() <= 1e-12, "lift {d}: chamfer {got}");
    }
}

#[test]
fn chamfer_between_points_is_the_mean_nearest_distance() {
    let a = psc_core::SimplicialComplex::build(vec![Point::new(0., 0., 0.)], Vec::<Vec<u32>>::new()).unwrap();
    let b = psc_core::SimplicialComplex::build(vec![Point::new(3., 4., 0.), Point::new(0., 0., 1.)], Vec::<Vec<u32>>::new()).unwrap();
    // a to b: 1; b to a: samples split between 5 and 1
    let got = chamfer_distance(&a, &b, 1000, 1).unwrap();
    assert!(got > 1.0 && got < 3.0, "{got}");
}

#[test]
fn flipped_psc_files_never_panic() {
    let (_, c) = shapes::corpus(3, 4).swap_remove(1);
    let (_, log) = simplify(&c, &PenaltyConfig::default(), VirtualEdges::Delaunay, Stop::Full).unwrap();
    let psc = reverse_log(&log, OffsetPrecision::F64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for quantized in [false, true] {
        let good = write_psc(&psc, quantized);
        let (mut rejected, mut replay_failed) = (0, 0);
        for _ in 0..5000 {
            let mut bytes = good.clone();
            let i = rng.random_range(0..bytes.len());
            bytes[i] ^= 1 << rng.random_range(0..8);
            match read_psc(&bytes) {
                Err(e) => {
                    assert!(e.offset <= bytes.len());
                    rejected += 1;
                }
                Ok(p) => {
                    if let Err(e) = p.reconstruct_all() {
                        assert!(e.step().unwrap() < p.splits.len());
                        replay_failed += 1;
                    }
                }
            }
        }
        assert!(rejected + replay_failed > 0);
    }
}
