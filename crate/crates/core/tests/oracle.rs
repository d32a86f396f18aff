//! Independent numeric oracles for the coefficient matrix.

mod common;

use nalgebra::DMatrix;
use quest::bench::{generate_scene, Geometry, SceneConfig};
use quest::coeffs::{build_a, build_triple_matrix, triples};
use quest::linalg::{numerical_rank, singular_values};
use quest::monomial::NUM_MONOMIALS;

use common::{hadamard_bound, numeric_triple_matrix, random_correspondence, random_unit_quaternion};

/// Row span of the triple determinants sampled at many rotations, built without the
/// symbolic path: entry (triple, s) is the 6x6 determinant at the s-th random rotation.
fn sampled_determinants(seed: u64, geometry: Geometry) -> DMatrix<f64> {
    let scene = generate_scene(&SceneConfig::default().with_seed(seed).with_points(7).with_geometry(geometry)).unwrap();
    let pts = &scene.correspondences;
    let mut rng = common::rng(seed + 77);
    let qs: Vec<_> = (0..80).map(|_| random_unit_quaternion(&mut rng)).collect();
    let ts = triples(pts.len());
    let mut d = DMatrix::zeros(ts.len(), qs.len());
    for (r, [i, j, k]) in ts.iter().enumerate() {
        for (s, q) in qs.iter().enumerate() {
            d[(r, s)] = numeric_triple_matrix(*q, [&pts[*i], &pts[*j], &pts[*k]]).determinant();
        }
    }
    d
}

#[test]
fn sampled_rank_matches_coefficient_rank() {
    for (seed, geometry) in [(1, Geometry::General), (2, Geometry::General), (1, Geometry::Coplanar), (5, Geometry::Coplanar)] {
        let sampled = numerical_rank(&singular_values(&sampled_determinants(seed, geometry)), 1e-10);
        let scene = generate_scene(&SceneConfig::default().with_seed(seed).with_points(7).with_geometry(geometry)).unwrap();
        let a = build_a(&scene.correspondences).unwrap();
        let symbolic = numerical_rank(&singular_values(&a.a), 1e-10);
        assert_eq!(sampled, symbolic, "seed {seed} {geometry:?}");
        let expected = if geometry == Geometry::General { NUM_MONOMIALS - 4 } else { 20 };
        assert_eq!(symbolic, expected, "seed {seed} {geometry:?}");
    }
}

#[test]
fn symbolic_determinant_matches_numeric() {
    let mut rng = common::rng(8);
    for _ in 0..100 {
        let c = [(); 3].map(|_| random_correspondence(&mut rng));
        let det = build_triple_matrix(&c[0], &c[1], &c[2]).det().unwrap();
        for _ in 0..5 {
            let q = random_unit_quaternion(&mut rng);
            let m = numeric_triple_matrix(q, [&c[0], &c[1], &c[2]]);
            let diff = (det.eval(&q.to_array()) - m.determinant()).abs();
            assert!(diff <= 1e-10 * hadamard_bound(&m), "diff {diff:e}");
        }
    }
}
