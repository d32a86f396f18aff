//! Linear 8-point essential-matrix estimator, used as the comparison baseline.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Quaternion};
use crate::linalg::{null_vector, numerical_rank, singular_values};
use crate::solver::{PoseCandidate, ScaleNote};

/// Relative singular-value cutoff for the 9-column design matrix.
const DESIGN_RANK_TOL: f64 = 1e-10;

/// Essential matrix with singular values `(s, s, 0)` and unit Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrix {
    e: Matrix3<f64>,
}

impl EssentialMatrix {
    /// Projects an arbitrary 3x3 matrix onto the essential manifold.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let svd = m.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::Numerical("SVD of essential matrix failed".into())),
        };
        let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
        sv.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mean = 0.5 * (sv[0].1 + sv[1].1);
        if mean <= 0.0 {
            return Err(Error::DegenerateConfiguration("essential matrix is zero".into()));
        }
        let mut d = Matrix3::zeros();
        d[(sv[0].0, sv[0].0)] = mean;
        d[(sv[1].0, sv[1].0)] = mean;
        let e = u * d * v_t;
        Ok(EssentialMatrix { e: e / e.norm() })
    }

    /// `[t]x R`, normalized.
    pub fn from_pose(q: Quaternion, t: &Vector3<f64>) -> Result<Self> {
        let r = q.to_rotation()?;
        Self::from_matrix(&(t.cross_matrix() * r))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.e
    }

    /// `n^T E m`.
    pub fn epipolar_residual(&self, c: &Correspondence) -> f64 {
        c.n.dot(&(self.e * c.m))
    }
}

/// Similarity taking the points to zero centroid and RMS radius sqrt(2).
fn hartley_transform(pts: impl Iterator<Item = Vector2<f64>> + Clone) -> Result<Matrix3<f64>> {
    let n = pts.clone().count() as f64;
    let centroid = pts.clone().fold(Vector2::zeros(), |acc, p| acc + p) / n;
    let rms = (pts.map(|p| (p - centroid).norm_squared()).sum::<f64>() / n).sqrt();
    if rms.is_nan() || rms <= 0.0 {
        return Err(Error::DegenerateConfiguration("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / rms;
    Ok(Matrix3::new(
        s,
        0.0,
        -s * centroid.x,
        0.0,
        s,
        -s * centroid.y,
        0.0,
        0.0,
        1.0,
    ))
}

/// Hartley-normalized linear estimate of `E` from eight or more correspondences.
pub fn eight_point(points: &[Correspondence]) -> Result<EssentialMatrix> {
    if points.len() < 8 {
        return Err(Error::InsufficientPoints {
            needed: 8,
            got: points.len(),
        });
    }
    let t1 = hartley_transform(points.iter().map(|c| c.m.xy() / c.m.z))?;
    let t2 = hartley_transform(points.iter().map(|c| c.n.xy() / c.n.z))?;
    let mut a = DMatrix::zeros(points.len(), 9);
    for (row, c) in points.iter().enumerate() {
        let m = t1 * (c.m / c.m.z);
        let n = t2 * (c.n / c.n.z);
        for i in 0..3 {
            for j in 0..3 {
                a[(row, 3 * i + j)] = n[i] * m[j];
            }
        }
    }
    let sv = singular_values(&a);
    let rank = numerical_rank(&sv, DESIGN_RANK_TOL);
    if rank < 8 {
        return Err(Error::DegenerateConfiguration(format!(
            "epipolar design matrix has rank {rank} < 8 (coplanar or repeated points?)"
        )));
    }
    let f = null_vector(&a)?.vector;
    let e_hat = Matrix3::from_row_slice(f.as_slice());
    EssentialMatrix::from_matrix(&(t2.transpose() * e_hat * t1))
}

/// Least-squares depths `(u, v)` with `u R m + t ~ v n`, or `None` for parallel rays.
pub fn triangulate(r: &Matrix3<f64>, t: &Vector3<f64>, c: &Correspondence) -> Option<(f64, f64)> {
    let rm = r * c.m;
    let n = c.n;
    let g = Matrix2::new(rm.dot(&rm), -rm.dot(&n), -rm.dot(&n), n.dot(&n));
    let b = Vector2::new(-rm.dot(t), n.dot(t));
    let uv = g.try_inverse()? * b;
    Some((uv[0], uv[1]))
}

/// RMS of `n^T [t]x R m` over the points.
pub fn epipolar_rms(q: Quaternion, t: &Vector3<f64>, points: &[Correspondence]) -> f64 {
    let Ok(e) = EssentialMatrix::from_pose(q, t) else {
        return f64::INFINITY;
    };
    if points.is_empty() {
        return 0.0;
    }
    let ss: f64 = points.iter().map(|c| e.epipolar_residual(c).powi(2)).sum();
    (ss / points.len() as f64).sqrt()
}

/// Picks among the four `(R, t)` factorizations of `E` by depth-sign voting.
pub fn decompose_essential(e: &EssentialMatrix, points: &[Correspondence]) -> Result<PoseCandidate> {
    if points.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let svd = e.matrix().svd(true, true);
    let (mut u, mut v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD of essential matrix failed".into())),
    };
    // order so the null direction is the third column
    let sv = svd.singular_values;
    let null = (0..3).min_by(|&a, &b| sv[a].total_cmp(&sv[b])).unwrap_or(2);
    if null != 2 {
        u.swap_columns(null, 2);
        v_t.swap_rows(null, 2);
    }
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    if v_t.determinant() < 0.0 {
        v_t.row_mut(2).neg_mut();
    }
    let w = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let t_dir: Vector3<f64> = u.column(2).into();
    let hypotheses = [
        (u * w * v_t, t_dir),
        (u * w * v_t, -t_dir),
        (u * w.transpose() * v_t, t_dir),
        (u * w.transpose() * v_t, -t_dir),
    ];

    // (points in front, R, t, depths)
    type Hypothesis = (usize, Matrix3<f64>, Vector3<f64>, Vec<(f64, f64)>);
    let mut best: Option<Hypothesis> = None;
    for (r, t) in hypotheses {
        let depths: Vec<(f64, f64)> = points
            .iter()
            .map(|c| triangulate(&r, &t, c).unwrap_or((f64::NAN, f64::NAN)))
            .collect();
        let positive = depths.iter().filter(|(a, b)| *a > 0.0 && *b > 0.0).count();
        if best.as_ref().is_none_or(|b| positive > b.0) {
            best = Some((positive, r, t, depths));
        }
    }
    let (positive, r, t, depths) = best.ok_or(Error::ChiralityFailure)?;
    if 2 * positive <= points.len() {
        return Err(Error::ChiralityFailure);
    }
    let q = Quaternion::from_rotation(&r).unit_canonical()?;
    let depths_u: Vec<f64> = depths.iter().map(|d| d.0).collect();
    let depths_v: Vec<f64> = depths.iter().map(|d| d.1).collect();
    let mean_depth =
        depths_u.iter().chain(&depths_v).map(|d| d.abs()).sum::<f64>() / (2 * points.len()) as f64;
    Ok(PoseCandidate {
        q,
        t,
        algebraic_residual: epipolar_rms(q, &t, points),
        chirality_ok: positive == points.len(),
        scale_note: ScaleNote::EssentialUnitTranslation,
        translation_depth_ratio: 1.0 / mean_depth,
        depth_ambiguous: false,
        depths_u,
        depths_v,
    })
}

/// `eight_point` followed by `decompose_essential`.
pub fn estimate(points: &[Correspondence]) -> Result<PoseCandidate> {
    decompose_essential(&eight_point(points)?, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{add_pixel_noise, generate_scene, Geometry, SceneConfig, SyntheticCamera};
    use crate::geometry::{rot_error, trans_error};

    #[test]
    fn noiseless_epipolar_residual() {
        for seed in 0..5 {
            let s = generate_scene(&SceneConfig::default().with_seed(seed).with_points(12)).unwrap();
            let e = eight_point(&s.correspondences).unwrap();
            for c in &s.correspondences {
                assert!(e.epipolar_residual(c).abs() < 1e-10);
            }
            let sv = e.matrix().singular_values();
            let mut sv: Vec<f64> = sv.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            assert!((sv[0] - sv[1]).abs() < 1e-12);
            assert!(sv[2] < 1e-12);
            assert!((e.matrix().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_translation_gives_skew_pattern() {
        let cfg = SceneConfig {
            fixed_rotation: Some([1.0, 0.0, 0.0, 0.0]),
            fixed_translation: Some([0.0, 0.0, 1.0]),
            ..SceneConfig::default().with_seed(3).with_points(10)
        };
        let s = generate_scene(&cfg).unwrap();
        let e = eight_point(&s.correspondences).unwrap();
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
            / std::f64::consts::SQRT_2;
        let m = e.matrix();
        let diff = (m - expected).abs().max().min((m + expected).abs().max());
        assert!(diff < 1e-9, "{m}");
    }

    #[test]
    fn decomposition_recovers_pose() {
        for seed in 0..10 {
            let s = generate_scene(&SceneConfig::default().with_seed(seed).with_points(8)).unwrap();
            let c = estimate(&s.correspondences).unwrap();
            assert!(rot_error(c.q, s.q) < 1e-6, "seed {seed}");
            assert!(trans_error(&c.t, &s.t).unwrap() < 1e-6);
            assert!((c.t.norm() - 1.0).abs() < 1e-12);
            assert!(c.chirality_ok);
            let r = c.q.to_rotation().unwrap();
            assert!((r.determinant() - 1.0).abs() < 1e-9);
            assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-9);
        }
    }

    #[test]
    fn sideways_translation_without_rotation() {
        let cfg = SceneConfig {
            fixed_rotation: Some([1.0, 0.0, 0.0, 0.0]),
            fixed_translation: Some([1.0, 0.0, 0.0]),
            ..SceneConfig::default().with_seed(8).with_points(9)
        };
        let s = generate_scene(&cfg).unwrap();
        let c = estimate(&s.correspondences).unwrap();
        assert!(rot_error(c.q, Quaternion::identity()) < 1e-6);
    }

    #[test]
    fn noiseless_coplanar_is_rank_deficient() {
        let s = generate_scene(
            &SceneConfig::default()
                .with_seed(2)
                .with_points(10)
                .with_geometry(Geometry::Coplanar),
        )
        .unwrap();
        assert!(matches!(
            eight_point(&s.correspondences),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn noisy_estimate_is_unit_translation() {
        let s = generate_scene(&SceneConfig::default().with_seed(4).with_points(20)).unwrap();
        let noisy = add_pixel_noise(&s.correspondences, 1.0, &SyntheticCamera::default(), 3);
        let c = estimate(&noisy).unwrap();
        assert!((c.t.norm() - 1.0).abs() < 1e-12);
        assert!(rot_error(c.q, s.q) < 0.01);
    }

    #[test]
    fn too_few_points() {
        let s = generate_scene(&SceneConfig::default().with_points(7)).unwrap();
        assert!(matches!(
            eight_point(&s.correspondences),
            Err(Error::InsufficientPoints { needed: 8, got: 7 })
        ));
    }
}
