use nalgebra::{Matrix3, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::estimate::estimate_pose;
use super::translation::recover_translation_depths;
use super::{Method, PoseCandidate};
use crate::baseline::{epipolar_rms, triangulate};
use crate::coeffs::build_a;
use crate::error::{Error, Result};
use crate::geometry::{angle_between, Correspondence, Quaternion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    /// Inlier threshold in radians.
    pub threshold: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            threshold: 0.005,
            max_iters: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub candidate: PoseCandidate,
    pub inliers: Vec<bool>,
}

impl RansacResult {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|b| **b).count()
    }
}

/// Angle between `n` and the reprojection `u R m + t`, with `(u, v)` the least-squares
/// depths of the correspondence. Infinite when either depth is non-positive or the two
/// rays are parallel.
pub fn angular_residual(r: &Matrix3<f64>, t: &Vector3<f64>, c: &Correspondence) -> f64 {
    let Some((u, v)) = triangulate(r, t, c) else {
        return f64::INFINITY;
    };
    if !(u > 0.0 && v > 0.0) {
        return f64::INFINITY;
    }
    angle_between(&(r * c.m * u + t), &c.n)
}

fn iteration_seed(seed: u64, iter: u64) -> u64 {
    let mut z = seed ^ iter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Hypothesis {
    iter: usize,
    q: Quaternion,
    t: Vector3<f64>,
    inliers: Vec<bool>,
    count: usize,
    mean_error: f64,
}

impl Hypothesis {
    /// More inliers wins, then lower mean error, then the earlier iteration.
    fn better_than(&self, other: &Hypothesis) -> bool {
        if self.count != other.count {
            return self.count > other.count;
        }
        if self.mean_error != other.mean_error {
            return self.mean_error < other.mean_error;
        }
        self.iter < other.iter
    }
}

fn evaluate(iter: usize, q: Quaternion, t: Vector3<f64>, points: &[Correspondence], threshold: f64) -> Hypothesis {
    let r = q.rotation_unchecked();
    let errs: Vec<f64> = points.iter().map(|c| angular_residual(&r, &t, c)).collect();
    let inliers: Vec<bool> = errs.iter().map(|e| *e < threshold).collect();
    let count = inliers.iter().filter(|b| **b).count();
    let mean_error = if count > 0 {
        errs.iter().zip(&inliers).filter(|(_, b)| **b).map(|(e, _)| e).sum::<f64>() / count as f64
    } else {
        f64::INFINITY
    };
    Hypothesis {
        iter,
        q,
        t,
        inliers,
        count,
        mean_error,
    }
}

fn run_iteration(
    iter: usize,
    points: &[Correspondence],
    method: Method,
    params: &RansacParams,
) -> Option<Hypothesis> {
    let k = method.minimal_points();
    let mut rng = ChaCha8Rng::seed_from_u64(iteration_seed(params.seed, iter as u64));
    let mut idx = sample(&mut rng, points.len(), k).into_vec();
    idx.sort_unstable();
    let subset: Vec<Correspondence> = idx.iter().map(|&i| points[i]).collect();
    let cands = estimate_pose(&subset, method).ok()?;
    cands
        .into_iter()
        .map(|c| evaluate(iter, c.q, c.t, points, params.threshold))
        .reduce(|a, b| if b.better_than(&a) { b } else { a })
}

/// Hypothesize-and-verify over random minimal subsets; the winning rotation is kept and
/// translation plus depths are refit on its inliers.
///
/// Iterations run in parallel, each with its own generator derived from `seed` and the
/// iteration index, so the result does not depend on thread scheduling.
pub fn ransac_pose(
    points: &[Correspondence],
    method: Method,
    params: &RansacParams,
) -> Result<RansacResult> {
    let k = method.minimal_points();
    if points.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k,
            got: points.len(),
        });
    }
    if params.threshold.is_nan() || params.threshold <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "RANSAC threshold must be positive, got {}",
            params.threshold
        )));
    }
    if params.max_iters == 0 {
        return Err(Error::InvalidArgument("RANSAC needs at least one iteration".into()));
    }
    let best = (0..params.max_iters)
        .into_par_iter()
        .filter_map(|i| run_iteration(i, points, method, params))
        .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
        .filter(|h| h.count >= k)
        .ok_or(Error::RobustFailure { needed: k })?;

    let inlier_points: Vec<Correspondence> = points
        .iter()
        .zip(&best.inliers)
        .filter(|(_, b)| **b)
        .map(|(c, _)| *c)
        .collect();
    let td = recover_translation_depths(best.q, &inlier_points)?;
    let residual = if method == Method::EightPoint {
        epipolar_rms(best.q, &best.t, &inlier_points)
    } else {
        build_a(&inlier_points)?.residual(&best.q)
    };
    Ok(RansacResult {
        candidate: PoseCandidate::from_parts(best.q, residual, td),
        inliers: best.inliers,
    })
}
