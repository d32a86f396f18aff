use nalgebra::Vector3;

use super::rotation::{
    quest6_rotations, quest7_rotations, seven_point_rank, six_point_rank, RankReport,
};
use super::translation::recover_translation_depths;
use super::{Method, PoseCandidate};
use crate::baseline;
use crate::coeffs::{build_a, build_a_from_rays, CoefficientMatrix};
use crate::error::{Error, Result};
use crate::geometry::{rot_error, Correspondence, Quaternion};

/// Candidates retained after scoring.
pub const MAX_CANDIDATES: usize = 4;
/// Candidates closer than this (in rotation error) are merged.
const DUPLICATE_TOL: f64 = 1e-9;
/// Below this `|w|` the `x/w` parametrization is unreliable.
const GAUGE_W_THRESHOLD: f64 = 0.1;
/// Relative smallest singular value of `A2` below which the gauges are tried.
const GAUGE_CONDITIONING: f64 = 1e-8;

/// A rotation candidate and its algebraic residual `||A x(q)||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredRotation {
    pub q: Quaternion,
    pub residual: f64,
}

/// Ranks rotations by `||A x(q)||`, drops duplicates and keeps the best four.
pub fn score_candidates(a: &CoefficientMatrix, qs: &[Quaternion]) -> Result<Vec<ScoredRotation>> {
    if qs.is_empty() {
        return Err(Error::NoSolution);
    }
    let mut scored: Vec<ScoredRotation> = qs
        .iter()
        .map(|q| ScoredRotation {
            q: *q,
            residual: a.residual(q),
        })
        .filter(|s| s.residual.is_finite())
        .collect();
    scored.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut kept: Vec<ScoredRotation> = Vec::with_capacity(MAX_CANDIDATES);
    for s in scored {
        if kept.iter().all(|k| rot_error(k.q, s.q) > DUPLICATE_TOL) {
            kept.push(s);
            if kept.len() == MAX_CANDIDATES {
                break;
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::NoSolution);
    }
    Ok(kept)
}

/// Fixed gauge rotations (120 degrees about x, y and z) for the second view. At least one
/// of them maps any `w = 0` rotation to `|w| >= 0.5`.
fn gauges() -> [Quaternion; 3] {
    let angle = 2.0 * std::f64::consts::FRAC_PI_3;
    [Vector3::x(), Vector3::y(), Vector3::z()].map(|axis| Quaternion::from_axis_angle(&axis, angle))
}

type Rays = Vec<(Vector3<f64>, Vector3<f64>)>;

/// The minimal system expressed with the second view rotated by `g`.
struct Frame {
    g: Quaternion,
    a: CoefficientMatrix,
    report: RankReport,
}

impl Frame {
    fn new(rays: &Rays, g: Quaternion, method: Method) -> Result<Self> {
        // u (G R) m + G t = v (G n), so the solver sees R' = G R
        let rg = g.rotation_unchecked();
        let rotated: Rays = rays.iter().map(|(m, n)| (*m, rg * n)).collect();
        let a = build_a_from_rays(&rotated)?;
        let report = match method {
            Method::Quest7 => seven_point_rank(&a),
            _ => six_point_rank(&a),
        };
        Ok(Frame { g, a, report })
    }

    /// `sigma_min / sigma_max` of the eliminated block.
    fn conditioning(&self) -> f64 {
        let sv = &self.report.singular_values;
        match (sv.first(), sv.last()) {
            (Some(&max), Some(&min)) if max > 0.0 => min / max,
            _ => 0.0,
        }
    }

    fn rotations(&self, method: Method) -> Result<Vec<Quaternion>> {
        let qs = match method {
            Method::Quest7 => quest7_rotations(&self.a)?,
            _ => quest6_rotations(&self.a)?,
        };
        Ok(qs
            .iter()
            .filter_map(|q| (self.g.conjugate() * *q).unit_canonical().ok())
            .collect())
    }
}

fn all_near_w_zero(scored: &[ScoredRotation]) -> bool {
    scored.iter().all(|s| s.q.w.abs() < GAUGE_W_THRESHOLD)
}

/// Rotation candidates from the lowest-indexed minimal subset.
///
/// Any rotation solution with `w ~ 0`, including the twisted-pair partner of the true
/// pose, makes the eliminated block near-singular. When that happens (or every candidate
/// sits near `w = 0`) the problem is re-posed under the fixed gauges and the best
/// conditioned frame is used.
fn rotations_with_gauge(
    points: &[Correspondence],
    method: Method,
    score_a: &CoefficientMatrix,
) -> Result<Vec<ScoredRotation>> {
    let k = method.minimal_points();
    let rays: Rays = points[..k].iter().map(|c| (c.m, c.n)).collect();
    let direct = Frame::new(&rays, Quaternion::identity(), method)?;
    let direct_result = direct
        .rotations(method)
        .and_then(|qs| score_candidates(score_a, &qs));
    if let Ok(scored) = &direct_result {
        if direct.conditioning() >= GAUGE_CONDITIONING && !all_near_w_zero(scored) {
            return direct_result;
        }
    }
    let mut frames = vec![direct];
    for g in gauges() {
        frames.push(Frame::new(&rays, g, method)?);
    }
    frames.sort_by(|a, b| b.conditioning().total_cmp(&a.conditioning()));
    for frame in &frames {
        if let Ok(scored) = frame
            .rotations(method)
            .and_then(|qs| score_candidates(score_a, &qs))
        {
            return Ok(scored);
        }
    }
    direct_result
}

/// Full pose estimate: up to four candidates, best first.
///
/// With more points than the method's minimum, the lowest-indexed minimal subset drives
/// the rotation solve while all points are used for scoring, translation and depths.
/// Candidates failing chirality are ranked after every passing one.
pub fn estimate_pose(points: &[Correspondence], method: Method) -> Result<Vec<PoseCandidate>> {
    let k = method.minimal_points();
    if points.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k,
            got: points.len(),
        });
    }
    if method == Method::EightPoint {
        return Ok(vec![baseline::estimate(points)?]);
    }
    let score_a = build_a(points)?;
    let scored = rotations_with_gauge(points, method, &score_a)?;
    let mut candidates = scored
        .into_iter()
        .map(|s| {
            recover_translation_depths(s.q, points)
                .map(|td| PoseCandidate::from_parts(s.q, s.residual, td))
        })
        .collect::<Result<Vec<_>>>()?;
    candidates.sort_by_key(|c| !c.chirality_ok);
    Ok(candidates)
}
