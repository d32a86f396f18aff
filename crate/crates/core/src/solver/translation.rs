use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Quaternion};
use crate::linalg::null_vector;

/// Below this `||t|| / mean |depth|`, depths rather than translation set the scale.
const TRANSLATION_SCALE_FLOOR: f64 = 1e-8;
/// Relative separation required between the two smallest singular values of `C`.
const DEPTH_GAP_TOL: f64 = 1e-8;

/// Normalization applied to a recovered `(t, depths)` vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleNote {
    /// `||t|| = 1`.
    UnitTranslation,
    /// Mean absolute depth is 1 (translation too small to fix the scale).
    UnitMeanDepth,
    /// Baseline translation, unit norm by construction.
    EssentialUnitTranslation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationDepths {
    pub t: Vector3<f64>,
    pub depths_u: Vec<f64>,
    pub depths_v: Vec<f64>,
    pub chirality_ok: bool,
    pub scale_note: ScaleNote,
    pub translation_depth_ratio: f64,
    pub depth_ambiguous: bool,
}

/// Solves `u_i R m_i + t = v_i n_i` for `t` and all depths jointly.
///
/// The stacked system `C y = 0`, `C = [I | R m_i | -n_i]` blockwise, is solved by the
/// right singular vector of the smallest singular value; the sign is chosen so most
/// depths are positive.
pub fn recover_translation_depths(
    q: Quaternion,
    points: &[Correspondence],
) -> Result<TranslationDepths> {
    let k = points.len();
    if k < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: k });
    }
    let r = q.normalized()?.rotation_unchecked();
    let mut c = DMatrix::zeros(3 * k, 2 * k + 3);
    for (i, p) in points.iter().enumerate() {
        let rm = r * p.m;
        for d in 0..3 {
            c[(3 * i + d, d)] = 1.0;
            c[(3 * i + d, 3 + 2 * i)] = rm[d];
            c[(3 * i + d, 4 + 2 * i)] = -p.n[d];
        }
    }
    let nv = null_vector(&c)?;
    let mut y = nv.vector;
    let depth_ambiguous = nv.second - nv.smallest < DEPTH_GAP_TOL * nv.largest;

    let depths = y.rows(3, 2 * k);
    let positive = depths.iter().filter(|d| **d > 0.0).count();
    let negative = depths.iter().filter(|d| **d < 0.0).count();
    if negative > positive || (negative == positive && depths.sum() < 0.0) {
        y.neg_mut();
    }

    let t = Vector3::new(y[0], y[1], y[2]);
    let depths_u: Vec<f64> = (0..k).map(|i| y[3 + 2 * i]).collect();
    let depths_v: Vec<f64> = (0..k).map(|i| y[4 + 2 * i]).collect();
    let mean_depth =
        depths_u.iter().chain(&depths_v).map(|d| d.abs()).sum::<f64>() / (2 * k) as f64;
    let t_norm = t.norm();
    let ratio = if mean_depth > 0.0 {
        t_norm / mean_depth
    } else {
        f64::INFINITY
    };
    let (scale, scale_note) = if t_norm > TRANSLATION_SCALE_FLOOR * mean_depth {
        (1.0 / t_norm, ScaleNote::UnitTranslation)
    } else if mean_depth > 0.0 {
        (1.0 / mean_depth, ScaleNote::UnitMeanDepth)
    } else {
        return Err(Error::DegenerateConfiguration(
            "translation and depths are all zero".into(),
        ));
    };
    let chirality_ok = depths_u.iter().chain(&depths_v).all(|d| *d > 0.0);
    Ok(TranslationDepths {
        t: t * scale,
        depths_u: depths_u.iter().map(|d| d * scale).collect(),
        depths_v: depths_v.iter().map(|d| d * scale).collect(),
        chirality_ok,
        scale_note,
        translation_depth_ratio: ratio,
        depth_ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate_scene, SceneConfig};

    #[test]
    fn recovers_scaled_ground_truth() {
        let s = generate_scene(&SceneConfig::default().with_seed(4)).unwrap();
        let td = recover_translation_depths(s.q, &s.correspondences).unwrap();
        let scale = s.t.norm();
        assert!((td.t * scale - s.t).norm() < 1e-8);
        for (a, b) in td.depths_u.iter().zip(&s.depths_u) {
            assert!((a * scale - b).abs() < 1e-8 * b);
        }
        assert!(td.chirality_ok);
        assert!(!td.depth_ambiguous);
        assert_eq!(td.scale_note, ScaleNote::UnitTranslation);
        let ratio = s.t.norm()
            / (s.depths_u.iter().chain(&s.depths_v).sum::<f64>() / (2 * s.depths_u.len()) as f64);
        assert!((td.translation_depth_ratio - ratio).abs() < 1e-9);
    }

    #[test]
    fn closes_the_rigid_motion_constraint() {
        let s = generate_scene(&SceneConfig::default().with_seed(12)).unwrap();
        let td = recover_translation_depths(s.q, &s.correspondences).unwrap();
        let r = s.q.to_rotation().unwrap();
        for (i, c) in s.correspondences.iter().enumerate() {
            let (u, v) = (td.depths_u[i], td.depths_v[i]);
            let res = (u * (r * c.m) + td.t - v * c.n).norm();
            assert!(res < 1e-6 * (u.abs() + v.abs()));
        }
    }

    #[test]
    fn zero_translation_reports_vanishing_ratio() {
        let cfg = SceneConfig {
            fixed_translation: Some([0.0; 3]),
            ..SceneConfig::default().with_seed(2)
        };
        let s = generate_scene(&cfg).unwrap();
        let td = recover_translation_depths(s.q, &s.correspondences).unwrap();
        assert!(td.translation_depth_ratio < 1e-6);
        assert_eq!(td.scale_note, ScaleNote::UnitMeanDepth);
        assert!(td.depth_ambiguous);
    }

    #[test]
    fn needs_two_points() {
        let p = [Correspondence::new(0.0, 0.0, 0.1, 0.1)];
        assert!(matches!(
            recover_translation_depths(Quaternion::identity(), &p),
            Err(Error::InsufficientPoints { .. })
        ));
    }
}
