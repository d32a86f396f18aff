//! Relative pose from six or seven correspondences via quaternion eigenproblems.
//!
//! The rotation is found first, from the null space structure of the coefficient
//! matrix `A`; translation and depths follow from a single SVD once `R` is known.

mod estimate;
mod ransac;
mod rotation;
mod translation;

pub use estimate::{estimate_pose, score_candidates, ScoredRotation, MAX_CANDIDATES};
pub use ransac::{angular_residual, ransac_pose, RansacParams, RansacResult};
pub use rotation::{
    quaternion_from_cubic, quest6_rotations, quest7_rotations, six_point_eigenmatrix,
    six_point_rank, seven_point_rank, RankReport, SplitSpec, IMAGINARY_RATIO_TOL,
    PINV_TOLERANCE,
};
pub use translation::{recover_translation_depths, ScaleNote, TranslationDepths};

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Quaternion};

/// Available estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quest6,
    Quest7,
    #[serde(rename = "eightpt")]
    EightPoint,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Quest6, Method::Quest7, Method::EightPoint];

    /// Points needed for one solve.
    pub fn minimal_points(self) -> usize {
        match self {
            Method::Quest6 => 6,
            Method::Quest7 => 7,
            Method::EightPoint => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Quest6 => "quest6",
            Method::Quest7 => "quest7",
            Method::EightPoint => "eightpt",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quest6" => Ok(Method::Quest6),
            "quest7" => Ok(Method::Quest7),
            "eightpt" | "eight_point" | "8pt" => Ok(Method::EightPoint),
            other => Err(format!("unknown method '{other}' (quest6|quest7|eightpt)")),
        }
    }
}

/// A pose hypothesis with its quality indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseCandidate {
    pub q: Quaternion,
    pub t: Vector3<f64>,
    pub depths_u: Vec<f64>,
    pub depths_v: Vec<f64>,
    /// `||A x(q)||` for the quaternion solvers, RMS epipolar residual for the baseline.
    pub algebraic_residual: f64,
    /// All depths strictly positive.
    pub chirality_ok: bool,
    /// How translation and depths were scaled.
    pub scale_note: ScaleNote,
    /// `||t|| / mean |depth|` before scaling.
    pub translation_depth_ratio: f64,
    /// The depth null vector was not isolated (small-parallax regime).
    pub depth_ambiguous: bool,
}

impl PoseCandidate {
    pub fn pose(&self) -> Pose {
        Pose {
            q: self.q,
            t: self.t,
            depths_u: self.depths_u.clone(),
            depths_v: self.depths_v.clone(),
        }
    }

    pub(crate) fn from_parts(q: Quaternion, residual: f64, td: TranslationDepths) -> Self {
        PoseCandidate {
            q,
            t: td.t,
            depths_u: td.depths_u,
            depths_v: td.depths_v,
            algebraic_residual: residual,
            chirality_ok: td.chirality_ok,
            scale_note: td.scale_note,
            translation_depth_ratio: td.translation_depth_ratio,
            depth_ambiguous: td.depth_ambiguous,
        }
    }
}
