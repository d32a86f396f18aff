//! Rotation quaternions, correspondences, poses and the angular error metrics.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance under which `w` counts as zero when picking the canonical sign.
const CANONICAL_EPS: f64 = 1e-12;
/// Unit-norm tolerance accepted by [`Quaternion::to_rotation`].
const UNIT_TOL: f64 = 1e-9;

/// Rotation quaternion `w + xi + yj + zk` (Hamilton convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn identity() -> Self {
        Quaternion::new(1.0, 0.0, 0.0, 0.0)
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (angle / 2.0).sin_cos();
        Quaternion::new(c, s * a.x, s * a.y, s * a.z).canonical()
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn as_vector(self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn norm(self) -> f64 {
        self.as_vector().norm()
    }

    pub fn dot(self, other: Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn conjugate(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Scales to unit norm. Fails on a zero (or non-finite) quaternion.
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n < f64::MIN_POSITIVE {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero quaternion".into(),
            ));
        }
        Ok(Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n))
    }

    /// Representative of `{q, -q}` with `w >= 0`; ties at `w = 0` are broken by the
    /// first nonzero of `(x, y, z)`.
    pub fn canonical(self) -> Self {
        let flip = if self.w.abs() > CANONICAL_EPS {
            self.w < 0.0
        } else {
            [self.x, self.y, self.z]
                .into_iter()
                .find(|c| c.abs() > CANONICAL_EPS)
                .is_some_and(|c| c < 0.0)
        };
        if flip {
            Quaternion::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            self
        }
    }

    /// Normalizes and canonicalizes in one step.
    pub fn unit_canonical(self) -> Result<Self> {
        Ok(self.normalized()?.canonical())
    }

    /// Rotation matrix of a unit quaternion.
    pub fn to_rotation(self) -> Result<Matrix3<f64>> {
        let n = self.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "quaternion norm {n} is not 1 within {UNIT_TOL:e}"
            )));
        }
        Ok(self.rotation_unchecked())
    }

    /// The quadratic form of the rotation matrix, evaluated without a norm check.
    pub(crate) fn rotation_unchecked(self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = self;
        Matrix3::new(
            w * w + x * x - y * y - z * z,
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            w * w - x * x + y * y - z * z,
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            w * w - x * x - y * y + z * z,
        )
    }

    /// Extracts the canonical quaternion of a rotation matrix (Shepperd's method).
    pub fn from_rotation(r: &Matrix3<f64>) -> Self {
        let trace = r[(0, 0)] + r[(1, 1)] + r[(2, 2)];
        let q = if trace >= r[(0, 0)].max(r[(1, 1)]).max(r[(2, 2)]) {
            let s = (1.0 + trace).max(0.0).sqrt() * 2.0;
            Quaternion::new(
                s / 4.0,
                (r[(2, 1)] - r[(1, 2)]) / s,
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(1, 0)] - r[(0, 1)]) / s,
            )
        } else if r[(0, 0)] >= r[(1, 1)] && r[(0, 0)] >= r[(2, 2)] {
            let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).max(0.0).sqrt() * 2.0;
            Quaternion::new(
                (r[(2, 1)] - r[(1, 2)]) / s,
                s / 4.0,
                (r[(0, 1)] + r[(1, 0)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
            )
        } else if r[(1, 1)] >= r[(2, 2)] {
            let s = (1.0 - r[(0, 0)] + r[(1, 1)] - r[(2, 2)]).max(0.0).sqrt() * 2.0;
            Quaternion::new(
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                s / 4.0,
                (r[(1, 2)] + r[(2, 1)]) / s,
            )
        } else {
            let s = (1.0 - r[(0, 0)] - r[(1, 1)] + r[(2, 2)]).max(0.0).sqrt() * 2.0;
            Quaternion::new(
                (r[(1, 0)] - r[(0, 1)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
                (r[(1, 2)] + r[(2, 1)]) / s,
                s / 4.0,
            )
        };
        q.normalized().unwrap_or(Quaternion::identity()).canonical()
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Quaternion::identity()
    }
}

/// Hamilton product; `R(p * q) = R(p) R(q)`.
impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
        )
    }
}

/// Convenience wrapper over [`Quaternion::to_rotation`].
pub fn quat_to_rotation(q: Quaternion) -> Result<Matrix3<f64>> {
    q.to_rotation()
}

/// Rotation error `acos(|<q, q*>|) / pi` in `[0, 1]`.
///
/// The absolute value makes `q` and `-q` (the same rotation) score zero.
pub fn rot_error(q: Quaternion, q_star: Quaternion) -> f64 {
    let a = q.as_vector();
    let b = if q.dot(q_star) < 0.0 {
        -q_star.as_vector()
    } else {
        q_star.as_vector()
    };
    // equals acos(|<a, b>|) for unit inputs, without the cancellation near 0
    (2.0 * (a - b).norm().atan2((a + b).norm()) / PI).clamp(0.0, 1.0)
}

/// Angle between two translation directions, scaled to `[0, 1]`.
pub fn trans_error(t: &Vector3<f64>, t_star: &Vector3<f64>) -> Result<f64> {
    let (nt, ns) = (t.norm(), t_star.norm());
    if !(nt > 0.0 && ns > 0.0) || !nt.is_finite() || !ns.is_finite() {
        return Err(Error::UndefinedDirection);
    }
    Ok(angle_between(t, t_star) / PI)
}

/// One matched feature: homogeneous normalized image points in the first (`m`)
/// and second (`n`) view. Both carry a third coordinate of exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub m: Vector3<f64>,
    pub n: Vector3<f64>,
}

impl Correspondence {
    /// From normalized image-plane coordinates `(mx, my)` and `(nx, ny)`.
    pub fn new(mx: f64, my: f64, nx: f64, ny: f64) -> Self {
        Correspondence {
            m: Vector3::new(mx, my, 1.0),
            n: Vector3::new(nx, ny, 1.0),
        }
    }

    /// From arbitrary homogeneous vectors, rescaled so the last entry is 1.
    pub fn from_homogeneous(m: &Vector3<f64>, n: &Vector3<f64>) -> Result<Self> {
        Ok(Correspondence {
            m: dehomogenize(m)?,
            n: dehomogenize(n)?,
        })
    }
}

fn dehomogenize(v: &Vector3<f64>) -> Result<Vector3<f64>> {
    if v.z.abs() < f64::EPSILON * v.norm() || !v.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidArgument(
            "homogeneous point at infinity".into(),
        ));
    }
    Ok(Vector3::new(v.x / v.z, v.y / v.z, 1.0))
}

/// Relative pose with per-point depths: `u_i R m_i + t = v_i n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub q: Quaternion,
    pub t: Vector3<f64>,
    pub depths_u: Vec<f64>,
    pub depths_v: Vec<f64>,
}

impl Pose {
    pub fn rotation(&self) -> Matrix3<f64> {
        self.q.rotation_unchecked()
    }
}

/// Pinhole intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub skew: f64,
}

impl Calibration {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, self.skew, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0,
        )
    }
}

/// Maps a pixel through `K^-1` onto the `z = 1` plane.
pub fn normalize_pixels(pixel: &Vector2<f64>, k: &Matrix3<f64>) -> Result<Vector3<f64>> {
    if (k[(2, 2)] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidCalibration(format!(
            "K[2][2] must be 1, got {}",
            k[(2, 2)]
        )));
    }
    let k_inv = k
        .try_inverse()
        .filter(|inv| inv.iter().all(|c| c.is_finite()))
        .ok_or_else(|| Error::InvalidCalibration("matrix is singular".into()))?;
    let p = k_inv * Vector3::new(pixel.x, pixel.y, 1.0);
    dehomogenize(&p).map_err(|_| Error::InvalidCalibration("pixel maps to infinity".into()))
}

/// Inverse of [`normalize_pixels`].
pub fn to_pixels(point: &Vector3<f64>, k: &Matrix3<f64>) -> Vector2<f64> {
    let p = k * point;
    Vector2::new(p.x / p.z, p.y / p.z)
}

/// Angle in radians between two (non-zero) vectors.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    // atan2 form stays accurate for nearly parallel vectors
    a.cross(b).norm().atan2(a.dot(b))
}
