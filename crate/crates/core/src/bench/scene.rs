//! Random two-view scenes with known ground truth.

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_pixels, Calibration, Correspondence, Quaternion};

/// Minimum depth of every point in both views.
pub const MIN_DEPTH: f64 = 0.1;
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    General,
    Coplanar,
}

impl std::str::FromStr for Geometry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "general" => Ok(Geometry::General),
            "coplanar" => Ok(Geometry::Coplanar),
            other => Err(format!("unknown geometry '{other}' (general|coplanar)")),
        }
    }
}

/// Parameters of a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub n_points: usize,
    pub geometry: Geometry,
    /// `[min, max]` of the point box along x, y and z in the first camera frame.
    pub box_x: [f64; 2],
    pub box_y: [f64; 2],
    pub box_z: [f64; 2],
    /// Half-extents of the translation box centred at the origin.
    pub translation_box: [f64; 3],
    /// Uses this rotation instead of sampling one.
    pub fixed_rotation: Option<[f64; 4]>,
    /// Uses this translation instead of sampling one.
    pub fixed_translation: Option<[f64; 3]>,
    pub rng_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            n_points: 8,
            geometry: Geometry::General,
            box_x: [-2.0, 2.0],
            box_y: [-2.0, 2.0],
            box_z: [4.0, 8.0],
            translation_box: [1.0, 1.0, 1.0],
            fixed_rotation: None,
            fixed_translation: None,
            rng_seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.n_points = n;
        self
    }

    pub fn with_geometry(mut self, g: Geometry) -> Self {
        self.geometry = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |b: &[f64; 2]| b[0] <= b[1] && b.iter().all(|v| v.is_finite());
        if !(ordered(&self.box_x) && ordered(&self.box_y) && ordered(&self.box_z)) {
            return Err(Error::InfeasibleConfig("box bounds must be finite and ordered".into()));
        }
        if self.box_z[0] <= 0.0 {
            return Err(Error::InfeasibleConfig(
                "point box must lie in front of the camera (min z > 0)".into(),
            ));
        }
        if self.translation_box.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::InfeasibleConfig("translation box must be non-negative".into()));
        }
        if self.n_points == 0 {
            return Err(Error::InfeasibleConfig("scene needs at least one point".into()));
        }
        Ok(())
    }
}

/// Pinhole camera used to express pixel noise in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for SyntheticCamera {
    fn default() -> Self {
        SyntheticCamera {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        }
    }
}

impl SyntheticCamera {
    pub fn calibration(&self) -> Calibration {
        Calibration {
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            skew: 0.0,
        }
    }
}

/// A generated scene and its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Points in the first camera frame.
    pub points3d: Vec<Vector3<f64>>,
    pub q: Quaternion,
    pub t: Vector3<f64>,
    pub correspondences: Vec<Correspondence>,
    pub depths_u: Vec<f64>,
    pub depths_v: Vec<f64>,
}

impl Scene {
    /// Per-point residual of `u R m + t - v n`.
    pub fn max_motion_residual(&self) -> f64 {
        let r = self.q.rotation_unchecked();
        self.correspondences
            .iter()
            .zip(self.depths_u.iter().zip(&self.depths_v))
            .map(|(c, (u, v))| (*u * (r * c.m) + self.t - *v * c.n).norm())
            .fold(0.0, f64::max)
    }
}

/// Uniformly distributed rotation (normalized 4D Gaussian), canonical sign.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        if let Ok(q) = Quaternion::from_array(v).unit_canonical() {
            return q;
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..range[1])
    }
}

fn sample_points<R: Rng>(rng: &mut R, cfg: &SceneConfig) -> Vec<Vector3<f64>> {
    match cfg.geometry {
        Geometry::General => (0..cfg.n_points)
            .map(|_| {
                Vector3::new(
                    uniform(rng, cfg.box_x),
                    uniform(rng, cfg.box_y),
                    uniform(rng, cfg.box_z),
                )
            })
            .collect(),
        Geometry::Coplanar => {
            let centre = Vector3::new(
                uniform(rng, cfg.box_x),
                uniform(rng, cfg.box_y),
                uniform(rng, cfg.box_z),
            );
            // plane tilted at most 45 degrees per axis away from fronto-parallel
            let normal: Vector3<f64> = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                1.0,
            )
            .normalize();
            let helper = if normal.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let e1 = normal.cross(&helper).normalize();
            let e2 = normal.cross(&e1);
            let half = 0.5 * (cfg.box_x[1] - cfg.box_x[0]).min(cfg.box_y[1] - cfg.box_y[0]);
            (0..cfg.n_points)
                .map(|_| {
                    let a = uniform(rng, [-half, half]);
                    let b = uniform(rng, [-half, half]);
                    centre + e1 * a + e2 * b
                })
                .collect()
        }
    }
}

/// Samples a scene; resamples whenever a point is within [`MIN_DEPTH`] of either camera.
pub fn generate_scene(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for _ in 0..MAX_ATTEMPTS {
        let points3d = sample_points(&mut rng, cfg);
        let q = match cfg.fixed_rotation {
            Some(v) => Quaternion::from_array(v).unit_canonical()?,
            None => random_rotation(&mut rng),
        };
        let t = match cfg.fixed_translation {
            Some(v) => Vector3::from(v),
            None => Vector3::from_fn(|i, _| {
                let h = cfg.translation_box[i];
                uniform(&mut rng, [-h, h])
            }),
        };
        let r = q.rotation_unchecked();
        let second: Vec<Vector3<f64>> = points3d.iter().map(|p| r * p + t).collect();
        let feasible = points3d
            .iter()
            .zip(&second)
            .all(|(a, b)| a.z > MIN_DEPTH && b.z > MIN_DEPTH);
        if !feasible {
            continue;
        }
        let correspondences = points3d
            .iter()
            .zip(&second)
            .map(|(a, b)| Correspondence::new(a.x / a.z, a.y / a.z, b.x / b.z, b.y / b.z))
            .collect();
        return Ok(Scene {
            depths_u: points3d.iter().map(|p| p.z).collect(),
            depths_v: second.iter().map(|p| p.z).collect(),
            points3d,
            q,
            t,
            correspondences,
        });
    }
    Err(Error::InfeasibleConfig(format!(
        "no scene with all depths above {MIN_DEPTH} after {MAX_ATTEMPTS} attempts"
    )))
}

/// Adds i.i.d. Gaussian pixel noise of standard deviation `sigma` to both coordinates in
/// both views.
pub fn add_pixel_noise(
    points: &[Correspondence],
    sigma: f64,
    cam: &SyntheticCamera,
    seed: u64,
) -> Vec<Correspondence> {
    if sigma == 0.0 {
        return points.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cam.calibration().matrix();
    let mut perturb = |p: &Vector3<f64>| {
        let px = to_pixels(p, &k);
        let dx: f64 = StandardNormal.sample(&mut rng);
        let dy: f64 = StandardNormal.sample(&mut rng);
        let noisy = Vector2::new(px.x + sigma * dx, px.y + sigma * dy);
        Vector3::new(
            (noisy.x - cam.cx) / cam.fx,
            (noisy.y - cam.cy) / cam.fy,
            1.0,
        )
    };
    points
        .iter()
        .map(|c| {
            let m = perturb(&c.m);
            let n = perturb(&c.n);
            Correspondence { m, n }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_motion_gives_equal_views() {
        let cfg = SceneConfig {
            translation_box: [0.0; 3],
            fixed_rotation: Some([1.0, 0.0, 0.0, 0.0]),
            ..SceneConfig::default()
        };
        let s = generate_scene(&cfg).unwrap();
        for c in &s.correspondences {
            assert_eq!(c.m, c.n);
        }
    }

    #[test]
    fn correspondences_satisfy_rigid_motion() {
        for seed in 0..20 {
            let s = generate_scene(&SceneConfig::default().with_seed(seed)).unwrap();
            assert!(s.max_motion_residual() < 1e-12, "seed {seed}");
            assert!(s.depths_u.iter().chain(&s.depths_v).all(|d| *d > MIN_DEPTH));
        }
    }

    #[test]
    fn coplanar_points_fit_a_plane() {
        let cfg = SceneConfig::default().with_geometry(Geometry::Coplanar).with_points(12);
        for seed in 0..10 {
            let s = generate_scene(&cfg.clone().with_seed(seed)).unwrap();
            let p = &s.points3d;
            let normal = (p[1] - p[0]).cross(&(p[2] - p[0])).normalize();
            for x in p {
                assert!((x - p[0]).dot(&normal).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SceneConfig::default().with_seed(99);
        assert_eq!(generate_scene(&cfg).unwrap(), generate_scene(&cfg).unwrap());
    }

    #[test]
    fn box_behind_camera_is_rejected() {
        let cfg = SceneConfig {
            box_z: [-1.0, 2.0],
            ..SceneConfig::default()
        };
        assert!(matches!(generate_scene(&cfg), Err(Error::InfeasibleConfig(_))));
    }

    #[test]
    fn impossible_scene_reports_infeasible() {
        // rotation of 180 degrees about y turns every point behind the second camera
        let cfg = SceneConfig {
            fixed_rotation: Some([0.0, 0.0, 1.0, 0.0]),
            translation_box: [0.0; 3],
            ..SceneConfig::default()
        };
        assert!(matches!(generate_scene(&cfg), Err(Error::InfeasibleConfig(_))));
    }

    #[test]
    fn zero_sigma_is_exact() {
        let s = generate_scene(&SceneConfig::default()).unwrap();
        let cam = SyntheticCamera::default();
        assert_eq!(add_pixel_noise(&s.correspondences, 0.0, &cam, 7), s.correspondences);
    }

    #[test]
    fn pixel_noise_has_requested_spread() {
        let cam = SyntheticCamera::default();
        let pts = vec![Correspondence::new(0.1, -0.2, 0.3, 0.05); 25_000];
        let sigma = 2.5;
        let noisy = add_pixel_noise(&pts, sigma, &cam, 3);
        let mut deltas = Vec::with_capacity(100_000);
        for (a, b) in pts.iter().zip(&noisy) {
            deltas.push((b.m.x - a.m.x) * cam.fx);
            deltas.push((b.m.y - a.m.y) * cam.fy);
            deltas.push((b.n.x - a.n.x) * cam.fx);
            deltas.push((b.n.y - a.n.y) * cam.fy);
        }
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / deltas.len() as f64;
        assert!((var.sqrt() / sigma - 1.0).abs() < 0.02);
        // both views are perturbed
        assert!(pts.iter().zip(&noisy).all(|(a, b)| a.m != b.m && a.n != b.n));
    }
}
