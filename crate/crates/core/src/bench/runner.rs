use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::{add_pixel_noise, generate_scene, Geometry, Scene, SceneConfig, SyntheticCamera};
use crate::error::{Error, Result};
use crate::geometry::{rot_error, trans_error};
use crate::solver::{estimate_pose, Method, PoseCandidate};

/// One method run on one noisy scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: Method,
    pub sigma_px: f64,
    pub trial: usize,
    /// Normalized rotation error of the candidate closest to ground truth (1 on failure).
    pub rot_err: f64,
    pub trans_err: f64,
    pub runtime_s: f64,
    pub candidates: usize,
    pub failed: bool,
}

impl BenchRecord {
    /// Same record with the runtime zeroed, for determinism comparisons.
    pub fn without_runtime(&self) -> BenchRecord {
        BenchRecord {
            runtime_s: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseBenchConfig {
    pub methods: Vec<Method>,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub scene: SceneConfig,
    pub camera: SyntheticCamera,
    pub seed: u64,
}

impl Default for NoiseBenchConfig {
    fn default() -> Self {
        NoiseBenchConfig {
            methods: Method::ALL.to_vec(),
            sigmas: (0..=20).map(|i| 0.5 * i as f64).collect(),
            trials: 100,
            scene: SceneConfig::default(),
            camera: SyntheticCamera::default(),
            seed: 0,
        }
    }
}

impl NoiseBenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid noise sigma {s}")));
        }
        let needed = self.methods.iter().map(|m| m.minimal_points()).max().unwrap_or(0);
        if self.scene.n_points < needed {
            return Err(Error::InvalidArgument(format!(
                "scenes have {} points but the selected methods need {needed}",
                self.scene.n_points
            )));
        }
        self.scene.validate()
    }
}

/// Seed for one `(sigma, trial)` cell, independent of evaluation order.
pub fn derive_seed(master: u64, sigma_index: u64, trial: u64) -> u64 {
    let mut z = master;
    for v in [sigma_index, trial] {
        z = splitmix(z ^ splitmix(v.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Candidate with the smallest rotation error against ground truth. Benchmark use only:
/// the estimator's own ranking never sees the truth.
pub fn closest_to_truth<'a>(candidates: &'a [PoseCandidate], scene: &Scene) -> Option<&'a PoseCandidate> {
    candidates
        .iter()
        .min_by(|a, b| rot_error(a.q, scene.q).total_cmp(&rot_error(b.q, scene.q)))
}

fn run_method(method: Method, scene: &Scene, points: &[crate::geometry::Correspondence], sigma: f64, trial: usize) -> BenchRecord {
    let k = method.minimal_points();
    let start = Instant::now();
    let result = estimate_pose(&points[..k], method);
    let runtime_s = start.elapsed().as_secs_f64();
    let scored = result.ok().and_then(|cands| {
        let best = closest_to_truth(&cands, scene)?;
        let te = trans_error(&best.t, &scene.t).ok()?;
        Some((rot_error(best.q, scene.q), te, cands.len()))
    });
    match scored {
        Some((rot_err, trans_err, candidates)) => BenchRecord {
            method,
            sigma_px: sigma,
            trial,
            rot_err,
            trans_err,
            runtime_s,
            candidates,
            failed: false,
        },
        None => BenchRecord {
            method,
            sigma_px: sigma,
            trial,
            rot_err: 1.0,
            trans_err: 1.0,
            runtime_s,
            candidates: 0,
            failed: true,
        },
    }
}

fn noisy_scene(cfg: &SceneConfig, cam: &SyntheticCamera, sigma: f64, seed: u64) -> Result<(Scene, Vec<crate::geometry::Correspondence>)> {
    let scene = generate_scene(&cfg.clone().with_seed(seed))?;
    let noisy = add_pixel_noise(&scene.correspondences, sigma, cam, splitmix(seed));
    Ok((scene, noisy))
}

/// Monte Carlo noise sweep: one scene per `(sigma, trial)`, every method on its minimal
/// number of points. Records are ordered by sigma, trial, then method.
pub fn run_noise_benchmark(cfg: &NoiseBenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.sigmas.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(si, trial)| {
            let sigma = cfg.sigmas[si];
            let seed = derive_seed(cfg.seed, si as u64, trial as u64);
            let (scene, noisy) = noisy_scene(&cfg.scene, &cfg.camera, sigma, seed)?;
            Ok(cfg
                .methods
                .iter()
                .map(|&m| run_method(m, &scene, &noisy, sigma, trial))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeBenchConfig {
    pub methods: Vec<Method>,
    pub trials: usize,
    /// Noise levels cycled through the trials.
    pub sigmas: Vec<f64>,
    /// Runs discarded before timing starts.
    pub warmup: usize,
    pub scene: SceneConfig,
    pub camera: SyntheticCamera,
    pub seed: u64,
}

impl Default for TimeBenchConfig {
    fn default() -> Self {
        TimeBenchConfig {
            methods: Method::ALL.to_vec(),
            trials: 1000,
            sigmas: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            warmup: 10,
            scene: SceneConfig::default(),
            camera: SyntheticCamera::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub mean_s: f64,
    pub median_s: f64,
}

/// Sequential timing over a mix of general and coplanar scenes (alternating) at varying
/// noise. Returns the timed records (warm-up runs excluded) and per-method summaries.
pub fn run_time_benchmark(cfg: &TimeBenchConfig) -> Result<(Vec<BenchRecord>, Vec<TimingSummary>)> {
    if cfg.methods.is_empty() || cfg.sigmas.is_empty() {
        return Err(Error::InvalidArgument("time benchmark needs methods and sigmas".into()));
    }
    let mut records = Vec::with_capacity(cfg.trials * cfg.methods.len());
    for trial in 0..cfg.trials + cfg.warmup {
        let si = trial % cfg.sigmas.len();
        let sigma = cfg.sigmas[si];
        let geometry = if trial % 2 == 0 {
            Geometry::General
        } else {
            Geometry::Coplanar
        };
        let scene_cfg = cfg.scene.clone().with_geometry(geometry);
        let seed = derive_seed(cfg.seed, si as u64, trial as u64);
        let (scene, noisy) = noisy_scene(&scene_cfg, &cfg.camera, sigma, seed)?;
        for &m in &cfg.methods {
            let rec = run_method(m, &scene, &noisy, sigma, trial);
            if trial >= cfg.warmup {
                records.push(BenchRecord {
                    trial: trial - cfg.warmup,
                    ..rec
                });
            }
        }
    }
    let summaries = cfg
        .methods
        .iter()
        .map(|&m| {
            let times: Vec<f64> = records.iter().filter(|r| r.method == m).map(|r| r.runtime_s).collect();
            TimingSummary {
                method: m,
                runs: times.len(),
                failures: records.iter().filter(|r| r.method == m && r.failed).count(),
                mean_s: times.iter().sum::<f64>() / times.len().max(1) as f64,
                median_s: quantile(&times, 0.5),
            }
        })
        .collect();
    Ok((records, summaries))
}

/// Linear-interpolated quantile (the common "type 7" definition); NaN for empty input.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Median and quartiles of one method at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub sigma_px: f64,
    pub trials: usize,
    pub failures: usize,
    pub rot_q1: f64,
    pub rot_median: f64,
    pub rot_q3: f64,
    pub trans_q1: f64,
    pub trans_median: f64,
    pub trans_q3: f64,
    pub mean_runtime_s: f64,
}

/// Groups records by `(method, sigma)` in first-seen order.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|k| k.0 == r.method && k.1 == r.sigma_px) {
            keys.push((r.method, r.sigma_px));
        }
    }
    keys.into_iter()
        .map(|(method, sigma)| {
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.method == method && r.sigma_px == sigma)
                .collect();
            let rot: Vec<f64> = group.iter().map(|r| r.rot_err).collect();
            let trans: Vec<f64> = group.iter().map(|r| r.trans_err).collect();
            SummaryRow {
                method,
                sigma_px: sigma,
                trials: group.len(),
                failures: group.iter().filter(|r| r.failed).count(),
                rot_q1: quantile(&rot, 0.25),
                rot_median: quantile(&rot, 0.5),
                rot_q3: quantile(&rot, 0.75),
                trans_q1: quantile(&trans, 0.25),
                trans_median: quantile(&trans, 0.5),
                trans_q3: quantile(&trans, 0.75),
                mean_runtime_s: group.iter().map(|r| r.runtime_s).sum::<f64>() / group.len() as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(methods: Vec<Method>, sigmas: Vec<f64>, trials: usize) -> NoiseBenchConfig {
        NoiseBenchConfig {
            methods,
            sigmas,
            trials,
            seed: 5,
            ..NoiseBenchConfig::default()
        }
    }

    #[test]
    fn noiseless_quest6_is_exact() {
        let recs = run_noise_benchmark(&small(vec![Method::Quest6], vec![0.0], 100)).unwrap();
        assert_eq!(recs.len(), 100);
        let mean = recs.iter().map(|r| r.rot_err).sum::<f64>() / 100.0;
        assert!(mean < 1e-6, "mean {mean}");
    }

    #[test]
    fn noiseless_coplanar_breaks_eight_point() {
        let mut cfg = small(vec![Method::EightPoint], vec![0.0], 30);
        cfg.scene.geometry = Geometry::Coplanar;
        let recs = run_noise_benchmark(&cfg).unwrap();
        let mean = recs.iter().map(|r| r.rot_err).sum::<f64>() / recs.len() as f64;
        assert!(mean > 0.02);
    }

    #[test]
    fn record_count_and_order() {
        let cfg = small(vec![Method::Quest6, Method::EightPoint], vec![0.0, 1.0, 2.0], 10);
        let recs = run_noise_benchmark(&cfg).unwrap();
        assert_eq!(recs.len(), 60);
        assert_eq!(recs[0].method, Method::Quest6);
        assert_eq!(recs[1].method, Method::EightPoint);
        assert_eq!(recs[59].sigma_px, 2.0);
        assert!(recs.iter().all(|r| r.failed || (0.0..=1.0).contains(&r.rot_err)));
    }

    #[test]
    fn seeded_runs_match() {
        let cfg = small(vec![Method::Quest7, Method::EightPoint], vec![1.0], 8);
        let a: Vec<_> = run_noise_benchmark(&cfg).unwrap().iter().map(BenchRecord::without_runtime).collect();
        let b: Vec<_> = run_noise_benchmark(&cfg).unwrap().iter().map(BenchRecord::without_runtime).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_seeds_differ_per_cell() {
        let s: std::collections::HashSet<u64> = (0..10)
            .flat_map(|i| (0..10).map(move |t| derive_seed(1, i, t)))
            .collect();
        assert_eq!(s.len(), 100);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn summary_groups_by_method_and_sigma() {
        let cfg = small(vec![Method::Quest6, Method::EightPoint], vec![0.0, 1.0], 5);
        let rows = summarize(&run_noise_benchmark(&cfg).unwrap());
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.trials == 5));
        assert!(rows.iter().all(|r| r.rot_q1 <= r.rot_median && r.rot_median <= r.rot_q3));
    }

    #[test]
    fn time_benchmark_discards_warmup() {
        let cfg = TimeBenchConfig {
            methods: vec![Method::Quest6, Method::EightPoint],
            trials: 12,
            ..TimeBenchConfig::default()
        };
        let (recs, summary) = run_time_benchmark(&cfg).unwrap();
        assert_eq!(recs.len(), 24);
        assert_eq!(summary.len(), 2);
        assert!(summary.iter().all(|s| s.runs == 12 && s.mean_s > 0.0));
    }

    #[test]
    fn rejects_too_few_scene_points() {
        let mut cfg = small(vec![Method::EightPoint], vec![0.0], 1);
        cfg.scene.n_points = 7;
        assert!(matches!(run_noise_benchmark(&cfg), Err(Error::InvalidArgument(_))));
    }
}
