//! Text and JSON file formats used by the command-line tool.
//!
//! Correspondence files hold one match per line, `x1 y1 x2 y2`, in pixels unless a
//! `# normalized` directive appears before the first data line. Calibration files hold
//! `fx fy cx cy skew`; ground-truth files hold `w x y z tx ty tz`. Blank lines and lines
//! starting with `#` are ignored everywhere.

use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_pixels, to_pixels, Calibration, Correspondence, Quaternion};
use crate::solver::{Method, PoseCandidate, RansacParams, RansacResult, ScaleNote};

/// Unit-norm tolerance for quaternions read from ground-truth files.
pub const GROUND_TRUTH_NORM_TOL: f64 = 1e-3;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceFile {
    /// Coordinates are already on the `z = 1` plane.
    pub normalized: bool,
    /// `(x1, y1, x2, y2)` per match.
    pub rows: Vec<[f64; 4]>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Whitespace-separated finite floats on one line.
fn parse_floats(line: &str, lineno: usize, expected: usize, what: &str) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != expected {
        return Err(parse_error(
            lineno,
            format!("expected {expected} numbers ({what}), found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_error(lineno, format!("'{f}' is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_error(lineno, format!("non-finite value '{f}'")))
            }
        })
        .collect()
}

/// `(1-based line number, trimmed content)` of every data line.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_correspondences(text: &str) -> Result<CorrespondenceFile> {
    let mut normalized = false;
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if comment.trim().eq_ignore_ascii_case("normalized") {
                normalized = true;
            }
            continue;
        }
        break;
    }
    for (lineno, line) in data_lines(text) {
        let v = parse_floats(line, lineno, 4, "x1 y1 x2 y2")?;
        rows.push([v[0], v[1], v[2], v[3]]);
    }
    Ok(CorrespondenceFile { normalized, rows })
}

impl CorrespondenceFile {
    /// Normalized correspondences; pixel files need the calibration.
    pub fn correspondences(&self, calib: Option<&Calibration>) -> Result<Vec<Correspondence>> {
        if self.normalized {
            return Ok(self
                .rows
                .iter()
                .map(|r| Correspondence::new(r[0], r[1], r[2], r[3]))
                .collect());
        }
        let calib = calib.ok_or_else(|| {
            Error::InvalidArgument(
                "pixel coordinates need a calibration file (or a '# normalized' header)".into(),
            )
        })?;
        let k = calib.matrix();
        self.rows
            .iter()
            .map(|r| {
                let m = normalize_pixels(&Vector2::new(r[0], r[1]), &k)?;
                let n = normalize_pixels(&Vector2::new(r[2], r[3]), &k)?;
                Ok(Correspondence { m, n })
            })
            .collect()
    }
}

/// Writes correspondences, either normalized or projected to pixels through `calib`.
pub fn write_correspondences(points: &[Correspondence], calib: Option<&Calibration>) -> String {
    let mut out = String::new();
    match calib {
        None => {
            out.push_str("# normalized\n# x1 y1 x2 y2\n");
            for c in points {
                let (m, n) = (c.m / c.m.z, c.n / c.n.z);
                let _ = writeln!(out, "{} {} {} {}", fmt_f64(m.x), fmt_f64(m.y), fmt_f64(n.x), fmt_f64(n.y));
            }
        }
        Some(calib) => {
            out.push_str("# x1 y1 x2 y2 (pixels)\n");
            let k = calib.matrix();
            for c in points {
                let (m, n) = (to_pixels(&c.m, &k), to_pixels(&c.n, &k));
                let _ = writeln!(out, "{} {} {} {}", fmt_f64(m.x), fmt_f64(m.y), fmt_f64(n.x), fmt_f64(n.y));
            }
        }
    }
    out
}

pub fn parse_calibration(text: &str) -> Result<Calibration> {
    let (lineno, line) = data_lines(text)
        .next()
        .ok_or_else(|| parse_error(0, "calibration file has no data line"))?;
    let v = parse_floats(line, lineno, 5, "fx fy cx cy skew")?;
    if !(v[0] > 0.0 && v[1] > 0.0) {
        return Err(Error::InvalidCalibration(format!(
            "focal lengths must be positive, got fx = {}, fy = {}",
            v[0], v[1]
        )));
    }
    Ok(Calibration {
        fx: v[0],
        fy: v[1],
        cx: v[2],
        cy: v[3],
        skew: v[4],
    })
}

pub fn write_calibration(calib: &Calibration) -> String {
    format!(
        "# fx fy cx cy skew\n{} {} {} {} {}\n",
        fmt_f64(calib.fx),
        fmt_f64(calib.fy),
        fmt_f64(calib.cx),
        fmt_f64(calib.cy),
        fmt_f64(calib.skew)
    )
}

/// Ground-truth pose; the quaternion is renormalized after the unit-norm check.
pub fn parse_ground_truth(text: &str) -> Result<(Quaternion, Vector3<f64>)> {
    let (lineno, line) = data_lines(text)
        .next()
        .ok_or_else(|| parse_error(0, "ground-truth file has no data line"))?;
    let v = parse_floats(line, lineno, 7, "w x y z tx ty tz")?;
    let q = Quaternion::new(v[0], v[1], v[2], v[3]);
    if (q.norm() - 1.0).abs() > GROUND_TRUTH_NORM_TOL {
        return Err(parse_error(
            lineno,
            format!("quaternion norm {} is not within {GROUND_TRUTH_NORM_TOL} of 1", q.norm()),
        ));
    }
    Ok((q.normalized()?, Vector3::new(v[4], v[5], v[6])))
}

pub fn write_ground_truth(q: Quaternion, t: &Vector3<f64>) -> String {
    let [w, x, y, z] = q.to_array();
    format!(
        "# w x y z tx ty tz\n{} {} {} {} {} {} {}\n",
        fmt_f64(w),
        fmt_f64(x),
        fmt_f64(y),
        fmt_f64(z),
        fmt_f64(t.x),
        fmt_f64(t.y),
        fmt_f64(t.z)
    )
}

/// One candidate as written by `quest estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateJson {
    pub rank: usize,
    /// `[w, x, y, z]`.
    pub quaternion: [f64; 4],
    pub translation: [f64; 3],
    pub depths_u: Vec<f64>,
    pub depths_v: Vec<f64>,
    pub residual: f64,
    pub chirality_ok: bool,
    pub scale_note: ScaleNote,
    pub translation_depth_ratio: f64,
    pub depth_ambiguous: bool,
}

impl CandidateJson {
    pub fn from_candidate(rank: usize, c: &PoseCandidate) -> Self {
        CandidateJson {
            rank,
            quaternion: c.q.to_array(),
            translation: [c.t.x, c.t.y, c.t.z],
            depths_u: c.depths_u.clone(),
            depths_v: c.depths_v.clone(),
            residual: c.algebraic_residual,
            chirality_ok: c.chirality_ok,
            scale_note: c.scale_note,
            translation_depth_ratio: c.translation_depth_ratio,
            depth_ambiguous: c.depth_ambiguous,
        }
    }

    pub fn quaternion(&self) -> Quaternion {
        Quaternion::from_array(self.quaternion)
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::from(self.translation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacJson {
    pub threshold: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub inliers: Vec<bool>,
    pub inlier_count: usize,
}

/// Output of `quest estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    pub n_points: usize,
    pub candidates: Vec<CandidateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ransac: Option<RansacJson>,
}

impl EstimateReport {
    pub fn from_candidates(method: Method, n_points: usize, cands: &[PoseCandidate]) -> Self {
        EstimateReport {
            method,
            n_points,
            candidates: cands
                .iter()
                .enumerate()
                .map(|(i, c)| CandidateJson::from_candidate(i, c))
                .collect(),
            ransac: None,
        }
    }

    pub fn from_ransac(method: Method, params: &RansacParams, res: &RansacResult) -> Self {
        EstimateReport {
            method,
            n_points: res.inliers.len(),
            candidates: vec![CandidateJson::from_candidate(0, &res.candidate)],
            ransac: Some(RansacJson {
                threshold: params.threshold,
                max_iters: params.max_iters,
                seed: params.seed,
                inlier_count: res.inlier_count(),
                inliers: res.inliers.clone(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMetrics {
    pub rank: usize,
    pub rot_error: f64,
    pub trans_error: f64,
    pub best: bool,
}

/// Output of `quest eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub candidates: Vec<CandidateMetrics>,
    /// Rank of the candidate with the smallest rotation error.
    pub best_rank: Option<usize>,
}

impl MetricsReport {
    pub fn evaluate(report: &EstimateReport, q_star: Quaternion, t_star: &Vector3<f64>) -> Result<Self> {
        let mut candidates = report
            .candidates
            .iter()
            .map(|c| {
                Ok(CandidateMetrics {
                    rank: c.rank,
                    rot_error: crate::geometry::rot_error(c.quaternion(), q_star),
                    trans_error: crate::geometry::trans_error(&c.translation(), t_star)?,
                    best: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let best = candidates
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.rot_error.total_cmp(&b.1.rot_error))
            .map(|(i, _)| i);
        if let Some(i) = best {
            candidates[i].best = true;
        }
        Ok(MetricsReport {
            best_rank: best.map(|i| candidates[i].rank),
            candidates,
        })
    }
}
