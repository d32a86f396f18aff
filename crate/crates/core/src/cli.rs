//! The `quest` command-line tool.
//!
//! Exit codes: 0 on success, 1 for usage, file and input errors, 2 when the geometry of
//! the input defeats the chosen solver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    generate_scene, add_pixel_noise, run_noise_benchmark, run_time_benchmark, summarize,
    BenchRecord, Geometry, NoiseBenchConfig, SceneConfig, SyntheticCamera, TimeBenchConfig,
};
use crate::error::Error;
use crate::formats::{
    fmt_f64, parse_calibration, parse_correspondences, parse_ground_truth, write_calibration,
    write_correspondences, write_ground_truth, EstimateReport, MetricsReport,
};
use crate::solver::{estimate_pose, ransac_pose, Method, RansacParams};

#[derive(Debug, Parser)]
#[command(name = "quest", version, about = "Relative pose from two views with quaternion solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the relative pose from a correspondence file.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo noise or timing benchmark.
    Bench(BenchArgs),
    /// Score an estimate file against a ground-truth pose.
    Eval(EvalArgs),
    /// Write a synthetic scene: correspondences, calibration and ground truth.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Correspondence file (`x1 y1 x2 y2` per line).
    pub input: PathBuf,
    /// Calibration file (`fx fy cx cy skew`), required for pixel input.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    #[arg(long, default_value = "quest6")]
    pub method: Method,
    /// Run RANSAC over minimal subsets instead of a single solve.
    #[arg(long)]
    pub ransac: bool,
    /// RANSAC inlier threshold in radians.
    #[arg(long, default_value_t = 0.005)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, env = "QUEST_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output JSON path (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchKind {
    Noise,
    Time,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub kind: BenchKind,
    /// JSON config; flags given explicitly override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Comma-separated noise levels in pixels.
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    /// Noise grid `start:stop:step` in pixels (inclusive).
    #[arg(long, conflicts_with = "sigmas")]
    pub sigma_range: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub geometry: Option<Geometry>,
    #[arg(long, env = "QUEST_SEED")]
    pub seed: Option<u64>,
    /// Data CSV; the summary goes next to it with a `_summary` suffix.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON written by `quest estimate`.
    pub estimates: PathBuf,
    /// Ground-truth file (`w x y z tx ty tz`).
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory receiving correspondences.txt, calibration.txt and ground_truth.txt.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long, default_value = "general")]
    pub geometry: Geometry,
    /// Pixel noise added to both views.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Write normalized coordinates instead of pixels.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long, env = "QUEST_SEED", default_value_t = 0)]
    pub seed: u64,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Core(Error),
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_degeneracy() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "io-error: {}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{}: {e}", e.name()),
            CliError::Config(msg) => write!(f, "invalid-config: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Attaches the file name to parse errors.
fn in_file(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Parse { line, message } => CliError::Core(Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        }),
        other => CliError::Core(other),
    }
}

fn emit(output: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(p) => write(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn cmd_estimate(args: &EstimateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = parse_correspondences(&read(&args.input)?).map_err(in_file(&args.input))?;
    let calib = match &args.calib {
        Some(p) => Some(parse_calibration(&read(p)?).map_err(in_file(p))?),
        None => None,
    };
    let points = file.correspondences(calib.as_ref())?;
    let report = if args.ransac {
        let params = RansacParams {
            threshold: args.threshold,
            max_iters: args.iters,
            seed: args.seed,
        };
        let res = ransac_pose(&points, args.method, &params)?;
        EstimateReport::from_ransac(args.method, &params, &res)
    } else {
        let cands = estimate_pose(&points, args.method)?;
        EstimateReport::from_candidates(args.method, points.len(), &cands)
    };
    emit(args.output.as_deref(), &to_json(&report), stdout)
}

pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report: EstimateReport = serde_json::from_str(&read(&args.estimates)?).map_err(|e| {
        CliError::Core(Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", args.estimates.display()),
        })
    })?;
    let (q, t) = parse_ground_truth(&read(&args.truth)?).map_err(in_file(&args.truth))?;
    let metrics = MetricsReport::evaluate(&report, q, &t)?;
    emit(args.output.as_deref(), &to_json(&metrics), stdout)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = SceneConfig {
        n_points: args.points,
        geometry: args.geometry,
        rng_seed: args.seed,
        ..SceneConfig::default()
    };
    let scene = generate_scene(&cfg)?;
    let cam = SyntheticCamera::default();
    let points = add_pixel_noise(&scene.correspondences, args.sigma, &cam, args.seed ^ 0x5EED);
    let calib = cam.calibration();
    fs::create_dir_all(&args.output).map_err(|source| CliError::Io {
        path: args.output.clone(),
        source,
    })?;
    let corr = write_correspondences(&points, (!args.normalized).then_some(&calib));
    write(&args.output.join("correspondences.txt"), &corr)?;
    write(&args.output.join("calibration.txt"), &write_calibration(&calib))?;
    write(&args.output.join("ground_truth.txt"), &write_ground_truth(scene.q, &scene.t))
}

/// Parses `start:stop:step` into an inclusive grid.
fn parse_sigma_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("sigma range '{s}' is not start:stop:step"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && stop >= start) {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
    }
}

fn records_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("method,sigma_px,trial,rot_err,trans_err,runtime_s,failed\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            fmt_f64(r.sigma_px),
            r.trial,
            fmt_f64(r.rot_err),
            fmt_f64(r.trans_err),
            fmt_f64(r.runtime_s),
            r.failed
        ));
    }
    out
}

fn noise_summary_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(
        "method,sigma_px,trials,failures,rot_q1,rot_median,rot_q3,trans_q1,trans_median,trans_q3,mean_runtime_s\n",
    );
    for r in summarize(records) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            fmt_f64(r.sigma_px),
            r.trials,
            r.failures,
            fmt_f64(r.rot_q1),
            fmt_f64(r.rot_median),
            fmt_f64(r.rot_q3),
            fmt_f64(r.trans_q1),
            fmt_f64(r.trans_median),
            fmt_f64(r.trans_q3),
            fmt_f64(r.mean_runtime_s)
        ));
    }
    out
}

/// `out.csv` -> `out_summary.csv`.
pub fn summary_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = output
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    output.with_file_name(format!("{stem}_summary.{ext}"))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let sigmas = match (&args.sigmas, &args.sigma_range) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(r)) => Some(parse_sigma_range(r)?),
        _ => None,
    };
    let (data, summary) = match args.kind {
        BenchKind::Noise => {
            let mut cfg: NoiseBenchConfig = load_config(args.config.as_deref())?;
            if let Some(m) = &args.methods {
                cfg.methods = m.clone();
            }
            if let Some(s) = sigmas {
                cfg.sigmas = s;
            }
            if let Some(t) = args.trials {
                cfg.trials = t;
            }
            if let Some(n) = args.points {
                cfg.scene.n_points = n;
            }
            if let Some(g) = args.geometry {
                cfg.scene.geometry = g;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            let records = run_noise_benchmark(&cfg)?;
            (records_csv(&records), noise_summary_csv(&records))
        }
        BenchKind::Time => {
            let mut cfg: TimeBenchConfig = load_config(args.config.as_deref())?;
            if let Some(m) = &args.methods {
                cfg.methods = m.clone();
            }
            if let Some(s) = sigmas {
                cfg.sigmas = s;
            }
            if let Some(t) = args.trials {
                cfg.trials = t;
            }
            if let Some(n) = args.points {
                cfg.scene.n_points = n;
            }
            if args.geometry.is_some() {
                return Err(CliError::Config(
                    "the time benchmark always mixes general and coplanar scenes".into(),
                ));
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            let (records, summaries) = run_time_benchmark(&cfg)?;
            let mut summary = String::from("method,runs,failures,mean_runtime_s,median_runtime_s\n");
            for s in summaries {
                summary.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.method,
                    s.runs,
                    s.failures,
                    fmt_f64(s.mean_s),
                    fmt_f64(s.median_s)
                ));
            }
            (records_csv(&records), summary)
        }
    };
    write(&args.output, &data)?;
    write(&summary_path(&args.output), &summary)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, stdout),
        Command::Bench(a) => cmd_bench(a),
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code. Diagnostics go
/// to `stderr` as `<error-name>: <message>`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
