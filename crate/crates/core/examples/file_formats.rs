//! Round trip through the text formats: write a scene, read it back, estimate and score.

use quest::bench::{generate_scene, SceneConfig, SyntheticCamera};
use quest::formats::{
    parse_calibration, parse_correspondences, parse_ground_truth, write_calibration,
    write_correspondences, write_ground_truth, EstimateReport, MetricsReport,
};
use quest::solver::{estimate_pose, Method};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = generate_scene(&SceneConfig::default().with_seed(9))?;
    let calib = SyntheticCamera::default().calibration();

    let corr_text = write_correspondences(&scene.correspondences, Some(&calib));
    let calib_text = write_calibration(&calib);
    let truth_text = write_ground_truth(scene.q, &scene.t);
    print!("{}", corr_text.lines().take(3).map(|l| format!("{l}\n")).collect::<String>());

    let calib = parse_calibration(&calib_text)?;
    let points = parse_correspondences(&corr_text)?.correspondences(Some(&calib))?;
    let candidates = estimate_pose(&points, Method::Quest6)?;
    let report = EstimateReport::from_candidates(Method::Quest6, points.len(), &candidates);
    let json = serde_json::to_string_pretty(&report)?;

    let (q, t) = parse_ground_truth(&truth_text)?;
    let metrics = MetricsReport::evaluate(&serde_json::from_str(&json)?, q, &t)?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    assert_eq!(metrics.best_rank, Some(0));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
