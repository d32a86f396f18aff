//! The normalized eight-point algorithm: essential matrix, decomposition and chirality.

use quest::baseline::{decompose_essential, eight_point, EssentialMatrix};
use quest::bench::{generate_scene, SceneConfig};
use quest::geometry::{rot_error, trans_error};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = generate_scene(&SceneConfig::default().with_seed(4).with_points(12))?;
    let e = eight_point(&scene.correspondences)?;
    let worst = scene
        .correspondences
        .iter()
        .map(|c| e.epipolar_residual(c).abs())
        .fold(0.0, f64::max);
    println!("max |n^T E m| = {worst:.2e}");

    let truth = EssentialMatrix::from_pose(scene.q, &scene.t)?;
    let sign = if (e.matrix() - truth.matrix()).norm() < (e.matrix() + truth.matrix()).norm() { 1.0 } else { -1.0 };
    println!("distance to true E = {:.2e}", (e.matrix() - truth.matrix() * sign).norm());

    let pose = decompose_essential(&e, &scene.correspondences)?;
    println!(
        "rot_error {:.2e} trans_error {:.2e} |t| = {}",
        rot_error(pose.q, scene.q),
        trans_error(&pose.t, &scene.t)?,
        pose.t.norm()
    );
    assert!(rot_error(pose.q, scene.q) < 1e-6);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
