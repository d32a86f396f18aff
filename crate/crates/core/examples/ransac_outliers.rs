//! RANSAC over six-point samples separates gross mismatches from noisy inliers.

use quest::bench::{add_pixel_noise, generate_scene, SceneConfig, SyntheticCamera};
use quest::geometry::{rot_error, Correspondence};
use quest::solver::{ransac_pose, Method, RansacParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = generate_scene(&SceneConfig::default().with_seed(21).with_points(30))?;
    let cam = SyntheticCamera::default();
    let mut points = add_pixel_noise(&scene.correspondences, 0.5, &cam, 1);

    // every fifth match points somewhere random in the second view
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for c in points.iter_mut().skip(4).step_by(5) {
        *c = Correspondence::new(c.m.x, c.m.y, rng.random_range(-0.6..0.6), rng.random_range(-0.5..0.5));
    }

    let params = RansacParams {
        max_iters: 300,
        seed: 5,
        ..RansacParams::default()
    };
    let result = ransac_pose(&points, Method::Quest6, &params)?;
    let rejected: Vec<usize> = (0..points.len()).filter(|&i| !result.inliers[i]).collect();
    println!("{} inliers, rejected {rejected:?}", result.inlier_count());
    println!("rot_error {:.2e}", rot_error(result.candidate.q, scene.q));
    assert!(rot_error(result.candidate.q, scene.q) < 0.01);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
