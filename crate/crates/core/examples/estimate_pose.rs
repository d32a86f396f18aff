//! Recover the relative pose of a synthetic scene with both QuEst solvers.

use quest::bench::{generate_scene, SceneConfig};
use quest::geometry::{rot_error, trans_error};
use quest::solver::{estimate_pose, Method};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = generate_scene(&SceneConfig::default().with_seed(7).with_points(7))?;
    println!("true q = {:?}", scene.q.to_array());
    println!("true t = {:?} (unit {:?})", scene.t.as_slice(), scene.t.normalize().as_slice());

    for method in [Method::Quest6, Method::Quest7] {
        let candidates = estimate_pose(&scene.correspondences, method)?;
        println!("{method}: {} candidates", candidates.len());
        for (rank, c) in candidates.iter().enumerate() {
            println!(
                "  #{rank} residual {:.2e} chirality {} rot_error {:.2e} trans_error {:.2e}",
                c.algebraic_residual,
                c.chirality_ok,
                rot_error(c.q, scene.q),
                trans_error(&c.t, &scene.t)?,
            );
        }
        let best = &candidates[0];
        assert!(rot_error(best.q, scene.q) < 1e-6);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
