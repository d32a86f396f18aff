//! Points on a plane: QuEst 6 still finds the pose among its candidates, QuEst 7 reports
//! a critical surface and the eight-point algorithm loses the rotation.

use quest::bench::{generate_scene, Geometry, SceneConfig};
use quest::error::Error;
use quest::geometry::rot_error;
use quest::solver::{estimate_pose, Method};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SceneConfig::default()
        .with_seed(3)
        .with_points(8)
        .with_geometry(Geometry::Coplanar);
    let scene = generate_scene(&cfg)?;
    let points = &scene.correspondences;

    let quest6 = estimate_pose(&points[..6], Method::Quest6)?;
    for (rank, c) in quest6.iter().enumerate() {
        println!(
            "quest6 #{rank} rot_error {:.2e} chirality {}",
            rot_error(c.q, scene.q),
            c.chirality_ok
        );
    }
    assert!(quest6.iter().any(|c| rot_error(c.q, scene.q) < 1e-6));

    match estimate_pose(&points[..7], Method::Quest7) {
        Err(e @ Error::CriticalSurface { .. }) => println!("quest7: {e}"),
        other => return Err(format!("expected a critical surface, got {other:?}").into()),
    }

    match estimate_pose(points, Method::EightPoint) {
        Ok(c) => println!("eightpt rot_error {:.2e}", rot_error(c[0].q, scene.q)),
        Err(e) => println!("eightpt: {e}"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
