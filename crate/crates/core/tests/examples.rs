//! Every example runs to completion.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(estimate_pose, "../examples/estimate_pose.rs");
example!(coplanar_scene, "../examples/coplanar_scene.rs");
example!(ransac_outliers, "../examples/ransac_outliers.rs");
example!(eight_point_baseline, "../examples/eight_point_baseline.rs");
example!(noise_benchmark, "../examples/noise_benchmark.rs");
example!(timing_benchmark, "../examples/timing_benchmark.rs");
example!(polynomial_determinant, "../examples/polynomial_determinant.rs");
example!(file_formats, "../examples/file_formats.rs");
