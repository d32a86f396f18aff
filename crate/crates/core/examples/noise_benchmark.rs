//! A small Monte Carlo noise sweep with per-method quartiles.

use quest::bench::{run_noise_benchmark, summarize, NoiseBenchConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NoiseBenchConfig {
        sigmas: vec![0.0, 1.0, 4.0],
        trials: 10,
        seed: 1,
        ..NoiseBenchConfig::default()
    };
    let records = run_noise_benchmark(&cfg)?;
    println!("{:<8} {:>5} {:>10} {:>10} {:>8}", "method", "sigma", "rot_med", "trans_med", "failed");
    for row in summarize(&records) {
        println!(
            "{:<8} {:>5.1} {:>10.2e} {:>10.2e} {:>8}",
            row.method.to_string(),
            row.sigma_px,
            row.rot_median,
            row.trans_median,
            row.failures
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
