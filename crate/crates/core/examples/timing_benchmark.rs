//! Solve times over a mix of general and coplanar scenes.

use quest::bench::{run_time_benchmark, TimeBenchConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TimeBenchConfig {
        trials: 20,
        warmup: 2,
        ..TimeBenchConfig::default()
    };
    let (_, summaries) = run_time_benchmark(&cfg)?;
    for s in summaries {
        println!(
            "{:<8} mean {:>9.3} ms  median {:>9.3} ms  failures {}",
            s.method.to_string(),
            s.mean_s * 1e3,
            s.median_s * 1e3,
            s.failures
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
