//! Synthetic scenes and the Monte Carlo benchmark protocol.

mod runner;
mod scene;

pub use runner::*;
pub use scene::*;
