pub mod baseline;
pub mod bench;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod linalg;
pub mod monomial;
pub mod poly;
pub mod solver;
