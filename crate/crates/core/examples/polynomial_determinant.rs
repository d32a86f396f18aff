//! One row of the coefficient matrix: the symbolic determinant of a point triple, the
//! norm factor divided out, and the quartic that vanishes at the true rotation.

use quest::bench::{generate_scene, SceneConfig};
use quest::coeffs::{build_triple_matrix, coefficient_row};
use quest::monomial::monomial_vector;
use quest::poly::{poly_div_exact, Poly4};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = generate_scene(&SceneConfig::default().with_seed(2).with_points(3))?;
    let [a, b, c] = [scene.correspondences[0], scene.correspondences[1], scene.correspondences[2]];

    let det = build_triple_matrix(&a, &b, &c).det()?;
    println!("det has {} terms of degree {:?}", det.len(), det.degree());

    let (quartic, remainder) = poly_div_exact(&det, &Poly4::norm_squared())?;
    println!("after dividing by w^2+x^2+y^2+z^2: {} terms, relative remainder {remainder:.2e}", quartic.len());

    let row = coefficient_row(&a, &b, &c)?;
    let x = monomial_vector(&scene.q);
    let value: f64 = row.iter().zip(x.iter()).map(|(r, m)| r * m).sum();
    println!("row . x(q*) = {value:.2e}");
    assert!(value.abs() < 1e-12);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
