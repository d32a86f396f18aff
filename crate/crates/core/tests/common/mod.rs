//! Helpers shared by the integration tests. Everything here is computed numerically,
//! independently of the symbolic polynomial path.
#![allow(dead_code)]

use nalgebra::{Matrix6, Vector3};
use quest::geometry::{Correspondence, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit quaternion.
pub fn random_unit_quaternion(rng: &mut impl Rng) -> Quaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return Quaternion::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
        }
    }
}

/// Correspondence with both image points drawn uniformly from `[-1, 1]^2`.
pub fn random_correspondence(rng: &mut impl Rng) -> Correspondence {
    let mut c = || rng.random_range(-1.0..1.0);
    Correspondence::new(c(), c(), c(), c())
}

/// The 6x6 triple matrix evaluated directly from the rotation matrix of `q`.
pub fn numeric_triple_matrix(q: Quaternion, c: [&Correspondence; 3]) -> Matrix6<f64> {
    let r = q.to_rotation().unwrap();
    let rm: Vec<Vector3<f64>> = c.iter().map(|p| r * p.m).collect();
    let mut a = Matrix6::zeros();
    for (row, rm0) in rm[0].iter().enumerate() {
        for (block, other) in [1usize, 2].into_iter().enumerate() {
            let i = 3 * block + row;
            a[(i, 0)] = *rm0;
            a[(i, 1)] = -c[0].n[row];
            a[(i, 2 * other)] = -rm[other][row];
            a[(i, 2 * other + 1)] = c[other].n[row];
        }
    }
    a
}

/// Product of row norms: an upper bound on `|det|` used as the comparison scale.
pub fn hadamard_bound(a: &Matrix6<f64>) -> f64 {
    a.row_iter().map(|r| r.norm()).product()
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

pub fn median(v: &[f64]) -> f64 {
    quest::bench::quantile(v, 0.5)
}
