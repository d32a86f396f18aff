//! The coefficient matrix `A` of the quartic system `A x(q) = 0`.
//!
//! Every triple of correspondences `(i, j, k)` yields one quartic in the quaternion:
//! subtracting the rigid-motion constraint of `j` and `k` from that of `i` removes the
//! translation, the six depths then form a null vector of a 6x6 matrix whose
//! determinant is a sextic divisible by `w^2 + x^2 + y^2 + z^2`. The quotient's
//! coefficients, in canonical monomial order, form one row of `A`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Correspondence;
use crate::monomial::{monomial_vector, MonomialIndex, NUM_MONOMIALS};
use crate::poly::{poly_div_exact, Poly4, PolyMatrix};

/// Maximum relative remainder accepted after dividing out the norm factor.
pub const DIVISION_TOLERANCE: f64 = 1e-6;
/// Rows whose coefficients are all below this (before normalization) are degenerate.
pub const ZERO_ROW_TOLERANCE: f64 = 1e-12;
/// Entries below this magnitude are skipped when choosing a row's sign.
const SIGN_EPS: f64 = 1e-12;
/// Row counts above this are built in parallel.
const PARALLEL_ROWS: usize = 64;

/// Entries of `R(q)` as quadratic forms in `(w, x, y, z)`.
pub fn rotation_polys() -> &'static [[Poly4; 3]; 3] {
    static R: OnceLock<[[Poly4; 3]; 3]> = OnceLock::new();
    R.get_or_init(|| {
        let sq = |i: usize| {
            let mut e = [0u8; 4];
            e[i] = 2;
            e
        };
        let pair = |i: usize, j: usize| {
            let mut e = [0u8; 4];
            e[i] += 1;
            e[j] += 1;
            e
        };
        let diag = |signs: [f64; 4]| Poly4::from_terms((0..4).map(|i| (sq(i), signs[i])));
        let off = |a: (usize, usize), b: (usize, usize), sb: f64| {
            Poly4::from_terms([(pair(a.0, a.1), 2.0), (pair(b.0, b.1), 2.0 * sb)])
        };
        const W: usize = 0;
        const X: usize = 1;
        const Y: usize = 2;
        const Z: usize = 3;
        [
            [
                diag([1.0, 1.0, -1.0, -1.0]),
                off((X, Y), (W, Z), -1.0),
                off((X, Z), (W, Y), 1.0),
            ],
            [
                off((X, Y), (W, Z), 1.0),
                diag([1.0, -1.0, 1.0, -1.0]),
                off((Y, Z), (W, X), -1.0),
            ],
            [
                off((X, Z), (W, Y), -1.0),
                off((Y, Z), (W, X), 1.0),
                diag([1.0, -1.0, -1.0, 1.0]),
            ],
        ]
    })
}

/// `R(q) v` as three quadratic polynomials, with `sign` applied.
fn rotate_symbolic(v: &Vector3<f64>, sign: f64) -> [Poly4; 3] {
    let r = rotation_polys();
    std::array::from_fn(|row| {
        let mut p = Poly4::zero();
        for (col, entry) in r[row].iter().enumerate() {
            p.add_assign_scaled(entry, sign * v[col]);
        }
        p
    })
}

/// The 6x6 matrix whose null vector is `(u_i, v_i, u_j, v_j, u_k, v_k)`.
///
/// Rows 0..3 encode `u_i R m_i - v_i n_i - u_j R m_j + v_j n_j = 0`, rows 3..6 the same
/// with `k` in place of `j`.
pub fn build_triple_matrix(
    ci: &Correspondence,
    cj: &Correspondence,
    ck: &Correspondence,
) -> PolyMatrix {
    triple_matrix_from_rays([(&ci.m, &ci.n), (&cj.m, &cj.n), (&ck.m, &ck.n)])
}

/// Same as [`build_triple_matrix`] for arbitrary (not necessarily `z = 1`) rays.
pub(crate) fn triple_matrix_from_rays(rays: [(&Vector3<f64>, &Vector3<f64>); 3]) -> PolyMatrix {
    let [(mi, ni), (mj, nj), (mk, nk)] = rays;
    let rmi = rotate_symbolic(mi, 1.0);
    let rmj = rotate_symbolic(mj, -1.0);
    let rmk = rotate_symbolic(mk, -1.0);
    let mut m = PolyMatrix::zeros(6, 6);
    for r in 0..3 {
        for (block, (rm_other, n_other, col)) in [(&rmj, nj, 2usize), (&rmk, nk, 4)]
            .into_iter()
            .enumerate()
        {
            let row = 3 * block + r;
            m.set(row, 0, rmi[r].clone());
            m.set(row, 1, Poly4::constant(-ni[r]));
            m.set(row, col, rm_other[r].clone());
            m.set(row, col + 1, Poly4::constant(n_other[r]));
        }
    }
    m
}

/// Sign convention: the first entry with magnitude above `SIGN_EPS` is positive.
fn canonicalize_sign(row: &mut [f64]) {
    if let Some(first) = row.iter().find(|c| c.abs() > SIGN_EPS) {
        if *first < 0.0 {
            row.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

fn quartic_row(rays: [(&Vector3<f64>, &Vector3<f64>); 3], triple: [usize; 3]) -> Result<[f64; NUM_MONOMIALS]> {
    let det = triple_matrix_from_rays(rays).det()?;
    let (quotient, rem) = poly_div_exact(&det, &Poly4::norm_squared())?;
    if rem > DIVISION_TOLERANCE {
        return Err(Error::DegenerateTriple {
            triple,
            reason: format!("norm factor leaves relative remainder {rem:.3e}"),
        });
    }
    let index = MonomialIndex::quartic();
    let mut row = [0.0; NUM_MONOMIALS];
    for (e, c) in quotient.terms() {
        // any non-quartic term is numerical residue of the division
        if let Some(pos) = index.position(e) {
            row[pos] = *c;
        }
    }
    let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
    if row.iter().all(|c| c.abs() < ZERO_ROW_TOLERANCE) || !norm.is_finite() {
        return Err(Error::DegenerateTriple {
            triple,
            reason: "coefficient row vanishes".into(),
        });
    }
    row.iter_mut().for_each(|c| *c /= norm);
    canonicalize_sign(&mut row);
    Ok(row)
}

/// Unit-norm, sign-canonical quartic coefficient row of one triple.
pub fn coefficient_row(
    ci: &Correspondence,
    cj: &Correspondence,
    ck: &Correspondence,
) -> Result<[f64; NUM_MONOMIALS]> {
    quartic_row([(&ci.m, &ci.n), (&cj.m, &cj.n), (&ck.m, &ck.n)], [0, 1, 2])
}

/// All index triples `i < j < k` of `n` points in lexicographic order.
pub fn triples(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) * n.saturating_sub(2) / 6);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// Stacked coefficient rows, one per point triple, columns in canonical monomial order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub a: DMatrix<f64>,
    pub triples: Vec<[usize; 3]>,
}

impl CoefficientMatrix {
    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    /// `||A x(q)||` for a quaternion (assumed unit norm).
    pub fn residual(&self, q: &crate::geometry::Quaternion) -> f64 {
        let x = monomial_vector(q);
        (&self.a * x).norm()
    }
}

/// Builds `A` from all `C(n, 3)` triples of the correspondences.
pub fn build_a(points: &[Correspondence]) -> Result<CoefficientMatrix> {
    if points.len() < 6 {
        return Err(Error::InsufficientPoints {
            needed: 6,
            got: points.len(),
        });
    }
    let rays: Vec<_> = points.iter().map(|c| (c.m, c.n)).collect();
    build_a_from_rays(&rays)
}

/// Same as [`build_a`] for arbitrary (not necessarily `z = 1`) bearing vectors.
pub fn build_a_from_rays(rays: &[(Vector3<f64>, Vector3<f64>)]) -> Result<CoefficientMatrix> {
    let triples = triples(rays.len());
    let make = |t: &[usize; 3]| {
        let [i, j, k] = *t;
        quartic_row(
            [
                (&rays[i].0, &rays[i].1),
                (&rays[j].0, &rays[j].1),
                (&rays[k].0, &rays[k].1),
            ],
            *t,
        )
    };
    let rows: Vec<[f64; NUM_MONOMIALS]> = if triples.len() > PARALLEL_ROWS {
        triples.par_iter().map(make).collect::<Result<_>>()?
    } else {
        triples.iter().map(make).collect::<Result<_>>()?
    };
    let a = DMatrix::from_fn(rows.len(), NUM_MONOMIALS, |r, c| rows[r][c]);
    Ok(CoefficientMatrix { a, triples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Quaternion;
    use nalgebra::Matrix3;

    fn worked_example_points() -> [Correspondence; 3] {
        [
            Correspondence::new(-0.1, -1.5, 0.2, -1.2),
            Correspondence::new(-2.3, 1.6, -2.0, 1.8),
            Correspondence::new(0.6, 0.9, 0.9, 1.1),
        ]
    }

    #[test]
    fn rotation_polys_match_numeric_rotation() {
        let q = Quaternion::new(0.3, -0.5, 0.7, 0.1).normalized().unwrap();
        let v = q.to_array();
        let r = q.to_rotation().unwrap();
        let sym = Matrix3::from_fn(|i, j| rotation_polys()[i][j].eval(&v));
        assert!((r - sym).abs().max() < 1e-15);
    }

    #[test]
    fn zero_motion_triple_has_all_ones_null_vector() {
        let pts = [
            Correspondence::new(0.1, 0.2, 0.1, 0.2),
            Correspondence::new(-0.4, 0.3, -0.4, 0.3),
            Correspondence::new(0.5, -0.6, 0.5, -0.6),
        ];
        let m = build_triple_matrix(&pts[0], &pts[1], &pts[2]).eval(&[1.0, 0.0, 0.0, 0.0]);
        let ones = nalgebra::DVector::from_element(6, 1.0);
        assert!((m * ones).norm() < 1e-15);
    }

    #[test]
    fn triple_matrix_column_degrees() {
        let [a, b, c] = worked_example_points();
        let m = build_triple_matrix(&a, &b, &c);
        for col in 0..6 {
            for row in 0..6 {
                let p = m.get(row, col);
                if p.is_zero() {
                    continue;
                }
                let expected = if col % 2 == 0 { 2 } else { 0 };
                assert_eq!(p.degree(), Some(expected), "entry ({row}, {col})");
            }
            let top = (0..6).any(|r| m.get(r, col).degree() == Some(2));
            assert_eq!(top, col % 2 == 0);
        }
    }

    #[test]
    fn worked_example_row_is_unit_and_quartic() {
        let [a, b, c] = worked_example_points();
        let row = coefficient_row(&a, &b, &c).unwrap();
        let norm: f64 = row.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(row.iter().filter(|c| c.abs() > 1e-12).count() > 20);
    }

    #[test]
    fn zero_motion_row_annihilates_identity() {
        let pts = [
            Correspondence::new(0.1, 0.2, 0.1, 0.2),
            Correspondence::new(-0.4, 0.3, -0.4, 0.3),
            Correspondence::new(0.5, -0.6, 0.5, -0.6),
        ];
        // with m = n the whole determinant vanishes at the identity; it must not be
        // identically zero though
        match coefficient_row(&pts[0], &pts[1], &pts[2]) {
            Ok(row) => assert!(row[0].abs() < 1e-9),
            Err(Error::DegenerateTriple { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn repeated_point_is_degenerate() {
        let p = Correspondence::new(0.1, 0.2, 0.3, 0.1);
        let q = Correspondence::new(-0.3, 0.5, -0.2, 0.4);
        let err = coefficient_row(&p, &p, &q).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriple { .. }));
    }

    #[test]
    fn triple_enumeration() {
        assert_eq!(triples(6).len(), 20);
        assert_eq!(triples(7).len(), 35);
        assert_eq!(triples(8).len(), 56);
        assert_eq!(triples(4), vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]);
    }

    #[test]
    fn build_a_needs_six_points() {
        let pts = vec![Correspondence::new(0.0, 0.0, 0.0, 0.0); 5];
        assert_eq!(
            build_a(&pts).unwrap_err(),
            Error::InsufficientPoints { needed: 6, got: 5 }
        );
    }
}
