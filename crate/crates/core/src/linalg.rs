//! Dense linear algebra helpers on top of nalgebra's SVD and Schur decompositions.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(sv_desc: &[f64], rel_tol: f64) -> usize {
    let max = sv_desc.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sv_desc.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Ratio between the last retained and first dropped singular value at `rank`
/// (infinite when the dropped one is exactly zero, 1 when nothing is dropped).
pub fn singular_gap(sv_desc: &[f64], rank: usize) -> f64 {
    if rank == 0 || rank >= sv_desc.len() {
        return 1.0;
    }
    let (kept, dropped) = (sv_desc[rank - 1], sv_desc[rank]);
    if dropped > 0.0 {
        kept / dropped
    } else {
        f64::INFINITY
    }
}

/// Moore-Penrose pseudo-inverse; singular values below `rel_tol * sigma_max` count as zero.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not produce U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not produce V^T".into()))?;
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tol * max;
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (v_t.row(i).transpose() / s) * u.column(i).transpose();
        }
    }
    Ok(out)
}

/// Approximate null vector with the singular values that qualify it.
#[derive(Debug, Clone)]
pub struct NullVector {
    pub vector: DVector<f64>,
    pub smallest: f64,
    pub second: f64,
    pub largest: f64,
}

/// Right singular vector of the smallest singular value.
///
/// Wide matrices are padded with zero rows so the full right singular basis exists.
pub fn null_vector(m: &DMatrix<f64>) -> Result<NullVector> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not produce V^T".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let smallest = order[0];
    let second = order.get(1).map(|&i| sv[i]).unwrap_or(f64::INFINITY);
    Ok(NullVector {
        vector: v_t.row(smallest).transpose(),
        smallest: sv[smallest],
        second,
        largest: sv[*order.last().unwrap_or(&smallest)],
    })
}

/// Eigenvalues of a real square matrix via the real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let schur = nalgebra::Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// One eigenpair; the vector is unit-norm with its largest entry rotated onto the
/// positive real axis.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex<f64>,
    pub vector: DVector<Complex<f64>>,
}

impl EigenPair {
    pub fn real_part(&self) -> DVector<f64> {
        self.vector.map(|c| c.re)
    }

    /// `||Im v|| / ||Re v||`.
    pub fn imaginary_ratio(&self) -> f64 {
        let re = self.vector.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        let im = self.vector.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        if re > 0.0 {
            im / re
        } else {
            f64::INFINITY
        }
    }
}

/// Eigenpairs of a real square matrix. Complex-conjugate pairs are reported once (the
/// member with non-negative imaginary part). Each eigenvector is the null vector of
/// `M - lambda I`.
pub fn eigenpairs(m: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidArgument("eigenpairs of a non-square matrix".into()));
    }
    let values = eigenvalues(m)?;
    let mut out = Vec::with_capacity(values.len());
    for value in values {
        if value.im < 0.0 {
            continue;
        }
        let vector = if value.im == 0.0 {
            let shifted = m - DMatrix::identity(n, n) * value.re;
            null_vector(&shifted)?.vector.map(|c| Complex::new(c, 0.0))
        } else {
            complex_null_vector(m, value)?
        };
        out.push(EigenPair {
            value,
            vector: phase_normalize(vector),
        });
    }
    Ok(out)
}

fn complex_null_vector(m: &DMatrix<f64>, value: Complex<f64>) -> Result<DVector<Complex<f64>>> {
    let n = m.nrows();
    let shifted = DMatrix::from_fn(n, n, |r, c| {
        let base = Complex::new(m[(r, c)], 0.0);
        if r == c {
            base - value
        } else {
            base
        }
    });
    let svd = shifted.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("complex SVD did not produce V^T".into()))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Numerical("empty SVD".into()))?;
    // rows of V^H are conjugated right singular vectors
    Ok(v_t.row(idx).transpose().map(|c| c.conj()))
}

fn phase_normalize(v: DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or(Complex::new(1.0, 0.0));
    if norm == 0.0 || pivot.norm() == 0.0 {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    v.map(|c| c * phase / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_full_rank_is_left_inverse() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 7.0]);
        let p = pinv(&a, 1e-10).unwrap();
        assert!((p * &a - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn pinv_drops_tiny_singular_values() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        let p = pinv(&a, 1e-10).unwrap();
        assert_eq!(p[(1, 1)], 0.0);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_vector_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let nv = null_vector(&a).unwrap();
        assert!(nv.smallest < 1e-15);
        assert_eq!(nv.largest, 1.0);
        assert!((nv.vector[2].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_and_gap() {
        let sv = [10.0, 5.0, 1e-13, 0.0];
        assert_eq!(numerical_rank(&sv, 1e-10), 2);
        assert!((singular_gap(&sv, 2) - 5e13).abs() < 1.0);
        assert_eq!(singular_gap(&sv, 4), 1.0);
    }

    #[test]
    fn eigenpairs_of_rotation_block() {
        // eigenvalues 2 and +-i
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        let pairs = eigenpairs(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            let mv = m.map(|c| Complex::new(c, 0.0)) * &p.vector;
            assert!((mv - &p.vector * p.value).norm() < 1e-12);
        }
        let real = pairs.iter().find(|p| p.value.im == 0.0).unwrap();
        assert!(real.imaginary_ratio() < 1e-12);
        assert!((real.real_part()[0].abs() - 1.0).abs() < 1e-12);
        let complex = pairs.iter().find(|p| p.value.im != 0.0).unwrap();
        assert!(complex.imaginary_ratio() > 0.5);
    }
}
