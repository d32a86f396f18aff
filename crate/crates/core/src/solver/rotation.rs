use nalgebra::{DMatrix, DVector};

use crate::coeffs::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::geometry::Quaternion;
use crate::linalg::{eigenpairs, numerical_rank, pinv, singular_gap, singular_values, EigenPair};
use crate::monomial::{MonomialIndex, Exponent, NUM_MONOMIALS, NUM_W_MONOMIALS};

/// Relative singular value cutoff for the pseudo-inverse and rank tests.
pub const PINV_TOLERANCE: f64 = 1e-10;
/// Eigenvectors with `||Im|| / ||Re||` above this are treated as complex.
pub const IMAGINARY_RATIO_TOL: f64 = 1e-6;

const SEVEN_POINT_SPLIT: usize = 4;
/// Rows of the 4x4 problem: `w x^3, x^4, x^3 y, x^3 z`.
const SEVEN_POINT_ROWS: [Exponent; 4] = [[1, 3, 0, 0], [0, 4, 0, 0], [0, 3, 1, 0], [0, 3, 0, 1]];

/// Which monomials form `x1` (kept) and `x2` (eliminated), and the eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
    pub lambda: &'static str,
}

impl SplitSpec {
    pub fn seven_point() -> Self {
        SplitSpec {
            x1: (0..SEVEN_POINT_SPLIT).collect(),
            x2: (SEVEN_POINT_SPLIT..NUM_MONOMIALS).collect(),
            lambda: "x^3/w^3",
        }
    }

    pub fn six_point() -> Self {
        SplitSpec {
            x1: (0..NUM_W_MONOMIALS).collect(),
            x2: (NUM_W_MONOMIALS..NUM_MONOMIALS).collect(),
            lambda: "x/w",
        }
    }

    pub fn blocks(&self, a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let a1 = a.columns(self.x1[0], self.x1.len()).into_owned();
        let a2 = a.columns(self.x2[0], self.x2.len()).into_owned();
        (a1, a2)
    }
}

/// Numerical rank of the eliminated block `A2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub expected: usize,
    /// `sigma_rank / sigma_{rank+1}`; 1 when `A2` has full column rank.
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

impl RankReport {
    fn of(a2: &DMatrix<f64>) -> Self {
        let sv = singular_values(a2);
        let rank = numerical_rank(&sv, PINV_TOLERANCE);
        RankReport {
            rank,
            expected: a2.ncols(),
            gap: singular_gap(&sv, rank),
            singular_values: sv,
        }
    }

    pub fn is_full(&self) -> bool {
        self.rank >= self.expected
    }
}

fn check_columns(a: &CoefficientMatrix, min_rows: usize) -> Result<()> {
    if a.a.ncols() != NUM_MONOMIALS {
        return Err(Error::InvalidArgument(format!(
            "coefficient matrix must have {NUM_MONOMIALS} columns, got {}",
            a.a.ncols()
        )));
    }
    if a.a.nrows() < min_rows {
        return Err(Error::InvalidArgument(format!(
            "coefficient matrix needs at least {min_rows} rows, got {}",
            a.a.nrows()
        )));
    }
    Ok(())
}

/// Rank of `A2` (35x31) in the seven-point split.
pub fn seven_point_rank(a: &CoefficientMatrix) -> RankReport {
    let (_, a2) = SplitSpec::seven_point().blocks(&a.a);
    RankReport::of(&a2)
}

/// Rank of `A2` (20x15) in the six-point split.
pub fn six_point_rank(a: &CoefficientMatrix) -> RankReport {
    let (_, a2) = SplitSpec::six_point().blocks(&a.a);
    RankReport::of(&a2)
}

/// Eigenvectors that are real up to [`IMAGINARY_RATIO_TOL`]; when fewer than two
/// qualify, the real parts of all of them.
fn real_eigenvectors(pairs: &[EigenPair]) -> Vec<DVector<f64>> {
    let real: Vec<_> = pairs
        .iter()
        .filter(|p| p.imaginary_ratio() < IMAGINARY_RATIO_TOL)
        .map(EigenPair::real_part)
        .collect();
    if real.len() >= 2 {
        real
    } else {
        pairs.iter().map(EigenPair::real_part).collect()
    }
}

/// Zero motion (`m = n` everywhere) leaves `A2` rank deficient, but the identity still
/// annihilates `A` exactly: `x(identity)` is the `w^4` unit vector.
fn identity_is_root(a: &CoefficientMatrix) -> bool {
    a.a.column(0).norm() <= PINV_TOLERANCE * a.a.norm()
}

/// Zero motion makes the identity a repeated root, whose eigenvectors are not isolated;
/// it is added explicitly whenever it solves `A x = 0`.
fn with_identity_root(a: &CoefficientMatrix, mut qs: Vec<Quaternion>) -> Vec<Quaternion> {
    if identity_is_root(a) {
        qs.insert(0, Quaternion::identity());
    }
    qs
}

/// Rotation candidates from a seven-point coefficient matrix (up to four, plus the
/// identity under zero motion).
///
/// Eliminates every monomial but `w^4, w^3 x, w^3 y, w^3 z` and reads off the 4x4
/// eigenproblem `B v = (x/w)^3 v` with `v = (w, x, y, z)`.
pub fn quest7_rotations(a: &CoefficientMatrix) -> Result<Vec<Quaternion>> {
    check_columns(a, NUM_MONOMIALS - SEVEN_POINT_SPLIT)?;
    let split = SplitSpec::seven_point();
    let (a1, a2) = split.blocks(&a.a);
    let report = RankReport::of(&a2);
    if !report.is_full() {
        if identity_is_root(a) {
            return Ok(vec![Quaternion::identity()]);
        }
        return Err(Error::CriticalSurface {
            rank: report.rank,
            expected: report.expected,
            gap: report.gap,
        });
    }
    let b_bar = -pinv(&a2, PINV_TOLERANCE)? * a1;
    let index = MonomialIndex::quartic();
    let b = DMatrix::from_fn(4, 4, |r, c| {
        let row = index
            .position(&SEVEN_POINT_ROWS[r])
            .expect("quartic monomial")
            - SEVEN_POINT_SPLIT;
        b_bar[(row, c)]
    });
    let pairs = eigenpairs(&b)?;
    let qs = real_eigenvectors(&pairs)
        .into_iter()
        .filter_map(|v| {
            Quaternion::new(v[0], v[1], v[2], v[3])
                .unit_canonical()
                .ok()
        })
        .collect();
    Ok(with_identity_root(a, qs))
}

/// The 20x20 six-point eigenproblem `B v = (x/w) v` over the cubic monomials `v`.
#[derive(Debug, Clone)]
pub struct SixPointSystem {
    pub b: DMatrix<f64>,
    /// `-A2^+ A1`, 15x20.
    pub b_bar: DMatrix<f64>,
    /// Rows of `B` that are unit selectors (the rest are rows of `b_bar`).
    pub selector_rows: Vec<usize>,
}

/// Builds the six-point eigenproblem from a coefficient matrix.
pub fn six_point_eigenmatrix(a: &CoefficientMatrix) -> Result<SixPointSystem> {
    check_columns(a, NUM_MONOMIALS - NUM_W_MONOMIALS)?;
    let (a1, a2) = SplitSpec::six_point().blocks(&a.a);
    let report = RankReport::of(&a2);
    if !report.is_full() {
        return Err(Error::DegenerateConfiguration(format!(
            "six-point A2 has rank {} < {}",
            report.rank, report.expected
        )));
    }
    let b_bar = -pinv(&a2, PINV_TOLERANCE)? * a1;
    let quartic = MonomialIndex::quartic();
    let cubic = MonomialIndex::cubic();
    let mut b = DMatrix::zeros(NUM_W_MONOMIALS, NUM_W_MONOMIALS);
    let mut selector_rows = Vec::new();
    for (row, e) in cubic.entries().iter().enumerate() {
        // x * v[row] as a quartic monomial
        let shifted = [e[0], e[1] + 1, e[2], e[3]];
        if shifted[0] > 0 {
            // = w * v[j] with v[j] = shifted / w
            let j = cubic
                .position(&[shifted[0] - 1, shifted[1], shifted[2], shifted[3]])
                .expect("cubic monomial");
            b[(row, j)] = 1.0;
            selector_rows.push(row);
        } else {
            let k = quartic.position(&shifted).expect("quartic monomial") - NUM_W_MONOMIALS;
            b.row_mut(row).copy_from(&b_bar.row(k));
        }
    }
    Ok(SixPointSystem {
        b,
        b_bar,
        selector_rows,
    })
}

/// Recovers `(w, x, y, z)` from a vector proportional to the cubic monomials.
///
/// `w` is the cube root of the `w^3` entry, with the overall sign fixed so that entry is
/// non-negative. Each other component `c` comes from whichever of `w^2 c` and `c^3` is
/// larger in magnitude: `w^2 c / w^2` or the signed cube root of `c^3`. Taking the cube
/// root of a small entry would turn roundoff of order 1e-17 into errors of order 1e-6.
pub fn quaternion_from_cubic(v: &DVector<f64>) -> Option<Quaternion> {
    let cubic = MonomialIndex::cubic();
    if v.len() != cubic.len() {
        return None;
    }
    let at = |e: Exponent| v[cubic.position(&e).expect("cubic monomial")];
    let sign = if at([3, 0, 0, 0]) < 0.0 { -1.0 } else { 1.0 };
    let w = (sign * at([3, 0, 0, 0])).max(0.0).cbrt();
    let mut comps = [w, 0.0, 0.0, 0.0];
    for (axis, comp) in comps.iter_mut().enumerate().skip(1) {
        let mut pure = [0u8; 4];
        pure[axis] = 3;
        let mut mixed = [2u8, 0, 0, 0];
        mixed[axis] = 1;
        let pure_v = sign * at(pure);
        let mixed_v = sign * at(mixed);
        *comp = if mixed_v.abs() >= pure_v.abs() && w > 0.0 {
            mixed_v / (w * w)
        } else {
            pure_v.cbrt()
        };
    }
    Quaternion::from_array(comps).unit_canonical().ok()
}

/// Rotation candidates from a six-point coefficient matrix (up to twenty).
pub fn quest6_rotations(a: &CoefficientMatrix) -> Result<Vec<Quaternion>> {
    let system = match six_point_eigenmatrix(a) {
        Ok(system) => system,
        Err(Error::DegenerateConfiguration(_)) if identity_is_root(a) => {
            return Ok(vec![Quaternion::identity()])
        }
        Err(e) => return Err(e),
    };
    let pairs = eigenpairs(&system.b)?;
    let qs = real_eigenvectors(&pairs)
        .iter()
        .filter_map(quaternion_from_cubic)
        .collect();
    Ok(with_identity_root(a, qs))
}
