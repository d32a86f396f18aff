//! Canonical ordering of the monomials in `(w, x, y, z)`.
//!
//! Monomials of a fixed degree are listed in descending lexicographic order of their
//! exponent tuples, so the degree-4 list starts `w^4, w^3 x, w^3 y, w^3 z, w^2 x^2, ...`
//! and its first 20 entries are exactly the monomials divisible by `w`.

use std::sync::OnceLock;

use nalgebra::SVector;

use crate::geometry::Quaternion;

/// Exponents of `w, x, y, z`.
pub type Exponent = [u8; 4];

/// Number of degree-4 monomials in four variables.
pub const NUM_MONOMIALS: usize = 35;
/// Number of degree-4 monomials containing `w` (equivalently, degree-3 monomials).
pub const NUM_W_MONOMIALS: usize = 20;

/// Degree-4 monomial vector `x(q)` in canonical order.
pub type MonomialVector = SVector<f64, NUM_MONOMIALS>;

/// All monomials of total degree `degree`, descending lex order.
pub fn monomials_of_degree(degree: u8) -> Vec<Exponent> {
    let mut out = Vec::new();
    for a in (0..=degree).rev() {
        for b in (0..=degree - a).rev() {
            for c in (0..=degree - a - b).rev() {
                out.push([a, b, c, degree - a - b - c]);
            }
        }
    }
    out
}

/// Ordered index of the 35 degree-4 monomials with reverse lookup.
#[derive(Debug, Clone)]
pub struct MonomialIndex {
    entries: Vec<Exponent>,
}

impl MonomialIndex {
    fn build(degree: u8) -> Self {
        MonomialIndex {
            entries: monomials_of_degree(degree),
        }
    }

    /// The shared degree-4 index.
    pub fn quartic() -> &'static MonomialIndex {
        static INDEX: OnceLock<MonomialIndex> = OnceLock::new();
        INDEX.get_or_init(|| MonomialIndex::build(4))
    }

    /// The shared degree-3 index (the `v = x1 / w` vector of the six-point solver).
    pub fn cubic() -> &'static MonomialIndex {
        static INDEX: OnceLock<MonomialIndex> = OnceLock::new();
        INDEX.get_or_init(|| MonomialIndex::build(3))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Exponent] {
        &self.entries
    }

    pub fn exponent(&self, position: usize) -> Exponent {
        self.entries[position]
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        // descending lex order lets us binary search with the comparison reversed
        self.entries.binary_search_by(|probe| e.cmp(probe)).ok()
    }

    /// Evaluates every monomial at `q`.
    pub fn evaluate(&self, q: &[f64; 4]) -> Vec<f64> {
        self.entries.iter().map(|e| eval_monomial(e, q)).collect()
    }
}

pub fn eval_monomial(e: &Exponent, v: &[f64; 4]) -> f64 {
    e.iter()
        .zip(v)
        .map(|(&k, &x)| x.powi(k as i32))
        .product()
}

/// The degree-4 monomial vector of a quaternion.
pub fn monomial_vector(q: &Quaternion) -> MonomialVector {
    let v = q.to_array();
    MonomialVector::from_iterator(
        MonomialIndex::quartic()
            .entries()
            .iter()
            .map(|e| eval_monomial(e, &v)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn quartic_index_has_35_distinct_entries() {
        let idx = MonomialIndex::quartic();
        assert_eq!(idx.len(), NUM_MONOMIALS);
        let set: HashSet<_> = idx.entries().iter().collect();
        assert_eq!(set.len(), 35);
        assert!(idx.entries().iter().all(|e| e.iter().sum::<u8>() == 4));
    }

    #[test]
    fn leading_entries_match_the_seven_point_split() {
        let idx = MonomialIndex::quartic();
        assert_eq!(idx.exponent(0), [4, 0, 0, 0]);
        assert_eq!(idx.exponent(1), [3, 1, 0, 0]);
        assert_eq!(idx.exponent(2), [3, 0, 1, 0]);
        assert_eq!(idx.exponent(3), [3, 0, 0, 1]);
        assert_eq!(idx.exponent(34), [0, 0, 0, 4]);
    }

    #[test]
    fn first_twenty_contain_w() {
        let idx = MonomialIndex::quartic();
        for (i, e) in idx.entries().iter().enumerate() {
            assert_eq!(e[0] > 0, i < NUM_W_MONOMIALS, "{e:?} at {i}");
        }
    }

    #[test]
    fn cubic_index_is_quartic_divided_by_w() {
        let q = MonomialIndex::quartic();
        let c = MonomialIndex::cubic();
        assert_eq!(c.len(), 20);
        for i in 0..NUM_W_MONOMIALS {
            let mut e = q.exponent(i);
            e[0] -= 1;
            assert_eq!(c.exponent(i), e);
        }
    }

    #[test]
    fn position_inverts_exponent() {
        for idx in [MonomialIndex::quartic(), MonomialIndex::cubic()] {
            for (i, e) in idx.entries().iter().enumerate() {
                assert_eq!(idx.position(e), Some(i));
            }
        }
        assert_eq!(MonomialIndex::quartic().position(&[1, 1, 1, 0]), None);
    }

    #[test]
    fn monomial_vector_of_identity() {
        let x = monomial_vector(&Quaternion::identity());
        assert_eq!(x[0], 1.0);
        assert_eq!(x.iter().skip(1).map(|c| c.abs()).sum::<f64>(), 0.0);
    }
}
