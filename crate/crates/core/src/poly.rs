//! Sparse real polynomials in `(w, x, y, z)` and small matrices of them.
//!
//! This is the symbolic layer used to expand the 6x6 depth-elimination determinant and
//! divide out the quaternion norm `w^2 + x^2 + y^2 + z^2`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::monomial::{eval_monomial, Exponent};

/// Graded lexicographic key: total degree first, then lex with `w > x > y > z`.
fn grlex(e: &Exponent) -> (u32, Exponent) {
    (e.iter().map(|&k| k as u32).sum(), *e)
}

fn exp_add(a: &Exponent, b: &Exponent) -> Exponent {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

fn exp_divides(d: &Exponent, e: &Exponent) -> bool {
    d.iter().zip(e).all(|(a, b)| a <= b)
}

fn exp_sub(e: &Exponent, d: &Exponent) -> Exponent {
    [e[0] - d[0], e[1] - d[1], e[2] - d[2], e[3] - d[3]]
}

/// Sparse polynomial: exponent tuple to coefficient.
///
/// Terms whose coefficient becomes exactly zero are dropped; anything at or below
/// [`Poly4::prune`]'s threshold can be removed explicitly.
#[derive(Clone, Default, PartialEq)]
pub struct Poly4 {
    terms: BTreeMap<Exponent, f64>,
}

impl Poly4 {
    pub fn zero() -> Self {
        Poly4::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly4::monomial([0, 0, 0, 0], c)
    }

    pub fn monomial(e: Exponent, c: f64) -> Self {
        let mut p = Poly4::zero();
        p.add_term(e, c);
        p
    }

    /// The variable `w`, `x`, `y` or `z` for `index` 0..4.
    pub fn var(index: usize) -> Self {
        let mut e = [0u8; 4];
        e[index] = 1;
        Poly4::monomial(e, 1.0)
    }

    /// `w^2 + x^2 + y^2 + z^2`.
    pub fn norm_squared() -> Self {
        let mut p = Poly4::zero();
        for i in 0..4 {
            let mut e = [0u8; 4];
            e[i] = 2;
            p.add_term(e, 1.0);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, f64)>>(terms: I) -> Self {
        let mut p = Poly4::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    /// Highest total degree among the stored terms; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| grlex(e).0).max()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Leading term in graded lex order.
    pub fn leading_term(&self) -> Option<(Exponent, f64)> {
        self.terms
            .iter()
            .max_by_key(|(e, _)| grlex(e))
            .map(|(e, c)| (*e, *c))
    }

    /// Drops every term with `|c| <= threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.abs() > threshold);
    }

    pub fn scale(&self, s: f64) -> Poly4 {
        if s == 0.0 {
            return Poly4::zero();
        }
        Poly4 {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Poly4) -> Poly4 {
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        out
    }

    pub fn sub(&self, other: &Poly4) -> Poly4 {
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        out
    }

    /// `self += s * other`.
    pub fn add_assign_scaled(&mut self, other: &Poly4, s: f64) {
        for (e, c) in &other.terms {
            self.add_term(*e, c * s);
        }
    }

    pub fn mul(&self, other: &Poly4) -> Poly4 {
        let mut out = Poly4::zero();
        out.add_product(self, other, 1.0);
        out
    }

    /// `self += s * a * b`.
    pub fn add_product(&mut self, a: &Poly4, b: &Poly4, s: f64) {
        for (ea, ca) in &a.terms {
            let k = ca * s;
            for (eb, cb) in &b.terms {
                self.add_term(exp_add(ea, eb), k * cb);
            }
        }
    }

    pub fn eval(&self, v: &[f64; 4]) -> f64 {
        self.terms.iter().map(|(e, c)| c * eval_monomial(e, v)).sum()
    }

    /// True when every term of degree other than `degree` is at most `rel_tol` times the
    /// largest coefficient.
    pub fn is_homogeneous(&self, degree: u32, rel_tol: f64) -> bool {
        let scale = self.max_abs_coefficient();
        self.terms
            .iter()
            .all(|(e, c)| grlex(e).0 == degree || c.abs() <= rel_tol * scale)
    }

    /// Multivariate long division by a single divisor in graded lex order.
    ///
    /// Returns `(quotient, remainder)` with `self = quotient * divisor + remainder`.
    pub fn div_rem(&self, divisor: &Poly4) -> Result<(Poly4, Poly4)> {
        let (lead_e, lead_c) = divisor
            .leading_term()
            .ok_or_else(|| Error::InvalidArgument("division by the zero polynomial".into()))?;
        let mut rest = self.clone();
        let mut quotient = Poly4::zero();
        let mut remainder = Poly4::zero();
        while let Some((e, c)) = rest.leading_term() {
            rest.terms.remove(&e);
            if exp_divides(&lead_e, &e) {
                let qe = exp_sub(&e, &lead_e);
                let qc = c / lead_c;
                quotient.add_term(qe, qc);
                for (de, dc) in &divisor.terms {
                    if *de != lead_e {
                        rest.add_term(exp_add(&qe, de), -qc * dc);
                    }
                }
            } else {
                remainder.add_term(e, c);
            }
        }
        Ok((quotient, remainder))
    }
}

impl fmt::Debug for Poly4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Poly4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(e, _)| std::cmp::Reverse(grlex(e)));
        for (i, (e, c)) in terms.into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (name, &k) in ["w", "x", "y", "z"].iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inherent:path) => {
        impl $trait<&Poly4> for &Poly4 {
            type Output = Poly4;
            fn $method(self, rhs: &Poly4) -> Poly4 {
                $inherent(self, rhs)
            }
        }
        impl $trait<Poly4> for Poly4 {
            type Output = Poly4;
            fn $method(self, rhs: Poly4) -> Poly4 {
                $inherent(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, Poly4::add);
forward_binop!(Sub, sub, Poly4::sub);
forward_binop!(Mul, mul, Poly4::mul);

impl Neg for &Poly4 {
    type Output = Poly4;
    fn neg(self) -> Poly4 {
        self.scale(-1.0)
    }
}

impl Neg for Poly4 {
    type Output = Poly4;
    fn neg(self) -> Poly4 {
        self.scale(-1.0)
    }
}

pub fn poly_add(p: &Poly4, q: &Poly4) -> Poly4 {
    p.add(q)
}

pub fn poly_mul(p: &Poly4, q: &Poly4) -> Poly4 {
    p.mul(q)
}

pub fn poly_scale(p: &Poly4, s: f64) -> Poly4 {
    p.scale(s)
}

/// Exact division by `d`: the quotient and the remainder's max coefficient relative
/// to the max coefficient of `p` (0 when `p` is zero).
pub fn poly_div_exact(p: &Poly4, d: &Poly4) -> Result<(Poly4, f64)> {
    let (q, r) = p.div_rem(d)?;
    let scale = p.max_abs_coefficient();
    let rel = if scale > 0.0 {
        r.max_abs_coefficient() / scale
    } else {
        0.0
    };
    Ok((q, rel))
}

/// Dense grid of polynomial entries, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly4>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![Poly4::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly4) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        PolyMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly4 {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly4) {
        self.entries[r * self.cols + c] = p;
    }

    /// Numeric matrix obtained by evaluating every entry at `v`.
    pub fn eval(&self, v: &[f64; 4]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).eval(v))
    }

    /// Exact determinant by cofactor expansion along rows, memoized over the set of
    /// columns still available (at most `n * 2^(n-1)` products).
    pub fn det(&self) -> Result<Poly4> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::InvalidArgument(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if n > 16 {
            return Err(Error::InvalidArgument(
                "symbolic determinant limited to 16x16".into(),
            ));
        }
        if n == 0 {
            return Ok(Poly4::constant(1.0));
        }
        // minors[mask] = det of the trailing rows restricted to the columns in `mask`
        let mut minors: HashMap<u32, Poly4> = HashMap::new();
        minors.insert(0, Poly4::constant(1.0));
        let mut level: Vec<u32> = vec![0];
        for size in 1..=n {
            let row = n - size;
            let mut next = Vec::new();
            for &sub in &level {
                for c in 0..n {
                    let bit = 1u32 << c;
                    if sub & bit != 0 {
                        continue;
                    }
                    let mask = sub | bit;
                    if minors.contains_key(&mask) {
                        continue;
                    }
                    minors.insert(mask, self.expand_row(row, mask, &minors));
                    next.push(mask);
                }
            }
            level = next;
        }
        Ok(minors.remove(&((1u32 << n) - 1)).unwrap_or_default())
    }

    fn expand_row(&self, row: usize, mask: u32, minors: &HashMap<u32, Poly4>) -> Poly4 {
        let mut acc = Poly4::zero();
        let mut position = 0;
        for c in 0..self.cols {
            let bit = 1u32 << c;
            if mask & bit == 0 {
                continue;
            }
            let entry = self.get(row, c);
            if !entry.is_zero() {
                if let Some(minor) = minors.get(&(mask & !bit)) {
                    if !minor.is_zero() {
                        let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
                        acc.add_product(entry, minor, sign);
                    }
                }
            }
            position += 1;
        }
        acc
    }
}

/// Free-function form of [`PolyMatrix::det`].
pub fn poly_det(m: &PolyMatrix) -> Result<Poly4> {
    m.det()
}
