//! Dense real symmetric matrices with packed upper-triangle storage and
//! the trace inner product `<A, B> = Tr(AB)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{CopoError, Result};

/// Real symmetric matrix of order `n`.
///
/// Entries live in a single packed cell per unordered pair `{i, j}`, stored
/// row-major over the upper triangle, so symmetry holds by construction.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    upper: Vec<f64>,
}

#[inline]
fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be at least 1");
        SymMatrix { order: n, upper: vec![0.0; packed_len(n)] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds a matrix by evaluating `f(i, j)` for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let k = m.idx(i, j);
                m.upper[k] = f(i, j);
            }
        }
        m
    }

    /// Builds from the packed upper triangle (row-major, `n(n+1)/2` values).
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(CopoError::InvalidOrder(0));
        }
        if upper.len() != packed_len(n) {
            return Err(CopoError::BadLength { expected: packed_len(n), got: upper.len() });
        }
        let m = SymMatrix { order: n, upper };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds from full rows, averaging `(a_ij + a_ji) / 2`.
    ///
    /// Callers that care about asymmetry must check it before calling.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(CopoError::InvalidOrder(0));
        }
        for r in rows {
            if r.as_ref().len() != n {
                return Err(CopoError::BadLength { expected: n, got: r.as_ref().len() });
            }
        }
        let m = Self::from_fn(n, |i, j| {
            if i == j {
                rows[i].as_ref()[i]
            } else {
                0.5 * (rows[i].as_ref()[j] + rows[j].as_ref()[i])
            }
        });
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.order {
            for j in i..self.order {
                if !self.get(i, j).is_finite() {
                    return Err(CopoError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.order - i * i.saturating_sub(1) / 2 + (j - i)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.upper[k] = v;
    }

    /// Packed upper triangle, row-major.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order).map(|i| (0..self.order).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    /// Trace inner product, `sum_i a_ii b_ii + 2 sum_{i<j} a_ij b_ij`.
    pub fn dot(&self, other: &SymMatrix) -> Result<f64> {
        self.same_order(other)?;
        let mut s = 0.0;
        for i in 0..self.order {
            for j in i..self.order {
                let w = if i == j { 1.0 } else { 2.0 };
                s += w * self.get(i, j) * other.get(i, j);
            }
        }
        Ok(s)
    }

    /// Frobenius norm `sqrt(Tr A^2)`.
    pub fn norm(&self) -> f64 {
        self.dot(self).expect("same order").sqrt()
    }

    pub fn normalized(&self) -> Result<SymMatrix> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(CopoError::ZeroMatrix);
        }
        Ok(self * (1.0 / nrm))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        SymMatrix { order: self.order, upper: self.upper.iter().map(|&v| f(v)).collect() }
    }

    /// Entrywise `max(a_ij, 0)`: the projection onto nonnegative matrices.
    pub fn positive_part(&self) -> SymMatrix {
        self.map(|v| v.max(0.0))
    }

    pub fn is_entrywise_nonnegative(&self) -> bool {
        self.upper.iter().all(|&v| v >= 0.0)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.upper.iter().zip(&other.upper).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Simultaneous row/column permutation: result `(i, j)` = `self(p[i], p[j])`.
    pub fn permuted(&self, p: &[usize]) -> SymMatrix {
        assert_eq!(p.len(), self.order);
        Self::from_fn(self.order, |i, j| self.get(p[i], p[j]))
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.order);
        let mut s = 0.0;
        for i in 0..self.order {
            s += self.get(i, i) * x[i] * x[i];
            for j in i + 1..self.order {
                s += 2.0 * self.get(i, j) * x[i] * x[j];
            }
        }
        s
    }

    /// Pads with zero rows/columns up to order `n`.
    pub fn embed(&self, n: usize) -> SymMatrix {
        assert!(n >= self.order);
        Self::from_fn(n, |i, j| if j < self.order { self.get(i, j) } else { 0.0 })
    }

    fn same_order(&self, other: &SymMatrix) -> Result<()> {
        if self.order != other.order {
            Err(CopoError::OrderMismatch { left: self.order, right: other.order })
        } else {
            Ok(())
        }
    }

    fn zip_with(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.order, other.order, "order mismatch");
        SymMatrix {
            order: self.order,
            upper: self.upper.iter().zip(&other.upper).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}) [", self.order)?;
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.8}")).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SymMatrix", 2)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("rows", &self.to_rows())?;
        st.end()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.map(|v| -v)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, k: f64) -> SymMatrix {
        self.map(|v| v * k)
    }
}

/// `<A, B> = Tr(AB)`.
pub fn inner_product(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    a.dot(b)
}

/// Angle `arccos(<A, B> / (|A| |B|))` in `[0, pi]`.
pub fn angle_between(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let ip = a.dot(b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(CopoError::ZeroMatrix);
    }
    Ok(clamped_acos(ip / (na * nb)))
}

/// `acos` with its argument clamped to `[-1, 1]`.
#[inline]
pub fn clamped_acos(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn full_product_trace(a: &SymMatrix, b: &SymMatrix) -> f64 {
        let (ra, rb) = (a.to_rows(), b.to_rows());
        let n = a.order();
        let mut t = 0.0;
        for i in 0..n {
            for k in 0..n {
                t += ra[i][k] * rb[k][i];
            }
        }
        t
    }

    fn padded_pair() -> (SymMatrix, SymMatrix) {
        let a = SymMatrix::from_rows(&[[0.5, -0.5, 0.0], [-0.5, 0.5, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let r = FRAC_1_SQRT_2;
        let b = SymMatrix::from_rows(&[[0.0, r, 0.0], [r, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        (a, b)
    }

    #[test]
    fn packed_indexing_covers_every_cell_once() {
        for n in 1..8 {
            let m = SymMatrix::zeros(n);
            let mut seen = vec![false; packed_len(n)];
            for i in 0..n {
                for j in i..n {
                    let k = m.idx(i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(k, m.idx(j, i));
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn inner_product_examples() {
        let i3 = SymMatrix::identity(3);
        assert_eq!(inner_product(&i3, &i3).unwrap(), 3.0);
        let (a, b) = padded_pair();
        assert!((inner_product(&a, &b).unwrap() + FRAC_1_SQRT_2).abs() < 1e-15);
        let d = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let off = SymMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(inner_product(&d, &off).unwrap(), 0.0);
        assert!(matches!(inner_product(&i3, &SymMatrix::identity(2)), Err(CopoError::OrderMismatch { .. })));
    }

    #[test]
    fn angle_examples() {
        let i3 = SymMatrix::identity(3);
        assert!(angle_between(&i3, &i3).unwrap().abs() < 1e-7);
        let (a, b) = padded_pair();
        assert!((angle_between(&a, &b).unwrap() - 0.75 * PI).abs() < 1e-12);
        assert!((angle_between(&i3, &-&i3).unwrap() - PI).abs() < 1e-12);
        assert_eq!(angle_between(&i3, &SymMatrix::zeros(3)), Err(CopoError::ZeroMatrix));
    }

    #[test]
    fn acos_clamps_rounding_overshoot() {
        assert_eq!(clamped_acos(1.0 + 1e-16), 0.0);
        assert_eq!(clamped_acos(-1.0 - 1e-15), PI);
    }

    #[test]
    fn rejects_nonfinite_and_bad_lengths() {
        assert!(matches!(
            SymMatrix::from_upper(2, vec![1.0, f64::NAN, 0.0]),
            Err(CopoError::NonFinite { .. })
        ));
        assert!(matches!(SymMatrix::from_upper(2, vec![1.0]), Err(CopoError::BadLength { .. })));
        assert!(matches!(SymMatrix::from_upper(0, vec![]), Err(CopoError::InvalidOrder(0))));
    }

    #[test]
    fn trace_formula_matches_full_product() {
        let mut state = 0x1234_5678_u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for n in 1..7 {
            for _ in 0..50 {
                let a = SymMatrix::from_fn(n, |_, _| next());
                let b = SymMatrix::from_fn(n, |_, _| next());
                let tri = inner_product(&a, &b).unwrap();
                let full = full_product_trace(&a, &b);
                assert!((tri - full).abs() <= 1e-12 * (1.0 + full.abs()));
            }
        }
    }

    #[test]
    fn permutation_and_embedding() {
        let a = SymMatrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]]).unwrap();
        let p = a.permuted(&[2, 0, 1]);
        assert_eq!(p.get(0, 0), 6.0);
        assert_eq!(p.get(0, 1), 3.0);
        assert_eq!(p.get(1, 2), 2.0);
        let e = a.embed(4);
        assert_eq!(e.get(3, 3), 0.0);
        assert_eq!(e.get(1, 2), 5.0);
        assert!((e.norm() - a.norm()).abs() < 1e-15);
    }
}
