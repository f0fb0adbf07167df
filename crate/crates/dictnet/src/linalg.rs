//! Minimal dense linear algebra: a column-major matrix and a small direct
//! solver. The problems here are tiny (atom subsets of a few dozen columns),
//! so plain slices beat any heavier machinery.

use crate::error::{Error, Result};

/// Dense column-major matrix of `f64`.
///
/// Column-major because every hot loop in this crate walks dictionary atoms
/// (columns) contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ColMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from column slices. All columns must share a length.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            if col.len() != rows {
                return Err(Error::Shape(format!(
                    "column length {} != {}",
                    col.len(),
                    rows
                )));
            }
            data.extend_from_slice(col);
        }
        Ok(ColMatrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// y = A^T x, i.e. the dot of every column with `x`.
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    /// y = A c over the nonzero entries of a sparse coefficient list.
    pub fn mul_sparse(&self, coeffs: &[(usize, f64)]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for &(j, c) in coeffs {
            axpy(c, self.col(j), &mut y);
        }
        y
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += a * x
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Scales `v` to unit l2 norm in place. Returns the original norm; a zero
/// vector is left untouched.
pub fn normalize(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Solves the dense square system `A x = b` by Gaussian elimination with
/// partial pivoting. `a` is column-major `n x n` and is consumed as scratch.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::Shape(format!(
            "system matrix has {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    let at = |a: &[f64], r: usize, c: usize| a[c * n + r];
    for k in 0..n {
        // pivot: largest |entry| in column k at or below the diagonal
        let mut piv = k;
        let mut piv_abs = at(&a, k, k).abs();
        for r in k + 1..n {
            let v = at(&a, r, k).abs();
            if v > piv_abs {
                piv = r;
                piv_abs = v;
            }
        }
        if !(piv_abs > 0.0) || !piv_abs.is_finite() {
            return Err(Error::Numeric(format!(
                "singular or non-finite system (pivot {piv_abs:e} at column {k})"
            )));
        }
        if piv != k {
            for c in 0..n {
                a.swap(c * n + k, c * n + piv);
            }
            b.swap(k, piv);
        }
        let d = at(&a, k, k);
        for r in k + 1..n {
            let f = at(&a, r, k) / d;
            if f == 0.0 {
                continue;
            }
            for c in k..n {
                a[c * n + r] -= f * a[c * n + k];
            }
            b[r] -= f * b[k];
        }
    }
    // back substitution
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for c in k + 1..n {
            acc -= at(&a, k, c) * x[c];
        }
        x[k] = acc / at(&a, k, k);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity() {
        let a = vec![1.0, 0.0, 0.0, 1.0];
        let x = solve_dense(a, vec![3.0, -2.0]).unwrap();
        assert_eq!(x, vec![3.0, -2.0]);
    }

    #[test]
    fn solve_requires_pivoting() {
        // [[0, 1], [2, 1]] x = [1, 3]  =>  x = [1, 1]
        let a = vec![0.0, 2.0, 1.0, 1.0]; // column-major
        let x = solve_dense(a, vec![1.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_singular_errors() {
        let a = vec![1.0, 2.0, 1.0, 2.0]; // rank 1
        assert!(solve_dense(a, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn from_columns_checks_lengths() {
        let c0 = [1.0, 2.0];
        let c1 = [3.0];
        assert!(ColMatrix::from_columns(&[&c0, &c1]).is_err());
    }
}
