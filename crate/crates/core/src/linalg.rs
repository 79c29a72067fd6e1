//! Dense linear algebra for desk-scale matrices (a handful of rows and
//! columns): a row-major matrix type, a pivoted solver and a one-sided
//! Jacobi singular value routine.

use std::fmt;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Frobenius norm `(sum_ij a_ij^2)^(1/2)`.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is `k x k` row-major. Returns false when a pivot vanishes.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], k: usize) -> bool {
    debug_assert_eq!(a.len(), k * k);
    debug_assert_eq!(b.len(), k);
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if a[r * k + col].abs() > a[piv * k + col].abs() {
                piv = r;
            }
        }
        if a[piv * k + col] == 0.0 || !a[piv * k + col].is_finite() {
            return false;
        }
        if piv != col {
            for j in 0..k {
                a.swap(col * k + j, piv * k + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * k + col];
        for r in col + 1..k {
            let f = a[r * k + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..k {
                a[r * k + j] -= f * a[col * k + j];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..k).rev() {
        let mut s = b[col];
        for j in col + 1..k {
            s -= a[col * k + j] * b[j];
        }
        b[col] = s / a[col * k + col];
    }
    true
}

/// Minimum-norm damped Gauss-Newton step for an underdetermined system:
/// returns `J^T (J J^T + mu I)^{-1} r` where `jac` is `k x f` row-major.
/// `mu` is scaled by the largest diagonal entry of `J J^T`.
pub fn min_norm_step(jac: &[f64], r: &[f64], k: usize, f: usize, mu: f64) -> Option<Vec<f64>> {
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..f).map(|c| jac[i * f + c] * jac[j * f + c]).sum();
            gram[i * k + j] = s;
            gram[j * k + i] = s;
        }
    }
    let scale = (0..k).map(|i| gram[i * k + i]).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for i in 0..k {
        gram[i * k + i] += mu * scale;
    }
    let mut w = r.to_vec();
    if !solve_in_place(&mut gram, &mut w, k) {
        return None;
    }
    Some(
        (0..f)
            .map(|c| (0..k).map(|i| jac[i * f + c] * w[i]).sum())
            .collect(),
    )
}

/// Singular values of a tall-or-square matrix given as `cols` column
/// vectors of length `len` (`cols <= len`), by one-sided Jacobi rotations.
/// Unsorted.
fn jacobi_column_norms(mut columns: Vec<Vec<f64>>) -> Vec<f64> {
    let cols = columns.len();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = columns[p].iter().map(|a| a * a).sum();
                let beta: f64 = columns[q].iter().map(|a| a * a).sum();
                let gamma: f64 = columns[p].iter().zip(&columns[q]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = columns.split_at_mut(q);
                for (a, b) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    columns
        .iter()
        .map(|c| c.iter().map(|a| a * a).sum::<f64>().sqrt())
        .collect()
}

/// All singular values of `a`, descending. There are `min(rows, cols)` of
/// them.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    // Work on whichever orientation has no more columns than rows.
    let (tall, cols) = if a.rows() >= a.cols() {
        (a.clone(), a.cols())
    } else {
        (a.transpose(), a.rows())
    };
    let columns: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..tall.rows()).map(|i| tall[(i, j)]).collect())
        .collect();
    let mut sv = jacobi_column_norms(columns);
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}
