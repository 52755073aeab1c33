//! Dense linear algebra for the policies and the regret oracle.
//!
//! Everything here operates on small matrices (d = 26 in practice), so the
//! kernel favors simple, well-conditioned routines: Cholesky factorization
//! for SPD solves, normal equations for least squares, and Sherman–Morrison
//! for incremental inverse maintenance.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {context} expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("matrix is not symmetric within tolerance at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is singular or not positive definite (pivot {pivot} at column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("rank-one update denominator {denom} is not positive")]
    BadUpdateDenominator { denom: f64 },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
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
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged row");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = dot(self.row(i), x);
        }
        out
    }

    /// Adds the outer product `x xᵀ` in place (square matrices only).
    pub fn add_outer(&mut self, x: &[f64]) {
        assert_eq!(self.rows, self.cols, "add_outer needs a square matrix");
        assert_eq!(x.len(), self.cols, "add_outer dimension mismatch");
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (r, &xj) in row.iter_mut().zip(x.iter()) {
                *r += xi * xj;
            }
        }
    }

    /// Replaces the matrix with `(M + Mᵀ) / 2`, bounding asymmetry drift
    /// from long chains of incremental updates.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols, "symmetrize needs a square matrix");
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, avg);
                self.set(j, i, avg);
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn check_square(a: &Matrix, context: &'static str) -> Result<usize, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::Dimension {
            context,
            expected: a.rows,
            actual: a.cols,
        });
    }
    Ok(a.rows)
}

fn check_symmetric(a: &Matrix) -> Result<(), LinalgError> {
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + scale);
    for i in 0..a.rows {
        for j in (i + 1)..a.cols {
            if (a.get(i, j) - a.get(j, i)).abs() > tol {
                return Err(LinalgError::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Lower-triangular Cholesky factor of an SPD matrix.
fn cholesky(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = check_square(a, "cholesky")?;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            let ljk = l.get(j, k);
            diag -= ljk * ljk;
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(LinalgError::Singular { col: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, v / ljj);
        }
    }
    Ok(l)
}

fn solve_cholesky(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    // forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l.get(i, k) * y[k];
        }
        y[i] = v / l.get(i, i);
    }
    // backward: Lᵀ x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l.get(k, i) * x[k];
        }
        x[i] = v / l.get(i, i);
    }
    x
}

/// Solves `A θ = b` for symmetric positive-definite `A` via Cholesky.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = check_square(a, "solve_spd")?;
    if b.len() != n {
        return Err(LinalgError::Dimension {
            context: "solve_spd rhs",
            expected: n,
            actual: b.len(),
        });
    }
    check_symmetric(a)?;
    let l = cholesky(a)?;
    Ok(solve_cholesky(&l, b))
}

/// Inverse of an SPD matrix, column by column through its Cholesky factor.
pub fn invert_spd(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = check_square(a, "invert_spd")?;
    check_symmetric(a)?;
    let l = cholesky(a)?;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = solve_cholesky(&l, &e);
        e[j] = 0.0;
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    inv.symmetrize();
    Ok(inv)
}

/// Ridge least squares `argmin ‖Xθ − y‖² + λ‖θ‖²` via the normal equations
/// `(XᵀX + λI) θ = Xᵀy`.
pub fn least_squares(x: &Matrix, y: &[f64], lambda: f64) -> Result<Vec<f64>, LinalgError> {
    if y.len() != x.rows() {
        return Err(LinalgError::Dimension {
            context: "least_squares targets",
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let d = x.cols();
    let mut xtx = Matrix::zeros(d, d);
    let mut xty = vec![0.0; d];
    for t in 0..x.rows() {
        let row = x.row(t);
        xtx.add_outer(row);
        let yt = y[t];
        for (acc, &v) in xty.iter_mut().zip(row.iter()) {
            *acc += yt * v;
        }
    }
    solve_normal_eq(&xtx, &xty, lambda)
}

/// Solves `(XᵀX + λI) θ = Xᵀy` from pre-accumulated statistics.
pub fn solve_normal_eq(xtx: &Matrix, xty: &[f64], lambda: f64) -> Result<Vec<f64>, LinalgError> {
    let d = check_square(xtx, "solve_normal_eq")?;
    let mut a = xtx.clone();
    if lambda != 0.0 {
        for i in 0..d {
            a.set(i, i, a.get(i, i) + lambda);
        }
    }
    solve_spd(&a, xty)
}

/// Sherman–Morrison: given `A⁻¹`, returns `(A + x xᵀ)⁻¹`.
pub fn rank_one_inverse_update(a_inv: &Matrix, x: &[f64]) -> Result<Matrix, LinalgError> {
    let n = check_square(a_inv, "rank_one_inverse_update")?;
    if x.len() != n {
        return Err(LinalgError::Dimension {
            context: "rank_one_inverse_update vector",
            expected: n,
            actual: x.len(),
        });
    }
    let ax = a_inv.matvec(x);
    let denom = 1.0 + dot(x, &ax);
    if denom <= 0.0 || !denom.is_finite() {
        return Err(LinalgError::BadUpdateDenominator { denom });
    }
    let mut out = a_inv.clone();
    for i in 0..n {
        let scaled = ax[i] / denom;
        if scaled == 0.0 {
            continue;
        }
        let row = &mut out.data[i * n..(i + 1) * n];
        for (r, &axj) in row.iter_mut().zip(ax.iter()) {
            *r -= scaled * axj;
        }
    }
    Ok(out)
}
