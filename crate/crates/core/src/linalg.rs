//! Small dense linear-algebra helpers shared by the adapters.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{RailError, Result};

pub type Matrix = DMatrix<f64>;

/// Cholesky factor of a symmetric positive definite matrix.
pub(crate) fn cholesky(a: Matrix) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(a).ok_or(RailError::SingularSystem)
}

/// Adds `lambda` to the diagonal in place.
pub(crate) fn add_ridge(a: &mut Matrix, lambda: f64) {
    for i in 0..a.nrows().min(a.ncols()) {
        a[(i, i)] += lambda;
    }
}

/// Replaces `a` with `(a + aᵀ) / 2`.
pub fn symmetrize(a: &mut Matrix) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// `‖a − b‖_F / ‖b‖_F`, falling back to the absolute error when `b` is zero.
pub fn relative_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "relative_frobenius: shape mismatch");
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Largest symmetric deviation `max |a_ij − a_ji|`.
pub fn asymmetry(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Index of the maximum, ties resolved toward the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Numerically stable softmax.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// One-hot target matrix: row `i` has a one in the column of `labels[i]`
/// within `classes`.
pub(crate) fn one_hot(labels: &[usize], classes: &[usize]) -> Result<Matrix> {
    let mut y = Matrix::zeros(labels.len(), classes.len());
    for (row, label) in labels.iter().enumerate() {
        let col = classes
            .iter()
            .position(|c| c == label)
            .ok_or(RailError::LabelOutOfRange(row))?;
        y[(row, col)] = 1.0;
    }
    Ok(y)
}

/// Copies the listed rows of `m` into a new matrix.
pub(crate) fn select_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Stacks `bottom` below `top`.
pub(crate) fn vstack(top: &Matrix, bottom: &Matrix) -> Matrix {
    assert_eq!(top.ncols(), bottom.ncols());
    let mut out = Matrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

/// Places `right` to the right of `left`.
pub(crate) fn hstack(left: &Matrix, right: &Matrix) -> Matrix {
    assert_eq!(left.nrows(), right.nrows());
    let mut out = Matrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols()).copy_from(right);
    out
}
