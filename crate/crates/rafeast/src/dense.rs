//! Dense row-major matrices and the small-block kernels built on them.
//!
//! This is workspace machinery for the oracle, the projected eigenproblems,
//! and the sketch bases; it is not a general-purpose linear algebra layer.

use crate::error::Error;
use crate::Result;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Validates the shape/finiteness invariants.
    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: self.data.len(),
            });
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.at(i, j).is_finite() {
                    return Err(Error::NonFiniteValue { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        for i in 0..self.rows {
            self.set(i, j, v[i]);
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    /// C = self * other.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut c = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let c_row = c.row_mut(i);
            for (k, &a_ik) in a_row.iter().enumerate() {
                if a_ik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                    *cv += a_ik * bv;
                }
            }
        }
        c
    }

    /// C = self^T * other (Gram-style product over shared rows).
    pub fn transpose_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "transpose_matmul shape mismatch");
        let mut c = DenseMatrix::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let a_row = self.row(r);
            let b_row = other.row(r);
            for (i, &a_ri) in a_row.iter().enumerate() {
                if a_ri == 0.0 {
                    continue;
                }
                let c_row = c.row_mut(i);
                for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                    *cv += a_ri * bv;
                }
            }
        }
        c
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// self += s * other.
    pub fn axpy(&mut self, s: f64, other: &DenseMatrix) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.data.len(), other.data.len());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Keeps the first `k` columns.
    pub fn truncate_cols(&self, k: usize) -> DenseMatrix {
        assert!(k <= self.cols);
        DenseMatrix::from_fn(self.rows, k, |i, j| self.at(i, j))
    }
}

/// Result of a column-pivoted Householder orthonormalization.
pub struct PivotedQr {
    /// Orthonormal basis, same column count as the input.
    pub q: DenseMatrix,
    /// Numerical rank (count of pivots above the relative threshold).
    pub rank: usize,
}

/// Column-pivoted Householder QR; returns an orthonormal basis of the input's
/// range in the leading `rank` columns, completed to full column count.
///
/// Rank is decided by |R_kk| <= tol * |R_00| with tol = 1e-12 * sqrt(rows).
pub fn pivoted_qr_orthonormalize(a: &DenseMatrix) -> PivotedQr {
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n, "orthonormalization needs rows >= cols");
    let mut work = a.clone();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);

    for k in 0..n {
        // pivot: remaining column with the largest trailing norm
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let mut s = 0.0;
            for i in k..m {
                let v = work.at(i, j);
                s += v * v;
            }
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let t = work.at(i, k);
                work.set(i, k, work.at(i, best));
                work.set(i, best, t);
            }
        }

        // Householder vector for column k below the diagonal
        let mut norm = 0.0;
        for i in k..m {
            norm += work.at(i, k) * work.at(i, k);
        }
        let norm = norm.sqrt();
        let mut v = vec![0.0; m - k];
        if norm > 0.0 {
            let alpha = if work.at(k, k) >= 0.0 { -norm } else { norm };
            for i in k..m {
                v[i - k] = work.at(i, k);
            }
            v[0] -= alpha;
            let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if vnorm > 0.0 {
                for x in &mut v {
                    *x /= vnorm;
                }
                // apply reflector I - 2 v v^T to trailing columns
                for j in k..n {
                    let mut dot = 0.0;
                    for i in k..m {
                        dot += v[i - k] * work.at(i, j);
                    }
                    let dot2 = 2.0 * dot;
                    for i in k..m {
                        let t = work.at(i, j) - dot2 * v[i - k];
                        work.set(i, j, t);
                    }
                }
            }
            diag.push(alpha.abs());
        } else {
            diag.push(0.0);
        }
        vs.push(v);
    }

    let tol = 1e-12 * (m as f64).sqrt();
    let r00 = diag.first().copied().unwrap_or(0.0);
    let rank = diag.iter().take_while(|&&d| d > tol * r00 && r00 > 0.0).count();

    // Q = H_0 H_1 ... H_{n-1} * [I_n; 0]
    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q.set(j, j, 1.0);
    }
    for k in (0..n).rev() {
        let v = &vs[k];
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        for j in 0..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * q.at(i, j);
            }
            let dot2 = 2.0 * dot;
            for i in k..m {
                let t = q.at(i, j) - dot2 * v[i - k];
                q.set(i, j, t);
            }
        }
    }
    PivotedQr { q, rank }
}

/// Cholesky-QR orthonormalization in place: X <- X R^{-1} with R^T R = X^T X.
///
/// Cheap and fully vectorizable; valid when the block is well conditioned
/// (condition below ~1e7), which the power loop guarantees. Returns false if
/// the Gram matrix is not numerically positive definite.
pub fn cholqr_in_place(x: &mut DenseMatrix) -> bool {
    let k = x.cols;
    // upper-triangular Gram accumulation, row-streamed
    let mut gram = vec![0.0; k * k];
    for row in 0..x.rows {
        let xr = x.row(row);
        for (i, &v) in xr.iter().enumerate() {
            let g_row = &mut gram[i * k..(i + 1) * k];
            for (g, &w) in g_row[i..].iter_mut().zip(&xr[i..]) {
                *g += v * w;
            }
        }
    }
    // Cholesky of the k x k Gram matrix
    let mut r = vec![0.0; k * k]; // upper triangular, row-major
    for i in 0..k {
        for j in i..k {
            let mut s = gram[i * k + j];
            for l in 0..i {
                s -= r[l * k + i] * r[l * k + j];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                r[i * k + i] = s.sqrt();
            } else {
                r[i * k + j] = s / r[i * k + i];
            }
        }
    }
    // columns of R^T contiguously, with reciprocal diagonal, so the per-row
    // substitution below runs on unit-stride slices
    let mut rt = vec![0.0; k * k];
    let mut rdiag_inv = vec![0.0; k];
    for j in 0..k {
        for l in 0..j {
            rt[j * k + l] = r[l * k + j];
        }
        rdiag_inv[j] = 1.0 / r[j * k + j];
    }
    // X <- X R^{-1}, row by row (forward substitution on R^T)
    for row in 0..x.rows {
        let xr = x.row_mut(row);
        for j in 0..k {
            let col = &rt[j * k..j * k + j];
            let mut s = xr[j];
            for (c, v) in col.iter().zip(xr.iter()) {
                s -= c * v;
            }
            xr[j] = s * rdiag_inv[j];
        }
    }
    true
}

/// ||Q^T Q - I||_F, the orthonormality defect.
pub fn gram_defect(q: &DenseMatrix) -> f64 {
    let g = q.transpose_matmul(q);
    let mut s = 0.0;
    for i in 0..g.rows {
        for j in 0..g.cols {
            let d = g.at(i, j) - if i == j { 1.0 } else { 0.0 };
            s += d * d;
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        let i3 = DenseMatrix::identity(3);
        assert_eq!(a.matmul(&i3), a);
        assert_eq!(i3.matmul(&a), a);
    }

    #[test]
    fn transpose_matmul_agrees_with_explicit_transpose() {
        let a = DenseMatrix::from_fn(4, 2, |i, j| (i + 2 * j) as f64 * 0.5);
        let b = DenseMatrix::from_fn(4, 3, |i, j| (i * j) as f64 - 1.0);
        let fast = a.transpose_matmul(&b);
        let slow = a.transpose().matmul(&b);
        for (x, y) in fast.data.iter().zip(&slow.data) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn pivoted_qr_orthonormalizes() {
        let a = DenseMatrix::from_fn(10, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let qr = pivoted_qr_orthonormalize(&a);
        assert_eq!(qr.rank, 4);
        assert!(gram_defect(&qr.q) < 1e-13);
        // columns of a lie in span(q): ||a - q q^T a||_F small
        let proj = qr.q.matmul(&qr.q.transpose_matmul(&a));
        assert!(a.sub(&proj).frobenius_norm() < 1e-12 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn pivoted_qr_detects_rank_deficiency() {
        // two identical columns
        let a = DenseMatrix::from_fn(6, 3, |i, j| if j == 2 { i as f64 } else { (i + j) as f64 });
        // col2 = col0 + const? make exact dependence: col1 = col0 shifted by 1 => rank 2 plus col2 dependent
        let mut a = a;
        for i in 0..6 {
            let v = a.at(i, 0);
            a.set(i, 2, 2.0 * v);
        }
        let qr = pivoted_qr_orthonormalize(&a);
        assert!(qr.rank < 3);
        assert!(gram_defect(&qr.q) < 1e-13);
    }

    #[test]
    fn cholqr_matches_contract() {
        let mut a = DenseMatrix::from_fn(50, 6, |i, j| ((i * 13 + j * 5) % 17) as f64 / 17.0 - 0.4);
        assert!(cholqr_in_place(&mut a));
        assert!(gram_defect(&a) < 1e-12 * (6f64).sqrt());
    }
}
