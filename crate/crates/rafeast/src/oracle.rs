//! Self-contained dense symmetric eigensolver: Householder tridiagonalization
//! followed by implicit-shift QL with Wilkinson shifts. Ground truth for tests
//! and for the benchmark error metric.

use crate::contour::SpectralInterval;
use crate::dense::DenseMatrix;
use crate::error::Error;
use crate::sparse::SymmetricSparseMatrix;
use crate::Result;

/// Guard for densifying sparse inputs.
pub const ORACLE_SIZE_GUARD: usize = 6000;

/// Full eigendecomposition A = V diag(w) V^T, eigenvalues ascending,
/// column k of `eigenvectors` paired with `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct FullEigendecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch { expected: a.rows, got: a.cols });
    }
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..a.rows {
        for j in (i + 1)..a.cols {
            let dev = (a.at(i, j) - a.at(j, i)).abs();
            if dev > 1e-12 * scale.max(1e-300) {
                return Err(Error::NotSymmetric { i, j, deviation: dev });
            }
        }
    }
    Ok(())
}

/// Householder tridiagonalization via symmetric rank-2 updates.
/// Returns (d, e, reflectors); `e[k]` couples rows k and k+1 (e has length n-1).
fn tridiagonalize(a: &DenseMatrix, keep_reflectors: bool) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let n = a.rows;
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::new();
    let mut e = vec![0.0; n.saturating_sub(1)];

    for k in 0..n.saturating_sub(2) {
        // Householder vector annihilating column k below row k+1
        let len = n - k - 1;
        let mut v = vec![0.0; len];
        let mut norm2 = 0.0;
        for i in 0..len {
            let x = w.at(k + 1 + i, k);
            v[i] = x;
            norm2 += x * x;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            if keep_reflectors {
                reflectors.push(Vec::new());
            } else {
                reflectors.push(Vec::new());
            }
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            e[k] = alpha;
            reflectors.push(Vec::new());
            continue;
        }
        for x in &mut v {
            *x /= vnorm;
        }

        // trailing block update: B <- B - v q^T - q v^T with p = 2 B v,
        // q = p - (v^T p) v
        let mut p = vec![0.0; len];
        for i in 0..len {
            let row = &w.row(k + 1 + i)[k + 1..];
            let mut acc = 0.0;
            for (rv, vv) in row.iter().zip(&v) {
                acc += rv * vv;
            }
            p[i] = 2.0 * acc;
        }
        let beta: f64 = v.iter().zip(&p).map(|(a, b)| a * b).sum();
        let q: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - beta * vi).collect();
        for i in 0..len {
            let vi = v[i];
            let qi = q[i];
            let row = &mut w.row_mut(k + 1 + i)[k + 1..];
            for ((rv, &vv), &qv) in row.iter_mut().zip(&v).zip(&q) {
                *rv -= vi * qv + qi * vv;
            }
        }
        e[k] = alpha;
        w.set(k + 1, k, alpha);
        if keep_reflectors {
            reflectors.push(v);
        } else {
            reflectors.push(Vec::new());
        }
    }
    if n >= 2 {
        e[n - 2] = w.at(n - 1, n - 2);
    }
    let d: Vec<f64> = (0..n).map(|i| w.at(i, i)).collect();
    (d, e, reflectors)
}

/// Accumulates Q = H_0 H_1 ... on the identity (reflector k acts on rows k+1..).
fn accumulate_reflectors(n: usize, reflectors: &[Vec<f64>]) -> DenseMatrix {
    let mut q = DenseMatrix::identity(n);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        let len = v.len();
        // Q[k+1.., :] -= 2 v (v^T Q[k+1.., :])
        let mut dots = vec![0.0; n];
        for i in 0..len {
            let vi = v[i];
            let row = q.row(k + 1 + i);
            for (d, &rv) in dots.iter_mut().zip(row) {
                *d += vi * rv;
            }
        }
        for i in 0..len {
            let f = 2.0 * v[i];
            let row = q.row_mut(k + 1 + i);
            for (rv, &d) in row.iter_mut().zip(&dots) {
                *rv -= f * d;
            }
        }
    }
    q
}

/// Implicit-shift QL with Wilkinson shifts on a tridiagonal (d, e).
/// When `v` is given, its columns are rotated along (eigenvector accumulation).
fn tql(d: &mut [f64], e: &mut [f64], mut v: Option<&mut DenseMatrix>, max_sweep_budget: usize) -> Result<usize> {
    let n = d.len();
    if n == 0 {
        return Ok(0);
    }
    let mut e_work = vec![0.0; n];
    e_work[..n - 1].copy_from_slice(&e[..n.saturating_sub(1)]);
    let mut total_sweeps = 0usize;

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find small subdiagonal to split
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e_work[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total_sweeps += 1;
            if total_sweeps > max_sweep_budget {
                return Err(Error::NoConvergence(total_sweeps));
            }
            let _ = iter;

            // Wilkinson shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e_work[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e_work[l] / (g + sign_r);

            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e_work[i];
                let b = c * e_work[i];
                r = f.hypot(g);
                e_work[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e_work[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                if let Some(vm) = v.as_deref_mut() {
                    // rotate columns i and i+1
                    let cols = vm.cols;
                    for k in 0..vm.rows {
                        let base = k * cols;
                        f = vm.data[base + i + 1];
                        vm.data[base + i + 1] = s * vm.data[base + i] + c * f;
                        vm.data[base + i] = c * vm.data[base + i] - s * f;
                    }
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e_work[l] = g;
            e_work[m] = 0.0;
        }
    }
    Ok(total_sweeps)
}

/// Sorts ascending, permuting vector columns along, and fixes the sign
/// convention (first nonzero component positive).
fn sort_and_normalize(d: Vec<f64>, v: Option<DenseMatrix>) -> (Vec<f64>, Option<DenseMatrix>) {
    let n = d.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let sorted: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let vv = v.map(|v| {
        let mut out = DenseMatrix::zeros(v.rows, v.cols);
        for (new_j, &old_j) in idx.iter().enumerate() {
            let mut col = v.col(old_j);
            let lead = col.iter().find(|&&x| x != 0.0).copied().unwrap_or(1.0);
            if lead < 0.0 {
                for x in &mut col {
                    *x = -*x;
                }
            }
            out.set_col(new_j, &col);
        }
        out
    });
    (sorted, vv)
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn dense_eigh(a: &DenseMatrix) -> Result<FullEigendecomposition> {
    check_symmetric(a)?;
    let n = a.rows;
    let (mut d, mut e, refl) = tridiagonalize(a, true);
    let mut v = accumulate_reflectors(n, &refl);
    tql(&mut d, &mut e, Some(&mut v), 30 * n.max(1))?;
    let (eigenvalues, v) = sort_and_normalize(d, Some(v));
    Ok(FullEigendecomposition { eigenvalues, eigenvectors: v.unwrap() })
}

/// Eigenvalues only; avoids the O(n^3) transformation accumulation.
pub fn dense_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let n = a.rows;
    let (mut d, mut e, _) = tridiagonalize(a, false);
    tql(&mut d, &mut e, None, 30 * n.max(1))?;
    let (eigenvalues, _) = sort_and_normalize(d, None);
    Ok(eigenvalues)
}

/// Eigenvalues of a symmetric matrix given as a small projected block; the
/// input is symmetrized first (guards against accumulation asymmetry).
pub fn symmetric_eig_small(a: &DenseMatrix) -> Result<FullEigendecomposition> {
    let n = a.rows;
    let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a.at(i, j) + a.at(j, i)));
    dense_eigh(&sym)
}

/// Dense ground truth inside the interval: densify, decompose, window
/// (inclusive endpoints). Guarded at [`ORACLE_SIZE_GUARD`].
pub fn ground_truth_in_interval(
    a: &SymmetricSparseMatrix,
    interval: &SpectralInterval,
) -> Result<(Vec<f64>, DenseMatrix, usize)> {
    if a.n > ORACLE_SIZE_GUARD {
        return Err(Error::TooLargeForOracle { n: a.n, guard: ORACLE_SIZE_GUARD });
    }
    let eig = dense_eigh(&a.to_dense())?;
    let mut vals = Vec::new();
    let mut cols = Vec::new();
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        if w >= interval.lambda_min && w <= interval.lambda_max {
            vals.push(w);
            cols.push(k);
        }
    }
    let mut vecs = DenseMatrix::zeros(a.n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        vecs.set_col(j, &eig.eigenvectors.col(k));
    }
    let count = vals.len();
    Ok((vals, vecs, count))
}

/// Eigenvalues-only variant of [`ground_truth_in_interval`] for benchmark
/// validation, where eigenvectors are not needed.
pub fn ground_truth_values_in_interval(
    a: &SymmetricSparseMatrix,
    interval: &SpectralInterval,
) -> Result<(Vec<f64>, usize)> {
    if a.n > ORACLE_SIZE_GUARD {
        return Err(Error::TooLargeForOracle { n: a.n, guard: ORACLE_SIZE_GUARD });
    }
    let all = dense_eigenvalues(&a.to_dense())?;
    let vals: Vec<f64> = all
        .into_iter()
        .filter(|&w| w >= interval.lambda_min && w <= interval.lambda_max)
        .collect();
    let count = vals.len();
    Ok((vals, count))
}

/// Maximum absolute eigenvalue error under greedy ascending nearest-unmatched
/// pairing. `approx` may be shorter than `truth`, never longer.
pub fn max_error_metric(approx: &[f64], truth: &[f64]) -> Result<f64> {
    if approx.len() > truth.len() {
        return Err(Error::LengthMismatch { approx: approx.len(), truth: truth.len() });
    }
    let mut used = vec![false; truth.len()];
    let mut worst = 0.0f64;
    for &a in approx {
        let mut best = f64::INFINITY;
        let mut best_j = None;
        for (j, &t) in truth.iter().enumerate() {
            if !used[j] {
                let d = (a - t).abs();
                if d < best {
                    best = d;
                    best_j = Some(j);
                }
            }
        }
        if let Some(j) = best_j {
            used[j] = true;
            worst = worst.max(best);
        }
    }
    Ok(worst)
}

/// Canonical angles between equal-dimension orthonormal bases, descending.
///
/// Cosines come from the Gram spectrum of Q1^T Q2; angles whose sine is small
/// are refined from the residual Q2 - Q1 (Q1^T Q2), whose singular values are
/// exactly the sines (accurate for tiny angles where arccos saturates).
pub fn canonical_angles(q1: &DenseMatrix, q2: &DenseMatrix) -> Result<Vec<f64>> {
    if q1.cols != q2.cols || q1.rows != q2.rows {
        return Err(Error::DimensionMismatch { expected: q1.cols, got: q2.cols });
    }
    let m = q1.cols;
    let mm = q1.transpose_matmul(q2);
    let gram = mm.transpose_matmul(&mm);
    let mut cos2 = dense_eigenvalues(&gram)?;
    for c in &mut cos2 {
        *c = c.max(0.0).min(1.0);
    }
    // cosines descending <-> angles ascending
    let mut cosines: Vec<f64> = cos2.iter().rev().map(|c| c.sqrt()).collect();
    for c in &mut cosines {
        *c = c.min(1.0);
    }
    // sines ascending from the residual spectrum
    let proj = q1.matmul(&mm);
    let resid = q2.sub(&proj);
    let rg = resid.transpose_matmul(&resid);
    let sin2 = dense_eigenvalues(&rg)?;
    let sines: Vec<f64> = sin2.iter().map(|s| s.max(0.0).sqrt().min(1.0)).collect();

    let mut angles: Vec<f64> = (0..m)
        .map(|i| {
            if sines[i] < std::f64::consts::FRAC_1_SQRT_2 {
                sines[i].asin()
            } else {
                cosines[i].acos()
            }
        })
        .map(|t| t.clamp(0.0, std::f64::consts::FRAC_PI_2))
        .collect();
    angles.reverse();
    Ok(angles)
}

/// (||sin Theta||_2, ||sin Theta||_F) between equal-dimension orthonormal
/// bases, computed from the residual matrix for small-angle accuracy.
pub fn sin_theta_norms(q1: &DenseMatrix, q2: &DenseMatrix) -> Result<(f64, f64)> {
    if q1.cols != q2.cols || q1.rows != q2.rows {
        return Err(Error::DimensionMismatch { expected: q1.cols, got: q2.cols });
    }
    let mm = q1.transpose_matmul(q2);
    let resid = q2.sub(&q1.matmul(&mm));
    let fro = resid.frobenius_norm();
    let rg = resid.transpose_matmul(&resid);
    let ev = dense_eigenvalues(&rg)?;
    let spectral = ev.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    Ok((spectral.min(1.0), fro))
}

/// Spectral norm of an arbitrary dense matrix via the Gram spectrum.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    let g = if m.rows >= m.cols { m.transpose_matmul(m) } else { m.matmul(&m.transpose()) };
    let sym = DenseMatrix::from_fn(g.rows, g.cols, |i, j| 0.5 * (g.at(i, j) + g.at(j, i)));
    match dense_eigenvalues(&sym) {
        Ok(ev) => ev.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}
