//! Real symmetric sparse matrices in CSR form, their products, and
//! Matrix Market interchange.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::Error;
use crate::Result;

/// Real symmetric sparse matrix, full (not triangular) CSR storage.
///
/// Invariants: structurally and numerically symmetric; `row_offsets` is
/// non-decreasing with `row_offsets[n] == nnz`; column indices sorted and
/// unique within each row; all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparseMatrix {
    pub n: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SymmetricSparseMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row `i` as parallel (column, value) slices.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d.set(i, j, v);
            }
        }
        d
    }

    /// Upper Gershgorin bound: max_i (a_ii + sum_{j != i} |a_ij|).
    pub fn gershgorin_upper(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut diag = 0.0;
            let mut off = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag = v;
                } else {
                    off += v.abs();
                }
            }
            best = best.max(diag + off);
        }
        if self.n == 0 {
            0.0
        } else {
            best
        }
    }

    /// Lower Gershgorin bound.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut diag = 0.0;
            let mut off = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag = v;
                } else {
                    off += v.abs();
                }
            }
            best = best.min(diag - off);
        }
        if self.n == 0 {
            0.0
        } else {
            best
        }
    }
}

/// Builds a symmetric CSR matrix from coordinate triplets.
///
/// Duplicates are summed; missing mirror entries are filled in; if both
/// `(i, j)` and `(j, i)` are given they must agree exactly after duplicate
/// summing.
pub fn csr_from_triplets(entries: &[(usize, usize, f64)], n: usize) -> Result<SymmetricSparseMatrix> {
    let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(i, j, v) in entries {
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { row: i, col: j, n });
        }
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { row: i, col: j });
        }
        *map.entry((i, j)).or_insert(0.0) += v;
    }
    // mirror and check
    let mut full: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &v) in &map {
        full.insert((i, j), v);
        match map.get(&(j, i)) {
            Some(&w) if i != j => {
                if w != v {
                    return Err(Error::AsymmetricInput { i, j, a: v, b: w });
                }
            }
            _ => {
                full.insert((j, i), v);
            }
        }
    }
    let mut row_offsets = vec![0usize; n + 1];
    for &(i, _) in full.keys() {
        row_offsets[i + 1] += 1;
    }
    for i in 0..n {
        row_offsets[i + 1] += row_offsets[i];
    }
    let nnz = row_offsets[n];
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for (&(_, j), &v) in &full {
        col_indices.push(j);
        values.push(v);
    }
    Ok(SymmetricSparseMatrix { n, row_offsets, col_indices, values })
}

/// y = A x with the standard CSR accumulation order.
pub fn spmv(a: &SymmetricSparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: x.len() });
    }
    let mut y = vec![0.0; a.n];
    for i in 0..a.n {
        let (cols, vals) = a.row(i);
        let mut acc = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            acc += v * x[j];
        }
        y[i] = acc;
    }
    Ok(y)
}

/// Y = A X, columnwise semantics; bitwise identical to stacked [`spmv`] calls.
pub fn spmm(a: &SymmetricSparseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.rows != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: x.rows });
    }
    let mut y = DenseMatrix::zeros(a.n, x.cols);
    for i in 0..a.n {
        let (cols, vals) = a.row(i);
        let y_row = y.row_mut(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let x_row = x.row(j);
            for (acc, &xv) in y_row.iter_mut().zip(x_row) {
                *acc += v * xv;
            }
        }
    }
    Ok(y)
}

/// Reads a Matrix Market coordinate file (real symmetric or real general).
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SymmetricSparseMatrix> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::ParseError { line: 1, msg: "empty file".into() })
        .and_then(|(i, l)| l.map(|s| (i + 1, s)).map_err(|e| Error::Io(e.to_string())))?;
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() < 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(Error::ParseError { line: line_no, msg: "missing %%MatrixMarket header".into() });
    }
    if toks[2] != "coordinate" {
        return Err(Error::UnsupportedKind(toks[2].clone()));
    }
    if toks[3] != "real" {
        return Err(Error::UnsupportedKind(toks[3].clone()));
    }
    let symmetric = match toks[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::UnsupportedKind(other.to_string())),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Io(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            if fields.len() != 3 {
                return Err(Error::ParseError { line: line_no, msg: "expected 'rows cols nnz'".into() });
            }
            let m: usize = fields[0].parse().map_err(|_| Error::ParseError {
                line: line_no,
                msg: format!("bad row count '{}'", fields[0]),
            })?;
            let n: usize = fields[1].parse().map_err(|_| Error::ParseError {
                line: line_no,
                msg: format!("bad col count '{}'", fields[1]),
            })?;
            let nnz: usize = fields[2].parse().map_err(|_| Error::ParseError {
                line: line_no,
                msg: format!("bad entry count '{}'", fields[2]),
            })?;
            if m != n {
                return Err(Error::ParseError { line: line_no, msg: format!("matrix not square: {m} x {n}") });
            }
            size = Some((m, n, nnz));
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::ParseError { line: line_no, msg: "expected 'i j value'".into() });
        }
        let i: usize = fields[0].parse().map_err(|_| Error::ParseError {
            line: line_no,
            msg: format!("bad row index '{}'", fields[0]),
        })?;
        let j: usize = fields[1].parse().map_err(|_| Error::ParseError {
            line: line_no,
            msg: format!("bad col index '{}'", fields[1]),
        })?;
        let v: f64 = fields[2].parse().map_err(|_| Error::ParseError {
            line: line_no,
            msg: format!("bad value '{}'", fields[2]),
        })?;
        let n = size.unwrap().1;
        if i == 0 || j == 0 {
            return Err(Error::ParseError { line: line_no, msg: "Matrix Market indices are 1-based".into() });
        }
        if i > n || j > n {
            return Err(Error::IndexOutOfRange { row: i - 1, col: j - 1, n });
        }
        // symmetric files carry one triangle; mirroring happens in the builder
        let _ = symmetric;
        triplets.push((i - 1, j - 1, v));
    }
    let (_, n, nnz) = size.ok_or(Error::ParseError { line: 0, msg: "missing size line".into() })?;
    if triplets.len() != nnz {
        return Err(Error::ParseError {
            line: 0,
            msg: format!("entry count mismatch: header says {nnz}, found {}", triplets.len()),
        });
    }
    csr_from_triplets(&triplets, n)
}

/// Writes a Matrix Market coordinate file, symmetric kind, lower triangle,
/// values serialized with 17 significant digits.
pub fn write_matrix_market(a: &SymmetricSparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?,
    );
    let mut lower = 0usize;
    for i in 0..a.n {
        let (cols, _) = a.row(i);
        lower += cols.iter().filter(|&&j| j <= i).count();
    }
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric").map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{} {} {}", a.n, a.n, lower).map_err(|e| Error::Io(e.to_string()))?;
    for i in 0..a.n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v).map_err(|e| Error::Io(e.to_string()))?;
            }
        }
    }
    Ok(())
}
