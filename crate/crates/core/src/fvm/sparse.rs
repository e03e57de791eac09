use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use super::FvmError;

/// What an operator discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Diffusion,
    GradX,
    GradY,
    /// Stacked block operator flattened into one matrix.
    Block,
    /// Anything else (constraint Jacobians, test operators).
    General,
}

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing, so there are no duplicate entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    pub kind: OperatorKind,
}

/// Accumulates `(row, col, value)` contributions; duplicates are summed on
/// compression.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self::with_capacity(n_rows, n_cols, 0)
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(value);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Compresses to CSR. Entries are bucketed by row (stable, so the sum of
    /// duplicates follows insertion order), then sorted by column within each
    /// row. Cost is linear in the number of triplets for bounded row lengths.
    pub fn build(self, kind: OperatorKind) -> Result<SparseOperator, FvmError> {
        let Self {
            n_rows,
            n_cols,
            rows,
            cols,
            vals,
        } = self;
        if let Some(i) = (0..rows.len()).find(|&i| rows[i] >= n_rows || cols[i] >= n_cols) {
            return Err(FvmError::IndexOutOfRange {
                row: rows[i],
                col: cols[i],
                n_rows,
                n_cols,
            });
        }
        let mut counts = vec![0usize; n_rows + 1];
        for &r in &rows {
            counts[r + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut order = vec![0usize; rows.len()];
        for (i, &r) in rows.iter().enumerate() {
            order[next[r]] = i;
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..n_rows {
            scratch.clear();
            scratch.extend(order[counts[r]..counts[r + 1]].iter().map(|&i| (cols[i], vals[i])));
            scratch.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut v = 0.0;
                while k < scratch.len() && scratch[k].0 == c {
                    v += scratch[k].1;
                    k += 1;
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseOperator {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            kind,
        })
    }
}

impl SparseOperator {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn identity(n: usize, scale: f64) -> Self {
        Self::diagonal(&vec![scale; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
            kind: OperatorKind::General,
        }
    }

    /// `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Sparse matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FvmError> {
        if x.len() != self.n_cols {
            return Err(FvmError::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        Ok((0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect())
    }

    /// `A^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>, FvmError> {
        if x.len() != self.n_rows {
            return Err(FvmError::DimensionMismatch {
                expected: self.n_rows,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_cols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += v * xr;
            }
        }
        Ok(out)
    }

    /// Sparse times dense: `A B`.
    pub fn mul_dense(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>, FvmError> {
        if b.nrows() != self.n_cols {
            return Err(FvmError::DimensionMismatch {
                expected: self.n_cols,
                found: b.nrows(),
            });
        }
        let mut out = DMatrix::zeros(self.n_rows, b.ncols());
        for j in 0..b.ncols() {
            let col = b.column(j);
            for r in 0..self.n_rows {
                out[(r, j)] = self.row(r).map(|(c, v)| v * col[c]).sum();
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Multiplies row `r` by `s[r]`.
    pub fn row_scaled(&self, s: &[f64]) -> Self {
        let mut out = self.clone();
        for (r, &sr) in s.iter().enumerate().take(self.n_rows) {
            for v in &mut out.values[self.row_ptr[r]..self.row_ptr[r + 1]] {
                *v *= sr;
            }
        }
        out
    }

    /// `self + other`, same shape.
    pub fn add(&self, other: &Self) -> Result<Self, FvmError> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(FvmError::DimensionMismatch {
                expected: self.n_rows * self.n_cols,
                found: other.n_rows * other.n_cols,
            });
        }
        let mut b = TripletBuilder::with_capacity(self.n_rows, self.n_cols, self.nnz() + other.nnz());
        for (r, c, v) in self.triplets().chain(other.triplets()) {
            b.push(r, c, v);
        }
        b.build(self.kind)
    }

    pub fn apply_dense(&self, x: &DVector<f64>) -> Result<DVector<f64>, FvmError> {
        Ok(DVector::from_vec(self.apply(x.as_slice())?))
    }

    /// Largest number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        (0..self.n_rows)
            .map(|r| self.row_ptr[r + 1] - self.row_ptr[r])
            .max()
            .unwrap_or(0)
    }

    /// Writes the `sparse <rows> <cols> <nnz>` triplet text format.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sparse {} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {v:?}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R, kind: OperatorKind) -> Result<Self, FvmError> {
        let mut lines = r.lines().enumerate();
        let bad = |line: usize, msg: &str| FvmError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty input"))?;
        let header = header?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "sparse" {
            return Err(bad(1, "expected 'sparse <rows> <cols> <nnz>'"));
        }
        let parse = |t: &str, line: usize| t.parse::<usize>().map_err(|_| bad(line, "bad integer"));
        let (n_rows, n_cols, nnz) = (parse(toks[1], 1)?, parse(toks[2], 1)?, parse(toks[3], 1)?);
        let mut b = TripletBuilder::with_capacity(n_rows, n_cols, nnz);
        for _ in 0..nnz {
            let (i, line) = lines.next().ok_or_else(|| bad(nnz + 1, "missing entries"))?;
            let line = line?;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(bad(i + 1, "expected 'row col value'"));
            }
            let v: f64 = t[2].parse().map_err(|_| bad(i + 1, "bad value"))?;
            b.push(parse(t[0], i + 1)?, parse(t[1], i + 1)?, v);
        }
        b.build(kind)
    }
}
