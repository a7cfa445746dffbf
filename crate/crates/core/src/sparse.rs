//! Compressed sparse row matrices and Matrix Market exchange.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Real sparse matrix in compressed-row form with sorted, unique column
/// indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates (row, col, value) entries; duplicates are summed on build.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Adds a dense local block `local[i][j]` at global `rows[i]`, `cols[j]`.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], local: &[f64]) {
        debug_assert_eq!(local.len(), rows.len() * cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.push(r, c, local[i * cols.len() + j]);
            }
        }
    }

    /// Builds the CSR matrix. Duplicates are summed in insertion order, so
    /// the result does not depend on anything but the push sequence.
    pub fn build(mut self) -> SparseOperator {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0; self.nrows + 1];
        let mut col_indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        SparseOperator {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds from a row-major dense array, dropping exact zeros.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64]) -> Self {
        let mut b = TripletBuilder::new(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                let v = data[i * ncols + j];
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Stored entry (i, j); structurally absent entries read as zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).0.binary_search(&j).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.iter() {
            b.push(j, i, v);
        }
        b.build()
    }

    pub fn scale(&self, factor: f64) -> SparseOperator {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// a·A + b·B over the union of both sparsity patterns.
    pub fn linear_combination(a: f64, lhs: &SparseOperator, b: f64, rhs: &SparseOperator) -> Result<SparseOperator> {
        if lhs.nrows != rhs.nrows || lhs.ncols != rhs.ncols {
            return Err(Error::Dimension(format!(
                "cannot combine {}x{} with {}x{}",
                lhs.nrows, lhs.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let mut row_offsets = Vec::with_capacity(lhs.nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        let mut values = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        for i in 0..lhs.nrows {
            let (ca, va) = lhs.row(i);
            let (cb, vb) = rhs.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja == jb {
                    col_indices.push(ja);
                    values.push(a * va[p] + b * vb[q]);
                    p += 1;
                    q += 1;
                } else if ja < jb {
                    col_indices.push(ja);
                    values.push(a * va[p]);
                    p += 1;
                } else {
                    col_indices.push(jb);
                    values.push(b * vb[q]);
                    q += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseOperator {
            nrows: lhs.nrows,
            ncols: lhs.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles the 2×2 block matrix `[[a, b], [c, d]]`.
    pub fn block2x2(a: &SparseOperator, b: &SparseOperator, c: &SparseOperator, d: &SparseOperator) -> Result<SparseOperator> {
        if a.nrows != b.nrows || c.nrows != d.nrows || a.ncols != c.ncols || b.ncols != d.ncols {
            return Err(Error::Dimension("inconsistent block sizes".into()));
        }
        let (r0, c0) = (a.nrows, a.ncols);
        let mut out = TripletBuilder::with_capacity(r0 + c.nrows, c0 + b.ncols, a.nnz() + b.nnz() + c.nnz() + d.nnz());
        for (blk, ro, co) in [(a, 0, 0), (b, 0, c0), (c, r0, 0), (d, r0, c0)] {
            for (i, j, v) in blk.iter() {
                out.push(i + ro, j + co, v);
            }
        }
        Ok(out.build())
    }

    /// Rows `rows` and columns `cols` (both given as index lists).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseOperator {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut b = TripletBuilder::new(rows.len(), cols.len());
        for (k, &r) in rows.iter().enumerate() {
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                if col_map[c] != usize::MAX {
                    b.push(k, col_map[c], v);
                }
            }
        }
        b.build()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |A - Aᵀ| over all entries.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.iter().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max)
    }

    /// Symmetric to `rel_tol` relative to the largest entry.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol * self.max_abs()
    }

    /// Sum of all stored entries.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let mut m = faer::Mat::<f64>::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    /// Writes the matrix in Matrix Market coordinate format with 17
    /// significant digits.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    /// Reads a real coordinate Matrix Market file (`general` or `symmetric`).
    pub fn read_matrix_market<R: BufRead>(input: R) -> Result<SparseOperator> {
        let mut lines = input.lines().enumerate();
        let err = |line: usize, msg: &str| Error::MatrixMarket {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (n0, header) = lines.next().ok_or_else(|| err(0, "empty input"))?;
        let header = header?.to_lowercase();
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
            return Err(err(n0, "expected '%%MatrixMarket matrix coordinate' header"));
        }
        if tokens[3] != "real" && tokens[3] != "integer" {
            return Err(err(n0, "only real or integer fields are supported"));
        }
        let symmetric = match tokens[4] {
            "general" => false,
            "symmetric" => true,
            _ => return Err(err(n0, "only general or symmetric storage is supported")),
        };
        let mut size: Option<(usize, usize, usize)> = None;
        let mut builder: Option<TripletBuilder> = None;
        let mut seen = 0;
        for (n, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match size {
                None => {
                    if parts.len() != 3 {
                        return Err(err(n, "expected 'rows cols entries'"));
                    }
                    let p = |s: &str| s.parse::<usize>().map_err(|_| err(n, "bad size"));
                    let (r, c, k) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
                    size = Some((r, c, k));
                    builder = Some(TripletBuilder::with_capacity(r, c, if symmetric { 2 * k } else { k }));
                }
                Some((r, c, _)) => {
                    if parts.len() != 3 {
                        return Err(err(n, "expected 'row col value'"));
                    }
                    let i: usize = parts[0].parse().map_err(|_| err(n, "bad row index"))?;
                    let j: usize = parts[1].parse().map_err(|_| err(n, "bad column index"))?;
                    let v: f64 = parts[2].parse().map_err(|_| err(n, "bad value"))?;
                    if i == 0 || j == 0 || i > r || j > c {
                        return Err(err(n, "index out of range"));
                    }
                    let b = builder.as_mut().unwrap();
                    b.push(i - 1, j - 1, v);
                    if symmetric && i != j {
                        b.push(j - 1, i - 1, v);
                    }
                    seen += 1;
                }
            }
        }
        let (_, _, k) = size.ok_or_else(|| err(0, "missing size line"))?;
        if seen != k {
            return Err(err(0, &format!("expected {k} entries, found {seen}")));
        }
        Ok(builder.unwrap().build())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> SparseOperator {
        let mut b = TripletBuilder::new(3, 3);
        b.push(0, 0, 2.0);
        b.push(2, 1, -1.5);
        b.push(0, 0, 1.0);
        b.push(1, 2, 0.1);
        b.push(1, 0, 4.0);
        b.build()
    }

    #[test]
    fn duplicates_are_summed_and_rows_sorted() {
        let a = sample();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.row(1).0, &[0, 2]);
        assert_eq!(a.get(2, 2), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 2.0, 3.0]), vec![3.0, 4.3, -3.0]);
    }

    #[test]
    fn transpose_and_symmetry() {
        let a = sample();
        let at = a.transpose();
        assert_eq!(at.get(0, 1), 4.0);
        assert!(!a.is_symmetric(1e-12));
        let s = SparseOperator::linear_combination(1.0, &a, 1.0, &at).unwrap();
        assert_eq!(s.asymmetry(), 0.0);
    }

    #[test]
    fn blocks_and_submatrix() {
        let i = SparseOperator::identity(2);
        let z = SparseOperator::zeros(2, 2);
        let d = SparseOperator::from_diagonal(&[3.0, 4.0]);
        let l = SparseOperator::block2x2(&z, &i, &i, &d).unwrap();
        assert_eq!(l.nrows(), 4);
        assert_eq!(l.mul_vec(&[1.0, 2.0, 3.0, 4.0]), vec![3.0, 4.0, 1.0 + 9.0, 2.0 + 16.0]);
        let sub = l.submatrix(&[2, 3], &[2, 3]);
        assert_eq!(sub, d);
        assert!(SparseOperator::linear_combination(1.0, &i, 1.0, &SparseOperator::identity(3)).is_err());
    }

    #[test]
    fn matrix_market_text() {
        let mut buf = Vec::new();
        SparseOperator::from_diagonal(&[0.1, 2.0]).write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0000000000000001e-1\n2 2 2.0000000000000000e0\n"
        );
    }

    #[test]
    fn matrix_market_symmetric_and_errors() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4\n2 1 1.5\n";
        let a = SparseOperator::read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(1, 0), 1.5);
        assert!(SparseOperator::read_matrix_market("garbage\n".as_bytes()).is_err());
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 4\n";
        assert!(SparseOperator::read_matrix_market(short.as_bytes()).is_err());
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 4\n";
        assert!(SparseOperator::read_matrix_market(oob.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn matrix_market_roundtrip_is_exact(
            entries in proptest::collection::vec((0usize..7, 0usize..5, -1e6f64..1e6), 0..40)
        ) {
            let mut b = TripletBuilder::new(7, 5);
            for (i, j, v) in entries {
                b.push(i, j, v);
            }
            let a = b.build();
            let mut buf = Vec::new();
            a.write_matrix_market(&mut buf).unwrap();
            let back = SparseOperator::read_matrix_market(buf.as_slice()).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn linear_combination_matches_dense(
            a in proptest::collection::vec(-3.0f64..3.0, 16),
            b in proptest::collection::vec(-3.0f64..3.0, 16),
            s in -2.0f64..2.0,
            t in -2.0f64..2.0,
        ) {
            let (ma, mb) = (SparseOperator::from_dense(4, 4, &a), SparseOperator::from_dense(4, 4, &b));
            let c = SparseOperator::linear_combination(s, &ma, t, &mb).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((c.get(i, j) - (s * a[i * 4 + j] + t * b[i * 4 + j])).abs() < 1e-12);
                }
            }
        }
    }
}
