//! Dense matrix/vector primitives and triangular solves.
//!
//! Storage is column-major double precision throughout: Algorithms that
//! consume `A` column-by-column (the least-squares Huang sweeps) and the
//! column collections `P_i` get contiguous access; row-oriented access is
//! strided, which is acceptable at the matrix sizes this crate targets.
//!
//! Public element access is 1-based to mirror the usual linear-algebra
//! indexing; the internal layout is private.

use thiserror::Error;

/// Machine epsilon for `f64`.
pub const EPS: f64 = f64::EPSILON;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("singular triangular matrix: zero diagonal at index {index}")]
    SingularTriangular { index: usize },
    #[error("invalid dimensions: rows and cols must be at least 1")]
    EmptyDimensions,
    #[error("data length {found} does not match rows*cols = {expected}")]
    InvalidDataLength { expected: usize, found: usize },
}

/// Dense real matrix, column-major, double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn from_column_major(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyDimensions);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidDataLength {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "dimensions must be at least 1");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 1..=n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices (convenience for tests and literals).
    ///
    /// # Panics
    /// Panics on empty input or ragged rows.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        assert!(!rows.is_empty(), "at least one row required");
        let ncols = rows[0].len();
        assert!(ncols > 0, "at least one column required");
        let mut m = Self::zeros(rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "row {} has inconsistent length", i + 1);
            for (j, &v) in row.iter().enumerate() {
                m.set(i + 1, j + 1, v);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Element (i, j), 1-based.
    ///
    /// # Panics
    /// Panics when an index is out of range.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(
            (1..=self.rows).contains(&i) && (1..=self.cols).contains(&j),
            "index ({i}, {j}) out of range for {}x{} matrix",
            self.rows,
            self.cols
        );
        self.data[(j - 1) * self.rows + (i - 1)]
    }

    /// Sets element (i, j), 1-based.
    ///
    /// # Panics
    /// Panics when an index is out of range.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            (1..=self.rows).contains(&i) && (1..=self.cols).contains(&j),
            "index ({i}, {j}) out of range for {}x{} matrix",
            self.rows,
            self.cols
        );
        self.data[(j - 1) * self.rows + (i - 1)] = v;
    }

    /// Column j (1-based) as a contiguous slice.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        assert!((1..=self.cols).contains(&j), "column {j} out of range");
        &self.data[(j - 1) * self.rows..j * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        assert!((1..=self.cols).contains(&j), "column {j} out of range");
        &mut self.data[(j - 1) * self.rows..j * self.rows]
    }

    /// Copies row i (1-based) into `buf`.
    pub fn copy_row_into(&self, i: usize, buf: &mut [f64]) {
        assert!((1..=self.rows).contains(&i), "row {i} out of range");
        assert_eq!(buf.len(), self.cols, "buffer length must equal cols");
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = self.data[j * self.rows + (i - 1)];
        }
    }

    pub fn row(&self, i: usize) -> Vector {
        let mut buf = vec![0.0; self.cols];
        self.copy_row_into(i, &mut buf);
        Vector::new(buf)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 1..=self.cols {
            for i in 1..=self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// A·B.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 1..=other.cols {
            let bcol = other.col(j);
            let ocol = out.col_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj == 0.0 {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for (o, &a) in ocol.iter_mut().zip(acol) {
                    *o += a * bkj;
                }
            }
        }
        Ok(out)
    }
}

/// Dense real vector, double precision, 1-based public indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// # Panics
    /// Panics on empty data.
    pub fn new(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "vector length must be at least 1");
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "vector length must be at least 1");
        Self {
            data: vec![0.0; len],
        }
    }

    /// Unit coordinate vector e_i (1-based) of length n.
    pub fn unit(n: usize, i: usize) -> Self {
        assert!((1..=n).contains(&i), "unit index {i} out of range");
        let mut v = Self::zeros(n);
        v.data[i - 1] = 1.0;
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    /// Element i, 1-based.
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        assert!(
            (1..=self.data.len()).contains(&i),
            "index {i} out of range for vector of length {}",
            self.data.len()
        );
        self.data[i - 1]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        assert!(
            (1..=self.data.len()).contains(&i),
            "index {i} out of range for vector of length {}",
            self.data.len()
        );
        self.data[i - 1] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        dot(&self.data, &other.data)
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: f64, other: &Vector) {
        debug_assert_eq!(self.len(), other.len());
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += alpha * o;
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector::new(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Packed lower-triangular matrix. Row i (1-based) holds entries
/// (i,1)..(i,i); strictly-upper entries do not exist in storage.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    order: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "order must be at least 1");
        Self {
            order,
            data: vec![0.0; order * (order + 1) / 2],
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        (i - 1) * i / 2 + (j - 1)
    }

    /// Element (i, j) with j ≤ i, 1-based.
    ///
    /// # Panics
    /// Panics outside the lower triangle.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(
            (1..=self.order).contains(&i) && j >= 1 && j <= i,
            "index ({i}, {j}) outside lower triangle of order {}",
            self.order
        );
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            (1..=self.order).contains(&i) && j >= 1 && j <= i,
            "index ({i}, {j}) outside lower triangle of order {}",
            self.order
        );
        let off = self.offset(i, j);
        self.data[off] = v;
    }

    /// Max row-sum norm ‖L‖∞ over the stored triangle.
    pub fn norm_inf(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 1..=self.order {
            let row_sum: f64 = (1..=i).map(|j| self.get(i, j).abs()).sum();
            best = best.max(row_sum);
        }
        best
    }
}

/// A·x.
pub fn matvec(a: &DenseMatrix, x: &Vector) -> Result<Vector, LinalgError> {
    if a.cols() != x.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "matvec",
            expected: a.cols(),
            found: x.len(),
        });
    }
    let mut out = vec![0.0; a.rows()];
    for j in 1..=a.cols() {
        let xj = x.as_slice()[j - 1];
        if xj == 0.0 {
            continue;
        }
        for (o, &aij) in out.iter_mut().zip(a.col(j)) {
            *o += aij * xj;
        }
    }
    Ok(Vector::new(out))
}

/// Aᵀ·y.
pub fn matvec_transposed(a: &DenseMatrix, y: &Vector) -> Result<Vector, LinalgError> {
    if a.rows() != y.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "matvec_transposed",
            expected: a.rows(),
            found: y.len(),
        });
    }
    let mut out = vec![0.0; a.cols()];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = dot(a.col(j + 1), y.as_slice());
    }
    Ok(Vector::new(out))
}

/// Solves Lᵀx = c by back substitution.
///
/// Fails with the offending index when a diagonal entry is exactly zero.
pub fn back_substitute(l: &LowerTriangular, c: &Vector) -> Result<Vector, LinalgError> {
    let n = l.order();
    if c.len() != n {
        return Err(LinalgError::DimensionMismatch {
            op: "back_substitute",
            expected: n,
            found: c.len(),
        });
    }
    let mut x = vec![0.0; n];
    for i in (1..=n).rev() {
        let diag = l.get(i, i);
        if diag == 0.0 {
            return Err(LinalgError::SingularTriangular { index: i });
        }
        // (Lᵀ)_{ij} = L_{ji} for j >= i
        let mut sum = c.get(i);
        for j in (i + 1)..=n {
            sum -= l.get(j, i) * x[j - 1];
        }
        x[i - 1] = sum / diag;
    }
    Ok(Vector::new(x))
}
