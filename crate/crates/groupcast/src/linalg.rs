//! Exact dense linear algebra over GF(p).
//!
//! Everything a key-assignment scheme needs reduces to small-matrix
//! questions: ranks decide decodability and leakage, determinants certify
//! MDS structure, null spaces produce broadcast precoders. All routines are
//! deterministic — same input, same pivots, same basis — because scheme
//! construction and verification must be reproducible bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::field::{FieldElement, PrimeModulus};

/// Errors from matrix construction and operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("entry count {found} does not match {rows}x{cols}")]
    BadEntryCount { rows: usize, cols: usize, found: usize },
    #[error("entry at ({row},{col}) belongs to GF({found}), expected GF({expected})")]
    MixedModuli { row: usize, col: usize, expected: u64, found: u64 },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("modulus mismatch: GF({left}) vs GF({right})")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("determinant requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("cannot pick {needed} distinct evaluation points in GF({modulus})")]
    NotEnoughPoints { needed: usize, modulus: u64 },
    #[error("evaluation points must be distinct")]
    DuplicatePoints,
    #[error("MDS test requires at least as many rows as columns, got {rows}x{cols}")]
    TooFewRows { rows: usize, cols: usize },
    #[error("elementary symmetric degree {degree} exceeds point count {count}")]
    DegreeOutOfRange { degree: usize, count: usize },
}

/// A dense row-major matrix over GF(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
    modulus: PrimeModulus,
}

/// Plain serializable form of a matrix: shape plus row-major canonical
/// representatives. Scheme files store matrices in this form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u64>,
}

impl FieldMatrix {
    /// Builds a matrix from row-major entries, checking shape and that every
    /// entry lives in the stated field.
    pub fn new(
        modulus: PrimeModulus,
        rows: usize,
        cols: usize,
        entries: Vec<FieldElement>,
    ) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::BadEntryCount {
                rows,
                cols,
                found: entries.len(),
            });
        }
        for (i, e) in entries.iter().enumerate() {
            if e.modulus() != modulus {
                return Err(LinalgError::MixedModuli {
                    row: i / cols.max(1),
                    col: i % cols.max(1),
                    expected: modulus.get(),
                    found: e.modulus().get(),
                });
            }
        }
        Ok(FieldMatrix {
            rows,
            cols,
            entries,
            modulus,
        })
    }

    /// Builds a matrix from row-major unsigned integers, reducing each mod p.
    pub fn from_u64(
        modulus: PrimeModulus,
        rows: usize,
        cols: usize,
        entries: &[u64],
    ) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::BadEntryCount {
                rows,
                cols,
                found: entries.len(),
            });
        }
        let entries = entries.iter().map(|&v| modulus.element(v)).collect();
        Self::new(modulus, rows, cols, entries)
    }

    /// Builds a matrix from row-major signed integers (convenient for
    /// hand-written tables containing -1 coefficients).
    pub fn from_i64(
        modulus: PrimeModulus,
        rows: usize,
        cols: usize,
        entries: &[i64],
    ) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::BadEntryCount {
                rows,
                cols,
                found: entries.len(),
            });
        }
        let entries = entries
            .iter()
            .map(|&v| modulus.element_from_i64(v))
            .collect();
        Self::new(modulus, rows, cols, entries)
    }

    /// Builds a matrix from a list of equal-length rows.
    pub fn from_rows(
        modulus: PrimeModulus,
        rows: Vec<Vec<FieldElement>>,
    ) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for r in &rows {
            if r.len() != ncols {
                return Err(LinalgError::BadEntryCount {
                    rows: nrows,
                    cols: ncols,
                    found: r.len(),
                });
            }
        }
        Self::new(modulus, nrows, ncols, rows.into_iter().flatten().collect())
    }

    /// The all-zero matrix.
    pub fn zero(modulus: PrimeModulus, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            rows,
            cols,
            entries: vec![modulus.zero(); rows * cols],
            modulus,
        }
    }

    /// The n x n identity.
    pub fn identity(modulus: PrimeModulus, n: usize) -> Self {
        let mut m = Self::zero(modulus, n, n);
        for i in 0..n {
            m.set(i, i, modulus.one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: FieldElement) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        assert_eq!(value.modulus(), self.modulus, "mixed-field entry");
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[FieldElement] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_values(&self, row: usize) -> Vec<u64> {
        self.row(row).iter().map(|e| e.value()).collect()
    }

    /// Row-major canonical representatives of all entries.
    pub fn values(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.value()).collect()
    }

    /// Conversion to the plain serializable form.
    pub fn to_data(&self) -> MatrixData {
        MatrixData {
            rows: self.rows,
            cols: self.cols,
            entries: self.values(),
        }
    }

    /// Reconstruction from the plain serializable form.
    pub fn from_data(modulus: PrimeModulus, data: &MatrixData) -> Result<Self, LinalgError> {
        Self::from_u64(modulus, data.rows, data.cols, &data.entries)
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        if self.modulus != rhs.modulus {
            return Err(LinalgError::ModulusMismatch {
                left: self.modulus.get(),
                right: rhs.modulus.get(),
            });
        }
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let p = self.modulus.get() as u128;
        let mut out = FieldMatrix::zero(self.modulus, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u128;
                for k in 0..self.cols {
                    acc += self.get(i, k).value() as u128 * rhs.get(k, j).value() as u128;
                    acc %= p;
                }
                out.set(i, j, self.modulus.element(acc as u64));
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        let col = FieldMatrix::new(self.modulus, v.len(), 1, v.to_vec())?;
        Ok(self.mul(&col)?.entries)
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = FieldMatrix::zero(self.modulus, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Stacks `self` on top of `rhs` (column counts must agree).
    pub fn vstack(&self, rhs: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        if self.modulus != rhs.modulus {
            return Err(LinalgError::ModulusMismatch {
                left: self.modulus.get(),
                right: rhs.modulus.get(),
            });
        }
        if self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&rhs.entries);
        FieldMatrix::new(self.modulus, self.rows + rhs.rows, self.cols, entries)
    }

    /// Places `rhs` to the right of `self` (row counts must agree).
    pub fn hstack(&self, rhs: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        if self.modulus != rhs.modulus {
            return Err(LinalgError::ModulusMismatch {
                left: self.modulus.get(),
                right: rhs.modulus.get(),
            });
        }
        if self.rows != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = FieldMatrix::zero(self.modulus, self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j));
            }
        }
        Ok(out)
    }

    /// The submatrix consisting of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            entries.extend_from_slice(self.row(r));
        }
        FieldMatrix {
            rows: rows.len(),
            cols: self.cols,
            entries,
            modulus: self.modulus,
        }
    }

    /// Rank by Gaussian elimination with leftmost-nonzero pivoting.
    pub fn rank(&self) -> usize {
        rank_raw(self.raw_rows(), self.modulus.get())
    }

    /// Determinant by Gaussian elimination; errors on non-square input.
    pub fn det(&self) -> Result<FieldElement, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let p = self.modulus.get();
        let n = self.rows;
        let mut m = self.raw_rows();
        let mut det = 1u64;
        let mut neg = false;
        for col in 0..n {
            let pivot = match (col..n).find(|&r| m[r][col] != 0) {
                Some(r) => r,
                None => return Ok(self.modulus.zero()),
            };
            if pivot != col {
                m.swap(pivot, col);
                neg = !neg;
            }
            let pv = m[col][col];
            det = mul_mod(det, pv, p);
            let inv = inv_mod(pv, p);
            for r in col + 1..n {
                let factor = mul_mod(m[r][col], inv, p);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    m[r][c] = sub_mod(m[r][c], mul_mod(factor, m[col][c], p), p);
                }
            }
        }
        let value = if neg { (p - det % p) % p } else { det };
        Ok(self.modulus.element(value))
    }

    /// A deterministic basis for the right null space `{x : self * x = 0}`,
    /// returned as a matrix whose columns are the basis vectors.
    ///
    /// The basis comes from the reduced row echelon form: free columns are
    /// taken in increasing index order and each basis vector sets its free
    /// coordinate to 1. Same matrix in, same basis out.
    pub fn right_null_space(&self) -> FieldMatrix {
        let p = self.modulus.get();
        let mut m = self.raw_rows();
        let pivot_cols = rref_in_place(&mut m, p);
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &c in &pivot_cols {
                v[c] = true;
            }
            v
        };
        let free_cols: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = FieldMatrix::zero(self.modulus, self.cols, free_cols.len());
        for (j, &free) in free_cols.iter().enumerate() {
            basis.set(free, j, self.modulus.one());
            // Pivot row i has a 1 in pivot_cols[i]; solve x_pivot = -coeff.
            for (i, &pc) in pivot_cols.iter().enumerate() {
                let coeff = m[i][free];
                if coeff != 0 {
                    basis.set(pc, j, self.modulus.element(p - coeff));
                }
            }
        }
        basis
    }

    /// Whether every maximal square submatrix (choose `cols` of the rows) is
    /// invertible — the defining property of an MDS generator.
    pub fn is_mds(&self) -> Result<bool, LinalgError> {
        if self.rows < self.cols {
            return Err(LinalgError::TooFewRows {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        for combo in combinations(&idx, self.cols) {
            let minor = self.select_rows(&combo);
            if minor.det()?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn raw_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row_values(r)).collect()
    }
}

/// Vandermonde matrix with rows `[1, v_k, v_k^2, ..., v_k^(cols-1)]` over the
/// default evaluation points `1, 2, ..., k`. Requires `p >= k` so the points
/// stay distinct after reduction.
pub fn vandermonde(
    k: usize,
    cols: usize,
    modulus: PrimeModulus,
) -> Result<FieldMatrix, LinalgError> {
    if (modulus.get() as usize) < k {
        return Err(LinalgError::NotEnoughPoints {
            needed: k,
            modulus: modulus.get(),
        });
    }
    let points: Vec<FieldElement> = (1..=k as u64).map(|v| modulus.element(v)).collect();
    vandermonde_with_points(&points, cols)
}

/// Vandermonde matrix over caller-chosen evaluation points, which must be
/// pairwise distinct.
pub fn vandermonde_with_points(
    points: &[FieldElement],
    cols: usize,
) -> Result<FieldMatrix, LinalgError> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[..i] {
            if a == b {
                return Err(LinalgError::DuplicatePoints);
            }
        }
    }
    let modulus = match points.first() {
        Some(e) => e.modulus(),
        None => {
            return Err(LinalgError::NotEnoughPoints {
                needed: 1,
                modulus: 0,
            })
        }
    };
    let mut rows = Vec::with_capacity(points.len());
    for &v in points {
        let mut row = Vec::with_capacity(cols);
        let mut acc = modulus.one();
        for _ in 0..cols {
            row.push(acc);
            acc = acc * v;
        }
        rows.push(row);
    }
    FieldMatrix::from_rows(modulus, rows)
}

/// Elementary symmetric polynomial `e_degree` of the given values
/// (`e_0 = 1`, `e_1 = sum`, ..., `e_n = product`).
pub fn elementary_symmetric(
    values: &[FieldElement],
    degree: usize,
    modulus: PrimeModulus,
) -> Result<FieldElement, LinalgError> {
    if degree > values.len() {
        return Err(LinalgError::DegreeOutOfRange {
            degree,
            count: values.len(),
        });
    }
    Ok(elementary_symmetric_all(values, modulus)[degree])
}

/// All elementary symmetric polynomials `e_0 ..= e_n` at once, via the
/// product expansion of `(1 + v_1 x)(1 + v_2 x)...(1 + v_n x)`.
pub fn elementary_symmetric_all(
    values: &[FieldElement],
    modulus: PrimeModulus,
) -> Vec<FieldElement> {
    let mut e = vec![modulus.zero(); values.len() + 1];
    e[0] = modulus.one();
    for (i, &v) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let term = e[j - 1] * v;
            e[j] += term;
        }
    }
    e
}

/// All `choose`-element subsets of `items`, in lexicographic order.
pub(crate) fn combinations(items: &[usize], choose: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    items.iter().copied().combinations(choose).collect()
}

// ---- raw (u64) kernels -----------------------------------------------------
//
// The verifier computes thousands of ranks of matrices with hundreds of rows;
// working on plain u64 grids avoids per-entry modulus bookkeeping in the hot
// loop. These kernels assume entries are already reduced mod p.

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

pub(crate) fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p, valid because p is prime and a != 0.
    debug_assert!(a % p != 0);
    let mut exp = p - 2;
    let mut base = a % p;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Rank of a row-major grid by in-place Gaussian elimination.
pub(crate) fn rank_raw(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = inv_mod(rows[rank][col], p);
        for r in rank + 1..nrows {
            if rows[r][col] == 0 {
                continue;
            }
            let factor = mul_mod(rows[r][col], inv, p);
            for c in col..ncols {
                rows[r][c] = sub_mod(rows[r][c], mul_mod(factor, rows[rank][c], p), p);
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Reduced row echelon form in place; returns the pivot column indices.
/// After the call, row `i` has a leading 1 in column `pivots[i]` and that
/// column is zero everywhere else.
fn rref_in_place(rows: &mut Vec<Vec<u64>>, p: u64) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut next_row = 0;
    for col in 0..ncols {
        let Some(pivot) = (next_row..nrows).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(next_row, pivot);
        let inv = inv_mod(rows[next_row][col], p);
        for c in col..ncols {
            rows[next_row][c] = mul_mod(rows[next_row][c], inv, p);
        }
        for r in 0..nrows {
            if r == next_row || rows[r][col] == 0 {
                continue;
            }
            let factor = rows[r][col];
            for c in col..ncols {
                rows[r][c] = sub_mod(rows[r][c], mul_mod(factor, rows[next_row][c], p), p);
            }
        }
        pivots.push(col);
        next_row += 1;
        if next_row == nrows {
            break;
        }
    }
    pivots
}
