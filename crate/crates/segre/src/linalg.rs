//! Exact dense linear algebra: rank, reduced echelon form, kernels and
//! subspace intersection, over any [`FieldSpec`].
//!
//! Pivoting is deterministic: first nonzero entry in the first nonzero
//! column, scanning top to bottom.

use crate::error::{Result, SegreError};
use crate::field::{FieldSpec, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let ncols = match rows.first() {
            Some(r) => r.len(),
            None => {
                return Err(SegreError::Shape("matrix with no rows needs an explicit width".into()))
            }
        };
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(SegreError::Shape("ragged matrix".into()));
        }
        let nrows = rows.len();
        Ok(Matrix { rows: nrows, cols: ncols, data: rows.into_iter().flatten().collect() })
    }

    pub fn empty(cols: usize) -> Matrix {
        Matrix { rows: 0, cols, data: Vec::new() }
    }

    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = field.one();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[Scalar]> {
        self.data.chunks(self.cols)
    }

    pub fn push_row(&mut self, row: Vec<Scalar>) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.at(i, j).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    /// Stack `self` over `other` (same width).
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(SegreError::Shape("vstack width mismatch".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(SegreError::Shape("matmul inner dimension mismatch".into()));
        }
        let field = self.field_or(&other.field_or(&FieldSpec::Rational));
        let mut out = Matrix::zeros(&field, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = out.at(i, j).add(&a.mul(other.at(l, j)));
                    *out.at_mut(i, j) = t;
                }
            }
        }
        Ok(out)
    }

    fn field_or(&self, fallback: &FieldSpec) -> FieldSpec {
        self.data.first().map(|s| s.field()).unwrap_or(*fallback)
    }

    /// In-place reduction to reduced row echelon form. Returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0; // pivot row
        for pc in 0..self.cols {
            if pr >= self.rows {
                break;
            }
            let Some(sel) = (pr..self.rows).find(|&i| !self.at(i, pc).is_zero()) else {
                continue;
            };
            self.swap_rows(pr, sel);
            let inv = self.at(pr, pc).inv().expect("nonzero pivot");
            for j in pc..self.cols {
                let t = self.at(pr, j).mul(&inv);
                *self.at_mut(pr, j) = t;
            }
            for i in 0..self.rows {
                if i == pr || self.at(i, pc).is_zero() {
                    continue;
                }
                let factor = self.at(i, pc).clone();
                for j in pc..self.cols {
                    let t = self.at(i, j).sub(&factor.mul(self.at(pr, j)));
                    *self.at_mut(i, j) = t;
                }
            }
            pivots.push(pc);
            pr += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// RREF with zero rows dropped.
    pub fn row_basis(&self) -> Matrix {
        let mut m = self.clone();
        let rank = m.rref_in_place().len();
        m.data.truncate(rank * m.cols);
        m.rows = rank;
        m
    }

    /// Basis (as rows, in RREF) of `{ x : self * x = 0 }`.
    pub fn kernel_basis(&self) -> Matrix {
        let field = self.field_or(&FieldSpec::Rational);
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::empty(self.cols);
        for &fc in &free {
            let mut v = vec![field.zero(); self.cols];
            v[fc] = field.one();
            for (pr, &pc) in pivots.iter().enumerate() {
                v[pc] = m.at(pr, fc).neg();
            }
            out.push_row(v);
        }
        // free columns ascend, so this is already an echelon basis; normalize
        // to RREF for a unique representative.
        out.row_basis()
    }

    /// Solve `x * self = target` for a row vector `x`, i.e. express `target`
    /// as a linear combination of the rows of `self`. Returns `None` when
    /// `target` is outside the row space.
    pub fn solve_combination(&self, target: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(target.len(), self.cols, "target width mismatch");
        let field = self.field_or(&target.first().map(|s| s.field()).unwrap_or(FieldSpec::Rational));
        // Work on the transpose: self^T * x^T = target^T, augmented column.
        let mut aug = Matrix::zeros(&field, self.cols, self.rows + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *aug.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        for (j, t) in target.iter().enumerate() {
            *aug.at_mut(j, self.rows) = t.clone();
        }
        let pivots = aug.rref_in_place();
        if pivots.contains(&self.rows) {
            return None; // inconsistent
        }
        let mut x = vec![field.zero(); self.rows];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.at(pr, self.rows).clone();
        }
        Some(x)
    }
}

/// A linear subspace of K^ambient, kept as a reduced-echelon row basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSubspace {
    ambient: usize,
    basis: Matrix,
}

impl LinearSubspace {
    pub fn from_spanning(ambient: usize, rows: Vec<Vec<Scalar>>) -> Result<LinearSubspace> {
        if rows.is_empty() {
            return Ok(LinearSubspace { ambient, basis: Matrix::empty(ambient) });
        }
        let m = Matrix::from_rows(rows)?;
        if m.ncols() != ambient {
            return Err(SegreError::Shape("spanning rows do not match ambient dimension".into()));
        }
        Ok(LinearSubspace { ambient, basis: m.row_basis() })
    }

    pub fn empty(ambient: usize) -> LinearSubspace {
        LinearSubspace { ambient, basis: Matrix::empty(ambient) }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.nrows()
    }

    /// Projective dimension: rank - 1, with -1 for the empty subspace.
    pub fn proj_dim(&self) -> isize {
        self.basis.nrows() as isize - 1
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.basis.solve_combination(v).is_some()
    }

    pub fn sum(&self, other: &LinearSubspace) -> Result<LinearSubspace> {
        if self.ambient != other.ambient {
            return Err(SegreError::Shape("ambient mismatch".into()));
        }
        Ok(LinearSubspace { ambient: self.ambient, basis: self.basis.vstack(&other.basis)?.row_basis() })
    }
}

/// Intersection of two subspaces by the Zassenhaus block trick.
pub fn span_intersect(a: &LinearSubspace, b: &LinearSubspace) -> Result<LinearSubspace> {
    if a.ambient() != b.ambient() {
        return Err(SegreError::Shape("ambient mismatch".into()));
    }
    let n = a.ambient();
    if a.rank() == 0 || b.rank() == 0 {
        return Ok(LinearSubspace::empty(n));
    }
    let field = a.basis.row(0)[..].iter().find(|s| !s.is_zero()).map(|s| s.field()).unwrap();
    let zero = field.zero();
    // Rows [v | v] for v in basis(A), [w | 0] for w in basis(B).
    let mut block = Matrix::empty(2 * n);
    for row in a.basis.rows_iter() {
        let mut r: Vec<Scalar> = row.to_vec();
        r.extend(row.iter().cloned());
        block.push_row(r);
    }
    for row in b.basis.rows_iter() {
        let mut r: Vec<Scalar> = row.to_vec();
        r.extend(std::iter::repeat(zero.clone()).take(n));
        block.push_row(r);
    }
    block.rref_in_place();
    // Rows whose left half vanished carry an intersection vector on the right.
    let mut inter = Vec::new();
    for row in block.rows_iter() {
        let (left, right) = row.split_at(n);
        if left.iter().all(|s| s.is_zero()) && right.iter().any(|s| !s.is_zero()) {
            inter.push(right.to_vec());
        }
    }
    LinearSubspace::from_spanning(n, inter)
}
