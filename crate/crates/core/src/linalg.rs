//! Dense matrices over GF(2^m) and Gaussian elimination.
//!
//! Pivoting is deterministic: the pivot for a column is the first row (from
//! the current position down) holding a nonzero entry.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};

/// Row-major dense matrix of field elements.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = FieldElem::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElem>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [FieldElem] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Columns `cols` of `self`, in the order given.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out[(r, j)] = self[(r, c)];
            }
        }
        out
    }

    /// Number of nonzero entries in row `r`.
    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().filter(|e| !e.is_zero()).count()
    }

    pub fn mul_vec(&self, field: &FieldSpec, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(FieldElem::ZERO, |acc, (&a, &b)| {
                        field.add(acc, field.mul(a, b))
                    })
            })
            .collect()
    }

    pub fn mul(&self, field: &FieldSpec, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let prod = field.mul(a, rhs[(k, c)]);
                    out[(r, c)] = field.add(out[(r, c)], prod);
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kronecker(&self, field: &FieldSpec, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = field.mul(a, rhs[(k, l)]);
                    }
                }
            }
        }
        out
    }

    /// Reduces `self` to row echelon form in place and returns the pivot
    /// columns. When `reduced` is set, pivots are scaled to one and cleared
    /// above as well as below.
    fn eliminate(&mut self, field: &FieldSpec, reduced: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = field.inv(self[(r, c)]).expect("pivot is nonzero");
            if reduced {
                for e in self.row_mut(r) {
                    *e = field.mul(*e, inv);
                }
            }
            let pivot_row = self.row(r).to_vec();
            let start = if reduced { 0 } else { r + 1 };
            for i in start..self.rows {
                if i == r {
                    continue;
                }
                let lead = self[(i, c)];
                if lead.is_zero() {
                    continue;
                }
                let factor = if reduced { lead } else { field.mul(lead, inv) };
                for (e, &pv) in self.row_mut(i).iter_mut().zip(&pivot_row).skip(c) {
                    *e = field.sub(*e, field.mul(factor, pv));
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank over the given field.
    pub fn rank(&self, field: &FieldSpec) -> usize {
        self.clone().eliminate(field, false).len()
    }

    /// Inverse of a square matrix.
    pub fn inverse(&self, field: &FieldSpec) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Length {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug[(r, n + r)] = FieldElem::ONE;
        }
        let pivots = aug.eliminate(field, true);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        let mut out = Matrix::zeros(n, n);
        for r in 0..n {
            out.row_mut(r).copy_from_slice(&aug.row(r)[n..]);
        }
        Ok(out)
    }

    /// Unique solution of `self * x = rhs` for square, full-rank `self`.
    pub fn solve(&self, field: &FieldSpec, rhs: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if self.rows != self.cols {
            return Err(Error::Length {
                expected: self.rows,
                got: self.cols,
            });
        }
        if rhs.len() != self.rows {
            return Err(Error::Length {
                expected: self.rows,
                got: rhs.len(),
            });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, n + 1);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug[(r, n)] = rhs[r];
        }
        let pivots = aug.eliminate(field, true);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        Ok((0..n).map(|r| aug[(r, n)]).collect())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = FieldElem;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &FieldElem {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElem {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, " ")?;
            for e in self.row(r) {
                write!(f, " {:>4}", e.0)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
