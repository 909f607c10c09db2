//! Exact dense linear algebra over F_p.
//!
//! [`EchelonBasis`] is the incremental workhorse of the span closure: it keeps
//! a reduced row-echelon form together with the change-of-basis matrix back
//! to the vectors that were actually inserted, so membership queries answer
//! with coefficients over those original vectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FVector {
    field: PrimeField,
    entries: Vec<u32>,
}

impl FVector {
    /// Wraps raw entries, reducing them mod p.
    pub fn new(field: PrimeField, entries: Vec<u32>) -> Self {
        let p = field.modulus();
        let entries = entries.into_iter().map(|x| x % p).collect();
        FVector { field, entries }
    }

    pub fn from_i64s(field: PrimeField, xs: &[i64]) -> Self {
        FVector {
            field,
            entries: xs.iter().map(|&x| field.from_i64(x)).collect(),
        }
    }

    pub fn zeros(field: PrimeField, len: usize) -> Self {
        FVector {
            field,
            entries: vec![0; len],
        }
    }

    pub fn unit(field: PrimeField, len: usize, index: usize) -> Self {
        let mut v = FVector::zeros(field, len);
        v.entries[index] = 1 % field.modulus();
        v
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    fn check_len(&self, other: &FVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionError {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FVector) -> Result<FVector> {
        self.check_len(other)?;
        let f = self.field;
        Ok(FVector {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &FVector) -> Result<FVector> {
        self.check_len(other)?;
        let f = self.field;
        Ok(FVector {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: u32) -> FVector {
        let f = self.field;
        FVector {
            field: f,
            entries: self.entries.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: u32, other: &FVector) -> Result<()> {
        self.check_len(other)?;
        if c == 0 {
            return Ok(());
        }
        let f = self.field;
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = f.mul_add(*a, c, b);
        }
        Ok(())
    }

    pub fn dot(&self, other: &FVector) -> Result<u32> {
        self.check_len(other)?;
        let f = self.field;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(0, |acc, (&a, &b)| f.mul_add(acc, a, b)))
    }
}

/// Row-major dense matrix over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FMatrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = FMatrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.modulus();
        }
        m
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionError {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| field.from_i64(x)));
        }
        Ok(FMatrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(field: PrimeField, rows: usize, columns: &[FVector]) -> Result<Self> {
        let mut m = FMatrix::zeros(field, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionError {
                    expected: rows,
                    got: c.len(),
                });
            }
            for (i, &x) in c.entries().iter().enumerate() {
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x % self.field.modulus();
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// Matrix-vector product; `ops` is bumped by the number of multiply-adds.
    pub fn mul_vec_counted(&self, v: &FVector, ops: &mut u64) -> Result<FVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionError {
                expected: self.cols,
                got: v.len(),
            });
        }
        let f = self.field;
        let mut out = vec![0u32; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0u32;
            for (&a, &b) in row.iter().zip(v.entries()) {
                if b != 0 && a != 0 {
                    acc = f.mul_add(acc, a, b);
                }
            }
            *o = acc;
        }
        *ops += (self.rows * self.cols) as u64;
        Ok(FVector { field: f, entries: out })
    }

    pub fn mul_vec(&self, v: &FVector) -> Result<FVector> {
        self.mul_vec_counted(v, &mut 0)
    }

    pub fn mul(&self, other: &FMatrix) -> Result<FMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionError {
                expected: self.cols,
                got: other.rows,
            });
        }
        let f = self.field;
        let mut out = FMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.mul_add(out.data[idx], a, other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    /// Reduces in place to reduced row-echelon form and returns pivot columns.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in c..self.cols {
                let x = self.get(r, j);
                self.data[r * self.cols + j] = f.mul(x, inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let idx = i * self.cols + j;
                    self.data[idx] = f.mul_sub(self.data[idx], factor, self.data[r * self.cols + j]);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    pub fn inverse(&self) -> Result<FMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotInvertible);
        }
        let n = self.rows;
        let mut aug = FMatrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.data[i * 2 * n + j] = self.get(i, j);
            }
            aug.data[i * 2 * n + n + i] = 1 % self.field.modulus();
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::NotInvertible);
        }
        let mut inv = FMatrix::zeros(self.field, n, n);
        for i in 0..n {
            inv.data[i * n..(i + 1) * n].copy_from_slice(&aug.data[i * 2 * n + n..(i + 1) * 2 * n]);
        }
        Ok(inv)
    }
}

/// Solution set of `A x = b`: `particular + span(kernel)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub particular: FVector,
    pub kernel: Vec<FVector>,
}

pub fn solve_linear(a: &FMatrix, b: &FVector) -> Result<LinearSolution> {
    if b.len() != a.rows() {
        return Err(Error::DimensionError {
            expected: a.rows(),
            got: b.len(),
        });
    }
    let f = a.field();
    let (m, n) = (a.rows(), a.cols());
    let mut aug = FMatrix::zeros(f, m, n + 1);
    for i in 0..m {
        for j in 0..n {
            aug.data[i * (n + 1) + j] = a.get(i, j);
        }
        aug.data[i * (n + 1) + n] = b.entries()[i];
    }
    let pivots = aug.rref_in_place();
    if pivots.last() == Some(&n) {
        return Err(Error::NoSolution);
    }
    let mut particular = vec![0u32; n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug.get(r, n);
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let kernel = (0..n)
        .filter(|&j| !is_pivot[j])
        .map(|free| {
            let mut v = vec![0u32; n];
            v[free] = 1 % f.modulus();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = f.neg(aug.get(r, free));
            }
            FVector { field: f, entries: v }
        })
        .collect();
    Ok(LinearSolution {
        particular: FVector {
            field: f,
            entries: particular,
        },
        kernel,
    })
}

/// Outcome of [`EchelonBasis::extend`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extension {
    /// The vector was independent and is now original number `index`.
    Accepted { index: usize },
    /// The vector already lies in the span; `coeffs` express it over the
    /// retained originals.
    Dependent { coeffs: Vec<u32> },
}

impl Extension {
    pub fn accepted(&self) -> bool {
        matches!(self, Extension::Accepted { .. })
    }
}

/// Incrementally built basis in reduced row-echelon form.
///
/// Invariants: `rows` are sorted by strictly increasing pivot, each pivot
/// entry is 1 and every other row is zero in that column, and
/// `rows[i] = sum_j transform[i][j] * originals[j]`.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: PrimeField,
    dim: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    transform: Vec<Vec<u32>>,
    originals: Vec<FVector>,
    ops: u64,
}

impl EchelonBasis {
    pub fn new(field: PrimeField, dim: usize) -> Self {
        EchelonBasis {
            field,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
            transform: Vec::new(),
            originals: Vec::new(),
            ops: 0,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> impl Iterator<Item = FVector> + '_ {
        self.rows.iter().map(|r| FVector {
            field: self.field,
            entries: r.clone(),
        })
    }

    pub fn originals(&self) -> &[FVector] {
        &self.originals
    }

    /// Field operations spent so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    fn check_dim(&self, v: &FVector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionError {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Returns the residual of `v` modulo the row space and the row
    /// coefficients that were subtracted.
    fn reduce(&mut self, v: &FVector) -> (Vec<u32>, Vec<u32>) {
        let f = self.field;
        let mut w = v.entries.clone();
        let mut coeffs = Vec::with_capacity(self.rows.len());
        let mut ops = 0u64;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v.entries[piv];
            coeffs.push(c);
            if c == 0 {
                continue;
            }
            for j in piv..self.dim {
                let r = row[j];
                if r != 0 {
                    w[j] = f.mul_sub(w[j], c, r);
                }
            }
            ops += (self.dim - piv) as u64;
        }
        self.ops += ops;
        (w, coeffs)
    }

    fn coeffs_over_originals(&mut self, row_coeffs: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut out = vec![0u32; self.originals.len()];
        for (t, &c) in self.transform.iter().zip(row_coeffs) {
            if c == 0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(t) {
                *o = f.mul_add(*o, c, x);
            }
            self.ops += t.len() as u64;
        }
        out
    }

    /// Tries to add `v`. Independent vectors are appended to the originals;
    /// dependent ones leave the basis unchanged and come back with their
    /// coefficients over the originals.
    pub fn extend(&mut self, v: &FVector) -> Result<Extension> {
        self.check_dim(v)?;
        let f = self.field;
        let (mut w, row_coeffs) = self.reduce(v);
        let Some(lead) = w.iter().position(|&x| x != 0) else {
            let coeffs = self.coeffs_over_originals(&row_coeffs);
            return Ok(Extension::Dependent { coeffs });
        };
        let k = self.originals.len();
        let inv = f.inv(w[lead]).expect("leading entry is nonzero");
        for x in &mut w[lead..] {
            *x = f.mul(*x, inv);
        }
        // new row = (v - sum c_i row_i) / lead
        let mut t_new = vec![0u32; k + 1];
        for (t, &c) in self.transform.iter().zip(&row_coeffs) {
            if c == 0 {
                continue;
            }
            for (o, &x) in t_new.iter_mut().zip(t) {
                *o = f.mul_sub(*o, c, x);
            }
        }
        t_new[k] = 1 % f.modulus();
        for x in &mut t_new {
            *x = f.mul(*x, inv);
        }
        for t in &mut self.transform {
            t.push(0);
        }
        let mut ops = (self.dim + (k + 1) * self.rows.len()) as u64;
        for (row, t) in self.rows.iter_mut().zip(&mut self.transform) {
            let factor = row[lead];
            if factor == 0 {
                continue;
            }
            for j in lead..self.dim {
                if w[j] != 0 {
                    row[j] = f.mul_sub(row[j], factor, w[j]);
                }
            }
            for (x, &y) in t.iter_mut().zip(&t_new) {
                *x = f.mul_sub(*x, factor, y);
            }
            ops += (self.dim - lead + k + 1) as u64;
        }
        self.ops += ops;
        let pos = self.pivots.partition_point(|&p| p < lead);
        self.rows.insert(pos, w);
        self.pivots.insert(pos, lead);
        self.transform.insert(pos, t_new);
        self.originals.push(v.clone());
        Ok(Extension::Accepted { index: k })
    }

    /// Coefficients `a` with `sum_i a_i * originals[i] = v`, verified by
    /// substitution.
    pub fn decompose(&mut self, v: &FVector) -> Result<Vec<u32>> {
        self.check_dim(v)?;
        let (w, row_coeffs) = self.reduce(v);
        if w.iter().any(|&x| x != 0) {
            return Err(Error::NotInSpan);
        }
        let coeffs = self.coeffs_over_originals(&row_coeffs);
        let mut check = FVector::zeros(self.field, self.dim);
        for (c, o) in coeffs.iter().zip(&self.originals) {
            check.axpy(*c, o)?;
        }
        assert_eq!(&check, v, "decomposition failed re-substitution");
        Ok(coeffs)
    }

    pub fn contains(&mut self, v: &FVector) -> Result<bool> {
        self.check_dim(v)?;
        let (w, _) = self.reduce(v);
        Ok(w.iter().all(|&x| x == 0))
    }
}
