use std::sync::Arc;

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg::{FMatrix, FVector};

/// An `n x n` matrix over an [`Algebra`].
///
/// Entries are stored flat in the layout of the flattened vector space:
/// coefficient `k` of entry `(i, j)` lives at `(i * n + j) * r + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgMatrix {
    algebra: Arc<Algebra>,
    n: usize,
    data: Vec<u32>,
}

impl Serialize for AlgMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AlgMatrix", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("r", &self.algebra.dim())?;
        st.serialize_field("data", &self.data)?;
        st.end()
    }
}

impl AlgMatrix {
    pub fn zero(algebra: &Arc<Algebra>, n: usize) -> Self {
        AlgMatrix {
            algebra: Arc::clone(algebra),
            n,
            data: vec![0; n * n * algebra.dim()],
        }
    }

    pub fn identity(algebra: &Arc<Algebra>, n: usize) -> Self {
        AlgMatrix::scalar(algebra, n, 1)
    }

    /// `c * I`.
    pub fn scalar(algebra: &Arc<Algebra>, n: usize, c: u32) -> Self {
        let mut m = AlgMatrix::zero(algebra, n);
        let r = algebra.dim();
        let f = algebra.field();
        for i in 0..n {
            for (k, &u) in algebra.unit_coeffs().iter().enumerate() {
                m.data[(i * n + i) * r + k] = f.mul(u, c % f.modulus());
            }
        }
        m
    }

    /// Wraps flat data in the flattened layout.
    pub fn from_flat(algebra: &Arc<Algebra>, n: usize, data: Vec<u32>) -> Result<Self> {
        let expected = n * n * algebra.dim();
        if data.len() != expected {
            return Err(Error::DimensionError {
                expected,
                got: data.len(),
            });
        }
        let p = algebra.field().modulus();
        Ok(AlgMatrix {
            algebra: Arc::clone(algebra),
            n,
            data: data.into_iter().map(|x| x % p).collect(),
        })
    }

    /// Builds a matrix whose entries are ground-field scalars times the unit.
    pub fn from_scalars(algebra: &Arc<Algebra>, rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let f = algebra.field();
        let mut m = AlgMatrix::zero(algebra, n);
        let r = algebra.dim();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionError {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                let c = f.from_i64(x);
                for (k, &u) in algebra.unit_coeffs().iter().enumerate() {
                    m.data[(i * n + j) * r + k] = f.mul(u, c);
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(
        algebra: &Arc<Algebra>,
        n: usize,
        mut entry: impl FnMut(usize, usize) -> AlgebraElement,
    ) -> Result<Self> {
        let mut m = AlgMatrix::zero(algebra, n);
        for i in 0..n {
            for j in 0..n {
                let e = entry(i, j);
                if e.algebra() != algebra {
                    return Err(Error::IncompatibleOperands("entry from another algebra".into()));
                }
                m.set(i, j, &e);
            }
        }
        Ok(m)
    }

    /// The same matrix over F_p viewed as an [`FMatrix`]; only for `r = 1`
    /// algebras whose unit is 1.
    pub fn to_fmatrix(&self) -> Result<FMatrix> {
        if self.algebra.dim() != 1 {
            return Err(Error::IncompatibleOperands(
                "only matrices over the ground field convert to FMatrix".into(),
            ));
        }
        let f = self.algebra.field();
        let u_inv = f.inv(self.algebra.unit_coeffs()[0])?;
        let mut m = FMatrix::zeros(f, self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, f.mul(self.data[i * self.n + j], u_inv));
            }
        }
        Ok(m)
    }

    pub fn from_fmatrix(algebra: &Arc<Algebra>, m: &FMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::IncompatibleOperands("matrix is not square".into()));
        }
        let rows: Vec<Vec<i64>> = (0..m.rows())
            .map(|i| m.row(i).iter().map(|&x| x as i64).collect())
            .collect();
        AlgMatrix::from_scalars(algebra, &rows)
    }

    pub fn random<R: Rng + ?Sized>(algebra: &Arc<Algebra>, n: usize, rng: &mut R) -> Self {
        let p = algebra.field().modulus();
        AlgMatrix {
            algebra: Arc::clone(algebra),
            n,
            data: (0..n * n * algebra.dim()).map(|_| rng.gen_range(0..p)).collect(),
        }
    }

    /// Samples until an invertible matrix is found; returns it with its inverse.
    pub fn random_invertible<R: Rng + ?Sized>(
        algebra: &Arc<Algebra>,
        n: usize,
        rng: &mut R,
        attempts: usize,
    ) -> Result<(Self, Self)> {
        for _ in 0..attempts {
            let m = AlgMatrix::random(algebra, n, rng);
            if let Ok(inv) = m.inverse() {
                return Ok((m, inv));
            }
        }
        Err(Error::NotInvertible)
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Flattened dimension `r * n^2`.
    pub fn flat_dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u32> {
        self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        let r = self.algebra.dim();
        let start = (i * self.n + j) * r;
        AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: self.data[start..start + r].to_vec(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, e: &AlgebraElement) {
        let r = self.algebra.dim();
        let start = (i * self.n + j) * r;
        self.data[start..start + r].copy_from_slice(e.coeffs());
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::IncompatibleOperands(format!(
                "sizes {} and {}",
                self.n, other.n
            )));
        }
        if self.algebra != other.algebra {
            return Err(Error::IncompatibleOperands("different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.algebra.field();
        Ok(AlgMatrix {
            algebra: Arc::clone(&self.algebra),
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.algebra.field();
        Ok(AlgMatrix {
            algebra: Arc::clone(&self.algebra),
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect(),
        })
    }

    /// Multiplication by a ground-field scalar.
    pub fn scale(&self, c: u32) -> Self {
        let f = self.algebra.field();
        AlgMatrix {
            algebra: Arc::clone(&self.algebra),
            n: self.n,
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    /// Product with operation counting.
    pub fn mul_counted(&self, other: &Self, ops: &mut u64) -> Result<Self> {
        self.check(other)?;
        let n = self.n;
        let r = self.algebra.dim();
        let mut out = vec![0u32; n * n * r];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[(i * n + k) * r..(i * n + k + 1) * r];
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[(k * n + j) * r..(k * n + j + 1) * r];
                    let dst = &mut out[(i * n + j) * r..(i * n + j + 1) * r];
                    *ops += self.algebra.mul_acc(a, b, dst);
                }
            }
        }
        Ok(AlgMatrix {
            algebra: Arc::clone(&self.algebra),
            n,
            data: out,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_counted(other, &mut 0)
    }

    /// `self^e` by square-and-multiply.
    pub fn pow(&self, e: u64) -> Self {
        self.pow_counted(e, &mut 0)
    }

    pub fn pow_counted(&self, mut e: u64, ops: &mut u64) -> Self {
        let mut acc = AlgMatrix::identity(&self.algebra, self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_counted(&base, ops).expect("same shape");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_counted(&base, ops).expect("same shape");
            }
        }
        acc
    }

    /// `diag(a, b)`.
    pub fn block_diag(a: &AlgMatrix, b: &AlgMatrix) -> Result<Self> {
        if a.algebra != b.algebra {
            return Err(Error::IncompatibleOperands("different algebras".into()));
        }
        let (n1, n2) = (a.n, b.n);
        AlgMatrix::from_fn(&a.algebra, n1 + n2, |i, j| {
            if i < n1 && j < n1 {
                a.entry(i, j)
            } else if i >= n1 && j >= n1 {
                b.entry(i - n1, j - n1)
            } else {
                AlgebraElement::zero(&a.algebra)
            }
        })
    }

    /// Transpose of the entry grid (entries themselves are untouched).
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let r = self.algebra.dim();
        let mut data = vec![0u32; self.data.len()];
        for i in 0..n {
            for j in 0..n {
                data[(j * n + i) * r..(j * n + i + 1) * r]
                    .copy_from_slice(&self.data[(i * n + j) * r..(i * n + j + 1) * r]);
            }
        }
        AlgMatrix {
            algebra: Arc::clone(&self.algebra),
            n,
            data,
        }
    }

    /// The `(nr) x (nr)` matrix over F_p of `X -> self * X` acting on a
    /// column of `A^n`: block `(i, j)` is the left regular matrix of entry `(i, j)`.
    fn left_regular(&self) -> FMatrix {
        let n = self.n;
        let r = self.algebra.dim();
        let mut big = FMatrix::zeros(self.algebra.field(), n * r, n * r);
        for i in 0..n {
            for j in 0..n {
                let block = self
                    .algebra
                    .left_regular(&self.data[(i * n + j) * r..(i * n + j + 1) * r]);
                for a in 0..r {
                    for b in 0..r {
                        big.set(i * r + a, j * r + b, block[a * r + b]);
                    }
                }
            }
        }
        big
    }

    /// Inverse through the left regular representation; entries may be zero
    /// divisors, so no entrywise elimination is attempted.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let r = self.algebra.dim();
        let big_inv = self.left_regular().inverse()?;
        let mut data = vec![0u32; n * n * r];
        // column j of the inverse solves self * x = unit * e_j
        for j in 0..n {
            let mut rhs = vec![0u32; n * r];
            rhs[j * r..(j + 1) * r].copy_from_slice(self.algebra.unit_coeffs());
            let x = big_inv.mul_vec(&FVector::new(self.algebra.field(), rhs))?;
            for i in 0..n {
                data[(i * n + j) * r..(i * n + j + 1) * r]
                    .copy_from_slice(&x.entries()[i * r..(i + 1) * r]);
            }
        }
        let inv = AlgMatrix {
            algebra: Arc::clone(&self.algebra),
            n,
            data,
        };
        let id = AlgMatrix::identity(&self.algebra, n);
        if self.mul(&inv)? != id || inv.mul(self)? != id {
            return Err(Error::NotInvertible);
        }
        Ok(inv)
    }

    /// Multiplicative order, if it is at most `bound`.
    pub fn order(&self, bound: u64) -> Option<u64> {
        let id = AlgMatrix::identity(&self.algebra, self.n);
        let mut acc = self.clone();
        for k in 1..=bound {
            if acc == id {
                return Some(k);
            }
            acc = acc.mul(self).ok()?;
        }
        None
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }
}
