//! F_p-linear endomorphisms of the flattened matrix space.
//!
//! `Mat_n(A)` with `dim A = r` is viewed as F_p^{r n^2}; coefficient `k` of
//! entry `(i, j)` sits at coordinate `(i n + j) r + k`. Multiplicative actions
//! are applied by unflattening and multiplying in the algebra, never by
//! materializing a `d x d` matrix.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::algebra::{AlgMatrix, Algebra};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{FMatrix, FVector};

/// `Mat_n(A)` as an F_p-vector space of dimension `r n^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSpace {
    algebra: Arc<Algebra>,
    n: usize,
}

impl Serialize for FlatSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FlatSpace", 3)?;
        st.serialize_field("algebra", self.algebra.spec())?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("dim", &self.dim())?;
        st.end()
    }
}

impl FlatSpace {
    pub fn new(algebra: &Arc<Algebra>, n: usize) -> Self {
        FlatSpace {
            algebra: Arc::clone(algebra),
            n,
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn field(&self) -> PrimeField {
        self.algebra.field()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim() * self.n * self.n
    }

    pub fn flatten(&self, m: &AlgMatrix) -> Result<FVector> {
        if m.n() != self.n || m.algebra() != &self.algebra {
            return Err(Error::DimensionError {
                expected: self.dim(),
                got: m.flat_dim(),
            });
        }
        Ok(FVector::new(self.field(), m.data().to_vec()))
    }

    pub fn unflatten(&self, v: &FVector) -> Result<AlgMatrix> {
        if v.len() != self.dim() {
            return Err(Error::DimensionError {
                expected: self.dim(),
                got: v.len(),
            });
        }
        AlgMatrix::from_flat(&self.algebra, self.n, v.entries().to_vec())
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> FVector {
        random_vector(self.field(), self.dim(), rng)
    }

    /// Places a row vector of `n` algebra elements (`n r` coordinates) in the
    /// first row of an otherwise zero matrix. Right multiplication preserves
    /// this shape, so row-vector protocols live inside the same space.
    pub fn embed_row(&self, row: &FVector) -> Result<FVector> {
        let width = self.n * self.algebra.dim();
        if row.len() != width {
            return Err(Error::DimensionError {
                expected: width,
                got: row.len(),
            });
        }
        let mut data = row.entries().to_vec();
        data.resize(self.dim(), 0);
        Ok(FVector::new(self.field(), data))
    }

    /// The first row of a flattened matrix.
    pub fn extract_row(&self, v: &FVector) -> Result<FVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionError {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let width = self.n * self.algebra.dim();
        Ok(FVector::new(self.field(), v.entries()[..width].to_vec()))
    }
}

pub fn random_vector<R: Rng + ?Sized>(field: PrimeField, dim: usize, rng: &mut R) -> FVector {
    let p = field.modulus();
    FVector::new(field, (0..dim).map(|_| rng.gen_range(0..p)).collect())
}

/// A linear endomorphism of a flattened space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// `X -> M X`
    LeftMul { m: AlgMatrix },
    /// `X -> X M`
    RightMul { m: AlgMatrix },
    /// `X -> A X B`
    Sandwich { left: AlgMatrix, right: AlgMatrix },
    /// `X -> g X g^-1`; build with [`Action::conjugation`].
    Conjugation { g: AlgMatrix, g_inv: AlgMatrix },
    /// `v -> M v` on column vectors.
    ExplicitLinear { matrix: FMatrix },
    /// `Compose[a, b]` applies `b` first, then `a`.
    Compose { parts: Vec<Action> },
}

impl Action {
    pub fn left_mul(m: AlgMatrix) -> Self {
        Action::LeftMul { m }
    }

    pub fn right_mul(m: AlgMatrix) -> Self {
        Action::RightMul { m }
    }

    pub fn sandwich(left: AlgMatrix, right: AlgMatrix) -> Self {
        Action::Sandwich { left, right }
    }

    /// Conjugation by an invertible `g`.
    pub fn conjugation(g: AlgMatrix) -> Result<Self> {
        let g_inv = g.inverse()?;
        Ok(Action::Conjugation { g, g_inv })
    }

    pub fn explicit(matrix: FMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionError {
                expected: matrix.rows(),
                got: matrix.cols(),
            });
        }
        Ok(Action::ExplicitLinear { matrix })
    }

    pub fn compose(parts: Vec<Action>) -> Self {
        Action::Compose { parts }
    }

    /// Dimension of the space acted on; `None` for an empty composition.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Action::LeftMul { m } | Action::RightMul { m } => Some(m.flat_dim()),
            Action::Sandwich { left, .. } => Some(left.flat_dim()),
            Action::Conjugation { g, .. } => Some(g.flat_dim()),
            Action::ExplicitLinear { matrix } => Some(matrix.rows()),
            Action::Compose { parts } => parts.iter().find_map(Action::dim),
        }
    }

    fn check_dim(&self, v: &FVector) -> Result<()> {
        match self.dim() {
            Some(d) if d != v.len() => Err(Error::DimensionError {
                expected: d,
                got: v.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Applies the action, adding the field operations spent to `ops`.
    pub fn apply_counted(&self, v: &FVector, ops: &mut u64) -> Result<FVector> {
        self.check_dim(v)?;
        let as_matrix = |m: &AlgMatrix| AlgMatrix::from_flat(m.algebra(), m.n(), v.entries().to_vec());
        let out = match self {
            Action::LeftMul { m } => m.mul_counted(&as_matrix(m)?, ops)?,
            Action::RightMul { m } => as_matrix(m)?.mul_counted(m, ops)?,
            Action::Sandwich { left, right } => left
                .mul_counted(&as_matrix(left)?, ops)?
                .mul_counted(right, ops)?,
            Action::Conjugation { g, g_inv } => g
                .mul_counted(&as_matrix(g)?, ops)?
                .mul_counted(g_inv, ops)?,
            Action::ExplicitLinear { matrix } => return matrix.mul_vec_counted(v, ops),
            Action::Compose { parts } => {
                let mut cur = v.clone();
                for a in parts.iter().rev() {
                    cur = a.apply_counted(&cur, ops)?;
                }
                return Ok(cur);
            }
        };
        Ok(FVector::new(v.field(), out.into_data()))
    }

    pub fn apply(&self, v: &FVector) -> Result<FVector> {
        self.apply_counted(v, &mut 0)
    }

    /// The inverse action, when every ingredient is invertible.
    pub fn inverse(&self) -> Result<Action> {
        Ok(match self {
            Action::LeftMul { m } => Action::LeftMul { m: m.inverse()? },
            Action::RightMul { m } => Action::RightMul { m: m.inverse()? },
            Action::Sandwich { left, right } => Action::Sandwich {
                left: left.inverse()?,
                right: right.inverse()?,
            },
            Action::Conjugation { g, g_inv } => Action::Conjugation {
                g: g_inv.clone(),
                g_inv: g.clone(),
            },
            Action::ExplicitLinear { matrix } => Action::ExplicitLinear {
                matrix: matrix.inverse()?,
            },
            Action::Compose { parts } => Action::Compose {
                parts: parts
                    .iter()
                    .rev()
                    .map(Action::inverse)
                    .collect::<Result<Vec<_>>>()?,
            },
        })
    }

    /// The `d x d` matrix of this action; column `j` is the image of `e_j`.
    pub fn materialize(&self, field: PrimeField) -> Result<FMatrix> {
        let d = self.dim().ok_or(Error::DimensionError { expected: 1, got: 0 })?;
        let columns = (0..d)
            .map(|j| self.apply(&FVector::unit(field, d, j)))
            .collect::<Result<Vec<_>>>()?;
        FMatrix::from_columns(field, d, &columns)
    }
}

/// Result of [`commute_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommuteCheck {
    Commute,
    Counterexample { u: usize, w: usize, vector: FVector },
}

impl CommuteCheck {
    pub fn holds(&self) -> bool {
        matches!(self, CommuteCheck::Commute)
    }
}

/// Tests `u(w(v)) = w(u(v))` for every pair on `trials` random vectors.
pub fn commute_check<R: Rng + ?Sized>(
    us: &[Action],
    ws: &[Action],
    field: PrimeField,
    trials: usize,
    rng: &mut R,
) -> Result<CommuteCheck> {
    let Some(dim) = us.iter().chain(ws).find_map(Action::dim) else {
        return Ok(CommuteCheck::Commute);
    };
    for _ in 0..trials {
        let v = random_vector(field, dim, rng);
        for (i, u) in us.iter().enumerate() {
            for (j, w) in ws.iter().enumerate() {
                if u.apply(&w.apply(&v)?)? != w.apply(&u.apply(&v)?)? {
                    return Ok(CommuteCheck::Counterexample {
                        u: i,
                        w: j,
                        vector: v,
                    });
                }
            }
        }
    }
    Ok(CommuteCheck::Commute)
}
