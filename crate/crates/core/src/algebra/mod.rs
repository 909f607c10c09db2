//! Finite-dimensional associative algebras over F_p given by structure
//! constants, their elements, and square matrices over them.

mod matrix;
mod perm;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;

pub use matrix::AlgMatrix;
pub use perm::{enumerate_group, Permutation};

/// Default bound on the order of a group turned into a group algebra.
pub const DEFAULT_GROUP_ORDER_BOUND: usize = 120;

/// JSON description of an algebra.
///
/// ```json
/// {"field": 7, "kind": "group_algebra", "generators": ["(1 2 3 4 5)", "(1 2 3)"]}
/// {"field": 5, "kind": "trivial"}
/// {"field": 3, "kind": "polynomial_quotient", "modulus": [0, 0, 1]}
/// {"field": 2, "kind": "explicit", "dim": 2,
///  "structure_constants": [[[1,0],[0,1]],[[0,1],[0,0]]], "unit": [1,0]}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub field: u64,
    #[serde(flatten)]
    pub kind: AlgebraKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraKind {
    /// The ground field itself.
    Trivial,
    /// F_p[G] for the permutation group generated by 1-based cycle strings.
    GroupAlgebra {
        generators: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degree: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order_bound: Option<usize>,
    },
    /// F_p[x]/(f) for a monic `f = x^k + modulus[k-1] x^{k-1} + ... + modulus[0]`,
    /// listed low degree first without the leading 1.
    PolynomialQuotient { modulus: Vec<u32> },
    /// `structure_constants[i][j]` is the coefficient vector of `e_i e_j`.
    Explicit {
        dim: usize,
        structure_constants: Vec<Vec<Vec<u32>>>,
        unit: Vec<u32>,
    },
}

/// An associative unital algebra of dimension `r` over F_p.
pub struct Algebra {
    field: PrimeField,
    dim: usize,
    /// Dense table, `table[(i * r + j) * r + k]` = coefficient of `e_k` in `e_i e_j`.
    table: Vec<u32>,
    /// Nonzero entries of the table per `(i, j)`, used for multiplication.
    sparse: Vec<Vec<(u32, u32)>>,
    unit: Vec<u32>,
    label: String,
    spec: AlgebraSpec,
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Algebra")
            .field("label", &self.label)
            .field("p", &self.field.modulus())
            .field("dim", &self.dim)
            .finish()
    }
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.field == other.field
                && self.dim == other.dim
                && self.unit == other.unit
                && self.table == other.table)
    }
}

impl Eq for Algebra {}

impl Algebra {
    fn from_table(
        field: PrimeField,
        dim: usize,
        table: Vec<u32>,
        unit: Vec<u32>,
        label: String,
        spec: AlgebraSpec,
    ) -> Arc<Algebra> {
        let sparse = (0..dim * dim)
            .map(|ij| {
                (0..dim)
                    .filter_map(|k| {
                        let c = table[ij * dim + k];
                        (c != 0).then_some((k as u32, c))
                    })
                    .collect()
            })
            .collect();
        Arc::new(Algebra {
            field,
            dim,
            table,
            sparse,
            unit,
            label,
            spec,
        })
    }

    /// F_p as a one-dimensional algebra over itself.
    pub fn trivial(field: PrimeField) -> Arc<Algebra> {
        let one = 1 % field.modulus();
        Algebra::from_table(
            field,
            1,
            vec![one],
            vec![one],
            format!("F_{}", field.modulus()),
            AlgebraSpec {
                field: field.modulus() as u64,
                kind: AlgebraKind::Trivial,
            },
        )
    }

    /// The group algebra F_p[G] where G is generated by `generators`. The
    /// basis is the element list of [`enumerate_group`], identity first.
    pub fn group_algebra(
        field: PrimeField,
        generators: &[Permutation],
        order_bound: usize,
    ) -> Result<Arc<Algebra>> {
        let elements = enumerate_group(generators, order_bound)?;
        let r = elements.len();
        let index: std::collections::HashMap<&Permutation, usize> =
            elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut table = vec![0u32; r * r * r];
        for (i, g) in elements.iter().enumerate() {
            for (j, h) in elements.iter().enumerate() {
                let k = index[&(g * h)];
                table[(i * r + j) * r + k] = 1 % field.modulus();
            }
        }
        let mut unit = vec![0u32; r];
        unit[0] = 1 % field.modulus();
        let names: Vec<String> = generators.iter().map(|g| g.to_string()).collect();
        let label = format!("F_{}[<{}>] (order {r})", field.modulus(), names.join(", "));
        let spec = AlgebraSpec {
            field: field.modulus() as u64,
            kind: AlgebraKind::GroupAlgebra {
                generators: names,
                degree: generators.first().map(Permutation::degree),
                order_bound: (order_bound != DEFAULT_GROUP_ORDER_BOUND).then_some(order_bound),
            },
        };
        Ok(Algebra::from_table(field, r, table, unit, label, spec))
    }

    /// F_p[x]/(f) with basis `1, x, .., x^{k-1}`.
    pub fn polynomial_quotient(field: PrimeField, modulus: &[u32]) -> Result<Arc<Algebra>> {
        let k = modulus.len();
        if k == 0 {
            return Err(Error::InvalidAlgebra("modulus must have degree >= 1".into()));
        }
        let m: Vec<u32> = modulus.iter().map(|&c| c % field.modulus()).collect();
        // powers[e] = x^e reduced, for e < 2k - 1
        let mut powers: Vec<Vec<u32>> = Vec::with_capacity(2 * k);
        let mut cur = vec![0u32; k];
        cur[0] = 1 % field.modulus();
        for _ in 0..2 * k - 1 {
            powers.push(cur.clone());
            // multiply by x: shift up, fold x^k = -sum m_i x^i
            let top = cur[k - 1];
            for i in (1..k).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            for i in 0..k {
                cur[i] = field.mul_sub(cur[i], top, m[i]);
            }
        }
        let mut table = vec![0u32; k * k * k];
        for i in 0..k {
            for j in 0..k {
                table[(i * k + j) * k..(i * k + j + 1) * k].copy_from_slice(&powers[i + j]);
            }
        }
        let label = format!("F_{}[x]/(deg {k})", field.modulus());
        let spec = AlgebraSpec {
            field: field.modulus() as u64,
            kind: AlgebraKind::PolynomialQuotient { modulus: m },
        };
        Ok(Algebra::from_table(field, k, table, powers[0].clone(), label, spec))
    }

    /// An algebra from explicit structure constants. The unit and
    /// associativity are validated exhaustively.
    pub fn explicit(
        field: PrimeField,
        structure_constants: &[Vec<Vec<u32>>],
        unit: &[u32],
    ) -> Result<Arc<Algebra>> {
        let r = structure_constants.len();
        if r == 0 || unit.len() != r {
            return Err(Error::InvalidAlgebra("empty basis or unit of wrong length".into()));
        }
        let mut table = Vec::with_capacity(r * r * r);
        for row in structure_constants {
            if row.len() != r {
                return Err(Error::InvalidAlgebra("structure constants are not r x r".into()));
            }
            for prod in row {
                if prod.len() != r {
                    return Err(Error::InvalidAlgebra(
                        "structure constant vector has wrong length".into(),
                    ));
                }
                table.extend(prod.iter().map(|&c| c % field.modulus()));
            }
        }
        let unit: Vec<u32> = unit.iter().map(|&c| c % field.modulus()).collect();
        let spec = AlgebraSpec {
            field: field.modulus() as u64,
            kind: AlgebraKind::Explicit {
                dim: r,
                structure_constants: structure_constants.to_vec(),
                unit: unit.clone(),
            },
        };
        let alg = Algebra::from_table(
            field,
            r,
            table,
            unit,
            format!("explicit F_{} algebra of dim {r}", field.modulus()),
            spec,
        );
        alg.check_unit()?;
        alg.check_associativity()?;
        Ok(alg)
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Arc<Algebra>> {
        let field = PrimeField::new(spec.field)?;
        match &spec.kind {
            AlgebraKind::Trivial => Ok(Algebra::trivial(field)),
            AlgebraKind::GroupAlgebra {
                generators,
                degree,
                order_bound,
            } => {
                let degree = match degree {
                    Some(d) => *d,
                    None => generators
                        .iter()
                        .map(|g| Permutation::from_cycles(g, None).map(|p| p.degree()))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .max()
                        .unwrap_or(0),
                };
                let perms = generators
                    .iter()
                    .map(|g| Permutation::from_cycles(g, Some(degree)))
                    .collect::<Result<Vec<_>>>()?;
                Algebra::group_algebra(
                    field,
                    &perms,
                    order_bound.unwrap_or(DEFAULT_GROUP_ORDER_BOUND),
                )
            }
            AlgebraKind::PolynomialQuotient { modulus } => {
                Algebra::polynomial_quotient(field, modulus)
            }
            AlgebraKind::Explicit {
                dim,
                structure_constants,
                unit,
            } => {
                if *dim != structure_constants.len() {
                    return Err(Error::InvalidAlgebra("dim disagrees with table".into()));
                }
                Algebra::explicit(field, structure_constants, unit)
            }
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn unit_coeffs(&self) -> &[u32] {
        &self.unit
    }

    /// Coefficient of `e_k` in `e_i e_j`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> u32 {
        self.table[(i * self.dim + j) * self.dim + k]
    }

    /// `out += a * b` on raw coefficient slices; returns the multiply-add count.
    pub(crate) fn mul_acc(&self, a: &[u32], b: &[u32], out: &mut [u32]) -> u64 {
        let f = self.field;
        let r = self.dim;
        let mut ops = 0u64;
        for (s, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (t, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let xy = f.mul(x, y);
                let terms = &self.sparse[s * r + t];
                for &(k, c) in terms {
                    let k = k as usize;
                    out[k] = f.mul_add(out[k], xy, c);
                }
                ops += 1 + terms.len() as u64;
            }
        }
        ops
    }

    /// Matrix (r x r, row-major, acting on column coefficient vectors) of
    /// left multiplication by `a`.
    pub(crate) fn left_regular(&self, a: &[u32]) -> Vec<u32> {
        let r = self.dim;
        let mut m = vec![0u32; r * r];
        for t in 0..r {
            let mut col = vec![0u32; r];
            let mut e = vec![0u32; r];
            e[t] = 1 % self.field.modulus();
            self.mul_acc(a, &e, &mut col);
            for k in 0..r {
                m[k * r + t] = col[k];
            }
        }
        m
    }

    fn check_unit(&self) -> Result<()> {
        let r = self.dim;
        for i in 0..r {
            let mut e = vec![0u32; r];
            e[i] = 1 % self.field.modulus();
            let mut left = vec![0u32; r];
            let mut right = vec![0u32; r];
            self.mul_acc(&self.unit, &e, &mut left);
            self.mul_acc(&e, &self.unit, &mut right);
            if left != e || right != e {
                return Err(Error::InvalidAlgebra(format!(
                    "unit fails on basis element {i}"
                )));
            }
        }
        Ok(())
    }

    /// Exhaustive check of `(e_i e_j) e_k = e_i (e_j e_k)` over all basis
    /// triples, plus the unit laws. Cost is `O(r^5)` in the worst case.
    pub fn check_associativity(&self) -> Result<()> {
        self.check_unit()?;
        let r = self.dim;
        let basis = |i: usize| {
            let mut e = vec![0u32; r];
            e[i] = 1 % self.field.modulus();
            e
        };
        let products: Vec<Vec<u32>> = (0..r * r)
            .map(|ij| self.table[ij * r..(ij + 1) * r].to_vec())
            .collect();
        for i in 0..r {
            for j in 0..r {
                let eij = &products[i * r + j];
                for k in 0..r {
                    let ek = basis(k);
                    let ei = basis(i);
                    let mut lhs = vec![0u32; r];
                    self.mul_acc(eij, &ek, &mut lhs);
                    let mut rhs = vec![0u32; r];
                    self.mul_acc(&ei, &products[j * r + k], &mut rhs);
                    if lhs != rhs {
                        return Err(Error::InvalidAlgebra(format!(
                            "not associative on basis triple ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_commutative(&self) -> bool {
        let r = self.dim;
        (0..r).all(|i| {
            (0..r).all(|j| self.table[(i * r + j) * r..(i * r + j + 1) * r]
                == self.table[(j * r + i) * r..(j * r + i + 1) * r])
        })
    }
}

/// An element of an [`Algebra`], stored as its coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    algebra: Arc<Algebra>,
    coeffs: Vec<u32>,
}

impl AlgebraElement {
    pub fn new(algebra: &Arc<Algebra>, coeffs: Vec<u32>) -> Result<Self> {
        if coeffs.len() != algebra.dim() {
            return Err(Error::DimensionError {
                expected: algebra.dim(),
                got: coeffs.len(),
            });
        }
        let p = algebra.field().modulus();
        Ok(AlgebraElement {
            algebra: Arc::clone(algebra),
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        })
    }

    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        AlgebraElement {
            algebra: Arc::clone(algebra),
            coeffs: vec![0; algebra.dim()],
        }
    }

    pub fn one(algebra: &Arc<Algebra>) -> Self {
        AlgebraElement {
            algebra: Arc::clone(algebra),
            coeffs: algebra.unit_coeffs().to_vec(),
        }
    }

    pub fn basis(algebra: &Arc<Algebra>, i: usize) -> Self {
        let mut coeffs = vec![0; algebra.dim()];
        coeffs[i] = 1 % algebra.field().modulus();
        AlgebraElement {
            algebra: Arc::clone(algebra),
            coeffs,
        }
    }

    pub fn random<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Self {
        let p = algebra.field().modulus();
        AlgebraElement {
            algebra: Arc::clone(algebra),
            coeffs: (0..algebra.dim()).map(|_| rng.gen_range(0..p)).collect(),
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::IncompatibleOperands(
                "elements of different algebras".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.algebra.field();
        Ok(AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.algebra.field();
        Ok(AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = vec![0; self.algebra.dim()];
        self.algebra.mul_acc(&self.coeffs, &other.coeffs, &mut out);
        Ok(AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: out,
        })
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = self.algebra.field();
        AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }
}
