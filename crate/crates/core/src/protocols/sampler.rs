//! Element-wise commuting generator families and random words over them.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::actions::FlatSpace;
use crate::algebra::{AlgMatrix, Algebra};
use crate::error::{Error, Result};

use super::MAX_RESAMPLES;

/// How the two commuting generator families are built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerStyle {
    /// Both sides: invertible F_p-polynomials in one shared random matrix.
    #[default]
    PolynomialInMatrix,
    /// Both sides: nonzero scalar multiples of the identity.
    CenterScalars,
    /// Alice: `diag(A, 1)`, Bob: `diag(1, B)`; each side is non-abelian in general.
    BlockDiagonalSplit,
}

/// An invertible matrix together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub m: AlgMatrix,
    pub inv: AlgMatrix,
}

impl Generator {
    pub fn new(m: AlgMatrix) -> Result<Self> {
        let inv = m.inverse()?;
        Ok(Generator { m, inv })
    }
}

/// Every element of `alice` commutes with every element of `bob`.
#[derive(Clone, Debug, Serialize)]
pub struct CommutingFamilies {
    pub alice: Vec<Generator>,
    pub bob: Vec<Generator>,
}

fn retry<T>(what: &str, mut draw: impl FnMut() -> Option<T>) -> Result<T> {
    (0..MAX_RESAMPLES)
        .find_map(|_| draw())
        .ok_or_else(|| Error::SamplerFailure(format!("{what}: no valid draw in {MAX_RESAMPLES} attempts")))
}

/// `c_0 + c_1 m + ... + c_{k-1} m^{k-1}` with random F_p coefficients.
pub(super) fn random_polynomial_in<R: Rng + ?Sized>(m: &AlgMatrix, terms: usize, rng: &mut R) -> AlgMatrix {
    let alg = m.algebra();
    let p = alg.field().modulus();
    let mut acc = AlgMatrix::zero(alg, m.n());
    let mut power = AlgMatrix::identity(alg, m.n());
    for k in 0..terms {
        acc = acc
            .add(&power.scale(rng.gen_range(0..p)))
            .expect("same shape");
        if k + 1 < terms {
            power = power.mul(m).expect("same shape");
        }
    }
    acc
}

pub(super) fn invertible_polynomial<R: Rng + ?Sized>(m: &AlgMatrix, rng: &mut R) -> Result<Generator> {
    retry("invertible polynomial", || {
        Generator::new(random_polynomial_in(m, m.n().max(2), rng)).ok()
    })
}

fn random_scalar<R: Rng + ?Sized>(alg: &Arc<Algebra>, n: usize, rng: &mut R) -> Result<Generator> {
    let p = alg.field().modulus();
    Generator::new(AlgMatrix::scalar(alg, n, rng.gen_range(1..p)))
}

/// Samples `count` generators per side.
pub fn commuting_subgroup_sampler<R: Rng + ?Sized>(
    space: &FlatSpace,
    style: SamplerStyle,
    count: usize,
    rng: &mut R,
) -> Result<CommutingFamilies> {
    let alg = space.algebra();
    let n = space.n();
    match style {
        SamplerStyle::PolynomialInMatrix => {
            let m = AlgMatrix::random(alg, n, rng);
            let alice = (0..count)
                .map(|_| invertible_polynomial(&m, rng))
                .collect::<Result<_>>()?;
            let bob = (0..count)
                .map(|_| invertible_polynomial(&m, rng))
                .collect::<Result<_>>()?;
            Ok(CommutingFamilies { alice, bob })
        }
        SamplerStyle::CenterScalars => Ok(CommutingFamilies {
            alice: (0..count)
                .map(|_| random_scalar(alg, n, rng))
                .collect::<Result<_>>()?,
            bob: (0..count)
                .map(|_| random_scalar(alg, n, rng))
                .collect::<Result<_>>()?,
        }),
        SamplerStyle::BlockDiagonalSplit => {
            if n < 2 {
                return Err(Error::SamplerFailure("block split needs n >= 2".into()));
            }
            let (n1, n2) = (n / 2, n - n / 2);
            let mut side = |first: bool| -> Result<Generator> {
                let (block, _) = AlgMatrix::random_invertible(alg, if first { n1 } else { n2 }, rng, MAX_RESAMPLES)
                    .map_err(|_| Error::SamplerFailure("no invertible block".into()))?;
                let m = if first {
                    AlgMatrix::block_diag(&block, &AlgMatrix::identity(alg, n2))?
                } else {
                    AlgMatrix::block_diag(&AlgMatrix::identity(alg, n1), &block)?
                };
                Generator::new(m)
            };
            let alice = (0..count).map(|_| side(true)).collect::<Result<_>>()?;
            let bob = (0..count).map(|_| side(false)).collect::<Result<_>>()?;
            Ok(CommutingFamilies { alice, bob })
        }
    }
}

/// A random word of length `len` in the generators and their inverses,
/// returned with its inverse.
pub fn random_word<R: Rng + ?Sized>(
    gens: &[Generator],
    len: usize,
    rng: &mut R,
    ops: &mut u64,
) -> Result<(AlgMatrix, AlgMatrix)> {
    let first = gens
        .first()
        .ok_or_else(|| Error::SamplerFailure("empty generator list".into()))?;
    let alg = first.m.algebra();
    let n = first.m.n();
    let mut word = AlgMatrix::identity(alg, n);
    let mut inv = AlgMatrix::identity(alg, n);
    for _ in 0..len {
        let g = &gens[rng.gen_range(0..gens.len())];
        let (letter, letter_inv) = if rng.gen_bool(0.5) {
            (&g.m, &g.inv)
        } else {
            (&g.inv, &g.m)
        };
        word = word.mul_counted(letter, ops)?;
        inv = letter_inv.mul_counted(&inv, ops)?;
    }
    Ok((word, inv))
}
