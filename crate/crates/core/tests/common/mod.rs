//! Oracles and property checks shared by the invariant tests and the
//! acceptance runner. The oracles use their own arithmetic and never call
//! the library's elimination code.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use lindecomp::actions::{Action, FlatSpace};
use lindecomp::algebra::{AlgMatrix, Algebra, AlgebraElement, AlgebraKind, AlgebraSpec};
use lindecomp::linalg::{FMatrix, FVector};
use lindecomp::protocols::{ProtocolInstance, ProtocolTag};
use lindecomp::spanclosure::span_closure;
use lindecomp::PrimeField;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), TestCaseError>;

/// Rank of a list of vectors mod `p`, by plain Gauss-Jordan on `u64`.
pub fn oracle_rank(rows: &[Vec<u32>], p: u32) -> usize {
    let p = p as u64;
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as u64 % p).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |a: u64| -> u64 {
        // Fermat
        let (mut base, mut e, mut acc) = (a, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let s = inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * s % p;
        }
        let pivot = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn entries(vs: &[FVector]) -> Vec<Vec<u32>> {
    vs.iter().map(|v| v.entries().to_vec()).collect()
}

/// Span equality through ranks: `rk A = rk B = rk (A u B)`.
pub fn same_span(a: &[FVector], b: &[FVector], p: u32) -> bool {
    let (ra, rb) = (oracle_rank(&entries(a), p), oracle_rank(&entries(b), p));
    let both: Vec<FVector> = a.iter().chain(b).cloned().collect();
    ra == rb && oracle_rank(&entries(&both), p) == ra
}

/// Brute force `Sp{ u_word(w) : w in seeds, |word| <= max_len }`.
pub fn brute_force_span(seeds: &[FVector], gens: &[Action], max_len: usize) -> Vec<FVector> {
    let mut out = seeds.to_vec();
    let mut layer = seeds.to_vec();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for v in &layer {
            for g in gens {
                next.push(g.apply(v).unwrap());
            }
        }
        // identical vectors add nothing to the span
        let mut seen = BTreeSet::new();
        next.retain(|v| seen.insert(v.entries().to_vec()));
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn random_fmatrix<R: Rng>(f: PrimeField, d: usize, rng: &mut R) -> FMatrix {
    let p = f.modulus() as i64;
    let rows: Vec<Vec<i64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    FMatrix::from_rows(f, &rows).unwrap()
}

pub fn random_fvector<R: Rng>(f: PrimeField, d: usize, rng: &mut R) -> FVector {
    FVector::new(f, (0..d).map(|_| rng.gen_range(0..f.modulus())).collect())
}

const PRIMES: [u64; 4] = [2, 3, 5, 7];

/// A small algebra chosen by index: F_p, F_p[C_2], F_p[C_3], F_p[S_3],
/// F_p[x]/(x^2), F_p[x]/(x^3 - x - 1).
pub fn small_algebra(kind: usize, p: u64) -> Arc<Algebra> {
    let group = |gens: &[&str]| AlgebraKind::GroupAlgebra {
        generators: gens.iter().map(|s| s.to_string()).collect(),
        degree: None,
        order_bound: None,
    };
    let kind = match kind % 6 {
        0 => AlgebraKind::Trivial,
        1 => group(&["(1 2)"]),
        2 => group(&["(1 2 3)"]),
        3 => group(&["(1 2)", "(1 2 3)"]),
        4 => AlgebraKind::PolynomialQuotient { modulus: vec![0, 0] },
        _ => AlgebraKind::PolynomialQuotient {
            modulus: vec![(p - 1) as u32, (p - 1) as u32, 0],
        },
    };
    Algebra::from_spec(&AlgebraSpec { field: p, kind }).unwrap()
}

pub fn algebra_case() -> impl Strategy<Value = (usize, u64, u64)> {
    (0usize..6, prop::sample::select(PRIMES.to_vec()), any::<u64>())
}

/// `(ab)c = a(bc)`, `1a = a = a1`, `a(b + c) = ab + ac`.
pub fn check_algebra_laws(kind: usize, p: u64, seed: u64) -> Check {
    let alg = small_algebra(kind, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = AlgebraElement::random(&alg, &mut rng);
    let b = AlgebraElement::random(&alg, &mut rng);
    let c = AlgebraElement::random(&alg, &mut rng);
    let one = AlgebraElement::one(&alg);
    prop_assert_eq!(a.mul(&b)?.mul(&c)?, a.mul(&b.mul(&c)?)?);
    prop_assert_eq!(one.mul(&a)?, a.clone());
    prop_assert_eq!(a.mul(&one)?, a.clone());
    prop_assert_eq!(a.mul(&b.add(&c)?)?, a.mul(&b)?.add(&a.mul(&c)?)?);
    Ok(())
}

/// Matrices over the algebra multiply associatively too.
pub fn check_matrix_associativity(kind: usize, p: u64, seed: u64) -> Check {
    let alg = small_algebra(kind, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = AlgMatrix::random(&alg, 2, &mut rng);
    let y = AlgMatrix::random(&alg, 2, &mut rng);
    let z = AlgMatrix::random(&alg, 2, &mut rng);
    prop_assert_eq!(x.mul(&y)?.mul(&z)?, x.mul(&y.mul(&z)?)?);
    let id = AlgMatrix::identity(&alg, 2);
    prop_assert_eq!(id.mul(&x)?, x);
    Ok(())
}

/// `flatten(sX + tY) = s flatten(X) + t flatten(Y)` and unflatten inverts it.
pub fn check_flatten_linearity(kind: usize, p: u64, seed: u64) -> Check {
    let alg = small_algebra(kind, p);
    let f = alg.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let space = FlatSpace::new(&alg, n);
    let x = AlgMatrix::random(&alg, n, &mut rng);
    let y = AlgMatrix::random(&alg, n, &mut rng);
    let (s, t) = (rng.gen_range(0..f.modulus()), rng.gen_range(0..f.modulus()));
    let combo = x.scale(s).add(&y.scale(t))?;
    let lhs = space.flatten(&combo)?;
    let rhs = space.flatten(&x)?.scale(s).add(&space.flatten(&y)?.scale(t))?;
    prop_assert_eq!(&lhs, &rhs);
    prop_assert_eq!(space.unflatten(&lhs)?, combo);
    prop_assert_eq!(lhs.len(), alg.dim() * n * n);
    Ok(())
}

fn random_action<R: Rng>(alg: &Arc<Algebra>, n: usize, which: usize, rng: &mut R) -> Action {
    let m = AlgMatrix::random(alg, n, rng);
    let m2 = AlgMatrix::random(alg, n, rng);
    match which % 5 {
        0 => Action::left_mul(m),
        1 => Action::right_mul(m),
        2 => Action::sandwich(m, m2),
        3 => match AlgMatrix::random_invertible(alg, n, rng, 64) {
            Ok((g, _)) => Action::conjugation(g).unwrap(),
            Err(_) => Action::left_mul(m),
        },
        _ => Action::compose(vec![Action::left_mul(m), Action::right_mul(m2)]),
    }
}

/// Actions are linear, and materializing them reproduces `apply`.
pub fn check_action_linearity(kind: usize, p: u64, seed: u64) -> Check {
    let alg = small_algebra(kind, p);
    let f = alg.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=2);
    let space = FlatSpace::new(&alg, n);
    let action = random_action(&alg, n, rng.gen(), &mut rng);
    let v = space.random_vector(&mut rng);
    let w = space.random_vector(&mut rng);
    let (s, t) = (rng.gen_range(0..f.modulus()), rng.gen_range(0..f.modulus()));
    let lhs = action.apply(&v.scale(s).add(&w.scale(t))?)?;
    let rhs = action.apply(&v)?.scale(s).add(&action.apply(&w)?.scale(t))?;
    prop_assert_eq!(lhs, rhs);
    let explicit = Action::explicit(action.materialize(f)?)?;
    prop_assert_eq!(explicit.apply(&v)?, action.apply(&v)?);
    Ok(())
}

/// A random closure instance: `(p, dim, seeds, gens)`.
pub fn closure_instance(p: u64, seed: u64, max_dim: usize) -> (PrimeField, usize, Vec<FVector>, Vec<Action>) {
    let f = PrimeField::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=max_dim);
    let seeds = (0..rng.gen_range(1..=2))
        .map(|_| random_fvector(f, d, &mut rng))
        .collect();
    let gens = (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut m = random_fmatrix(f, d, &mut rng);
            // sparse generators give proper invariant subspaces more often
            if rng.gen_bool(0.5) {
                for i in 0..d {
                    for j in 0..d {
                        if rng.gen_bool(0.6) {
                            m.set(i, j, 0);
                        }
                    }
                }
            }
            Action::explicit(m).unwrap()
        })
        .collect();
    (f, d, seeds, gens)
}

/// Every witness replays exactly, and the span is closed under every
/// generator (checked with the independent rank oracle).
pub fn check_witnesses_and_invariance(p: u64, seed: u64) -> Check {
    let (f, d, seeds, gens) = closure_instance(p, seed, 8);
    let basis = span_closure(f, d, &seeds, &gens)?;
    for (v, w) in basis.vectors().iter().zip(basis.witnesses()) {
        prop_assert_eq!(&w.replay(&seeds, &gens)?, v);
    }
    let rank = oracle_rank(&entries(basis.vectors()), f.modulus());
    prop_assert_eq!(rank, basis.rank());
    for g in &gens {
        let mut all = basis.vectors().to_vec();
        for v in basis.vectors() {
            all.push(g.apply(v)?);
        }
        prop_assert_eq!(oracle_rank(&entries(&all), f.modulus()), rank);
    }
    prop_assert!(basis.is_invariant(&gens)?);
    Ok(())
}

/// The closure spans exactly what brute-force word enumeration spans.
pub fn check_micro_oracle(p: u64, seed: u64) -> Check {
    let (f, d, seeds, gens) = closure_instance(p, seed, 6);
    let basis = span_closure(f, d, &seeds, &gens)?;
    let brute = brute_force_span(&seeds, &gens, d);
    prop_assert!(same_span(basis.vectors(), &brute, f.modulus()));
    Ok(())
}

pub fn protocol_case() -> impl Strategy<Value = (ProtocolTag, u64)> {
    (prop::sample::select(ProtocolTag::ALL.to_vec()), any::<u64>())
}

/// The public JSON carries only the public schema, and private names never
/// appear among the observed values.
pub fn check_public_private_separation(tag: ProtocolTag, seed: u64) -> Check {
    let tr = ProtocolInstance::new(tag, seed).simulate()?;
    let json = tr.to_json(false);
    let top: BTreeSet<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    prop_assert_eq!(top, BTreeSet::from(["generation_ops", "honest_key", "public"]));
    let public: BTreeSet<&str> = json["public"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    prop_assert_eq!(
        public,
        BTreeSet::from(["integers", "observed", "protocol", "space", "u", "w"])
    );
    let private = &tr.private;
    for name in tr.public.observed.keys().chain(tr.public.integers.keys()) {
        prop_assert!(!private.matrices.contains_key(name));
        prop_assert!(!private.vectors.contains_key(name));
        prop_assert!(!private.integers.contains_key(name));
    }
    prop_assert!(tr.to_json(true).get("private").is_some());
    Ok(())
}

/// Same seed, same transcript.
pub fn check_determinism(tag: ProtocolTag, seed: u64) -> Check {
    let a = ProtocolInstance::new(tag, seed).simulate()?;
    let b = ProtocolInstance::new(tag, seed).simulate()?;
    prop_assert_eq!(a.to_json(true).to_string(), b.to_json(true).to_string());
    Ok(())
}
