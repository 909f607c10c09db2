//! The ten honest simulators. Each returns `Ok(None)` on a degenerate draw so
//! the caller can resample.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::Rng;

use crate::actions::{Action, FlatSpace};
use crate::algebra::{AlgMatrix, Algebra, AlgebraSpec};
use crate::attacks::{PublicData, ALICE, BASE, BOB};
use crate::error::{Error, Result};
use crate::linalg::{FMatrix, FVector};

use super::sampler::{commuting_subgroup_sampler, invertible_polynomial, random_word, Generator};
use super::{Params, PrivateView, ProtocolTag, Transcript, MAX_RESAMPLES, ORDER_CAP};

type Draw = Result<Option<Transcript>>;

pub(super) fn simulate<R: Rng + ?Sized>(tag: ProtocolTag, params: &Params, rng: &mut R) -> Draw {
    match tag {
        ProtocolTag::KoLee => conjugation_scheme(tag, params, rng, false),
        ProtocolTag::Mahalanobis1 => conjugation_scheme(tag, params, rng, true),
        ProtocolTag::WangCao => wang_cao(params, rng),
        ProtocolTag::Hurley => hurley(params, rng),
        ProtocolTag::Stickel => stickel(params, rng),
        ProtocolTag::Alvarez => alvarez(params, rng),
        ProtocolTag::ShpilrainUshakov => shpilrain_ushakov(params, rng),
        ProtocolTag::Romanczuk => romanczuk(params, rng),
        ProtocolTag::Mahalanobis2 => mahalanobis2(params, rng),
        ProtocolTag::Hkks => hkks(params, rng),
    }
}

fn algebra(params: &Params) -> Result<Arc<Algebra>> {
    Algebra::from_spec(&AlgebraSpec {
        field: params.p,
        kind: params.algebra.clone(),
    })
}

fn agree<T: PartialEq>(tag: ProtocolTag, a: &T, b: &T) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ParameterRejection(format!(
            "{tag}: Alice's and Bob's keys differ"
        )))
    }
}

/// Fixed exponents must fall in their ranges; random ones are drawn from the
/// range clipped to `exponent_bound`. `None` when no valid choice exists.
fn draw_exponents<R: Rng + ?Sized>(
    params: &Params,
    ranges: &[RangeInclusive<u64>],
    rng: &mut R,
) -> Option<Vec<u64>> {
    match &params.exponents {
        Some(fixed) => fixed
            .iter()
            .zip(ranges)
            .all(|(e, r)| r.contains(e))
            .then(|| fixed.clone()),
        None => ranges
            .iter()
            .map(|r| {
                let hi = (*r.end()).min(params.exponent_bound);
                (*r.start() <= hi).then(|| rng.gen_range(*r.start()..=hi))
            })
            .collect(),
    }
}

fn random_invertible<R: Rng + ?Sized>(alg: &Arc<Algebra>, n: usize, rng: &mut R) -> Option<(AlgMatrix, AlgMatrix)> {
    AlgMatrix::random_invertible(alg, n, rng, MAX_RESAMPLES).ok()
}

/// `a x a^-1`
fn conj(a: &AlgMatrix, a_inv: &AlgMatrix, x: &AlgMatrix, ops: &mut u64) -> Result<AlgMatrix> {
    a.mul_counted(x, ops)?.mul_counted(a_inv, ops)
}

fn conjugations(gens: &[Generator]) -> Vec<Action> {
    gens.iter()
        .flat_map(|g| {
            [
                Action::Conjugation {
                    g: g.m.clone(),
                    g_inv: g.inv.clone(),
                },
                Action::Conjugation {
                    g: g.inv.clone(),
                    g_inv: g.m.clone(),
                },
            ]
        })
        .collect()
}

fn materialized(actions: Vec<Action>, space: &FlatSpace) -> Result<Vec<Action>> {
    actions
        .iter()
        .map(|a| Action::explicit(a.materialize(space.field())?))
        .collect()
}

/// Left and right multiplications by each generator and its inverse.
fn two_sided(gens: &[Generator]) -> Vec<Action> {
    gens.iter()
        .flat_map(|g| {
            [
                Action::left_mul(g.m.clone()),
                Action::left_mul(g.inv.clone()),
                Action::right_mul(g.m.clone()),
                Action::right_mul(g.inv.clone()),
            ]
        })
        .collect()
}

fn right_muls(gens: &[Generator]) -> Vec<Action> {
    gens.iter()
        .flat_map(|g| [Action::right_mul(g.m.clone()), Action::right_mul(g.inv.clone())])
        .collect()
}

/// Row vector times a matrix over F_p.
fn row_mul(x: &FVector, m: &AlgMatrix, ops: &mut u64) -> FVector {
    let f = x.field();
    let n = m.n();
    let data = m.data();
    let out = (0..n)
        .map(|j| (0..n).fold(0, |acc, i| f.mul_add(acc, x.entries()[i], data[i * n + j])))
        .collect();
    *ops += (n * n) as u64;
    FVector::new(f, out)
}

struct Builder {
    tag: ProtocolTag,
    space: FlatSpace,
    observed: BTreeMap<String, FVector>,
    integers: BTreeMap<String, u64>,
    private: PrivateView,
}

impl Builder {
    fn new(tag: ProtocolTag, space: &FlatSpace) -> Self {
        Builder {
            tag,
            space: space.clone(),
            observed: BTreeMap::new(),
            integers: BTreeMap::new(),
            private: PrivateView::default(),
        }
    }

    fn observe(&mut self, name: &str, m: &AlgMatrix) -> Result<()> {
        let v = self.space.flatten(m)?;
        self.observed.insert(name.into(), v);
        Ok(())
    }

    fn observe_row(&mut self, name: &str, row: &FVector) -> Result<()> {
        let v = self.space.embed_row(row)?;
        self.observed.insert(name.into(), v);
        Ok(())
    }

    fn integer(&mut self, name: &str, x: u64) {
        self.integers.insert(name.into(), x);
    }

    fn secret(&mut self, name: &str, m: &AlgMatrix) {
        self.private.matrices.insert(name.into(), m.clone());
    }

    fn secret_vector(&mut self, name: &str, v: &FVector) {
        self.private.vectors.insert(name.into(), v.clone());
    }

    fn secret_integers(&mut self, tag: ProtocolTag, values: &[u64]) {
        for (name, &v) in tag.exponent_names().iter().zip(values) {
            self.private.integers.insert((*name).into(), v);
        }
    }

    fn finish(self, u: Vec<Action>, w: Vec<Action>, honest_key: FVector, ops: u64) -> Draw {
        Ok(Some(Transcript {
            public: PublicData {
                protocol: self.tag,
                space: self.space,
                u,
                w,
                observed: self.observed,
                integers: self.integers,
            },
            private: self.private,
            honest_key,
            generation_ops: ops,
        }))
    }
}

/// Ko-Lee (inner conjugations) and Mahalanobis' first protocol (the same
/// automorphisms handed to the attacker as explicit linear maps).
fn conjugation_scheme<R: Rng + ?Sized>(tag: ProtocolTag, params: &Params, rng: &mut R, explicit: bool) -> Draw {
    let alg = algebra(params)?;
    let space = FlatSpace::new(&alg, params.n);
    let fam = commuting_subgroup_sampler(&space, params.style, params.generators, rng)?;
    let Some((g, _)) = random_invertible(&alg, params.n, rng) else {
        return Ok(None);
    };
    let mut ops = 0;
    let (a, a_inv) = random_word(&fam.alice, params.word_length, rng, &mut ops)?;
    let (b, b_inv) = random_word(&fam.bob, params.word_length, rng, &mut ops)?;
    let g_a = conj(&a, &a_inv, &g, &mut ops)?;
    let g_b = conj(&b, &b_inv, &g, &mut ops)?;
    let key_a = conj(&a, &a_inv, &g_b, &mut ops)?;
    let key_b = conj(&b, &b_inv, &g_a, &mut ops)?;
    agree(tag, &key_a, &key_b)?;

    let mut t = Builder::new(tag, &space);
    t.observe(BASE, &g)?;
    t.observe(ALICE, &g_a)?;
    t.observe(BOB, &g_b)?;
    t.secret("a", &a);
    t.secret("b", &b);
    let (mut u, mut w) = (conjugations(&fam.alice), conjugations(&fam.bob));
    if explicit {
        u = materialized(u, &space)?;
        w = materialized(w, &space)?;
    }
    let key = space.flatten(&key_a)?;
    t.finish(u, w, key, ops)
}

fn wang_cao<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::WangCao;
    let alg = algebra(params)?;
    let space = FlatSpace::new(&alg, params.n);
    let (Some((x, x_inv)), Some((g, _))) = (
        random_invertible(&alg, params.n, rng),
        random_invertible(&alg, params.n, rng),
    ) else {
        return Ok(None);
    };
    let Some(e) = draw_exponents(params, &[1..=u64::MAX, 1..=u64::MAX], rng) else {
        return Ok(None);
    };
    let (s, t_exp) = (e[0], e[1]);
    let mut ops = 0;
    let xs = x.pow_counted(s, &mut ops);
    let xs_inv = x_inv.pow_counted(s, &mut ops);
    let xt = x.pow_counted(t_exp, &mut ops);
    let xt_inv = x_inv.pow_counted(t_exp, &mut ops);
    let g_s = conj(&xs, &xs_inv, &g, &mut ops)?;
    let g_t = conj(&xt, &xt_inv, &g, &mut ops)?;
    let key_a = conj(&xs, &xs_inv, &g_t, &mut ops)?;
    let key_b = conj(&xt, &xt_inv, &g_s, &mut ops)?;
    agree(tag, &key_a, &key_b)?;

    let mut t = Builder::new(tag, &space);
    t.observe(BASE, &g)?;
    t.observe(ALICE, &g_s)?;
    t.observe(BOB, &g_t)?;
    t.secret_integers(tag, &e);
    let u = vec![Action::Conjugation { g: x, g_inv: x_inv }];
    let key = space.flatten(&key_a)?;
    t.finish(u.clone(), u, key, ops)
}

fn hurley<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::Hurley;
    let alg = algebra(params)?;
    let n = params.n;
    let space = FlatSpace::new(&alg, n);
    let f = alg.field();
    // G: commutative group generated by invertible polynomials in one matrix
    let m = AlgMatrix::random(&alg, n, rng);
    let gens = (0..params.generators)
        .map(|_| invertible_polynomial(&m, rng))
        .collect::<Result<Vec<_>>>()?;
    let mut ops = 0;
    let element = |rng: &mut R, ops: &mut u64| random_word(&gens, params.word_length, rng, ops);
    let (b, _) = element(rng, &mut ops)?;
    let (a, _) = element(rng, &mut ops)?;
    let (a1, _) = element(rng, &mut ops)?;
    let (b1, b1_inv) = element(rng, &mut ops)?;
    let (b2, _) = element(rng, &mut ops)?;
    let x = crate::actions::random_vector(f, n, rng);
    let y = crate::actions::random_vector(f, n, rng);

    let y_b = row_mul(&y, &b, &mut ops);
    let x_a = row_mul(&x, &a, &mut ops);
    let y_b_a1 = row_mul(&y_b, &a1, &mut ops);
    let x_a_b1 = row_mul(&x_a, &b1, &mut ops);
    let y_a1 = row_mul(&y, &a1, &mut ops);
    let y_a1_b2 = row_mul(&y_a1, &b2, &mut ops);
    // Alice strips A and A1
    let a_inv = a.inverse()?;
    let a1_inv = a1.inverse()?;
    let x_b1 = row_mul(&x_a_b1, &a_inv, &mut ops);
    let y_b2 = row_mul(&y_a1_b2, &a1_inv, &mut ops);
    let last = x_b1.sub(&y_b2)?;
    // Bob: (xB1 - yB2) B1^-1 + yB2 B1^-1
    let y_b2_bob = row_mul(&y, &b2, &mut ops);
    let recovered = row_mul(&last, &b1_inv, &mut ops).add(&row_mul(&y_b2_bob, &b1_inv, &mut ops))?;
    agree(tag, &recovered, &x)?;

    let mut t = Builder::new(tag, &space);
    t.observe_row("y_b", &y_b)?;
    t.observe_row("x_a", &x_a)?;
    t.observe_row("y_b_a1", &y_b_a1)?;
    t.observe_row("x_a_b1", &x_a_b1)?;
    t.observe_row("y_a1_b2", &y_a1_b2)?;
    t.observe_row("x_b1_minus_y_b2", &last)?;
    for (name, mat) in [("a", &a), ("a1", &a1), ("b", &b), ("b1", &b1), ("b2", &b2)] {
        t.secret(name, mat);
    }
    t.secret_vector("x", &x);
    t.secret_vector("y", &y);
    let u = right_muls(&gens);
    t.finish(u.clone(), u, x, ops)
}

/// An invertible matrix whose order is known, at least `min_order` and at
/// most [`ORDER_CAP`].
fn element_with_order<R: Rng + ?Sized>(
    alg: &Arc<Algebra>,
    n: usize,
    min_order: u64,
    rng: &mut R,
) -> Option<(AlgMatrix, u64)> {
    (0..MAX_RESAMPLES).find_map(|_| {
        let (m, _) = random_invertible(alg, n, rng)?;
        let order = m.order(ORDER_CAP)?;
        (order >= min_order).then_some((m, order))
    })
}

fn stickel<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::Stickel;
    let alg = algebra(params)?;
    let n = params.n;
    let space = FlatSpace::new(&alg, n);
    // orders above the bound make every admissible exponent valid
    let min_order = params.exponent_bound.max(2) + 1;
    let (Some((g, k0)), Some((f, l0))) = (
        element_with_order(&alg, n, min_order, rng),
        element_with_order(&alg, n, min_order, rng),
    ) else {
        return Ok(None);
    };
    if g.commutes_with(&f)? {
        return Ok(None);
    }
    // random draws follow 1 < k < k0; fixed ones may use 1 <= k
    let lo = if params.exponents.is_some() { 1 } else { 2 };
    let ranges = [lo..=k0 - 1, lo..=l0 - 1, lo..=k0 - 1, lo..=l0 - 1];
    let Some(e) = draw_exponents(params, &ranges, rng) else {
        return Ok(None);
    };
    let (k, l, r, s) = (e[0], e[1], e[2], e[3]);
    let mut ops = 0;
    let gk = g.pow_counted(k, &mut ops);
    let fl = f.pow_counted(l, &mut ops);
    let gr = g.pow_counted(r, &mut ops);
    let fs = f.pow_counted(s, &mut ops);
    let pub_a = gk.mul_counted(&fl, &mut ops)?;
    let pub_b = gr.mul_counted(&fs, &mut ops)?;
    let key_a = gk.mul_counted(&pub_b, &mut ops)?.mul_counted(&fl, &mut ops)?;
    let key_b = gr.mul_counted(&pub_a, &mut ops)?.mul_counted(&fs, &mut ops)?;
    agree(tag, &key_a, &key_b)?;

    let mut t = Builder::new(tag, &space);
    t.observe(BASE, &AlgMatrix::identity(&alg, n))?;
    t.observe(ALICE, &pub_a)?;
    t.observe(BOB, &pub_b)?;
    t.integer("k0", k0);
    t.integer("l0", l0);
    t.secret_integers(tag, &e);
    let u = vec![Action::left_mul(g), Action::right_mul(f)];
    let key = space.flatten(&key_a)?;
    t.finish(u.clone(), u, key, ops)
}

fn block(m: &FMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> FMatrix {
    let mut out = FMatrix::zeros(m.field(), rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            out.set(i, j, m.get(r0 + i, c0 + j));
        }
    }
    out
}

fn fadd(a: &FMatrix, b: &FMatrix) -> FMatrix {
    let f = a.field();
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.set(i, j, f.add(a.get(i, j), b.get(i, j)));
        }
    }
    out
}

fn alvarez<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::Alvarez;
    let alg = algebra(params)?;
    let (n, m) = (params.n, params.m);
    let size = n + m;
    let space = FlatSpace::new(&alg, size);
    let triangular = |rng: &mut R| -> Result<Option<(AlgMatrix, u64)>> {
        let (Some((a, _)), Some((b, _))) = (random_invertible(&alg, n, rng), random_invertible(&alg, m, rng)) else {
            return Ok(None);
        };
        let x = AlgMatrix::random(&alg, size, rng);
        let mat = AlgMatrix::from_fn(&alg, size, |i, j| match (i < n, j < n) {
            (true, true) => a.entry(i, j),
            (false, false) => b.entry(i - n, j - n),
            (true, false) => x.entry(i, j),
            (false, true) => crate::algebra::AlgebraElement::zero(&alg),
        })?;
        Ok(mat.order(ORDER_CAP).map(|o| (mat, o)))
    };
    let (Some((m1, o1)), Some((m2, o2))) = (triangular(rng)?, triangular(rng)?) else {
        return Ok(None);
    };
    let ranges = [1..=o1 - 1, 1..=o2 - 1, 1..=o1 - 1, 1..=o2 - 1];
    let Some(e) = draw_exponents(params, &ranges, rng) else {
        return Ok(None);
    };
    let (k1, k2, l1, l2) = (e[0], e[1], e[2], e[3]);
    let mut ops = 0;
    let m1k = m1.pow_counted(k1, &mut ops);
    let m2k = m2.pow_counted(k2, &mut ops);
    let m1l = m1.pow_counted(l1, &mut ops);
    let m2l = m2.pow_counted(l2, &mut ops);
    let c = m1k.mul_counted(&m2k, &mut ops)?;
    let d = m1l.mul_counted(&m2l, &mut ops)?;

    // K_A = A1^k1 A_D X2^(k2) + A1^k1 X_D B2^k2 + X1^(k1) B_D B2^k2, and symmetrically
    let blocks = |mat: &AlgMatrix| -> Result<(FMatrix, FMatrix, FMatrix)> {
        let f = mat.to_fmatrix()?;
        Ok((block(&f, 0, 0, n, n), block(&f, 0, n, n, m), block(&f, n, n, m, m)))
    };
    let party_key = |own1: &AlgMatrix, own2: &AlgMatrix, other: &AlgMatrix| -> Result<FMatrix> {
        let (a1, x1, _) = blocks(own1)?;
        let (_, x2, b2) = blocks(own2)?;
        let (a_o, x_o, b_o) = blocks(other)?;
        let t1 = a1.mul(&a_o)?.mul(&x2)?;
        let t2 = a1.mul(&x_o)?.mul(&b2)?;
        let t3 = x1.mul(&b_o)?.mul(&b2)?;
        Ok(fadd(&fadd(&t1, &t2), &t3))
    };
    let key_a = party_key(&m1k, &m2k, &d)?;
    let key_b = party_key(&m1l, &m2l, &c)?;
    agree(tag, &key_a, &key_b)?;
    let full = m1.pow(k1 + l1).mul(&m2.pow(k2 + l2))?.to_fmatrix()?;
    agree(tag, &block(&full, 0, n, n, m), &key_a)?;
    ops += 3 * (2 * n * n * m + n * m * m) as u64;

    let mut t = Builder::new(tag, &space);
    t.observe(BASE, &AlgMatrix::identity(&alg, size))?;
    t.observe(ALICE, &c)?;
    t.observe(BOB, &d)?;
    t.integer("n_block", n as u64);
    t.integer("m1", o1);
    t.integer("m2", o2);
    t.secret_integers(tag, &e);
    let u = vec![Action::left_mul(m1), Action::right_mul(m2)];
    let key = FVector::new(
        alg.field(),
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| key_a.get(i, j)).collect(),
    );
    t.finish(u.clone(), u, key, ops)
}

fn shpilrain_ushakov<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::ShpilrainUshakov;
    let alg = algebra(params)?;
    let space = FlatSpace::new(&alg, params.n);
    let fam = commuting_subgroup_sampler(&space, params.style, params.generators, rng)?;
    let Some((g, _)) = random_invertible(&alg, params.n, rng) else {
        return Ok(None);
    };
    let mut ops = 0;
    let len = params.word_length;
    let (a, _) = random_word(&fam.alice, len, rng, &mut ops)?;
    let (a2, _) = random_word(&fam.alice, len, rng, &mut ops)?;
    let (b, _) = random_word(&fam.bob, len, rng, &mut ops)?;
    let (b2, _) = random_word(&fam.bob, len, rng, &mut ops)?;
    let pub_a = a.mul_counted(&g, &mut ops)?.mul_counted(&a2, &mut ops)?;
    let pub_b = b.mul_counted(&g, &mut ops)?.mul_counted(&b2, &mut ops)?;
    let key_a = a.mul_counted(&pub_b, &mut ops)?.mul_counted(&a2, &mut ops)?;
    let key_b = b.mul_counted(&pub_a, &mut ops)?.mul_counted(&b2, &mut ops)?;
    agree(tag, &key_a, &key_b)?;

    let mut t = Builder::new(tag, &space);
    t.observe(BASE, &g)?;
    t.observe(ALICE, &pub_a)?;
    t.observe(BOB, &pub_b)?;
    for (name, mat) in [("a", &a), ("a_prime", &a2), ("b", &b), ("b_prime", &b2)] {
        t.secret(name, mat);
    }
    let key = space.flatten(&key_a)?;
    t.finish(two_sided(&fam.alice), two_sided(&fam.bob), key, ops)
}

/// `sum c_ij C^i D^j` over `i + j <= degree`.
fn bivariate<R: Rng + ?Sized>(
    c_pows: &[AlgMatrix],
    d_pows: &[AlgMatrix],
    degree: usize,
    rng: &mut R,
    ops: &mut u64,
) -> Result<AlgMatrix> {
    let alg = c_pows[0].algebra();
    let p = alg.field().modulus();
    let mut acc = AlgMatrix::zero(alg, c_pows[0].n());
    for i in 0..=degree {
        for j in 0..=degree - i {
            let coeff = rng.gen_range(0..p);
            if coeff != 0 {
                let term = c_pows[i].mul_counted(&d_pows[j], ops)?;
                acc = acc.add(&term.scale(coeff))?;
            }
        }
    }
    Ok(acc)
}

fn romanczuk<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::Romanczuk;
    let alg = algebra(params)?;
    let n = params.n;
    let space = FlatSpace::new(&alg, n);
    let Some((c, _)) = random_invertible(&alg, n, rng) else {
        return Ok(None);
    };
    let d = invertible_polynomial(&c, rng)?.m;
    let mut ops = 0;
    let powers = |m: &AlgMatrix, ops: &mut u64| -> Vec<AlgMatrix> {
        let mut out = vec![AlgMatrix::identity(&alg, n)];
        for _ in 0..params.poly_degree {
            let next = out.last().unwrap().mul_counted(m, ops).expect("same shape");
            out.push(next);
        }
        out
    };
    let c_pows = powers(&c, &mut ops);
    let d_pows = powers(&d, &mut ops);
    let p_mat = bivariate(&c_pows, &d_pows, params.poly_degree, rng, &mut ops)?;
    let q_mat = bivariate(&c_pows, &d_pows, params.poly_degree, rng, &mut ops)?;
    let g = crate::actions::random_vector(alg.field(), n, rng);
    let g_p = row_mul(&g, &p_mat, &mut ops);
    let g_q = row_mul(&g, &q_mat, &mut ops);
    let key_a = row_mul(&g_q, &p_mat, &mut ops);
    let key_b = row_mul(&g_p, &q_mat, &mut ops);
    agree(tag, &key_a, &key_b)?;

    let mut t = Builder::new(tag, &space);
    t.observe_row(BASE, &g)?;
    t.observe_row(ALICE, &g_p)?;
    t.observe_row(BOB, &g_q)?;
    t.secret("p", &p_mat);
    t.secret("q", &q_mat);
    let u = vec![Action::right_mul(c), Action::right_mul(d)];
    t.finish(u.clone(), u, key_a, ops)
}

fn mahalanobis2<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::Mahalanobis2;
    let alg = algebra(params)?;
    let space = FlatSpace::new(&alg, params.n);
    let fam = commuting_subgroup_sampler(&space, params.style, params.generators, rng)?;
    let Some((g, _)) = random_invertible(&alg, params.n, rng) else {
        return Ok(None);
    };
    let mut ops = 0;
    let len = params.word_length;
    let (phi, phi_inv) = random_word(&fam.alice, len, rng, &mut ops)?;
    let (xi, xi_inv) = random_word(&fam.alice, len, rng, &mut ops)?;
    let (psi, psi_inv) = random_word(&fam.bob, len, rng, &mut ops)?;
    // Alice -> Bob -> Alice -> Bob
    let g_phi = conj(&phi, &phi_inv, &g, &mut ops)?;
    let g_phi_psi = conj(&psi, &psi_inv, &g_phi, &mut ops)?;
    let g_psi = conj(&phi_inv, &phi, &g_phi_psi, &mut ops)?;
    let g_psi_xi = conj(&xi, &xi_inv, &g_psi, &mut ops)?;
    let key_b = conj(&psi_inv, &psi, &g_psi_xi, &mut ops)?;
    let key_a = conj(&xi, &xi_inv, &g, &mut ops)?;
    agree(tag, &key_a, &key_b)?;

    let mut t = Builder::new(tag, &space);
    t.observe("g_phi", &g_phi)?;
    t.observe("g_phi_psi", &g_phi_psi)?;
    t.observe("g_psi_xi", &g_psi_xi)?;
    t.secret("g", &g);
    t.secret("phi", &phi);
    t.secret("psi", &psi);
    t.secret("xi", &xi);
    let u = materialized(conjugations(&fam.alice), &space)?;
    let w = materialized(conjugations(&fam.bob), &space)?;
    let key = space.flatten(&key_a)?;
    t.finish(u, w, key, ops)
}

/// `(phi^k, a_k)` with `phi^k` stored as conjugation by `h^k`.
struct HkksPower {
    h: AlgMatrix,
    h_inv: AlgMatrix,
    a: AlgMatrix,
}

impl HkksPower {
    /// `(phi^i, a_i)(phi^j, a_j) = (phi^(i+j), phi^j(a_i) a_j)`
    fn mul(&self, other: &HkksPower, ops: &mut u64) -> Result<HkksPower> {
        Ok(HkksPower {
            h: self.h.mul_counted(&other.h, ops)?,
            h_inv: other.h_inv.mul_counted(&self.h_inv, ops)?,
            a: conj(&other.h, &other.h_inv, &self.a, ops)?.mul_counted(&other.a, ops)?,
        })
    }

    fn pow(base: &HkksPower, mut e: u64, ops: &mut u64) -> Result<HkksPower> {
        let alg = base.h.algebra();
        let n = base.h.n();
        let id = AlgMatrix::identity(alg, n);
        let mut acc = HkksPower {
            h: id.clone(),
            h_inv: id.clone(),
            a: id,
        };
        let mut sq = HkksPower {
            h: base.h.clone(),
            h_inv: base.h_inv.clone(),
            a: base.a.clone(),
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq, ops)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq, ops)?;
            }
        }
        Ok(acc)
    }
}

/// Longest sequence expanded term by term as an independent check.
const HKKS_DIRECT_LIMIT: u64 = 4096;

fn hkks<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Draw {
    let tag = ProtocolTag::Hkks;
    let alg = algebra(params)?;
    let n = params.n;
    let space = FlatSpace::new(&alg, n);
    let (Some((h, h_inv)), Some((g, _))) = (random_invertible(&alg, n, rng), random_invertible(&alg, n, rng)) else {
        return Ok(None);
    };
    let Some(e) = draw_exponents(params, &[1..=u64::MAX, 1..=u64::MAX], rng) else {
        return Ok(None);
    };
    let (m, n_exp) = (e[0], e[1]);
    let mut ops = 0;
    let base = HkksPower {
        h: h.clone(),
        h_inv: h_inv.clone(),
        a: g.clone(),
    };
    let alice = HkksPower::pow(&base, m, &mut ops)?;
    let bob = HkksPower::pow(&base, n_exp, &mut ops)?;
    // K_A = phi^m(a_n) a_m, K_B = phi^n(a_m) a_n
    let key_a = conj(&alice.h, &alice.h_inv, &bob.a, &mut ops)?.mul_counted(&alice.a, &mut ops)?;
    let key_b = conj(&bob.h, &bob.h_inv, &alice.a, &mut ops)?.mul_counted(&bob.a, &mut ops)?;
    agree(tag, &key_a, &key_b)?;
    if m + n_exp <= HKKS_DIRECT_LIMIT {
        let mut a_k = AlgMatrix::identity(&alg, n);
        for _ in 0..m + n_exp {
            a_k = conj(&h, &h_inv, &a_k, &mut 0)?.mul(&g)?;
        }
        agree(tag, &a_k, &key_a)?;
    }

    let mut t = Builder::new(tag, &space);
    t.observe("g", &g)?;
    t.observe("a_m", &alice.a)?;
    t.observe("a_n", &bob.a)?;
    t.secret_integers(tag, &e);
    let u = vec![Action::Conjugation { g: h, g_inv: h_inv }];
    let key = space.flatten(&key_a)?;
    t.finish(u.clone(), u, key, ops)
}
