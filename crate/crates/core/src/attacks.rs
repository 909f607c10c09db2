//! Key recovery from public data.
//!
//! Every attack follows the same pattern: compute a witnessed basis of the
//! orbit span of a public element under the public actions, decompose the
//! other party's public value in that basis, and replay the witnesses on a
//! second public value. None of them learns a private exponent or
//! conjugator.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::actions::{Action, FlatSpace};
use crate::algebra::AlgMatrix;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::linalg::{solve_linear, FMatrix, FVector};
use crate::protocols::ProtocolTag;
use crate::spanclosure::{span_closure_with, ClosureOptions, SpanBasis, Term};

/// Conventional names of observed vectors for the generic templates.
pub const BASE: &str = "base";
pub const ALICE: &str = "alice";
pub const BOB: &str = "bob";

/// Everything an eavesdropper sees.
#[derive(Clone, Debug, Serialize)]
pub struct PublicData {
    pub protocol: ProtocolTag,
    pub space: FlatSpace,
    /// Actions generating the attacked side's monoid; inverses are appended
    /// where the scheme samples from a subgroup.
    pub u: Vec<Action>,
    /// Actions of the other side.
    pub w: Vec<Action>,
    pub observed: BTreeMap<String, FVector>,
    /// Public integer parameters (block sizes, element orders).
    pub integers: BTreeMap<String, u64>,
}

impl PublicData {
    pub fn vector(&self, name: &str) -> Result<&FVector> {
        let v = self
            .observed
            .get(name)
            .ok_or_else(|| Error::MalformedTranscript(format!("missing public value {name:?}")))?;
        if v.len() != self.space.dim() {
            return Err(Error::MalformedTranscript(format!(
                "{name:?} has length {} in a space of dimension {}",
                v.len(),
                self.space.dim()
            )));
        }
        Ok(v)
    }

    pub fn integer(&self, name: &str) -> Result<u64> {
        self.integers
            .get(name)
            .copied()
            .ok_or_else(|| Error::MalformedTranscript(format!("missing public integer {name:?}")))
    }

    pub fn field(&self) -> PrimeField {
        self.space.field()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AttackStats {
    /// Sum of the ranks of all span bases built.
    pub basis_dim: usize,
    pub passes: usize,
    /// Field operations: closures, decompositions and witness replays.
    pub ops: u64,
}

impl AttackStats {
    fn absorb(&mut self, basis: &SpanBasis) {
        let s = basis.stats();
        self.basis_dim += basis.rank();
        self.passes += s.passes;
        self.ops += s.ops;
    }
}

#[derive(Clone, Debug)]
pub struct RecoveredKey {
    pub key: FVector,
    /// The key viewed as a matrix, when it lives in a matrix space.
    pub matrix: Option<AlgMatrix>,
    pub combination: Vec<Term>,
    pub stats: AttackStats,
}

fn malformed(e: Error, what: &str) -> Error {
    match e {
        Error::NotInSpan => {
            Error::MalformedTranscript(format!("{what} is outside the computed span"))
        }
        other => other,
    }
}

/// Decomposes `target` in `basis` and replays the combination on
/// `replacement` in place of the seed: `sum coeff_i word_i(replacement)`.
/// Every basis word is replayed whatever the coefficients, so the cost does
/// not depend on which combination came out.
fn decompose_and_replay(
    basis: &mut SpanBasis,
    target: &FVector,
    replacement: &FVector,
    gens: &[Action],
    what: &str,
    ops: &mut u64,
) -> Result<(FVector, Vec<Term>)> {
    let coeffs = basis.coefficients(target).map_err(|e| malformed(e, what))?;
    let images = basis.replay_all(std::slice::from_ref(replacement), gens, ops)?;
    Ok((combine(&coeffs, &images, replacement, ops)?, terms(&coeffs, basis)))
}

fn combine(coeffs: &[u32], images: &[FVector], like: &FVector, ops: &mut u64) -> Result<FVector> {
    let mut acc = FVector::zeros(like.field(), like.len());
    for (&c, image) in coeffs.iter().zip(images) {
        acc.axpy(c, image)?;
        *ops += like.len() as u64;
    }
    Ok(acc)
}

fn terms(coeffs: &[u32], basis: &SpanBasis) -> Vec<Term> {
    coeffs
        .iter()
        .zip(basis.witnesses())
        .filter(|(c, _)| **c != 0)
        .map(|(&coeff, w)| Term {
            coeff,
            witness: w.clone(),
        })
        .collect()
}

/// Basic template: from `v`, `a(v)` and `b(v)` with `a` in the monoid of
/// `gens` and `b` commuting with `gens`, computes `a(b(v))`.
pub fn basic_attack(
    gens: &[Action],
    v: &FVector,
    v_a: &FVector,
    v_b: &FVector,
) -> Result<RecoveredKey> {
    basic_with(gens, v, v_a, v_b, ClosureOptions::default())
}

fn basic_with(
    gens: &[Action],
    v: &FVector,
    v_a: &FVector,
    v_b: &FVector,
    opts: ClosureOptions,
) -> Result<RecoveredKey> {
    let field = v.field();
    let dim = v.len();
    let mut basis = span_closure_with(field, dim, std::slice::from_ref(v), gens, opts)?;
    let mut ops = 0;
    let (key, combination) =
        decompose_and_replay(&mut basis, v_a, v_b, gens, "the first public value", &mut ops)?;
    let mut stats = AttackStats::default();
    stats.absorb(&basis);
    stats.ops += ops;
    Ok(RecoveredKey {
        key,
        matrix: None,
        combination,
        stats,
    })
}

fn with_matrix(space: &FlatSpace, mut rec: RecoveredKey) -> Result<RecoveredKey> {
    rec.matrix = Some(space.unflatten(&rec.key)?);
    Ok(rec)
}

/// Conjugation template: `U` holds conjugations by Alice's generators (and
/// inverses); observes `g`, `a g a^-1`, `b g b^-1`; returns `ab g (ab)^-1`.
pub fn conjugation_attack(public: &PublicData) -> Result<RecoveredKey> {
    template_with(public, ClosureOptions::default())
}

fn template_with(public: &PublicData, opts: ClosureOptions) -> Result<RecoveredKey> {
    let rec = basic_with(
        &public.u,
        public.vector(BASE)?,
        public.vector(ALICE)?,
        public.vector(BOB)?,
        opts,
    )?;
    with_matrix(&public.space, rec)
}

/// Left/right multiplication template: `U` holds left and right
/// multiplications for Alice's side; observes `g`, `a g a'`, `b g b'`;
/// returns `a b g b' a'`.
pub fn two_sided_attack(public: &PublicData) -> Result<RecoveredKey> {
    conjugation_attack(public)
}

/// Automorphism template: the automorphisms arrive as linear actions on the
/// space (typically [`Action::ExplicitLinear`]).
pub fn automorphism_attack(public: &PublicData) -> Result<RecoveredKey> {
    conjugation_attack(public)
}

/// Public values of one run of the Hurley authentication protocol, as row
/// vectors embedded in the first row of the matrix space.
#[derive(Clone, Debug)]
pub struct HurleyView<'a> {
    pub y_b: &'a FVector,
    pub x_a: &'a FVector,
    pub y_b_a1: &'a FVector,
    pub x_a_b1: &'a FVector,
    pub y_a1_b2: &'a FVector,
    pub x_b1_minus_y_b2: &'a FVector,
}

/// Recovers the plaintext `x` from the Hurley transcript; `gens` generate the
/// commutative group `G` (with inverses) acting by right multiplication.
pub fn hurley_recover(view: &HurleyView<'_>, gens: &[Action]) -> Result<(FVector, AttackStats)> {
    hurley_with(view, gens, ClosureOptions::default())
}

fn hurley_with(
    view: &HurleyView<'_>,
    gens: &[Action],
    opts: ClosureOptions,
) -> Result<(FVector, AttackStats)> {
    let field = view.y_b.field();
    let dim = view.y_b.len();
    let mut ops = 0;
    // 1-2: basis of Sp(yBA1 G), then yB = sum alpha_i yBA1 C_i
    // 3: swap yBA1 for yA1B2 to get yB2
    let mut basis = span_closure_with(field, dim, std::slice::from_ref(view.y_b_a1), gens, opts)?;
    let (y_b2, _) = decompose_and_replay(&mut basis, view.y_b, view.y_a1_b2, gens, "yB", &mut ops)?;
    let mut stats = AttackStats::default();
    stats.absorb(&basis);
    // 4-5: basis of Sp(xAB1 G), then xA = sum beta_j xAB1 D_j
    let mut basis = span_closure_with(field, dim, std::slice::from_ref(view.x_a_b1), gens, opts)?;
    let beta = basis.coefficients(view.x_a).map_err(|e| malformed(e, "xA"))?;
    // 6: swap xAB1 for xB1 - yB2: x - yB2 T
    let images = basis.replay_all(std::slice::from_ref(view.x_b1_minus_y_b2), gens, &mut ops)?;
    let step6 = combine(&beta, &images, view.x_a, &mut ops)?;
    // 7: swap xAB1 for yB2: yB2 T
    let images = basis.replay_all(std::slice::from_ref(&y_b2), gens, &mut ops)?;
    let step7 = combine(&beta, &images, view.x_a, &mut ops)?;
    stats.absorb(&basis);
    stats.ops += ops;
    // 8
    Ok((step6.add(&step7)?, stats))
}

/// Romanczuk-Ustimenko: row vectors `g`, `gP`, `gQ` (length `n r`) with `P`,
/// `Q` polynomials in the commuting `C`, `D`; returns `gQP`.
pub fn romanczuk_attack(
    space: &FlatSpace,
    g: &FVector,
    g_p: &FVector,
    g_q: &FVector,
    c: &AlgMatrix,
    d: &AlgMatrix,
) -> Result<(FVector, AttackStats)> {
    romanczuk_with(space, g, g_p, g_q, c, d, ClosureOptions::default())
}

fn romanczuk_with(
    space: &FlatSpace,
    g: &FVector,
    g_p: &FVector,
    g_q: &FVector,
    c: &AlgMatrix,
    d: &AlgMatrix,
    opts: ClosureOptions,
) -> Result<(FVector, AttackStats)> {
    let gens = [Action::right_mul(c.clone()), Action::right_mul(d.clone())];
    let rec = basic_with(
        &gens,
        &space.embed_row(g)?,
        &space.embed_row(g_p)?,
        &space.embed_row(g_q)?,
        opts,
    )?;
    Ok((space.extract_row(&rec.key)?, rec.stats))
}

/// Linear-system attack on Romanczuk-Ustimenko over F_p: find any `X`
/// commuting with `C` and `D` with `gX = gQ`, then return `(gP) X`.
pub fn blackburn_attack(
    g: &FVector,
    g_p: &FVector,
    g_q: &FVector,
    c: &FMatrix,
    d: &FMatrix,
) -> Result<FVector> {
    let n = g.len();
    let field = g.field();
    if c.rows() != n || d.rows() != n || g_p.len() != n || g_q.len() != n {
        return Err(Error::DimensionError {
            expected: n,
            got: c.rows(),
        });
    }
    // unknown x_{ik} at index i * n + k
    let rows = 2 * n * n + n;
    let mut sys = FMatrix::zeros(field, rows, n * n);
    let mut rhs = vec![0u32; rows];
    for (block, m) in [c, d].into_iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = block * n * n + i * n + j;
                // (XM)_{ij} - (MX)_{ij} = sum_k x_{ik} M_{kj} - M_{ik} x_{kj}
                for k in 0..n {
                    let a = sys.get(row, i * n + k);
                    sys.set(row, i * n + k, field.add(a, m.get(k, j)));
                    let b = sys.get(row, k * n + j);
                    sys.set(row, k * n + j, field.sub(b, m.get(i, k)));
                }
            }
        }
    }
    for j in 0..n {
        let row = 2 * n * n + j;
        for i in 0..n {
            sys.set(row, i * n + j, g.entries()[i]);
        }
        rhs[row] = g_q.entries()[j];
    }
    let sol = solve_linear(&sys, &FVector::new(field, rhs)).map_err(|e| match e {
        Error::NoSolution => {
            Error::MalformedTranscript("no X commutes with C, D and maps g to gQ".into())
        }
        other => other,
    })?;
    let x = &sol.particular;
    let key = (0..n)
        .map(|k| {
            (0..n).fold(0u32, |acc, i| {
                field.mul_add(acc, g_p.entries()[i], x.entries()[i * n + k])
            })
        })
        .collect();
    Ok(FVector::new(field, key))
}

/// Mahalanobis' second protocol: observes `g^phi`, `g^{phi psi}` and
/// `g^{psi xi}`; `alice_gens` generate the group containing `phi` and `xi`.
/// Returns Bob's session key `g^xi`.
pub fn mahalanobis2_attack(
    g_phi: &FVector,
    g_phi_psi: &FVector,
    g_psi_xi: &FVector,
    alice_gens: &[Action],
) -> Result<RecoveredKey> {
    mahalanobis2_with(g_phi, g_phi_psi, g_psi_xi, alice_gens, ClosureOptions::default())
}

fn mahalanobis2_with(
    g_phi: &FVector,
    g_phi_psi: &FVector,
    g_psi_xi: &FVector,
    alice_gens: &[Action],
    opts: ClosureOptions,
) -> Result<RecoveredKey> {
    let field = g_phi.field();
    let mut basis = span_closure_with(field, g_phi.len(), std::slice::from_ref(g_phi_psi), alice_gens, opts)?;
    let mut ops = 0;
    let (key, combination) =
        decompose_and_replay(&mut basis, g_psi_xi, g_phi, alice_gens, "g^(psi xi)", &mut ops)?;
    let mut stats = AttackStats::default();
    stats.absorb(&basis);
    stats.ops += ops;
    Ok(RecoveredKey {
        key,
        matrix: None,
        combination,
        stats,
    })
}

/// HKKS: with `a_0 = 1`, `a_{k+1} = phi(a_k) g`, and public `a_m`, `a_n`,
/// returns `a_{m+n}`.
pub fn hkks_attack(
    space: &FlatSpace,
    g: &AlgMatrix,
    phi: &Action,
    a_m: &FVector,
    a_n: &FVector,
) -> Result<RecoveredKey> {
    let field = space.field();
    let d = space.dim();
    let mut stats = AttackStats::default();
    let mut basis = crate::linalg::EchelonBasis::new(field, d);
    // a_0, a_1, ... until the first dependent term
    let mut prefix: Vec<AlgMatrix> = Vec::new();
    let mut cur = AlgMatrix::identity(space.algebra(), space.n());
    loop {
        if !basis.extend(&space.flatten(&cur)?)?.accepted() {
            break;
        }
        prefix.push(cur.clone());
        let next = space.unflatten(&phi.apply_counted(&space.flatten(&cur)?, &mut stats.ops)?)?;
        cur = next.mul_counted(g, &mut stats.ops)?;
        stats.passes += 1;
    }
    stats.basis_dim = prefix.len();
    let eta = basis.decompose(a_n).map_err(|e| malformed(e, "a_n"))?;
    stats.ops += basis.ops();
    // a_{m+n} = sum eta_i phi^i(a_m) a_i
    let mut key = FVector::zeros(field, d);
    let mut phi_i = a_m.clone();
    for (i, (coeff, a_i)) in eta.iter().zip(&prefix).enumerate() {
        if i > 0 {
            phi_i = phi.apply_counted(&phi_i, &mut stats.ops)?;
        }
        let term = space.unflatten(&phi_i)?.mul_counted(a_i, &mut stats.ops)?;
        key.axpy(*coeff, &space.flatten(&term)?)?;
        stats.ops += d as u64;
    }
    let matrix = Some(space.unflatten(&key)?);
    Ok(RecoveredKey {
        key,
        matrix,
        combination: Vec::new(),
        stats,
    })
}

/// What [`attack`] produced for one transcript.
#[derive(Clone, Debug, Serialize)]
pub struct AttackOutcome {
    /// Recovered secret in the same shape as the honest key.
    pub key: FVector,
    pub stats: AttackStats,
    /// Independent second recovery, where one exists (Romanczuk-Ustimenko).
    pub cross_check: Option<FVector>,
}

fn hurley_outcome(public: &PublicData, opts: ClosureOptions) -> Result<AttackOutcome> {
    let view = HurleyView {
        y_b: public.vector("y_b")?,
        x_a: public.vector("x_a")?,
        y_b_a1: public.vector("y_b_a1")?,
        x_a_b1: public.vector("x_a_b1")?,
        y_a1_b2: public.vector("y_a1_b2")?,
        x_b1_minus_y_b2: public.vector("x_b1_minus_y_b2")?,
    };
    let (x, stats) = hurley_with(&view, &public.u, opts)?;
    Ok(AttackOutcome {
        key: public.space.extract_row(&x)?,
        stats,
        cross_check: None,
    })
}

fn right_mul_matrix(a: &Action) -> Result<&AlgMatrix> {
    match a {
        Action::RightMul { m } => Ok(m),
        _ => Err(Error::MalformedTranscript(
            "expected right multiplications by C and D".into(),
        )),
    }
}

fn romanczuk_outcome(public: &PublicData, opts: ClosureOptions) -> Result<AttackOutcome> {
    let space = &public.space;
    let [c, d] = public.u.as_slice() else {
        return Err(Error::MalformedTranscript("expected exactly C and D".into()));
    };
    let (c, d) = (right_mul_matrix(c)?, right_mul_matrix(d)?);
    let g = space.extract_row(public.vector(BASE)?)?;
    let g_p = space.extract_row(public.vector(ALICE)?)?;
    let g_q = space.extract_row(public.vector(BOB)?)?;
    let (key, stats) = romanczuk_with(space, &g, &g_p, &g_q, c, d, opts)?;
    let cross = blackburn_attack(&g, &g_p, &g_q, &c.to_fmatrix()?, &d.to_fmatrix()?)?;
    Ok(AttackOutcome {
        key,
        stats,
        cross_check: Some(cross),
    })
}

/// Extracts the upper-right `rows x cols` block of a flattened `F_p` matrix.
pub fn upper_right_block(space: &FlatSpace, v: &FVector, rows: usize) -> Result<FVector> {
    let size = space.n();
    if rows > size || space.algebra().dim() != 1 {
        return Err(Error::MalformedTranscript("bad block shape".into()));
    }
    let entries = (0..rows)
        .flat_map(|i| (rows..size).map(move |j| (i, j)))
        .map(|(i, j)| v.entries()[i * size + j])
        .collect();
    Ok(FVector::new(space.field(), entries))
}

/// Runs the attack matching `public.protocol`, using public data only.
pub fn attack(public: &PublicData) -> Result<AttackOutcome> {
    attack_with(public, ClosureOptions::default())
}

/// [`attack`] with explicit closure options (for example tracing).
pub fn attack_with(public: &PublicData, opts: ClosureOptions) -> Result<AttackOutcome> {
    let plain = |rec: RecoveredKey| AttackOutcome {
        key: rec.key,
        stats: rec.stats,
        cross_check: None,
    };
    match public.protocol {
        ProtocolTag::KoLee | ProtocolTag::WangCao => template_with(public, opts).map(plain),
        ProtocolTag::Stickel | ProtocolTag::ShpilrainUshakov => {
            template_with(public, opts).map(plain)
        }
        ProtocolTag::Alvarez => {
            let rec = template_with(public, opts)?;
            let rows = public.integer("n_block")? as usize;
            Ok(AttackOutcome {
                key: upper_right_block(&public.space, &rec.key, rows)?,
                stats: rec.stats,
                cross_check: None,
            })
        }
        ProtocolTag::Hurley => hurley_outcome(public, opts),
        ProtocolTag::Romanczuk => romanczuk_outcome(public, opts),
        ProtocolTag::Mahalanobis1 => template_with(public, opts).map(plain),
        ProtocolTag::Mahalanobis2 => mahalanobis2_with(
            public.vector("g_phi")?,
            public.vector("g_phi_psi")?,
            public.vector("g_psi_xi")?,
            &public.u,
            opts,
        )
        .map(plain),
        ProtocolTag::Hkks => {
            let phi = public
                .u
                .first()
                .ok_or_else(|| Error::MalformedTranscript("missing automorphism".into()))?;
            let g = public.space.unflatten(public.vector("g")?)?;
            hkks_attack(
                &public.space,
                &g,
                phi,
                public.vector("a_m")?,
                public.vector("a_n")?,
            )
            .map(plain)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_exponents_return_base() {
        let alg = Algebra::trivial(PrimeField::new(5).unwrap());
        let space = FlatSpace::new(&alg, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = space.random_vector(&mut rng);
        let x = AlgMatrix::random(&alg, 2, &mut rng);
        let rec = basic_attack(&[Action::left_mul(x)], &v, &v, &v).unwrap();
        assert_eq!(rec.key, v);
    }

    #[test]
    fn left_right_example_f5() {
        let alg = Algebra::trivial(PrimeField::new(5).unwrap());
        let space = FlatSpace::new(&alg, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = AlgMatrix::random(&alg, 2, &mut rng);
            let y = AlgMatrix::random(&alg, 2, &mut rng);
            let m = AlgMatrix::random(&alg, 2, &mut rng);
            let v = space.flatten(&m).unwrap();
            let x2 = x.mul(&x).unwrap();
            let v_a = space.flatten(&x2.mul(&m).unwrap()).unwrap();
            let v_b = space.flatten(&m.mul(&y).unwrap()).unwrap();
            let rec = basic_attack(&[Action::left_mul(x.clone())], &v, &v_a, &v_b).unwrap();
            // oracle: X^2 M Y computed directly
            let oracle = x2.mul(&m).unwrap().mul(&y).unwrap();
            assert_eq!(rec.key, space.flatten(&oracle).unwrap());
        }
    }

    #[test]
    fn outside_span_is_malformed() {
        let alg = Algebra::trivial(PrimeField::new(5).unwrap());
        let space = FlatSpace::new(&alg, 2);
        let v = space.flatten(&AlgMatrix::identity(&alg, 2)).unwrap();
        let other = FVector::unit(alg.field(), 4, 1);
        let scalar = Action::left_mul(AlgMatrix::scalar(&alg, 2, 2));
        assert!(matches!(
            basic_attack(&[scalar], &v, &other, &v),
            Err(Error::MalformedTranscript(_))
        ));
    }

    #[test]
    fn blackburn_trivial_cases() {
        let f = PrimeField::new(7).unwrap();
        let c = FMatrix::from_rows(f, &[vec![1, 2], vec![0, 3]]).unwrap();
        let d = FMatrix::identity(f, 2);
        let g = FVector::from_i64s(f, &[1, 4]);
        let g_p = FVector::from_i64s(f, &[3, 5]);
        // Q = 1: X = I is admissible so the key is gP
        assert_eq!(blackburn_attack(&g, &g_p, &g, &c, &d).unwrap(), g_p);
        let zero = FVector::zeros(f, 2);
        assert_eq!(blackburn_attack(&zero, &zero, &zero, &c, &d).unwrap(), zero);
    }

    #[test]
    fn upper_right_block_layout() {
        let alg = Algebra::trivial(PrimeField::new(11).unwrap());
        let space = FlatSpace::new(&alg, 3);
        let v = FVector::from_i64s(alg.field(), &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(upper_right_block(&space, &v, 1).unwrap().entries(), &[2, 3]);
        assert_eq!(upper_right_block(&space, &v, 2).unwrap().entries(), &[3, 6]);
    }
}
