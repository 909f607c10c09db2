use lindecomp::actions::{Action, FlatSpace};
use lindecomp::algebra::{AlgMatrix, Algebra};
use lindecomp::attacks::{
    attack, basic_attack, blackburn_attack, hkks_attack, hurley_recover, mahalanobis2_attack,
    romanczuk_attack, HurleyView,
};
use lindecomp::linalg::{FMatrix, FVector};
use lindecomp::protocols::{Params, ProtocolInstance, ProtocolTag, SamplerStyle};
use lindecomp::PrimeField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

#[test]
fn identity_conjugator_returns_other_public_value() {
    let alg = Algebra::trivial(field(7));
    let space = FlatSpace::new(&alg, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (u, _) = AlgMatrix::random_invertible(&alg, 3, &mut rng, 64).unwrap();
    let g = space.random_vector(&mut rng);
    let g_b = space.random_vector(&mut rng);
    let rec = basic_attack(&[Action::conjugation(u).unwrap()], &g, &g, &g_b).unwrap();
    assert_eq!(rec.key, g_b);
}

#[test]
fn central_conjugators_leave_base_fixed() {
    let params = Params {
        style: SamplerStyle::CenterScalars,
        ..Params::defaults(ProtocolTag::KoLee)
    };
    let tr = ProtocolInstance::with_params(ProtocolTag::KoLee, params, 4)
        .simulate()
        .unwrap();
    let out = attack(&tr.public).unwrap();
    assert_eq!(&out.key, tr.public.vector("base").unwrap());
    assert_eq!(out.key, tr.honest_key);
}

#[test]
fn trivial_two_sided_returns_bob_value() {
    let alg = Algebra::trivial(field(5));
    let space = FlatSpace::new(&alg, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = space.random_vector(&mut rng);
    let bob = space.random_vector(&mut rng);
    let a = AlgMatrix::random(&alg, 3, &mut rng);
    let gens = [Action::left_mul(a.clone()), Action::right_mul(a)];
    assert_eq!(basic_attack(&gens, &g, &g, &bob).unwrap().key, bob);
}

fn hurley_group(space: &FlatSpace, seed: u64) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, m_inv) = AlgMatrix::random_invertible(space.algebra(), space.n(), &mut rng, 64).unwrap();
    vec![Action::right_mul(m), Action::right_mul(m_inv)]
}

#[test]
fn hurley_with_identity_secrets() {
    let f = field(7);
    let alg = Algebra::trivial(f);
    let space = FlatSpace::new(&alg, 4);
    let gens = hurley_group(&space, 3);
    let x = space.embed_row(&FVector::from_i64s(f, &[1, 2, 3, 4])).unwrap();
    let y = space.embed_row(&FVector::from_i64s(f, &[5, 0, 6, 1])).unwrap();
    let diff = x.sub(&y).unwrap();
    let view = HurleyView {
        y_b: &y,
        x_a: &x,
        y_b_a1: &y,
        x_a_b1: &x,
        y_a1_b2: &y,
        x_b1_minus_y_b2: &diff,
    };
    assert_eq!(hurley_recover(&view, &gens).unwrap().0, x);
}

#[test]
fn hurley_zero_message() {
    let f = field(7);
    let alg = Algebra::trivial(f);
    let space = FlatSpace::new(&alg, 4);
    let gens = hurley_group(&space, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = space.embed_row(&lindecomp::actions::random_vector(f, 4, &mut rng)).unwrap();
    let zero = FVector::zeros(f, space.dim());
    // B = A = A1 = B1 = B2 = 1, x = 0
    let minus_y = zero.sub(&y).unwrap();
    let view = HurleyView {
        y_b: &y,
        x_a: &zero,
        y_b_a1: &y,
        x_a_b1: &zero,
        y_a1_b2: &y,
        x_b1_minus_y_b2: &minus_y,
    };
    assert!(hurley_recover(&view, &gens).unwrap().0.is_zero());
}

fn romanczuk_setup(seed: u64) -> (FlatSpace, AlgMatrix, AlgMatrix, FVector) {
    let alg = Algebra::trivial(field(11));
    let space = FlatSpace::new(&alg, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, _) = AlgMatrix::random_invertible(&alg, 4, &mut rng, 64).unwrap();
    let d = c.mul(&c).unwrap().add(&AlgMatrix::scalar(&alg, 4, 3)).unwrap();
    let g = lindecomp::actions::random_vector(alg.field(), 4, &mut rng);
    (space, c, d, g)
}

fn row_times(space: &FlatSpace, g: &FVector, m: &AlgMatrix) -> FVector {
    let v = space.embed_row(g).unwrap();
    space.extract_row(&Action::right_mul(m.clone()).apply(&v).unwrap()).unwrap()
}

#[test]
fn romanczuk_constant_polynomials() {
    let (space, c, d, g) = romanczuk_setup(7);
    let q = c.mul(&d).unwrap().add(&c).unwrap();
    let g_q = row_times(&space, &g, &q);
    // P = 1
    let (key, _) = romanczuk_attack(&space, &g, &g, &g_q, &c, &d).unwrap();
    assert_eq!(key, g_q);
    // Q = 0
    let zero = FVector::zeros(g.field(), 4);
    let g_p = row_times(&space, &g, &d);
    let (key, _) = romanczuk_attack(&space, &g, &g_p, &zero, &c, &d).unwrap();
    assert!(key.is_zero());
}

#[test]
fn blackburn_matches_direct_product() {
    let (space, c, d, g) = romanczuk_setup(8);
    let p_mat = c.mul(&c).unwrap().add(&d).unwrap();
    let q_mat = d.mul(&d).unwrap().add(&AlgMatrix::scalar(c.algebra(), 4, 5)).unwrap();
    let g_p = row_times(&space, &g, &p_mat);
    let g_q = row_times(&space, &g, &q_mat);
    let oracle = row_times(&space, &g_q, &p_mat);
    let (c_f, d_f): (FMatrix, FMatrix) = (c.to_fmatrix().unwrap(), d.to_fmatrix().unwrap());
    assert_eq!(blackburn_attack(&g, &g_p, &g_q, &c_f, &d_f).unwrap(), oracle);
    assert_eq!(romanczuk_attack(&space, &g, &g_p, &g_q, &c, &d).unwrap().0, oracle);
}

#[test]
fn mahalanobis2_identity_automorphisms() {
    let alg = Algebra::trivial(field(7));
    let space = FlatSpace::new(&alg, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (u, _) = AlgMatrix::random_invertible(&alg, 3, &mut rng, 64).unwrap();
    let conj = Action::conjugation(u).unwrap();
    let gens = vec![conj.clone(), conj.inverse().unwrap()];
    let g = space.random_vector(&mut rng);
    // phi = psi = xi = 1: every observed value is g, session key g
    assert_eq!(mahalanobis2_attack(&g, &g, &g, &gens).unwrap().key, g);
    // phi = psi = 1, xi = conj: key conj(g)
    let g_xi = conj.apply(&g).unwrap();
    assert_eq!(mahalanobis2_attack(&g, &g, &g_xi, &gens).unwrap().key, g_xi);
}

#[test]
fn hkks_identity_automorphism_gives_powers() {
    let alg = Algebra::trivial(field(7));
    let space = FlatSpace::new(&alg, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (g, _) = AlgMatrix::random_invertible(&alg, 2, &mut rng, 64).unwrap();
    let id = Action::explicit(FMatrix::identity(alg.field(), 4)).unwrap();
    let (m, n) = (5, 9);
    let flat = |x: &AlgMatrix| space.flatten(x).unwrap();
    let rec = hkks_attack(&space, &g, &id, &flat(&g.pow(m)), &flat(&g.pow(n))).unwrap();
    assert_eq!(rec.key, flat(&g.pow(m + n)));
}

#[test]
fn hkks_unit_exponents() {
    let alg = Algebra::trivial(field(7));
    let space = FlatSpace::new(&alg, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (g, _) = AlgMatrix::random_invertible(&alg, 2, &mut rng, 64).unwrap();
    let (h, _) = AlgMatrix::random_invertible(&alg, 2, &mut rng, 64).unwrap();
    let phi = Action::conjugation(h).unwrap();
    let a1 = space.flatten(&g).unwrap();
    let phi_g = space.unflatten(&phi.apply(&a1).unwrap()).unwrap();
    let a2 = space.flatten(&phi_g.mul(&g).unwrap()).unwrap();
    assert_eq!(hkks_attack(&space, &g, &phi, &a1, &a1).unwrap().key, a2);
}
