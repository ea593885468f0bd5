use freefield::koopman::*;
use freefield::scalar::ExactComplex;
use freefield::oscillator::NormalPoly;
use freefield::{Error, Report};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn assert_passed(r: Report) {
    for l in r.summary_lines() {
        println!("{l}");
    }
    assert!(r.passed(), "{:?}", r.worst_failure());
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

#[test]
fn canonical_brackets() {
    for n in 1..=3 {
        for i in 0..n {
            for j in 0..n {
                let b = poisson_bracket(&PhasePolynomial::q(n, i), &PhasePolynomial::p(n, j));
                let want = if i == j { PhasePolynomial::one(n) } else { PhasePolynomial::zero(n) };
                assert_eq!(b, want);
                assert!(poisson_bracket(&PhasePolynomial::q(n, i), &PhasePolynomial::q(n, j)).is_zero());
            }
        }
    }
    let h = PhasePolynomial::harmonic(1);
    assert_eq!(poisson_bracket(&h, &PhasePolynomial::q(1, 0)), PhasePolynomial::p(1, 0).scale(&int(-1)));
    assert_eq!(poisson_bracket(&h, &PhasePolynomial::p(1, 0)), PhasePolynomial::q(1, 0));
}

#[test]
fn bracket_axioms_on_random_cubics() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for n in 1..=2 {
        for _ in 0..10 {
            let t: Vec<_> = (0..3).map(|_| PhasePolynomial::random(n, 3, 4, &mut rng)).collect();
            assert_passed(bracket_check(&t[0], &t[1], &t[2]));
        }
    }
}

#[test]
fn elementary_lift_relations() {
    let kvn = KvN::new(1);
    let (q, p) = (PhasePolynomial::q(1, 0), PhasePolynomial::p(1, 0));
    let one = NormalPoly::identity(kvn.space());
    assert_eq!(kvn.lift_z(&q).unwrap().commutator(&kvn.lift_y(&p).unwrap()).unwrap(), one);
    assert_eq!(kvn.lift_z(&p).unwrap().commutator(&kvn.lift_y(&q).unwrap()).unwrap(), one.neg());
    // q = (a + a†)/√2 squared gives ½(a² + 2a†a + a†² + 1)
    let q2 = kvn.lift_y(&q.mul(&q)).unwrap();
    let half = ExactComplex::from_ratio(1, 2);
    assert_eq!(q2.vev(), half);
    assert_eq!(kvn.lift_y(&PhasePolynomial::one(1)).unwrap(), one);
    assert!(kvn.lift_z(&PhasePolynomial::one(1)).unwrap().is_zero());
    let mismatched = PhasePolynomial::q(2, 0);
    assert!(matches!(kvn.lift_y(&mismatched), Err(Error::Input(_))));
}

#[test]
fn lift_identities_up_to_degree_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    assert_passed(lift_suite(1, 6, 4, &mut rng).unwrap());
    assert_passed(lift_suite(2, 3, 4, &mut rng).unwrap());
}

#[test]
fn harmonic_generators_and_the_c_d_basis() {
    for n in 1..=3 {
        let g = harmonic_generators(n).unwrap();
        assert_passed(g.report);
        assert_eq!(g.z_h.len(), 2 * n);
    }
    let ev = h_c_spectrum(1, 6).unwrap();
    assert!(ev[0] < 0.0 && *ev.last().unwrap() > 0.0);
    for x in [-1.0, 0.0, 1.0] {
        assert!(ev.iter().any(|e| (e - x).abs() < 1e-10), "{x} missing");
    }
    // block of total occupation m carries −m, −m+2, …, m
    assert_eq!(ev.len(), 28);
    assert!((ev[0] + 6.0).abs() < 1e-10);
}

#[test]
fn vacuum_state_and_gns_gram() {
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    assert_passed(gns_state_suite(1, 40, &mut rng).unwrap());
    assert_passed(gns_state_suite(2, 20, &mut rng).unwrap());
}

#[test]
fn flow_of_the_harmonic_generator() {
    let r = flow_check(FLOW_CUTOFF, &[0.0, PI / 4.0, PI / 2.0, PI]).unwrap();
    assert_passed(r);
    assert!(matches!(flow_check(8, &[0.1]), Err(Error::Cutoff { .. })));
    assert!(matches!(flow_check(FLOW_CUTOFF, &[4.0]), Err(Error::Input(_))));
}

#[test]
fn full_koopman_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(94);
    assert_passed(koopman_suite(3, &mut rng).unwrap());
}
