use std::sync::Arc;

use freefield::geometry::{c, C64};
use freefield::oscillator::{
    coherent_overlap, determinant, gaussian_exp_weyl, oracle_suite, permanent, random_poly, wick_contract, FockOracle, ModeSpace,
    NormalPoly, Statistics,
};
use freefield::scalar::ExactComplex;
use freefield::Report;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gram<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    &a * a.adjoint() / c(n as f64, 0.0) + DMatrix::identity(n, n) * c(0.1, 0.0)
}

fn rel_cols(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let scale = a.iter().chain(b.iter()).map(|z| z.norm()).fold(1.0, f64::max);
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

/// `x (y e_s)` for the given basis states, via repeated `apply`.
fn composed(o: &FockOracle, x: &NormalPoly<C64>, y: &NormalPoly<C64>, states: &[usize]) -> DMatrix<C64> {
    let d = o.dim();
    let mut out = DMatrix::zeros(d, states.len());
    for (col, &s) in states.iter().enumerate() {
        let mut e = DVector::zeros(d);
        e[s] = c(1.0, 0.0);
        let v = o.apply(x, &o.apply(y, &e).unwrap()).unwrap();
        out.set_column(col, &v);
    }
    out
}

fn assert_passed(r: Report) {
    for line in r.summary_lines() {
        println!("{line}");
    }
    assert!(r.passed(), "{:?}", r.worst_failure());
}

#[test]
fn bose_engine_matches_fock_oracle() {
    assert_passed(oracle_suite(Statistics::Bose, 100, &mut ChaCha8Rng::seed_from_u64(1)).unwrap());
}

#[test]
fn fermi_engine_matches_fock_oracle() {
    assert_passed(oracle_suite(Statistics::Fermi, 100, &mut ChaCha8Rng::seed_from_u64(2)).unwrap());
}

#[test]
fn degree_three_products_on_cutoff_eight() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let space = ModeSpace::from_matrix(Statistics::Bose, &random_gram(3, &mut rng)).unwrap();
    let oracle = FockOracle::new(&space, 8).unwrap();
    for _ in 0..10 {
        let x = random_poly(&space, 3, 4, &mut rng);
        let y = random_poly(&space, 3, 4, &mut rng);
        let states = oracle.interior(x.max_raise() + y.max_raise());
        let lhs = oracle.columns(&x.mul(&y).unwrap(), &states).unwrap();
        assert!(rel_cols(&lhs, &composed(&oracle, &x, &y, &states)) <= 1e-12);
    }
}

#[test]
fn adjoint_image_is_conjugate_transpose() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for stats in [Statistics::Bose, Statistics::Fermi] {
        let space = ModeSpace::from_matrix(stats, &random_gram(2, &mut rng)).unwrap();
        let oracle = FockOracle::new(&space, 9).unwrap();
        let x = random_poly(&space, 3, 5, &mut rng);
        let m = oracle.matrix_image(&x).unwrap();
        let md = oracle.matrix_image(&x.adjoint()).unwrap();
        // compare only where neither side feels the truncation
        let keep = oracle.interior(x.degree());
        for &i in &keep {
            for &j in &keep {
                assert!((md[(i, j)] - m[(j, i)].conj()).norm() < 1e-12);
            }
        }
        assert!((x.adjoint().vev() - x.vev().conj()).norm() == 0.0);
    }
}

#[test]
fn vacuum_state_is_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for stats in [Statistics::Bose, Statistics::Fermi] {
        for _ in 0..30 {
            let space = ModeSpace::from_matrix(stats, &random_gram(3, &mut rng)).unwrap();
            let x = random_poly(&space, 3, 6, &mut rng);
            let v = x.adjoint().mul(&x).unwrap().vev();
            let scale = x.max_abs().powi(2) * 10.0;
            assert!(v.re >= -1e-11 * scale && v.im.abs() <= 1e-11 * scale, "{v}");
        }
    }
}

fn string_vev(space: &Arc<ModeSpace<C64>>, n: usize) -> C64 {
    // a_{n−1} … a_0 a†_{n} … a†_{2n−1}
    let mut factors = Vec::new();
    for i in (0..n).rev() {
        factors.push(NormalPoly::annihilate(space, i));
    }
    for j in n..2 * n {
        factors.push(NormalPoly::create(space, j));
    }
    let refs: Vec<&NormalPoly<C64>> = factors.iter().collect();
    NormalPoly::product(space, &refs).unwrap().vev()
}

#[test]
fn wick_strings_are_permanents_and_determinants() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 3;
    for stats in [Statistics::Bose, Statistics::Fermi] {
        let g = random_gram(2 * n, &mut rng);
        let space = ModeSpace::from_matrix(stats, &g).unwrap();
        let m: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| g[(i, n + j)]).collect()).collect();
        let closed = match stats {
            Statistics::Bose => permanent(&m).unwrap(),
            Statistics::Fermi => determinant(&m).unwrap(),
        };
        let engine = string_vev(&space, n);
        let oracle = FockOracle::new(&space, 7).unwrap();
        let mut factors = Vec::new();
        for i in (0..n).rev() {
            factors.push(NormalPoly::annihilate(&space, i));
        }
        for j in n..2 * n {
            factors.push(NormalPoly::create(&space, j));
        }
        let mut v = oracle.vacuum();
        for f in factors.iter().rev() {
            v = oracle.apply(f, &v).unwrap();
        }
        let scale = closed.norm().max(1.0);
        assert!((engine - closed).norm() <= 1e-12 * scale, "{stats:?}");
        assert!((v[0] - closed).norm() <= 1e-12 * scale, "{stats:?} oracle");
        assert!((wick_contract(stats, &m).unwrap() - closed).norm() <= 1e-12 * scale);
    }
}

#[test]
fn exact_closed_forms_match_recursive_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=5 {
        let m: Vec<Vec<ExactComplex>> = (0..n)
            .map(|_| (0..n).map(|_| ExactComplex::gaussian(rng.random_range(-3..=3), rng.random_range(-3..=3))).collect())
            .collect();
        assert_eq!(permanent(&m).unwrap(), wick_contract(Statistics::Bose, &m).unwrap());
        assert_eq!(determinant(&m).unwrap(), wick_contract(Statistics::Fermi, &m).unwrap());
    }
}

#[test]
fn exact_engine_strings() {
    // Hermitian Gaussian-integer Gram on 2n modes; the algebra does not need PSD.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 3;
    let dim = 2 * n;
    for stats in [Statistics::Bose, Statistics::Fermi] {
        let mut g = vec![ExactComplex::gaussian(0, 0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let z = if i == j {
                    ExactComplex::gaussian(rng.random_range(1..4), 0)
                } else {
                    ExactComplex::gaussian(rng.random_range(-2..=2), rng.random_range(-2..=2))
                };
                g[i * dim + j] = z.clone();
                g[j * dim + i] = freefield::scalar::Coeff::conj(&z);
            }
        }
        let space = ModeSpace::new(stats, dim, g.clone()).unwrap();
        let mut factors = Vec::new();
        for i in (0..n).rev() {
            factors.push(NormalPoly::annihilate(&space, i));
        }
        for j in n..dim {
            factors.push(NormalPoly::create(&space, j));
        }
        let refs: Vec<&NormalPoly<ExactComplex>> = factors.iter().collect();
        let v = NormalPoly::product(&space, &refs).unwrap().vev();
        let m: Vec<Vec<ExactComplex>> = (0..n).map(|i| (0..n).map(|j| g[i * dim + n + j].clone()).collect()).collect();
        let want = match stats {
            Statistics::Bose => permanent(&m).unwrap(),
            Statistics::Fermi => determinant(&m).unwrap(),
        };
        assert_eq!(v, want);
    }
}

fn series_exp_on(o: &FockOracle, x: &NormalPoly<C64>, v: &DVector<C64>, terms: usize) -> DVector<C64> {
    let mut acc = v.clone();
    let mut term = v.clone();
    for k in 1..=terms {
        term = o.apply(x, &term).unwrap() / c(k as f64, 0.0);
        acc += &term;
    }
    acc
}

#[test]
fn weyl_closed_forms_match_series() {
    assert_eq!(
        gaussian_exp_weyl(&ModeSpace::identity(Statistics::Bose, 1), &[c(1.0, 0.0)], &[c(1.0, 0.0)], 0.0).unwrap(),
        c(1.0, 0.0)
    );
    let one = ModeSpace::identity(Statistics::Bose, 1);
    let v = gaussian_exp_weyl(&one, &[c(1.0, 0.0)], &[c(1.0, 0.0)], 1.0).unwrap();
    assert!((v - c((-0.5f64).exp(), 0.0)).norm() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = ModeSpace::from_matrix(Statistics::Bose, &random_gram(2, &mut rng)).unwrap();
    let oracle = FockOracle::new(&space, 40).unwrap();
    for _ in 0..5 {
        let vv: Vec<C64> = (0..2).map(|_| c(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6))).collect();
        let ww: Vec<C64> = (0..2).map(|_| c(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6))).collect();
        let lambda = rng.random_range(0.3..1.0);
        let gen = NormalPoly::annihilator(&space, &vv)
            .add(&NormalPoly::creator(&space, &ww))
            .unwrap()
            .scale(&c(0.0, lambda));
        let state = series_exp_on(&oracle, &gen, &oracle.vacuum(), 24);
        let closed = gaussian_exp_weyl(&space, &vv, &ww, lambda).unwrap();
        assert!((state[0] - closed).norm() <= 1e-10, "{} vs {closed}", state[0]);

        let left = NormalPoly::annihilator(&space, &vv);
        let right = NormalPoly::creator(&space, &ww);
        let ket = series_exp_on(&oracle, &right, &oracle.vacuum(), 24);
        let bra = series_exp_on(&oracle, &left.adjoint(), &oracle.vacuum(), 24);
        let overlap = bra.dotc(&ket);
        assert!((overlap - coherent_overlap(&space, &vv, &ww).unwrap()).norm() <= 1e-10);
    }
    let f = ModeSpace::from_matrix(Statistics::Fermi, &random_gram(1, &mut rng)).unwrap();
    assert!(gaussian_exp_weyl(&f, &[c(1.0, 0.0)], &[c(1.0, 0.0)], 1.0).is_err());
}

#[test]
fn normal_exponential_calculus_matches_series() {
    use freefield::oscillator::NormalExp;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let space = ModeSpace::from_matrix(Statistics::Bose, &random_gram(2, &mut rng)).unwrap();
    let oracle = FockOracle::new(&space, 40).unwrap();
    let small = |rng: &mut ChaCha8Rng| -> Vec<C64> { (0..2).map(|_| c(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4))).collect() };
    for _ in 0..4 {
        let (v1, w1, v2, w2, p, q) = (small(&mut rng), small(&mut rng), small(&mut rng), small(&mut rng), small(&mut rng), small(&mut rng));
        let x1 = NormalPoly::annihilator(&space, &v1).add(&NormalPoly::creator(&space, &w1)).unwrap();
        let x2 = NormalPoly::annihilator(&space, &v2).add(&NormalPoly::creator(&space, &w2)).unwrap();
        let e1 = NormalExp::of_linear(&x1, 1.0).unwrap();
        let e2 = NormalExp::of_linear(&x2, 1.0).unwrap();
        let closed = e1.mul(&e2).unwrap().matrix_element(&p, &q);
        let ket = series_exp_on(&oracle, &NormalPoly::creator(&space, &q), &oracle.vacuum(), 30);
        let ket = series_exp_on(&oracle, &x2.scale(&c(0.0, 1.0)), &ket, 30);
        let ket = series_exp_on(&oracle, &x1.scale(&c(0.0, 1.0)), &ket, 30);
        let bra = series_exp_on(&oracle, &NormalPoly::creator(&space, &p), &oracle.vacuum(), 30);
        let dense = bra.dotc(&ket);
        assert!((dense - closed).norm() <= 1e-10 * closed.norm().max(1.0), "{dense} vs {closed}");
    }
}
