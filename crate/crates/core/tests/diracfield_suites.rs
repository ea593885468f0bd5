use freefield::diracfield::*;
use freefield::geometry::{c, DiracMatrices, C64};
use freefield::packets::{random_test_function, RandomSpec, Species};
use freefield::shell::{Kernel, Shell};
use freefield::{Error, Report};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shell() -> Shell {
    Shell::new(Kernel::dirac(1.0).unwrap())
}

fn show(r: &Report) {
    for l in r.summary_lines() {
        println!("{l}");
    }
}

fn assert_passed(r: Report) {
    show(&r);
    assert!(r.passed(), "{:?}", r.worst_failure());
}

fn basis(n: usize, seed: u64) -> SpinorBasis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomSpec::new(Species::Spinor);
    let fs: Vec<_> = (0..n).map(|_| random_test_function(&spec, &mut rng)).collect();
    SpinorBasis::new(&shell(), &fs).unwrap()
}

fn scaled(u: &[C64], s: C64) -> Vec<C64> {
    u.iter().map(|x| x * s).collect()
}

#[test]
fn fermionic_algebra_on_twenty_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    assert_passed(algebra_suite(&shell(), 20, &mut rng).unwrap());
}

#[test]
fn appendix_e_on_twenty_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    assert_passed(appendix_e_suite(&shell(), 20, &mut rng).unwrap());
}

#[test]
fn appendix_e_needs_shellwise_orthogonality() {
    // V and W orthogonal only in the full product: the factorised value is off
    let b = basis(4, 3);
    let (w, v) = (b.unit(0), b.unit(1));
    let (a, bb) = (vec![c(0.3, 0.1), c(-0.2, 0.5), c(1.0, 0.0), c(0.0, -0.7)], vec![c(0.1, 0.0), c(0.4, 0.4), c(-0.6, 0.2), c(0.9, 0.1)]);
    let e = appendix_e(&b, &w, &v, &a, &bb).unwrap();
    show(&e.report);
    assert!(e.report.notes.iter().any(|n| n.contains("orthogonalised")));
    assert!(b.full(&v, &e.w).norm() < 1e-12);
    assert!(!e.report.get("shell-orthogonality").unwrap().pass);
    assert!(e.report.get("direct-vs-pfaffian").unwrap().pass);
}

#[test]
fn appendix_e_limiting_cases() {
    let b = basis(4, 4);
    let f = joint_frame(&b).unwrap();
    let (v, w) = (f[0].clone(), f[1].clone());
    // parallel: A = B = V
    let e = appendix_e(&b, &w, &v, &v, &v).unwrap();
    show(&e.report);
    let frame = fermionic_vev(&b, &bilinear_string(&[(&w, &v), (&v, &w)])).unwrap();
    assert!((e.direct - b.full(&v, &v) * frame).norm() <= 1e-10 * e.direct.norm());
    assert!(e.report.passed());
    // orthogonal to span{V, W}
    let a: Vec<C64> = f[2].iter().zip(&f[3]).map(|(x, y)| x + y * 0.5).collect();
    let bb = scaled(&f[2], c(0.2, 0.3));
    let e = appendix_e(&b, &w, &v, &a, &bb).unwrap();
    assert!(b.plus(&a, &bb).norm() > 1e-3);
    assert!((e.direct - b.plus(&a, &bb) * frame).norm() <= 1e-10 * e.direct.norm());
    assert!(e.report.passed());
    let zero = vec![c(0.0, 0.0); 4];
    assert!(matches!(appendix_e(&b, &w, &zero, &a, &bb), Err(Error::Degenerate(_))));
}

#[test]
fn joint_frame_diagonalises_both_shells() {
    let b = basis(4, 5);
    let f = joint_frame(&b).unwrap();
    for i in 0..4 {
        assert!((b.full(&f[i], &f[i]) - c(1.0, 0.0)).norm() < 1e-10);
        for j in 0..4 {
            if i != j {
                assert!(b.plus(&f[i], &f[j]).norm() < 1e-10);
                assert!(b.minus(&f[i], &f[j]).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn closure_degenerate_and_trivial_cases() {
    let b = basis(2, 6);
    let u = vec![c(0.7, 0.2), c(-0.3, 0.4)];
    // V = U: both sides vanish
    let r = closure_check(&b, &u, &u).unwrap();
    show(&r);
    assert!(r.passed());
    // orthogonal pair: Y is not formed, the commutator still vanishes
    let f = joint_frame(&b).unwrap();
    let r = closure_check(&b, &f[0], &f[1]).unwrap();
    show(&r);
    assert!(r.passed());
    assert!(r.notes.iter().any(|n| n.contains("Y not formed")));
    assert!(matches!(b.closure_y(&f[0], &f[1]), Err(Error::Degenerate(_))));
    let zero = vec![c(0.0, 0.0); 2];
    assert!(matches!(b.phi(&zero), Err(Error::Degenerate(_))));
}

#[test]
fn polarization_and_power_limits() {
    let b = basis(2, 7);
    let u = vec![c(0.5, -0.1), c(0.2, 0.9)];
    let v = vec![c(-0.4, 0.3), c(0.6, 0.0)];
    assert_passed(polarization_check(&b, &u, &u).unwrap());
    assert_passed(polarization_check(&b, &u, &scaled(&v, c(0.0, 2.5))).unwrap());
    let x = b.bilinear(&u, &v).unwrap();
    let y = b.bilinear(&u, &scaled(&v, c(0.0, 2.5))).unwrap();
    assert!(x.scale(&c(0.0, 2.5)).max_abs_diff(&y).unwrap() <= 1e-12 * y.max_abs());
    let ys = b.bilinear(&scaled(&u, c(0.0, 2.5)), &v).unwrap();
    assert!(x.scale(&c(0.0, -2.5)).max_abs_diff(&ys).unwrap() <= 1e-12 * ys.max_abs());
    assert!(x.pow(1).unwrap().max_abs_diff(&x).unwrap() <= 1e-15 * x.max_abs());
    let f = joint_frame(&b).unwrap();
    let sq = b.bilinear(&f[0], &f[1]).unwrap().pow(2).unwrap();
    assert!(sq.max_abs() <= 1e-12 * b.magnitude(&f[0], &f[0]).max(b.magnitude(&f[1], &f[1])));
    let bl = SpinorBilinear::new(u.clone(), v.clone());
    let (lhs, rhs) = (bl.adjoint().operator(&b).unwrap(), bl.operator(&b).unwrap().adjoint());
    assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-15 * lhs.max_abs());
}

#[test]
fn anticommutators_and_charge_conjugate_gram() {
    let b = basis(3, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = vec![c(0.5, -0.1), c(0.2, 0.9), c(0.0, 0.3)];
    let v = vec![c(-0.4, 0.3), c(0.6, 0.0), c(1.0, 1.0)];
    assert_passed(anticommutator_check(&b, &u, &v).unwrap());
    assert_passed(charge_conjugation_check(&b).unwrap());
    assert_passed(vev_check(&b, &mut rng).unwrap());
}

#[test]
fn non_vacuum_states_are_positive() {
    let b = basis(2, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vs = vec![vec![c(1.0, 0.2), c(0.3, -0.5)], vec![c(0.1, 0.0), c(-0.8, 0.4)]];
    assert_passed(positivity_check(&b, &vs, 20, &mut rng).unwrap());
}

#[test]
fn dirac_and_chiral_conventions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    assert_passed(representation_check(1.0, 3, &mut rng).unwrap());
}

#[test]
fn anticommutator_decays_with_separation() {
    let scan = spinor_decay_scan(&shell(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0]).unwrap();
    print!("{}", scan.to_csv());
    assert_passed(scan.report());
}

#[test]
fn bilocal_nestings_agree() {
    let g = DiracMatrices::dirac();
    let p = rest_frame_window(0.6).unwrap();
    let q = charge_window(0.6).unwrap();
    let first = bilocal_vev_at(&g, 1.0, &p, &q, Combo::Plus, BILOCAL_ORDERS, true).unwrap();
    let (a, bb, cc) = BILOCAL_ORDERS;
    let second = bilocal_vev_at(&g, 1.0, &p, &q, Combo::Plus, (a + 4, bb + 2, cc + 4), false).unwrap();
    println!("bilocal <O>: {first} vs {second}");
    assert!((first - second).norm() <= 1e-6 * first.norm());
    assert!(first.norm() > 0.0);
    assert_eq!(bilocal_vev(&g, 1.0, &BilocalWindow::zero(0.6).unwrap(), &q, Combo::Plus).unwrap(), c(0.0, 0.0));
    assert!(matches!(bilocal_vev(&g, 0.0, &p, &q, Combo::Plus), Err(Error::Input(_))));
}

#[test]
fn singularity_scan_orders_the_slopes() {
    let g = DiracMatrices::dirac();
    let windows = |w: f64| Ok((rest_frame_window(w)?, rest_frame_window(w)?));
    let scan = measure_singularity(&g, 1.0, &DEFAULT_WIDTHS, windows, SCAN_ORDERS).unwrap();
    print!("{}", scan.to_csv());
    let r = scan.report();
    show(&r);
    assert!(r.get("slope-gap").unwrap().pass);
    assert!(r.get("order-doubling").unwrap().pass);
    assert!(r.get("pm-below-plus").unwrap().pass);
    assert!(matches!(measure_singularity(&g, 0.0, &DEFAULT_WIDTHS, windows, SCAN_ORDERS), Err(Error::Input(_))));
    assert!(matches!(measure_singularity(&g, 1.0, &[0.8, 0.4, 0.2], windows, SCAN_ORDERS), Err(Error::Input(_))));
}
