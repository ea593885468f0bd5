use freefield::emfield::{
    classicality_suite, complex_kg_suite, decay_scan, field_suite, involution_suite, isomorphism_suite, potential_suite, vacuum_projector_check, weyl_suite,
    FieldBasis, Flavor, DEFAULT_SEPARATIONS,
};
use freefield::packets::{random_test_function, RandomSpec, Species, TestFunction};
use freefield::shell::{Kernel, KernelSpecies, Shell};
use freefield::Report;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(r: &Report) {
    for line in r.summary_lines() {
        println!("{line}");
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn em() -> Shell {
    Shell::new(Kernel::em())
}

#[test]
fn em_field_table_and_commutators() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = field_suite(&em(), 10, &mut rng).unwrap();
    show(&r);
    assert!(r.passed());
}

#[test]
fn separation_decay_is_monotone() {
    let scan = decay_scan(&em(), &DEFAULT_SEPARATIONS).unwrap();
    print!("{}", scan.to_csv());
    let r = scan.report();
    show(&r);
    assert!(r.passed());
    assert!(scan.to_csv().starts_with("separation,"));
}

#[test]
fn isomorphism_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = isomorphism_suite(&em(), &mut rng).unwrap();
    show(&r);
    assert!(r.passed());
}

#[test]
fn weyl_relations_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = weyl_suite(&em(), 6, 12, &mut rng).unwrap();
    show(&r);
    assert!(r.passed());
}

#[test]
fn vacuum_projector_does_not_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = RandomSpec::new(Species::Bivector);
    let f = random_test_function(&spec, &mut rng);
    let g = f.scale(freefield::geometry::c(0.0, 2.0));
    let r = vacuum_projector_check(&em(), &f, &g).unwrap();
    show(&r);
    assert!(r.passed());
}

#[test]
fn zero_function_commutes_with_vacuum_projector() {
    let z = TestFunction::zero(Species::Bivector);
    let r = vacuum_projector_check(&em(), &z, &z).unwrap();
    show(&r);
    assert!(r.checks.iter().all(|c| c.max_residual == 0.0));
}

#[test]
fn complex_klein_gordon() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = complex_kg_suite(1.0, 10, &mut rng).unwrap();
    show(&r);
    assert!(r.passed());
}

#[test]
fn potentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let r = potential_suite(6, &mut rng).unwrap();
    show(&r);
    assert!(r.passed());
}

#[test]
fn field_basis_rejects_other_kernels() {
    let s = Shell::new(Kernel::new(KernelSpecies::ScalarKG, 1.0).unwrap());
    let f = TestFunction::zero(Species::Scalar);
    assert!(FieldBasis::standard(&s, &[f]).is_err());
}

#[test]
fn real_function_gives_self_adjoint_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random_test_function(&RandomSpec::new(Species::Bivector).real(), &mut rng);
    let b = FieldBasis::standard(&em(), &[f]).unwrap();
    let x = b.field(Flavor::Quantum, 0).unwrap();
    assert_eq!(x, x.adjoint());
    let y = b.field(Flavor::Random, 0).unwrap();
    assert_eq!(y, y.adjoint());
}

#[test]
fn involution_in_both_dual_conventions() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let r = involution_suite(10, 100, &mut rng).unwrap();
    show(&r);
    assert!(r.passed());
    // dropping the reversal must be visible
    for species in [Species::Bivector, Species::Pair] {
        let f = random_test_function(&RandomSpec::new(species), &mut rng);
        let lhs = f.bullet().unwrap().conjugate().bullet().unwrap();
        let k = [0.3, -0.7, 0.4, 1.1];
        let (a, b) = (lhs.fourier(&k).components(), f.conjugate().fourier(&k).components());
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(d > 1e-6, "{species:?}: {d:e}");
    }
}

#[test]
fn random_fields_commute_where_quantum_fields_do_not() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for shell in [em(), Shell::new(Kernel::new(KernelSpecies::ComplexKG, 1.0).unwrap())] {
        let r = classicality_suite(&shell, 10, &mut rng).unwrap();
        show(&r);
        assert!(r.passed());
        let spec = RandomSpec::new(shell.kernel.species.payload());
        let (f, g) = (random_test_function(&spec, &mut rng), random_test_function(&spec, &mut rng));
        let basis = FieldBasis::standard(&shell, &[f, g]).unwrap();
        let cq = basis.commutator(Flavor::Quantum, 0, 1).unwrap();
        assert!(cq.norm() > 1e-6 * basis.two_point_scale(Flavor::Quantum, 0, 1).unwrap(), "{cq}");
    }
}
