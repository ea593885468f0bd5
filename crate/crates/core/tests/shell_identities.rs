use std::f64::consts::PI;

use freefield::geometry::c;
use freefield::packets::{isotropic_sigma, random_test_function, GaussianPacket, Payload, RandomSpec, TestFunction};
use freefield::shell::{identity_suite, identity_suite_with, Frequency, Kernel, KernelSpecies, Shell, SuiteOptions};
use freefield::spectral::Spectral;
use freefield::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shell_for(ks: KernelSpecies) -> Shell {
    let mass = match ks {
        KernelSpecies::EmBivector | KernelSpecies::EmOneForm => 0.0,
        _ => 1.0,
    };
    Shell::new(Kernel::new(ks, mass).unwrap())
}

fn run_suite(ks: KernelSpecies, trials: usize, seed: u64) {
    let report = identity_suite(&shell_for(ks), trials, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    for line in report.summary_lines() {
        println!("{line}");
    }
    assert!(report.passed(), "{:?}", report.worst_failure());
}

#[test]
fn em_bivector_identities() {
    run_suite(KernelSpecies::EmBivector, 8, 11);
}

#[test]
fn dirac_identities() {
    run_suite(KernelSpecies::Dirac, 8, 12);
}

#[test]
fn scalar_and_pair_identities() {
    run_suite(KernelSpecies::ScalarKG, 6, 13);
    run_suite(KernelSpecies::ComplexKG, 6, 14);
}

#[test]
fn one_form_identities() {
    run_suite(KernelSpecies::EmOneForm, 6, 15);
}

#[test]
fn swapped_shell_label_is_caught() {
    let shell = shell_for(KernelSpecies::EmBivector);
    let opts = SuiteOptions { adversarial: true };
    let report = identity_suite_with(&shell, 2, &mut ChaCha8Rng::seed_from_u64(3), opts).unwrap();
    assert!(!report.get("conjugation-swaps-shell").unwrap().pass);
    assert!(matches!(report.into_result(), Err(Error::IdentityFailure { name, .. }) if name == "conjugation-swaps-shell"));
}

#[test]
fn random_sets_give_psd_grams() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for ks in [KernelSpecies::ScalarKG, KernelSpecies::ComplexKG, KernelSpecies::EmBivector, KernelSpecies::Dirac] {
        let shell = shell_for(ks);
        let spec = RandomSpec::new(ks.payload());
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let fs: Vec<TestFunction> = (0..4).map(|_| random_test_function(&spec, &mut rng)).collect();
            for q in [Frequency::Plus, Frequency::Minus] {
                let g = shell.gram_of(&fs, q).unwrap();
                assert!(g.min_eigenvalue() >= -1e-10 * g.spectral_norm());
                worst = worst.max(g.hermiticity_residual());
            }
        }
        assert!(worst < 1e-12, "{ks:?} hermiticity {worst:e}");
    }
}

#[test]
fn five_em_functions_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = RandomSpec::new(freefield::packets::Species::Bivector);
    let fs: Vec<TestFunction> = (0..5).map(|_| random_test_function(&spec, &mut rng)).collect();
    let g = Shell::new(Kernel::em()).gram_of(&fs, Frequency::Plus).unwrap();
    let eig = g.eigenvalues();
    assert!(eig.iter().all(|&e| e >= -1e-10 * g.spectral_norm()), "{eig:?}");
    // nontrivial: the set is not degenerate
    assert!(eig.iter().cloned().fold(f64::INFINITY, f64::min) > 0.0);
}

/// Independent evaluation of `(f, f)±` for an isotropic scalar packet.
///
/// With Σ = I and `c = 1` one has `|f̃(k)|² = π⁴ exp(−|k + p|²/2)` (Euclidean
/// norm). The polar angle integral is done in closed form, leaving a radial
/// integral handled by composite Simpson on a fine grid.
fn scalar_packet_oracle(p: [f64; 4], m: f64, sign: f64) -> f64 {
    let pv = (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
    let integrand = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let w = (r * r + m * m).sqrt();
        let t0 = sign * w + p[0];
        // ∫_{-1}^{1} exp(−r |p⃗| u) du
        let ang = if pv * r < 1e-8 { 2.0 } else { 2.0 * (pv * r).sinh() / (pv * r) };
        let e = -0.5 * (t0 * t0 + r * r + pv * pv);
        2.0 * PI * r * r / (2.0 * w) * ang * e.exp()
    };
    let (a, b, n) = (0.0, 24.0, 40_000usize);
    let h = (b - a) / n as f64;
    let mut s = integrand(a) + integrand(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(x);
    }
    let radial = s * h / 3.0;
    PI.powi(4) * radial / (2.0 * PI).powi(3)
}

#[test]
fn scalar_packet_matches_independent_quadrature() {
    for p in [[3.0, 0.0, 0.0, 0.0], [3.0, 0.4, -0.2, 0.3]] {
        let packet =
            GaussianPacket::new(c(1.0, 0.0), [0.0; 4], p, isotropic_sigma(1.0), Payload::Scalar(c(1.0, 0.0))).unwrap();
        let f = TestFunction::single(packet);
        let shell = Shell::new(Kernel::new(KernelSpecies::ScalarKG, 1.0).unwrap());
        let split = shell.split_gram(&[Spectral::from(&f)]).unwrap();
        for (q, sign) in [(Frequency::Plus, 1.0), (Frequency::Minus, -1.0)] {
            let got = split.entry(0, 0, q);
            let want = scalar_packet_oracle(p, 1.0, sign);
            let rel = (got.re - want).abs() / want;
            assert!(rel <= 1e-8, "{q:?} p={p:?}: {got} vs {want} ({rel:e})");
            assert!(got.im.abs() <= 1e-14 * want);
        }
    }
}

#[test]
fn wrong_species_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_test_function(&RandomSpec::new(freefield::packets::Species::Spinor), &mut rng);
    let err = Shell::new(Kernel::em()).gram_of(&[f], Frequency::Plus).unwrap_err();
    assert!(matches!(err, Error::Species { .. }));
}
