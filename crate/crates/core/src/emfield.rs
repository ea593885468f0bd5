//! Quantized and classical random free fields built from one mode set.
//!
//! For a test function `f` the quantized field is `F̂_f = a_{f*} + a†_f` and
//! the random field is `𝔽_f = a_{f*•} + a†_{f•}`, where the modes are test
//! functions and the mode Gram is the forward-shell pre-inner product. The
//! same construction serves the electromagnetic bivector kernel and the
//! two-component complex Klein–Gordon kernel, whose bullet uses the pair
//! matrix in place of the Hodge dual.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{self, c, Bivector, FourVector, C64};
use crate::oscillator::{permanent, FockOracle, ModeSpace, NormalExp, NormalPoly, Statistics};
use crate::packets::{isotropic_sigma, random_test_function, GaussianPacket, Payload, RandomSpec, Species, TestFunction};
use crate::report::Report;
use crate::shell::{Kernel, KernelSpecies, QuadratureConfig, Shell, SplitGram};
use crate::spectral::Spectral;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Quantum,
    Random,
}

/// Functions derived from one input that may enter the mode set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Derived {
    Function,
    Conjugate,
    Bullet,
    ConjugateBullet,
    BulletBullet,
    /// `((f•)*)•`
    BulletConjugateBullet,
    /// `(f*)⁻`
    ConjugateReverse,
}

pub const CORE: [Derived; 4] = [Derived::Function, Derived::Conjugate, Derived::Bullet, Derived::ConjugateBullet];

fn conj(s: &Spectral) -> Spectral {
    match s {
        Spectral::Function(f) => Spectral::Function(f.conjugate()),
        s => s.clone().conjugate(),
    }
}

fn reverse(s: &Spectral) -> Spectral {
    match s {
        Spectral::Function(f) => Spectral::Function(f.reverse()),
        s => s.clone().reverse(),
    }
}

fn bullet(s: &Spectral) -> Result<Spectral> {
    match s {
        Spectral::Function(f) => Ok(Spectral::Function(f.bullet()?)),
        s => s.clone().bullet(),
    }
}

impl Derived {
    pub fn apply(self, f: &Spectral) -> Result<Spectral> {
        Ok(match self {
            Derived::Function => f.clone(),
            Derived::Conjugate => conj(f),
            Derived::Bullet => bullet(f)?,
            Derived::ConjugateBullet => bullet(&conj(f))?,
            Derived::BulletBullet => bullet(&bullet(f)?)?,
            Derived::BulletConjugateBullet => bullet(&conj(&bullet(f)?))?,
            Derived::ConjugateReverse => reverse(&conj(f)),
        })
    }
}

/// Mode set for a list of inputs, closed under the requested derivations,
/// with its forward-shell Gram.
///
/// Derived functions that coincide with an existing mode (for instance `f*`
/// of a real `f`) reuse that mode, so adjoint relations such as
/// `F̂_f† = F̂_{f*}` become equalities of canonical forms.
#[derive(Clone, Debug)]
pub struct FieldBasis {
    inputs: Vec<Spectral>,
    modes: Vec<Spectral>,
    slots: Vec<Vec<(Derived, usize)>>,
    split: SplitGram,
    space: Arc<ModeSpace<C64>>,
}

impl FieldBasis {
    pub fn new(shell: &Shell, inputs: &[Spectral], derived: &[Derived]) -> Result<FieldBasis> {
        match shell.kernel.species {
            KernelSpecies::EmBivector | KernelSpecies::ComplexKG => {}
            other => {
                return Err(Error::Species {
                    expected: "bivector or pair field kernel".into(),
                    found: other.payload(),
                })
            }
        }
        let mut modes: Vec<Spectral> = Vec::new();
        let mut slots = Vec::with_capacity(inputs.len());
        for f in inputs {
            let mut row = Vec::with_capacity(derived.len());
            for &d in derived {
                let g = d.apply(f)?;
                let idx = match modes.iter().position(|m| *m == g) {
                    Some(i) => i,
                    None => {
                        modes.push(g);
                        modes.len() - 1
                    }
                };
                row.push((d, idx));
            }
            slots.push(row);
        }
        let split = shell.split_gram(&modes)?;
        let space = ModeSpace::from_matrix(Statistics::Bose, &split.plus)?;
        Ok(FieldBasis {
            inputs: inputs.to_vec(),
            modes,
            slots,
            split,
            space,
        })
    }

    /// Inputs closed under `*`, `•` and `*•`.
    pub fn standard(shell: &Shell, fs: &[TestFunction]) -> Result<FieldBasis> {
        let inputs: Vec<Spectral> = fs.iter().map(Spectral::from).collect();
        Self::new(shell, &inputs, &CORE)
    }

    pub fn inputs(&self) -> &[Spectral] {
        &self.inputs
    }

    pub fn modes(&self) -> &[Spectral] {
        &self.modes
    }

    pub fn space(&self) -> &Arc<ModeSpace<C64>> {
        &self.space
    }

    pub fn split(&self) -> &SplitGram {
        &self.split
    }

    pub fn mode(&self, input: usize, d: Derived) -> Result<usize> {
        self.slots
            .get(input)
            .and_then(|row| row.iter().find(|(x, _)| *x == d))
            .map(|&(_, i)| i)
            .ok_or_else(|| Error::Input(format!("mode {d:?} of input {input} is not in the basis")))
    }

    /// Forward-shell pre-inner product of two modes.
    pub fn gram(&self, a: usize, b: usize) -> C64 {
        self.split.plus[(a, b)]
    }

    pub fn gram_minus(&self, a: usize, b: usize) -> C64 {
        self.split.minus[(a, b)]
    }

    /// `Σ w |integrand|` on the forward shell.
    pub fn scale(&self, a: usize, b: usize) -> f64 {
        self.split.scale_plus[(a, b)]
    }

    fn linear(&self, anni: usize, crea: usize) -> Result<NormalPoly<C64>> {
        NormalPoly::annihilate(&self.space, anni).add(&NormalPoly::create(&self.space, crea))
    }

    /// `F̂_f` or `𝔽_f` for input `i`.
    pub fn field(&self, flavor: Flavor, i: usize) -> Result<NormalPoly<C64>> {
        match flavor {
            Flavor::Quantum => self.linear(self.mode(i, Derived::Conjugate)?, self.mode(i, Derived::Function)?),
            Flavor::Random => self.linear(self.mode(i, Derived::ConjugateBullet)?, self.mode(i, Derived::Bullet)?),
        }
    }

    /// `𝔽_{f•} = a_{f•*•} + a†_{f••}`.
    pub fn random_field_of_bullet(&self, i: usize) -> Result<NormalPoly<C64>> {
        self.linear(self.mode(i, Derived::BulletConjugateBullet)?, self.mode(i, Derived::BulletBullet)?)
    }

    /// Field of `Σ c_i f_i`; the field is complex-linear in its argument.
    pub fn field_of(&self, flavor: Flavor, coeffs: &[C64]) -> Result<NormalPoly<C64>> {
        let mut acc = NormalPoly::zero(&self.space);
        for (i, ci) in coeffs.iter().enumerate() {
            if *ci != C64::new(0.0, 0.0) {
                acc = acc.add(&self.field(flavor, i)?.scale(ci))?;
            }
        }
        Ok(acc)
    }

    /// `⟨X_f X_g⟩` from the operator algebra.
    pub fn two_point(&self, flavor: Flavor, i: usize, j: usize) -> Result<C64> {
        Ok(self.field(flavor, i)?.mul(&self.field(flavor, j)?)?.vev())
    }

    /// The two-point function read directly off the Gram.
    pub fn two_point_gram(&self, flavor: Flavor, i: usize, j: usize) -> Result<C64> {
        Ok(match flavor {
            Flavor::Quantum => self.gram(self.mode(i, Derived::Conjugate)?, self.mode(j, Derived::Function)?),
            Flavor::Random => self.gram(self.mode(i, Derived::ConjugateBullet)?, self.mode(j, Derived::Bullet)?),
        })
    }

    /// Magnitude scale of the two-point entry, for relative residuals.
    pub fn two_point_scale(&self, flavor: Flavor, i: usize, j: usize) -> Result<f64> {
        Ok(match flavor {
            Flavor::Quantum => self.scale(self.mode(i, Derived::Conjugate)?, self.mode(j, Derived::Function)?),
            Flavor::Random => self.scale(self.mode(i, Derived::ConjugateBullet)?, self.mode(j, Derived::Bullet)?),
        })
    }

    /// `[X_f, X_g]`, which must reduce to a multiple of the identity.
    pub fn commutator(&self, flavor: Flavor, i: usize, j: usize) -> Result<C64> {
        let k = self.field(flavor, i)?.commutator(&self.field(flavor, j)?)?;
        if k.degree() > 0 {
            return Err(Error::Input("field commutator is not central".into()));
        }
        Ok(k.vev())
    }
}

/// Coefficient vectors `(v, w)` of a linear polynomial `a(v) + a†(w)`.
fn linear_parts(x: &NormalPoly<C64>) -> (Vec<C64>, Vec<C64>) {
    let n = x.space().n();
    let (mut v, mut w) = (vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]);
    for (m, coef) in x.terms() {
        match (m.crea.as_slice(), m.anni.as_slice()) {
            ([i], []) => w[*i as usize] = *coef,
            ([], [i]) => v[*i as usize] = coef.conj(),
            _ => {}
        }
    }
    (v, w)
}

fn rel(a: C64, b: C64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor).max(1e-300)
}

fn em_shell() -> Shell {
    Shell::new(Kernel::em())
}

fn field_spec(shell: &Shell) -> RandomSpec {
    RandomSpec::new(shell.kernel.species.payload())
}

// ---------------------------------------------------------------------------
// two-point table and commutators

const TABLE_TOL: f64 = 1e-12;
const COMMUTATOR_TOL: f64 = 1e-9;
const TRANSLATION_TOL: f64 = 1e-10;

/// Two-point table, adjoint relations, commutators and translation
/// invariance on random pairs.
pub fn field_suite<R: Rng + ?Sized>(shell: &Shell, trials: usize, rng: &mut R) -> Result<Report> {
    let label = match shell.kernel.species {
        KernelSpecies::ComplexKG => "complex-kg-field",
        _ => "em-field",
    };
    let mut report = Report::new(label, trials);
    let spec = field_spec(shell);
    let real = spec.clone().real();
    for _ in 0..trials {
        let f = random_test_function(&spec, rng);
        let g = random_test_function(&spec, rng);
        let r = random_test_function(&real, rng);
        let a: FourVector = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let basis = FieldBasis::standard(shell, &[f.clone(), g.clone(), r, f.translate(&a), g.translate(&a)])?;
        for flavor in [Flavor::Quantum, Flavor::Random] {
            let (name, anchor) = match flavor {
                Flavor::Quantum => ("quantum-two-point", "field.quantum-table"),
                Flavor::Random => ("random-two-point", "field.random-table"),
            };
            for (i, j) in [(0, 1), (1, 0), (0, 0), (2, 1)] {
                let op = basis.two_point(flavor, i, j)?;
                let gr = basis.two_point_gram(flavor, i, j)?;
                report.record_max(name, anchor, rel(op, gr, 0.0), TABLE_TOL);
            }
            let shifted = basis.two_point_gram(flavor, 3, 4)?;
            let floor = 1e-8 * basis.two_point_scale(flavor, 0, 1)?;
            report.record_max(
                &format!("{}-translation-invariance", if flavor == Flavor::Quantum { "quantum" } else { "random" }),
                "field.translation",
                rel(shifted, basis.two_point_gram(flavor, 0, 1)?, floor),
                TRANSLATION_TOL,
            );
            let x = basis.field(flavor, 0)?;
            let (v, w) = linear_parts(&x.adjoint());
            // X_f† = X_{f*}: creation on the conjugate-side mode, annihilation on the other
            let (exp_c, exp_a) = match flavor {
                Flavor::Quantum => (basis.mode(0, Derived::Conjugate)?, basis.mode(0, Derived::Function)?),
                Flavor::Random => (basis.mode(0, Derived::ConjugateBullet)?, basis.mode(0, Derived::Bullet)?),
            };
            let ok = w[exp_c] == C64::new(1.0, 0.0) && v[exp_a] == C64::new(1.0, 0.0) && x.adjoint().len() == 2;
            report.record_max(
                &format!("{}-adjoint", if flavor == Flavor::Quantum { "quantum" } else { "random" }),
                "field.adjoint",
                if ok { 0.0 } else { 1.0 },
                0.0,
            );
        }
        // a real function gives a self-adjoint quantum field
        let xr = basis.field(Flavor::Quantum, 2)?;
        report.record_max("real-self-adjoint", "field.adjoint", xr.max_abs_diff(&xr.adjoint())?, 0.0);
        let cq = basis.commutator(Flavor::Quantum, 0, 1)?;
        let cq_rev = basis.commutator(Flavor::Quantum, 1, 0)?;
        let closed =
            basis.two_point_gram(Flavor::Quantum, 0, 1)? - basis.two_point_gram(Flavor::Quantum, 1, 0)?;
        report.record_max("quantum-commutator-antisymmetry", "field.commutator", rel(cq, -cq_rev, 0.0), TABLE_TOL);
        report.record_max("quantum-commutator-closed-form", "field.commutator", rel(cq, closed, 0.0), TABLE_TOL);
        report.record_max(
            "quantum-commutator-real-diagonal",
            "field.commutator",
            basis.commutator(Flavor::Quantum, 2, 2)?.norm(),
            TABLE_TOL,
        );
        for (i, j) in [(0, 1), (1, 2), (0, 0)] {
            let cr = basis.commutator(Flavor::Random, i, j)?;
            let s = basis.two_point_gram(Flavor::Random, i, j)?.norm().max(basis.two_point_scale(Flavor::Random, i, j)?);
            report.record_max("random-commutator-vanishes", "field.random-commutator", cr.norm() / s.max(1e-300), COMMUTATOR_TOL);
        }
        report.record_max("quadrature-convergence", "shell.adaptivity", basis.split().change, shell.config.rel_tol);
    }
    Ok(report)
}

/// `[𝔽_f, 𝔽_g]` relative to the two-point scale on `pairs` random pairs,
/// with only the `•` and `*•` modes in each basis.
pub fn classicality_suite<R: Rng + ?Sized>(shell: &Shell, pairs: usize, rng: &mut R) -> Result<Report> {
    let label = match shell.kernel.species {
        KernelSpecies::ComplexKG => "complex-kg-classicality",
        _ => "em-classicality",
    };
    let mut report = Report::new(label, pairs);
    let spec = field_spec(shell);
    for _ in 0..pairs {
        let f = random_test_function(&spec, rng);
        let g = random_test_function(&spec, rng);
        let basis = FieldBasis::new(shell, &[Spectral::from(&f), Spectral::from(&g)], &[Derived::Bullet, Derived::ConjugateBullet])?;
        for (i, j) in [(0, 1), (1, 0), (0, 0)] {
            let cr = basis.commutator(Flavor::Random, i, j)?;
            let s = basis.two_point_gram(Flavor::Random, i, j)?.norm().max(basis.two_point_scale(Flavor::Random, i, j)?);
            report.record_max("random-commutator-vanishes", "field.random-commutator", cr.norm() / s.max(1e-300), COMMUTATOR_TOL);
        }
        report.record_max("quadrature-convergence", "shell.adaptivity", basis.split().change, shell.config.rel_tol);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// separation decay

/// `|[F̂_f, F̂_g]|` against the spatial separation of two real packets.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayScan {
    pub rows: Vec<(f64, f64)>,
}

impl DecayScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("separation,abs_commutator\n");
        for (d, v) in &self.rows {
            out.push_str(&format!("{d},{v:e}\n"));
        }
        out
    }

    pub fn reference(&self) -> f64 {
        self.rows.first().map(|r| r.1).unwrap_or(f64::NAN)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Value at the largest separation relative to the first row.
    pub fn final_ratio(&self) -> f64 {
        self.rows.last().map(|r| r.1).unwrap_or(f64::NAN) / self.reference()
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new("em-decay", self.rows.len());
        r.check_bool("strictly-decreasing", "field.decay", self.strictly_decreasing());
        r.check("far-ratio", "field.decay", self.final_ratio(), 1e-6);
        r
    }
}

pub const DEFAULT_SEPARATIONS: [f64; 8] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0];

/// Even packet at the origin.
fn decay_probe_even() -> Result<TestFunction> {
    let b = Bivector::basis(0, 1) + Bivector::basis(2, 3) * c(0.3, 0.0);
    Ok(TestFunction::single(GaussianPacket::new(
        c(1.0, 0.0),
        [0.0; 4],
        [0.0; 4],
        isotropic_sigma(1.0),
        Payload::Bivector(b),
    )?))
}

/// Real packet `sin(t) e^{−|x−x₀|²}` shifted by `d` along the first axis.
///
/// Two even packets at a common centre have vanishing commutator because the
/// commutator kernel is odd under `k → −k`; one odd factor in time makes the
/// coincident value nonzero.
fn decay_probe_odd(d: f64) -> Result<TestFunction> {
    let b = Bivector::basis(0, 1) + Bivector::basis(0, 2) * c(0.7, 0.0) + Bivector::basis(1, 3) * c(0.4, 0.0);
    let x0 = [0.0, d, 0.0, 0.0];
    let plus = GaussianPacket::new(c(0.0, -0.5), x0, [1.0, 0.0, 0.0, 0.0], isotropic_sigma(1.0), Payload::Bivector(b))?;
    let minus = GaussianPacket::new(c(0.0, 0.5), x0, [-1.0, 0.0, 0.0, 0.0], isotropic_sigma(1.0), Payload::Bivector(b))?;
    TestFunction::new(Species::Bivector, vec![plus, minus])
}

/// Separation scan in units of the packet width (1 for `Σ = I`).
pub fn decay_scan(shell: &Shell, separations: &[f64]) -> Result<DecayScan> {
    let f = decay_probe_even()?;
    let mut rows = Vec::with_capacity(separations.len());
    for &d in separations {
        let basis = FieldBasis::new(shell, &[Spectral::from(&f), Spectral::from(decay_probe_odd(d)?)], &[Derived::Function, Derived::Conjugate])?;
        rows.push((d, basis.commutator(Flavor::Quantum, 0, 1)?.norm()));
    }
    Ok(DecayScan { rows })
}

// ---------------------------------------------------------------------------
// normal-ordered isomorphism

const ISOMORPHISM_TOL: f64 = 1e-11;

fn creators(space: &Arc<ModeSpace<C64>>, modes: &[usize]) -> Result<NormalPoly<C64>> {
    let fs: Vec<NormalPoly<C64>> = modes.iter().map(|&m| NormalPoly::create(space, m)).collect();
    let refs: Vec<&NormalPoly<C64>> = fs.iter().collect();
    NormalPoly::product(space, &refs)
}

/// The creation part of a linear polynomial.
fn raising_part(x: &NormalPoly<C64>) -> NormalPoly<C64> {
    let (_, w) = linear_parts(x);
    NormalPoly::creator(x.space(), &w)
}

/// Symmetry of the random two-point function, `n`-particle Gram equality of
/// the quantum and random-field constructions for `n ≤ 4`, and real
/// variances.
pub fn isomorphism_suite<R: Rng + ?Sized>(shell: &Shell, rng: &mut R) -> Result<Report> {
    let spec = field_spec(shell);
    let gs: Vec<TestFunction> = (0..8).map(|_| random_test_function(&spec, rng)).collect();
    let real = random_test_function(&spec.clone().real(), rng);
    let mut inputs: Vec<Spectral> = gs.iter().map(Spectral::from).collect();
    inputs.push(Spectral::from(&real));
    let mut derived = CORE.to_vec();
    derived.push(Derived::BulletBullet);
    derived.push(Derived::BulletConjugateBullet);
    let basis = FieldBasis::new(shell, &inputs, &derived)?;
    let space = basis.space().clone();
    let mut report = Report::new("em-isomorphism", 1);

    // f•• = f pointwise and at the level of Gram rows
    let mut pointwise: f64 = 0.0;
    for g in &gs {
        let gbb = g.bullet()?.bullet()?;
        for _ in 0..100 {
            let k: FourVector = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            let (a, b) = (g.fourier(&k), gbb.fourier(&k));
            let d = a.components().iter().zip(b.components()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            pointwise = pointwise.max(d / a.max_abs().max(1e-300));
        }
    }
    report.check("bullet-involution-pointwise", "field.involution", pointwise, 1e-13);
    let mut rows: f64 = 0.0;
    for i in 0..gs.len() {
        let (g, gbb) = (basis.mode(i, Derived::Function)?, basis.mode(i, Derived::BulletBullet)?);
        for m in 0..basis.modes().len() {
            rows = rows.max(rel(basis.gram(m, g), basis.gram(m, gbb), 1e-8 * basis.scale(m, g)));
        }
    }
    report.check("bullet-involution-gram", "field.involution", rows, ISOMORPHISM_TOL);

    // (i) symmetry
    let mut sym: f64 = 0.0;
    for i in 0..gs.len() {
        for j in 0..gs.len() {
            let a = basis.two_point(Flavor::Random, i, j)?;
            let b = basis.two_point(Flavor::Random, j, i)?;
            sym = sym.max(rel(a, b, basis.two_point_scale(Flavor::Random, i, j)?));
        }
    }
    report.check("random-two-point-symmetric", "field.random-symmetry", sym, COMMUTATOR_TOL);

    // (ii) n-particle Grams
    for n in 1..=4usize {
        let left: Vec<usize> = (0..n).collect();
        let right: Vec<usize> = (4..4 + n).collect();
        let mut worst_perm: f64 = 0.0;
        let mut worst_iso: f64 = 0.0;
        for (a_set, b_set) in [(&left, &right), (&left, &left), (&right, &left)] {
            let qa: Vec<usize> = a_set.iter().map(|&i| basis.mode(i, Derived::Function)).collect::<Result<_>>()?;
            let qb: Vec<usize> = b_set.iter().map(|&i| basis.mode(i, Derived::Function)).collect::<Result<_>>()?;
            let quantum = creators(&space, &qa)?.adjoint().mul(&creators(&space, &qb)?)?.vev();
            let matrix: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| basis.gram(qa[i], qb[j])).collect()).collect();
            let perm = permanent(&matrix)?;
            // :𝔽_{g•}…: acting on the vacuum keeps only the raising parts
            let raise = |set: &[usize]| -> Result<NormalPoly<C64>> {
                let parts: Vec<NormalPoly<C64>> =
                    set.iter().map(|&i| basis.random_field_of_bullet(i).map(|x| raising_part(&x))).collect::<Result<_>>()?;
                let refs: Vec<&NormalPoly<C64>> = parts.iter().collect();
                NormalPoly::product(&space, &refs)
            };
            let random = raise(a_set)?.adjoint().mul(&raise(b_set)?)?.vev();
            worst_perm = worst_perm.max(rel(quantum, perm, 0.0));
            worst_iso = worst_iso.max(rel(quantum, random, 0.0));
        }
        report.check(&format!("permanent-n{n}"), "field.isomorphism", worst_perm, ISOMORPHISM_TOL);
        report.check(&format!("isomorphism-n{n}"), "field.isomorphism", worst_iso, ISOMORPHISM_TOL);
    }

    // n = 2 against a dense Fock space on the four modes involved
    let small = FieldBasis::new(shell, &inputs[..2].iter().chain(&inputs[4..6]).cloned().collect::<Vec<_>>(), &[Derived::Function])?;
    let oracle = FockOracle::new(small.space(), 4)?;
    let ket = |a: usize, b: usize| -> Result<DVector<C64>> {
        let s = small.space();
        let v = oracle.apply(&NormalPoly::create(s, b), &oracle.vacuum())?;
        oracle.apply(&NormalPoly::create(s, a), &v)
    };
    let dense = ket(0, 1)?.dotc(&ket(2, 3)?);
    let m: Vec<Vec<C64>> = (0..2).map(|i| (0..2).map(|j| small.gram(i, 2 + j)).collect()).collect();
    report.check("permanent-n2-fock", "field.isomorphism", rel(dense, permanent(&m)?, 0.0), ISOMORPHISM_TOL);

    // (iii) Gaussian variance of a real function
    let ir = gs.len();
    let var = basis.two_point(Flavor::Random, ir, ir)?;
    report.check("variance-real-nonnegative", "field.variance", (-var.re).max(0.0) + var.im.abs() / var.norm().max(1e-300), 1e-12);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Weyl operators and coherent states

const WEYL_TOL: f64 = 1e-9;


fn random_probe<R: Rng + ?Sized>(n: usize, amplitude: f64, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| C64::from_polar(amplitude * rng.random_range(0.0..1.0), rng.random_range(-PI..PI))).collect()
}

fn series_exp_on(oracle: &FockOracle, x: &NormalPoly<C64>, v: &DVector<C64>, terms: usize) -> Result<DVector<C64>> {
    let mut acc = v.clone();
    let mut term = v.clone();
    for k in 1..=terms {
        term = oracle.apply(x, &term)? / c(k as f64, 0.0);
        acc += &term;
    }
    Ok(acc)
}

/// Weyl composition laws, vacuum expectations and the coherent-state
/// equality, evaluated as matrix elements between coherent probes.
pub fn weyl_suite<R: Rng + ?Sized>(shell: &Shell, trials: usize, probes: usize, rng: &mut R) -> Result<Report> {
    let spec = field_spec(shell);
    let mut report = Report::new("em-weyl", trials);
    let mut derived = CORE.to_vec();
    derived.push(Derived::BulletBullet);
    derived.push(Derived::BulletConjugateBullet);
    derived.push(Derived::ConjugateReverse);
    let one = C64::new(1.0, 0.0);
    for trial in 0..trials {
        let f = random_test_function(&spec, rng);
        let g = random_test_function(&spec, rng);
        let fg = f.add(&g)?;
        let inputs: Vec<Spectral> = [&f, &g, &fg].iter().map(|x| Spectral::from(*x)).collect();
        let basis = FieldBasis::new(shell, &inputs, &derived)?;
        let space = basis.space().clone();
        let n = space.n();
        let wq: Vec<NormalExp> = (0..3).map(|i| NormalExp::of_linear(&basis.field(Flavor::Quantum, i)?, 1.0)).collect::<Result<_>>()?;
        let wr: Vec<NormalExp> = (0..3).map(|i| NormalExp::of_linear(&basis.field(Flavor::Random, i)?, 1.0)).collect::<Result<_>>()?;
        let cq = basis.two_point_gram(Flavor::Quantum, 0, 1)? - basis.two_point_gram(Flavor::Quantum, 1, 0)?;
        let lhs_q = wq[0].mul(&wq[1])?;
        let rhs_q = wq[2].scale_log(-cq / 2.0);
        let lhs_r = wr[0].mul(&wr[1])?;
        let rhs_r = &wr[2];
        // e^{(f*,f)/2} Ŵ(f)|0⟩ and e^{(f•*•,f)/2} 𝕎(f•)|0⟩
        let fcf = basis.gram(basis.mode(0, Derived::Conjugate)?, basis.mode(0, Derived::Function)?);
        let bcb = basis.mode(0, Derived::BulletConjugateBullet)?;
        let coh_q = wq[0].scale_log(fcf / 2.0);
        let coh_r = NormalExp::of_linear(&basis.random_field_of_bullet(0)?, 1.0)?
            .scale_log(basis.gram(bcb, basis.mode(0, Derived::Function)?) / 2.0);
        let zero = vec![C64::new(0.0, 0.0); n];
        for _ in 0..probes {
            let p = random_probe(n, 0.5, rng);
            let q = random_probe(n, 0.5, rng);
            let (a, b) = (lhs_q.matrix_element(&p, &q), rhs_q.matrix_element(&p, &q));
            report.record_max("quantum-composition", "field.weyl", rel(a, b, 0.0), WEYL_TOL);
            let (a, b) = (lhs_r.matrix_element(&p, &q), rhs_r.matrix_element(&p, &q));
            report.record_max("random-composition", "field.weyl", rel(a, b, 0.0), WEYL_TOL);
            let (a, b) = (coh_q.matrix_element(&p, &zero), coh_r.matrix_element(&p, &zero));
            report.record_max("coherent-state-equality", "field.coherent", rel(a, b, 0.0), WEYL_TOL);
            let id = NormalExp::identity(&space);
            let w0 = NormalExp::of_linear(&NormalPoly::zero(&space), 1.0)?;
            report.record_max("weyl-zero-is-identity", "field.weyl", rel(w0.matrix_element(&p, &q), id.matrix_element(&p, &q), 0.0), 1e-15);
        }
        let fcf_r = basis.two_point_gram(Flavor::Random, 0, 0)?;
        report.record_max("quantum-vacuum-expectation", "field.weyl", rel(wq[0].vev(), (-fcf / 2.0).exp(), 0.0), WEYL_TOL);
        report.record_max("random-vacuum-expectation", "field.weyl", rel(wr[0].vev(), (-fcf_r / 2.0).exp(), 0.0), WEYL_TOL);
        let minus_f = NormalExp::of_linear(&basis.field(Flavor::Quantum, 0)?.neg(), 1.0)?;
        let inverse = wq[0].mul(&minus_f)?.vev();
        report.record_max("group-inverse", "field.weyl", (inverse - one).norm(), 1e-12);
        // (f•*•, g) = (f*⁻, g)
        let gm = basis.mode(1, Derived::Function)?;
        let (lhs, rhs) = (basis.gram(bcb, gm), basis.gram(basis.mode(0, Derived::ConjugateReverse)?, gm));
        report.record_max("bullet-conjugate-bullet", "field.coherent", rel(lhs, rhs, 1e-8 * basis.scale(bcb, gm)), WEYL_TOL);

        // dense series on the quantum modes of a rescaled pair
        if trial < 2 {
            report.record_max("composition-fock-series", "field.weyl", weyl_series_check(shell, &f, &g, rng)?, WEYL_TOL);
        }
    }
    Ok(report)
}

/// `⟨p|Ŵ(f)Ŵ(g)|q⟩` by truncated exponential series on a Fock space,
/// against the closed form `e^{−c/2}⟨p|Ŵ(f+g)|q⟩`.
fn weyl_series_check<R: Rng + ?Sized>(shell: &Shell, f: &TestFunction, g: &TestFunction, rng: &mut R) -> Result<f64> {
    let pre = FieldBasis::new(shell, &[Spectral::from(f), Spectral::from(g)], &[Derived::Function])?;
    let s = 0.3 / pre.gram(0, 0).re.max(pre.gram(1, 1).re).sqrt();
    let (f, g) = (f.scale(c(s, 0.0)), g.scale(c(s, 0.0)));
    let fg = f.add(&g)?;
    let basis = FieldBasis::new(
        shell,
        &[Spectral::from(&f), Spectral::from(&g), Spectral::from(&fg)],
        &[Derived::Function, Derived::Conjugate],
    )?;
    let space = basis.space().clone();
    let oracle = FockOracle::new(&space, 16)?;
    let n = space.n();
    let i = C64::new(0.0, 1.0);
    let (xf, xg) = (basis.field(Flavor::Quantum, 0)?, basis.field(Flavor::Quantum, 1)?);
    let cq = basis.two_point_gram(Flavor::Quantum, 0, 1)? - basis.two_point_gram(Flavor::Quantum, 1, 0)?;
    let closed = NormalExp::of_linear(&basis.field(Flavor::Quantum, 2)?, 1.0)?.scale_log(-cq / 2.0);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let p = random_probe(n, 0.15, rng);
        let q = random_probe(n, 0.15, rng);
        let ket = series_exp_on(&oracle, &NormalPoly::creator(&space, &q), &oracle.vacuum(), 30)?;
        let ket = series_exp_on(&oracle, &xg.scale(&i), &ket, 30)?;
        let ket = series_exp_on(&oracle, &xf.scale(&i), &ket, 30)?;
        let bra = series_exp_on(&oracle, &NormalPoly::creator(&space, &p), &oracle.vacuum(), 30)?;
        worst = worst.max(rel(bra.dotc(&ket), closed.matrix_element(&p, &q), 0.0));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// vacuum projector

fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn projector_commutator(oracle: &FockOracle, x: &NormalPoly<C64>) -> Result<(f64, f64)> {
    let p0 = oracle.vacuum_projector();
    let m = oracle.matrix_image(x)?;
    let k = &p0 * &m - &m * &p0;
    Ok((frobenius(&k), frobenius(&m)))
}

/// Non-commutation of the vacuum projector and of a number operator with
/// smeared fields, on small dense Fock spaces.
pub fn vacuum_projector_check(shell: &Shell, f: &TestFunction, g: &TestFunction) -> Result<Report> {
    let mut report = Report::new("em-vacuum-projector", 1);
    let (sf, sg) = (Spectral::from(f), Spectral::from(g));
    let quantum = FieldBasis::new(shell, &[sf.clone()], &[Derived::Function, Derived::Conjugate])?;
    let random = FieldBasis::new(shell, &[sf.clone()], &[Derived::Bullet, Derived::ConjugateBullet])?;
    for (name, basis, flavor) in [("projector-quantum", &quantum, Flavor::Quantum), ("projector-random", &random, Flavor::Random)] {
        let oracle = FockOracle::new(basis.space(), 6)?;
        let (k, m) = projector_commutator(&oracle, &basis.field(flavor, 0)?)?;
        report.check_exceeds(name, "field.vacuum-projector", k, 1e-6 * m);
        report.note(format!("{name}: |[P0, X]| = {k:.3e}, |X| = {m:.3e}"));
    }
    let pair = FieldBasis::new(shell, &[sf, sg], &[Derived::Function, Derived::Conjugate])?;
    let s = pair.space();
    let a = pair.mode(0, Derived::Function)?;
    let number = NormalPoly::create(s, a).mul(&NormalPoly::annihilate(s, a))?;
    let xg = pair.field(Flavor::Quantum, 1)?;
    let k = number.commutator(&xg)?;
    let oracle = FockOracle::new(s, 6)?;
    let interior = oracle.interior(1);
    let km = oracle.columns(&k, &interior)?;
    let scale = frobenius(&oracle.columns(&number, &interior)?) * frobenius(&oracle.columns(&xg, &interior)?);
    report.check_exceeds("number-operator-commutator", "field.number-operator", frobenius(&km), 1e-6 * scale);
    Ok(report)
}

// ---------------------------------------------------------------------------
// complex Klein–Gordon

/// Field identities for the two-component charged scalar, plus a mass scan.
pub fn complex_kg_suite<R: Rng + ?Sized>(mass: f64, trials: usize, rng: &mut R) -> Result<Report> {
    complex_kg_suite_with(mass, QuadratureConfig::default(), trials, rng)
}

pub fn complex_kg_suite_with<R: Rng + ?Sized>(mass: f64, config: QuadratureConfig, trials: usize, rng: &mut R) -> Result<Report> {
    let shell = Shell::new(Kernel::new(KernelSpecies::ComplexKG, mass)?).with_config(config);
    let mut report = Report::new("complex-kg", trials);
    report.extend(field_suite(&shell, trials, rng)?);
    let spec = field_spec(&shell);
    let mut pointwise: f64 = 0.0;
    let mut minus_sym: f64 = 0.0;
    for _ in 0..trials {
        let f = random_test_function(&spec, rng);
        let g = random_test_function(&spec, rng);
        let fbb = f.bullet()?.bullet()?;
        for _ in 0..100 / trials.max(1) + 1 {
            let k: FourVector = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            let (a, b) = (f.fourier(&k), fbb.fourier(&k));
            let d = a.components().iter().zip(b.components()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            pointwise = pointwise.max(d / a.max_abs().max(1e-300));
        }
        let basis = FieldBasis::standard(&shell, &[f, g])?;
        let (fcb, gb) = (basis.mode(0, Derived::ConjugateBullet)?, basis.mode(1, Derived::Bullet)?);
        let (gcb, fb) = (basis.mode(1, Derived::ConjugateBullet)?, basis.mode(0, Derived::Bullet)?);
        let (a, b) = (basis.gram_minus(fcb, gb), basis.gram_minus(gcb, fb));
        minus_sym = minus_sym.max((a - b).norm() / a.norm().max(basis.split().scale_minus[(fcb, gb)]).max(1e-300));
    }
    report.check("bullet-involution-pointwise", "kg.involution", pointwise, 1e-13);
    report.check("random-two-point-symmetric-minus", "kg.random-symmetry", minus_sym, COMMUTATOR_TOL);

    // heavier fields put the shell further out in the packet tail
    let f = random_test_function(&RandomSpec { carrier_scale: 0.3, ..spec.clone() }, rng);
    let g = f.translate(&[0.0, 0.3, 0.0, 0.0]);
    let mut prev = (f64::INFINITY, f64::INFINITY);
    let mut decreasing = true;
    for m in [1.0, 2.0, 4.0, 8.0] {
        let sh = Shell::new(Kernel::new(KernelSpecies::ComplexKG, m)?).with_config(config);
        let split = sh.split_gram(&[Spectral::from(&f), Spectral::from(&g)])?;
        let (ff, fg) = (split.plus[(0, 0)].norm(), split.plus[(0, 1)].norm());
        decreasing &= ff < prev.0 && fg < prev.1;
        report.note(format!("m = {m}: |(f,f)+| = {ff:.3e}, |(f,g)+| = {fg:.3e}"));
        prev = (ff, fg);
    }
    report.check_bool("mass-decay", "kg.mass-scan", decreasing);
    Ok(report)
}

// ---------------------------------------------------------------------------
// involution

const INVOLUTION_TOL: f64 = 1e-12;

fn max_rel(a: &Payload, b: &Payload) -> f64 {
    let d = a.components().iter().zip(b.components()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    d / a.max_abs().max(b.max_abs()).max(1e-300)
}

/// `f•• = f` and `f•*• = f*⁻` at `points` random wave vectors per function,
/// for the Hodge dual on bivectors and the I matrix on pairs.
pub fn involution_suite<R: Rng + ?Sized>(functions: usize, points: usize, rng: &mut R) -> Result<Report> {
    let mut report = Report::new("involution", functions);
    for (species, label) in [(Species::Bivector, "hodge"), (Species::Pair, "i-matrix")] {
        let spec = RandomSpec::new(species);
        let (mut twice, mut simplified): (f64, f64) = (0.0, 0.0);
        for _ in 0..functions {
            let f = random_test_function(&spec, rng);
            let fbb = f.bullet()?.bullet()?;
            let fbcb = f.bullet()?.conjugate().bullet()?;
            let fcr = f.conjugate().reverse();
            for _ in 0..points {
                let k: FourVector = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
                twice = twice.max(max_rel(&fbb.fourier(&k), &f.fourier(&k)));
                simplified = simplified.max(max_rel(&fbcb.fourier(&k), &fcr.fourier(&k)));
            }
        }
        report.check(&format!("bullet-bullet-{label}"), "field.involution", twice, INVOLUTION_TOL);
        report.check(&format!("bullet-conjugate-bullet-{label}"), "field.involution", simplified, INVOLUTION_TOL);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// potentials

const POTENTIAL_TOL: f64 = 1e-9;

/// `Σ w |k|²_E ‖ã‖ ‖b̃‖` on one shell: a magnitude bound for two-point
/// integrands that vanish identically.
fn magnitude_scale(shell: &Shell, a: &Spectral, b: &Spectral, level: usize) -> f64 {
    let rule = shell.rule(&[a.clone(), b.clone()], level);
    let mut acc = 0.0;
    for sign in [1.0, -1.0] {
        for node in &rule.nodes {
            let k = [sign * node.omega, node.k[0], node.k[1], node.k[2]];
            let k2 = k.iter().map(|x| x * x).sum::<f64>();
            let na = a.eval(&k).components().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nb = b.eval(&k).components().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            acc += node.weight * k2 * na * nb;
        }
    }
    acc
}

/// Two-point identities for fields given by potentials, and the
/// helicity/codifferential operator identity on 3-forms.
pub fn potential_suite<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Report> {
    potential_suite_with(QuadratureConfig::default(), trials, rng)
}

pub fn potential_suite_with<R: Rng + ?Sized>(config: QuadratureConfig, trials: usize, rng: &mut R) -> Result<Report> {
    let em = em_shell().with_config(config);
    let one = Shell::new(Kernel::em_one_form()).with_config(config);
    let mut report = Report::new("em-potentials", trials);
    let half = c(0.5, 0.0);
    let mi = c(0.0, -1.0);
    for _ in 0..trials {
        let f = random_test_function(&RandomSpec::new(Species::Bivector), rng);
        let g = random_test_function(&RandomSpec::new(Species::Bivector), rng);
        let u1 = random_test_function(&RandomSpec::new(Species::OneForm), rng);
        let u3 = random_test_function(&RandomSpec::new(Species::ThreeForm), rng);
        let sf = Spectral::from(&f);
        let sg = Spectral::from(&g);
        let du1 = Spectral::from(&u1).exterior()?;
        let du3 = Spectral::from(&u3).codifferential()?;
        let gp = sg.clone().frequency(1.0);
        let h = Spectral::sum(gp.clone().helicity(1.0)?, sg.clone().frequency(-1.0).helicity(-1.0)?)?;
        let fcb = bullet(&conj(&sf))?;
        let list = vec![
            conj(&sf),       // 0
            du3.clone(),     // 1
            du1.clone(),     // 2
            sg.clone(),      // 3
            gp,              // 4
            fcb.clone(),     // 5
            bullet(&du3)?,   // 6
            bullet(&du1)?,   // 7
            bullet(&sg)?,    // 8
            bullet(&h)?,     // 9
        ];
        let split = em.split_gram(&list)?;
        let e = |i: usize, j: usize| split.plus[(i, j)];
        let fl = |i: usize, j: usize| 1e-8 * split.scale_plus[(i, j)];
        let lv = split.level;
        let s = |a: &Spectral, b: &Spectral| magnitude_scale(&em, a, b, lv);
        report.record_max("quantum-codifferential-potential", "potential.maxwell", e(0, 1).norm() / s(&list[0], &list[1]), POTENTIAL_TOL);
        report.record_max("quantum-exterior-potential", "potential.maxwell", e(0, 2).norm() / s(&list[0], &list[2]), POTENTIAL_TOL);
        report.record_max("quantum-positive-frequency", "potential.frequency", rel(e(0, 3), e(0, 4), fl(0, 3)), POTENTIAL_TOL);
        report.record_max("random-codifferential-potential", "potential.maxwell", e(5, 6).norm() / s(&list[5], &list[6]), POTENTIAL_TOL);
        report.record_max("random-exterior-potential", "potential.maxwell", e(5, 7).norm() / s(&list[5], &list[7]), POTENTIAL_TOL);
        report.record_max("random-helicity-frequency", "potential.frequency", rel(e(5, 8), e(5, 9), fl(5, 8)), POTENTIAL_TOL);

        // the one-form/three-form pair built from f and g
        let combo = |x: &Spectral, sign: f64| -> Result<Spectral> {
            let u1 = x.clone().codifferential()?;
            let star_u3 = x.clone().exterior()?.dual()?;
            Spectral::combination(vec![(half, u1), (mi * sign * 0.5, star_u3)])
        };
        let a_minus = combo(&conj(&sf), 1.0)?;
        let a_plus = combo(&conj(&sf), -1.0)?;
        let b_minus = combo(&sg, 1.0)?;
        let b_plus = combo(&sg, -1.0)?;
        let split1 = one.split_gram(&[a_minus, b_minus, a_plus, b_plus])?;
        let x = split1.plus[(0, 1)] + split1.minus[(2, 3)];
        let target = e(5, 8);
        report.record_max("two-point-from-potentials", "potential.x-field", rel(x, target, fl(5, 8)), POTENTIAL_TOL);
        report.record_max("quadrature-convergence", "shell.adaptivity", split.change.max(split1.change), em.config.rel_tol);
    }

    // δ P± δ ω = ±(i/2) δ d ⋆ω at on-shell nodes
    let mut worst: f64 = 0.0;
    for _ in 0..trials.max(1) * 20 {
        let w = Payload::ThreeForm(geometry::random_three_form(rng));
        let k0 = geometry::random_null_vector(rng);
        let k = if rng.random_bool(0.5) { k0 } else { [-k0[0], -k0[1], -k0[2], -k0[3]] };
        for sign in [1.0, -1.0] {
            let lhs = w.codifferential(&k)?.helicity(sign)?.codifferential(&k)?;
            let rhs = w.dual()?.exterior(&k)?.codifferential(&k)?.scale(c(0.0, 0.5 * sign));
            let scale = lhs.max_abs().max(rhs.max_abs()).max(1e-300);
            let d = lhs.components().iter().zip(rhs.components()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(d / scale);
        }
    }
    report.check("codifferential-helicity-operator", "potential.operator", worst, 1e-12);
    Ok(report)
}
