//! Mass-shell pre-inner products and Gram matrices.
//!
//! Every species is integrated with one origin-centred spherical product rule:
//! Gauss–Legendre in `|k|` on `[0, R]`, Gauss–Legendre in `cos θ`, and the
//! uniform rule in `φ` with an even node count. The measure is
//! `d³k / ((2π)³ 2ω)`; for `m = 0` the Jacobian `|k|²` cancels the `1/|k|`.
//!
//! The node set is invariant under `k ↦ −k`, so the forward and backward
//! shells are sampled at mirrored points. Identities that relate the two
//! shells through reversal or conjugation therefore hold node by node, and
//! only the absolute accuracy depends on the quadrature order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{c, DiracMatrices, FourVector, Matrix4c, Spinor, C64, ZERO};
use crate::packets::{random_test_function, Payload, RandomSpec, Species, TestFunction};
use crate::report::Report;
use crate::spectral::Spectral;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Frequency {
    Plus,
    Minus,
    Both,
}

impl Frequency {
    pub fn flipped(self) -> Frequency {
        match self {
            Frequency::Plus => Frequency::Minus,
            Frequency::Minus => Frequency::Plus,
            Frequency::Both => Frequency::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KernelSpecies {
    ScalarKG,
    ComplexKG,
    EmBivector,
    EmOneForm,
    Dirac,
}

impl KernelSpecies {
    pub fn payload(self) -> Species {
        match self {
            KernelSpecies::ScalarKG => Species::Scalar,
            KernelSpecies::ComplexKG => Species::Pair,
            KernelSpecies::EmBivector => Species::Bivector,
            KernelSpecies::EmOneForm => Species::OneForm,
            KernelSpecies::Dirac => Species::Spinor,
        }
    }

    pub fn is_psd(self) -> bool {
        !matches!(self, KernelSpecies::EmOneForm)
    }
}

#[derive(Clone, Debug)]
pub struct Kernel {
    pub species: KernelSpecies,
    pub mass: f64,
    pub hbar: f64,
    pub gammas: DiracMatrices,
}

impl Kernel {
    pub fn new(species: KernelSpecies, mass: f64) -> Result<Kernel> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::Input(format!("mass must be finite and non-negative, got {mass}")));
        }
        if matches!(species, KernelSpecies::EmBivector | KernelSpecies::EmOneForm) && mass != 0.0 {
            return Err(Error::Input("electromagnetic kernels are massless".into()));
        }
        Ok(Kernel {
            species,
            mass,
            hbar: 1.0,
            gammas: DiracMatrices::dirac(),
        })
    }

    pub fn em() -> Kernel {
        Self::new(KernelSpecies::EmBivector, 0.0).expect("valid")
    }

    pub fn em_one_form() -> Kernel {
        Self::new(KernelSpecies::EmOneForm, 0.0).expect("valid")
    }

    pub fn dirac(mass: f64) -> Result<Kernel> {
        if mass <= 0.0 {
            return Err(Error::Input("the Dirac kernel needs m > 0".into()));
        }
        Self::new(KernelSpecies::Dirac, mass)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Kernel {
        self.hbar = hbar;
        self
    }

    pub fn with_gammas(mut self, gammas: DiracMatrices) -> Kernel {
        self.gammas = gammas;
        self
    }

    /// Shell-restricted kernel matrix `±γ⁰(k·γ + m)` at on-shell `k`.
    pub fn dirac_matrix(&self, k: &FourVector) -> Matrix4c {
        let sign = if k[0] > 0.0 { 1.0 } else { -1.0 };
        let kg = self.gammas.slash(k) + Matrix4c::identity() * c(self.mass, 0.0);
        self.gammas.gamma[0] * kg * c(sign * self.hbar, 0.0)
    }

    /// The vector whose kernel-weighted pairing gives the integrand.
    #[inline]
    fn reduce(&self, p: &Payload, k: &FourVector) -> [C64; 4] {
        match p {
            Payload::Scalar(z) => [*z, ZERO, ZERO, ZERO],
            Payload::Pair(v) => [v[0], v[1], ZERO, ZERO],
            Payload::Bivector(b) => b.contract(k).0,
            Payload::OneForm(u) => u.0,
            Payload::Spinor(s) => [s[0], s[1], s[2], s[3]],
            Payload::ThreeForm(_) => unreachable!("species checked"),
        }
    }

    fn weights(&self) -> [f64; 4] {
        let h = self.hbar;
        match self.species {
            KernelSpecies::ScalarKG => [h, 0.0, 0.0, 0.0],
            KernelSpecies::ComplexKG => [h, h, 0.0, 0.0],
            // −ħ g^{μν}
            KernelSpecies::EmBivector | KernelSpecies::EmOneForm => [-h, h, h, h],
            KernelSpecies::Dirac => [1.0; 4],
        }
    }

    /// Integrand `K(k)` applied to the pair of payload values at `k`.
    pub fn integrand(&self, f: &Payload, g: &Payload, k: &FourVector) -> C64 {
        let a = self.reduce(f, k);
        let b = self.right(self.reduce(g, k), k);
        let mut acc = ZERO;
        for i in 0..4 {
            acc += a[i].conj() * b[i];
        }
        acc
    }

    #[inline]
    fn right(&self, v: [C64; 4], k: &FourVector) -> [C64; 4] {
        if self.species == KernelSpecies::Dirac {
            let s = self.dirac_matrix(k) * Spinor::new(v[0], v[1], v[2], v[3]);
            [s[0], s[1], s[2], s[3]]
        } else {
            let w = self.weights();
            [v[0] * w[0], v[1] * w[1], v[2] * w[2], v[3] * w[3]]
        }
    }
}

// ---------------------------------------------------------------------------
// quadrature

/// Gauss–Legendre nodes and weights on [−1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_doublings: usize,
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            max_doublings: 4,
            radial: 32,
            polar: 12,
            azimuthal: 24,
        }
    }
}

impl QuadratureConfig {
    pub fn orders(&self, level: usize) -> (usize, usize, usize) {
        let f = 1usize << level;
        (self.radial * f, self.polar * f, self.azimuthal * f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellNode {
    pub k: [f64; 3],
    pub omega: f64,
    /// `w_r w_θ w_φ |k|² / ((2π)³ 2ω)`.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShellRule {
    pub radius: f64,
    pub mass: f64,
    pub nodes: Vec<ShellNode>,
}

impl ShellRule {
    pub fn new(radius: f64, mass: f64, radial: usize, polar: usize, azimuthal: usize) -> ShellRule {
        let azimuthal = azimuthal + azimuthal % 2;
        let (xr, wr) = gauss_legendre(radial);
        let (xt, wt) = gauss_legendre(polar);
        let dphi = 2.0 * PI / azimuthal as f64;
        let norm = 1.0 / (8.0 * PI * PI * PI);
        let mut nodes = Vec::with_capacity(radial * polar * azimuthal);
        for (&r0, &wr0) in xr.iter().zip(wr.iter()) {
            let r = 0.5 * radius * (r0 + 1.0);
            let omega = (r * r + mass * mass).sqrt();
            let radial_weight = 0.5 * radius * wr0 * r * r / (2.0 * omega) * norm;
            for (&ct, &wt0) in xt.iter().zip(wt.iter()) {
                let st = (1.0 - ct * ct).sqrt();
                for j in 0..azimuthal {
                    let phi = dphi * (j as f64 + 0.5);
                    nodes.push(ShellNode {
                        k: [r * st * phi.cos(), r * st * phi.sin(), r * ct],
                        omega,
                        weight: radial_weight * wt0 * dphi,
                    });
                }
            }
        }
        ShellRule { radius, mass, nodes }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Forward- and backward-shell Gram matrices over one list of functions,
/// computed on a common node set.
#[derive(Clone, Debug)]
pub struct SplitGram {
    pub kernel: KernelSpecies,
    pub plus: DMatrix<C64>,
    pub minus: DMatrix<C64>,
    /// `Σ w |integrand|` per entry and shell; bounds the magnitude of the entry.
    pub scale_plus: DMatrix<f64>,
    pub scale_minus: DMatrix<f64>,
    pub level: usize,
    /// Largest entry change, relative to its scale, between the last two levels.
    pub change: f64,
}

impl SplitGram {
    pub fn n(&self) -> usize {
        self.plus.nrows()
    }

    pub fn entry(&self, i: usize, j: usize, freq: Frequency) -> C64 {
        match freq {
            Frequency::Plus => self.plus[(i, j)],
            Frequency::Minus => self.minus[(i, j)],
            Frequency::Both => self.plus[(i, j)] + self.minus[(i, j)],
        }
    }

    pub fn scale(&self, i: usize, j: usize, freq: Frequency) -> f64 {
        match freq {
            Frequency::Plus => self.scale_plus[(i, j)],
            Frequency::Minus => self.scale_minus[(i, j)],
            Frequency::Both => self.scale_plus[(i, j)] + self.scale_minus[(i, j)],
        }
    }

    pub fn matrix(&self, freq: Frequency) -> DMatrix<C64> {
        match freq {
            Frequency::Plus => self.plus.clone(),
            Frequency::Minus => self.minus.clone(),
            Frequency::Both => &self.plus + &self.minus,
        }
    }

    pub fn gram(&self, freq: Frequency) -> GramMatrix {
        GramMatrix {
            kernel: self.kernel,
            frequency: freq,
            entries: self.matrix(freq),
            level: self.level,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub kernel: KernelSpecies,
    pub frequency: Frequency,
    pub entries: DMatrix<C64>,
    pub level: usize,
}

#[derive(Serialize, Deserialize)]
struct GramRepr {
    kernel: KernelSpecies,
    frequency: Frequency,
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.entries - self.entries.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max) / self.spectral_norm().max(1e-300)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `−λ_min / ‖G‖`, floored at zero.
    pub fn psd_residual(&self) -> f64 {
        let norm = self.spectral_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (-self.min_eigenvalue() / norm).max(0.0)
    }

    pub fn check_psd(&self) -> Result<()> {
        if self.psd_residual() > 1e-10 {
            return Err(Error::PsdViolation {
                min_eigenvalue: self.min_eigenvalue(),
                norm: self.spectral_norm(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let n = self.n();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Ok(serde_json::to_string(&GramRepr {
            kernel: self.kernel,
            frequency: self.frequency,
            n,
            entries,
        })?)
    }
}

/// A kernel together with the quadrature settings used to integrate it.
#[derive(Clone, Debug)]
pub struct Shell {
    pub kernel: Kernel,
    pub config: QuadratureConfig,
}

impl Shell {
    pub fn new(kernel: Kernel) -> Shell {
        Shell {
            kernel,
            config: QuadratureConfig::default(),
        }
    }

    pub fn with_config(mut self, config: QuadratureConfig) -> Shell {
        self.config = config;
        self
    }

    fn check_species(&self, fs: &[Spectral]) -> Result<()> {
        let want = self.kernel.species.payload();
        for f in fs {
            if f.species() != want {
                return Err(Error::Species {
                    expected: format!("{want:?}"),
                    found: f.species(),
                });
            }
        }
        Ok(())
    }

    pub fn radius(&self, fs: &[Spectral]) -> f64 {
        fs.iter().map(|f| f.support_radius()).fold(1.0, f64::max)
    }

    pub fn rule(&self, fs: &[Spectral], level: usize) -> ShellRule {
        let (nr, nt, np) = self.config.orders(level);
        ShellRule::new(self.radius(fs), self.kernel.mass, nr, nt, np)
    }

    /// Both shell Grams at a fixed quadrature level.
    pub fn split_gram_at(&self, fs: &[Spectral], level: usize) -> Result<SplitGram> {
        self.check_species(fs)?;
        let rule = self.rule(fs, level);
        self.integrate(fs, &rule, level)
    }

    fn integrate(&self, fs: &[Spectral], rule: &ShellRule, level: usize) -> Result<SplitGram> {
        let n = fs.len();
        let idx = |i: usize, j: usize| i * n + j;
        let mut acc = vec![[Compensated::default(); 2]; 2 * n * n];
        let mut mag = vec![Compensated::default(); 2 * n * n];
        // plain partial sums over blocks of nodes, flushed into compensated totals
        let mut part = vec![[0.0f64; 3]; 2 * n * n];
        let mut left = vec![[ZERO; 4]; n];
        let mut right = vec![[ZERO; 4]; n];
        const BLOCK: usize = 256;
        for (count, node) in rule.nodes.iter().enumerate() {
            for (s, shell) in [1.0, -1.0].iter().enumerate() {
                let k = [shell * node.omega, node.k[0], node.k[1], node.k[2]];
                let kmat = (self.kernel.species == KernelSpecies::Dirac).then(|| self.kernel.dirac_matrix(&k));
                for (a, f) in fs.iter().enumerate() {
                    left[a] = self.kernel.reduce(&f.eval(&k), &k);
                    right[a] = match &kmat {
                        Some(m) => {
                            let v = &left[a];
                            let s = m * Spinor::new(v[0], v[1], v[2], v[3]);
                            [s[0], s[1], s[2], s[3]]
                        }
                        None => self.kernel.right(left[a], &k),
                    };
                }
                let off = s * n * n;
                for i in 0..n {
                    let li = &left[i];
                    for j in i..n {
                        let rj = &right[j];
                        let t = (li[0].conj() * rj[0] + li[1].conj() * rj[1] + li[2].conj() * rj[2] + li[3].conj() * rj[3])
                            * node.weight;
                        let e = &mut part[off + idx(i, j)];
                        e[0] += t.re;
                        e[1] += t.im;
                        e[2] += t.norm();
                    }
                }
            }
            if (count + 1) % BLOCK == 0 || count + 1 == rule.nodes.len() {
                for (e, p) in part.iter_mut().enumerate() {
                    acc[e][0].add(p[0]);
                    acc[e][1].add(p[1]);
                    mag[e].add(p[2]);
                    *p = [0.0; 3];
                }
            }
        }
        let mut mats = [DMatrix::from_element(n, n, ZERO), DMatrix::from_element(n, n, ZERO)];
        let mut scales = [DMatrix::from_element(n, n, 0.0), DMatrix::from_element(n, n, 0.0)];
        for s in 0..2 {
            for i in 0..n {
                for j in i..n {
                    let e = s * n * n + idx(i, j);
                    let z = c(acc[e][0].value(), acc[e][1].value());
                    if !z.re.is_finite() || !z.im.is_finite() {
                        return Err(Error::Quadrature {
                            change: f64::NAN,
                            tolerance: self.config.rel_tol,
                            order: level,
                        });
                    }
                    let m = mag[e].value();
                    if i == j {
                        // exactly real on the diagonal
                        mats[s][(i, i)] = c(z.re, 0.0);
                    } else {
                        mats[s][(i, j)] = z;
                        mats[s][(j, i)] = z.conj();
                    }
                    scales[s][(i, j)] = m;
                    scales[s][(j, i)] = m;
                }
            }
        }
        let [plus, minus] = mats;
        let [scale_plus, scale_minus] = scales;
        Ok(SplitGram {
            kernel: self.kernel.species,
            plus,
            minus,
            scale_plus,
            scale_minus,
            level,
            change: f64::NAN,
        })
    }

    /// Both shell Grams, doubling the quadrature order until consecutive
    /// levels agree to `rel_tol` (relative to each entry's magnitude scale).
    pub fn split_gram(&self, fs: &[Spectral]) -> Result<SplitGram> {
        self.check_species(fs)?;
        let mut prev = self.integrate(fs, &self.rule(fs, 0), 0)?;
        let mut change = f64::NAN;
        for level in 1..=self.config.max_doublings {
            let mut next = self.integrate(fs, &self.rule(fs, level), level)?;
            change = max_change(&prev, &next);
            next.change = change;
            if change <= self.config.rel_tol {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature {
            change,
            tolerance: self.config.rel_tol,
            order: self.config.max_doublings,
        })
    }

    /// Coarsest level `L` whose Gram over `fs` agrees with level `L + 1` to
    /// `rel_tol`, together with that largest relative change.
    pub fn calibrate(&self, fs: &[Spectral]) -> Result<(usize, f64)> {
        let g = self.split_gram(fs)?;
        Ok((g.level - 1, g.change))
    }

    /// Gram matrix on one shell (or both), with the PSD contract enforced.
    pub fn gram(&self, fs: &[Spectral], freq: Frequency) -> Result<GramMatrix> {
        let split = self.split_gram(fs)?;
        if self.kernel.species.is_psd() {
            split.gram(Frequency::Plus).check_psd()?;
            split.gram(Frequency::Minus).check_psd()?;
        }
        Ok(split.gram(freq))
    }

    pub fn gram_of(&self, fs: &[TestFunction], freq: Frequency) -> Result<GramMatrix> {
        let s: Vec<Spectral> = fs.iter().map(Spectral::from).collect();
        self.gram(&s, freq)
    }

    pub fn pre_inner(&self, f: &Spectral, g: &Spectral, freq: Frequency) -> Result<C64> {
        let split = self.split_gram(&[f.clone(), g.clone()])?;
        Ok(split.entry(0, 1, freq))
    }

    pub fn pre_inner_tf(&self, f: &TestFunction, g: &TestFunction, freq: Frequency) -> Result<C64> {
        self.pre_inner(&Spectral::from(f), &Spectral::from(g), freq)
    }
}

const CS_FLOOR: f64 = 1e-6;

fn max_change(a: &SplitGram, b: &SplitGram) -> f64 {
    let mut worst: f64 = 0.0;
    for (ma, mb, sb) in [(&a.plus, &b.plus, &b.scale_plus), (&a.minus, &b.minus, &b.scale_minus)] {
        let top = (0..sb.nrows()).map(|i| sb[(i, i)]).fold(0.0, f64::max);
        for i in 0..ma.nrows() {
            for j in 0..ma.ncols() {
                let d = (ma[(i, j)] - mb[(i, j)]).norm();
                // integrands that vanish identically are judged against the
                // Cauchy–Schwarz scale of their row and column, and against the
                // largest diagonal when the functions themselves are null
                let s = sb[(i, j)].max(CS_FLOOR * (sb[(i, i)] * sb[(j, j)]).sqrt()).max(CS_FLOOR * top);
                let r = if s > 0.0 { d / s } else { d };
                worst = worst.max(r);
            }
        }
    }
    worst
}

fn rel(a: C64, b: C64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor).max(1e-300)
}

/// Options for [`identity_suite`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    /// Compare `(f*, g*)₊` with `(g, f)₊` instead of `(g, f)₋`; must fail.
    pub adversarial: bool,
}

const IDENTITY_TOL: f64 = 1e-10;

/// Randomized check of the pre-inner-product identities for one kernel.
pub fn identity_suite<R: Rng + ?Sized>(shell: &Shell, trials: usize, rng: &mut R) -> Result<Report> {
    identity_suite_with(shell, trials, rng, SuiteOptions::default())
}

pub fn identity_suite_with<R: Rng + ?Sized>(
    shell: &Shell,
    trials: usize,
    rng: &mut R,
    options: SuiteOptions,
) -> Result<Report> {
    let ks = shell.kernel.species;
    let species = ks.payload();
    let mut report = Report::new(format!("shell-{}", kernel_label(ks)), trials);
    let spec = RandomSpec::new(species);
    let set = &shell.kernel.gammas;
    for _ in 0..trials {
        let f = random_test_function(&spec, rng);
        let g = random_test_function(&spec, rng);
        let alpha = C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(-PI..PI));
        let shift: FourVector = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let mut list: Vec<TestFunction> = vec![
            f.clone(),
            g.clone(),
            f.translate(&shift),
            g.translate(&shift),
            f.scale(alpha).add(&g)?,
        ];
        let base = list.len();
        match ks {
            KernelSpecies::Dirac => {
                list.push(f.charge_conjugate(set)?);
                list.push(g.charge_conjugate(set)?);
            }
            _ => {
                list.extend([f.conjugate(), g.conjugate(), f.reverse(), g.reverse()]);
                if ks == KernelSpecies::EmBivector {
                    list.extend([
                        f.dual()?,
                        g.dual()?,
                        f.helicity(1.0)?,
                        g.helicity(1.0)?,
                        f.helicity(-1.0)?,
                        g.helicity(-1.0)?,
                    ]);
                }
            }
        }
        let fs: Vec<Spectral> = list.iter().map(Spectral::from).collect();
        let (level, change) = shell.calibrate(&fs[..2])?;
        let split = shell.split_gram_at(&fs, level)?;
        let e = |i: usize, j: usize, q: Frequency| split.entry(i, j, q);
        let floor = |i: usize, j: usize| 1e-8 * split.scale(i, j, Frequency::Both);
        let h = 4;
        for q in [Frequency::Plus, Frequency::Minus] {
            report.record_max(
                "translation-invariance",
                "shell.translation",
                rel(e(2, 3, q), e(0, 1, q), floor(0, 1)),
                IDENTITY_TOL,
            );
            let lin = e(0, 1, q) * alpha.conj() + e(1, 1, q);
            report.record_max("sesquilinearity", "shell.sesquilinear", rel(e(h, 1, q), lin, floor(1, 1)), IDENTITY_TOL);
            let herm = rel(e(0, 1, q), e(1, 0, q).conj(), floor(0, 1));
            report.record_max("hermiticity", "shell.hermitian", herm, IDENTITY_TOL);
            match ks {
                KernelSpecies::Dirac => {
                    let (uc, vc) = (base, base + 1);
                    report.record_max(
                        "charge-conjugation-swaps-shell",
                        "dirac.charge-conjugation",
                        rel(e(uc, vc, q), e(1, 0, q.flipped()), floor(0, 1)),
                        IDENTITY_TOL,
                    );
                }
                _ => {
                    let (fc, gc, fr, gr) = (base, base + 1, base + 2, base + 3);
                    let target = if options.adversarial { q } else { q.flipped() };
                    report.record_max(
                        "conjugation-swaps-shell",
                        "shell.conjugation",
                        rel(e(fc, gc, q), e(1, 0, target), floor(0, 1)),
                        IDENTITY_TOL,
                    );
                    report.record_max(
                        "reversal-swaps-shell",
                        "shell.reversal",
                        rel(e(fr, gr, q), e(0, 1, q.flipped()), floor(0, 1)),
                        IDENTITY_TOL,
                    );
                    if ks == KernelSpecies::EmBivector {
                        let (sf, sg, pf, pg, mf, mg) = (base + 4, base + 5, base + 6, base + 7, base + 8, base + 9);
                        report.record_max(
                            "hodge-antisymmetry",
                            "em.hodge",
                            rel(e(sf, 1, q), -e(0, sg, q), floor(0, 1)),
                            IDENTITY_TOL,
                        );
                        report.record_max(
                            "helicity-self-adjoint",
                            "em.helicity",
                            rel(e(pf, 1, q), e(0, pg, q), floor(0, 1)).max(rel(e(mf, 1, q), e(0, mg, q), floor(0, 1))),
                            IDENTITY_TOL,
                        );
                    }
                }
            }
        }
        if ks == KernelSpecies::Dirac {
            let (uc, vc) = (base, base + 1);
            let b = Frequency::Both;
            report.record_max(
                "charge-conjugation-full",
                "dirac.charge-conjugation",
                rel(e(uc, vc, b), e(1, 0, b), floor(0, 1)),
                IDENTITY_TOL,
            );
            report.record_max(
                "charge-conjugation-symmetric",
                "dirac.charge-conjugation",
                rel(e(uc, 1, b), e(vc, 0, b), floor(0, 1)),
                IDENTITY_TOL,
            );
        }
        if ks.is_psd() {
            let r = split.gram(Frequency::Plus).psd_residual().max(split.gram(Frequency::Minus).psd_residual());
            report.record_max("gram-psd", "shell.psd", r, IDENTITY_TOL);
        }
        report.record_max("quadrature-convergence", "shell.adaptivity", change, shell.config.rel_tol);
    }
    Ok(report)
}

pub fn kernel_label(k: KernelSpecies) -> &'static str {
    match k {
        KernelSpecies::ScalarKG => "scalar-kg",
        KernelSpecies::ComplexKG => "complex-kg",
        KernelSpecies::EmBivector => "em-bivector",
        KernelSpecies::EmOneForm => "em-one-form",
        KernelSpecies::Dirac => "dirac",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let (x, _) = gauss_legendre(8);
        for i in 0..8 {
            assert_eq!(x[i], -x[7 - i]);
        }
    }

    #[test]
    fn shell_rule_measures_a_gaussian() {
        // ∫ d³k/((2π)³ 2|k|) e^{−|k|²} = 2π·½/(2π)³ = 1/(8π²)
        let rule = ShellRule::new(8.0, 0.0, 40, 8, 8);
        let s: f64 = rule
            .nodes
            .iter()
            .map(|n| n.weight * (-(n.k[0].powi(2) + n.k[1].powi(2) + n.k[2].powi(2))).exp())
            .sum();
        assert!((s - 1.0 / (8.0 * PI * PI)).abs() < 1e-14, "{s}");
        assert!(rule.nodes.iter().all(|n| n.weight.is_finite() && n.weight > 0.0));
    }

    #[test]
    fn zero_function_gives_zero() {
        let shell = Shell::new(Kernel::em());
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let f = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let z = TestFunction::zero(Species::Bivector);
        assert_eq!(shell.pre_inner_tf(&z, &f, Frequency::Plus).unwrap(), ZERO);
    }

    #[test]
    fn species_mismatch_is_rejected() {
        let shell = Shell::new(Kernel::em());
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let f = random_test_function(&RandomSpec::new(Species::Scalar), &mut r);
        assert!(matches!(shell.pre_inner_tf(&f, &f, Frequency::Plus), Err(Error::Species { .. })));
    }

    #[test]
    fn frequency_parts_add_up() {
        let shell = Shell::new(Kernel::new(KernelSpecies::ScalarKG, 1.0).unwrap());
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let f = random_test_function(&RandomSpec::new(Species::Scalar), &mut r);
        let g = random_test_function(&RandomSpec::new(Species::Scalar), &mut r);
        let fs = [Spectral::from(&f), Spectral::from(&g)];
        let split = shell.split_gram(&fs).unwrap();
        let both = split.entry(0, 1, Frequency::Both);
        assert!(rel(both, split.entry(0, 1, Frequency::Plus) + split.entry(0, 1, Frequency::Minus), 0.0) < 1e-12);
    }

    #[test]
    fn duplicated_list_is_rank_deficient() {
        let shell = Shell::new(Kernel::em());
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let f = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let g = shell.gram_of(&[f.clone(), f], Frequency::Plus).unwrap();
        assert!(g.min_eigenvalue().abs() <= 1e-10 * g.spectral_norm());
        let one = shell.gram_of(&[random_test_function(&RandomSpec::new(Species::Bivector), &mut r)], Frequency::Plus).unwrap();
        assert!(one.entries[(0, 0)].re >= 0.0 && one.entries[(0, 0)].im == 0.0);
    }

    #[test]
    fn gram_json_has_declared_fields() {
        let shell = Shell::new(Kernel::em());
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let f = random_test_function(&RandomSpec::new(Species::Bivector), &mut r);
        let g = shell.gram_of(&[f], Frequency::Plus).unwrap();
        let v: serde_json::Value = serde_json::from_str(&g.to_json().unwrap()).unwrap();
        assert_eq!(v["kernel"], "emBivector");
        assert_eq!(v["frequency"], "plus");
        assert_eq!(v["n"], 1);
        assert_eq!(v["entries"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn massless_integrand_is_finite_near_origin() {
        let shell = Shell::new(Kernel::em_one_form());
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let f = Spectral::from(random_test_function(&RandomSpec::new(Species::OneForm), &mut r));
        let rule = shell.rule(std::slice::from_ref(&f), 0);
        let near = rule.nodes.iter().min_by(|a, b| a.omega.total_cmp(&b.omega)).unwrap();
        let k = [near.omega, near.k[0], near.k[1], near.k[2]];
        let v = shell.kernel.integrand(&f.eval(&k), &f.eval(&k), &k) * near.weight;
        assert!(v.re.is_finite() && v.im.is_finite());
    }
}
