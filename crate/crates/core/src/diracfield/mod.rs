//! The quantized Dirac field on anticommuting modes.
//!
//! A spinor test function `U` enters through `ψ_U = d_{U^c} + b†_U`. Over a
//! basis `X_1 … X_n` the `b` modes carry the forward-shell Gram and the `d`
//! modes, one per `X_i^c`, carry `(X_i^c, X_j^c)_+ = (X_j, X_i)_−`. Every
//! operator below is then a normal-ordered polynomial in `2n` fermionic modes,
//! and a spinor in the span of the basis is a coefficient vector.

mod bilocal;

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4};
use num_complex::ComplexFloat;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{c, DiracMatrices, Matrix4c, C64, I, ZERO};
use crate::oscillator::{random_poly, FockOracle, ModeSpace, NormalPoly, Statistics};
use crate::packets::{isotropic_sigma, random_test_function, GaussianPacket, Payload, RandomSpec, Species, TestFunction};
use crate::report::Report;
use crate::shell::{Frequency, Kernel, KernelSpecies, Shell, SplitGram};
use crate::spectral::Spectral;

pub use bilocal::{
    bilocal_vev, bilocal_vev_at, charge_window, measure_singularity, rest_frame_window, singularity_scan, smeared_coincidence, window_matrix, BilocalWindow, Combo,
    Fit, ScanRow, SingularityScan, BILOCAL_ORDERS, DEFAULT_WIDTHS, SCAN_ORDERS,
};

/// Coefficients of a spinor in the span of a [`SpinorBasis`].
pub type Coeffs = Vec<C64>;

/// Relative threshold below which a norm or overlap counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;
const ALGEBRA_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpinorBasis {
    shell: Shell,
    functions: Vec<TestFunction>,
    split: SplitGram,
    space: Arc<ModeSpace<C64>>,
}

impl SpinorBasis {
    pub fn new(shell: &Shell, functions: &[TestFunction]) -> Result<SpinorBasis> {
        if shell.kernel.species != KernelSpecies::Dirac {
            return Err(Error::Input("a spinor basis needs the Dirac kernel".into()));
        }
        if functions.is_empty() {
            return Err(Error::Input("a spinor basis needs at least one function".into()));
        }
        for f in functions {
            f.require(Species::Spinor)?;
        }
        let specs: Vec<Spectral> = functions.iter().map(Spectral::from).collect();
        let split = shell.split_gram(&specs)?;
        let space = ModeSpace::direct_sum(Statistics::Fermi, &split.plus, &split.minus.transpose())?;
        Ok(SpinorBasis {
            shell: shell.clone(),
            functions: functions.to_vec(),
            split,
            space,
        })
    }

    pub fn n(&self) -> usize {
        self.functions.len()
    }

    pub fn shell(&self) -> &Shell {
        &self.shell
    }

    pub fn functions(&self) -> &[TestFunction] {
        &self.functions
    }

    pub fn split(&self) -> &SplitGram {
        &self.split
    }

    pub fn space(&self) -> &Arc<ModeSpace<C64>> {
        &self.space
    }

    pub fn unit(&self, i: usize) -> Coeffs {
        let mut u = vec![ZERO; self.n()];
        u[i] = c(1.0, 0.0);
        u
    }

    pub fn spinor(&self, u: &[C64]) -> Result<TestFunction> {
        let terms: Vec<(C64, &TestFunction)> = u.iter().copied().zip(self.functions.iter()).collect();
        TestFunction::combination(&terms)
    }

    /// `(U, V)` restricted to one shell, or the full product for `Both`.
    pub fn product(&self, u: &[C64], v: &[C64], freq: Frequency) -> C64 {
        let n = self.n();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += u[i].conj() * self.split.entry(i, j, freq) * v[j];
            }
        }
        acc
    }

    pub fn plus(&self, u: &[C64], v: &[C64]) -> C64 {
        self.product(u, v, Frequency::Plus)
    }

    pub fn minus(&self, u: &[C64], v: &[C64]) -> C64 {
        self.product(u, v, Frequency::Minus)
    }

    pub fn full(&self, u: &[C64], v: &[C64]) -> C64 {
        self.product(u, v, Frequency::Both)
    }

    /// Bound on `|(U, V)|` from the quadrature magnitudes.
    pub fn magnitude(&self, u: &[C64], v: &[C64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += u[i].norm() * v[j].norm() * self.split.scale(i, j, Frequency::Both);
            }
        }
        acc
    }

    fn check_len(&self, u: &[C64]) -> Result<()> {
        if u.len() != self.n() {
            return Err(Error::Input(format!("{} coefficients for a basis of {}", u.len(), self.n())));
        }
        Ok(())
    }

    pub fn psi(&self, u: &[C64]) -> Result<NormalPoly<C64>> {
        self.check_len(u)?;
        let n = self.n();
        let mut anni = vec![ZERO; 2 * n];
        let mut crea = vec![ZERO; 2 * n];
        for i in 0..n {
            crea[i] = u[i];
            anni[n + i] = u[i].conj();
        }
        NormalPoly::annihilator(&self.space, &anni).add(&NormalPoly::creator(&self.space, &crea))
    }

    pub fn psi_dag(&self, u: &[C64]) -> Result<NormalPoly<C64>> {
        Ok(self.psi(u)?.adjoint())
    }

    /// `ψ†_U ψ_V`.
    pub fn bilinear(&self, u: &[C64], v: &[C64]) -> Result<NormalPoly<C64>> {
        self.psi_dag(u)?.mul(&self.psi(v)?)
    }

    /// `Φ_U = ψ†_U ψ_U`, a multiple `(U, U)` of a projection.
    pub fn phi(&self, u: &[C64]) -> Result<NormalPoly<C64>> {
        self.check_len(u)?;
        let norm = self.full(u, u).re;
        if norm <= DEGENERATE_TOL * self.magnitude(u, u) {
            return Err(Error::Degenerate(format!("(U, U) = {norm:e} leaves the projection unnormalized")));
        }
        self.bilinear(u, u)
    }

    /// `Y(U, V) = U √(s / 2(U,U)) + i V (V,U) / √(2(V,V) s)` with the principal
    /// root `s = √((U,V)(V,U))`.
    pub fn closure_y(&self, u: &[C64], v: &[C64]) -> Result<Coeffs> {
        let (uu, vv) = (self.full(u, u), self.full(v, v));
        let (uv, vu) = (self.full(u, v), self.full(v, u));
        let s = (uv * vu).sqrt();
        let floor = DEGENERATE_TOL * self.magnitude(u, v).max(1e-300);
        if s.norm() <= floor {
            return Err(Error::Degenerate(format!(
                "(U,V)(V,U) = {:e}: the square-root branch of Y is undefined",
                (uv * vu).norm()
            )));
        }
        if uu.re <= DEGENERATE_TOL * self.magnitude(u, u) || vv.re <= DEGENERATE_TOL * self.magnitude(v, v) {
            return Err(Error::Degenerate("Y needs (U,U) > 0 and (V,V) > 0".into()));
        }
        let a = (s / (uu * 2.0)).sqrt();
        let b = I * vu / (vv * s * 2.0).sqrt();
        Ok(u.iter().zip(v).map(|(x, y)| a * x + b * y).collect())
    }
}

pub(crate) fn combine(terms: &[(C64, &[C64])]) -> Coeffs {
    let n = terms[0].1.len();
    (0..n).map(|i| terms.iter().map(|(s, u)| s * u[i]).sum()).collect()
}

/// `max |a − b|` over coefficients, relative to the larger operand.
pub(crate) fn poly_rel(a: &NormalPoly<C64>, b: &NormalPoly<C64>) -> Result<f64> {
    let d = a.max_abs_diff(b)?;
    Ok(d / a.max_abs().max(b.max_abs()).max(1e-300))
}

fn mat_rel(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

pub(crate) fn rel(a: C64, b: C64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor).max(1e-300)
}

/// Ordered pair `(U, V)` standing for `ψ†_U ψ_V`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorBilinear {
    pub left: Coeffs,
    pub right: Coeffs,
}

impl SpinorBilinear {
    pub fn new(left: Coeffs, right: Coeffs) -> SpinorBilinear {
        SpinorBilinear { left, right }
    }

    pub fn adjoint(&self) -> SpinorBilinear {
        SpinorBilinear {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    pub fn operator(&self, basis: &SpinorBasis) -> Result<NormalPoly<C64>> {
        basis.bilinear(&self.left, &self.right)
    }
}

// ---------------------------------------------------------------------------
// vacuum expectations

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub dagger: bool,
    pub spinor: Coeffs,
}

impl Factor {
    pub fn psi(u: &[C64]) -> Factor {
        Factor {
            dagger: false,
            spinor: u.to_vec(),
        }
    }

    pub fn psi_dag(u: &[C64]) -> Factor {
        Factor {
            dagger: true,
            spinor: u.to_vec(),
        }
    }
}

/// Factors of a string of bilinears `ψ†_{U_1} ψ_{V_1} ψ†_{U_2} ψ_{V_2} …`.
pub fn bilinear_string(pairs: &[(&[C64], &[C64])]) -> Vec<Factor> {
    pairs.iter().flat_map(|(u, v)| [Factor::psi_dag(u), Factor::psi(v)]).collect()
}

/// Vacuum value of an ordered string of field factors, via the operator engine.
pub fn fermionic_vev(basis: &SpinorBasis, factors: &[Factor]) -> Result<C64> {
    let daggers = factors.iter().filter(|f| f.dagger).count();
    if 2 * daggers != factors.len() {
        return Ok(ZERO);
    }
    let ops = factors
        .iter()
        .map(|f| if f.dagger { basis.psi_dag(&f.spinor) } else { basis.psi(&f.spinor) })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&NormalPoly<C64>> = ops.iter().collect();
    Ok(NormalPoly::product(basis.space(), &refs)?.vev())
}

/// Independent evaluation of the same value as a Pfaffian of pairwise
/// contractions `⟨ψ†_X ψ_Y⟩ = (X,Y)_+`, `⟨ψ_Y ψ†_X⟩ = (X,Y)_−`.
pub fn pfaffian_vev(basis: &SpinorBasis, factors: &[Factor]) -> C64 {
    let m = factors.len();
    if m % 2 == 1 {
        return ZERO;
    }
    let mut a = vec![vec![ZERO; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let (x, y) = (&factors[i], &factors[j]);
            let v = match (x.dagger, y.dagger) {
                (true, false) => basis.plus(&x.spinor, &y.spinor),
                (false, true) => basis.minus(&y.spinor, &x.spinor),
                _ => ZERO,
            };
            a[i][j] = v;
            a[j][i] = -v;
        }
    }
    pfaffian(a)
}

/// Pfaffian by skew-symmetric elimination with pivoting: each step pairs
/// row `k` with its largest partner and clears the rest of the row by a
/// congruence of unit determinant.
fn pfaffian(mut a: Vec<Vec<C64>>) -> C64 {
    let m = a.len();
    let mut pf = c(1.0, 0.0);
    for k in (0..m).step_by(2) {
        let (p, best) = ((k + 1)..m).map(|j| (j, a[k][j].norm())).fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return ZERO;
        }
        if p != k + 1 {
            a.swap(k + 1, p);
            for row in a.iter_mut() {
                row.swap(k + 1, p);
            }
            pf = -pf;
        }
        let pivot = a[k][k + 1];
        pf *= pivot;
        let tau: Vec<C64> = ((k + 2)..m).map(|i| a[k][i] / pivot).collect();
        for i in (k + 2)..m {
            for j in (k + 2)..m {
                let upd = tau[i - k - 2] * a[k + 1][j] - tau[j - k - 2] * a[k + 1][i];
                a[i][j] -= upd;
            }
        }
    }
    pf
}

fn string_operator(basis: &SpinorBasis, factors: &[Factor]) -> Result<NormalPoly<C64>> {
    let ops = factors
        .iter()
        .map(|f| if f.dagger { basis.psi_dag(&f.spinor) } else { basis.psi(&f.spinor) })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&NormalPoly<C64>> = ops.iter().collect();
    NormalPoly::product(basis.space(), &refs)
}

// ---------------------------------------------------------------------------
// algebraic checks

fn random_pair_basis<R: Rng + ?Sized>(shell: &Shell, rng: &mut R) -> Result<SpinorBasis> {
    let spec = RandomSpec::new(Species::Spinor);
    let fs: Vec<TestFunction> = (0..2).map(|_| random_test_function(&spec, rng)).collect();
    SpinorBasis::new(shell, &fs)
}

pub(crate) fn random_coeffs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Coeffs {
    (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// `Φ_U² = (U,U)Φ_U`, `⟨Φ_U⟩ = (U,U)_+`, and `⟨Φ_Uⁿ⟩ = (U,U)^{n−1}(U,U)_+`
/// for `n ≤ 5` against the dense fermionic oracle.
pub fn phi_check(basis: &SpinorBasis, u: &[C64]) -> Result<Report> {
    let mut r = Report::new("dirac-phi", 1);
    let phi = basis.phi(u)?;
    let uu = basis.full(u, u);
    let up = basis.plus(u, u);
    r.check("projection", "phi.square", poly_rel(&phi.mul(&phi)?, &phi.scale(&uu))?, ALGEBRA_TOL);
    r.check("vev", "phi.vev", rel(phi.vev(), up, 0.0), ALGEBRA_TOL);
    r.check("yes-no-probability", "phi.vev", rel(phi.scale(&(1.0 / uu)).vev(), up / uu, 0.0), ALGEBRA_TOL);
    let oracle = FockOracle::new_fermi(basis.space())?;
    let mut power = phi.clone();
    for n in 1..=5u32 {
        if n > 1 {
            power = power.mul(&phi)?;
        }
        let want = uu.powi(n as i32 - 1) * up;
        let name = format!("power-{n}");
        r.check(&format!("{name}-engine"), "phi.power", rel(power.vev(), want, 0.0), ALGEBRA_TOL);
        r.check(&format!("{name}-oracle"), "phi.power", rel(oracle.expectation(&power)?, want, 0.0), ALGEBRA_TOL);
    }
    Ok(r)
}

/// `[Φ_U, Φ_V]` against `(V,U)ψ†_Uψ_V − (U,V)ψ†_Vψ_U` and, when `(U,V) ≠ 0`,
/// against `i√((U,U)(V,V)) [Φ_{Y(V,U)} − Φ_{Y(U,V)}]`.
pub fn closure_check(basis: &SpinorBasis, u: &[C64], v: &[C64]) -> Result<Report> {
    let mut r = Report::new("dirac-closure", 1);
    let lhs = basis.bilinear(u, u)?.commutator(&basis.bilinear(v, v)?)?;
    let (uv, vu) = (basis.full(u, v), basis.full(v, u));
    let middle = basis.bilinear(u, v)?.scale(&vu).sub(&basis.bilinear(v, u)?.scale(&uv))?;
    let size = basis.magnitude(u, u) * basis.magnitude(v, v);
    let absolute = lhs.max_abs_diff(&middle)? / size.max(1e-300);
    r.check("bilinear-form", "closure.middle", poly_rel(&lhs, &middle)?.min(absolute), ALGEBRA_TOL);
    let (yuv, yvu) = match (basis.closure_y(u, v), basis.closure_y(v, u)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::Degenerate(msg)), _) | (_, Err(Error::Degenerate(msg))) => {
            r.check("degenerate-commutator", "closure.middle", lhs.max_abs() / size.max(1e-300), ALGEBRA_TOL);
            r.note(format!("Y not formed: {msg}"));
            return Ok(r);
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let scale = I * (basis.full(u, u) * basis.full(v, v)).sqrt();
    let rhs = basis.bilinear(&yvu, &yvu)?.sub(&basis.bilinear(&yuv, &yuv)?)?.scale(&scale);
    r.check("closure", "closure.y", poly_rel(&lhs, &rhs)?.min(lhs.max_abs_diff(&rhs)? / size.max(1e-300)), ALGEBRA_TOL);
    let oracle = FockOracle::new_fermi(basis.space())?;
    let (ml, mr) = (oracle.matrix_image(&lhs)?, oracle.matrix_image(&rhs)?);
    r.check("closure-oracle", "closure.y", mat_rel(&ml, &mr).min((&ml - &mr).norm() / size.max(1e-300)), ALGEBRA_TOL);
    r.note("branch: principal square root of (U,V)(V,U)");
    Ok(r)
}

/// `ψ†_Uψ_V = ¼[Φ_{U+V} − Φ_{U−V} − iΦ_{U+iV} + iΦ_{U−iV}]`.
pub fn polarization_check(basis: &SpinorBasis, u: &[C64], v: &[C64]) -> Result<Report> {
    let mut r = Report::new("dirac-polarization", 1);
    let one = c(1.0, 0.0);
    let sq = |s: C64| basis.bilinear(&combine(&[(one, u), (s, v)]), &combine(&[(one, u), (s, v)]));
    let q = c(0.25, 0.0);
    let rhs = NormalPoly::sum(
        basis.space(),
        &[(q, &sq(one)?), (-q, &sq(-one)?), (-I * q, &sq(I)?), (I * q, &sq(-I)?)],
    )?;
    r.check("polarization", "polarization", poly_rel(&basis.bilinear(u, v)?, &rhs)?, ALGEBRA_TOL);
    Ok(r)
}

/// `(ψ†_Uψ_V)ⁿ = (U,V)^{n−1} ψ†_Uψ_V`.
pub fn bilinear_power_check(basis: &SpinorBasis, u: &[C64], v: &[C64], n: u32) -> Result<Report> {
    if n == 0 {
        return Err(Error::Input("bilinear powers start at n = 1".into()));
    }
    let mut r = Report::new("dirac-bilinear-power", 1);
    let x = basis.bilinear(u, v)?;
    let want = x.scale(&basis.full(u, v).powi(n as i32 - 1));
    let got = x.pow(n)?;
    let size = (basis.magnitude(u, v).powi(n as i32 - 1) * basis.magnitude(u, u).sqrt() * basis.magnitude(v, v).sqrt()).max(1e-300);
    let res = poly_rel(&got, &want)?.min(got.max_abs_diff(&want)? / size);
    r.check(&format!("power-{n}"), "bilinear.power", res, ALGEBRA_TOL);
    Ok(r)
}

/// Canonical anticommutators and the charge-conjugation origin of the `d` Gram.
pub fn anticommutator_check(basis: &SpinorBasis, u: &[C64], v: &[C64]) -> Result<Report> {
    let mut r = Report::new("dirac-anticommutators", 1);
    let size = (basis.magnitude(u, u) * basis.magnitude(v, v)).sqrt().max(1e-300);
    let space = basis.space();
    let mixed = basis.psi_dag(u)?.anticommutator(&basis.psi(v)?)?;
    let want = NormalPoly::constant(space, basis.full(u, v));
    r.check("psi-dag-psi", "car", mixed.max_abs_diff(&want)? / size, ALGEBRA_TOL);
    r.check("psi-psi", "car", basis.psi(u)?.anticommutator(&basis.psi(v)?)?.max_abs() / size, ALGEBRA_TOL);
    r.check(
        "psi-dag-psi-dag",
        "car",
        basis.psi_dag(u)?.anticommutator(&basis.psi_dag(v)?)?.max_abs() / size,
        ALGEBRA_TOL,
    );
    r.check("two-point-plus", "car.vev", rel(basis.bilinear(u, v)?.vev(), basis.plus(u, v), size * 1e-3), ALGEBRA_TOL);
    let reversed = basis.psi(v)?.mul(&basis.psi_dag(u)?)?.vev();
    r.check("two-point-minus", "car.vev", rel(reversed, basis.minus(u, v), size * 1e-3), ALGEBRA_TOL);
    Ok(r)
}

/// `(X_i^c, X_j^c)_+ = (X_j, X_i)_−`, the identity behind the `d` Gram.
pub fn charge_conjugation_check(basis: &SpinorBasis) -> Result<Report> {
    let mut r = Report::new("dirac-charge-conjugation", basis.n());
    let gammas = &basis.shell().kernel.gammas;
    let conj: Vec<TestFunction> = basis.functions().iter().map(|f| f.charge_conjugate(gammas)).collect::<Result<_>>()?;
    let specs: Vec<Spectral> = conj.iter().map(Spectral::from).collect();
    let g = basis.shell().split_gram(&specs)?;
    let n = basis.n();
    for i in 0..n {
        for j in 0..n {
            let floor = g.scale_plus[(i, j)].max(basis.split().scale_minus[(j, i)]);
            r.record_max("d-gram", "car.charge", rel(g.plus[(i, j)], basis.split().minus[(j, i)], floor * 1e-6), ALGEBRA_TOL);
        }
    }
    Ok(r)
}

/// Three-bilinear (and a mixed-order) string: engine, Pfaffian and dense oracle.
pub fn vev_check<R: Rng + ?Sized>(basis: &SpinorBasis, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("dirac-vev", 2);
    let n = basis.n();
    let s: Vec<Coeffs> = (0..6).map(|_| random_coeffs(n, rng)).collect();
    let three = bilinear_string(&[(&s[0], &s[1]), (&s[2], &s[3]), (&s[4], &s[5])]);
    // a string with ψ before ψ† …
    let mixed = vec![
        Factor::psi(&s[0]),
        Factor::psi_dag(&s[1]),
        Factor::psi(&s[2]),
        Factor::psi_dag(&s[3]),
        Factor::psi_dag(&s[4]),
        Factor::psi(&s[5]),
    ];
    let oracle = FockOracle::new_fermi(basis.space())?;
    let size: f64 = s.iter().map(|x| basis.magnitude(x, x)).product::<f64>().sqrt();
    for (name, f) in [("three-bilinears", &three), ("mixed-order", &mixed)] {
        let engine = fermionic_vev(basis, f)?;
        let pf = pfaffian_vev(basis, f);
        let dense = oracle.expectation(&string_operator(basis, f)?)?;
        r.check(&format!("{name}-pfaffian"), "vev.wick", (engine - pf).norm() / size, ALGEBRA_TOL);
        r.check(&format!("{name}-oracle"), "vev.wick", (engine - dense).norm() / size, ALGEBRA_TOL);
    }
    // … and an unbalanced one
    let odd = vec![Factor::psi(&s[0]), Factor::psi(&s[1]), Factor::psi_dag(&s[2]), Factor::psi(&s[3])];
    r.check("charge-balance", "vev.wick", fermionic_vev(basis, &odd)?.norm(), 0.0);
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct AppendixE {
    pub decomposed: C64,
    pub direct: C64,
    /// `W` after orthogonalisation against `V`.
    pub w: Coeffs,
    pub report: Report,
}

/// `⟨ψ†_Wψ_V ψ†_Aψ_B ψ†_Vψ_W⟩` by the orthogonal/parallel decomposition and
/// by direct Wick evaluation.
pub fn appendix_e(basis: &SpinorBasis, w: &[C64], v: &[C64], a: &[C64], b: &[C64]) -> Result<AppendixE> {
    let mut report = Report::new("dirac-appendix-e", 1);
    let vv = basis.full(v, v);
    if vv.re <= DEGENERATE_TOL * basis.magnitude(v, v) {
        return Err(Error::Degenerate("(V, V) vanishes".into()));
    }
    let mut w = w.to_vec();
    let vw = basis.full(v, &w);
    if vw.norm() > 1e-10 * (vv.re * basis.full(&w, &w).re.max(0.0)).sqrt() {
        w = combine(&[(c(1.0, 0.0), &w), (-vw / vv, v)]);
        report.note("W orthogonalised against V");
    }
    let ww = basis.full(&w, &w);
    if ww.re <= DEGENERATE_TOL * basis.magnitude(&w, &w) {
        return Err(Error::Degenerate("(W, W) vanishes".into()));
    }
    let one = c(1.0, 0.0);
    let perp = |x: &[C64]| combine(&[(one, x), (-basis.full(v, x) / vv, v), (-basis.full(&w, x) / ww, &w)]);
    let par = |x: &[C64]| combine(&[(basis.full(v, x) / vv, v)]);
    let (ap, bp, apar, bpar) = (perp(a), perp(b), par(a), par(b));
    // the factorisation treats orthogonality as holding on each shell separately
    let mut hypothesis: f64 = 0.0;
    // sized by the undecomposed operand, so a vanishing component is not amplified
    for (x, origin, y) in [(v, v, &w[..]), (&ap[..], a, v), (&ap[..], a, &w[..]), (&bp[..], b, v), (&bp[..], b, &w[..])] {
        let size = (basis.magnitude(origin, origin) * basis.magnitude(y, y)).sqrt().max(1e-300);
        hypothesis = hypothesis.max(basis.plus(y, x).norm() / size).max(basis.minus(y, x).norm() / size);
    }
    report.check("shell-orthogonality", "appendix-e", hypothesis, ALGEBRA_TOL);
    let frame = fermionic_vev(basis, &bilinear_string(&[(&w, v), (v, &w)]))?;
    let decomposed = (basis.plus(&ap, &bp) + basis.full(&apar, &bpar)) * frame;
    let factors = bilinear_string(&[(&w, v), (a, b), (v, &w)]);
    let direct = fermionic_vev(basis, &factors)?;
    let wick = pfaffian_vev(basis, &factors);
    let size = basis.magnitude(&w, &w) * basis.magnitude(v, v) * (basis.magnitude(a, a) * basis.magnitude(b, b)).sqrt();
    let floor = DEGENERATE_TOL * size;
    report.check("decomposition", "appendix-e", rel(decomposed, direct, floor), ALGEBRA_TOL);
    report.check("direct-vs-pfaffian", "appendix-e", (direct - wick).norm() / size.max(1e-300), ALGEBRA_TOL);
    Ok(AppendixE {
        decomposed,
        direct,
        w,
        report,
    })
}

/// States `X ↦ ⟨Π† X Π⟩ / ⟨Π† Π⟩` with `Π = Φ_{V_n} ⋯ Φ_{V_1}`, evaluated on
/// random adjoint squares by the engine and the dense oracle.
pub fn positivity_check<R: Rng + ?Sized>(basis: &SpinorBasis, vs: &[Coeffs], trials: usize, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("dirac-state-positivity", trials);
    let space = basis.space();
    let mut pi = NormalPoly::identity(space);
    for v in vs {
        pi = basis.phi(v)?.mul(&pi)?;
    }
    let pd = pi.adjoint();
    let norm = pd.mul(&pi)?.vev();
    r.check_exceeds("normalizable", "state.positivity", norm.re, 0.0);
    let oracle = FockOracle::new_fermi(space)?;
    for _ in 0..trials {
        let y = random_poly(space, 2, 4, rng);
        let sq = y.adjoint().mul(&y)?;
        let value = NormalPoly::product(space, &[&pd, &sq, &pi])?.vev() / norm;
        let dense = oracle.expectation(&NormalPoly::product(space, &[&pd, &sq, &pi])?)? / norm;
        let size = sq.max_abs().max(1e-300);
        r.record_max("nonnegative", "state.positivity", (-value.re).max(0.0) / size, ALGEBRA_TOL);
        r.record_max("real", "state.positivity", value.im.abs() / size, ALGEBRA_TOL);
        r.record_max("oracle", "state.positivity", (value - dense).norm() / size, ALGEBRA_TOL);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// representations

/// Unitary `S` with `S γ^μ_from S† = γ^μ_to`, by averaging over the Clifford
/// group.
pub fn intertwiner(from: &DiracMatrices, to: &DiracMatrices) -> Result<Matrix4c> {
    let elements = |g: &[Matrix4c; 4]| {
        let mut out = Vec::with_capacity(16);
        for mask in 0..16u32 {
            let mut m = Matrix4c::identity();
            for (mu, gm) in g.iter().enumerate() {
                if mask & (1 << mu) != 0 {
                    m *= gm;
                }
            }
            out.push(m);
        }
        out
    };
    let (ef, et) = (elements(&from.gamma), elements(&to.gamma));
    // each element squares to ±1, so its inverse is a sign times itself
    for seed in 0..16 {
        let probe = Matrix4::from_fn(|r, cc| if (r * 4 + cc) % 16 == seed { c(1.0, 0.0) } else { ZERO });
        let mut s = Matrix4c::zeros();
        for (a, b) in et.iter().zip(&ef) {
            let inv = b.try_inverse().ok_or_else(|| Error::Input("singular gamma product".into()))?;
            s += a * probe * inv;
        }
        let gram = s * s.adjoint();
        let norm = gram[(0, 0)].re;
        if norm > 1e-8 {
            return Ok(s / c(norm.sqrt(), 0.0));
        }
    }
    Err(Error::Degenerate("no intertwiner found".into()))
}

fn map_spinors(f: &TestFunction, s: &Matrix4c) -> Result<TestFunction> {
    let packets = f
        .packets
        .iter()
        .map(|p| {
            let Payload::Spinor(u) = &p.payload else {
                return Err(Error::Species {
                    expected: "spinor".into(),
                    found: p.species(),
                });
            };
            GaussianPacket::new(p.amplitude, p.center, p.carrier, p.sigma, Payload::Spinor(s * u))
        })
        .collect::<Result<Vec<_>>>()?;
    TestFunction::new(Species::Spinor, packets)
}

/// Grams and fermionic values agree between the Dirac and chiral gamma
/// conventions once spinors are carried across by the intertwiner.
pub fn representation_check<R: Rng + ?Sized>(mass: f64, trials: usize, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("dirac-representation", trials);
    let (dirac, chiral) = (DiracMatrices::dirac(), DiracMatrices::chiral());
    let s = intertwiner(&dirac, &chiral)?;
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        worst = worst.max((s * dirac.gamma[mu] * s.adjoint() - chiral.gamma[mu]).norm());
    }
    r.check("intertwiner", "representation", worst, 1e-12);
    r.check("unitary", "representation", (s * s.adjoint() - Matrix4c::identity()).norm(), 1e-12);
    let sd = Shell::new(Kernel::dirac(mass)?.with_gammas(dirac));
    let sc = Shell::new(Kernel::dirac(mass)?.with_gammas(chiral));
    let spec = RandomSpec::new(Species::Spinor);
    for _ in 0..trials {
        let fs: Vec<TestFunction> = (0..3).map(|_| random_test_function(&spec, rng)).collect();
        let gs: Vec<TestFunction> = fs.iter().map(|f| map_spinors(f, &s)).collect::<Result<_>>()?;
        let bd = SpinorBasis::new(&sd, &fs)?;
        let bc = SpinorBasis::new(&sc, &gs)?;
        for freq in [Frequency::Plus, Frequency::Minus] {
            let (a, b) = (bd.split().matrix(freq), bc.split().matrix(freq));
            let scale = bd.split().gram(freq).spectral_norm().max(1e-300);
            r.record_max("gram", "representation", (a - b).norm() / scale, ALGEBRA_TOL);
        }
        let (w, v) = (random_coeffs(3, rng), random_coeffs(3, rng));
        let (a, b) = (random_coeffs(3, rng), random_coeffs(3, rng));
        let ed = appendix_e(&bd, &w, &v, &a, &b)?;
        let ec = appendix_e(&bc, &w, &v, &a, &b)?;
        r.record_max("six-point-vev", "representation", rel(ed.direct, ec.direct, 0.0), ALGEBRA_TOL);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// decay with separation

#[derive(Clone, Debug, PartialEq)]
pub struct SpinorDecay {
    pub rows: Vec<(f64, f64)>,
}

impl SpinorDecay {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("separation,abs_anticommutator\n");
        for (d, v) in &self.rows {
            out.push_str(&format!("{d},{v:e}\n"));
        }
        out
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new("dirac-decay", self.rows.len());
        r.check_bool("strictly-decreasing", "car.decay", self.rows.windows(2).all(|w| w[1].1 < w[0].1));
        let ratio = self.rows.last().map(|x| x.1).unwrap_or(f64::NAN) / self.rows.first().map(|x| x.1).unwrap_or(f64::NAN);
        r.check("far-ratio", "car.decay", ratio, 1e-6);
        r
    }
}

/// `|{ψ†_U, ψ_V}| = |(U, V)|` for `V` the spatial translate of `U` by `d`.
pub fn spinor_decay_scan(shell: &Shell, separations: &[f64]) -> Result<SpinorDecay> {
    let payload = Payload::Spinor(crate::geometry::Spinor::new(c(1.0, 0.0), c(0.0, 0.5), c(0.3, 0.0), c(0.0, -0.2)));
    let u = TestFunction::single(GaussianPacket::new(c(1.0, 0.0), [0.0; 4], [0.0; 4], isotropic_sigma(1.0), payload)?);
    let mut rows = Vec::with_capacity(separations.len());
    for &d in separations {
        let basis = SpinorBasis::new(shell, &[u.clone(), u.translate(&[0.0, d, 0.0, 0.0])])?;
        rows.push((d, basis.full(&basis.unit(0), &basis.unit(1)).norm()));
    }
    Ok(SpinorDecay { rows })
}

// ---------------------------------------------------------------------------
// suites

/// Projection, closure, polarization, bilinear-power and Appendix E checks
/// on `instances` random spinor pairs each.
pub fn algebra_suite<R: Rng + ?Sized>(shell: &Shell, instances: usize, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("dirac-algebra", instances);
    let fold = |r: &mut Report, sub: Report| {
        for ch in sub.checks {
            r.record_max(&format!("{}/{}", sub.suite.trim_start_matches("dirac-"), ch.name), &ch.anchor, ch.max_residual, ch.tolerance);
        }
    };
    for t in 0..instances {
        let basis = random_pair_basis(shell, rng)?;
        let (u, v) = (random_coeffs(2, rng), random_coeffs(2, rng));
        fold(&mut r, phi_check(&basis, &u)?);
        fold(&mut r, closure_check(&basis, &u, &v)?);
        fold(&mut r, polarization_check(&basis, &u, &v)?);
        for n in 1..=5 {
            fold(&mut r, bilinear_power_check(&basis, &u, &v, n)?);
        }
        fold(&mut r, anticommutator_check(&basis, &u, &v)?);
        if t < 2 {
            fold(&mut r, vev_check(&basis, rng)?);
        }
    }
    Ok(r)
}

/// Spinors orthogonal for `(·,·)_+` and `(·,·)_−` at once: solutions of
/// `G_+ x = λ (G_+ + G_−) x`, unit in the full product.
pub fn joint_frame(basis: &SpinorBasis) -> Result<Vec<Coeffs>> {
    let g = basis.split().matrix(Frequency::Both);
    let g = (&g + g.adjoint()) * c(0.5, 0.0);
    let l = g
        .cholesky()
        .ok_or_else(|| Error::Degenerate("the basis functions are linearly dependent".into()))?
        .l();
    let linv = l.try_inverse().ok_or_else(|| Error::Degenerate("singular Cholesky factor".into()))?;
    let gp = &basis.split().plus;
    let m = &linv * gp * linv.adjoint();
    let eig = ((&m + m.adjoint()) * c(0.5, 0.0)).symmetric_eigen();
    let x = linv.adjoint() * eig.eigenvectors;
    Ok((0..basis.n()).map(|j| x.column(j).iter().copied().collect()).collect())
}

/// Appendix E decomposition against direct Wick on random instances over a
/// four-function basis. `V` and `W` are drawn from the [`joint_frame`], with
/// random complex scale; `A` and `B` are arbitrary.
pub fn appendix_e_suite<R: Rng + ?Sized>(shell: &Shell, instances: usize, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("dirac-appendix-e", instances);
    let spec = RandomSpec::new(Species::Spinor);
    for _ in 0..instances {
        let fs: Vec<TestFunction> = (0..4).map(|_| random_test_function(&spec, rng)).collect();
        let basis = SpinorBasis::new(shell, &fs)?;
        let frame = joint_frame(&basis)?;
        let i = rng.random_range(0..4);
        let j = (i + rng.random_range(1..4)) % 4;
        let (sv, sw) = (random_coeffs(1, rng)[0], random_coeffs(1, rng)[0]);
        let v: Coeffs = frame[i].iter().map(|x| x * sv).collect();
        let w: Coeffs = frame[j].iter().map(|x| x * sw).collect();
        let (a, b) = (random_coeffs(4, rng), random_coeffs(4, rng));
        let e = appendix_e(&basis, &w, &v, &a, &b)?;
        for ch in e.report.checks {
            r.record_max(&ch.name, &ch.anchor, ch.max_residual, ch.tolerance);
        }
    }
    Ok(r)
}
