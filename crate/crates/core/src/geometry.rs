//! Minkowski-space conventions: metric diag(+1,−1,−1,−1), Levi-Civita symbol
//! with ε_{0123} = +1, Hodge duals on 1-, 2- and 3-forms, on-shell exterior
//! derivative and codifferential, Dirac matrices and charge conjugation.
//!
//! All tensors carry lower indices. Four-vectors (wave numbers, positions)
//! carry upper indices.
//!
//! Hodge dual: (⋆ω)_{ν…} = (1/p!) ω^{μ1…μp} ε_{μ1…μp ν…}; on 2-forms this is
//! ½ ε_{μν}{}^{αβ} b_{αβ}.
//!
//! In wave-number space the exterior derivative is `d̃ω = −i k♭ ∧ ω` and the
//! codifferential is the contraction `δ̃ω = s_p i k^μ ω_{μ…}` with s_1 = s_2 = +1
//! and s_3 = −1. These signs make δP±δ = ±(i/2)δd⋆ on 3-forms and
//! ⋆d = −δ⋆ on 2-forms hold together.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::report::Report;

pub type C64 = Complex64;
pub type FourVector = [f64; 4];
pub type Matrix4c = Matrix4<C64>;
pub type Spinor = Vector4<C64>;

pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

pub fn lower(k: &FourVector) -> FourVector {
    [k[0], -k[1], -k[2], -k[3]]
}

/// ε_{abcd} with ε_{0123} = +1.
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> i32 {
    let idx = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0;
            }
        }
    }
    let mut sign = 1;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Metric factor for raising one index (diagonal metric).
#[inline]
fn g(mu: usize) -> f64 {
    METRIC[mu]
}

// ---------------------------------------------------------------------------
// one-forms

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneForm(pub [C64; 4]);

impl OneForm {
    pub const ZERO: OneForm = OneForm([ZERO; 4]);

    pub fn conj(&self) -> OneForm {
        OneForm(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: C64) -> OneForm {
        OneForm(self.0.map(|z| z * s))
    }

    /// Minkowski pairing `conj(a)·b = g^{μν} conj(a_μ) b_ν`.
    pub fn dot_conj(&self, other: &OneForm) -> C64 {
        let mut acc = ZERO;
        for mu in 0..4 {
            acc += self.0[mu].conj() * other.0[mu] * g(mu);
        }
        acc
    }

    pub fn hodge(&self) -> ThreeForm {
        // (⋆u)_{νρσ} = u^μ ε_{μνρσ}; the sorted triple omitting μ is the only one fed by u_μ
        ThreeForm(std::array::from_fn(|m| {
            let (n, r, s) = TRIPLES[m];
            self.0[m] * (g(m) * levi_civita(m, n, r, s) as f64)
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for OneForm {
    type Output = OneForm;
    fn add(self, o: OneForm) -> OneForm {
        let mut r = self.0;
        for (a, b) in r.iter_mut().zip(o.0.iter()) {
            *a += *b;
        }
        OneForm(r)
    }
}

impl Sub for OneForm {
    type Output = OneForm;
    fn sub(self, o: OneForm) -> OneForm {
        self + o.scale(c(-1.0, 0.0))
    }
}

// ---------------------------------------------------------------------------
// bivectors (2-forms)

/// Index pairs of the six independent components of a bivector.
pub const BIVECTOR_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of `(m, n)` in [`BIVECTOR_PAIRS`] and the sign relating
/// `F_{mn}` to the stored component.
#[inline]
fn pair_index(m: usize, n: usize) -> Option<(usize, f64)> {
    let (a, b, s) = if m < n { (m, n, 1.0) } else { (n, m, -1.0) };
    let i = match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => return None,
    };
    Some((i, s))
}

/// Antisymmetric rank-2 tensor with lower indices, stored as its six
/// independent components `F_{01}, F_{02}, F_{03}, F_{12}, F_{13}, F_{23}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bivector(pub [C64; 6]);

impl Bivector {
    pub const ZERO: Bivector = Bivector([ZERO; 6]);

    pub fn from_components(v: [C64; 6]) -> Bivector {
        Bivector(v)
    }

    pub fn components(&self) -> [C64; 6] {
        self.0
    }

    /// `F_{mn}`.
    #[inline]
    pub fn get(&self, m: usize, n: usize) -> C64 {
        match pair_index(m, n) {
            Some((i, s)) => self.0[i] * s,
            None => ZERO,
        }
    }

    pub fn dense(&self) -> [[C64; 4]; 4] {
        std::array::from_fn(|m| std::array::from_fn(|n| self.get(m, n)))
    }

    /// e_μ ∧ e_ν as a lower-index tensor.
    pub fn basis(mu: usize, nu: usize) -> Bivector {
        let mut b = Bivector::ZERO;
        if let Some((i, s)) = pair_index(mu, nu) {
            b.0[i] = c(s, 0.0);
        }
        b
    }

    pub fn scale(&self, s: C64) -> Bivector {
        Bivector(self.0.map(|z| z * s))
    }

    pub fn conj(&self) -> Bivector {
        Bivector(self.0.map(|z| z.conj()))
    }

    pub fn hodge(&self) -> Bivector {
        let mut out = Bivector::ZERO;
        for (i, &(m, n)) in BIVECTOR_PAIRS.iter().enumerate() {
            let mut acc = ZERO;
            for (j, &(a, b)) in BIVECTOR_PAIRS.iter().enumerate() {
                // ½ Σ_{αβ} = Σ_{α<β}
                let e = levi_civita(a, b, m, n);
                if e != 0 {
                    acc += self.0[j] * (g(a) * g(b) * e as f64);
                }
            }
            out.0[i] = acc;
        }
        out
    }

    /// ½(1 ± i⋆) b.
    pub fn helicity(&self, sign: f64) -> Bivector {
        (*self + self.hodge().scale(c(0.0, sign))).scale(c(0.5, 0.0))
    }

    /// Contraction k^α b_{αμ}.
    #[inline]
    pub fn contract(&self, k: &FourVector) -> OneForm {
        let v = &self.0;
        // rows of the dense tensor written out: b_{αμ} for α = 0..3
        OneForm([
            -v[0] * k[1] - v[1] * k[2] - v[2] * k[3],
            v[0] * k[0] - v[3] * k[2] - v[4] * k[3],
            v[1] * k[0] + v[3] * k[1] - v[5] * k[3],
            v[2] * k[0] + v[4] * k[1] + v[5] * k[2],
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Bivector {
    type Output = Bivector;
    fn add(self, o: Bivector) -> Bivector {
        Bivector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Bivector {
    type Output = Bivector;
    fn sub(self, o: Bivector) -> Bivector {
        Bivector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for Bivector {
    type Output = Bivector;
    fn neg(self) -> Bivector {
        Bivector(self.0.map(|z| -z))
    }
}

impl Mul<C64> for Bivector {
    type Output = Bivector;
    fn mul(self, s: C64) -> Bivector {
        self.scale(s)
    }
}

// ---------------------------------------------------------------------------
// three-forms

/// Sorted index triples, listed by the index they omit.
const TRIPLES: [(usize, usize, usize); 4] = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)];

/// Totally antisymmetric rank-3 tensor stored as `ω_{123}, ω_{023}, ω_{013}, ω_{012}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeForm(pub [C64; 4]);

impl ThreeForm {
    pub const ZERO: ThreeForm = ThreeForm([ZERO; 4]);

    pub fn from_components(v: [C64; 4]) -> ThreeForm {
        ThreeForm(v)
    }

    pub fn components(&self) -> [C64; 4] {
        self.0
    }

    /// `ω_{abc}`.
    pub fn get(&self, a: usize, b: usize, cc: usize) -> C64 {
        if a == b || b == cc || a == cc {
            return ZERO;
        }
        let missing = 6 - a - b - cc;
        let mut sign = 1.0;
        if a > b {
            sign = -sign;
        }
        if a > cc {
            sign = -sign;
        }
        if b > cc {
            sign = -sign;
        }
        self.0[missing] * sign
    }

    pub fn scale(&self, s: C64) -> ThreeForm {
        ThreeForm(self.0.map(|z| z * s))
    }

    pub fn conj(&self) -> ThreeForm {
        ThreeForm(self.0.map(|z| z.conj()))
    }

    pub fn hodge(&self) -> OneForm {
        // (⋆ω)_σ = (1/3!) ω^{μνρ} ε_{μνρσ}; only the triple omitting σ contributes
        OneForm(std::array::from_fn(|s| {
            let (a, b, cc) = TRIPLES[s];
            self.0[s] * (g(a) * g(b) * g(cc) * levi_civita(a, b, cc, s) as f64)
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for ThreeForm {
    type Output = ThreeForm;
    fn add(self, o: ThreeForm) -> ThreeForm {
        ThreeForm(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

// ---------------------------------------------------------------------------
// on-shell exterior calculus

/// δ̃ on 1-forms: `i k^μ u_μ`.
pub fn codiff_one(k: &FourVector, u: &OneForm) -> C64 {
    let mut acc = ZERO;
    for m in 0..4 {
        acc += u.0[m] * k[m];
    }
    acc * I
}

/// δ̃ on 2-forms: `i k^α b_{αμ}`.
pub fn codiff_two(k: &FourVector, b: &Bivector) -> OneForm {
    b.contract(k).scale(I)
}

/// δ̃ on 3-forms: `−i k^α ω_{αμν}`.
pub fn codiff_three(k: &FourVector, w: &ThreeForm) -> Bivector {
    Bivector(BIVECTOR_PAIRS.map(|(m, n)| {
        let mut acc = ZERO;
        for a in 0..4 {
            acc += w.get(a, m, n) * k[a];
        }
        acc * (-I)
    }))
}

/// d̃ on 0-forms: `−i k♭ φ`.
pub fn exterior_zero(k: &FourVector, phi: C64) -> OneForm {
    let kl = lower(k);
    OneForm(kl.map(|x| phi * x * (-I)))
}

/// d̃ on 1-forms: `(−i k♭ ∧ u)_{μν} = −i (k_μ u_ν − k_ν u_μ)`.
pub fn exterior_one(k: &FourVector, u: &OneForm) -> Bivector {
    let kl = lower(k);
    Bivector(BIVECTOR_PAIRS.map(|(m, n)| (u.0[n] * kl[m] - u.0[m] * kl[n]) * (-I)))
}

/// d̃ on 2-forms: `−i (k_μ b_{νρ} − k_ν b_{μρ} + k_ρ b_{μν})`.
pub fn exterior_two(k: &FourVector, b: &Bivector) -> ThreeForm {
    let kl = lower(k);
    ThreeForm(TRIPLES.map(|(m, n, r)| (b.get(n, r) * kl[m] - b.get(m, r) * kl[n] + b.get(m, n) * kl[r]) * (-I)))
}
/// The EM pre-inner-product integrand `−conj(k^α f_{αμ}) g^{μν} k^β h_{βν}`.
pub fn bivector_kernel(k: &FourVector, f: &Bivector, h: &Bivector) -> C64 {
    -f.contract(k).dot_conj(&h.contract(k))
}

/// A random null vector with positive time component.
pub fn random_null_vector<R: Rng + ?Sized>(rng: &mut R) -> FourVector {
    let v: [f64; 3] = [
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    ];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [n, v[0], v[1], v[2]]
}

pub fn random_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_bivector<R: Rng + ?Sized>(rng: &mut R) -> Bivector {
    Bivector::from_components(std::array::from_fn(|_| random_c64(rng)))
}

pub fn random_one_form<R: Rng + ?Sized>(rng: &mut R) -> OneForm {
    OneForm(std::array::from_fn(|_| random_c64(rng)))
}

pub fn random_three_form<R: Rng + ?Sized>(rng: &mut R) -> ThreeForm {
    ThreeForm::from_components(std::array::from_fn(|_| random_c64(rng)))
}

pub fn random_spinor<R: Rng + ?Sized>(rng: &mut R) -> Spinor {
    Spinor::from_fn(|_, _| random_c64(rng))
}

// ---------------------------------------------------------------------------
// Dirac matrices

/// Gaussian-integer matrix entries, so Clifford identities can be checked exactly.
type ExactMatrix = [[(i64, i64); 4]; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Dirac,
    Chiral,
}

#[derive(Clone, Debug)]
pub struct DiracMatrices {
    pub representation: Representation,
    pub gamma: [Matrix4c; 4],
    pub conjugator: Matrix4c,
    pub gamma5: Matrix4c,
    /// Phase `η` with (u^c)^c = η u.
    pub double_conjugation_phase: C64,
    exact: Option<[ExactMatrix; 4]>,
}

fn sigma_blocks() -> [[[(i64, i64); 2]; 2]; 3] {
    [
        [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],
        [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],
        [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],
    ]
}

fn exact_gammas(rep: Representation) -> [ExactMatrix; 4] {
    let mut gm = [[[(0i64, 0i64); 4]; 4]; 4];
    match rep {
        Representation::Dirac => {
            for a in 0..4 {
                gm[0][a][a] = if a < 2 { (1, 0) } else { (-1, 0) };
            }
        }
        Representation::Chiral => {
            for a in 0..2 {
                gm[0][a][a + 2] = (1, 0);
                gm[0][a + 2][a] = (1, 0);
            }
        }
    }
    let s = sigma_blocks();
    for i in 0..3 {
        for a in 0..2 {
            for b in 0..2 {
                let (re, im) = s[i][a][b];
                gm[i + 1][a][b + 2] = (re, im);
                gm[i + 1][a + 2][b] = (-re, -im);
            }
        }
    }
    gm
}

fn to_matrix(m: &ExactMatrix) -> Matrix4c {
    Matrix4c::from_fn(|r, cc| c(m[r][cc].0 as f64, m[r][cc].1 as f64))
}

fn exact_mul(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    let mut out = [[(0i64, 0i64); 4]; 4];
    for r in 0..4 {
        for cc in 0..4 {
            let mut re = 0;
            let mut im = 0;
            for k in 0..4 {
                let (ar, ai) = a[r][k];
                let (br, bi) = b[k][cc];
                re += ar * br - ai * bi;
                im += ar * bi + ai * br;
            }
            out[r][cc] = (re, im);
        }
    }
    out
}

impl DiracMatrices {
    pub fn new(rep: Representation) -> DiracMatrices {
        let exact = exact_gammas(rep);
        let gamma = [
            to_matrix(&exact[0]),
            to_matrix(&exact[1]),
            to_matrix(&exact[2]),
            to_matrix(&exact[3]),
        ];
        let conjugator = gamma[2] * gamma[0] * I;
        let gamma5 = gamma[0] * gamma[1] * gamma[2] * gamma[3] * I;
        let mut set = DiracMatrices {
            representation: rep,
            gamma,
            conjugator,
            gamma5,
            double_conjugation_phase: c(1.0, 0.0),
            exact: Some(exact),
        };
        // (u^c)^c = C γ0ᵀ conj(C γ0ᵀ) u; the product is a multiple of the identity
        let m = set.conjugation_matrix();
        let twice = m * m.map(|z| z.conj());
        set.double_conjugation_phase = twice[(0, 0)];
        set
    }

    pub fn dirac() -> DiracMatrices {
        Self::new(Representation::Dirac)
    }

    pub fn chiral() -> DiracMatrices {
        Self::new(Representation::Chiral)
    }

    /// Replaces γ^mu by an arbitrary matrix; exact checks are disabled.
    pub fn with_gamma(mut self, mu: usize, m: Matrix4c) -> DiracMatrices {
        self.gamma[mu] = m;
        self.exact = None;
        self
    }

    /// `k·γ = k^0 γ^0 − k^i γ^i` for upper-index `k`.
    pub fn slash(&self, k: &FourVector) -> Matrix4c {
        self.gamma[0] * c(k[0], 0.0)
            - self.gamma[1] * c(k[1], 0.0)
            - self.gamma[2] * c(k[2], 0.0)
            - self.gamma[3] * c(k[3], 0.0)
    }

    /// `C γ0ᵀ`, so that u^c = C γ0ᵀ conj(u) = C (ū)ᵀ.
    pub fn conjugation_matrix(&self) -> Matrix4c {
        self.conjugator * self.gamma[0].transpose()
    }

    pub fn charge_conjugate(&self, u: &Spinor) -> Spinor {
        self.conjugation_matrix() * u.map(|z| z.conj())
    }

    /// `ū a v = u† γ0 a v`.
    pub fn bar_sandwich(&self, u: &Spinor, a: &Matrix4c, v: &Spinor) -> C64 {
        (u.adjoint() * self.gamma[0] * a * v)[(0, 0)]
    }

    /// Dirac adjoint ū = u†γ0 as a row.
    pub fn adjoint(&self, u: &Spinor) -> nalgebra::RowVector4<C64> {
        u.adjoint() * self.gamma[0]
    }

    fn residuals(&self) -> Vec<(String, f64)> {
        let one = Matrix4c::identity();
        let mut out = Vec::new();
        let mut anti: f64 = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                let ac = self.gamma[m] * self.gamma[n] + self.gamma[n] * self.gamma[m];
                let target = if m == n { one * c(2.0 * g(m), 0.0) } else { Matrix4c::zeros() };
                anti = anti.max((ac - target).norm());
            }
        }
        out.push(("anticommutator".to_string(), anti));
        let mut conj: f64 = 0.0;
        for m in 0..4 {
            let lhs = self.conjugator * self.gamma[m];
            let rhs = -self.gamma[m].transpose() * self.conjugator;
            conj = conj.max((lhs - rhs).norm());
        }
        out.push(("charge-conjugation".to_string(), conj));
        let mut herm = (self.gamma[0].adjoint() - self.gamma[0]).norm();
        for m in 1..4 {
            herm = herm.max((self.gamma[m].adjoint() + self.gamma[m]).norm());
        }
        out.push(("hermiticity".to_string(), herm));
        out
    }

    fn exact_anticommutators_hold(&self) -> Option<bool> {
        let ex = self.exact.as_ref()?;
        for m in 0..4 {
            for n in 0..4 {
                let a = exact_mul(&ex[m], &ex[n]);
                let b = exact_mul(&ex[n], &ex[m]);
                for r in 0..4 {
                    for cc in 0..4 {
                        let s = (a[r][cc].0 + b[r][cc].0, a[r][cc].1 + b[r][cc].1);
                        let t = if m == n && r == cc { (2 * g(m) as i64, 0) } else { (0, 0) };
                        if s != t {
                            return Some(false);
                        }
                    }
                }
            }
        }
        Some(true)
    }
}

/// Checks every Dirac-matrix and Hodge invariant; any residual above 1e−14
/// is a [`Error::Convention`].
pub fn verify_clifford_suite(set: &DiracMatrices) -> Result<Report> {
    const TOL: f64 = 1e-14;
    let mut report = Report::new(
        match set.representation {
            Representation::Dirac => "geometry-dirac",
            Representation::Chiral => "geometry-chiral",
        },
        1,
    );
    for (name, r) in set.residuals() {
        report.check(&name, "geometry.clifford", r, TOL);
    }
    if let Some(ok) = set.exact_anticommutators_hold() {
        report.check_bool("anticommutator-exact", "geometry.clifford", ok);
    }
    let ac01 = (set.gamma[0] * set.gamma[1] + set.gamma[1] * set.gamma[0]).norm();
    report.check("gamma0-gamma1-anticommute", "dirac.kernel", ac01, TOL);
    let mut hh: f64 = 0.0;
    for &(m, n) in BIVECTOR_PAIRS.iter() {
        let b = Bivector::basis(m, n);
        hh = hh.max((b.hodge().hodge() + b).max_abs());
    }
    report.check("hodge-anti-involution", "em.hodge", hh, TOL);
    let phase = set.double_conjugation_phase;
    report.check("double-conjugation-unit-phase", "dirac.charge-conjugation", (phase.norm() - 1.0).abs(), TOL);
    report.note(format!(
        "double charge conjugation phase = ({}, {})",
        phase.re, phase.im
    ));
    if let Some(c) = report.worst_failure() {
        return Err(Error::Convention {
            check: c.name.clone(),
            residual: c.max_residual,
            tolerance: c.tolerance,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent index-loop Hodge: full double sum with explicit raising.
    fn hodge_oracle(b: &Bivector) -> [[C64; 4]; 4] {
        let d = b.dense();
        let mut out = [[ZERO; 4]; 4];
        for m in 0..4 {
            for n in 0..4 {
                let mut acc = ZERO;
                for a in 0..4 {
                    for bb in 0..4 {
                        let raised = d[a][bb] * METRIC[a] * METRIC[bb];
                        acc += raised * levi_civita(m, n, a, bb) as f64 * 0.5;
                    }
                }
                out[m][n] = acc;
            }
        }
        out
    }

    #[test]
    fn hodge_basis_e01_maps_to_e23() {
        let b = Bivector::basis(0, 1);
        let h = b.hodge();
        assert_eq!(h.dense(), hodge_oracle(&b));
        // b^{01} = −1, ε_{2301} = +1  ⇒ (⋆b)_{23} = −1
        assert_eq!(h.get(2, 3), c(-1.0, 0.0));
        assert_eq!(h.get(3, 2), c(1.0, 0.0));
        for &(m, n) in BIVECTOR_PAIRS.iter() {
            if (m, n) != (2, 3) {
                assert_eq!(h.get(m, n), ZERO);
            }
        }
    }

    #[test]
    fn compact_contraction_matches_dense_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_bivector(&mut rng);
        let k: FourVector = [0.3, -1.1, 0.7, 2.0];
        let d = b.dense();
        let v = b.contract(&k);
        for mu in 0..4 {
            let mut acc = ZERO;
            for a in 0..4 {
                acc += d[a][mu] * k[a];
            }
            assert!((acc - v.0[mu]).norm() < 1e-15);
        }
        let w = random_three_form(&mut rng);
        for (a, b2, c3) in [(0, 1, 2), (2, 1, 0), (3, 0, 1), (1, 3, 2)] {
            assert_eq!(w.get(a, b2, c3), -w.get(b2, a, c3));
            assert_eq!(w.get(a, b2, c3), w.get(b2, c3, a));
        }
    }

    #[test]
    fn hodge_is_anti_involution_and_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let b = random_bivector(&mut rng);
            assert!((b.hodge().hodge() + b).max_abs() < 1e-15);
            let o = hodge_oracle(&b);
            let h = b.hodge();
            for (m, n) in BIVECTOR_PAIRS {
                assert!((h.get(m, n) - o[m][n]).norm() < 1e-15);
            }
        }
        assert_eq!(Bivector::ZERO.hodge(), Bivector::ZERO);
    }

    #[test]
    fn odd_form_hodge_squares_to_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_one_form(&mut rng);
        let back = u.hodge().hodge();
        assert!((back - u).max_abs() < 1e-15);
    }

    #[test]
    fn pointwise_hodge_kernel_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k = random_null_vector(&mut rng);
            let f = random_bivector(&mut rng);
            let h = random_bivector(&mut rng);
            let lhs = bivector_kernel(&k, &f.hodge(), &h);
            let rhs = -bivector_kernel(&k, &f, &h.hodge());
            let scale = bivector_kernel(&k, &f, &f).norm().max(bivector_kernel(&k, &h, &h).norm());
            assert!((lhs - rhs).norm() <= 1e-12 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn bivector_kernel_is_positive_on_null_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let k = random_null_vector(&mut rng);
            let f = random_bivector(&mut rng);
            let v = bivector_kernel(&k, &f, &f);
            assert!(v.re >= -1e-13 && v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn exterior_calculus_is_nilpotent_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k = random_null_vector(&mut rng);
            let u1 = random_one_form(&mut rng);
            let u3 = random_three_form(&mut rng);
            let f = random_bivector(&mut rng);
            assert!(exterior_two(&k, &exterior_one(&k, &u1)).max_abs() < 1e-13);
            assert!(codiff_two(&k, &codiff_three(&k, &u3)).max_abs() < 1e-13);
            // δP±δ u3 = ±(i/2) δ d ⋆ u3
            for sign in [1.0, -1.0] {
                let lhs = codiff_two(&k, &codiff_three(&k, &u3).helicity(sign));
                let rhs = codiff_two(&k, &exterior_one(&k, &u3.hodge())).scale(c(0.0, 0.5 * sign));
                assert!((lhs - rhs).max_abs() < 1e-12);
            }
            // ⋆d = −δ⋆ on 2-forms
            let lhs = exterior_two(&k, &f).hodge();
            let rhs = codiff_two(&k, &f.hodge()).scale(c(-1.0, 0.0));
            assert!((lhs - rhs).max_abs() < 1e-12);
        }
    }

    #[test]
    fn clifford_suite_passes_in_both_representations() {
        for set in [DiracMatrices::dirac(), DiracMatrices::chiral()] {
            let r = verify_clifford_suite(&set).unwrap();
            assert!(r.passed());
            assert!((set.double_conjugation_phase - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn corrupted_gamma_is_rejected() {
        let set = DiracMatrices::dirac();
        let bad = set.gamma[1] * c(1.0 + 1e-6, 0.0);
        let err = verify_clifford_suite(&set.with_gamma(1, bad)).unwrap_err();
        assert!(matches!(err, Error::Convention { .. }));
    }

    #[test]
    fn charge_conjugation_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for set in [DiracMatrices::dirac(), DiracMatrices::chiral()] {
            for _ in 0..10_000 {
                let u = random_spinor(&mut rng);
                let v = random_spinor(&mut rng);
                let uc = set.charge_conjugate(&u);
                let vc = set.charge_conjugate(&v);
                for mu in 0..4 {
                    let lhs = set.bar_sandwich(&uc, &set.gamma[mu], &vc);
                    let rhs = set.bar_sandwich(&v, &set.gamma[mu], &u);
                    assert!((lhs - rhs).norm() < 1e-13);
                }
                let one = Matrix4c::identity();
                let lhs = set.bar_sandwich(&uc, &one, &vc);
                let rhs = -set.bar_sandwich(&v, &one, &u);
                assert!((lhs - rhs).norm() < 1e-13);
            }
            assert_eq!(set.charge_conjugate(&Spinor::zeros()), Spinor::zeros());
        }
    }
}
