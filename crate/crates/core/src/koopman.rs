//! Koopman–von Neumann lift of finite-dimensional classical mechanics.
//!
//! A phase-space polynomial `A(q, p)` acts on observables in two ways: by
//! multiplication, `Y_A`, and through the Poisson bracket, `Z_A = {A, ·}`.
//! Writing `q_i = (a_i + a_i†)/√2`, `∂/∂q_i = (a_i − a_i†)/√2` and likewise
//! `p_i`, `∂/∂p_i` with `b_i`, both become normal-ordered polynomials in `2N`
//! orthonormal bosonic modes (`a_i` is mode `i`, `b_i` is mode `N + i`).
//! Coefficients live in `Q(√2)[i]`, so the lift identities are checked with
//! no tolerance.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{c, C64};
use crate::oscillator::{permanent, random_poly, FockOracle, ModeSpace, NormalPoly, Statistics};
use crate::report::Report;
use crate::scalar::{Coeff, ExactComplex, QSqrt2};

/// Real polynomial in `q_1 … q_N, p_1 … p_N` with rational coefficients.
/// Exponent vectors hold the `q` powers first, then the `p` powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasePolynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl PhasePolynomial {
    pub fn zero(n: usize) -> PhasePolynomial {
        PhasePolynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, k: BigRational) -> PhasePolynomial {
        Self::monomial(n, vec![0; 2 * n], k)
    }

    pub fn one(n: usize) -> PhasePolynomial {
        Self::constant(n, BigRational::one())
    }

    pub fn monomial(n: usize, exponents: Vec<u32>, k: BigRational) -> PhasePolynomial {
        assert_eq!(exponents.len(), 2 * n, "exponent vector length");
        let mut out = Self::zero(n);
        out.accumulate(exponents, k);
        out
    }

    fn unit(n: usize, slot: usize) -> PhasePolynomial {
        let mut e = vec![0; 2 * n];
        e[slot] = 1;
        Self::monomial(n, e, BigRational::one())
    }

    pub fn q(n: usize, i: usize) -> PhasePolynomial {
        Self::unit(n, i)
    }

    pub fn p(n: usize, i: usize) -> PhasePolynomial {
        Self::unit(n, n + i)
    }

    /// `½ (q·q + p·p)`.
    pub fn harmonic(n: usize) -> PhasePolynomial {
        let mut h = Self::zero(n);
        for slot in 0..2 * n {
            let mut e = vec![0; 2 * n];
            e[slot] = 2;
            h.accumulate(e, ratio(1, 2));
        }
        h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn accumulate(&mut self, e: Vec<u32>, k: BigRational) {
        if k.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += k;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &PhasePolynomial) -> PhasePolynomial {
        assert_eq!(self.n, other.n, "phase-space dimension");
        let mut out = self.clone();
        for (e, k) in &other.terms {
            out.accumulate(e.clone(), k.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> PhasePolynomial {
        let mut out = Self::zero(self.n);
        for (e, v) in &self.terms {
            out.accumulate(e.clone(), v * k);
        }
        out
    }

    pub fn sub(&self, other: &PhasePolynomial) -> PhasePolynomial {
        self.add(&other.scale(&ratio(-1, 1)))
    }

    pub fn mul(&self, other: &PhasePolynomial) -> PhasePolynomial {
        assert_eq!(self.n, other.n, "phase-space dimension");
        let mut out = Self::zero(self.n);
        for (ea, ka) in &self.terms {
            for (eb, kb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.accumulate(e, ka * kb);
            }
        }
        out
    }

    fn derivative(&self, slot: usize) -> PhasePolynomial {
        let mut out = Self::zero(self.n);
        for (e, k) in &self.terms {
            if e[slot] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[slot] -= 1;
            out.accumulate(d, k * BigRational::from_integer(BigInt::from(e[slot])));
        }
        out
    }

    pub fn d_dq(&self, i: usize) -> PhasePolynomial {
        self.derivative(i)
    }

    pub fn d_dp(&self, i: usize) -> PhasePolynomial {
        self.derivative(self.n + i)
    }

    /// Value at a phase-space point `(q, p)`.
    pub fn eval(&self, q: &[f64], p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, k)| {
                let mono: f64 = (0..self.n).map(|i| q[i].powi(e[i] as i32) * p[i].powi(e[self.n + i] as i32)).product();
                k.to_f64().unwrap_or(f64::NAN) * mono
            })
            .sum()
    }

    /// `terms` random monomials of total degree ≤ `max_degree`, with
    /// coefficients `±k/d`, `k ≤ 5`, `d ≤ 4`.
    pub fn random<R: Rng + ?Sized>(n: usize, max_degree: u32, terms: usize, rng: &mut R) -> PhasePolynomial {
        let mut out = Self::zero(n);
        for _ in 0..terms {
            let mut e = vec![0u32; 2 * n];
            let degree = rng.random_range(0..=max_degree);
            for _ in 0..degree {
                e[rng.random_range(0..2 * n)] += 1;
            }
            let num = rng.random_range(1..=5) * if rng.random_bool(0.5) { 1 } else { -1 };
            out.accumulate(e, ratio(num, rng.random_range(1..=4)));
        }
        out
    }
}

/// `{A, B} = Σ_i ∂A/∂q_i ∂B/∂p_i − ∂A/∂p_i ∂B/∂q_i`.
pub fn poisson_bracket(a: &PhasePolynomial, b: &PhasePolynomial) -> PhasePolynomial {
    let mut out = PhasePolynomial::zero(a.n);
    for i in 0..a.n {
        out = out.add(&a.d_dq(i).mul(&b.d_dp(i))).sub(&a.d_dp(i).mul(&b.d_dq(i)));
    }
    out
}

fn exact(k: &BigRational) -> ExactComplex {
    ExactComplex::real(QSqrt2::rational(k.clone()))
}

/// The operator algebra for `N` degrees of freedom.
#[derive(Clone, Debug)]
pub struct KvN {
    n: usize,
    space: Arc<ModeSpace<ExactComplex>>,
}

impl KvN {
    pub fn new(n: usize) -> KvN {
        KvN {
            n,
            space: ModeSpace::identity(Statistics::Bose, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &Arc<ModeSpace<ExactComplex>> {
        &self.space
    }

    pub fn a(&self, i: usize) -> NormalPoly<ExactComplex> {
        NormalPoly::annihilate(&self.space, i)
    }

    pub fn a_dag(&self, i: usize) -> NormalPoly<ExactComplex> {
        NormalPoly::create(&self.space, i)
    }

    pub fn b(&self, i: usize) -> NormalPoly<ExactComplex> {
        NormalPoly::annihilate(&self.space, self.n + i)
    }

    pub fn b_dag(&self, i: usize) -> NormalPoly<ExactComplex> {
        NormalPoly::create(&self.space, self.n + i)
    }

    /// `(x + s·x†)/√2` for mode `mode`.
    fn quadrature(&self, mode: usize, sign: i64) -> NormalPoly<ExactComplex> {
        let lower = NormalPoly::annihilate(&self.space, mode);
        let upper = NormalPoly::create(&self.space, mode).scale(&ExactComplex::from_i64(sign));
        lower.add(&upper).expect("same space").scale(&ExactComplex::inv_sqrt2())
    }

    /// Multiplication by `q_i` (slot `i`) or `p_i` (slot `N + i`).
    fn coordinate(&self, slot: usize) -> NormalPoly<ExactComplex> {
        self.quadrature(slot, 1)
    }

    /// `∂/∂q_i` (slot `i`) or `∂/∂p_i` (slot `N + i`).
    fn derivative(&self, slot: usize) -> NormalPoly<ExactComplex> {
        self.quadrature(slot, -1)
    }

    fn check(&self, a: &PhasePolynomial) -> Result<()> {
        if a.n != self.n {
            return Err(Error::Input(format!("polynomial over {} degrees of freedom, algebra over {}", a.n, self.n)));
        }
        Ok(())
    }

    /// `Y_A`: multiplication by `A`.
    pub fn lift_y(&self, a: &PhasePolynomial) -> Result<NormalPoly<ExactComplex>> {
        self.check(a)?;
        let coords: Vec<_> = (0..2 * self.n).map(|s| self.coordinate(s)).collect();
        let mut out = NormalPoly::zero(&self.space);
        for (e, k) in a.terms() {
            let mut term = NormalPoly::constant(&self.space, exact(k));
            for (slot, &power) in e.iter().enumerate() {
                if power > 0 {
                    term = term.mul(&coords[slot].pow(power)?)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `Z_A = Σ_i Y_{∂A/∂q_i} ∂/∂p_i − Y_{∂A/∂p_i} ∂/∂q_i`.
    pub fn lift_z(&self, a: &PhasePolynomial) -> Result<NormalPoly<ExactComplex>> {
        self.check(a)?;
        let n = self.n;
        let mut out = NormalPoly::zero(&self.space);
        for i in 0..n {
            let forward = self.lift_y(&a.d_dq(i))?.mul(&self.derivative(n + i))?;
            let back = self.lift_y(&a.d_dp(i))?.mul(&self.derivative(i))?;
            out = out.add(&forward)?.sub(&back)?;
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// exact lift identities

/// `[Y_A, Y_B] = 0`, `[Z_A, Y_B] = Y_{{A,B}}`, `[Z_A, Z_B] = Z_{{A,B}}`,
/// `Y_{AB} = Y_A Y_B` and the Hermiticity of both lifts, all as exact
/// canonical equalities.
pub fn lift_check(kvn: &KvN, a: &PhasePolynomial, b: &PhasePolynomial) -> Result<Report> {
    let mut r = Report::new("koopman-lift", 1);
    let (ya, yb, za, zb) = (kvn.lift_y(a)?, kvn.lift_y(b)?, kvn.lift_z(a)?, kvn.lift_z(b)?);
    let bracket = poisson_bracket(a, b);
    r.check_bool("y-y-commute", "kvn.relations", ya.commutator(&yb)?.is_zero());
    r.check_bool("z-y-bracket", "kvn.relations", za.commutator(&yb)? == kvn.lift_y(&bracket)?);
    r.check_bool("z-z-bracket", "kvn.relations", za.commutator(&zb)? == kvn.lift_z(&bracket)?);
    r.check_bool("y-product", "kvn.relations", ya.mul(&yb)? == kvn.lift_y(&a.mul(b))?);
    r.check_bool("y-hermitian", "kvn.involution", ya.adjoint() == ya);
    r.check_bool("z-antihermitian", "kvn.involution", za.adjoint() == za.neg());
    Ok(r)
}

/// Bilinearity, antisymmetry and the Jacobi identity of the bracket.
pub fn bracket_check(a: &PhasePolynomial, b: &PhasePolynomial, c: &PhasePolynomial) -> Report {
    let mut r = Report::new("koopman-poisson", 1);
    let pb = poisson_bracket;
    r.check_bool("antisymmetry", "kvn.poisson", pb(a, b) == pb(b, a).scale(&ratio(-1, 1)));
    let k = ratio(3, 7);
    r.check_bool("bilinearity", "kvn.poisson", pb(&a.add(&c.scale(&k)), b) == pb(a, b).add(&pb(c, b).scale(&k)));
    let jacobi = pb(a, &pb(b, c)).add(&pb(b, &pb(c, a))).add(&pb(c, &pb(a, b)));
    r.check_bool("jacobi", "kvn.poisson", jacobi.is_zero());
    r.check_bool("leibniz", "kvn.poisson", pb(a, &b.mul(c)) == pb(a, b).mul(c).add(&b.mul(&pb(a, c))));
    r
}

/// Lift identities on random pairs of each degree `1 ..= max_degree`,
/// and the bracket axioms on random cubic triples.
pub fn lift_suite<R: Rng + ?Sized>(n: usize, trials: usize, max_degree: u32, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("koopman-lift", trials * max_degree as usize);
    let kvn = KvN::new(n);
    for degree in 1..=max_degree {
        for _ in 0..trials {
            let (a, b) = (PhasePolynomial::random(n, degree, 3, rng), PhasePolynomial::random(n, degree, 3, rng));
            for ch in lift_check(&kvn, &a, &b)?.checks {
                r.record_max(&ch.name, &ch.anchor, ch.max_residual, ch.tolerance);
            }
        }
    }
    for _ in 0..trials {
        let t: Vec<_> = (0..3).map(|_| PhasePolynomial::random(n, 3, 3, rng)).collect();
        for ch in bracket_check(&t[0], &t[1], &t[2]).checks {
            r.record_max(&ch.name, &ch.anchor, ch.max_residual, ch.tolerance);
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// harmonic oscillator

#[derive(Clone, Debug)]
pub struct HarmonicGenerators {
    pub y_h: NormalPoly<ExactComplex>,
    pub z_h: NormalPoly<ExactComplex>,
    /// `c†·c − d†·d` with `c = (a + ib)/√2`, `d = (a − ib)/√2`.
    pub h_c: NormalPoly<ExactComplex>,
    pub report: Report,
}

/// `Σ_i x_i† y_i` for mode-index maps `x`, `y`.
fn dot(kvn: &KvN, x: impl Fn(usize) -> NormalPoly<ExactComplex>, y: impl Fn(usize) -> NormalPoly<ExactComplex>) -> Result<NormalPoly<ExactComplex>> {
    let mut out = NormalPoly::zero(kvn.space());
    for i in 0..kvn.n() {
        out = out.add(&x(i).mul(&y(i))?)?;
    }
    Ok(out)
}

/// `c†·c − d†·d` with `c = (a + ε i b)/√2`, `d = (a − ε i b)/√2`.
fn number_difference(kvn: &KvN, orientation: i64) -> Result<NormalPoly<ExactComplex>> {
    let h = ExactComplex::inv_sqrt2();
    let ib = ExactComplex::gaussian(0, orientation);
    let mode = |i: usize, s: i64| -> Result<NormalPoly<ExactComplex>> {
        kvn.a(i).add(&kvn.b(i).scale(&(ib.clone() * ExactComplex::from_i64(s))))
            .map(|x| x.scale(&h))
    };
    let mut out = NormalPoly::zero(kvn.space());
    for i in 0..kvn.n() {
        let (ci, di) = (mode(i, 1)?, mode(i, -1)?);
        out = out.add(&ci.adjoint().mul(&ci)?)?.sub(&di.adjoint().mul(&di)?)?;
    }
    Ok(out)
}

/// `Y_H`, `Z_H` for `H = ½(q·q + p·p)` and their algebraic properties.
///
/// The lift gives `Z_H = a†·b − a·b†`, whose flow moves `q` to
/// `q cos t − p sin t`. The generator written as `a·b† − a†·b` is its
/// negative; it equals `i(c†c − d†d)` for `c = (a + ib)/√2`. The lifted `Z_H`
/// equals `i(c†c − d†d)` when the complex structure is oriented the other
/// way, `c = (a − ib)/√2`. Both identities are checked.
pub fn harmonic_generators(n: usize) -> Result<HarmonicGenerators> {
    let kvn = KvN::new(n);
    let h = PhasePolynomial::harmonic(n);
    let y_h = kvn.lift_y(&h)?;
    let z_h = kvn.lift_z(&h)?;
    let mut r = Report::new("koopman-harmonic", 1);
    r.check_bool("y-hermitian", "kvn.harmonic", y_h.adjoint() == y_h);
    r.check_bool("z-antihermitian", "kvn.harmonic", z_h.adjoint() == z_h.neg());
    // ¼[(a + a†)·(a + a†) + (b + b†)·(b + b†)]
    let quarter = ExactComplex::from_ratio(1, 4);
    let mut y_direct = NormalPoly::zero(kvn.space());
    for i in 0..n {
        let x = kvn.a(i).add(&kvn.a_dag(i))?;
        let y = kvn.b(i).add(&kvn.b_dag(i))?;
        y_direct = y_direct.add(&x.mul(&x)?.add(&y.mul(&y)?)?.scale(&quarter))?;
    }
    r.check_bool("y-quadrature-form", "kvn.harmonic", y_h == y_direct);
    let lifted = dot(&kvn, |i| kvn.a_dag(i), |i| kvn.b(i))?.sub(&dot(&kvn, |i| kvn.b_dag(i), |i| kvn.a(i))?)?;
    r.check_bool("z-ladder-form", "kvn.harmonic", z_h == lifted);
    let written = dot(&kvn, |i| kvn.b_dag(i), |i| kvn.a(i))?.sub(&dot(&kvn, |i| kvn.a_dag(i), |i| kvn.b(i))?)?;
    let i_unit = ExactComplex::imag_unit();
    let h_c = number_difference(&kvn, 1)?;
    r.check_bool("c-d-written-generator", "kvn.harmonic", written == h_c.scale(&i_unit));
    r.check_bool("c-d-lifted-generator", "kvn.harmonic", z_h == number_difference(&kvn, -1)?.scale(&i_unit));
    r.check_bool("orientation", "kvn.harmonic", written == z_h.neg());
    if n == 1 {
        r.check_bool("two-terms", "kvn.harmonic", z_h.len() == 2);
    }
    r.note("the engineering imaginary is the coefficient field's i; Z_H from the lift is −i(c†c − d†d) for c = (a + ib)/√2");
    Ok(HarmonicGenerators { y_h, z_h, h_c, report: r })
}

/// Eigenvalues of `c†c − d†d` on a truncated Fock space; the operator
/// conserves total occupation, so the truncation is exact.
pub fn h_c_spectrum(n: usize, cutoff: usize) -> Result<Vec<f64>> {
    let g = harmonic_generators(n)?;
    let numeric = g.h_c.space().to_numeric()?;
    let oracle = FockOracle::new(&numeric, cutoff)?;
    let m = oracle.matrix_image(&g.h_c.to_numeric(&numeric)?)?;
    let mut ev: Vec<f64> = ((&m + m.adjoint()) * c(0.5, 0.0)).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

// ---------------------------------------------------------------------------
// statistical state

const STATE_TOL: f64 = 1e-11;

/// Creation monomials `a†^α b†^β` with `|α| + |β| ≤ max_degree`, as sorted
/// mode words.
fn creation_words(modes: usize, max_degree: usize) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for w in &frontier {
            let start = w.last().copied().unwrap_or(0);
            for m in start..modes as u16 {
                let mut x: Vec<u16> = w.clone();
                x.push(m);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// The vacuum state on random operators, and the GNS Gram of creation
/// monomials up to degree 3.
pub fn gns_state_suite<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("koopman-gns", trials);
    let space: Arc<ModeSpace<C64>> = ModeSpace::identity(Statistics::Bose, 2 * n);
    let one = NormalPoly::identity(&space);
    r.check("unit", "kvn.state", (one.vev() - c(1.0, 0.0)).norm(), 0.0);
    for i in 0..2 * n {
        let x = NormalPoly::annihilate(&space, i);
        r.record_max("lowering-annihilates", "kvn.state", x.adjoint().mul(&x)?.vev().norm(), 0.0);
    }
    let oracle = FockOracle::new(&space, 4)?;
    let mut worst_negative: f64 = 0.0;
    for _ in 0..trials {
        let x = random_poly(&space, 3, 4, rng);
        let scale = x.terms().map(|(_, k)| k.norm_sqr()).sum::<f64>().max(1e-300) * 6.0;
        let rho = x.adjoint().mul(&x)?.vev();
        worst_negative = worst_negative.max(-rho.re / scale);
        r.record_max("positivity-real", "kvn.state", rho.im.abs() / scale, STATE_TOL);
        let v = oracle.apply(&x, &oracle.vacuum())?;
        r.record_max("positivity-vs-oracle", "kvn.state", (rho.re - v.norm_squared()).abs() / scale, STATE_TOL);
        r.record_max("reality", "kvn.state", (x.adjoint().vev() - x.vev().conj()).norm(), STATE_TOL);
    }
    r.check("positivity", "kvn.state", worst_negative.max(0.0), STATE_TOL);
    let words = creation_words(2 * n, 3);
    let ops: Vec<NormalPoly<C64>> = words
        .iter()
        .map(|w| NormalPoly::monomial(&space, w.clone(), vec![], c(1.0, 0.0)))
        .collect::<Result<_>>()?;
    let size = words.len();
    let gram = DMatrix::from_fn(size, size, |i, j| ops[i].adjoint().mul(&ops[j]).map(|p| p.vev()).unwrap_or(c(f64::NAN, 0.0)));
    let mut wick: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            // ⟨0| a_{w_i} a†_{w_j} |0⟩ is the permanent of the mode-overlap matrix
            let want = if words[i].len() == words[j].len() {
                let m: Vec<Vec<C64>> = words[i]
                    .iter()
                    .map(|x| words[j].iter().map(|y| if x == y { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
                    .collect();
                permanent(&m)?
            } else {
                c(0.0, 0.0)
            };
            wick = wick.max((gram[(i, j)] - want).norm());
        }
    }
    r.check("gns-gram-permanent", "kvn.gns", wick, 0.0);
    let min = gram.clone().symmetric_eigen().eigenvalues.min();
    r.check("gns-gram-psd", "kvn.gns", (-min).max(0.0) / gram.norm(), STATE_TOL);
    if let Some(f) = r.checks.iter().find(|ch| !ch.pass && ch.name.starts_with("positivity")) {
        return Err(Error::StateAxiom {
            axiom: f.name.clone(),
            value: f.max_residual,
        });
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// flow

pub const FLOW_TOL: f64 = 1e-8;
pub const FLOW_CUTOFF: usize = 12;
pub const FLOW_TIMES: [f64; 3] = [PI / 4.0, PI / 2.0, PI];

/// `e^{tZ_H} Y_q e^{−tZ_H} = Y_{q cos t − p sin t}` for one degree of freedom,
/// by dense exponentiation on a truncated Fock space, compared on the states
/// where `Y_q` is represented without truncation.
pub fn flow_check(cutoff: usize, times: &[f64]) -> Result<Report> {
    if cutoff < FLOW_CUTOFF {
        return Err(Error::Cutoff { degree: 1, cutoff });
    }
    let mut r = Report::new("koopman-flow", times.len());
    let kvn = KvN::new(1);
    let numeric = kvn.space().to_numeric()?;
    let oracle = FockOracle::new(&numeric, cutoff)?;
    let h = PhasePolynomial::harmonic(1);
    let z = oracle.matrix_image(&kvn.lift_z(&h)?.to_numeric(&numeric)?)?;
    let yq = oracle.matrix_image(&kvn.lift_y(&PhasePolynomial::q(1, 0))?.to_numeric(&numeric)?)?;
    let yp = oracle.matrix_image(&kvn.lift_y(&PhasePolynomial::p(1, 0))?.to_numeric(&numeric)?)?;
    let interior = oracle.interior(1);
    for &t in times {
        if t.abs() > PI + 1e-12 {
            return Err(Error::Input(format!("|t| = {} exceeds π", t.abs())));
        }
        let forward = (&z * c(t, 0.0)).exp();
        let back = (&z * c(-t, 0.0)).exp();
        let lhs = &forward * &yq * &back;
        let rhs = &yq * c(t.cos(), 0.0) - &yp * c(t.sin(), 0.0);
        let mut worst: f64 = 0.0;
        for &col in &interior {
            for row in 0..lhs.nrows() {
                worst = worst.max((lhs[(row, col)] - rhs[(row, col)]).norm());
            }
        }
        if worst > FLOW_TOL {
            return Err(Error::FlowMismatch { t, residual: worst });
        }
        r.record_max("poisson-flow", "kvn.flow", worst, FLOW_TOL);
    }
    Ok(r)
}

/// Lift identities (degree ≤ 4), the harmonic generators for `N ≤ 3`, the
/// `c†c − d†d` spectrum and the flow.
pub fn koopman_suite<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Report> {
    let mut r = Report::new("koopman", trials);
    let mut fold = |sub: Report| {
        let prefix = sub.suite.trim_start_matches("koopman-").to_string();
        for ch in sub.checks {
            r.record_max(&format!("{prefix}/{}", ch.name), &ch.anchor, ch.max_residual, ch.tolerance);
        }
        for note in sub.notes {
            if !r.notes.contains(&note) {
                r.note(note);
            }
        }
    };
    for n in 1..=2 {
        fold(lift_suite(n, trials, 4, rng)?);
    }
    for n in 1..=3 {
        fold(harmonic_generators(n)?.report);
    }
    let ev = h_c_spectrum(1, 6)?;
    let mut spectrum = Report::new("koopman-spectrum", 1);
    let has = |x: f64| ev.iter().any(|e| (e - x).abs() < 1e-10);
    spectrum.check_bool("both-signs", "kvn.harmonic", ev[0] < 0.0 && ev[ev.len() - 1] > 0.0);
    spectrum.check_bool("contains-minus-zero-plus", "kvn.harmonic", has(-1.0) && has(0.0) && has(1.0));
    fold(spectrum);
    fold(flow_check(FLOW_CUTOFF, &FLOW_TIMES)?);
    Ok(r)
}
