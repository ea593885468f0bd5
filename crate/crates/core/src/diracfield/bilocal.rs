//! Smeared gauge-invariant bilocals `∫ ψ̄(x′) P(x′) iS(x′, x) Q(x) ψ(x)`.
//!
//! Windows are Dirac-matrix valued Gaussians, stored as scalar packets on
//! the sixteen Clifford products `γ^{μ_1} ⋯ γ^{μ_r}` (`μ_1 < ⋯ < μ_r`). The
//! two-point kernels are integrated over the mass shells directly:
//! `iS_+` carries `(k·γ + m)` on the forward shell, `iS_−` minus the same
//! matrix on the backward shell, so `iS_+ − iS_−` sees `(k·γ + m)` on both.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{c, DiracMatrices, FourVector, Matrix4c, C64, ZERO};
use crate::packets::{isotropic_sigma, GaussianPacket, Payload, Species};
use crate::shell::{ShellNode, ShellRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Combo {
    Plus,
    Minus,
    PlusMinusMinus,
}

impl Combo {
    /// `(shell sign, kernel sign)` pairs.
    fn shells(self) -> &'static [(f64, f64)] {
        match self {
            Combo::Plus => &[(1.0, 1.0)],
            Combo::Minus => &[(-1.0, -1.0)],
            Combo::PlusMinusMinus => &[(1.0, 1.0), (-1.0, 1.0)],
        }
    }
}

/// The Clifford product selected by the bits of `mask`.
pub fn window_matrix(gammas: &DiracMatrices, mask: u8) -> Matrix4c {
    let mut m = Matrix4c::identity();
    for mu in 0..4 {
        if mask & (1 << mu) != 0 {
            m *= gammas.gamma[mu];
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct BilocalWindow {
    /// `(Clifford mask, scalar packet)`.
    pub terms: Vec<(u8, GaussianPacket)>,
    pub width: f64,
}

impl BilocalWindow {
    pub fn new(terms: Vec<(u8, GaussianPacket)>, width: f64) -> Result<BilocalWindow> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Input(format!("window width must be positive, got {width}")));
        }
        for (mask, p) in &terms {
            if *mask >= 16 {
                return Err(Error::Input(format!("Clifford mask {mask} out of range")));
            }
            if p.species() != Species::Scalar {
                return Err(Error::Species {
                    expected: "scalar".into(),
                    found: p.species(),
                });
            }
        }
        Ok(BilocalWindow { terms, width })
    }

    /// Isotropic Gaussian of width `w` with unit Fourier transform at zero,
    /// times the matrix `mask`, centred at `center`.
    pub fn gaussian(mask: u8, width: f64, center: FourVector) -> Result<BilocalWindow> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Input(format!("window width must be positive, got {width}")));
        }
        let amplitude = c(1.0 / (PI * PI * width.powi(4)), 0.0);
        let p = GaussianPacket::new(
            amplitude,
            center,
            [0.0; 4],
            isotropic_sigma(1.0 / (width * width)),
            Payload::Scalar(c(1.0, 0.0)),
        )?;
        BilocalWindow::new(vec![(mask, p)], width)
    }

    pub fn zero(width: f64) -> Result<BilocalWindow> {
        BilocalWindow::new(Vec::new(), width)
    }

    pub fn fourier(&self, gammas: &DiracMatrices, q: &FourVector) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        for (mask, p) in &self.terms {
            m += window_matrix(gammas, *mask) * (p.fourier_factor(q) * scalar(p));
        }
        m
    }

    pub fn radius(&self) -> f64 {
        self.terms.iter().map(|(_, p)| (73.7 * p.lambda_max()).sqrt()).fold(1.0, f64::max)
    }
}

fn scalar(p: &GaussianPacket) -> C64 {
    match p.payload {
        Payload::Scalar(z) => z,
        _ => unreachable!("windows hold scalar packets"),
    }
}

/// `γ⁰` times a normalised Gaussian: the smeared charge density.
pub fn charge_window(width: f64) -> Result<BilocalWindow> {
    BilocalWindow::gaussian(1, width, [0.0; 4])
}

/// `½(1 + γ⁰)` times a normalised Gaussian, projecting onto the upper
/// rest-frame components.
pub fn rest_frame_window(width: f64) -> Result<BilocalWindow> {
    let w = BilocalWindow::gaussian(0, width, [0.0; 4])?;
    let mut terms = Vec::with_capacity(2);
    for mask in [0u8, 1] {
        let mut p = w.terms[0].1.clone();
        p.amplitude *= 0.5;
        terms.push((mask, p));
    }
    BilocalWindow::new(terms, width)
}

/// `Γ_α` with `(k·γ + m) = Σ_α κ_α Γ_α`, `κ = (k^0, k^1, k^2, k^3, m)`.
fn slash_basis(gammas: &DiracMatrices) -> [Matrix4c; 5] {
    [
        gammas.gamma[0],
        -gammas.gamma[1],
        -gammas.gamma[2],
        -gammas.gamma[3],
        Matrix4c::identity(),
    ]
}

fn kappa(k: &FourVector, mass: f64) -> [f64; 5] {
    [k[0], k[1], k[2], k[3], mass]
}

/// Per pair of window terms: `tr[M_a Γ_α M_b Γ_β]` and `tr[M_a Γ_α M_b]`.
struct Traces {
    pairs: Vec<(usize, usize, [[C64; 5]; 5], [C64; 5])>,
}

impl Traces {
    fn new(gammas: &DiracMatrices, p: &BilocalWindow, q: &BilocalWindow) -> Traces {
        let g = slash_basis(gammas);
        let mut pairs = Vec::new();
        for (a, (ma, pa)) in p.terms.iter().enumerate() {
            for (b, (mb, pb)) in q.terms.iter().enumerate() {
                let x = window_matrix(gammas, *ma) * scalar(pa);
                let y = window_matrix(gammas, *mb) * scalar(pb);
                let mut two = [[ZERO; 5]; 5];
                let mut one = [ZERO; 5];
                for al in 0..5 {
                    let xa = x * g[al] * y;
                    one[al] = xa.trace();
                    for be in 0..5 {
                        two[al][be] = (xa * g[be]).trace();
                    }
                }
                pairs.push((a, b, two, one));
            }
        }
        Traces { pairs }
    }
}

fn on_shell(node: &ShellNode, sign: f64) -> FourVector {
    [sign * node.omega, node.k[0], node.k[1], node.k[2]]
}

fn check_mass(mass: f64) -> Result<()> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Input(format!("the bilocal study needs m > 0, got {mass}")));
    }
    Ok(())
}

/// `∫ dμ_c(k) σ tr[P̃(−k)(k·γ + m)Q̃(k)]`: both windows at one point, over the
/// shells of `combo`.
pub fn smeared_coincidence(
    gammas: &DiracMatrices,
    mass: f64,
    p: &BilocalWindow,
    q: &BilocalWindow,
    combo: Combo,
    orders: (usize, usize, usize),
) -> Result<C64> {
    check_mass(mass)?;
    let traces = Traces::new(gammas, p, q);
    let rule = ShellRule::new(p.radius().min(q.radius()), mass, orders.0, orders.1, orders.2);
    let mut acc = ZERO;
    for &(shell, sigma) in combo.shells() {
        for node in &rule.nodes {
            let k = on_shell(node, shell);
            let mk = [-k[0], -k[1], -k[2], -k[3]];
            let kv = kappa(&k, mass);
            let mut t = ZERO;
            for (a, b, _, one) in &traces.pairs {
                let env = p.terms[*a].1.fourier_factor(&mk) * q.terms[*b].1.fourier_factor(&k);
                let mut s = ZERO;
                for al in 0..5 {
                    s += one[al] * kv[al];
                }
                t += env * s;
            }
            acc += t * (sigma * node.weight);
        }
    }
    Ok(acc)
}

/// Vacuum value of the bilocal,
/// `−∫ dμ_c(k) σ ∫ dμ_−(k′) tr[P̃(k′−k)(k·γ+m) Q̃(k−k′)(k′·γ+m)]`.
///
/// `outer_first` integrates the combo shell on the outside; the other
/// nesting runs the backward shell outside with its own order triple, so the
/// two evaluations share no node set.
pub fn bilocal_vev_at(
    gammas: &DiracMatrices,
    mass: f64,
    p: &BilocalWindow,
    q: &BilocalWindow,
    combo: Combo,
    orders: (usize, usize, usize),
    outer_first: bool,
) -> Result<C64> {
    check_mass(mass)?;
    if p.terms.is_empty() || q.terms.is_empty() {
        return Ok(ZERO);
    }
    let traces = Traces::new(gammas, p, q);
    let radius = p.radius().min(q.radius());
    let rule = ShellRule::new(radius, mass, orders.0, orders.1, orders.2);
    let term = |k: &FourVector, kp: &FourVector| -> C64 {
        let d = [kp[0] - k[0], kp[1] - k[1], kp[2] - k[2], kp[3] - k[3]];
        let md = [-d[0], -d[1], -d[2], -d[3]];
        let (kv, kpv) = (kappa(k, mass), kappa(kp, mass));
        let mut t = ZERO;
        for (a, b, two, _) in &traces.pairs {
            let env = p.terms[*a].1.fourier_factor(&d) * q.terms[*b].1.fourier_factor(&md);
            let mut s = ZERO;
            for al in 0..5 {
                let mut row = ZERO;
                for be in 0..5 {
                    row += two[al][be] * kpv[be];
                }
                s += row * kv[al];
            }
            t += env * s;
        }
        t
    };
    let mut acc = ZERO;
    for &(shell, sigma) in combo.shells() {
        if outer_first {
            for n in &rule.nodes {
                let k = on_shell(n, shell);
                let mut inner = ZERO;
                for m in &rule.nodes {
                    inner += term(&k, &on_shell(m, -1.0)) * m.weight;
                }
                acc += inner * (sigma * n.weight);
            }
        } else {
            for m in &rule.nodes {
                let kp = on_shell(m, -1.0);
                let mut inner = ZERO;
                for n in &rule.nodes {
                    inner += term(&on_shell(n, shell), &kp) * (sigma * n.weight);
                }
                acc += inner * m.weight;
            }
        }
    }
    Ok(-acc)
}

pub const BILOCAL_ORDERS: (usize, usize, usize) = (20, 8, 16);
const NESTING_TOL: f64 = 1e-6;

/// [`bilocal_vev_at`] with the cross-check against the other nesting on a
/// shifted order triple; disagreement beyond `1e-6` relative is a quadrature
/// failure.
pub fn bilocal_vev(gammas: &DiracMatrices, mass: f64, p: &BilocalWindow, q: &BilocalWindow, combo: Combo) -> Result<C64> {
    let (a, b, cc) = BILOCAL_ORDERS;
    let first = bilocal_vev_at(gammas, mass, p, q, combo, BILOCAL_ORDERS, true)?;
    let second = bilocal_vev_at(gammas, mass, p, q, combo, (a + 4, b + 2, cc + 4), false)?;
    let change = (first - second).norm() / first.norm().max(second.norm()).max(1e-300);
    if change > NESTING_TOL {
        return Err(Error::Quadrature {
            change,
            tolerance: NESTING_TOL,
            order: a + 4,
        });
    }
    Ok(first)
}

// ---------------------------------------------------------------------------
// scaling study

pub const DEFAULT_WIDTHS: [f64; 4] = [0.8, 0.4, 0.2, 0.1];
pub const SCAN_ORDERS: (usize, usize, usize) = (32, 8, 16);
const FIT_TOL: f64 = 0.1;
const SLOPE_GAP: f64 = 0.5;
const STABILITY_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanRow {
    pub width: f64,
    pub abs_plus: f64,
    pub abs_pm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Fit {
    /// Growth exponent of the magnitude in `1/w`.
    pub slope: f64,
    /// RMS residual of `ln |·|` about the fitted line.
    pub residual: f64,
}

fn fit(rows: &[(f64, f64)]) -> Fit {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| -r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let b = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - b - slope * x).powi(2)).sum();
    Fit {
        slope,
        residual: (ss / n).sqrt(),
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SingularityScan {
    pub mass: f64,
    pub rows: Vec<ScanRow>,
    pub plus: Fit,
    pub pm: Fit,
    /// Fits repeated with every quadrature order doubled.
    pub plus_doubled: Fit,
    pub pm_doubled: Fit,
}

impl SingularityScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("width,absIS_plus,absIS_pm\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:e},{:e}\n", r.width, r.abs_plus, r.abs_pm));
        }
        out
    }

    pub fn report(&self) -> crate::report::Report {
        let mut r = crate::report::Report::new("dirac-singularity", self.rows.len());
        r.check_exceeds("slope-gap", "bilocal.scan", self.plus.slope - self.pm.slope, SLOPE_GAP);
        r.check("fit-plus", "bilocal.scan", self.plus.residual, FIT_TOL);
        r.check("fit-pm", "bilocal.scan", self.pm.residual, FIT_TOL);
        let drift = (self.plus.slope - self.plus_doubled.slope)
            .abs()
            .max((self.pm.slope - self.pm_doubled.slope).abs());
        r.check("order-doubling", "bilocal.scan", drift, STABILITY_TOL);
        if let Some(last) = self.rows.last() {
            r.check_bool("pm-below-plus", "bilocal.scan", last.abs_pm < last.abs_plus);
        }
        r.note(format!("slopes: plus {:.4}, plus-minus-minus {:.4}", self.plus.slope, self.pm.slope));
        r
    }
}

/// [`measure_singularity`], failing when either power-law fit is poor.
pub fn singularity_scan(
    gammas: &DiracMatrices,
    mass: f64,
    widths: &[f64],
    windows: impl Fn(f64) -> Result<(BilocalWindow, BilocalWindow)>,
    orders: (usize, usize, usize),
) -> Result<SingularityScan> {
    let scan = measure_singularity(gammas, mass, widths, windows, orders)?;
    let worst = scan.plus.residual.max(scan.pm.residual);
    if worst > FIT_TOL {
        return Err(Error::Fit {
            residual: worst,
            tolerance: FIT_TOL,
        });
    }
    Ok(scan)
}

/// Coincidence magnitudes of `iS_+` and `iS_+ − iS_−` against windows of
/// shrinking width, with log–log slopes at `orders` and at doubled orders.
pub fn measure_singularity(
    gammas: &DiracMatrices,
    mass: f64,
    widths: &[f64],
    windows: impl Fn(f64) -> Result<(BilocalWindow, BilocalWindow)>,
    orders: (usize, usize, usize),
) -> Result<SingularityScan> {
    check_mass(mass)?;
    if widths.len() < 4 {
        return Err(Error::Input("the scan needs at least four widths".into()));
    }
    if widths.windows(2).any(|w| w[1] >= w[0]) || widths.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Input("widths must be positive and strictly decreasing".into()));
    }
    let doubled = (2 * orders.0, 2 * orders.1, 2 * orders.2);
    let mut rows = Vec::with_capacity(widths.len());
    let mut rows_doubled = Vec::with_capacity(widths.len());
    for &w in widths {
        let (p, q) = windows(w)?;
        let at = |o| -> Result<(f64, f64)> {
            Ok((
                smeared_coincidence(gammas, mass, &p, &q, Combo::Plus, o)?.norm(),
                smeared_coincidence(gammas, mass, &p, &q, Combo::PlusMinusMinus, o)?.norm(),
            ))
        };
        let (a, b) = at(orders)?;
        rows.push(ScanRow {
            width: w,
            abs_plus: a,
            abs_pm: b,
        });
        rows_doubled.push(at(doubled)?);
    }
    let series = |f: &dyn Fn(usize) -> f64| -> Vec<(f64, f64)> { (0..widths.len()).map(|i| (widths[i], f(i))).collect() };
    let scan = SingularityScan {
        mass,
        plus: fit(&series(&|i| rows[i].abs_plus)),
        pm: fit(&series(&|i| rows[i].abs_pm)),
        plus_doubled: fit(&series(&|i| rows_doubled[i].0)),
        pm_doubled: fit(&series(&|i| rows_doubled[i].1)),
        rows,
    };
    Ok(scan)
}
