use std::f64::consts::PI;

use super::{prescription_vev, DressedSetup, Presentation, DRESS_TOL, SERIES_ORDER};
use crate::diracfield::{rel, DEGENERATE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{c, C64};
use crate::report::Report;

/// Quadrature tolerance for the density integrals.
pub const DENSITY_TOL: f64 = 1e-8;

/// Density of single measurements of a self-conjugate `χ_U` in the
/// prescription state, with `s = (U,U)` and its shell parts.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityCurve {
    pub s: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    /// `(v, ρ(v))`
    pub samples: Vec<(f64, f64)>,
}

/// 401 points on `[−8√s, 8√s]`.
pub fn default_density_grid(s: f64) -> Vec<f64> {
    let r = 8.0 * s.sqrt();
    (0..401).map(|i| -r + 2.0 * r * i as f64 / 400.0).collect()
}

/// Composite trapezoid on `n` uniform intervals; spectrally accurate for the
/// rapidly decaying integrands used here.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + h * i as f64);
    }
    acc * h
}

impl DensityCurve {
    pub fn from_parameters(s: f64, s_plus: f64, s_minus: f64, grid: &[f64]) -> Result<DensityCurve> {
        if !(s > 0.0) {
            return Err(Error::Input(format!("s = {s} must be positive")));
        }
        if s_plus < -DRESS_TOL * s || s_minus < -DRESS_TOL * s || (s_plus + s_minus - s).abs() > DRESS_TOL * s {
            return Err(Error::Input(format!("shell parts {s_plus}, {s_minus} do not split s = {s}")));
        }
        let mut curve = DensityCurve {
            s,
            s_plus,
            s_minus,
            samples: vec![],
        };
        curve.samples = grid.iter().map(|&v| (v, curve.rho(v))).collect();
        Ok(curve)
    }

    /// `[s₋/s + (s₊/s)(v²/s)] e^{−v²/2s} / √(2πs)`.
    pub fn rho(&self, v: f64) -> f64 {
        let s = self.s;
        (self.s_minus / s + self.s_plus / s * (v * v / s)) * self.gaussian_reference(v)
    }

    pub fn gaussian_reference(&self, v: f64) -> f64 {
        (-v * v / (2.0 * self.s)).exp() / (2.0 * PI * self.s).sqrt()
    }

    /// `G(λ) = (1 − λ²s₊) e^{−λ²s/2}`.
    pub fn generating(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        (1.0 - l2 * self.s_plus) * (-l2 * self.s / 2.0).exp()
    }

    /// `−G″(0)`, read off the `λ²` Taylor coefficient.
    pub fn second_moment_closed(&self) -> f64 {
        2.0 * (self.s_plus + self.s / 2.0)
    }

    /// `(2π)^{-1} ∫ G(λ) e^{−iλv} dλ` by the trapezoid rule.
    pub fn inverse_fourier(&self, v: f64) -> f64 {
        let r = 14.0 / self.s.sqrt();
        trapezoid(|l| self.generating(l) * (l * v).cos(), -r, r, 1120) / (2.0 * PI)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,rho,rho_gaussian_reference\n");
        for &(v, rho) in &self.samples {
            out.push_str(&format!("{v},{rho},{}\n", self.gaussian_reference(v)));
        }
        out
    }

    /// Positivity on the grid, normalisation, second moment and agreement
    /// with the numerical inverse transform.
    pub fn report(&self) -> Result<Report> {
        let mut r = Report::new("dressing-continuous-density", self.samples.len());
        let min = self.samples.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        r.check_bool("nonnegative", "dressing.density", min >= 0.0);
        let span = 14.0 * self.s.sqrt();
        let norm = trapezoid(|v| self.rho(v), -span, span, 2800);
        r.check("normalisation", "dressing.density", (norm - 1.0).abs(), DENSITY_TOL);
        let second = trapezoid(|v| v * v * self.rho(v), -span, span, 2800);
        let want = self.second_moment_closed();
        r.check("second-moment", "dressing.density", (second - want).abs() / self.s, DENSITY_TOL);
        r.check("second-moment-shells", "dressing.density", (want - (self.s + 2.0 * self.s_plus)).abs() / self.s, DENSITY_TOL);
        let peak = 1.0 / (2.0 * PI * self.s).sqrt();
        let ift = self.samples.iter().map(|&(v, rho)| (self.inverse_fourier(v) - rho).abs() / peak).fold(0.0, f64::max);
        r.check("inverse-fourier", "dressing.density", ift, DENSITY_TOL);
        Ok(r)
    }
}

fn shell_parts(setup: &DressedSetup, u: &[C64]) -> Result<(f64, f64, f64)> {
    setup.check_len(u)?;
    if !setup.is_self_conjugate(u) {
        return Err(Error::Input("χ_U is Hermitian only for U^c = U".into()));
    }
    let s = setup.full(u, u).re;
    if s <= DEGENERATE_TOL * setup.magnitude(u, u) {
        return Err(Error::Degenerate("(U, U) vanishes".into()));
    }
    Ok((s, setup.plus(u, u).re, setup.minus(u, u).re))
}

/// Density of `χ_U` for self-conjugate `U` on [`default_density_grid`].
pub fn continuous_density(setup: &DressedSetup, u: &[C64]) -> Result<DensityCurve> {
    let (s, sp, sm) = shell_parts(setup, u)?;
    DensityCurve::from_parameters(s, sp, sm, &default_density_grid(s))
}

/// Two-point distribution of `Χ_U`: weight `s₋/s` at 0 and `s₊/s` at `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDensity {
    pub s: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    /// `(value, weight)`
    pub atoms: [(f64, f64); 2],
    pub report: Report,
}

impl DiscreteDensity {
    /// `Σ w e^{iλx}`.
    pub fn generating(&self, lambda: f64) -> C64 {
        self.atoms.iter().map(|&(x, w)| C64::from_polar(w, lambda * x)).sum()
    }
}

/// The two-point law of `Χ_U` against prescription moments `⟨Χ_Uⁿ⟩`.
pub fn discrete_density(setup: &DressedSetup, u: &[C64]) -> Result<DiscreteDensity> {
    let (s, sp, sm) = shell_parts(setup, u)?;
    let atoms = [(0.0, sm / s), (s, sp / s)];
    let mut report = Report::new("dressing-discrete-density", SERIES_ORDER);
    report.check("weights-sum", "dressing.discrete", (atoms[0].1 + atoms[1].1 - 1.0).abs(), DRESS_TOL);
    let chi = Presentation::big_chi(u);
    for n in 1..=SERIES_ORDER {
        let moment = prescription_vev(setup, &chi.pow(n as u32))?;
        let law: f64 = atoms.iter().map(|&(x, w)| w * x.powi(n as i32)).sum();
        let closed = s.powi(n as i32 - 1) * sp;
        report.record_max("moments", "dressing.discrete", rel(moment, c(law, 0.0), 0.0), DRESS_TOL);
        report.record_max("moments-closed", "dressing.discrete", rel(moment, c(closed, 0.0), 0.0), DRESS_TOL);
    }
    let phi = prescription_vev(setup, &chi)?;
    let d = DiscreteDensity {
        s,
        s_plus: sp,
        s_minus: sm,
        atoms,
        report: Report::new("", 0),
    };
    // e^{iλΧ} = 1 + Χ (e^{iλs} − 1)/s on the projection Χ² = sΧ
    for i in 0..21 {
        let lambda = -3.0 / s + 6.0 / s * i as f64 / 20.0;
        let via = c(1.0, 0.0) + phi * ((C64::from_polar(1.0, lambda * s) - 1.0) / s);
        report.record_max("generating", "dressing.discrete", rel(via, d.generating(lambda), 0.0), DRESS_TOL);
    }
    Ok(DiscreteDensity { report, ..d })
}
