use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{random_poly, FockOracle, ModeSpace, NormalPoly, Statistics};
use crate::error::Result;
use crate::geometry::{c, C64};
use crate::report::Report;

pub const BOSE_ORACLE_TOL: f64 = 1e-11;
/// Fermionic spaces are finite, so the oracle is exact up to roundoff.
pub const FERMI_ORACLE_TOL: f64 = 1e-13;
pub const BOSE_ORACLE_CUTOFF: usize = 10;

fn random_gram<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    &a * a.adjoint() / c(n as f64, 0.0) + DMatrix::identity(n, n) * c(0.1, 0.0)
}

fn rel_cols(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let scale = a.iter().chain(b.iter()).map(|z| z.norm()).fold(1.0, f64::max);
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

/// `x (y e_s)` for each basis state `s`, by two dense applications.
fn composed(o: &FockOracle, x: &NormalPoly<C64>, y: &NormalPoly<C64>, states: &[usize]) -> Result<DMatrix<C64>> {
    let d = o.dim();
    let mut out = DMatrix::zeros(d, states.len());
    for (col, &s) in states.iter().enumerate() {
        let mut e = DVector::zeros(d);
        e[s] = c(1.0, 0.0);
        out.set_column(col, &o.apply(x, &o.apply(y, &e)?)?);
    }
    Ok(out)
}

/// Normal-ordered products, commutators and vacuum expectations of random
/// operator pairs against dense matrices on a truncated Fock space.
///
/// Bosonic trials cycle through one to three modes at cutoff
/// [`BOSE_ORACLE_CUTOFF`], fermionic ones through one to six modes.
pub fn oracle_suite<R: Rng + ?Sized>(statistics: Statistics, trials: usize, rng: &mut R) -> Result<Report> {
    let (label, tol) = match statistics {
        Statistics::Bose => ("oscillator-bose", BOSE_ORACLE_TOL),
        Statistics::Fermi => ("oscillator-fermi", FERMI_ORACLE_TOL),
    };
    let mut report = Report::new(label, trials);
    for t in 0..trials {
        let n = match statistics {
            Statistics::Bose => 1 + t % 3,
            Statistics::Fermi => 1 + t % 6,
        };
        let space = ModeSpace::from_matrix(statistics, &random_gram(n, rng))?;
        let oracle = FockOracle::new(&space, BOSE_ORACLE_CUTOFF)?;
        let x = random_poly(&space, 4, 5, rng);
        let y = random_poly(&space, 4, 5, rng);
        let states = oracle.interior(x.max_raise() + y.max_raise());
        report.record_max("interior-nonempty", "oscillator.oracle", if states.is_empty() { 1.0 } else { 0.0 }, 0.0);
        let xy = x.mul(&y)?;
        let dense_xy = composed(&oracle, &x, &y, &states)?;
        report.record_max("multiply", "oscillator.oracle", rel_cols(&oracle.columns(&xy, &states)?, &dense_xy), tol);
        let dense = &dense_xy - composed(&oracle, &y, &x, &states)?;
        report.record_max("commutator", "oscillator.oracle", rel_cols(&oracle.columns(&x.commutator(&y)?, &states)?, &dense), tol);
        let v = oracle.expectation(&xy)?;
        report.record_max("vacuum-expectation", "oscillator.oracle", (xy.vev() - v).norm() / v.norm().max(1.0), tol);
    }
    Ok(report)
}
