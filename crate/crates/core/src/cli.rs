//! Suite runner and exporters behind the `freefield` binary.
//!
//! A [`SuiteConfig`] selects suites and their parameters; [`run_suites`]
//! executes them on scoped threads, each with its own ChaCha stream derived
//! from the seed and the suite's fixed index, so the assembled [`RunDocument`]
//! does not depend on scheduling or on which other suites were selected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diracfield::{measure_singularity, rest_frame_window, DEFAULT_WIDTHS, SCAN_ORDERS};
use crate::diracfield::{algebra_suite, appendix_e_suite, random_coeffs, representation_check, spinor_decay_scan};
use crate::dressing::{continuous_density, DensityCurve};
use crate::dressing::{commuting_field_suite, default_lambda_grid, dressing_suite, generating_vacuum, random_setup};
use crate::emfield::{
    classicality_suite, complex_kg_suite_with, decay_scan, field_suite, involution_suite, isomorphism_suite, potential_suite_with, weyl_suite,
    DEFAULT_SEPARATIONS,
};
use crate::error::{Error, Result};
use crate::geometry::{verify_clifford_suite, DiracMatrices};
use crate::koopman::{gns_state_suite, koopman_suite};
use crate::oscillator::{oracle_suite, Statistics};
use crate::report::Report;
use crate::shell::{identity_suite, Kernel, KernelSpecies, QuadratureConfig, Shell};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Geometry,
    Shell,
    Em,
    Complexkg,
    Potentials,
    Dirac,
    Dressing,
    Koopman,
    Oscillator,
    /// The width scan of the smeared two-point functions; not in the default set.
    Scan,
}

impl SuiteName {
    pub const ALL: [SuiteName; 10] = [
        SuiteName::Geometry,
        SuiteName::Shell,
        SuiteName::Em,
        SuiteName::Complexkg,
        SuiteName::Potentials,
        SuiteName::Dirac,
        SuiteName::Dressing,
        SuiteName::Koopman,
        SuiteName::Oscillator,
        SuiteName::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Geometry => "geometry",
            SuiteName::Shell => "shell",
            SuiteName::Em => "em",
            SuiteName::Complexkg => "complexkg",
            SuiteName::Potentials => "potentials",
            SuiteName::Dirac => "dirac",
            SuiteName::Dressing => "dressing",
            SuiteName::Koopman => "koopman",
            SuiteName::Oscillator => "oscillator",
            SuiteName::Scan => "scan",
        }
    }

    /// Stream index of the suite's generator; fixed so adding or removing
    /// other suites leaves its draws unchanged.
    fn stream(self) -> u64 {
        SuiteName::ALL.iter().position(|&s| s == self).unwrap() as u64
    }

    pub fn default_trials(self) -> usize {
        match self {
            SuiteName::Shell => 50,
            SuiteName::Oscillator => 100,
            SuiteName::Em | SuiteName::Complexkg => 10,
            SuiteName::Potentials => 6,
            SuiteName::Dirac => 20,
            SuiteName::Dressing => 5,
            SuiteName::Koopman => 3,
            SuiteName::Geometry | SuiteName::Scan => 1,
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<SuiteName> {
        SuiteName::ALL
            .iter()
            .copied()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Trial counts: one number for every suite, or a per-suite table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Trials {
    Uniform(usize),
    PerSuite(BTreeMap<SuiteName, usize>),
}

impl Default for Trials {
    fn default() -> Self {
        Trials::PerSuite(BTreeMap::new())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub suites: Vec<SuiteName>,
    pub seed: u64,
    pub trials: Trials,
    /// Radial Gauss–Legendre order of the coarsest shell level; the angular
    /// orders and the scan orders scale with it.
    pub quad_order: usize,
    /// Tighten-only cap on every check tolerance.
    pub rel_tol: Option<f64>,
    /// Tighten-only cap on the quadrature convergence test between levels.
    pub abs_tol: Option<f64>,
    pub mass: f64,
    /// Units are natural; only 1 is accepted.
    pub hbar: f64,
    pub out: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suites: SuiteName::ALL.iter().copied().filter(|&s| s != SuiteName::Scan).collect(),
            seed: 20240611,
            trials: Trials::default(),
            quad_order: QuadratureConfig::default().radial,
            rel_tol: None,
            abs_tol: None,
            mass: 1.0,
            hbar: 1.0,
            out: PathBuf::from("freefield-out"),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<SuiteConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::Config("no suites selected".into()));
        }
        for (i, s) in self.suites.iter().enumerate() {
            if self.suites[..i].contains(s) {
                return Err(Error::Config(format!("suite `{s}` selected twice")));
            }
        }
        match &self.trials {
            Trials::Uniform(0) => return Err(Error::Config("trials must be at least 1".into())),
            Trials::PerSuite(m) => {
                if let Some((s, _)) = m.iter().find(|(_, &n)| n == 0) {
                    return Err(Error::Config(format!("trials for `{s}` must be at least 1")));
                }
            }
            _ => {}
        }
        if self.quad_order < 4 {
            return Err(Error::Config(format!("quad order {} is below 4", self.quad_order)));
        }
        if let Some(t) = self.rel_tol {
            positive("rel tol", t)?;
        }
        if let Some(t) = self.abs_tol {
            positive("abs tol", t)?;
        }
        positive("mass", self.mass)?;
        if self.hbar != 1.0 {
            return Err(Error::Config(format!("hbar = {} is not supported; units are natural", self.hbar)));
        }
        Ok(())
    }

    pub fn trials_for(&self, suite: SuiteName) -> usize {
        match &self.trials {
            Trials::Uniform(n) => *n,
            Trials::PerSuite(m) => m.get(&suite).copied().unwrap_or_else(|| suite.default_trials()),
        }
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let d = QuadratureConfig::default();
        QuadratureConfig {
            rel_tol: self.abs_tol.map_or(d.rel_tol, |t| t.min(d.rel_tol)),
            radial: self.quad_order,
            polar: scaled(d.polar, self.quad_order, d.radial),
            azimuthal: scaled(d.azimuthal, self.quad_order, d.radial),
            ..d
        }
    }

    pub fn scan_orders(&self) -> (usize, usize, usize) {
        let base = QuadratureConfig::default().radial;
        let (a, b, c) = SCAN_ORDERS;
        (scaled(a, self.quad_order, base), scaled(b, self.quad_order, base), scaled(c, self.quad_order, base))
    }

    fn shell(&self, kernel: Kernel) -> Shell {
        Shell::new(kernel).with_config(self.quadrature())
    }
}

fn scaled(order: usize, num: usize, den: usize) -> usize {
    (order * num).div_ceil(den).max(2)
}

/// Build identification; contains nothing that varies between runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Environment {
    pub package: &'static str,
    pub version: &'static str,
    pub target_os: &'static str,
    pub target_arch: &'static str,
    pub profile: &'static str,
}

impl Environment {
    pub fn current() -> Environment {
        Environment {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            target_os: std::env::consts::OS,
            target_arch: std::env::consts::ARCH,
            profile: if cfg!(debug_assertions) { "debug" } else { "release" },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunDocument {
    pub environment: Environment,
    pub config: SuiteConfig,
    pub pass: bool,
    pub suites: Vec<Report>,
}

impl RunDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// A named CSV produced alongside a suite.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub csv: String,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub document: RunDocument,
    pub artifacts: Vec<Artifact>,
    /// Wall time per suite; kept out of the document so reports stay byte-stable.
    pub timings: Vec<(SuiteName, Duration)>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.document.pass
    }

    /// Writes `report.json` and every artifact into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.document.to_json()?)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.file), &a.csv)?;
        }
        Ok(())
    }
}

/// Records a suite that stopped with an error as a failing check, keeping the
/// residual where the error carries one.
fn failure_report(suite: SuiteName, err: &Error) -> Report {
    let mut r = Report::new(suite.name(), 0);
    let (name, residual, tolerance) = match err {
        Error::IdentityFailure { name, residual, tolerance } => (name.clone(), *residual, *tolerance),
        Error::Quadrature { change, tolerance, .. } => ("quadrature".to_string(), *change, *tolerance),
        Error::Fit { residual, tolerance } => ("fit".to_string(), *residual, *tolerance),
        Error::FlowMismatch { residual, .. } => ("flow".to_string(), *residual, crate::koopman::FLOW_TOL),
        _ => ("error".to_string(), f64::NAN, 0.0),
    };
    r.check(&format!("aborted/{name}"), suite.name(), residual, tolerance);
    r.note(format!("suite stopped: {err}"));
    r
}

struct SuiteOutput {
    report: Report,
    artifacts: Vec<Artifact>,
}

fn artifact(file: &str, csv: String) -> Artifact {
    Artifact { file: file.to_string(), csv }
}

fn run_suite(config: &SuiteConfig, suite: SuiteName) -> Result<SuiteOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(suite.stream());
    let trials = config.trials_for(suite);
    let mass = config.mass;
    let mut report = Report::new(suite.name(), trials);
    let mut artifacts = Vec::new();
    match suite {
        SuiteName::Geometry => {
            report.extend(verify_clifford_suite(&DiracMatrices::dirac())?);
            report.extend(verify_clifford_suite(&DiracMatrices::chiral())?);
        }
        SuiteName::Shell => {
            for ks in [
                KernelSpecies::ScalarKG,
                KernelSpecies::ComplexKG,
                KernelSpecies::EmBivector,
                KernelSpecies::EmOneForm,
                KernelSpecies::Dirac,
            ] {
                let m = match ks {
                    KernelSpecies::EmBivector | KernelSpecies::EmOneForm => 0.0,
                    _ => mass,
                };
                report.extend(identity_suite(&config.shell(Kernel::new(ks, m)?), trials, &mut rng)?);
            }
        }
        SuiteName::Em => {
            let em = config.shell(Kernel::em());
            report.extend(field_suite(&em, trials, &mut rng)?);
            report.extend(classicality_suite(&em, 5 * trials, &mut rng)?);
            let scan = decay_scan(&em, &DEFAULT_SEPARATIONS)?;
            report.extend(scan.report());
            artifacts.push(artifact("em-decay.csv", scan.to_csv()));
            report.extend(isomorphism_suite(&em, &mut rng)?);
            report.extend(weyl_suite(&em, 6, 12, &mut rng)?);
            report.extend(involution_suite(10, 100, &mut rng)?);
        }
        SuiteName::Complexkg => {
            report.extend(complex_kg_suite_with(mass, config.quadrature(), trials, &mut rng)?);
            let kg = config.shell(Kernel::new(KernelSpecies::ComplexKG, mass)?);
            report.extend(classicality_suite(&kg, 5 * trials, &mut rng)?);
        }
        SuiteName::Potentials => report.extend(potential_suite_with(config.quadrature(), trials, &mut rng)?),
        SuiteName::Dirac => {
            let shell = config.shell(Kernel::dirac(mass)?);
            report.extend(algebra_suite(&shell, trials, &mut rng)?);
            report.extend(appendix_e_suite(&shell, trials, &mut rng)?);
            report.extend(representation_check(mass, trials.min(3), &mut rng)?);
            let scan = spinor_decay_scan(&shell, &DEFAULT_SEPARATIONS)?;
            report.extend(scan.report());
            artifacts.push(artifact("dirac-decay.csv", scan.to_csv()));
        }
        SuiteName::Dressing => {
            let shell = config.shell(Kernel::dirac(mass)?);
            report.extend(dressing_suite(&shell, trials, &mut rng)?);
            report.extend(commuting_field_suite(&shell, 10 * trials, &mut rng)?);
            artifacts.push(artifact("density.csv", random_density(&shell, &mut rng)?.to_csv()));
            artifacts.push(artifact("generating.csv", random_generating(&shell, &mut rng)?));
        }
        SuiteName::Koopman => {
            report.extend(koopman_suite(trials, &mut rng)?);
            report.extend(gns_state_suite(1, 10 * trials, &mut rng)?);
            report.extend(gns_state_suite(2, 5 * trials, &mut rng)?);
        }
        SuiteName::Oscillator => {
            report.extend(oracle_suite(Statistics::Bose, trials, &mut rng)?);
            report.extend(oracle_suite(Statistics::Fermi, trials, &mut rng)?);
        }
        SuiteName::Scan => {
            let scan = singularity(mass, config.scan_orders())?;
            report.extend(scan.report());
            artifacts.push(artifact("singularity-scan.csv", scan.to_csv()));
        }
    }
    Ok(SuiteOutput { report, artifacts })
}

/// Validates `config` and runs its suites concurrently. Suite failures are
/// recorded in the document, not returned as errors.
pub fn run_suites(config: &SuiteConfig) -> Result<RunOutcome> {
    config.validate()?;
    let results: Vec<(SuiteName, Result<SuiteOutput>, Duration)> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .suites
            .iter()
            .map(|&s| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let out = run_suite(config, s);
                    (s, out, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let mut suites = Vec::new();
    let mut artifacts = Vec::new();
    let mut timings = Vec::new();
    for (s, out, t) in results {
        let mut report = match out {
            Ok(o) => {
                artifacts.extend(o.artifacts);
                o.report
            }
            Err(e) => failure_report(s, &e),
        };
        if let Some(cap) = config.rel_tol {
            report.tighten(cap);
        }
        suites.push(report);
        timings.push((s, t));
    }
    let pass = suites.iter().all(|r| r.passed());
    Ok(RunOutcome {
        document: RunDocument {
            environment: Environment::current(),
            config: config.clone(),
            pass,
            suites,
        },
        artifacts,
        timings,
    })
}

// ---------------------------------------------------------------------------
// exports

fn singularity(mass: f64, orders: (usize, usize, usize)) -> Result<crate::diracfield::SingularityScan> {
    let windows = |w: f64| Ok((rest_frame_window(w)?, rest_frame_window(w)?));
    measure_singularity(&DiracMatrices::dirac(), mass, &DEFAULT_WIDTHS, windows, orders)
}

fn random_density(shell: &Shell, rng: &mut ChaCha8Rng) -> Result<DensityCurve> {
    let setup = random_setup(shell, 2, rng)?;
    let u = setup.self_conjugate(&random_coeffs(setup.primaries(), rng));
    continuous_density(&setup, &u)
}

fn random_generating(shell: &Shell, rng: &mut ChaCha8Rng) -> Result<String> {
    let setup = random_setup(shell, 2, rng)?;
    let u = random_coeffs(setup.n(), rng);
    let k = setup.full(&setup.conjugate(&u), &u).norm();
    Ok(generating_vacuum(&setup, &u, &default_lambda_grid(k))?.to_csv())
}

/// Where a density comes from: explicit `(s, s₊)` or a random self-conjugate
/// function on two random primaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensitySpec {
    Parameters { s: f64, s_plus: f64 },
    Random { seed: u64, mass: f64 },
}

pub fn export_density(spec: DensitySpec) -> Result<String> {
    let curve = match spec {
        DensitySpec::Parameters { s, s_plus } => {
            DensityCurve::from_parameters(s, s_plus, s - s_plus, &crate::dressing::default_density_grid(s))?
        }
        DensitySpec::Random { seed, mass } => {
            random_density(&Shell::new(Kernel::dirac(mass)?), &mut ChaCha8Rng::seed_from_u64(seed))?
        }
    };
    Ok(curve.to_csv())
}

/// Vacuum generating function of a random function on two random primaries.
pub fn export_generating(seed: u64, mass: f64) -> Result<String> {
    random_generating(&Shell::new(Kernel::dirac(mass)?), &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanKind {
    /// Field commutator against spatial separation.
    EmDecay,
    /// Spinor anticommutator against spatial separation.
    DiracDecay,
    /// Smeared two-point magnitudes against window width.
    Singularity,
}

impl FromStr for ScanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScanKind> {
        match s {
            "em-decay" => Ok(ScanKind::EmDecay),
            "dirac-decay" => Ok(ScanKind::DiracDecay),
            "singularity" => Ok(ScanKind::Singularity),
            _ => Err(Error::Input(format!("unknown scan `{s}`; expected em-decay, dirac-decay or singularity"))),
        }
    }
}

pub fn export_scan(kind: ScanKind, config: &SuiteConfig) -> Result<String> {
    config.validate()?;
    match kind {
        ScanKind::EmDecay => Ok(decay_scan(&config.shell(Kernel::em()), &DEFAULT_SEPARATIONS)?.to_csv()),
        ScanKind::DiracDecay => Ok(spinor_decay_scan(&config.shell(Kernel::dirac(config.mass)?), &DEFAULT_SEPARATIONS)?.to_csv()),
        ScanKind::Singularity => Ok(singularity(config.mass, config.scan_orders())?.to_csv()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_validation() {
        let c = SuiteConfig::default();
        assert!(!c.suites.contains(&SuiteName::Scan));
        let back = SuiteConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let c = SuiteConfig::from_json(r#"{"suites":["koopman"],"trials":{"koopman":2},"seed":3}"#).unwrap();
        assert_eq!(c.trials_for(SuiteName::Koopman), 2);
        assert_eq!(c.trials_for(SuiteName::Shell), 50);
        assert_eq!(c.trials_for(SuiteName::Em), 10);
        assert_eq!(SuiteConfig::from_json(r#"{"trials":4}"#).unwrap().trials_for(SuiteName::Dirac), 4);
        for bad in [r#"{"suites":["nope"]}"#, r#"{"colour":1}"#, r#"{"seed":-1}"#] {
            assert!(matches!(SuiteConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
        for bad in [
            SuiteConfig { trials: Trials::Uniform(0), ..Default::default() },
            SuiteConfig { rel_tol: Some(0.0), ..Default::default() },
            SuiteConfig { mass: -1.0, ..Default::default() },
            SuiteConfig { hbar: 2.0, ..Default::default() },
            SuiteConfig { suites: vec![], ..Default::default() },
            SuiteConfig { suites: vec![SuiteName::Em, SuiteName::Em], ..Default::default() },
            SuiteConfig { quad_order: 2, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn quadrature_scales_with_base_order() {
        let c = SuiteConfig { quad_order: 64, ..Default::default() };
        let q = c.quadrature();
        assert_eq!((q.radial, q.polar, q.azimuthal), (64, 24, 48));
        assert_eq!(c.scan_orders(), (64, 16, 32));
        assert_eq!(SuiteConfig::default().quadrature(), QuadratureConfig::default());
        let tight = SuiteConfig { abs_tol: Some(1.0), ..Default::default() };
        assert_eq!(tight.quadrature().rel_tol, QuadratureConfig::default().rel_tol);
    }

    #[test]
    fn suite_names_parse() {
        for s in SuiteName::ALL {
            assert_eq!(s.name().parse::<SuiteName>().unwrap(), s);
        }
        assert!("Shell".parse::<SuiteName>().is_err());
    }
}
