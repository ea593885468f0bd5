//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Each criterion runs its own workload with a fixed seed, checks that every
//! named tolerance is at least as strict as the pinned value below, and that
//! every check in the workload passes within the wall-clock budget. Exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use freefield::cli::{run_suites, SuiteConfig, SuiteName};
use freefield::emfield::{classicality_suite, decay_scan, involution_suite, isomorphism_suite, weyl_suite, DEFAULT_SEPARATIONS};
use freefield::shell::{Kernel, KernelSpecies, Shell};
use freefield::{Report, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

struct Criterion {
    id: usize,
    title: &'static str,
    /// Wall-clock budget in seconds.
    budget: Option<f64>,
    /// Check-name suffix and the loosest tolerance allowed for it; for
    /// threshold checks, the lowest threshold allowed.
    pins: &'static [(&'static str, f64)],
}

struct Outcome {
    report: Report,
    /// Extra failures that are not checks, such as a nondeterministic report.
    problems: Vec<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, problems: Vec::new() }
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn only(suite: SuiteName) -> SuiteConfig {
    SuiteConfig {
        suites: vec![suite],
        ..SuiteConfig::default()
    }
}

fn suite_report(suite: SuiteName) -> Result<Outcome> {
    let run = run_suites(&only(suite))?;
    let mut report = Report::new(suite.name(), 0);
    for r in run.document.suites {
        report.extend(r);
    }
    Ok(report.into())
}

fn identities() -> Result<Outcome> {
    suite_report(SuiteName::Shell)
}

fn classicality() -> Result<Outcome> {
    let mut rng = rng(2);
    let mut report = Report::new("classicality", 50);
    report.extend(classicality_suite(&Shell::new(Kernel::em()), 50, &mut rng)?);
    let kg = Shell::new(Kernel::new(KernelSpecies::ComplexKG, 1.0)?);
    report.extend(classicality_suite(&kg, 50, &mut rng)?);
    let scan = decay_scan(&Shell::new(Kernel::em()), &DEFAULT_SEPARATIONS)?;
    report.check_bool("em-decay/eight-separations", "acceptance", scan.rows.len() == 8);
    report.extend(scan.report());
    Ok(report.into())
}

fn involution() -> Result<Outcome> {
    Ok(involution_suite(10, 100, &mut rng(3))?.into())
}

fn isomorphism() -> Result<Outcome> {
    let mut rng = rng(4);
    let em = Shell::new(Kernel::em());
    let mut report = isomorphism_suite(&em, &mut rng)?;
    report.extend(weyl_suite(&em, 6, 12, &mut rng)?);
    Ok(report.into())
}

fn first_note(report: &Report) -> String {
    report.notes.first().cloned().unwrap_or_default()
}

fn full_suite() -> Result<Outcome> {
    let config = SuiteConfig::default();
    let start = Instant::now();
    let first = run_suites(&config)?;
    let elapsed = start.elapsed().as_secs_f64();
    let second = run_suites(&config)?;
    let (a, b) = (first.document.to_json()?, second.document.to_json()?);
    let mut report = Report::new("full", 0);
    for r in first.document.suites {
        report.extend(r);
    }
    report.check("single-run-seconds", "acceptance", elapsed, 600.0);
    let mut problems = Vec::new();
    if a != b {
        problems.push("reports differ between identical runs".into());
    }
    Ok(Outcome { report, problems })
}

fn pin_problems(report: &Report, pins: &[(&str, f64)]) -> Vec<String> {
    let mut out = Vec::new();
    for &(suffix, tol) in pins {
        let matching: Vec<_> = report.checks.iter().filter(|c| c.name.ends_with(suffix)).collect();
        if matching.is_empty() {
            out.push(format!("no check named *{suffix}"));
        }
        for c in matching {
            let looser = if c.exceeds { c.tolerance < tol } else { c.tolerance > tol };
            if looser {
                out.push(format!("{} tolerance {:e} looser than {tol:e}", c.name, c.tolerance));
            }
        }
    }
    out
}

fn describe(report: &Report) -> String {
    match report.worst_failure() {
        Some(c) if c.exceeds => format!("{} = {:.4} below {}", c.name, c.max_residual, c.tolerance),
        Some(c) => format!("{} = {:.4e} above {:e}", c.name, c.max_residual, c.tolerance),
        None => format!("{} checks", report.checks.len()),
    }
}

fn main() -> ExitCode {
    type Workload = fn() -> Result<Outcome>;
    let criteria: [(Criterion, Workload); 10] = [
        (
            Criterion {
                id: 1,
                title: "pre-inner-product identities, 50 pairs per species",
                budget: Some(60.0),
                pins: &[
                    ("conjugation-swaps-shell", 1e-10),
                    ("reversal-swaps-shell", 1e-10),
                    ("hodge-antisymmetry", 1e-10),
                    ("charge-conjugation-swaps-shell", 1e-10),
                    ("gram-psd", 1e-10),
                ],
            },
            identities,
        ),
        (
            Criterion {
                id: 2,
                title: "random-field classicality and commutator decay",
                budget: Some(120.0),
                pins: &[
                    ("em-classicality/random-commutator-vanishes", 1e-9),
                    ("complex-kg-classicality/random-commutator-vanishes", 1e-9),
                    ("strictly-decreasing", 0.0),
                    ("far-ratio", 1e-6),
                ],
            },
            classicality,
        ),
        (
            Criterion {
                id: 3,
                title: "bullet involution in both dual conventions",
                budget: None,
                pins: &[
                    ("bullet-bullet-hodge", 1e-12),
                    ("bullet-bullet-i-matrix", 1e-12),
                    ("bullet-conjugate-bullet-hodge", 1e-12),
                    ("bullet-conjugate-bullet-i-matrix", 1e-12),
                ],
            },
            involution,
        ),
        (
            Criterion {
                id: 4,
                title: "quantum/random isomorphism and Weyl relations",
                budget: None,
                pins: &[
                    ("isomorphism-n1", 1e-11),
                    ("isomorphism-n2", 1e-11),
                    ("isomorphism-n3", 1e-11),
                    ("isomorphism-n4", 1e-11),
                    ("quantum-composition", 1e-9),
                    ("random-composition", 1e-9),
                    ("coherent-state-equality", 1e-9),
                ],
            },
            isomorphism,
        ),
        (
            Criterion {
                id: 5,
                title: "oscillator engine against the dense Fock oracle",
                budget: None,
                pins: &[
                    ("oscillator-bose/multiply", 1e-11),
                    ("oscillator-bose/commutator", 1e-11),
                    ("oscillator-bose/vacuum-expectation", 1e-11),
                    ("oscillator-fermi/multiply", 1e-13),
                    ("oscillator-fermi/commutator", 1e-13),
                    ("oscillator-fermi/vacuum-expectation", 1e-13),
                ],
            },
            || suite_report(SuiteName::Oscillator),
        ),
        (
            Criterion {
                id: 6,
                title: "fermionic bilinear algebra and Wick decomposition",
                budget: None,
                pins: &[
                    ("phi/projection", 1e-10),
                    ("closure/closure", 1e-10),
                    ("polarization/polarization", 1e-10),
                    ("bilinear-power/power-5", 1e-10),
                    ("dirac-appendix-e/decomposition", 1e-10),
                    ("dirac-appendix-e/direct-vs-pfaffian", 1e-10),
                ],
            },
            || suite_report(SuiteName::Dirac),
        ),
        (
            Criterion {
                id: 7,
                title: "dressing generating functions and densities",
                budget: None,
                pins: &[
                    ("vacuum-generating/truncation", 1e-12),
                    ("vacuum-generating/closed-vs-series", 1e-10),
                    ("continuous-density/inverse-fourier", 1e-8),
                    ("continuous-density/normalisation", 1e-8),
                    ("continuous-density/second-moment", 1e-8),
                    ("discrete-density/moments", 1e-10),
                    ("raised/psi-v-w-generating", 1e-10),
                    ("raised/phi-v-generating", 1e-10),
                    ("raised/phi-v-phi-w-generating", 1e-10),
                ],
            },
            || suite_report(SuiteName::Dressing),
        ),
        (
            Criterion {
                id: 8,
                title: "Koopman lifts and harmonic flow",
                budget: None,
                pins: &[
                    ("lift/y-y-commute", 0.0),
                    ("lift/z-y-bracket", 0.0),
                    ("lift/z-z-bracket", 0.0),
                    ("harmonic/c-d-lifted-generator", 0.0),
                    ("flow/poisson-flow", 1e-8),
                ],
            },
            || suite_report(SuiteName::Koopman),
        ),
        (
            Criterion {
                id: 9,
                title: "smeared two-point scaling study",
                budget: Some(300.0),
                pins: &[("slope-gap", 0.5), ("fit-plus", 0.1), ("fit-pm", 0.1), ("order-doubling", 0.05)],
            },
            || suite_report(SuiteName::Scan),
        ),
        (
            Criterion {
                id: 10,
                title: "default run twice: identical report bytes, first run within 600 s",
                budget: None,
                pins: &[("single-run-seconds", 600.0)],
            },
            full_suite,
        ),
    ];

    let mut all = true;
    for (c, work) in criteria {
        let start = Instant::now();
        let result = work();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match result {
            Err(e) => (false, format!("error: {e}")),
            Ok(out) => {
                let mut problems = out.problems;
                problems.extend(pin_problems(&out.report, c.pins));
                if let Some(b) = c.budget.filter(|&b| secs > b) {
                    problems.push(format!("took {secs:.1} s, budget {b} s"));
                }
                let ok = out.report.passed() && problems.is_empty();
                let mut detail = describe(&out.report);
                if !problems.is_empty() {
                    detail = format!("{detail}; {}", problems.join("; "));
                }
                let note = first_note(&out.report);
                if !ok && !note.is_empty() {
                    detail = format!("{detail} ({note})");
                }
                (ok, detail)
            }
        };
        all &= ok;
        let budget = c.budget.map_or(String::new(), |b| format!(" / {b:.0} s"));
        println!(
            "{} criterion {:>2}: {} [{secs:.1} s{budget}] {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
