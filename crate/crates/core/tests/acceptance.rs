//! End-to-end acceptance checks. Each test drives one pinned criterion
//! through the public verification suites and prints a single summary line;
//! the suites run the underlying sweeps exhaustively, so a failure here
//! names the first offending case.

use orbilat::verify::{
    census_suite, cocycle_suite, duality_suite, numeric_suite, parity_suite, qdim_suite,
    spectral_suite, Check, SuiteReport, NUMERIC_QDIM_TOL, TRANSFORM_RESIDUAL_TOL,
};
use orbilat::Budget;
use std::sync::LazyLock;
use std::time::Instant;

/// Wall-clock bound for the exhaustive algebraic sweeps.
const FAST_SWEEP_SECS: f64 = 5.0;
/// Wall-clock bound for the numeric evaluation pass.
const NUMERIC_SECS: f64 = 10.0;

fn conclude(line: &str, passed: bool, detail: &str) {
    println!("{}: {line} ({detail})", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{line}: {detail}");
}

fn suite_line(label: &str, report: &SuiteReport, elapsed: Option<(f64, f64)>) {
    let mut passed = report.passed();
    let mut detail = format!("{} statements", report.checks.len());
    if let Some(first) = report.checks.iter().find(|c| !c.passed) {
        detail = format!("{}: {}", first.name, first.detail);
    }
    if let Some((secs, bound)) = elapsed {
        passed = passed && secs < bound;
        detail = format!("{detail}, {secs:.2}s of {bound:.0}s");
    }
    conclude(label, passed, &detail);
}

fn named_check<'a>(report: &'a SuiteReport, name: &str) -> &'a Check {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("suite {} has no check named '{name}'", report.suite))
}

fn check_line(label: &str, check: &Check) {
    conclude(label, check.passed, &check.detail);
}

static PARITY: LazyLock<SuiteReport> =
    LazyLock::new(|| parity_suite(&mut Budget::new(None)).expect("parity sweep must run"));

static QDIM: LazyLock<SuiteReport> =
    LazyLock::new(|| qdim_suite(&mut Budget::new(None)).expect("qdim sweep must run"));

#[test]
fn duality_sweep_is_exhaustive_and_fast() {
    let start = Instant::now();
    let report = duality_suite(&mut Budget::new(None)).expect("duality sweep must run");
    suite_line(
        "dual lattices and integrality over all 10 submodules at p=3 d=1",
        &report,
        Some((start.elapsed().as_secs_f64(), FAST_SWEEP_SECS)),
    );
}

#[test]
fn parity_matches_code_evenness() {
    let report = &*PARITY;
    for name in [
        "even iff C is isotropic and D is self-orthogonal",
        "even iff codes even, 100 random pairs p=5 d=1",
        "even iff codes even, 100 random pairs p=3 d=2",
    ] {
        check_line(name, named_check(report, name));
    }
}

#[test]
fn spectral_data_has_cyclotomic_shape() {
    let start = Instant::now();
    let report = spectral_suite(&mut Budget::new(None)).expect("spectral sweep must run");
    suite_line(
        "cyclotomic spectra and eta exponents for p in {3,5,7}, d in {1,2}",
        &report,
        Some((start.elapsed().as_secs_f64(), FAST_SWEEP_SECS)),
    );
}

#[test]
fn quantum_dimension_routes_agree() {
    let report = &*QDIM;
    for name in [
        "spectral, radical, and code routes give the same qdim^2",
        "qdim is 2^((p-1)d/2 - dim C) exactly",
        "twisted module dimension equals |D|",
        "qdim does not depend on the twist power",
    ] {
        check_line(name, named_check(report, name));
    }
}

#[test]
fn radical_subquotients_match_the_codes() {
    check_line(
        "radical and its subquotients over every admissible glue and twist",
        named_check(&QDIM, "radical is the moved dual glue with the expected subquotients"),
    );
}

#[test]
fn global_dimension_counts_the_discriminant() {
    check_line(
        "sum of qdim^2 over the twisted modules equals |L_dual / L|",
        named_check(&QDIM, "sum of qdim^2 over twisted modules is |L_dual / L|"),
    );
}

#[test]
fn coset_weights_are_additive_mod_two() {
    check_line(
        "500 random coset-weight additivity cases on self-orthogonal pairs",
        named_check(&PARITY, "coset weights add mod 2 on self-orthogonal pairs"),
    );
}

#[test]
fn commutator_maps_behave() {
    let report = cocycle_suite(&mut Budget::new(None)).expect("cocycle sweep must run");
    suite_line("commutator map laws, closed forms, and radical routes", &report, None);
}

#[test]
fn numeric_qdim_and_theta_transforms_converge() {
    // The bars the numeric pass must clear, pinned against the library.
    assert_eq!(NUMERIC_QDIM_TOL, 1e-6);
    assert_eq!(TRANSFORM_RESIDUAL_TOL, 1e-8);
    let start = Instant::now();
    let report = numeric_suite(&mut Budget::new(None)).expect("numeric pass must run");
    suite_line(
        "numeric qdim within 1e-6 and transform residuals within 1e-8",
        &report,
        Some((start.elapsed().as_secs_f64(), NUMERIC_SECS)),
    );
}

#[test]
fn census_holds_on_every_discovered_code() {
    let report = census_suite(&mut Budget::new(None)).expect("census sweep must run");
    for check in &report.checks {
        println!("  {}: {} ({})", if check.passed { "pass" } else { "FAIL" }, check.name, check.detail);
    }
    suite_line("module census over the self-dual searches at p=5 d=2 and p=3 d=3", &report, None);
}
