//! Command-line front end: JSON jobs in, canonical JSON out.
//!
//! Output keys are always sorted and every exact value (orders, dimensions,
//! weights, qdim) is a decimal string, so cross-language consumers never
//! lose precision. Exit codes: 0 success, 1 verification or internal
//! failure, 2 usage or schema, 3 resource budget.

use clap::{Parser, Subcommand};
use orbilat::codes::{enumerate_c_codes, enumerate_d_codes, lattice_from_codes, CodeC, CodeD, CodeFilter};
use orbilat::isometry::{coxeter_sigma, SpectralData};
use orbilat::lattice::theta_coeffs;
use orbilat::linalg::AbelianQuotient;
use orbilat::orbifold::{orbifold_report, twisted_dim, IrrCensus, OrbifoldReport, RadicalData};
use orbilat::qseries::{lattice_character, numeric_qdim_detailed, twisted_char, QSeries};
use orbilat::verify::{run_suite, SuiteReport, SUITE_NAMES};
use orbilat::{Budget, Error, Int, Rat};
use serde::Deserialize;
use serde_json::{json, Value};
use std::io::Read;
use std::process::ExitCode;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "orbilat", version, about = "Orbifold invariants of lattices glued from binary and p-ary codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full orbifold report for the glued pair described by a JSON job
    Report {
        /// Job file; `-` reads the job from stdin
        #[arg(long, value_name = "FILE")]
        job: String,
        /// Node budget for enumerations
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// List codes matching the constraints, one JSON object per line
    Enumerate {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        d: usize,
        /// Enumerate p-ary codes instead of binary ones
        #[arg(long)]
        p_ary: bool,
        /// Keep only codes closed under the Coxeter action
        #[arg(long)]
        sigma_invariant: bool,
        /// Keep only even codes
        #[arg(long)]
        even: bool,
        /// Keep only self-orthogonal codes
        #[arg(long)]
        self_orthogonal: bool,
        /// Keep only self-dual codes
        #[arg(long)]
        self_dual: bool,
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// q-expansions (thetas, characters) and the numeric qdim for a job
    Theta {
        /// Job file; `-` reads the job from stdin
        #[arg(long, value_name = "FILE")]
        job: String,
        /// Truncation exponent for the q-expansions
        #[arg(long, value_name = "N", default_value_t = 4)]
        order: i64,
        /// Evaluation points for the numeric qdim, e.g. 1.0,0.8,0.6,0.5
        #[arg(long, value_name = "A,B,C")]
        y_schedule: Option<String>,
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Run verification suites; with no names, run all of them
    Verify {
        /// Suite names (duality, parity, spectral, qdim, census, cocycle, numeric)
        suites: Vec<String>,
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Report { job, budget } => cmd_report(&job, budget),
        Command::Enumerate { p, d, p_ary, sigma_invariant, even, self_orthogonal, self_dual, budget } => {
            let filter = CodeFilter {
                sigma_invariant,
                isotropic: even,
                self_orthogonal,
                self_dual,
            };
            cmd_enumerate(p, d, p_ary, filter, budget)
        }
        Command::Theta { job, order, y_schedule, budget } => {
            cmd_theta(&job, order, y_schedule.as_deref(), budget)
        }
        Command::Verify { suites, budget } => cmd_verify(&suites, budget),
    };
    ExitCode::from(code)
}

fn emit(value: &Value) {
    write_line(format_args!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON is serializable")
    ));
}

/// Write one line to stdout. When the reader closes the pipe early, exit with
/// the conventional SIGPIPE status instead of panicking.
fn write_line(args: std::fmt::Arguments) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{args}").is_err() {
        std::process::exit(141);
    }
}

/// Print a machine-readable error object and return its exit code.
fn fail(kind: &str, message: &str, code: u8) -> u8 {
    emit(&json!({ "error": { "exit": code, "kind": kind, "message": message } }));
    code
}

fn fail_with(e: &Error) -> u8 {
    match e {
        Error::Resource(m) => fail("resource", m, EXIT_RESOURCE),
        Error::Parameter(m) | Error::Shape(m) => fail("usage", m, EXIT_USAGE),
        Error::Hypothesis(m) => fail("hypothesis", m, EXIT_FAILURE),
        other => fail("internal", &other.to_string(), EXIT_FAILURE),
    }
}

/// A glued pair plus the twist selection, as read from a job file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JobSpec {
    p: u32,
    d: usize,
    #[serde(rename = "C_generators", alias = "c_generators", default)]
    c_generators: Vec<Vec<u32>>,
    #[serde(rename = "D_generators", alias = "d_generators", default)]
    d_generators: Vec<Vec<u32>>,
    #[serde(default)]
    s: Twist,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Twist {
    Power(u32),
    Word(String),
}

impl Default for Twist {
    fn default() -> Self {
        Twist::Word("all".into())
    }
}

fn read_job(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("cannot read stdin: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
    }
}

/// Parse and schema-check a job: odd p, generator entries in range, shapes
/// accepted by the code constructors, and a twist that is `"all"` or a
/// single power.
fn parse_job(path: &str) -> Result<(JobSpec, CodeC, CodeD, Vec<u32>), u8> {
    let text = read_job(path).map_err(|m| fail("usage", &m, EXIT_USAGE))?;
    let job: JobSpec = serde_json::from_str(&text)
        .map_err(|e| fail("schema", &format!("invalid job: {e}"), EXIT_USAGE))?;
    if job.p % 2 == 0 {
        return Err(fail("schema", "p must be odd", EXIT_USAGE));
    }
    for g in &job.c_generators {
        if g.iter().any(|&b| b > 1) {
            return Err(fail("schema", "C_generators entries must be bits", EXIT_USAGE));
        }
    }
    for g in &job.d_generators {
        if g.iter().any(|&a| a >= job.p) {
            return Err(fail(
                "schema",
                &format!("D_generators entries must lie below p = {}", job.p),
                EXIT_USAGE,
            ));
        }
    }
    let c = CodeC::new(job.p, job.d, &job.c_generators)
        .map_err(|e| fail("schema", &e.to_string(), EXIT_USAGE))?;
    let dcode = CodeD::new(job.p, job.d, &job.d_generators)
        .map_err(|e| fail("schema", &e.to_string(), EXIT_USAGE))?;
    let twists = match &job.s {
        Twist::Power(s) => vec![*s],
        Twist::Word(w) if w == "all" => (1..job.p).collect(),
        Twist::Word(w) => {
            return Err(fail("schema", &format!("twist must be an integer or \"all\", got \"{w}\""), EXIT_USAGE))
        }
    };
    Ok((job, c, dcode, twists))
}

fn quotient_json(q: &AbelianQuotient) -> Value {
    json!({
        "divisors": q.divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "order": q.order.to_string(),
    })
}

fn rats_json(ws: &[Rat]) -> Vec<String> {
    ws.iter().map(|w| w.to_string()).collect()
}

fn census_json(c: &IrrCensus) -> Value {
    json!({
        "components": c.components,
        "d_code_dim": c.r,
        "fusion_group": quotient_json(&c.group),
        "order": c.order.to_string(),
        "sectors": c.sectors,
        "twisted_per_sector": c.twisted_per_sector.to_string(),
        "twisted_weight": c.twisted_weight.to_string(),
        "untwisted_modules": c.untwisted_modules.to_string(),
        "untwisted_weights": rats_json(&c.untwisted_weights),
        "weights_mod_z": rats_json(&c.weights_mod_z),
        "weights_on_grid": c.weights_ok,
    })
}

fn report_json(r: &OrbifoldReport) -> Value {
    let m_d: serde_json::Map<String, Value> =
        r.m_d.iter().map(|(&k, &v)| (k.to_string(), json!(v))).collect();
    json!({
        "census": r.census.as_ref().map(census_json),
        "d": r.d,
        "dim_t": r.dim_t.to_string(),
        "discriminant_group": quotient_json(&r.disc),
        "group_like": r.group_like,
        "hypothesis_failed": r.census_obstruction,
        "m_d": m_d,
        "num_twisted_irreps": r.num_twisted_irreps.to_string(),
        "p": r.p,
        "parity": {
            "even": r.parity.even,
            "integral": r.parity.integral,
            "unimodular": r.parity.unimodular,
        },
        "qdim": { "sqrt_of": r.qdim.squared().to_string() },
        "r_multiplicities": r.r_multiplicities,
        "radical_index": r.radical_quotient.order.to_string(),
        "radical_snf": r.radical_quotient.divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "rho_twisted": r.rho_twisted.to_string(),
        "s": r.s,
        "weights_mod_z": rats_json(&r.weights_mod_z),
    })
}

fn cmd_report(path: &str, budget: Option<u64>) -> u8 {
    let (job, c, dcode, twists) = match parse_job(path) {
        Ok(parts) => parts,
        Err(code) => return code,
    };
    let single = twists.len() == 1;
    let mut budget = Budget::new(budget);
    let mut reports = Vec::new();
    for s in twists {
        match orbifold_report(&c, &dcode, s, &mut budget) {
            Ok(r) => reports.push(report_json(&r)),
            // The pair itself violates a hypothesis: still a report, exit 0.
            Err(Error::Hypothesis(msg)) => reports.push(json!({
                "d": job.d,
                "hypothesis_failed": msg,
                "p": job.p,
                "s": s,
            })),
            Err(e) => return fail_with(&e),
        }
    }
    if single {
        emit(&reports[0]);
    } else {
        emit(&json!({ "reports": reports }));
    }
    0
}

fn cmd_enumerate(p: u32, d: usize, p_ary: bool, filter: CodeFilter, budget: Option<u64>) -> u8 {
    if p % 2 == 0 {
        return fail("schema", "p must be odd", EXIT_USAGE);
    }
    let mut budget = Budget::new(budget);
    if p_ary {
        let codes = match enumerate_d_codes(p, d, &filter, &mut budget) {
            Ok(codes) => codes,
            Err(e) => return fail_with(&e),
        };
        for code in codes {
            let gens: Vec<Vec<u32>> =
                (0..code.dim()).map(|i| code.generators().row(i).to_vec()).collect();
            let line = json!({
                "dim": code.dim(),
                "even": code.is_self_orthogonal(),
                "generators": gens,
                "self_dual": code.is_self_dual(),
                "self_orthogonal": code.is_self_orthogonal(),
            });
            write_line(format_args!("{line}"));
        }
        return 0;
    }
    let codes = match enumerate_c_codes(p, d, &filter, &mut budget) {
        Ok(codes) => codes,
        Err(e) => return fail_with(&e),
    };
    for code in codes {
        let invariant = match code.is_sigma_invariant() {
            Ok(v) => v,
            Err(e) => return fail_with(&e),
        };
        // Group-like fusion is only a theorem under the evenness and
        // invariance hypotheses; outside them the verdict is null.
        let group_like = if code.is_isotropic() && invariant {
            Value::Bool(code.is_self_dual())
        } else {
            Value::Null
        };
        let gens: Vec<Vec<u32>> =
            (0..code.dim()).map(|i| code.generators().row(i).to_vec()).collect();
        let line = json!({
            "dim": code.dim(),
            "even": code.is_isotropic(),
            "generators": gens,
            "group_like": group_like,
            "self_dual": code.is_self_dual(),
            "self_orthogonal": code.is_self_orthogonal(),
            "sigma_invariant": invariant,
        });
        write_line(format_args!("{line}"));
    }
    0
}

fn series_json(s: &QSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(e, c)| json!({ "coefficient": c.to_string(), "exponent": e.to_string() }))
        .collect();
    json!({
        "denominator": s.denom_exponent(),
        "terms": terms,
        "truncation": s.truncation().to_string(),
    })
}

fn parse_schedule(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| part.trim().parse::<f64>().map_err(|e| format!("bad y value '{part}': {e}")))
        .collect()
}

fn cmd_theta(path: &str, order: i64, y_schedule: Option<&str>, budget: Option<u64>) -> u8 {
    let (job, c, dcode, _) = match parse_job(path) {
        Ok(parts) => parts,
        Err(code) => return code,
    };
    if order < 1 {
        return fail("usage", "order must be at least 1", EXIT_USAGE);
    }
    let schedule = match y_schedule {
        Some(text) => match parse_schedule(text) {
            Ok(s) => s,
            Err(m) => return fail("usage", &m, EXIT_USAGE),
        },
        None => orbilat::qseries::DEFAULT_Y_SCHEDULE.to_vec(),
    };
    let mut budget = Budget::new(budget);
    let bound = Rat::from_integer(Int::from(order));
    let result = (|| -> Result<Value, Error> {
        let l = lattice_from_codes(&c, &dcode)?;
        let sigma = coxeter_sigma(job.p, job.d, &l)?;
        let spec = SpectralData::new(&sigma)?;
        let theta = theta_coeffs(&l, &bound, &mut budget)?;
        let theta_dual = theta_coeffs(&l.dual_lattice(), &bound, &mut budget)?;
        let character = lattice_character(&l, &bound, &mut budget)?;
        let twisted = twisted_char(&spec, &bound)?;
        let data = RadicalData::new(&l, &sigma)?;
        let dim_t = twisted_dim(&l, &data.radical)?;
        let numeric = numeric_qdim_detailed(&l, &spec, &dim_t, &schedule, &mut budget)?;
        Ok(json!({
            "d": job.d,
            "lattice_character": series_json(&character),
            "numeric_qdim": {
                "error_estimate": numeric.error_estimate,
                "schedule_values": numeric.schedule_values,
                "value": numeric.value,
            },
            "p": job.p,
            "theta": series_json(&theta),
            "theta_dual": series_json(&theta_dual),
            "twisted_character": series_json(&twisted),
        }))
    })();
    match result {
        Ok(value) => {
            emit(&value);
            0
        }
        Err(e) => fail_with(&e),
    }
}

fn suite_json(report: &SuiteReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({ "detail": c.detail, "name": c.name, "passed": c.passed }))
        .collect();
    json!({ "checks": checks, "passed": report.passed(), "suite": report.suite })
}

fn cmd_verify(suites: &[String], budget: Option<u64>) -> u8 {
    let names: Vec<String> = if suites.is_empty() {
        SUITE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        suites.to_vec()
    };
    let mut budget = Budget::new(budget);
    let mut out = Vec::new();
    let mut all_passed = true;
    for name in &names {
        match run_suite(name, &mut budget) {
            Ok(report) => {
                all_passed &= report.passed();
                out.push(suite_json(&report));
            }
            Err(Error::Parameter(m)) => return fail("usage", &m, EXIT_USAGE),
            Err(e) => return fail_with(&e),
        }
    }
    emit(&json!({ "passed": all_passed, "suites": out }));
    if all_passed {
        0
    } else {
        EXIT_FAILURE
    }
}
