use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn orbilat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbilat")).args(args).output().expect("binary runs")
}

/// Run with the job text piped to stdin via `--job -`.
fn orbilat_job(args: &[&str], job: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_orbilat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child.stdin.take().expect("stdin piped").write_all(job.as_bytes()).expect("job written");
    child.wait_with_output().expect("binary exits")
}

fn parsed(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const BARE_N3: &str = r#"{"p": 3, "d": 1, "C_generators": [], "D_generators": [], "s": 1}"#;

#[test]
fn report_output_reparses_byte_identically() {
    let out = orbilat_job(&["report", "--job", "-"], BARE_N3);
    assert_eq!(exit_code(&out), 0);
    let value = parsed(&out);
    let canonical = serde_json::to_string_pretty(&value).unwrap() + "\n";
    assert_eq!(out.stdout, canonical.as_bytes());
}

#[test]
fn report_pins_the_bare_lattice_invariants() {
    let out = orbilat_job(&["report", "--job", "-"], BARE_N3);
    assert_eq!(exit_code(&out), 0);
    let v = parsed(&out);
    assert_eq!(v["p"], 3);
    assert_eq!(v["d"], 1);
    assert_eq!(v["s"], 1);
    assert_eq!(v["qdim"]["sqrt_of"], "4");
    assert_eq!(v["dim_t"], "1");
    assert_eq!(v["num_twisted_irreps"], "3");
    assert_eq!(v["group_like"], false);
    assert_eq!(v["rho_twisted"], "1/9");
    assert_eq!(v["parity"]["even"], true);
    assert_eq!(v["parity"]["integral"], true);
    assert_eq!(v["parity"]["unimodular"], false);
    assert_eq!(v["discriminant_group"]["order"], "12");
    assert_eq!(v["radical_snf"], Value::Array(vec![]));
    // No self-dual binary code exists here, so the census is withheld.
    assert_eq!(v["census"], Value::Null);
    assert!(v["hypothesis_failed"].is_string());
}

#[test]
fn report_expands_all_twists_by_default() {
    let out = orbilat_job(&["report", "--job", "-"], r#"{"p": 3, "d": 1}"#);
    assert_eq!(exit_code(&out), 0);
    let v = parsed(&out);
    let reports = v["reports"].as_array().expect("reports array");
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["s"], 1);
    assert_eq!(reports[1]["s"], 2);
    // The twist power never changes the fusion data.
    assert_eq!(reports[0]["qdim"], reports[1]["qdim"]);
    assert_eq!(reports[0]["dim_t"], reports[1]["dim_t"]);
}

#[test]
fn report_flags_a_failed_hypothesis_without_erroring() {
    // A one-dimensional binary code is never stable under the isometry here,
    // so the orbifold hypotheses fail; that is a finding, not an error.
    let job = r#"{"p": 3, "d": 1, "C_generators": [[1, 0]], "D_generators": [], "s": 1}"#;
    let out = orbilat_job(&["report", "--job", "-"], job);
    assert_eq!(exit_code(&out), 0);
    let v = parsed(&out);
    assert!(v["hypothesis_failed"].is_string());
    assert!(v.get("qdim").is_none());
}

#[test]
fn report_reads_a_job_file() {
    let path = std::env::temp_dir().join(format!("orbilat-job-{}.json", std::process::id()));
    std::fs::write(&path, BARE_N3).unwrap();
    let out = orbilat(&["report", "--job", path.to_str().unwrap()]);
    let from_stdin = orbilat_job(&["report", "--job", "-"], BARE_N3);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(out.stdout, from_stdin.stdout);
    std::fs::remove_file(&path).ok();
}

#[test]
fn even_p_is_a_usage_error() {
    let out = orbilat_job(&["report", "--job", "-"], r#"{"p": 4, "d": 1}"#);
    assert_eq!(exit_code(&out), 2);
    let v = parsed(&out);
    assert_eq!(v["error"]["kind"], "schema");
    assert!(v["error"]["message"].as_str().unwrap().contains("p must be odd"));
}

#[test]
fn wrong_generator_length_is_a_usage_error() {
    let job = r#"{"p": 3, "d": 1, "C_generators": [[1]], "D_generators": []}"#;
    let out = orbilat_job(&["report", "--job", "-"], job);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(parsed(&out)["error"]["kind"], "schema");
}

#[test]
fn malformed_json_is_a_usage_error() {
    let out = orbilat_job(&["report", "--job", "-"], "{nope");
    assert_eq!(exit_code(&out), 2);
    assert_eq!(parsed(&out)["error"]["kind"], "schema");
}

#[test]
fn unknown_job_field_is_a_usage_error() {
    let out = orbilat_job(&["report", "--job", "-"], r#"{"p": 3, "d": 1, "extra": true}"#);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(parsed(&out)["error"]["kind"], "schema");
}

#[test]
fn enumerate_streams_one_object_per_line() {
    let out = orbilat(&["enumerate", "--p", "3", "--d", "1"]);
    assert_eq!(exit_code(&out), 0);
    let lines: Vec<Value> = String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect();
    // All subspaces of a 2-dimensional binary space.
    assert_eq!(lines.len(), 5);
    for line in &lines {
        assert!(line["dim"].is_u64());
        assert!(line["generators"].is_array());
        assert!(line["sigma_invariant"].is_boolean());
    }
    // The symplectic form on a binary plane is nondegenerate and alternating,
    // so every line is self-dual while the zero code and the full space swap.
    let self_dual = lines.iter().filter(|l| l["self_dual"] == true).count();
    assert_eq!(self_dual, 3);
}

#[test]
fn enumerate_finds_no_invariant_even_self_dual_code_at_p3() {
    let out =
        orbilat(&["enumerate", "--p", "3", "--d", "1", "--sigma-invariant", "--even", "--self-dual"]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
}

#[test]
fn enumerate_p_ary_counts_self_orthogonal_codes() {
    // a^2 + b^2 = 0 mod 3 has no nonzero solution, so only the zero code
    // survives; mod 5 the isotropic lines are spanned by (1,2) and (1,3).
    let out = orbilat(&["enumerate", "--p", "3", "--d", "2", "--p-ary", "--self-orthogonal"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);

    let out = orbilat(&["enumerate", "--p", "5", "--d", "2", "--p-ary", "--self-orthogonal"]);
    assert_eq!(exit_code(&out), 0);
    let lines: Vec<Value> = String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l["self_orthogonal"] == true));
    assert_eq!(lines.iter().filter(|l| l["self_dual"] == true).count(), 2);
}

#[test]
fn enumerate_rejects_oversized_searches() {
    let out = orbilat(&["enumerate", "--p", "3", "--d", "13"]);
    assert_eq!(exit_code(&out), 3);
    assert_eq!(parsed(&out)["error"]["kind"], "resource");
}

#[test]
fn verify_duality_passes() {
    let out = orbilat(&["verify", "duality"]);
    assert_eq!(exit_code(&out), 0);
    let v = parsed(&out);
    assert_eq!(v["passed"], true);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "duality");
    assert!(suites[0]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_rejects_unknown_suites() {
    let out = orbilat(&["verify", "nosuch"]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(parsed(&out)["error"]["kind"], "usage");
}

#[test]
fn theta_reports_series_and_numeric_limit() {
    let out = orbilat_job(&["theta", "--job", "-", "--order", "3"], BARE_N3);
    assert_eq!(exit_code(&out), 0);
    let v = parsed(&out);
    let terms = v["theta"]["terms"].as_array().unwrap();
    assert_eq!(terms[0]["exponent"], "0");
    assert_eq!(terms[0]["coefficient"], "1");
    assert!(v["twisted_character"]["terms"].as_array().unwrap().len() > 1);
    let value = v["numeric_qdim"]["value"].as_f64().unwrap();
    assert!((value - 2.0).abs() < 1e-9);
    for sv in v["numeric_qdim"]["schedule_values"].as_array().unwrap() {
        let x = sv.as_f64().unwrap();
        assert!(x.is_finite() && x > 0.0 && x < value);
    }
}

#[test]
fn theta_accepts_a_custom_schedule() {
    let out = orbilat_job(&["theta", "--job", "-", "--y-schedule", "0.5,0.1"], BARE_N3);
    assert_eq!(exit_code(&out), 0);
    let v = parsed(&out);
    assert_eq!(v["numeric_qdim"]["schedule_values"].as_array().unwrap().len(), 2);
}
