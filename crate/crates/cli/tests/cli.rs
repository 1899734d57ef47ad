//! End-to-end tests driving the `wnhcalc` binary over the checked-in
//! session fixtures: verdicts, exit codes, canonical renderings, and the
//! stability guarantees of the JSON layer.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wnhcalc")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
        out.status.code().expect("exit code"),
    )
}

fn run_on(session: &str, args: &[&str]) -> (String, i32) {
    let path = fixture(session);
    let mut full = vec![args[0], "--session", path.as_str()];
    full.extend_from_slice(&args[1..]);
    let (stdout, stderr, code) = run(&full);
    assert!(stderr.is_empty(), "unexpected stderr: {stderr}");
    (stdout, code)
}

#[test]
fn lie_transports_the_first_structure_to_the_second() {
    let (out, code) = run_on("kdv.session", &["lie", "--tau", "tau", "--op", "P"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("lie: value"), "{out}");
    assert!(out.contains("operator: [[D^3 + 2*u*D + u_1]]"), "{out}");
}

#[test]
fn lie_accepts_inline_vector_fields() {
    let (out, code) =
        run_on("kdv.session", &["lie", "--tau", "-(u^2 + u_2)/2", "--op", "P"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("operator: [[D^3 + 2*u*D + u_1]]"), "{out}");
}

#[test]
fn lie_moves_covectors_too() {
    let (out, code) = run_on("kdv.session", &["lie", "--tau", "u^2", "--covector", "u"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("covector: [\"3*u^2\"]"), "{out}");
    let (out, code) = run_on("kdv.session", &["lie", "--tau", "u_1", "--covector", "u"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("covector: [\"0\"]"), "{out}");
}

#[test]
fn compatibility_certificate_serializes_tau() {
    let (out, code) = run_on(
        "kdv.session",
        &["certify-compatible", "--p", "P", "--ptilde", "Pt", "--j", "Jinv"],
    );
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("certify-compatible: verified"), "{out}");
    assert!(out.contains("-3/4*u^2 - 1/2*u_1*nl0 - 1/2*u_2"), "{out}");
    assert!(out.contains("gamma0: [\"1/2*u_1\"]"), "{out}");
}

#[test]
fn casimir_refutes_with_the_witness() {
    let (out, code) = run_on("kdv.session", &["casimir", "--p", "Pt", "--psi", "u"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("casimir: refuted"), "{out}");
    assert!(out.contains("\"witness\":[\"u_1\"]"), "{out}");
    assert!(out.contains("residual: (u_1)"), "{out}");
}

#[test]
fn casimir_verifies_densities_in_the_kernel() {
    let (out, code) = run_on("kdv.session", &["casimir", "--p", "P", "--psi", "u, 7"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("casimir: verified"), "{out}");
}

#[test]
fn homotopy_reconstructs_the_potential_of_d() {
    let (out, code) = run_on("kdv.session", &["homotopy", "--op", "P"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("homotopy: verified"), "{out}");
    assert!(out.contains("zeta: [\"1/2*u_1\"]"), "{out}");
}

#[test]
fn nls_pair_certifies_as_hamiltonian() {
    let (out, code) = run_on(
        "nls.session",
        &["certify-hamiltonian", "--p", "P", "--ptilde", "Pt", "--j", "J"],
    );
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("certify-hamiltonian: verified"), "{out}");
    assert!(out.contains("\"-1/2*sq2*v*nl0 - 1/2*v_1\""), "{out}");
    assert!(out.contains("\"1/2*sq2*u*nl0 + 1/2*u_1\""), "{out}");
    assert!(out.contains("1/2*sq2*u*v_1 - 1/2*sq2*u_1*v"), "{out}");
}

#[test]
fn euler_takes_the_variational_derivative() {
    let (out, code) =
        run_on("kdv.session", &["euler", "--density", "u*u_2/2 + u^3/2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("gradient: [\"3/2*u^2 + u_2\"]"), "{out}");
}

#[test]
fn eval_canonicalizes_without_a_point() {
    let (out, code) = run_on("kdv.session", &["eval", "--expr", "(u + 1)^2 - u^2 - 1"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("value: 2*u\n"), "{out}");
}

#[test]
fn eval_computes_exact_rationals_at_a_point() {
    let (out, code) =
        run_on("kdv.session", &["eval", "--expr", "tau", "--at", "u=1/3, u_2=1"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("value: -5/9\n"), "{out}");
}

#[test]
fn eval_reports_algebraic_constants_symbolically() {
    let (out, code) =
        run_on("nls.session", &["eval", "--expr", "(u, sq2*v)", "--at", "u=1/3, v=2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("value: (1/3, 2*sq2)"), "{out}");
}

#[test]
fn adjoint_flips_the_sign_of_odd_orders() {
    let (out, code) = run_on("kdv.session", &["adjoint", "--op", "Pt"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("operator: [[-D^3 - 2*u*D - u_1]]"), "{out}");
}

#[test]
fn compose_chains_operators() {
    let (out, code) = run_on("kdv.session", &["compose", "--left", "Jinv", "--right", "Pt"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("compose: value"), "{out}");
}

#[test]
fn apply_resolves_exact_integrands_locally() {
    let (out, code) = run_on("kdv.session", &["apply", "--op", "Jinv", "--to", "u_1*u_2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("components: [\"1/2*u_1^2\"]"), "{out}");
    assert!(out.contains("introduced: []"), "{out}");
}

#[test]
fn apply_mints_a_symbol_for_irreducible_integrands() {
    let (out, code) = run_on("kdv.session", &["apply", "--op", "Jinv", "--to", "u_1^2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("introduced nonlocal variable `nl0` with density `u_1^2`"), "{out}");
}

#[test]
fn strict_mode_gives_an_inconclusive_verdict_instead() {
    let (out, code) = run_on(
        "kdv.session",
        &["apply", "--op", "Jinv", "--to", "u_1^2", "--strict-nonlocal"],
    );
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("apply: inconclusive"), "{out}");
    assert!(out.contains("the integral of `u_1^2` cannot be resolved"), "{out}");
}

#[test]
fn expand_writes_negative_powers_of_d() {
    let (out, code) = run_on("kdv.session", &["expand", "--op", "Jinv"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("series: [[D^-1]]"), "{out}");
    assert!(out.contains("truncated_below: -8"), "{out}");
}

#[test]
fn expand_honors_the_truncation_flag() {
    let (out, code) =
        run_on("kdv.session", &["expand", "--op", "Pt", "--truncate", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("series: [[D^3 + 2*u*D + u_1]]"), "{out}");
    assert!(out.contains("truncated_below: -2"), "{out}");
}

#[test]
fn certify_symplectic_checks_claimed_densities() {
    let (out, code) = run_on(
        "kdv.session",
        &["certify-symplectic", "--j", "Jinv", "--densities", "u"],
    );
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("certify-symplectic: verified"), "{out}");
    assert!(out.contains("\"density\":\"u\",\"weight\":\"1\""), "{out}");
}

#[test]
fn zero_order_certifies_constant_skew_forms() {
    let (out, code) = run_on("dn.session", &["zero-order", "--j", "Jconst"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("zero-order: verified"), "{out}");
    let (out, code) = run_on("dn.session", &["zero-order", "--j", "Jx"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("zero-order: verified"), "{out}");
}

#[test]
fn zero_order_refutes_the_non_closed_three_field_form() {
    let (out, code) = run_on("zero3.session", &["zero-order", "--j", "Jw"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("zero-order: refuted"), "{out}");
    assert!(out.contains("residual:"), "{out}");
}

#[test]
fn dn_validate_reports_flat_metrics_with_their_operator() {
    let (out, code) = run_on("kdv.session", &["dn-validate", "--metric", "g"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("dn-validate: verified"), "{out}");
    assert!(out.contains("operator: [[u*D + 1/2*u_1]]"), "{out}");
    assert!(out.contains("\"indices\":[1,1,1],\"value\":\"1/2\""), "{out}");
}

#[test]
fn dn_validate_names_a_nonzero_curvature_component() {
    let (out, code) = run_on("dn.session", &["dn-validate", "--metric", "gcurved"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("dn-validate: refuted"), "{out}");
    assert!(out.contains("residual: R[1,2,1,2] = -1/(u^2 + 1)"), "{out}");
}

#[test]
fn dn_canonical_accepts_a_rescaling_chart() {
    let (out, code) =
        run_on("dn.session", &["dn-canonical", "--metric", "gflat", "--map", "(u/2, v)"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("dn-canonical: verified"), "{out}");
    assert!(out.contains("eta: [[1, 0], [0, 1]]"), "{out}");
    assert!(out.contains("operator: [[D, 0], [0, D]]"), "{out}");
}

#[test]
fn dn_canonical_refutes_a_non_flattening_map() {
    let (out, code) =
        run_on("dn.session", &["dn-canonical", "--metric", "gflat", "--map", "(u^2, v)"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("dn-canonical: refuted"), "{out}");
}

#[test]
fn dn_canonical_rejects_maps_outside_the_ring() {
    let (out, code) =
        run_on("kdv.session", &["dn-canonical", "--metric", "g", "--map", "2*sqrt(u)"]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("unknown identifier `sqrt`"), "{out}");
}

#[test]
fn unknown_operator_names_are_input_errors() {
    let (out, code) = run_on("kdv.session", &["adjoint", "--op", "nosuch"]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("unknown operator `nosuch`"), "{out}");
}

#[test]
fn missing_session_flag_is_an_input_error() {
    let (stdout, _, code) = run(&["eval", "--expr", "u"]);
    assert_eq!(code, 3, "{stdout}");
    assert!(stdout.contains("pass `--session FILE`"), "{stdout}");
}

#[test]
fn shape_mismatch_in_a_declaration_is_reported_with_its_position() {
    let path = std::env::temp_dir().join("wnhcalc-shape-mismatch.session");
    std::fs::write(&path, "fields u, v;\nop P : Vs->V = [[D]];\n").expect("write temp session");
    let (stdout, _, code) =
        run(&["eval", "--session", path.to_str().expect("utf-8 path"), "--expr", "u"]);
    assert_eq!(code, 3, "{stdout}");
    assert!(stdout.contains("line 2, column 16"), "{stdout}");
    assert!(stdout.contains("matrix is 1x1 but the session declares 2 fields"), "{stdout}");
}

#[test]
fn json_reports_are_byte_stable_apart_from_timing() {
    let args =
        ["certify-compatible", "--p", "P", "--ptilde", "Pt", "--j", "Jinv", "--json"];
    let (first, code1) = run_on("kdv.session", &args);
    let (second, code2) = run_on("kdv.session", &args);
    assert_eq!(code1, 0);
    assert_eq!(code2, 0);
    let strip = |s: &str| s.split("\"timing_ms\":").next().expect("timing field").to_string();
    assert_eq!(strip(&first), strip(&second));
    assert!(first.contains("\"status\":\"verified\""), "{first}");
    assert!(first.contains("\"command\":\"certify-compatible\""), "{first}");
    assert!(first.contains("\"residual\":null"), "{first}");
}

#[test]
fn json_carries_the_residual_on_refutation() {
    let (out, code) =
        run_on("dn.session", &["dn-validate", "--metric", "gcurved", "--json"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("\"status\":\"refuted\""), "{out}");
    assert!(out.contains("\"residual\":\"R[1,2,1,2] = -1/(u^2 + 1)\""), "{out}");
}
