use std::fs;
use std::path::Path;

use fabric_core::cli::{run, EXIT_BAD_INPUT, EXIT_OK, EXIT_VERIFY_FAILED};
use fabric_core::routing::{RoutePlan, SwitchSetting};

fn fabric(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("fabric").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn build_route_verify_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (net, plan) = (path(dir.path(), "net.json"), path(dir.path(), "plan.json"));
    let (code, _, _) = fabric(&["build", "--kind", "kr-benes", "--n", "16", "--out", &net]);
    assert_eq!(code, EXIT_OK);
    let perm = "1,0,3,2,5,4,7,6,9,8,11,10,13,12,15,14";
    let (code, _, _) = fabric(&["route", "--net", &net, "--perm", perm, "--out", &plan]);
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = fabric(&["verify", "--net", &net, "--plan", &plan]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"ok\": true"));
}

#[test]
fn verify_reports_tampered_plan() {
    let dir = tempfile::tempdir().unwrap();
    let (net, plan) = (path(dir.path(), "net.json"), path(dir.path(), "plan.json"));
    fabric(&["build", "--kind", "benes", "--n", "8", "--out", &net]);
    fabric(&[
        "route",
        "--net",
        &net,
        "--perm",
        "4,5,0,6,1,2,7,3",
        "--out",
        &plan,
    ]);
    let mut p = RoutePlan::from_json(&fs::read_to_string(&plan).unwrap()).unwrap();
    let SwitchSetting(c, pos, s) = p.settings[0];
    p.settings[0] = SwitchSetting(c, pos, s.flipped());
    fs::write(&plan, p.to_json()).unwrap();
    let (code, out, err) = fabric(&["verify", "--net", &net, "--plan", &plan]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    assert!(out.contains("wrong-output"));
    assert!(err.contains("violation"));
}

#[test]
fn structural_errors_are_not_verification_failures() {
    let dir = tempfile::tempdir().unwrap();
    let (net, plan) = (path(dir.path(), "net.json"), path(dir.path(), "plan.json"));
    fabric(&["build", "--kind", "benes", "--n", "8", "--out", &net]);
    fs::write(&plan, "{\"network\": 3}").unwrap();
    let (code, _, _) = fabric(&["verify", "--net", &net, "--plan", &plan]);
    assert_eq!(code, EXIT_BAD_INPUT);

    fabric(&[
        "route",
        "--net",
        &net,
        "--perm",
        "0,1,2,3,4,5,6,7",
        "--out",
        &plan,
    ]);
    let (code, _, err) = fabric(&[
        "verify",
        "--net",
        &net,
        "--plan",
        &plan,
        "--perm",
        "1,0,2,3,4,5,6,7",
    ]);
    assert_eq!(code, EXIT_BAD_INPUT);
    assert!(err.contains("different permutation"));
}

#[test]
fn route_rejects_unbounded_permutation_on_k_benes() {
    let (code, _, err) = fabric(&[
        "route",
        "--kind",
        "k-benes",
        "--n",
        "8",
        "--k",
        "2",
        "--perm",
        "7,1,2,3,4,5,6,0",
    ]);
    assert_eq!(code, EXIT_BAD_INPUT);
    assert!(!err.is_empty());
}

#[test]
fn route_reads_permutation_file() {
    let dir = tempfile::tempdir().unwrap();
    let perm = path(dir.path(), "perm.txt");
    fs::write(&perm, "3,2,1,0\n").unwrap();
    let (code, out, _) = fabric(&["route", "--kind", "benes", "--n", "4", "--perm-file", &perm]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        RoutePlan::from_json(&out).unwrap().permutation.as_slice(),
        &[3, 2, 1, 0]
    );
}

#[test]
fn sweep_is_byte_identical_for_a_seed() {
    let args = [
        "sweep", "--n", "16", "--trials", "25", "--seed", "42", "--dist", "locality",
    ];
    let (code, a, _) = fabric(&args);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = fabric(&args);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next(),
        Some("trial,seed,k_exact,K,terminal_visits,overhead,verified")
    );
    assert_eq!(lines.count(), 25);
    assert!(a.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn sweep_refuses_large_n() {
    let (code, _, _) = fabric(&["sweep", "--n", "128", "--trials", "1"]);
    assert_eq!(code, EXIT_BAD_INPUT);
}

#[test]
fn dot_and_count_write_output() {
    let dir = tempfile::tempdir().unwrap();
    let dot = path(dir.path(), "net.dot");
    let (code, _, _) = fabric(&[
        "dot", "--kind", "k-benes", "--n", "16", "--k", "4", "--out", &dot,
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let (code, out, _) = fabric(&["count", "--n", "8", "--k", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\"formula_count\": 1458"));
    assert!(out.contains("\"agrees\": null"));
}

#[test]
fn unknown_flag_exits_with_usage_error() {
    let (code, _, err) = fabric(&["route", "--bogus"]);
    assert_eq!(code, EXIT_BAD_INPUT);
    assert!(err.contains("--bogus"));
}

#[test]
fn verify_against_other_network_is_structural() {
    let dir = tempfile::tempdir().unwrap();
    let (net8, net16, plan) = (
        path(dir.path(), "b8.json"),
        path(dir.path(), "b16.json"),
        path(dir.path(), "plan.json"),
    );
    fabric(&["build", "--kind", "benes", "--n", "8", "--out", &net8]);
    fabric(&["build", "--kind", "benes", "--n", "16", "--out", &net16]);
    fabric(&[
        "route",
        "--net",
        &net8,
        "--perm",
        "4,5,0,6,1,2,7,3",
        "--out",
        &plan,
    ]);
    let (code, _, err) = fabric(&["verify", "--net", &net16, "--plan", &plan]);
    assert_eq!(code, EXIT_BAD_INPUT);
    assert!(err.contains("benes:8"));
}

#[test]
fn reversal_is_not_two_bounded() {
    let reversal: Vec<String> = (0..16).rev().map(|v| v.to_string()).collect();
    let perm = reversal.join(",");
    let (code, _, err) = fabric(&[
        "route", "--kind", "k-benes", "--n", "16", "--k", "2", "--perm", &perm,
    ]);
    assert_eq!(code, EXIT_BAD_INPUT);
    assert!(err.contains("bounded"), "{err}");
}

#[test]
fn kr_benes_identity_uses_unit_band() {
    let perm: Vec<String> = (0..16).map(|v| v.to_string()).collect();
    let (code, out, _) = fabric(&[
        "route",
        "--kind",
        "kr-benes",
        "--n",
        "16",
        "--perm",
        &perm.join(","),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(RoutePlan::from_json(&out).unwrap().k_used, Some(1));
}

#[test]
fn uniform_sweep_stays_under_benes_cost() {
    let (code, out, _) = fabric(&["sweep", "--n", "16", "--trials", "100", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let visits: Vec<usize> = reader
        .records()
        .map(|r| r.unwrap()[4].parse().unwrap())
        .collect();
    assert_eq!(visits.len(), 100);
    assert!(visits.iter().all(|&v| v <= 112));
}
