//! End-to-end tests of the binary: exit codes, report self-consistency,
//! and byte-identical output under fixed flags.

use std::path::Path;
use std::process::{Command, Output};

use filtkit::prefix::Prefix;
use filtkit::solution::{score, ObjectiveKind};
use filtkit::traffic::{Role, WeightedAddressSet};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filtkit"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn write_fixtures(dir: &Path) {
    std::fs::write(dir.join("bad4.txt"), "0\n3\n4\n5\n7\n8\n10\n11\n12\n").unwrap();
    std::fs::write(dir.join("good4.txt"), "1\n2\n6\n9\n13\n14\n15\n").unwrap();
}

#[test]
fn solve_report_is_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let output = run(
        &["solve", "block-all", "--bad", "bad4.txt", "--good", "good4.txt", "--f-max", "4", "--width", "4", "--no-timing"],
        dir.path(),
    );
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["schema"], 1);

    // Re-score the emitted filter list against the input files; every
    // metric must reproduce exactly.
    let filters: Vec<Prefix> = report["filters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| Prefix::parse(f.as_str().unwrap()).unwrap())
        .collect();
    let bad = WeightedAddressSet::load_path(dir.path().join("bad4.txt"), Role::Bad, 4).unwrap();
    let good = WeightedAddressSet::load_path(dir.path().join("good4.txt"), Role::Good, 4).unwrap();
    let rescored = score(ObjectiveKind::BlockAll, &filters, &good, &bad).unwrap();
    let metrics = &report["metrics"];
    assert_eq!(metrics["collateral_damage"], rescored.collateral_damage);
    assert_eq!(metrics["blocked_bad"], rescored.blocked_bad);
    assert_eq!(metrics["unblocked_bad_count"], rescored.unblocked_bad_count);
    assert_eq!(metrics["objective"], rescored.objective);
    assert_eq!(metrics["filters_used"], rescored.filters_used);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let args = [
        "solve", "block-some", "--bad", "bad4.txt", "--good", "good4.txt", "--f-max", "3",
        "--width", "4", "--weight-ratio", "16", "--seed", "9", "--no-timing",
    ];
    let a = run(&args, dir.path());
    let b = run(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // Timing on: still succeeds, but the runtime field may differ.
    let timed = run(&args[..args.len() - 1], dir.path());
    assert!(stdout(&timed).contains("runtime_ms"));
}

#[test]
fn exit_codes_cover_usage_infeasible_and_success() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());

    // Usage error: unknown flag.
    let usage = run(&["solve", "block-all", "--nope"], dir.path());
    assert_eq!(usage.status.code(), Some(1));

    // Input error: missing file.
    let missing = run(
        &["solve", "block-all", "--bad", "nothere.txt", "--f-max", "2"],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(1));

    // Infeasible: zero filters on a nonempty blacklist.
    let infeasible = run(
        &["solve", "block-all", "--bad", "bad4.txt", "--good", "good4.txt", "--f-max", "0", "--width", "4"],
        dir.path(),
    );
    assert_eq!(infeasible.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&infeasible)).unwrap();
    assert_eq!(report["error"], "infeasible");

    // Help exits 0.
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn flooding_with_slack_capacity_blocks_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2,10\n3,10\n8,10\n9,10\n").unwrap();
    std::fs::write(dir.path().join("good.txt"), "1,5\n10,5\n20,5\n").unwrap();
    let output = run(
        &["solve", "flooding", "--bad", "bad.txt", "--good", "good.txt", "--f-max", "2",
          "--capacity", "55", "--width", "5", "--no-timing"],
        dir.path(),
    );
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["metrics"]["collateral_damage"], 0);
    assert_eq!(report["filters"].as_array().unwrap().len(), 0);
}

#[test]
fn lagrangian_flooding_emits_trace_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2,10\n3,10\n8,10\n9,10\n").unwrap();
    std::fs::write(dir.path().join("good.txt"), "1,5\n10,5\n20,5\n").unwrap();
    let output = run(
        &["solve", "flooding", "--bad", "bad.txt", "--good", "good.txt", "--f-max", "2",
          "--capacity", "10", "--width", "5", "--lagrangian", "--max-iters", "50",
          "--trace", "trace.jsonl", "--no-timing"],
        dir.path(),
    );
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let primal = report["metrics"]["collateral_damage"].as_u64().unwrap();
    let bound = report["dual_bound"].as_f64().unwrap();
    assert!(bound <= primal as f64 + 1e-9, "dual bound above primal");

    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert!(!trace.is_empty());
    for line in trace.lines() {
        let point: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(point["lambda"].as_f64().unwrap() >= 0.0);
        assert!(point["dual_value"].as_f64().unwrap() <= primal as f64 + 1e-9);
    }
}

#[test]
fn sweep_rows_match_independent_solves() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let sweep = run(
        &["sweep", "block-all", "--bad", "bad4.txt", "--good", "good4.txt", "--f-range", "1..9", "--width", "4"],
        dir.path(),
    );
    assert!(sweep.status.success());
    let body = stdout(&sweep);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("F,CD,UBIP,objective"));
    let rows: Vec<Vec<i64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows.last().unwrap()[1], 0, "full budget reaches zero damage");
    for row in &rows {
        let solve = run(
            &["solve", "block-all", "--bad", "bad4.txt", "--good", "good4.txt", "--f-max",
              &row[0].to_string(), "--width", "4", "--no-timing"],
            dir.path(),
        );
        let report: serde_json::Value = serde_json::from_str(&stdout(&solve)).unwrap();
        assert_eq!(report["metrics"]["collateral_damage"].as_i64().unwrap(), row[1]);
        assert_eq!(report["metrics"]["objective"].as_i64().unwrap(), row[3]);
    }
}

#[test]
fn sweeps_at_two_weight_ratios_trade_damage_for_coverage() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let mut curves = Vec::new();
    for (ratio, out) in [("2", "lo.csv"), ("1024", "hi.csv")] {
        let sweep = run(
            &["sweep", "block-some", "--bad", "bad4.txt", "--good", "good4.txt",
              "--f-range", "0..9", "--width", "4", "--weight-ratio", ratio, "--out", out],
            dir.path(),
        );
        assert!(sweep.status.success());
        let body = std::fs::read_to_string(dir.path().join(out)).unwrap();
        let rows: Vec<Vec<i64>> = body
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 10);
        curves.push(rows);
    }
    // A heavy bad weight forces full coverage at every budget >= 1; a light
    // one tolerates unblocked bad IPs to cut collateral damage.
    let (lo, hi) = (&curves[0], &curves[1]);
    assert!(hi.iter().skip(1).all(|row| row[2] == 0), "heavy ratio leaves bad IPs");
    for (a, b) in lo.iter().zip(hi) {
        assert!(a[1] <= b[1], "light ratio should never block more good weight");
    }
    assert_ne!(lo, hi);
}

#[test]
fn update_replays_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad6.txt"), "3\n10\n15\n17\n22\n31\n32\n33\n57\n58\n")
        .unwrap();
    std::fs::write(dir.path().join("ops.txt"), "insert 37\nremove 3\nremove 99\n").unwrap();
    let output = run(
        &["update", "--state", "state.txt", "--ops", "ops.txt", "--bad", "bad6.txt",
          "--f-max", "4", "--width", "6", "--problem", "block-all", "--verify"],
        dir.path(),
    );
    assert!(output.status.success());
    let lines: Vec<serde_json::Value> =
        stdout(&output).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // Insert of 37 splits one edge: exactly one new internal node.
    assert_eq!(lines[0]["op"], "insert");
    assert_eq!(lines[0]["new_nodes"], 2);
    assert_eq!(lines[0]["new_internal_nodes"], 1);
    assert_eq!(lines[1]["op"], "remove");
    assert!(lines[2]["error"].is_string(), "bad op reported inline");
    let verify = lines.last().unwrap();
    assert_eq!(verify["equal"], true);

    // State persisted and reloadable: an empty ops file is a no-op.
    std::fs::write(dir.path().join("noop.txt"), "").unwrap();
    let state_before = std::fs::read_to_string(dir.path().join("state.txt")).unwrap();
    let rerun = run(&["update", "--state", "state.txt", "--ops", "noop.txt"], dir.path());
    assert!(rerun.status.success());
    assert_eq!(stdout(&rerun), "");
    let state_after = std::fs::read_to_string(dir.path().join("state.txt")).unwrap();
    assert_eq!(state_before, state_after);

    // Strict mode aborts on the error instead.
    let strict = run(
        &["update", "--state", "state.txt", "--ops", "ops.txt", "--strict"],
        dir.path(),
    );
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn dist_flooding_scenario_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("r1bad.txt"), "2,10\n3,10\n").unwrap();
    std::fs::write(dir.path().join("r1good.txt"), "1,5\n").unwrap();
    std::fs::write(dir.path().join("r2bad.txt"), "40,10\n41,10\n").unwrap();
    std::fs::write(dir.path().join("r2good.txt"), "42,5\n").unwrap();
    std::fs::write(
        dir.path().join("scen.txt"),
        "width = 6\n[router gw1]\nf_max = 2\ncapacity = 5\nbad = r1bad.txt\ngood = r1good.txt\n\
         [router gw2]\nf_max = 2\ncapacity = 5\nbad = r2bad.txt\ngood = r2good.txt\n",
    )
    .unwrap();
    let output = run(
        &["solve", "dist-flooding", "--scenario", "scen.txt", "--rounds", "5", "--no-timing",
          "--trace", "trace.jsonl"],
        dir.path(),
    );
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["problem"], "dist-flooding");
    assert_eq!(report["total_collateral_damage"], 0);
    assert_eq!(report["routers"].as_array().unwrap().len(), 2);

    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    for line in trace.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(record["k"].is_number());
        assert!(record["dual_value"].is_number());
    }
}

#[test]
fn bench_emits_monotone_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        &["bench", "--n-range", "200..800", "--trials", "2", "--f-max", "16", "--clusters", "4", "--seed", "5"],
        dir.path(),
    );
    assert!(output.status.success());
    let body = stdout(&output);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("N,median_runtime_ms"));
    let sizes: Vec<u64> =
        lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(sizes, vec![200, 400, 800]);
}
