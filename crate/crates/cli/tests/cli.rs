use std::process::Command;

use kgamma_cli::report::{Record, Report};
use serde_json::Value;

fn kgamma(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kgamma"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out) = kgamma(args);
    (
        code,
        serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")),
    )
}

fn first_value(v: &Value) -> f64 {
    v["results"][0]["value"].as_str().unwrap().parse().unwrap()
}

#[test]
fn eval_factorial_anchor() {
    let (code, v) = json(&["eval", "gammak", "--k", "2", "--x", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["value"], "8");
    assert_eq!(v["results"][0]["backend"], "reduction");
}

#[test]
fn eval_digamma_at_one() {
    let (code, v) = json(&["eval", "digammak", "--k", "1", "--x", "1"]);
    assert_eq!(code, 0);
    assert!((first_value(&v) + 0.5772156649015329).abs() < 1e-15);
}

#[test]
fn eval_ratio_f_is_factorial() {
    let (_, v) = json(&["eval", "ratioF", "--k", "1", "--m", "3", "--x", "1"]);
    assert_eq!(v["results"][0]["value"], "2");
}

#[test]
fn eval_lists_expand_to_cartesian_product() {
    let (code, v) = json(&["eval", "lngammak", "--k", "0.5,1,2", "--x", "1,2,3,4"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"].as_array().unwrap().len(), 12);
}

#[test]
fn backends_are_selectable() {
    for backend in ["reduction", "series", "quadrature"] {
        let (code, v) = json(&[
            "eval",
            "gammak",
            "--k",
            "2",
            "--x",
            "3",
            "--backend",
            backend,
        ]);
        assert_eq!(code, 0, "{backend}");
        assert_eq!(v["results"][0]["backend"], backend);
        assert!(
            (first_value(&v) - 1.2533141373155003).abs() < 1e-10,
            "{backend}"
        );
    }
}

#[test]
fn missing_order_is_a_usage_error() {
    let (code, v) = json(&["eval", "polygammak", "--k", "1", "--x", "1"]);
    assert_eq!(code, 3);
    assert_eq!(v["results"][0]["kind"], "error");
    assert_eq!(v["results"][0]["error_kind"], "usage");
}

#[test]
fn domain_errors_exit_three() {
    for args in [
        &["eval", "gammak", "--k", "-1", "--x", "1"][..],
        &["eval", "gammak", "--k", "1", "--x", "0"],
        &["eval", "ratioF", "--k", "1", "--m", "1", "--x", "1"],
        &["certify", "cor1-lower", "--grid", "0.1:0.9:5:lin"],
        &["identity", "no-such-identity"],
        &["certify", "no-such-claim"],
        &[
            "eval",
            "gammak",
            "--k",
            "1",
            "--x",
            "1",
            "--backend",
            "lanczos",
        ],
    ] {
        let (code, v) = json(args);
        assert_eq!(code, 3, "{args:?}");
        assert_eq!(v["results"][0]["kind"], "error", "{args:?}");
    }
    let (code, _) = kgamma(&["frobnicate"]);
    assert_eq!(code, 3);
    let (code, _) = kgamma(&["--help"]);
    assert_eq!(code, 0);
}

#[test]
fn identity_examples_pass() {
    let (code, v) = json(&["identity", "euler-product", "--k", "1", "--m", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["verdict"], "PASS");

    let (code, v) = json(&["identity", "lemma3", "--n", "1", "--t", "1"]);
    assert_eq!(code, 0);
    let delta: f64 = v["results"][0]["residual"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!((delta - 0.2386512185).abs() < 1e-9);

    let (code, v) = json(&["identity", "gauss-mult", "--k", "1", "--m", "2", "--x", "1"]);
    assert_eq!(code, 0);
    let r = &v["results"][0];
    let residual: f64 = r["residual"].as_str().unwrap().parse().unwrap();
    let threshold: f64 = r["threshold"].as_str().unwrap().parse().unwrap();
    assert!(residual.abs() < threshold);
}

#[test]
fn identity_default_grid() {
    let (code, v) = json(&["identity", "recurrence", "--k", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"].as_array().unwrap().len(), 50);
    assert_eq!(v["summary"]["pass"], 50);
}

#[test]
fn certify_thm1b_passes() {
    let (code, v) = json(&["certify", "thm1b", "--k", "1", "--m", "2", "--rmax", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["pass"], 6);
}

#[test]
fn certify_thm1a_fails_only_at_first_order() {
    let (code, v) = json(&["certify", "thm1a", "--k", "1", "--m", "2", "--rmax", "3"]);
    assert_eq!(code, 1);
    let results = v["results"].as_array().unwrap();
    let verdicts: Vec<&str> = results
        .iter()
        .map(|r| r["verdict"].as_str().unwrap())
        .collect();
    assert_eq!(verdicts, ["FAIL", "PASS", "PASS"]);
    let witness = results[0]["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .find(|w| w["x"] == 1.0)
        .expect("witness at x = 1");
    let s1: f64 = witness["value"].as_str().unwrap().parse().unwrap();
    assert!((s1 + 1.0).abs() < 1e-12);
}

#[test]
fn certify_cor3_passes_both_bounds() {
    let (code, v) = json(&["certify", "cor3", "--k", "1", "--m", "2"]);
    assert_eq!(code, 0);
    let ids: Vec<&str> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["claim_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["COR3_LOWER", "COR3_UPPER"]);
}

#[test]
fn cor1_alias_splits_the_grid() {
    let (code, v) = json(&["certify", "cor1", "--k", "1", "--m", "2"]);
    assert_eq!(code, 1);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert_eq!(results[0]["grid"]["side"], "above_k");
    assert_eq!(results[2]["grid"]["side"], "below_k");
    assert_eq!(results[0]["verdict"], "PASS");
    assert_eq!(results[1]["verdict"], "FAIL");
    assert_eq!(results[2]["verdict"], "PASS");
}

#[test]
fn sweep_lemma3_passes() {
    let (code, v) = json(&["sweep", "--claims", "lemma3", "--n", "1..8"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["pass"], 8);
    assert_eq!(v["combinations"].as_array().unwrap().len(), 8);
}

#[test]
fn sweep_cor1_upper_fails_with_witness_at_two() {
    let (code, v) = json(&["sweep", "--claims", "cor1-upper", "--k", "1", "--m", "2"]);
    assert_eq!(code, 1);
    let witnesses = v["results"][0]["witnesses"].as_array().unwrap();
    let w = witnesses
        .iter()
        .find(|w| w["x"] == 2.0)
        .expect("x = 2 is sampled");
    let slack: f64 = w["value"].as_str().unwrap().parse().unwrap();
    // ln(2/6)
    assert!((slack - (1.0f64 / 3.0).ln()).abs() < 1e-12);
}

#[test]
fn sweep_fail_dominates_later_passes() {
    let (code, v) = json(&[
        "sweep",
        "--claims",
        "cor2,cor3-lower",
        "--k",
        "1",
        "--m",
        "2",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["summary"]["fail"], 1);
    assert_eq!(v["summary"]["pass"], 1);
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn reports_are_deterministic_modulo_timestamp() {
    let args = [
        "certify",
        "cor3",
        "--k",
        "0.5,2",
        "--m",
        "2,3",
        "--grid",
        "0.01:100:40:log",
    ];
    let (c1, a) = json(&args);
    let (c2, b) = json(&args);
    assert_eq!(c1, c2);
    assert_eq!(strip_timestamp(a), strip_timestamp(b));
}

#[test]
fn json_schema_keys_and_round_trip() {
    let (code, out) = kgamma(&[
        "sweep", "--claims", "thm1a", "--k", "1", "--m", "2", "--rmax", "2",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    for key in [
        "version",
        "timestamp",
        "config",
        "results",
        "summary",
        "exit_code",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["pass", "fail", "indeterminate"] {
        assert!(v["summary"][key].is_u64());
    }
    assert_eq!(v["exit_code"], code);
    let report: Report = serde_json::from_str(&out).unwrap();
    let again = serde_json::to_value(&report).unwrap();
    assert_eq!(again, v);
    assert!(report
        .results
        .iter()
        .all(|r| matches!(r, Record::Certificate(_))));
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let base = [
        "identity",
        "digamma-mult",
        "--k",
        "0.5,2",
        "--m",
        "3",
        "--x",
        "0.1,1,10",
    ];
    let (_, v) = json(&base);
    let mut args = base.to_vec();
    args.extend(["--format", "csv"]);
    let (_, csv_out) = kgamma(&args);
    let mut reader = csv::Reader::from_reader(csv_out.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let results = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), results.len());
    for (row, r) in rows.iter().zip(results) {
        assert_eq!(&row[6], r["residual"].as_str().unwrap());
        assert_eq!(&row[8], r["threshold"].as_str().unwrap());
        assert_eq!(&row[9], r["verdict"].as_str().unwrap());
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (code, stdout) = kgamma(&[
        "eval",
        "gammak",
        "--k",
        "1",
        "--x",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(first_value(&v), 24.0);
}

#[test]
fn digits_control_serialized_precision() {
    let (_, v) = json(&["eval", "gammak", "--k", "1", "--x", "0.5", "--digits", "30"]);
    let s = v["results"][0]["value"].as_str().unwrap();
    assert!(s.starts_with("1.77245385090551602729816748334"), "{s}");
    assert_eq!(v["config"]["target_digits"], 30);
}

#[test]
fn text_format_is_human_readable() {
    let (code, out) = kgamma(&[
        "identity", "lemma3", "--n", "1", "--t", "1", "--format", "text",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("lemma3(n=1, t=1)"));
    assert!(out.contains("exit 0"));
}
