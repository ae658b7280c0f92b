use std::path::Path;
use std::process::{Command, Output};

use hosi::cli::{FunctionSpec, RunConfig};

const EXE: &str = env!("CARGO_BIN_EXE_hosi");

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn hosi(args: &[&str]) -> Output {
    Command::new(EXE).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV report, keyed by header name.
fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().map(String::from).zip(r.iter().map(String::from)).collect()
        })
        .collect()
}

#[test]
fn function_grammar_examples() {
    assert_eq!(FunctionSpec::parse("rect:eps=0.1,0.2").unwrap().dim(), 2);
    assert!(FunctionSpec::parse("rect:eps=0.1,0.2").unwrap().oracle().is_some());
    assert_eq!(FunctionSpec::parse("gfunction:a=0,1,9").unwrap().dim(), 3);
    let ext = FunctionSpec::parse(&format!("extern:sh {}", fixture("echo_first.sh"))).unwrap();
    assert_eq!(ext.dim(), 2);
    assert!(ext.oracle().is_none());
}

#[test]
fn oracle_prints_rectangle_values() {
    let out = hosi(&["oracle", "-f", "rect:eps=0.1,0.2", "--p", "3", "--subsets", "all"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 3);
    let eps: f64 = 0.02;
    for (row, inner) in rows.iter().zip([0.1f64.powi(-2), 0.2f64.powi(-2), eps.powi(-2)]) {
        let value: f64 = row["value"].parse().unwrap();
        let exact = eps.powi(3) * (inner - 1.0);
        assert!((value - exact).abs() < 1e-15, "{row:?}");
        assert_eq!(row["estimator"], "exact");
    }
}

#[test]
fn header_carries_the_full_config() {
    let out = hosi(&["estimate", "-f", "gfunction:a=0,1", "--n", "500", "--seed", "77", "--p", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in ["# seed=77", "# n=500", "# p=3", "# function=gfunction:a=0,1", "# estimator=difference", "# family=moment"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
    assert!(text.contains("# note: p = 3 is odd"));
    assert!(text.contains("\nsubset,family,p,estimator,n,seed,value,std_error\n"));
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let base = ["compare", "-f", "product:linear(1,0.5),cosine(0.3),indicator(0.4,0.1)", "--p", "4", "--subsets", "all", "--n", "3000"];
    let csv_out = hosi(&[&base[..], &["--format", "csv"]].concat());
    let json_out = hosi(&[&base[..], &["--format", "json"]].concat());
    let rows = csv_rows(&stdout(&csv_out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), json_rows.len());
    for (c, j) in rows.iter().zip(json_rows) {
        assert_eq!(c["subset"], j["subset"].as_str().unwrap());
        for key in ["value", "std_error", "oracle", "z"] {
            let a: f64 = c[key].parse().unwrap();
            assert_eq!(a.to_bits(), j[key].as_f64().unwrap().to_bits(), "{key}");
        }
    }
    assert_eq!(doc["config"]["seed"], 0);
}

#[test]
fn worker_count_does_not_change_values() {
    let run = |workers: &str| {
        let out = hosi(&["estimate", "-f", "gfunction:a=0,1,9", "--family", "walsh", "--base", "3", "--p", "4", "--subsets", "all", "--n", "9000", "--workers", workers]);
        csv_rows(&stdout(&out))
            .into_iter()
            .map(|r| (r["value"].clone(), r["std_error"].clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("6"));
}

#[test]
fn constant_function_scores_zero() {
    let out = hosi(&["compare", "-f", "product:linear(2,0),linear(1,0)", "--p", "4", "--subsets", "all", "--n", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for row in csv_rows(&stdout(&out)) {
        assert_eq!(row["value"], "0");
        assert_eq!(row["oracle"], "0");
        assert_eq!(row["z"], "0");
    }
}

#[test]
fn compare_exit_code_tracks_z_max() {
    let args = ["compare", "-f", "gfunction:a=0,1", "--p", "2", "--n", "20000"];
    assert_eq!(hosi(&args).status.code(), Some(0));
    let strict = hosi(&[&args[..], &["--z-max", "1e-9"]].concat());
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn compare_needs_an_oracle() {
    let f = format!("extern:sh {}", fixture("echo_first.sh"));
    let out = hosi(&["compare", "-f", &f, "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hosi estimate"));
}

#[test]
fn invalid_flags_fail_before_evaluation() {
    for (args, flag) in [
        (vec!["estimate", "-f", "rect:eps=0.1", "--p", "1"], "--p"),
        (vec!["estimate", "-f", "rect:eps=0.1", "--family", "walsh", "--estimator", "centered"], "--estimator"),
        (vec!["estimate", "-f", "rect:eps=0.1", "--subsets", "triples"], "--subsets"),
        (vec!["estimate", "-f", "rect:eps=0.1,0.2", "--subsets", "{3}"], "--subsets"),
    ] {
        let out = hosi(&args);
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
    let out = hosi(&["estimate", "-f", "product:linear(0.3),cosine(x)"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("position"));
}

#[test]
fn dirichlet_estimator_matches_weighted_oracle() {
    let out = hosi(&[
        "compare", "-f", "product:cosine(1,0.5),linear(0.5,0.2)", "--family", "fourier", "--estimator", "dirichlet",
        "--p", "3", "--cutoff", "1", "--n", "50000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["subset"], "{1,2}");
}

#[test]
fn components_transform_back_to_indices() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed.csv");
    let comps = dir.path().join("comps.csv");
    let again = dir.path().join("again.csv");
    let p = |x: &Path| x.to_str().unwrap().to_string();
    let out = hosi(&["oracle", "-f", "gfunction:a=0,1,9", "--p", "4", "--subsets", "all", "--out", &p(&closed)]);
    assert!(out.status.success());
    assert!(hosi(&["transform", "-i", &p(&closed), "--out", &p(&comps)]).status.success());
    assert!(hosi(&["transform", "-i", &p(&comps), "--inverse", "--out", &p(&again)]).status.success());

    let direct = hosi(&["oracle", "-f", "gfunction:a=0,1,9", "--p", "4", "--subsets", "all", "--quantity", "component"]);
    let by_subset = |text: &str| {
        csv_rows(text)
            .into_iter()
            .map(|r| (r["subset"].clone(), r["value"].parse::<f64>().unwrap()))
            .collect::<std::collections::BTreeMap<_, _>>()
    };
    let agree = |a: &std::collections::BTreeMap<String, f64>, b: &std::collections::BTreeMap<String, f64>| {
        assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
        for (k, x) in a {
            assert!((x - b[k]).abs() < 1e-12 * (1.0 + x.abs()), "{k}: {x} vs {}", b[k]);
        }
    };
    let read = |path: &Path| std::fs::read_to_string(path).unwrap();
    agree(&by_subset(&stdout(&direct)), &by_subset(&read(&comps)));
    agree(&by_subset(&read(&closed)), &by_subset(&read(&again)));
}

#[test]
fn component_estimates_track_oracle_components() {
    let out = hosi(&[
        "compare", "-f", "additive:linear(0.5,0.3),indicator(0.25),linear(-0.2,0.6)", "--p", "4",
        "--quantity", "component", "--subsets", "pairs", "--n", "40000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["estimator"] == "moebius(product_difference)"));
}

#[test]
fn config_round_trips_through_serde() {
    let cli = <hosi::cli::Cli as clap::Parser>::try_parse_from(["hosi", "estimate", "-f", "rect:eps=0.3", "--seed", "5"]).unwrap();
    let hosi::cli::Command::Estimate(args) = cli.command else { panic!() };
    let cfg = RunConfig::from_args("estimate", &args, None).unwrap();
    let json = serde_json::to_value(&cfg).unwrap();
    assert_eq!(json["seed"], 5);
    assert_eq!(json["subsets"], "singletons");
}
