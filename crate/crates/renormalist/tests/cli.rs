mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use renormalist::cli::{exit, main_with_args};
use serde_json::Value;

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn run(args: &[&str]) -> Run {
    run_env(args, None)
}

fn run_env(args: &[&str], threads: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_renormalist"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("RENORMALIST_THREADS", t),
        None => cmd.env_remove("RENORMALIST_THREADS"),
    };
    let out = cmd.output().expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

fn fx(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

fn gx(name: &str) -> String {
    graph_path(name).to_string_lossy().into_owned()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("invalid JSON ({e}):\n{s}"))
}

fn error_class(r: &Run) -> String {
    let v = json(r.stderr.trim());
    assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    v["error"]["class"].as_str().unwrap().to_string()
}

#[test]
fn trees_reports_sector_counts() {
    for (name, rhs, sol) in [("gpam", 4, None), ("phi43", 8, Some(4)), ("phi34", 9, Some(5))] {
        let r = run(&["trees", &fx(name), "--format", "json"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v = json(&r.stdout);
        let sectors = v["sectors"].as_array().unwrap();
        assert_eq!(sectors[0]["sector"], "rhs");
        assert_eq!(sectors[0]["count"], rhs);
        assert_eq!(sectors[0]["trees"].as_array().unwrap().len(), rhs as usize);
        if let Some(n) = sol {
            assert_eq!(sectors[1]["count"], n);
        }
        for t in sectors[0]["trees"].as_array().unwrap() {
            for field in ["tree", "homogeneity", "norm", "symmetry", "plane_count"] {
                assert!(t[field].is_string(), "{field}");
            }
        }
    }
    let r = run(&["trees", &fx("phi34"), "--sector", "solution"]);
    assert!(r.stdout.contains("sector solution: 5 trees"));
    assert!(!r.stdout.contains("sector rhs"));
}

#[test]
fn trees_flags_change_the_report() {
    // a lower cutoff keeps fewer trees
    let r = run(&["trees", &fx("phi43"), "--sector", "rhs", "--gamma=-1", "--format", "json"]);
    assert_eq!(r.code, 0);
    let n = json(&r.stdout)["sectors"][0]["count"].as_u64().unwrap();
    assert!(n < 8 && n > 0, "{n}");
    // δ₀ and κ are echoed and used
    let r = run(&["trees", &fx("phi43"), "--delta0", "10", "--kappa", "1/10", "--format", "json"]);
    let v = json(&r.stdout);
    assert_eq!(v["delta0"], "10");
    assert_eq!(v["kappa"], "1/10");
    let first = &v["sectors"][0]["trees"][0];
    assert_eq!(first["homogeneity"], "-5/2-kappa");
    assert!((first["homogeneity_value"].as_f64().unwrap() + 2.6).abs() < 1e-12);
}

#[test]
fn tree_formats() {
    let csv = run(&["trees", &fx("gpam"), "--format", "csv"]).stdout;
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sector,tree,homogeneity,homogeneity_value,norm,symmetry,plane_count"));
    assert_eq!(lines.count(), 6);

    let dot = run(&["trees", &fx("gpam"), "--sector", "rhs", "--format", "dot"]).stdout;
    assert_eq!(dot.matches("digraph").count(), 4);
    assert_eq!(dot.matches('{').count(), dot.matches('}').count());

    let neg = run(&["negatives", &fx("phi43"), "--format", "dot"]).stdout;
    assert_eq!(neg.matches("digraph").count(), 3);
    assert!(neg.contains("fillcolor"));
}

#[test]
fn negatives_lists_the_counterterm_trees() {
    let r = run(&["negatives", &fx("phi34"), "--format", "json"]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    let trees: Vec<&str> = v["trees"].as_array().unwrap().iter().map(|t| t["tree"].as_str().unwrap()).collect();
    let p = fixture("phi34");
    let mut want: Vec<String> = ["[I[Xi],I[Xi]]", "[I[I[I[Xi],I[Xi]],I[Xi]],I[Xi]]", "[I[I[Xi],I[Xi]],I[I[Xi],I[Xi]]]", "[I[I[Xi]],I[Xi]]"]
        .iter()
        .map(|s| tree(&p, s).format(&p.alphabet))
        .collect();
    let mut got: Vec<String> = trees.iter().map(|s| s.to_string()).collect();
    want.sort();
    got.sort();
    assert_eq!(got, want);
    let text = run(&["negatives", &fx("gpam")]).stdout;
    assert!(text.contains("2 negative trees"));
}

#[test]
fn renorm_emits_the_renormalised_equation() {
    let r = run(&["renorm", &fx("phi43")]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("F^u = -u^3 + 3*u*C - 9*u*C' + xi"), "{}", r.stdout);

    let v = json(&run(&["renorm", &fx("phi43"), "--format", "json"]).stdout);
    let terms = v["components"][0]["terms"].as_array().unwrap();
    let pairs: Vec<(String, String)> = terms
        .iter()
        .map(|t| (t["coefficient"].as_str().unwrap().to_string(), t["monomial"].as_str().unwrap().to_string()))
        .collect();
    assert!(pairs.contains(&("3".into(), "u*C".into())), "{pairs:?}");
    assert!(pairs.contains(&("-9".into(), "u*C'".into())), "{pairs:?}");
    assert!(pairs.contains(&("-1".into(), "u^3".into())), "{pairs:?}");
    assert_eq!(v["contributions"].as_array().unwrap().len(), 2);

    let gpam = run(&["renorm", &fx("gpam")]).stdout;
    assert!(gpam.contains("f(u)*f'(u)*C"), "{gpam}");
    let phi34 = run(&["renorm", &fx("phi34")]).stdout;
    assert!(phi34.contains("4*C211"), "{phi34}");
}

#[test]
fn counterterms_csv_carries_the_fit_summary() {
    let r = run(&["counterterms", &fx("gpam"), "--eps-grid", "3..8", "--resolution", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let data: Vec<&str> = r.stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "model,constant,eps,value,error");
    assert_eq!(data.len(), 1 + 2 * 6);
    for row in &data[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert!(cols[3].parse::<f64>().unwrap() > 0.0);
    }
    let fits: Vec<&str> = r.stdout.lines().filter(|l| l.starts_with("# fit")).collect();
    assert_eq!(fits.len(), 2);
    assert!(fits.iter().all(|l| l.contains("model=log") && l.contains("expected=log")));

    let j = json(&run(&["counterterms", &fx("gpam"), "--eps-grid", "3,4,5,6", "--resolution", "1", "--format", "json"]).stdout);
    assert!(j.is_object());
}

#[test]
fn graphcheck_exit_codes() {
    for name in ["gpam", "phi43", "phi34"] {
        let r = run(&["graphcheck", &gx(name), "--format", "json"]);
        assert_eq!(r.code, exit::OK, "{name}");
        let v = json(&r.stdout);
        assert_eq!(v["passed"], true);
        assert!(v["alpha_tilde_value"].as_f64().unwrap() > 0.0);
    }
    let r = run(&["graphcheck", &gx("violation")]);
    assert_eq!(r.code, exit::GRAPH_CHECK_FAILED);
    assert!(r.stdout.contains("violation: condition 1 on {u, v}"), "{}", r.stdout);
    let v = json(&run(&["graphcheck", &gx("violation"), "--format", "json"]).stdout);
    assert_eq!(v["violation"]["subset"], serde_json::json!(["u", "v"]));
}

#[test]
fn selftest_passes() {
    let r = run(&["selftest", "--seed", "7", "--trials", "5", "--format", "json"]);
    assert_eq!(r.code, exit::OK, "{}", r.stdout);
    let v = json(&r.stdout);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 7);
    assert!(v["checks"].as_array().unwrap().len() >= 12);
}

#[test]
fn failures_have_distinct_codes_and_json_errors() {
    let r = run(&["trees", "/nonexistent/model.toml"]);
    assert_eq!(r.code, exit::IO);
    assert_eq!(error_class(&r), "io");

    let r = run(&["frobnicate"]);
    assert_eq!(r.code, exit::USAGE);
    assert_eq!(error_class(&r), "usage");

    let r = run(&["trees", &fx("gpam"), "--format", "yaml"]);
    assert_eq!(r.code, exit::USAGE);

    let dir = std::env::temp_dir().join(format!("renormalist-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "name = [\n").unwrap();
    let r = run(&["trees", bad.to_str().unwrap()]);
    assert_eq!(r.code, exit::INPUT);
    assert_eq!(error_class(&r), "parse");

    let bad_graph = dir.join("bad.json");
    std::fs::write(&bad_graph, r#"{"scaling":"4","vertices":["s","s"],"star":"s","edges":[]}"#).unwrap();
    let r = run(&["graphcheck", bad_graph.to_str().unwrap()]);
    assert_eq!(r.code, exit::INPUT);

    let r = run(&["trees", &fx("gpam"), "--gamma", "one/two"]);
    assert_eq!(r.code, exit::INPUT);

    // a format a command does not support is a usage-level input error
    let r = run(&["renorm", &fx("gpam"), "--format", "csv"]);
    assert_ne!(r.code, exit::OK);
    assert!(r.stdout.is_empty());
    error_class(&r);

    let r = run_env(&["selftest", "--trials", "1"], Some("zero"));
    assert_eq!(r.code, exit::USAGE);
    let r = run_env(&["selftest", "--trials", "1"], Some("1"));
    assert_eq!(r.code, exit::OK);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_deterministic() {
    let cases: Vec<Vec<String>> = vec![
        vec!["trees".into(), fx("phi34"), "--format".into(), "json".into()],
        vec!["negatives".into(), fx("phi43"), "--format".into(), "dot".into()],
        vec!["renorm".into(), fx("gpam"), "--format".into(), "json".into()],
        vec!["graphcheck".into(), gx("phi34"), "--format".into(), "json".into()],
        vec!["counterterms".into(), fx("gpam"), "--eps-grid".into(), "3..6".into(), "--resolution".into(), "1".into()],
    ];
    for args in cases {
        let a: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let first = run_env(&a, Some("1"));
        let second = run(&a);
        assert_eq!(first.code, 0);
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn in_process_entry_point_matches_the_binary() {
    let path = fx("phi43");
    let (out, err, code) = main_with_args(["renormalist", "renorm", path.as_str()]);
    assert_eq!(code, 0);
    assert!(err.is_empty());
    assert_eq!(out, run(&["renorm", &path]).stdout);
    let (help, _, code) = main_with_args(["renormalist", "--help"]);
    assert_eq!(code, 0);
    for cmd in ["trees", "negatives", "renorm", "counterterms", "graphcheck", "selftest"] {
        assert!(help.contains(cmd), "{cmd}");
    }
    assert!(Path::new(&path).exists());
}
