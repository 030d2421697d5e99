use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn orbindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbindex"))
        .args(args)
        .env_remove("ORBINDEX_MAX_ORDER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn d3_file() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/d3_sphere.json")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn football_total_in_json() {
    let o = orbindex(&["compute", "--model", "football", "--n", "3", "--operator", "dolbeault", "--twist", "O:4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["total"], "2");
    assert_eq!(v["total_int"], 2);
    assert_eq!(v["oracle"], "2");
    assert_eq!(v["verdict"], "ok");
    assert_eq!(v["grouping"], "byCyclic");
    let values: Vec<&str> = v["contributions"].as_array().unwrap().iter().map(|c| c["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["5/3", "1/3"]);
}

#[test]
fn groupings_report_same_total() {
    for grouping in ["elements", "cyclic"] {
        let o = orbindex(&[
            "compute", "--wallpaper", "p6", "--operator", "dolbeault", "--twist", "O:0@1", "--grouping", grouping, "--format", "json",
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(json(&o)["total"], "0", "{grouping}");
    }
}

#[test]
fn spin_needs_lift_and_runs_with_one() {
    let o = orbindex(&["compute", "--model", "football", "--n", "4", "--operator", "spin", "--lift", "minus", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["total"], "0");
    let o = orbindex(&["compute", "--model", "football", "--n", "4", "--operator", "derham", "--lift", "plus"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn p4_has_six_cyclic_classes() {
    let o = orbindex(&["group", "--wallpaper", "p4", "--cyclic-classes", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let classes = v["cyclic_classes"].as_array().unwrap();
    assert_eq!(classes.len(), 6);
    let orders: Vec<u64> = classes.iter().map(|c| c["order"].as_u64().unwrap()).collect();
    assert_eq!(orders, [1, 2, 2, 2, 4, 4]);
}

#[test]
fn permutation_group_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.txt");
    std::fs::write(&path, "1 2 0\n1 0 2\n").unwrap();
    let o = orbindex(&["group", "--perm-file", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["classes"].as_array().unwrap().len(), 3);
    assert_eq!(v["cyclic_classes"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_catalog_passes() {
    let o = orbindex(&["verify", "--suite", "catalog", "--criterion", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("criterion 2 [PASS]"), "{text}");
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["frobnicate"][..],
        &["compute", "--model", "football", "--n", "3"],
        &["verify", "--suite", "everything"],
        &["verify", "--suite", "catalog", "--criterion", "9"],
        &["group", "--cyclic", "3", "--wallpaper", "p2"],
    ] {
        assert_eq!(orbindex(args).status.code(), Some(64), "{args:?}");
    }
    assert_eq!(orbindex(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_parameters_exit_3() {
    for args in [
        &["compute", "--model", "football", "--n", "13", "--operator", "derham"][..],
        &["compute", "--model", "torusrot", "--n", "5", "--operator", "derham"],
        &["compute", "--model", "torusrot", "--n", "4", "--operator", "dolbeault", "--twist", "O:1"],
        &["compute", "--model", "football", "--n", "3", "--operator", "derham", "--twist", "O:1"],
        &["compute", "--model", "symprod_s2", "--operator", "spin", "--lift", "plus"],
        &["compute", "--wallpaper", "p5", "--operator", "derham"],
        &["compute", "--model", "football", "--operator", "derham"],
        &["compute", "--model", "football", "--n", "3", "--operator", "dolbeault", "--twist", "O:x"],
    ] {
        let o = orbindex(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn max_order_cap() {
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_orbindex"))
            .args(["compute", "--model", "football", "--n", "5", "--operator", "spin", "--lift", "plus"])
            .env("ORBINDEX_MAX_ORDER", cap)
            .output()
            .unwrap()
            .status
            .code()
    };
    // spin on football(5) works over the 10th roots of unity
    assert_eq!(run("9"), Some(3));
    assert_eq!(run("10"), Some(0));
    assert_eq!(run("zero"), Some(3));
}

#[test]
fn custom_model_file() {
    let file = d3_file();
    let expect = [("derham", "none", "2"), ("dolbeault", "none", "1")];
    for (op, twist, total) in expect {
        let o = orbindex(&["compute", "--model-file", &file, "--operator", op, "--twist", twist, "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert_eq!(v["total"], total);
        assert_eq!(v["oracle"], Value::Null);
    }
    let o = orbindex(&["decompose", "--model-file", &file, "--operator", "derham"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("reconstruction ok"));
}

#[test]
fn model_file_conflicts_with_catalog_flags() {
    let o = orbindex(&["compute", "--model-file", &d3_file(), "--model", "football", "--operator", "derham"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn strata_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    for (flags, twist) in [
        (vec!["--model", "torusrot", "--n", "4"], "O:0@1"),
        (vec!["--model", "football", "--n", "6"], "O:3@5"),
        (vec!["--model", "symprod_s2"], "O:1"),
    ] {
        let mut dump = vec!["models"];
        dump.extend(&flags);
        dump.extend(["--format", "json"]);
        let o = orbindex(&dump);
        assert_eq!(o.status.code(), Some(0));
        let path = dir.path().join("model.json");
        std::fs::write(&path, &o.stdout).unwrap();

        let mut direct = vec!["compute"];
        direct.extend(&flags);
        direct.extend(["--operator", "dolbeault", "--twist", twist, "--rho", "char:1", "--format", "json"]);
        let from_catalog = json(&orbindex(&direct));
        let from_file = json(&orbindex(&[
            "compute", "--model-file", path.to_str().unwrap(), "--operator", "dolbeault", "--twist", twist, "--rho", "char:1", "--format", "json",
        ]));
        assert_eq!(from_catalog["total"], from_file["total"], "{flags:?}");
        assert_eq!(from_catalog["contributions"], from_file["contributions"], "{flags:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["decompose", "--model", "football", "--n", "6", "--operator", "dolbeault", "--format", "json"];
    let a = orbindex(&args);
    let b = orbindex(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let listing = orbindex(&["models", "--format", "json"]);
    let v = json(&listing);
    assert_eq!(v["models"].as_array().unwrap().len(), 22);
}
