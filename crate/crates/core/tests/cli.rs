use std::process::{Command, Output};

fn ectorsion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ectorsion"))
        .args(args)
        .env_remove("ECTORSION_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let out = ectorsion(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["constants", "structure", "howe", "main-term", "moments", "sample-box", "variance", "koblitz-census"] {
        assert!(text.contains(sub), "{sub}");
    }
}

#[test]
fn usage_and_operation_errors() {
    assert_eq!(ectorsion(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ectorsion(&["structure", "--p", "5"]).status.code(), Some(2));
    assert_eq!(ectorsion(&["structure", "--p", "5", "--a", "0", "--b", "0"]).status.code(), Some(1));
    assert_eq!(ectorsion(&["constants", "--function", "zeta"]).status.code(), Some(1));
    assert_eq!(ectorsion(&["variance", "--box-a", "9", "--box-b", "9", "--x-grid", "50", "--curves", "1"]).status.code(), Some(1));
}

#[test]
fn structure_report() {
    let v = json(&ectorsion(&["structure", "--p", "5", "--a", "1", "--b", "1"]));
    assert_eq!((v["N"].as_u64(), v["i"].as_u64(), v["e"].as_u64()), (Some(9), Some(1), Some(9)));
    assert_eq!(v["config"]["p"], 5);
    assert!(v["version"].is_string());
    let v = json(&ectorsion(&["structure", "--p", "7", "--a", "0", "--b", "-5"]));
    assert_eq!((v["N"].as_u64(), v["i"].as_u64()), (Some(9), Some(3)));
}

#[test]
fn constants_report() {
    let v = json(&ectorsion(&["constants", "--function", "cyclicity"]));
    assert_eq!(v["name"], "cyclicity");
    assert!((v["value"].as_f64().unwrap() - 0.8137).abs() < 1e-4);
    assert!(v["tail_bound"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["truncation"], 100000);
    assert_eq!(v["method"], "series");
    let e = json(&ectorsion(&["constants", "--function", "cyclicity", "--method", "euler", "--truncation", "1000"]));
    assert_eq!(e["method"], "euler_product");
    let m = json(&ectorsion(&["constants", "--function", "moment:1", "--truncation", "1000"]));
    assert!(m["value"].as_f64().unwrap() < 1.0);
}

#[test]
fn csv_reports_carry_config_comments() {
    let out = ectorsion(&["main-term", "--x-grid", "5,50", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# ectorsion "));
    assert!(text.contains("# function=cyclicity"));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "x,main_term,c0_li,rel_err");
    assert!(body[1].starts_with("5.0,0.6,"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\np=7\na=0\nb=2\n").unwrap();
    let v = json(&ectorsion(&["structure", "--config", cfg.to_str().unwrap()]));
    assert_eq!((v["N"].as_u64(), v["i"].as_u64()), (Some(9), Some(3)));
    let v = json(&ectorsion(&["structure", "--config", cfg.to_str().unwrap(), "--p", "5", "--a", "1", "--b", "1"]));
    assert_eq!(v["N"].as_u64(), Some(9));
    assert_eq!(v["config"]["p"], 5);
}

#[test]
fn output_file_and_checkpoint_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("m.csv");
    let out = dir.path().join("report.json");
    let ck_s = ck.to_str().unwrap();
    let first = ectorsion(&["main-term", "--x-grid", "100", "--checkpoint", ck_s, "--output", out.to_str().unwrap()]);
    assert!(first.status.success() && first.stdout.is_empty());
    let grown = json(&ectorsion(&["main-term", "--x-grid", "100,200", "--checkpoint", ck_s]));
    let fresh = json(&ectorsion(&["main-term", "--x-grid", "100,200"]));
    assert_eq!(grown["rows"], fresh["rows"]);
    let saved: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(saved["rows"][0], fresh["rows"][0]);
    let wrong = ectorsion(&["main-term", "--function", "tau", "--x-grid", "100", "--checkpoint", ck_s]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let runs: [&[&str]; 8] = [
        &["constants", "--function", "tau", "--truncation", "5000"],
        &["structure", "--p", "10007", "--a", "3", "--b", "11"],
        &["howe", "--p-max", "150"],
        &["main-term", "--function", "power_neg:1", "--x-grid", "50,150,300"],
        &["moments", "--k", "2", "--x-grid", "100,300"],
        &["sample-box", "--box-a", "1000", "--box-b", "1000", "--x", "60", "--samples", "200", "--seed", "9"],
        &["variance", "--box-a", "1000", "--box-b", "1000", "--x-grid", "40,80", "--curves", "30", "--seed", "4"],
        &["koblitz-census", "--x-grid", "50,200", "--truncation", "1000"],
    ];
    for args in runs {
        for format in ["json", "csv"] {
            let outputs: Vec<Vec<u8>> = ["1", "2", "8"]
                .iter()
                .map(|t| {
                    let mut full = args.to_vec();
                    full.extend(["--threads", t, "--format", format]);
                    let out = ectorsion(&full);
                    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
                    out.stdout
                })
                .collect();
            assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{args:?} {format}");
        }
    }
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ectorsion"))
        .args(["structure", "--p", "5", "--a", "1", "--b", "1"])
        .env("ECTORSION_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let ok = Command::new(env!("CARGO_BIN_EXE_ectorsion"))
        .args(["structure", "--p", "5", "--a", "1", "--b", "1"])
        .env("ECTORSION_THREADS", "3")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
