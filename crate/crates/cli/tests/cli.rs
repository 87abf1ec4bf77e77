use std::path::PathBuf;
use std::process::{Command, Output};

fn hypid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypid"))
        .args(args)
        .env_remove("HYPID_TERM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypid-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(line: &str) -> serde_json::Value {
    serde_json::from_str(line).unwrap()
}

#[test]
fn eval_log_series() {
    let o = hypid(&["eval", "1,1;2;0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(stdout(&o).trim());
    let re = v["value"][0].as_f64().unwrap();
    assert!((re - 4f64.ln()).abs() < 1e-14);
    assert_eq!(v["converged"], true);
}

#[test]
fn eval_unit_argument_and_negative_x() {
    let o = hypid(&["eval", "0.5,0.5;1.5;1"]);
    assert_eq!(o.status.code(), Some(0));
    let re = json(stdout(&o).trim())["value"][0].as_f64().unwrap();
    assert!((re - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let o = hypid(&["eval", ";;-0.5+0.25i"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(stdout(&o).trim());
    let expect = num_exp(-0.5, 0.25);
    assert!((v["value"][0].as_f64().unwrap() - expect.0).abs() < 1e-14);
    assert!((v["value"][1].as_f64().unwrap() - expect.1).abs() < 1e-14);
}

fn num_exp(re: f64, im: f64) -> (f64, f64) {
    (re.exp() * im.cos(), re.exp() * im.sin())
}

#[test]
fn eval_parse_error_reports_position() {
    let o = hypid(&["eval", "1,zz;2;0.3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("position 2"), "{err}");
}

#[test]
fn term_cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_hypid"))
        .args(["eval", "1,1;2;0.99"])
        .env("HYPID_TERM_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(stdout(&o).trim())["converged"], false);
    let o = Command::new(env!("CARGO_BIN_EXE_hypid"))
        .args(["eval", "1,1;2;0.5"])
        .env("HYPID_TERM_CAP", "ten")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_is_deterministic_and_writes_file() {
    let args = [
        "check",
        "--identities",
        "MP2,THM1,COR7b",
        "--draws",
        "4",
        "--seed",
        "11",
    ];
    let a = hypid(&args);
    let b = hypid(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    let last = json(out.lines().last().unwrap());
    assert_eq!(last["summary"]["count"], 12);
    assert_eq!(last["summary"]["pass"], 12);

    let path = scratch("check.jsonl");
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let c = hypid(&with_out);
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), out);
}

#[test]
fn explicit_cases_round_trip() {
    let o = hypid(&["check", "--identities", "THM3,THM6", "--draws", "3"]);
    let out = stdout(&o);
    let records: Vec<serde_json::Value> = out
        .lines()
        .map(json)
        .filter(|v| v.get("case").is_some())
        .collect();
    let cases: String = records
        .iter()
        .map(|r| r["case"].to_string() + "\n")
        .collect();
    let path = scratch("cases.jsonl");
    std::fs::write(&path, &cases).unwrap();
    let again = hypid(&["check", "--cases", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    let replay: Vec<serde_json::Value> = stdout(&again)
        .lines()
        .map(json)
        .filter(|v| v.get("case").is_some())
        .collect();
    assert_eq!(replay.len(), records.len());
    for (x, y) in records.iter().zip(&replay) {
        assert_eq!(x["rel_err"], y["rel_err"]);
    }

    // a tolerance below the achieved error turns the case into a failure
    let worst = records
        .iter()
        .max_by(|x, y| {
            x["rel_err"]
                .as_f64()
                .partial_cmp(&y["rel_err"].as_f64())
                .unwrap()
        })
        .unwrap();
    let err = worst["rel_err"].as_f64().unwrap();
    assert!(err > 0.0);
    let mut case = worst["case"].clone();
    case["tol"] = serde_json::json!(err / 10.0);
    std::fs::write(&path, case.to_string()).unwrap();
    let strict = hypid(&["check", "--cases", path.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn bad_inputs_exit_two() {
    assert_eq!(
        hypid(&["check", "--identities", "NOPE"]).status.code(),
        Some(2)
    );
    assert_eq!(hypid(&["check", "--draws", "0"]).status.code(), Some(2));
    assert_eq!(hypid(&["check", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(hypid(&["frobnicate"]).status.code(), Some(2));
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "seed = 3\ncolour = blue\n").unwrap();
    assert_eq!(
        hypid(&["check", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = scratch("missing.jsonl");
    assert_eq!(
        hypid(&["check", "--cases", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_file_drives_check() {
    let cfg = scratch("run.cfg");
    std::fs::write(
        &cfg,
        "# small run\nseed = 5\ndraws = 2\nidentities = INTRO_A, EX2\n",
    )
    .unwrap();
    let o = hypid(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let last = json(stdout(&o).lines().last().unwrap());
    assert_eq!(last["summary"]["count"], 4);
}

#[test]
fn limits_csv_and_failure() {
    let o = hypid(&["limits", "--sets", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert!(rdr.headers().unwrap().iter().any(|h| h == "ratio_rel_err"));
    assert_eq!(rdr.records().count(), 12);

    let coarse = hypid(&["limits", "--sets", "3", "--eps", "0.5,0.4,0.3"]);
    assert_eq!(coarse.status.code(), Some(1));
    assert_eq!(hypid(&["limits", "--eps", "-1"]).status.code(), Some(2));
}

#[test]
fn golden_corpus_passes() {
    let o = hypid(&["golden"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let last = json(out.lines().last().unwrap());
    assert_eq!(last["summary"]["count"], last["summary"]["pass"]);
    assert!(out.contains("\"EX4_UNIT\""));
}
