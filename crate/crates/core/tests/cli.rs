use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use serde_json::Value;
use sobolev_lab::asymptotics::{SweepReport, SweepSummary};
use sobolev_lab::cli::{execute, parse_config, resolve_output, sha256_hex, CliError, RunConfig, OUTPUT_ENV};

const BIN: &str = env!("CARGO_BIN_EXE_sobolev-lab");

fn config(body: &str) -> RunConfig {
    parse_config(body).unwrap()
}

fn sweep_config() -> &'static str {
    r#"
command = "sweep"
[domain]
shape = { kind = "disk", radius = 1.0 }
h = 0.125
[sweep]
ladder = [4, 8]
[inflap]
mode = "jacobi"
"#
}

fn check_manifest(dir: &Path) -> Vec<String> {
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    let mut files = Vec::new();
    for a in manifest["artifacts"].as_array().unwrap() {
        let name = a["file"].as_str().unwrap();
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), sha256_hex(&bytes), "{name}");
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
        files.push(name.to_string());
    }
    files
}

#[test]
fn every_command_writes_a_consistent_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let domain = "[domain]\nshape = { kind = \"rectangle\", width = 1.0, height = 1.0 }\nh = 0.125\n";
    let cases = [
        ("dist", vec!["distance.csv", "max_set.csv", "summary.json"]),
        ("ridge", vec!["ridge.csv", "max_set.csv", "summary.json"]),
        ("solve", vec!["extremal.csv", "history.dat", "summary.json"]),
        ("inflap", vec!["inflap.csv", "residual.csv", "summary.json"]),
    ];
    for (cmd, expected) in cases {
        let cfg = config(&format!("command = \"{cmd}\"\n{domain}"));
        let dir = tmp.path().join(cmd);
        let out = execute(&cfg, &dir, |_| {}).unwrap();
        assert_eq!(out.exit_code, 0, "{cmd}: {}", out.summary);
        let files = check_manifest(&dir);
        for f in expected {
            assert!(files.iter().any(|x| x == f), "{cmd} missing {f}");
        }
    }
}

#[test]
fn csv_values_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("command = \"solve\"\n[domain]\nshape = { kind = \"disk\", radius = 1.0 }\nh = 0.125\n");
    execute(&cfg, tmp.path(), |_| {}).unwrap();
    let text = fs::read_to_string(tmp.path().join("extremal.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{field}");
    }
}

#[test]
fn sweep_report_round_trips_through_report_command() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep_dir = tmp.path().join("sweep");
    let out = execute(&config(sweep_config()), &sweep_dir, |_| {}).unwrap();
    let files = check_manifest(&sweep_dir);
    for f in ["report.csv", "summary.json", "lambda_vs_p.dat", "gap_vs_p.dat", "u_final.csv"] {
        assert!(files.iter().any(|x| x == f), "missing {f}");
    }
    let rows = SweepReport::read_rows(fs::File::open(sweep_dir.join("report.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    let direct = SweepSummary::from_rows(&rows).unwrap();
    assert_eq!(out.summary["verdicts"], serde_json::to_value(&direct).unwrap());

    let report_dir = tmp.path().join("report");
    let body = format!("command = \"report\"\n[report]\ninput = {:?}\n", sweep_dir.join("report.csv"));
    let rep = execute(&config(&body), &report_dir, |_| {}).unwrap();
    assert_eq!(rep.summary["verdicts"], out.summary["verdicts"]);
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = execute(&config(sweep_config()), &tmp.path().join("a"), |_| {}).unwrap();
    let b = execute(&config(sweep_config()), &tmp.path().join("b"), |_| {}).unwrap();
    assert_eq!(a.artifacts, b.artifacts);
    assert_eq!(
        fs::read(tmp.path().join("a/manifest.json")).unwrap(),
        fs::read(tmp.path().join("b/manifest.json")).unwrap()
    );
}

#[test]
fn config_errors_name_the_key() {
    let err = parse_config("command = \"solve\"\n[domain]\nshape = { kind = \"disk\", radius = 1.0 }\nh = 0.1\n[solve]\nq = 0.5\n")
        .unwrap_err();
    match err {
        CliError::Validation { key, .. } => assert_eq!(key, "solve.q"),
        e => panic!("unexpected {e}"),
    }
    let err = parse_config("command = \"dist\"\n[domain]\nh = -1.0\nshape = { kind = \"disk\", radius = 1.0 }\n").unwrap_err();
    assert!(matches!(err, CliError::Validation { ref key, .. } if key == "domain.h"), "{err}");
    let err = parse_config("command = \"dist\"\n[domain]\nh = 0.1\nshape = { kind = \"disk\", radius = 1.0 }\nbogus = 1\n")
        .unwrap_err();
    assert!(matches!(err, CliError::Parse { line: Some(5), .. }), "{err}");
    let err = parse_config("command = \"sweep\"\n[domain]\nh = 0.1\nshape = { kind = \"disk\", radius = 1.0 }\n[sweep]\nladder = [8, 4]\n")
        .unwrap_err();
    assert!(matches!(err, CliError::Validation { ref key, .. } if key == "sweep.ladder"), "{err}");
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let cfg = config("command = \"dist\"\n[domain]\nshape = { kind = \"disk\", radius = 1.0 }\nh = 0.25\n");
    assert!(matches!(execute(&cfg, &blocker.join("sub"), |_| {}), Err(CliError::Io { .. })));
}

// The only test touching the environment variable.
#[test]
fn output_directory_precedence() {
    let mut cfg = config("command = \"dist\"\n[domain]\nshape = { kind = \"disk\", radius = 1.0 }\nh = 0.25\n");
    std::env::set_var(OUTPUT_ENV, "/from/env");
    assert_eq!(resolve_output(None, &cfg), Path::new("/from/env"));
    cfg.output = Some("from-config".into());
    assert_eq!(resolve_output(None, &cfg), Path::new("from-config"));
    assert_eq!(resolve_output(Some(Path::new("flag")), &cfg), Path::new("flag"));
    std::env::remove_var(OUTPUT_ENV);
    cfg.output = None;
    assert_eq!(resolve_output(None, &cfg), Path::new("sobolev-lab-out"));
}

#[test]
fn binary_runs_subcommands_and_reports_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("solve");
    let status = Proc::new(BIN)
        .args(["solve", "--shape", "square", "--h", "0.125", "--p", "3", "--q", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let summary: Value = serde_json::from_slice(&status.stdout).unwrap();
    assert_eq!(summary["extremal"]["p"], 3.0);
    check_manifest(&out);

    let cfg_path = tmp.path().join("sweep.toml");
    fs::write(&cfg_path, sweep_config()).unwrap();
    let env_out = tmp.path().join("env-out");
    let status = Proc::new(BIN)
        .args(["sweep", "--profile", "power:3", "--config"])
        .arg(&cfg_path)
        .env(OUTPUT_ENV, &env_out)
        .output()
        .unwrap();
    let summary: Value = serde_json::from_slice(&fs::read(env_out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["profile"]["alpha"], 3.0);
    // This grid is coarse enough for the cone bound to fail, which is a verdict, not an error.
    let failed = summary["compare"]["cone_bound"] == false || summary["compare"]["containment"] == false;
    assert_eq!(status.status.code(), Some(if failed { 2 } else { 0 }));

    let bad = Proc::new(BIN).args(["solve", "--shape", "disk", "--h", "0.25", "--q", "0.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("solve.q"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        parse_config(&fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
