use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transmod"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/v1")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("transmod-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn value_of(result_csv: &Path) -> (f64, String) {
    let text = fs::read_to_string(result_csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    (row[2].parse().unwrap(), row[6].to_string())
}

const SQUARE: &str = r#"{"label":"square","ambient":{"min":[0,0],"max":[1,1]},"continua":[]}"#;
const LEFT_RIGHT: &str = r#"{"source":{"kind":"segment","a":[0,0],"b":[0,1]},"sink":{"kind":"segment","a":[1,0],"b":[1,1]}}"#;

#[test]
fn square_crossing_is_one() {
    let dir = scratch("square");
    fs::write(dir.join("d.json"), SQUARE).unwrap();
    let out = run(bin()
        .args(["compute", "--family", LEFT_RIGHT, "--h", "0.0078125", "--domain"])
        .arg(dir.join("d.json"))
        .arg("--out")
        .arg(&dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (v, status) = value_of(&dir.join("result.csv"));
    assert!((v - 1.0).abs() < 0.01, "{v}");
    assert_eq!(status, "converged");
    let csv = fs::read(dir.join("result.csv")).unwrap();
    assert!(!csv.contains(&b'\r'));
    let dump = fs::read_to_string(dir.join("density.txt")).unwrap();
    assert!(dump.starts_with("# h "));
    assert_eq!(dump.lines().filter(|l| !l.starts_with('#')).count(), 128);
}

#[test]
fn twin_squares_fixture_respects_bound() {
    let dir = scratch("twin");
    let g = fixtures().join("gallery");
    let out = run(bin()
        .args(["compute", "--h", "0.0078125", "--svg", "--domain"])
        .arg(g.join("twin_squares_5.domain.json"))
        .arg("--family")
        .arg(g.join("twin_squares_5.family.json"))
        .arg("--out")
        .arg(&dir));
    assert_eq!(out.status.code(), Some(0));
    let (v, _) = value_of(&dir.join("result.csv"));
    assert!(v <= 4.0 * 1.02, "{v}");
    assert!(fs::read_to_string(dir.join("density.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn malformed_domain_names_the_field() {
    let dir = scratch("bad");
    fs::write(dir.join("d.json"), r#"{"label":"x","continua":[]}"#).unwrap();
    let out = run(bin()
        .args(["compute", "--family", LEFT_RIGHT, "--h", "0.1", "--domain"])
        .arg(dir.join("d.json"))
        .arg("--out")
        .arg(&dir));
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ambient"), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(!dir.join("result.csv").exists());
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(run(bin().arg("nonsense")).status.code(), Some(3));
    assert_eq!(run(bin().args(["compute", "--h", "1"])).status.code(), Some(3));
    assert_eq!(run(bin().arg("--help")).status.code(), Some(0));
    let dir = scratch("h");
    fs::write(dir.join("d.json"), SQUARE).unwrap();
    let out = run(bin()
        .args(["compute", "--family", LEFT_RIGHT, "--h", "-0.5", "--domain"])
        .arg(dir.join("d.json")));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn path_cap_exits_two() {
    let dir = scratch("cap");
    fs::write(dir.join("d.json"), SQUARE).unwrap();
    fs::write(dir.join("cfg.json"), r#"{"method":"paths"}"#).unwrap();
    let out = run(bin()
        .args(["compute", "--family", LEFT_RIGHT, "--h", "0.03125", "--max-paths", "2", "--domain"])
        .arg(dir.join("d.json"))
        .arg("--config")
        .arg(dir.join("cfg.json"))
        .arg("--out")
        .arg(&dir));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(value_of(&dir.join("result.csv")).1, "iteration_cap");
}

#[test]
fn campaign_matches_golden_and_repeats() {
    let cfg = fixtures().join("golden_campaign.config.json");
    let golden = fs::read(fixtures().join("golden_campaign.csv")).unwrap();
    for (k, threads) in ["1", "2"].iter().enumerate() {
        let dir = scratch(&format!("golden{k}"));
        let out = run(bin()
            .env("TRANSMOD_THREADS", threads)
            .args(["campaign", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&dir));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(fs::read(dir.join("campaign.csv")).unwrap(), golden);
    }
}

#[test]
fn wrong_twin_constant_is_caught() {
    let dir = scratch("inject");
    fs::write(
        dir.join("cfg.json"),
        r#"{"suites":["twin"],"h_scale":2.0,"twin_constant":0.5}"#,
    )
    .unwrap();
    let out = run(bin()
        .args(["campaign", "--config"])
        .arg(dir.join("cfg.json"))
        .arg("--out")
        .arg(&dir));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("FAIL twin.n02.bound"), "{err}");
    let csv = fs::read_to_string(dir.join("campaign.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("twin.n02.bound")).unwrap();
    assert!(row.ends_with(",fail"));
}

#[test]
fn gallery_list_matches_fixtures() {
    let dir = scratch("gallery");
    let out = run(bin().args(["gallery-list", "--format", "csv", "--out"]).arg(&dir));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 14);
    assert!(text.lines().any(|l| l.starts_with("twin_squares_20,20,1.0000000000000000e0,")));
    for entry in fs::read_dir(fixtures().join("gallery")).unwrap() {
        let p = entry.unwrap().path();
        let fresh = fs::read(dir.join(p.file_name().unwrap())).unwrap();
        assert_eq!(fresh, fs::read(&p).unwrap(), "{}", p.display());
    }
}

#[test]
fn check_geometry_reports_and_rejects() {
    let g = fixtures().join("gallery");
    let out = run(bin()
        .args(["check-geometry", "--format", "csv", "--domain"])
        .arg(g.join("kissing_8.domain.json")));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0,disk,1.0000000000000000e0,"));

    let dir = scratch("overlap");
    fs::write(
        dir.join("d.json"),
        r#"{"label":"o","ambient":{"min":[0,0],"max":[1,1]},"continua":[
            {"kind":"disk","center":[0.4,0.5],"radius":0.2},
            {"kind":"disk","center":[0.6,0.5],"radius":0.2}]}"#,
    )
    .unwrap();
    let out = run(bin().args(["check-geometry", "--domain"]).arg(dir.join("d.json")));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not disjoint"));
}
