use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_membrane-lab"))
        .args(args)
        .env_remove("MEMBRANE_LAB_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn modes_ratio_column_matches_the_uniform_series() {
    let profile = config_dir().join("profiles/uniform.json");
    let o = run(&["modes", path(&profile)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,n,frequency_hz,ratio"));
    let ratios: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ratios[0], 1.0);
    for target in [1.59, 2.14, 2.30, 2.65, 3.16, 3.50] {
        assert!(
            ratios.iter().any(|r| (r - target).abs() <= 0.005),
            "{target} not in {ratios:?}"
        );
    }
}

#[test]
fn synthesized_chappu_passes_every_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("chappu.wav");
    let profile = config_dir().join("profiles/harmonic_two_region.json");
    let template = config_dir().join("strokes/chappu.json");
    let o = run(&["synth", path(&profile), path(&template), "-o", path(&wav)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["analyze", path(&wav)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 3);
    assert!(verdicts.iter().all(|v| v["pass"] == true), "{verdicts:?}");
    assert_eq!(report["label"], "chappu");

    let o = run(&["classify", path(&wav)]);
    let text = stdout(&o);
    let (label, confidence) = text.trim().split_once(' ').unwrap();
    assert_eq!(label, "chappu");
    assert!(confidence.parse::<f64>().unwrap() > 0.5);
}

#[test]
fn bundled_stroke_names_render_on_both_heads() {
    let dir = tempfile::tempdir().unwrap();
    let profile = config_dir().join("profiles/harmonic_two_region.json");
    for (stroke, tonic) in [("thom", "140"), ("dheem", "140")] {
        let wav = dir.path().join(format!("{stroke}.wav"));
        let o = run(&[
            "synth",
            path(&profile),
            stroke,
            "--tonic",
            tonic,
            "--duration",
            "2",
            "-o",
            path(&wav),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(&["classify", path(&wav), "--tonic", tonic, "--format", "json"]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["label"], stroke);
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["modes", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_and_malformed_inputs_are_data_errors() {
    let o = run(&["analyze", "/nonexistent/input.wav"]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"radius_m\": -1}").unwrap();
    assert_eq!(run(&["modes", path(&bad)]).status.code(), Some(2));

    let o = run(&["optimize", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_is_checked_before_work() {
    let o = run(&["materials", "-o", "/nonexistent/dir/report.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn layers_emit_a_trace() {
    let o = run(&["layers"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("layer,f_dheem_hz,f_chappu_hz,ratio\n0,"));
    assert_eq!(text.lines().count(), 14);

    let o = run(&["layers", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["stabilized_at"].is_u64());
}

#[test]
fn materials_report_ranks_the_samples() {
    let o = run(&["materials"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ranking = v["ranking"].as_array().unwrap();
    let src: Vec<f64> = ranking.iter().map(|r| r["src"].as_f64().unwrap()).collect();
    assert!(src.windows(2).all(|w| w[0] >= w[1]));
    let n = v["names"].as_array().unwrap().len();
    for i in 0..n {
        assert_eq!(v["transmission"][i][i], 1.0);
    }

    let o = run(&["materials", "--format", "csv"]);
    assert!(stdout(&o).starts_with("rank,name,"));
}

#[test]
fn config_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("materials.csv"), "name,E_pa,rho_kg_m3\nonly,1e10,500\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_membrane-lab"))
        .args(["materials", "--format", "csv"])
        .env("MEMBRANE_LAB_CONFIG", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("\n1,only,"));

    let o = Command::new(env!("CARGO_BIN_EXE_membrane-lab"))
        .args(["materials"])
        .env("MEMBRANE_LAB_CONFIG", dir.path().join("missing"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graded_refinement_reports_its_parameters() {
    let o = run(&[
        "optimize", "--graded", "--budget", "300", "--rings", "6", "--format", "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("method,graded\n"));
    assert!(text.contains("\ntaper,"));
}
