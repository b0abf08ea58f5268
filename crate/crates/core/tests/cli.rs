use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_stencil-tb");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn stencil_tb(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("STENCIL_TB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn acoustic(n: usize, nt: usize, schedule: &str) -> String {
    let mid = (n / 2) as f64 * 10.0 + 1.5;
    format!(
        r#"{{
  "physics": "acoustic",
  "grid": {{ "shape": [{n}, {n}, {n}], "spacing_m": [10.0, 10.0, 10.0], "boundary_layers": 6 }},
  "space_order": 4,
  "nt": {nt},
  "schedule": {schedule},
  "sources": [ {{ "coords_m": [{mid}, {mid}, {mid}], "f0_hz": 15.0 }} ],
  "receivers": [ [70.0, {mid}, 70.0], [{mid}, 80.0, 90.5] ],
  "precision": 32
}}"#
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// CSV rows with the timing columns blanked.
fn without_timing(csv: &str, timing: &[&str]) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keep: Vec<bool> = header.iter().map(|h| !timing.contains(h)).collect();
    lines
        .map(|l| {
            l.split(',')
                .zip(&keep)
                .map(|(v, &k)| if k { v.to_string() } else { String::new() })
                .collect()
        })
        .collect()
}

#[test]
fn run_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        &acoustic(24, 10, r#"{ "kind": "space", "block": [8, 8] }"#),
    );
    let o = stencil_tb(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("gpoints_per_s"));
}

#[test]
fn run_writes_snapshot_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.json", &acoustic(20, 7, r#"{ "kind": "naive" }"#));
    let snap = dir.path().join("u.bin");
    let out = dir.path().join("out.json");
    let o = stencil_tb(&[
        "run",
        "--config",
        &cfg,
        "--precision",
        "64",
        "--snapshot",
        snap.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = std::fs::read(&snap).unwrap();
    assert_eq!(&bytes[..8], b"STBSNAP1");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 64);
    assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 6);
    assert_eq!(bytes.len(), 32 + 8 * 20 * 20 * 20);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(json["receivers"].as_array().unwrap().len(), 7 * 2);
    assert_eq!(json["report"]["precision"], 64);
}

#[test]
fn odd_space_order_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = acoustic(20, 5, r#"{ "kind": "naive" }"#).replace(r#""space_order": 4"#, r#""space_order": 5"#);
    let cfg = write(dir.path(), "bad.json", &text);
    let o = stencil_tb(&["run", "--config", &cfg]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("space_order"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = acoustic(20, 5, r#"{ "kind": "naive" }"#).replace(r#""nt""#, r#""n_steps""#);
    let cfg = write(dir.path(), "bad.json", &text);
    let o = stencil_tb(&["run", "--config", &cfg]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("n_steps"), "{}", stderr(&o));
}

#[test]
fn verify_wavefront_passes() {
    let cfg = configs().join("acoustic_48.json");
    let o = stencil_tb(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS"));
    assert!(stdout(&o).contains("legal"));
}

#[test]
fn verify_naive_against_naive_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.json", &acoustic(20, 10, r#"{ "kind": "naive" }"#));
    let out = dir.path().join("cmp.json");
    let o = stencil_tb(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    for d in json["differences"].as_array().unwrap() {
        assert_eq!(d["linf_rel"].as_f64(), Some(0.0));
    }
}

#[test]
fn under_skewed_plan_fails_verification_and_validation() {
    let cfg = configs().join("acoustic_48.json");
    let cfg = cfg.to_str().unwrap();
    let o = stencil_tb(&["verify", "--config", cfg, "--under-skew"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violations"));
    let o = stencil_tb(&["validate", "--config", cfg, "--under-skew"]);
    assert_eq!(o.status.code(), Some(1));
    let o = stencil_tb(&["validate", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 violations"));
}

#[test]
fn tune_sweep_writes_one_row_per_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        &acoustic(
            64,
            8,
            r#"{ "kind": "wavefront", "tile": [32, 32], "time_height": 4, "block": [8, 8] }"#,
        ),
    );
    let sweep = write(
        dir.path(),
        "s.json",
        r#"{ "tiles": [[4, 4], [32, 32], [64, 64]], "blocks": [[8, 8], [16, 16], [32, 32]], "time_heights": [4], "repetitions": 1 }"#,
    );
    let run_once = |name: &str| {
        let out = dir.path().join(name);
        let o = stencil_tb(&[
            "tune",
            "--config",
            &cfg,
            "--sweep",
            &sweep,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read_to_string(out).unwrap()
    };
    let csv = run_once("t1.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10, "{csv}");
    assert!(lines[0].starts_with("physics,"));
    // a 4-wide tile is narrower than skew * T = 8
    let skipped: Vec<&&str> = lines.iter().filter(|l| l.contains("skipped")).collect();
    assert_eq!(skipped.len(), 3);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",*")).count(), 1);
    assert!(!csv.contains('\r'));

    let timing = ["gpoints_per_s", "best"];
    assert_eq!(
        without_timing(&csv, &timing),
        without_timing(&run_once("t2.csv"), &timing)
    );
}

#[test]
fn single_candidate_sweep_is_best() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        &acoustic(24, 4, r#"{ "kind": "space", "block": [8, 8] }"#),
    );
    let sweep = write(dir.path(), "s.json", r#"{ "blocks": [[12, 12]] }"#);
    let o = stencil_tb(&["tune", "--config", &cfg, "--sweep", &sweep]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with(",*"), "{out}");
}

#[test]
fn bench_suite_of_one_config_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "a.json",
        &acoustic(32, 12, r#"{ "kind": "space", "block": [16, 16] }"#),
    );
    // same blocks and a single full-width tile with T = 1: the two sides do the same work
    let suite = write(
        dir.path(),
        "suite.json",
        r#"{ "entries": [ {
            "config_path": "a.json",
            "baseline": { "blocks": [[16, 16]], "repetitions": 3, "warmup": 1 },
            "wavefront": { "tiles": [[32, 32]], "blocks": [[16, 16]], "time_heights": [1], "repetitions": 3, "warmup": 1 }
        } ] }"#,
    );
    let out = dir.path().join("speedup.csv");
    let o = stencil_tb(&["bench", "--config", &suite, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert_eq!(
        lines[0],
        "physics,space_order,grid,T,tile,block,baseline_gpts,wtb_gpts,speedup,status"
    );
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[9], "ok");
    let speedup: f64 = cols[8].parse().unwrap();
    assert!(speedup > 0.5 && speedup < 2.0, "{speedup}");
}

#[test]
fn bench_records_failing_rows_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", &acoustic(24, 4, r#"{ "kind": "naive" }"#));
    let suite = write(
        dir.path(),
        "suite.json",
        r#"{ "entries": [
            { "config_path": "missing.json", "baseline": { "blocks": [[8, 8]] }, "wavefront": { "tiles": [[24, 24]], "blocks": [[8, 8]], "time_heights": [2] } },
            { "config_path": "a.json", "baseline": { "blocks": [[8, 8]] }, "wavefront": { "tiles": [[24, 24]], "blocks": [[8, 8]], "time_heights": [2] } }
        ] }"#,
    );
    let o = stencil_tb(&["bench", "--config", &suite]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2, "{out}");
    assert!(rows[0].contains("missing.json") || rows[0].contains("error"), "{out}");
    assert!(rows[1].ends_with(",ok"), "{out}");
}

#[test]
fn thread_flag_and_env_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        &acoustic(
            24,
            9,
            r#"{ "kind": "wavefront", "tile": [16, 16], "time_height": 3, "block": [8, 8] }"#,
        ),
    );
    let checksum = |o: &Output| {
        let s = stdout(o);
        s.split("checksum: ").nth(1).unwrap().trim().to_string()
    };
    let a = stencil_tb(&["run", "--config", &cfg, "--threads", "2"]);
    let b = Command::new(BIN)
        .args(["run", "--config", &cfg])
        .env("STENCIL_TB_THREADS", "3")
        .output()
        .unwrap();
    assert!(stdout(&a).contains("threads=2"));
    assert!(stdout(&b).contains("threads=3"));
    assert_eq!(checksum(&a), checksum(&b));
}
