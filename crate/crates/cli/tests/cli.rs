use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surface-peps"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("surface-peps-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn layout_prints_json() {
    let out = bin().args(["layout", "3", "5"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["width"], 3);
    assert_eq!(v["length"], 5);
}

#[test]
fn run_then_threshold() {
    let dir = scratch("run");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"width": 3, "length": 3, "channel": {"kind": "depolarizing", "values": [0.05, 0.1, 0.15]}, "samples": 5, "seed": 3}"#,
    )
    .unwrap();
    let mut csvs = Vec::new();
    for (l, engine) in [(3, "exact"), (5, "boundary_mps")] {
        let text = std::fs::read_to_string(&cfg).unwrap().replace("\"length\": 3", &format!("\"length\": {l}"));
        let c = dir.join(format!("cfg{l}.json"));
        std::fs::write(&c, text).unwrap();
        let csv = dir.join(format!("out{l}.csv"));
        let status = bin()
            .arg("run")
            .arg(&c)
            .args(["--engine", engine, "--chi", "16", "--samples", "7", "--seed", "9", "--out"])
            .arg(&csv)
            .status()
            .unwrap();
        assert!(status.success());
        let body = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(body.lines().count(), 1 + 3 * 7);
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("out{l}.csv.manifest.json"))).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 9);
        assert_eq!(manifest["records"], 21);
        csvs.push(csv);
    }
    let out = bin().arg("threshold").args(&csvs).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["outcome"].is_object());
    let one = bin().arg("threshold").arg(&csvs[0]).output().unwrap();
    assert!(!one.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_engine_is_rejected() {
    let dir = scratch("bad");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"width": 3, "length": 3, "channel": {"kind": "depolarizing", "values": [0.1]}, "samples": 1}"#).unwrap();
    let out = bin().arg("run").arg(&cfg).args(["--engine", "dense"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown engine"));
    std::fs::remove_dir_all(&dir).unwrap();
}
