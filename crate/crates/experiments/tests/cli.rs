use std::process::Command;

const CONFIG: &str = r#"
[model]
q = 0.4
h = 0.3
mu = 0.2
x_a = 0.1
x_v = 0.5

[sweep]
param = "h"
count = 11
min = 0.0
max = 1.0
outputs = ["rho", "ci"]
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homophily"))
}

#[test]
fn sweep_from_config_dir_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("base.toml"), CONFIG).unwrap();
    let out = dir.path().join("sweep.csv");
    let status = bin()
        .env("HOMOPHILY_CONFIG_DIR", dir.path())
        .args(["sweep", "--config", "base.toml", "--mu", "0.25", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let res = homophily_lab::read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(res.rows.len(), 11);
    assert_eq!(res.outputs, ["rho", "ci"]);
    assert!(res.rows.iter().all(|r| r.flag.is_empty()));
}

#[test]
fn unknown_config_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, CONFIG.replace("mu = 0.2", "muu = 0.2")).unwrap();
    let out = bin().args(["steady-state", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("muu"));
}

#[test]
fn single_point_reports_print_json() {
    let out = bin()
        .args(["ci", "--q", "0.4", "--h", "0.3", "--mu", "0.2", "--x-a", "0.1", "--x-v", "0.5", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["ci"].as_f64().unwrap() > 0.0);
    assert!(v["dh"]["ci"].is_number());
}

#[test]
fn every_subcommand_runs() {
    let model = ["--q", "0.5", "--h", "0.1", "--mu", "0.2", "--x-a", "0.1", "--x-v", "0.4", "--k", "0.6", "--d", "0.05"];
    for cmd in ["steady-state", "ci", "vax-rational", "vax-peer", "vax-mixed", "welfare", "optimal", "sir"] {
        let out = bin().arg(cmd).args(model).output().unwrap();
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin()
        .args(["cross-check", "--agents", "2000", "--horizon", "20", "--replicates", "2"])
        .args(model)
        .output()
        .unwrap();
    assert!(out.status.success());
}
