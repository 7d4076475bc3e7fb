use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ruvfair::io::read_matrix_csv;
use ruvfair::report::ARTIFACTS;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ruvfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruvfair"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_prop1_homogeneous_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let cfg = root().join("configs/prop1_homogeneous.json");
    let o = ruvfair(&[
        "verify",
        "--config",
        s(&cfg),
        "--check",
        "prop1",
        "--out",
        s(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["outcome"]["check"], "prop1");
}

#[test]
fn debias_with_constant_protected_attribute_keeps_y() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    let x = dir.path().join("x.csv");
    let g = dir.path().join("g.json");
    let out = dir.path().join("ydb.csv");
    std::fs::write(&y, "u,v\n1,2\n3,5\n-1,0.5\n4,4\n").unwrap();
    std::fs::write(&x, "race\n1\n1\n1\n1\n").unwrap();
    std::fs::write(&g, "[[0, 1], [2, 3]]").unwrap();
    let o = ruvfair(&[
        "debias",
        "--y",
        s(&y),
        "--x",
        s(&x),
        "--groups",
        s(&g),
        "--method",
        "observed",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(
        stderr.contains("warning:") && stderr.contains("rank 0"),
        "{stderr}"
    );
    let before = read_matrix_csv(&y).unwrap();
    let after = read_matrix_csv(&out).unwrap();
    assert_eq!(after.header, before.header);
    assert_eq!(after.matrix, before.matrix);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ydb.fit.json")).unwrap())
            .unwrap();
    assert_eq!(fit["rows"], 4);
    assert_eq!(fit["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn debias_latent_needs_rank_and_observed_needs_x() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.csv");
    let g = dir.path().join("g.json");
    std::fs::write(&y, "u,v\n1,2\n3,5\n-1,0.5\n4,4\n").unwrap();
    std::fs::write(&g, "[[0, 1, 2, 3]]").unwrap();
    let out = dir.path().join("o.csv");
    let base = ["debias", "--y", s(&y), "--groups", s(&g), "--out", s(&out)];
    let mut latent = base.to_vec();
    latent.extend(["--method", "latent"]);
    assert_eq!(ruvfair(&latent).status.code(), Some(1));
    let mut observed = base.to_vec();
    observed.extend(["--method", "observed"]);
    assert_eq!(ruvfair(&observed).status.code(), Some(1));
    latent.extend(["--rank", "1"]);
    assert_eq!(ruvfair(&latent).status.code(), Some(0));
    assert_eq!(read_matrix_csv(&out).unwrap().matrix.shape(), (4, 2));
}

#[test]
fn compas_on_fixture_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let data = root().join("crates/ruvfair/tests/fixtures/compas_small.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"data_path": {:?}, "n_splits": 3, "seed": 2}}"#,
            s(&data)
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = ruvfair(&["compas", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for name in ARTIFACTS {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(!text.is_empty(), "{name}");
        if name.ends_with(".csv") {
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            for rec in rdr.records() {
                for field in rec.unwrap().iter() {
                    field.parse::<f64>().unwrap();
                }
            }
        } else if name.ends_with(".json") {
            serde_json::from_str::<serde_json::Value>(&text).unwrap();
        }
    }
}

#[test]
fn usage_errors_and_missing_files_map_to_exit_codes() {
    assert_eq!(ruvfair(&["verify", "--bogus"]).status.code(), Some(1));
    assert_eq!(ruvfair(&["--help"]).status.code(), Some(0));
    let o = ruvfair(&[
        "compas",
        "--config",
        "/nonexistent/cfg.json",
        "--out",
        "/tmp/x",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
