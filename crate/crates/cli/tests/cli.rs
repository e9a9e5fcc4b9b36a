use std::path::Path;
use std::process::Command;

fn okms() -> Command {
    Command::new(env!("CARGO_BIN_EXE_okms"))
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = okms().arg("ms-run").arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_config_is_a_usage_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.toml");
    std::fs::write(&f, "[params]\neps = -0.1\n").unwrap();
    let out = okms().arg("ok-run").arg("--config").arg(&f).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.eps"));
    let out = okms().arg("ok-run").arg("--config").arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ms_run_writes_a_record_and_is_reproducible() {
    let mut csv = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = okms()
            .env("OKMS_OUT", dir.path())
            .arg("ms-run")
            .arg("--config")
            .arg(configs().join("two_spheres.toml"))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let path = dir.path().join("ms-run/ms_run.csv");
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,r_1,r_2,E_total,E_area,E_nonlocal,vol_plus,dissipation"), "{}", &text[..80]);
        assert!(dir.path().join("ms-run/ms_run.json").exists());
        csv.push(text);
    }
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn ok_run_writes_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.toml");
    std::fs::write(
        &cfg,
        format!(
            "experiment = \"ok-run\"\noutput_dir = \"{}\"\n[params]\neps = 0.08\nt_end = 1e-2\n[output]\nrecord_every = 5\n",
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = okms().arg("ok-run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("out/ok-run/ok_run.csv")).unwrap();
    assert!(text.starts_with("t,E_total,E_ac,E_nonlocal,mass,dissipation"));
    assert!(text.lines().count() > 3);
}

#[test]
fn profile_prints_a_table() {
    let out = okms().args(["profile", "--eps", "0.05", "--points", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    // Equipartition of the optimal profile: zero discrepancy at the centre.
    let centre: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(centre[0], 0.0);
    assert!(centre[4].abs() < 1e-12);
    let out = okms().args(["profile", "--eps", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
