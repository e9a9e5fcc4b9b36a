//! Runs `okms check-all` on the shipped configuration and prints one line per
//! acceptance criterion.

use std::path::Path;
use std::process::Command;

use okms::harness::CheckReport;

#[derive(serde::Deserialize)]
struct SuiteReport {
    checks: Vec<CheckReport>,
}

struct Criterion {
    label: &'static str,
    /// Name of the check report, without the `[lambda=..]` suffix.
    check: &'static str,
}

const CRITERIA: &[Criterion] = &[
    Criterion { label: "sigma constant", check: "sigma" },
    Criterion { label: "heteroclinic energy", check: "heteroclinic" },
    Criterion { label: "mass conservation", check: "mass_conservation" },
    Criterion { label: "energy dissipation", check: "energy_dissipation" },
    Criterion { label: "sharp-interface oracle", check: "sharp_oracle" },
    Criterion { label: "convergence of dynamics", check: "convergence" },
    Criterion { label: "well-preparedness in time", check: "well_preparedness" },
    Criterion { label: "equipartition", check: "equipartition" },
    Criterion { label: "De Giorgi inequality", check: "de_giorgi" },
    Criterion { label: "Gibbs-Thomson", check: "gibbs_thomson" },
    Criterion { label: "velocity lower bound", check: "velocity_lower_bound" },
    Criterion { label: "transport estimate", check: "transport" },
    Criterion { label: "deformation checks", check: "deformation" },
];

fn base_name(c: &CheckReport) -> &str {
    c.name.split('[').next().unwrap_or(&c.name)
}

#[test]
fn acceptance() {
    let out_dir = tempfile::tempdir().unwrap();
    let config = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/check_all.toml"));
    let started = std::time::Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_okms"))
        .env("OKMS_OUT", out_dir.path())
        .arg("check-all")
        .arg("--config")
        .arg(config)
        .output()
        .expect("okms runs");
    let elapsed = started.elapsed().as_secs_f64();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let report_path = out_dir.path().join("report.json");
    let text = std::fs::read_to_string(&report_path)
        .unwrap_or_else(|e| panic!("no report.json ({e}); stderr:\n{stderr}"));
    let report: SuiteReport = serde_json::from_str(&text).expect("report parses");

    let mut failed = Vec::new();
    println!();
    for crit in CRITERIA {
        let reports: Vec<&CheckReport> = report.checks.iter().filter(|c| base_name(c) == crit.check).collect();
        let pass = !reports.is_empty() && reports.iter().all(|c| c.passed);
        let parts: Vec<String> = reports
            .iter()
            .map(|c| format!("{}: {}", c.name, if c.passed { "pass" } else { "fail" }))
            .collect();
        println!("{} {:<28} {}", if pass { "PASS" } else { "FAIL" }, crit.label, parts.join(", "));
        for c in &reports {
            println!("       {}", c.summary());
        }
        if !pass {
            failed.push(crit.label);
        }
    }
    let suite_ok = out.status.code() == Some(0) && elapsed <= 900.0;
    println!(
        "{} {:<28} exit {:?}, {:.0} s wall (limit 900 s)",
        if suite_ok { "PASS" } else { "FAIL" },
        "check-all runs the suite",
        out.status.code(),
        elapsed
    );
    for c in report.checks.iter().filter(|c| !CRITERIA.iter().any(|k| k.check == base_name(c))) {
        println!("INFO {}", c.summary());
    }
    if !suite_ok {
        failed.push("check-all runs the suite");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}\nstderr:\n{stderr}");
}
