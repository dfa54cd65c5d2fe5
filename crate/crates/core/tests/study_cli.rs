use std::process::Command;

use proptest::prelude::*;

use skinbem::asymptotics::perp;
use skinbem::study::{extrapolate, fitted_rate};
use skinbem::{CVec3, Complex64, Vec3};

fn skinbem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skinbem"))
}

#[test]
fn selftest_passes() {
    let out = skinbem().arg("selftest").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}

#[test]
fn deterministic_table1_is_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = skinbem()
            .args(["table1", "--alpha", "0.5", "--levels", "0-1", "--deterministic", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for name in ["table1_alpha_0.5.csv", "table1_rates.csv", "plot_errJ_alpha_0.5.dat"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name}");
    }
    let csv = std::fs::read_to_string(dirs[0].path().join("table1_alpha_0.5.csv")).unwrap();
    assert!(!csv.contains("seconds"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn config_file_is_honored_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    std::fs::write(&cfg, "# small run\nalpha = 1.5\nlevels = 0-1\ndeterministic = true\n").unwrap();
    let out = skinbem().arg("--config").arg(&cfg).args(["table1", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("table1_alpha_1.5.csv").exists());

    let out = skinbem().arg("--config").arg(&cfg).args(["solve", "--level", "0", "--alpha", "0.5"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("alpha 0.5 level 0"));
}

#[test]
fn bad_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let out = skinbem().arg("--config").arg(&cfg).arg("selftest").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let out = skinbem().args(["solve", "--levels", "3-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_requested_fields() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("points.txt");
    std::fs::write(&pts, "# x y z\n3 0 0\n0 6 0\n").unwrap();
    let out = skinbem().args(["solve", "--level", "0", "--alpha", "0.5", "--points"]).arg(&pts).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    std::fs::write(&pts, "2.05 0 0\n").unwrap();
    let out = skinbem().args(["solve", "--level", "0", "--points"]).arg(&pts).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

proptest! {
    #[test]
    fn extrapolation_recovers_geometric_limits(limit in -10.0f64..10.0, c in 0.1f64..5.0, eta in 0.3f64..3.0) {
        let v: Vec<f64> = (1..=3).map(|l| limit + c * 2f64.powf(-eta * l as f64)).collect();
        let e = extrapolate(&v).unwrap();
        prop_assert!(e.monotone);
        prop_assert!((e.limit - limit).abs() <= 1e-9 * (1.0 + c));
        prop_assert!((e.eta.unwrap() - eta).abs() <= 1e-9);
    }

    #[test]
    fn fitted_rate_recovers_power_laws(c in 0.01f64..100.0, p in -3.0f64..3.0) {
        let h = [1.0f64, 0.5, 0.25, 0.125];
        let err: Vec<f64> = h.iter().map(|h: &f64| c * h.powf(p)).collect();
        prop_assert!((fitted_rate(&h, &err).unwrap() - p).abs() <= 1e-10);
    }

    #[test]
    fn perp_is_a_tangential_rotation(v in prop::array::uniform6(-5.0f64..5.0), n in prop::array::uniform3(-1.0f64..1.0)) {
        prop_assume!(Vec3::from(n).norm() > 0.1);
        let n = Vec3::from(n).normalize();
        let v = CVec3::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]), Complex64::new(v[4], v[5]));
        let t = perp(&v, &n);
        let dot = t.x * n.x + t.y * n.y + t.z * n.z;
        prop_assert!(dot.norm() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!((perp(&perp(&t, &n), &n) + t).norm() <= 1e-12 * (1.0 + v.norm()));
    }
}
