use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_euler-geom"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &TempDir, body: &str) -> String {
    let p = dir.path().join("run.json");
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    for body in [r#"{"grid": {"n": 32"#, r#"{"grid": {"n": 32, "order": 3}}"#, r#"{"colour": 1}"#] {
        let cfg = write_config(&dir, body);
        for cmd in ["reform-verify", "shock1d", "eos-check"] {
            let o = run(&[cmd, "--config", &cfg], &out);
            assert_eq!(code(&o), 2, "{cmd} {body}: {}", String::from_utf8_lossy(&o.stderr));
            assert!(!out.exists(), "{cmd} left output behind");
        }
    }
    let o = run(&["shock1d", "--eos", "ideal-gas"], &out);
    assert_eq!(code(&o), 2);
    let o = run(&["reform-verify", "--n", "36"], &out);
    assert_eq!(code(&o), 2);
    let o = run(&["converge", "--config", "/nonexistent/run.json"], &out);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn numeric_failure_exits_3_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(&dir, r#"{"fixture": "constant", "fixture_params": {"constant_rho": 800.0}}"#);
    for cmd in ["reform-verify", "export"] {
        let o = run(&[cmd, "--config", &cfg], &out);
        assert_eq!(code(&o), 3, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!out.exists());
}

#[test]
fn verification_failure_exits_1_with_reports() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    // An unreachable order threshold.
    let cfg = write_config(&dir, r#"{"policy": {"min_order_fourth": 6.0}}"#);
    let o = run(&["reform-verify", "--config", &cfg], &out);
    assert_eq!(code(&o), 1);
    assert!(out.join("residuals.csv").exists());
    let header: Value = serde_json::from_str(&fs::read_to_string(out.join("reform-verify.report.json")).unwrap()).unwrap();
    assert_eq!(header["pass"], false);
}

#[test]
fn reform_verify_smooth_default_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["reform-verify"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out.join("residuals.csv"));
    assert_eq!(header.join(","), "equation,n,dt,sup_norm,l2_norm,order_vs_prev,pass");
    assert_eq!(rows.len(), 27);
    for r in rows.iter().filter(|r| r[1] == "32") {
        let ok = r[5] == "exact" || r[5].parse::<f64>().unwrap() >= 3.5;
        assert!(ok && r[6] == "true", "{r:?}");
    }
    let json: Value = serde_json::from_str(&fs::read_to_string(out.join("residuals.json")).unwrap()).unwrap();
    let first = &json["rows"][0];
    for key in ["equation", "n", "dt", "sup_norm", "l2_norm", "order_vs_prev", "pass"] {
        assert!(first.get(key).is_some(), "{key}");
    }

    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("reform-verify.report.json")).unwrap()).unwrap();
    let hash = report["config_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(report["grid"]["n"], 32);
    assert_eq!(report["eos"]["kind"], "polytropic");
    assert_eq!(report["tolerances"]["policy"]["min_order_fourth"], 3.5);
    assert_eq!(report["pass"], true);
}

#[test]
fn shock1d_chaplygin_keeps_mu_bounded() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["shock1d", "--eos", "chaplygin"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out.join("shock1d_series.csv"));
    assert_eq!(header.join(","), "t,mu_star,max_abs_dxv1,product_mu_dxv1");
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r[1].parse::<f64>().unwrap() >= 0.5, "{r:?}");
    }
    let (snap, _) = csv_rows(&out.join("shock1d_snapshot_0.csv"));
    assert_eq!(snap.join(","), "x,R_plus,v1,rho_log,u,mu");
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("shock1d_summary.json")).unwrap()).unwrap();
    assert!(summary["t_star"].is_null());
    assert_eq!(summary["pass"], true);
}

#[test]
fn shock1d_polytropic_reports_c_mu() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["shock1d"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("shock1d_summary.json")).unwrap()).unwrap();
    let t_star = summary["t_star"].as_f64().unwrap();
    assert!((t_star - 1.0 / 0.18).abs() < 1e-3 * t_star);
    // c·μ = 1 on the initial slice.
    let first = &summary["c_mu"][0];
    assert_eq!(first["t"], 0.0);
    assert!((first["c_mu_min"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((first["c_mu_max"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn converge_labels_constant_and_plane_wave_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"fixture": "constant", "resolutions": [16, 24, 32]}"#);
    let out = dir.path().join("constant");
    assert_eq!(code(&run(&["converge", "--config", &cfg], &out)), 0);
    let (_, rows) = csv_rows(&out.join("converge.csv"));
    for r in &rows {
        assert!(r[3].parse::<f64>().unwrap() <= 1e-12 && r[5] == "exact", "{r:?}");
    }

    let cfg = write_config(&dir, r#"{"fixture": "plane-wave", "resolutions": [16, 24, 32]}"#);
    let out = dir.path().join("plane");
    assert_eq!(code(&run(&["converge", "--config", &cfg], &out)), 0);
    let (_, rows) = csv_rows(&out.join("converge.csv"));
    for eq in ["entropy_transport", "entropy_gradient_transport", "curl_mod_transport", "div_mod_transport"] {
        let mine: Vec<_> = rows.iter().filter(|r| r[0] == eq).collect();
        assert_eq!(mine.len(), 3);
        assert!(mine.iter().all(|r| r[5] == "identically zero"), "{eq}");
    }
}

#[test]
fn random_suites_are_seeded() {
    let dir = TempDir::new().unwrap();
    for (cmd, file, cols) in [
        ("eos-check", "eos_check.csv", "trial,rho,s,c,max_rel_error,identity_residual,pass"),
        (
            "geometry-check",
            "geometry_check.csv",
            "trial,c,v1,v2,v3,inverse_residual,det_residual,transport_defect,pass",
        ),
        (
            "nullframe-check",
            "nullframe_check.csv",
            "trial,c,v1,v2,v3,max_frame_residual,qg_diag_uLuL,qg_diag_LL,pass",
        ),
    ] {
        let a = dir.path().join(format!("{cmd}-a"));
        let b = dir.path().join(format!("{cmd}-b"));
        let c = dir.path().join(format!("{cmd}-c"));
        assert_eq!(code(&run(&[cmd], &a)), 0, "{cmd}");
        assert_eq!(code(&run(&[cmd, "--seed", "42"], &b)), 0);
        assert_eq!(code(&run(&[cmd, "--seed", "7"], &c)), 0);
        let read = |d: &Path| fs::read(d.join(file)).unwrap();
        assert_eq!(read(&a), read(&b), "{cmd}");
        assert_ne!(read(&a), read(&c), "{cmd}");
        let (header, rows) = csv_rows(&a.join(file));
        assert_eq!(header.join(","), cols);
        assert_eq!(rows.len(), 1000);
        assert!(rows.iter().all(|r| r.last().unwrap() == "true"));
    }
}

#[test]
fn export_writes_field_csvs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["export", "--n", "8"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run_dir = out.join("smooth-default");
    for m in 0..5 {
        for f in ["rho_log", "s", "div_mod"] {
            let (h, rows) = csv_rows(&run_dir.join(format!("{f}_{m}.csv")));
            assert_eq!(h.join(","), "i,j,k,value");
            assert_eq!(rows.len(), 512);
        }
        for f in ["v", "omega", "grad_s", "curl_mod"] {
            let (h, _) = csv_rows(&run_dir.join(format!("{f}_{m}.csv")));
            assert_eq!(h.join(","), "i,j,k,v1,v2,v3");
        }
    }
}
