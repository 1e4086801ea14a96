use cbnufft::geometry::ConeGeometry;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn cbnufft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbnufft"))
        .args(args)
        .env_remove("CBNUFFT_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let o = cbnufft(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_geometry(dir: &Path) -> PathBuf {
    let p = dir.join("geom.json");
    let g = ConeGeometry::<f64>::reference_scaled(16);
    std::fs::write(&p, serde_json::to_string_pretty(&g).unwrap()).unwrap();
    p
}

fn sidecar(p: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(format!("{}.json", p.display())).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn csv_value(text: &str, name: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn phantom_writes_payload_and_sidecar() {
    let d = TempDir::new().unwrap();
    let vol = d.path().join("vol.f32");
    let pgm = d.path().join("slice.pgm");
    ok(&["phantom", "--n", "12", "--out", s(&vol), "--pgm", s(&pgm)]);
    let meta = sidecar(&vol);
    assert_eq!(meta["dims"], serde_json::json!([12, 12, 12]));
    assert_eq!(meta["dtype"], "f32le");
    assert_eq!(std::fs::metadata(&vol).unwrap().len(), 4 * 12 * 12 * 12);
    assert!(std::fs::read(&pgm).unwrap().starts_with(b"P5"));
}

#[test]
fn nufft_projection_tracks_the_linear_baseline() {
    let d = TempDir::new().unwrap();
    let g = small_geometry(d.path());
    let vol = d.path().join("vol.f32");
    let lin = d.path().join("lin.f32");
    let nb = d.path().join("nb.f32");
    ok(&["phantom", "--n", "16", "--geometry", s(&g), "--out", s(&vol)]);
    ok(&["project", "--method", "linear", "--geometry", s(&g), "--input", s(&vol), "--out", s(&lin)]);
    ok(&[
        "project", "--method", "nufft-b", "--calibrate", "--geometry", s(&g), "--input", s(&vol), "--out", s(&nb),
    ]);
    assert_eq!(sidecar(&nb)["geometry"]["nu"], 16);
    let o = ok(&["compare", "--a", s(&nb), "--b", s(&lin)]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("name,value\n"));
    let (mae, signal) = (csv_value(&text, "mean_abs"), csv_value(&text, "mean_signal"));
    assert!(mae < 0.15 * signal, "{mae} vs {signal}");

    let rec = d.path().join("rec.f32");
    ok(&["fdk", "--input", s(&lin), "--n", "16", "--out", s(&rec)]);
    assert_eq!(sidecar(&rec)["dims"], serde_json::json!([16, 16, 16]));
}

#[test]
fn complexity_reports_speedups() {
    let o = ok(&["complexity", "--n", "512"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("n,variant,step,predicted,measured,ratio\n"));
    let total = |v: &str| -> f64 {
        let row = csv.lines().find(|l| l.starts_with(&format!("512,{v},total,"))).unwrap();
        row.split(',').nth(3).unwrap().parse().unwrap()
    };
    let base = total("ct_baseline");
    let n4 = 512f64.powi(4);
    assert!((base / (8.0 * std::f64::consts::PI * n4) - 1.0).abs() < 1e-6);
    assert!((base / total("method_a") - 6.9484).abs() < 1e-3);
    assert!((base / total("method_b") - 9.5598).abs() < 1e-3);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("6.9484") && err.contains("9.5598"), "{err}");
}

#[test]
fn malformed_sidecar_exits_with_two() {
    let d = TempDir::new().unwrap();
    let vol = d.path().join("vol.f32");
    ok(&["phantom", "--n", "8", "--out", s(&vol)]);
    let side = format!("{}.json", vol.display());
    let mut meta = sidecar(&vol);
    meta["dims"] = serde_json::json!([8, 8]);
    std::fs::write(&side, meta.to_string()).unwrap();
    let o = cbnufft(&["project", "--method", "linear", "--input", s(&vol), "--out", s(&d.path().join("p.f32"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dims"));

    std::fs::write(&side, "{ not json").unwrap();
    let o = cbnufft(&["fdk", "--input", s(&vol), "--n", "8", "--out", s(&d.path().join("r.f32"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_finite_volume_exits_with_three() {
    let d = TempDir::new().unwrap();
    let g = small_geometry(d.path());
    let vol = d.path().join("vol.f32");
    ok(&["phantom", "--n", "16", "--geometry", s(&g), "--out", s(&vol)]);
    let mut bytes = std::fs::read(&vol).unwrap();
    bytes[400..404].copy_from_slice(&f32::NAN.to_le_bytes());
    std::fs::write(&vol, bytes).unwrap();
    for method in ["nufft-b", "linear"] {
        let out = d.path().join(format!("{method}.f32"));
        let o = cbnufft(&["project", "--method", method, "--geometry", s(&g), "--input", s(&vol), "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(3), "{method}: {}", String::from_utf8_lossy(&o.stderr));
    }

    let clean = d.path().join("clean.f32");
    ok(&["phantom", "--n", "16", "--geometry", s(&g), "--out", s(&clean)]);
    let lin = d.path().join("lin.f32");
    ok(&["project", "--method", "linear", "--geometry", s(&g), "--input", s(&clean), "--out", s(&lin)]);
    let mut bytes = std::fs::read(&lin).unwrap();
    let at = 4 * (16 * 16 * 5 + 40);
    bytes[at..at + 4].copy_from_slice(&f32::INFINITY.to_le_bytes());
    std::fs::write(&lin, bytes).unwrap();
    for cmd in ["fdk", "backproject"] {
        let o = cbnufft(&[cmd, "--input", s(&lin), "--n", "16", "--out", s(&d.path().join("r.f32"))]);
        assert_eq!(o.status.code(), Some(3), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("view 5"));
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let d = TempDir::new().unwrap();
    let g = small_geometry(d.path());
    let vol = d.path().join("vol.f32");
    ok(&["phantom", "--n", "16", "--geometry", s(&g), "--out", s(&vol)]);
    let one = d.path().join("one.f32");
    let two = d.path().join("two.f32");
    ok(&[
        "--threads", "1", "project", "--method", "nufft-b", "--geometry", s(&g), "--input", s(&vol), "--out", s(&one),
    ]);
    let o = Command::new(env!("CARGO_BIN_EXE_cbnufft"))
        .args(["project", "--method", "nufft-b", "--geometry", s(&g), "--input", s(&vol), "--out", s(&two)])
        .env("CBNUFFT_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&two).unwrap());
    assert_eq!(cbnufft(&["--threads", "0", "complexity"]).status.code(), Some(2));
}

#[test]
fn sweep_is_seeded() {
    let run = |seed: &str| {
        let o = ok(&[
            "--seed", seed, "sweep", "--image-kind", "random", "--size", "16", "--n-rho", "32", "--n-theta", "8,16,32",
        ]);
        String::from_utf8(o.stdout).unwrap()
    };
    let a = run("3");
    assert!(a.starts_with("n_theta,error\n"));
    assert_eq!(a.lines().count(), 4);
    assert_eq!(a, run("3"));
    assert_ne!(a, run("4"));
}
