use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ep_response::document::{parse_inline_vector, MatrixDocument};
use ep_response::ep::{build_ep_system, DEFAULT_NIL_TOL};
use ep_response::linalg::ComplexScalar;
use ep_response::models::{asymmetric_backscattering, pt_trimer};
use ep_response::response::{excite, resonant_omega};
use serde_json::Value;
use tempfile::TempDir;

fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

fn epr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epr"))
        .args(args)
        .env_remove("EPR_DEFAULT_TOL")
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn backscattering(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("bs.json");
    let out = epr(&[
        "model",
        "asymmetric_backscattering",
        "--e0",
        "0,-0.5",
        "--a0",
        "3,4",
        "--out",
        s(&path),
    ]);
    assert!(out.status.success());
    path
}

#[test]
fn analyze_backscattering() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&epr(&[
        "analyze",
        s(&backscattering(&dir)),
        "--eps-tilde",
        "1e-6,1e-4",
    ]));
    assert_eq!(v["xi"], 5.0);
    assert_eq!(v["certificate"]["ok"], true);
    assert_eq!(v["pseudospectral_radii"].as_array().unwrap().len(), 2);
    assert!(v["passivity"]["xi_upper_bound"].is_number());
}

#[test]
fn analyze_rejects_diabolic_point() {
    let dir = TempDir::new().unwrap();
    let doc = write(
        &dir,
        "dp.json",
        r#"{"format_version":1,"n":2,"entries":[[[0,-0.5],[0,0]],[[0,0],[0,-0.5]]]}"#,
    );
    let out = epr(&["analyze", s(&doc)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometric multiplicity"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["geometric_multiplicity"], 2);
}

#[test]
fn model_then_analyze_trimer() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("tri.json");
    assert!(epr(&["model", "pt_trimer", "--g", "1", "--out", s(&path)])
        .status
        .success());
    let v = json_of(&epr(&["analyze", s(&path)]));
    assert!((v["xi"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!((v["zeta"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let path = backscattering(&dir);
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_epr"))
            .args(["analyze", s(&path)])
            .env("EPR_DEFAULT_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(json_of(&run("1e-3"))["certificate"]["tolerance"], 1e-3);
    assert_eq!(code(&run("soon")), 1);
}

#[test]
fn perturb_reports_and_fits() {
    let dir = TempDir::new().unwrap();
    let h1 = write(
        &dir,
        "h1.json",
        r#"{"format_version":1,"n":2,"entries":[[[0.2,0.1],[0.3,0]],[[0.7,-0.4],[0.2,0.1]]]}"#,
    );
    let v = json_of(&epr(&[
        "perturb",
        s(&backscattering(&dir)),
        s(&h1),
        "--eps",
        "1e-8",
    ]));
    assert!(v["report"]["x"].as_f64().unwrap() <= 1.0);
    assert_eq!(v["delta_norms"].as_array().unwrap().len(), 2);

    let tri = dir.path().join("tri.json");
    assert!(epr(&["model", "pt_trimer", "--g", "1", "--out", s(&tri)])
        .status
        .success());
    let h3 = write(
        &dir,
        "h3.json",
        r#"{"format_version":1,"n":3,"entries":[[[0.2,0.1],[0.3,0],[0,0]],[[0.7,-0.4],[0.2,0.1],[0.1,0]],[[0.5,0],[0,0.3],[0.1,0.1]]]}"#,
    );
    let v = json_of(&epr(&[
        "perturb",
        s(&tri),
        s(&h3),
        "--eps",
        "1e-6",
        "--grid",
    ]));
    assert!((v["fit"]["slope"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.02);

    assert_eq!(code(&epr(&["perturb", s(&tri), s(&h3), "--eps", "0"])), 1);
    assert_eq!(
        code(&epr(&["perturb", s(&tri), s(&h1), "--eps", "1e-6"])),
        1
    );
}

#[test]
fn excite_matches_library() {
    let dir = TempDir::new().unwrap();
    let path = backscattering(&dir);
    let v = json_of(&epr(&["excite", s(&path), "--p", "0,0,1,0"]));
    assert_eq!(v["report"]["genericity_ok"], true);

    let model = asymmetric_backscattering(c(0.0, -0.5), c(3.0, 4.0)).unwrap();
    let sys = build_ep_system(&model.h0, model.eigenvalue_ep, 2, DEFAULT_NIL_TOL).unwrap();
    let p = parse_inline_vector("0,0,1,0").unwrap();
    let direct = excite(&sys, &p, resonant_omega(&sys, 1.0), 1.0, 1.0).unwrap();
    assert_eq!(
        v["report"]["z"].as_f64().unwrap().to_bits(),
        direct.z.to_bits()
    );

    let v = json_of(&epr(&["excite", s(&path), "--p", "1,0,0,0"]));
    assert_eq!(v["report"]["genericity_ok"], false);

    let vec_doc = write(
        &dir,
        "p.json",
        r#"{"format_version":1,"entries":[[0,0],[1,0]]}"#,
    );
    let from_file = json_of(&epr(&["excite", s(&path), "--p-file", s(&vec_doc)]));
    assert_eq!(
        from_file["report"]["z"].as_f64().unwrap().to_bits(),
        direct.z.to_bits()
    );
}

#[test]
fn evolve_eigenstate_does_not_grow() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&epr(&[
        "evolve",
        s(&backscattering(&dir)),
        "--psi0",
        "1,0,0,0",
        "--time",
        "50",
    ]));
    assert!((v["report"]["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn models_by_name() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&epr(&["model", "hatano_nelson", "--n", "4", "--a0", "2,0"]));
    let h0 = MatrixDocument::from_json(&v.to_string())
        .unwrap()
        .matrix()
        .unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expected = if j == i + 1 { c(2.0, 0.0) } else { c(0.0, 0.0) };
            assert_eq!(h0[(i, j)], expected);
        }
    }

    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        assert!(epr(&[
            "model",
            "random_ep",
            "--n",
            "3",
            "--eep",
            "0,-0.5",
            "--seed",
            "42",
            "--out",
            s(path)
        ])
        .status
        .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let out = epr(&["model", "bogus"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pt_trimer"));
    assert_eq!(
        code(&epr(&["model", "asymmetric_backscattering", "--a0", "0,0"])),
        2
    );
    assert_eq!(code(&epr(&["frobnicate"])), 1);
}

#[test]
fn model_document_round_trips_through_library() {
    let v = json_of(&epr(&["model", "pt_trimer", "--g", "2"]));
    let doc = MatrixDocument::from_json(&v.to_string()).unwrap();
    assert_eq!(doc.matrix().unwrap(), pt_trimer(0.0, 2.0).unwrap().h0);
    assert_eq!(doc.order, Some(3));
}

#[test]
fn ensemble_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"study":"spectral_x","n":3,"realizations":100000,"seed":2,"workers":4}"#,
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let first = json_of(&epr(&["ensemble", s(&cfg), "--out", s(&a)]));
    let second = epr(&["ensemble", s(&cfg), "--out", s(&b)]);
    assert_eq!(first["summary"]["fraction_above_one"], 0.0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(json_of(&second)["summary"], first["summary"]);
}

#[test]
fn ensemble_intensity_fraction() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"study":"intensity_z","n":3,"realizations":100000,"seed":5}"#,
    );
    let out = dir.path().join("z.json");
    let v = json_of(&epr(&[
        "ensemble",
        s(&cfg),
        "--out",
        s(&out),
        "--workers",
        "4",
    ]));
    let frac = v["summary"]["fraction_above_one"].as_f64().unwrap();
    assert!((frac - 0.17).abs() <= 0.05, "{frac}");
    let hist: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(hist["format_version"], 1);
}

#[test]
fn ensemble_rejects_bad_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", r#"{"study":"spectral_x","colour":"red"}"#);
    assert_eq!(
        code(&epr(&[
            "ensemble",
            s(&cfg),
            "--out",
            s(&dir.path().join("x.csv"))
        ])),
        1
    );
    let cfg = write(&dir, "cfg2.json", r#"{"study":"passive_bound","n":4}"#);
    assert_eq!(
        code(&epr(&[
            "ensemble",
            s(&cfg),
            "--out",
            s(&dir.path().join("x.csv"))
        ])),
        1
    );
}
