use std::path::Path;
use std::process::{Command, Output};

use curvnet_cli::document::{load_net, save_net, Kind, NetDocument};

fn curvnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvnet")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn spheres_2x2(radius: f64) -> NetDocument {
    let e = |x: f64, y: f64| Some(vec![x, y, 0.0, radius]);
    NetDocument::new(Kind::Spheres, &[2, 2], vec![e(0.0, 0.0), e(1.0, 0.0), e(0.0, 1.0), e(1.0, 1.0)])
}

#[test]
fn generated_torus_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("torus.json");
    let out = curvnet(&["generate", "torus", "--extents", "5,7", "--output", p(&net)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for what in ["circular", "conical", "principal"] {
        let out = curvnet(&["check", what, p(&net)]);
        assert_eq!(out.status.code(), Some(0), "{what}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("result: PASS"));
    }
}

#[test]
fn documents_survive_a_save_load_cycle_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(curvnet(&["generate", "torus", "--output", p(&a)]).status.code(), Some(0));
    let doc = load_net(&a, 1e-9).unwrap();
    save_net(&doc, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn broken_quad_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("pts.json");
    curvnet(&["generate", "torus", "--emit", "points", "--output", p(&net)]);
    let mut doc = load_net(&net, 1e-9).unwrap();
    doc.entries[9].as_mut().unwrap()[2] += 0.05;
    save_net(&doc, &net).unwrap();
    let out = curvnet(&["check", "circular", p(&net), "--report", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn malformed_input_exits_two_and_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut doc = NetDocument::new(Kind::Planes, &[2, 1], vec![Some(vec![0.0, 0.0, 1.0, 0.0]); 2]);
    doc.entries[1] = Some(vec![0.0, 0.0, 0.9, 0.0]);
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = curvnet(&["check", "conical", p(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[1, 0]"));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(curvnet(&["check", "conical", p(&bad)]).status.code(), Some(2));
    assert_eq!(curvnet(&["check", "conical", "/nonexistent/net.json"]).status.code(), Some(2));
    assert_eq!(curvnet(&["check", "bogus", p(&bad)]).status.code(), Some(2));
}

#[test]
fn consistency_test_reports_small_deviation() {
    let out = curvnet(&["consistency-test", "qnet", "--dim", "4", "--seed", "7", "--report", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["cells"].as_array().unwrap().len(), 100);
}

#[test]
fn classify_four_unit_spheres() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("q.json");
    save_net(&spheres_2x2(1.0), &f).unwrap();
    let out = curvnet(&["classify", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PointPair (0.5, 0.5, ±0.7071067812)"), "{text}");
    save_net(&spheres_2x2(0.0), &f).unwrap();
    let text = String::from_utf8_lossy(&curvnet(&["classify", p(&f)]).stdout).to_string();
    assert!(text.contains("OrthogonalCircle center (0.5, 0.5, 0)"), "{text}");
}

#[test]
fn qnet_completion_fills_the_far_corner() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cube.json");
    let mut entries: Vec<Option<Vec<f64>>> = (0..8)
        .map(|k| Some(vec![(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64]))
        .collect();
    entries[7] = None;
    save_net(&NetDocument::new(Kind::Points, &[2, 2, 2], entries), &f).unwrap();
    let done = dir.path().join("done.json");
    let out = curvnet(&["complete", "qnet", p(&f), "--output", p(&done)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = load_net(&done, 1e-9).unwrap();
    for (x, y) in doc.entries[7].as_ref().unwrap().iter().zip([1.0, 1.0, 1.0]) {
        assert!((x - y).abs() < 1e-12);
    }
    let out = curvnet(&["complete", "miquel", p(&f), "--output", p(&done)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn synthesis_and_ribaucour_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    curvnet(&["generate", "torus", "--extents", "4,4", "--emit", "points", "--output", p(&pts)]);
    let first = load_net(&pts, 1e-9).unwrap().entries[0].clone().unwrap();
    // a tilted plane through the first point
    let n = [0.6, 0.0, 0.8];
    let d = n[0] * first[0] + n[1] * first[1] + n[2] * first[2];
    let plane = format!("{},{},{},{}", n[0], n[1], n[2], d);
    let net = dir.path().join("net.json");
    let out = curvnet(&["synthesize", p(&pts), "--plane", &plane, "--output", p(&net)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(curvnet(&["check", "conical", p(&net)]).status.code(), Some(0));
    assert_eq!(curvnet(&["check", "principal", p(&net)]).status.code(), Some(0));

    let off = format!("{},{},{},{}", n[0], n[1], n[2], d + 1.0);
    assert_eq!(curvnet(&["synthesize", p(&pts), "--plane", &off]).status.code(), Some(2));

    let plus = dir.path().join("plus.json");
    let out = curvnet(&["ribaucour", p(&net), "--seed", "3", "--output", p(&plus)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(curvnet(&["check", "principal", p(&plus)]).status.code(), Some(0));
}

#[test]
fn obj_export_of_a_square() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sq.json");
    let e = |x: f64, y: f64| Some(vec![x, y, 0.0]);
    save_net(&NetDocument::new(Kind::Points, &[2, 2], vec![e(0.0, 0.0), e(1.0, 0.0), e(0.0, 1.0), e(1.0, 1.0)]), &f).unwrap();
    let out = curvnet(&["export-obj", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("f 1 2 4 3\n"));
}
