use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polynormals"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares against a stored report; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, args: &[&str], code: i32) {
    let o = run(args);
    assert_eq!(o.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let path = golden_path(name);
    let got = stdout(&o);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(got, want, "report for `{}` changed", args.join(" "));
}

#[test]
fn golden_cube_normals() {
    golden("normals_cube3_origin.json", &["normals", "--canned", "cube3", "--point", "0,0,0"], 0);
}

#[test]
fn golden_square_normals_csv() {
    golden(
        "normals_square.csv",
        &["normals", "--canned", "square", "--point", "-0.5,0.2", "--format", "csv"],
        0,
    );
}

#[test]
fn golden_simplex_colorings() {
    golden("color_simplex4.json", &["color", "--canned", "simplex4"], 1);
    golden("color_simplex3.json", &["color", "--canned", "simplex3"], 0);
}

#[test]
fn golden_dimacs() {
    golden("simplex3.cnf", &["color", "--canned", "simplex3", "--dimacs"], 0);
}

#[test]
fn golden_link_and_classify() {
    golden("link_cube3_v0.json", &["link", "--canned", "cube3", "--face", "0"], 0);
    golden("classify_thin_tetrahedron.csv", &["classify", "--canned", "thin_tetrahedron", "--format", "csv"], 0);
}

#[test]
fn golden_scan_csv() {
    golden(
        "scan_generated.csv",
        &[
            "scan", "--gen", "n=3,m=7,count=1", "--seed", "1", "--from", "-0.9,0,0", "--to", "0.9,0.3,0.2", "--steps", "20",
        ],
        0,
    );
}

#[test]
fn cube_center_has_26_normals() {
    let o = run(&["normals", "--canned", "cube3", "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 26);
    assert_eq!(v["tally"]["by_index"], serde_json::json!([6, 12, 8]));
}

#[test]
fn verify_batch_passes() {
    let o = run(&["verify", "--gen", "n=4,m=8,count=20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], 20);
    for r in v["reports"].as_array().unwrap() {
        assert!(r["search"]["best_count"].as_u64().unwrap() >= 12);
    }
}

#[test]
fn verify_report_is_independent_of_jobs() {
    let args = ["verify", "--gen", "n=3,m=4..8,count=6", "--seed", "11", "--budget", "600"];
    let one = run(&[&args[..], &["--jobs", "1"]].concat());
    let three = run(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn triangle_misses_the_target() {
    let o = run(&["verify", "--canned", "triangle", "--budget", "500"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["reports"][0]["search"]["best_count"], 6);
}

#[test]
fn generated_polytopes_round_trip() {
    let dir = std::env::temp_dir().join(format!("polynormals-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = dir.join("a.json");
    let o = run(&["gen", "--gen", "n=4,m=7,count=3", "--seed", "2", "--out", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["gen", "--input", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for (pa, pb) in a.as_array().unwrap().iter().zip(b.as_array().unwrap()) {
        for key in ["vertices", "facets"] {
            assert_eq!(pa[key].as_array().unwrap().len(), pb[key].as_array().unwrap().len());
        }
        let flat = |v: &Value| -> Vec<f64> {
            v["vertices"].as_array().unwrap().iter().flat_map(|x| x.as_array().unwrap().iter().map(|c| c.as_f64().unwrap())).collect()
        };
        for (x, y) in flat(pa).iter().zip(flat(pb)) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    // bare vertex lists are re-hulled
    let mut polys: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    for p in &mut polys {
        p.as_object_mut().unwrap().remove("facets");
    }
    let bare = dir.join("b.json");
    std::fs::write(&bare, serde_json::to_string(&polys).unwrap()).unwrap();
    let census_a = run(&["census", "--input", first.to_str().unwrap()]);
    let census_b = run(&["census", "--input", bare.to_str().unwrap()]);
    let counts = |o: &Output| -> Vec<(u64, u64)> {
        let v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v.as_array().unwrap().iter().map(|c| (c["nice"].as_u64().unwrap(), c["skew"].as_u64().unwrap())).collect()
    };
    assert_eq!(counts(&census_a), counts(&census_b));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn nice_face_with_propagation() {
    let o = run(&["classify", "--gen", "n=4,m=6,count=1", "--seed", "3"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let face = v.as_array().unwrap().iter().find(|c| c["verdict"] == "Nice").unwrap()["face"].to_string();
    let o = run(&["nice", "--gen", "n=4,m=6,count=1", "--seed", "3", "--face", &face, "--propagate"]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["count"].as_u64().unwrap() >= 7);
    assert_eq!(v["propagation"]["all_certified"], true);
}

#[test]
fn invalid_inputs_exit_2_with_json() {
    for args in [
        vec!["normals", "--canned", "cube3", "--point", "5,0,0"],
        vec!["normals", "--canned", "dodecahedron", "--point", "0,0,0"],
        vec!["normals", "--canned", "cube3", "--point", "0,0"],
        vec!["normals", "--canned", "cube3", "--point", "a,b,c"],
        vec!["gen", "--gen", "n=3,m=2"],
        vec!["frobnicate"],
        vec!["normals", "--point", "0,0,0"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
        assert_eq!(e["error"], "invalid_input");
        assert!(e["message"].is_string());
    }
}

#[test]
fn unknown_polytope_fields_are_rejected() {
    let dir = std::env::temp_dir().join(format!("polynormals-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.json");
    std::fs::write(&f, r#"{"dim":2,"vertices":[[0,0],[1,0],[0,1]],"colour":1}"#).unwrap();
    let o = run(&["gen", "--input", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}
