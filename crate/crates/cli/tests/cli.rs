//! End-to-end drives of the binary: pipelines, self-consistency of emitted
//! files, and the exit-code contract (0 ok, 2 validation, 3 budget, 4 parse).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mwd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mwd-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const K3: &str = "0 1\n1 2\n2 0\n";

#[test]
fn width_commands_on_triangle() {
    let dir = tempdir("widths");
    let graph = write(&dir, "k3.txt", K3);
    let out = mwd(&["branch-width", graph.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["oracle"], 2);

    let out = mwd(&["rank-width", graph.to_str().unwrap(), "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["oracle"], 1);

    let out = mwd(&["tree-width", graph.to_str().unwrap(), "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["oracle"], 3);
}

#[test]
fn rank_width_over_gf2() {
    let dir = tempdir("gf2");
    let graph = write(&dir, "k3.txt", K3);
    let out = mwd(&["rank-width", graph.to_str().unwrap(), "--field", "gf2", "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["oracle"], 1);
}

#[test]
fn emitted_decompositions_pass_check() {
    let dir = tempdir("roundtrip");
    let graph = write(&dir, "k3.txt", K3);
    let matrix = write(
        &dir,
        "i3.json",
        r#"{"rows":3,"cols":3,"entries":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#,
    );
    for (algebra, input) in [("matrix", &matrix), ("cospan", &graph), ("boundary", &graph)] {
        let dec = dir.join(format!("{algebra}.dec.json"));
        let dot = dir.join(format!("{algebra}.dot"));
        let out = mwd(&[
            "mwd-upper",
            input.to_str().unwrap(),
            "--algebra",
            algebra,
            "--output",
            dec.to_str().unwrap(),
            "--dot",
            dot.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{algebra}: {out:?}");
        let check = mwd(&["check", dec.to_str().unwrap(), input.to_str().unwrap()]);
        assert!(check.status.success(), "{algebra} check: {check:?}");
        let dot_text = std::fs::read_to_string(&dot).unwrap();
        assert!(dot_text.starts_with("digraph"));
    }
}

#[test]
fn matrix_pipeline_reports_identity_width_one() {
    let dir = tempdir("identity");
    let matrix = write(
        &dir,
        "i3.json",
        r#"{"rows":3,"cols":3,"entries":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#,
    );
    let out = mwd(&["mwd-upper", matrix.to_str().unwrap(), "--algebra", "matrix", "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["constructed"], 1);
    assert_eq!(report["widths"]["oracle"], 1);
}

#[test]
fn clique_boundary_pipeline_stays_within_twice_rank_width() {
    let dir = tempdir("k4-boundary");
    let graph = write(&dir, "k4.txt", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let out = mwd(&["mwd-upper", graph.to_str().unwrap(), "--algebra", "boundary", "--json"]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["rank_width"], 1);
    assert!(report["widths"]["constructed"].as_u64().unwrap() <= 2);
}

#[test]
fn convert_round_trip() {
    let dir = tempdir("convert");
    let graph = write(&dir, "k4.txt", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let rank = dir.join("k4.rank.json");
    let out = mwd(&[
        "rank-width",
        graph.to_str().unwrap(),
        "--output",
        rank.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let ird = dir.join("k4.ird.json");
    let out = mwd(&[
        "convert",
        "--kind",
        "rank-to-inductive",
        rank.to_str().unwrap(),
        "--graph",
        graph.to_str().unwrap(),
        "--output",
        ird.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["widths"]["rank_width"], 1);
    assert_eq!(report["widths"]["inductive_width"], 1);
    let out = mwd(&[
        "convert",
        "--kind",
        "inductive-to-rank",
        ird.to_str().unwrap(),
        "--graph",
        graph.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn branch_convert_with_sources() {
    let dir = tempdir("branch-convert");
    let graph = write(&dir, "path.txt", "0 1\n1 2\n");
    let dec = dir.join("path.branch.json");
    assert!(mwd(&[
        "branch-width",
        graph.to_str().unwrap(),
        "--output",
        dec.to_str().unwrap(),
    ])
    .status
    .success());
    let out = mwd(&[
        "convert",
        "--kind",
        "branch-to-inductive",
        dec.to_str().unwrap(),
        "--graph",
        graph.to_str().unwrap(),
        "--sources",
        "0,2",
        "--json",
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["bounds"][0]["holds"].as_bool().unwrap());
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempdir("codes");
    // Parse error: 4.
    let bad = write(&dir, "bad.txt", "not a graph\n");
    let out = mwd(&["tree-width", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));

    // Budget refusal: 3 (15 edges beyond the default cap).
    let mut k6 = String::new();
    for i in 0..6 {
        for j in i + 1..6 {
            k6.push_str(&format!("{i} {j}\n"));
        }
    }
    let big = write(&dir, "k6.txt", &k6);
    let out = mwd(&["branch-width", big.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // Validation failure: 2 (tampered cut label).
    let graph = write(&dir, "k3.txt", K3);
    let dec = dir.join("k3.dec.json");
    assert!(mwd(&[
        "mwd-upper",
        graph.to_str().unwrap(),
        "--algebra",
        "cospan",
        "--output",
        dec.to_str().unwrap(),
    ])
    .status
    .success());
    let mut file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    fn bump_cut(node: &mut serde_json::Value) -> bool {
        if let Some(c) = node.get_mut("compose") {
            let cut = c["cut"].as_u64().unwrap();
            c["cut"] = (cut + 1).into();
            return true;
        }
        if let Some(t) = node.get_mut("tensor") {
            return bump_cut(&mut t[0]) || bump_cut(&mut t[1]);
        }
        false
    }
    assert!(bump_cut(&mut file["tree"]));
    let tampered = write(&dir, "tampered.json", &file.to_string());
    let out = mwd(&["check", tampered.to_str().unwrap(), graph.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("boundary mismatch"), "{stderr}");

    // Unknown atom: 2.
    let mut file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    fn rename_leaf(node: &mut serde_json::Value) -> bool {
        if node.get("leaf").is_some() {
            node["leaf"] = "no_such_atom".into();
            return true;
        }
        if let Some(t) = node.get_mut("tensor") {
            return rename_leaf(&mut t[0]) || rename_leaf(&mut t[1]);
        }
        if let Some(c) = node.get_mut("compose") {
            return rename_leaf(&mut c["left"]) || rename_leaf(&mut c["right"]);
        }
        false
    }
    assert!(rename_leaf(&mut file["tree"]));
    let badatom = write(&dir, "badatom.json", &file.to_string());
    let out = mwd(&["check", badatom.to_str().unwrap(), graph.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown atom"), "{stderr}");
}
