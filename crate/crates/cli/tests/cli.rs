use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use efx_core::{fixtures, Certificate, Instance, ValuationDescriptor};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn efx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn table1_fixture_matches_the_builtin_instance() {
    let text = std::fs::read_to_string(fixture("table1.json")).unwrap();
    let inst = Instance::parse(&text).unwrap();
    assert_eq!(inst.agents(), 3);
    assert_eq!(inst.items(), 7);
    assert_eq!(
        inst.descriptors()[0],
        ValuationDescriptor::Additive {
            values: vec![1, 2, 3, 7, 0, 0, 0]
        }
    );
    assert_eq!(inst.document(), fixtures::table1().document());
}

#[test]
fn solve_then_verify_table1() {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("cert.json");
    let out = efx(&[
        "solve",
        path_str(&fixture("table1.json")),
        "--out",
        path_str(&cert_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = Certificate::parse(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    assert_eq!(cert.solver, "three");
    assert!(cert.final_allocation.unallocated.is_empty());

    let out = efx(&["verify", path_str(&fixture("table1.json")), path_str(&cert_path)]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("replay"));
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("cert.json");
    let out = efx(&[
        "solve",
        path_str(&fixture("table1.json")),
        "--out",
        path_str(&cert_path),
    ]);
    assert!(out.status.success());
    let mut cert = Certificate::parse(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    // Move one item from agent 0 back to the pool.
    let item = cert.final_allocation.bundles[0].first().unwrap();
    cert.final_allocation.bundles[0] = cert.final_allocation.bundles[0].without(item);
    cert.final_allocation.unallocated = cert.final_allocation.unallocated.with(item);
    std::fs::write(&cert_path, cert.to_json()).unwrap();

    let out = efx(&["verify", path_str(&fixture("table1.json")), path_str(&cert_path)]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("final allocation differs"), "{}", stdout(&out));
}

#[test]
fn verify_names_the_violated_guarantee() {
    let dir = tempfile::tempdir().unwrap();
    // Five agents, three items, nothing allocated: within the n-2 bound but
    // everyone envies the pool.
    let inst = dir.path().join("inst.json");
    let alloc = dir.path().join("alloc.json");
    let out = efx(&[
        "gen",
        "--seed",
        "1",
        "--agents",
        "5",
        "--items",
        "3",
        "--class",
        "additive",
        "--max-value",
        "9",
    ]);
    let mut doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for agent in doc["agents"].as_array_mut().unwrap() {
        agent["values"] = serde_json::json!([1, 2, 3]);
    }
    std::fs::write(&inst, doc.to_string()).unwrap();
    std::fs::write(&alloc, r#"{"bundles":[[],[],[],[],[]],"unallocated":[0,1,2]}"#).unwrap();
    let out = efx(&["verify", path_str(&inst), path_str(&alloc), "--solver", "n2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stdout(&out).trim(),
        "charity envied: violates Theorem n-2-charity postcondition"
    );

    // The Table 1 allocation leaves g unallocated, which three agents may not.
    let out = efx(&[
        "verify",
        path_str(&fixture("table1.json")),
        path_str(&fixture("table1_allocation.json")),
    ]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("violates Theorem three-agent-EFX postcondition"));

    // Not EFX: agent 0 holds everything.
    std::fs::write(&alloc, r#"{"bundles":[[0,1,2,3,4,5,6],[],[]],"unallocated":[]}"#).unwrap();
    let out = efx(&["verify", path_str(&fixture("table1.json")), path_str(&alloc)]);
    assert!(!out.status.success());
    assert!(
        stdout(&out).starts_with("not EFX: agent 2 strongly envies agent 1"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn graph_dot_shows_the_table1_edges() {
    let out = efx(&[
        "graph",
        path_str(&fixture("table1.json")),
        path_str(&fixture("table1_allocation.json")),
        "--dot",
        "--edge",
        "3:a,b:e",
    ]);
    assert!(out.status.success());
    let dot = stdout(&out);
    for edge in [
        "\"1\" -> \"2\" [style=solid]",
        "\"1\" -> \"2\" [style=dashed, label=\"g\"",
        "\"2\" -> \"1\" [style=dashed, label=\"g\"",
        "\"2\" -> \"3\" [style=dashed, label=\"g\"",
        "\"3\" -> \"1\" [style=dashed, label=\"g\"",
        "\"2\" -> \"3\" [style=dotted, label=\"{a,b}|{e}\"",
    ] {
        assert!(dot.contains(edge), "missing {edge} in\n{dot}");
    }
}

#[test]
fn gen_is_deterministic_and_solutions_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, agents, items, class) in [
        (1, 3, 7, "mixed"),
        (2, 4, 8, "mixed"),
        (3, 5, 8, "additive"),
        (4, 5, 6, "two_type"),
        (5, 6, 8, "budget_additive"),
        (6, 2, 6, "unit_demand"),
    ] {
        let args = [
            "gen",
            "--seed",
            &seed.to_string(),
            "--agents",
            &agents.to_string(),
            "--items",
            &items.to_string(),
            "--class",
            class,
        ];
        let first = efx(&args);
        assert!(first.status.success());
        assert_eq!(first.stdout, efx(&args).stdout);
        let inst = dir.path().join(format!("{seed}.json"));
        let cert = dir.path().join(format!("{seed}.cert.json"));
        std::fs::write(&inst, &first.stdout).unwrap();
        assert!(efx(&["solve", path_str(&inst), "--audit", "--out", path_str(&cert)])
            .status
            .success());
        let out = efx(&["verify", path_str(&inst), path_str(&cert)]);
        assert!(out.status.success(), "seed {seed}: {}", stdout(&out));
    }
}

#[test]
fn batch_solves_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("certs");
    for seed in 0..4 {
        let out = efx(&["gen", "--seed", &seed.to_string(), "--agents", "4", "--items", "7"]);
        std::fs::write(dir.path().join(format!("inst{seed}.json")), &out.stdout).unwrap();
    }
    let out = efx(&["solve", "--batch", path_str(dir.path()), "--out", path_str(&out_dir)]);
    assert!(out.status.success(), "{}", stdout(&out));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains("inst0.json: solver=four"));
    for seed in 0..4 {
        assert!(out_dir.join(format!("inst{seed}.cert.json")).exists());
    }
}

#[test]
fn brute_counts_efx_allocations() {
    let out = efx(&["brute", path_str(&fixture("table1.json")), "--count"]);
    assert!(out.status.success());
    let full: usize = stdout(&out).trim().parse().unwrap();
    let out = efx(&[
        "brute",
        path_str(&fixture("table1.json")),
        "--max-unallocated",
        "1",
        "--count",
    ]);
    let partial: usize = stdout(&out).trim().parse().unwrap();
    assert!(full > 0 && partial > full);
}

#[test]
fn malformed_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("empty.json");
    std::fs::write(&inst, r#"{"version":1,"items":2,"agents":[]}"#).unwrap();
    let out = efx(&["solve", path_str(&inst)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("agents"));

    let out = efx(&["solve", path_str(&fixture("table1.json")), "--ordering", "0,0,1"]);
    assert!(!out.status.success());
}
