//! End-to-end tests of the fairsc binary: file formats, exit codes, CSV
//! shape, and seed determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fairsc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairsc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

const GEN_FLAGS: &[&str] = &[
    "--n", "100", "--k", "2", "--h", "2", "--a", "0.8", "--b", "0.6", "--c", "0.4", "--d", "0.2",
];

#[test]
fn generate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["one", "two"] {
        let run = fairsc(
            dir.path(),
            &[&["generate", "--seed", "7", "--out", out], GEN_FLAGS].concat(),
        );
        assert_eq!(exit_code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
        assert!(stdout(&run).starts_with("n=100 edges="));
    }
    for ext in ["edges", "groups", "truth"] {
        assert_eq!(
            read(dir.path(), &format!("one.{ext}")),
            read(dir.path(), &format!("two.{ext}")),
            "{ext} files differ between identically seeded runs"
        );
    }
    assert_eq!(read(dir.path(), "one.groups").lines().count(), 100);
    assert_eq!(read(dir.path(), "one.truth").lines().count(), 100);
}

#[test]
fn generate_all_zero_probabilities_gives_empty_edge_file() {
    let dir = tempfile::tempdir().unwrap();
    let run = fairsc(
        dir.path(),
        &[
            "generate", "--n", "20", "--k", "2", "--h", "2", "--a", "0", "--b", "0", "--c", "0",
            "--d", "0", "--allow-degenerate", "--seed", "1", "--out", "zero",
        ],
    );
    assert_eq!(exit_code(&run), 0);
    assert_eq!(read(dir.path(), "zero.edges"), "");
    // without the escape hatch the ordering check rejects it
    let run = fairsc(
        dir.path(),
        &[
            "generate", "--n", "20", "--k", "2", "--h", "2", "--a", "0", "--b", "0", "--c", "0",
            "--d", "0", "--seed", "1", "--out", "zero2",
        ],
    );
    assert_eq!(exit_code(&run), 2);
}

fn write_two_cliques(dir: &Path) {
    let mut edges = String::from("# two disjoint triangles\n");
    for (i, j) in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)] {
        edges.push_str(&format!("{i} {j} 1.0\n"));
    }
    fs::write(dir.join("cliques.edges"), edges).unwrap();
    fs::write(dir.join("cliques.groups"), "0\n1\n0\n1\n0\n1\n").unwrap();
    fs::write(dir.join("cliques.truth"), "0\n0\n0\n1\n1\n1\n").unwrap();
}

#[test]
fn cluster_separates_cliques_with_zero_ratiocut() {
    let dir = tempfile::tempdir().unwrap();
    write_two_cliques(dir.path());
    let run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "cliques.edges", "--truth", "cliques.truth", "--algo", "sc-u",
            "--k", "2", "--seed", "5", "--out", "out.labels",
        ],
    );
    assert_eq!(exit_code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let out = stdout(&run);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algo,k,h,n,error,balance_avg,ratiocut,ncut,runtime_ms"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "sc-u");
    assert_eq!(row[3], "6");
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.0); // error vs truth
    assert_eq!(row[6].parse::<f64>().unwrap(), 0.0); // ratiocut
    let labels = read(dir.path(), "out.labels");
    let labels: Vec<&str> = labels.lines().collect();
    assert_eq!(labels.len(), 6);
    assert_eq!(labels[0], labels[1]);
    assert_eq!(labels[0], labels[2]);
    assert_eq!(labels[3], labels[4]);
    assert_ne!(labels[0], labels[3]);
}

#[test]
fn fair_algo_with_single_group_matches_standard() {
    let dir = tempfile::tempdir().unwrap();
    write_two_cliques(dir.path());
    fs::write(dir.path().join("single.groups"), "0\n0\n0\n0\n0\n0\n").unwrap();
    let std_run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "cliques.edges", "--n", "6", "--algo", "sc-u", "--k", "2",
            "--seed", "9", "--out", "std.labels",
        ],
    );
    assert_eq!(exit_code(&std_run), 0);
    let fair_run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "cliques.edges", "--groups", "single.groups", "--algo",
            "fair-u", "--k", "2", "--seed", "9", "--out", "fair.labels",
        ],
    );
    assert_eq!(exit_code(&fair_run), 0);
    assert_eq!(read(dir.path(), "std.labels"), read(dir.path(), "fair.labels"));
}

#[test]
fn fair_algo_without_groups_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_two_cliques(dir.path());
    let run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "cliques.edges", "--n", "6", "--algo", "fair-n", "--k", "2",
            "--out", "x.labels",
        ],
    );
    assert_eq!(exit_code(&run), 2);
}

#[test]
fn normalized_algo_on_isolated_vertex_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    // vertex 3 is isolated
    fs::write(dir.path().join("iso.edges"), "0 1 1.0\n1 2 1.0\n").unwrap();
    let run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "iso.edges", "--n", "4", "--algo", "sc-n", "--k", "2", "--out",
            "x.labels",
        ],
    );
    assert_eq!(exit_code(&run), 4);
    assert!(String::from_utf8_lossy(&run.stderr).contains("isolated"));
}

#[test]
fn malformed_edge_file_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.edges"), "0 1 1.0\n1 1 2.0\n").unwrap();
    let run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "bad.edges", "--n", "3", "--algo", "sc-u", "--k", "2", "--out",
            "x.labels",
        ],
    );
    assert_eq!(exit_code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 2"));
}

#[test]
fn missing_graph_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "nope.edges", "--n", "3", "--algo", "sc-u", "--k", "2", "--out",
            "x.labels",
        ],
    );
    assert_eq!(exit_code(&run), 3);
}

#[test]
fn largest_component_restricts_the_run() {
    let dir = tempfile::tempdir().unwrap();
    // triangle 0-1-2 plus an edge 3-4: LCC has 3 vertices
    fs::write(
        dir.path().join("two.edges"),
        "0 1 1.0\n0 2 1.0\n1 2 1.0\n3 4 1.0\n",
    )
    .unwrap();
    let run = fairsc(
        dir.path(),
        &[
            "cluster", "--graph", "two.edges", "--n", "5", "--algo", "sc-n", "--k", "2",
            "--largest-component", "--out", "lcc.labels",
        ],
    );
    assert_eq!(exit_code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(read(dir.path(), "lcc.labels").lines().count(), 3);
    let out = stdout(&run);
    let row = out.lines().nth(1).unwrap();
    assert_eq!(row.split(',').nth(3).unwrap(), "3"); // n column
}

const EXP_FLAGS: &[&str] = &[
    "experiment", "--sweep", "n", "--values", "40,80", "--trials", "3", "--algos", "sc-u,fair-u",
    "--n", "40", "--k", "2", "--h", "2", "--a", "0.8", "--b", "0.6", "--c", "0.4", "--d", "0.2",
    "--seed", "13",
];

fn strip_runtime_column(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            fields[..fields.len() - 1].join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn experiment_has_expected_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = fairsc(dir.path(), &[EXP_FLAGS, &["--out", "a.csv"]].concat());
    assert_eq!(exit_code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = read(dir.path(), "a.csv");
    let lines: Vec<&str> = csv.lines().collect();
    // header + 2 values x 3 trials x 2 algos
    assert_eq!(lines.len(), 1 + 12);
    assert_eq!(
        lines[0],
        "sweep_var,value,trial,algo,error,balance_avg,ratiocut,ncut,runtime_ms"
    );
    // deterministic (sweep value, trial, algo) order
    assert!(lines[1].starts_with("n,40,0,sc-u,"));
    assert!(lines[2].starts_with("n,40,0,fair-u,"));
    assert!(lines[7].starts_with("n,80,0,sc-u,"));

    let rerun = fairsc(dir.path(), &[EXP_FLAGS, &["--out", "b.csv"]].concat());
    assert_eq!(exit_code(&rerun), 0);
    // identical modulo the measured runtime_ms column
    assert_eq!(
        strip_runtime_column(&csv),
        strip_runtime_column(&read(dir.path(), "b.csv"))
    );
}

#[test]
fn experiment_p_sweep_runs_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let run = fairsc(
        dir.path(),
        &[
            "experiment", "--sweep", "p", "--values", "0,1", "--trials", "2", "--algos",
            "fair-n,sc-n", "--n", "40", "--k", "2", "--h", "2", "--a", "0.8", "--b", "0.6",
            "--c", "0.4", "--d", "0.2", "--seed", "3", "--out", "p.csv",
        ],
    );
    assert_eq!(exit_code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = read(dir.path(), "p.csv");
    assert_eq!(csv.lines().count(), 1 + 8);
    // p sweeps need two groups
    let run = fairsc(
        dir.path(),
        &[
            "experiment", "--sweep", "p", "--values", "0.5", "--trials", "1", "--algos", "fair-n",
            "--n", "30", "--k", "2", "--h", "3", "--a", "0.8", "--b", "0.6", "--c", "0.4", "--d",
            "0.2", "--seed", "3", "--out", "p2.csv",
        ],
    );
    assert_eq!(exit_code(&run), 2);
}

#[test]
fn spectrum_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = fairsc(
        dir.path(),
        &[
            "spectrum-check", "--n", "24", "--k", "2", "--h", "2", "--a", "0.8", "--b", "0.6",
            "--c", "0.4", "--d", "0.2",
        ],
    );
    assert_eq!(exit_code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(stdout(&ok).contains("PASS"));
    // a <= b violates the model ordering
    let bad = fairsc(
        dir.path(),
        &[
            "spectrum-check", "--n", "24", "--k", "2", "--h", "2", "--a", "0.5", "--b", "0.6",
            "--c", "0.4", "--d", "0.2",
        ],
    );
    assert_eq!(exit_code(&bad), 2);
    // unbalanced configurations are rejected
    let unbalanced = fairsc(
        dir.path(),
        &[
            "spectrum-check", "--n", "20", "--k", "2", "--h", "2", "--a", "0.8", "--b", "0.6",
            "--c", "0.4", "--d", "0.2", "--eta", "0.7,0.3",
        ],
    );
    assert_eq!(exit_code(&unbalanced), 2);
    // size cap
    let big = fairsc(
        dir.path(),
        &[
            "spectrum-check", "--n", "600", "--k", "2", "--h", "2", "--a", "0.8", "--b", "0.6",
            "--c", "0.4", "--d", "0.2",
        ],
    );
    assert_eq!(exit_code(&big), 2);
}

#[test]
fn generate_with_perturbation_moves_group_labels() {
    let dir = tempfile::tempdir().unwrap();
    let run = fairsc(
        dir.path(),
        &[&["generate", "--seed", "4", "--perturb-p", "1", "--out", "pert"], GEN_FLAGS].concat(),
    );
    assert_eq!(exit_code(&run), 0);
    let groups = read(dir.path(), "pert.groups");
    assert!(groups.lines().all(|l| l == "0"), "p=1 collapses to one group");
}
