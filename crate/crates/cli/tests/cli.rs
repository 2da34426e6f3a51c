use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treekernel"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn kernel_of_worked_example_is_15() {
    let x = fixture("example_x.trees");
    let y = fixture("example_y.trees");
    for alg in ["automata", "oracle"] {
        let o = run(&["kernel", path_str(&x), path_str(&y), "--algorithm", alg]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o), "15\n");
    }
    let o = run(&["kernel", path_str(&x), path_str(&y), "--verify"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "15\n");
    assert!(stderr(&o).contains("automata=15 oracle=15"));
}

#[test]
fn node_pair_baseline_needs_single_trees() {
    let x = fixture("example_x.trees");
    let y = fixture("example_y.trees");
    let o = run(&["kernel", path_str(&x), path_str(&y), "--algorithm", "moschitti"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("singleton"));
    let o = run(&["kernel", path_str(&y), path_str(&y), "--algorithm", "moschitti", "--verify"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("moschitti="));
}

#[test]
fn malformed_input_reports_position() {
    let bad = fixture("malformed.trees");
    let o = run(&["kernel", path_str(&bad), path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("offset 4"), "{err}");
}

#[test]
fn modes_come_from_headers_or_flags() {
    let x = fixture("unordered_x.trees");
    let y = fixture("unordered_y.trees");
    let o = run(&["kernel", path_str(&x), path_str(&y)]);
    assert_eq!(o.status.code(), Some(2), "ordered vs unordered must be rejected");
    let o = run(&["kernel", path_str(&x), path_str(&y), "--mode", "unordered", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "3\n");
    let o = run(&["kernel", path_str(&x), path_str(&y), "--mode", "ordered"]);
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["generate", "--grid", "DS9", "--out", "x"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "a"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let missing = run(&["kernel", "/nonexistent/a", "/nonexistent/b"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(
        run(&["kernel", "--algorithm", "dp", "a", "b"]).status.code(),
        Some(2)
    );
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["generate", "--grid", "DS1", "--seed", "42", "--out", path_str(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    assert_eq!(names[0], "ds1-0-f2-a5-d5.trees");
    for name in &names {
        let text = fs::read_to_string(a.join(name)).unwrap();
        assert_eq!(text, fs::read_to_string(b.join(name)).unwrap());
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 100);
        assert!(text.contains("# seed="));
        assert!(text.contains("# max_depth="));
    }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn small_datasets(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let o = run(&[
        "generate", "--grid", "DS2", "--seed", "3", "--out", path_str(&data),
        "--cardinal", "12", "--node-budget", "80",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    data
}

#[test]
fn bench_writes_consistent_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_datasets(dir.path());
    let out = dir.path().join("bench.csv");
    let o = run(&[
        "--threads", "2", "bench", "--data", path_str(&data), "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let rows = read_csv(&out);
    assert_eq!(
        rows[0].join(","),
        "config_id,algorithm,pair_count,avg_time_s,avg_product_states,avg_automaton_states,avg_tree_size,reduction_ratio,checksum"
    );
    let rows = &rows[1..];
    assert_eq!(rows.len(), 4 * 3);
    for config in rows.chunks(3) {
        let algs: Vec<&str> = config.iter().map(|r| r[1].as_str()).collect();
        assert_eq!(algs, ["automata", "oracle", "moschitti"]);
        for r in config {
            assert_eq!(r[0], config[0][0]);
            assert_eq!(r[2], "66");
            assert_eq!(r[8], config[0][8], "checksums differ for {}", r[0]);
            let ratio: f64 = r[7].parse().unwrap();
            assert!(ratio > 0.0 && ratio <= 1.0);
        }
    }

    let scaling = read_csv(&dir.path().join("bench_scaling.csv"));
    assert_eq!(scaling[0][0], "config_id");
    let pairs: usize = scaling[1..]
        .iter()
        .filter(|r| r[1] == "automata")
        .map(|r| r[3].parse::<usize>().unwrap())
        .sum();
    assert_eq!(pairs, 4 * 66);

    // everything except the timing columns is reproducible
    let again = dir.path().join("again.csv");
    let o = run(&[
        "--threads", "1", "bench", "--data", path_str(&data), "--out", path_str(&again),
        "--repeats", "1",
    ]);
    assert!(o.status.success());
    let strip = |rows: Vec<Vec<String>>| -> Vec<Vec<String>> {
        rows.into_iter()
            .map(|mut r| {
                r.remove(3);
                r
            })
            .collect()
    };
    assert_eq!(strip(read_csv(&out)), strip(read_csv(&again)));
}

#[test]
fn bench_from_grid_and_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = dir.path().join("b.csv");
    let o = run(&["bench", "--data", path_str(&empty), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["bench", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2), "needs --grid or --data");

    let o = run(&[
        "bench", "--grid", "DS2", "--algorithm", "automata", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 1 + 4);
    let mut last: Option<(f64, f64)> = None;
    for r in &rows[1..] {
        assert_eq!(r[2], "4950");
        let size: f64 = r[6].parse().unwrap();
        let ratio: f64 = r[7].parse().unwrap();
        if let Some((s, q)) = last {
            if size >= s {
                assert!(ratio <= q, "ratio grew from {q} to {ratio}");
            }
        }
        last = Some((size, ratio));
    }
}

#[test]
fn gram_outputs_symmetric_csv() {
    let x = fixture("example_x.trees");
    let y = fixture("example_y.trees");
    let o = run(&["gram", path_str(&x), path_str(&y)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "label,example_x,example_y\nexample_x,26,15\nexample_y,15,18\n"
    );

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(&[
        "gram", path_str(&x), path_str(&y), "--per-tree", "--algorithm", "moschitti",
        "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows[0], ["label", "example_x:0", "example_x:1", "example_y:0"]);
    for (i, row) in rows.iter().enumerate().skip(1) {
        for (j, value) in row.iter().enumerate().skip(1) {
            assert_eq!(value, &rows[j][i]);
        }
    }
    assert_eq!(rows[1][1], "11");
    let o = run(&["gram", path_str(&x), "--algorithm", "moschitti"]);
    assert_eq!(o.status.code(), Some(2));
}
