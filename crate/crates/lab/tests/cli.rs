use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn lab(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphing-lab"))
        .args(args)
        .env("GRAPHING_LAB_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn summary(o: &Output, key: &str) -> String {
    let prefix = format!("# summary {key}: ");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_owned))
        .unwrap_or_else(|| panic!("no summary {key}"))
}

#[test]
fn metric_on_the_rotation() {
    let spec = fixture("c_alpha.json");
    let o = lab(&["metric", "--spec", &spec, "--x", "0.1", "--y", "0.2", "--rmax", "64"], "1");
    assert!(o.status.success());
    let row = &data_rows(&o)[0];
    assert!((row[1].parse::<f64>().unwrap() - 0.1).abs() < 1e-9);
    assert_eq!(row[2], "true");
    assert_eq!(row[3], "9");
}

#[test]
fn c3_on_the_rotation() {
    let spec = fixture("c_alpha.json");
    let o = lab(&["check-c3", "--spec", &spec, "--eps", "0.2", "--r", "3", "--n", "100", "--seed", "7"], "2");
    assert!(o.status.success());
    assert_eq!(summary(&o, "delta"), "0.125");
    assert_eq!(summary(&o, "passed"), "100");
    assert_eq!(summary(&o, "all_passed"), "true");
}

#[test]
fn triangle_has_one_ball_class() {
    let spec = fixture("k3.json");
    let o = lab(&["bs-stats", "--spec", &spec, "--r", "2", "--n", "10000", "--seed", "1"], "1");
    assert!(o.status.success());
    let rows = data_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "1.0");
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let spec = fixture("c_alpha_cut.json");
    let runs: &[&[&str]] = &[
        &["check-unimodular", "--spec", &spec, "--a", "0..0.5", "--b", "0.5..1", "--n", "20000", "--seed", "4"],
        &["bs-stats", "--spec", &spec, "--r", "3", "--n", "5000", "--seed", "4", "--format", "json"],
        &["separation", "--spec", &spec, "--t", "2", "--n", "300", "--seed", "4"],
        &["support", "--spec", &spec, "--x", "0.3", "--rho", "0.1", "--n", "3000", "--seed", "4"],
    ];
    for args in runs {
        let one = lab(args, "1");
        assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
        assert_eq!(one.stdout, lab(args, "1").stdout);
        assert_eq!(one.stdout, lab(args, "4").stdout);
    }
}

#[test]
fn exit_codes() {
    let spec = fixture("c_alpha.json");
    let unresolved = lab(&["metric", "--spec", &spec, "--x", "0.3", "--y", "0.3", "--require-resolved"], "1");
    assert_eq!(unresolved.status.code(), Some(4));
    let lenient = lab(&["metric", "--spec", &spec, "--x", "0.3", "--y", "0.3"], "1");
    assert_eq!(lenient.status.code(), Some(0));
    let capped = lab(&["ball", "--spec", &spec, "--x", "0.1", "--r", "60000"], "1");
    assert_eq!(capped.status.code(), Some(3));
    let dir = std::env::temp_dir().join(format!("graphing-lab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"family": "cycle_rotation", "params": {"alpha": 0.6}, "degree_bound": 1}"#).unwrap();
    let invalid = lab(&["validate", "--spec", bad.to_str().unwrap()], "1");
    assert_eq!(invalid.status.code(), Some(2));
    let no_seed = lab(&["bs-stats", "--spec", &spec, "--r", "1"], "1");
    assert_eq!(no_seed.status.code(), Some(2));
}

#[test]
fn trace_of_the_spiral_limit_at_the_cut() {
    let spec = fixture("c_alpha_cut.json");
    let o = lab(
        &[
            "compactify-trace",
            "--spec",
            &spec,
            "--start",
            "0.0",
            "--target",
            "0.0",
            "--backward",
            "--skip",
            "11",
            "--depth",
            "6",
        ],
        "1",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&o, "closure_neighbors"), "2");
    let roots = summary(&o, "neighbor_roots");
    let near_alpha = roots
        .split(' ')
        .map(|r| r.split_once(':').unwrap().1.parse::<f64>().unwrap())
        .any(|c| (c - 0.6180339887).abs() < 1e-4);
    assert!(near_alpha, "{roots}");
}

#[test]
fn validate_reports_a_clean_spec() {
    let o = lab(&["validate", "--spec", &fixture("circle_and_triangle.json")], "1");
    assert!(o.status.success());
    assert_eq!(summary(&o, "valid"), "true");
}

#[test]
fn out_file_matches_stdout() {
    let spec = fixture("k3.json");
    let path = std::env::temp_dir().join(format!("graphing-lab-out-{}.csv", std::process::id()));
    let args = ["recurrence", "--spec", &spec, "--a", "#0", "--x", "0", "--radius", "5"];
    let printed = lab(&args, "1");
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_owned();
    with_out.extend(["--out", &p]);
    assert!(lab(&with_out, "1").status.success());
    assert_eq!(std::fs::read(&path).unwrap(), printed.stdout);
    let rows = data_rows(&printed);
    assert!(rows.iter().all(|r| r[1] == "1"));
}
