use std::path::Path;
use std::process::{Command, Output};

fn geogossip(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geogossip"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_one_row_per_trial_and_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = geogossip(
        &["run", "--space", "euclidean", "--agents", "5", "--iters", "20", "--trials", "3", "--record-every", "5"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "trial,iter,sigma2,delta,sigma2_kappa,delta_kappa,diameter,sigma2_frobenius");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 5);
    assert!(rows[0].starts_with("0,0,"));
    assert!(rows[14].starts_with("2,20,"));
    let summary: String = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"per_trial\""));
}

#[test]
fn zero_iterations_leave_the_slope_undefined() {
    let dir = tempfile::tempdir().unwrap();
    let out = geogossip(&["run", "--agents", "4", "--iters", "0", "--trials", "6"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")));
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"mean_curve_fit\": null"));
    assert!(summary.contains("\"slope\": null"));
}

#[test]
fn outputs_are_reproducible_and_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["run", "--space", "sphere", "--graph", "path", "--agents", "8", "--iters", "100", "--trials", "4", "--seed", "9"];
    let mut outputs = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "3")] {
        let csv = format!("{tag}.csv");
        let json = format!("{tag}.json");
        let mut args = base.to_vec();
        args.extend(["--jobs", jobs, "--csv", &csv, "--summary", &json]);
        let out = geogossip(&args, dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push((
            std::fs::read(dir.path().join(&csv)).unwrap(),
            std::fs::read(dir.path().join(&json)).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.conf"), "# small run\nspace = tree\nagents = 4\niters = 3\ntrials = 2\n").unwrap();
    let out = geogossip(&["run", "--config", "exp.conf", "--trials", "1"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"space\": \"tree\""));
}

#[test]
fn edge_list_graphs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("star.txt"), "0 1\n0 2\n0 3\n").unwrap();
    let out = geogossip(&["run", "--graph", "file:star.txt", "--agents", "4", "--iters", "5", "--trials", "1"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));

    std::fs::write(dir.path().join("split.txt"), "0 1\n2 3\n").unwrap();
    let out = geogossip(&["run", "--graph", "file:split.txt", "--agents", "4", "--iters", "5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("graph"), "{}", stderr(&out));
}

#[test]
fn invalid_configuration_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (flag, value) in [("--agents", "1"), ("--window", "1.5"), ("--space", "torus"), ("--record-every", "0"), ("--kappa", "-1")] {
        let out = geogossip(&["run", flag, value], dir.path());
        assert_eq!(out.status.code(), Some(2), "{flag} {value}");
        let field = flag.trim_start_matches("--").replace('-', "_");
        assert!(stderr(&out).contains(&format!("`{field}`")), "{}", stderr(&out));
    }
    let out = geogossip(&["run", "--space", "tree", "--algo", "rsgd"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`algo`"));
}

#[test]
fn runtime_failure_exits_3_with_trial_and_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = geogossip(&["run", "--space", "so3", "--kappa", "25", "--trials", "2", "--iters", "5"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("trial 0") && err.contains("iteration 0"), "{err}");
}

#[test]
fn property_suite_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let first = geogossip(&["check", "all", "--seed", "4"], dir.path());
    let second = geogossip(&["check", "all", "--seed", "4"], dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("bruhat_tits/tree"));
    assert!(text.contains("midpoint_cosine/so3"));
    assert!(text.trim_end().ends_with("0 failed"));

    let cat0 = geogossip(&["check", "cat0"], dir.path());
    let text = String::from_utf8(cat0.stdout).unwrap();
    assert!(!text.contains("sphere"));
    assert_eq!(geogossip(&["check", "hyperbolic"], dir.path()).status.code(), Some(2));
}
