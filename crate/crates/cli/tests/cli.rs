use std::path::Path;
use std::process::{Command, Output};

fn permuton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permuton"))
        .args(args)
        .env_remove("PERMUTON_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn demazure_word() {
    let o = permuton(&["demazure", "--n", "3", "--word", "1,2,1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3 2 1\n");
}

#[test]
fn demazure_pair_and_repeated_letter() {
    let o = permuton(&["demazure", "--u", "2143", "--v", "1324"]);
    assert_eq!(stdout(&o), "2 4 1 3\n");
    let o = permuton(&["demazure", "--n", "3", "--word", "1,1"]);
    assert_eq!(stdout(&o), "2 1 3\n");
}

#[test]
fn analytic_longest_element_limit() {
    let o = permuton(&[
        "analytic", "--family", "pipedream-limit", "--p", "1", "--phi", "0:0,1:0", "--psi", "0:0,1:1", "--eval", "0.5,0.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "0.5\n");
}

#[test]
fn analytic_table_is_csv() {
    let o = permuton(&["analytic", "--family", "identity", "--table", "2"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,H");
    assert_eq!(lines.len(), 10);
    assert!(lines.contains(&"0,1,1"));
    assert!(lines.contains(&"0.5,0.5,0"));
}

#[test]
fn analytic_classify() {
    let o = permuton(&[
        "analytic", "--family", "pipedream-limit", "--peridot", "0.6666666666666666", "--p", "0.5", "--classify", "--eval",
        "0.9,0.1", "--eval", "0.1,0.9",
    ]);
    assert_eq!(stdout(&o), "P_se\nP_nw\n");
}

#[test]
fn missing_shape_is_io_error() {
    let o = permuton(&["sample", "--shape", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("missing.json"));
}

#[test]
fn argument_errors_exit_one() {
    for args in [
        vec!["bogus"],
        vec!["demazure", "--n", "3", "--word", "1,3"],
        vec!["sample", "--staircase", "4", "--p", "1.5"],
        vec!["tasep", "--eval", "v", "--p", "0.5", "--m", "2", "--t", "1"],
        vec!["experiment", "nope"],
        vec!["demazure", "--n", "3", "--word", "1", "--unknown-flag"],
    ] {
        let o = permuton(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_succeeds() {
    let o = permuton(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PERMUTON_SEED"));
}

#[test]
fn sample_height_star_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let perm = dir.path().join("u.txt");
    let grid = dir.path().join("u.json");
    let id = dir.path().join("id.json");
    let prod = dir.path().join("prod.json");
    assert!(permuton(&["sample", "--staircase", "12", "--p", "0.5", "--seed", "7", "--out", path(&perm)]).status.success());
    assert!(permuton(&["height", "--perm-file", path(&perm), "--out", path(&grid)]).status.success());
    assert!(permuton(&["height", "--identity", "12", "--out", path(&id)]).status.success());
    let o = permuton(&["star", "--a", path(&grid), "--b", path(&id), "--out", path(&prod)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&grid).unwrap(), std::fs::read(&prod).unwrap());
    let o = permuton(&["star", "--a", path(&id), "--b", path(&grid)]);
    assert_eq!(stdout(&o).as_bytes(), std::fs::read(&grid).unwrap().as_slice());
}

#[test]
fn seed_precedence() {
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_permuton"));
        c.args(args).env_remove("PERMUTON_SEED");
        if let Some(v) = env {
            c.env("PERMUTON_SEED", v);
        }
        stdout(&c.output().unwrap())
    };
    let base = ["sample", "--staircase", "30", "--p", "0.5"];
    fn with<'a>(base: &[&'a str], s: &'a str) -> Vec<&'a str> {
        [base, &["--seed", s]].concat()
    }
    assert_eq!(run(&with(&base, "5"), None), run(&with(&base, "5"), None));
    assert_eq!(run(&with(&base, "5"), Some("9")), run(&with(&base, "5"), None));
    assert_eq!(run(&base, Some("9")), run(&with(&base, "9"), None));
    assert_ne!(run(&with(&base, "5"), None), run(&with(&base, "9"), None));
    let default = permuton::rng::DEFAULT_SEED.to_string();
    assert_eq!(run(&base, None), run(&with(&base, &default), None));
}

#[test]
fn tasep_trajectory_and_eval() {
    let o = permuton(&["tasep", "--k", "3", "--steps", "4", "--trials", "2", "--p", "0.5"]);
    let text = stdout(&o);
    assert!(text.starts_with("trial,t,i,xi\n0,0,1,3\n0,0,2,2\n0,0,3,1\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 5 * 3);
    let o = permuton(&["tasep", "--eval", "c", "--p", "0.3", "--m", "0", "--t", "2"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.6 / 0.7).abs() < 1e-11);
}

#[test]
fn bubble_passes() {
    let o = permuton(&["bubble", "--n", "5", "--alpha", "0.2", "--perm", "53142"]);
    assert_eq!(stdout(&o), "5 3 4 2 1\n");
    let o = permuton(&["bubble", "--n", "6", "--alpha", "1", "--coxeter", "bipartite"]);
    assert_eq!(stdout(&o), "6 5 4 3 2 1\n");
}

#[test]
fn experiment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let csv = dir.path().join("rows.csv");
    std::fs::write(&cfg, r#"{"ns": [3, 40], "trials": 4}"#).unwrap();
    let o = permuton(&["experiment", "pattern", "--config", path(&cfg), "--csv", path(&csv), "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k"], 2);
    assert_eq!(v["per_n"][0]["exact"], true);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("n,pattern,density\n"));
    let again = permuton(&["experiment", "pattern", "--config", path(&cfg), "--seed", "3", "--workers", "1"]);
    assert_eq!(stdout(&o), stdout(&again));
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(permuton(&["experiment", "pattern", "--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn render_svgs() {
    let o = permuton(&["render", "--perm", "123"]);
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 3);
    let dir = tempfile::tempdir().unwrap();
    let pd = dir.path().join("pd.json");
    let o = permuton(&["sample", "--staircase", "4", "--p", "1", "--pipedream-out", path(&pd)]);
    assert_eq!(stdout(&o), "4 3 2 1\n");
    let o = permuton(&["render", "--pipedream", path(&pd), "--resolve"]);
    assert!(stdout(&o).trim_end().ends_with("</svg>"));
    let perm = dir.path().join("u.txt");
    std::fs::write(&perm, "3 1 2\n").unwrap();
    let o = permuton(&["render", "--perm-file", path(&perm)]);
    assert_eq!(stdout(&o), stdout(&permuton(&["render", "--perm", "312"])));
    assert_eq!(permuton(&["render", "--perm", "12", "--pipedream", path(&pd)]).status.code(), Some(1));
}
