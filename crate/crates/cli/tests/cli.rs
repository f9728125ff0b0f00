//! End-to-end runs of the binary: exit codes, error lines and files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SEQUENTIAL: &str = r#"
model = "sequential"
regime = "both"
seed = 7

[demand]
family = "linear"
params = [1.0, 1.0]

[market]
n = 2
lambda = 0.5
s = 0.1

[simulate]
replications = 10
consumers = 2000
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tariffsearch"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_writes_summary_and_cdf_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SEQUENTIAL);
    let out = dir.path().join("out");
    let o = run(&["solve"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let summary = csv_rows(&out.join("summary.csv"));
    assert_eq!(summary[0][0], "model");
    assert_eq!(summary.len(), 3);
    let two_part = summary.iter().find(|r| r[1] == "two-part").unwrap();
    let t_r: f64 = two_part[4].parse().unwrap();
    assert!((t_r - 0.221_880_104_960_028_84).abs() < 1e-9, "{t_r}");

    for regime in ["linear", "two-part"] {
        let rows = csv_rows(&out.join(format!("cdf_{regime}.csv")));
        assert_eq!(rows[0], ["x", "cdf"]);
        assert_eq!(rows.len(), 513);
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(rows[512][1].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn lambda_one_is_a_config_error_naming_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &SEQUENTIAL.replace("lambda = 0.5", "lambda = 1.0"));
    let o = run(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error kind=config code=2 message="), "{err}");
    assert!(err.contains("lambda") && err.contains("(0, 1)"), "{err}");
}

#[test]
fn noisy_mu_not_summing_to_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
model = "noisy"
[demand]
family = "linear"
params = [1.0, 1.0]
[noisy]
mu = [0.5, 0.48]
s = 0.1
"#;
    let cfg = write(dir.path(), "c.toml", text);
    let o = run(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("sum"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_missing_file_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{SEQUENTIAL}\n[solver]\nquad_tolerance = 1e-9\n"));
    let o = run(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("quad_tolerance"), "{}", stderr(&o));

    let o = run(&["solve"], &dir.path().join("absent.toml"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error kind=io"), "{}", stderr(&o));
}

#[test]
fn unresolvable_search_cost_is_a_solve_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &SEQUENTIAL.replace("s = 0.1", "s = 1e-300"));
    let o = run(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error kind=solve code=3"), "{}", stderr(&o));
}

#[test]
fn verify_accepts_solver_output_and_rejects_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &SEQUENTIAL.replace("\"both\"", "\"two-part\""));
    let out = dir.path().join("out");
    assert_eq!(run(&["solve"], &cfg, &out).status.code(), Some(0));

    // Solver configuration and its own CDF table both certify.
    let o = run(&["verify"], &cfg, &dir.path().join("v1"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = out.join("cdf_two-part.csv");
    let o = run(&["verify", "--table", table.to_str().unwrap()], &cfg, &dir.path().join("v2"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = csv_rows(&dir.path().join("v2/verification.csv"));
    assert_eq!(report[0], ["regime", "check", "residual", "location", "tolerance", "bound", "pass"]);
    assert!(report[1..].iter().all(|r| r[6] == "true"));

    let rows = csv_rows(&table);
    let (xs, cs): (Vec<&str>, Vec<f64>) =
        rows[1..].iter().map(|r| (r[0].as_str(), r[1].parse::<f64>().unwrap())).unzip();

    // Hold the CDF flat over a band of rows.
    let mut plateau = String::from("x,cdf\n");
    for (i, x) in xs.iter().enumerate() {
        let c = if (200..260).contains(&i) { cs[200] } else { cs[i] };
        plateau.push_str(&format!("{x},{c:e}\n"));
    }
    let p = write(dir.path(), "plateau.csv", &plateau);
    let o = run(&["verify", "--table", p.to_str().unwrap()], &cfg, &dir.path().join("v3"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("no-flat-region"), "{}", stderr(&o));
    let report = csv_rows(&dir.path().join("v3/verification.csv"));
    let flat = report.iter().find(|r| r[1] == "no-flat-region").unwrap();
    assert_eq!(flat[6], "false");

    // Scaling by 1.01 pushes the CDF above one: malformed input.
    let mut scaled = String::from("x,cdf\n");
    for (x, c) in xs.iter().zip(&cs) {
        scaled.push_str(&format!("{x},{:e}\n", c * 1.01));
    }
    let p = write(dir.path(), "scaled.csv", &scaled);
    let o = run(&["verify", "--table", p.to_str().unwrap()], &cfg, &dir.path().join("v4"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("outside [0, 1]"), "{}", stderr(&o));

    // Wrong header.
    let p = write(dir.path(), "bad.csv", "price,prob\n0.1,0\n0.2,1\n");
    let o = run(&["verify", "--table", p.to_str().unwrap()], &cfg, &dir.path().join("v5"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_sweep_axis_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{SEQUENTIAL}\n[sweep]\nlambda = []\n"));
    let o = run(&["sweep"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda is empty"), "{}", stderr(&o));

    let cfg = write(dir.path(), "d.toml", SEQUENTIAL);
    let o = run(&["sweep"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows_footer_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SEQUENTIAL}\n[sweep]\nlambda = [0.3, 0.7]\nn = [2, 5]\ns_relative_points = 3\n");
    let cfg = write(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    let o = run(&["sweep", "--emit-plot-data"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&out.join("sweep.csv"));
    // Header, two rows per point, footer.
    assert_eq!(rows.len(), 1 + 2 * 12 + 1);
    let footer = rows.last().unwrap();
    assert_eq!(footer[0], "footer");
    assert!(footer.contains(&"true".to_string()));
    assert!(footer.last().unwrap().contains("points=12 errors=0"));
    let plot = csv_rows(&out.join("plot/sweep_ts_two-part.csv"));
    assert_eq!(plot[0], ["series", "x", "y"]);
    assert_eq!(plot.len(), 13);
    assert_eq!(plot[4][0], "1");
}

#[test]
fn outputs_are_byte_stable_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SEQUENTIAL}\n[sweep]\nlambda = [0.2, 0.5, 0.8]\nn = [2, 3]\n");
    let cfg = write(dir.path(), "c.toml", &text);
    for cmd in ["simulate", "sweep", "welfare", "solve"] {
        let a = dir.path().join(format!("{cmd}-a"));
        let b = dir.path().join(format!("{cmd}-b"));
        let run_with = |threads: &str, out: &Path| {
            let mut c = bin();
            c.args([cmd, "--threads", threads]);
            if cmd == "simulate" {
                c.arg("--per-replication");
            }
            c.arg("--config").arg(&cfg).arg("--out").arg(out).output().unwrap()
        };
        let oa = run_with("1", &a);
        let ob = run_with("3", &b);
        assert_eq!(oa.status.code(), Some(0), "{cmd}: {}", stderr(&oa));
        assert_eq!(ob.status.code(), Some(0), "{cmd}: {}", stderr(&ob));
        for entry in std::fs::read_dir(&b).unwrap() {
            let name = entry.unwrap().file_name();
            let x = std::fs::read(a.join(&name)).unwrap();
            let y = std::fs::read(b.join(&name)).unwrap();
            assert_eq!(x, y, "{cmd}: {name:?} differs");
        }
    }
    assert!(dir.path().join("simulate-b/simulation_replications.csv").exists());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SEQUENTIAL);
    let read = |sub: &str, seed: Option<&str>| {
        let out = dir.path().join(sub);
        let mut c = bin();
        c.arg("simulate").arg("--config").arg(&cfg).arg("--out").arg(&out);
        if let Some(s) = seed {
            c.args(["--seed", s]);
        }
        assert_eq!(c.output().unwrap().status.code(), Some(0));
        std::fs::read(out.join("simulation.csv")).unwrap()
    };
    assert_eq!(read("a", None), read("b", Some("7")));
    assert_ne!(read("a", None), read("c", Some("8")));
}

#[test]
fn continuous_cost_commands() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
model = "continuous-cost"
[demand]
family = "linear"
params = [1.0, 1.0]
[cost]
family = "uniform"
params = [0.25]
[simulate]
replications = 2
consumers = 10
"#;
    let cfg = write(dir.path(), "c.toml", text);
    let out = dir.path().join("out");
    for cmd in ["solve", "verify", "welfare"] {
        let o = run(&[cmd], &cfg, &out);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
    }
    let summary = csv_rows(&out.join("summary.csv"));
    let fee = summary.iter().find(|r| r[1] == "two-part").unwrap();
    assert_eq!(fee[2].parse::<f64>().unwrap(), 0.25);
    let checks = csv_rows(&out.join("welfare_checks.csv"));
    assert!(checks[1..].iter().all(|r| r[3] == "true"), "{checks:?}");
    // No offer distribution to replay.
    assert_eq!(run(&["simulate"], &cfg, &out).status.code(), Some(2));
}
