use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggmlab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn tritter(r: f64) -> f64 {
    let x = (5.0 + 4.0 * (4.0 * r).cosh()).sqrt() / 3.0;
    (x - 1.0) / (x + 1.0)
}

#[test]
fn tritter_sweep_matches_closed_form() {
    let o = run(&["ggm", "--family", "tritter", "--sweep", "r=0:2:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("param,ggm,argmax_partition,engine,tail_bound\n"));
    let rows = rows(&o);
    assert_eq!(rows.len(), 21);
    for row in rows {
        let r: f64 = row[0].parse().unwrap();
        let g: f64 = row[1].parse().unwrap();
        assert!((g - tritter(r)).abs() < 1e-10, "r={r}: {g}");
        assert_eq!(row[3], "gaussian");
    }
}

#[test]
fn usage_and_compute_errors_have_distinct_codes() {
    let o = run(&["ggm", "--family", "tritter", "--op", "add"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert_eq!(run(&["ggm", "--family", "fmsv", "--counts", "m1=x"]).status.code(), Some(2));
    assert_eq!(run(&["ggm", "--sweep", "r=1:0:0.1", "--family", "fmsv"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let o = run(&[
        "ggm", "--family", "fmsv", "--op", "subtract", "--counts", "m1=30", "--max-principal", "20",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
}

#[test]
fn freeze_check_exit_code_reports_freezing() {
    let o = run(&["freeze-check", "-M", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(rows(&o).len(), 7);
    assert!(text.contains("frozen=true"));

    let o = run(&["freeze-check", "-M", "6", "--op", "add"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("frozen=false"));
}

#[test]
fn undefined_enhancement_prints_nan() {
    let o = run(&["nongauss-table", "--r", "0", "--row", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&o)[0][3], "nan");
    assert!(String::from_utf8_lossy(&o.stderr).contains("WARN"));
}

#[test]
fn default_table_has_six_rows() {
    let o = run(&["nongauss-table"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&o);
    assert_eq!(rows.len(), 6);
    for row in rows {
        let f_add: f64 = row[3].parse().unwrap();
        let f_sub: f64 = row[5].parse().unwrap();
        assert!(f_sub > f_add && f_add > 0.0);
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["ggm", "--family", "fmsv", "--op", "subtract", "--counts", "m1=0..6"];
    let one = run(&[&["--jobs", "1"], &args[..]].concat());
    let many = run(&[&["--jobs", "4"], &args[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn both_engines_agree() {
    let o = run(&["ggm", "--family", "fmsv", "--engine", "both", "--sweep", "r=0.2,0.4,0.6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("param,ggm_gaussian,ggm_fock,"));
    let diff: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# max_abs_diff="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn dumped_state_round_trips() {
    let dir = std::env::temp_dir().join(format!("ggmlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.txt");
    let p = path.to_str().unwrap();
    let o = run(&["dump-state", "--family", "fmsv", "--op", "add", "--counts", "m1=1", "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    let from_file = run(&["ggm", "--state-file", p]);
    let direct = run(&["ggm", "--family", "fmsv", "--op", "add", "--counts", "m1=1"]);
    let a: f64 = rows(&from_file)[0][1].parse().unwrap();
    let b: f64 = rows(&direct)[0][1].parse().unwrap();
    assert!((a - b).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn crystal_sweep_reports_kinks() {
    let o = run(&[
        "ggm", "--family", "crystal", "--gamma1", "0.5", "--gamma2", "0.8", "--sweep", "t=0:8:0.05",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let kinks: Vec<_> = stdout(&o).lines().filter(|l| l.starts_with("# kink")).map(String::from).collect();
    assert!(kinks.len() >= 2);
    for k in kinks {
        let gap: f64 = k.rsplit("gap=").next().unwrap().parse().unwrap();
        assert!(gap.abs() < 1e-8, "{k}");
    }
}

#[test]
fn adjacent_subtraction_beats_alternate() {
    let o = run(&["compare-modes", "--op", "diff-alt-adj", "--ladder", "subtract", "--constrained", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let values: Vec<f64> = rows(&o).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.iter().all(|v| *v <= 1e-12));
    assert!(values[2] < 0.0);
}

#[test]
fn alternate_addition_beats_adjacent() {
    let o = run(&["compare-modes", "--op", "diff-alt-adj", "--ladder", "add", "--max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&o) {
        let (m1, n): (u32, u32) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        let v: f64 = row[2].parse().unwrap();
        if m1 > 0 && n > 0 {
            assert!(v > 0.0, "{row:?}");
        } else {
            assert!(v > -1e-9, "{row:?}");
        }
    }
}
