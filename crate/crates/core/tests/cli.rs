use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kfbi(args: &[&str], root: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kfbi"));
    c.args(args).env("RUST_LOG", "error");
    match root {
        Some(r) => c.env("KFBI_OUTPUT_ROOT", r),
        None => c.env_remove("KFBI_OUTPUT_ROOT"),
    };
    c.output().expect("run kfbi")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn help_lists_the_subcommands() {
    let o = kfbi(&["--help"], None);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["solve", "converge", "evolve"] {
        assert!(text.contains(sub), "{text}");
    }
}

#[test]
fn converge_writes_ordered_rows_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let args = ["converge", "--example", "2", "--case", "IV", "--grid", "32", "--grid", "16", "--jobs", "2", "--out"];
    let run = || {
        let mut a = args.to_vec();
        a.push(out.to_str().unwrap());
        let o = kfbi(&a, None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("convergence.csv")).unwrap()
    };
    let first = run();
    assert!(first.starts_with('#'));
    let rows = data_rows(&first);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("16,") && rows[1].starts_with("32,"));
    assert_eq!(rows[1].split(',').count(), 14);
    assert_eq!(first, run());
    for f in ["convergence_l2.csv", "convergence_max.csv"] {
        let t = fs::read_to_string(out.join(f)).unwrap();
        assert_eq!(data_rows(&t)[0].split(',').count(), 8, "{f}");
    }
}

#[test]
fn solve_honors_the_output_root_and_dump_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = kfbi(
        &["solve", "-e", "1", "-n", "32", "--mu-plus", "3", "--dump-fields", "--dump-trace", "--dump-jumps"],
        Some(dir.path()),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let base = dir.path().join("solve-ex1");
    let n32 = base.join("N32");
    for f in ["field_u1.vtk", "field_p.csv", "trace.csv", "gmres.csv", "jumps.csv", "curve.csv"] {
        assert!(n32.join(f).exists(), "missing {f}");
    }
    let errors = fs::read_to_string(base.join("errors.csv")).unwrap();
    assert_eq!(data_rows(&errors).len(), 1);
    let jumps = fs::read_to_string(n32.join("jumps.csv")).unwrap();
    assert!(jumps.starts_with("index,x,y,"));
    assert!(jumps.lines().count() > 10);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep settings\nexample = 1\ncase = II\ngrid = 16, 24\n").unwrap();
    let out = dir.path().join("o");
    let o = kfbi(
        &["converge", "--config", cfg.to_str().unwrap(), "--grid", "16", "--out", out.to_str().unwrap()],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(data_rows(&t).len(), 1);
}

#[test]
fn evolve_with_zero_final_time_keeps_the_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ev");
    let o = kfbi(&["evolve", "-e", "6", "-n", "64", "--t-final", "0", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(data_rows(&d).len(), 1);
    assert!(out.join("snapshots/curve_t0.0000.csv").exists());
}

#[test]
fn invalid_requests_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["converge", "-e", "4"],
        vec!["solve", "-e", "9"],
        vec!["solve", "--case", "VII"],
        vec!["solve", "--mu-minus", "-1"],
    ] {
        let mut a = args.clone();
        a.extend(["--out", dir.path().to_str().unwrap()]);
        let o = kfbi(&a, None);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(!o.stderr.is_empty());
    }
}
