use std::path::Path;
use std::process::{Command, Output};

use fracdyn::cli::read_rows;

fn fracdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn formulas_print_exact_values() {
    for (args, want) in [
        (&["formulas", "two-saddle", "0.5", "0.5"][..], "5"),
        (&["formulas", "saddle-loop", "3"][..], "3/2 (1.500000)"),
        (&["formulas", "classify", "hopf", "3/5"][..], "bound 2 (d = 3/5, exact)"),
        (&["formulas", "deg-focus", "3", "3", "1"][..], "12/7 (1.71429, theorem)"),
        (&["formulas", "deg-focus", "5", "3", "2"][..], "122/65 (1.87692, conjecture)"),
    ] {
        let o = fracdyn(args);
        assert!(o.status.success(), "{args:?}");
        assert_eq!(stdout(&o).trim(), want, "{args:?}");
    }
    assert_eq!(fracdyn(&["formulas", "saddle-loop", "0"]).status.code(), Some(2));
    assert_eq!(fracdyn(&["formulas", "three-d", "1", "-1"]).status.code(), Some(2));
}

#[test]
fn table1_is_deterministic_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "id = \"t1\"\n[table1]\nrows = [[5, 3, 2], [3, 3, 1]]\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = fracdyn(&["table1", "-c", &cfg, "-o", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let rows = read_rows(ta.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].experiment, "t1/5-3-2");
    assert_eq!(rows[0].reference, Some(1.87287));
    assert_eq!(rows[1].predicted_exact.as_deref(), Some("12/7"));
    assert!(rows.iter().all(|r| r.runtime_s.is_none() && r.digest.len() == 64));

    // overrides change the digest, not the layout
    let o = fracdyn(&["table1", "-c", &cfg, "-s", "table1.r0=0.8"]);
    let moved = read_rows(o.stdout.as_slice()).unwrap();
    assert_ne!(moved[0].digest, rows[0].digest);
}

#[test]
fn empty_table_selection() {
    let o = fracdyn(&["table1", "-s", "table1.rows=[]"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn entry_exit_rows_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.csv");
    let cfg = write(
        dir.path(),
        "h.toml",
        &format!(
            "id = \"hopf\"\n[entry_exit]\nf = \"y - x^2\"\ng = \"-x + 0.3*x^2\"\ny0 = 1.0\nn = 40\n\
             [output]\nsequence_csv = {:?}\n",
            seq.to_str().unwrap()
        ),
    );
    let o = fracdyn(&["entry-exit", "-c", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows[0].snapped.as_deref(), Some("1/3"));
    assert_eq!(rows[0].bound.as_deref(), Some("1"));
    let text = std::fs::read_to_string(&seq).unwrap();
    assert!(text.starts_with("k,y_k,gap_k,residual_k"));
    assert_eq!(text.lines().count(), 42);

    let canard = fracdyn(&[
        "entry-exit",
        "-s",
        "entry_exit.f=\"y - x^2\"",
        "-s",
        "entry_exit.g=\"-x - x^2 + 20*x^4\"",
        "-s",
        "entry_exit.mode=\"canard\"",
    ]);
    assert!(canard.status.success());
    let r = &read_rows(canard.stdout.as_slice()).unwrap()[0];
    assert!((r.level.unwrap() - 0.0831412678630879).abs() < 1e-12);
    assert_eq!(r.bound.as_deref(), Some("2"));

    let sym = fracdyn(&[
        "entry-exit",
        "-s",
        "entry_exit.f=\"y - x^2\"",
        "-s",
        "entry_exit.g=\"-x\"",
        "-s",
        "entry_exit.y0=1",
    ]);
    assert_eq!(sym.status.code(), Some(4));
    let bad = fracdyn(&["entry-exit", "-s", "entry_exit.f=\"y - x^2\"", "-s", "entry_exit.g=\"-x\"", "-s", "bogus=1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(fracdyn(&["spiral-dim", "-c", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn spiral_dim_writes_rows_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("spiral.csv");
    let cfg = write(
        dir.path(),
        "s.toml",
        &format!(
            "id = \"exp\"\nmodel = \"three-d\"\n[params]\na1 = 1.0\nb2 = 2.0\n[spiral]\nturns = 20\n\
             [estimate]\nmethods = [\"box\"]\nscales = 16\n\
             [output]\ntrajectory = {:?}\nplot_script = true\n",
            traj.to_str().unwrap()
        ),
    );
    let o = fracdyn(&["spiral-dim", "-c", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows[0].predicted_exact.as_deref(), Some("4/3"));
    assert_eq!(rows[0].certainty, "theorem");
    assert!(rows[0].estimated.is_some());
    let text = std::fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("t,x,y\n") && text.lines().count() > 1000);
    assert!(dir.path().join("spiral.py").exists());
}

#[test]
fn gen_trig_dump() {
    let o = fracdyn(&["gen-trig", "--m", "3", "--n", "3", "--grid", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,cs,sn"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 0.0]);
    assert_eq!(fracdyn(&["gen-trig", "--m", "3", "--n", "3", "--grid", "4"]).status.code(), Some(2));
}
