use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qmetro(args: &[&str], config: Option<&str>) -> (Output, TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmetro"));
    cmd.env_remove("QMETRO_THREADS");
    if let Some(text) = config {
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(&path);
    }
    (cmd.args(args).output().unwrap(), dir)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn first_line(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn classify_default_family() {
    let (o, _d) = qmetro(&["classify"], None);
    assert!(o.status.success());
    assert_eq!(first_line(&o), "DephasingClass; HNKS: holds; RGNKS: holds");
}

#[test]
fn classify_half_dephasing() {
    let (o, _d) = qmetro(&["classify"], Some("[family]\np = 0.5\ng0 = [1.0, 0.0, 0.0]\ng1 = [-1.0, 0.0, 0.0]\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(first_line(&o).ends_with("HNKS: violated; RGNKS: holds"), "{}", first_line(&o));
}

#[test]
fn classify_depolarizing() {
    let (o, _d) = qmetro(&["classify"], Some("[channel]\nkind = \"depolarizing\"\nlambda = 0.5\naxis = [1.0, 0.0, 0.0]\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first_line(&o), "StrictlyContractive; HNKS: violated");
}

#[test]
fn qfi_of_rotated_depolarizing() {
    let (o, _d) = qmetro(&["qfi"], Some("[channel]\nkind = \"depolarizing\"\nlambda = 0.5\naxis = [1.0, 0.0, 0.0]\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let get = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{key},"))).unwrap();
        line.split(',').nth(1).unwrap().parse().unwrap()
    };
    assert!((get("channel_qfi_no_ancilla") - 1.0).abs() < 1e-9);
    assert!(get("channel_qfi_ancilla") >= get("channel_qfi_no_ancilla") - 1e-9);
}

#[test]
fn malformed_config_exits_2_with_location() {
    let (o, _d) = qmetro(&["sweep"], Some("[protocol]\nkind = \"sql\"\nw = = 3\n"));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: ") && err.contains("line 3, column"), "{err}");
}

#[test]
fn unknown_key_exits_2() {
    let (o, _d) = qmetro(&["sweep"], Some("[protocol]\nkind = \"sql\"\nomega = 3.0\n"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let (o, _d) = qmetro(&["sweep", "--out", "/nonexistent-dir/out.csv"], None);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn spam_rate_out_of_range_exits_4() {
    let (o, _d) = qmetro(&["sweep"], Some("[protocol]\nkind = \"spam\"\nq = 0.7\n\n[n]\nlist = [10]\n"));
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("q"), "{err}");
}

#[test]
fn empty_n_gives_header_only() {
    let (o, _d) = qmetro(&["sweep"], None);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "protocol,n,p,w,q,interval,value\n");
}

#[test]
fn sql_sweep_over_range_is_monotone() {
    let (o, _d) = qmetro(&["sweep"], Some("[protocol]\nkind = \"sql\"\n\n[n.range]\nstart = 1\nend = 100\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 100);
    let values: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], "sql");
        assert_eq!(r[1], (i + 1).to_string());
    }
    assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
}

#[test]
fn figure2_columns_and_ordering() {
    let (o, _d) = qmetro(&["figure2"], Some("[n]\nlist = [100, 200]\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "n,qec_analytic,sql_q0,sql_q0.001,sql_q0.02,repeated_interval6,no_control");
    let rows = data_rows(&text);
    let at100: Vec<f64> = rows[0].iter().map(|x| x.parse().unwrap()).collect();
    assert!((at100[1] - 2.56 * 100.0 * 100.0).abs() <= 1e-9 * at100[1]);
    let at200: Vec<f64> = rows[1].iter().map(|x| x.parse().unwrap()).collect();
    assert!(at200[1..].windows(2).all(|w| w[0] > w[1]), "{at200:?}");
}

#[test]
fn figure2_default_grid_reaches_n_max() {
    let (o, _d) = qmetro(&["figure2"], Some("[figure2]\nn_max = 300\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.first().unwrap()[0], "1");
    assert_eq!(rows.last().unwrap()[0], "300");
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let cfg = "seed = 5\n[protocol]\nkind = \"repeated\"\n\n[n.range]\nstart = 1\nend = 60\nstep = 3\n";
    let (a, _d1) = qmetro(&["sweep", "--threads", "1"], Some(cfg));
    let (b, _d2) = qmetro(&["sweep", "--threads", "4"], Some(cfg));
    let (c, _d3) = qmetro(&["sweep", "--threads", "4"], Some(cfg));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn out_flag_overrides_config_output() {
    let dir = tempfile::tempdir().unwrap();
    let from_cfg = dir.path().join("cfg.csv");
    let from_flag = dir.path().join("flag.csv");
    let cfg = format!("output = {:?}\n[n]\nlist = [3]\n", from_cfg.to_str().unwrap());
    let (o, _d) = qmetro(&["sweep", "--out", from_flag.to_str().unwrap()], Some(&cfg));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(from_flag.exists());
    assert!(!Path::new(&from_cfg).exists());
    assert!(stdout(&o).is_empty());
}

#[test]
fn threads_env_is_read_and_flag_wins() {
    let run = |env: &str, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmetro"));
        cmd.env("QMETRO_THREADS", env).arg("classify");
        if let Some(f) = flag {
            cmd.args(["--threads", f]);
        }
        cmd.output().unwrap()
    };
    // A bad env value is rejected unless the flag supersedes it.
    assert_eq!(run("many", None).status.code(), Some(2));
    assert!(run("many", Some("2")).status.success());
    assert!(run("3", None).status.success());
}
