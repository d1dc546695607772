use std::fs;
use std::path::Path;
use std::process::Command;

fn hhlsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hhlsim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_writes_the_figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "backend = \"ideal\"\nexact = true\n");
    let o = hhlsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["fig3b.csv", "fig3c.csv", "fig4.json", "dataset.csv", "report.json", "metadata.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("process fidelity 1.0000"));

    fs::remove_file(out.join("fig3b.csv")).unwrap();
    let o = hhlsim(&["report", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("fig3b.csv").is_file());
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "shots = 0\n");
    assert_eq!(hhlsim(&["run", "--config", &cfg]).status.code(), Some(1));
    let missing = dir.path().join("absent.toml");
    assert_eq!(hhlsim(&["qpt", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn underdetermined_fit_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "backend = \"ideal\"\nexact = true\ninputs = [[0.0, 0.0], [1.5707963267948966, 0.0], [3.141592653589793, 0.0]]\n",
    );
    let o = hhlsim(&["qpt", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
