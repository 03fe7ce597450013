mod common;

use std::fs;
use std::path::Path;

use common::{run_cli, write_config, zero_mode_verify};

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn run_config(config: &Path, out: &Path, workers: Option<usize>) -> common::CliRun {
    run_cli(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()], workers)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn outputs_are_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for (config, files) in [
        ("verify_holder_weak.ini", vec!["modes.csv", "aggregate.csv", "config.ini"]),
        ("converge_single_mode.ini", vec!["converge.csv", "converge_counting.csv"]),
        ("solve_minimal.ini", vec!["solution.csv", "aggregate.csv"]),
    ] {
        let path = configs_dir().join(config);
        let one = tmp.path().join(format!("{config}-1"));
        let four = tmp.path().join(format!("{config}-4"));
        let again = tmp.path().join(format!("{config}-1b"));
        assert_eq!(run_config(&path, &one, Some(1)).code, 0, "{config}");
        assert_eq!(run_config(&path, &four, Some(4)).code, 0, "{config}");
        assert_eq!(run_config(&path, &again, Some(1)).code, 0, "{config}");
        for f in files {
            assert_eq!(read(&one, f), read(&four, f), "{config}: {f}");
            assert_eq!(read(&one, f), read(&again, f), "{config}: {f}");
        }
    }
}

#[test]
fn csv_headers_are_fixed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lip");
    assert_eq!(run_config(&configs_dir().join("verify_lip.ini"), &out, None).code, 0);
    let modes = read(&out, "modes.csv");
    assert_eq!(modes.lines().next(), Some("m,beta2,C,K,exponent,realized_ratio,pass"));
    assert_eq!(modes.lines().count(), 65);
    assert!(modes.lines().skip(1).all(|l| l.ends_with(",true")));
    let aggregate = read(&out, "aggregate.csv");
    assert_eq!(aggregate.lines().next(), Some("t,l2_u,l2_du,bound,ratio"));
    let out = tmp.path().join("conv");
    assert_eq!(run_config(&configs_dir().join("converge_single_mode.ini"), &out, None).code, 0);
    let conv = read(&out, "converge.csv");
    assert_eq!(conv.lines().next(), Some("hbar,err_l2,derr_l2"));
    assert!(conv.lines().last().unwrap().starts_with("# fitted_order="));
}

#[test]
fn every_shipped_verify_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["verify_lip", "verify_holder_strict", "verify_smooth_weak", "verify_holder_weak"] {
        let r = run_config(&configs_dir().join(format!("{name}.ini")), &tmp.path().join(name), None);
        assert_eq!(r.code, 0, "{name}: {}{}", r.stdout, r.stderr);
        assert!(r.stdout.contains("verify: ok"));
    }
}

#[test]
fn sabotaged_constant_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_config(&configs_dir().join("sabotaged_k.ini"), &tmp.path().join("bad"), None);
    assert_eq!(r.code, 1, "{}", r.stdout);
    assert!(r.stdout.contains("contract failed"));
    let modes = read(&tmp.path().join("bad"), "modes.csv");
    assert!(modes.lines().any(|l| l.ends_with(",false")));

    // the same run with the proof's constant passes
    let good = write_config(tmp.path(), "good.ini", &zero_mode_verify(1.0));
    assert_eq!(run_config(&good, &tmp.path().join("good"), None).code, 0);
    let bad = write_config(tmp.path(), "half.ini", &zero_mode_verify(0.5));
    assert_eq!(run_config(&bad, &tmp.path().join("half"), None).code, 1);
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.ini");
    assert_eq!(run_config(&missing, &tmp.path().join("x"), None).code, 2);

    let unknown = write_config(tmp.path(), "unknown.ini", &zero_mode_verify(1.0).replace("T = 1", "T = 1\ncolour = blue"));
    let r = run_config(&unknown, &tmp.path().join("x"), None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("colour"), "{}", r.stderr);

    let uneven = "[run]\nmode = converge\nT = 1\n[grid]\nn = 1\nL = 1\nhbar = 0.5, 0.3\n[a]\nkind = constant\nvalue = 1\n[data]\nu0 = single_mode 1\n";
    let r = run_config(&write_config(tmp.path(), "uneven.ini", uneven), &tmp.path().join("x"), None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("N=L/hbar not an even integer"));

    let good = write_config(tmp.path(), "good.ini", &zero_mode_verify(1.0));
    let r = run_cli(&["run", good.to_str().unwrap(), "--out", tmp.path().join("y").to_str().unwrap()], None);
    assert_eq!(r.code, 0);
    let mut cmd = std::process::Command::new(common::binary());
    cmd.args(["run", good.to_str().unwrap(), "--out", tmp.path().join("z").to_str().unwrap()]);
    cmd.env("LATTICE_WAVE_WORKERS", "many");
    assert_eq!(cmd.output().unwrap().status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "[run]\nmode = solve\nT = 1\n[grid]\nn = 1\nN = 8\nhbar = 0.25\n[a]\nkind = constant\nvalue = 1\n[b]\nkind = constant\nvalue = 1e30\n[data]\nu0 = single_mode 1\n";
    let r = run_config(&write_config(tmp.path(), "stiff.ini", body), &tmp.path().join("x"), None);
    assert_eq!(r.code, 3, "{}{}", r.stdout, r.stderr);
}

#[test]
fn written_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    assert_eq!(run_config(&configs_dir().join("verify_smooth_weak.ini"), &first, None).code, 0);
    let second = tmp.path().join("second");
    assert_eq!(run_config(&first.join("config.ini"), &second, None).code, 0);
    for f in ["config.ini", "modes.csv", "aggregate.csv"] {
        assert_eq!(read(&first, f), read(&second, f), "{f}");
    }
}

#[test]
fn selftest_passes() {
    let r = run_cli(&["selftest"], None);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout.lines().filter(|l| l.starts_with("selftest ")).count(), 13);
    assert!(!r.stdout.contains("FAIL"));
}
