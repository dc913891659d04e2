//! The command-line interface through `run_cli`: outputs and exit codes.

use std::fs;

use dgflow::cli::run_cli;

fn run(args: &[&str]) -> i32 {
    run_cli(std::iter::once("dgflow").chain(args.iter().copied()))
}

#[test]
fn integrate_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let code = run(&[
        "integrate",
        "--problem",
        "henon-heiles",
        "--scheme",
        "avf4",
        "--h",
        "0.1",
        "--t-end",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn reference_method_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rk4.csv");
    let code = run(&[
        "integrate",
        "--problem",
        "henon-heiles",
        "--method",
        "rk4",
        "--h",
        "0.1",
        "--t-end",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 7);
}

#[test]
fn converge_and_energy_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let plot = dir.path().join("conv.gp");
    let code = run(&[
        "converge",
        "--problem",
        "henon-heiles",
        "--scheme",
        "dgm2",
        "--h-list",
        "0.2,0.1",
        "--t-end",
        "1",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(fs::read_to_string(&csv).unwrap().lines().count() >= 3);
    assert!(plot.exists());

    let drift = dir.path().join("drift.csv");
    let code = run(&[
        "energy",
        "--problem",
        "henon-heiles",
        "--scheme",
        "dgm2",
        "--h",
        "0.1",
        "--t-end",
        "1",
        "--out",
        drift.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(drift.exists());
}

#[test]
fn check_order_exit_status_follows_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("resid.csv");
    let pass = run(&[
        "check-order",
        "--scheme",
        "avf5",
        "--order",
        "5",
        "--series",
        "b",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(pass, 0);
    assert!(fs::read_to_string(&out)
        .unwrap()
        .starts_with("tree,order,phi,target,residual"));
    assert_eq!(run(&["check-order", "--scheme", "avf4", "--order", "5"]), 2);
}

#[test]
fn validation_errors_exit_with_one() {
    assert_eq!(
        run(&[
            "integrate",
            "--problem",
            "nope",
            "--scheme",
            "avf4",
            "--h",
            "0.1",
            "--t-end",
            "1"
        ]),
        1
    );
    assert_eq!(
        run(&[
            "integrate",
            "--problem",
            "lotka-volterra",
            "--scheme",
            "avf4",
            "--h",
            "0.1",
            "--t-end",
            "1"
        ]),
        1
    );
    assert_eq!(run(&["trees", "--order", "0"]), 1);
    assert_eq!(run(&["no-such-command"]), 1);
}

#[test]
fn solver_failure_exits_with_two() {
    let code = run(&[
        "integrate",
        "--problem",
        "henon-heiles",
        "--scheme",
        "avf6-sym",
        "--h",
        "0.1",
        "--t-end",
        "1",
        "--max-iter",
        "1",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code, 2);
}
