use std::fs;

use slipstream::sweep::{read_ledger, report, run_sweep, write_ledger, RunOptions, SweepPlan};

const TAYLOR: &str = r#"
name = "taylor"
eps = [1e-2]
beta = [0.0]
kappa = [1.0]
a = 0.0
T = 0.5

[grid]
nx = 64
ny = 64
stretch = 3.0

[initial]
kind = "taylor_vortex"
amplitude = 1.0
"#;

const BLOB: &str = r#"
name = "small-blob"
eps = [1e-1, 3e-2, 1e-2]
beta = [0.25, 0.5]
kappa = [0.4]
p = [4.0]
a = 1.0
T = 0.2

[grid]
nx = 32
ny = 128
stretch = 4.0

[numerics]
snapshot_stride = 4

[initial]
kind = "offset_blob"
amplitude = 5.0
x0 = 3.14
y0 = 1.2
sigma = 0.35
wobble = 0.3
seed = 7
"#;

#[test]
fn taylor_single_run_matches_exact_solution() {
    let plan = SweepPlan::from_toml(TAYLOR).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(&plan, &RunOptions::new(dir.path())).unwrap();
    assert_eq!(out.euler_runs, 1);
    assert!(out.failures.is_empty());
    let rows = read_ledger(&dir.path().join("ledger.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!(r.is_ok() && r.resolved);
    // u = exp(-2 eps t) v with ||v0||^2 = pi^2
    let exact = (1.0 - (-2.0 * 1e-2 * 0.5f64).exp()) * std::f64::consts::PI;
    assert!((r.sup_l2_gap - exact).abs() <= 1e-4 * exact, "{} vs {exact}", r.sup_l2_gap);
    assert!(r.energy_residual.abs() <= 1e-5);
    assert!(r.max_principle_margin <= 0.05);
    assert!(r.identity_closure <= 1e-2);
    assert!(r.matsui.abs() <= 1e-12 && r.matsui_slip_route == 0.0);
    assert!(r.limsup_lhs <= r.limsup_rhs * (1.0 + 1e-12));
}

#[test]
fn grid_of_runs_resumes_only_missing_rows() {
    let plan = SweepPlan::from_toml(BLOB).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.csv");
    let first = run_sweep(&plan, &RunOptions::new(dir.path())).unwrap();
    assert!(first.failures.is_empty(), "{:?}", first.failures);
    assert_eq!(first.rows.len(), 6);
    assert_eq!(first.euler_runs, 1);
    let euler: Vec<_> = fs::read_dir(dir.path().join("manifests"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("euler-"))
        .collect();
    assert_eq!(euler.len(), 1);
    let original = fs::read(&ledger).unwrap();

    let mut rows = read_ledger(&ledger).unwrap();
    let dropped = rows.remove(3);
    write_ledger(&ledger, &rows).unwrap();
    let opts = RunOptions {
        resume: true,
        ..RunOptions::new(dir.path())
    };
    let again = run_sweep(&plan, &opts).unwrap();
    assert_eq!(again.executed, vec![dropped.run_id.clone()]);
    assert_eq!(again.skipped.len(), 5);
    assert_eq!(fs::read(&ledger).unwrap(), original);

    let none = run_sweep(&plan, &opts).unwrap();
    assert!(none.executed.is_empty() && none.euler_runs == 0);

    let rep = report(&again.rows, Some(dir.path())).unwrap();
    assert_eq!(rep.rates.len(), 2);
    assert!(rep.rates.iter().all(|r| r.l2.is_some()));
    assert_eq!(rep.permutation.len(), 2);
    assert!(rep.matsui_bound_violations.is_empty(), "{:?}", rep.matsui_bound_violations);
}

#[test]
fn ledgers_are_deterministic_across_job_counts() {
    let mut plan = SweepPlan::from_toml(BLOB).unwrap();
    plan.eps.truncate(2);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_sweep(&plan, &RunOptions::new(a.path())).unwrap();
    let opts = RunOptions {
        jobs: 3,
        ..RunOptions::new(b.path())
    };
    run_sweep(&plan, &opts).unwrap();
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("ledger.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn strict_resolution_aborts_before_launch() {
    let mut plan = SweepPlan::from_toml(BLOB).unwrap();
    // slip length 1/(a eps^-1) = 1e-4 is far below the strip
    plan.beta = vec![1.0];
    plan.a = 100.0;
    plan.validate().unwrap();
    let grid = slipstream::field::Grid::new(plan.grid_spec()).unwrap();
    assert!(!plan.resolved(&grid, 1e-2, 1.0));
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        strict_resolution: true,
        ..RunOptions::new(dir.path())
    };
    assert!(matches!(run_sweep(&plan, &opts), Err(slipstream::Error::Plan(_))));
    assert!(!dir.path().join("ledger.csv").exists());
}
