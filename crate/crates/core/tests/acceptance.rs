//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero when
//! any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use slipstream::criteria::rate_law;
use slipstream::sweep::{read_ledger, report, run_sweep, write_ledger, LedgerRow, Report, RunOptions, SweepPlan};
use slipstream::verify::battery::{
    battery, energy_refinement, identity_refinement, kernel_constants, robin_shear_oracle, taylor_oracle,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn plan(name: &str) -> SweepPlan {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../plans").join(name);
    SweepPlan::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

struct Sweep {
    rows: Vec<LedgerRow>,
    report: Report,
    _dir: tempfile::TempDir,
}

fn sweep(name: &str) -> Sweep {
    let dir = tempfile::tempdir().expect("tempdir");
    let o = run_sweep(&plan(name), &RunOptions::new(dir.path())).expect("sweep");
    let report = report(&o.rows, Some(dir.path())).expect("report");
    Sweep {
        rows: o.rows,
        report,
        _dir: dir,
    }
}

fn slope_line(beta: f64, slope: Option<f64>, target: f64, tol: f64, r2: Option<f64>) -> (bool, String) {
    match slope {
        Some(s) => {
            let ok = (s - target).abs() <= tol && r2.is_none_or(|r| r >= 0.98);
            let r2s = r2.map(|r| format!(", r2 {r:.4}")).unwrap_or_default();
            (ok, format!("beta {beta}: {s:.3} vs {target:.3} +- {tol}{r2s}"))
        }
        None => (false, format!("beta {beta}: no fit")),
    }
}

fn criterion_1() -> Outcome {
    let t = taylor_oracle(128).expect("taylor");
    let s = robin_shear_oracle().expect("shear");
    let decay_ok = (t.decay_rate + 2e-2).abs() <= 0.01 * 2e-2;
    outcome(
        t.final_l2_error <= 1e-4 && decay_ok && s.sup_error <= 1e-5,
        format!(
            "taylor L2 error {:.2e} (<= 1e-4), decay {:.6} (-0.02 +- 1%), robin shear sup error {:.2e} (<= 1e-5)",
            t.final_l2_error, t.decay_rate, s.sup_error
        ),
    )
}

fn criterion_2() -> Outcome {
    let t = taylor_oracle(128).expect("taylor");
    let s = robin_shear_oracle().expect("shear");
    let r = energy_refinement(&[32, 64, 128]).expect("refinement");
    outcome(
        t.energy_residual.abs() <= 1e-5 && s.energy_residual.abs() <= 1e-5 && r.order >= 2.0,
        format!(
            "residual taylor {:.2e}, shear {:.2e} (<= 1e-5); order {:.2} over 32/64/128 (>= 2)",
            t.energy_residual.abs(),
            s.energy_residual.abs(),
            r.order
        ),
    )
}

fn criterion_3() -> Outcome {
    let t = taylor_oracle(128).expect("taylor");
    let s = robin_shear_oracle().expect("shear");
    let r = energy_refinement(&[32, 64, 128]).expect("refinement");
    let worst = r
        .levels
        .iter()
        .map(|l| l.2)
        .chain([t.max_principle_margin, s.max_principle_margin])
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(worst <= 0.05, format!("worst margin {worst:.3e} over 5 verification runs (<= 0.05)"))
}

fn criterion_4() -> Outcome {
    let s = identity_refinement(&[64, 128, 256]).expect("identity");
    let (_, closure, gap) = s.levels[1];
    outcome(
        closure <= 1e-2 && s.order >= 2.0 && gap <= 1e-3,
        format!(
            "closure at 128^2 {closure:.2e} (<= 1e-2), order {:.2} (>= 2), route gap {gap:.2e} (<= 1e-3)",
            s.order
        ),
    )
}

fn criterion_5(rates: &Sweep) -> Outcome {
    let mut ok = rates.rows.iter().all(|r| r.is_ok() && r.resolved);
    let mut parts = Vec::new();
    for beta in [0.0, 0.25, 0.5] {
        let row = rates.report.rates.iter().find(|r| r.beta == beta).expect("beta row");
        let (pass, line) = slope_line(beta, row.slope(), 0.5 * (1.0 - beta), 0.15, row.l2.as_ref().map(|f| f.r2));
        ok &= pass;
        parts.push(line);
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6(crit: &Sweep) -> Outcome {
    let slopes: Vec<(f64, Option<f64>)> = [0.5, 0.75, 0.9, 1.0]
        .iter()
        .map(|&b| (b, crit.report.rates.iter().find(|r| r.beta == b).and_then(|r| r.slope())))
        .collect();
    let vals: Vec<f64> = slopes.iter().filter_map(|s| s.1).collect();
    let ok = vals.len() == 4 && vals.windows(2).all(|w| w[1] <= w[0]);
    let list: Vec<String> = slopes
        .iter()
        .map(|(b, s)| format!("{b}: {}", s.map(|v| format!("{v:.3}")).unwrap_or("-".into())))
        .collect();
    outcome(
        ok,
        format!("slopes {} (non-increasing required); beta = 1 exponent {:.3} (observation)", list.join(", "), vals.last().copied().unwrap_or(f64::NAN)),
    )
}

fn criterion_7(rates: &Sweep) -> Outcome {
    let mut ok = true;
    let mut worst = (f64::INFINITY, f64::INFINITY);
    for c in &rates.report.covanishing {
        let (k, m) = (c.spearman_kato.unwrap_or(f64::NAN), c.spearman_matsui.unwrap_or(f64::NAN));
        ok &= c.co_decrease && k >= 0.9 && m >= 0.9;
        worst = (worst.0.min(k), worst.1.min(m));
    }
    outcome(
        ok,
        format!(
            "{} (beta, kappa) series; min Spearman kato_b {:.3}, |matsui| {:.3} (>= 0.9); co-decrease everywhere: {}",
            rates.report.covanishing.len(),
            worst.0,
            worst.1,
            rates.report.covanishing.iter().all(|c| c.co_decrease)
        ),
    )
}

fn criterion_8(rates: &Sweep, crit: &Sweep, shear: &Sweep) -> Outcome {
    let all: Vec<&LedgerRow> = rates.rows.iter().chain(&crit.rows).chain(&shear.rows).collect();
    let bound_ok = all.iter().all(|r| r.is_ok() && r.matsui.abs() <= r.matsui_navier_rhs);
    let violations = all.iter().filter(|r| r.matsui.abs() > r.matsui_navier_rhs).count();
    let worst = all.iter().map(|r| r.matsui.abs() / r.matsui_navier_rhs).fold(0.0, f64::max);
    let trace_ok = all.iter().all(|r| r.matsui.abs() <= r.matsui_trace_rhs * (1.0 + 1e-9));
    let mut ok = bound_ok;
    let mut parts = vec![format!(
        "|matsui| <= bound on {}/{} rows (max ratio {worst:.3}; wall-trace form holds: {trace_ok})",
        all.len() - violations,
        all.len()
    )];
    for beta in [0.25, 0.5] {
        let row = rates.report.rates.iter().find(|r| r.beta == beta).expect("beta row");
        let (pass, line) = slope_line(beta, row.matsui_bound.as_ref().map(|f| f.slope), 0.5 * (1.0 - beta), 0.1, None);
        ok &= pass;
        parts.push(format!("bound exponent {line}"));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_9(rates: &Sweep) -> Outcome {
    let units = rate_law(1.0, 2.0).unwrap().p_threshold == 2.0
        && (rate_law(1.0 / 3.0, 2.0).unwrap().p_threshold - 6.0).abs() < 1e-12
        && rate_law(0.2, 2.0).unwrap().p_threshold.is_infinite()
        && rate_law(0.0, 2.0).unwrap().p_threshold.is_infinite();
    let row = rates.report.rates.iter().find(|r| r.beta == 0.25).expect("beta row");
    let l4 = row.lp.iter().find(|l| l.p == 4.0).expect("L4 column");
    let (pass, line) = slope_line(0.25, l4.fit.as_ref().map(|f| f.slope), l4.predicted, 0.15, None);
    outcome(units && pass, format!("thresholds 2 / 6 / inf: {units}; L4 gap exponent {line}"))
}

fn criterion_10() -> Outcome {
    let k = kernel_constants().expect("kernel");
    outcome(
        (k.near_constant - 0.5).abs() <= 0.05 && k.route_gap <= 1e-3,
        format!("near constant {:.4} (0.5 +- 0.05), route gap {:.2e} (<= 1e-3)", k.near_constant, k.route_gap),
    )
}

fn criterion_11() -> Outcome {
    let mut p = plan("blob_rates.toml");
    p.eps.truncate(3);
    p.beta = vec![0.25, 0.5];
    p.kappa = vec![0.4];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_sweep(&p, &RunOptions::new(a.path())).expect("sweep a");
    let opts = RunOptions {
        jobs: 2,
        ..RunOptions::new(b.path())
    };
    run_sweep(&p, &opts).expect("sweep b");
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("ledger.csv")).unwrap();
    let deterministic = read(&a) == read(&b);

    let ledger = b.path().join("ledger.csv");
    let mut rows = read_ledger(&ledger).unwrap();
    rows.remove(2);
    write_ledger(&ledger, &rows).unwrap();
    let resumed = run_sweep(
        &p,
        &RunOptions {
            resume: true,
            ..RunOptions::new(b.path())
        },
    )
    .expect("resume");
    let resume_ok = resumed.executed.len() == 1 && read(&a) == read(&b);

    let start = Instant::now();
    let checks = battery();
    let secs = start.elapsed().as_secs_f64();
    let verify_ok = checks.iter().all(|c| c.passed) && secs < 1800.0;
    outcome(
        deterministic && resume_ok && verify_ok,
        format!(
            "bitwise ledger across job counts: {deterministic}; resume reran {} run(s) and matched: {resume_ok}; verify {}/{} checks in {secs:.1} s (< 1800 s)",
            resumed.executed.len(),
            checks.iter().filter(|c| c.passed).count(),
            checks.len()
        ),
    )
}

fn main() {
    let rates = sweep("blob_rates.toml");
    let crit = sweep("blob_criticality.toml");
    let shear = sweep("robin_shear.toml");
    let results = [
        ("solver oracles", criterion_1()),
        ("energy equality", criterion_2()),
        ("maximum principle", criterion_3()),
        ("identity closure", criterion_4()),
        ("rate reproduction", criterion_5(&rates)),
        ("criticality probe", criterion_6(&crit)),
        ("criterion co-vanishing", criterion_7(&rates)),
        ("wall functional bound", criterion_8(&rates, &crit, &shear)),
        ("L^p algebra and rates", criterion_9(&rates)),
        ("kernel constants", criterion_10()),
        ("infrastructure", criterion_11()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
