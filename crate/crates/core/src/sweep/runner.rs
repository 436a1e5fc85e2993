use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ledger::{read_ledger, write_ledger, LedgerRow};
use super::plan::SweepPlan;
use crate::criteria::{evaluate_run, gap_series, LEDGER_SCHEMA};
use crate::error::{Error, Result};
use crate::field::Grid;
use crate::sim::{run, run_euler, Initial, SimConfig, Trajectory};

pub struct RunOptions {
    pub out: PathBuf,
    pub jobs: usize,
    pub resume: bool,
    /// Abort before launch when any run fails the layer-resolution checks.
    pub strict_resolution: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            jobs: 1,
            resume: false,
            strict_resolution: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Full ledger in plan order.
    pub rows: Vec<LedgerRow>,
    pub executed: Vec<String>,
    pub skipped: Vec<String>,
    pub failures: Vec<(String, String)>,
    pub euler_runs: usize,
    pub unresolved: Vec<String>,
}

/// `||u - v||_{L^2}` at the snapshots of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSeries {
    pub run_id: String,
    pub points: Vec<(f64, f64)>,
}

impl GapSeries {
    pub fn path(dir: &Path, run_id: &str) -> PathBuf {
        dir.join("series").join(format!("{run_id}.csv"))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(Self::path(dir, &self.run_id))?;
        w.write_record(["t", "l2_gap"])?;
        for (t, g) in &self.points {
            w.write_record([t.to_string(), g.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(dir: &Path, run_id: &str) -> Result<Self> {
        let mut r = csv::Reader::from_path(Self::path(dir, run_id))?;
        let points = r.deserialize().collect::<std::result::Result<Vec<(f64, f64)>, _>>()?;
        Ok(Self {
            run_id: run_id.into(),
            points,
        })
    }

    /// `sup_{t <= t_max} ||u - v||`.
    pub fn sup_until(&self, t_max: f64) -> f64 {
        self.points
            .iter()
            .filter(|(t, _)| *t <= t_max * (1.0 + 1e-12))
            .fold(0.0, |m, (_, g)| m.max(*g))
    }
}

pub fn run_id(eps: f64, beta: f64) -> String {
    format!("eps{eps:.6e}_beta{beta:.6}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    schema: String,
    run_id: String,
    hash: String,
    status: String,
    euler: String,
    config: SimConfig,
    steps: usize,
    dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EulerManifest {
    hash: String,
    config: SimConfig,
    steps: usize,
    dt: f64,
    energy_drift: f64,
}

fn digest(value: &impl Serialize) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Job {
    index: usize,
    id: String,
    eps: f64,
    beta: f64,
    cfg: SimConfig,
    euler_key: String,
    hash: String,
    resolved: bool,
}

fn manifest_path(out: &Path, id: &str) -> PathBuf {
    out.join("manifests").join(format!("{id}.json"))
}

fn completed(out: &Path, job: &Job, ledger: &[LedgerRow], kappas: usize) -> bool {
    let Ok(text) = std::fs::read_to_string(manifest_path(out, &job.id)) else {
        return false;
    };
    let Ok(m) = serde_json::from_str::<Manifest>(&text) else {
        return false;
    };
    m.hash == job.hash && m.status == "ok" && ledger.iter().filter(|r| r.run_id == job.id && r.is_ok()).count() == kappas
}

/// Runs the Euler references once per distinct initial data, then every NS
/// run, writing ledger, manifests and gap series under `opts.out`.
pub fn run_sweep(plan: &SweepPlan, opts: &RunOptions) -> Result<SweepOutcome> {
    plan.validate()?;
    let grid = Grid::new(plan.grid_spec())?;
    let out = &opts.out;
    for sub in ["manifests", "series"] {
        std::fs::create_dir_all(out.join(sub))?;
    }
    let ledger_path = out.join("ledger.csv");

    let mut outcome = SweepOutcome::default();
    let mut inits: HashMap<String, Initial> = HashMap::new();
    let mut jobs = Vec::new();
    let euler_cfg = plan.euler_config();
    for (index, (eps, beta)) in plan.runs().into_iter().enumerate() {
        let id = run_id(eps, beta);
        let cfg = plan.config(eps, beta);
        let friction = if plan.initial.depends_on_friction() { cfg.a_eps() } else { 0.0 };
        let euler_key = digest(&(&plan.initial, friction.to_bits(), &euler_cfg))?;
        if !inits.contains_key(&euler_key) {
            inits.insert(euler_key.clone(), plan.initial.build(&grid, &cfg)?);
        }
        let hash = digest(&(LEDGER_SCHEMA, &cfg, &plan.initial, &plan.kappa, &plan.p, &euler_key))?;
        let resolved = plan.resolved(&grid, eps, beta);
        if !resolved {
            outcome.unresolved.push(id.clone());
        }
        jobs.push(Job {
            index,
            id,
            eps,
            beta,
            cfg,
            euler_key,
            hash,
            resolved,
        });
    }
    if opts.strict_resolution && !outcome.unresolved.is_empty() {
        return Err(Error::Plan(format!("unresolved runs: {}", outcome.unresolved.join(", "))));
    }

    let previous = if opts.resume && ledger_path.exists() {
        read_ledger(&ledger_path)?
    } else {
        Vec::new()
    };
    let (done, pending): (Vec<&Job>, Vec<&Job>) = jobs
        .iter()
        .partition(|j| opts.resume && completed(out, j, &previous, plan.kappa.len()));
    outcome.skipped = done.iter().map(|j| j.id.clone()).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::Plan(e.to_string()))?;

    // Euler references needed by pending runs, in first-use order
    let mut keys: Vec<&String> = Vec::new();
    for j in &pending {
        if !keys.contains(&&j.euler_key) {
            keys.push(&j.euler_key);
        }
    }
    let refs: Vec<(String, Result<Trajectory>)> = pool.install(|| {
        keys.par_iter()
            .map(|k| {
                log::info!("euler reference {}", &k[..12]);
                let tr = run_euler(&euler_cfg, inits[*k].clone());
                if let Ok(v) = &tr {
                    let m = EulerManifest {
                        hash: (*k).clone(),
                        config: euler_cfg.clone(),
                        steps: v.dense.len() - 1,
                        dt: v.dt,
                        energy_drift: v.dense.samples.last().map(|s| s.energy).unwrap_or(0.0) / v.dense.samples[0].energy.max(f64::MIN_POSITIVE) - 1.0,
                    };
                    let path = out.join("manifests").join(format!("euler-{}.json", &k[..16]));
                    std::fs::write(path, serde_json::to_string_pretty(&m)?)?;
                }
                Ok(((*k).clone(), tr))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    outcome.euler_runs = refs.len();
    let refs: BTreeMap<String, Result<Trajectory>> = refs.into_iter().collect();

    let order: HashMap<&str, usize> = jobs.iter().map(|j| (j.id.as_str(), j.index)).collect();
    let kappa_pos = |k: f64| plan.kappa.iter().position(|&q| q == k).unwrap_or(usize::MAX);
    let sort = |rows: &mut Vec<LedgerRow>| {
        rows.sort_by_key(|r| (order.get(r.run_id.as_str()).copied().unwrap_or(usize::MAX), kappa_pos(r.kappa)));
    };
    let kept: Vec<LedgerRow> = previous
        .into_iter()
        .filter(|r| outcome.skipped.contains(&r.run_id))
        .collect();
    let sink = Mutex::new(kept);
    let spec = plan.grid_spec();

    let results: Vec<(String, std::result::Result<(), String>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|job| {
                let rows = match execute(plan, job, &refs, &inits, out) {
                    Ok(rows) => Ok(rows),
                    Err(e) => Err(e.to_string()),
                };
                let (rows, status) = match rows {
                    Ok(rows) => (rows, Ok(())),
                    Err(msg) => {
                        log::warn!("{} failed: {msg}", job.id);
                        let rows = plan
                            .kappa
                            .iter()
                            .map(|&k| LedgerRow::failed(&job.id, job.eps, job.beta, plan.a, k, spec.nx, spec.ny, &msg))
                            .collect();
                        (rows, Err(msg))
                    }
                };
                let mut all = sink.lock().expect("ledger sink poisoned");
                all.extend(rows);
                sort(&mut all);
                if let Err(e) = write_ledger(&ledger_path, &all) {
                    log::error!("ledger write failed: {e}");
                }
                (job.id.clone(), status)
            })
            .collect()
    });
    for (id, r) in results {
        outcome.executed.push(id.clone());
        if let Err(msg) = r {
            outcome.failures.push((id, msg));
        }
    }
    let mut rows = sink.into_inner().expect("ledger sink poisoned");
    sort(&mut rows);
    write_ledger(&ledger_path, &rows)?;
    outcome.rows = rows;
    Ok(outcome)
}

fn execute(
    plan: &SweepPlan,
    job: &Job,
    refs: &BTreeMap<String, Result<Trajectory>>,
    inits: &HashMap<String, Initial>,
    out: &Path,
) -> Result<Vec<LedgerRow>> {
    let v = match &refs[&job.euler_key] {
        Ok(v) => v,
        Err(e) => return Err(Error::Data(format!("euler reference failed: {e}"))),
    };
    log::info!("run {}", job.id);
    let cfg = job.cfg.clone().with_dt(v.dt);
    let u = run(&cfg, inits[&job.euler_key].clone())?;
    let reports = evaluate_run(&job.id, &u, v, &plan.kappa, &plan.p, job.resolved)?;
    GapSeries {
        run_id: job.id.clone(),
        points: gap_series(&u, v)?,
    }
    .write(out)?;
    let m = Manifest {
        schema: LEDGER_SCHEMA.into(),
        run_id: job.id.clone(),
        hash: job.hash.clone(),
        status: "ok".into(),
        euler: job.euler_key.clone(),
        config: cfg,
        steps: u.dense.len() - 1,
        dt: u.dt,
    };
    std::fs::write(manifest_path(out, &job.id), serde_json::to_string_pretty(&m)?)?;
    let spec = plan.grid_spec();
    Ok(reports.iter().map(|r| LedgerRow::from_report(r, spec.nx, spec.ny, u.dt)).collect())
}
