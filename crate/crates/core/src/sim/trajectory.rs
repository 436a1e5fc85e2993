use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{SimConfig, CFL_CAP};
use super::initial::Initial;
use super::solver::{Sample, SimState, Solver};
use crate::error::{Error, Result};
use crate::field::{Grid, Snapshot};

/// Abort threshold for `||omega||_inf` relative to its initial value.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// Dense per-step series.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DenseTraces {
    pub samples: Vec<Sample>,
    /// `u1(., 0)` at every step.
    pub slip: Vec<Vec<f64>>,
    /// `d_y u1(., 0)` at every step.
    pub stress: Vec<Vec<f64>>,
}

impl DenseTraces {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }
}

/// A run: stored snapshots plus dense traces.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub grid: Arc<Grid>,
    pub dt: f64,
    pub a_eps: f64,
    pub snapshots: Vec<SimState>,
    pub dense: DenseTraces,
    /// `||d_y u1 - a^eps u1||` on the wall for the data as given (eps > 0).
    pub initial_bc_residual: f64,
}

impl Trajectory {
    pub fn is_euler(&self) -> bool {
        self.config.is_euler()
    }

    pub fn final_state(&self) -> &SimState {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }

    pub fn initial_state(&self) -> &SimState {
        &self.snapshots[0]
    }

    pub fn times(&self) -> Vec<f64> {
        self.dense.times()
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Index of the dense trace sample aligned with each snapshot.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let first = self.snapshots[0].step;
        self.snapshots.iter().map(|s| s.step - first).collect()
    }
}

/// Checks that two trajectories share the grid, the step and the sampling,
/// so their snapshots and dense traces can be paired index by index.
pub fn check_aligned(u: &Trajectory, v: &Trajectory) -> Result<()> {
    if u.config.grid != v.config.grid {
        return Err(Error::Alignment("trajectories live on different grids".into()));
    }
    if (u.dt - v.dt).abs() > 1e-12 * u.dt.max(v.dt) {
        return Err(Error::Alignment(format!("time steps differ: {} vs {}", u.dt, v.dt)));
    }
    if u.dense.len() != v.dense.len() {
        return Err(Error::Alignment(format!(
            "dense traces have {} and {} samples",
            u.dense.len(),
            v.dense.len()
        )));
    }
    if u.snapshot_steps() != v.snapshot_steps() {
        return Err(Error::Alignment("snapshot steps differ (strides must match)".into()));
    }
    Ok(())
}

struct Recorder {
    traj: Trajectory,
    stride: usize,
    omega0: f64,
}

impl Recorder {
    fn push(&mut self, solver: &Solver, force_snapshot: bool) -> Result<()> {
        let (state, sample) = solver.observe();
        if !sample.energy.is_finite() || !sample.omega_inf.is_finite() {
            state.omega.check_finite()?;
            state.u.check_finite()?;
            return Err(Error::BlowUp(format!("non-finite diagnostics at t = {}", sample.t)));
        }
        if self.omega0 > 0.0 && sample.omega_inf > BLOW_UP_FACTOR * self.omega0 {
            return Err(Error::BlowUp(format!(
                "||omega||_inf = {:e} at t = {} exceeds {BLOW_UP_FACTOR:e} x initial {:e}",
                sample.omega_inf, sample.t, self.omega0
            )));
        }
        self.traj.dense.slip.push(state.slip_trace.clone());
        self.traj.dense.stress.push(state.stress_trace.clone());
        self.traj.dense.samples.push(sample);
        if force_snapshot || state.step % self.stride == 0 {
            self.traj.snapshots.push(state);
        }
        Ok(())
    }
}

fn drive(mut solver: Solver, n_steps: usize) -> Result<Trajectory> {
    let cfg = solver.config().clone();
    let mut rec = Recorder {
        traj: Trajectory {
            config: cfg.clone(),
            grid: solver.grid().clone(),
            dt: solver.dt(),
            a_eps: solver.a_eps(),
            snapshots: Vec::new(),
            dense: DenseTraces::default(),
            initial_bc_residual: 0.0,
        },
        stride: cfg.snapshot_stride,
        omega0: 0.0,
    };
    rec.push(&solver, true)?;
    let first = &rec.traj.dense.samples[0];
    rec.omega0 = first.omega_inf;
    if !cfg.is_euler() {
        rec.traj.initial_bc_residual = first.navier_residual;
    }
    for n in 0..n_steps {
        let cfl = rec.traj.dense.samples.last().map_or(0.0, |s| s.cfl);
        if cfl > CFL_CAP {
            return Err(Error::StepSize(format!(
                "CFL number {cfl:.3} exceeds {CFL_CAP} at t = {} (dt = {})",
                solver.time(),
                solver.dt()
            )));
        }
        solver.advance()?;
        rec.push(&solver, n + 1 == n_steps)?;
    }
    Ok(rec.traj)
}

fn check_steps(cfg: &SimConfig, dt: f64) -> usize {
    let n = (cfg.t_end / dt).round() as usize;
    n.max(1)
}

/// Integrates from `init` to `cfg.t_end`.
pub fn run(cfg: &SimConfig, init: impl Into<Initial>) -> Result<Trajectory> {
    let init = init.into();
    let solver = Solver::new(cfg, &init)?;
    let n = check_steps(cfg, solver.dt());
    if (n as f64 * solver.dt() - cfg.t_end).abs() > 1e-9 * cfg.t_end {
        return Err(Error::Parameter(format!(
            "dt = {} does not divide t_end = {}",
            solver.dt(),
            cfg.t_end
        )));
    }
    drive(solver, n)
}

/// Euler reference run; `cfg.eps` must be 0.
pub fn run_euler(cfg: &SimConfig, init: impl Into<Initial>) -> Result<Trajectory> {
    if !cfg.is_euler() {
        return Err(Error::Parameter(format!("Euler run requested with eps = {}", cfg.eps)));
    }
    run(cfg, init)
}

/// Continues a checkpointed run to its configured `t_end`.
pub fn resume(checkpoint: &Snapshot) -> Result<Trajectory> {
    let solver = Solver::restore(checkpoint)?;
    let total = check_steps(solver.config(), solver.dt());
    let done = solver.step_count();
    if done > total {
        return Err(Error::Format(format!("checkpoint step {done} beyond the run's {total} steps")));
    }
    drive(solver, total - done)
}

/// Runs `n` steps and returns the solver for checkpointing.
pub fn run_steps(cfg: &SimConfig, init: impl Into<Initial>, n: usize) -> Result<Solver> {
    let mut s = Solver::new(cfg, &init.into())?;
    for _ in 0..n {
        s.advance()?;
    }
    Ok(s)
}

/// Sidecar describing a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub config: SimConfig,
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub checkpoint: PathBuf,
}

/// Writes `<stem>.field` and `<stem>.json` into `dir`.
pub fn write_checkpoint(solver: &Solver, dir: &Path, stem: &str) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let file = PathBuf::from(format!("{stem}.field"));
    solver.checkpoint().save(&dir.join(&file))?;
    let manifest = RunManifest {
        format: crate::field::snapshot::MAGIC.to_string(),
        config: solver.config().clone(),
        step: solver.step_count(),
        t: solver.time(),
        dt: solver.dt(),
        checkpoint: file,
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_checkpoint(dir: &Path, stem: &str) -> Result<(RunManifest, Snapshot)> {
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let snap = Snapshot::load(&dir.join(&manifest.checkpoint))?;
    Ok((manifest, snap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::norms::l2_norm;
    use crate::field::{GridSpec, ScalarField};
    use crate::sim::InitialData;
    use crate::verify::oracle::RobinHeat;

    fn taylor(nx: usize, ny: usize) -> (SimConfig, Initial) {
        let spec = GridSpec::channel(nx, ny);
        let g = Grid::new(spec).unwrap();
        let cfg = SimConfig::new(spec, 1e-2, 0.0, 0.0, 1.0);
        let init = InitialData::TaylorVortex { amplitude: 1.0 }.build(&g, &cfg).unwrap();
        (cfg, init)
    }

    #[test]
    fn zero_data_stay_zero() {
        let spec = GridSpec::channel(16, 32);
        let g = Grid::new(spec).unwrap();
        let cfg = SimConfig::new(spec, 1e-2, 1.0, 0.5, 0.1).with_dt(0.01);
        let tr = run(&cfg, ScalarField::zeros(&g)).unwrap();
        assert_eq!(tr.dense.len(), 11);
        for s in &tr.snapshots {
            assert!(s.omega.is_zero() && s.u.u1.is_zero() && s.u.u2.is_zero());
        }
        let e = run_euler(&SimConfig::euler(spec, 0.1).with_dt(0.05), ScalarField::zeros(&g)).unwrap();
        assert!(e.final_state().omega.is_zero());
    }

    #[test]
    fn taylor_single_step_local_error_is_third_order() {
        let (mut cfg, init) = taylor(64, 64);
        cfg.eps = 5.0;
        let state0 = run_steps(&cfg.clone().with_dt(0.01), init.clone(), 0).unwrap().observe().0;
        let errs: Vec<f64> = [0.016, 0.008, 0.004]
            .iter()
            .map(|&dt| {
                let s = crate::sim::step(&state0, &cfg, dt).unwrap();
                let exact = state0.omega.scale((-2.0 * cfg.eps * dt).exp());
                l2_norm(&s.omega.sub(&exact)).unwrap() / l2_norm(&state0.omega).unwrap()
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > 6.0, "{errs:?}");
        }
    }

    #[test]
    fn robin_shear_matches_heat_oracle_after_ten_steps() {
        let spec = GridSpec::channel(8, 384).with_stretch(3.0);
        let g = Grid::new(spec).unwrap();
        let cfg = SimConfig::new(spec, 1e-3, 1.0, 0.5, 0.01).with_dt(0.001);
        let data = InitialData::RobinShear {
            amplitude: 1.0,
            width: 0.5,
        };
        let init = data.build(&g, &cfg).unwrap();
        let alpha = cfg.a_eps();
        let tr = run(&cfg, init).unwrap();
        assert_eq!(tr.dense.len(), 11);
        let o = RobinHeat::new(
            |y| crate::sim::robin_shear_profile(1.0, 0.5, alpha, y),
            alpha,
            cfg.eps,
            g.ly(),
            3000,
        );
        let fin = tr.final_state();
        let err = g
            .y()
            .iter()
            .enumerate()
            .map(|(j, &y)| (fin.u.u1.values()[[j, 0]] - o.value(0.01, y)).abs())
            .fold(0.0f64, f64::max);
        assert!(err <= 1e-6, "sup error {err:e}");
        let worst = tr.dense.samples[1..].iter().map(|s| s.navier_residual).fold(0.0, f64::max);
        assert!(worst < 1e-10, "navier residual {worst:e}");
    }

    #[test]
    fn checkpoint_restart_is_bitwise() {
        let (cfg, init) = taylor(16, 32);
        let cfg = SimConfig {
            a: 1.0,
            beta: 0.5,
            ..cfg
        }
        .with_dt(0.05);
        let full = run(&cfg, init.clone()).unwrap();
        let half = run_steps(&cfg, init, 10).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = write_checkpoint(&half, dir.path(), "ckpt").unwrap();
        assert_eq!(m.step, 10);
        let (_, snap) = read_checkpoint(dir.path(), "ckpt").unwrap();
        let rest = resume(&snap).unwrap();
        let a = full.final_state().omega.values();
        let b = rest.final_state().omega.values();
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(full.final_state().step, rest.final_state().step);
    }
}
