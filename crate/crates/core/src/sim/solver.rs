//! Vorticity-streamfunction time stepper.
//!
//! Modes `m >= 1` carry the vorticity; Crank-Nicolson diffusion and AB2
//! advection, with the wall value fixed by the influence-matrix superposition
//! `omega = omega_p + lambda omega_h` so that `omega(0) = -a^eps d_y psi(0)`
//! holds at the new level. Mode 0 is carried as the mean velocity `U(y)`
//! (`U_t = eps U'' - d_y <u1 u2>`, `U'(0) = a^eps U(0)`, `U'(ly) = 0`), since
//! the mean flux is not fixed by the vorticity.

use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::initial::Initial;
use crate::error::{Error, Result};
use crate::field::stencil::DiffOperator;
use crate::field::{Grid, ScalarField, Snapshot, VectorField};
use crate::linalg::BandedLu;
use crate::poisson::{mode_system, BoundaryRow, PoissonOptions, PoissonSolver};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn apply_c(op: &DiffOperator, col: &[Complex64], j: usize) -> Complex64 {
    let r = op.row(j);
    r.weights
        .iter()
        .zip(&col[r.start..r.start + r.weights.len()])
        .fold(ZERO, |acc, (w, v)| acc + v * *w)
}

/// Wall-strip norms for one strip height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripSample {
    /// `||d_y u1||_{L^2(y < width)}`.
    pub dyu1: f64,
    /// `||grad u||^2_{L^2(y < width)}`.
    pub grad_sq: f64,
}

/// Per-step scalar diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// `1/2 ||u||^2`.
    pub energy: f64,
    /// `||omega||^2`.
    pub enstrophy: f64,
    /// `||u1(., 0)||^2_{L^2(wall)}`.
    pub slip_sq: f64,
    /// `||d_y u1(., 0)||^2_{L^2(wall)}`.
    pub stress_sq: f64,
    /// `||d_y u1(., 0) - a^eps u1(., 0)||` with `d_y u1 = d_x u2 - omega`.
    pub navier_residual: f64,
    /// Same with `d_y u1` from the one-sided stencil applied to `u1`.
    pub navier_stencil_residual: f64,
    pub omega_inf: f64,
    pub slip_inf: f64,
    /// Pointwise Frobenius maximum of `grad u`.
    pub grad_inf: f64,
    /// Directional CFL number of the current velocity at the run's step.
    pub cfl: f64,
    pub strips: Vec<StripSample>,
}

/// Nodal fields at one time.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub omega: ScalarField,
    pub psi: ScalarField,
    pub u: VectorField,
    pub slip_trace: Vec<f64>,
    pub stress_trace: Vec<f64>,
}

struct Nodal {
    omega: Array2<f64>,
    u1: Array2<f64>,
    u2: Array2<f64>,
}

pub struct Solver {
    cfg: SimConfig,
    grid: Arc<Grid>,
    a_eps: f64,
    dt: f64,
    step: usize,
    t0: f64,
    poisson: PoissonSolver,
    cn: Vec<Option<BandedLu>>,
    omega_h: Vec<Vec<f64>>,
    psi_h: Vec<Vec<f64>>,
    s_h: Vec<f64>,
    mean_lu: Option<BandedLu>,
    cutoff: usize,
    omega_hat: Array2<Complex64>,
    psi_hat: Array2<Complex64>,
    u_mean: Vec<f64>,
    history: Option<(Array2<Complex64>, Vec<f64>)>,
    strip_weights: Vec<Vec<f64>>,
}

impl Solver {
    /// Builds the solver; `dt = None` picks the step from the initial CFL number.
    pub fn new(cfg: &SimConfig, init: &Initial) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(cfg.grid)?;
        if **init.grid() != *grid {
            return Err(Error::Parameter("initial data live on a different grid".into()));
        }
        init.omega.check_finite()?;
        let poisson = PoissonSolver::new(&grid, PoissonOptions::default())?;
        let nm = grid.n_modes();
        let ny = grid.ny();

        let mut omega_hat = init.omega.modes();
        omega_hat.column_mut(nm - 1).fill(ZERO);
        let mut psi_hat = omega_hat.clone();
        poisson.solve_modes(&mut psi_hat);
        let u_mean = match &init.mean_velocity {
            Some(u) => {
                if u.len() != ny || u.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter("mean velocity profile has wrong length or non-finite values".into()));
                }
                u.clone()
            }
            None => {
                let psi0: Vec<f64> = psi_hat.column(0).iter().map(|c| c.re).collect();
                grid.d1().apply(&psi0)
            }
        };
        psi_hat.column_mut(0).fill(ZERO);
        psi_hat.row_mut(0).fill(ZERO);

        let cutoff = if cfg.dealias { grid.nx() / 3 } else { nm - 2 };
        let strip_weights = cfg.strips.iter().map(|&w| grid.quadrature().strip_weights(w)).collect();
        let mut s = Self {
            a_eps: cfg.a_eps(),
            cfg: cfg.clone(),
            dt: 0.0,
            step: 0,
            t0: 0.0,
            poisson,
            cn: Vec::new(),
            omega_h: Vec::new(),
            psi_h: Vec::new(),
            s_h: Vec::new(),
            mean_lu: None,
            cutoff,
            omega_hat,
            psi_hat,
            u_mean,
            history: None,
            strip_weights,
            grid,
        };
        let dt = match cfg.dt {
            Some(dt) => dt,
            None => {
                let c = s.cfl_number(1.0);
                let dt_max = if c > 0.0 { cfg.cfl / c } else { cfg.t_end };
                cfg.steps_for(dt_max).1
            }
        };
        s.set_dt(dt)?;
        Ok(s)
    }

    fn set_dt(&mut self, dt: f64) -> Result<()> {
        self.dt = dt;
        let g = self.grid.clone();
        let nm = g.n_modes();
        let ny = g.ny();
        self.cn.clear();
        self.omega_h.clear();
        self.psi_h.clear();
        self.s_h.clear();
        self.mean_lu = None;
        if self.cfg.is_euler() {
            return Ok(());
        }
        let c = -0.5 * dt * self.cfg.eps;
        for m in 0..nm {
            if m == 0 || m == nm - 1 {
                self.cn.push(None);
                self.omega_h.push(Vec::new());
                self.psi_h.push(Vec::new());
                self.s_h.push(0.0);
                continue;
            }
            let k = g.wavenumber(m);
            let lu = mode_system(&g, 1.0, c, k * k, BoundaryRow::Dirichlet, BoundaryRow::Dirichlet)?;
            let mut wh = vec![0.0; ny];
            wh[0] = 1.0;
            lu.solve_in_place(&mut wh);
            let mut ph: Vec<Complex64> = wh.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.poisson.solve_mode(m, &mut ph);
            let ph: Vec<f64> = ph.iter().map(|c| c.re).collect();
            let sh = g.d1().apply_at(&ph, 0);
            if (1.0 + self.a_eps * sh).abs() < 1e-12 {
                return Err(Error::Singular(format!(
                    "influence coefficient vanishes for mode {m}: 1 + a_eps s_h = {:e} (a_eps = {}, dt = {dt})",
                    1.0 + self.a_eps * sh,
                    self.a_eps
                )));
            }
            self.cn.push(Some(lu));
            self.omega_h.push(wh);
            self.psi_h.push(ph);
            self.s_h.push(sh);
        }
        self.mean_lu = Some(mode_system(
            &g,
            1.0,
            c,
            0.0,
            BoundaryRow::Robin(self.a_eps),
            BoundaryRow::Neumann,
        )?);
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn a_eps(&self) -> f64 {
        self.a_eps
    }
    pub fn step_count(&self) -> usize {
        self.step
    }
    pub fn time(&self) -> f64 {
        self.t0 + self.step as f64 * self.dt
    }

    fn mean_vorticity(&self) -> Vec<f64> {
        self.grid.d1().apply(&self.u_mean).iter().map(|v| -v).collect()
    }

    /// Nodal omega, u1, u2 from the modes up to `cutoff` (all modes if `None`).
    fn nodal(&self, cutoff: Option<usize>) -> (Nodal, Array2<Complex64>, Array2<Complex64>) {
        let g = &self.grid;
        let nm = g.n_modes();
        let keep = |m: usize| cutoff.map_or(true, |c| m <= c);
        let mut w = self.omega_hat.clone();
        let mut p = self.psi_hat.clone();
        for m in 1..nm {
            if !keep(m) {
                w.column_mut(m).fill(ZERO);
                p.column_mut(m).fill(ZERO);
            }
        }
        for (wv, mv) in w.column_mut(0).iter_mut().zip(self.mean_vorticity()) {
            *wv = Complex64::new(mv, 0.0);
        }
        let omega = g.inverse(&w);
        let psi_fluct = g.inverse(&p);
        let mut u1 = g.d1().apply_rows(&psi_fluct);
        for (mut row, &um) in u1.axis_iter_mut(Axis(0)).zip(&self.u_mean) {
            row += um;
        }
        let mut q = p.clone();
        for m in 0..nm {
            let ik = Complex64::new(0.0, -g.wavenumber(m));
            q.column_mut(m).mapv_inplace(|v| v * ik);
        }
        let u2 = g.inverse(&q);
        (Nodal { omega, u1, u2 }, w, p)
    }

    fn spectral_dx(&self, modes: &Array2<Complex64>) -> Array2<f64> {
        let g = &self.grid;
        let mut d = modes.clone();
        for m in 0..g.n_modes() {
            let ik = if m == g.n_modes() - 1 {
                ZERO
            } else {
                Complex64::new(0.0, g.wavenumber(m))
            };
            d.column_mut(m).mapv_inplace(|v| v * ik);
        }
        g.inverse(&d)
    }

    /// Advection `-(u . grad omega)` for modes >= 1 and `-d_y <u1 u2>` for the mean.
    fn nonlinear(&self) -> (Array2<Complex64>, Vec<f64>) {
        let g = &self.grid;
        let (f, w, _) = self.nodal(Some(self.cutoff));
        let dxw = self.spectral_dx(&w);
        let dyw = g.d1().apply_rows(&f.omega);
        let mut prod = Array2::<f64>::zeros(f.omega.dim());
        ndarray::Zip::from(&mut prod)
            .and(&f.u1)
            .and(&dxw)
            .and(&f.u2)
            .and(&dyw)
            .for_each(|p, &a, &b, &c, &d| *p = -(a * b + c * d));
        let mut n = g.forward(&prod);
        n.column_mut(0).fill(ZERO);
        for m in self.cutoff + 1..g.n_modes() {
            n.column_mut(m).fill(ZERO);
        }
        let flux: Vec<f64> = f
            .u1
            .axis_iter(Axis(0))
            .zip(f.u2.axis_iter(Axis(0)))
            .map(|(a, b)| a.dot(&b) / g.nx() as f64)
            .collect();
        let mean = g.d1().apply(&flux).iter().map(|v| -v).collect();
        (n, mean)
    }

    /// Advances one step of size `dt`.
    pub fn advance(&mut self) -> Result<()> {
        let g = self.grid.clone();
        let ny = g.ny();
        let nm = g.n_modes();
        let dt = self.dt;
        let (n_now, m_now) = self.nonlinear();
        let (force, mforce) = match &self.history {
            Some((n_old, m_old)) => (
                &n_now * 1.5 - n_old * 0.5,
                m_now.iter().zip(m_old).map(|(a, b)| 1.5 * a - 0.5 * b).collect::<Vec<_>>(),
            ),
            None => (n_now.clone(), m_now.clone()),
        };

        if self.cfg.is_euler() {
            self.omega_hat.scaled_add(Complex64::new(dt, 0.0), &force);
            self.omega_hat.column_mut(0).fill(ZERO);
            self.omega_hat.column_mut(nm - 1).fill(ZERO);
            let mut p = self.omega_hat.clone();
            self.poisson.solve_modes(&mut p);
            p.column_mut(0).fill(ZERO);
            p.row_mut(0).fill(ZERO);
            self.psi_hat = p;
            for (u, f) in self.u_mean.iter_mut().zip(&mforce) {
                *u += dt * f;
            }
        } else {
            let half = 0.5 * dt * self.cfg.eps;
            let d1 = g.d1();
            let d2 = g.d2();
            let mut col = vec![ZERO; ny];
            let mut rhs = vec![ZERO; ny];
            for m in 1..nm - 1 {
                let k2 = g.wavenumber(m).powi(2);
                for (c, v) in col.iter_mut().zip(self.omega_hat.column(m)) {
                    *c = *v;
                }
                rhs[0] = ZERO;
                rhs[ny - 1] = ZERO;
                for j in 1..ny - 1 {
                    let lap = apply_c(d2, &col, j) - col[j] * k2;
                    rhs[j] = col[j] + lap * half + force[[j, m]] * dt;
                }
                self.cn[m].as_ref().expect("factored").solve_in_place(&mut rhs);
                let mut psi_p = rhs.clone();
                self.poisson.solve_mode(m, &mut psi_p);
                psi_p[0] = ZERO;
                let s_p = apply_c(d1, &psi_p, 0);
                let lambda = -(s_p * self.a_eps) / (1.0 + self.a_eps * self.s_h[m]);
                let wh = &self.omega_h[m];
                let ph = &self.psi_h[m];
                for j in 0..ny {
                    self.omega_hat[[j, m]] = rhs[j] + lambda * wh[j];
                    self.psi_hat[[j, m]] = psi_p[j] + lambda * ph[j];
                }
                self.omega_hat[[0, m]] = lambda;
                self.omega_hat[[ny - 1, m]] = ZERO;
                self.psi_hat[[0, m]] = ZERO;
            }
            let u = &self.u_mean;
            let mut r = vec![0.0; ny];
            for j in 1..ny - 1 {
                r[j] = u[j] + half * d2.apply_at(u, j) + dt * mforce[j];
            }
            self.mean_lu.as_ref().expect("factored").solve_in_place(&mut r);
            self.u_mean = r;
        }
        self.history = Some((n_now, m_now));
        self.step += 1;
        Ok(())
    }

    /// Largest `dt (|u1|/dx + |u2|/dy_j)` over the nodes.
    pub fn cfl_number(&self, dt: f64) -> f64 {
        let (f, _, _) = self.nodal(None);
        self.cfl_of(&f, dt)
    }

    fn cfl_of(&self, f: &Nodal, dt: f64) -> f64 {
        let g = &self.grid;
        let dx = g.dx();
        let mut c = 0.0f64;
        for (j, (r1, r2)) in f.u1.axis_iter(Axis(0)).zip(f.u2.axis_iter(Axis(0))).enumerate() {
            let dy = g.local_dy(j);
            for (a, b) in r1.iter().zip(r2.iter()) {
                c = c.max(a.abs() / dx + b.abs() / dy);
            }
        }
        c * dt
    }

    /// Nodal state and the per-step diagnostics.
    pub fn observe(&self) -> (SimState, Sample) {
        let g = &self.grid;
        let (f, _, p) = self.nodal(None);
        let nx = g.nx();
        let dx = g.dx();
        let wy = g.wy();
        let mut u1_modes = g.forward(&f.u1);
        u1_modes.column_mut(g.n_modes() - 1).fill(ZERO);
        let dxu1 = self.spectral_dx(&u1_modes);
        let mut q = p.clone();
        for m in 0..g.n_modes() {
            let k2 = g.wavenumber(m).powi(2);
            q.column_mut(m).mapv_inplace(|v| v * k2);
        }
        // d_x u2 = -d_xx psi
        let dxu2 = g.inverse(&q);
        let dyu1 = &dxu2 - &f.omega;
        // strip norms use the wall stencils, independent of the omega identity
        let dyu1_fd = g.d1().apply_rows(&f.u1);

        let weighted = |a: &Array2<f64>, wts: &[f64]| -> f64 {
            wts.iter()
                .zip(a.axis_iter(Axis(0)))
                .filter(|(wj, _)| **wj != 0.0)
                .map(|(wj, row)| wj * row.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                * dx
        };
        let grad_sq_field = {
            let mut gs = Array2::<f64>::zeros(f.omega.dim());
            ndarray::Zip::from(&mut gs)
                .and(&dxu1)
                .and(&dyu1_fd)
                .and(&dxu2)
                .for_each(|o, &a, &b, &c| *o = 2.0 * a * a + b * b + c * c);
            gs
        };
        let slip: Vec<f64> = f.u1.row(0).to_vec();
        let stress: Vec<f64> = dyu1.row(0).to_vec();
        let stencil_stress = g.d1().apply_row_at(&f.u1, 0);
        let wall_l2 = |v: &mut dyn Iterator<Item = f64>| (v.map(|x| x * x).sum::<f64>() * dx).sqrt();
        let a = self.a_eps;
        let navier_residual = wall_l2(&mut stress.iter().zip(&slip).map(|(s, u)| s - a * u));
        let navier_stencil_residual = wall_l2(&mut stencil_stress.iter().zip(&slip).map(|(s, u)| s - a * u));
        let sup = |a: &Array2<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let strips = self
            .strip_weights
            .iter()
            .map(|sw| StripSample {
                dyu1: weighted(&dyu1_fd, sw).sqrt(),
                grad_sq: sw
                    .iter()
                    .zip(grad_sq_field.axis_iter(Axis(0)))
                    .filter(|(wj, _)| **wj != 0.0)
                    .map(|(wj, row)| wj * row.sum())
                    .sum::<f64>()
                    * dx,
            })
            .collect();
        let sample = Sample {
            t: self.time(),
            energy: 0.5 * (weighted(&f.u1, wy) + weighted(&f.u2, wy)),
            enstrophy: weighted(&f.omega, wy),
            slip_sq: slip.iter().map(|v| v * v).sum::<f64>() * dx,
            stress_sq: stress.iter().map(|v| v * v).sum::<f64>() * dx,
            navier_residual,
            navier_stencil_residual,
            omega_inf: sup(&f.omega),
            slip_inf: slip.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            grad_inf: grad_sq_field.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt(),
            cfl: self.cfl_of(&f, self.dt),
            strips,
        };

        let mut psi = g.inverse(&p);
        let psi0 = g.quadrature().cumulative(&self.u_mean);
        for (mut row, v) in psi.axis_iter_mut(Axis(0)).zip(psi0) {
            row += v;
        }
        debug_assert_eq!(psi.ncols(), nx);
        let state = SimState {
            t: self.time(),
            step: self.step,
            omega: ScalarField::new(g.clone(), f.omega),
            psi: ScalarField::new(g.clone(), psi),
            u: VectorField::new(ScalarField::new(g.clone(), f.u1), ScalarField::new(g.clone(), f.u2)),
            slip_trace: slip,
            stress_trace: stress,
        };
        (state, sample)
    }

    /// Exact solver state, AB2 history included, as a field container.
    pub fn checkpoint(&self) -> Snapshot {
        let split = |a: &Array2<Complex64>| (a.mapv(|c| c.re), a.mapv(|c| c.im));
        let col = |v: &[f64]| Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column");
        let (wr, wi) = split(&self.omega_hat);
        let (pr, pi) = split(&self.psi_hat);
        let mut snap = Snapshot::new(self.cfg.grid, self.time())
            .with_field("omega_hat_re", wr)
            .with_field("omega_hat_im", wi)
            .with_field("psi_hat_re", pr)
            .with_field("psi_hat_im", pi)
            .with_field("u_mean", col(&self.u_mean));
        if let Some((n, m)) = &self.history {
            let (nr, ni) = split(n);
            snap = snap
                .with_field("history_re", nr)
                .with_field("history_im", ni)
                .with_field("history_mean", col(m));
        }
        snap.meta = serde_json::json!({
            "step": self.step,
            "t0": self.t0,
            "dt": self.dt,
            "config": self.cfg,
        });
        snap
    }

    /// Rebuilds a solver from [`Solver::checkpoint`] output.
    pub fn restore(snap: &Snapshot) -> Result<Self> {
        let meta = &snap.meta;
        let cfg: SimConfig = serde_json::from_value(meta["config"].clone())?;
        let step = meta["step"].as_u64().ok_or_else(|| Error::Format("checkpoint lacks step".into()))? as usize;
        let dt = meta["dt"].as_f64().ok_or_else(|| Error::Format("checkpoint lacks dt".into()))?;
        let t0 = meta["t0"].as_f64().unwrap_or(0.0);
        let grid = Grid::new(cfg.grid)?;
        let join = |re: &Array2<f64>, im: &Array2<f64>| -> Result<Array2<Complex64>> {
            if re.dim() != (grid.ny(), grid.n_modes()) || im.dim() != re.dim() {
                return Err(Error::Format("checkpoint mode arrays have the wrong shape".into()));
            }
            Ok(ndarray::Zip::from(re).and(im).map_collect(|&a, &b| Complex64::new(a, b)))
        };
        let omega_hat = join(snap.field("omega_hat_re")?, snap.field("omega_hat_im")?)?;
        let psi_hat = join(snap.field("psi_hat_re")?, snap.field("psi_hat_im")?)?;
        let u_mean = snap.field("u_mean")?.column(0).to_vec();
        let history = match (snap.field("history_re"), snap.field("history_im"), snap.field("history_mean")) {
            (Ok(r), Ok(i), Ok(m)) => Some((join(r, i)?, m.column(0).to_vec())),
            _ => None,
        };
        let init = Initial {
            omega: ScalarField::zeros(&grid),
            mean_velocity: Some(u_mean.clone()),
        };
        let mut cfg_fixed = cfg.clone();
        cfg_fixed.dt = Some(dt);
        let mut s = Solver::new(&cfg_fixed, &init)?;
        s.cfg = cfg;
        s.omega_hat = omega_hat;
        s.psi_hat = psi_hat;
        s.u_mean = u_mean;
        s.history = history;
        s.step = step;
        s.t0 = t0;
        Ok(s)
    }
}

/// One step from a nodal state (first-order advection bootstrap, no history).
pub fn step(state: &SimState, cfg: &SimConfig, dt: f64) -> Result<SimState> {
    let init = Initial::from_velocity(&state.u);
    let init = Initial {
        omega: state.omega.clone(),
        mean_velocity: init.mean_velocity,
    };
    let mut c = cfg.clone();
    c.dt = Some(dt);
    let mut s = Solver::new(&c, &init)?;
    s.t0 = state.t;
    let cfl = s.cfl_number(dt);
    if cfl > super::config::CFL_CAP {
        return Err(Error::StepSize(format!("CFL number {cfl:.3} exceeds {}", super::config::CFL_CAP)));
    }
    s.advance()?;
    let (mut out, _) = s.observe();
    out.step = state.step + 1;
    Ok(out)
}
