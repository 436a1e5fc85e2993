//! Oracle and invariant checks behind `slipstream verify` and the acceptance suite.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::oracle::RobinHeat;
use crate::corrector::{build_corrector, evaluate_identity, max_slope, Corrector, CorrectorFrame, QuarticCutoff};
use crate::criteria::{
    energy_residual, gn_interpolation_check, random_solenoidal_fields, rate_law, vorticity_bounds_check,
};
use crate::error::Result;
use crate::field::{l2_norm, Grid, GridSpec, ScalarField, VectorField};
use crate::poisson::{boundary_slip_kernel, solve_streamfunction, split_kernel_bound, KernelOptions, PoissonOptions};
use crate::sim::{robin_shear_profile, run, run_euler, InitialData, SimConfig, Trajectory};
use crate::sweep::fit_rate;

/// One pass/fail line.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }

    /// `measured <= limit`.
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Self::new(name, measured <= limit, format!("{measured:.3e} <= {limit:.1e}"))
    }

    /// `|measured - target| <= tol`.
    pub fn near(name: &str, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(
            name,
            (measured - target).abs() <= tol,
            format!("{measured:.4} vs {target:.4} +- {tol}"),
        )
    }

    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    Check::new(name, false, format!("error: {e}"))
}

/// Least-squares slope of `ln value` against `ln h`.
fn order(points: &[(f64, f64)]) -> Result<f64> {
    Ok(fit_rate(points)?.slope)
}

/// NS Taylor vortex with `a = 0` against `exp(-2 eps t)` decay.
#[derive(Debug, Clone, Serialize)]
pub struct TaylorOracle {
    pub n: usize,
    pub final_l2_error: f64,
    pub decay_rate: f64,
    pub energy_residual: f64,
    pub max_principle_margin: f64,
}

pub fn taylor_run(n: usize, eps: f64, t_end: f64, stretch: Option<f64>) -> Result<(Trajectory, crate::sim::Initial)> {
    let mut spec = GridSpec::channel(n, n);
    if let Some(s) = stretch {
        spec = spec.with_stretch(s);
    }
    let g = Grid::new(spec)?;
    let cfg = SimConfig::new(spec, eps, 0.0, 0.0, t_end);
    let init = InitialData::TaylorVortex { amplitude: 1.0 }.build(&g, &cfg)?;
    Ok((run(&cfg, init.clone())?, init))
}

pub fn taylor_oracle(n: usize) -> Result<TaylorOracle> {
    let eps = 1e-2;
    let (u, _) = taylor_run(n, eps, 1.0, None)?;
    let t_end = u.final_state().t;
    let decay = (-2.0 * eps * t_end).exp();
    let exact = VectorField::from_fn(&u.grid, |x, y| (decay * x.sin() * y.cos(), -decay * x.cos() * y.sin()));
    let err = l2_norm(&u.final_state().u.sub(&exact))?;
    // ln ||u|| = ln ||u0|| - 2 eps t
    let t = u.dense.times();
    let l: Vec<f64> = u.dense.series(|s| (2.0 * s.energy).sqrt().ln());
    let n_t = t.len() as f64;
    let (mt, ml) = (t.iter().sum::<f64>() / n_t, l.iter().sum::<f64>() / n_t);
    let slope = t.iter().zip(&l).map(|(a, b)| (a - mt) * (b - ml)).sum::<f64>()
        / t.iter().map(|a| (a - mt).powi(2)).sum::<f64>();
    Ok(TaylorOracle {
        n,
        final_l2_error: err,
        decay_rate: slope,
        energy_residual: energy_residual(&u).relative,
        max_principle_margin: vorticity_bounds_check(&u).margin,
    })
}

/// x-independent shear with Navier friction against the Robin heat series.
#[derive(Debug, Clone, Serialize)]
pub struct ShearOracle {
    pub sup_error: f64,
    pub energy_residual: f64,
    pub max_principle_margin: f64,
}

pub fn robin_shear_oracle() -> Result<ShearOracle> {
    let spec = GridSpec::channel(8, 384).with_stretch(3.0);
    let g = Grid::new(spec)?;
    let cfg = SimConfig::new(spec, 1e-3, 1.0, 0.5, 1.0).with_dt(1e-3).with_stride(10);
    let data = InitialData::RobinShear {
        amplitude: 1.0,
        width: 0.5,
    };
    let alpha = cfg.a_eps();
    let u = run(&cfg, data.build(&g, &cfg)?)?;
    let o = RobinHeat::new(|y| robin_shear_profile(1.0, 0.5, alpha, y), alpha, cfg.eps, g.ly(), 2000);
    let mut sup = 0.0f64;
    for s in &u.snapshots {
        for (j, &y) in g.y().iter().enumerate() {
            sup = sup.max((s.u.u1.values()[[j, 0]] - o.value(s.t, y)).abs());
        }
    }
    Ok(ShearOracle {
        sup_error: sup,
        energy_residual: energy_residual(&u).relative,
        max_principle_margin: vorticity_bounds_check(&u).margin,
    })
}

/// `(n, |energy residual|, max-principle margin)` at each level and the
/// fitted order in `h ~ 1/n` (dt follows the CFL target).
#[derive(Debug, Clone, Serialize)]
pub struct EnergyStudy {
    pub levels: Vec<(usize, f64, f64)>,
    pub order: f64,
}

pub fn energy_refinement(ns: &[usize]) -> Result<EnergyStudy> {
    let levels = ns
        .iter()
        .map(|&n| {
            let (u, _) = taylor_run(n, 1e-2, 1.0, None)?;
            Ok((n, energy_residual(&u).relative.abs(), vorticity_bounds_check(&u).margin))
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = levels.iter().map(|&(n, r, _)| (1.0 / n as f64, r)).collect();
    Ok(EnergyStudy {
        order: order(&pts)?,
        levels,
    })
}

/// Identity closure of the NS/Euler Taylor pair under refinement.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityStudy {
    /// `(n, closure, route gap)`.
    pub levels: Vec<(usize, f64, f64)>,
    pub order: f64,
}

pub fn identity_refinement(ns: &[usize]) -> Result<IdentityStudy> {
    let levels = ns
        .iter()
        .map(|&n| {
            let (u, init) = taylor_run(n, 1e-2, 1.0, Some(3.0))?;
            let v = run_euler(&SimConfig::euler(u.config.grid, 1.0).with_dt(u.dt), init)?;
            let corr = build_corrector(&v, 1.0, u.config.eps)?;
            let b = evaluate_identity(&u, &v, &corr)?;
            Ok((n, b.closure(), b.route_gap()))
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = levels.iter().map(|&(n, c, _)| (1.0 / n as f64, c)).collect();
    Ok(IdentityStudy {
        order: order(&pts)?,
        levels,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelCheck {
    pub near_constant: f64,
    /// Worst relative gap between the wall-kernel and streamfunction routes.
    pub route_gap: f64,
}

pub fn kernel_constants() -> Result<KernelCheck> {
    let g = Grid::new(GridSpec::channel(32, 128).with_stretch(3.0))?;
    let k = 0.1;
    let strip = ScalarField::from_fn(&g, |_, y| if y <= k { 1.0 } else { 0.0 });
    let near_constant = split_kernel_bound(&strip, k)?.near_constant;

    let g = Grid::new(GridSpec::channel(64, 128))?;
    let dipole = ScalarField::from_fn(&g, |x, y| {
        let r2 = ((x - PI).powi(2) + (y - 1.0).powi(2)) / 0.09;
        10.0 * (x - PI) * (-r2).exp()
    });
    let psi = solve_streamfunction(&dipole, PoissonOptions::default())?;
    let trace = psi.dy().row(0);
    let kt = boundary_slip_kernel(&dipole, &g.xs(), KernelOptions::default())?;
    let scale = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = kt.values.iter().zip(&trace).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(KernelCheck {
        near_constant,
        route_gap: gap / scale,
    })
}

fn corrector_checks() -> Result<Check> {
    let grid: Arc<Grid> = Grid::new(GridSpec::channel(32, 96).with_stretch(3.0))?;
    let g: Vec<f64> = grid.xs().iter().map(|x| x.cos()).collect();
    let frames = vec![CorrectorFrame {
        t: 0.0,
        rate: vec![0.0; g.len()],
        trace: g,
    }];
    let c = Corrector::from_traces(&grid, 0.5, 0.1, frames, Arc::new(QuarticCutoff))?;
    let ck = c.checks();
    let sup = c.field(0).u1.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ok = ck.wall_mismatch <= 1e-10
        && ck.wall_normal == 0.0
        && ck.outside_support == 0.0
        && ck.divergence <= 1e-8
        && (sup - max_slope(&QuarticCutoff)).abs() <= 1e-12;
    Ok(Check::new(
        "corrector invariants",
        ok,
        format!("wall {:.1e}, div {:.1e}, sup {sup:.6}", ck.wall_mismatch, ck.divergence),
    ))
}

fn interpolation_battery() -> Result<Check> {
    let g = Grid::new(GridSpec::channel(64, 64))?;
    let mut worst = 0.0f64;
    for f in random_solenoidal_fields(&g, 16, 3) {
        for p in [3.0, 4.0, 6.0, 8.0] {
            worst = worst.max(gn_interpolation_check(&f, p)?.constant);
        }
    }
    Ok(Check::at_most("interpolation constant on random battery", worst, 2.0))
}

fn rate_law_units() -> Result<Check> {
    let a = rate_law(1.0, 2.0)?.p_threshold;
    let b = rate_law(1.0 / 3.0, 2.0)?.p_threshold;
    let c = rate_law(0.2, 2.0)?.p_threshold;
    let d = rate_law(0.25, 4.0)?.predicted_lp_exponent;
    let ok = a == 2.0 && (b - 6.0).abs() < 1e-12 && c.is_infinite() && (d - 0.15625).abs() < 1e-15;
    Ok(Check::new(
        "rate law algebra",
        ok,
        format!("threshold(1) = {a}, threshold(1/3) = {b:.12}, threshold(1/5) = {c}, L4 exponent(1/4) = {d}"),
    ))
}

/// Runs every check; errors become failed checks.
pub fn battery() -> Vec<Check> {
    let mut out = Vec::new();
    match taylor_oracle(128) {
        Ok(t) => {
            out.push(Check::at_most("taylor 128^2 final L2 error", t.final_l2_error, 1e-4));
            out.push(Check::new(
                "taylor decay rate",
                (t.decay_rate + 2e-2).abs() <= 0.01 * 2e-2,
                format!("{:.6} vs -0.02 (1%)", t.decay_rate),
            ));
            out.push(Check::at_most("taylor energy residual", t.energy_residual.abs(), 1e-5));
            out.push(Check::at_most("taylor max principle margin", t.max_principle_margin, 0.05));
        }
        Err(e) => out.push(failed("taylor oracle", e)),
    }
    match robin_shear_oracle() {
        Ok(s) => {
            out.push(Check::at_most("robin shear sup-in-time error", s.sup_error, 1e-5));
            out.push(Check::at_most("robin shear energy residual", s.energy_residual.abs(), 1e-5));
            out.push(Check::at_most("robin shear max principle margin", s.max_principle_margin, 0.05));
        }
        Err(e) => out.push(failed("robin shear oracle", e)),
    }
    match energy_refinement(&[32, 64, 128]) {
        Ok(s) => {
            out.push(Check::new("energy residual order", s.order >= 2.0, format!("{:.2} >= 2 over {:?}", s.order, s.levels)));
            let worst = s.levels.iter().map(|l| l.2).fold(f64::NEG_INFINITY, f64::max);
            out.push(Check::at_most("refinement max principle margin", worst, 0.05));
        }
        Err(e) => out.push(failed("energy refinement", e)),
    }
    match identity_refinement(&[64, 128, 256]) {
        Ok(s) => {
            let at128 = s.levels[1];
            out.push(Check::at_most("identity closure at 128^2", at128.1, 1e-2));
            out.push(Check::new("identity closure order", s.order >= 2.0, format!("{:.2} >= 2", s.order)));
            out.push(Check::at_most("viscous corrector route gap", at128.2, 1e-3));
        }
        Err(e) => out.push(failed("identity refinement", e)),
    }
    match kernel_constants() {
        Ok(k) => {
            out.push(Check::near("split kernel near constant", k.near_constant, 0.5, 0.05));
            out.push(Check::at_most("wall kernel route gap", k.route_gap, 1e-3));
        }
        Err(e) => out.push(failed("kernel constants", e)),
    }
    for c in [corrector_checks(), interpolation_battery(), rate_law_units()] {
        out.push(c.unwrap_or_else(|e| failed("battery", e)));
    }
    out
}
