//! Convergence-criterion functionals over NS and Euler trajectories, and the
//! rate algebra for `L^p` gaps.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corrector::{build_corrector, evaluate_identity, kato_limsup_bound};
use crate::error::{Error, Result};
use crate::field::norms::{l2_norm, linf_norm, lp_norm, require_strip};
use crate::field::{Grid, ScalarField, VectorField};
use crate::series::trapezoid;
use crate::sim::{check_aligned, Trajectory};

/// Minimum number of grid nodes a wall strip must hold.
pub const STRIP_MIN_NODES: usize = 4;

/// Column set of the results ledger.
pub const LEDGER_SCHEMA: &str = "criteria-v1";

fn strip_index(u: &Trajectory, kappa: f64) -> Result<usize> {
    let eps = u.config.eps;
    if !(eps > 0.0) {
        return Err(Error::Parameter("strip criteria need a viscous run (eps > 0)".into()));
    }
    let w = kappa * eps;
    require_strip(&u.grid, w, STRIP_MIN_NODES)?;
    u.config
        .strips
        .iter()
        .position(|&s| (s - w).abs() <= 1e-9 * w)
        .ok_or_else(|| Error::Data(format!("strip {w:e} was not traced; add it to the run's strips")))
}

/// `sqrt(eps) int_0^T ||d_y u1||_{L^2(y < kappa eps)} dt`.
pub fn kato_criterion(u: &Trajectory, kappa: f64) -> Result<f64> {
    let k = strip_index(u, kappa)?;
    let f = u.dense.series(|s| s.strips[k].dyu1);
    Ok(u.config.eps.sqrt() * trapezoid(&u.dense.times(), &f))
}

/// `eps int_0^T ||grad u||^2_{L^2(y < kappa eps)} dt`.
pub fn kato_original_criterion(u: &Trajectory, kappa: f64) -> Result<f64> {
    let k = strip_index(u, kappa)?;
    let f = u.dense.series(|s| s.strips[k].grad_sq);
    Ok(u.config.eps * trapezoid(&u.dense.times(), &f))
}

/// Wall functional `eps int int v1 d_y u1 |_{y=0}` by two routes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Matsui {
    /// From the recorded wall stress of `u`.
    pub value: f64,
    /// `eps a^eps int int v1 u1` from the slip traces.
    pub slip_route: f64,
}

impl Matsui {
    /// Relative disagreement of the routes.
    pub fn route_gap(&self) -> f64 {
        let d = (self.value - self.slip_route).abs();
        let s = self.value.abs().max(self.slip_route.abs());
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }
}

pub fn matsui_criterion(u: &Trajectory, v: &Trajectory) -> Result<Matsui> {
    if u.is_euler() {
        return Err(Error::Parameter("the wall functional needs a viscous run (eps > 0)".into()));
    }
    check_aligned(u, v)?;
    if u.dense.stress.len() != u.dense.len() || v.dense.slip.len() != v.dense.len() {
        return Err(Error::Data("missing wall traces".into()));
    }
    let dx = u.grid.dx();
    let wall = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>() * dx;
    let t = u.dense.times();
    let by_stress: Vec<f64> = (0..t.len()).map(|n| wall(&v.dense.slip[n], &u.dense.stress[n])).collect();
    let by_slip: Vec<f64> = (0..t.len()).map(|n| wall(&v.dense.slip[n], &u.dense.slip[n])).collect();
    let eps = u.config.eps;
    Ok(Matsui {
        value: eps * trapezoid(&t, &by_stress),
        slip_route: eps * u.a_eps * trapezoid(&t, &by_slip),
    })
}

/// Bounds of the wall functional under the slip law.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatsuiBound {
    /// `eps a^eps ||v0|| int_0^T ||u1(., 0)||_{L^2(wall)} dt`.
    pub rhs: f64,
    /// The same with the wall trace of `v` in place of `||v0||` (Cauchy-Schwarz).
    pub trace_rhs: f64,
    /// Energy cap of `rhs`: `eps^((1-beta)/2) ||v0|| ||u0|| sqrt(a T / 2)`.
    pub energy_cap: f64,
}

/// `v` supplies the wall trace for [`MatsuiBound::trace_rhs`]; when absent
/// that field is NaN.
pub fn matsui_navier_bound(u: &Trajectory, v0_l2: f64, v: Option<&Trajectory>) -> Result<MatsuiBound> {
    let t = u.dense.times();
    let dx = u.grid.dx();
    let norm = |a: &[f64]| (a.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
    let slip: Vec<f64> = u.dense.slip.iter().map(|s| norm(s)).collect();
    let c = u.config.eps * u.a_eps;
    let trace_rhs = match v {
        Some(v) => {
            check_aligned(u, v)?;
            let f: Vec<f64> = slip.iter().zip(&v.dense.slip).map(|(a, b)| a * norm(b)).collect();
            c * trapezoid(&t, &f)
        }
        None => f64::NAN,
    };
    let u0 = l2_norm(&u.initial_state().u)?;
    let t_end = t.last().copied().unwrap_or(0.0);
    let cfg = &u.config;
    let cap = if cfg.is_euler() {
        0.0
    } else {
        cfg.eps.powf(0.5 * (1.0 - cfg.beta)) * v0_l2 * u0 * (0.5 * cfg.a * t_end).sqrt()
    };
    Ok(MatsuiBound {
        rhs: c * v0_l2 * trapezoid(&t, &slip),
        trace_rhs,
        energy_cap: cap,
    })
}

/// Energy balance at the final time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyResidual {
    /// `1/2 ||u(T)||^2 + eps a^eps int ||u1||^2_wall + eps int ||omega||^2 - 1/2 ||u0||^2`.
    pub absolute: f64,
    /// `absolute / (1/2 ||u0||^2)`.
    pub relative: f64,
    pub slip_dissipation: f64,
    pub bulk_dissipation: f64,
}

pub fn energy_residual(u: &Trajectory) -> EnergyResidual {
    let s = &u.dense.samples;
    let t = u.dense.times();
    let eps = u.config.eps;
    let slip = eps * u.a_eps * trapezoid(&t, &u.dense.series(|s| s.slip_sq));
    let bulk = eps * trapezoid(&t, &u.dense.series(|s| s.enstrophy));
    let (e0, e1) = (s[0].energy, s[s.len() - 1].energy);
    let absolute = e1 + slip + bulk - e0;
    EnergyResidual {
        absolute,
        relative: if e0 > 0.0 { absolute / e0 } else { absolute },
        slip_dissipation: slip,
        bulk_dissipation: bulk,
    }
}

/// Maximum-principle margin and the scaled vorticity peak.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VorticityBounds {
    pub omega_sup: f64,
    pub omega0: f64,
    /// `a^eps sup_t ||u1(., 0)||_inf`.
    pub wall_bound: f64,
    /// `omega_sup / max(omega0, wall_bound) - 1` (0 for the zero flow).
    pub margin: f64,
    /// `||omega||_inf eps^(2 beta)`.
    pub scaled_peak: f64,
}

impl VorticityBounds {
    /// Whether the maximum principle holds with slack `delta`.
    pub fn holds(&self, delta: f64) -> bool {
        self.margin <= delta
    }
}

pub fn vorticity_bounds_check(u: &Trajectory) -> VorticityBounds {
    let s = &u.dense.samples;
    let omega_sup = s.iter().map(|s| s.omega_inf).fold(0.0, f64::max);
    let omega0 = s[0].omega_inf;
    let wall_bound = u.a_eps * s.iter().map(|s| s.slip_inf).fold(0.0, f64::max);
    let cap = omega0.max(wall_bound);
    let cfg = &u.config;
    VorticityBounds {
        omega_sup,
        omega0,
        wall_bound,
        margin: if cap > 0.0 { omega_sup / cap - 1.0 } else { 0.0 },
        scaled_peak: if cfg.is_euler() { f64::NAN } else { omega_sup * cfg.eps.powf(2.0 * cfg.beta) },
    }
}

/// Both sides of `||f||_p <= C ||f||_2^(1-q) ||rot f||_inf^q`, `q = (p-2)/(2p)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GnCheck {
    pub lhs: f64,
    pub rhs_product: f64,
    pub constant: f64,
}

pub fn gn_interpolation_check(f: &VectorField, p: f64) -> Result<GnCheck> {
    if !(2.0..=8.0).contains(&p) {
        return Err(Error::Parameter(format!("interpolation check takes p in [2, 8], got {p}")));
    }
    let q = (p - 2.0) / (2.0 * p);
    let lhs = lp_norm(f, p)?;
    let l2 = l2_norm(f)?;
    let rhs = if q == 0.0 {
        l2
    } else {
        l2.powf(1.0 - q) * linf_norm(&f.rot())?.powf(q)
    };
    let constant = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(GnCheck {
        lhs,
        rhs_product: rhs,
        constant,
    })
}

/// Smooth divergence-free fields tangent to both walls: `psi` is a random
/// combination of `sin(n pi y / ly) cos(m x + phase)`, `m, n <= 4`.
pub fn random_solenoidal_fields(grid: &Arc<Grid>, count: usize, seed: u64) -> Vec<VectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lx, ly) = (grid.lx(), grid.ly());
    let kx = 2.0 * std::f64::consts::PI / lx;
    (0..count)
        .map(|_| {
            let modes: Vec<(f64, f64, f64, f64)> = (0..=4)
                .flat_map(|m| (1..=4).map(move |n| (m as f64, n as f64)))
                .map(|(m, n)| {
                    let c = rng.random_range(-1.0..1.0) / (1.0 + m * m + n * n);
                    (m * kx, n * std::f64::consts::PI / ly, c, rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            VectorField::from_fn(grid, |x, y| {
                modes.iter().fold((0.0, 0.0), |(a, b), &(k, l, c, ph)| {
                    (
                        a + c * l * (l * y).cos() * (k * x + ph).cos(),
                        b + c * k * (l * y).sin() * (k * x + ph).sin(),
                    )
                })
            })
        })
        .collect()
}

/// Predicted exponents of the `L^2` and `L^p` gaps for slip exponent `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLaw {
    pub beta: f64,
    pub p: f64,
    /// `(1 - beta)/2`.
    pub predicted_l2_exponent: f64,
    /// `(1 - beta)/2 - (p - 2)(1 + 3 beta)/(4p)`.
    pub predicted_lp_exponent: f64,
    /// `2 (1 + 3 beta)/(5 beta - 1)` for `beta > 1/5`, otherwise infinite.
    pub p_threshold: f64,
}

pub fn rate_law(beta: f64, p: f64) -> Result<RateLaw> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Parameter(format!("beta = {beta} lies outside [0, 1]")));
    }
    if !(p >= 2.0) {
        return Err(Error::Parameter(format!("p = {p} must be >= 2")));
    }
    let l2 = 0.5 * (1.0 - beta);
    let denom = 5.0 * beta - 1.0;
    Ok(RateLaw {
        beta,
        p,
        predicted_l2_exponent: l2,
        predicted_lp_exponent: l2 - (p - 2.0) * (1.0 + 3.0 * beta) / (4.0 * p),
        p_threshold: if denom > 0.0 {
            2.0 * (1.0 + 3.0 * beta) / denom
        } else {
            f64::INFINITY
        },
    })
}

/// `sup_t ||u - v||_{L^p}` over the paired snapshots.
pub fn sup_gap(u: &Trajectory, v: &Trajectory, p: f64) -> Result<f64> {
    check_aligned(u, v)?;
    let mut m = 0.0f64;
    for (a, b) in u.snapshots.iter().zip(&v.snapshots) {
        let d = a.u.sub(&b.u);
        m = m.max(if p == 2.0 { l2_norm(&d)? } else { lp_norm(&d, p)? });
    }
    Ok(m)
}

/// `||u(t) - v(t)||_{L^2}` at each snapshot.
pub fn gap_series(u: &Trajectory, v: &Trajectory) -> Result<Vec<(f64, f64)>> {
    check_aligned(u, v)?;
    u.snapshots
        .iter()
        .zip(&v.snapshots)
        .map(|(a, b)| Ok((a.t, l2_norm(&a.u.sub(&b.u))?)))
        .collect()
}

/// Everything measured for one NS run against its Euler reference at one kappa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub run_id: String,
    pub eps: f64,
    pub beta: f64,
    pub a: f64,
    pub kappa: f64,
    pub kato_b: f64,
    pub kato_original: f64,
    pub matsui: f64,
    pub matsui_slip_route: f64,
    pub energy_residual: f64,
    pub max_principle_margin: f64,
    pub linf_vorticity_ratio: f64,
    pub matsui_navier_rhs: f64,
    pub matsui_trace_rhs: f64,
    pub matsui_energy_cap: f64,
    pub sup_l2_gap: f64,
    /// `(p, sup_t ||u - v||_{L^p})`.
    pub lp_gaps: Vec<(f64, f64)>,
    /// `max_t |closure residual| / dominant term` of the energy identity.
    pub identity_closure: f64,
    /// Kato-type bound: `sup ||u - v||^2` and its Gronwall right side.
    pub limsup_lhs: f64,
    pub limsup_rhs: f64,
    pub resolved: bool,
}

impl CriterionReport {
    pub fn is_finite(&self) -> bool {
        [
            self.kato_b,
            self.kato_original,
            self.matsui,
            self.energy_residual,
            self.max_principle_margin,
            self.linf_vorticity_ratio,
            self.matsui_navier_rhs,
            self.sup_l2_gap,
        ]
        .iter()
        .all(|v| v.is_finite())
            && self.lp_gaps.iter().all(|(_, g)| g.is_finite())
    }
}

/// Wall-layer resolution: every strip and the viscous and slip lengths hold
/// enough nodes.
pub fn layer_resolved(grid: &Grid, eps: f64, a_eps: f64, kappas: &[f64]) -> bool {
    let strips_ok = kappas.iter().all(|k| grid.nodes_below(k * eps) >= STRIP_MIN_NODES);
    let viscous_ok = grid.nodes_below(eps.sqrt()) >= 2 * STRIP_MIN_NODES;
    let slip_ok = a_eps == 0.0 || grid.nodes_below(1.0 / a_eps) >= STRIP_MIN_NODES;
    strips_ok && viscous_ok && slip_ok
}

/// All criteria of one NS run against its Euler reference, one report per
/// strip factor in `kappas`.
pub fn evaluate_run(
    run_id: &str,
    u: &Trajectory,
    v: &Trajectory,
    kappas: &[f64],
    p_list: &[f64],
    resolved: bool,
) -> Result<Vec<CriterionReport>> {
    check_aligned(u, v)?;
    let cfg = &u.config;
    let sup_l2_gap = sup_gap(u, v, 2.0)?;
    let lp_gaps = p_list
        .iter()
        .map(|&p| Ok((p, sup_gap(u, v, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let v0 = l2_norm(&v.initial_state().u)?;
    let matsui = matsui_criterion(u, v)?;
    let bound = matsui_navier_bound(u, v0, Some(v))?;
    let energy = energy_residual(u);
    let vort = vorticity_bounds_check(u);
    kappas
        .iter()
        .map(|&kappa| {
            let corr = build_corrector(v, kappa, cfg.eps)?;
            let budget = evaluate_identity(u, v, &corr)?;
            let limsup = kato_limsup_bound(u, v, &corr)?;
            Ok(CriterionReport {
                run_id: run_id.to_string(),
                eps: cfg.eps,
                beta: cfg.beta,
                a: cfg.a,
                kappa,
                kato_b: kato_criterion(u, kappa)?,
                kato_original: kato_original_criterion(u, kappa)?,
                matsui: matsui.value,
                matsui_slip_route: matsui.slip_route,
                energy_residual: energy.relative,
                max_principle_margin: vort.margin,
                linf_vorticity_ratio: vort.scaled_peak,
                matsui_navier_rhs: bound.rhs,
                matsui_trace_rhs: bound.trace_rhs,
                matsui_energy_cap: bound.energy_cap,
                sup_l2_gap,
                lp_gaps: lp_gaps.clone(),
                identity_closure: budget.closure(),
                limsup_lhs: limsup.lhs,
                limsup_rhs: limsup.rhs,
                resolved,
            })
        })
        .collect()
}

/// Convenience zero vector field for report defaults.
pub fn zero_field(grid: &Arc<Grid>) -> VectorField {
    VectorField::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
}
