use std::io::Write;

use ndarray::Array2;
use serde::Serialize;

use super::Corrector;
use crate::error::{Error, Result};
use crate::field::norms::{l2_norm, linf_norm, lp_norm};
use crate::field::{ScalarField, VectorField};
use crate::series::{cumulative_trapezoid, trapezoid};
use crate::sim::{check_aligned, SimState, Trajectory};

fn int(f: &Array2<f64>, s: &ScalarField) -> f64 {
    ScalarField::new(s.grid().clone(), f.clone()).integral()
}

/// `int |grad u|^2`, spectral in x and stencils in y.
fn grad_sq(u: &VectorField) -> f64 {
    [u.u1.dx(), u.u1.dy(), u.u2.dx(), u.u2.dy()]
        .iter()
        .map(|f| f.mul(f).integral())
        .sum()
}

fn check_frames(u: &Trajectory, corr: &Corrector) -> Result<()> {
    let ts = u.snapshot_times();
    if corr.len() != ts.len() || corr.times().iter().zip(&ts).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs())) {
        return Err(Error::Alignment(format!(
            "corrector has {} frames, trajectory {} snapshots at different times",
            corr.len(),
            ts.len()
        )));
    }
    if corr.grid().spec() != u.grid.spec() {
        return Err(Error::Alignment("corrector and trajectory grids differ".into()));
    }
    Ok(())
}

/// Time series of every term of the energy identity for `||u - v||^2`
/// tested against `v - V`, at the stored snapshot times.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IdentityBudget {
    pub times: Vec<f64>,
    /// `||u(t) - v(t)||^2`.
    pub lhs: Vec<f64>,
    /// `-2 eps a^eps int ||u1||^2_{wall}`.
    pub slip_dissipation: Vec<f64>,
    /// `-2 eps int ||omega||^2`.
    pub bulk_dissipation: Vec<f64>,
    /// `||u0 - v0||^2`.
    pub initial_gap: Vec<f64>,
    /// `-2 <u(t), V(t)>`.
    pub corrector_now: Vec<f64>,
    /// `2 <u0, V(0)>`.
    pub corrector_initial: Vec<f64>,
    /// `2 int <u, d_t V>`.
    pub corrector_rate: Vec<f64>,
    /// `2 eps int <omega, rot v>`.
    pub viscous_euler: Vec<f64>,
    /// `-2 int <u - v, (u - v) . grad v>`.
    pub strain: Vec<f64>,
    /// `2 int <u (x) u, grad V>`.
    pub nonlinear: Vec<f64>,
    /// `-2 eps int <omega, rot V>`, direct quadrature.
    pub viscous_corrector: Vec<f64>,
    /// Same term through `<d_y u1, rot V> + <u2, d_x rot V>`.
    pub viscous_corrector_ibp: Vec<f64>,
    /// `2 eps int int |omega rot V|`: scale for comparing the two routes.
    pub viscous_corrector_scale: Vec<f64>,
    /// `<d_y u1, rot V>` at each sample.
    pub kato_pairing: Vec<f64>,
    /// `lhs - sum of right-hand terms`.
    pub residual: Vec<f64>,
}

impl IdentityBudget {
    /// Right-hand terms by name.
    pub fn terms(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("slip_dissipation", &self.slip_dissipation),
            ("bulk_dissipation", &self.bulk_dissipation),
            ("initial_gap", &self.initial_gap),
            ("corrector_now", &self.corrector_now),
            ("corrector_initial", &self.corrector_initial),
            ("corrector_rate", &self.corrector_rate),
            ("viscous_euler", &self.viscous_euler),
            ("strain", &self.strain),
            ("nonlinear", &self.nonlinear),
            ("viscous_corrector", &self.viscous_corrector),
        ]
    }

    /// Largest magnitude of any term (left side included) over time.
    pub fn dominant(&self) -> f64 {
        self.terms()
            .iter()
            .map(|(_, s)| *s)
            .chain(std::iter::once(self.lhs.as_slice()))
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max_t |residual| / dominant` (0 when everything vanishes).
    pub fn closure(&self) -> f64 {
        let r = self.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d = self.dominant();
        if d == 0.0 {
            r
        } else {
            r / d
        }
    }

    /// Gap between the two routes for the corrector viscous term, relative to
    /// the integral of the absolute integrand.
    pub fn route_gap(&self) -> f64 {
        let gap = self
            .viscous_corrector
            .iter()
            .zip(&self.viscous_corrector_ibp)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = self.viscous_corrector_scale.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            gap
        } else {
            gap / scale
        }
    }

    /// One row per sample per term: `t,term,value`.
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "term", "value"])?;
        let mut rows = self.terms();
        rows.push(("lhs", &self.lhs));
        rows.push(("viscous_corrector_ibp", &self.viscous_corrector_ibp));
        rows.push(("residual", &self.residual));
        for (k, t) in self.times.iter().enumerate() {
            for (name, s) in &rows {
                w.write_record([format!("{t:.12e}"), name.to_string(), format!("{:.17e}", s[k])])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct Pairings {
    gap_sq: f64,
    corr: f64,
    corr_rate: f64,
    rot_v: f64,
    strain: f64,
    nonlinear: f64,
    rot_corr: f64,
    rot_corr_ibp: f64,
    rot_corr_abs: f64,
    kato: f64,
}

fn pairings(u: &SimState, v: &SimState, corr: &Corrector, k: usize) -> Result<Pairings> {
    let cv = corr.field(k);
    let [v1x, v1y, v2x, v2y] = corr.gradient(k);
    let rot_c = corr.rot(k);
    let w = u.u.sub(&v.u);
    let (u1, u2) = (u.u.u1.values(), u.u.u2.values());
    let (w1, w2) = (w.u1.values(), w.u2.values());
    let (e1x, e1y, e2x, e2y) = (v.u.u1.dx(), v.u.u1.dy(), v.u.u2.dx(), v.u.u2.dy());
    let strain = w1 * &(w1 * e1x.values() + w2 * e1y.values()) + w2 * &(w1 * e2x.values() + w2 * e2y.values());
    let nl = u1 * u1 * v1x.values() + u1 * u2 * v1y.values() + u2 * u1 * v2x.values() + u2 * u2 * v2y.values();
    let dyu1 = u.u.u1.dy();
    let kato = dyu1.mul(&rot_c).integral();
    let s = &u.omega;
    Ok(Pairings {
        gap_sq: l2_norm(&w)?.powi(2),
        corr: u.u.dot(&cv),
        corr_rate: u.u.dot(&corr.time_derivative(k)),
        rot_v: u.omega.mul(&v.omega).integral(),
        strain: int(&strain, s),
        nonlinear: int(&nl, s),
        rot_corr: u.omega.mul(&rot_c).integral(),
        rot_corr_abs: u.omega.zip_with(&rot_c, |a, b| (a * b).abs()).integral(),
        rot_corr_ibp: -kato - u.u.u2.mul(&corr.rot_dx(k)).integral(),
        kato,
    })
}

/// Evaluates every term of the identity at each stored snapshot.
///
/// Field pairings are integrated in time over the snapshots, dissipation
/// terms over the dense traces.
pub fn evaluate_identity(u: &Trajectory, v: &Trajectory, corr: &Corrector) -> Result<IdentityBudget> {
    check_aligned(u, v)?;
    if !v.is_euler() {
        return Err(Error::Parameter("reference trajectory must be an Euler run".into()));
    }
    check_frames(u, corr)?;
    let eps = u.config.eps;
    let a = u.a_eps;
    let dense_t = u.dense.times();
    let slip = cumulative_trapezoid(&dense_t, &u.dense.series(|s| s.slip_sq));
    let enst = cumulative_trapezoid(&dense_t, &u.dense.series(|s| s.enstrophy));
    let steps = u.snapshot_steps();
    let times = u.snapshot_times();

    let p: Vec<Pairings> = (0..times.len())
        .map(|k| pairings(&u.snapshots[k], &v.snapshots[k], corr, k))
        .collect::<Result<_>>()?;
    let series = |f: fn(&Pairings) -> f64| p.iter().map(f).collect::<Vec<_>>();
    let running = |f: fn(&Pairings) -> f64| cumulative_trapezoid(&times, &series(f));

    let n = times.len();
    let mut b = IdentityBudget {
        lhs: series(|p| p.gap_sq),
        slip_dissipation: steps.iter().map(|&s| -2.0 * eps * a * slip[s]).collect(),
        bulk_dissipation: steps.iter().map(|&s| -2.0 * eps * enst[s]).collect(),
        initial_gap: vec![p[0].gap_sq; n],
        corrector_now: series(|p| -2.0 * p.corr),
        corrector_initial: vec![2.0 * p[0].corr; n],
        corrector_rate: running(|p| p.corr_rate).iter().map(|v| 2.0 * v).collect(),
        viscous_euler: running(|p| p.rot_v).iter().map(|v| 2.0 * eps * v).collect(),
        strain: running(|p| p.strain).iter().map(|v| -2.0 * v).collect(),
        nonlinear: running(|p| p.nonlinear).iter().map(|v| 2.0 * v).collect(),
        viscous_corrector: running(|p| p.rot_corr).iter().map(|v| -2.0 * eps * v).collect(),
        viscous_corrector_ibp: running(|p| p.rot_corr_ibp).iter().map(|v| -2.0 * eps * v).collect(),
        viscous_corrector_scale: running(|p| p.rot_corr_abs).iter().map(|v| 2.0 * eps * v).collect(),
        kato_pairing: series(|p| p.kato),
        times,
        residual: Vec::new(),
    };
    b.residual = (0..n)
        .map(|k| b.lhs[k] - b.terms().iter().map(|(_, s)| s[k]).sum::<f64>())
        .collect();
    Ok(b)
}

/// Components of the corrector nonlinear term and the quantities bounding them.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct HardySample {
    pub t: f64,
    /// `int u2^2 d_y V2`.
    pub u2u2: f64,
    /// `kappa eps ||grad u||^2`.
    pub u2u2_bound: f64,
    /// `int u1 u2 d_x V2`.
    pub u1u2_dx: f64,
    /// `kappa eps ||u|| ||grad u||`.
    pub u1u2_dx_bound: f64,
    /// `int u1 u2 d_y V1`.
    pub u1u2_dy: f64,
    /// The same after integration by parts:
    /// `-1/2 int u1^2 d_x V1 - int d_y u1 u2 V1`.
    pub u1u2_dy_ibp: f64,
    /// `int u1^2 d_x V1`.
    pub u1u1: f64,
    /// `(kappa eps)^(1/2) ||u1 - v1||^2_{L^4} + kappa eps ||v||^2_inf`.
    pub u1u1_bound: f64,
    /// `sup |y^2 d_y V2|`.
    pub hardy_weight: f64,
    /// `<u (x) u, grad V>`.
    pub total: f64,
}

/// Per-sample measurements plus the worst measured constants.
#[derive(Debug, Clone, Default, Serialize)]
pub struct HardyReport {
    pub width: f64,
    pub samples: Vec<HardySample>,
    pub c_u2u2: f64,
    pub c_u1u2_dx: f64,
    pub c_u1u1: f64,
    /// `max |u1u2_dy - u1u2_dy_ibp|` relative to `max |u1u2_dy|`.
    pub ibp_gap: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a.abs() / b
    }
}

/// Measures the pieces of `<u (x) u, grad V>` for one velocity field against
/// frame `k` of the corrector; `v` enables the interpolation bound of the
/// `u1^2` piece.
pub fn hardy_sample(u: &VectorField, v: Option<&VectorField>, corr: &Corrector, k: usize) -> Result<HardySample> {
    let w = corr.width();
    let cv = corr.field(k);
    let [v1x, v1y, v2x, v2y] = corr.gradient(k);
    let (u1, u2) = (&u.u1, &u.u2);
    let g2 = grad_sq(u);
    let ul2 = l2_norm(u)?;
    let u1u1 = u1.mul(u1).mul(&v1x).integral();
    let u1u2_dy = u1.mul(u2).mul(&v1y).integral();
    let u1u2_dx = u1.mul(u2).mul(&v2x).integral();
    let u2u2 = u2.mul(u2).mul(&v2y).integral();
    let ibp = -0.5 * u1u1 - u1.dy().mul(u2).mul(&cv.u1).integral();
    let u1u1_bound = match v {
        Some(v) => {
            let d = u1.sub(&v.u1);
            w.sqrt() * lp_norm(&d, 4.0)?.powi(2) + w * linf_norm(v)?.powi(2)
        }
        None => f64::NAN,
    };
    Ok(HardySample {
        t: corr.frames()[k].t,
        u2u2,
        u2u2_bound: w * g2,
        u1u2_dx,
        u1u2_dx_bound: w * ul2 * g2.sqrt(),
        u1u2_dy,
        u1u2_dy_ibp: ibp,
        u1u1,
        u1u1_bound,
        hardy_weight: corr.hardy_weight(k),
        total: u1u1 + u1u2_dy + u1u2_dx + u2u2,
    })
}

/// Hardy-type bounds of the nonlinear corrector term along `u`, with the
/// Euler reference `v` (aligned) for the interpolation piece.
pub fn hardy_term_bounds(u: &Trajectory, v: &Trajectory, corr: &Corrector) -> Result<HardyReport> {
    check_aligned(u, v)?;
    check_frames(u, corr)?;
    let samples: Vec<HardySample> = (0..corr.len())
        .map(|k| hardy_sample(&u.snapshots[k].u, Some(&v.snapshots[k].u), corr, k))
        .collect::<Result<_>>()?;
    let worst = |f: fn(&HardySample) -> f64| samples.iter().map(f).fold(0.0f64, f64::max);
    let scale = worst(|s| s.u1u2_dy.abs());
    let gap = worst(|s| (s.u1u2_dy - s.u1u2_dy_ibp).abs());
    Ok(HardyReport {
        width: corr.width(),
        c_u2u2: worst(|s| ratio(s.u2u2, s.u2u2_bound)),
        c_u1u2_dx: worst(|s| ratio(s.u1u2_dx, s.u1u2_dx_bound)),
        c_u1u1: worst(|s| ratio(s.u1u1, s.u1u1_bound)),
        ibp_gap: if scale == 0.0 { gap } else { gap / scale },
        samples,
    })
}

/// Both sides of the Gronwall form of the limsup inequality at one `eps`.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct LimsupBound {
    /// `sup_t ||u - v||^2`.
    pub lhs: f64,
    /// `exp(2 int_0^T ||grad v||_inf)`.
    pub growth: f64,
    /// `eps |int_0^T <d_y u1, rot V>|`.
    pub kato_term: f64,
    /// `2 eps sup_t |int_0^t <d_y u1, rot V>|`.
    pub kato_sup: f64,
    pub initial_gap: f64,
    /// Smallest `C` with which the integrated inequality (dissipation halved,
    /// `C (kappa eps)^(1/2)` slot) holds at every sample.
    pub ineq_constant: f64,
    /// `growth (initial_gap + C (kappa eps)^(1/2) + kato_sup)`.
    pub rhs: f64,
    /// `lhs / (growth kato_term)`: the constant the limsup form needs here.
    pub limsup_constant: f64,
    /// `sup_t ||u - v|| / (exp(int ||grad v||_inf) ||v0||^(1/2) T^(1/4))`.
    pub short_time_constant: f64,
}

impl LimsupBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
    }
}

/// Measures the constants of the Kato-type bound for one NS/Euler pair.
pub fn kato_limsup_bound(u: &Trajectory, v: &Trajectory, corr: &Corrector) -> Result<LimsupBound> {
    let b = evaluate_identity(u, v, corr)?;
    let eps = u.config.eps;
    let steps = v.snapshot_steps();
    let grad_v: Vec<f64> = steps.iter().map(|&s| v.dense.samples[s].grad_inf).collect();
    let dense_t = v.dense.times();
    let grad_int = trapezoid(&dense_t, &v.dense.series(|s| s.grad_inf));
    let growth = (2.0 * grad_int).exp();
    let t = &b.times;
    let kato_run = cumulative_trapezoid(t, &b.kato_pairing);
    let gron = cumulative_trapezoid(t, &grad_v.iter().zip(&b.lhs).map(|(g, l)| 2.0 * g * l).collect::<Vec<_>>());
    let root = corr.width().sqrt();
    let mut c = 0.0f64;
    for k in 0..t.len() {
        let known = b.slip_dissipation[k] + 0.5 * b.bulk_dissipation[k] + b.initial_gap[k] + gron[k] + 2.0 * eps * kato_run[k];
        c = c.max((b.lhs[k] - known) / root);
    }
    let lhs = b.lhs.iter().fold(0.0f64, |m, v| m.max(*v));
    let initial_gap = b.initial_gap.first().copied().unwrap_or(0.0);
    let kato_sup = 2.0 * eps * kato_run.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let kato_term = eps * kato_run.last().copied().unwrap_or(0.0).abs();
    let v0 = l2_norm(&v.initial_state().u)?;
    let t_end = t.last().copied().unwrap_or(0.0);
    let cor = grad_int.exp() * v0.sqrt() * t_end.powf(0.25);
    Ok(LimsupBound {
        lhs,
        growth,
        kato_term,
        kato_sup,
        initial_gap,
        ineq_constant: c,
        rhs: growth * (initial_gap + c * root + kato_sup),
        limsup_constant: ratio(lhs, growth * kato_term),
        short_time_constant: ratio(lhs.sqrt(), cor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrector::{build_corrector, CorrectorFrame, QuarticCutoff};
    use crate::field::{Grid, GridSpec};
    use crate::sim::{run, run_euler, InitialData, SimConfig};
    use std::sync::Arc;

    fn taylor_pair(n: usize, t_end: f64) -> (Trajectory, Trajectory) {
        taylor_pair_on(GridSpec::channel(n, n).with_stretch(3.0), t_end)
    }

    fn taylor_pair_on(spec: GridSpec, t_end: f64) -> (Trajectory, Trajectory) {
        let g = Grid::new(spec).unwrap();
        let cfg = SimConfig::new(spec, 1e-2, 0.0, 0.0, t_end);
        let init = InitialData::TaylorVortex { amplitude: 1.0 }.build(&g, &cfg).unwrap();
        let u = run(&cfg, init.clone()).unwrap();
        let v = run_euler(&SimConfig::euler(spec, t_end).with_dt(u.dt), init).unwrap();
        (u, v)
    }

    #[test]
    fn euler_against_itself_has_no_gap() {
        let (_, v) = taylor_pair(32, 0.2);
        let corr = build_corrector(&v, 1.0, 0.05).unwrap();
        let b = evaluate_identity(&v, &v, &corr).unwrap();
        let scale = b.dominant();
        assert!(b.lhs.iter().all(|&l| l == 0.0));
        for s in [&b.slip_dissipation, &b.bulk_dissipation, &b.viscous_euler, &b.viscous_corrector] {
            assert!(s.iter().all(|&x| x == 0.0));
        }
        assert!(b.closure() < 1e-3, "closure {}", b.closure());
        assert!(scale > 0.0);
        let l = kato_limsup_bound(&v, &v, &corr).unwrap();
        assert_eq!(l.lhs, 0.0);
        assert!(l.holds());
    }

    #[test]
    fn zero_flows_give_zero_budget() {
        let spec = GridSpec::channel(16, 64).with_stretch(3.0);
        let g = Grid::new(spec).unwrap();
        let cfg = SimConfig::new(spec, 1e-2, 1.0, 0.5, 0.1).with_dt(0.01);
        let z = ScalarField::zeros(&g);
        let u = run(&cfg, z.clone()).unwrap();
        let v = run_euler(&SimConfig::euler(spec, 0.1).with_dt(0.01), z).unwrap();
        let corr = build_corrector(&v, 1.0, 0.05).unwrap();
        let b = evaluate_identity(&u, &v, &corr).unwrap();
        assert_eq!(b.dominant(), 0.0);
        assert_eq!(b.closure(), 0.0);
        let l = kato_limsup_bound(&u, &v, &corr).unwrap();
        assert_eq!((l.lhs, l.rhs), (0.0, 0.0));
        let h = hardy_term_bounds(&u, &v, &corr).unwrap();
        assert!(h.samples.iter().all(|s| s.total == 0.0 && s.u2u2 == 0.0 && s.u1u1 == 0.0));
    }

    #[test]
    fn taylor_pair_budget_closes() {
        let (u, v) = taylor_pair(64, 0.5);
        let corr = build_corrector(&v, 1.0, u.config.eps).unwrap();
        let b = evaluate_identity(&u, &v, &corr).unwrap();
        let u0_sq = 2.0 * u.dense.samples[0].energy;
        for (t, l) in b.times.iter().zip(&b.lhs) {
            let exact = (1.0 - (-2.0 * u.config.eps * t).exp()).powi(2) * u0_sq;
            assert!((l - exact).abs() <= 1e-3 * exact.max(1e-6), "t {t}: {l} vs {exact}");
        }
        assert!(b.closure() <= 1e-2, "closure {}", b.closure());
        assert!(b.route_gap() <= 1e-3, "route gap {}", b.route_gap());
        let mut csv = Vec::new();
        b.write_table(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,term,value"));
        assert_eq!(text.lines().count(), 1 + b.times.len() * (b.terms().len() + 3));
    }

    #[test]
    fn misaligned_corrector_is_rejected() {
        let (u, v) = taylor_pair(32, 0.2);
        let (_, w) = taylor_pair(32, 0.1);
        let corr = build_corrector(&w, 1.0, 0.05).unwrap();
        assert!(matches!(evaluate_identity(&u, &v, &corr), Err(Error::Alignment(_))));
    }

    fn frames(grid: &Arc<Grid>) -> Vec<CorrectorFrame> {
        let g: Vec<f64> = grid.xs().iter().map(|x| x.cos()).collect();
        vec![CorrectorFrame {
            t: 0.0,
            rate: vec![0.0; g.len()],
            trace: g,
        }]
    }

    #[test]
    fn hardy_ratio_is_bounded_for_wall_vanishing_normal_velocity() {
        let grid = Grid::new(GridSpec::channel(32, 256).with_stretch(3.5)).unwrap();
        let u = VectorField::from_fn(&grid, |x, y| (x.sin() * (-y).exp(), y * (1.0 + 0.5 * x.sin()) * (-y * y).exp()));
        let ratios: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&k| {
                let c = Corrector::from_traces(&grid, k, 0.2, frames(&grid), Arc::new(QuarticCutoff)).unwrap();
                let s = hardy_sample(&u, None, &c, 0).unwrap();
                assert!(s.u2u2 != 0.0);
                s.u2u2.abs() / s.u2u2_bound
            })
            .collect();
        assert!(ratios.iter().all(|r| r.is_finite() && *r <= ratios[0] * (1.0 + 1e-9)), "{ratios:?}");
    }

    #[test]
    fn hardy_weight_scales_quadratically_in_width() {
        let grid = Grid::new(GridSpec::channel(32, 256).with_stretch(3.5)).unwrap();
        let weight = |k: f64| {
            Corrector::from_traces(&grid, k, 0.2, frames(&grid), Arc::new(QuarticCutoff))
                .unwrap()
                .hardy_weight(0)
        };
        let slope = (weight(0.4) / weight(0.1)).ln() / 4f64.ln();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn taylor_normal_term_cancels_in_x() {
        let (_, v) = taylor_pair_on(GridSpec::channel(32, 128).with_stretch(3.5), 0.1);
        let corr = build_corrector(&v, 0.4, 0.1).unwrap();
        let h = hardy_term_bounds(&v, &v, &corr).unwrap();
        for s in &h.samples {
            assert!(s.u2u2.abs() <= 1e-10 * s.u2u2_bound, "{} vs {}", s.u2u2, s.u2u2_bound);
        }
        assert!(h.ibp_gap < 1e-2, "ibp gap {}", h.ibp_gap);
    }
}
