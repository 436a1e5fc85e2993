//! Thin-layer boundary corrector built from the Euler wall trace, and the
//! energy identity it enters.

mod identity;

use std::fmt::Debug;
use std::sync::Arc;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::norms::l2_norm;
use crate::field::{Grid, ScalarField, VectorField};
use crate::series::rate_of_change;
use crate::sim::Trajectory;
use crate::verify::oracle::composite_gauss;

pub use identity::{
    evaluate_identity, hardy_term_bounds, kato_limsup_bound, HardyReport, HardySample, IdentityBudget, LimsupBound,
};

/// Cutoff profile `zeta` on `[0, inf)` with `zeta(0) = 0`, `zeta'(0) = -1`
/// and `zeta = 0` on `[1, inf)`.
pub trait Cutoff: Debug + Send + Sync {
    fn value(&self, y: f64) -> f64;
    fn slope(&self, y: f64) -> f64;
    fn curvature(&self, y: f64) -> f64;
}

/// `zeta(Y) = -Y (1 - Y)^4`, C^2 at `Y = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuarticCutoff;

impl Cutoff for QuarticCutoff {
    fn value(&self, y: f64) -> f64 {
        if y >= 1.0 {
            0.0
        } else {
            -y * (1.0 - y).powi(4)
        }
    }

    fn slope(&self, y: f64) -> f64 {
        if y >= 1.0 {
            0.0
        } else {
            (1.0 - y).powi(3) * (5.0 * y - 1.0)
        }
    }

    fn curvature(&self, y: f64) -> f64 {
        if y >= 1.0 {
            0.0
        } else {
            (1.0 - y).powi(2) * (8.0 - 20.0 * y)
        }
    }
}

/// `sqrt(int_0^1 zeta'^2)`: the `L^2` constant of the tangential component.
pub fn profile_constant(c: &dyn Cutoff) -> f64 {
    let (ys, ws) = composite_gauss(0.0, 1.0, 8, 10);
    ys.iter().zip(&ws).map(|(&y, w)| w * c.slope(y).powi(2)).sum::<f64>().sqrt()
}

/// `max |zeta'|` sampled on a fine grid of `[0, 1]`.
pub fn max_slope(c: &dyn Cutoff) -> f64 {
    (0..=10_000).map(|k| c.slope(k as f64 * 1e-4).abs()).fold(0.0, f64::max)
}

/// Wall trace `g(x)` and its rate `d_t g(x)` at one sample time.
#[derive(Debug, Clone)]
pub struct CorrectorFrame {
    pub t: f64,
    pub trace: Vec<f64>,
    pub rate: Vec<f64>,
}

/// Profile columns `zeta, zeta', zeta''` at the y-nodes for `Y = y / width`.
#[derive(Debug, Clone)]
struct Columns {
    z0: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
}

/// Divergence-free field `V = grad^perp(-w zeta(y/w) g(t, x))`, `w = kappa eps`:
/// `V1 = -zeta'(y/w) g`, `V2 = w zeta(y/w) d_x g`.
#[derive(Debug, Clone)]
pub struct Corrector {
    pub kappa: f64,
    pub eps: f64,
    grid: Arc<Grid>,
    cutoff: Arc<dyn Cutoff>,
    cols: Columns,
    frames: Vec<CorrectorFrame>,
    checks: CorrectorChecks,
}

/// Invariant measurements taken at build time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrectorChecks {
    /// `max |V1(x, 0) - g|`.
    pub wall_mismatch: f64,
    /// `max |V2(x, 0)|`.
    pub wall_normal: f64,
    /// `max |V|` at nodes with `y >= kappa eps`.
    pub outside_support: f64,
    /// `max_t ||d_x V1 + d_y V2|| / ||grad V||`.
    pub divergence: f64,
    /// `max_t ||V|| / ((kappa eps)^(1/2) ||g||_{L^2(wall)})`.
    pub l2_ratio: f64,
    /// `sqrt(int zeta'^2)`.
    pub profile_constant: f64,
}

impl Corrector {
    /// Corrector from explicit wall traces on `grid`.
    pub fn from_traces(
        grid: &Arc<Grid>,
        kappa: f64,
        eps: f64,
        frames: Vec<CorrectorFrame>,
        cutoff: Arc<dyn Cutoff>,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) || !(eps > 0.0) {
            return Err(Error::Parameter(format!(
                "corrector needs 0 < kappa <= 1 and eps > 0 (got {kappa}, {eps})"
            )));
        }
        let w = kappa * eps;
        let inside = grid.nodes_below(w);
        if inside < 4 {
            return Err(Error::Resolution(format!(
                "strip y < {w:e} holds {inside} nodes, need 4; raise ny or the stretch"
            )));
        }
        if frames.is_empty() || frames.iter().any(|f| f.trace.len() != grid.nx() || f.rate.len() != grid.nx()) {
            return Err(Error::Data("corrector needs wall traces of length nx".into()));
        }
        let y = grid.y();
        let cols = Columns {
            z0: y.iter().map(|&y| cutoff.value(y / w)).collect(),
            z1: y.iter().map(|&y| cutoff.slope(y / w)).collect(),
            z2: y.iter().map(|&y| cutoff.curvature(y / w)).collect(),
        };
        let mut c = Self {
            kappa,
            eps,
            grid: grid.clone(),
            cols,
            frames,
            cutoff: cutoff.clone(),
            checks: CorrectorChecks {
                wall_mismatch: 0.0,
                wall_normal: 0.0,
                outside_support: 0.0,
                divergence: 0.0,
                l2_ratio: 0.0,
                profile_constant: profile_constant(cutoff.as_ref()),
            },
        };
        c.checks = c.measure_checks()?;
        let ck = &c.checks;
        let gmax = c
            .frames
            .iter()
            .flat_map(|f| f.trace.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if ck.wall_mismatch > 1e-10 * gmax.max(1.0) || ck.wall_normal != 0.0 || ck.outside_support != 0.0 {
            return Err(Error::Data(format!("corrector invariants violated: {ck:?}")));
        }
        if ck.divergence > 1e-8 {
            return Err(Error::Data(format!("corrector divergence {:e} exceeds 1e-8", ck.divergence)));
        }
        Ok(c)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn cutoff(&self) -> &dyn Cutoff {
        self.cutoff.as_ref()
    }

    /// Layer thickness `kappa eps`.
    pub fn width(&self) -> f64 {
        self.kappa * self.eps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[CorrectorFrame] {
        &self.frames
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn checks(&self) -> &CorrectorChecks {
        &self.checks
    }

    /// `sum_k a_k(y) b_k(x)` as a field.
    fn outer(&self, terms: &[(&[f64], &[f64], f64)]) -> ScalarField {
        let (ny, nx) = (self.grid.ny(), self.grid.nx());
        let mut a = Array2::<f64>::zeros((ny, nx));
        for (j, mut row) in a.rows_mut().into_iter().enumerate() {
            for &(col, prof, s) in terms {
                let c = s * col[j];
                if c != 0.0 {
                    row.iter_mut().zip(prof).for_each(|(r, p)| *r += c * p);
                }
            }
        }
        ScalarField::new(self.grid.clone(), a)
    }

    fn derivs(&self, g: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let g1 = self.grid.dx_1d(g);
        let g2 = self.grid.dx_1d(&g1);
        let g3 = self.grid.dx_1d(&g2);
        (g1, g2, g3)
    }

    fn velocity_of(&self, g: &[f64]) -> VectorField {
        let w = self.width();
        let (g1, _, _) = self.derivs(g);
        VectorField::new(
            self.outer(&[(&self.cols.z1, g, -1.0)]),
            self.outer(&[(&self.cols.z0, &g1, w)]),
        )
    }

    /// `V` at frame `k`.
    pub fn field(&self, k: usize) -> VectorField {
        self.velocity_of(&self.frames[k].trace)
    }

    /// `d_t V` at frame `k`.
    pub fn time_derivative(&self, k: usize) -> VectorField {
        self.velocity_of(&self.frames[k].rate)
    }

    /// `[d_x V1, d_y V1, d_x V2, d_y V2]` at frame `k`, y-derivatives exact.
    pub fn gradient(&self, k: usize) -> [ScalarField; 4] {
        let w = self.width();
        let g = &self.frames[k].trace;
        let (g1, g2, _) = self.derivs(g);
        [
            self.outer(&[(&self.cols.z1, &g1, -1.0)]),
            self.outer(&[(&self.cols.z2, g, -1.0 / w)]),
            self.outer(&[(&self.cols.z0, &g2, w)]),
            self.outer(&[(&self.cols.z1, &g1, 1.0)]),
        ]
    }

    /// `rot V = d_x V2 - d_y V1` at frame `k`.
    pub fn rot(&self, k: usize) -> ScalarField {
        let w = self.width();
        let g = &self.frames[k].trace;
        let (_, g2, _) = self.derivs(g);
        self.outer(&[(&self.cols.z0, &g2, w), (&self.cols.z2, g, 1.0 / w)])
    }

    /// `d_x rot V` at frame `k`.
    pub fn rot_dx(&self, k: usize) -> ScalarField {
        let w = self.width();
        let g = &self.frames[k].trace;
        let (g1, _, g3) = self.derivs(g);
        self.outer(&[(&self.cols.z0, &g3, w), (&self.cols.z2, &g1, 1.0 / w)])
    }

    /// `sup |y^2 d_y V2|`, the Hardy weight of the `(u2)^2` term.
    pub fn hardy_weight(&self, k: usize) -> f64 {
        let d = &self.gradient(k)[3];
        self.grid
            .y()
            .iter()
            .zip(d.values().rows())
            .map(|(y, row)| y * y * row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }

    fn measure_checks(&self) -> Result<CorrectorChecks> {
        let w = self.width();
        let dx = self.grid.dx();
        let mut ck = self.checks;
        for k in 0..self.len() {
            let v = self.field(k);
            let g = &self.frames[k].trace;
            for (i, gi) in g.iter().enumerate() {
                ck.wall_mismatch = ck.wall_mismatch.max((v.u1.values()[[0, i]] - gi).abs());
                ck.wall_normal = ck.wall_normal.max(v.u2.values()[[0, i]].abs());
            }
            for (j, &y) in self.grid.y().iter().enumerate() {
                if y >= w {
                    for i in 0..self.grid.nx() {
                        let m = v.u1.values()[[j, i]].abs().max(v.u2.values()[[j, i]].abs());
                        ck.outside_support = ck.outside_support.max(m);
                    }
                }
            }
            // spectral d_x of the nodal V1 against the exact d_y V2
            let grad = self.gradient(k);
            let div = v.u1.dx().add(&grad[3]);
            let scale = grad.iter().map(|f| l2_norm(f).unwrap_or(0.0)).sum::<f64>();
            if scale > 0.0 {
                ck.divergence = ck.divergence.max(l2_norm(&div)? / scale);
            }
            let gl2 = (g.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
            if gl2 > 0.0 {
                ck.l2_ratio = ck.l2_ratio.max(l2_norm(&v)? / (w.sqrt() * gl2));
            }
        }
        Ok(ck)
    }
}

/// Corrector for the Euler trajectory `v`, one frame per stored snapshot.
///
/// The trace rate comes from second-order differences of the dense wall traces.
pub fn build_corrector(v: &Trajectory, kappa: f64, eps: f64) -> Result<Corrector> {
    build_corrector_with(v, kappa, eps, Arc::new(QuarticCutoff))
}

pub fn build_corrector_with(v: &Trajectory, kappa: f64, eps: f64, cutoff: Arc<dyn Cutoff>) -> Result<Corrector> {
    if !v.is_euler() {
        return Err(Error::Parameter("corrector is built from an Euler trajectory".into()));
    }
    let slip = &v.dense.slip;
    if slip.is_empty() || slip.len() != v.dense.len() {
        return Err(Error::Data("Euler trajectory has no dense wall traces".into()));
    }
    let rates = rate_of_change(slip, v.dt)
        .ok_or_else(|| Error::Data("need at least three wall-trace samples for d_t g".into()))?;
    let frames = v
        .snapshot_steps()
        .into_iter()
        .zip(v.snapshot_times())
        .map(|(n, t)| CorrectorFrame {
            t,
            trace: slip[n].clone(),
            rate: rates[n].clone(),
        })
        .collect();
    Corrector::from_traces(&v.grid, kappa, eps, frames, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn cos_frames(grid: &Arc<Grid>) -> Vec<CorrectorFrame> {
        let g: Vec<f64> = grid.xs().iter().map(|x| x.cos()).collect();
        vec![CorrectorFrame {
            t: 0.0,
            rate: vec![0.0; g.len()],
            trace: g,
        }]
    }

    #[test]
    fn quartic_profile_calculus() {
        let c = QuarticCutoff;
        assert_eq!(c.value(0.0), 0.0);
        assert_eq!(c.slope(0.0), -1.0);
        assert_eq!(c.value(1.0), 0.0);
        assert!(c.slope(1.0 - 1e-9).abs() < 1e-20 && c.curvature(1.0 - 1e-9).abs() < 1e-15);
        let h = 1e-6;
        for y in [0.1, 0.4, 0.77] {
            assert!(((c.value(y + h) - c.value(y - h)) / (2.0 * h) - c.slope(y)).abs() < 1e-8);
            assert!(((c.slope(y + h) - c.slope(y - h)) / (2.0 * h) - c.curvature(y)).abs() < 1e-8);
        }
        assert!((max_slope(&c) - 1.0).abs() < 1e-12);
        // with s = 1 - Y: int_0^1 s^6 (4 - 5s)^2 ds = 16/7 - 5 + 25/9 = 4/63
        assert!((profile_constant(&c) - (4.0f64 / 63.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn cosine_trace_gives_matching_wall_value() {
        let grid = Grid::new(GridSpec::channel(32, 96).with_stretch(3.0)).unwrap();
        let c = Corrector::from_traces(&grid, 0.5, 0.1, cos_frames(&grid), Arc::new(QuarticCutoff)).unwrap();
        let v = c.field(0);
        for (i, x) in grid.xs().iter().enumerate() {
            assert!((v.u1.values()[[0, i]] - x.cos()).abs() < 1e-12);
        }
        let sup = v.u1.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((sup - max_slope(&QuarticCutoff)).abs() < 1e-12);
        let ck = c.checks();
        assert!(ck.divergence < 1e-12 && ck.outside_support == 0.0 && ck.wall_normal == 0.0);
    }

    #[test]
    fn halving_kappa_scales_norm_by_root_two() {
        let grid = Grid::new(GridSpec::channel(32, 256).with_stretch(3.5)).unwrap();
        let norm = |k: f64| {
            let c = Corrector::from_traces(&grid, k, 0.2, cos_frames(&grid), Arc::new(QuarticCutoff)).unwrap();
            (l2_norm(&c.field(0)).unwrap(), grid.nodes_below(k * 0.2))
        };
        let (a, na) = norm(0.4);
        let (b, nb) = norm(0.2);
        assert!(nb < na);
        assert!((b / a - 0.5f64.sqrt()).abs() < 0.02 * 0.5f64.sqrt(), "ratio {}", b / a);
    }

    #[test]
    fn zero_trace_gives_zero_field_and_thin_strip_is_rejected() {
        let grid = Grid::new(GridSpec::channel(16, 64).with_stretch(3.0)).unwrap();
        let f = vec![CorrectorFrame {
            t: 0.0,
            trace: vec![0.0; 16],
            rate: vec![0.0; 16],
        }];
        let c = Corrector::from_traces(&grid, 1.0, 0.1, f.clone(), Arc::new(QuarticCutoff)).unwrap();
        assert!(c.field(0).u1.is_zero() && c.field(0).u2.is_zero());
        let thin = Corrector::from_traces(&grid, 0.1, 1e-4, f, Arc::new(QuarticCutoff));
        assert!(matches!(thin, Err(Error::Resolution(_))));
    }
}
