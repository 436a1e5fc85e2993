//! Norms, traces and the Gevrey-weighted mode norm.

use std::borrow::Cow;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::fields::{ScalarField, VectorField};
use super::grid::Grid;
use super::stencil::CellGram;
use crate::error::{Error, Result};

/// Anything with a pointwise magnitude on a grid.
pub trait Measurable {
    fn grid(&self) -> &Grid;
    fn check_finite(&self) -> Result<()>;
    fn magnitude(&self) -> Cow<'_, Array2<f64>>;
    /// Scalar components, for quadratic norms.
    fn components(&self) -> Vec<&Array2<f64>>;
}

impl Measurable for ScalarField {
    fn grid(&self) -> &Grid {
        ScalarField::grid(self)
    }
    fn check_finite(&self) -> Result<()> {
        ScalarField::check_finite(self)
    }
    fn magnitude(&self) -> Cow<'_, Array2<f64>> {
        Cow::Owned(self.values().mapv(f64::abs))
    }
    fn components(&self) -> Vec<&Array2<f64>> {
        vec![self.values()]
    }
}

impl Measurable for VectorField {
    fn grid(&self) -> &Grid {
        self.u1.grid()
    }
    fn check_finite(&self) -> Result<()> {
        VectorField::check_finite(self)
    }
    fn magnitude(&self) -> Cow<'_, Array2<f64>> {
        Cow::Owned(VectorField::magnitude(self).into_values())
    }
    fn components(&self) -> Vec<&Array2<f64>> {
        vec![self.u1.values(), self.u2.values()]
    }
}

fn weighted_sum(grid: &Grid, wy: &[f64], a: &Array2<f64>, f: impl Fn(f64) -> f64) -> f64 {
    let dx = grid.dx();
    wy.iter()
        .zip(a.rows())
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, row)| w * dx * row.iter().map(|&v| f(v)).sum::<f64>())
        .sum()
}

/// `\int (P f)^2` over the given cells, `P` the piecewise-cubic interpolant in y.
fn gram_sum(grid: &Grid, cells: &[CellGram], a: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    for cell in cells {
        let s = cell.start;
        for x in 0..a.ncols() {
            total += cell.square([a[[s, x]], a[[s + 1, x]], a[[s + 2, x]], a[[s + 3, x]]]);
        }
    }
    total * grid.dx()
}

/// `||f||_{L^2}`: exact (rectangle) rule in the periodic direction; in y the
/// square of the cubic interpolant is integrated exactly, so strip norms never
/// exceed it.
pub fn l2_norm<F: Measurable + ?Sized>(f: &F) -> Result<f64> {
    f.check_finite()?;
    let g = f.grid();
    let cells = g.quadrature().full_gram();
    Ok(f.components().iter().map(|a| gram_sum(g, cells, a)).sum::<f64>().max(0.0).sqrt())
}

pub fn lp_norm<F: Measurable + ?Sized>(f: &F, p: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("L^p norm needs p in [2, inf), got {p}")));
    }
    if p == 2.0 {
        return l2_norm(f);
    }
    f.check_finite()?;
    let g = f.grid();
    let m = f.magnitude();
    let scale = m.iter().fold(0.0f64, |a, &v| a.max(v));
    if scale == 0.0 {
        return Ok(0.0);
    }
    // scaled to keep |f/scale|^p in range for large p
    let s = weighted_sum(g, g.wy(), &m, |v| (v / scale).powf(p));
    Ok(scale * s.max(0.0).powf(1.0 / p))
}

pub fn linf_norm<F: Measurable + ?Sized>(f: &F) -> Result<f64> {
    f.check_finite()?;
    Ok(f.magnitude().iter().fold(0.0f64, |a, &v| a.max(v)))
}

fn check_strip(grid: &Grid, y_max: f64, min_nodes: usize) -> Result<()> {
    if !(y_max > 0.0 && y_max <= grid.ly()) {
        return Err(Error::Parameter(format!("strip height {y_max} outside (0, ly]")));
    }
    let have = grid.nodes_below(y_max);
    if have < min_nodes {
        let hint = grid
            .spec()
            .clustered_for_strip(y_max, min_nodes)
            .map(|s| format!("stretch >= {:.3} at ny = {}", s.stretch, s.ny))
            .unwrap_or_else(|_| "a larger ny".to_string());
        return Err(Error::Resolution(format!(
            "strip y < {y_max:e} holds {have} nodes, {min_nodes} required; use {hint}"
        )));
    }
    Ok(())
}

/// `||f||_{L^2(\{y < y_max\})}` with partial-cell weighting at `y_max`.
pub fn strip_l2_norm(f: &ScalarField, y_max: f64) -> Result<f64> {
    Ok(strip_l2_sq(f, y_max, 2)?.sqrt())
}

pub(crate) fn strip_l2_sq(f: &ScalarField, y_max: f64, min_nodes: usize) -> Result<f64> {
    f.check_finite()?;
    let g = f.grid();
    check_strip(g, y_max, min_nodes)?;
    let cells = g.quadrature().gram_cells(y_max);
    Ok(gram_sum(g, &cells, f.values()).max(0.0))
}

pub(crate) fn require_strip(grid: &Grid, y_max: f64, min_nodes: usize) -> Result<()> {
    check_strip(grid, y_max, min_nodes)
}

/// Which wall trace to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Value,
    YDerivative,
}

/// `f(., 0)` or the one-sided `d_y f(., 0)`.
pub fn boundary_trace(f: &ScalarField, which: TraceKind) -> Vec<f64> {
    match which {
        TraceKind::Value => f.row(0),
        TraceKind::YDerivative => f.grid().d1().apply_row_at(f.values(), 0),
    }
}

/// L^2 norm of an x-profile over one period.
pub fn profile_l2(grid: &Grid, profile: &[f64]) -> f64 {
    (profile.iter().map(|v| v * v).sum::<f64>() * grid.dx()).sqrt()
}

/// Parameters of the Gevrey class `X_{gamma,K}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub gamma: f64,
    pub k: f64,
}

impl GevreyParams {
    pub fn new(gamma: f64, k: f64) -> Result<Self> {
        let gp = Self { gamma, k };
        gp.validate()?;
        Ok(gp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Parameter(format!("gevrey gamma {} not in [0,1]", self.gamma)));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::Parameter(format!("gevrey weight K = {} must be >= 0", self.k)));
        }
        Ok(())
    }
}

/// Natural-log cap on the weighted mode norm.
pub const GEVREY_LOG_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyNorm {
    /// `exp(log_value)`, or `inf` when flagged.
    pub value: f64,
    pub log_value: f64,
    /// Mode index attaining the supremum.
    pub argmax: usize,
    pub overflow: bool,
}

/// `sup_n (1+|n|)^10 e^{K|n|^gamma} ||f_n||_{L^2_y}` over the resolved modes.
pub fn gevrey_norm(f: &ScalarField, gp: GevreyParams) -> Result<GevreyNorm> {
    gevrey_norm_capped(f, gp, GEVREY_LOG_CAP)
}

pub fn gevrey_norm_capped(f: &ScalarField, gp: GevreyParams, log_cap: f64) -> Result<GevreyNorm> {
    gp.validate()?;
    f.check_finite()?;
    let g = f.grid();
    let c = f.modes();
    let wy = g.wy();
    let mut best = GevreyNorm {
        value: 0.0,
        log_value: f64::NEG_INFINITY,
        argmax: 0,
        overflow: false,
    };
    for n in 0..g.n_modes() {
        let sq: f64 = wy.iter().zip(c.column(n)).map(|(w, z)| w * z.norm_sqr()).sum();
        if sq <= 0.0 {
            continue;
        }
        let nn = n as f64;
        let log_w = 10.0 * (1.0 + nn).ln() + gp.k * nn.powf(gp.gamma);
        let lv = log_w + 0.5 * sq.ln();
        if lv > best.log_value {
            best.log_value = lv;
            best.argmax = n;
        }
    }
    if best.log_value == f64::NEG_INFINITY {
        return Ok(best);
    }
    if best.log_value > log_cap {
        best.overflow = true;
        best.value = f64::INFINITY;
    } else {
        best.value = best.log_value.exp();
    }
    Ok(best)
}

/// L^2 norm evaluated from the mode view (Parseval).
pub fn l2_norm_modal(f: &ScalarField) -> f64 {
    let g = f.grid();
    let c = f.modes();
    let nm = g.n_modes();
    let mut total = 0.0;
    for cell in g.quadrature().full_gram() {
        let s = cell.start;
        for m in 0..nm {
            let mult = if m == 0 || m == nm - 1 { 1.0 } else { 2.0 };
            total += mult * cell.square_complex([c[[s, m]], c[[s + 1, m]], c[[s + 2, m]], c[[s + 3, m]]]);
        }
    }
    (total * g.lx()).sqrt()
}
