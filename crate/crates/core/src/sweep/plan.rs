use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criteria::{layer_resolved, STRIP_MIN_NODES};
use crate::error::{Error, Result};
use crate::field::{Grid, GridSpec};
use crate::sim::{InitialData, SimConfig};

fn default_lx() -> f64 {
    2.0 * PI
}
fn default_ly() -> f64 {
    PI
}
fn default_stretch() -> f64 {
    2.5
}
fn default_order() -> usize {
    4
}
fn default_cfl() -> f64 {
    0.25
}
fn default_stride() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_tol_bc() -> f64 {
    1e-6
}

/// `[grid]` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "default_lx")]
    pub lx: f64,
    #[serde(default = "default_ly")]
    pub ly: f64,
    #[serde(default = "default_stretch")]
    pub stretch: f64,
    #[serde(default = "default_order")]
    pub order: usize,
}

impl From<GridSection> for GridSpec {
    fn from(g: GridSection) -> Self {
        GridSpec::channel(g.nx, g.ny)
            .with_extent(g.lx, g.ly)
            .with_stretch(g.stretch)
            .with_order(g.order)
    }
}

/// `[numerics]` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Fixed step; otherwise the Euler reference picks one from `cfl` and
    /// every NS run reuses it.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_tol_bc")]
    pub tol_bc: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: None,
            cfl: default_cfl(),
            snapshot_stride: default_stride(),
            dealias: true,
            tol_bc: default_tol_bc(),
        }
    }
}

/// An `(eps, beta)` sweep over one initial-data spec.
///
/// Plan files are TOML; top-level keys use the symbols `eps`, `a`, `beta`,
/// `kappa` and `T`, followed by `[grid]`, `[numerics]` and `[initial]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub name: String,
    /// Viscosities, strictly decreasing.
    pub eps: Vec<f64>,
    /// Slip exponents in `[0, 1]`.
    pub beta: Vec<f64>,
    /// Strip factors in `(0, 1]`.
    pub kappa: Vec<f64>,
    /// Extra `L^p` gap exponents.
    #[serde(default)]
    pub p: Vec<f64>,
    /// Slip constant.
    pub a: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub grid: GridSection,
    #[serde(default)]
    pub numerics: Numerics,
    pub initial: InitialData,
}

impl SweepPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Plan(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Plan(e.to_string()))
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.into()
    }

    /// NS configuration of one run; strips are `kappa * eps`.
    pub fn config(&self, eps: f64, beta: f64) -> SimConfig {
        let n = &self.numerics;
        SimConfig {
            dt: n.dt,
            cfl: n.cfl,
            dealias: n.dealias,
            snapshot_stride: n.snapshot_stride,
            tol_bc: n.tol_bc,
            strips: self.kappa.iter().map(|k| k * eps).collect(),
            ..SimConfig::new(self.grid_spec(), eps, self.a, beta, self.t_end)
        }
    }

    pub fn euler_config(&self) -> SimConfig {
        SimConfig {
            a: 0.0,
            beta: 0.0,
            strips: Vec::new(),
            ..self.config(0.0, 0.0)
        }
    }

    /// `(eps, beta)` pairs in execution order.
    pub fn runs(&self) -> Vec<(f64, f64)> {
        self.beta
            .iter()
            .flat_map(|&b| self.eps.iter().map(move |&e| (e, b)))
            .collect()
    }

    /// Checks everything that would make the sweep meaningless before any
    /// run starts, including the Kato strip at the smallest `kappa eps`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Plan(m));
        if self.eps.is_empty() || self.beta.is_empty() || self.kappa.is_empty() {
            return bad("eps, beta and kappa lists must be nonempty".into());
        }
        if self.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("eps values must be positive".into());
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps list must be strictly decreasing".into());
        }
        if self.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return bad("beta values must lie in [0, 1]".into());
        }
        if self.kappa.iter().any(|k| !(*k > 0.0 && *k <= 1.0)) {
            return bad("kappa values must lie in (0, 1]".into());
        }
        if self.p.iter().any(|p| !(*p >= 2.0 && p.is_finite())) {
            return bad("p values must be finite and >= 2".into());
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return bad("a must be >= 0".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be >= 1".into());
        }
        for (e, b) in self.runs() {
            self.config(e, b).validate().map_err(|e| Error::Plan(e.to_string()))?;
        }
        let grid = Grid::new(self.grid_spec()).map_err(|e| Error::Plan(e.to_string()))?;
        let eps_min = self.eps[self.eps.len() - 1];
        let kappa_min = self.kappa.iter().copied().fold(f64::INFINITY, f64::min);
        let strip = kappa_min * eps_min;
        let nodes = grid.nodes_below(strip);
        if nodes < STRIP_MIN_NODES {
            let hint = self
                .grid_spec()
                .clustered_for_strip(strip, STRIP_MIN_NODES)
                .map(|s| format!("; stretch {:.3} would do", s.stretch))
                .unwrap_or_default();
            return bad(format!(
                "strip y < {strip:e} holds {nodes} nodes on the declared grid, {STRIP_MIN_NODES} needed{hint}"
            ));
        }
        Ok(())
    }

    /// Whether the run at `(eps, beta)` passes the layer-resolution checks.
    pub fn resolved(&self, grid: &Grid, eps: f64, beta: f64) -> bool {
        layer_resolved(grid, eps, self.config(eps, beta).a_eps(), &self.kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
name = "blob"
# viscosity eps, slip constant a, slip exponent beta, strip factor kappa, final time T
eps = [1e-2, 1e-3]
beta = [0.5]
kappa = [0.4]
p = [4.0]
a = 1.0
T = 0.5

[grid]
nx = 32
ny = 256
stretch = 4.0

[numerics]
snapshot_stride = 5

[initial]
kind = "offset_blob"
amplitude = 5.0
x0 = 3.14
y0 = 1.2
sigma = 0.35
"#;

    #[test]
    fn parses_and_round_trips() {
        let p = SweepPlan::from_toml(SAMPLE).unwrap();
        p.validate().unwrap();
        assert_eq!(p.grid_spec().lx, 2.0 * PI);
        assert_eq!(p.config(1e-3, 0.5).strips, vec![4e-4]);
        assert_eq!(p.runs(), vec![(1e-2, 0.5), (1e-3, 0.5)]);
        let again = SweepPlan::from_toml(&p.to_toml().unwrap()).unwrap();
        assert_eq!(p, again);
        assert!(p.euler_config().is_euler());
    }

    #[test]
    fn rejects_bad_lists() {
        let p = SweepPlan::from_toml(SAMPLE).unwrap();
        for f in [
            |p: &mut SweepPlan| p.eps.clear(),
            |p: &mut SweepPlan| p.eps = vec![1e-3, 1e-2],
            |p: &mut SweepPlan| p.beta = vec![1.5],
            |p: &mut SweepPlan| p.kappa = vec![0.0],
            |p: &mut SweepPlan| p.p = vec![1.0],
            |p: &mut SweepPlan| p.eps = vec![1e-2, 1e-6],
        ] {
            let mut q = p.clone();
            f(&mut q);
            assert!(matches!(q.validate(), Err(Error::Plan(_))));
        }
        assert!(SweepPlan::from_toml("name = 1").is_err());
    }
}
