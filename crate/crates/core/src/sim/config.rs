use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridSpec;

fn default_true() -> bool {
    true
}

fn default_stride() -> usize {
    1
}

fn default_cfl() -> f64 {
    0.25
}

fn default_tol_bc() -> f64 {
    1e-6
}

/// Hard cap on the directional CFL number.
pub const CFL_CAP: f64 = 0.5;

/// Physical and numerical parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Viscosity; exactly 0 selects the Euler solver.
    pub eps: f64,
    /// Slip constant `a`.
    pub a: f64,
    /// Slip exponent: the wall friction is `a * eps^(-beta)`.
    pub beta: f64,
    pub t_end: f64,
    /// Fixed step; `None` picks one from the initial velocity and `cfl`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub grid: GridSpec,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Strip heights whose wall-strip norms are traced every step.
    #[serde(default)]
    pub strips: Vec<f64>,
    /// Navier residual tolerance relative to `||u||`.
    #[serde(default = "default_tol_bc")]
    pub tol_bc: f64,
}

impl SimConfig {
    pub fn new(grid: GridSpec, eps: f64, a: f64, beta: f64, t_end: f64) -> Self {
        Self {
            eps,
            a,
            beta,
            t_end,
            dt: None,
            cfl: default_cfl(),
            grid,
            dealias: true,
            snapshot_stride: 1,
            strips: Vec::new(),
            tol_bc: default_tol_bc(),
        }
    }

    pub fn euler(grid: GridSpec, t_end: f64) -> Self {
        Self::new(grid, 0.0, 0.0, 0.0, t_end)
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_strips(mut self, strips: Vec<f64>) -> Self {
        self.strips = strips;
        self
    }

    pub fn is_euler(&self) -> bool {
        self.eps == 0.0
    }

    /// Wall friction `a^eps = a eps^(-beta)`; 0 for Euler runs.
    pub fn a_eps(&self) -> f64 {
        if self.is_euler() || self.a == 0.0 {
            0.0
        } else {
            self.a * self.eps.powf(-self.beta)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps = {} must be finite and >= 0", self.eps));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return bad(format!("a = {} must be finite and >= 0", self.a));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta = {} must be >= 0", self.beta));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt = {dt} must be positive"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_CAP) {
            return bad(format!("cfl target {} must lie in (0, {CFL_CAP}]", self.cfl));
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be >= 1".into());
        }
        if self.strips.iter().any(|&s| !(s > 0.0 && s <= self.grid.ly)) {
            return bad("strip heights must lie in (0, ly]".into());
        }
        if !self.a_eps().is_finite() {
            return bad("a eps^(-beta) is not finite".into());
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands exactly on `t_end`.
    pub fn steps_for(&self, dt_max: f64) -> (usize, f64) {
        let n = (self.t_end / dt_max - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friction_and_validation() {
        let g = GridSpec::channel(16, 32);
        let c = SimConfig::new(g, 1e-2, 2.0, 0.5, 1.0);
        assert!((c.a_eps() - 20.0).abs() < 1e-12);
        assert!(c.validate().is_ok());
        assert_eq!(SimConfig::euler(g, 1.0).a_eps(), 0.0);
        assert!(SimConfig::new(g, -1.0, 0.0, 0.0, 1.0).validate().is_err());
        assert!(SimConfig::new(g, 1e-2, 0.0, 0.0, 0.0).validate().is_err());
        let (n, dt) = c.steps_for(0.3);
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(c.steps_for(0.25).0, 4);
    }

    #[test]
    fn toml_round_trip_with_defaults() {
        let text = r#"
            eps = 0.001
            a = 1.0
            beta = 0.5
            t_end = 2.0
            [grid]
            nx = 32
            ny = 64
            lx = 6.283185307179586
            ly = 3.141592653589793
            stretch = 3.0
        "#;
        let c: SimConfig = toml::from_str(text).unwrap();
        assert!(c.dealias && c.snapshot_stride == 1 && c.dt.is_none());
        assert_eq!(c.grid.order, 4);
        let back: SimConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
