//! Named initial-data generators.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, VectorField};

/// Initial vorticity, optionally with the x-mean velocity profile.
///
/// Without a profile the mean flow is taken from the vorticity with zero
/// net flux (`psi = 0` at both walls).
#[derive(Debug, Clone)]
pub struct Initial {
    pub omega: ScalarField,
    pub mean_velocity: Option<Vec<f64>>,
}

impl Initial {
    pub fn from_vorticity(omega: ScalarField) -> Self {
        Self {
            omega,
            mean_velocity: None,
        }
    }

    /// Vorticity `d_x u2 - d_y u1` and the x-mean of `u1`.
    pub fn from_velocity(u: &VectorField) -> Self {
        let mean = u.u1.values().mean_axis(ndarray::Axis(1)).expect("nx > 0").to_vec();
        Self {
            omega: u.rot(),
            mean_velocity: Some(mean),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.omega.grid()
    }
}

impl From<ScalarField> for Initial {
    fn from(omega: ScalarField) -> Self {
        Self::from_vorticity(omega)
    }
}

impl From<&VectorField> for Initial {
    fn from(u: &VectorField) -> Self {
        Self::from_velocity(u)
    }
}

/// Generator library; parameters are explicit so a plan fully determines the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `psi = A sin x sin y` (needs `lx = 2 pi`, `ly = pi` for the exact solution).
    TaylorVortex { amplitude: f64 },
    /// x-independent `U0 = A (1 + (alpha y + c y^3) e^{-alpha y}) e^{-(y/w)^2}`
    /// with `alpha = a eps^(-beta)`, compatible with the Navier condition.
    RobinShear { amplitude: f64, width: f64 },
    /// Gaussian vortex centred at `(x0, y0)` with seeded azimuthal wobble.
    OffsetBlob {
        amplitude: f64,
        x0: f64,
        y0: f64,
        sigma: f64,
        #[serde(default)]
        wobble: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::TaylorVortex { .. } => "taylor_vortex",
            InitialData::RobinShear { .. } => "robin_shear",
            InitialData::OffsetBlob { .. } => "offset_blob",
        }
    }

    /// The blob used by the rate sweeps: below `ly/2`, negligible at the wall.
    pub fn default_blob() -> Self {
        InitialData::OffsetBlob {
            amplitude: 5.0,
            x0: PI,
            y0: 1.2,
            sigma: 0.35,
            wobble: 0.3,
            seed: 7,
        }
    }

    /// Whether the data depend on the wall friction (and so on eps).
    pub fn depends_on_friction(&self) -> bool {
        matches!(self, InitialData::RobinShear { .. })
    }

    pub fn build(&self, grid: &Arc<Grid>, cfg: &SimConfig) -> Result<Initial> {
        match *self {
            InitialData::TaylorVortex { amplitude } => {
                let omega = ScalarField::from_fn(grid, |x, y| 2.0 * amplitude * x.sin() * y.sin());
                Ok(Initial::from_vorticity(omega))
            }
            InitialData::RobinShear { amplitude, width } => {
                if !(width > 0.0) {
                    return Err(Error::Parameter("robin_shear width must be positive".into()));
                }
                let alpha = cfg.a_eps();
                let u0: Vec<f64> = grid.y().iter().map(|&y| robin_shear_profile(amplitude, width, alpha, y)).collect();
                let w0: Vec<f64> = grid
                    .y()
                    .iter()
                    .map(|&y| -robin_shear_slope(amplitude, width, alpha, y))
                    .collect();
                Ok(Initial {
                    omega: ScalarField::from_profile(grid, &w0),
                    mean_velocity: Some(u0),
                })
            }
            InitialData::OffsetBlob {
                amplitude,
                x0,
                y0,
                sigma,
                wobble,
                seed,
            } => {
                if !(sigma > 0.0 && y0 > 0.0 && y0 < grid.ly()) {
                    return Err(Error::Parameter("offset_blob needs sigma > 0 and 0 < y0 < ly".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let lobes: Vec<(f64, f64)> = (1..=3)
                    .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI)))
                    .collect();
                let lx = grid.lx();
                let omega = ScalarField::from_fn(grid, |x, y| {
                    // periodic distance in x
                    let dx = (x - x0 + 0.5 * lx).rem_euclid(lx) - 0.5 * lx;
                    let dy = y - y0;
                    let r2 = (dx * dx + dy * dy) / (sigma * sigma);
                    let th = dy.atan2(dx);
                    let shape: f64 = 1.0
                        + wobble
                            * lobes
                                .iter()
                                .enumerate()
                                .map(|(m, (c, p))| c * ((m + 2) as f64 * th + p).cos() * r2 / (1.0 + r2))
                                .sum::<f64>();
                    amplitude * shape * (-r2).exp()
                });
                Ok(Initial::from_vorticity(omega))
            }
        }
    }
}

/// Cubic coefficient making the profile compatible to first order:
/// `U'(0) = alpha U(0)` and `U'''(0) = alpha U''(0)`, so the heat flow starts
/// without a corner layer.
fn robin_shear_cubic(alpha: f64, w: f64) -> f64 {
    (4.0 * alpha / (w * w) - 5.0 * alpha.powi(3)) / 6.0
}

pub fn robin_shear_profile(amp: f64, w: f64, alpha: f64, y: f64) -> f64 {
    let c3 = robin_shear_cubic(alpha, w);
    let p = alpha * y + c3 * y.powi(3);
    amp * (1.0 + p * (-alpha * y).exp()) * (-(y / w).powi(2)).exp()
}

pub fn robin_shear_slope(amp: f64, w: f64, alpha: f64, y: f64) -> f64 {
    let c3 = robin_shear_cubic(alpha, w);
    let g = (-(y / w).powi(2)).exp();
    let e = (-alpha * y).exp();
    let p = alpha * y + c3 * y.powi(3);
    let dp = alpha + 3.0 * c3 * y * y;
    amp * ((dp - alpha * p) * e - 2.0 * y / (w * w) * (1.0 + p * e)) * g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    #[test]
    fn shear_is_navier_compatible() {
        for alpha in [0.0, 1.0, 31.6] {
            let s = robin_shear_slope(1.3, 0.5, alpha, 0.0);
            assert!((s - alpha * robin_shear_profile(1.3, 0.5, alpha, 0.0)).abs() < 1e-12);
            let h = 1e-6;
            let fd = (robin_shear_profile(1.3, 0.5, alpha, 0.2 + h) - robin_shear_profile(1.3, 0.5, alpha, 0.2 - h)) / (2.0 * h);
            assert!((fd - robin_shear_slope(1.3, 0.5, alpha, 0.2)).abs() < 1e-6);
            let d = |y| robin_shear_slope(1.3, 0.5, alpha, y);
            let h = 1e-4;
            let u2 = (d(h) - d(-h)) / (2.0 * h);
            let u3 = (d(h) - 2.0 * d(0.0) + d(-h)) / (h * h);
            assert!((u3 - alpha * u2).abs() < 1e-3 * (1.0 + alpha.powi(3)), "alpha {alpha}");
        }
    }

    #[test]
    fn blob_is_seeded_and_away_from_walls() {
        let spec = GridSpec::channel(32, 64);
        let g = Grid::new(spec).unwrap();
        let cfg = SimConfig::euler(spec, 1.0);
        let a = InitialData::default_blob().build(&g, &cfg).unwrap();
        let b = InitialData::default_blob().build(&g, &cfg).unwrap();
        assert_eq!(a.omega.values(), b.omega.values());
        let peak = a.omega.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let wall = a.omega.row(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let top = a.omega.row(63).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(wall < 2e-5 * peak && top < 1e-12 * peak);
        let json = serde_json::to_string(&InitialData::default_blob()).unwrap();
        assert!(json.contains("\"kind\":\"offset_blob\""));
    }
}
