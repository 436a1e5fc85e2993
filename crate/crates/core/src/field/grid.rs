//! Periodic-in-x channel grid with wall-clustered y nodes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::stencil::{DiffOperator, YQuadrature};
use crate::error::{Error, Result};

/// Construction parameters of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// x period.
    pub lx: f64,
    /// Channel height; the wall is at y = 0.
    pub ly: f64,
    /// tanh clustering strength (0 = uniform).
    pub stretch: f64,
    /// Formal order of the y finite-difference stencils.
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    4
}

impl GridSpec {
    pub fn channel(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            lx: 2.0 * PI,
            ly: PI,
            stretch: 2.5,
            order: 4,
        }
    }

    pub fn with_stretch(mut self, stretch: f64) -> Self {
        self.stretch = stretch;
        self
    }

    pub fn with_extent(mut self, lx: f64, ly: f64) -> Self {
        self.lx = lx;
        self.ly = ly;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    /// y nodes of the tanh map `y = ly (1 - tanh(s(1-e))/tanh(s))`.
    pub fn y_nodes(&self) -> Vec<f64> {
        let n = self.ny;
        let s = self.stretch;
        let mut y: Vec<f64> = (0..n)
            .map(|j| {
                let e = j as f64 / (n - 1) as f64;
                if s < 1e-8 {
                    self.ly * e
                } else {
                    self.ly * (1.0 - (s * (1.0 - e)).tanh() / s.tanh())
                }
            })
            .collect();
        y[0] = 0.0;
        y[n - 1] = self.ly;
        y
    }

    /// Number of nodes (the wall node included) with `y < y_max`.
    pub fn nodes_below(&self, y_max: f64) -> usize {
        self.y_nodes().iter().filter(|&&y| y < y_max).count()
    }

    /// Smallest stretch (not below the current one) putting at least
    /// `min_nodes` nodes in `[0, strip)`.
    pub fn clustered_for_strip(mut self, strip: f64, min_nodes: usize) -> Result<Self> {
        if self.nodes_below(strip) >= min_nodes {
            return Ok(self);
        }
        let (mut lo, mut hi) = (self.stretch, 16.0);
        self.stretch = hi;
        if self.nodes_below(strip) < min_nodes {
            return Err(Error::Resolution(format!(
                "strip y < {strip:e} cannot hold {min_nodes} nodes with ny = {} (needs ny increase)",
                self.ny
            )));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            self.stretch = mid;
            if self.nodes_below(strip) >= min_nodes {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.stretch = hi;
        Ok(self)
    }
}

/// Immutable grid shared by all fields living on it.
pub struct Grid {
    spec: GridSpec,
    y: Vec<f64>,
    d1: DiffOperator,
    d2: DiffOperator,
    quad: YQuadrature,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        if spec.nx < 8 || !spec.nx.is_power_of_two() {
            return Err(Error::Parameter(format!("nx = {} must be a power of two >= 8", spec.nx)));
        }
        if spec.ny < 16 {
            return Err(Error::Parameter(format!("ny = {} must be >= 16", spec.ny)));
        }
        if !(spec.lx > 0.0 && spec.ly > 0.0 && spec.stretch >= 0.0) {
            return Err(Error::Parameter("lx, ly must be positive and stretch >= 0".into()));
        }
        if spec.order < 2 || spec.order % 2 != 0 || spec.order > 8 {
            return Err(Error::Parameter(format!("stencil order {} must be even in 2..=8", spec.order)));
        }
        let y = spec.y_nodes();
        if y.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(format!(
                "stretch {} collapses the y nodes (ny = {})",
                spec.stretch, spec.ny
            )));
        }
        let mut planner = FftPlanner::new();
        let grid = Grid {
            d1: DiffOperator::new(&y, 1, spec.order),
            d2: DiffOperator::new(&y, 2, spec.order),
            quad: YQuadrature::new(&y),
            fwd: planner.plan_fft_forward(spec.nx),
            inv: planner.plan_fft_inverse(spec.nx),
            y,
            spec,
        };
        if grid.quad.weights().iter().any(|&w| w <= 0.0) {
            return Err(Error::Parameter("stretch produces non-positive quadrature weights".into()));
        }
        Ok(Arc::new(grid))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn nx(&self) -> usize {
        self.spec.nx
    }
    pub fn ny(&self) -> usize {
        self.spec.ny
    }
    pub fn lx(&self) -> f64 {
        self.spec.lx
    }
    pub fn ly(&self) -> f64 {
        self.spec.ly
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn dx(&self) -> f64 {
        self.spec.lx / self.spec.nx as f64
    }
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx()).map(|i| self.x(i)).collect()
    }
    /// Number of retained rfft modes, `nx/2 + 1`.
    pub fn n_modes(&self) -> usize {
        self.spec.nx / 2 + 1
    }
    /// Angular wavenumber of mode `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.spec.lx
    }
    pub fn d1(&self) -> &DiffOperator {
        &self.d1
    }
    pub fn d2(&self) -> &DiffOperator {
        &self.d2
    }
    pub fn quadrature(&self) -> &YQuadrature {
        &self.quad
    }
    /// Quadrature weights for `\int dy`.
    pub fn wy(&self) -> &[f64] {
        self.quad.weights()
    }
    pub fn min_dy(&self) -> f64 {
        self.y.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
    /// Local spacing used for CFL purposes at node `j`.
    pub fn local_dy(&self, j: usize) -> f64 {
        let n = self.y.len();
        if j == 0 {
            self.y[1] - self.y[0]
        } else if j == n - 1 {
            self.y[n - 1] - self.y[n - 2]
        } else {
            (self.y[j + 1] - self.y[j - 1]).abs() * 0.5
        }
    }
    pub fn nodes_below(&self, y_max: f64) -> usize {
        self.y.iter().filter(|&&y| y < y_max).count()
    }

    /// Real-to-complex transform of every row: `c_m = (1/nx) sum_i f_i e^{-i k_m x_i}`.
    pub fn forward(&self, values: &Array2<f64>) -> Array2<Complex64> {
        let (ny, nx) = values.dim();
        let nm = self.n_modes();
        let scale = 1.0 / nx as f64;
        let mut out = Array2::<Complex64>::zeros((ny, nm));
        let mut buf = vec![Complex64::new(0.0, 0.0); nx];
        for (row, mut orow) in values.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            for (b, &v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex64::new(v, 0.0);
            }
            self.fwd.process(&mut buf);
            for (o, b) in orow.iter_mut().zip(&buf[..nm]) {
                *o = b * scale;
            }
        }
        out
    }

    /// Inverse of [`Grid::forward`]; the imaginary part of modes 0 and nx/2 is ignored.
    pub fn inverse(&self, modes: &Array2<Complex64>) -> Array2<f64> {
        let (ny, nm) = modes.dim();
        let nx = self.nx();
        assert_eq!(nm, self.n_modes());
        let mut out = Array2::<f64>::zeros((ny, nx));
        let mut buf = vec![Complex64::new(0.0, 0.0); nx];
        for (mrow, mut orow) in modes.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            buf[0] = Complex64::new(mrow[0].re, 0.0);
            for m in 1..nm - 1 {
                buf[m] = mrow[m];
                buf[nx - m] = mrow[m].conj();
            }
            buf[nx / 2] = Complex64::new(mrow[nm - 1].re, 0.0);
            self.inv.process(&mut buf);
            for (o, b) in orow.iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        out
    }

    /// Same transform for a single x-profile.
    pub fn forward_1d(&self, values: &[f64]) -> Vec<Complex64> {
        let a = Array2::from_shape_vec((1, values.len()), values.to_vec()).expect("shape");
        self.forward(&a).row(0).to_vec()
    }

    pub fn inverse_1d(&self, modes: &[Complex64]) -> Vec<f64> {
        let a = Array2::from_shape_vec((1, modes.len()), modes.to_vec()).expect("shape");
        self.inverse(&a).row(0).to_vec()
    }

    /// Spectral x-derivative of a periodic profile (Nyquist mode dropped).
    pub fn dx_1d(&self, values: &[f64]) -> Vec<f64> {
        let mut c = self.forward_1d(values);
        let nm = c.len();
        for (m, cm) in c.iter_mut().enumerate() {
            *cm = if m == nm - 1 {
                Complex64::new(0.0, 0.0)
            } else {
                *cm * Complex64::new(0.0, self.wavenumber(m))
            };
        }
        self.inverse_1d(&c)
    }
}
