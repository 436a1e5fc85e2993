use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Nodal scalar on a [`Grid`], stored `ny x nx` (row `j` is the line `y = y_j`).
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Array2<f64>) -> Self {
        assert_eq!(values.dim(), (grid.ny(), grid.nx()), "field shape must be ny x nx");
        Self { grid, values }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::new(grid.clone(), Array2::zeros((grid.ny(), grid.nx())))
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let y = grid.y();
        let values = Array2::from_shape_fn((grid.ny(), grid.nx()), |(j, i)| f(grid.x(i), y[j]));
        Self::new(grid.clone(), values)
    }

    /// Field with a single x-independent profile.
    pub fn from_profile(grid: &Arc<Grid>, profile: &[f64]) -> Self {
        assert_eq!(profile.len(), grid.ny());
        let values = Array2::from_shape_fn((grid.ny(), grid.nx()), |(j, _)| profile[j]);
        Self::new(grid.clone(), values)
    }

    pub fn from_modes(grid: &Arc<Grid>, modes: &Array2<Complex64>) -> Self {
        Self::new(grid.clone(), grid.inverse(modes))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Discrete Fourier coefficients in x for every y node.
    pub fn modes(&self) -> Array2<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn check_finite(&self) -> Result<()> {
        for ((j, i), v) in self.values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::PoisonedField { j, i });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Spectral x-derivative (Nyquist mode dropped).
    pub fn dx(&self) -> ScalarField {
        let mut c = self.modes();
        let nm = self.grid.n_modes();
        for mut row in c.rows_mut() {
            for m in 0..nm {
                row[m] = if m == nm - 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    row[m] * Complex64::new(0.0, self.grid.wavenumber(m))
                };
            }
        }
        Self::from_modes(&self.grid, &c)
    }

    /// y-derivative with the grid's finite-difference stencils.
    pub fn dy(&self) -> ScalarField {
        Self::new(self.grid.clone(), self.grid.d1().apply_rows(&self.values))
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.values.row(j).to_vec()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).to_vec()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::new(self.grid.clone(), self.values.mapv(f))
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let mut out = self.values.clone();
        Zip::from(&mut out).and(&other.values).for_each(|a, &b| *a = f(*a, b));
        Self::new(self.grid.clone(), out)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a * b)
    }

    /// `\int\int f dx dy` with the grid quadrature.
    pub fn integral(&self) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .wy()
            .iter()
            .zip(self.values.rows())
            .map(|(w, row)| w * row.sum() * dx)
            .sum()
    }
}

/// Two-component velocity-like field.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl VectorField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Self {
        assert!(Arc::ptr_eq(u1.grid(), u2.grid()) || **u1.grid() == **u2.grid());
        Self { u1, u2 }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self::new(
            ScalarField::from_fn(grid, |x, y| f(x, y).0),
            ScalarField::from_fn(grid, |x, y| f(x, y).1),
        )
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    pub fn check_finite(&self) -> Result<()> {
        self.u1.check_finite()?;
        self.u2.check_finite()
    }

    /// Discrete divergence: spectral in x, finite differences in y.
    pub fn divergence(&self) -> ScalarField {
        self.u1.dx().add(&self.u2.dy())
    }

    /// `rot u = d_x u2 - d_y u1`.
    pub fn rot(&self) -> ScalarField {
        self.u2.dx().sub(&self.u1.dy())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.u1.sub(&other.u1), self.u2.sub(&other.u2))
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.u1.add(&other.u1), self.u2.add(&other.u2))
    }

    pub fn scale(&self, s: f64) -> VectorField {
        VectorField::new(self.u1.scale(s), self.u2.scale(s))
    }

    /// `<a, b>_{L^2}` for vector fields.
    pub fn dot(&self, other: &VectorField) -> f64 {
        self.u1.mul(&other.u1).integral() + self.u2.mul(&other.u2).integral()
    }

    /// Pointwise magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.u1.zip_with(&self.u2, |a, b| a.hypot(b))
    }
}

/// `<f, g>_{L^2}` for scalars.
pub fn inner(f: &ScalarField, g: &ScalarField) -> f64 {
    f.mul(g).integral()
}
