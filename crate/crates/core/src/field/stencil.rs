//! Finite-difference and quadrature weights on the stretched wall-normal grid.

use ndarray::{Array2, ArrayView1, Axis};
use num_complex::Complex64;

/// Fornberg's recursion: weights for derivatives `0..=m` at `z` using nodes `x`.
///
/// Returns `c[k][j]`, the weight of node `j` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One row of a sparse derivative operator.
#[derive(Debug, Clone)]
pub struct StencilRow {
    pub start: usize,
    pub weights: Vec<f64>,
}

/// Derivative operator along y, one stencil row per node.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    rows: Vec<StencilRow>,
    lower: usize,
    upper: usize,
}

impl DiffOperator {
    /// Builds the `deriv`-th derivative of formal order `order` (even) on `y`.
    ///
    /// Interior rows are centred on `order + 1` nodes; rows that do not fit a
    /// centred window use a one-sided window, one node wider for the second
    /// derivative so the order is kept at the walls.
    pub fn new(y: &[f64], deriv: usize, order: usize) -> Self {
        assert!(order >= 2 && order % 2 == 0, "stencil order must be even");
        assert!(deriv == 1 || deriv == 2);
        let n = y.len();
        let half = order / 2;
        let mut rows = Vec::with_capacity(n);
        let (mut lower, mut upper) = (0usize, 0usize);
        for j in 0..n {
            let centred = j >= half && j + half < n;
            let width = if centred || deriv == 1 { order + 1 } else { order + 2 };
            let start = if centred {
                j - half
            } else {
                j.saturating_sub(half).min(n - width)
            };
            let w = fornberg_weights(y[j], &y[start..start + width], deriv);
            lower = lower.max(j - start);
            upper = upper.max(start + width - 1 - j);
            rows.push(StencilRow {
                start,
                weights: w[deriv].clone(),
            });
        }
        Self { rows, lower, upper }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, j: usize) -> &StencilRow {
        &self.rows[j]
    }

    /// Lower and upper bandwidth of the operator.
    pub fn bandwidth(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    pub fn apply_at(&self, f: &[f64], j: usize) -> f64 {
        let r = &self.rows[j];
        r.weights
            .iter()
            .zip(&f[r.start..r.start + r.weights.len()])
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.rows.len()).map(|j| self.apply_at(f, j)).collect()
    }

    /// Applies the operator along axis 0 of an `ny x nx` array.
    pub fn apply_rows(&self, f: &Array2<f64>) -> Array2<f64> {
        let (ny, nx) = f.dim();
        assert_eq!(ny, self.rows.len());
        let mut out = Array2::<f64>::zeros((ny, nx));
        for (j, mut orow) in out.axis_iter_mut(Axis(0)).enumerate() {
            let r = &self.rows[j];
            for (k, &w) in r.weights.iter().enumerate() {
                let src: ArrayView1<f64> = f.row(r.start + k);
                orow.scaled_add(w, &src);
            }
        }
        out
    }

    /// Value of the derivative at `j` applied to row-major data along axis 0,
    /// for all columns at once.
    pub fn apply_row_at(&self, f: &Array2<f64>, j: usize) -> Vec<f64> {
        let nx = f.ncols();
        let mut out = vec![0.0; nx];
        let r = &self.rows[j];
        for (k, &w) in r.weights.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(f.row(r.start + k)) {
                *o += w * v;
            }
        }
        out
    }
}

const GAUSS2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Gram matrix `\int L_k L_l` of one cell's cubic basis over `[y_c, upper]`,
/// with the index of its first node.
#[derive(Debug, Clone, Copy)]
pub struct CellGram {
    pub start: usize,
    pub m: [[f64; 4]; 4],
}

impl CellGram {
    /// `\int (P f)^2` for the four nodal values `f[start..start + 4]`.
    pub fn square(&self, f: [f64; 4]) -> f64 {
        let mut s = 0.0;
        for k in 0..4 {
            let mut r = 0.0;
            for l in 0..4 {
                r += self.m[k][l] * f[l];
            }
            s += f[k] * r;
        }
        s
    }

    /// Hermitian version for complex nodal values.
    pub fn square_complex(&self, f: [Complex64; 4]) -> f64 {
        let mut s = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                s += self.m[k][l] * (f[k] * f[l].conj()).re;
            }
        }
        s
    }
}

fn lagrange(nodes: &[f64], k: usize, y: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != k)
        .map(|(_, &ym)| (y - ym) / (nodes[k] - ym))
        .product()
}

/// Quadrature on the stretched nodes: each cell is integrated exactly against
/// the cubic through the four surrounding nodes (fourth order).
#[derive(Debug, Clone)]
pub struct YQuadrature {
    y: Vec<f64>,
    weights: Vec<f64>,
    full: Vec<CellGram>,
}

impl YQuadrature {
    pub fn new(y: &[f64]) -> Self {
        let n = y.len();
        assert!(n >= 4);
        let mut weights = vec![0.0; n];
        for c in 0..n - 1 {
            Self::accumulate_cell(y, c, y[c + 1], &mut weights);
        }
        let full = (0..n - 1).map(|c| Self::cell_gram(y, c, y[c + 1])).collect();
        Self {
            y: y.to_vec(),
            weights,
            full,
        }
    }

    /// Weights of the four interpolation nodes for `\int_{y_c}^{upper}`.
    fn cell_weights(y: &[f64], c: usize, upper: f64) -> (usize, [f64; 4]) {
        let n = y.len();
        let s = c.saturating_sub(1).min(n - 4);
        let nodes = &y[s..s + 4];
        let a = y[c];
        let half = 0.5 * (upper - a);
        let mid = 0.5 * (upper + a);
        let mut w = [0.0; 4];
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = GAUSS2
                .iter()
                .map(|&(g, gw)| gw * half * lagrange(nodes, k, mid + half * g))
                .sum::<f64>();
        }
        (s, w)
    }

    fn accumulate_cell(y: &[f64], c: usize, upper: f64, w: &mut [f64]) {
        let (s, cw) = Self::cell_weights(y, c, upper);
        for (k, v) in cw.iter().enumerate() {
            w[s + k] += v;
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn cell_gram(y: &[f64], c: usize, upper: f64) -> CellGram {
        let n = y.len();
        let start = c.saturating_sub(1).min(n - 4);
        let nodes = &y[start..start + 4];
        let a = y[c];
        let half = 0.5 * (upper - a);
        let mid = 0.5 * (upper + a);
        let mut m = [[0.0; 4]; 4];
        for &(g, gw) in &GAUSS4 {
            let t = mid + half * g;
            let l: Vec<f64> = (0..4).map(|k| lagrange(nodes, k, t)).collect();
            for k in 0..4 {
                for j in 0..4 {
                    m[k][j] += gw * half * l[k] * l[j];
                }
            }
        }
        CellGram { start, m }
    }

    pub fn full_gram(&self) -> &[CellGram] {
        &self.full
    }

    /// Cell Gram matrices covering `[0, y_max]`. Squared integrals built from
    /// them are nonnegative per cell, hence nondecreasing in `y_max`.
    pub fn gram_cells(&self, y_max: f64) -> Vec<CellGram> {
        let y = &self.y;
        (0..y.len() - 1)
            .take_while(|&c| y[c] < y_max)
            .map(|c| Self::cell_gram(y, c, y[c + 1].min(y_max)))
            .collect()
    }

    /// Weights for the integral over `[0, y_max]`, with the last partial cell
    /// integrated against its interpolating cubic.
    pub fn strip_weights(&self, y_max: f64) -> Vec<f64> {
        let y = &self.y;
        let n = y.len();
        let mut w = vec![0.0; n];
        for c in 0..n - 1 {
            if y[c] >= y_max {
                break;
            }
            let upper = y[c + 1].min(y_max);
            Self::accumulate_cell(y, c, upper, &mut w);
        }
        w
    }

    /// Cumulative integrals `F(y_j) = \int_0^{y_j} f`.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let y = &self.y;
        let n = y.len();
        let mut out = vec![0.0; n];
        for c in 0..n - 1 {
            let (s, w) = Self::cell_weights(y, c, y[c + 1]);
            let cell: f64 = (0..4).map(|k| w[k] * f[s + k]).sum();
            out[c + 1] = out[c] + cell;
        }
        out
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }
}
