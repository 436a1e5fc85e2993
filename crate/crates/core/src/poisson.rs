//! Streamfunction solves, velocity recovery and the wall-trace kernel.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::norms::{l2_norm, linf_norm};
use crate::field::{Grid, ScalarField, VectorField};
use crate::linalg::{BandedLu, BandedMatrix};

/// Condition at the artificial top boundary `y = ly`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopBc {
    /// `psi = 0`: impermeable top with no net flux.
    #[default]
    Zero,
    /// `d_y psi = 0`.
    ZeroGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoissonOptions {
    #[serde(default)]
    pub top_bc: TopBc,
    /// Modes above this index are zeroed before solving.
    #[serde(default)]
    pub mode_cutoff: Option<usize>,
}

/// Boundary row of a per-mode system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BoundaryRow {
    Dirichlet,
    Neumann,
    /// `d_y f - r f`.
    Robin(f64),
}

/// Factors `diag I + lap (D2 - k2 I)` with the given first and last rows.
pub(crate) fn mode_system(
    grid: &Grid,
    diag: f64,
    lap: f64,
    k2: f64,
    bottom: BoundaryRow,
    top: BoundaryRow,
) -> Result<BandedLu> {
    let n = grid.ny();
    let (l1, u1) = grid.d1().bandwidth();
    let (l2, u2) = grid.d2().bandwidth();
    let (kl, ku) = (l1.max(l2), u1.max(u2));
    let mut m = BandedMatrix::zeros(n, kl, ku);
    for j in 1..n - 1 {
        let r = grid.d2().row(j);
        for (k, w) in r.weights.iter().enumerate() {
            m.add(j, r.start + k, lap * w);
        }
        m.add(j, j, diag - lap * k2);
    }
    for (j, kind) in [(0, bottom), (n - 1, top)] {
        match kind {
            BoundaryRow::Dirichlet => m.set(j, j, 1.0),
            BoundaryRow::Neumann | BoundaryRow::Robin(_) => {
                let r = grid.d1().row(j);
                for (k, w) in r.weights.iter().enumerate() {
                    m.add(j, r.start + k, *w);
                }
                if let BoundaryRow::Robin(c) = kind {
                    m.add(j, j, -c);
                }
            }
        }
    }
    m.factor()
}

/// Per-mode factorisations of `Delta psi = -omega` with `psi(., 0) = 0`.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    grid: Arc<Grid>,
    opts: PoissonOptions,
    lus: Vec<BandedLu>,
}

impl PoissonSolver {
    pub fn new(grid: &Arc<Grid>, opts: PoissonOptions) -> Result<Self> {
        let top = match opts.top_bc {
            TopBc::Zero => BoundaryRow::Dirichlet,
            TopBc::ZeroGradient => BoundaryRow::Neumann,
        };
        let lus = (0..grid.n_modes())
            .map(|m| {
                let k = grid.wavenumber(m);
                mode_system(grid, 0.0, 1.0, k * k, BoundaryRow::Dirichlet, top).map_err(|e| match e {
                    Error::Singular(msg) => Error::Singular(format!(
                        "streamfunction system for mode {m} with top condition {:?}: {msg}",
                        opts.top_bc
                    )),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            opts,
            lus,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Solves mode `m` in place: on entry `rhs` holds `omega_m`, on exit `psi_m`.
    /// Boundary rows of `rhs` are overwritten with the homogeneous values.
    pub fn solve_mode(&self, m: usize, rhs: &mut [Complex64]) {
        let n = rhs.len();
        for v in rhs[1..n - 1].iter_mut() {
            *v = -*v;
        }
        rhs[0] = Complex64::new(0.0, 0.0);
        rhs[n - 1] = Complex64::new(0.0, 0.0);
        self.lus[m].solve_in_place(rhs);
    }

    pub fn solve_modes(&self, modes: &mut Array2<Complex64>) {
        let nm = self.grid.n_modes();
        let cutoff = self.opts.mode_cutoff.unwrap_or(nm);
        let mut col = vec![Complex64::new(0.0, 0.0); self.grid.ny()];
        for m in 0..nm {
            if m > cutoff {
                modes.column_mut(m).fill(Complex64::new(0.0, 0.0));
                continue;
            }
            for (c, v) in col.iter_mut().zip(modes.column(m)) {
                *c = *v;
            }
            self.solve_mode(m, &mut col);
            for (v, c) in modes.column_mut(m).iter_mut().zip(&col) {
                *v = *c;
            }
        }
    }

    pub fn solve(&self, omega: &ScalarField) -> Result<ScalarField> {
        omega.check_finite()?;
        let mut c = omega.modes();
        self.solve_modes(&mut c);
        let mut psi = ScalarField::from_modes(&self.grid, &c);
        psi.values_mut().row_mut(0).fill(0.0);
        Ok(psi)
    }
}

/// `psi` with `Delta psi = -omega`, `psi(., 0) = 0` and the requested top condition.
pub fn solve_streamfunction(omega: &ScalarField, opts: PoissonOptions) -> Result<ScalarField> {
    PoissonSolver::new(omega.grid(), opts)?.solve(omega)
}

/// `u = (d_y psi, -d_x psi)`.
pub fn velocity_from_streamfunction(psi: &ScalarField) -> VectorField {
    VectorField::new(psi.dy(), psi.dx().scale(-1.0))
}

/// Discrete `Delta f` (spectral in x, stencil in y).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let mut c = f.modes();
    for m in 0..g.n_modes() {
        let k = g.wavenumber(m);
        c.column_mut(m).mapv_inplace(|v| -v * k * k);
    }
    let dxx = ScalarField::from_modes(g, &c);
    let dyy = ScalarField::new(g.clone(), g.d2().apply_rows(f.values()));
    dxx.add(&dyy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonResidual {
    /// `||Delta psi + omega||` over interior nodes.
    pub l2: f64,
    /// Largest y spacing.
    pub h: f64,
    /// `l2 / h^2`.
    pub constant: f64,
}

pub fn poisson_residual(psi: &ScalarField, omega: &ScalarField) -> Result<PoissonResidual> {
    let mut r = laplacian(psi).add(omega);
    let n = r.grid().ny();
    r.values_mut().row_mut(0).fill(0.0);
    r.values_mut().row_mut(n - 1).fill(0.0);
    let l2 = l2_norm(&r)?;
    let h = psi.grid().y().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(PoissonResidual {
        l2,
        h,
        constant: l2 / (h * h),
    })
}

/// Image bookkeeping for [`boundary_slip_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Periodic x-images on each side of the primary cell.
    pub x_images: usize,
    /// Reflection pairs across the top wall; 0 gives the half-plane kernel.
    pub wall_images: usize,
    /// Relative change from the untruncated periodic sum that triggers a warning.
    pub warn_tolerance: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            x_images: 7,
            wall_images: 6,
            warn_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTrace {
    pub values: Vec<f64>,
    /// `max |truncated - periodic| / max |periodic|`.
    pub truncation_change: f64,
    pub warning: Option<String>,
}

/// Periodic sum of `h / (s^2 + h^2)` over all x-images, odd in `h`.
fn periodic_lorentzian(s: f64, h: f64, lx: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let a = 2.0 * PI * h.abs() / lx;
    let c = (2.0 * PI * s / lx).cos();
    // sinh(a)/(cosh(a) - c) = (1 - e^{-2a}) / (1 + e^{-2a} - 2 c e^{-a})
    let e = (-a).exp();
    h.signum() * (PI / lx) * (1.0 - e * e) / (1.0 + e * e - 2.0 * c * e)
}

fn truncated_lorentzian(s: f64, h: f64, lx: f64, images: usize) -> f64 {
    let j = images as i64;
    (-j..=j)
        .map(|n| {
            let d = s + n as f64 * lx;
            h / (d * d + h * h)
        })
        .sum()
}

/// `int_0^lx` of the truncated image sum in `x'`, closed form.
fn truncated_lorentzian_mass(x: f64, h: f64, lx: f64, images: usize) -> f64 {
    let j = images as f64;
    ((x + j * lx) / h).atan() - ((x - (j + 1.0) * lx) / h).atan()
}

/// Evaluates `omega(x, y_j)` for every row at one `x` from the mode view.
fn rows_at(grid: &Grid, modes: &Array2<Complex64>, x: f64) -> Vec<f64> {
    let nm = grid.n_modes();
    let phases: Vec<Complex64> = (0..nm).map(|m| Complex64::from_polar(1.0, grid.wavenumber(m) * x)).collect();
    modes
        .rows()
        .into_iter()
        .map(|row| {
            let mut s = row[0].re + (row[nm - 1] * phases[nm - 1]).re;
            for m in 1..nm - 1 {
                s += 2.0 * (row[m] * phases[m]).re;
            }
            s
        })
        .collect()
}

/// Wall slip `u1(x, 0)` from the vorticity through the Dirichlet Green's
/// function: `(1/pi) int y' / ((x-x')^2 + y'^2) omega dx' dy'`, with periodic
/// x-images and reflections across the top wall.
///
/// The direct quadrature subtracts `omega(x, y')` on each row so the nearly
/// singular kernel at small `y'` only sees a vanishing integrand. Mode 0 of
/// omega is not representable by the top-wall images (the mean kernel mass
/// cancels pairwise), so channel comparisons are meaningful for zero-mean
/// vorticity.
pub fn boundary_slip_kernel(omega: &ScalarField, xs: &[f64], opts: KernelOptions) -> Result<KernelTrace> {
    omega.check_finite()?;
    let g = omega.grid();
    let lx = g.lx();
    let ly = g.ly();
    let dx = g.dx();
    let wy = g.wy();
    let y = g.y();
    let vals = omega.values();
    let modes = omega.modes();
    let pairs = opts.wall_images as i64;

    let mut truncated = Vec::with_capacity(xs.len());
    let mut periodic = Vec::with_capacity(xs.len());
    for &x in xs {
        let local = rows_at(g, &modes, x);
        let (mut acc_t, mut acc_p) = (0.0, 0.0);
        for j in 1..g.ny() {
            if wy[j] == 0.0 {
                continue;
            }
            let row = vals.row(j);
            let (mut row_t, mut row_p) = (0.0, 0.0);
            // primary source, singularity subtracted
            let h = y[j];
            for (i, &w) in row.iter().enumerate() {
                let s = x - g.x(i);
                let diff = w - local[j];
                row_t += truncated_lorentzian(s, h, lx, opts.x_images) * diff;
                row_p += periodic_lorentzian(s, h, lx) * diff;
            }
            row_t *= dx;
            row_p *= dx;
            row_t += local[j] * truncated_lorentzian_mass(x, h, lx, opts.x_images);
            row_p += local[j] * PI;
            // top-wall reflections, paired so the sum converges
            for n in (-pairs..=pairs).filter(|&n| n != 0) {
                let hn = h + 2.0 * n as f64 * ly;
                let (mut it, mut ip) = (0.0, 0.0);
                for (i, &w) in row.iter().enumerate() {
                    let s = x - g.x(i);
                    it += truncated_lorentzian(s, hn, lx, opts.x_images) * w;
                    ip += periodic_lorentzian(s, hn, lx) * w;
                }
                row_t += it * dx;
                row_p += ip * dx;
            }
            acc_t += wy[j] * row_t;
            acc_p += wy[j] * row_p;
        }
        truncated.push(acc_t / PI);
        periodic.push(acc_p / PI);
    }
    let scale = periodic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = truncated
        .iter()
        .zip(&periodic)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let change = if scale > 0.0 { diff / scale } else { diff };
    let warning = (change > opts.warn_tolerance).then(|| {
        let msg = format!(
            "periodic image truncation at {} images changes the wall trace by {change:.3e} (relative)",
            opts.x_images
        );
        log::warn!("{msg}");
        msg
    });
    Ok(KernelTrace {
        values: truncated,
        truncation_change: change,
        warning,
    })
}

/// Near/far split of the half-plane wall kernel at height `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitKernel {
    /// `sup_x |(1/2pi) int_{y'<K} y'/|x-x'|^2 omega|`.
    pub near: f64,
    /// Same over `y' > K`.
    pub far: f64,
    /// `near / (K ||omega||_inf)`, 0 for vanishing vorticity.
    pub near_constant: f64,
    /// `K ||grad kernel||_{L^2(y' > K)}` for the (1/2pi) kernel, integrated
    /// exactly in x' and by quadrature in y' up to `ly`.
    pub far_gradient_constant: f64,
}

/// Splits the half-plane (periodic in x) trace integral at `y' = K`, with the
/// `1/(2 pi)` normalisation of the trace formula.
pub fn split_kernel_bound(omega: &ScalarField, k: f64) -> Result<SplitKernel> {
    omega.check_finite()?;
    let g = omega.grid();
    if !(k > 0.0 && k < g.ly()) {
        return Err(Error::Parameter(format!("split height K = {k} outside (0, ly)")));
    }
    if g.nodes_below(k) < 2 {
        return Err(Error::Resolution(format!(
            "split height K = {k:e} has {} nodes below it; increase clustering",
            g.nodes_below(k)
        )));
    }
    let lx = g.lx();
    let dx = g.dx();
    let y = g.y();
    let near_w = g.quadrature().strip_weights(k);
    let far_w: Vec<f64> = g.wy().iter().zip(&near_w).map(|(a, b)| a - b).collect();
    let vals = omega.values();
    let modes = omega.modes();
    let (mut near, mut far) = (0.0f64, 0.0f64);
    for i0 in 0..g.nx() {
        let x = g.x(i0);
        let local = rows_at(g, &modes, x);
        let (mut sn, mut sf) = (0.0, 0.0);
        for j in 1..g.ny() {
            let h = y[j];
            let mut r = 0.0;
            for (i, &w) in vals.row(j).iter().enumerate() {
                r += periodic_lorentzian(x - g.x(i), h, lx) * (w - local[j]);
            }
            let row = r * dx + local[j] * PI;
            sn += near_w[j] * row;
            sf += far_w[j] * row;
        }
        near = near.max((sn / (2.0 * PI)).abs());
        far = far.max((sf / (2.0 * PI)).abs());
    }
    let winf = linf_norm(omega)?;
    let near_constant = if winf > 0.0 { near / (k * winf) } else { 0.0 };
    // |grad (y'/(2 pi rho^2))| = 1/(2 pi rho^2); int_R rho^-4 dx' = pi/(2 y'^3)
    let grad_sq: f64 = far_w
        .iter()
        .zip(y)
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, yy)| w * PI / (2.0 * yy.powi(3)))
        .sum::<f64>()
        / (4.0 * PI * PI);
    Ok(SplitKernel {
        near,
        far,
        near_constant,
        far_gradient_constant: k * grad_sq.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceInterpolation {
    /// `||u1(., K)||^2_{L^2}`.
    pub trace_sq: f64,
    /// `||u1|| ||d_y u1||`.
    pub product: f64,
    /// `trace_sq / product`.
    pub constant: f64,
}

/// Compares the squared trace of `u1` on `y = K` with `||u1|| ||d_y u1||`.
pub fn trace_interpolation_check(u1: &ScalarField, k: f64) -> Result<TraceInterpolation> {
    u1.check_finite()?;
    let g = u1.grid();
    if !(k >= 0.0 && k <= g.ly()) {
        return Err(Error::Parameter(format!("trace height {k} outside [0, ly]")));
    }
    let y = g.y();
    let n = y.len();
    let c = y.partition_point(|&v| v <= k).clamp(1, n - 1) - 1;
    let s = c.saturating_sub(1).min(n - 4);
    let nodes = &y[s..s + 4];
    let weights: Vec<f64> = (0..4)
        .map(|a| {
            (0..4)
                .filter(|&b| b != a)
                .map(|b| (k - nodes[b]) / (nodes[a] - nodes[b]))
                .product()
        })
        .collect();
    let vals = u1.values();
    let trace: Vec<f64> = (0..g.nx())
        .map(|i| (0..4).map(|a| weights[a] * vals[[s + a, i]]).sum())
        .collect();
    let trace_sq = trace.iter().map(|v| v * v).sum::<f64>() * g.dx();
    let product = l2_norm(u1)? * l2_norm(&u1.dy())?;
    let constant = if product > 0.0 { trace_sq / product } else { 0.0 };
    Ok(TraceInterpolation {
        trace_sq,
        product,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn channel(nx: usize, ny: usize) -> Arc<Grid> {
        Grid::new(GridSpec::channel(nx, ny)).unwrap()
    }

    #[test]
    fn taylor_streamfunction_and_velocity() {
        let g = channel(32, 128);
        let omega = ScalarField::from_fn(&g, |x, y| 2.0 * x.sin() * y.sin());
        let psi = solve_streamfunction(&omega, PoissonOptions::default()).unwrap();
        let exact = ScalarField::from_fn(&g, |x, y| x.sin() * y.sin());
        assert!(l2_norm(&psi.sub(&exact)).unwrap() < 1e-6);
        let u = velocity_from_streamfunction(&psi);
        let ue = VectorField::from_fn(&g, |x, y| (x.sin() * y.cos(), -x.cos() * y.sin()));
        assert!(l2_norm(&u.sub(&ue)).unwrap() < 1e-5);
        assert!(u.u2.row(0).iter().all(|&v| v == 0.0));
        let div = l2_norm(&u.divergence()).unwrap();
        assert!(div <= 1e-8 * (l2_norm(&u.u1).unwrap() + l2_norm(&u.u2).unwrap()), "{div}");
        let r = poisson_residual(&psi, &omega).unwrap();
        assert!(r.l2 < 1e-9, "{r:?}");
    }

    #[test]
    fn zero_vorticity_gives_zero() {
        let g = channel(16, 32);
        let psi = solve_streamfunction(&ScalarField::zeros(&g), PoissonOptions::default()).unwrap();
        assert!(psi.is_zero());
        let u = velocity_from_streamfunction(&psi);
        assert!(u.u1.is_zero() && u.u2.is_zero());
    }

    #[test]
    fn y_independent_forcing_matches_cosh_profile() {
        let g = channel(16, 128);
        let omega = ScalarField::from_fn(&g, |x, _| x.sin());
        let psi = solve_streamfunction(&omega, PoissonOptions::default()).unwrap();
        let h = PI / 2.0;
        let exact = ScalarField::from_fn(&g, |x, y| (1.0 - (y - h).cosh() / h.cosh()) * x.sin());
        let err = linf_norm(&psi.sub(&exact)).unwrap();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn uniform_slip_from_linear_streamfunction() {
        let g = channel(16, 32);
        let u = velocity_from_streamfunction(&ScalarField::from_fn(&g, |_, y| y));
        assert!(u.u1.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(u.u2.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn zero_gradient_top_is_honoured() {
        let g = channel(16, 64);
        let omega = ScalarField::from_fn(&g, |x, y| (-(y - 1.0).powi(2) * 4.0).exp() * (1.0 + x.cos()));
        let opts = PoissonOptions {
            top_bc: TopBc::ZeroGradient,
            mode_cutoff: None,
        };
        let psi = solve_streamfunction(&omega, opts).unwrap();
        let top = g.d1().apply_row_at(psi.values(), g.ny() - 1);
        assert!(top.iter().all(|v| v.abs() < 1e-10));
    }

    fn dipole(g: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(g, |x, y| {
            let r2 = ((x - PI).powi(2) + (y - 1.0).powi(2)) / 0.09;
            (x - PI) * (-r2).exp() * 10.0
        })
    }

    #[test]
    fn kernel_matches_streamfunction_route() {
        let g = channel(64, 128);
        // the Taylor field fills the period, so its image tail decays slowly
        let wide = KernelOptions {
            x_images: 32,
            ..Default::default()
        };
        let taylor = ScalarField::from_fn(&g, |x, y| 2.0 * x.sin() * y.sin());
        for (omega, opts) in [(dipole(&g), KernelOptions::default()), (taylor, wide)] {
            let psi = solve_streamfunction(&omega, PoissonOptions::default()).unwrap();
            let trace = psi.dy().row(0);
            let kt = boundary_slip_kernel(&omega, &g.xs(), opts).unwrap();
            let scale = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = kt.values.iter().zip(&trace).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-3 * scale, "err {err} scale {scale} trunc {}", kt.truncation_change);
        }
        let zero = boundary_slip_kernel(&ScalarField::zeros(&g), &[0.0, 1.0], KernelOptions::default()).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0) && zero.warning.is_none());
    }

    #[test]
    fn kernel_on_uniform_strip_is_k_in_half_plane() {
        // 1/pi normalisation: omega = 1 on 0 < y < K gives K (not K/2) in the half-plane
        let g = Grid::new(GridSpec::channel(64, 128).with_stretch(3.0)).unwrap();
        let k = 0.2;
        let omega = ScalarField::from_fn(&g, |_, y| if y < k { 1.0 } else { 0.0 });
        let opts = KernelOptions {
            wall_images: 0,
            ..Default::default()
        };
        let kt = boundary_slip_kernel(&omega, &[0.0, 2.0], opts).unwrap();
        let mass = g.wy().iter().zip(g.y()).filter(|(_, y)| **y < k).map(|(w, _)| w).sum::<f64>();
        for v in &kt.values {
            assert!((v - mass).abs() < 0.02 * k, "{v} vs {mass}");
        }
        // mode-0 content feels the truncation of the periodic images
        assert!(kt.warning.is_some());
    }

    #[test]
    fn split_kernel_constants() {
        let g = Grid::new(GridSpec::channel(32, 128).with_stretch(3.0)).unwrap();
        let s = split_kernel_bound(&ScalarField::from_fn(&g, |_, _| 1.0), 0.1).unwrap();
        assert!((s.near - 0.05).abs() < 0.02 * 0.05, "{s:?}");
        assert!((s.near_constant - 0.5).abs() < 0.01);
        let z = split_kernel_bound(&ScalarField::zeros(&g), 0.1).unwrap();
        assert_eq!((z.near, z.far, z.near_constant), (0.0, 0.0, 0.0));
        let t = ScalarField::from_fn(&g, |x, y| 2.0 * x.sin() * y.sin());
        let st = split_kernel_bound(&t, 0.1).unwrap();
        assert!(st.near <= 0.1 * 1.05, "{st:?}");
        assert!(st.far_gradient_constant > 0.0 && st.far_gradient_constant < 1.0 / (4.0 * PI.sqrt()));
        assert!(matches!(split_kernel_bound(&t, 1e-9), Err(Error::Resolution(_))));
    }

    #[test]
    fn trace_interpolation_on_taylor_velocity() {
        let g = channel(32, 128);
        let u1 = ScalarField::from_fn(&g, |x, y| x.sin() * y.cos());
        let k = 0.3;
        let t = trace_interpolation_check(&u1, k).unwrap();
        let expect = 2.0 * k.cos().powi(2) / PI;
        assert!((t.constant - expect).abs() < 1e-4, "{t:?}");
        assert!(t.constant <= 1.1);
    }
}
