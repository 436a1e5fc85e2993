//! Reference solutions that do not share code with the solver.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]`.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Eigenfunction expansion of `U_t = eps U''` on `[0, L]` with
/// `U'(0) = alpha U(0)` and `U'(L) = 0`.
///
/// Modes are `cos(mu (L - y))` with `mu tan(mu L) = alpha`.
#[derive(Debug, Clone)]
pub struct RobinHeat {
    pub alpha: f64,
    pub eps: f64,
    pub length: f64,
    pub mu: Vec<f64>,
    pub coef: Vec<f64>,
}

impl RobinHeat {
    pub fn new(u0: impl Fn(f64) -> f64, alpha: f64, eps: f64, length: f64, terms: usize) -> Self {
        assert!(alpha >= 0.0 && eps >= 0.0 && length > 0.0);
        let mu: Vec<f64> = (0..terms).map(|n| Self::root(n, alpha, length)).collect();
        let mu_max = mu.last().copied().unwrap_or(1.0);
        let panels = ((mu_max * length / 2.0).ceil() as usize).max(400);
        let (ys, ws) = composite_gauss(0.0, length, panels, 10);
        let f: Vec<f64> = ys.iter().map(|&y| u0(y)).collect();
        let coef = mu
            .iter()
            .map(|&m| {
                let proj: f64 = ys
                    .iter()
                    .zip(&ws)
                    .zip(&f)
                    .map(|((y, w), v)| w * v * (m * (length - y)).cos())
                    .sum();
                let norm = if m == 0.0 {
                    length
                } else {
                    0.5 * length + (2.0 * m * length).sin() / (4.0 * m)
                };
                proj / norm
            })
            .collect();
        Self {
            alpha,
            eps,
            length,
            mu,
            coef,
        }
    }

    /// n-th root of `mu sin(mu L) - alpha cos(mu L)`, in `[n pi/L, (n + 1/2) pi/L)`.
    fn root(n: usize, alpha: f64, l: f64) -> f64 {
        if alpha == 0.0 {
            return n as f64 * PI / l;
        }
        let f = |m: f64| m * (m * l).sin() - alpha * (m * l).cos();
        let (mut lo, mut hi) = (n as f64 * PI / l, (n as f64 + 0.5) * PI / l);
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    fn decay(&self, m: f64, t: f64) -> f64 {
        (-self.eps * m * m * t).exp()
    }

    pub fn value(&self, t: f64, y: f64) -> f64 {
        self.mu
            .iter()
            .zip(&self.coef)
            .map(|(&m, &c)| c * self.decay(m, t) * (m * (self.length - y)).cos())
            .sum()
    }

    pub fn slope(&self, t: f64, y: f64) -> f64 {
        self.mu
            .iter()
            .zip(&self.coef)
            .map(|(&m, &c)| c * self.decay(m, t) * m * (m * (self.length - y)).sin())
            .sum()
    }

    /// `int_0^h U_y^2 dy`.
    pub fn slope_sq_below(&self, t: f64, h: f64) -> f64 {
        let (ys, ws) = composite_gauss(0.0, h, 64, 10);
        ys.iter().zip(&ws).map(|(&y, w)| w * self.slope(t, y).powi(2)).sum()
    }

    /// `int_0^L U^2 dy` and `int_0^L U_y^2 dy`.
    pub fn norms_sq(&self, t: f64) -> (f64, f64) {
        let (ys, ws) = composite_gauss(0.0, self.length, 400, 10);
        ys.iter().zip(&ws).fold((0.0, 0.0), |(a, b), (&y, w)| {
            (a + w * self.value(t, y).powi(2), b + w * self.slope(t, y).powi(2))
        })
    }
}
