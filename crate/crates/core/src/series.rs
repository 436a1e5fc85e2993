//! Time-series quadrature on sampled traces.

/// Trapezoid integral of `f` over the sample times `t`.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    assert_eq!(t.len(), f.len());
    t.windows(2).zip(f.windows(2)).map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum()
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    assert_eq!(t.len(), f.len());
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for k in 0..t.len() {
        if k > 0 {
            acc += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Second-order time derivative of equally spaced samples: centred inside,
/// one-sided three-point at the ends. Needs at least three samples.
pub fn rate_of_change(samples: &[Vec<f64>], dt: f64) -> Option<Vec<Vec<f64>>> {
    let n = samples.len();
    if n < 3 {
        return None;
    }
    let comb = |c: [(usize, f64); 3]| -> Vec<f64> {
        (0..samples[0].len())
            .map(|i| c.iter().map(|&(k, w)| w * samples[k][i]).sum::<f64>() / (2.0 * dt))
            .collect()
    };
    Some(
        (0..n)
            .map(|k| match k {
                0 => comb([(0, -3.0), (1, 4.0), (2, -1.0)]),
                k if k == n - 1 => comb([(k, 3.0), (k - 1, -4.0), (k - 2, 1.0)]),
                k => comb([(k + 1, 1.0), (k - 1, -1.0), (k, 0.0)]),
            })
            .collect(),
    )
}
