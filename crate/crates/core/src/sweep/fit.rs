use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares power law `value ~ C eps^slope` in log-log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Points that entered the fit.
    pub points: Vec<(f64, f64)>,
    /// Points left out: flagged by the caller or not positive and finite.
    pub excluded: Vec<(f64, f64)>,
    pub slope: f64,
    /// Natural log of `C`.
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    fit_rate_excluding(points, &vec![false; points.len()])
}

/// As [`fit_rate`], leaving out the points whose `exclude` flag is set.
pub fn fit_rate_excluding(points: &[(f64, f64)], exclude: &[bool]) -> Result<RateFit> {
    if exclude.len() != points.len() {
        return Err(Error::Parameter("one exclusion flag per point".into()));
    }
    let usable = |&(e, v): &(f64, f64)| e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite();
    let (mut used, mut excluded) = (Vec::new(), Vec::new());
    for (p, &x) in points.iter().zip(exclude) {
        if !x && usable(p) {
            used.push(*p);
        } else {
            excluded.push(*p);
        }
    }
    if used.len() < 3 {
        return Err(Error::Fit(format!("{} usable points, need at least 3", used.len())));
    }
    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all points share one eps".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    // a flat, exactly fitted series is a perfect fit
    let r2 = if ss_tot <= 1e-30 * n { if ss_res <= 1e-30 * n { 1.0 } else { 0.0 } } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        points: used,
        excluded,
        slope,
        intercept,
        r2,
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with tied ranks averaged; `None` below two
/// points or for a constant series.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let m = (n + 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - m) * (y - m)).sum();
    let va: f64 = ra.iter().map(|x| (x - m).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - m).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va * vb).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_power_law() {
        let f = fit_rate(&[(1e-2, 3.162e-2), (1e-3, 1e-2), (1e-4, 3.162e-3)]).unwrap();
        assert!((f.slope - 0.5).abs() < 5e-4, "{}", f.slope);
        assert!((f.r2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_values_have_zero_slope() {
        let f = fit_rate(&[(1e-2, 2.0), (1e-3, 2.0), (1e-4, 2.0)]).unwrap();
        assert!(f.slope.abs() < 1e-14);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn exact_power_laws_recover_exponents() {
        for s in [-1.0, 0.125, 0.37, 2.0] {
            let pts: Vec<(f64, f64)> = (0..5).map(|k| {
                let e = 10f64.powf(-1.0 - 0.5 * k as f64);
                (e, 3.0 * e.powf(s))
            }).collect();
            let f = fit_rate(&pts).unwrap();
            assert!((f.slope - s).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-11);
        }
    }

    #[test]
    fn exclusions_and_too_few_points() {
        let pts = [(1e-2, 1.0), (1e-3, 0.5), (1e-4, 0.25), (1e-5, f64::NAN)];
        let f = fit_rate(&pts).unwrap();
        assert_eq!(f.excluded.len(), 1);
        assert!(matches!(
            fit_rate_excluding(&pts, &[true, false, false, false]),
            Err(Error::Fit(_))
        ));
        assert!(fit_rate(&pts[..2]).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }
}
