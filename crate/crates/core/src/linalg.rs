//! Banded LU factorisation with partial pivoting.
//!
//! The per-mode y-systems are narrow-banded (interior stencils plus a few
//! wider one-sided boundary rows), so everything is stored in a band of
//! width `2*kl + ku + 1` per row to leave room for pivoting fill-in.

use std::ops::{Div, Mul, SubAssign};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        // row i stores columns i-kl ..= i+ku+kl
        if j + self.kl < i || j > i + self.ku + self.kl {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.offset(i, j).map_or(0.0, |o| self.data[o])
    }

    /// Adds `v` at (i, j). Panics if (i, j) lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let o = self.offset(i, j).unwrap();
        self.data[o] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let o = self.offset(i, j).unwrap();
        self.data[o] = v;
    }

    /// Clears row `i` inside the declared band.
    pub fn clear_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let o = self.offset(i, j).unwrap();
            self.data[o] = 0.0;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::Singular("zero matrix".into()));
        }
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-14 {
                return Err(Error::Singular(format!(
                    "pivot {best:e} at column {k} of {n} (matrix scale {scale:e})"
                )));
            }
            piv[k] = p;
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.offset(k, j).unwrap();
                    let b = self.offset(p, j).unwrap();
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let oi = self.offset(i, k).unwrap();
                let l = self.data[oi] / pivot;
                self.data[oi] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let akj = self.get(k, j);
                    if akj != 0.0 {
                        let o = self.offset(i, j).unwrap();
                        self.data[o] -= l * akj;
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

/// A factored banded matrix, reusable for any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn size(&self) -> usize {
        self.m.n
    }

    pub fn solve_in_place<T>(&self, b: &mut [T])
    where
        T: Copy + SubAssign + Mul<f64, Output = T> + Div<f64, Output = T>,
    {
        let m = &self.m;
        let n = m.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + m.kl).min(n - 1);
            for i in k + 1..=last {
                let l = m.get(i, k);
                if l != 0.0 {
                    b[i] -= bk * l;
                }
            }
        }
        for i in (0..n).rev() {
            let jmax = (i + m.ku + m.kl).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=jmax {
                let a = m.get(i, j);
                if a != 0.0 {
                    acc -= b[j] * a;
                }
            }
            b[i] = acc / m.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())
                .unwrap();
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let l = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= l * m[k][j];
                }
                x[i] -= l * x[k];
            }
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
            x[i] = (x[i] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn matches_dense_solve_with_pivoting() {
        let n = 12;
        let (kl, ku) = (2, 4);
        let mut bm = BandedMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces row interchanges
                let v = if i == j { 0.01 * (i as f64 + 1.0) } else { ((i * 7 + j * 3) % 5) as f64 - 2.0 };
                bm.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let expect = dense_solve(&dense, &b);
        let lu = bm.clone().factor().unwrap();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        for (a, e) in x.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-10 * (1.0 + e.abs()), "{a} vs {e}");
        }
        let r = bm.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-10);
        }

        let mut xc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, -2.0 * v)).collect();
        lu.solve_in_place(&mut xc);
        for (c, e) in xc.iter().zip(&expect) {
            assert!((c.re - e).abs() < 1e-10 * (1.0 + e.abs()));
            assert!((c.im + 2.0 * e).abs() < 1e-9 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut bm = BandedMatrix::zeros(4, 1, 1);
        for i in 0..4 {
            bm.set(i, i, 1.0);
        }
        bm.clear_row(2);
        assert!(matches!(bm.factor(), Err(Error::Singular(_))));
    }
}
