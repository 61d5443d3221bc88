//! Tridiagonal linear algebra for the radial implicit systems.

use crate::error::{Error, Result};

/// A tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| self.lower[i].abs() + self.diag[i].abs() + self.upper[i].abs())
            .fold(0.0, f64::max)
    }

    /// Thomas algorithm. Fails on a (numerically) zero pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot.abs() <= 1e-14 * scale {
            return Err(singular(0, pivot));
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot.abs() <= 1e-14 * scale {
                return Err(singular(i, pivot));
            }
            c[i] = if i + 1 < n {
                self.upper[i] / pivot
            } else {
                0.0
            };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }

    /// Solves a consistent singular system whose null space is spanned by a
    /// vector with nonzero last component, by pinning the last unknown to zero.
    pub fn solve_pinned_last(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut pinned = self.clone();
        pinned.lower[n - 1] = 0.0;
        pinned.diag[n - 1] = 1.0;
        let mut b = rhs.to_vec();
        b[n - 1] = 0.0;
        pinned.solve(&b)
    }
}

fn singular(row: usize, pivot: f64) -> Error {
    Error::Solver {
        iterations: 0,
        residual: pivot.abs(),
        history: vec![row as f64],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_product() {
        let n = 7;
        let mut m = Tridiagonal::zeros(n);
        for i in 0..n {
            m.diag[i] = 4.0 + i as f64;
            m.lower[i] = -1.0;
            m.upper[i] = -1.5;
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = m.mul_vec(&x);
        let y = m.solve(&b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn neumann_laplacian_is_singular_but_pinnable() {
        let n = 5;
        let mut m = Tridiagonal::zeros(n);
        for i in 0..n {
            m.diag[i] = -2.0;
            m.lower[i] = 1.0;
            m.upper[i] = 1.0;
        }
        m.upper[0] = 2.0;
        m.lower[n - 1] = 2.0;
        let x = vec![0.3, 0.1, -0.2, 0.0, 0.5];
        let b = m.mul_vec(&x);
        assert!(m.solve(&b).is_err());
        let y = m.solve_pinned_last(&b).unwrap();
        let shift = x[n - 1] - y[n - 1];
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b - shift).abs() < 1e-12);
        }
    }
}
