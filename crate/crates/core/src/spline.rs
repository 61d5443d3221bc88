//! Natural cubic spline interpolation for tabulated warp and weight data.

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Builds a natural spline through `(knots[i], values[i])`.
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n != values.len() {
            return Err(Error::Config(format!(
                "spline has {} knots but {} values",
                n,
                values.len()
            )));
        }
        if n < 3 {
            return Err(Error::Config("spline needs at least 3 knots".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) || knots.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(
                "spline knots must be finite and strictly increasing".into(),
            ));
        }
        let mut sys = Tridiagonal::zeros(n);
        let mut rhs = vec![0.0; n];
        sys.diag[0] = 1.0;
        sys.diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = knots[i] - knots[i - 1];
            let h1 = knots[i + 1] - knots[i];
            sys.lower[i] = h0 / 6.0;
            sys.diag[i] = (h0 + h1) / 3.0;
            sys.upper[i] = h1 / 6.0;
            rhs[i] = (values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0;
        }
        let moments = sys.solve(&rhs)?;
        Ok(Self {
            knots,
            values,
            moments,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&x).expect("finite knots"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value, first and second derivative at `x` (extrapolates linearly in
    /// the second derivative outside the knot range).
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let i = self.interval(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope =
            (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let curvature = a * m0 + b * m1;
        (value, slope, curvature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data_exactly() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|x| 2.0 * x - 1.0).collect();
        let s = CubicSpline::natural(x, y).unwrap();
        let (v, d, dd) = s.eval(1.37);
        assert!((v - (2.0 * 1.37 - 1.0)).abs() < 1e-13);
        assert!((d - 2.0).abs() < 1e-13);
        assert!(dd.abs() < 1e-12);
    }

    #[test]
    fn interpolates_knots() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.1).powf(1.2)).collect();
        let y: Vec<f64> = x.iter().map(|x: &f64| x.sin()).collect();
        let s = CubicSpline::natural(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi).0 - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(CubicSpline::natural(vec![0.0, 1.0, 0.5], vec![0.0; 3]).is_err());
    }
}
