//! Rotationally symmetric smooth metric measure spaces in geodesic polar
//! coordinates: `g = dr² + φ(r)² g_{S^{n-1}}` with weighted volume `e^{-f} dv`.
//!
//! Every curvature quantity the certificates consume is evaluated here in
//! closed form from the warp `φ` and the weight `f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Minimum number of samples for tabulated warps or weights.
pub const MIN_TABULATED_NODES: usize = 16;

/// Sample count used to scan closed-form curvature expressions.
const CLOSED_FORM_SCAN: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub enum Warp {
    Euclidean,
    /// Constant sectional curvature `-curvature`.
    Hyperbolic {
        curvature: f64,
    },
    /// Constant sectional curvature `+curvature`.
    Spherical {
        curvature: f64,
    },
    Tabulated(CubicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Zero,
    /// `f(r) = λ r² / 2`, the Gaussian soliton weight.
    GaussianHalfSquare {
        lambda: f64,
    },
    Tabulated(CubicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    dimension: usize,
    warp: Warp,
    weight: Weight,
    r_max: f64,
}

/// Curvature constants of a model space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSummary {
    /// `Ric_f >= -(n-1) k_eff` on the domain.
    pub k_eff: f64,
    /// `Δ_f r` at `r = 1`.
    pub alpha: f64,
    /// Frobenius bound on the unweighted Ricci tensor.
    pub kappa: f64,
}

impl ModelSpace {
    pub fn new(dimension: usize, warp: Warp, weight: Weight, r_max: f64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Config(format!(
                "dimension must be >= 2, got {dimension}"
            )));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Config(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        match &warp {
            Warp::Euclidean => {}
            Warp::Hyperbolic { curvature } => {
                if !(*curvature > 0.0) {
                    return Err(Error::Config(
                        "hyperbolic curvature must be positive".into(),
                    ));
                }
            }
            Warp::Spherical { curvature } => {
                if !(*curvature > 0.0) {
                    return Err(Error::Config("spherical curvature must be positive".into()));
                }
                let antipode = std::f64::consts::PI / curvature.sqrt();
                if r_max >= antipode {
                    return Err(Error::Config(format!(
                        "spherical r_max {r_max} must stay below the antipodal radius {antipode}"
                    )));
                }
            }
            Warp::Tabulated(s) => check_table("warp", s, r_max)?,
        }
        match &weight {
            Weight::Zero => {}
            Weight::GaussianHalfSquare { lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::Config("Gaussian weight needs lambda > 0".into()));
                }
            }
            Weight::Tabulated(s) => check_table("weight", s, r_max)?,
        }
        let space = Self {
            dimension,
            warp,
            weight,
            r_max,
        };
        if let Warp::Tabulated(s) = &space.warp {
            let (phi0, dphi0, _) = s.eval(0.0);
            let scale = s.values().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            if phi0.abs() > 1e-12 * scale || (dphi0 - 1.0).abs() > 1e-2 {
                return Err(Error::Config(format!(
                    "tabulated warp must close smoothly at the pole (phi(0)={phi0}, phi'(0)={dphi0})"
                )));
            }
            if s.values().iter().skip(1).any(|v| *v <= 0.0) {
                return Err(Error::Config(
                    "tabulated warp must be positive away from the pole".into(),
                ));
            }
        }
        if let Weight::Tabulated(s) = &space.weight {
            let (_, df0, _) = s.eval(0.0);
            let scale = s.eval(s.knots()[1]).1.abs().max(1.0);
            if df0.abs() > 1e-2 * scale {
                return Err(Error::Config(format!(
                    "tabulated weight must satisfy f'(0)=0 (got {df0})"
                )));
            }
        }
        Ok(space)
    }

    pub fn euclidean(dimension: usize, r_max: f64) -> Result<Self> {
        Self::new(dimension, Warp::Euclidean, Weight::Zero, r_max)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn is_unweighted(&self) -> bool {
        matches!(self.weight, Weight::Zero)
    }

    /// Same warp and weight on a different radial extent.
    pub fn with_r_max(&self, r_max: f64) -> Result<Self> {
        Self::new(
            self.dimension,
            self.warp.clone(),
            self.weight.clone(),
            r_max,
        )
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        // allow the last grid node to land a few ulps past r_max
        if !(r >= 0.0 && r <= self.r_max * (1.0 + 1e-12)) {
            return Err(Error::Domain {
                r,
                r_max: self.r_max,
            });
        }
        Ok(())
    }

    /// Warp value and its first two derivatives.
    pub fn warp_eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.check_radius(r)?;
        Ok(match &self.warp {
            Warp::Euclidean => (r, 1.0, 0.0),
            Warp::Hyperbolic { curvature } => {
                let s = curvature.sqrt();
                let (sh, ch) = ((s * r).sinh(), (s * r).cosh());
                (sh / s, ch, s * sh)
            }
            Warp::Spherical { curvature } => {
                let s = curvature.sqrt();
                let (sn, cs) = ((s * r).sin(), (s * r).cos());
                (sn / s, cs, -s * sn)
            }
            Warp::Tabulated(spline) => spline.eval(r),
        })
    }

    /// Weight value and its first two derivatives.
    pub fn weight_eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.check_radius(r)?;
        Ok(match &self.weight {
            Weight::Zero => (0.0, 0.0, 0.0),
            Weight::GaussianHalfSquare { lambda } => (0.5 * lambda * r * r, lambda * r, *lambda),
            Weight::Tabulated(spline) => spline.eval(r),
        })
    }

    /// Coefficient of `u_r` in the radial f-Laplacian,
    /// `Δ_f u = u_rr + [(n-1) φ'/φ - f'] u_r`.
    pub fn drift_coefficient(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Err(Error::Pole);
        }
        let (phi, dphi, _) = self.warp_eval(r)?;
        let (_, df, _) = self.weight_eval(r)?;
        Ok((self.dimension as f64 - 1.0) * dphi / phi - df)
    }

    /// Density of the weighted volume element per unit `dr` and unit sphere area.
    pub fn volume_density(&self, r: f64) -> Result<f64> {
        let (phi, _, _) = self.warp_eval(r)?;
        let (f, _, _) = self.weight_eval(r)?;
        Ok(phi.powi(self.dimension as i32 - 1) * (-f).exp())
    }

    /// Sectional curvatures `(radial, tangential)`: `-φ''/φ` for planes
    /// containing `∂_r`, `(1-φ'²)/φ²` for planes tangent to the sphere.
    pub fn sectional_curvatures(&self, r: f64) -> Result<(f64, f64)> {
        match &self.warp {
            Warp::Euclidean => Ok((0.0, 0.0)),
            Warp::Hyperbolic { curvature } => Ok((-curvature, -curvature)),
            Warp::Spherical { curvature } => Ok((*curvature, *curvature)),
            Warp::Tabulated(_) => {
                if r == 0.0 {
                    return Err(Error::Pole);
                }
                let (phi, dphi, ddphi) = self.warp_eval(r)?;
                Ok((-ddphi / phi, (1.0 - dphi * dphi) / (phi * phi)))
            }
        }
    }

    /// Unweighted Ricci eigenvalues `(radial, tangential)`.
    pub fn ricci_eigenvalues(&self, r: f64) -> Result<(f64, f64)> {
        let n = self.dimension as f64;
        let (k_rad, k_tan) = self.sectional_curvatures(r)?;
        Ok(((n - 1.0) * k_rad, k_rad + (n - 2.0) * k_tan))
    }

    /// Bakry–Émery Ricci eigenvalues `Ric + Hess f`, `(radial, tangential)`.
    pub fn bakry_emery_eigenvalues(&self, r: f64) -> Result<(f64, f64)> {
        let (rad, tan) = self.ricci_eigenvalues(r)?;
        let (_, df, ddf) = self.weight_eval(r)?;
        let tangential_hessian = match (&self.warp, &self.weight) {
            (_, Weight::Zero) => 0.0,
            (Warp::Euclidean, Weight::GaussianHalfSquare { lambda }) => *lambda,
            _ => {
                if r == 0.0 {
                    return Err(Error::Pole);
                }
                let (phi, dphi, _) = self.warp_eval(r)?;
                df * dphi / phi
            }
        };
        Ok((rad + ddf, tan + tangential_hessian))
    }

    /// Radii at which curvature minima and maxima are scanned: the sample
    /// nodes of tabulated data, a uniform scan otherwise. The pole is excluded.
    fn curvature_scan(&self) -> Result<Vec<f64>> {
        let mut nodes: Vec<f64> = Vec::new();
        for table in [self.warp_table(), self.weight_table()]
            .into_iter()
            .flatten()
        {
            if table.knots().len() < MIN_TABULATED_NODES {
                return Err(Error::Config(format!(
                    "tabulated data has {} nodes, need at least {MIN_TABULATED_NODES}",
                    table.knots().len()
                )));
            }
            nodes.extend(
                table
                    .knots()
                    .iter()
                    .copied()
                    .filter(|r| *r > 0.0 && *r <= self.r_max),
            );
        }
        if nodes.is_empty() {
            let h = self.r_max / CLOSED_FORM_SCAN as f64;
            nodes.extend((1..=CLOSED_FORM_SCAN).map(|i| i as f64 * h));
        } else {
            nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            nodes.dedup();
        }
        Ok(nodes)
    }

    fn warp_table(&self) -> Option<&CubicSpline> {
        match &self.warp {
            Warp::Tabulated(s) => Some(s),
            _ => None,
        }
    }

    fn weight_table(&self) -> Option<&CubicSpline> {
        match &self.weight {
            Weight::Tabulated(s) => Some(s),
            _ => None,
        }
    }

    /// Smallest `K >= 0` with `Ric_f >= -(n-1) K` on `(0, r_max]`.
    pub fn bakry_emery_lower_bound(&self) -> Result<f64> {
        let n = self.dimension as f64;
        let mut lowest = f64::INFINITY;
        for r in self.curvature_scan()? {
            let (rad, tan) = self.bakry_emery_eigenvalues(r)?;
            lowest = lowest.min(rad).min(tan);
        }
        Ok((-lowest / (n - 1.0)).max(0.0))
    }

    /// Smallest `K >= 0` with `Ric >= -K` (unweighted, no dimensional factor).
    pub fn ricci_lower_bound(&self) -> Result<f64> {
        let mut lowest = f64::INFINITY;
        for r in self.curvature_scan()? {
            let (rad, tan) = self.ricci_eigenvalues(r)?;
            lowest = lowest.min(rad).min(tan);
        }
        Ok((-lowest).max(0.0))
    }

    /// Largest sectional curvature on the radial band `[lo, hi]`.
    pub fn sectional_upper_bound(&self, lo: f64, hi: f64) -> Result<f64> {
        match &self.warp {
            Warp::Tabulated(_) => {
                let mut top = f64::NEG_INFINITY;
                let steps = 256;
                let lo = lo.max(self.r_max * 1e-6);
                for i in 0..=steps {
                    let r = lo + (hi - lo) * i as f64 / steps as f64;
                    let (a, b) = self.sectional_curvatures(r)?;
                    top = top.max(a).max(b);
                }
                Ok(top)
            }
            _ => {
                let (a, b) = self.sectional_curvatures(hi.max(lo).max(f64::MIN_POSITIVE))?;
                Ok(a.max(b))
            }
        }
    }

    pub fn comparison_quantities(&self) -> Result<CurvatureSummary> {
        if self.r_max < 1.0 {
            return Err(Error::Config(format!(
                "alpha needs the unit ball inside the domain, r_max = {}",
                self.r_max
            )));
        }
        let alpha = self.drift_coefficient(1.0)?;
        let k_eff = self.bakry_emery_lower_bound()?;
        let mut largest = 0.0_f64;
        for r in self.curvature_scan()? {
            let (rad, tan) = self.ricci_eigenvalues(r)?;
            largest = largest.max(rad.abs()).max(tan.abs());
        }
        Ok(CurvatureSummary {
            k_eff,
            alpha,
            kappa: (self.dimension as f64).sqrt() * largest,
        })
    }
}

fn check_table(what: &str, spline: &CubicSpline, r_max: f64) -> Result<()> {
    let knots = spline.knots();
    if knots.len() < MIN_TABULATED_NODES {
        return Err(Error::Config(format!(
            "tabulated {what} has {} nodes, need at least {MIN_TABULATED_NODES}",
            knots.len()
        )));
    }
    if knots[0] != 0.0 {
        return Err(Error::Config(format!(
            "tabulated {what} must start at r = 0"
        )));
    }
    if *knots.last().unwrap() < r_max * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "tabulated {what} does not reach r_max = {r_max}"
        )));
    }
    Ok(())
}

/// Parses two-column `r,value` CSV text (optional header line) into a natural spline.
pub fn spline_from_csv(text: &str) -> Result<CubicSpline> {
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (a, b) = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Config(format!(
                    "line {}: expected two columns r,value",
                    lineno + 1
                )))
            }
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                r.push(x);
                v.push(y);
            }
            _ if r.is_empty() => continue, // header
            _ => {
                return Err(Error::Config(format!(
                    "line {}: unparsable number",
                    lineno + 1
                )));
            }
        }
    }
    if r.first() != Some(&0.0) {
        return Err(Error::Config("tabulated data must start at r = 0".into()));
    }
    CubicSpline::natural(r, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn hyperbolic(n: usize, r_max: f64) -> ModelSpace {
        ModelSpace::new(n, Warp::Hyperbolic { curvature: 1.0 }, Weight::Zero, r_max).unwrap()
    }

    #[test]
    fn warp_values() {
        let e = ModelSpace::euclidean(3, 5.0).unwrap();
        assert_eq!(e.warp_eval(2.0).unwrap(), (2.0, 1.0, 0.0));
        let h = hyperbolic(3, 5.0);
        assert_eq!(h.warp_eval(0.0).unwrap(), (0.0, 1.0, 0.0));
        // sinh(1), cosh(1), sinh(1) from mpmath at 30 digits
        let (p, dp, ddp) = h.warp_eval(1.0).unwrap();
        assert!(close(p, 1.1752011936438014, 1e-15));
        assert!(close(dp, 1.5430806348152437, 1e-15));
        assert!(close(ddp, 1.1752011936438014, 1e-15));
        assert!(matches!(h.warp_eval(5.5), Err(Error::Domain { .. })));
        assert!(matches!(h.warp_eval(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn drift_values() {
        let e = ModelSpace::euclidean(3, 5.0).unwrap();
        assert_eq!(e.drift_coefficient(2.0).unwrap(), 1.0);
        let g = ModelSpace::new(
            3,
            Warp::Euclidean,
            Weight::GaussianHalfSquare { lambda: 1.0 },
            5.0,
        )
        .unwrap();
        assert_eq!(g.drift_coefficient(2.0).unwrap(), -1.0);
        // 2 coth(1) from mpmath at 30 digits
        let h = hyperbolic(3, 5.0);
        assert!(close(
            h.drift_coefficient(1.0).unwrap(),
            2.6260705709986626,
            1e-14
        ));
        assert_eq!(h.drift_coefficient(0.0), Err(Error::Pole));
    }

    #[test]
    fn bakry_emery_bounds() {
        assert_eq!(
            ModelSpace::euclidean(3, 4.0)
                .unwrap()
                .bakry_emery_lower_bound()
                .unwrap(),
            0.0
        );
        for n in 2..6 {
            assert_eq!(hyperbolic(n, 4.0).bakry_emery_lower_bound().unwrap(), 1.0);
        }
        let g = ModelSpace::new(
            3,
            Warp::Euclidean,
            Weight::GaussianHalfSquare { lambda: 1.0 },
            4.0,
        )
        .unwrap();
        assert_eq!(g.bakry_emery_lower_bound().unwrap(), 0.0);
        let s = ModelSpace::new(3, Warp::Spherical { curvature: 1.0 }, Weight::Zero, 3.0).unwrap();
        assert_eq!(s.bakry_emery_lower_bound().unwrap(), 0.0);
        let hk =
            ModelSpace::new(4, Warp::Hyperbolic { curvature: 2.5 }, Weight::Zero, 2.0).unwrap();
        assert_eq!(hk.bakry_emery_lower_bound().unwrap(), 2.5);
    }

    #[test]
    fn comparison_summary() {
        let e = ModelSpace::euclidean(3, 4.0)
            .unwrap()
            .comparison_quantities()
            .unwrap();
        assert_eq!(e.alpha, 2.0);
        assert_eq!(e.kappa, 0.0);
        let h = hyperbolic(3, 4.0).comparison_quantities().unwrap();
        assert!(close(h.alpha, 2.6260705709986626, 1e-14));
        assert!(close(h.kappa, 3f64.sqrt() * 2.0, 1e-14));
        let g = ModelSpace::new(
            3,
            Warp::Euclidean,
            Weight::GaussianHalfSquare { lambda: 1.0 },
            4.0,
        )
        .unwrap();
        assert_eq!(g.comparison_quantities().unwrap().alpha, 1.0);
        assert!(matches!(
            ModelSpace::euclidean(3, 0.5)
                .unwrap()
                .comparison_quantities(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn spherical_drift_finite_at_r_max() {
        let r_max = 0.999 * std::f64::consts::PI;
        let s =
            ModelSpace::new(3, Warp::Spherical { curvature: 1.0 }, Weight::Zero, r_max).unwrap();
        let d = s.drift_coefficient(r_max).unwrap();
        assert!(d.is_finite() && d < -100.0);
        assert!(ModelSpace::new(3, Warp::Spherical { curvature: 1.0 }, Weight::Zero, 3.2).is_err());
    }

    fn sampled_hyperbolic(nodes: usize, r_max: f64) -> ModelSpace {
        sampled_hyperbolic_to(nodes, r_max, r_max)
    }

    fn sampled_hyperbolic_to(nodes: usize, table_end: f64, r_max: f64) -> ModelSpace {
        let r: Vec<f64> = (0..nodes)
            .map(|i| table_end * i as f64 / (nodes - 1) as f64)
            .collect();
        let v: Vec<f64> = r.iter().map(|x| x.sinh()).collect();
        ModelSpace::new(
            3,
            Warp::Tabulated(CubicSpline::natural(r, v).unwrap()),
            Weight::Zero,
            r_max,
        )
        .unwrap()
    }

    #[test]
    fn tabulated_warp_converges_at_fourth_order() {
        // natural end conditions pollute the last few intervals at O(h^2)
        // because sinh'' does not vanish at r_max; away from there the
        // spline is fourth-order accurate.
        let r_max = 2.0;
        let err = |nodes: usize| {
            let s = sampled_hyperbolic(nodes, r_max);
            (0..=400)
                .map(|i| 0.75 * r_max * i as f64 / 400.0)
                .map(|r| (s.warp_eval(r).unwrap().0 - r.sinh()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(33), err(65), err(129));
        assert!((e1 / e2).log2() > 3.7, "{e1} {e2}");
        assert!((e2 / e3).log2() > 3.7, "{e2} {e3}");
    }

    #[test]
    fn tabulated_requires_enough_nodes() {
        let r: Vec<f64> = (0..8).map(|i| i as f64 * 0.25).collect();
        let v = r.clone();
        let s = CubicSpline::natural(r, v).unwrap();
        assert!(ModelSpace::new(3, Warp::Tabulated(s), Weight::Zero, 1.75).is_err());
    }

    #[test]
    fn tabulated_curvature_close_to_closed_form() {
        // the table overhangs r_max so the natural end condition stays outside
        let s = sampled_hyperbolic_to(257, 4.0, 3.0);
        let k = s.bakry_emery_lower_bound().unwrap();
        assert!((k - 1.0).abs() < 0.05, "{k}");
    }

    #[test]
    fn csv_round_trip() {
        let text = "r,phi\n0,0\n0.5,0.5\n1.0,1.0\n1.5,1.5\n";
        let s = spline_from_csv(text).unwrap();
        assert_eq!(s.knots().len(), 4);
        assert!(spline_from_csv("r,phi\n0.1,0\n0.5,0.5\n1,1\n").is_err());
        assert!(spline_from_csv("0,0\n1,x\n").is_err());
    }
}
