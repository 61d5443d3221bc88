//! Ricci flow `∂_t g = -2 Ric` on Einstein model spaces, where the flow is
//! the pure scaling `g(t) = s(t) g_0` with `s(t) = s_0 - 2λt`, and the heat
//! equation coupled to it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelSpace, Warp};
use crate::solver::{march, EquationSpec, Grid, SolverConfig, TimeWindow, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSpec {
    #[serde(skip)]
    base: ModelSpace,
    /// Einstein constant: `Ric(g_0) = λ g_0`.
    lambda: f64,
    s0: f64,
    horizon: f64,
}

impl FlowSpec {
    pub fn new(base: ModelSpace, s0: f64, horizon: f64) -> Result<Self> {
        if !base.is_unweighted() {
            return Err(Error::Config(
                "the Ricci flow base must be unweighted".into(),
            ));
        }
        let n1 = base.dimension() as f64 - 1.0;
        let lambda = match base.warp() {
            Warp::Euclidean => 0.0,
            Warp::Hyperbolic { curvature } => -n1 * curvature,
            Warp::Spherical { curvature } => n1 * curvature,
            Warp::Tabulated(_) => {
                return Err(Error::Config(
                    "the Ricci flow base must have constant curvature".into(),
                ))
            }
        };
        if !(s0 > 0.0) || !(horizon > 0.0) {
            return Err(Error::Config(format!(
                "flow needs s0 > 0 and a positive horizon (s0 = {s0}, horizon = {horizon})"
            )));
        }
        let spec = Self {
            base,
            lambda,
            s0,
            horizon,
        };
        let end = spec.s0 - 2.0 * spec.lambda * horizon;
        if end <= 0.0 {
            return Err(Error::FlowExtinction {
                time: horizon,
                scale: end,
            });
        }
        Ok(spec)
    }

    pub fn base(&self) -> &ModelSpace {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn metric_scale(&self, t: f64) -> Result<f64> {
        if !(t >= -1e-12 * self.horizon && t <= self.horizon * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "time {t} outside the flow interval [0, {}]",
                self.horizon
            )));
        }
        let s = self.s0 - 2.0 * self.lambda * t;
        if s <= 0.0 {
            return Err(Error::FlowExtinction { time: t, scale: s });
        }
        Ok(s)
    }

    /// `max_t |Ric|_{g(t)} = max_t |λ| √n / s(t)`.
    pub fn flow_kappa(&self) -> f64 {
        let n = self.base.dimension() as f64;
        let smallest = self.s0.min(self.s0 - 2.0 * self.lambda * self.horizon);
        self.lambda.abs() * n.sqrt() / smallest
    }

    /// Largest rate of change of `dist_{g(t)} = √s(t) r1` and whether it
    /// stays within `κ R`.
    pub fn distance_rate_diagnostic(&self, r1: f64, ball_radius: f64) -> Result<DistanceRate> {
        if !(r1 >= 0.0 && r1 <= ball_radius) {
            return Err(Error::Config(format!(
                "r1 = {r1} must lie in [0, R = {ball_radius}]"
            )));
        }
        let smallest = self.s0.min(self.s0 - 2.0 * self.lambda * self.horizon);
        let rate = self.lambda.abs() * r1 / smallest.sqrt();
        let bound = self.flow_kappa() * ball_radius;
        Ok(DistanceRate {
            max_rate: rate,
            bound,
            within_bound: rate <= bound,
        })
    }

    /// Heat equation on the evolving metric over `window ⊂ [0, horizon]`.
    pub fn solve_on_flow(
        &self,
        eq: &EquationSpec,
        grid: &Grid,
        initial: &[f64],
        window: &TimeWindow,
        config: &SolverConfig,
    ) -> Result<Trajectory> {
        if !eq.is_log_power() {
            return Err(Error::Config(
                "the flow-coupled equation is the log-power family".into(),
            ));
        }
        if window.start() < -1e-12 || window.t0 > self.horizon * (1.0 + 1e-12) {
            let end = self.s0 - 2.0 * self.lambda * window.t0;
            if end <= 0.0 {
                return Err(Error::FlowExtinction {
                    time: window.t0,
                    scale: end,
                });
            }
            return Err(Error::Config(format!(
                "window [{}, {}] must lie in the flow interval [0, {}]",
                window.start(),
                window.t0,
                self.horizon
            )));
        }
        march(
            &self.base,
            eq,
            grid,
            initial,
            window,
            config,
            &|t| self.metric_scale(t),
            Some(self.clone()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceRate {
    pub max_rate: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Weight;
    use crate::solver::solve;

    fn sphere(n: usize) -> ModelSpace {
        ModelSpace::new(n, Warp::Spherical { curvature: 1.0 }, Weight::Zero, 3.0).unwrap()
    }

    fn hyperbolic(n: usize) -> ModelSpace {
        ModelSpace::new(n, Warp::Hyperbolic { curvature: 1.0 }, Weight::Zero, 3.0).unwrap()
    }

    #[test]
    fn scale_examples() {
        let f = FlowSpec::new(sphere(3), 1.0, 0.2).unwrap();
        assert!((f.metric_scale(0.1).unwrap() - 0.6).abs() < 1e-15);
        let f = FlowSpec::new(hyperbolic(3), 1.0, 2.0).unwrap();
        assert_eq!(f.metric_scale(1.0).unwrap(), 5.0);
        let f = FlowSpec::new(ModelSpace::euclidean(3, 3.0).unwrap(), 2.5, 10.0).unwrap();
        assert_eq!(f.metric_scale(7.0).unwrap(), 2.5);
        assert!(matches!(
            FlowSpec::new(sphere(3), 1.0, 0.25),
            Err(Error::FlowExtinction { .. })
        ));
    }

    #[test]
    fn kappa_examples() {
        let flat = FlowSpec::new(ModelSpace::euclidean(3, 3.0).unwrap(), 1.0, 1.0).unwrap();
        assert_eq!(flat.flow_kappa(), 0.0);
        let s = FlowSpec::new(sphere(3), 1.0, 0.125).unwrap();
        assert!((s.flow_kappa() - 4.0 * 3f64.sqrt()).abs() < 1e-14);
        let h = FlowSpec::new(hyperbolic(3), 1.0, 1.0).unwrap();
        assert!((h.flow_kappa() - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kappa_attained_at_an_endpoint() {
        for (space, horizon) in [(sphere(4), 0.1), (hyperbolic(3), 3.0)] {
            let f = FlowSpec::new(space, 0.8, horizon).unwrap();
            let n = f.base().dimension() as f64;
            let at = |t: f64| f.lambda().abs() * n.sqrt() / f.metric_scale(t).unwrap();
            let ends = at(0.0).max(at(horizon));
            assert_eq!(f.flow_kappa(), ends);
            for k in 0..=50 {
                assert!(at(horizon * k as f64 / 50.0) <= ends * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn distance_rate_examples() {
        let flat = FlowSpec::new(ModelSpace::euclidean(3, 3.0).unwrap(), 1.0, 1.0).unwrap();
        let d = flat.distance_rate_diagnostic(1.0, 1.0).unwrap();
        assert_eq!(d.max_rate, 0.0);
        assert!(d.within_bound);
        let s = FlowSpec::new(sphere(3), 1.0, 0.125).unwrap();
        let d = s.distance_rate_diagnostic(1.0, 1.0).unwrap();
        assert!((d.max_rate - 2.0 / 0.5f64.sqrt()).abs() < 1e-14);
        assert!(d.within_bound);
        let h = FlowSpec::new(hyperbolic(3), 1.0, 1.0).unwrap();
        let d = h.distance_rate_diagnostic(1.0, 1.0).unwrap();
        assert!((d.max_rate - 2.0).abs() < 1e-15);
        assert!(d.within_bound);
    }

    #[test]
    fn flat_flow_reproduces_static_solve_bitwise() {
        let space = ModelSpace::euclidean(3, 2.0).unwrap();
        let grid = Grid::ball(2.0, 65).unwrap();
        let eq = EquationSpec::log_power(-1.0, 0.1, -0.3, 0.2, 2.0, 1.0);
        let init = grid.sample(|r| 0.5 + 0.2 * (std::f64::consts::PI * r / 2.0).cos());
        let window = TimeWindow::uniform(0.5, 0.5, 5).unwrap();
        let cfg = SolverConfig::with_dt(0.01);
        let fixed = solve(&space, &eq, &grid, &init, &window, &cfg).unwrap();
        let flow = FlowSpec::new(space, 1.0, 1.0).unwrap();
        let moving = flow
            .solve_on_flow(&eq, &grid, &init, &window, &cfg)
            .unwrap();
        for (a, b) in fixed.snapshots.iter().zip(&moving.snapshots) {
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn constant_data_stays_constant_on_any_flow() {
        let flow = FlowSpec::new(sphere(3), 1.0, 0.1).unwrap();
        let grid = Grid::ball(3.0, 65).unwrap();
        let window = TimeWindow::uniform(0.1, 0.1, 4).unwrap();
        let traj = flow
            .solve_on_flow(
                &EquationSpec::heat(),
                &grid,
                &vec![0.3; 65],
                &window,
                &SolverConfig::with_dt(0.005),
            )
            .unwrap();
        for s in &traj.snapshots {
            assert!(s.values.iter().all(|u| (u - 0.3).abs() < 1e-14));
        }
        assert!((traj.last().scale - 0.6).abs() < 1e-14);
    }
}
