//! Finite-difference integration of the radial weighted heat equations
//! `u_t = Δ_f u + F(u)` and of their stationary versions.

mod equation;
mod grid;
mod oracle;

pub use equation::{EquationSpec, Exponential, LogPower};
pub use grid::{discrete_f_laplacian, f_laplacian_matrix, BoundaryKind, Grid, MIN_NODES};
pub use oracle::constant_ode_oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowSpec;
use crate::geometry::ModelSpace;
use crate::linalg::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Backward Euler, Newton on the full nonlinear system.
    #[default]
    ImplicitEuler,
    /// Implicit diffusion, explicit reaction.
    Imex,
    /// Second-order backward differentiation, Newton on the full system.
    /// The first step is backward Euler.
    Bdf2,
}

/// Bound the scenario claims for its solution; violations are recorded, not fatal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeclaredBound {
    /// `0 < u <= 1`.
    UnitInterval,
    /// `1 < u < upper`.
    AboveOne { upper: f64 },
}

impl DeclaredBound {
    pub fn holds(&self, u: f64) -> bool {
        match self {
            DeclaredBound::UnitInterval => u > 0.0 && u <= 1.0,
            DeclaredBound::AboveOne { upper } => u > 1.0 && u < *upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub positivity_floor: f64,
    pub bound: Option<DeclaredBound>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::ImplicitEuler,
            newton_tol: 1e-12,
            newton_max_iters: 50,
            positivity_floor: 1e-12,
            bound: None,
        }
    }
}

impl SolverConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.newton_tol > 0.0) || !(self.positivity_floor > 0.0) || self.newton_max_iters == 0
        {
            return Err(Error::Config("Newton tolerances must be positive".into()));
        }
        if let Some(DeclaredBound::AboveOne { upper }) = self.bound {
            if !(upper > 1.0) {
                return Err(Error::Config(format!(
                    "declared upper bound {upper} must exceed 1"
                )));
            }
        }
        Ok(())
    }
}

/// The time window `[t0 - T, t0]` and the snapshot times inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t0: f64,
    pub duration: f64,
    pub snapshots: Vec<f64>,
}

impl TimeWindow {
    pub fn new(t0: f64, duration: f64, snapshots: Vec<f64>) -> Result<Self> {
        let w = Self {
            t0,
            duration,
            snapshots,
        };
        w.validate()?;
        Ok(w)
    }

    /// `count` equally spaced snapshots, the last one at `t0`.
    pub fn uniform(t0: f64, duration: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("at least one snapshot is required".into()));
        }
        let start = t0 - duration;
        let snaps = (1..=count)
            .map(|k| {
                if k == count {
                    t0
                } else {
                    start + duration * k as f64 / count as f64
                }
            })
            .collect();
        Self::new(t0, duration, snaps)
    }

    pub fn start(&self) -> f64 {
        self.t0 - self.duration
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite() && self.t0.is_finite()) {
            return Err(Error::Config(format!(
                "window duration must be positive, got {}",
                self.duration
            )));
        }
        if self.snapshots.is_empty() {
            return Err(Error::Config("at least one snapshot is required".into()));
        }
        let slack = 1e-12 * self.duration.max(self.t0.abs());
        for pair in self.snapshots.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Config(
                    "snapshot times must be strictly increasing".into(),
                ));
            }
        }
        if self.snapshots[0] <= self.start() || *self.snapshots.last().unwrap() > self.t0 + slack {
            return Err(Error::Config(format!(
                "snapshots must lie in ({}, {}]",
                self.start(),
                self.t0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
    /// Metric scale `s(t)` with `g(t) = s(t) g_0`; 1 on a static metric.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SolverStats {
    pub steps: usize,
    pub newton_iterations: usize,
    pub max_final_residual: f64,
}

/// Where a declared bound first failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundViolation {
    pub time: f64,
    pub node: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub space: ModelSpace,
    pub eq: EquationSpec,
    pub grid: Grid,
    pub window: TimeWindow,
    pub bc: BoundaryKind,
    pub initial: Snapshot,
    pub snapshots: Vec<Snapshot>,
    pub declared_bound: Option<DeclaredBound>,
    pub bound_violation: Option<BoundViolation>,
    pub stats: SolverStats,
    pub flow: Option<FlowSpec>,
    pub dt: f64,
}

impl Trajectory {
    pub fn bound_held(&self) -> bool {
        self.bound_violation.is_none()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectories carry at least one snapshot")
    }

    /// Smallest and largest value over all snapshots (initial data excluded).
    pub fn value_range(&self) -> (f64, f64) {
        self.snapshots
            .iter()
            .flat_map(|s| s.values.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
                (lo.min(u), hi.max(u))
            })
    }

    /// CSV with one row per node: `r, u(t_1), u(t_2), ...`. Flow trajectories
    /// carry an extra `s(t)` row below the header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r");
        for s in &self.snapshots {
            out.push_str(&format!(",{:?}", s.time));
        }
        out.push('\n');
        if self.flow.is_some() {
            out.push_str("s(t)");
            for s in &self.snapshots {
                out.push_str(&format!(",{:?}", s.scale));
            }
            out.push('\n');
        }
        for i in 0..self.grid.len() {
            out.push_str(&format!("{:?}", self.grid.radius(i)));
            for s in &self.snapshots {
                out.push_str(&format!(",{:?}", s.values[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Single-field CSV: `r,u`.
pub fn field_to_csv(grid: &Grid, field: &[f64]) -> String {
    let mut out = String::from("r,u\n");
    for (i, u) in field.iter().enumerate() {
        out.push_str(&format!("{:?},{:?}\n", grid.radius(i), u));
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Nonlinear system `mass·u - coef·(L u + F(u)) = rhs` and its Newton solve.
struct NewtonSystem<'a> {
    op: &'a Tridiagonal,
    eq: &'a EquationSpec,
    mass: f64,
    coef: f64,
    rhs: &'a [f64],
}

struct NewtonOutcome {
    field: Vec<f64>,
    iterations: usize,
    residual: f64,
}

impl NewtonSystem<'_> {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let lu = self.op.mul_vec(u);
        u.iter()
            .zip(&lu)
            .zip(self.rhs)
            .map(|((&ui, &li), &bi)| {
                Ok(self.mass * ui - self.coef * (li + self.eq.reaction(ui)?.0) - bi)
            })
            .collect()
    }

    fn jacobian(&self, u: &[f64]) -> Result<Tridiagonal> {
        let mut j = Tridiagonal::zeros(u.len());
        for (i, &ui) in u.iter().enumerate() {
            j.lower[i] = -self.coef * self.op.lower[i];
            j.upper[i] = -self.coef * self.op.upper[i];
            j.diag[i] = self.mass - self.coef * (self.op.diag[i] + self.eq.reaction(ui)?.1);
        }
        Ok(j)
    }

    /// Damped Newton. Converges when the residual max-norm drops below `tol`,
    /// or when updates stagnate at round-off with a residual below `tol`
    /// relative to the Jacobian norm.
    fn solve(
        &self,
        guess: Vec<f64>,
        config: &SolverConfig,
        allow_singular: bool,
    ) -> Result<NewtonOutcome> {
        let positive = self.eq.is_log_power();
        let mut u = guess;
        let mut history = Vec::new();
        for iteration in 0..=config.newton_max_iters {
            let f = self.residual(&u)?;
            let res = max_abs(&f);
            history.push(res);
            if res <= config.newton_tol {
                return Ok(NewtonOutcome {
                    field: u,
                    iterations: iteration,
                    residual: res,
                });
            }
            if iteration == config.newton_max_iters {
                break;
            }
            let jac = self.jacobian(&u)?;
            let neg: Vec<f64> = f.iter().map(|x| -x).collect();
            let delta = match jac.solve(&neg) {
                Ok(d) => d,
                Err(_) if allow_singular => jac.solve_pinned_last(&neg)?,
                Err(_) => {
                    return Err(Error::Solver {
                        iterations: iteration,
                        residual: res,
                        history,
                    })
                }
            };
            let mut lambda = 1.0;
            if positive {
                let mut halvings = 0;
                // nodes already under the floor may shrink by at most half
                let threshold: Vec<f64> = u
                    .iter()
                    .map(|a| config.positivity_floor.min(0.5 * a))
                    .collect();
                while u
                    .iter()
                    .zip(&delta)
                    .zip(&threshold)
                    .any(|((a, d), lo)| a + lambda * d < *lo)
                {
                    lambda *= 0.5;
                    halvings += 1;
                    if halvings > 60 {
                        return Err(Error::Positivity(format!(
                            "Newton iterate stays below the floor {} after full damping",
                            config.positivity_floor
                        )));
                    }
                }
            }
            for (a, d) in u.iter_mut().zip(&delta) {
                *a += lambda * d;
            }
            let step = lambda * max_abs(&delta);
            if step <= 8.0 * f64::EPSILON * max_abs(&u).max(1.0) {
                let f = self.residual(&u)?;
                let res = max_abs(&f);
                if res <= config.newton_tol * jac.norm_inf().max(1.0) {
                    history.push(res);
                    return Ok(NewtonOutcome {
                        field: u,
                        iterations: iteration + 1,
                        residual: res,
                    });
                }
            }
        }
        Err(Error::Solver {
            iterations: config.newton_max_iters,
            residual: *history.last().unwrap_or(&f64::NAN),
            history,
        })
    }
}

fn check_admissible(eq: &EquationSpec, field: &[f64]) -> Result<()> {
    if let Some((i, u)) = field.iter().enumerate().find(|(_, u)| !u.is_finite()) {
        return Err(Error::Config(format!("non-finite value {u} at node {i}")));
    }
    if eq.is_log_power() {
        if let Some((i, u)) = field.iter().enumerate().find(|(_, u)| **u <= 0.0) {
            return Err(Error::Positivity(format!(
                "value {u} at node {i} must be positive"
            )));
        }
    }
    Ok(())
}

/// One time step of length `config.dt` from `state` (BDF2 falls back to
/// backward Euler since no history is available).
pub fn step(
    space: &ModelSpace,
    grid: &Grid,
    eq: &EquationSpec,
    state: &[f64],
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    check_admissible(eq, state)?;
    let op = f_laplacian_matrix(space, grid)?;
    Ok(advance(&op, eq, state, None, config)?.field)
}

fn advance(
    op: &Tridiagonal,
    eq: &EquationSpec,
    prev: &[f64],
    older: Option<&[f64]>,
    config: &SolverConfig,
) -> Result<NewtonOutcome> {
    let dt = config.dt;
    match (config.scheme, older) {
        (Scheme::Imex, _) => {
            let rhs = prev
                .iter()
                .map(|&u| Ok(u + dt * eq.reaction(u)?.0))
                .collect::<Result<Vec<f64>>>()?;
            let mut m = Tridiagonal::zeros(prev.len());
            for i in 0..prev.len() {
                m.lower[i] = -dt * op.lower[i];
                m.diag[i] = 1.0 - dt * op.diag[i];
                m.upper[i] = -dt * op.upper[i];
            }
            let field = m.solve(&rhs)?;
            check_admissible(eq, &field)?;
            Ok(NewtonOutcome {
                field,
                iterations: 1,
                residual: 0.0,
            })
        }
        (Scheme::Bdf2, Some(older)) => {
            let rhs: Vec<f64> = prev
                .iter()
                .zip(older)
                .map(|(a, b)| (4.0 * a - b) / 3.0)
                .collect();
            let sys = NewtonSystem {
                op,
                eq,
                mass: 1.0,
                coef: 2.0 * dt / 3.0,
                rhs: &rhs,
            };
            sys.solve(prev.to_vec(), config, false)
        }
        _ => {
            let sys = NewtonSystem {
                op,
                eq,
                mass: 1.0,
                coef: dt,
                rhs: prev,
            };
            sys.solve(prev.to_vec(), config, false)
        }
    }
}

fn scaled(op: &Tridiagonal, inv_scale: f64) -> Tridiagonal {
    Tridiagonal {
        lower: op.lower.iter().map(|x| x * inv_scale).collect(),
        diag: op.diag.iter().map(|x| x * inv_scale).collect(),
        upper: op.upper.iter().map(|x| x * inv_scale).collect(),
    }
}

/// Step count and snapshot step indices for a window.
fn schedule(window: &TimeWindow, dt: f64) -> Result<(usize, Vec<usize>)> {
    window.validate()?;
    if dt > window.duration * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "dt = {dt} exceeds the window length {}",
            window.duration
        )));
    }
    let steps = (window.duration / dt).round() as usize;
    if ((steps as f64) * dt - window.duration).abs() > 1e-9 * window.duration {
        return Err(Error::Config(format!(
            "dt = {dt} does not divide the window length {}",
            window.duration
        )));
    }
    let start = window.start();
    let mut marks = Vec::with_capacity(window.snapshots.len());
    for &t in &window.snapshots {
        let k = ((t - start) / dt).round();
        if ((start + k * dt) - t).abs() > 1e-6 * dt || k < 1.0 {
            return Err(Error::Config(format!(
                "snapshot time {t} is not on the step lattice"
            )));
        }
        marks.push(k as usize);
    }
    Ok((steps, marks))
}

/// Marches `initial` from `t0 - T` to `t0`, with the diffusion operator
/// divided by `scale_at(t)` (evaluated at the new time level).
#[allow(clippy::too_many_arguments)]
pub(crate) fn march(
    space: &ModelSpace,
    eq: &EquationSpec,
    grid: &Grid,
    initial: &[f64],
    window: &TimeWindow,
    config: &SolverConfig,
    scale_at: &dyn Fn(f64) -> Result<f64>,
    flow: Option<FlowSpec>,
) -> Result<Trajectory> {
    config.validate()?;
    eq.validate()?;
    if initial.len() != grid.len() {
        return Err(Error::Config(format!(
            "initial data has {} values for {} nodes",
            initial.len(),
            grid.len()
        )));
    }
    check_admissible(eq, initial)?;
    let (steps, marks) = schedule(window, config.dt)?;
    let base = f_laplacian_matrix(space, grid)?;
    let start = window.start();
    let mut violation = None;
    let mut note = |t: f64, field: &[f64]| {
        if let (Some(bound), None) = (config.bound, violation) {
            if let Some((i, &u)) = field.iter().enumerate().find(|(_, u)| !bound.holds(**u)) {
                violation = Some(BoundViolation {
                    time: t,
                    node: i,
                    value: u,
                });
            }
        }
    };
    note(start, initial);

    let initial_snapshot = Snapshot {
        time: start,
        values: initial.to_vec(),
        scale: scale_at(start)?,
    };
    let mut stats = SolverStats::default();
    let mut snapshots = Vec::with_capacity(marks.len());
    let mut next_mark = 0;
    let mut current = initial.to_vec();
    let mut older: Option<Vec<f64>> = None;
    for k in 1..=steps {
        let t = if k == steps {
            window.t0
        } else {
            start + k as f64 * config.dt
        };
        let s = scale_at(t)?;
        let op = if s == 1.0 {
            base.clone()
        } else {
            scaled(&base, 1.0 / s)
        };
        let outcome = advance(&op, eq, &current, older.as_deref(), config)?;
        stats.steps += 1;
        stats.newton_iterations += outcome.iterations;
        stats.max_final_residual = stats.max_final_residual.max(outcome.residual);
        older = Some(std::mem::replace(&mut current, outcome.field));
        note(t, &current);
        while next_mark < marks.len() && marks[next_mark] == k {
            snapshots.push(Snapshot {
                time: window.snapshots[next_mark],
                values: current.clone(),
                scale: s,
            });
            next_mark += 1;
        }
    }
    Ok(Trajectory {
        space: space.clone(),
        eq: *eq,
        grid: *grid,
        window: window.clone(),
        bc: grid.boundary(),
        initial: initial_snapshot,
        snapshots,
        declared_bound: config.bound,
        bound_violation: violation,
        stats,
        flow,
        dt: config.dt,
    })
}

/// Integrates the weighted heat equation over the window on a fixed metric.
pub fn solve(
    space: &ModelSpace,
    eq: &EquationSpec,
    grid: &Grid,
    initial: &[f64],
    window: &TimeWindow,
    config: &SolverConfig,
) -> Result<Trajectory> {
    march(space, eq, grid, initial, window, config, &|_| Ok(1.0), None)
}

/// Newton solve of `Δ_f u + F(u) = 0` with the grid's boundary closures.
pub fn solve_stationary(
    space: &ModelSpace,
    eq: &EquationSpec,
    grid: &Grid,
    guess: &[f64],
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    eq.validate()?;
    if guess.len() != grid.len() {
        return Err(Error::Config("guess length does not match the grid".into()));
    }
    check_admissible(eq, guess)?;
    let op = f_laplacian_matrix(space, grid)?;
    let zeros = vec![0.0; grid.len()];
    let sys = NewtonSystem {
        op: &op,
        eq,
        mass: 0.0,
        coef: -1.0,
        rhs: &zeros,
    };
    Ok(sys.solve(guess.to_vec(), config, true)?.field)
}
