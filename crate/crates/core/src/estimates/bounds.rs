use serde::Serialize;

use crate::solver::{EquationSpec, Trajectory};

/// Reaction constants sup'd over the observed solution values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReactionBounds {
    /// `max(a + b, 0)`.
    pub h0: f64,
    pub h1: f64,
    /// Exponential-family bound `max(A e^u (2u−1)/(2u) − B e^{−u} (2u+1)/(2u) − D/(2u), 0)`.
    pub h2: f64,
    /// Same expression, as used by the boundary estimates.
    pub h: f64,
    pub umin: f64,
    pub umax: f64,
}

fn sup0(vals: impl IntoIterator<Item = f64>) -> f64 {
    vals.into_iter().fold(0.0, f64::max)
}

/// `H_1` over the value range `[umin, umax]`; the `u`-dependent terms are
/// monotone in `u`, so their sup is attained at an end of the range.
pub fn h1_over_range(eq: &EquationSpec, umin: f64, umax: f64) -> f64 {
    match eq {
        EquationSpec::LogPower(c) => {
            let h0 = (c.a + c.b).max(0.0);
            let ends = [umin, umax];
            let power = sup0(
                std::iter::once(c.big_a * c.p)
                    .chain(ends.iter().map(|u| c.big_a * (c.p - 1.0) / u))
                    .chain(ends.iter().map(|u| c.big_a * c.p / u)),
            );
            let inverse = sup0(
                ends.iter()
                    .map(|u| (-c.q - 1.0) * c.big_b * u.powf(-c.q - 1.0)),
            );
            h0 + power + inverse
        }
        EquationSpec::Exponential(_) => 0.0,
    }
}

/// The exponential-family expression before clamping.
pub fn exponential_term(eq: &EquationSpec, u: f64) -> f64 {
    match eq {
        EquationSpec::Exponential(c) => {
            c.big_a * u.exp() * (2.0 * u - 1.0) / (2.0 * u)
                - c.big_b * (-u).exp() * (2.0 * u + 1.0) / (2.0 * u)
                - c.d / (2.0 * u)
        }
        EquationSpec::LogPower(_) => 0.0,
    }
}

/// Bounds over every value in `values`.
pub fn reaction_bounds_over(
    eq: &EquationSpec,
    values: impl IntoIterator<Item = f64>,
) -> ReactionBounds {
    let mut umin = f64::INFINITY;
    let mut umax = f64::NEG_INFINITY;
    let mut h2: f64 = 0.0;
    for u in values {
        umin = umin.min(u);
        umax = umax.max(u);
        if !eq.is_log_power() {
            h2 = h2.max(exponential_term(eq, u));
        }
    }
    let h0 = match eq {
        EquationSpec::LogPower(c) => (c.a + c.b).max(0.0),
        EquationSpec::Exponential(_) => 0.0,
    };
    ReactionBounds {
        h0,
        h1: h1_over_range(eq, umin, umax),
        h2,
        h: h2,
        umin,
        umax,
    }
}

/// Bounds over the initial data and every snapshot of the trajectory.
pub fn reaction_bounds(eq: &EquationSpec, traj: &Trajectory) -> ReactionBounds {
    let values = std::iter::once(&traj.initial)
        .chain(&traj.snapshots)
        .flat_map(|s| s.values.iter().copied());
    reaction_bounds_over(eq, values)
}
