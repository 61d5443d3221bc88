use super::certificate::{Certificate, CertificateKind, GridMeta, Verdict};
use crate::error::{Error, Result};
use crate::geometry::ModelSpace;
use crate::solver::{solve, solve_stationary, EquationSpec, Grid, SolverConfig, TimeWindow};

/// Largest `max − min` accepted as a constant field.
pub const OSCILLATION_TOL: f64 = 1e-6;
/// Largest distance accepted between the limit constant and a reaction root.
pub const ROOT_TOL: f64 = 1e-6;

/// Inputs of the two paths: a stationary Newton solve from `guess` and a
/// parabolic solve from `initial` over `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleSetup {
    pub grid: Grid,
    pub guess: Vec<f64>,
    pub initial: Vec<f64>,
    pub duration: f64,
}

/// Which corollary covers the equation, checking its sign conditions.
pub fn liouville_corollary(eq: &EquationSpec) -> Result<&'static str> {
    match eq {
        EquationSpec::LogPower(c) if c.a != 0.0 => Err(Error::Hypothesis(
            "no Liouville statement covers a log term (a != 0)".into(),
        )),
        EquationSpec::LogPower(c) => {
            if c.b <= 0.0 && c.big_a <= 0.0 && c.p >= 1.0 && c.big_b == 0.0 {
                Ok("cor1")
            } else if c.b <= 0.0 && c.big_a <= 0.0 && c.big_b >= 0.0 && c.p >= 1.0 && c.q >= 0.0 {
                Ok("cor2")
            } else {
                Err(Error::Hypothesis(
                    "Liouville needs b <= 0, A <= 0, B >= 0, p >= 1, q >= 0".into(),
                ))
            }
        }
        EquationSpec::Exponential(c) => {
            if c.big_a <= 0.0 && c.big_b >= 0.0 && c.d >= 0.0 {
                Ok("cor42")
            } else {
                Err(Error::Hypothesis(
                    "Liouville needs A <= 0, B >= 0, D >= 0".into(),
                ))
            }
        }
    }
}

/// Root of the reaction nearest `x` by scalar Newton; `x` itself when the
/// reaction vanishes there.
pub fn reaction_root_near(eq: &EquationSpec, x: f64) -> Option<f64> {
    let mut x = x;
    for _ in 0..100 {
        let (f, df) = eq.reaction(x).ok()?;
        if f == 0.0 {
            return Some(x);
        }
        if df == 0.0 || !df.is_finite() {
            return None;
        }
        let next = x - f / df;
        let next = if eq.is_log_power() && next <= 0.0 {
            0.5 * x
        } else {
            next
        };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return Some(next);
        }
        x = next;
    }
    None
}

fn oscillation(v: &[f64]) -> (f64, f64) {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    (hi - lo, 0.5 * (hi + lo))
}

/// Judges one end state; records its numbers under `prefix` and returns
/// whether it is a constant reaction root.
fn judge(cert: &mut Certificate, eq: &EquationSpec, prefix: &str, field: &[f64]) -> bool {
    let (osc, mean) = oscillation(field);
    cert.audit.insert(format!("{prefix}_oscillation"), osc);
    cert.audit.insert(format!("{prefix}_constant"), mean);
    let root_ok = match reaction_root_near(eq, mean) {
        Some(root) => {
            cert.audit
                .insert(format!("{prefix}_root_distance"), (root - mean).abs());
            (root - mean).abs() <= ROOT_TOL
        }
        None => {
            cert.notes
                .push(format!("{prefix}: no reaction root found near {mean}"));
            false
        }
    };
    osc <= OSCILLATION_TOL && root_ok
}

/// Runs the stationary and the long-time paths and checks that both end at
/// the same kind of object the Liouville corollaries predict: a constant root.
///
/// The bounded Neumann domain stands in for the complete manifold, and the
/// long-time solve is a finite-window proxy for ancient solutions.
pub fn liouville_check(
    space: &ModelSpace,
    eq: &EquationSpec,
    setup: &LiouvilleSetup,
    config: &SolverConfig,
) -> Result<Certificate> {
    let k = space.bakry_emery_lower_bound()?;
    if k != 0.0 {
        return Err(Error::Hypothesis(format!(
            "Liouville needs Ric_f >= 0; the model only gives Ric_f >= -{k}(n-1)"
        )));
    }
    let corollary = liouville_corollary(eq)?;
    let mut cert = Certificate::new(CertificateKind::Liouville)
        .param("oscillation_tol", OSCILLATION_TOL)
        .param("root_tol", ROOT_TOL)
        .param("duration", setup.duration);
    cert.notes.push(format!("covered by {corollary}"));
    cert.tolerance = OSCILLATION_TOL;

    let stationary_ok = match solve_stationary(space, eq, &setup.grid, &setup.guess, config) {
        Ok(field) => Some(judge(&mut cert, eq, "stationary", &field)),
        Err(e @ (Error::Solver { .. } | Error::Positivity(_))) => {
            cert.notes
                .push(format!("stationary path inconclusive: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let window = TimeWindow::new(setup.duration, setup.duration, vec![setup.duration])?;
    let parabolic_ok = match solve(space, eq, &setup.grid, &setup.initial, &window, config) {
        Ok(traj) => {
            cert.grid = Some(GridMeta::of(&traj));
            Some(judge(&mut cert, eq, "parabolic", &traj.last().values))
        }
        Err(e @ (Error::Solver { .. } | Error::Positivity(_))) => {
            cert.notes.push(format!("parabolic path inconclusive: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    cert.verdict = match (stationary_ok, parabolic_ok) {
        (Some(false), _) | (_, Some(false)) => Verdict::Fail,
        (Some(true), Some(true)) => Verdict::Pass,
        _ => Verdict::Inconclusive,
    };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Warp, Weight};

    fn soliton() -> ModelSpace {
        ModelSpace::new(
            3,
            Warp::Euclidean,
            Weight::GaussianHalfSquare { lambda: 1.0 },
            4.0,
        )
        .unwrap()
    }

    fn setup(level: f64) -> LiouvilleSetup {
        let grid = Grid::ball(4.0, 65).unwrap();
        let guess = grid.sample(|r| level + 0.2 * (std::f64::consts::PI * r / 4.0).cos());
        LiouvilleSetup {
            grid,
            guess: guess.clone(),
            initial: guess,
            duration: 20.0,
        }
    }

    #[test]
    fn power_equation_reaches_the_positive_root() {
        let eq = EquationSpec::log_power(0.0, -1.0, -1.0, 1.0, 3.0, 1.0);
        let c =
            liouville_check(&soliton(), &eq, &setup(0.5), &SolverConfig::with_dt(0.05)).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{c:?}");
        let root = ((5f64.sqrt() - 1.0) / 2.0).sqrt();
        assert!((c.audit["stationary_constant"] - root).abs() < 1e-6);
        assert!((c.audit["parabolic_constant"] - root).abs() < 1e-6);
    }

    #[test]
    fn exponential_and_heat_limits() {
        let eq = EquationSpec::exponential(-1.0, 1.0, 0.0);
        let c =
            liouville_check(&soliton(), &eq, &setup(0.3), &SolverConfig::with_dt(0.05)).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{c:?}");
        assert!(c.audit["parabolic_constant"].abs() < 1e-6);
        let c = liouville_check(
            &soliton(),
            &EquationSpec::heat(),
            &setup(0.5),
            &SolverConfig::with_dt(0.05),
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{c:?}");
    }

    #[test]
    fn hypotheses_are_guarded() {
        let eq = EquationSpec::log_power(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        assert!(matches!(
            liouville_corollary(&eq),
            Err(Error::Hypothesis(_))
        ));
        let eq = EquationSpec::log_power(0.0, 1.0, 0.0, 0.0, 1.0, 0.0);
        assert!(liouville_corollary(&eq).is_err());
        assert_eq!(liouville_corollary(&EquationSpec::heat()).unwrap(), "cor1");
        let hyp =
            ModelSpace::new(3, Warp::Hyperbolic { curvature: 1.0 }, Weight::Zero, 4.0).unwrap();
        assert!(matches!(
            liouville_check(
                &hyp,
                &EquationSpec::heat(),
                &setup(0.5),
                &SolverConfig::default()
            ),
            Err(Error::Hypothesis(_))
        ));
    }
}
