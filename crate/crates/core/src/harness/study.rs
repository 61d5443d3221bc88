use serde::Serialize;

use super::config::{CertificateRequest, InitialConfig, Scenario};
use super::{evaluate, solve_scenario};
use crate::error::{Error, Result};
use crate::estimates::CertificateKind;
use crate::geometry::Warp;
use crate::solver::{constant_ode_oracle, Trajectory};

/// What the errors of a study are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Heat kernel on flat space.
    ClosedForm,
    /// Scalar ODE for spatially constant data.
    OdeOracle,
    /// Difference to the next finer level on shared nodes.
    SelfConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub level: u32,
    pub nodes: usize,
    pub dr: f64,
    pub dt: f64,
    /// Max-norm error over all snapshots (`None` on the finest self-convergence level).
    pub error: Option<f64>,
    /// `log2(e_{k-1} / e_k)`.
    pub order: Option<f64>,
    /// Residual minima of the scenario's lemma certificates at this level.
    pub residual_min: Vec<(CertificateKind, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub name: String,
    pub reference: Reference,
    pub levels: Vec<LevelResult>,
    /// Every error is at round-off; orders are then undefined.
    pub exact: bool,
    pub min_order: Option<f64>,
    /// `|m_k| / |m_{k+1}|` for each lemma certificate between consecutive levels.
    pub residual_ratios: Vec<(CertificateKind, Vec<f64>)>,
}

fn reference_of(s: &Scenario) -> Reference {
    let flat = matches!(s.space.warp(), Warp::Euclidean) && s.space.is_unweighted();
    match s.config.initial {
        InitialConfig::Constant { .. } => Reference::OdeOracle,
        InitialConfig::Gaussian { .. }
            if flat
                && s.config.equation.is_zero_reaction()
                && s.flow.is_none()
                && s.grid.has_pole() =>
        {
            Reference::ClosedForm
        }
        _ => Reference::SelfConvergence,
    }
}

fn exact_value(s: &Scenario, r: f64, elapsed: f64) -> Result<f64> {
    match s.config.initial {
        InitialConfig::Constant { value } => {
            constant_ode_oracle(&s.config.equation, value, elapsed)
        }
        InitialConfig::Gaussian { t_s, peak } => {
            let half_n = s.space.dimension() as f64 / 2.0;
            let amp = peak.unwrap_or_else(|| (4.0 * std::f64::consts::PI * t_s).powf(-half_n));
            let t = t_s + elapsed;
            Ok(amp * (t_s / t).powf(half_n) * (-r * r / (4.0 * t)).exp())
        }
        _ => Err(Error::Config(
            "no closed form for this initial profile".into(),
        )),
    }
}

fn oracle_error(s: &Scenario, traj: &Trajectory) -> Result<f64> {
    let start = traj.window.start();
    let mut err: f64 = 0.0;
    for snap in &traj.snapshots {
        for (i, u) in snap.values.iter().enumerate() {
            err = err.max((u - exact_value(s, traj.grid.radius(i), snap.time - start)?).abs());
        }
    }
    Ok(err)
}

/// Coarse trajectory against the next finer one at shared nodes.
fn self_error(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    coarse
        .snapshots
        .iter()
        .zip(&fine.snapshots)
        .flat_map(|(c, f)| {
            c.values
                .iter()
                .enumerate()
                .map(move |(i, u)| (u - f.values[2 * i]).abs())
        })
        .fold(0.0, f64::max)
}

/// Reruns the scenario at `levels` dyadic refinements (`Δt` shrinks by the
/// grid's `time_refinement` per level) and reports observed orders and the
/// decay of lemma residual minima.
pub fn convergence_study(base: &Scenario, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::Config(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    let reference = reference_of(base);
    let lemma_reqs: Vec<&CertificateRequest> = base
        .config
        .certificates
        .iter()
        .filter(|r| {
            matches!(
                r.kind(),
                CertificateKind::Lemma21 | CertificateKind::Lemma31 | CertificateKind::Lemma41
            )
        })
        .collect();
    let mut runs = Vec::with_capacity(levels);
    for k in 0..levels {
        let s = base.refined(k as u32)?;
        let traj = solve_scenario(&s)?;
        let mut residual_min = Vec::new();
        for req in &lemma_reqs {
            let c = evaluate(&s, Some(&traj), req)?;
            if let Some(m) = c.residual_min {
                residual_min.push((req.kind(), m.value));
            }
        }
        runs.push((s, traj, residual_min));
    }
    let mut errors = Vec::with_capacity(levels);
    for (k, (s, traj, _)) in runs.iter().enumerate() {
        errors.push(match reference {
            Reference::SelfConvergence => {
                runs.get(k + 1).map(|(_, fine, _)| self_error(traj, fine))
            }
            _ => Some(oracle_error(s, traj)?),
        });
    }
    let scale = runs[0].1.value_range().1.abs().max(1.0);
    let exact = errors.iter().flatten().all(|e| *e <= 1e-12 * scale);
    let mut table = Vec::with_capacity(levels);
    for (k, (s, traj, residual_min)) in runs.into_iter().enumerate() {
        let order = match (k.checked_sub(1).and_then(|j| errors[j]), errors[k]) {
            (Some(prev), Some(cur)) if !exact && cur > 0.0 => Some((prev / cur).log2()),
            _ => None,
        };
        table.push(LevelResult {
            level: k as u32,
            nodes: s.grid.len(),
            dr: s.grid.spacing(),
            dt: traj.dt,
            error: errors[k],
            order,
            residual_min,
        });
    }
    let min_order = table.iter().filter_map(|l| l.order).reduce(f64::min);
    let residual_ratios = lemma_reqs
        .iter()
        .enumerate()
        .map(|(j, req)| {
            let ratios = table
                .windows(2)
                .filter_map(
                    |w| match (w[0].residual_min.get(j), w[1].residual_min.get(j)) {
                        (Some(a), Some(b)) if b.1 != 0.0 => Some(a.1.abs() / b.1.abs()),
                        _ => None,
                    },
                )
                .collect();
            (req.kind(), ratios)
        })
        .collect();
    Ok(ConvergenceTable {
        name: base.config.name.clone(),
        reference,
        levels: table,
        exact,
        min_order,
        residual_ratios,
    })
}
