use super::bounds::ReactionBounds;
use super::certificate::{Certificate, CertificateKind, Extremum, GridMeta, Verdict};
use super::fields::{DerivedFields, Quantity};
use crate::error::{Error, Result};
use crate::solver::Trajectory;

/// `LHS − RHS` of a lemma at interior nodes and interior snapshot times
/// (`NaN` elsewhere), with the magnitude of its largest term.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub scale: f64,
}

fn expected_quantity(kind: CertificateKind) -> Result<Quantity> {
    match kind {
        CertificateKind::Lemma21 | CertificateKind::Lemma31 => Ok(Quantity::Log),
        CertificateKind::Lemma41 => Ok(Quantity::Sqrt),
        other => Err(Error::Config(format!("{other:?} is not a lemma"))),
    }
}

pub fn residual_field(
    traj: &Trajectory,
    derived: &DerivedFields,
    bounds: &ReactionBounds,
    k_eff: f64,
    kind: CertificateKind,
) -> Result<ResidualField> {
    let quantity = expected_quantity(kind)?;
    if derived.quantity != quantity {
        return Err(Error::Config(format!(
            "{kind:?} needs w of kind {quantity:?}, derived fields carry {:?}",
            derived.quantity
        )));
    }
    if kind == CertificateKind::Lemma31 && traj.flow.is_none() {
        return Err(Error::Config(
            "lemma31 needs a trajectory solved on a Ricci flow".into(),
        ));
    }
    if traj.eq.is_log_power() != (quantity == Quantity::Log) {
        return Err(Error::Hypothesis(format!(
            "{kind:?} does not apply to this equation family"
        )));
    }
    let n1 = traj.space.dimension() as f64 - 1.0;
    let nodes = derived.radii.len();
    let m = derived.snapshots.len();
    let mut scale: f64 = 0.0;
    let mut values = Vec::with_capacity(m);
    for (j, s) in derived.snapshots.iter().enumerate() {
        let mut row = vec![f64::NAN; nodes];
        if j == 0 || j == m - 1 {
            values.push(row);
            continue;
        }
        for i in 1..nodes - 1 {
            let w = s.w[i];
            let terms = match kind {
                CertificateKind::Lemma21 | CertificateKind::Lemma31 => {
                    let h = s.h.as_ref().unwrap()[i];
                    let h_r = s.h_r.as_ref().unwrap()[i];
                    let curv = if kind == CertificateKind::Lemma21 {
                        n1 * k_eff
                    } else {
                        0.0
                    };
                    [
                        s.lap_w[i],
                        -s.w_t[i],
                        2.0 * (curv + bounds.h1) * w,
                        -2.0 * (1.0 - h) * w * w,
                        -2.0 * h / (1.0 - h) * s.w_r[i] * h_r / s.scale,
                    ]
                }
                _ => {
                    let u = s.u[i];
                    [
                        s.lap_w[i],
                        -s.w_t[i],
                        2.0 * (k_eff * n1 + bounds.h) * w,
                        s.w_r[i] * s.u_r[i] / (u * s.scale),
                        -2.0 * w * w / u,
                    ]
                }
            };
            scale = terms.iter().fold(scale, |a, t| a.max(t.abs()));
            row[i] = terms.iter().sum();
        }
        values.push(row);
    }
    Ok(ResidualField {
        times: derived.snapshots.iter().map(|s| s.time).collect(),
        values,
        scale,
    })
}

/// Default discretization allowance `10 (Δr + Δt) · scale`.
pub fn grid_tolerance(traj: &Trajectory, scale: f64) -> f64 {
    10.0 * (traj.grid.spacing() + traj.dt) * scale
}

/// Checks a lemma's differential inequality pointwise; passes when the
/// residual minimum is at least `-tol` (the grid default when `tol` is `None`).
pub fn lemma_residual(
    traj: &Trajectory,
    derived: &DerivedFields,
    bounds: &ReactionBounds,
    k_eff: f64,
    kind: CertificateKind,
    tol: Option<f64>,
) -> Result<Certificate> {
    let field = residual_field(traj, derived, bounds, k_eff, kind)?;
    let mut min = None;
    for (j, row) in field.values.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            if v.is_finite() {
                Extremum::track_min(
                    &mut min,
                    Extremum {
                        value: v,
                        node: i,
                        radius: derived.radii[i],
                        time: field.times[j],
                    },
                );
            }
        }
    }
    let min = min.ok_or_else(|| {
        Error::Config("lemma residuals need at least 3 snapshots and 3 nodes".into())
    })?;
    let tol = tol.unwrap_or_else(|| grid_tolerance(traj, field.scale));
    let mut cert = Certificate::new(kind)
        .param("n", traj.space.dimension() as f64)
        .param(
            "k",
            if kind == CertificateKind::Lemma31 {
                0.0
            } else {
                k_eff
            },
        );
    match kind {
        CertificateKind::Lemma41 => cert = cert.param("h", bounds.h),
        _ => cert = cert.param("h1", bounds.h1),
    }
    cert.grid = Some(GridMeta::of(traj));
    cert.residual_min = Some(min);
    cert.tolerance = tol;
    cert.audit.insert("term_scale".into(), field.scale);
    cert.verdict = if min.value >= -tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::{derive_fields, reaction_bounds};
    use crate::geometry::{ModelSpace, Warp, Weight};
    use crate::solver::{solve, EquationSpec, Grid, SolverConfig, TimeWindow};

    fn run(eq: EquationSpec, init: impl Fn(f64) -> f64) -> Trajectory {
        let space =
            ModelSpace::new(3, Warp::Hyperbolic { curvature: 1.0 }, Weight::Zero, 4.0).unwrap();
        let grid = Grid::ball(4.0, 65).unwrap();
        let window = TimeWindow::uniform(0.2, 0.2, 5).unwrap();
        solve(
            &space,
            &eq,
            &grid,
            &grid.sample(init),
            &window,
            &SolverConfig::with_dt(0.01),
        )
        .unwrap()
    }

    #[test]
    fn constant_trajectory_has_zero_residual() {
        let traj = run(EquationSpec::heat(), |_| 0.4);
        let d = derive_fields(&traj, Quantity::Log).unwrap();
        let b = reaction_bounds(&traj.eq, &traj);
        let f = residual_field(&traj, &d, &b, 1.0, CertificateKind::Lemma21).unwrap();
        assert!(f
            .values
            .iter()
            .flatten()
            .filter(|v| v.is_finite())
            .all(|&v| v == 0.0));
        let c = lemma_residual(&traj, &d, &b, 1.0, CertificateKind::Lemma21, None).unwrap();
        assert_eq!(c.residual_min.unwrap().value, 0.0);
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn hyperbolic_log_power_residual_is_nonnegative() {
        let eq = EquationSpec::log_power(-1.0, 0.0, -0.5, 0.3, 2.0, 1.0);
        let traj = run(eq, |r| 0.55 + 0.4 * (std::f64::consts::PI * r / 4.0).cos());
        let d = derive_fields(&traj, Quantity::Log).unwrap();
        let b = reaction_bounds(&eq, &traj);
        let c = lemma_residual(&traj, &d, &b, 1.0, CertificateKind::Lemma21, None).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert!(c.residual_min.unwrap().value > 0.0);
    }

    #[test]
    fn lemma_and_fields_must_agree() {
        let traj = run(EquationSpec::heat(), |r| 0.5 + 0.1 * r.cos());
        let d = derive_fields(&traj, Quantity::Log).unwrap();
        let b = reaction_bounds(&traj.eq, &traj);
        assert!(matches!(
            lemma_residual(&traj, &d, &b, 1.0, CertificateKind::Lemma41, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            lemma_residual(&traj, &d, &b, 1.0, CertificateKind::Lemma31, None),
            Err(Error::Config(_))
        ));
        assert!(lemma_residual(&traj, &d, &b, 1.0, CertificateKind::Thm11, None).is_err());
    }
}
