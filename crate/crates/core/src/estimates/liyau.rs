use super::certificate::{Certificate, CertificateKind, Extremum, GridMeta, Verdict};
use super::fields::radial_derivative;
use super::lemmas::grid_tolerance;
use crate::error::{Error, Result};
use crate::solver::{f_laplacian_matrix, Trajectory};

/// Max of `|∇u|²/u² − u_t/u − n/(2(t − t_start))` over nodes with `r <= radius`
/// (all nodes when `None`) and all snapshots. `|∇u|/u` is differenced from
/// `log u`; `u_t = Δ u` is read off the discrete operator, which for backward
/// Euler is exactly the scheme's time difference at the snapshot.
pub fn li_yau_diagnostic(
    traj: &Trajectory,
    radius: Option<f64>,
    tol: Option<f64>,
) -> Result<Certificate> {
    if !traj.eq.is_zero_reaction() {
        return Err(Error::Hypothesis(
            "the Li-Yau inequality is stated for the pure heat equation".into(),
        ));
    }
    if !traj.space.is_unweighted() || traj.space.bakry_emery_lower_bound()? != 0.0 {
        return Err(Error::Hypothesis(
            "the Li-Yau inequality needs f = 0 and Ric >= 0".into(),
        ));
    }
    if !traj.grid.has_pole() || traj.flow.is_some() {
        return Err(Error::Hypothesis(
            "the Li-Yau inequality is checked on a static ball".into(),
        ));
    }
    let n = traj.space.dimension() as f64;
    let start = traj.window.start();
    let dr = traj.grid.spacing();
    let logs = traj
        .snapshots
        .iter()
        .map(|s| {
            if s.values.iter().any(|&u| !(u > 0.0)) {
                Err(Error::Hypothesis(format!(
                    "u must be positive at t = {}",
                    s.time
                )))
            } else {
                Ok(s.values.iter().map(|u| u.ln()).collect::<Vec<f64>>())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let op = f_laplacian_matrix(&traj.space, &traj.grid)?;
    let h_t: Vec<Vec<f64>> = traj
        .snapshots
        .iter()
        .map(|s| {
            op.mul_vec(&s.values)
                .iter()
                .zip(&s.values)
                .map(|(l, u)| l / u)
                .collect()
        })
        .collect();
    let limit = radius.unwrap_or(f64::INFINITY);
    let mut best: Option<Extremum> = None;
    let mut scale: f64 = 0.0;
    for (j, h) in logs.iter().enumerate() {
        let h_r = radial_derivative(h, dr);
        let bound = n / (2.0 * (times[j] - start));
        for i in (0..h.len()).filter(|&i| traj.grid.radius(i) <= limit) {
            let grad = h_r[i] * h_r[i];
            scale = scale.max(grad).max(h_t[j][i].abs()).max(bound);
            Extremum::track_max(
                &mut best,
                Extremum {
                    value: grad - h_t[j][i] - bound,
                    node: i,
                    radius: traj.grid.radius(i),
                    time: times[j],
                },
            );
        }
    }
    let best = best.ok_or_else(|| Error::Config("empty Li-Yau sub-domain".into()))?;
    let tol = tol.unwrap_or_else(|| grid_tolerance(traj, scale));
    let mut cert = Certificate::new(CertificateKind::LiYau).param("n", n);
    if let Some(r) = radius {
        cert = cert.param("r", r);
    }
    cert.grid = Some(GridMeta::of(traj));
    cert.residual_min = Some(best);
    cert.tolerance = tol;
    cert.audit.insert("term_scale".into(), scale);
    cert.notes
        .push("residual_min holds the maximum of LHS − n/(2t)".into());
    cert.verdict = if best.value <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(cert)
}
