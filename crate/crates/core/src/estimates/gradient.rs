use super::bounds::ReactionBounds;
use super::certificate::{Certificate, CertificateKind, Extremum, GridMeta, Verdict};
use super::fields::radial_derivative;
use crate::error::{Error, Result};
use crate::geometry::CurvatureSummary;
use crate::solver::{DeclaredBound, EquationSpec, Trajectory};

/// Sign conditions `A ≤ 0, B ≥ 0, p ≥ 1, q ≥ 0` on the log-power family.
pub(crate) fn check_absorbing_signs(eq: &EquationSpec, what: &str) -> Result<()> {
    match eq {
        EquationSpec::LogPower(c)
            if c.big_a <= 0.0 && c.big_b >= 0.0 && c.p >= 1.0 && c.q >= 0.0 =>
        {
            Ok(())
        }
        EquationSpec::LogPower(c) => Err(Error::Hypothesis(format!(
            "{what} needs A <= 0, B >= 0, p >= 1, q >= 0 (A = {}, B = {}, p = {}, q = {})",
            c.big_a, c.big_b, c.p, c.q
        ))),
        EquationSpec::Exponential(_) => Err(Error::Hypothesis(format!(
            "{what} applies to the log-power family"
        ))),
    }
}

/// Checks `0 < u <= 1` on every snapshot.
pub(crate) fn check_unit_interval(traj: &Trajectory, what: &str) -> Result<()> {
    for s in &traj.snapshots {
        if let Some((i, u)) = s
            .values
            .iter()
            .enumerate()
            .find(|(_, u)| !(**u > 0.0 && **u <= 1.0))
        {
            return Err(Error::Hypothesis(format!(
                "{what} needs 0 < u <= 1; u = {u} at node {i}, t = {}",
                s.time
            )));
        }
    }
    Ok(())
}

/// The upper bound `C` of `1 < u < C`: the declared bound, verified on the data.
fn exponential_upper(traj: &Trajectory) -> Result<f64> {
    let c = match traj.declared_bound {
        Some(DeclaredBound::AboveOne { upper }) => upper,
        _ => {
            return Err(Error::Hypothesis(
                "thm12 needs a declared bound 1 < u < C".into(),
            ))
        }
    };
    if !traj.bound_held() {
        return Err(Error::Hypothesis(format!(
            "declared bound 1 < u < {c} fails: {:?}",
            traj.bound_violation
        )));
    }
    Ok(c)
}

/// Measures the smallest `c` with `LHS <= c · bracket` on `r <= R/2`.
///
/// `bounds` must be computed over the trajectory; `summary` supplies `α` and `K`
/// (and `κ` comes from the flow for thm13).
pub fn gradient_certificate(
    traj: &Trajectory,
    bounds: &ReactionBounds,
    summary: &CurvatureSummary,
    kind: CertificateKind,
    radius: f64,
) -> Result<Certificate> {
    let big_r = radius;
    if !(big_r > 0.0) || big_r > traj.grid.end() * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "R = {big_r} must lie in (0, {}]",
            traj.grid.end()
        )));
    }
    let mut cert = Certificate::new(kind)
        .param("r", big_r)
        .param("alpha", summary.alpha)
        .param("n", traj.space.dimension() as f64);
    let start = traj.window.start();
    // `None` marks the log form |∇u|/(u(1 − log u)); `Some(C)` the |∇u|/√u form.
    let (log_form, fixed, time_offset) = match kind {
        CertificateKind::Thm11 => {
            if big_r < 2.0 {
                return Err(Error::Hypothesis(format!(
                    "thm11 needs R >= 2, got {big_r}"
                )));
            }
            check_absorbing_signs(&traj.eq, "thm11")?;
            check_unit_interval(traj, "thm11")?;
            cert = cert.param("k", summary.k_eff).param("h0", bounds.h0);
            let fixed = (1.0 + (summary.alpha.abs() * big_r).sqrt()) / big_r
                + summary.k_eff.sqrt()
                + bounds.h0.sqrt();
            (true, fixed, start)
        }
        CertificateKind::Thm12 => {
            if traj.eq.is_log_power() {
                return Err(Error::Hypothesis(
                    "thm12 applies to the exponential family".into(),
                ));
            }
            let c = exponential_upper(traj)?;
            cert = cert
                .param("k", summary.k_eff)
                .param("h2", bounds.h2)
                .param("c", c);
            let fixed = (1.0 + (summary.alpha.abs() * big_r).sqrt() + c.sqrt()) / big_r
                + summary.k_eff.sqrt()
                + bounds.h2.sqrt();
            (false, fixed, start)
        }
        CertificateKind::Thm13 => {
            let flow = traj.flow.as_ref().ok_or_else(|| {
                Error::Config("thm13 needs a trajectory solved on a Ricci flow".into())
            })?;
            check_absorbing_signs(&traj.eq, "thm13")?;
            check_unit_interval(traj, "thm13")?;
            let kappa = flow.flow_kappa();
            cert = cert.param("kappa", kappa).param("h0", bounds.h0);
            let fixed = (1.0 + (summary.alpha.abs() * big_r).sqrt()) / big_r
                + kappa.sqrt()
                + bounds.h0.sqrt();
            (true, fixed, 0.0)
        }
        other => {
            return Err(Error::Config(format!(
                "{other:?} is not a gradient estimate"
            )))
        }
    };
    let upper = cert.parameters.get("c").copied().unwrap_or(1.0);
    let grid = &traj.grid;
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.radius(i) <= big_r / 2.0 + 1e-12)
        .collect();
    if inside.len() < 2 {
        return Err(Error::Config(format!(
            "sub-domain r <= R/2 = {} holds fewer than two nodes",
            big_r / 2.0
        )));
    }
    let mut best: Option<Extremum> = None;
    for s in &traj.snapshots {
        let elapsed = s.time - time_offset;
        if elapsed <= 0.0 {
            continue;
        }
        let bracket = if log_form {
            fixed + 1.0 / elapsed.sqrt()
        } else {
            upper.sqrt() * (fixed + 1.0 / elapsed.sqrt())
        };
        let metric = s.scale.sqrt();
        let lhs: Vec<f64> = if log_form {
            let h: Vec<f64> = s.values.iter().map(|u| u.ln()).collect();
            radial_derivative(&h, grid.spacing())
                .iter()
                .zip(&h)
                .map(|(g, h)| g.abs() / (metric * (1.0 - h)))
                .collect()
        } else {
            radial_derivative(&s.values, grid.spacing())
                .iter()
                .zip(&s.values)
                .map(|(g, u)| g.abs() / (metric * u.sqrt()))
                .collect()
        };
        for &i in &inside {
            Extremum::track_max(
                &mut best,
                Extremum {
                    value: lhs[i] / bracket,
                    node: i,
                    radius: grid.radius(i),
                    time: s.time,
                },
            );
        }
    }
    let best =
        best.ok_or_else(|| Error::Config("no snapshot lies strictly inside the window".into()))?;
    cert.grid = Some(GridMeta::of(traj));
    cert.constant = Some(best);
    cert.verdict = Verdict::Measured;
    Ok(cert)
}
