use super::certificate::{Certificate, CertificateKind, Extremum, GridMeta, Verdict};
use super::gradient::check_unit_interval;
use crate::error::{Error, Result};
use crate::solver::{EquationSpec, Trajectory};

fn beta(c: f64, rho: f64, tau: f64, k: f64) -> f64 {
    (-c * rho * (1.0 / tau.sqrt() + k.sqrt())).exp()
}

/// Whether `u2 <= u1^β e^{1-β}` holds for the constant `c`, written in the
/// overflow-free form `β (1 − log u1) <= 1 − log u2`.
pub fn harnack_holds(c: f64, u1: f64, u2: f64, rho: f64, tau: f64, k: f64) -> bool {
    beta(c, rho, tau, k) * (1.0 - u1.ln()) <= 1.0 - u2.ln()
}

/// Smallest `c >= 0` for which the Harnack inequality holds at one pair,
/// found by bisection (the right side grows as `c` grows when `u <= 1`).
pub fn required_harnack_constant(u1: f64, u2: f64, rho: f64, tau: f64, k: f64) -> f64 {
    if rho == 0.0 || harnack_holds(0.0, u1, u2, rho, tau, k) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !harnack_holds(hi, u1, u2, rho, tau, k) {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if harnack_holds(mid, u1, u2, rho, tau, k) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn check_harnack_signs(eq: &EquationSpec) -> Result<()> {
    match eq {
        EquationSpec::LogPower(c)
            if c.a <= 0.0 && c.b <= 0.0 && c.big_a <= 0.0 && c.big_b >= 0.0 && c.p >= 1.0 && c.q >= 0.0 =>
        {
            Ok(())
        }
        _ => Err(Error::Hypothesis(
            "the Harnack inequality needs the log-power family with a <= 0, b <= 0, A <= 0, B >= 0, p >= 1, q >= 0"
                .into(),
        )),
    }
}

fn nearest_node(traj: &Trajectory, r: f64) -> Result<usize> {
    let g = &traj.grid;
    if r < g.start() - 1e-12 || r > g.end() + 1e-12 {
        return Err(Error::Domain { r, r_max: g.end() });
    }
    Ok((((r - g.start()) / g.spacing()).round() as usize).min(g.len() - 1))
}

/// Sup over radius pairs, both orders, and snapshot times of the constant the
/// Harnack inequality requires. `ρ = |r1 − r2|`.
pub fn harnack_certificate(
    traj: &Trajectory,
    k_eff: f64,
    pairs: &[(f64, f64)],
) -> Result<Certificate> {
    check_harnack_signs(&traj.eq)?;
    check_unit_interval(traj, "the Harnack inequality")?;
    if pairs.is_empty() {
        return Err(Error::Config(
            "the Harnack certificate needs at least one radius pair".into(),
        ));
    }
    let nodes: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(a, b)| Ok((nearest_node(traj, a)?, nearest_node(traj, b)?)))
        .collect::<Result<_>>()?;
    let start = traj.window.start();
    let mut best: Option<Extremum> = None;
    for s in &traj.snapshots {
        let tau = s.time - start;
        for &(i, j) in &nodes {
            let rho = (traj.grid.radius(i) - traj.grid.radius(j)).abs();
            for (x1, x2) in [(i, j), (j, i)] {
                let c = required_harnack_constant(s.values[x1], s.values[x2], rho, tau, k_eff);
                Extremum::track_max(
                    &mut best,
                    Extremum {
                        value: c,
                        node: x1,
                        radius: traj.grid.radius(x1),
                        time: s.time,
                    },
                );
            }
        }
    }
    let mut cert = Certificate::new(CertificateKind::Harnack)
        .param("k", k_eff)
        .param("pairs", pairs.len() as f64);
    cert.grid = Some(GridMeta::of(traj));
    cert.constant = best;
    cert.verdict = if best.is_some_and(|b| b.value.is_finite()) {
        Verdict::Measured
    } else {
        Verdict::Fail
    };
    Ok(cert)
}
