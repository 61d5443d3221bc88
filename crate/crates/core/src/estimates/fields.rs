use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{f_laplacian_matrix, Trajectory};

/// The gradient quantity `w` a lemma is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `w = |∇h|² / (1 − h)²` with `h = log u`; needs `0 < u ≤ 1`.
    Log,
    /// `w = |∇u|² / (4u)`; needs `u > 0`.
    Sqrt,
}

/// Fields derived from one snapshot. Radial derivatives are taken in the
/// reference metric `g_0`; `w` and `lap_w` are already measured in `g(t) = s g_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFields {
    pub time: f64,
    pub scale: f64,
    pub u: Vec<f64>,
    pub u_r: Vec<f64>,
    /// `log u`; `None` when some value is not positive.
    pub h: Option<Vec<f64>>,
    pub h_r: Option<Vec<f64>>,
    pub w: Vec<f64>,
    pub w_r: Vec<f64>,
    pub w_t: Vec<f64>,
    pub lap_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub quantity: Quantity,
    pub radii: Vec<f64>,
    pub snapshots: Vec<SnapshotFields>,
}

/// Second-order first derivative on a uniform grid; one-sided at the ends.
pub fn radial_derivative(v: &[f64], dr: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    d[0] = (4.0 * (v[1] - v[0]) - (v[2] - v[0])) / (2.0 * dr);
    d[n - 1] = (4.0 * (v[n - 1] - v[n - 2]) - (v[n - 1] - v[n - 3])) / (2.0 * dr);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dr);
    }
    d
}

/// Three-point time derivative of each series over (possibly non-uniform)
/// times; one-sided at the first and last time. Needs at least 3 times.
pub fn time_derivative(times: &[f64], series: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let m = times.len();
    if m < 3 || series.len() != m {
        return Err(Error::Config(format!(
            "time derivatives need at least 3 snapshots, got {m}"
        )));
    }
    let len = series[0].len();
    let mut out = vec![vec![0.0; len]; m];
    for j in 0..m {
        let (idx, w) = if j == 0 {
            let (h1, h2) = (times[1] - times[0], times[2] - times[1]);
            (
                [0, 1, 2],
                [
                    -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                    (h1 + h2) / (h1 * h2),
                    -h1 / (h2 * (h1 + h2)),
                ],
            )
        } else if j == m - 1 {
            let (h1, h2) = (times[m - 2] - times[m - 3], times[m - 1] - times[m - 2]);
            (
                [m - 3, m - 2, m - 1],
                [
                    h2 / (h1 * (h1 + h2)),
                    -(h1 + h2) / (h1 * h2),
                    (2.0 * h2 + h1) / (h2 * (h1 + h2)),
                ],
            )
        } else {
            let (h1, h2) = (times[j] - times[j - 1], times[j + 1] - times[j]);
            (
                [j - 1, j, j + 1],
                [
                    -h2 / (h1 * (h1 + h2)),
                    (h2 - h1) / (h1 * h2),
                    h1 / (h2 * (h1 + h2)),
                ],
            )
        };
        for i in 0..len {
            out[j][i] =
                w[0] * series[idx[0]][i] + w[1] * series[idx[1]][i] + w[2] * series[idx[2]][i];
        }
    }
    Ok(out)
}

/// Derives `h`, `w` and the derivatives the lemmas consume at every snapshot.
pub fn derive_fields(traj: &Trajectory, quantity: Quantity) -> Result<DerivedFields> {
    let grid = &traj.grid;
    let dr = grid.spacing();
    let op = f_laplacian_matrix(&traj.space, grid)?;
    let mut snaps = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let u = snap.values.clone();
        let s = snap.scale;
        for (i, &v) in u.iter().enumerate() {
            let bad = match quantity {
                Quantity::Log => !(v > 0.0 && v <= 1.0),
                Quantity::Sqrt => !(v > 0.0),
            };
            if bad {
                let need = if quantity == Quantity::Log {
                    "0 < u <= 1"
                } else {
                    "u > 0"
                };
                return Err(Error::Hypothesis(format!(
                    "{need} fails: u = {v} at node {i} (r = {}), t = {}",
                    grid.radius(i),
                    snap.time
                )));
            }
        }
        let u_r = radial_derivative(&u, dr);
        let h: Option<Vec<f64>> = u
            .iter()
            .all(|&v| v > 0.0)
            .then(|| u.iter().map(|v| v.ln()).collect());
        let h_r = h.as_ref().map(|h| radial_derivative(h, dr));
        let w: Vec<f64> = match quantity {
            Quantity::Log => {
                let (h, h_r) = (h.as_ref().unwrap(), h_r.as_ref().unwrap());
                h.iter()
                    .zip(h_r)
                    .map(|(h, g)| g * g / ((1.0 - h) * (1.0 - h) * s))
                    .collect()
            }
            Quantity::Sqrt => u
                .iter()
                .zip(&u_r)
                .map(|(u, g)| g * g / (4.0 * u * s))
                .collect(),
        };
        let w_r = radial_derivative(&w, dr);
        let lap_w = op.mul_vec(&w).into_iter().map(|x| x / s).collect();
        snaps.push(SnapshotFields {
            time: snap.time,
            scale: s,
            u,
            u_r,
            h,
            h_r,
            w,
            w_r,
            w_t: Vec::new(),
            lap_w,
        });
    }
    let times: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let series: Vec<&[f64]> = snaps.iter().map(|s| s.w.as_slice()).collect();
    let w_t = time_derivative(&times, &series)?;
    for (snap, wt) in snaps.iter_mut().zip(w_t) {
        snap.w_t = wt;
    }
    Ok(DerivedFields {
        quantity,
        radii: grid.radii(),
        snapshots: snaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelSpace;
    use crate::solver::{solve, EquationSpec, Grid, SolverConfig, TimeWindow};

    fn frozen(u: impl Fn(f64) -> f64) -> Trajectory {
        // Zero-reaction constant runs give a simple vehicle; values are overwritten.
        let space = ModelSpace::euclidean(3, 4.0).unwrap();
        let grid = Grid::ball(4.0, 161).unwrap();
        let window = TimeWindow::uniform(0.3, 0.3, 3).unwrap();
        let mut traj = solve(
            &space,
            &EquationSpec::heat(),
            &grid,
            &vec![0.5; grid.len()],
            &window,
            &SolverConfig::with_dt(0.1),
        )
        .unwrap();
        for s in &mut traj.snapshots {
            s.values = grid.sample(&u);
        }
        traj
    }

    #[test]
    fn constant_data_has_zero_gradient_quantities() {
        for c in [0.3, 1.0] {
            let traj = frozen(|_| c);
            for q in [Quantity::Log, Quantity::Sqrt] {
                let d = derive_fields(&traj, q).unwrap();
                for s in &d.snapshots {
                    assert!(s.w.iter().chain(&s.lap_w).chain(&s.w_t).all(|&x| x == 0.0));
                }
            }
        }
    }

    #[test]
    fn exponential_profile_matches_closed_forms() {
        let mut errs = Vec::new();
        for nodes in [161, 321] {
            let mut traj = frozen(|r| (-r).exp());
            let grid = Grid::ball(4.0, nodes).unwrap();
            for s in &mut traj.snapshots {
                s.values = grid.sample(|r| (-r).exp());
            }
            traj.grid = grid;
            let log = derive_fields(&traj, Quantity::Log).unwrap();
            let sqrt = derive_fields(&traj, Quantity::Sqrt).unwrap();
            let mut e: f64 = 0.0;
            for (i, r) in log.radii.iter().enumerate() {
                e = e.max((log.snapshots[0].w[i] - 1.0 / ((1.0 + r) * (1.0 + r))).abs());
                e = e.max((sqrt.snapshots[0].w[i] - (-r).exp() / 4.0).abs());
            }
            errs.push(e);
        }
        assert!(errs[0] < 1e-3, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn log_quantity_rejects_values_above_one() {
        let traj = frozen(|r| 1.5 - r / 8.0);
        match derive_fields(&traj, Quantity::Log) {
            Err(Error::Hypothesis(msg)) => assert!(msg.contains("node 0")),
            other => panic!("{other:?}"),
        }
        assert!(derive_fields(&traj, Quantity::Sqrt).is_ok());
    }

    #[test]
    fn time_derivative_exact_on_quadratics() {
        let times = [0.1, 0.25, 0.3, 0.7];
        let vals: Vec<Vec<f64>> = times.iter().map(|t| vec![t * t, 3.0 * t]).collect();
        let series: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
        let d = time_derivative(&times, &series).unwrap();
        for (j, t) in times.iter().enumerate() {
            assert!((d[j][0] - 2.0 * t).abs() < 1e-12);
            assert!((d[j][1] - 3.0).abs() < 1e-12);
        }
        assert!(time_derivative(&times[..2], &series[..2]).is_err());
    }
}
