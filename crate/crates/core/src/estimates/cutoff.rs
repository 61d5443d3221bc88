use serde::Serialize;

use crate::error::{Error, Result};

/// Samples per axis of the property scan.
pub const SAMPLES: usize = 1024;
/// Nodes with `ψ̄` below this are left out of the ratio scans.
pub const EXCLUDE_BELOW: f64 = 1e-14;
/// Exponent used at `ε = 1`, where no compactly supported profile has a
/// bounded `|ψ̄_r| / ψ̄`; the measured constant then depends on the scan.
pub const EXPONENT_AT_ONE: u32 = 8;

/// Space-time cut-off `ψ̄(r, t) = η(r) ξ(t)` with its measured constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffProfile {
    pub radius: f64,
    pub t0: f64,
    pub duration: f64,
    pub tau: f64,
    pub epsilon: f64,
    /// Exponent `m` of `θ(s) = 1 − (1 − s^m)²`.
    pub exponent: u32,
    /// `sup |ψ̄_t| (τ − t0 + T) / ψ̄^{1/2}`.
    pub c_time: f64,
    /// `sup R |ψ̄_r| / ψ̄^ε`.
    pub c_eps_first: f64,
    /// `sup R² |ψ̄_rr| / ψ̄^ε`.
    pub c_eps_second: f64,
    pub c_eps: f64,
    /// Whether `C_ε` is finite in the continuum (false only at `ε = 1`).
    pub c_eps_bounded: bool,
    /// `0 <= ψ̄ <= 1`, `ψ̄ = 1` and `ψ̄_r = 0` on the inner block, `ψ̄_r <= 0`,
    /// and `ψ̄ = 0` at the window start, all exactly on the sample grid.
    pub properties_hold: bool,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Exponent making both `|η'|/η^ε` and `|η''|/η^ε` bounded near the support edge.
pub fn cutoff_exponent(epsilon: f64) -> u32 {
    if epsilon >= 1.0 {
        EXPONENT_AT_ONE
    } else {
        ((2.0 / (1.0 - epsilon)).ceil() as u32).max(3)
    }
}

/// `(θ, θ', θ'')` of `θ(s) = 1 − (1 − s^m)²`.
fn theta(s: f64, m: i32) -> (f64, f64, f64) {
    let mf = m as f64;
    let sm = s.powi(m);
    let d1 = 2.0 * (1.0 - sm) * mf * s.powi(m - 1);
    let d2 = 2.0 * mf * (mf - 1.0) * s.powi(m - 2) * (1.0 - sm) - 2.0 * mf * mf * s.powi(2 * m - 2);
    (sm * (2.0 - sm), d1, d2)
}

impl CutoffProfile {
    /// Spatial factor `(η, η_r, η_rr)`.
    pub fn eta(&self, r: f64) -> (f64, f64, f64) {
        let big_r = self.radius;
        if r <= big_r / 2.0 {
            (1.0, 0.0, 0.0)
        } else if r >= big_r {
            (0.0, 0.0, 0.0)
        } else {
            let (v, d1, d2) = theta(2.0 * (big_r - r) / big_r, self.exponent as i32);
            let k = 2.0 / big_r;
            (v, -k * d1, k * k * d2)
        }
    }

    /// Temporal factor `(ξ, ξ_t)`.
    pub fn xi(&self, t: f64) -> (f64, f64) {
        let start = self.t0 - self.duration;
        let len = self.tau - start;
        if t >= self.tau {
            (1.0, 0.0)
        } else if t <= start {
            (0.0, 0.0)
        } else {
            let s = (t - start) / len;
            (s * s, 2.0 * s / len)
        }
    }

    /// `(ψ̄, ψ̄_r, ψ̄_rr, ψ̄_t)`.
    pub fn eval(&self, r: f64, t: f64) -> (f64, f64, f64, f64) {
        let (e, er, err) = self.eta(r);
        let (x, xt) = self.xi(t);
        (e * x, er * x, err * x, e * xt)
    }

    pub fn sample_radius(&self, i: usize) -> f64 {
        self.radius * i as f64 / (SAMPLES - 1) as f64
    }

    pub fn sample_time(&self, j: usize) -> f64 {
        if j == SAMPLES - 1 {
            self.t0
        } else {
            self.t0 - self.duration + self.duration * j as f64 / (SAMPLES - 1) as f64
        }
    }
}

/// Builds the cut-off for the window `[t0 − T, t0]` and measures its constants
/// on a `SAMPLES × SAMPLES` grid over `[0, R] × [t0 − T, t0]`.
pub fn cutoff_profile(
    radius: f64,
    t0: f64,
    duration: f64,
    tau: f64,
    epsilon: f64,
) -> Result<CutoffProfile> {
    if !(radius > 0.0 && duration > 0.0) {
        return Err(Error::Config(format!(
            "cut-off needs R > 0 and T > 0 (R = {radius}, T = {duration})"
        )));
    }
    if !(tau > t0 - duration && tau <= t0) {
        return Err(Error::Config(format!(
            "tau = {tau} must lie in ({}, {t0}]",
            t0 - duration
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Config(format!(
            "epsilon = {epsilon} must lie in (0, 1]"
        )));
    }
    let mut p = CutoffProfile {
        radius,
        t0,
        duration,
        tau,
        epsilon,
        exponent: cutoff_exponent(epsilon),
        c_time: 0.0,
        c_eps_first: 0.0,
        c_eps_second: 0.0,
        c_eps: 0.0,
        c_eps_bounded: epsilon < 1.0,
        properties_hold: true,
        samples: Vec::with_capacity(SAMPLES * SAMPLES),
    };
    let span = tau - (t0 - duration);
    let mut ok = true;
    for j in 0..SAMPLES {
        let t = p.sample_time(j);
        for i in 0..SAMPLES {
            let r = p.sample_radius(i);
            let (v, vr, vrr, vt) = p.eval(r, t);
            p.samples.push(v);
            ok &= (0.0..=1.0).contains(&v) && vr <= 0.0;
            if r <= radius / 2.0 {
                ok &= vr == 0.0 && (t < tau || v == 1.0);
            }
            if j == 0 {
                ok &= v == 0.0;
            }
            if v < EXCLUDE_BELOW {
                continue;
            }
            p.c_time = p.c_time.max(vt.abs() * span / v.sqrt());
            let weight = v.powf(epsilon);
            p.c_eps_first = p.c_eps_first.max(radius * vr.abs() / weight);
            p.c_eps_second = p.c_eps_second.max(radius * radius * vrr.abs() / weight);
        }
    }
    p.c_eps = p.c_eps_first.max(p.c_eps_second);
    p.properties_hold = ok;
    Ok(p)
}
