//! Scalar reference solutions for spatially constant data.

use crate::error::{Error, Result};
use crate::solver::equation::EquationSpec;

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-15;
const BLOWUP: f64 = 1e100;

/// Value at time `t` of the spatially constant solution started from `u0`,
/// i.e. the solution of the scalar ODE `u' = F(u)`.
pub fn constant_ode_oracle(eq: &EquationSpec, u0: f64, t: f64) -> Result<f64> {
    eq.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Config(format!(
            "oracle time must be non-negative, got {t}"
        )));
    }
    let (f0, _) = eq.reaction(u0)?;
    if f0 == 0.0 || t == 0.0 {
        return Ok(u0);
    }
    if let EquationSpec::LogPower(c) = eq {
        if c.big_a == 0.0 && c.big_b == 0.0 && c.a != 0.0 {
            // h = log u solves h' = a h + b
            let shift = c.b / c.a;
            return Ok(((u0.ln() + shift) * (c.a * t).exp() - shift).exp());
        }
    }
    dormand_prince(|u| eq.reaction(u).map(|r| r.0), u0, t)
}

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(y)` on `[0, t_end]`.
fn dormand_prince(f: impl Fn(f64) -> Result<f64>, y0: f64, t_end: f64) -> Result<f64> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut t = 0.0;
    let mut y = y0;
    let mut h = (t_end * 1e-3).min(1e-3);
    let mut k = [0.0; 7];
    k[0] = f(y)?;
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h < 1e-14 * t_end.max(1.0) {
            return Err(Error::Divergence { blowup_estimate: t });
        }
        let mut stage_ok = true;
        for s in 1..7 {
            let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            match f(ys) {
                Ok(v) if v.is_finite() && ys.is_finite() => k[s] = v,
                _ => {
                    stage_ok = false;
                    break;
                }
            }
        }
        if !stage_ok {
            h *= 0.25;
            continue;
        }
        let y5 = y + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let y4 = y + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        let scale = ATOL + RTOL * y.abs().max(y5.abs());
        let err = ((y5 - y4) / scale).abs();
        if err <= 1.0 {
            t += h;
            y = y5;
            if y.abs() > BLOWUP {
                // the growth time scale |y/y'| bounds the remaining life
                let rate = k[6].abs().max(f64::MIN_POSITIVE);
                return Err(Error::Divergence {
                    blowup_estimate: t + y.abs() / rate,
                });
            }
            k[0] = k[6];
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}
