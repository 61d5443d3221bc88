use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `a u log u + b u + A u^p + B u^{-q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogPower {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default, rename = "A")]
    pub big_a: f64,
    #[serde(default, rename = "B")]
    pub big_b: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
}

/// Coefficients of `A e^u + B e^{-u} + D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponential {
    #[serde(default, rename = "A")]
    pub big_a: f64,
    #[serde(default, rename = "B")]
    pub big_b: f64,
    #[serde(default, rename = "D")]
    pub d: f64,
}

fn one() -> f64 {
    1.0
}

/// Reaction term of a weighted heat equation `u_t = Δ_f u + F(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EquationSpec {
    LogPower(LogPower),
    Exponential(Exponential),
}

impl LogPower {
    pub fn new(a: f64, b: f64, big_a: f64, big_b: f64, p: f64, q: f64) -> Self {
        Self {
            a,
            b,
            big_a,
            big_b,
            p,
            q,
        }
    }
}

impl EquationSpec {
    pub fn log_power(a: f64, b: f64, big_a: f64, big_b: f64, p: f64, q: f64) -> Self {
        EquationSpec::LogPower(LogPower::new(a, b, big_a, big_b, p, q))
    }

    pub fn exponential(big_a: f64, big_b: f64, d: f64) -> Self {
        EquationSpec::Exponential(Exponential { big_a, big_b, d })
    }

    /// The pure f-heat equation, written in the log-power family.
    pub fn heat() -> Self {
        Self::log_power(0.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            EquationSpec::LogPower(c) => {
                if !finite(&[c.a, c.b, c.big_a, c.big_b, c.p, c.q]) {
                    return Err(Error::Config("equation coefficients must be finite".into()));
                }
                if c.p < 0.0 || c.q < 0.0 {
                    return Err(Error::Config(format!(
                        "exponents must be non-negative (p = {}, q = {})",
                        c.p, c.q
                    )));
                }
            }
            EquationSpec::Exponential(c) => {
                if !finite(&[c.big_a, c.big_b, c.d]) {
                    return Err(Error::Config("equation coefficients must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn is_log_power(&self) -> bool {
        matches!(self, EquationSpec::LogPower(_))
    }

    /// True when the reaction vanishes identically.
    pub fn is_zero_reaction(&self) -> bool {
        match self {
            EquationSpec::LogPower(c) => {
                c.a == 0.0 && c.b == 0.0 && c.big_a == 0.0 && c.big_b == 0.0
            }
            EquationSpec::Exponential(c) => c.big_a == 0.0 && c.big_b == 0.0 && c.d == 0.0,
        }
    }

    /// Reaction value and its derivative with respect to `u`.
    pub fn reaction(&self, u: f64) -> Result<(f64, f64)> {
        match self {
            EquationSpec::LogPower(c) => {
                if !(u > 0.0) {
                    return Err(Error::Positivity(format!(
                        "log-power reaction evaluated at u = {u}"
                    )));
                }
                let log_u = u.ln();
                let mut value = c.a * u * log_u + c.b * u;
                let mut slope = c.a * (log_u + 1.0) + c.b;
                if c.big_a != 0.0 {
                    value += c.big_a * u.powf(c.p);
                    slope += c.big_a * c.p * u.powf(c.p - 1.0);
                }
                if c.big_b != 0.0 {
                    value += c.big_b * u.powf(-c.q);
                    slope -= c.big_b * c.q * u.powf(-c.q - 1.0);
                }
                Ok((value, slope))
            }
            EquationSpec::Exponential(c) => {
                let (ep, em) = (u.exp(), (-u).exp());
                Ok((
                    c.big_a * ep + c.big_b * em + c.d,
                    c.big_a * ep - c.big_b * em,
                ))
            }
        }
    }

    /// Coefficients solved by the normalized variable: `v = u / C` for the
    /// log-power family, `v = 2u + 2C + 1` for the exponential family.
    pub fn rescale(&self, c: f64) -> Result<Self> {
        match self {
            EquationSpec::LogPower(k) => {
                if !(c > 0.0) {
                    return Err(Error::Config(format!(
                        "rescaling constant must be positive, got {c}"
                    )));
                }
                Ok(EquationSpec::LogPower(LogPower {
                    a: k.a,
                    b: k.b + k.a * c.ln(),
                    big_a: k.big_a * c.powf(k.p - 1.0),
                    big_b: k.big_b * c.powf(-k.q - 1.0),
                    p: k.p,
                    q: k.q,
                }))
            }
            EquationSpec::Exponential(k) => {
                if !(c >= 0.0) {
                    return Err(Error::Config(format!(
                        "rescaling constant must be non-negative, got {c}"
                    )));
                }
                let shift = 2.0 * c + 1.0;
                Ok(EquationSpec::Exponential(Exponential {
                    big_a: 2.0 * k.big_a * (-shift).exp(),
                    big_b: 2.0 * k.big_b * shift.exp(),
                    d: 2.0 * k.d,
                }))
            }
        }
    }

    /// Maps a solution value to the normalized variable of [`Self::rescale`].
    pub fn rescale_value(&self, c: f64, u: f64) -> f64 {
        match self {
            EquationSpec::LogPower(_) => u / c,
            EquationSpec::Exponential(_) => 2.0 * u + 2.0 * c + 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn reaction_examples() {
        let eq = EquationSpec::log_power(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        assert_eq!(eq.reaction(1.0).unwrap(), (0.0, -1.0));
        let eq = EquationSpec::log_power(0.0, 2.0, -1.0, 1.0, 3.0, 1.0);
        assert_eq!(eq.reaction(1.0).unwrap(), (2.0, -2.0));
        let eq = EquationSpec::exponential(1.0, 1.0, -2.0);
        assert_eq!(eq.reaction(0.0).unwrap(), (0.0, 0.0));
        assert!(matches!(
            EquationSpec::heat().reaction(0.0),
            Err(Error::Positivity(_))
        ));
    }

    #[test]
    fn reaction_derivative_matches_finite_difference() {
        let eq = EquationSpec::log_power(-0.7, 0.3, -0.5, 0.3, 2.5, 1.5);
        for &u in &[0.2, 0.5, 0.9, 1.7] {
            let h = 1e-6;
            let fd = (eq.reaction(u + h).unwrap().0 - eq.reaction(u - h).unwrap().0) / (2.0 * h);
            assert!((fd - eq.reaction(u).unwrap().1).abs() < 1e-7);
        }
        let eq = EquationSpec::exponential(-1.0, 0.5, 2.0);
        for &u in &[-1.0, 0.0, 1.5, 2.5] {
            let h = 1e-6;
            let fd = (eq.reaction(u + h).unwrap().0 - eq.reaction(u - h).unwrap().0) / (2.0 * h);
            assert!((fd - eq.reaction(u).unwrap().1).abs() < 1e-6);
        }
    }

    #[test]
    fn rescale_examples() {
        let eq = EquationSpec::log_power(0.4, -0.2, -1.5, 0.7, 2.0, 0.5);
        assert_eq!(eq.rescale(1.0).unwrap(), eq);
        let eq = EquationSpec::log_power(2.0, 0.0, 1.0, 0.0, 3.0, 0.0);
        match eq.rescale(E).unwrap() {
            EquationSpec::LogPower(k) => {
                assert_eq!(k.a, 2.0);
                assert!((k.b - 2.0).abs() < 1e-15);
                assert!((k.big_a - E * E).abs() < 1e-14);
                assert_eq!(k.big_b, 0.0);
            }
            _ => unreachable!(),
        }
        let eq = EquationSpec::exponential(1.0, 1.0, 1.0);
        match eq.rescale(0.0).unwrap() {
            EquationSpec::Exponential(k) => {
                assert!((k.big_a - 2.0 / E).abs() < 1e-15);
                assert!((k.big_b - 2.0 * E).abs() < 1e-14);
                assert_eq!(k.d, 2.0);
            }
            _ => unreachable!(),
        }
        assert!(EquationSpec::heat().rescale(0.0).is_err());
    }

    #[test]
    fn rescaled_reaction_is_consistent() {
        // if u solves u' = F(u) then v = u/C solves v' = F_C(v): F_C(u/C) = F(u)/C
        let eq = EquationSpec::log_power(-0.8, 0.4, -1.1, 0.6, 1.5, 0.7);
        let c = 2.3;
        let scaled = eq.rescale(c).unwrap();
        for &u in &[0.3, 1.0, 2.0] {
            let lhs = scaled.reaction(u / c).unwrap().0;
            let rhs = eq.reaction(u).unwrap().0 / c;
            assert!((lhs - rhs).abs() < 1e-13);
        }
        // v = 2u + 2C + 1 turns u' = A e^{2u} + B e^{-2u} + D into v' = F_C(v)
        let (a, b, d) = (-0.7, 0.4, 0.25);
        let eq = EquationSpec::exponential(a, b, d);
        let scaled = eq.rescale(c).unwrap();
        for &u in &[-0.5, 0.0, 0.8] {
            let lhs = scaled.reaction(eq.rescale_value(c, u)).unwrap().0;
            let rhs = 2.0 * (a * (2.0 * u).exp() + b * (-2.0 * u).exp() + d);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
        }
    }
}
