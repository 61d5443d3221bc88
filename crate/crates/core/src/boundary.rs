//! Compact domains with boundary in the radial model: balls and annuli, the
//! rolling-ball and small-`R` checks, the boundary cut-off, the index
//! comparison, and the explicit-constant gradient estimates.
//!
//! Here `r_∂` is the distance to the boundary; `r` stays the distance to the
//! pole.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{
    check_absorbing_signs, check_unit_interval, radial_derivative, reaction_bounds, Certificate,
    CertificateKind, Extremum, GridMeta, Verdict,
};
use crate::geometry::ModelSpace;
use crate::solver::{BoundaryKind, DeclaredBound, EquationSpec, Grid, Trajectory};

/// Points in a boundary scan.
pub const SCAN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Ball { r_b: f64 },
    Annulus { r_a: f64, r_b: f64 },
}

impl Shape {
    pub fn inner(&self) -> f64 {
        match self {
            Shape::Ball { .. } => 0.0,
            Shape::Annulus { r_a, .. } => *r_a,
        }
    }

    pub fn outer(&self) -> f64 {
        match self {
            Shape::Ball { r_b } | Shape::Annulus { r_b, .. } => *r_b,
        }
    }

    /// Distance from radius `r` to the boundary.
    pub fn boundary_distance(&self, r: f64) -> f64 {
        match self {
            Shape::Ball { r_b } => r_b - r,
            Shape::Annulus { r_a, r_b } => (r - r_a).min(r_b - r),
        }
    }

    /// Grid with `nodes` nodes on the shape, Neumann at every boundary.
    pub fn grid(&self, nodes: usize) -> Result<Grid> {
        match self {
            Shape::Ball { r_b } => Grid::ball(*r_b, nodes),
            Shape::Annulus { r_a, r_b } => Grid::annulus(*r_a, *r_b, nodes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedDomain {
    #[serde(skip)]
    pub space: ModelSpace,
    pub shape: Shape,
    /// `II >= −H` on the boundary.
    pub h: f64,
    /// `Ric >= −K` on the model.
    pub k: f64,
    /// Largest rolling-ball radius the shape admits (radii must also be `< 1`).
    pub rolling_r: f64,
}

/// Builds the domain and its boundary constants.
pub fn build_domain(space: &ModelSpace, shape: Shape) -> Result<BoundedDomain> {
    if !space.is_unweighted() {
        return Err(Error::Hypothesis(
            "boundary estimates are stated without a weight".into(),
        ));
    }
    let (r_a, r_b) = (shape.inner(), shape.outer());
    if let Shape::Annulus { .. } = shape {
        if !(r_a > 0.0) {
            return Err(Error::Config(format!(
                "annulus inner radius must be positive, got {r_a}"
            )));
        }
    }
    if !(r_b > r_a) || r_b > space.r_max() * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "shape radii must satisfy 0 <= r_a < r_b <= r_max = {} (r_a = {r_a}, r_b = {r_b})",
            space.r_max()
        )));
    }
    // Outward normals: +∂_r at r_b, −∂_r at r_a, so II = φ'/φ and −φ'/φ there.
    let (phi_b, dphi_b, _) = space.warp_eval(r_b)?;
    let mut h = (-dphi_b / phi_b).max(0.0);
    let width = match shape {
        Shape::Ball { .. } => 2.0 * r_b,
        Shape::Annulus { .. } => {
            let (phi_a, dphi_a, _) = space.warp_eval(r_a)?;
            h = h.max(dphi_a / phi_a);
            r_b - r_a
        }
    };
    Ok(BoundedDomain {
        space: space.clone(),
        shape,
        h,
        k: space.ricci_lower_bound()?,
        rolling_r: width.min(1.0),
    })
}

impl BoundedDomain {
    pub fn check_radius(&self, radius: f64) -> Result<()> {
        if !(radius > 0.0 && radius < 1.0 && radius <= self.rolling_r) {
            return Err(Error::Config(format!(
                "R = {radius} must satisfy 0 < R < 1 and R <= rolling radius {}",
                self.rolling_r
            )));
        }
        Ok(())
    }

    /// Radial bands forming the collar `{r_∂ <= R}`.
    fn collar(&self, radius: f64) -> Vec<(f64, f64, f64)> {
        // (lo, hi, sign of Δ r_∂ relative to (n−1)φ'/φ)
        let (r_a, r_b) = (self.shape.inner(), self.shape.outer());
        let mut bands = vec![((r_b - radius).max(r_a), r_b, -1.0)];
        if let Shape::Annulus { .. } = self.shape {
            bands.push((r_a, (r_a + radius).min(r_b), 1.0));
        }
        bands
    }

    /// Sectional-curvature upper bound on the collar `{r_∂ <= R}`.
    pub fn collar_sectional_bound(&self, radius: f64) -> Result<f64> {
        let mut top = f64::NEG_INFINITY;
        for (lo, hi, _) in self.collar(radius) {
            top = top.max(self.space.sectional_upper_bound(lo.max(1e-9), hi)?);
        }
        Ok(top)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallRCheck {
    pub holds: bool,
    /// Left sides of the two conditions (`NaN` when undefined).
    pub first: f64,
    pub second: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// `√K tan(R√K) <= H/2 + 1/2` and `(H/√K) tan(R√K) <= 1/2`, continued to
/// `K <= 0` by `tan(x)/x → 1` (nonpositive curvature makes both vacuous).
pub fn small_r_check(k_r: f64, h: f64, radius: f64) -> SmallRCheck {
    if k_r <= 0.0 {
        if k_r < 0.0 {
            return SmallRCheck {
                holds: true,
                first: 0.0,
                second: 0.0,
                reason: Some("nonpositive sectional curvature: conditions vacuous".into()),
            };
        }
        let second = h * radius;
        return SmallRCheck {
            holds: second <= 0.5,
            first: 0.0,
            second,
            reason: None,
        };
    }
    let sk = k_r.sqrt();
    if radius * sk >= std::f64::consts::FRAC_PI_2 {
        return SmallRCheck {
            holds: false,
            first: f64::NAN,
            second: f64::NAN,
            reason: Some(format!("R sqrt(K_R) = {} >= pi/2", radius * sk)),
        };
    }
    let tan = (radius * sk).tan();
    let (first, second) = (sk * tan, h / sk * tan);
    SmallRCheck {
        holds: first <= 0.5 * h + 0.5 && second <= 0.5,
        first,
        second,
        reason: None,
    }
}

/// The boundary cut-off `φ = ψ(r_∂/R)`, `χ = (1 + φ)²`, sampled on the domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCutoff {
    pub h: f64,
    pub radius: f64,
    pub psi_at_zero: f64,
    pub dpsi_at_zero: f64,
    pub dpsi_min: f64,
    pub dpsi_max: f64,
    pub d2psi_min: f64,
    pub psi_max: f64,
    /// `sup |∇χ|²/χ`.
    pub grad_chi_ratio: f64,
    /// `16 H² / R²`.
    pub grad_chi_bound: f64,
    pub all_hold: bool,
    #[serde(skip)]
    pub radii: Vec<f64>,
    #[serde(skip)]
    pub phi: Vec<f64>,
    #[serde(skip)]
    pub chi: Vec<f64>,
}

/// `(ψ, ψ', ψ'')` of `ψ(s) = H(s − s²/2)` on `[0, 1]`, `H/2` beyond.
pub fn boundary_psi(h: f64, s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        (0.5 * h, 0.0, 0.0)
    } else {
        (h * (s - 0.5 * s * s), h * (1.0 - s), -h)
    }
}

pub fn boundary_cutoff(domain: &BoundedDomain, radius: f64) -> Result<BoundaryCutoff> {
    domain.check_radius(radius)?;
    let h = domain.h;
    let (r_a, r_b) = (domain.shape.inner(), domain.shape.outer());
    let mut out = BoundaryCutoff {
        h,
        radius,
        psi_at_zero: boundary_psi(h, 0.0).0,
        dpsi_at_zero: boundary_psi(h, 0.0).1,
        dpsi_min: f64::INFINITY,
        dpsi_max: f64::NEG_INFINITY,
        d2psi_min: f64::INFINITY,
        psi_max: f64::NEG_INFINITY,
        grad_chi_ratio: 0.0,
        grad_chi_bound: 16.0 * h * h / (radius * radius),
        all_hold: false,
        radii: Vec::with_capacity(SCAN),
        phi: Vec::with_capacity(SCAN),
        chi: Vec::with_capacity(SCAN),
    };
    for i in 0..SCAN {
        let r = if i == SCAN - 1 {
            r_b
        } else {
            r_a + (r_b - r_a) * i as f64 / (SCAN - 1) as f64
        };
        let s = domain.shape.boundary_distance(r) / radius;
        let (psi, dpsi, d2psi) = boundary_psi(h, s);
        out.dpsi_min = out.dpsi_min.min(dpsi);
        out.dpsi_max = out.dpsi_max.max(dpsi);
        out.d2psi_min = out.d2psi_min.min(d2psi);
        out.psi_max = out.psi_max.max(psi);
        // |∇χ| = 2(1 + φ)|∇φ| with |∇φ| = ψ'/R.
        let chi = (1.0 + psi) * (1.0 + psi);
        let grad_chi = 2.0 * (1.0 + psi) * dpsi / radius;
        out.grad_chi_ratio = out.grad_chi_ratio.max(grad_chi * grad_chi / chi);
        out.radii.push(r);
        out.phi.push(psi);
        out.chi.push(chi);
    }
    out.all_hold = out.psi_at_zero == 0.0
        && out.dpsi_at_zero == h
        && out.dpsi_min >= 0.0
        && out.dpsi_max <= 2.0 * h
        && out.d2psi_min >= -h
        && out.psi_max <= h
        && out.grad_chi_ratio <= out.grad_chi_bound;
    Ok(out)
}

/// Minimum of `Δ r_∂` over the collar `{r_∂ <= R}` against `−(n−1)(3H + 1)`.
pub fn index_comparison_check(domain: &BoundedDomain, radius: f64) -> Result<Certificate> {
    domain.check_radius(radius)?;
    let n1 = domain.space.dimension() as f64 - 1.0;
    let bound = -n1 * (3.0 * domain.h + 1.0);
    let mut min: Option<Extremum> = None;
    for (lo, hi, sign) in domain.collar(radius) {
        for i in 0..SCAN {
            let r = lo + (hi - lo) * i as f64 / (SCAN - 1) as f64;
            let (phi, dphi, _) = domain.space.warp_eval(r)?;
            if phi <= 0.0 {
                continue;
            }
            Extremum::track_min(
                &mut min,
                Extremum {
                    value: sign * n1 * dphi / phi,
                    node: i,
                    radius: r,
                    time: 0.0,
                },
            );
        }
    }
    let min = min.ok_or_else(|| Error::Config("empty collar".into()))?;
    let mut cert = Certificate::new(CertificateKind::IndexComparison)
        .param("r", radius)
        .param("h", domain.h)
        .param("bound", bound);
    cert.residual_min = Some(min);
    cert.verdict = if min.value >= bound {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Upper bound `C` of `1 < u < C` (1 for the log-power family).
    pub c: f64,
}

/// `C₂` and `C₃` from `(n, H)`; `c` is the exponential-family bound (1 otherwise).
pub fn boundary_c2_c3(n: usize, h: f64, c: f64) -> (f64, f64) {
    let n1 = n as f64 - 1.0;
    let c2 = 2.0 * c * 24f64.sqrt() * (1.0 + h) * n1 * h * (3.0 * h + 1.0);
    let inner = 16.0 * h * h + (1.0 + h) * h;
    let c3 = 24.0 * c * c * inner * inner + 864.0 * c.powi(4) * (1.0 + h).powi(4) * h.powi(4);
    (c2, c3)
}

pub fn boundary_constants(
    domain: &BoundedDomain,
    eq: &EquationSpec,
    traj: &Trajectory,
) -> BoundaryConstants {
    let bounds = reaction_bounds(eq, traj);
    let (c1, c) = match (eq, traj.declared_bound) {
        (EquationSpec::LogPower(_), _) => (domain.k + bounds.h1, 1.0),
        (EquationSpec::Exponential(_), Some(DeclaredBound::AboveOne { upper })) => {
            (domain.k + bounds.h, upper)
        }
        (EquationSpec::Exponential(_), _) => (domain.k + bounds.h, bounds.umax),
    };
    let (c2, c3) = boundary_c2_c3(domain.space.dimension(), domain.h, c);
    BoundaryConstants { c1, c2, c3, c }
}

/// Right side of the boundary estimate at one point; `t` is time since the start.
/// The log forms include the factor `1 − log u`.
pub fn boundary_rhs(
    kind: CertificateKind,
    consts: &BoundaryConstants,
    h: f64,
    radius: f64,
    k: f64,
    t: f64,
    u: f64,
) -> f64 {
    let q24 = 24f64.powf(0.25);
    let q2 = 2f64.powf(0.25);
    let tail = (consts.c2 / radius).sqrt() + consts.c3.powf(0.25) / radius;
    match kind {
        CertificateKind::Thm14 => {
            (1.0 + h)
                * (q24 * consts.c1.sqrt() * (1.0 + h) + q2 * (1.0 + h) / t.sqrt() + tail)
                * (1.0 - u.ln())
        }
        CertificateKind::Thm15 => {
            2.0 * (1.0 + h)
                * (q24 * (consts.c * consts.c1).sqrt() * (1.0 + h)
                    + q2 * (1.0 + h) * (consts.c / t).sqrt()
                    + tail)
        }
        _ => (q24 * k.sqrt() + q2 / t.sqrt()) * (1.0 - u.ln()),
    }
}

/// Largest one-sided second-order `|u_r|` at the Neumann walls. The stencil
/// imposes `u_r = 0` through a reflected ghost node, so this tends to 0 like `Δr²`.
pub fn wall_gradient(traj: &Trajectory) -> f64 {
    let dr = traj.grid.spacing();
    let mut worst: f64 = 0.0;
    for s in &traj.snapshots {
        let d = radial_derivative(&s.values, dr);
        worst = worst.max(d[d.len() - 1].abs());
        if traj.bc == BoundaryKind::NeumannAnnulus {
            worst = worst.max(d[0].abs());
        }
    }
    worst
}

fn check_domain_grid(domain: &BoundedDomain, traj: &Trajectory) -> Result<()> {
    let g = &traj.grid;
    let tol = 1e-9 * domain.shape.outer();
    let shape_ok = match domain.shape {
        Shape::Ball { r_b } => g.has_pole() && (g.end() - r_b).abs() <= tol,
        Shape::Annulus { r_a, r_b } => {
            traj.bc == BoundaryKind::NeumannAnnulus
                && (g.start() - r_a).abs() <= tol
                && (g.end() - r_b).abs() <= tol
        }
    };
    if !shape_ok || traj.flow.is_some() {
        return Err(Error::Config(
            "trajectory was not solved on this domain".into(),
        ));
    }
    Ok(())
}

/// Admissibility of `R`: rolling radius, small-`R` conditions and, when the
/// boundary is not convex, the index comparison.
pub fn check_admissible_radius(
    domain: &BoundedDomain,
    radius: f64,
) -> Result<(SmallRCheck, Option<Certificate>)> {
    domain.check_radius(radius)?;
    let k_r = domain.collar_sectional_bound(radius)?;
    let small = small_r_check(k_r, domain.h, radius);
    if !small.holds {
        return Err(Error::Hypothesis(format!(
            "R = {radius} is not small enough (K_R = {k_r}, H = {}): {:?}",
            domain.h, small
        )));
    }
    let index = if domain.h > 0.0 {
        let cert = index_comparison_check(domain, radius)?;
        if cert.verdict != Verdict::Pass {
            return Err(Error::Hypothesis(format!(
                "index comparison fails on the collar of width {radius}"
            )));
        }
        Some(cert)
    } else {
        None
    };
    Ok((small, index))
}

/// Explicit-constant boundary gradient estimate: passes when the max of
/// LHS/RHS over all nodes and snapshots is at most `1 + tol`.
pub fn boundary_certificate(
    domain: &BoundedDomain,
    traj: &Trajectory,
    kind: CertificateKind,
    radius: f64,
    tol: Option<f64>,
) -> Result<Certificate> {
    check_domain_grid(domain, traj)?;
    let (small, index) = check_admissible_radius(domain, radius)?;
    let eq = &traj.eq;
    match kind {
        CertificateKind::Thm14 => {
            if !eq.is_log_power() {
                return Err(Error::Hypothesis(
                    "thm14 applies to the log-power family".into(),
                ));
            }
            check_unit_interval(traj, "thm14")?;
        }
        CertificateKind::Main5 => {
            if domain.h != 0.0 {
                return Err(Error::Hypothesis(format!(
                    "main5 needs a convex boundary, H = {}",
                    domain.h
                )));
            }
            check_absorbing_signs(eq, "main5")?;
            if let EquationSpec::LogPower(c) = eq {
                if c.a + c.b > 0.0 {
                    return Err(Error::Hypothesis("main5 needs a + b <= 0".into()));
                }
            }
            check_unit_interval(traj, "main5")?;
        }
        CertificateKind::Thm15 => {
            if eq.is_log_power() {
                return Err(Error::Hypothesis(
                    "thm15 applies to the exponential family".into(),
                ));
            }
            match traj.declared_bound {
                Some(DeclaredBound::AboveOne { .. }) if traj.bound_held() => {}
                _ => {
                    return Err(Error::Hypothesis(
                        "thm15 needs a declared bound 1 < u < C that holds".into(),
                    ))
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "{other:?} is not a boundary estimate"
            )))
        }
    }
    let consts = boundary_constants(domain, eq, traj);
    let start = traj.window.start();
    let dr = traj.grid.spacing();
    let mut worst: Option<Extremum> = None;
    for s in &traj.snapshots {
        let t = s.time - start;
        if t <= 0.0 {
            continue;
        }
        let grad: Vec<f64> = if kind == CertificateKind::Thm15 {
            radial_derivative(&s.values, dr)
                .iter()
                .zip(&s.values)
                .map(|(g, u)| g.abs() / u.sqrt())
                .collect()
        } else {
            let logs: Vec<f64> = s.values.iter().map(|u| u.ln()).collect();
            radial_derivative(&logs, dr)
                .iter()
                .map(|g| g.abs())
                .collect()
        };
        for (i, (&g, &u)) in grad.iter().zip(&s.values).enumerate() {
            let rhs = boundary_rhs(kind, &consts, domain.h, radius, domain.k, t, u);
            Extremum::track_max(
                &mut worst,
                Extremum {
                    value: g / rhs,
                    node: i,
                    radius: traj.grid.radius(i),
                    time: s.time,
                },
            );
        }
    }
    let worst = worst.ok_or_else(|| Error::Config("no snapshot after the start time".into()))?;
    let tol = tol.unwrap_or(10.0 * (dr + traj.dt));
    let mut cert = Certificate::new(kind)
        .param("r", radius)
        .param("h", domain.h)
        .param("k", domain.k)
        .param("n", domain.space.dimension() as f64)
        .param("c1", consts.c1)
        .param("c2", consts.c2)
        .param("c3", consts.c3);
    if kind == CertificateKind::Thm15 {
        cert = cert.param("c", consts.c);
    }
    cert.grid = Some(GridMeta::of(traj));
    cert.ratio_max = Some(worst);
    cert.tolerance = tol;
    cert.audit.insert("margin".into(), 1.0 - worst.value);
    cert.audit.insert("small_r_first".into(), small.first);
    cert.audit.insert("small_r_second".into(), small.second);
    cert.audit.insert("rolling_r".into(), domain.rolling_r);
    cert.audit
        .insert("wall_gradient".into(), wall_gradient(traj));
    if let Some(index) = index {
        cert.audit.insert(
            "index_min".into(),
            index.residual_min.map_or(f64::NAN, |e| e.value),
        );
        cert.audit
            .insert("index_bound".into(), index.parameters["bound"]);
    }
    cert.notes.push(format!(
        "constants evaluated over the window [{start}, {}]",
        traj.window.t0
    ));
    cert.verdict = if worst.value <= 1.0 + tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(cert)
}
