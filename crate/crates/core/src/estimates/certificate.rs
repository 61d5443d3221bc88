use std::collections::BTreeMap;

use serde::Serialize;

use crate::solver::Trajectory;

/// Which inequality a certificate checks.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Lemma21,
    Lemma31,
    Lemma41,
    Thm11,
    Thm12,
    Thm13,
    Thm14,
    Thm15,
    Main5,
    Harnack,
    Liouville,
    LiYau,
    IndexComparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured constant with no explicit threshold to compare against.
    Measured,
    /// The check could not reach a conclusion (e.g. Newton divergence).
    Inconclusive,
}

/// Location of an extremum over the space-time sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub node: usize,
    pub radius: f64,
    pub time: f64,
}

impl Extremum {
    pub fn track_min(slot: &mut Option<Extremum>, cand: Extremum) {
        match slot {
            Some(cur) if cur.value <= cand.value => {}
            _ => *slot = Some(cand),
        }
    }

    pub fn track_max(slot: &mut Option<Extremum>, cand: Extremum) {
        match slot {
            Some(cur) if cur.value >= cand.value => {}
            _ => *slot = Some(cand),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    pub nodes: usize,
    pub dr: f64,
    pub dt: f64,
    pub r_start: f64,
    pub r_end: f64,
    pub snapshots: usize,
}

impl GridMeta {
    pub fn of(traj: &Trajectory) -> Self {
        Self {
            nodes: traj.grid.len(),
            dr: traj.grid.spacing(),
            dt: traj.dt,
            r_start: traj.grid.start(),
            r_end: traj.grid.end(),
            snapshots: traj.snapshots.len(),
        }
    }
}

/// Same certificate evaluated on a grid refined once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    pub coarse: f64,
    pub fine: f64,
    /// `|fine - coarse| / |fine|`.
    pub relative_drift: f64,
    /// `|coarse| / |fine|`.
    pub ratio: f64,
}

impl Refinement {
    pub fn new(coarse: f64, fine: f64) -> Self {
        let drift = if fine == coarse {
            0.0
        } else {
            (fine - coarse).abs() / fine.abs()
        };
        let ratio = if coarse == fine {
            1.0
        } else {
            coarse.abs() / fine.abs()
        };
        Self {
            coarse,
            fine,
            relative_drift: drift,
            ratio,
        }
    }
}

/// Outcome of checking one inequality on computed data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub verdict: Verdict,
    /// Inputs of the check (constants, radii, curvature bounds).
    pub parameters: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridMeta>,
    /// Minimum of LHS − RHS (residual kinds).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_min: Option<Extremum>,
    /// Minimal certified constant `c*` (unspecified-constant kinds).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<Extremum>,
    /// Maximum of LHS / RHS (explicit-constant kinds).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<Extremum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<Refinement>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub audit: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(kind: CertificateKind) -> Self {
        Self {
            kind,
            verdict: Verdict::Measured,
            parameters: BTreeMap::new(),
            grid: None,
            residual_min: None,
            constant: None,
            ratio_max: None,
            refinement: None,
            tolerance: 0.0,
            audit: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass | Verdict::Measured)
    }

    /// Headline number of the certificate: residual minimum, `c*`, or max ratio.
    pub fn headline(&self) -> Option<f64> {
        self.residual_min
            .or(self.constant)
            .or(self.ratio_max)
            .map(|e| e.value)
    }

    /// Attaches the result of the same check on a refined grid.
    pub fn with_refinement(mut self, fine: &Certificate) -> Self {
        if let (Some(c), Some(f)) = (self.headline(), fine.headline()) {
            self.refinement = Some(Refinement::new(c, f));
        }
        self
    }
}
