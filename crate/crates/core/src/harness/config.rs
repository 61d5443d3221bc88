use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary::{build_domain, BoundedDomain, Shape};
use crate::error::{Error, Result};
use crate::estimates::CertificateKind;
use crate::flow::FlowSpec;
use crate::geometry::{spline_from_csv, ModelSpace, Warp, Weight};
use crate::solver::{EquationSpec, Grid, Scheme, SolverConfig, TimeWindow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WarpConfig {
    Euclidean,
    Hyperbolic {
        curvature: f64,
    },
    Spherical {
        curvature: f64,
    },
    /// Two-column `r,φ` CSV, relative to the config file.
    Tabulated {
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    #[default]
    Zero,
    GaussianHalfSquare {
        lambda: f64,
    },
    Tabulated {
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub dimension: usize,
    pub r_max: f64,
    pub warp: WarpConfig,
    #[serde(default)]
    pub weight: WeightConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub s0: f64,
    pub horizon: f64,
}

/// Initial data. `bump` uses `c0 + c1 cos(π (r − r_in)/(r_out − r_in))` on
/// the solve interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Constant {
        value: f64,
    },
    Bump {
        c0: f64,
        c1: f64,
    },
    /// Heat kernel `(4π t_s)^{−n/2} e^{−r²/(4 t_s)}`; with `peak` the profile
    /// is rescaled so its value at the pole is `peak`.
    Gaussian {
        t_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        peak: Option<f64>,
    },
    Tabulated {
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: usize,
    /// Factor by which `Δt` shrinks per dyadic `Δr` refinement.
    #[serde(default = "two")]
    pub time_refinement: f64,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub t0: f64,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// Space-time cut-off request for the `cutoff` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub radius: f64,
    pub t0: f64,
    pub duration: f64,
    pub tau: f64,
    pub epsilons: Vec<f64>,
}

/// One requested check. Radii are in the base metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificateRequest {
    Lemma21 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Lemma31 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Lemma41 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Thm11 {
        radius: f64,
    },
    Thm12 {
        radius: f64,
    },
    Thm13 {
        radius: f64,
    },
    Thm14 {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Thm15 {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Main5 {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Harnack {
        pairs: Vec<[f64; 2]>,
    },
    /// Stationary and long-time paths, both started from the scenario's initial data.
    Liouville {
        duration: f64,
    },
    LiYau {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    IndexComparison {
        radius: f64,
    },
}

impl CertificateRequest {
    pub fn kind(&self) -> CertificateKind {
        use CertificateRequest as R;
        match self {
            R::Lemma21 { .. } => CertificateKind::Lemma21,
            R::Lemma31 { .. } => CertificateKind::Lemma31,
            R::Lemma41 { .. } => CertificateKind::Lemma41,
            R::Thm11 { .. } => CertificateKind::Thm11,
            R::Thm12 { .. } => CertificateKind::Thm12,
            R::Thm13 { .. } => CertificateKind::Thm13,
            R::Thm14 { .. } => CertificateKind::Thm14,
            R::Thm15 { .. } => CertificateKind::Thm15,
            R::Main5 { .. } => CertificateKind::Main5,
            R::Harnack { .. } => CertificateKind::Harnack,
            R::Liouville { .. } => CertificateKind::Liouville,
            R::LiYau { .. } => CertificateKind::LiYau,
            R::IndexComparison { .. } => CertificateKind::IndexComparison,
        }
    }

    fn is_boundary(&self) -> bool {
        matches!(
            self.kind(),
            CertificateKind::Thm14
                | CertificateKind::Thm15
                | CertificateKind::Main5
                | CertificateKind::IndexComparison
        )
    }
}

/// A scenario file as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub space: SpaceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    pub equation: EquationSpec,
    pub initial: InitialConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub window: WindowConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<CutoffConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateRequest>,
}

/// A validated scenario with its geometry built and external data loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Raw bytes of the config file (hashed into reports).
    pub source: String,
    pub space: ModelSpace,
    pub domain: Option<BoundedDomain>,
    pub flow: Option<FlowSpec>,
    pub grid: Grid,
    pub window: TimeWindow,
    pub initial: Vec<f64>,
    tabulated_initial: Option<crate::spline::CubicSpline>,
}

fn read_csv(base: &Path, rel: &Path, key: &str) -> Result<crate::spline::CubicSpline> {
    let path = base.join(rel);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("{key}: cannot read {}: {e}", path.display())))?;
    spline_from_csv(&text).map_err(|e| Error::Config(format!("{key}: {e}")))
}

fn config_err(key: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{key}: {m}")),
        Error::Hypothesis(m) => Error::Hypothesis(format!("{key}: {m}")),
        other => other,
    }
}

impl Scenario {
    /// Reads and validates a scenario file. Relative CSV paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        Self::build(config, text.to_string(), base)
    }

    pub fn build(config: ScenarioConfig, source: String, base: &Path) -> Result<Self> {
        let sc = &config.space;
        let warp = match &sc.warp {
            WarpConfig::Euclidean => Warp::Euclidean,
            WarpConfig::Hyperbolic { curvature } => Warp::Hyperbolic {
                curvature: *curvature,
            },
            WarpConfig::Spherical { curvature } => Warp::Spherical {
                curvature: *curvature,
            },
            WarpConfig::Tabulated { csv } => {
                Warp::Tabulated(read_csv(base, csv, "space.warp.csv")?)
            }
        };
        let weight = match &sc.weight {
            WeightConfig::Zero => Weight::Zero,
            WeightConfig::GaussianHalfSquare { lambda } => {
                Weight::GaussianHalfSquare { lambda: *lambda }
            }
            WeightConfig::Tabulated { csv } => {
                Weight::Tabulated(read_csv(base, csv, "space.weight.csv")?)
            }
        };
        let space = ModelSpace::new(sc.dimension, warp, weight, sc.r_max)
            .map_err(|e| config_err("space", e))?;
        config
            .equation
            .validate()
            .map_err(|e| config_err("equation", e))?;
        config
            .solver
            .validate()
            .map_err(|e| config_err("solver", e))?;
        if !(config.grid.time_refinement >= 1.0) {
            return Err(Error::Config("grid.time_refinement must be >= 1".into()));
        }
        if config.domain.is_some() && config.flow.is_some() {
            return Err(Error::Config("domain and flow cannot be combined".into()));
        }
        let domain = config
            .domain
            .map(|shape| build_domain(&space, shape))
            .transpose()
            .map_err(|e| config_err("domain", e))?;
        let flow = config
            .flow
            .map(|f| FlowSpec::new(space.clone(), f.s0, f.horizon))
            .transpose()
            .map_err(|e| config_err("flow", e))?;
        let grid = match &domain {
            Some(d) => d.shape.grid(config.grid.nodes),
            None => Grid::ball(space.r_max(), config.grid.nodes),
        }
        .map_err(|e| config_err("grid", e))?;
        let w = &config.window;
        let window = match (&w.snapshots, w.count) {
            (Some(s), None) => TimeWindow::new(w.t0, w.duration, s.clone()),
            (None, Some(c)) => TimeWindow::uniform(w.t0, w.duration, c),
            _ => Err(Error::Config(
                "exactly one of snapshots or count is required".into(),
            )),
        }
        .map_err(|e| config_err("window", e))?;
        let tabulated_initial = match &config.initial {
            InitialConfig::Tabulated { csv } => Some(read_csv(base, csv, "initial.csv")?),
            _ => None,
        };
        let mut scenario = Self {
            config,
            source,
            space,
            domain,
            flow,
            grid,
            window,
            initial: Vec::new(),
            tabulated_initial,
        };
        scenario.initial = scenario.sample_initial(&scenario.grid)?;
        scenario.check_requests()?;
        Ok(scenario)
    }

    /// Initial data sampled on `grid`.
    pub fn sample_initial(&self, grid: &Grid) -> Result<Vec<f64>> {
        let (lo, hi) = (grid.start(), grid.end());
        let n = self.space.dimension() as f64;
        let values = match &self.config.initial {
            InitialConfig::Constant { value } => grid.sample(|_| *value),
            InitialConfig::Bump { c0, c1 } => {
                grid.sample(|r| c0 + c1 * (PI * (r - lo) / (hi - lo)).cos())
            }
            InitialConfig::Gaussian { t_s, peak } => {
                if !(*t_s > 0.0) {
                    return Err(Error::Config(format!(
                        "initial.t_s must be positive, got {t_s}"
                    )));
                }
                let amp = peak.unwrap_or_else(|| (4.0 * PI * t_s).powf(-n / 2.0));
                grid.sample(|r| amp * (-r * r / (4.0 * t_s)).exp())
            }
            InitialConfig::Tabulated { .. } => {
                let spline = self
                    .tabulated_initial
                    .as_ref()
                    .expect("loaded with the config");
                let end = *spline.knots().last().unwrap_or(&0.0);
                if end < hi * (1.0 - 1e-12) {
                    return Err(Error::Config(format!(
                        "initial.csv covers [0, {end}], grid needs {hi}"
                    )));
                }
                grid.sample(|r| spline.eval(r).0)
            }
        };
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(
                "initial data must be positive and finite".into(),
            ));
        }
        Ok(values)
    }

    /// Structural preconditions of the requested certificates, checked before
    /// any solve. Data-dependent hypotheses are checked per certificate later.
    fn check_requests(&self) -> Result<()> {
        let (lo, hi) = (self.grid.start(), self.grid.end());
        for (i, req) in self.config.certificates.iter().enumerate() {
            let key = format!("certificates[{i}] ({:?})", req.kind());
            let bad = |m: String| Err(Error::Config(format!("{key}: {m}")));
            if req.is_boundary() && self.domain.is_none() {
                return bad("needs a [domain] table".into());
            }
            if !req.is_boundary() && self.domain.is_some() {
                return bad("is not defined on a bounded domain".into());
            }
            use CertificateRequest as R;
            match req {
                R::Lemma31 { .. } | R::Thm13 { .. } if self.flow.is_none() => {
                    return bad("needs a [flow] table".into())
                }
                R::Lemma21 { .. } | R::Lemma41 { .. } | R::Thm11 { .. } | R::Thm12 { .. }
                    if self.flow.is_some() =>
                {
                    return bad("is stated on a static metric".into())
                }
                R::Harnack { .. } | R::Liouville { .. } | R::LiYau { .. }
                    if self.flow.is_some() =>
                {
                    return bad("is stated on a static metric".into())
                }
                _ => {}
            }
            match req {
                R::Thm11 { radius } | R::Thm12 { radius } | R::Thm13 { radius }
                    if !(*radius > 0.0 && *radius <= hi) =>
                {
                    return bad(format!("radius {radius} must lie in (0, {hi}]"));
                }
                R::Harnack { pairs } => {
                    if pairs.is_empty() {
                        return bad("pairs must not be empty".into());
                    }
                    if let Some(p) = pairs.iter().flatten().find(|r| !(**r >= lo && **r <= hi)) {
                        return bad(format!("pair radius {p} outside [{lo}, {hi}]"));
                    }
                }
                R::Liouville { duration } if !(*duration > 0.0) => {
                    return bad("duration must be positive".into())
                }
                R::LiYau {
                    radius: Some(r), ..
                } if !(*r > 0.0) => return bad("radius must be positive".into()),
                _ => {}
            }
        }
        Ok(())
    }

    /// Same scenario on a grid refined `levels` times, with `Δt` shrunk by
    /// `time_refinement` per level.
    pub fn refined(&self, levels: u32) -> Result<Self> {
        let mut config = self.config.clone();
        config.grid.nodes = (config.grid.nodes - 1) * 2usize.pow(levels) + 1;
        config.solver.dt /= config.grid.time_refinement.powi(levels as i32);
        let mut s = self.clone();
        s.grid = match &s.domain {
            Some(d) => d.shape.grid(config.grid.nodes)?,
            None => Grid::ball(s.space.r_max(), config.grid.nodes)?,
        };
        s.config = config;
        s.initial = s.sample_initial(&s.grid)?;
        Ok(s)
    }

    pub fn scheme(&self) -> Scheme {
        self.config.solver.scheme
    }
}
