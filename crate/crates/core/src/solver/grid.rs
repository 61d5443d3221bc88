use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ModelSpace;
use crate::linalg::Tridiagonal;

pub const MIN_NODES: usize = 33;

/// Boundary closure of the radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Symmetric pole at `r = 0`, homogeneous Neumann at the outer radius.
    NeumannAtRMax,
    /// Homogeneous Neumann at both ends of an annulus.
    NeumannAnnulus,
}

/// Uniform radial grid on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    start: f64,
    end: f64,
    nodes: usize,
}

impl Grid {
    /// Ball grid `[0, r_end]` with the pole at node 0.
    pub fn ball(r_end: f64, nodes: usize) -> Result<Self> {
        Self::new(0.0, r_end, nodes)
    }

    pub fn annulus(r_inner: f64, r_outer: f64, nodes: usize) -> Result<Self> {
        if !(r_inner > 0.0) {
            return Err(Error::Config(
                "annulus needs a positive inner radius".into(),
            ));
        }
        Self::new(r_inner, r_outer, nodes)
    }

    fn new(start: f64, end: f64, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        if !(end > start && start >= 0.0 && end.is_finite()) {
            return Err(Error::Config(format!(
                "invalid radial interval [{start}, {end}]"
            )));
        }
        Ok(Self { start, end, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn has_pole(&self) -> bool {
        self.start == 0.0
    }

    pub fn boundary(&self) -> BoundaryKind {
        if self.has_pole() {
            BoundaryKind::NeumannAtRMax
        } else {
            BoundaryKind::NeumannAnnulus
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.nodes - 1) as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.end
        } else {
            self.start + i as f64 * self.spacing()
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.radius(i)).collect()
    }

    /// Same interval with `2(N-1)+1` nodes; every old node is a new node.
    pub fn refined(&self) -> Self {
        Self {
            nodes: 2 * (self.nodes - 1) + 1,
            ..*self
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.radii().into_iter().map(f).collect()
    }

    /// Weighted mass `∫ u φ^{n-1} e^{-f} dr` by the trapezoid rule.
    pub fn weighted_mass(&self, space: &ModelSpace, field: &[f64]) -> Result<f64> {
        let h = self.spacing();
        let mut total = 0.0;
        for (i, u) in field.iter().enumerate() {
            let w = if i == 0 || i + 1 == self.nodes {
                0.5
            } else {
                1.0
            };
            total += w * u * space.volume_density(self.radius(i))?;
        }
        Ok(total * h)
    }
}

/// Second-order discretization of the radial f-Laplacian on a grid,
/// including the pole and Neumann closures.
pub fn f_laplacian_matrix(space: &ModelSpace, grid: &Grid) -> Result<Tridiagonal> {
    if grid.end() > space.r_max() * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "grid extends to {} beyond the model radius {}",
            grid.end(),
            space.r_max()
        )));
    }
    let n = grid.len();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let mut m = Tridiagonal::zeros(n);
    for i in 0..n {
        if i == 0 {
            if grid.has_pole() {
                // even extension u_{-1} = u_1; Δ_f u(0) = n u_rr(0)
                let dim = space.dimension() as f64;
                m.diag[0] = -2.0 * dim * inv_h2;
                m.upper[0] = 2.0 * dim * inv_h2;
            } else {
                m.diag[0] = -2.0 * inv_h2;
                m.upper[0] = 2.0 * inv_h2;
            }
        } else if i + 1 == n {
            m.lower[i] = 2.0 * inv_h2;
            m.diag[i] = -2.0 * inv_h2;
        } else {
            let d = space.drift_coefficient(grid.radius(i))?;
            m.lower[i] = inv_h2 - 0.5 * d / h;
            m.diag[i] = -2.0 * inv_h2;
            m.upper[i] = inv_h2 + 0.5 * d / h;
        }
    }
    Ok(m)
}

/// Applies the discrete f-Laplacian to a nodal field.
pub fn discrete_f_laplacian(space: &ModelSpace, grid: &Grid, field: &[f64]) -> Result<Vec<f64>> {
    if field.len() != grid.len() {
        return Err(Error::Config(format!(
            "field has {} values for a grid of {} nodes",
            field.len(),
            grid.len()
        )));
    }
    Ok(f_laplacian_matrix(space, grid)?.mul_vec(field))
}
