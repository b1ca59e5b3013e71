//! Radial grids and sampled profile pairs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::hermite;

/// Largest admissible first node for a grid used as a truncation of `[0, ∞)`.
pub const MAX_FIRST_NODE: f64 = 1e-4;

/// Default grid: geometric, 400 nodes per decade over `[1e-6, 1e4]`.
pub const DEFAULT_R0: f64 = 1e-6;
pub const DEFAULT_RMAX: f64 = 1e4;
pub const DEFAULT_NODES: usize = 4001;
pub const NODES_PER_DECADE: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    #[default]
    Geometric,
    Uniform,
}

/// JSON-facing grid description: `{"r0": .., "rmax": .., "nodes": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r0: f64,
    pub rmax: f64,
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "is_geometric")]
    pub growth: Growth,
}

fn is_geometric(g: &Growth) -> bool {
    *g == Growth::Geometric
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r0: DEFAULT_R0,
            rmax: DEFAULT_RMAX,
            nodes: DEFAULT_NODES,
            growth: Growth::Geometric,
        }
    }
}

impl GridSpec {
    /// Geometric grid from `DEFAULT_R0` to `rmax` at the default density.
    pub fn geometric_to(rmax: f64) -> Self {
        let decades = (rmax / DEFAULT_R0).log10().max(1.0);
        Self {
            r0: DEFAULT_R0,
            rmax,
            nodes: (decades * NODES_PER_DECADE).ceil() as usize + 1,
            growth: Growth::Geometric,
        }
    }

    pub fn build(&self) -> Result<RadialGrid> {
        let grid = match self.growth {
            Growth::Geometric => RadialGrid::geometric(self.r0, self.rmax, self.nodes)?,
            Growth::Uniform => RadialGrid::uniform(self.r0, self.rmax, self.nodes)?,
        };
        grid.check_truncation(self.rmax)?;
        Ok(grid)
    }
}

/// How the nodes of a grid were laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GridGrowth {
    Geometric { ratio: f64 },
    Uniform { step: f64 },
    Irregular,
}

/// Strictly increasing, strictly positive radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    growth: GridGrowth,
}

impl RadialGrid {
    /// Wrap arbitrary radii after checking order and positivity.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        Self::checked(nodes, GridGrowth::Irregular)
    }

    fn checked(nodes: Vec<f64>, growth: GridGrowth) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if !nodes.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidGrid("nodes must be finite and positive".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { nodes, growth })
    }

    /// `nodes` radii with constant ratio from `r0` to `rmax` (both included).
    pub fn geometric(r0: f64, rmax: f64, nodes: usize) -> Result<Self> {
        if !(r0 > 0.0 && rmax > r0) || nodes < 2 {
            return Err(Error::InvalidGrid(format!(
                "geometric grid needs 0 < r0 < rmax and >= 2 nodes (r0 = {r0}, rmax = {rmax}, nodes = {nodes})"
            )));
        }
        let log_step = (rmax / r0).ln() / (nodes - 1) as f64;
        let mut r: Vec<f64> = (0..nodes).map(|i| r0 * (log_step * i as f64).exp()).collect();
        r[0] = r0;
        r[nodes - 1] = rmax;
        Self::checked(
            r,
            GridGrowth::Geometric {
                ratio: log_step.exp(),
            },
        )
    }

    /// Equally spaced radii from `r0` to `rmax` (both included).
    pub fn uniform(r0: f64, rmax: f64, nodes: usize) -> Result<Self> {
        if !(r0 > 0.0 && rmax > r0) || nodes < 2 {
            return Err(Error::InvalidGrid(format!(
                "uniform grid needs 0 < r0 < rmax and >= 2 nodes (r0 = {r0}, rmax = {rmax}, nodes = {nodes})"
            )));
        }
        let step = (rmax - r0) / (nodes - 1) as f64;
        let mut r: Vec<f64> = (0..nodes).map(|i| r0 + step * i as f64).collect();
        r[nodes - 1] = rmax;
        Self::checked(r, GridGrowth::Uniform { step })
    }

    /// The default geometric grid.
    pub fn default_grid() -> Self {
        GridSpec::default().build().expect("default grid is valid")
    }

    /// Check the grid can stand in for `[0, rmax]`.
    pub fn check_truncation(&self, rmax: f64) -> Result<()> {
        if self.first() > MAX_FIRST_NODE {
            return Err(Error::InvalidGrid(format!(
                "first node {} exceeds {MAX_FIRST_NODE}",
                self.first()
            )));
        }
        if self.last() < rmax {
            return Err(Error::InvalidGrid(format!(
                "last node {} is below the truncation radius {rmax}",
                self.last()
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn growth(&self) -> GridGrowth {
        self.growth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Largest `ln(r_{i+1}/r_i)`.
    pub fn max_log_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| (w[1] / w[0]).ln())
            .fold(0.0, f64::max)
    }

    /// Same layout with twice the resolution: one midpoint inserted per cell
    /// (geometric mean on geometric grids, arithmetic mean otherwise).
    pub fn refined(&self) -> Self {
        let mut r = Vec::with_capacity(2 * self.len() - 1);
        for w in self.nodes.windows(2) {
            r.push(w[0]);
            let mid = match self.growth {
                GridGrowth::Geometric { .. } => (w[0] * w[1]).sqrt(),
                _ => 0.5 * (w[0] + w[1]),
            };
            r.push(mid);
        }
        r.push(self.last());
        let growth = match self.growth {
            GridGrowth::Geometric { ratio } => GridGrowth::Geometric { ratio: ratio.sqrt() },
            GridGrowth::Uniform { step } => GridGrowth::Uniform { step: 0.5 * step },
            GridGrowth::Irregular => GridGrowth::Irregular,
        };
        Self { nodes: r, growth }
    }

    /// Indices of a half-resolution sub-grid: every other node plus the last.
    pub fn coarse_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).step_by(2).collect();
        if *idx.last().unwrap() != self.len() - 1 {
            idx.push(self.len() - 1);
        }
        idx
    }

    /// Index `i` with `r_i <= r < r_{i+1}`, clamped to valid cells.
    pub fn cell_of(&self, r: f64) -> usize {
        let i = self.nodes.partition_point(|x| *x <= r);
        i.saturating_sub(1).min(self.len() - 2)
    }
}

/// Samples of `(u, v)` and their radial derivatives on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfilePair {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl RadialProfilePair {
    pub fn new(grid: RadialGrid, u: Vec<f64>, v: Vec<f64>, du: Vec<f64>, dv: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        for arr in [&u, &v, &du, &dv] {
            if arr.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: arr.len(),
                });
            }
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("profile samples must be finite".into()));
            }
        }
        if u.iter().chain(&v).any(|x| *x < 0.0) {
            return Err(Error::InvalidArgument("profile values must be nonnegative".into()));
        }
        Ok(Self { grid, u, v, du, dv })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// The pair with the roles of `u` and `v` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            u: self.v.clone(),
            v: self.u.clone(),
            du: self.dv.clone(),
            dv: self.du.clone(),
        }
    }

    /// Radial smoothness at the origin: `|u'(r0)|, |v'(r0)| <= slope_bound · r0`.
    pub fn origin_consistent(&self, slope_bound: f64) -> bool {
        let r0 = self.grid.first();
        self.du[0].abs() <= slope_bound * r0 && self.dv[0].abs() <= slope_bound * r0
    }

    /// Cubic Hermite interpolation of `(u, v)` at `r` inside the grid.
    pub fn interpolate(&self, r: f64) -> (f64, f64) {
        let r_nodes = self.grid.nodes();
        let i = self.grid.cell_of(r);
        let (a, b) = (r_nodes[i], r_nodes[i + 1]);
        (
            hermite(a, b, self.u[i], self.u[i + 1], self.du[i], self.du[i + 1], r),
            hermite(a, b, self.v[i], self.v[i + 1], self.dv[i], self.dv[i + 1], r),
        )
    }

    /// CSV with header `r,u,v,du,dv`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u", "v", "du", "dv"])?;
        for i in 0..self.len() {
            w.write_record([
                fmt_f64(self.grid.nodes()[i]),
                fmt_f64(self.u[i]),
                fmt_f64(self.v[i]),
                fmt_f64(self.du[i]),
                fmt_f64(self.dv[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
