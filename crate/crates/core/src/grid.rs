//! Radial grids, sampled profiles and radial regions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

/// How grid nodes are distributed along the radius.
///
/// Every grid is the image of a uniform index coordinate `xi = k` under a
/// smooth map `r(xi)`; derivative stencils are applied in `xi` and mapped
/// back with the chain rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpacingMode {
    /// `r_k = r_min + k h`.
    Uniform,
    /// `r_k = r_min q^k` with `r_min > 0`.
    Geometric,
    /// `r_k = c sinh((k + 1/2) d)`: uniform near the axis, geometric far out.
    /// The map is odd, so the grid is symmetric through `r = 0`.
    SinhCore { core: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    nodes: Vec<f64>,
    mode: SpacingMode,
    /// dr/dxi at each node.
    jac: Vec<f64>,
    /// d^2r/dxi^2 at each node.
    jac2: Vec<f64>,
    tip_symmetric: bool,
}

impl RadialGrid {
    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        check_bounds(r_min, r_max, n)?;
        if r_min < 0.0 {
            return Err(Error::Domain(format!("negative r_min {r_min}")));
        }
        let h = (r_max - r_min) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|k| r_min + h * k as f64).collect();
        Ok(Self {
            r_min,
            r_max,
            jac: vec![h; n],
            jac2: vec![0.0; n],
            nodes,
            mode: SpacingMode::Uniform,
            tip_symmetric: false,
        })
    }

    /// Uniform grid on `(0, r_max)` with nodes at cell centres `(k + 1/2) h`,
    /// so that reflection through the axis maps nodes onto nodes.
    pub fn cell_centered(r_max: f64, n: usize) -> Result<Self> {
        check_bounds(0.0, r_max, n)?;
        let h = r_max / (n as f64 - 0.5);
        let nodes: Vec<f64> = (0..n).map(|k| h * (k as f64 + 0.5)).collect();
        Ok(Self {
            r_min: nodes[0],
            r_max: nodes[n - 1],
            jac: vec![h; n],
            jac2: vec![0.0; n],
            nodes,
            mode: SpacingMode::Uniform,
            tip_symmetric: true,
        })
    }

    pub fn geometric(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        check_bounds(r_min, r_max, n)?;
        if r_min <= 0.0 {
            return Err(Error::Domain("geometric grid needs r_min > 0".into()));
        }
        let l = (r_max / r_min).ln() / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|k| r_min * (l * k as f64).exp()).collect();
        nodes[n - 1] = r_max;
        let jac = nodes.iter().map(|r| r * l).collect();
        let jac2 = nodes.iter().map(|r| r * l * l).collect();
        Ok(Self {
            r_min,
            r_max,
            nodes,
            mode: SpacingMode::Geometric,
            jac,
            jac2,
            tip_symmetric: false,
        })
    }

    /// Axis-symmetric grid `r = core * sinh(xi)` reaching `r_max` at the last node.
    pub fn sinh_core(core: f64, r_max: f64, n: usize) -> Result<Self> {
        check_bounds(0.0, r_max, n)?;
        if core <= 0.0 {
            return Err(Error::Domain("sinh grid needs a positive core width".into()));
        }
        let xi_max = (r_max / core).asinh();
        let d = xi_max / (n as f64 - 0.5);
        let xi = |k: usize| d * (k as f64 + 0.5);
        let nodes: Vec<f64> = (0..n).map(|k| core * xi(k).sinh()).collect();
        let jac = (0..n).map(|k| core * d * xi(k).cosh()).collect();
        let jac2 = (0..n).map(|k| core * d * d * xi(k).sinh()).collect();
        Ok(Self {
            r_min: nodes[0],
            r_max: nodes[n - 1],
            nodes,
            mode: SpacingMode::SinhCore { core },
            jac,
            jac2,
            tip_symmetric: true,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn mode(&self) -> SpacingMode {
        self.mode
    }

    /// True when reflection through `r = 0` maps nodes onto nodes, so parity
    /// ghost values can replace one-sided stencils at the inner end.
    pub fn tip_symmetric(&self) -> bool {
        self.tip_symmetric
    }

    /// Lower end of the represented domain: the axis for symmetric grids.
    pub fn lower(&self) -> f64 {
        if self.tip_symmetric {
            0.0
        } else {
            self.r_min
        }
    }

    pub(crate) fn jac(&self) -> &[f64] {
        &self.jac
    }

    pub(crate) fn jac2(&self) -> &[f64] {
        &self.jac2
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the cell `[r_k, r_{k+1}]` containing `r`, clamped to the grid.
    pub fn locate(&self, r: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(k) => k.min(n - 2),
            Err(0) => 0,
            Err(k) => (k - 1).min(n - 2),
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lower() - 1e-12 && r <= self.r_max + 1e-12
    }

    /// Same node layout, refined by an integer factor in the index coordinate.
    pub fn same_kind_with(&self, n: usize) -> Result<Self> {
        match self.mode {
            SpacingMode::Uniform if self.tip_symmetric => Self::cell_centered(self.r_max_domain(), n),
            SpacingMode::Uniform => Self::uniform(self.r_min, self.r_max, n),
            SpacingMode::Geometric => Self::geometric(self.r_min, self.r_max, n),
            SpacingMode::SinhCore { core } => Self::sinh_core(core, self.r_max, n),
        }
    }

    fn r_max_domain(&self) -> f64 {
        // cell-centred grids place the last node at r_max of construction
        self.r_max
    }
}

fn check_bounds(r_min: f64, r_max: f64, n: usize) -> Result<()> {
    if n < MIN_NODES {
        return Err(Error::Resolution(format!(
            "grid needs at least {MIN_NODES} nodes, got {n}"
        )));
    }
    if !(r_min < r_max) || !r_max.is_finite() {
        return Err(Error::Domain(format!("invalid radial range [{r_min}, {r_max}]")));
    }
    Ok(())
}

/// A real function of the radius sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite profile value at r = {}",
                grid.r(k)
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn same_grid(&self, other: &RadialProfile) -> bool {
        same_grid(&self.grid, &other.grid)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Closed radial interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub a: f64,
    pub b: f64,
}

impl Region {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Domain(format!("empty region [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn whole(grid: &RadialGrid) -> Self {
        Self {
            a: grid.lower(),
            b: grid.r_max(),
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.a && r <= self.b
    }

    pub(crate) fn check_in(&self, grid: &RadialGrid) -> Result<()> {
        if self.a < grid.lower() - 1e-12 || self.b > grid.r_max() + 1e-12 {
            return Err(Error::Domain(format!(
                "region [{}, {}] outside grid [{}, {}]",
                self.a,
                self.b,
                grid.lower(),
                grid.r_max()
            )));
        }
        Ok(())
    }
}

/// A singular set in the radial picture: the axis (`lo = hi = 0`), a sphere
/// (`lo = hi = r0`) or a closed shell `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub lo: f64,
    pub hi: f64,
}

impl SingularSet {
    pub fn axis() -> Self {
        Self { lo: 0.0, hi: 0.0 }
    }

    pub fn sphere(r0: f64) -> Self {
        Self { lo: r0, hi: r0 }
    }

    pub fn shell(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || lo < 0.0 {
            return Err(Error::Domain(format!("invalid shell [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Distance from radius `r` to the set, measured along the radius.
    pub fn distance(&self, r: f64) -> f64 {
        (self.lo - r).max(r - self.hi).max(0.0)
    }

    /// The neighbourhood `{d < eps}` as a radial interval clipped at the axis.
    pub fn neighbourhood(&self, eps: f64) -> Region {
        Region {
            a: (self.lo - eps).max(0.0),
            b: self.hi + eps,
        }
    }
}
