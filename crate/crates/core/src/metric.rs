//! SO(n)-invariant metrics and symmetric 2-tensors.
//!
//! A warped metric is `A(r) dr^2 + B(r) h`, where `h` is the round metric of
//! the unit sphere (fibre curvature 1) or a flat metric on a torus factor
//! (fibre curvature 0). Derivatives of `B` are always taken through
//! `phi = sqrt(B)`, which is odd through the axis when the tip is regular.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{same_grid, RadialGrid, RadialProfile};
use crate::stencil::{jets, Jet, Parity};

/// `A` and `phi = sqrt(B)` with derivatives at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub a: Jet,
    pub phi: Jet,
}

impl MetricJet {
    pub fn b(&self) -> Jet {
        self.phi.mul(self.phi)
    }
}

#[derive(Debug, Clone)]
pub struct WarpedMetric {
    dim: usize,
    a: RadialProfile,
    b: RadialProfile,
    tip_regular: bool,
    fiber_curvature: f64,
    exact_jets: Option<Arc<Vec<MetricJet>>>,
}

impl WarpedMetric {
    pub fn new(dim: usize, a: RadialProfile, b: RadialProfile, tip_regular: bool) -> Result<Self> {
        Self::with_fiber(dim, a, b, tip_regular, 1.0)
    }

    pub fn with_fiber(
        dim: usize,
        a: RadialProfile,
        b: RadialProfile,
        tip_regular: bool,
        fiber_curvature: f64,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Domain(format!("dimension {dim} < 3")));
        }
        if !a.same_grid(&b) {
            return Err(Error::Contract("A and B live on different grids".into()));
        }
        if let Some(k) = a.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("A <= 0 at r = {}", a.grid().r(k))));
        }
        if let Some(k) = b.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("B <= 0 at r = {}", b.grid().r(k))));
        }
        Ok(Self {
            dim,
            a,
            b,
            tip_regular,
            fiber_curvature,
            exact_jets: None,
        })
    }

    /// Euclidean metric `dr^2 + r^2 h` on the grid.
    pub fn euclidean(dim: usize, grid: Arc<RadialGrid>) -> Result<Self> {
        let a = RadialProfile::constant(grid.clone(), 1.0);
        let b = RadialProfile::from_fn(grid.clone(), |r| r * r)?;
        let tip = grid.tip_symmetric();
        Self::new(dim, a, b, tip)
    }

    /// Attach analytically known derivatives; they replace finite differences.
    pub fn with_exact_jets(mut self, jets: Vec<MetricJet>) -> Result<Self> {
        if jets.len() != self.grid().len() {
            return Err(Error::Contract("jet count does not match grid".into()));
        }
        self.exact_jets = Some(Arc::new(jets));
        Ok(self)
    }

    pub(crate) fn has_exact_jets(&self) -> bool {
        self.exact_jets.is_some()
    }

    pub fn without_exact_jets(mut self) -> Self {
        self.exact_jets = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &RadialProfile {
        &self.a
    }

    pub fn b(&self) -> &RadialProfile {
        &self.b
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.a.grid()
    }

    pub fn tip_regular(&self) -> bool {
        self.tip_regular
    }

    pub fn fiber_curvature(&self) -> f64 {
        self.fiber_curvature
    }

    /// Parity used for ghost nodes; only regular tips on symmetric grids use them.
    pub(crate) fn parities(&self) -> (Parity, Parity) {
        if self.tip_regular && self.grid().tip_symmetric() {
            (Parity::Even, Parity::Odd)
        } else {
            (Parity::None, Parity::None)
        }
    }

    pub fn jets(&self) -> Vec<MetricJet> {
        if let Some(j) = &self.exact_jets {
            return j.as_ref().clone();
        }
        let grid = self.grid();
        let (pa, pphi) = self.parities();
        let phi: Vec<f64> = self.b.values().iter().map(|b| b.sqrt()).collect();
        let ja = jets(grid, self.a.values(), pa);
        let jp = jets(grid, &phi, pphi);
        ja.into_iter()
            .zip(jp)
            .map(|(a, phi)| MetricJet { a, phi })
            .collect()
    }

    /// Replace the coefficient profiles, keeping dimension and flags.
    pub fn with_profiles(&self, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let grid = self.grid().clone();
        Self::with_fiber(
            self.dim,
            RadialProfile::new(grid.clone(), a)?,
            RadialProfile::new(grid, b)?,
            self.tip_regular,
            self.fiber_curvature,
        )
    }

    /// Pointwise eigenvalue ratios `g/h` in the radial and sphere directions.
    pub fn eigen_ratios(&self, other: &WarpedMetric) -> Result<Vec<(f64, f64)>> {
        if !same_grid(self.grid(), other.grid()) {
            return Err(Error::Contract("metrics on different grids".into()));
        }
        Ok(self
            .a
            .values()
            .iter()
            .zip(self.b.values())
            .zip(other.a.values().iter().zip(other.b.values()))
            .map(|((a, b), (ha, hb))| (a / ha, b / hb))
            .collect())
    }

    /// Smallest `C >= 1` with `C^-1 h <= g <= C h` at every node.
    pub fn closeness(&self, other: &WarpedMetric) -> Result<f64> {
        Ok(self
            .eigen_ratios(other)?
            .into_iter()
            .map(|(x, y)| x.max(1.0 / x).max(y).max(1.0 / y))
            .fold(1.0, f64::max))
    }
}

/// Conformally flat metric `u^{4/(n-2)} g_e`.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    dim: usize,
    u: RadialProfile,
    exact: Option<Arc<(Vec<f64>, Vec<f64>)>>,
}

impl ConformalMetric {
    pub fn new(dim: usize, u: RadialProfile) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Domain(format!("dimension {dim} < 3")));
        }
        if let Some(k) = u.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "conformal factor not positive at r = {}",
                u.grid().r(k)
            )));
        }
        Ok(Self { dim, u, exact: None })
    }

    /// Attach exact `u'` and `u''` samples.
    pub fn with_derivatives(mut self, du: Vec<f64>, d2u: Vec<f64>) -> Result<Self> {
        let n = self.u.grid().len();
        if du.len() != n || d2u.len() != n {
            return Err(Error::Contract("derivative samples do not match grid".into()));
        }
        self.exact = Some(Arc::new((du, d2u)));
        Ok(self)
    }

    pub fn without_derivatives(mut self) -> Self {
        self.exact = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u(&self) -> &RadialProfile {
        &self.u
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.u.grid()
    }

    /// `a = 4(n-1)/(n-2)`.
    pub fn a_const(&self) -> f64 {
        conformal_a(self.dim)
    }

    /// `p = 2n/(n-2)`.
    pub fn p_const(&self) -> f64 {
        conformal_p(self.dim)
    }

    pub fn u_jets(&self) -> Vec<Jet> {
        match &self.exact {
            Some(ex) => self
                .u
                .values()
                .iter()
                .zip(ex.0.iter().zip(&ex.1))
                .map(|(&v, (&d1, &d2))| Jet::new(v, d1, d2))
                .collect(),
            None => {
                let parity = if self.grid().tip_symmetric() {
                    Parity::Even
                } else {
                    Parity::None
                };
                jets(self.grid(), self.u.values(), parity)
            }
        }
    }

    /// The same metric as `A dr^2 + B h` with `A = u^k`, `B = u^k r^2`.
    pub fn to_warped(&self) -> WarpedMetric {
        let k = 4.0 / (self.dim as f64 - 2.0);
        let grid = self.grid().clone();
        let uj = self.u_jets();
        let mut a = Vec::with_capacity(grid.len());
        let mut b = Vec::with_capacity(grid.len());
        let mut mj = Vec::with_capacity(grid.len());
        for (&r, u) in grid.nodes().iter().zip(&uj) {
            let w = u.powf(k);
            let phi = u.powf(0.5 * k).mul(Jet::new(r, 1.0, 0.0));
            a.push(w.v);
            b.push(phi.v * phi.v);
            mj.push(MetricJet { a: w, phi });
        }
        let tip = grid.tip_symmetric();
        WarpedMetric::new(
            self.dim,
            RadialProfile::new(grid.clone(), a).expect("finite"),
            RadialProfile::new(grid, b).expect("finite"),
            tip,
        )
        .expect("positive conformal factor")
        .with_exact_jets(mj)
        .expect("jet count")
    }
}

pub fn conformal_a(n: usize) -> f64 {
    4.0 * (n as f64 - 1.0) / (n as f64 - 2.0)
}

pub fn conformal_p(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

/// Anything that can be read as a warped metric.
pub trait ToWarped {
    fn to_warped(&self) -> WarpedMetric;
}

impl ToWarped for WarpedMetric {
    fn to_warped(&self) -> WarpedMetric {
        self.clone()
    }
}

impl ToWarped for ConformalMetric {
    fn to_warped(&self) -> WarpedMetric {
        ConformalMetric::to_warped(self)
    }
}

/// SO(n)-invariant symmetric 2-tensor `T_rr dr^2 + T_s h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2Radial {
    pub dim: usize,
    pub rr: RadialProfile,
    pub s: RadialProfile,
}

impl SymTensor2Radial {
    pub fn new(dim: usize, rr: RadialProfile, s: RadialProfile) -> Result<Self> {
        if !rr.same_grid(&s) {
            return Err(Error::Contract("tensor components on different grids".into()));
        }
        Ok(Self { dim, rr, s })
    }

    pub fn zeros(dim: usize, grid: Arc<RadialGrid>) -> Self {
        Self {
            dim,
            rr: RadialProfile::constant(grid.clone(), 0.0),
            s: RadialProfile::constant(grid, 0.0),
        }
    }

    pub fn from_metric(g: &WarpedMetric) -> Self {
        Self {
            dim: g.dim(),
            rr: g.a().clone(),
            s: g.b().clone(),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.rr.grid()
    }

    /// `tr_g T = T_rr/A + (n-1) T_s/B`.
    pub fn trace(&self, g: &WarpedMetric) -> Result<RadialProfile> {
        if !same_grid(self.grid(), g.grid()) {
            return Err(Error::Contract("tensor and metric on different grids".into()));
        }
        let n1 = self.dim as f64 - 1.0;
        let v = (0..self.grid().len())
            .map(|k| {
                self.rr.values()[k] / g.a().values()[k] + n1 * self.s.values()[k] / g.b().values()[k]
            })
            .collect();
        RadialProfile::new(self.grid().clone(), v)
    }

    /// Pointwise `|T|_g`.
    pub fn norm(&self, g: &WarpedMetric) -> Vec<f64> {
        let n1 = self.dim as f64 - 1.0;
        (0..self.grid().len())
            .map(|k| {
                let x = self.rr.values()[k] / g.a().values()[k];
                let y = self.s.values()[k] / g.b().values()[k];
                (x * x + n1 * y * y).sqrt()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.rr.max_abs().max(self.s.max_abs())
    }

    pub(crate) fn jets(&self, tip: bool) -> (Vec<Jet>, Vec<Jet>) {
        let p = if tip && self.grid().tip_symmetric() {
            Parity::Even
        } else {
            Parity::None
        };
        (
            jets(self.grid(), self.rr.values(), p),
            jets(self.grid(), self.s.values(), p),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_constants_match_dimension() {
        assert_eq!(conformal_a(3), 8.0);
        assert_eq!(conformal_p(3), 6.0);
        assert_eq!(conformal_a(4), 6.0);
        assert_eq!(conformal_p(4), 4.0);
    }

    #[test]
    fn rejects_degenerate_coefficients() {
        let g = Arc::new(RadialGrid::uniform(0.5, 2.0, 32).unwrap());
        let a = RadialProfile::constant(g.clone(), 1.0);
        let b = RadialProfile::from_fn(g.clone(), |r| r - 1.0).unwrap();
        assert!(matches!(WarpedMetric::new(3, a.clone(), b, false), Err(Error::Domain(_))));
        let u = RadialProfile::from_fn(g, |r| 1.0 - r).unwrap();
        assert!(ConformalMetric::new(3, u).is_err());
        let _ = a;
    }

    #[test]
    fn conformal_to_warped_jets_match_finite_differences() {
        let g = Arc::new(RadialGrid::uniform(1.0, 3.0, 400).unwrap());
        let u = RadialProfile::from_fn(g.clone(), |r| 1.0 + 0.5 / r).unwrap();
        let du = g.nodes().iter().map(|r| -0.5 / (r * r)).collect();
        let d2u = g.nodes().iter().map(|r| 1.0 / (r * r * r)).collect();
        let c = ConformalMetric::new(3, u).unwrap().with_derivatives(du, d2u).unwrap();
        let w = c.to_warped();
        let exact = w.jets();
        let fd = w.clone().without_exact_jets().jets();
        for k in 5..395 {
            let r = g.r(k);
            let uu = 1.0 + 0.5 / r;
            let a1 = 4.0 * uu.powi(3) * (-0.5 / (r * r));
            assert!((exact[k].a.d1 - a1).abs() < 1e-12);
            assert!((exact[k].phi.d2 - fd[k].phi.d2).abs() < 1e-7);
            assert!((exact[k].a.d1 - fd[k].a.d1).abs() < 1e-7);
        }
    }
}
