//! Variable-radius mollification near a singular set and corner smoothing.
//!
//! For a radial function `f` the mollified value at `|x| = r` is
//! `v(r) = int f(|x - s y|) phi(y) dy` over the unit ball, `s = lambda rho(r)`.
//! With `x = r e_1` and `y = (t, y')`, `|x - s y|^2 = (r - s t)^2 + s^2 |y'|^2`,
//! so the `n`-dimensional integral reduces to one over `(t, |y'|)`.
//! Invariant 2-tensors are written in Cartesian form `a delta + b xhat xhat`
//! and mollified componentwise.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::constructions::{smooth_step_down, smooth_step_down_d1, CornerMetric};
use crate::curvature::point_curvature;
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfile, SingularSet};
use crate::measure::sphere_area;
use crate::metric::{ConformalMetric, MetricJet, SymTensor2Radial, WarpedMetric};
use crate::stencil::{derivatives, gauss_legendre, integrate_fn, Interpolator, Jet, Parity};

const GL_POINTS: usize = 33;

/// Unnormalized bump `exp(-1/(1 - |y|^2))`.
pub fn bump(rho: f64) -> f64 {
    if rho < 1.0 {
        (-1.0 / (1.0 - rho * rho)).exp()
    } else {
        0.0
    }
}

/// Quadrature rule for averages against the normalized bump on the unit
/// ball of `R^n`, in the reduced variables `(t, w = |y'|)`.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub dim: usize,
    /// `(t, w, weight)` with weights summing to one.
    pub nodes: Vec<(f64, f64, f64)>,
    /// Normalization constant `1 / int bump dy` from an independent rule.
    pub normalization: f64,
}

impl Kernel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("kernel dimension {dim} < 2")));
        }
        let (x, w) = gauss_legendre(GL_POINTS);
        let sphere = sphere_area(dim - 2);
        let mut nodes = Vec::with_capacity(GL_POINTS * GL_POINTS);
        for (ti, wi) in x.iter().zip(&w) {
            let top = (1.0 - ti * ti).sqrt();
            for (xj, wj) in x.iter().zip(&w) {
                let om = 0.5 * top * (xj + 1.0);
                let weight = wi * wj * 0.5 * top * sphere * om.powi(dim as i32 - 2) * bump((ti * ti + om * om).sqrt());
                nodes.push((*ti, om, weight));
            }
        }
        let total: f64 = nodes.iter().map(|n| n.2).sum();
        for n in nodes.iter_mut() {
            n.2 /= total;
        }
        let radial = integrate_fn(|r| bump(r) * r.powi(dim as i32 - 1), 0.0, 1.0, 64, 16);
        let normalization = 1.0 / (sphere_area(dim - 1) * radial);
        Ok(Self { dim, nodes, normalization })
    }

    /// `int phi(y) dy` of the normalized kernel by the reduced rule.
    pub fn integral(&self) -> f64 {
        self.nodes.iter().map(|n| n.2).sum()
    }

    /// The same integral with the normalization constant and an independent
    /// radial rule; equals one when both rules are converged.
    pub fn independent_integral(&self) -> f64 {
        let (x, w) = gauss_legendre(GL_POINTS);
        let sphere = sphere_area(self.dim - 2);
        let mut acc = 0.0;
        for (ti, wi) in x.iter().zip(&w) {
            let top = (1.0 - ti * ti).sqrt();
            for (xj, wj) in x.iter().zip(&w) {
                let om = 0.5 * top * (xj + 1.0);
                acc += wi * wj * 0.5 * top * sphere * om.powi(self.dim as i32 - 2) * bump((ti * ti + om * om).sqrt());
            }
        }
        acc * self.normalization
    }

    /// Mollifier average of a radial function at `|x| = r` with radius `s`.
    pub fn average(&self, r: f64, s: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(t, w, wt)| {
                let z = ((r - s * t).powi(2) + (s * w).powi(2)).sqrt();
                wt * f(z)
            })
            .sum()
    }

    /// Mollifier average of the invariant tensor `(T_rr, T_s)`; returns the
    /// mollified `(T_rr, T_s)` at radius `r`.
    pub fn average_tensor(&self, r: f64, s: f64, trr: impl Fn(f64) -> f64, ts: impl Fn(f64) -> f64) -> (f64, f64) {
        let nf = self.dim as f64;
        let (mut par, mut tr) = (0.0, 0.0);
        for &(t, w, wt) in &self.nodes {
            let x1 = r - s * t;
            let z2 = x1 * x1 + (s * w).powi(2);
            let z = z2.sqrt();
            let a = ts(z) / z2;
            let b = trr(z) - a;
            par += wt * (a + b * x1 * x1 / z2);
            tr += wt * (nf * a + b);
        }
        let av = (tr - par) / (nf - 1.0);
        (par, av * r * r)
    }
}

fn sup_step_slope() -> f64 {
    static SUP: OnceLock<f64> = OnceLock::new();
    *SUP.get_or_init(|| {
        (1..20000)
            .map(|k| smooth_step_down_d1(k as f64 / 20000.0).abs())
            .fold(0.0, f64::max)
    })
}

/// The cutoff `rho` with `rho = eps` on `Sigma(eps)` and `rho = 0` outside
/// `Sigma(2 eps)`.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub eps: f64,
    pub sigma: SingularSet,
    pub profile: RadialProfile,
    /// Measured `sup |rho'|` on the grid.
    pub c1: f64,
    /// Measured `eps * sup |rho''|` on the grid.
    pub c2: f64,
}

impl Cutoff {
    pub fn rho(&self, r: f64) -> f64 {
        cutoff_value(self.eps, &self.sigma, r)
    }
}

fn cutoff_value(eps: f64, sigma: &SingularSet, r: f64) -> f64 {
    let d = sigma.distance(r.abs());
    if d <= eps {
        eps
    } else if d >= 2.0 * eps {
        0.0
    } else {
        eps * smooth_step_down((d - eps) / eps)
    }
}

pub fn make_cutoff(eps: f64, sigma: SingularSet, grid: &Arc<RadialGrid>) -> Result<Cutoff> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("cutoff scale {eps} must be positive")));
    }
    let reach = sigma.neighbourhood(2.0 * eps);
    if reach.b > grid.r_max() {
        return Err(Error::Domain(format!(
            "Sigma(2 eps) reaches r = {} beyond the grid end {}",
            reach.b,
            grid.r_max()
        )));
    }
    let profile = RadialProfile::from_fn(grid.clone(), |r| cutoff_value(eps, &sigma, r))?;
    let parity = if grid.tip_symmetric() { Parity::Even } else { Parity::None };
    let (d1, d2) = derivatives(grid, profile.values(), parity);
    let c1 = d1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c2 = eps * d2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Cutoff { eps, sigma, profile, c1, c2 })
}

/// Parameters of the variable-radius mollifier.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    pub eps: f64,
    pub lambda: f64,
    pub sigma: SingularSet,
    pub kernel: Arc<Kernel>,
}

/// Serializable description of a mollifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierParams {
    pub eps: f64,
    pub lambda: f64,
    pub sigma: SingularSet,
}

impl MollifierSpec {
    /// Default radius multiplier `lambda = 0.25 / sup |rho'|`.
    pub fn new(dim: usize, eps: f64, sigma: SingularSet) -> Result<Self> {
        Self::with_lambda(dim, eps, sigma, 0.25 / sup_step_slope())
    }

    pub fn with_lambda(dim: usize, eps: f64, sigma: SingularSet, lambda: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps = {eps} must be positive")));
        }
        if !(lambda > 0.0) || lambda * sup_step_slope() >= 0.5 {
            return Err(Error::Precondition(format!(
                "lambda sup|rho'| = {:.3} must lie in (0, 1/2) for x -> x - lambda rho(x) y to be a diffeomorphism",
                lambda * sup_step_slope()
            )));
        }
        Ok(Self {
            eps,
            lambda,
            sigma,
            kernel: Arc::new(Kernel::new(dim)?),
        })
    }

    pub fn params(&self) -> MollifierParams {
        MollifierParams {
            eps: self.eps,
            lambda: self.lambda,
            sigma: self.sigma,
        }
    }

    /// Kernel radius `lambda rho(r)` at radius `r`.
    pub fn radius(&self, r: f64) -> f64 {
        self.lambda * cutoff_value(self.eps, &self.sigma, r)
    }

    fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        if self.sigma.neighbourhood(2.0 * self.eps).b > grid.r_max() {
            return Err(Error::Domain("Sigma(2 eps) extends beyond the grid".into()));
        }
        Ok(())
    }
}

/// Mollify a radial function given in closed form, sampling the output on `grid`.
pub fn mollify_fn(f: impl Fn(f64) -> f64, grid: &Arc<RadialGrid>, spec: &MollifierSpec) -> Result<RadialProfile> {
    spec.check_grid(grid)?;
    let v = grid
        .nodes()
        .iter()
        .map(|&r| {
            let s = spec.radius(r);
            if s == 0.0 {
                f(r)
            } else {
                spec.kernel.average(r, s, &f)
            }
        })
        .collect();
    RadialProfile::new(grid.clone(), v)
}

/// Mollify an invariant tensor given in closed form.
pub fn mollify_tensor_fn(
    dim: usize,
    trr: impl Fn(f64) -> f64,
    ts: impl Fn(f64) -> f64,
    grid: &Arc<RadialGrid>,
    spec: &MollifierSpec,
) -> Result<SymTensor2Radial> {
    spec.check_grid(grid)?;
    if spec.kernel.dim != dim {
        return Err(Error::Contract("kernel dimension differs from tensor dimension".into()));
    }
    let (rr, s): (Vec<f64>, Vec<f64>) = grid
        .nodes()
        .iter()
        .map(|&r| {
            let rad = spec.radius(r);
            if rad == 0.0 {
                (trr(r), ts(r))
            } else {
                spec.kernel.average_tensor(r, rad, &trr, &ts)
            }
        })
        .unzip();
    SymTensor2Radial::new(dim, RadialProfile::new(grid.clone(), rr)?, RadialProfile::new(grid.clone(), s)?)
}

/// Sampled-profile inputs: a radial profile or an invariant tensor.
pub enum Mollifiable<'a> {
    Profile(&'a RadialProfile),
    Tensor(&'a SymTensor2Radial),
}

/// Mollified output matching [`Mollifiable`].
#[derive(Debug, Clone)]
pub enum Mollified {
    Profile(RadialProfile),
    Tensor(SymTensor2Radial),
}

/// Mollify sampled data, interpolating between nodes.
pub fn mollify_variable(f: Mollifiable<'_>, spec: &MollifierSpec) -> Result<Mollified> {
    match f {
        Mollifiable::Profile(p) => {
            let grid = p.grid().clone();
            let interp = Interpolator::new(&grid, p.values(), Parity::Even);
            Ok(Mollified::Profile(mollify_fn(|r| interp.eval(r), &grid, spec)?))
        }
        Mollifiable::Tensor(t) => {
            let grid = t.grid().clone();
            let ir = Interpolator::new(&grid, t.rr.values(), Parity::Even);
            let is = Interpolator::new(&grid, t.s.values(), Parity::Even);
            Ok(Mollified::Tensor(mollify_tensor_fn(
                t.dim,
                |r| ir.eval(r),
                |r| is.eval(r),
                &grid,
                spec,
            )?))
        }
    }
}

fn tip_after(spec: &MollifierSpec, grid: &RadialGrid, before: bool) -> bool {
    if spec.sigma.lo == 0.0 && grid.tip_symmetric() {
        true
    } else {
        before
    }
}

fn into_metric(t: SymTensor2Radial, tip: bool) -> Result<WarpedMetric> {
    WarpedMetric::new(t.dim, t.rr, t.s, tip).map_err(|e| Error::Construction(format!("mollified metric degenerate: {e}")))
}

/// Mollify a warped metric given in closed form; the output lives on `grid`.
pub fn mollify_warped_fn(
    dim: usize,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    grid: &Arc<RadialGrid>,
    spec: &MollifierSpec,
    tip_regular: bool,
) -> Result<WarpedMetric> {
    let t = mollify_tensor_fn(dim, a, b, grid, spec)?;
    into_metric(t, tip_after(spec, grid, tip_regular))
}

/// Mollify a sampled warped metric on its own grid.
pub fn mollify_metric(g: &WarpedMetric, spec: &MollifierSpec) -> Result<WarpedMetric> {
    let t = SymTensor2Radial::from_metric(g);
    match mollify_variable(Mollifiable::Tensor(&t), spec)? {
        Mollified::Tensor(t) => into_metric(t, tip_after(spec, g.grid(), g.tip_regular())),
        Mollified::Profile(_) => unreachable!(),
    }
}

/// Mollify a conformal factor given in closed form.
pub fn mollify_conformal_fn(
    dim: usize,
    u: impl Fn(f64) -> f64,
    grid: &Arc<RadialGrid>,
    spec: &MollifierSpec,
) -> Result<ConformalMetric> {
    let v = mollify_fn(u, grid, spec)?;
    ConformalMetric::new(dim, v).map_err(|e| Error::Construction(format!("mollified factor degenerate: {e}")))
}

/// Mollify a sampled conformal metric through its factor.
pub fn mollify_conformal(g: &ConformalMetric, spec: &MollifierSpec) -> Result<ConformalMetric> {
    match mollify_variable(Mollifiable::Profile(g.u()), spec)? {
        Mollified::Profile(v) => ConformalMetric::new(g.dim(), v).map_err(|e| Error::Construction(e.to_string())),
        Mollified::Tensor(_) => unreachable!(),
    }
}

/// Normalized one-dimensional bump on `[-1, 1]` and its primitives.
struct Bump1d {
    z: f64,
}

impl Bump1d {
    fn get() -> &'static Bump1d {
        static B: OnceLock<Bump1d> = OnceLock::new();
        B.get_or_init(|| Bump1d {
            z: integrate_fn(bump, -1.0, 1.0, 64, 16),
        })
    }

    fn k(&self, x: f64) -> f64 {
        bump(x.abs()) / self.z
    }

    /// `H(x) = int_{-1}^x k`.
    fn step(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            integrate_fn(|s| self.k(s), -1.0, x, 8, 16)
        }
    }

    /// `int_{-1}^x H = int_{-1}^x (x - s) k(s) ds`.
    fn ramp(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            x
        } else {
            integrate_fn(|s| (x - s) * self.k(s), -1.0, x, 8, 16)
        }
    }
}

/// A corner metric whose profile slope `phi'` has been mollified over a
/// window of half-width `eps^2 / 100` around the corner.
#[derive(Debug, Clone)]
pub struct SmoothedCorner {
    pub corner: CornerMetric,
    pub eps: f64,
    pub half_width: f64,
}

impl SmoothedCorner {
    pub fn phi_jet(&self, t: f64) -> Jet {
        let c = &self.corner;
        let w = self.half_width;
        let x = (t - c.r0) / w;
        if x <= -1.0 || x >= 1.0 {
            return c.phi_jet(t);
        }
        let jump = c.slope_jump();
        let b = Bump1d::get();
        Jet::new(
            t - jump * w * b.ramp(x),
            1.0 - jump * b.step(x),
            -jump * b.k(x) / w,
        )
    }

    pub fn metric_jet(&self, t: f64) -> MetricJet {
        MetricJet {
            a: Jet::constant(1.0),
            phi: self.phi_jet(t),
        }
    }

    pub fn scalar(&self, t: f64) -> f64 {
        point_curvature(self.corner.dim, 1.0, &self.metric_jet(t)).scalar
    }

    /// `int f(S) dv` over the shell `[lo, hi]`.
    pub fn integrate_scalar(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.corner.dim;
        let area = sphere_area(n - 1);
        let w = self.half_width;
        let r0 = self.corner.r0;
        let piece = |a: f64, b: f64, panels: usize| {
            if b > a {
                integrate_fn(
                    |t| {
                        let phi = self.phi_jet(t).v;
                        f(self.scalar(t)) * area * phi.powi(n as i32 - 1)
                    },
                    a,
                    b,
                    panels,
                    16,
                )
            } else {
                0.0
            }
        };
        let (wl, wr) = ((r0 - w).max(lo), (r0 + w).min(hi));
        piece(lo, wl.min(hi), 64) + piece(wl, wr, 256) + piece(wr.max(lo), hi, 64)
    }

    /// `int S^+ dv` and `int S^- dv` over the smoothing window.
    pub fn window_integrals(&self) -> (f64, f64) {
        let (lo, hi) = (self.corner.r0 - self.half_width, self.corner.r0 + self.half_width);
        (
            self.integrate_scalar(lo, hi, |s| s.max(0.0)),
            self.integrate_scalar(lo, hi, |s| (-s).max(0.0)),
        )
    }

    /// `int (S - sigma)^- dv` over `[lo, hi]`.
    pub fn negative_part(&self, sigma: f64, lo: f64, hi: f64) -> f64 {
        self.integrate_scalar(lo, hi, |s| (sigma - s).max(0.0))
    }

    /// Measured constants of the curvature structure: `sup |S|` on the
    /// collar outside the window, and `eps^2 max(-min S, 0)` inside it.
    pub fn clause_constants(&self) -> (f64, f64) {
        let c = self.corner.r0;
        let (w, e) = (self.half_width, self.eps);
        let sample = |a: f64, b: f64| (0..=400).map(move |k| a + (b - a) * k as f64 / 400.0);
        let outside = sample(c - e, c - w)
            .chain(sample(c + w, c + e))
            .map(|t| self.scalar(t).abs())
            .fold(0.0, f64::max);
        let inside = sample(c - w, c + w).map(|t| self.scalar(t)).fold(f64::MAX, f64::min);
        (outside, e * e * (-inside).max(0.0))
    }

    /// Sample on a grid starting at the axis.
    pub fn metric(&self, grid: Arc<RadialGrid>) -> Result<WarpedMetric> {
        let jets: Vec<MetricJet> = grid.nodes().iter().map(|&t| self.metric_jet(t)).collect();
        let b = jets.iter().map(|j| j.phi.v * j.phi.v).collect();
        let tip = grid.tip_symmetric();
        WarpedMetric::new(self.corner.dim, RadialProfile::constant(grid.clone(), 1.0), RadialProfile::new(grid, b)?, tip)?
            .with_exact_jets(jets)
    }
}

pub fn smooth_corner(cm: &CornerMetric, eps: f64) -> Result<SmoothedCorner> {
    if !(eps > 0.0) || eps >= cm.r0 {
        return Err(Error::Domain(format!(
            "eps = {eps} must lie in (0, {}) so the window stays off the axis",
            cm.r0
        )));
    }
    Ok(SmoothedCorner {
        corner: cm.clone(),
        eps,
        half_width: eps * eps / 100.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{make_cone, make_cone_ball_gluing, ConeSpec};
    use crate::curvature::scalar_curvature_warped;

    #[test]
    fn kernel_is_normalized() {
        for n in [3, 4, 6] {
            let k = Kernel::new(n).unwrap();
            assert!((k.integral() - 1.0).abs() < 1e-13);
            assert!((k.independent_integral() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn averages_reproduce_linear_functions_of_position() {
        // the kernel is even, so the average of |x - s y|^2 is r^2 + s^2 <|y|^2>
        let k = Kernel::new(3).unwrap();
        let m2 = k.average(0.0, 1.0, |z| z * z);
        let v = k.average(2.0, 0.3, |z| z * z);
        assert!((v - (4.0 + 0.09 * m2)).abs() < 1e-12);
    }

    #[test]
    fn cutoff_clauses() {
        let grid = Arc::new(RadialGrid::cell_centered(1.0, 2000).unwrap());
        let mut c2s = vec![];
        for eps in [0.1, 0.05, 0.025] {
            let c = make_cutoff(eps, SingularSet::axis(), &grid).unwrap();
            for (&r, &v) in grid.nodes().iter().zip(c.profile.values()) {
                if r <= eps {
                    assert_eq!(v, eps);
                }
                if r >= 2.0 * eps {
                    assert_eq!(v, 0.0);
                }
                assert!((0.0..=eps).contains(&v));
            }
            c2s.push(c.c2);
        }
        let (lo, hi) = c2s.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 2.0);
        assert!(make_cutoff(0.6, SingularSet::axis(), &grid).is_err());
    }

    #[test]
    fn lambda_condition_enforced() {
        assert!(MollifierSpec::with_lambda(3, 0.1, SingularSet::axis(), 10.0).is_err());
        assert!(MollifierSpec::new(3, 0.1, SingularSet::axis()).is_ok());
    }

    #[test]
    fn identity_away_from_sigma() {
        let grid = Arc::new(RadialGrid::cell_centered(2.0, 200).unwrap());
        let spec = MollifierSpec::new(3, 0.1, SingularSet::sphere(1.0)).unwrap();
        let f = |r: f64| (r - 1.0).abs() + r * r;
        let v = mollify_fn(f, &grid, &spec).unwrap();
        for (&r, &x) in grid.nodes().iter().zip(v.values()) {
            if (r - 1.0).abs() >= 0.2 {
                assert_eq!(x, f(r));
            }
        }
    }

    #[test]
    fn mollified_cone_is_regular_at_tip() {
        let grid = Arc::new(RadialGrid::cell_centered(1.0, 400).unwrap());
        let spec = MollifierSpec::new(3, 0.1, SingularSet::axis()).unwrap();
        let g = mollify_warped_fn(3, |_| 1.0, |r| 0.25 * r * r, &grid, &spec, false).unwrap();
        assert!(g.tip_regular());
        // at the axis A - B / r^2 vanishes to second order
        let defect = |k: usize| g.a().values()[k] - g.b().values()[k] / grid.r(k).powi(2);
        let ratio = defect(1) / defect(0);
        assert!((ratio - 9.0).abs() < 0.5, "{ratio}");
        let cone = make_cone(&ConeSpec::new(3, 0.5, 1.0).unwrap(), grid.clone()).unwrap();
        for k in 0..grid.len() {
            if grid.r(k) >= 0.2 {
                assert_eq!(g.a().values()[k], 1.0);
                assert_eq!(g.b().values()[k], cone.b().values()[k]);
            }
        }
        let s = scalar_curvature_warped(&g).unwrap();
        assert!(s.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn smoothed_corner_matches_pieces_outside_window() {
        let cm = make_cone_ball_gluing(3, 0.5, 1.0, 1.0, 64, false).unwrap();
        let sc = smooth_corner(&cm, 0.1).unwrap();
        for t in [0.1, 0.3, 0.49, 0.52, 1.2] {
            let (a, b) = (sc.phi_jet(t), cm.phi_jet(t));
            assert!((a.v - b.v).abs() < 1e-13 && (a.d1 - b.d1).abs() < 1e-13);
        }
        // jets are consistent inside the window
        let t = cm.r0 + 0.3 * sc.half_width;
        let h = 1e-7;
        let fd = (sc.phi_jet(t + h).v - sc.phi_jet(t - h).v) / (2.0 * h);
        assert!((fd - sc.phi_jet(t).d1).abs() < 1e-6);
    }

    #[test]
    fn corner_window_carries_twice_the_mean_curvature_jump() {
        let cm = make_cone_ball_gluing(3, 0.5, 1.0, 1.0, 64, false).unwrap();
        let area = 4.0 * std::f64::consts::PI * cm.r0 * cm.r0;
        let jump = cm.h_minus - cm.h_plus;
        for eps in [0.2, 0.1, 0.05] {
            let (p, m) = smooth_corner(&cm, eps).unwrap().window_integrals();
            assert_eq!(m, 0.0);
            assert!((p / (2.0 * jump * area) - 1.0).abs() < 1e-3);
        }
        let flat = make_cone_ball_gluing(3, 1.0, 1.0, 1.0, 64, false).unwrap();
        let sc = smooth_corner(&flat, 0.1).unwrap();
        assert!(sc.window_integrals().0.abs() < 1e-12);
        assert!(smooth_corner(&cm, 0.6).is_err());
    }
}
