//! Explicit singular metrics: cones, the positive-mass cone, the zero area
//! singularity, a Schwarzschild neck glued to flat space, and cone-ball
//! gluings with a corner.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfile};
use crate::metric::{ConformalMetric, MetricJet, WarpedMetric};
use crate::stencil::{integrate_fn, Jet};

/// `e^{-1/s}` for `s > 0`, zero otherwise.
pub fn flat_exp(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step equal to 1 for `s <= 0` and 0 for `s >= 1`.
pub fn smooth_step_down(s: f64) -> f64 {
    let (f, g) = (flat_exp(1.0 - s), flat_exp(s));
    f / (f + g)
}

/// Derivative of [`smooth_step_down`] with respect to `s`.
pub fn smooth_step_down_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let (f, g) = (flat_exp(1.0 - s), flat_exp(s));
    let df = -f / ((1.0 - s) * (1.0 - s));
    let dg = g / (s * s);
    (df * g - f * dg) / ((f + g) * (f + g))
}

/// `phi = alpha r^beta` with `A = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl ConeSpec {
    pub fn new(dim: usize, alpha: f64, beta: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Domain(format!("dimension {dim} < 3")));
        }
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Domain(format!("cone needs alpha, beta > 0 (got {alpha}, {beta})")));
        }
        Ok(Self { dim, alpha, beta })
    }

    pub fn phi_jet(&self, r: f64) -> Jet {
        let (a, b) = (self.alpha, self.beta);
        Jet::new(a * r.powf(b), a * b * r.powf(b - 1.0), a * b * (b - 1.0) * r.powf(b - 2.0))
    }
}

pub fn make_cone(spec: &ConeSpec, grid: Arc<RadialGrid>) -> Result<WarpedMetric> {
    let spec = ConeSpec::new(spec.dim, spec.alpha, spec.beta)?;
    let jets: Vec<MetricJet> = grid
        .nodes()
        .iter()
        .map(|&r| MetricJet {
            a: Jet::constant(1.0),
            phi: spec.phi_jet(r),
        })
        .collect();
    let b = jets.iter().map(|j| j.phi.v * j.phi.v).collect();
    let tip = spec.alpha == 1.0 && spec.beta == 1.0 && grid.tip_symmetric();
    WarpedMetric::new(
        spec.dim,
        RadialProfile::constant(grid.clone(), 1.0),
        RadialProfile::new(grid, b)?,
        tip,
    )?
    .with_exact_jets(jets)
}

/// The three-dimensional conformally flat metric with a cone point, zero
/// scalar curvature outside `r = 2` and positive mass.
#[derive(Debug, Clone)]
pub struct PositiveMassCone {
    pub eps: f64,
    /// `-int_0^inf s^2 eta ds`.
    pub a: f64,
    /// `-int_1^2 s^{-2} int_0^s t^2 eta dt ds`.
    pub b: f64,
    pub metric: ConformalMetric,
}

const QUAD_PANELS: usize = 8;
const QUAD_ORDER: usize = 16;

impl PositiveMassCone {
    /// The source `eta = lap_0 u`, negative on `(0, 2)` and zero beyond.
    pub fn eta(&self, r: f64) -> f64 {
        pm_eta(self.eps, r)
    }

    /// `I(s) = int_0^s t^2 eta dt`.
    pub fn inner_integral(&self, s: f64) -> f64 {
        pm_inner(self.eps, s)
    }

    /// `phi(r) = int_1^r I(s)/s^2 ds`.
    pub fn phi(&self, r: f64) -> f64 {
        if r <= 1.0 {
            r.powf(-self.eps) - 1.0
        } else if r >= 2.0 {
            -self.b - 0.5 * self.a + self.a / r
        } else {
            pm_phi_bridge(self.eps, r)
        }
    }

    /// Conformal factor with exact first and second derivatives.
    pub fn u_jet(&self, r: f64) -> Jet {
        let c = self.b + 0.5 * self.a;
        if r <= 1.0 {
            let e = self.eps;
            Jet::new(r.powf(-e) + c, -e * r.powf(-e - 1.0), e * (e + 1.0) * r.powf(-e - 2.0))
        } else if r >= 2.0 {
            let a = self.a;
            Jet::new(1.0 + a / r, -a / (r * r), 2.0 * a / (r * r * r))
        } else {
            let i = self.inner_integral(r);
            Jet::new(self.phi(r) + c + 1.0, i / (r * r), self.eta(r) - 2.0 * i / (r * r * r))
        }
    }

    /// `rho(r) = int_0^r u^2`, in closed form on `(0, 1]`.
    pub fn arclength_near_tip(&self, r: f64) -> f64 {
        let (e, c) = (self.eps, self.b + 0.5 * self.a);
        r.powf(1.0 - 2.0 * e) / (1.0 - 2.0 * e) + 2.0 * c * r.powf(1.0 - e) / (1.0 - e) + c * c * r
    }

    /// Slope of `sqrt(sphere coefficient) = u^2 r` against arclength `rho`
    /// on the radii `r in [1e-16, 1e-12]`; tends to the cone angle `1 - 2 eps`.
    pub fn cone_angle_fit(&self) -> f64 {
        let pts: Vec<(f64, f64)> = (0..=40)
            .map(|k| {
                let r = 10f64.powf(-16.0 + 0.1 * k as f64);
                let u = self.u_jet(r).v;
                (self.arclength_near_tip(r), u * u * r)
            })
            .collect();
        crate::fit::linear_fit(&pts).slope
    }
}

fn pm_eta(eps: f64, r: f64) -> f64 {
    let base = -eps * (1.0 - eps) * r.powf(-eps - 2.0);
    if r <= 1.0 {
        base
    } else if r < 2.0 {
        base * smooth_step_down(r - 1.0)
    } else {
        0.0
    }
}

fn pm_inner(eps: f64, s: f64) -> f64 {
    if s <= 1.0 {
        return -eps * s.powf(1.0 - eps);
    }
    let top = s.min(2.0);
    -eps + integrate_fn(|t| t * t * pm_eta(eps, t), 1.0, top, QUAD_PANELS, QUAD_ORDER)
}

fn pm_phi_bridge(eps: f64, r: f64) -> f64 {
    integrate_fn(|s| pm_inner(eps, s) / (s * s), 1.0, r, QUAD_PANELS, QUAD_ORDER)
}

/// Builds the positive-mass cone metric on `grid` (which must avoid `r = 0`).
pub fn make_positive_mass_cone(eps: f64, grid: Arc<RadialGrid>) -> Result<PositiveMassCone> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 1/2)")));
    }
    if grid.lower() <= 0.0 {
        return Err(Error::Domain("the cone point r = 0 cannot be a grid node".into()));
    }
    let a = -pm_inner(eps, 2.0);
    let b = -pm_phi_bridge(eps, 2.0);
    // the same constants with a coarser rule must agree
    let a_check = eps - integrate_fn(|t| t * t * pm_eta(eps, t), 1.0, 2.0, 4, 12);
    if (a - a_check).abs() > 1e-10 * a.abs() {
        return Err(Error::Resolution(format!(
            "bridge quadrature not converged ({a} vs {a_check})"
        )));
    }
    if !(a > eps && b > 0.0) {
        return Err(Error::Construction(format!("unexpected constants a = {a}, b = {b}")));
    }
    let mut cone = PositiveMassCone {
        eps,
        a,
        b,
        metric: ConformalMetric::new(3, RadialProfile::constant(grid.clone(), 1.0))?,
    };
    let jets: Vec<Jet> = grid.nodes().iter().map(|&r| cone.u_jet(r)).collect();
    if let Some(k) = jets.iter().position(|j| !(j.v > 0.0)) {
        return Err(Error::Construction(format!("u <= 0 at r = {}", grid.r(k))));
    }
    let u = RadialProfile::new(grid, jets.iter().map(|j| j.v).collect())?;
    cone.metric = ConformalMetric::new(3, u)?
        .with_derivatives(jets.iter().map(|j| j.d1).collect(), jets.iter().map(|j| j.d2).collect())?;
    Ok(cone)
}

/// `u = 1 - 2m/r` on `r > 2m`.
#[derive(Debug, Clone)]
pub struct ZeroAreaSingularity {
    pub m: f64,
    pub metric: ConformalMetric,
}

impl ZeroAreaSingularity {
    pub fn u_jet(&self, r: f64) -> Jet {
        let m = self.m;
        Jet::new(1.0 - 2.0 * m / r, 2.0 * m / (r * r), -4.0 * m / (r * r * r))
    }

    /// Arclength from the singular sphere, `rho(t) = int_0^t s^2/(s+2m)^2 ds`
    /// with `t = r - 2m`.
    pub fn rho(&self, t: f64) -> f64 {
        let m2 = 2.0 * self.m;
        integrate_fn(|s| s * s / ((s + m2) * (s + m2)), 0.0, t, 4, 16)
    }

    /// Log-log slope of the sphere coefficient `u^4 r^2` against `rho` as
    /// `rho -> 0`.
    pub fn exponent_fit(&self) -> f64 {
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|k| {
                let t = self.m * 10f64.powf(-5.0 + 0.1 * k as f64);
                let u = self.u_jet(2.0 * self.m + t).v;
                let r = 2.0 * self.m + t;
                (self.rho(t).ln(), (u.powi(4) * r * r).ln())
            })
            .collect();
        crate::fit::linear_fit(&pts).slope
    }
}

pub fn make_zero_area_singularity(m: f64, grid: Arc<RadialGrid>) -> Result<ZeroAreaSingularity> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("mass parameter {m} must be positive")));
    }
    if grid.lower() <= 2.0 * m {
        return Err(Error::Domain(format!(
            "domain must lie in r > 2m = {}, grid starts at {}",
            2.0 * m,
            grid.lower()
        )));
    }
    let z = ZeroAreaSingularity {
        m,
        metric: ConformalMetric::new(3, RadialProfile::constant(grid.clone(), 1.0))?,
    };
    let jets: Vec<Jet> = grid.nodes().iter().map(|&r| z.u_jet(r)).collect();
    let u = RadialProfile::new(grid, jets.iter().map(|j| j.v).collect())?;
    let metric = ConformalMetric::new(3, u)?
        .with_derivatives(jets.iter().map(|j| j.d1).collect(), jets.iter().map(|j| j.d2).collect())?;
    Ok(ZeroAreaSingularity { m, metric })
}

/// Schwarzschild-type neck on `(2m, r0]` joined to flat space beyond `r1`.
#[derive(Debug, Clone)]
pub struct GluedSchwarzschild {
    pub m: f64,
    pub r0: f64,
    pub r1: f64,
    /// `y(inf) = int_{2m}^inf eta/r^2`.
    pub y_inf: f64,
    /// The unnormalized `y` on the grid.
    pub y: RadialProfile,
    pub metric: ConformalMetric,
}

impl GluedSchwarzschild {
    /// Nonincreasing `eta`: `2m` on `[2m, r0]`, zero beyond `r1`.
    pub fn eta_jet(&self, r: f64) -> Jet {
        let w = self.r1 - self.r0;
        let s = (r - self.r0) / w;
        let two_m = 2.0 * self.m;
        Jet::new(two_m * smooth_step_down(s), two_m * smooth_step_down_d1(s) / w, 0.0)
    }

    /// `y(r) = int_{2m}^r eta/t^2 dt` with derivatives.
    pub fn y_jet(&self, r: f64) -> Jet {
        let e = self.eta_jet(r);
        let v = gs_y(self.m, self.r0, self.r1, r);
        Jet::new(v, e.v / (r * r), e.d1 / (r * r) - 2.0 * e.v / (r * r * r))
    }

    /// `lap_0 y = y'' + 2y'/r = eta'/r^2` at each node, from exact derivatives.
    pub fn flat_laplacian_y(&self) -> Vec<f64> {
        self.y
            .grid()
            .nodes()
            .iter()
            .map(|&r| {
                let j = self.y_jet(r);
                j.d2 + 2.0 * j.d1 / r
            })
            .collect()
    }
}

fn gs_y(m: f64, r0: f64, r1: f64, r: f64) -> f64 {
    let two_m = 2.0 * m;
    if r <= r0 {
        return 1.0 - two_m / r;
    }
    let w = r1 - r0;
    let top = r.min(r1);
    1.0 - two_m / r0
        + integrate_fn(|t| two_m * smooth_step_down((t - r0) / w) / (t * t), r0, top, QUAD_PANELS, QUAD_ORDER)
}

pub fn make_glued_schwarzschild(m: f64, r0: f64, r1: f64, grid: Arc<RadialGrid>) -> Result<GluedSchwarzschild> {
    if !(m > 0.0 && r0 > 2.0 * m && r1 > r0) {
        return Err(Error::Construction(format!(
            "need r1 > r0 > 2m (got m = {m}, r0 = {r0}, r1 = {r1})"
        )));
    }
    if grid.lower() <= 2.0 * m {
        return Err(Error::Domain(format!("grid must lie in r > 2m = {}", 2.0 * m)));
    }
    let y_inf = gs_y(m, r0, r1, r1);
    if !(y_inf > 0.0) {
        return Err(Error::Construction(format!("y(inf) = {y_inf} is not positive")));
    }
    let mut out = GluedSchwarzschild {
        m,
        r0,
        r1,
        y_inf,
        y: RadialProfile::constant(grid.clone(), 0.0),
        metric: ConformalMetric::new(3, RadialProfile::constant(grid.clone(), 1.0))?,
    };
    let jets: Vec<Jet> = grid.nodes().iter().map(|&r| out.y_jet(r)).collect();
    out.y = RadialProfile::new(grid.clone(), jets.iter().map(|j| j.v).collect())?;
    let u: Vec<f64> = jets
        .iter()
        .zip(grid.nodes())
        .map(|(j, &r)| if r >= r1 { 1.0 } else { j.v / y_inf })
        .collect();
    out.metric = ConformalMetric::new(3, RadialProfile::new(grid, u)?)?.with_derivatives(
        jets.iter().map(|j| j.d1 / y_inf).collect(),
        jets.iter().map(|j| j.d2 / y_inf).collect(),
    )?;
    Ok(out)
}

/// A rotationally symmetric metric `dt^2 + phi(t)^2 h` that is smooth on
/// either side of the sphere `t = r0` and continuous across it.
#[derive(Debug, Clone)]
pub struct CornerMetric {
    pub dim: usize,
    pub alpha: f64,
    pub rbar: f64,
    /// Corner position in the arclength coordinate, `alpha * rbar`.
    pub r0: f64,
    pub inner: WarpedMetric,
    pub outer: WarpedMetric,
    pub h_minus: f64,
    pub h_plus: f64,
}

impl CornerMetric {
    /// Profile `phi` of the glued metric: the flat ball `phi = t` inside and
    /// the cone `phi = alpha (t - r0 + rbar)` outside.
    pub fn phi_jet(&self, t: f64) -> Jet {
        if t <= self.r0 {
            Jet::new(t, 1.0, 0.0)
        } else {
            Jet::new(self.alpha * (t - self.r0 + self.rbar), self.alpha, 0.0)
        }
    }

    /// Jump `phi'(r0-) - phi'(r0+)`.
    pub fn slope_jump(&self) -> f64 {
        1.0 - self.alpha
    }

    /// Area of the corner sphere.
    pub fn corner_area(&self) -> f64 {
        crate::measure::sphere_area(self.dim - 1) * self.r0.powi(self.dim as i32 - 1)
    }
}

/// Glue the Euclidean ball of radius `alpha * rbar` to the exterior
/// `r >= rbar` of the cone `dr^2 + alpha^2 r^2 h`.
///
/// `alpha > 1` makes `H_- < H_+` and is refused unless `allow_obtuse`.
pub fn make_cone_ball_gluing(
    n: usize,
    alpha: f64,
    rbar: f64,
    outer_len: f64,
    nodes: usize,
    allow_obtuse: bool,
) -> Result<CornerMetric> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension {n} < 3")));
    }
    if !(alpha > 0.0 && rbar > 0.0 && outer_len > 0.0) {
        return Err(Error::Domain("alpha, rbar and the outer length must be positive".into()));
    }
    if alpha > 1.0 && !allow_obtuse {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} > 1 gives H_- < H_+; pass the override to build it anyway"
        )));
    }
    let r0 = alpha * rbar;
    let nf = n as f64;
    let inner_grid = Arc::new(RadialGrid::cell_centered(r0, nodes)?);
    let inner = WarpedMetric::euclidean(n, inner_grid)?;
    let outer_grid = Arc::new(RadialGrid::uniform(r0, r0 + outer_len, nodes)?);
    let shift = rbar - r0;
    let spec = ConeSpec::new(n, alpha, 1.0)?;
    let jets: Vec<MetricJet> = outer_grid
        .nodes()
        .iter()
        .map(|&t| MetricJet {
            a: Jet::constant(1.0),
            phi: spec.phi_jet(t + shift),
        })
        .collect();
    let b = jets.iter().map(|j| j.phi.v * j.phi.v).collect();
    let outer = WarpedMetric::new(
        n,
        RadialProfile::constant(outer_grid.clone(), 1.0),
        RadialProfile::new(outer_grid, b)?,
        false,
    )?
    .with_exact_jets(jets)?;
    Ok(CornerMetric {
        dim: n,
        alpha,
        rbar,
        r0,
        inner,
        outer,
        h_minus: (nf - 1.0) / (alpha * rbar),
        h_plus: (nf - 1.0) / rbar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{mean_curvature_sphere, scalar_curvature_conformal, scalar_curvature_warped};

    #[test]
    fn smooth_step_derivative() {
        for s in [0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (smooth_step_down(s + h) - smooth_step_down(s - h)) / (2.0 * h);
            assert!((fd - smooth_step_down_d1(s)).abs() < 1e-7);
        }
        assert_eq!(smooth_step_down(0.0), 1.0);
        assert_eq!(smooth_step_down(1.0), 0.0);
    }

    #[test]
    fn cone_signs() {
        let grid = Arc::new(RadialGrid::uniform(0.1, 3.0, 64).unwrap());
        let s = scalar_curvature_warped(&make_cone(&ConeSpec::new(3, 0.5, 1.0).unwrap(), grid.clone()).unwrap()).unwrap();
        assert!(s.min() > 0.0);
        let s = scalar_curvature_warped(&make_cone(&ConeSpec::new(3, 1.5, 1.0).unwrap(), grid.clone()).unwrap()).unwrap();
        assert!(s.max() < 0.0);
        let s = scalar_curvature_warped(&make_cone(&ConeSpec::new(3, 1.0, 2.0 / 3.0).unwrap(), grid).unwrap()).unwrap();
        assert!(s.min() > 0.0);
        assert!(ConeSpec::new(3, -1.0, 1.0).is_err());
    }

    #[test]
    fn positive_mass_cone_pieces() {
        let grid = Arc::new(RadialGrid::geometric(1e-3, 10.0, 400).unwrap());
        let c = make_positive_mass_cone(0.25, grid.clone()).unwrap();
        assert!(c.a > 0.25 && c.b > 0.0);
        // the bridge integral matches the closed form at r = 1
        assert!((pm_phi_bridge(0.25, 1.0 + 1e-12)).abs() < 1e-10);
        assert!((c.phi(2.0) + c.b).abs() < 1e-14);
        let s = scalar_curvature_conformal(&c.metric).unwrap();
        for (k, &r) in grid.nodes().iter().enumerate() {
            let v = s.values()[k];
            if r >= 2.0 {
                assert!(v.abs() < 1e-10);
            } else if r <= 1.0 {
                let u = c.u_jet(r).v;
                let want = 8.0 * 0.25 * 0.75 * r.powf(-2.25) * u.powi(-5);
                assert!((v - want).abs() < 1e-9 * want.max(1.0));
            } else {
                assert!(v > -1e-12);
            }
        }
        assert!((c.cone_angle_fit() - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_area_singularity() {
        let grid = Arc::new(RadialGrid::uniform(2.5, 10.0, 100).unwrap());
        let z = make_zero_area_singularity(1.0, grid.clone()).unwrap();
        assert!((z.u_jet(4.0).v - 0.5).abs() < 1e-15);
        assert!(scalar_curvature_conformal(&z.metric).unwrap().max_abs() < 1e-12);
        assert!((z.exponent_fit() - 4.0 / 3.0).abs() < 0.01);
        let bad = Arc::new(RadialGrid::uniform(1.5, 10.0, 100).unwrap());
        assert!(matches!(make_zero_area_singularity(1.0, bad), Err(Error::Domain(_))));
    }

    #[test]
    fn glued_schwarzschild() {
        let grid = Arc::new(RadialGrid::uniform(2.2, 12.0, 300).unwrap());
        let g = make_glued_schwarzschild(1.0, 3.0, 6.0, grid.clone()).unwrap();
        assert!(g.y_inf < 1.0);
        for (k, &r) in grid.nodes().iter().enumerate() {
            if r <= 3.0 {
                assert!((g.y.values()[k] - (1.0 - 2.0 / r)).abs() < 1e-14);
            }
            if r >= 6.0 {
                assert_eq!(g.metric.u().values()[k], 1.0);
            }
        }
        assert!(g.flat_laplacian_y().iter().all(|&v| v <= 1e-12));
        let s = scalar_curvature_conformal(&g.metric).unwrap();
        assert!(s.min() >= -1e-10);
        assert!(s.max() > 1e-3);
        assert!(make_glued_schwarzschild(1.0, 1.5, 6.0, grid).is_err());
    }

    #[test]
    fn cone_ball_gluing_mean_curvatures() {
        let c = make_cone_ball_gluing(3, 0.5, 1.0, 2.0, 64, false).unwrap();
        assert!((c.h_minus - 4.0).abs() < 1e-14);
        assert!((c.h_plus - 2.0).abs() < 1e-14);
        let hi = mean_curvature_sphere(&c.inner, c.r0).unwrap();
        let ho = mean_curvature_sphere(&c.outer, c.r0).unwrap();
        assert!((hi - c.h_minus).abs() < 1e-8);
        assert!((ho - c.h_plus).abs() < 1e-12);
        let bi = *c.inner.b().values().last().unwrap();
        let bo = c.outer.b().values()[0];
        assert!((bi - 0.25).abs() < 1e-14 && (bo - 0.25).abs() < 1e-14);
        assert!(make_cone_ball_gluing(3, 1.25, 1.0, 2.0, 64, false).is_err());
        assert!(make_cone_ball_gluing(3, 1.25, 1.0, 2.0, 64, true).is_ok());
    }
}
