//! Curvature of SO(n)-invariant metrics.
//!
//! In arclength `s` (`ds = sqrt(A) dr`) a warped metric is `ds^2 + phi^2 h`
//! and its curvature operator is diagonal with two sectional curvatures:
//! `K_rad = -phi_ss/phi` on planes containing the radial direction and
//! `K_tan = (kappa - phi_s^2)/phi^2` on planes tangent to the spheres.

use crate::error::{Error, Result};
use crate::frame::{sectional, LocalFrame};
use crate::grid::{same_grid, RadialProfile};
use crate::metric::{ConformalMetric, MetricJet, SymTensor2Radial, WarpedMetric};
use crate::stencil::{Interpolator, Jet, Parity};

/// Christoffel scalars, sectional curvatures and Ricci tensor of a warped metric.
#[derive(Debug, Clone)]
pub struct CurvatureAssembly {
    /// `Gamma^r_rr = A'/(2A)`.
    pub gamma_r_rr: RadialProfile,
    /// `Gamma^r_ab = gamma_r_ss * h_ab`, equal to `-B'/(2A)`.
    pub gamma_r_ss: RadialProfile,
    /// `Gamma^a_rb = gamma_s_rs * delta^a_b`, equal to `B'/(2B)`.
    pub gamma_s_rs: RadialProfile,
    pub k_rad: RadialProfile,
    pub k_tan: RadialProfile,
    pub ricci: SymTensor2Radial,
    pub scalar: RadialProfile,
    /// Pointwise `|Rm|_g`.
    pub rm_norm: RadialProfile,
}

/// Pointwise curvature quantities at one node.
#[derive(Debug, Clone, Copy)]
pub struct PointCurvature {
    pub k_rad: f64,
    pub k_tan: f64,
    pub ric_rr: f64,
    pub ric_s: f64,
    pub scalar: f64,
}

pub fn point_curvature(n: usize, fiber: f64, jet: &MetricJet) -> PointCurvature {
    let (k_rad, k_tan) = sectional(jet, fiber);
    let nf = n as f64;
    let b = jet.phi.v * jet.phi.v;
    PointCurvature {
        k_rad,
        k_tan,
        ric_rr: jet.a.v * (nf - 1.0) * k_rad,
        ric_s: b * (k_rad + (nf - 2.0) * k_tan),
        scalar: (nf - 1.0) * (2.0 * k_rad + (nf - 2.0) * k_tan),
    }
}

/// `|Rm|^2` for a curvature operator with the two sectional curvatures.
pub fn rm_norm_sq(n: usize, k_rad: f64, k_tan: f64) -> f64 {
    let n1 = n as f64 - 1.0;
    4.0 * (n1 * k_rad * k_rad + 0.5 * n1 * (n1 - 1.0) * k_tan * k_tan)
}

pub fn curvature_assembly(g: &WarpedMetric) -> Result<CurvatureAssembly> {
    let jets = g.jets();
    curvature_from_jets(g, &jets)
}

pub(crate) fn curvature_from_jets(g: &WarpedMetric, jets: &[MetricJet]) -> Result<CurvatureAssembly> {
    let n = g.dim();
    let grid = g.grid().clone();
    let len = grid.len();
    let mut cols: [Vec<f64>; 9] = Default::default();
    for c in cols.iter_mut() {
        c.reserve(len);
    }
    for j in jets {
        let pc = point_curvature(n, g.fiber_curvature(), j);
        let (a, a1) = (j.a.v, j.a.d1);
        let b = j.b();
        cols[0].push(0.5 * a1 / a);
        cols[1].push(-0.5 * b.d1 / a);
        cols[2].push(j.phi.d1 / j.phi.v);
        cols[3].push(pc.k_rad);
        cols[4].push(pc.k_tan);
        cols[5].push(pc.ric_rr);
        cols[6].push(pc.ric_s);
        cols[7].push(pc.scalar);
        cols[8].push(rm_norm_sq(n, pc.k_rad, pc.k_tan).sqrt());
    }
    let [c0, c1, c2, c3, c4, c5, c6, c7, c8] = cols;
    let mk = |v: Vec<f64>| RadialProfile::new(grid.clone(), v);
    Ok(CurvatureAssembly {
        gamma_r_rr: mk(c0)?,
        gamma_r_ss: mk(c1)?,
        gamma_s_rs: mk(c2)?,
        k_rad: mk(c3)?,
        k_tan: mk(c4)?,
        ricci: SymTensor2Radial::new(n, mk(c5)?, mk(c6)?)?,
        scalar: mk(c7)?,
        rm_norm: mk(c8)?,
    })
}

pub fn scalar_curvature_warped(g: &WarpedMetric) -> Result<RadialProfile> {
    if g.grid().len() < 4 {
        return Err(Error::Resolution("grid too coarse for curvature stencils".into()));
    }
    Ok(curvature_assembly(g)?.scalar)
}

/// Scalar curvature of `u^{4/(n-2)} g_e` from `S = -a u^{-(n+2)/(n-2)} lap_0 u`.
pub fn scalar_curvature_conformal(g: &ConformalMetric) -> Result<RadialProfile> {
    let n = g.dim() as f64;
    let a = g.a_const();
    let expo = -(n + 2.0) / (n - 2.0);
    let jets = g.u_jets();
    let v = g
        .grid()
        .nodes()
        .iter()
        .zip(&jets)
        .map(|(&r, u)| -a * u.v.powf(expo) * (u.d2 + (n - 1.0) * u.d1 / r))
        .collect();
    RadialProfile::new(g.grid().clone(), v)
}

/// Euclidean Laplacian of a radial function on each node.
pub fn flat_laplacian(g: &ConformalMetric) -> Vec<f64> {
    let n = g.dim() as f64;
    g.grid()
        .nodes()
        .iter()
        .zip(g.u_jets())
        .map(|(&r, u)| u.d2 + (n - 1.0) * u.d1 / r)
        .collect()
}

/// Mean-curvature profile `H = (n-1) phi'/(phi sqrt(A))` of the spheres `{r}`
/// with respect to the unit normal along `d/dr`.
pub fn mean_curvature_profile(g: &WarpedMetric) -> Result<RadialProfile> {
    let n1 = g.dim() as f64 - 1.0;
    let v = g
        .jets()
        .iter()
        .map(|j| n1 * j.phi.d1 / (j.phi.v * j.a.v.sqrt()))
        .collect();
    RadialProfile::new(g.grid().clone(), v)
}

pub fn mean_curvature_sphere(g: &WarpedMetric, r: f64) -> Result<f64> {
    let grid = g.grid();
    let inside = r <= grid.r_max() && (r >= grid.r_min() || (grid.tip_symmetric() && r > 0.0));
    if !inside {
        return Err(Error::Domain(format!(
            "radius {r} outside ({}, {}]",
            grid.lower(),
            grid.r_max()
        )));
    }
    let h = mean_curvature_profile(g)?;
    if let Some(k) = grid.nodes().iter().position(|&x| (x - r).abs() <= 1e-14 * r.max(1.0)) {
        return Ok(h.values()[k]);
    }
    Ok(Interpolator::new(grid, h.values(), Parity::Odd).eval(r))
}

pub fn traceless_ricci(g: &WarpedMetric) -> Result<SymTensor2Radial> {
    let c = curvature_assembly(g)?;
    let nf = g.dim() as f64;
    let rr = c
        .ricci
        .rr
        .values()
        .iter()
        .zip(c.scalar.values())
        .zip(g.a().values())
        .map(|((ric, s), a)| ric - s / nf * a)
        .collect();
    let ss = c
        .ricci
        .s
        .values()
        .iter()
        .zip(c.scalar.values())
        .zip(g.b().values())
        .map(|((ric, s), b)| ric - s / nf * b)
        .collect();
    SymTensor2Radial::new(
        g.dim(),
        RadialProfile::new(g.grid().clone(), rr)?,
        RadialProfile::new(g.grid().clone(), ss)?,
    )
}

/// First variation of scalar curvature:
/// `div div h - lap tr h - <h, Ric>`.
pub fn linearized_scalar(g: &WarpedMetric, h: &SymTensor2Radial) -> Result<RadialProfile> {
    if !same_grid(g.grid(), h.grid()) {
        return Err(Error::Contract("metric and perturbation on different grids".into()));
    }
    if h.dim != g.dim() {
        return Err(Error::Contract("dimension mismatch".into()));
    }
    let gj = g.jets();
    let (hr, hs) = h.jets(g.tip_regular());
    let v = linearized_scalar_jets(g.dim(), g.fiber_curvature(), &gj, &hr, &hs);
    RadialProfile::new(g.grid().clone(), v)
}

pub(crate) fn linearized_scalar_jets(
    n: usize,
    fiber: f64,
    gj: &[MetricJet],
    hr: &[Jet],
    hs: &[Jet],
) -> Vec<f64> {
    let n1 = n as f64 - 1.0;
    gj.iter()
        .zip(hr.iter().zip(hs))
        .map(|(j, (&trr, &ts))| {
            let frame = LocalFrame::new(n, j, trr, ts);
            let mut divdiv = 0.0;
            for a in 0..n {
                for b in 0..n {
                    divdiv += frame.inv(a) * frame.inv(b) * frame.d2(a, b, a, b);
                }
            }
            let a = j.a;
            let b = j.b();
            let tr = trr.mul(a.recip()).add(ts.mul(b.recip()).scale(n1));
            let lap = tr.d2 / a.v - a.d1 * tr.d1 / (2.0 * a.v * a.v)
                + n1 * b.d1 * tr.d1 / (2.0 * a.v * b.v);
            let pc = point_curvature(n, fiber, j);
            let inner = trr.v * pc.ric_rr / (a.v * a.v) + n1 * ts.v * pc.ric_s / (b.v * b.v);
            divdiv - lap - inner
        })
        .collect()
}

/// Scalar curvature of `A = 1`, `B = phi^2` from the closed warped formula.
pub fn warped_closed_form(n: usize, phi: f64, dphi: f64, d2phi: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) * (-2.0 * d2phi / phi + (nf - 2.0) * (1.0 - dphi * dphi) / (phi * phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use std::sync::Arc;

    fn warped(n: usize, grid: Arc<RadialGrid>, a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> WarpedMetric {
        let tip = grid.tip_symmetric();
        WarpedMetric::new(
            n,
            RadialProfile::from_fn(grid.clone(), a).unwrap(),
            RadialProfile::from_fn(grid, b).unwrap(),
            tip,
        )
        .unwrap()
    }

    #[test]
    fn euclidean_is_flat() {
        let g = WarpedMetric::euclidean(3, Arc::new(RadialGrid::cell_centered(2.0, 64).unwrap())).unwrap();
        let c = curvature_assembly(&g).unwrap();
        assert!(c.scalar.max_abs() < 1e-10);
        assert!(c.ricci.max_abs() < 1e-10);
        assert!(c.rm_norm.max_abs() < 1e-10);
    }

    #[test]
    fn narrow_cone_value_at_one() {
        let grid = Arc::new(RadialGrid::uniform(0.5, 1.5, 101).unwrap());
        let g = warped(3, grid.clone(), |_| 1.0, |r| 0.25 * r * r);
        let s = scalar_curvature_warped(&g).unwrap();
        let k = grid.nodes().iter().position(|&r| (r - 1.0).abs() < 1e-12).unwrap();
        assert!((s.values()[k] - 6.0).abs() < 1e-9);
        assert!((warped_closed_form(3, 0.5, 0.5, 0.0) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn cylinder_and_sphere() {
        let grid = Arc::new(RadialGrid::uniform(0.3, 2.5, 200).unwrap());
        let cyl = warped(3, grid.clone(), |_| 1.0, |_| 1.0);
        let c = curvature_assembly(&cyl).unwrap();
        assert!(c.ricci.rr.max_abs() < 1e-12);
        for v in c.ricci.s.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let sph = warped(3, grid, |_| 1.0, |r| r.sin().powi(2));
        let s = scalar_curvature_warped(&sph).unwrap();
        for v in &s.values()[2..198] {
            assert!((v - 6.0).abs() < 1e-6);
        }
    }

    #[test]
    fn traceless_ricci_is_traceless() {
        let grid = Arc::new(RadialGrid::uniform(0.4, 2.0, 120).unwrap());
        let g = warped(4, grid, |r| 1.0 + 0.2 * r.sin(), |r| r * r * (1.0 + 0.1 * r.cos()));
        let t = traceless_ricci(&g).unwrap();
        let tr = t.trace(&g).unwrap();
        assert!(tr.max_abs() < 1e-12);
        assert!(t.max_abs() > 1e-3);
    }

    #[test]
    fn mean_curvature_of_cones() {
        let grid = Arc::new(RadialGrid::uniform(0.5, 4.0, 141).unwrap());
        for alpha in [1.0, 0.5, 1.7] {
            let g = warped(3, grid.clone(), |_| 1.0, move |r| alpha * alpha * r * r);
            let h = mean_curvature_sphere(&g, 2.0).unwrap();
            assert!((h - 1.0).abs() < 1e-10);
        }
        let g = warped(3, grid.clone(), |_| 1.0, |r| r * r);
        assert!(mean_curvature_sphere(&g, 5.0).is_err());
    }

    #[test]
    fn linearized_scalar_vanishes_for_parallel_direction() {
        let grid = Arc::new(RadialGrid::cell_centered(2.0, 80).unwrap());
        let g = WarpedMetric::euclidean(3, grid).unwrap();
        let mut h = SymTensor2Radial::from_metric(&g);
        h.rr = h.rr.map(|_, v| 0.3 * v).unwrap();
        h.s = h.s.map(|_, v| 0.3 * v).unwrap();
        let l = linearized_scalar(&g, &h).unwrap();
        assert!(l.max_abs() < 1e-10);
    }

    #[test]
    fn linearized_scalar_rejects_grid_mismatch() {
        let g = WarpedMetric::euclidean(3, Arc::new(RadialGrid::cell_centered(2.0, 80).unwrap())).unwrap();
        let h = SymTensor2Radial::zeros(3, Arc::new(RadialGrid::cell_centered(2.0, 81).unwrap()));
        assert!(matches!(linearized_scalar(&g, &h), Err(Error::Contract(_))));
    }
}
