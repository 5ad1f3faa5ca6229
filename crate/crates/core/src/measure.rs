//! Volumes and Sobolev norms of radial quantities.

use crate::error::{Error, Result};
use crate::frame::LocalFrame;
use crate::grid::{same_grid, RadialProfile, Region};
use crate::metric::{SymTensor2Radial, ToWarped, WarpedMetric};
use crate::stencil::{integrate, jets, Parity};

/// Area of the unit sphere `S^{k}` in `R^{k+1}`.
pub fn sphere_area(k: usize) -> f64 {
    use std::f64::consts::PI;
    // |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2), by the recursion |S^k| = 2pi/(k-1) |S^{k-2}|
    let (mut area, mut j) = if k % 2 == 0 { (2.0, 0) } else { (2.0 * PI, 1) };
    while j < k {
        j += 2;
        area *= 2.0 * PI / (j as f64 - 1.0);
    }
    area
}

fn density(g: &WarpedMetric) -> Vec<f64> {
    let e = 0.5 * (g.dim() as f64 - 1.0);
    g.a()
        .values()
        .iter()
        .zip(g.b().values())
        .map(|(a, b)| a.sqrt() * b.powf(e))
        .collect()
}

fn density_parity(g: &WarpedMetric) -> Parity {
    if g.dim() % 2 == 1 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Integral of `f dvol_g` over the shell `region x S^{n-1}`.
pub fn integrate_volume(g: &WarpedMetric, f: &[f64], region: Region) -> Result<f64> {
    region.check_in(g.grid())?;
    if f.len() != g.grid().len() {
        return Err(Error::Contract("integrand does not match grid".into()));
    }
    let w: Vec<f64> = density(g).iter().zip(f).map(|(d, v)| d * v).collect();
    let s = integrate(g.grid(), &w, density_parity(g), region.a, region.b);
    Ok(sphere_area(g.dim() - 1) * s)
}

/// `omega_{n-1} int sqrt(A) B^{(n-1)/2} dr` over `region`.
pub fn volume(g: &impl ToWarped, region: Region) -> Result<f64> {
    let g = g.to_warped();
    let one = vec![1.0; g.grid().len()];
    integrate_volume(&g, &one, region)
}

/// `L^p` norm and `W^{1,p}` seminorm of a radial quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorms {
    pub lp: f64,
    pub w1p: f64,
}

/// Something whose pointwise norm and gradient norm can be evaluated against `g`.
pub enum NormTarget<'a> {
    Scalar(&'a RadialProfile),
    Tensor(&'a SymTensor2Radial),
}

impl<'a> From<&'a RadialProfile> for NormTarget<'a> {
    fn from(f: &'a RadialProfile) -> Self {
        NormTarget::Scalar(f)
    }
}

impl<'a> From<&'a SymTensor2Radial> for NormTarget<'a> {
    fn from(t: &'a SymTensor2Radial) -> Self {
        NormTarget::Tensor(t)
    }
}

pub fn sobolev_norms<'a>(
    f: impl Into<NormTarget<'a>>,
    g: &WarpedMetric,
    p: f64,
    region: Region,
) -> Result<SobolevNorms> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Sobolev exponent {p} < 1")));
    }
    let (val, grad): (Vec<f64>, Vec<f64>) = match f.into() {
        NormTarget::Scalar(f) => {
            if !same_grid(f.grid(), g.grid()) {
                return Err(Error::Contract("profile and metric on different grids".into()));
            }
            let parity = if g.tip_regular() && g.grid().tip_symmetric() {
                Parity::Even
            } else {
                Parity::None
            };
            let fj = jets(g.grid(), f.values(), parity);
            fj.iter()
                .zip(g.a().values())
                .map(|(j, a)| (j.v.abs(), j.d1.abs() / a.sqrt()))
                .unzip()
        }
        NormTarget::Tensor(t) => {
            if !same_grid(t.grid(), g.grid()) {
                return Err(Error::Contract("tensor and metric on different grids".into()));
            }
            let norm = t.norm(g);
            let (hr, hs) = t.jets(g.tip_regular());
            let gj = g.jets();
            let grad = gj
                .iter()
                .zip(hr.iter().zip(&hs))
                .map(|(j, (&r, &s))| LocalFrame::new(g.dim(), j, r, s).grad_norm_sq().max(0.0).sqrt())
                .collect();
            (norm, grad)
        }
    };
    let pow = |v: &[f64]| v.iter().map(|x| x.powf(p)).collect::<Vec<_>>();
    let lp = integrate_volume(g, &pow(&val), region)?.max(0.0).powf(1.0 / p);
    let w1p = integrate_volume(g, &pow(&grad), region)?.max(0.0).powf(1.0 / p);
    Ok(SobolevNorms { lp, w1p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::metric::ConformalMetric;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn unit_ball_volume() {
        let grid = Arc::new(RadialGrid::cell_centered(1.5, 120).unwrap());
        let g = WarpedMetric::euclidean(3, grid.clone()).unwrap();
        let v = volume(&g, Region::new(0.0, 1.0).unwrap()).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-10);
        let g4 = WarpedMetric::euclidean(4, grid.clone()).unwrap();
        let v4 = volume(&g4, Region::new(0.0, 1.0).unwrap()).unwrap();
        assert!((v4 - PI * PI / 2.0).abs() < 1e-10);
        let c = ConformalMetric::new(3, RadialProfile::constant(grid, 1.0)).unwrap();
        assert!((volume(&c, Region::new(0.0, 1.0).unwrap()).unwrap() - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn region_outside_grid_is_rejected() {
        let grid = Arc::new(RadialGrid::uniform(0.5, 1.5, 40).unwrap());
        let g = WarpedMetric::euclidean(3, grid).unwrap();
        assert!(volume(&g, Region::new(0.1, 1.0).unwrap()).is_err());
        assert!(volume(&g, Region::new(0.6, 2.0).unwrap()).is_err());
    }

    #[test]
    fn norms_of_simple_profiles() {
        let grid = Arc::new(RadialGrid::cell_centered(1.0, 200).unwrap());
        let g = WarpedMetric::euclidean(3, grid.clone()).unwrap();
        let region = Region::new(0.0, 1.0).unwrap();
        let c = RadialProfile::constant(grid.clone(), 2.0);
        let nc = sobolev_norms(&c, &g, 2.0, region).unwrap();
        assert!(nc.w1p < 1e-12);
        let f = RadialProfile::from_fn(grid, |r| r).unwrap();
        let nf = sobolev_norms(&f, &g, 2.0, region).unwrap();
        assert!((nf.lp - (4.0 * PI / 5.0).sqrt()).abs() < 1e-4);
        assert!((nf.w1p - (4.0 * PI / 3.0).sqrt()).abs() < 1e-6);
        assert!(sobolev_norms(&f, &g, 0.5, region).is_err());
    }

    #[test]
    fn tensor_norm_of_metric_is_parallel() {
        let grid = Arc::new(RadialGrid::uniform(0.5, 2.0, 100).unwrap());
        let g = WarpedMetric::new(
            3,
            RadialProfile::from_fn(grid.clone(), |r| 1.0 + 0.1 * r).unwrap(),
            RadialProfile::from_fn(grid, |r| r * r * (1.0 + 0.2 * r)).unwrap(),
            false,
        )
        .unwrap();
        let h = SymTensor2Radial::from_metric(&g);
        let region = Region::new(0.5, 2.0).unwrap();
        let nm = sobolev_norms(&h, &g, 2.0, region).unwrap();
        let vol = volume(&g, region).unwrap();
        assert!((nm.lp - (3.0 * vol).sqrt()).abs() < 1e-8);
        assert!(nm.w1p < 1e-4, "{}", nm.w1p);
    }
}
