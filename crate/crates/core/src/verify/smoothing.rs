use std::sync::Arc;

use super::{sci, Claim};
use crate::constructions::{make_cone_ball_gluing, smooth_step_down};
use crate::error::Result;
use crate::fit::fit_through_origin;
use crate::grid::{RadialGrid, RadialProfile, Region, SingularSet};
use crate::measure::{sobolev_norms, sphere_area};
use crate::metric::WarpedMetric;
use crate::mollify::{mollify_fn, smooth_corner, MollifierSpec};

const EPS_SWEEP: [f64; 3] = [0.1, 0.05, 0.025];

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0, f64::max);
    hi / lo
}

pub(super) fn mollification() -> Result<Vec<Claim>> {
    let n = 3;
    let p = 2.0 * n as f64;
    let grid = Arc::new(RadialGrid::sinh_core(0.005, 2.0, 400)?);
    let g = WarpedMetric::euclidean(n, grid.clone())?;
    let f = |r: f64| r.powf(0.75) * smooth_step_down(r - 1.0);
    let region = Region::whole(&grid);
    let base = sobolev_norms(&RadialProfile::from_fn(grid.clone(), f)?, &g, p, region)?.w1p;
    let (mut untouched, mut sups, mut transfer) = (true, vec![], vec![]);
    for eps in EPS_SWEEP {
        let spec = MollifierSpec::new(n, eps, SingularSet::axis())?;
        let v = mollify_fn(f, &grid, &spec)?;
        let mut sup = 0.0f64;
        for (&r, &x) in grid.nodes().iter().zip(v.values()) {
            if r >= 2.0 * eps {
                untouched &= x == f(r);
            }
            sup = sup.max((x - f(r)).abs());
        }
        sups.push(sup);
        transfer.push(sobolev_norms(&v, &g, p, region)?.w1p / base);
    }
    let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        Claim::check(
            "mollifier-identity-outside",
            if untouched { 1.0 } else { 0.0 },
            untouched,
            "v == f node-wise outside Sigma(2 eps)",
        ),
        Claim::check(
            "mollifier-sup-error-decreasing",
            sups[sups.len() - 1],
            decreasing,
            format!("sup |v - f| over eps = {EPS_SWEEP:?}: {}", sci(&sups)),
        ),
        Claim::check(
            "mollifier-sobolev-transfer",
            spread(&transfer),
            spread(&transfer) < 2.0,
            format!("W^(1,{p}) ratios ||v|| / ||f||: {transfer:.4?}"),
        ),
    ])
}

pub(super) fn corner() -> Result<Vec<Claim>> {
    let n = 3;
    let cm = make_cone_ball_gluing(n, 0.5, 1.0, 1.0, 64, false)?;
    let area = sphere_area(n - 1) * cm.r0.powi(n as i32 - 1);
    let jump = cm.h_minus - cm.h_plus;
    let (mut ratios, mut js) = (vec![], vec![]);
    for eps in [0.2, 0.1, 0.05] {
        let sc = smooth_corner(&cm, eps)?;
        let (plus, _) = sc.window_integrals();
        ratios.push(plus / (jump * area));
        js.push((eps, sc.negative_part(0.0, cm.r0 - eps, cm.r0 + eps)));
    }
    let last = ratios[ratios.len() - 1];
    let fit = fit_through_origin(&js);
    let obtuse = make_cone_ball_gluing(n, 1.25, 1.0, 1.0, 64, true)?;
    let negs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&e| smooth_corner(&obtuse, e).map(|s| s.window_integrals().1))
        .collect::<Result<_>>()?;
    let floor = negs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Claim::check(
            "corner-positive-part",
            last / 2.0,
            (last / 2.0 - 1.0).abs() <= 0.05,
            format!("int S+ / (2 (H- - H+) Area) at the smallest eps; ratios to (H- - H+) Area: {ratios:.5?}"),
        ),
        Claim::measured("corner-positive-part-literal-ratio", last, "int S+ / ((H- - H+) Area)"),
        Claim::check(
            "corner-negative-part-linear",
            fit.slope,
            fit.r2 > 0.95,
            format!("J(eps) = {}, fitted C with R^2 = {:.4}", sci(&js.iter().map(|p| p.1).collect::<Vec<_>>()), fit.r2),
        ),
        Claim::check(
            "corner-obtuse-control",
            floor,
            floor > 1e-3 && spread(&negs) < 1.5,
            format!("int S- for alpha = 1.25: {negs:.4?}"),
        ),
    ])
}
