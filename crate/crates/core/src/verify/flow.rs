use std::sync::Arc;

use super::{sci, Claim};
use crate::constructions::{make_positive_mass_cone, smooth_step_down};
use crate::error::Result;
use crate::fit::{loglog_slope, observed_orders};
use crate::grid::{RadialGrid, RadialProfile, Region, SingularSet};
use crate::hflow::{attach_diffeo, flow_residuals, monitor_estimates, run_hflow, FlowConfig, FlowTrace, MonitorReport};
use crate::mass::{mass_drift, monitor_scalar_decay, verify_af_decay};
use crate::metric::{ToWarped, WarpedMetric};
use crate::mollify::{mollify_conformal_fn, mollify_warped_fn, MollifierSpec};

/// Smooth asymptotically flat bump metric and the flat background.
fn bump_pair(m: usize) -> Result<(WarpedMetric, WarpedMetric)> {
    let grid = Arc::new(RadialGrid::cell_centered(4.0, m)?);
    let bump = |r: f64| (-r * r).exp();
    let g = WarpedMetric::new(
        3,
        RadialProfile::from_fn(grid.clone(), |r| 1.0 + 0.1 * bump(r) + 0.1 * r * r * bump(r))?,
        RadialProfile::from_fn(grid.clone(), |r| r * r * (1.0 + 0.1 * bump(r)))?,
        true,
    )?;
    Ok((g, WarpedMetric::euclidean(3, grid)?))
}

pub(super) fn consistency() -> Result<Vec<Claim>> {
    let (mut hs, mut ricci, mut scalar) = (vec![], vec![], vec![]);
    for m in [40, 80, 160] {
        let (g, h) = bump_pair(m)?;
        let cfg = FlowConfig { outputs: 4, rtol: 1e-10, atol: 1e-12, ..FlowConfig::new(3, 0.02) };
        let mut tr = run_hflow(&g, &h, &cfg)?;
        attach_diffeo(&mut tr, 2)?;
        let last = tr.last();
        let phi = last.phi.as_ref().expect("diffeomorphism attached");
        let res = flow_residuals(&last.g, &h, phi, last.t, Region::new(0.0, 2.0)?)?;
        hs.push(4.0 / m as f64);
        ricci.push(res.ricci);
        scalar.push(res.scalar);
    }
    let sr = loglog_slope(&hs, &ricci).slope;
    let ss = loglog_slope(&hs, &scalar).slope;
    Ok(vec![
        Claim::check(
            "pulled-back-ricci-residual-order",
            sr,
            (sr - 2.0).abs() <= 0.3,
            format!("residuals {} on h = {hs:.3?}", sci(&ricci)),
        ),
        Claim::check(
            "scalar-evolution-residual-order",
            ss,
            (ss - 2.0).abs() <= 0.3,
            format!("residuals {} on h = {hs:.3?}", sci(&scalar)),
        ),
    ])
}

pub(super) const CONE_EPS: f64 = 0.1;
const CONE_T: f64 = 5e-4;
const CONE_RESOLUTIONS: [usize; 3] = [100, 200, 400];

/// Mollified positive-mass cone flowed against a more strongly mollified background.
fn cone_flow(m: usize) -> Result<(FlowTrace, FlowConfig)> {
    let grid = Arc::new(RadialGrid::sinh_core(0.05, 40.0, m)?);
    let aux = Arc::new(RadialGrid::uniform(0.01, 10.0, 50)?);
    let cone = make_positive_mass_cone(CONE_EPS, aux)?;
    let u = |r: f64| cone.u_jet(r).v;
    let smooth = |eps: f64| -> Result<WarpedMetric> {
        Ok(mollify_conformal_fn(3, u, &grid, &MollifierSpec::new(3, eps, SingularSet::axis())?)?.to_warped())
    };
    let (g0, h) = (smooth(0.2)?, smooth(0.3)?);
    let cfg = FlowConfig { outputs: 8, ..FlowConfig::new(3, CONE_T) };
    Ok((run_hflow(&g0, &h, &cfg)?, cfg))
}

fn cone_runs() -> Result<Vec<(FlowTrace, MonitorReport)>> {
    CONE_RESOLUTIONS
        .iter()
        .map(|&m| {
            let (tr, cfg) = cone_flow(m)?;
            let rep = monitor_estimates(&tr, &cfg)?;
            Ok((tr, rep))
        })
        .collect()
}

fn complete(tr: &FlowTrace) -> Claim {
    let ok = tr.truncated.is_none();
    Claim::check(
        "flow-reaches-final-time",
        tr.last().t,
        ok,
        tr.truncated.clone().unwrap_or_else(|| format!("{} steps", tr.steps)),
    )
}

pub(super) fn lower_bound() -> Result<Vec<Claim>> {
    let runs = cone_runs()?;
    let mut out = vec![];
    let tols: Vec<f64> = runs
        .iter()
        .map(|(_, rep)| rep.samples.iter().filter(|s| s.t > 0.0).map(|s| (-s.min_s).max(0.0)).fold(0.0, f64::max))
        .collect();
    let ratios: Vec<f64> = tols.windows(2).map(|w| w[0] / w[1]).collect();
    let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(complete(&runs[runs.len() - 1].0));
    out.push(Claim::check(
        "scalar-lower-bound-refines",
        worst,
        worst >= 2.0 * 0.7,
        format!("tol = max(-min S) on m = {CONE_RESOLUTIONS:?}: {}; refinement ratios {ratios:.2?}", sci(&tols)),
    ));
    for (m, (_, rep)) in CONE_RESOLUTIONS.iter().zip(&runs) {
        let frac = rep.max_j / rep.initial_volume;
        out.push(Claim::check(
            &format!("negative-part-small-m{m}"),
            frac,
            frac < 1e-3,
            format!("max_t J / V, V = {:.4}", rep.initial_volume),
        ));
    }
    let (_, fine) = &runs[runs.len() - 1];
    out.push(Claim::measured(
        "negative-part-growth-constant",
        fine.c_hat,
        "smallest C with exp(-C t^((1-delta)/2)) J(t) nonincreasing",
    ));
    Ok(out)
}

pub(super) fn derivative_monitors() -> Result<Vec<Claim>> {
    let grid = Arc::new(RadialGrid::sinh_core(0.02, 4.0, 100)?);
    let b = |r: f64| 0.2 * r.powf(0.75) * smooth_step_down(r - 1.0);
    let spec = |eps: f64| MollifierSpec::new(3, eps, SingularSet::axis());
    let h = mollify_warped_fn(3, |r| 1.0 + b(r), |r| r * r, &grid, &spec(0.2)?, true)?;
    let cfg = FlowConfig { outputs: 12, ..FlowConfig::new(3, 2e-4) };
    let (mut grads, mut hesses, mut ws) = (vec![], vec![], vec![]);
    let mut out = vec![];
    for eps in [0.1, 0.05, 0.025] {
        let g0 = mollify_warped_fn(3, |r| 1.0 + b(r), |r| r * r, &grid, &spec(eps)?, true)?;
        let tr = run_hflow(&g0, &h, &cfg)?;
        if tr.truncated.is_some() {
            out.push(complete(&tr));
        }
        let rep = monitor_estimates(&tr, &cfg)?;
        grads.push(rep.sup_grad_scaled);
        hesses.push(rep.sup_hess_scaled);
        ws.push(rep.sup_w_scaled);
    }
    let spread = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        if lo > 0.0 && hi.is_finite() {
            hi / lo
        } else {
            f64::INFINITY
        }
    };
    let (sg, sh) = (spread(&grads), spread(&hesses));
    out.push(Claim::check("gradient-monitor-uniform", sg, sg < 4.0, format!("t^delta sup|grad g|^2 over eps: {}", sci(&grads))));
    out.push(Claim::check("hessian-monitor-uniform", sh, sh < 4.0, format!("t^(1+delta) sup|hess g|^2 over eps: {}", sci(&hesses))));
    out.push(Claim::measured(
        "deturck-field-monitor",
        ws.iter().cloned().fold(0.0, f64::max),
        format!("t^(delta/2) sup|W| over eps: {}", sci(&ws)),
    ));
    Ok(out)
}

pub(super) fn mass_along_flow() -> Result<Vec<Claim>> {
    let runs = cone_runs()?;
    let mut out = vec![];
    let mut drifts = vec![];
    for (tr, _) in &runs {
        drifts.push(mass_drift(tr)?.max_relative_drift);
    }
    let coarse = drifts[0];
    out.push(Claim::check(
        "mass-drift-small",
        coarse,
        coarse < 0.01,
        format!("relative drift over [0, T] at m = {}", CONE_RESOLUTIONS[0]),
    ));
    let orders = observed_orders(&drifts, 2.0);
    let mean = orders.iter().sum::<f64>() / orders.len() as f64;
    out.push(Claim::check(
        "mass-drift-order",
        mean,
        (mean - 2.0).abs() <= 0.5,
        format!("drifts {} on m = {CONE_RESOLUTIONS:?}, orders {orders:.2?}", sci(&drifts)),
    ));
    let (fine, _) = &runs[runs.len() - 1];
    let af = verify_af_decay(&fine.last().g.to_warped(), 1.0, 3.0)?;
    let q = if af.q_fit.is_finite() { af.q_fit.min(5.0) } else { 3.0 };
    let decay = monitor_scalar_decay(fine, q)?;
    out.push(Claim::measured("scalar-decay-exponent", af.q_fit, "fitted decay exponent of S(T)"));
    out.push(Claim::check(
        "scalar-decay-bounded",
        decay.growth,
        decay.bounded,
        format!("sup (1+r)^{q:.2} |S| grows by {:.3} along the trace", decay.growth),
    ));
    Ok(out)
}
