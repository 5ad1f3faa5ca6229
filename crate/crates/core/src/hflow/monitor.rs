//! Time series of the quantities the a priori estimates control.

use serde::{Deserialize, Serialize};

use super::flow::{frozen_mask, FlowConfig, FlowTrace};
use super::rhs::{background_jets, coefficient_jets, deturck_point};
use crate::curvature::point_curvature;
use crate::error::Result;
use crate::frame::LocalFrame;
use crate::grid::Region;
use crate::mass::adm_mass_within;
use crate::measure::{integrate_volume, volume};
use crate::metric::{MetricJet, WarpedMetric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub t: f64,
    /// `int (S - sigma)_- dv`.
    pub j: f64,
    pub min_s: f64,
    /// `t^delta sup |grad g|^2` in the background connection.
    pub sup_grad_scaled: f64,
    /// `t^{1+delta} sup |hess g|^2`.
    pub sup_hess_scaled: f64,
    /// `t^{delta/2} sup |W|_h`.
    pub sup_w_scaled: f64,
    pub closeness: f64,
    pub mass: Option<f64>,
    /// `sup (1 + r)^q |S|` over the monitored region.
    pub sup_dq_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub delta: f64,
    pub q: f64,
    pub samples: Vec<MonitorSample>,
    /// Volume of the monitored region at `t = 0`.
    pub initial_volume: f64,
    /// Suprema over `t > 0` of the scaled series.
    pub sup_grad_scaled: f64,
    pub sup_hess_scaled: f64,
    pub sup_w_scaled: f64,
    pub min_s: f64,
    pub max_j: f64,
    /// Smallest `C >= 0` making `exp(-C t^{(1-delta)/2}) J(t)` nonincreasing;
    /// infinite when `J` leaves zero.
    pub c_hat: f64,
    pub j_monotone: bool,
}

/// Monitors look at `r <= MONITOR_FRACTION * r_max`, away from the layer
/// where the frozen collar meets the evolving interior.
pub const MONITOR_FRACTION: f64 = 0.5;

/// Pointwise quantities of one state.
fn sample(g: &WarpedMetric, h: &WarpedMetric, hj: &[MetricJet], t: f64, delta: f64, cfg: &FlowConfig) -> Result<MonitorSample> {
    let n = g.dim();
    let grid = g.grid();
    let r_mon = MONITOR_FRACTION * grid.r_max();
    let skip: Vec<bool> = frozen_mask(grid, g.tip_regular())
        .into_iter()
        .zip(grid.nodes())
        .map(|(f, &r)| f || r > r_mon)
        .collect();
    let gj = coefficient_jets(grid, g.a().values(), g.b().values(), g.tip_regular());
    let mut s = Vec::with_capacity(grid.len());
    let (mut grad, mut hess, mut wmax) = (0.0f64, 0.0f64, 0.0f64);
    let mut sup_dq = 0.0f64;
    for k in 0..grid.len() {
        let (a, b) = gj[k];
        let mj = MetricJet { a, phi: b.sqrt() };
        let sc = point_curvature(n, g.fiber_curvature(), &mj).scalar;
        s.push(sc);
        if skip[k] {
            continue;
        }
        let fr = LocalFrame::new(n, &hj[k], a, b);
        grad = grad.max(fr.grad_norm_sq());
        hess = hess.max(fr.hess_norm_sq());
        let w = deturck_point(n, &hj[k], a, b);
        wmax = wmax.max(w.abs() * hj[k].a.v.sqrt());
        sup_dq = sup_dq.max((1.0 + grid.r(k)).powf(cfg.decay_q) * sc.abs());
    }
    let neg: Vec<f64> = s.iter().map(|v| (cfg.sigma - v).max(0.0)).collect();
    let j = integrate_volume(g, &neg, Region::new(grid.lower(), r_mon)?)?;
    let min_s = s
        .iter()
        .zip(&skip)
        .filter(|(_, f)| !**f)
        .fold(f64::INFINITY, |m, (v, _)| m.min(*v));
    Ok(MonitorSample {
        t,
        j,
        min_s,
        sup_grad_scaled: t.powf(delta) * grad,
        sup_hess_scaled: t.powf(1.0 + delta) * hess,
        sup_w_scaled: t.powf(0.5 * delta) * wmax,
        closeness: g.closeness(h)?,
        mass: adm_mass_within(g, r_mon).ok().map(|m| m.extrapolated_mass),
        sup_dq_s: sup_dq,
    })
}

/// Minimal `C >= 0` with `exp(-C s_i) J_i` nonincreasing, `s = t^{(1-delta)/2}`.
pub fn fit_monotone_constant(times: &[f64], j: &[f64], delta: f64, floor: f64) -> f64 {
    let e = 0.5 * (1.0 - delta);
    let mut c = 0.0f64;
    for w in times.iter().zip(j).collect::<Vec<_>>().windows(2) {
        let ((&t0, &j0), (&t1, &j1)) = (w[0], w[1]);
        if j1 <= floor || j1 <= j0 {
            continue;
        }
        if j0 <= floor {
            return f64::INFINITY;
        }
        c = c.max((j1 / j0).ln() / (t1.powf(e) - t0.powf(e)));
    }
    c
}

pub fn monitor_estimates(trace: &FlowTrace, cfg: &FlowConfig) -> Result<MonitorReport> {
    let first = &trace.states[0];
    let n = first.g.dim();
    let delta = cfg.delta(n);
    let hj = background_jets(&first.h);
    let samples = trace
        .states
        .iter()
        .map(|s| sample(&s.g, &s.h, &hj, s.t, delta, cfg))
        .collect::<Result<Vec<_>>>()?;
    let grid = first.g.grid();
    let initial_volume = volume(&first.g, Region::new(grid.lower(), MONITOR_FRACTION * grid.r_max())?)?;
    let pos: Vec<&MonitorSample> = samples.iter().filter(|s| s.t > 0.0).collect();
    let sup = |f: fn(&MonitorSample) -> f64| pos.iter().map(|s| f(s)).fold(0.0, f64::max);
    let times: Vec<f64> = pos.iter().map(|s| s.t).collect();
    let js: Vec<f64> = pos.iter().map(|s| s.j).collect();
    let c_hat = fit_monotone_constant(&times, &js, delta, 1e-14 * initial_volume);
    Ok(MonitorReport {
        delta,
        q: cfg.decay_q,
        initial_volume,
        sup_grad_scaled: sup(|s| s.sup_grad_scaled),
        sup_hess_scaled: sup(|s| s.sup_hess_scaled),
        sup_w_scaled: sup(|s| s.sup_w_scaled),
        min_s: samples.iter().map(|s| s.min_s).fold(f64::INFINITY, f64::min),
        max_j: samples.iter().map(|s| s.j).fold(0.0, f64::max),
        c_hat,
        j_monotone: c_hat.is_finite(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::hflow::run_hflow;
    use std::sync::Arc;

    #[test]
    fn flat_trace_has_vanishing_series() {
        let grid = Arc::new(RadialGrid::cell_centered(4.0, 40).unwrap());
        let e = WarpedMetric::euclidean(3, grid).unwrap();
        let cfg = FlowConfig { outputs: 4, ..FlowConfig::new(3, 0.01) };
        let tr = run_hflow(&e, &e, &cfg).unwrap();
        let rep = monitor_estimates(&tr, &cfg).unwrap();
        assert!(rep.sup_grad_scaled < 1e-20 && rep.sup_hess_scaled < 1e-20 && rep.sup_w_scaled < 1e-12);
        assert!(rep.max_j < 1e-10 && rep.c_hat == 0.0 && rep.j_monotone, "{} {}", rep.max_j, rep.c_hat);
        assert!(rep.samples.iter().all(|s| s.mass.unwrap().abs() < 1e-10));
    }

    #[test]
    fn monotone_constant_fit() {
        let t = [0.1, 0.2, 0.4];
        let delta = 0.5;
        let s: Vec<f64> = t.iter().map(|t: &f64| t.powf(0.25)).collect();
        let j: Vec<f64> = s.iter().map(|s| (2.0 * s).exp()).collect();
        assert!((fit_monotone_constant(&t, &j, delta, 0.0) - 2.0).abs() < 1e-12);
        assert_eq!(fit_monotone_constant(&t, &[3.0, 2.0, 1.0], delta, 0.0), 0.0);
        assert!(fit_monotone_constant(&t, &[0.0, 1.0, 1.0], delta, 0.0).is_infinite());
    }
}
