//! DeTurck diffeomorphisms, pullbacks and the Ricci-flow residuals of the
//! pulled-back trace.

use serde::{Deserialize, Serialize};

use super::flow::{frozen_mask, FlowTrace};
use super::rhs::{coefficient_jets, hflow_rhs, metric_jets};
use crate::curvature::{linearized_scalar_jets, point_curvature};
use crate::error::{Error, Result};
use crate::grid::{same_grid, RadialProfile, Region};
use crate::metric::WarpedMetric;
use crate::stencil::{jets, Interpolator, Jet, Parity};

fn odd_if_tip(g: &WarpedMetric) -> Parity {
    if g.tip_regular() && g.grid().tip_symmetric() {
        Parity::Odd
    } else {
        Parity::None
    }
}

/// `W(r, t)` from the recorded samples: cubic Lagrange in time, cubic
/// interpolation in space. The frozen collar carries `W = 0`.
struct FieldHistory<'a> {
    trace: &'a FlowTrace,
    frozen: Vec<bool>,
    parity: Parity,
}

impl<'a> FieldHistory<'a> {
    fn spatial(&self, k: usize) -> Vec<f64> {
        self.trace.w_record[k]
            .1
            .iter()
            .zip(&self.frozen)
            .map(|(w, f)| if *f { 0.0 } else { *w })
            .collect()
    }

    fn eval(&self, r: f64, t: f64, cache: &mut Vec<Option<Vec<f64>>>) -> f64 {
        let rec = &self.trace.w_record;
        let grid = self.trace.states[0].g.grid();
        let m = rec.len();
        if m == 1 {
            return 0.0;
        }
        let i = rec.partition_point(|(s, _)| *s <= t).clamp(1, m - 1);
        let lo = i.saturating_sub(2).min(m.saturating_sub(4));
        let hi = (lo + 4).min(m);
        let mut acc = 0.0;
        for a in lo..hi {
            let mut w = 1.0;
            for b in lo..hi {
                if a != b {
                    w *= (t - rec[b].0) / (rec[a].0 - rec[b].0);
                }
            }
            if cache[a].is_none() {
                cache[a] = Some(self.spatial(a));
            }
            let v = cache[a].as_ref().unwrap();
            acc += w * Interpolator::new(grid, v, self.parity).eval(r);
        }
        acc
    }
}

/// Integrate `dPhi/dt = -W(Phi, t)`, `Phi_0 = id`, with classical RK4 using
/// `refine` substeps per recorded step. Returns `Phi` at every state time.
pub fn integrate_diffeo(trace: &FlowTrace, refine: usize) -> Result<Vec<RadialProfile>> {
    let g0 = &trace.states[0].g;
    let grid = g0.grid().clone();
    let hist = FieldHistory {
        trace,
        frozen: frozen_mask(&grid, g0.tip_regular()),
        parity: odd_if_tip(g0),
    };
    let mut cache = vec![None; trace.w_record.len()];
    let mut phi: Vec<f64> = grid.nodes().to_vec();
    let mut out = vec![RadialProfile::new(grid.clone(), phi.clone())?];
    let mut t = 0.0;
    let times: Vec<f64> = trace.w_record.iter().map(|r| r.0).collect();
    let mut next_state = 1;
    let rhs = |x: &[f64], t: f64, cache: &mut Vec<Option<Vec<f64>>>| -> Vec<f64> {
        x.iter().map(|&r| -hist.eval(r, t, cache)).collect()
    };
    for &t_next in times.iter().skip(1) {
        let dt = (t_next - t) / refine.max(1) as f64;
        for _ in 0..refine.max(1) {
            let k1 = rhs(&phi, t, &mut cache);
            let y2: Vec<f64> = phi.iter().zip(&k1).map(|(p, k)| p + 0.5 * dt * k).collect();
            let k2 = rhs(&y2, t + 0.5 * dt, &mut cache);
            let y3: Vec<f64> = phi.iter().zip(&k2).map(|(p, k)| p + 0.5 * dt * k).collect();
            let k3 = rhs(&y3, t + 0.5 * dt, &mut cache);
            let y4: Vec<f64> = phi.iter().zip(&k3).map(|(p, k)| p + dt * k).collect();
            let k4 = rhs(&y4, t + dt, &mut cache);
            for i in 0..phi.len() {
                phi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += dt;
        }
        t = t_next;
        if let Some(k) = phi.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Breakdown {
                t,
                node: k,
                reason: "Phi lost monotonicity".into(),
            });
        }
        while next_state < trace.states.len() && trace.states[next_state].t <= t {
            out.push(RadialProfile::new(grid.clone(), phi.clone())?);
            next_state += 1;
        }
        // drop cached fields that can no longer be reached
        let keep_from = times.partition_point(|&s| s < t).saturating_sub(3);
        for c in cache.iter_mut().take(keep_from) {
            *c = None;
        }
    }
    Ok(out)
}

/// Attach `Phi` to every state of the trace.
pub fn attach_diffeo(trace: &mut FlowTrace, refine: usize) -> Result<()> {
    let phis = integrate_diffeo(trace, refine)?;
    for (s, p) in trace.states.iter_mut().zip(phis) {
        s.phi = Some(p);
    }
    Ok(())
}

/// `Phi^* g` in radial components.
pub fn pullback_metric(g: &WarpedMetric, phi: &RadialProfile) -> Result<WarpedMetric> {
    if !same_grid(g.grid(), phi.grid()) {
        return Err(Error::Contract("Phi and g on different grids".into()));
    }
    let grid = g.grid();
    let tip = g.tip_regular() && grid.tip_symmetric();
    let lo = if tip { 0.0 } else { grid.r_min() };
    let tol = 1e-12 * grid.r_max();
    if let Some(k) = phi.values().iter().position(|&p| p < lo - tol || p > grid.r_max() + tol) {
        return Err(Error::Domain(format!(
            "Phi(r = {}) = {} leaves the grid range",
            grid.r(k),
            phi.values()[k]
        )));
    }
    let dphi = jets(grid, phi.values(), odd_if_tip(g));
    let (pa, pb) = if tip { (Parity::Even, Parity::Even) } else { (Parity::None, Parity::None) };
    let cart: Vec<f64> = if tip {
        g.b().values().iter().zip(grid.nodes()).map(|(b, r)| b / (r * r)).collect()
    } else {
        g.b().values().to_vec()
    };
    let ia = Interpolator::new(grid, g.a().values(), pa);
    let ib = Interpolator::new(grid, &cart, pb);
    let (a, b): (Vec<f64>, Vec<f64>) = phi
        .values()
        .iter()
        .zip(&dphi)
        .map(|(&p, j)| {
            let bv = if tip { p * p * ib.eval(p) } else { ib.eval(p) };
            (ia.eval(p) * j.d1 * j.d1, bv)
        })
        .unzip();
    g.with_profiles(a, b)
}

/// Sup-norm residuals of the pulled-back trace at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowResiduals {
    pub t: f64,
    /// `|d_t g~ + 2 Ric(g~)|` relative to `g~`.
    pub ricci: f64,
    /// `|d_t S~ - Delta S~ - 2 |Ric~|^2|`.
    pub scalar: f64,
}

/// Residuals of the Ricci flow and of the scalar evolution identity for
/// `Phi^* g(t)`, over the nodes whose image lies in `region`.
///
/// The metric residual is formed on the pulled-back metric. The scalar
/// identity involves four derivatives; it is formed on `g(t)` in the h-flow
/// frame, `d_t S - W S' - Delta S - 2|Ric|^2`, and composed with `Phi`,
/// which is the same function by naturality.
pub fn flow_residuals(g: &WarpedMetric, h: &WarpedMetric, phi: &RadialProfile, t: f64, region: Region) -> Result<FlowResiduals> {
    let n = g.dim();
    let n1 = n as f64 - 1.0;
    let grid = g.grid();
    let fiber = g.fiber_curvature();
    let tip = g.tip_regular();
    let axis = tip && grid.tip_symmetric();
    let even = if axis { Parity::Even } else { Parity::None };
    let gt = pullback_metric(g, phi)?;
    let rhs = hflow_rhs(g, h)?;
    let w = super::rhs::deturck_field(g, h)?;
    let wj = jets(grid, w.values(), odd_if_tip(g));
    let gj = metric_jets(g);
    let dj = coefficient_jets(grid, rhs.rr.values(), rhs.s.values(), tip);
    let st = linearized_scalar_jets(
        n,
        fiber,
        &gj,
        &dj.iter().map(|d| d.0).collect::<Vec<_>>(),
        &dj.iter().map(|d| d.1).collect::<Vec<_>>(),
    );
    let pcs: Vec<_> = gj.iter().map(|j| point_curvature(n, fiber, j)).collect();
    let s: Vec<f64> = pcs.iter().map(|p| p.scalar).collect();
    let sj = jets(grid, &s, even);
    let mut qa = Vec::with_capacity(grid.len());
    let mut qb = Vec::with_capacity(grid.len());
    let mut qs = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (a, b) = (gj[k].a, gj[k].b());
        let wk: Jet = wj[k];
        qa.push(rhs.rr.values()[k] - a.d1 * wk.v - 2.0 * a.v * wk.d1);
        let tb = rhs.s.values()[k] - b.d1 * wk.v;
        qb.push(if axis { tb / (grid.r(k) * grid.r(k)) } else { tb });
        let sv = sj[k];
        let lap = sv.d2 / a.v - a.d1 * sv.d1 / (2.0 * a.v * a.v) + n1 * b.d1 * sv.d1 / (2.0 * a.v * b.v);
        let ric2 = (pcs[k].ric_rr / a.v).powi(2) + n1 * (pcs[k].ric_s / b.v).powi(2);
        qs.push(st[k] - sv.d1 * wk.v - lap - 2.0 * ric2);
    }
    let (ia, ib, is) = (
        Interpolator::new(grid, &qa, even),
        Interpolator::new(grid, &qb, even),
        Interpolator::new(grid, &qs, even),
    );
    let dphi = jets(grid, phi.values(), odd_if_tip(g));
    let gtj = metric_jets(&gt);
    let mut ricci = 0.0f64;
    let mut scalar = 0.0f64;
    for k in 0..grid.len() {
        let p = phi.values()[k];
        if !region.contains(p) || !region.contains(grid.r(k)) {
            continue;
        }
        let pc = point_curvature(n, fiber, &gtj[k]);
        let (a, b) = (gtj[k].a.v, gtj[k].b().v);
        let dt_rr = dphi[k].d1.powi(2) * ia.eval(p);
        let dt_s = if axis { p * p * ib.eval(p) } else { ib.eval(p) };
        ricci = ricci
            .max(((dt_rr + 2.0 * pc.ric_rr) / a).abs())
            .max(((dt_s + 2.0 * pc.ric_s) / b).abs());
        scalar = scalar.max(is.eval(p).abs());
    }
    Ok(FlowResiduals { t, ricci, scalar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::hflow::{run_hflow, FlowConfig};
    use std::sync::Arc;

    fn pair(m: usize) -> (WarpedMetric, WarpedMetric) {
        let grid = Arc::new(RadialGrid::cell_centered(4.0, m).unwrap());
        let bump = |r: f64| (-r * r).exp();
        let g = WarpedMetric::new(
            3,
            RadialProfile::from_fn(grid.clone(), |r| 1.0 + 0.1 * bump(r) + 0.1 * r * r * bump(r)).unwrap(),
            RadialProfile::from_fn(grid.clone(), |r| r * r * (1.0 + 0.1 * bump(r))).unwrap(),
            true,
        )
        .unwrap();
        (g, WarpedMetric::euclidean(3, grid).unwrap())
    }

    #[test]
    fn identity_pullback_is_trivial() {
        let (g, _) = pair(80);
        let id = RadialProfile::from_fn(g.grid().clone(), |r| r).unwrap();
        let p = pullback_metric(&g, &id).unwrap();
        for k in 0..80 {
            assert!((p.a().values()[k] - g.a().values()[k]).abs() < 1e-12);
            assert!((p.b().values()[k] - g.b().values()[k]).abs() < 1e-12);
        }
        let bad = RadialProfile::from_fn(g.grid().clone(), |r| 2.0 * r).unwrap();
        assert!(pullback_metric(&g, &bad).is_err());
    }

    #[test]
    fn stationary_trace_keeps_identity() {
        let grid = Arc::new(RadialGrid::cell_centered(2.0, 40).unwrap());
        let e = WarpedMetric::euclidean(3, grid).unwrap();
        let cfg = FlowConfig { outputs: 4, ..FlowConfig::new(3, 1e-3) };
        let tr = run_hflow(&e, &e, &cfg).unwrap();
        for p in integrate_diffeo(&tr, 1).unwrap() {
            for (x, r) in p.values().iter().zip(e.grid().nodes()) {
                assert!((x - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diffeo_self_convergence_is_fourth_order() {
        let (g, h) = pair(100);
        let cfg = FlowConfig { outputs: 4, ..FlowConfig::new(3, 0.05) };
        let mut tr = run_hflow(&g, &h, &cfg).unwrap();
        // a coarse record of a prescribed field, so the ODE error is visible
        let field = |r: f64, t: f64| 0.8 * r * (-r * r).exp() * (1.0 + 3.0 * t);
        tr.w_record = (0..=5)
            .map(|k| {
                let t = 0.2 * k as f64;
                (t, g.grid().nodes().iter().map(|&r| field(r, t)).collect())
            })
            .collect();
        let mut end = tr.states[0].clone();
        end.t = 1.0;
        tr.states = vec![tr.states[0].clone(), end];
        let last = |k: usize| integrate_diffeo(&tr, k).unwrap();
        let d = |a: &[RadialProfile], b: &[RadialProfile]| {
            a.last().unwrap().values().iter().zip(b.last().unwrap().values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        let (p1, p2, p4) = (last(1), last(2), last(4));
        let (e1, e2) = (d(&p1, &p2), d(&p2, &p4));
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.6, "order {order} ({e1:e}, {e2:e})");
    }
}
