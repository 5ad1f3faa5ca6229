//! ADM mass, asymptotic-flatness decay checks and mass monitors along a flow.
//!
//! In Cartesian form `g_ij = a delta_ij + b xhat_i xhat_j` with
//! `a = B/r^2`, `b = A - a`, the flux integrand of the mass over the
//! coordinate sphere `S_r` reduces to
//! `m(r) = r^{n-1} (b/r - a') / 4`, normalized so that
//! `u = 1 + m/r^{n-2}` has mass `m`.

use serde::{Deserialize, Serialize};

use crate::curvature::point_curvature;
use crate::error::{Error, Result};
use crate::fit::{fit_through_origin, loglog_slope, LinearFit};
use crate::grid::RadialGrid;
use crate::hflow::{frozen_mask, metric_jets, FlowTrace, COLLAR, MONITOR_FRACTION};
use crate::metric::{ToWarped, WarpedMetric};
use crate::stencil::{jets, Parity};

/// Sampled Cartesian coefficients `(a, a', a'', b, b', b'')` at every node.
fn cartesian(g: &WarpedMetric) -> Vec<[f64; 6]> {
    let grid = g.grid();
    let r = grid.nodes();
    let a: Vec<f64> = g.b().values().iter().zip(r).map(|(b, r)| b / (r * r)).collect();
    let b: Vec<f64> = g.a().values().iter().zip(&a).map(|(x, y)| x - y).collect();
    let par = if g.tip_regular() && grid.tip_symmetric() {
        Parity::Even
    } else {
        Parity::None
    };
    let (ja, jb) = (jets(grid, &a, par), jets(grid, &b, par));
    ja.iter()
        .zip(&jb)
        .map(|(x, y)| [x.v, x.d1, x.d2, y.v, y.d1, y.d2])
        .collect()
}

/// Per-node mass integrand `m(r)`.
pub fn mass_integrand(g: &WarpedMetric) -> Vec<f64> {
    let nf = g.dim() as f64;
    cartesian(g)
        .iter()
        .zip(g.grid().nodes())
        .map(|(c, &r)| r.powf(nf - 1.0) * (c[3] / r - c[1]) / 4.0)
        .collect()
}

/// Last node that is clear of the frozen collar and one-sided stencils.
fn outer_index(grid: &RadialGrid) -> usize {
    grid.len().saturating_sub(COLLAR + 3)
}

/// Nodes nearest to `r_top / 2^k`, `k = 0..levels`.
fn halving_nodes(grid: &RadialGrid, levels: usize, top: usize) -> Result<Vec<usize>> {
    let r_top = grid.r(top);
    let mut idx = vec![top];
    for k in 1..levels {
        let target = r_top / 2f64.powi(k as i32);
        let i = grid.locate(target).min(top);
        let i = if i + 1 < grid.len() && (grid.r(i + 1) - target).abs() < (grid.r(i) - target).abs() {
            i + 1
        } else {
            i
        };
        if idx.contains(&i) || grid.r(i) <= grid.lower() {
            return Err(Error::Resolution("grid too coarse for the mass radii".into()));
        }
        idx.push(i);
    }
    idx.reverse();
    Ok(idx)
}

/// Polynomial extrapolation of `(x_k, y_k)` to `x = 0` (Neville).
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let m = xs.len();
    for lvl in 1..m {
        for i in 0..m - lvl {
            let (xi, xj) = (xs[i], xs[i + lvl]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub radii: Vec<f64>,
    pub integrand: Vec<f64>,
    pub extrapolated_mass: f64,
    /// Fitted decay exponent of `m(r) - m_inf`.
    pub convergence_order: f64,
    pub order_r2: f64,
    pub tau_fit: f64,
}

/// Decay exponent of `sigma = g - delta` over the outer decade.
fn tau_fit(g: &WarpedMetric) -> Result<(f64, [f64; 3])> {
    let grid = g.grid();
    let top = outer_index(grid);
    let r_top = grid.r(top);
    let c = cartesian(g);
    let idx: Vec<usize> = (0..=top).filter(|&k| grid.r(k) >= r_top / 10.0).collect();
    if idx.len() < 4 || r_top / 10.0 <= grid.lower() {
        return Err(Error::Resolution("fewer than four nodes in the outer decade".into()));
    }
    let rs: Vec<f64> = idx.iter().map(|&k| grid.r(k)).collect();
    let mut out = [f64::INFINITY; 3];
    for (s, slot) in out.iter_mut().enumerate() {
        let v: Vec<f64> = idx
            .iter()
            .map(|&k| {
                let (da, db) = if s == 0 { (c[k][0] - 1.0, c[k][3]) } else { (c[k][s], c[k][3 + s]) };
                da.abs().max(db.abs())
            })
            .collect();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(*x));
        if scale <= 1e-13 {
            continue;
        }
        if v.iter().any(|x| *x <= 1e-15 * scale) {
            // sign changes: bound the decay by the envelope at the window ends
            let (lo, hi) = (v[..v.len() / 4].iter().fold(0.0f64, |m, x| m.max(*x)), v[3 * v.len() / 4..].iter().fold(0.0f64, |m, x| m.max(*x)));
            let ratio = rs[rs.len() - 1] / rs[0];
            *slot = (lo / hi).ln() / ratio.ln() - s as f64;
            continue;
        }
        *slot = -loglog_slope(&rs, &v).slope - s as f64;
    }
    Ok((out[0].min(out[1]).min(out[2]), out))
}

pub fn adm_mass(g: &impl ToWarped) -> Result<MassReport> {
    let g = g.to_warped();
    let r = g.grid().r(outer_index(g.grid()));
    adm_mass_within(&g, r)
}

/// [`adm_mass`] using only radii `r <= r_top`.
pub fn adm_mass_within(g: &impl ToWarped, r_top: f64) -> Result<MassReport> {
    let g = g.to_warped();
    let top = (0..=outer_index(g.grid()))
        .rev()
        .find(|&k| g.grid().r(k) <= r_top)
        .ok_or_else(|| Error::Domain(format!("no node below r = {r_top}")))?;
    let n = g.dim() as f64;
    let (tau, _) = tau_fit(&g)?;
    if !(tau > 0.5 * (n - 2.0)) {
        return Err(Error::Domain(format!(
            "metric is not asymptotically flat: fitted tau = {tau:.3} <= (n-2)/2 = {}",
            0.5 * (n - 2.0)
        )));
    }
    let m = mass_integrand(&g);
    let idx = halving_nodes(g.grid(), 4, top)?;
    let radii: Vec<f64> = idx.iter().map(|&k| g.grid().r(k)).collect();
    let integrand: Vec<f64> = idx.iter().map(|&k| m[k]).collect();
    let xs: Vec<f64> = radii.iter().map(|r| 1.0 / r).collect();
    let extrapolated_mass = extrapolate_to_zero(&xs, &integrand);
    let dev: Vec<f64> = integrand.iter().map(|v| (v - extrapolated_mass).abs()).collect();
    let scale = integrand.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let (convergence_order, order_r2) = if dev.iter().all(|d| *d > 1e-12 * scale) {
        let f = loglog_slope(&radii, &dev);
        (-f.slope, f.r2)
    } else {
        (f64::INFINITY, 1.0)
    };
    Ok(MassReport {
        radii,
        integrand,
        extrapolated_mass,
        convergence_order,
        order_r2,
        tau_fit: tau,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfReport {
    pub tau_fit: f64,
    /// Decay exponents of `sigma`, `d sigma` (minus one), `d^2 sigma` (minus two).
    pub tau_by_order: [f64; 3],
    /// Scalar decay exponent; infinite when `S` vanishes on the window.
    pub q_fit: f64,
    pub sup_scalar: f64,
    pub tau_ok: bool,
    /// `n < q <= n + 2`, or `S` vanishes identically.
    pub q_ok: bool,
    pub scalar_vanishes: bool,
    pub tau_matches_expected: bool,
    pub q_matches_expected: bool,
}

pub fn verify_af_decay(g: &impl ToWarped, tau_expected: f64, q_expected: f64) -> Result<AfReport> {
    let g = g.to_warped();
    let n = g.dim() as f64;
    let (tau, by) = tau_fit(&g)?;
    let grid = g.grid();
    let top = outer_index(grid);
    let r_top = grid.r(top);
    let jets = g.jets();
    let idx: Vec<usize> = (0..=top).filter(|&k| grid.r(k) >= r_top / 10.0).collect();
    let s: Vec<f64> = idx
        .iter()
        .map(|&k| point_curvature(g.dim(), g.fiber_curvature(), &jets[k]).scalar.abs())
        .collect();
    let sup_scalar = s.iter().fold(0.0f64, |m, v| m.max(*v));
    let scalar_vanishes = sup_scalar < 1e-9;
    let q_fit = if scalar_vanishes || s.iter().any(|v| *v == 0.0) {
        f64::INFINITY
    } else {
        let rs: Vec<f64> = idx.iter().map(|&k| grid.r(k)).collect();
        -loglog_slope(&rs, &s).slope
    };
    let close = |fit: f64, want: f64| (fit.is_infinite() && want.is_infinite()) || (fit - want).abs() <= 0.1 * want.abs().max(1.0);
    Ok(AfReport {
        tau_fit: tau,
        tau_by_order: by,
        q_fit,
        sup_scalar,
        tau_ok: tau > 0.5 * (n - 2.0),
        q_ok: scalar_vanishes || (q_fit > n && q_fit <= n + 2.0 + 0.1),
        scalar_vanishes,
        tau_matches_expected: close(tau, tau_expected) || (tau.is_infinite() && tau_expected >= 0.5 * (n - 2.0)),
        q_matches_expected: scalar_vanishes || close(q_fit, q_expected),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSeries {
    pub times: Vec<f64>,
    pub masses: Vec<f64>,
    pub max_relative_drift: f64,
}

pub fn mass_drift(trace: &FlowTrace) -> Result<MassSeries> {
    let mut masses = Vec::with_capacity(trace.states.len());
    let r_top = MONITOR_FRACTION * trace.states[0].g.grid().r_max();
    for s in &trace.states {
        let m = adm_mass_within(&s.g, r_top)?;
        masses.push(m.extrapolated_mass);
    }
    let m0 = masses[0];
    let max_relative_drift = if m0.abs() > 1e-12 {
        masses.iter().map(|m| (m - m0).abs() / m0.abs()).fold(0.0, f64::max)
    } else {
        masses.iter().map(|m| m.abs()).fold(0.0, f64::max)
    };
    Ok(MassSeries {
        times: trace.times(),
        masses,
        max_relative_drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarDecaySeries {
    pub q: f64,
    pub times: Vec<f64>,
    /// `sup (1 + r)^q |S|` over the outer region at each time.
    pub series: Vec<f64>,
    /// Largest ratio to the initial value.
    pub growth: f64,
    pub bounded: bool,
}

/// `sup (1 + r)^q |S(t)|` over the monitored region, for every state of the trace.
pub fn monitor_scalar_decay(trace: &FlowTrace, q: f64) -> Result<ScalarDecaySeries> {
    let grid = trace.states[0].g.grid().clone();
    let mask = frozen_mask(&grid, trace.states[0].g.tip_regular());
    let r_mon = MONITOR_FRACTION * grid.r_max();
    let mut series = Vec::with_capacity(trace.states.len());
    for s in &trace.states {
        let j = metric_jets(&s.g);
        let v = (0..grid.len())
            .filter(|&k| !mask[k] && grid.r(k) <= r_mon)
            .map(|k| (1.0 + grid.r(k)).powf(q) * point_curvature(s.g.dim(), s.g.fiber_curvature(), &j[k]).scalar.abs())
            .fold(0.0, f64::max);
        series.push(v);
    }
    let s0 = series[0];
    let peak = series.iter().fold(0.0f64, |m, v| m.max(*v));
    let growth = if s0 > 0.0 { peak / s0 } else if peak == 0.0 { 1.0 } else { f64::INFINITY };
    Ok(ScalarDecaySeries {
        q,
        times: trace.times(),
        series,
        growth,
        bounded: growth.is_finite() && growth <= 4.0,
    })
}

/// Fit `m = slope * a` through the origin and report `R^2`.
pub fn mass_linearity(params: &[f64], masses: &[f64]) -> LinearFit {
    let pts: Vec<(f64, f64)> = params.iter().copied().zip(masses.iter().copied()).collect();
    fit_through_origin(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{make_cone, ConeSpec};
    use crate::grid::RadialProfile;
    use crate::metric::ConformalMetric;
    use std::sync::Arc;

    fn harmonic(n: usize, m: f64, grid: Arc<RadialGrid>) -> ConformalMetric {
        let k = n as f64 - 2.0;
        let u = RadialProfile::from_fn(grid.clone(), |r| 1.0 + m / r.powf(k)).unwrap();
        let du = grid.nodes().iter().map(|r| -k * m / r.powf(k + 1.0)).collect();
        let d2u = grid.nodes().iter().map(|r| k * (k + 1.0) * m / r.powf(k + 2.0)).collect();
        ConformalMetric::new(n, u).unwrap().with_derivatives(du, d2u).unwrap()
    }

    #[test]
    fn flat_has_zero_mass() {
        let grid = Arc::new(RadialGrid::uniform(1.0, 50.0, 400).unwrap());
        let e = WarpedMetric::euclidean(3, grid).unwrap();
        assert!(adm_mass(&e).unwrap().extrapolated_mass.abs() < 1e-8);
    }

    #[test]
    fn harmonic_factor_mass_is_its_coefficient() {
        let grid = Arc::new(RadialGrid::geometric(1.0, 1000.0, 600).unwrap());
        for n in [3, 4, 5] {
            for m in [0.3, 1.0, -0.2] {
                let rep = adm_mass(&harmonic(n, m, grid.clone())).unwrap();
                assert!((rep.extrapolated_mass - m).abs() < 1e-3 * m.abs(), "n {n} m {m}: {}", rep.extrapolated_mass);
            }
        }
    }

    #[test]
    fn mass_is_additive_in_the_coefficient() {
        let grid = Arc::new(RadialGrid::geometric(1.0, 1000.0, 600).unwrap());
        let m = |a: f64| adm_mass(&harmonic(3, a, grid.clone())).unwrap().extrapolated_mass;
        assert!((m(0.5) - m(0.2) - m(0.3)).abs() < 1e-3);
    }

    #[test]
    fn cone_is_refused() {
        let grid = Arc::new(RadialGrid::uniform(1.0, 50.0, 400).unwrap());
        let c = make_cone(&ConeSpec::new(3, 0.5, 1.0).unwrap(), grid).unwrap();
        assert!(matches!(adm_mass(&c), Err(Error::Domain(_))));
        let rep = verify_af_decay(&c, 1.0, f64::INFINITY).unwrap();
        assert!(!rep.tau_ok);
    }

    #[test]
    fn harmonic_decay_rates() {
        let grid = Arc::new(RadialGrid::geometric(1.0, 1000.0, 600).unwrap());
        let rep = verify_af_decay(&harmonic(3, 1.0, grid), 1.0, f64::INFINITY).unwrap();
        assert!((rep.tau_fit - 1.0).abs() < 0.1, "{}", rep.tau_fit);
        assert!(rep.tau_ok && rep.q_ok && rep.scalar_vanishes);
    }

    #[test]
    fn extrapolation_is_exact_on_polynomials() {
        let xs = [0.1, 0.2, 0.4, 0.8];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x - x * x + 0.5 * x * x * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
