//! Method-of-lines integration of the reduced h-flow.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rhs::{background_jets, coefficient_jets, deturck_point, hflow_point};
use crate::error::{Error, Result};
use crate::grid::{same_grid, RadialGrid, RadialProfile};
use crate::metric::{MetricJet, WarpedMetric};

/// Nodes held fixed at each end that is not a regular axis.
pub const COLLAR: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub t_final: f64,
    /// Fraction of the parabolic step limit.
    pub cfl: f64,
    /// Sobolev exponent; `delta = n / p`.
    pub p: f64,
    /// Scalar curvature lower bound outside the singular set.
    pub sigma: f64,
    pub closeness_eps: f64,
    /// Number of output times on the geometric schedule.
    pub outputs: usize,
    /// First output time as a fraction of `t_final`.
    pub first_output: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Weight exponent `q` of the monitored `sup (1 + r)^q |S|`.
    pub decay_q: f64,
}

impl FlowConfig {
    pub fn new(dim: usize, t_final: f64) -> Self {
        Self {
            t_final,
            cfl: 0.25,
            p: 2.0 * dim as f64,
            sigma: 0.0,
            closeness_eps: 0.25,
            outputs: 16,
            first_output: 1e-3,
            rtol: 1e-7,
            atol: 1e-9,
            max_steps: 200_000,
            decay_q: dim as f64,
        }
    }

    pub fn delta(&self, dim: usize) -> f64 {
        dim as f64 / self.p
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.t_final > 0.0) {
            return Err(Error::Domain(format!("T = {} must be positive", self.t_final)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::Domain(format!("cfl = {} outside (0, 0.5]", self.cfl)));
        }
        if !(self.p > dim as f64) {
            return Err(Error::Domain(format!("p = {} must exceed n = {dim}", self.p)));
        }
        if !(self.closeness_eps > 0.0) || self.outputs < 2 || !(self.first_output > 0.0 && self.first_output < 1.0) {
            return Err(Error::Domain("invalid closeness or output schedule".into()));
        }
        Ok(())
    }

    /// Geometric output times accumulating at zero, ending at `t_final`.
    pub fn schedule(&self) -> Vec<f64> {
        let t0 = self.first_output * self.t_final;
        let k = self.outputs - 1;
        (0..=k)
            .map(|i| {
                if i == k {
                    self.t_final
                } else {
                    t0 * (self.t_final / t0).powf(i as f64 / k as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub g: WarpedMetric,
    pub h: Arc<WarpedMetric>,
    /// Radial DeTurck field at `t`.
    pub w: RadialProfile,
    /// Radial diffeomorphism `Phi_t`, once integrated.
    pub phi: Option<RadialProfile>,
}

impl FlowState {
    pub fn new(g: WarpedMetric, h: Arc<WarpedMetric>) -> Result<Self> {
        let w = super::rhs::deturck_field(&g, &h)?;
        Ok(Self { t: 0.0, g, h, w, phi: None })
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub states: Vec<FlowState>,
    /// `(t, W)` at every accepted step, for the diffeomorphism ODE.
    pub w_record: Vec<(f64, Vec<f64>)>,
    pub steps: usize,
    pub rejected: usize,
    /// Reason the run stopped before `T`, if it did.
    pub truncated: Option<String>,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trace holds the initial state")
    }
}

/// Which nodes the boundary policy holds fixed.
pub fn frozen_mask(grid: &RadialGrid, tip: bool) -> Vec<bool> {
    let m = grid.len();
    let axis = tip && grid.tip_symmetric();
    (0..m).map(|k| k + COLLAR >= m || (!axis && k < COLLAR)).collect()
}

/// Everything the right side needs besides the evolving coefficients.
pub(crate) struct FlowSystem {
    pub n: usize,
    pub fiber: f64,
    pub grid: Arc<RadialGrid>,
    pub hj: Vec<MetricJet>,
    pub tip: bool,
    pub frozen: Vec<bool>,
}

impl FlowSystem {
    pub fn new(g: &WarpedMetric, h: &WarpedMetric) -> Result<Self> {
        if !same_grid(g.grid(), h.grid()) || g.dim() != h.dim() {
            return Err(Error::Contract("g and h must share grid and dimension".into()));
        }
        Ok(Self {
            n: g.dim(),
            fiber: g.fiber_curvature(),
            grid: g.grid().clone(),
            hj: background_jets(h),
            tip: g.tip_regular(),
            frozen: frozen_mask(g.grid(), g.tip_regular()),
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    /// `y = [A; B]`, returns `dy/dt`.
    pub fn rhs(&self, y: &[f64]) -> Vec<f64> {
        let m = self.len();
        let (a, b) = y.split_at(m);
        let jets = coefficient_jets(&self.grid, a, b, self.tip);
        let mut out = vec![0.0; 2 * m];
        for k in 0..m {
            if self.frozen[k] {
                continue;
            }
            let (ja, jb) = jets[k];
            let (rr, s) = hflow_point(self.n, self.fiber, &self.hj[k], ja, jb);
            out[k] = rr;
            out[m + k] = s;
        }
        out
    }

    pub fn deturck(&self, y: &[f64]) -> Vec<f64> {
        let m = self.len();
        let (a, b) = y.split_at(m);
        coefficient_jets(&self.grid, a, b, self.tip)
            .iter()
            .zip(&self.hj)
            .map(|(&(ja, jb), hj)| deturck_point(self.n, hj, ja, jb))
            .collect()
    }

    /// Parabolic step limit `cfl / max(1/(A h^2) + (n-1)/B)`, the largest
    /// diffusion rate of `g^{-1}` over the local spacing.
    pub fn step_limit(&self, y: &[f64], cfl: f64) -> f64 {
        let m = self.len();
        let nodes = self.grid.nodes();
        let mut rate = 0.0f64;
        for k in 0..m {
            if self.frozen[k] {
                continue;
            }
            let hk = if k + 1 < m { nodes[k + 1] - nodes[k] } else { nodes[k] - nodes[k - 1] };
            let hk = if k > 0 { hk.min(nodes[k] - nodes[k - 1]) } else { hk };
            rate = rate.max(1.0 / (y[k] * hk * hk) + (self.n as f64 - 1.0) / y[m + k]);
        }
        cfl / rate
    }

    pub fn check(&self, y: &[f64], t: f64) -> Result<()> {
        let m = self.len();
        for (i, v) in y.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                let (node, what) = if i < m { (i, "A") } else { (i - m, "B") };
                return Err(Error::Breakdown {
                    t,
                    node,
                    reason: format!("{what} = {v} at r = {}", self.grid.r(node)),
                });
            }
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: new state and the embedded error estimate.
pub(crate) fn dp_step(f: impl Fn(&[f64]) -> Vec<f64>, y: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(C[6], 1.0);
    let m = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let ys: Vec<f64> = (0..m)
            .map(|i| y[i] + dt * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
            .collect();
        k.push(f(&ys));
    }
    let ynew: Vec<f64> = (0..m).map(|i| y[i] + dt * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>()).collect();
    let err: Vec<f64> = (0..m)
        .map(|i| dt * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>())
        .collect();
    (ynew, err)
}

fn pack(g: &WarpedMetric) -> Vec<f64> {
    let mut y = g.a().values().to_vec();
    y.extend_from_slice(g.b().values());
    y
}

fn unpack(template: &WarpedMetric, y: &[f64]) -> Result<WarpedMetric> {
    let m = template.grid().len();
    template.with_profiles(y[..m].to_vec(), y[m..].to_vec())
}

/// Advance by exactly `dt` with one Dormand–Prince step.
pub fn step_flow(state: &FlowState, dt: f64, cfg: &FlowConfig) -> Result<FlowState> {
    let sys = FlowSystem::new(&state.g, &state.h)?;
    let y = pack(&state.g);
    let limit = sys.step_limit(&y, cfg.cfl);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    let (ynew, _) = dp_step(|v| sys.rhs(v), &y, dt);
    sys.check(&ynew, state.t + dt)?;
    let g = unpack(&state.g, &ynew)?;
    let w = RadialProfile::new(sys.grid.clone(), sys.deturck(&ynew))?;
    Ok(FlowState {
        t: state.t + dt,
        g,
        h: state.h.clone(),
        w,
        phi: None,
    })
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], cfg: &FlowConfig) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e.abs() / ((cfg.atol + cfg.rtol) * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

/// Integrate the h-flow from `g0` against `h` to `cfg.t_final`.
pub fn run_hflow(g0: &WarpedMetric, h: &WarpedMetric, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate(g0.dim())?;
    let close = g0.closeness(h)?;
    if close > 1.0 + cfg.closeness_eps {
        return Err(Error::Precondition(format!(
            "g0 is only {close:.4}-close to h; need {}",
            1.0 + cfg.closeness_eps
        )));
    }
    let h = Arc::new(h.clone());
    let sys = FlowSystem::new(g0, &h)?;
    let mut y = pack(g0);
    let mut t = 0.0;
    let w0 = sys.deturck(&y);
    let mut trace = FlowTrace {
        states: vec![FlowState {
            t,
            g: g0.clone(),
            h: h.clone(),
            w: RadialProfile::new(sys.grid.clone(), w0.clone())?,
            phi: None,
        }],
        w_record: vec![(0.0, w0)],
        steps: 0,
        rejected: 0,
        truncated: None,
    };
    let bound = 1.0 + 2.0 * cfg.closeness_eps;
    let mut dt = sys.step_limit(&y, cfg.cfl) * 0.1;
    for target in cfg.schedule() {
        while t < target {
            if trace.steps >= cfg.max_steps {
                trace.truncated = Some(format!("step budget {} exhausted at t = {t:.6e}", cfg.max_steps));
                return Ok(trace);
            }
            let limit = sys.step_limit(&y, cfg.cfl);
            let last = target - t <= dt.min(limit) * (1.0 + 1e-12);
            let h_try = if last { target - t } else { dt.min(limit) };
            let (ynew, err) = dp_step(|v| sys.rhs(v), &y, h_try);
            let e = error_norm(&err, &y, &ynew, cfg);
            if !(e <= 1.0) || sys.check(&ynew, t + h_try).is_err() {
                trace.rejected += 1;
                dt = h_try * if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                if dt < 1e-14 * target.max(1e-300) {
                    sys.check(&ynew, t + h_try)?;
                    return Err(Error::Breakdown {
                        t,
                        node: 0,
                        reason: "step size underflow".into(),
                    });
                }
                continue;
            }
            t = if last { target } else { t + h_try };
            y = ynew;
            trace.steps += 1;
            trace.w_record.push((t, sys.deturck(&y)));
            let grow = if e > 0.0 { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
            if !last {
                dt = h_try * grow;
            }
        }
        let g = unpack(g0, &y)?;
        let ratio = g.closeness(&h)?;
        let w = RadialProfile::new(sys.grid.clone(), trace.w_record.last().unwrap().1.clone())?;
        trace.states.push(FlowState {
            t,
            g,
            h: h.clone(),
            w,
            phi: None,
        });
        if ratio > bound {
            trace.truncated = Some(format!("closeness {ratio:.4} exceeds {bound:.4} at t = {t:.6e}"));
            return Ok(trace);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_assembly;

    fn bump(r: f64) -> f64 {
        (-r * r).exp()
    }

    fn smooth_pair(m: usize) -> (WarpedMetric, WarpedMetric) {
        let grid = Arc::new(RadialGrid::cell_centered(4.0, m).unwrap());
        let mk = |fa: &dyn Fn(f64) -> f64, fb: &dyn Fn(f64) -> f64| {
            WarpedMetric::new(
                3,
                RadialProfile::from_fn(grid.clone(), fa).unwrap(),
                RadialProfile::from_fn(grid.clone(), fb).unwrap(),
                true,
            )
            .unwrap()
        };
        let g = mk(&|r| 1.0 + 0.1 * bump(r) + 0.1 * r * r * bump(r), &|r| r * r * (1.0 + 0.1 * bump(r)));
        let h = WarpedMetric::euclidean(3, grid.clone()).unwrap();
        (g, h)
    }

    #[test]
    fn schedule_is_geometric_and_ends_at_t() {
        let cfg = FlowConfig::new(3, 0.5);
        let s = cfg.schedule();
        assert_eq!(s.len(), 16);
        assert_eq!(*s.last().unwrap(), 0.5);
        assert!((s[0] - 5e-4).abs() < 1e-15);
        let q = s[1] / s[0];
        assert!((s[2] / s[1] - q).abs() < 1e-12);
        assert!(FlowConfig { p: 2.0, ..cfg }.validate(3).is_err());
    }

    #[test]
    fn flat_is_stationary() {
        let grid = Arc::new(RadialGrid::cell_centered(2.0, 64).unwrap());
        let e = WarpedMetric::euclidean(3, grid).unwrap();
        let cfg = FlowConfig::new(3, 0.01);
        let s = FlowState::new(e.clone(), Arc::new(e.clone())).unwrap();
        let dt = 0.5 * FlowSystem::new(&e, &e).unwrap().step_limit(&pack(&e), cfg.cfl);
        let s1 = step_flow(&s, dt, &cfg).unwrap();
        for (x, y) in s1.g.b().values().iter().zip(e.b().values()) {
            assert!((x - y).abs() < 1e-12 * y.max(1.0));
        }
        assert!(matches!(step_flow(&s, 1.0, &cfg), Err(Error::Cfl { .. })));
    }

    #[test]
    fn one_step_from_background_follows_ricci() {
        let grid = Arc::new(RadialGrid::uniform(0.5, 1.5, 200).unwrap());
        let h = WarpedMetric::new(
            3,
            RadialProfile::constant(grid.clone(), 1.0),
            RadialProfile::from_fn(grid.clone(), |r| r.sin().powi(2)).unwrap(),
            false,
        )
        .unwrap();
        let ric = curvature_assembly(&h).unwrap().ricci;
        let cfg = FlowConfig::new(3, 1.0);
        let s = FlowState::new(h.clone(), Arc::new(h.clone())).unwrap();
        let mut prev = f64::MAX;
        for dt in [2e-6, 1e-6] {
            let s1 = step_flow(&s, dt, &cfg).unwrap();
            let mut worst = 0.0f64;
            for k in 3 * COLLAR..grid.len() - 3 * COLLAR {
                let want = h.b().values()[k] - 2.0 * dt * ric.s.values()[k];
                worst = worst.max((s1.g.b().values()[k] - want).abs());
            }
            assert!(worst < 1e-9, "{worst}");
            assert!(worst < prev);
            prev = worst;
        }
    }

    #[test]
    fn smooth_bump_flows_to_t() {
        let (g, h) = smooth_pair(120);
        let cfg = FlowConfig {
            outputs: 6,
            ..FlowConfig::new(3, 0.05)
        };
        let tr = run_hflow(&g, &h, &cfg).unwrap();
        assert!(tr.truncated.is_none(), "{:?}", tr.truncated);
        assert_eq!(tr.states.len(), 7);
        assert!((tr.last().t - 0.05).abs() < 1e-15);
        let frozen = frozen_mask(g.grid(), true);
        for (k, f) in frozen.iter().enumerate() {
            if *f {
                assert_eq!(tr.last().g.a().values()[k], g.a().values()[k]);
            }
        }
        assert!(!frozen[0]);
    }
}
