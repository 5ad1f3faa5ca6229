//! Conformal checks on tori `T^n` with metrics `A(x) dx^2 + B(x) g_flat`
//! depending on one periodic coordinate.
//!
//! Derivatives are spectral. The flat factor `T^{n-1}` has unit volume.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::curvature::{linearized_scalar_jets, point_curvature};
use crate::error::{Error, Result};
use crate::fit::{loglog_slope, LinearFit};
use crate::metric::{conformal_a, conformal_p, MetricJet};
use crate::stencil::Jet;

/// Samples of a function on `[0, L)` at `x_k = k L / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    period: f64,
    values: Vec<f64>,
}

impl PeriodicProfile {
    pub fn new(period: f64, values: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Domain(format!("period {period} must be positive")));
        }
        if values.len() < 4 {
            return Err(Error::Resolution("a periodic profile needs at least four samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite sample".into()));
        }
        Ok(Self { period, values })
    }

    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = period / n as f64;
        Self::new(period, (0..n).map(|k| f(k as f64 * h)).collect())
    }

    pub fn constant(period: f64, n: usize, c: f64) -> Result<Self> {
        Self::new(period, vec![c; n])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.period / self.len() as f64;
        (0..self.len()).map(|k| k as f64 * h).collect()
    }

    fn compatible(&self, other: &PeriodicProfile) -> bool {
        self.len() == other.len() && self.period == other.period
    }
}

/// Cached transforms for spectral differentiation on one grid.
struct Spectral {
    n: usize,
    omega: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let omega = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * std::f64::consts::PI * m / period
            })
            .collect();
        Self {
            n,
            omega,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex<f64>> {
        let mut c: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fwd.process(&mut c);
        c
    }

    fn inverse(&self, mut c: Vec<Complex<f64>>) -> Vec<f64> {
        self.inv.process(&mut c);
        let s = 1.0 / self.n as f64;
        c.into_iter().map(|z| z.re * s).collect()
    }

    fn nyquist(&self, j: usize) -> bool {
        self.n % 2 == 0 && j == self.n / 2
    }

    /// Multiply every mode by `f(omega)`; the unpaired Nyquist mode is
    /// treated as real-even.
    fn apply(&self, v: &[f64], f: impl Fn(f64) -> Complex<f64>) -> Vec<f64> {
        let c = self.forward(v);
        let c = c
            .into_iter()
            .enumerate()
            .map(|(j, z)| {
                let m = f(self.omega[j]);
                if self.nyquist(j) {
                    z * m.re
                } else {
                    z * m
                }
            })
            .collect();
        self.inverse(c)
    }

    fn d1(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v, |w| Complex::new(0.0, w))
    }

    fn d2(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v, |w| Complex::new(-w * w, 0.0))
    }

    fn jets(&self, v: &[f64]) -> Vec<Jet> {
        let (d1, d2) = (self.d1(v), self.d2(v));
        (0..v.len()).map(|k| Jet::new(v[k], d1[k], d2[k])).collect()
    }
}

/// Spectral first and second derivatives of a periodic profile.
pub fn spectral_derivatives(f: &PeriodicProfile) -> (Vec<f64>, Vec<f64>) {
    let s = Spectral::new(f.len(), f.period());
    (s.d1(f.values()), s.d2(f.values()))
}

/// `A(x) dx^2 + B(x) g_flat` on `T^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicMetric {
    dim: usize,
    a: PeriodicProfile,
    b: PeriodicProfile,
}

impl PeriodicMetric {
    pub fn new(dim: usize, a: PeriodicProfile, b: PeriodicProfile) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Domain(format!("dimension {dim} < 3")));
        }
        if !a.compatible(&b) {
            return Err(Error::Contract("A and B sampled differently".into()));
        }
        if a.values().iter().chain(b.values()).any(|&v| v <= 0.0) {
            return Err(Error::Domain("metric coefficients must be positive".into()));
        }
        Ok(Self { dim, a, b })
    }

    pub fn flat(dim: usize, period: f64, n: usize) -> Result<Self> {
        Self::new(dim, PeriodicProfile::constant(period, n, 1.0)?, PeriodicProfile::constant(period, n, 1.0)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &PeriodicProfile {
        &self.a
    }

    pub fn b(&self) -> &PeriodicProfile {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.a.period()
    }

    fn spectral(&self) -> Spectral {
        Spectral::new(self.len(), self.period())
    }

    /// `c^2 g`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let c2 = c * c;
        let s = |p: &PeriodicProfile| PeriodicProfile::new(p.period(), p.values().iter().map(|v| v * c2).collect());
        Self::new(self.dim, s(&self.a)?, s(&self.b)?)
    }

    /// `w^{4/(n-2)} g`.
    pub fn conformal(&self, w: &PeriodicProfile) -> Result<Self> {
        if !w.compatible(&self.a) {
            return Err(Error::Contract("conformal factor sampled differently".into()));
        }
        let k = 4.0 / (self.dim as f64 - 2.0);
        let s = |p: &PeriodicProfile| {
            PeriodicProfile::new(p.period(), p.values().iter().zip(w.values()).map(|(v, w)| v * w.powf(k)).collect())
        };
        Self::new(self.dim, s(&self.a)?, s(&self.b)?)
    }

    fn jets_with(&self, sp: &Spectral) -> Vec<MetricJet> {
        let ja = sp.jets(self.a.values());
        let jb = sp.jets(self.b.values());
        ja.into_iter().zip(jb).map(|(a, b)| MetricJet { a, phi: b.sqrt() }).collect()
    }

    pub fn jets(&self) -> Vec<MetricJet> {
        self.jets_with(&self.spectral())
    }

    /// `sqrt(A) B^{(n-1)/2}`.
    pub fn density(&self) -> Vec<f64> {
        let e = 0.5 * (self.dim as f64 - 1.0);
        self.a.values().iter().zip(self.b.values()).map(|(a, b)| a.sqrt() * b.powf(e)).collect()
    }

    /// `int f dv`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let h = self.period() / self.len() as f64;
        h * self.density().iter().zip(f).map(|(r, f)| r * f).sum::<f64>()
    }

    pub fn volume(&self) -> f64 {
        self.integrate(&vec![1.0; self.len()])
    }

    pub fn scalar(&self) -> Vec<f64> {
        self.jets().iter().map(|j| point_curvature(self.dim, 0.0, j).scalar).collect()
    }

    /// Components `(T_xx, T_s)` of the traceless Ricci tensor.
    pub fn traceless_ricci(&self) -> (Vec<f64>, Vec<f64>) {
        let nf = self.dim as f64;
        self.jets()
            .iter()
            .map(|j| {
                let pc = point_curvature(self.dim, 0.0, j);
                let b = j.phi.v * j.phi.v;
                (pc.ric_rr - pc.scalar / nf * j.a.v, pc.ric_s - pc.scalar / nf * b)
            })
            .unzip()
    }

    /// `Delta_g u` for `u = u(x)`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.laplacian_with(&self.spectral(), &self.density(), u)
    }

    fn laplacian_with(&self, sp: &Spectral, rho: &[f64], u: &[f64]) -> Vec<f64> {
        let du = sp.d1(u);
        let flux: Vec<f64> = du.iter().zip(rho).zip(self.a.values()).map(|((d, r), a)| r * d / a).collect();
        sp.d1(&flux).iter().zip(rho).map(|(f, r)| f / r).collect()
    }

    /// First variation of `S` in the direction `(h_xx, h_s)`.
    pub fn linearized_scalar(&self, hxx: &[f64], hs: &[f64]) -> Vec<f64> {
        let sp = self.spectral();
        linearized_scalar_jets(self.dim, 0.0, &self.jets_with(&sp), &sp.jets(hxx), &sp.jets(hs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YamabeSolution {
    pub u: PeriodicProfile,
    /// Coefficient in `-a lap u + S u = lambda V^{-2/n} u^{p-1}`.
    pub lambda: f64,
    /// Minimum of the normalized energy; scale invariant.
    pub yamabe_constant: f64,
    pub volume: f64,
    pub functional_history: Vec<f64>,
    pub normalization_residual: f64,
    /// `sup |-a lap u + S u - lambda V^{-2/n} u^{p-1}|`.
    pub el_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YamabeOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl YamabeOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_iterations: 20_000,
            armijo: 1e-4,
        }
    }
}

struct Problem<'a> {
    g: &'a PeriodicMetric,
    sp: Spectral,
    rho: Vec<f64>,
    s: Vec<f64>,
    a: f64,
    p: f64,
    h: f64,
}

impl Problem<'_> {
    fn integrate(&self, f: &[f64]) -> f64 {
        self.h * self.rho.iter().zip(f).map(|(r, f)| r * f).sum::<f64>()
    }

    fn normalize(&self, u: &[f64]) -> Vec<f64> {
        let up: Vec<f64> = u.iter().map(|u| u.powf(self.p)).collect();
        let c = self.integrate(&up).powf(-1.0 / self.p);
        u.iter().map(|u| u * c).collect()
    }

    fn operator(&self, u: &[f64]) -> Vec<f64> {
        let lap = self.g.laplacian_with(&self.sp, &self.rho, u);
        lap.iter().zip(u).zip(&self.s).map(|((l, u), s)| -self.a * l + s * u).collect()
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let du = self.sp.d1(u);
        let f: Vec<f64> = (0..u.len())
            .map(|k| self.a * du[k] * du[k] / self.g.a.values()[k] + self.s[k] * u[k] * u[k])
            .collect();
        self.integrate(&f)
    }

    /// Normalized `u - tau d` and its energy change, evaluated without
    /// cancellation from the quadratic expansion of the energy.
    fn trial(&self, u: &[f64], d: &[f64], tau: f64, e: f64, lu_d: f64, ld_d: f64) -> Option<(f64, Vec<f64>)> {
        let mut inc = Vec::with_capacity(u.len());
        for (u, d) in u.iter().zip(d) {
            let q = -tau * d / u;
            if q <= -1.0 {
                return None;
            }
            inc.push(u.powf(self.p) * (self.p * q.ln_1p()).exp_m1());
        }
        let i = self.integrate(&inc);
        if i <= -1.0 {
            return None;
        }
        let c1 = ((2.0 / self.p) * i.ln_1p()).exp_m1();
        let delta = -2.0 * tau * lu_d + tau * tau * ld_d;
        let scale = (1.0 + i).powf(-1.0 / self.p);
        let v = u.iter().zip(d).map(|(u, d)| (u - tau * d) * scale).collect();
        Some(((delta - e * c1) / (1.0 + c1), v))
    }

    /// `L u - E u^{p-1}` for normalized `u`.
    fn residual(&self, u: &[f64], e: f64) -> Vec<f64> {
        self.operator(u).iter().zip(u).map(|(l, u)| l - e * u.powf(self.p - 1.0)).collect()
    }
}

/// Minimize `int (a |grad u|^2 + S u^2) dv` subject to `int u^p dv = 1`.
pub fn solve_yamabe(g: &PeriodicMetric, tol: f64) -> Result<YamabeSolution> {
    solve_yamabe_with(g, &YamabeOptions::new(tol))
}

pub fn solve_yamabe_with(g: &PeriodicMetric, opts: &YamabeOptions) -> Result<YamabeSolution> {
    let n = g.dim();
    let sp = g.spectral();
    let rho = g.density();
    let s = g.scalar();
    let pb = Problem {
        g,
        sp,
        rho,
        s,
        a: conformal_a(n),
        p: conformal_p(n),
        h: g.period() / g.len() as f64,
    };
    let volume = g.volume();
    let a_mean = g.a.values().iter().sum::<f64>() / g.len() as f64;
    let mut u = pb.normalize(&vec![1.0; g.len()]);
    let mut e = pb.energy(&u);
    let mut history = vec![e];
    let mut tau = 1.0f64;
    let mut iterations = 0;
    loop {
        let r = pb.residual(&u, e);
        let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res < opts.tol {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: res });
        }
        iterations += 1;
        let weighted: Vec<f64> = r.iter().zip(&pb.rho).map(|(r, w)| r * w).collect();
        let d = pb.sp.apply(&weighted, |w| Complex::new(1.0 / (1.0 + pb.a * w * w / a_mean), 0.0));
        let slope = weighted.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>() * pb.h;
        let lu = pb.operator(&u);
        let ld = pb.operator(&d);
        let lu_d = pb.integrate(&lu.iter().zip(&d).map(|(x, y)| x * y).collect::<Vec<_>>());
        let ld_d = pb.integrate(&ld.iter().zip(&d).map(|(x, y)| x * y).collect::<Vec<_>>());
        tau = (2.0 * tau).min(1e6);
        loop {
            if let Some((de, v)) = pb.trial(&u, &d, tau, e, lu_d, ld_d) {
                if de <= -opts.armijo * 2.0 * tau * slope {
                    u = v;
                    e += de;
                    break;
                }
            }
            tau *= 0.5;
            if tau < 1e-14 {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
        }
        history.push(e);
    }
    let up: Vec<f64> = u.iter().map(|u| u.powf(pb.p)).collect();
    let norm = pb.integrate(&up);
    let e = pb.energy(&u);
    let lambda = e * volume.powf(2.0 / n as f64);
    let el = pb
        .residual(&u, lambda * volume.powf(-2.0 / n as f64))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(YamabeSolution {
        u: PeriodicProfile::new(g.period(), u)?,
        lambda,
        yamabe_constant: e,
        volume,
        functional_history: history,
        normalization_residual: (norm - 1.0).abs(),
        el_residual: el,
        iterations,
    })
}

/// `||u||_q` with respect to `dv_g`.
pub fn lq_bound_check(sol: &YamabeSolution, g: &PeriodicMetric, q: f64) -> Result<f64> {
    let p = conformal_p(g.dim());
    if !(q > p) {
        return Err(Error::Precondition(format!("q = {q} must exceed p = {p}")));
    }
    if !sol.u.compatible(g.a()) {
        return Err(Error::Contract("solution and metric sampled differently".into()));
    }
    let uq: Vec<f64> = sol.u.values().iter().map(|u| u.powf(q)).collect();
    Ok(g.integrate(&uq).powf(1.0 / q))
}

/// `g + tau * bump * Ric°(g)`.
pub fn perturb_traceless(g: &PeriodicMetric, tau: f64, bump: &PeriodicProfile) -> Result<PeriodicMetric> {
    if !bump.compatible(g.a()) {
        return Err(Error::Contract("bump sampled differently".into()));
    }
    let (txx, ts) = g.traceless_ricci();
    let add = |base: &PeriodicProfile, t: &[f64]| -> Vec<f64> {
        base.values()
            .iter()
            .zip(t)
            .zip(bump.values())
            .map(|((b, t), phi)| b + tau * phi * t)
            .collect()
    };
    let (na, nb) = (add(g.a(), &txx), add(g.b(), &ts));
    if na.iter().chain(&nb).any(|v| *v <= 0.0) {
        return Err(Error::Precondition(format!("tau = {tau} destroys positivity")));
    }
    PeriodicMetric::new(g.dim(), PeriodicProfile::new(g.period(), na)?, PeriodicProfile::new(g.period(), nb)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub taus: Vec<f64>,
    pub remainders: Vec<f64>,
    pub fit: LinearFit,
}

fn expansion(taus: &[f64], remainders: Vec<f64>) -> ExpansionReport {
    ExpansionReport {
        taus: taus.to_vec(),
        fit: loglog_slope(taus, &remainders),
        remainders,
    }
}

/// `|V(G_tau) - V(g)|` for each `tau`; the first-order term vanishes.
pub fn volume_expansion(g: &PeriodicMetric, bump: &PeriodicProfile, taus: &[f64]) -> Result<ExpansionReport> {
    let v0 = g.volume();
    let rem = taus
        .iter()
        .map(|&t| Ok((perturb_traceless(g, t, bump)?.volume() - v0).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(expansion(taus, rem))
}

/// `sup |S(G_tau) - S(g) - tau DS_g(bump Ric°)|` for each `tau`.
pub fn scalar_expansion(g: &PeriodicMetric, bump: &PeriodicProfile, taus: &[f64]) -> Result<ExpansionReport> {
    let s0 = g.scalar();
    let (txx, ts) = g.traceless_ricci();
    let hxx: Vec<f64> = txx.iter().zip(bump.values()).map(|(t, b)| t * b).collect();
    let hs: Vec<f64> = ts.iter().zip(bump.values()).map(|(t, b)| t * b).collect();
    let ds = g.linearized_scalar(&hxx, &hs);
    let rem = taus
        .iter()
        .map(|&t| {
            let st = perturb_traceless(g, t, bump)?.scalar();
            Ok((0..st.len()).map(|k| (st[k] - s0[k] - t * ds[k]).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(expansion(taus, rem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wavy(n: usize, amp: f64) -> PeriodicMetric {
        let a = PeriodicProfile::from_fn(1.0, 64, |x| 1.0 + 0.5 * amp * (2.0 * PI * x).cos()).unwrap();
        let b = PeriodicProfile::from_fn(1.0, 64, |x| (1.0 + amp * (2.0 * PI * x).sin()).powi(2)).unwrap();
        PeriodicMetric::new(n, a, b).unwrap()
    }

    #[test]
    fn spectral_derivatives_are_exact_on_trig_polynomials() {
        let f = PeriodicProfile::from_fn(2.0, 32, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).cos()).unwrap();
        let (d1, d2) = spectral_derivatives(&f);
        for (k, x) in f.nodes().into_iter().enumerate() {
            let e1 = PI * (PI * x).cos() - 0.9 * PI * (3.0 * PI * x).sin();
            let e2 = -PI * PI * (PI * x).sin() - 2.7 * PI * PI * (3.0 * PI * x).cos();
            assert!((d1[k] - e1).abs() < 1e-11 && (d2[k] - e2).abs() < 1e-10);
        }
    }

    #[test]
    fn warped_scalar_matches_closed_form() {
        // A = 1, B = phi^2 over a flat fiber: S = -(n-1)(2 phi''/phi + (n-2) phi'^2/phi^2)
        let n = 3;
        let phi = |x: f64| 1.0 + 0.2 * (2.0 * PI * x).sin();
        let g = PeriodicMetric::new(
            n,
            PeriodicProfile::constant(1.0, 64, 1.0).unwrap(),
            PeriodicProfile::from_fn(1.0, 64, |x| phi(x).powi(2)).unwrap(),
        )
        .unwrap();
        let s = g.scalar();
        for (k, x) in g.a().nodes().into_iter().enumerate() {
            let (p, dp, d2p) = (phi(x), 0.4 * PI * (2.0 * PI * x).cos(), -0.8 * PI * PI * (2.0 * PI * x).sin());
            let e = -2.0 * (2.0 * d2p / p + dp * dp / (p * p));
            assert!((s[k] - e).abs() < 1e-9, "{} {}", s[k], e);
        }
    }

    #[test]
    fn flat_torus_has_zero_constant() {
        let g = PeriodicMetric::flat(3, 1.0, 32).unwrap();
        let sol = solve_yamabe(&g, 1e-10).unwrap();
        assert!(sol.lambda.abs() < 1e-8);
        assert!(sol.u.values().iter().all(|u| (u - 1.0).abs() < 1e-12));
    }

    #[test]
    fn conformally_flat_torus_has_zero_constant() {
        let flat = PeriodicMetric::flat(3, 1.0, 64).unwrap();
        let w = PeriodicProfile::from_fn(1.0, 64, |x| 1.0 + 0.2 * (2.0 * PI * x).cos()).unwrap();
        let g = flat.conformal(&w).unwrap();
        let sol = solve_yamabe(&g, 1e-9).unwrap();
        assert!(sol.lambda.abs() < 1e-8, "{}", sol.lambda);
        assert!(sol.el_residual < 1e-9 && sol.normalization_residual < 1e-12);
        assert!(sol.functional_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn one_variable_tori_are_conformally_flat() {
        // ds^2 + B g_flat = B (dt^2 + g_flat), so the minimizer is B^{-(n-2)/4} up to scale
        for n in [3, 4] {
            let g = wavy(n, 0.3);
            let sol = solve_yamabe(&g, 1e-9).unwrap();
            assert!(sol.lambda.abs() < 1e-8, "{}", sol.lambda);
            assert!(sol.functional_history.windows(2).all(|w| w[1] <= w[0]));
            let e = -(n as f64 - 2.0) / 4.0;
            let ratio: Vec<f64> = sol.u.values().iter().zip(g.b().values()).map(|(u, b)| u / b.powf(e)).collect();
            assert!(ratio.iter().all(|r| (r / ratio[0] - 1.0).abs() < 1e-8));
            let c: f64 = 1.7;
            let big = solve_yamabe(&g.scaled(c).unwrap(), 1e-9).unwrap();
            let w = c.powf(-(n as f64 - 2.0) / 2.0);
            assert!(big.u.values().iter().zip(sol.u.values()).all(|(x, y)| (x - w * y).abs() < 1e-8));
        }
    }

    #[test]
    fn lq_norm_rejects_small_q() {
        let g = PeriodicMetric::flat(3, 1.0, 16).unwrap();
        let sol = solve_yamabe(&g, 1e-10).unwrap();
        assert!(matches!(lq_bound_check(&sol, &g, 6.0), Err(Error::Precondition(_))));
        assert!((lq_bound_check(&sol, &g, 8.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn einstein_metric_is_not_perturbed() {
        let g = PeriodicMetric::flat(4, 1.0, 16).unwrap();
        let bump = PeriodicProfile::constant(1.0, 16, 1.0).unwrap();
        assert_eq!(perturb_traceless(&g, 0.3, &bump).unwrap(), g);
    }

    #[test]
    fn perturbation_remainders_are_quadratic() {
        let g = wavy(3, 0.2);
        let bump = PeriodicProfile::from_fn(1.0, 64, |x| (PI * x).sin().powi(2)).unwrap();
        let taus = [0.02, 0.01, 0.005, 0.0025];
        let v = volume_expansion(&g, &bump, &taus).unwrap();
        let s = scalar_expansion(&g, &bump, &taus).unwrap();
        assert!((v.fit.slope - 2.0).abs() < 0.1, "{:?}", v);
        assert!((s.fit.slope - 2.0).abs() < 0.1, "{:?}", s);
        assert!(matches!(perturb_traceless(&g, 1e3, &bump), Err(Error::Precondition(_))));
    }
}
