//! One function per scenario. Each writes its artifacts and reports whether
//! every checked claim held.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use conelab::constructions::{
    make_cone, make_glued_schwarzschild, make_positive_mass_cone, make_zero_area_singularity, ConeSpec,
};
use conelab::curvature::{curvature_assembly, scalar_curvature_conformal, scalar_curvature_warped, warped_closed_form};
use conelab::hflow::{monitor_estimates, run_hflow, FlowConfig};
use conelab::mass::{adm_mass, mass_drift, mass_integrand, monitor_scalar_decay, verify_af_decay};
use conelab::measure::sobolev_norms;
use conelab::mollify::{make_cutoff, mollify_conformal_fn, mollify_warped_fn, MollifierSpec};
use conelab::verify::{run_criterion, CriterionReport, Status, VerifySettings, CRITERIA};
use conelab::yamabe::{lq_bound_check, solve_yamabe, PeriodicMetric, PeriodicProfile};
use conelab::{ConformalMetric, RadialGrid, RadialProfile, Region, SingularSet, SymTensor2Radial};

use crate::config::{Example, GridKind, GridSpec, ScenarioConfig};
use crate::output::{Artifacts, Cell};

pub type Outcome = Result<bool, String>;

fn ctx<E: std::fmt::Display>(what: &'static str) -> impl Fn(E) -> String {
    move |e| format!("{what}: {e}")
}

fn grid(cfg: &ScenarioConfig, default: GridSpec) -> Result<Arc<RadialGrid>, String> {
    cfg.grid_or(default).build().map(Arc::new).map_err(ctx("grid"))
}

pub fn curvature(cfg: &ScenarioConfig, out: &mut Artifacts) -> Outcome {
    let g = grid(cfg, GridSpec::new(GridKind::Uniform, 0.1, 3.0, 59))?;
    let spec = ConeSpec::new(cfg.dim, cfg.alpha, cfg.beta).map_err(ctx("cone"))?;
    let metric = make_cone(&spec, g.clone()).map_err(ctx("cone"))?;
    let c = curvature_assembly(&metric).map_err(ctx("curvature"))?;
    let mut closed_err = 0.0f64;
    let rows = (0..g.len())
        .map(|k| {
            let r = g.r(k);
            let p = spec.phi_jet(r);
            let s = c.scalar.values()[k];
            closed_err = closed_err.max((s - warped_closed_form(cfg.dim, p.v, p.d1, p.d2)).abs());
            vec![
                Cell::from(r),
                metric.a().values()[k].into(),
                metric.b().values()[k].into(),
                s.into(),
                c.k_rad.values()[k].into(),
                c.k_tan.values()[k].into(),
                c.ricci.rr.values()[k].into(),
                c.ricci.s.values()[k].into(),
                c.rm_norm.values()[k].into(),
            ]
        })
        .collect();
    out.csv("curvature.csv", &["r", "A", "B", "S", "K_rad", "K_tan", "Ric_rr", "Ric_s", "Rm_norm"], rows)?;
    let (lo, hi) = (c.scalar.min(), c.scalar.max());
    let sign = if c.scalar.max_abs() < 1e-10 {
        "zero"
    } else if lo > 0.0 {
        "positive"
    } else if hi < 0.0 {
        "negative"
    } else {
        "mixed"
    };
    let ok = closed_err < 1e-8 * c.scalar.max_abs().max(1.0);
    out.json(
        "summary.json",
        &json!({ "dim": cfg.dim, "alpha": cfg.alpha, "beta": cfg.beta, "min_scalar": lo, "max_scalar": hi,
                 "sign": sign, "closed_form_max_error": closed_err, "closed_form_agrees": ok }),
    )?;
    Ok(ok)
}

/// An explicit example as a conformal metric, with its known constants.
fn example_metric(cfg: &ScenarioConfig) -> Result<(ConformalMetric, serde_json::Value, f64), String> {
    match cfg.example {
        Example::PositiveMassCone => {
            let eps = cfg.eps_or(&[0.25])[0];
            let g = grid(cfg, GridSpec::new(GridKind::Geometric, 1e-3, 1000.0, 800))?;
            let c = make_positive_mass_cone(eps, g).map_err(ctx("positive-mass cone"))?;
            let info = json!({ "example": "2.2", "eps": eps, "a": c.a, "b": c.b, "expected_mass": c.a,
                               "cone_angle_fit": c.cone_angle_fit(), "cone_angle_expected": 1.0 - 2.0 * eps });
            Ok((c.metric, info, 1.0))
        }
        Example::ZeroArea => {
            let m = cfg.m;
            let g = grid(cfg, GridSpec::new(GridKind::Geometric, 2.5 * m, 1000.0 * m, 600))?;
            let z = make_zero_area_singularity(m, g).map_err(ctx("zero-area singularity"))?;
            let info = json!({ "example": "2.3", "m": m, "expected_mass": -2.0 * m,
                               "exponent_fit": z.exponent_fit(), "exponent_expected": 4.0 / 3.0 });
            Ok((z.metric, info, 1.0))
        }
        Example::GluedNeck => {
            let g = grid(cfg, GridSpec::new(GridKind::Geometric, 2.2 * cfg.m, 1000.0, 800))?;
            let n = make_glued_schwarzschild(cfg.m, cfg.r0, cfg.r1, g).map_err(ctx("glued neck"))?;
            let lap = n.flat_laplacian_y().into_iter().fold(f64::NEG_INFINITY, f64::max);
            let info = json!({ "example": "2.5", "m": cfg.m, "r0": n.r0, "r1": n.r1, "y_inf": n.y_inf,
                               "max_flat_laplacian_y": lap, "expected_mass": 0.0 });
            Ok((n.metric, info, f64::INFINITY))
        }
    }
}

fn mass_report(g: &ConformalMetric, info: serde_json::Value, tau: f64, out: &mut Artifacts) -> Outcome {
    let w = g.to_warped();
    let rep = adm_mass(&w).map_err(ctx("mass"))?;
    let af = verify_af_decay(&w, tau, f64::INFINITY).map_err(ctx("decay"))?;
    let rows = w
        .grid()
        .nodes()
        .iter()
        .zip(mass_integrand(&w))
        .map(|(&r, m)| vec![Cell::from(r), m.into()])
        .collect();
    out.csv("integrand.csv", &["r", "m"], rows)?;
    let expected = info["expected_mass"].as_f64().unwrap_or(f64::NAN);
    let err = (rep.extrapolated_mass - expected).abs();
    let ok = af.tau_ok && err <= 0.01 * expected.abs().max(1e-3);
    out.json("mass.json", &json!({ "construction": info, "mass": rep, "decay": af, "mass_error": err, "ok": ok }))?;
    Ok(ok)
}

pub fn example(cfg: &ScenarioConfig, out: &mut Artifacts) -> Outcome {
    let (g, info, tau) = example_metric(cfg)?;
    let s = scalar_curvature_conformal(&g).map_err(ctx("scalar curvature"))?;
    let w = g.to_warped();
    let rows = (0..g.grid().len())
        .map(|k| {
            vec![
                Cell::from(g.grid().r(k)),
                g.u().values()[k].into(),
                w.a().values()[k].into(),
                w.b().values()[k].into(),
                s.values()[k].into(),
            ]
        })
        .collect();
    out.csv("profile.csv", &["r", "u", "A", "B", "S"], rows)?;
    mass_report(&g, info, tau, out)
}

pub fn mass(cfg: &ScenarioConfig, out: &mut Artifacts) -> Outcome {
    let (g, info, tau) = example_metric(cfg)?;
    mass_report(&g, info, tau, out)
}

#[derive(Serialize)]
struct MollifySummary {
    eps: f64,
    lambda: f64,
    sup_dev_a: f64,
    sup_dev_b: f64,
    identity_outside: bool,
    min_scalar: f64,
    max_scalar: f64,
    cutoff_c1: f64,
    cutoff_c2: f64,
    difference_lp: f64,
    difference_w1p: f64,
}

pub fn mollify(cfg: &ScenarioConfig, out: &mut Artifacts) -> Outcome {
    let n = cfg.dim;
    let p = cfg.p.unwrap_or(2.0 * n as f64);
    let g = grid(cfg, GridSpec { core: 0.005, ..GridSpec::new(GridKind::SinhCore, 0.0, 2.0, 400) })?;
    let alpha2 = cfg.alpha * cfg.alpha;
    let b0 = |r: f64| alpha2 * r * r;
    let mut rows = vec![];
    let mut summaries = vec![];
    for eps in cfg.eps_or(&[0.1, 0.05, 0.025]) {
        let spec = MollifierSpec::new(n, eps, SingularSet::axis()).map_err(ctx("mollifier"))?;
        let m = mollify_warped_fn(n, |_| 1.0, b0, &g, &spec, false).map_err(ctx("mollify"))?;
        let s = scalar_curvature_warped(&m).map_err(ctx("scalar curvature"))?;
        let cut = make_cutoff(eps, SingularSet::axis(), &g).map_err(ctx("cutoff"))?;
        let (mut da, mut db, mut same) = (0.0f64, 0.0f64, true);
        let mut diff_rr = Vec::with_capacity(g.len());
        let mut diff_s = Vec::with_capacity(g.len());
        for (k, &r) in g.nodes().iter().enumerate() {
            let (a, b) = (m.a().values()[k], m.b().values()[k]);
            da = da.max((a - 1.0).abs());
            db = db.max((b - b0(r)).abs());
            if r >= 2.0 * eps {
                same &= a == 1.0 && b == b0(r);
            }
            diff_rr.push(a - 1.0);
            diff_s.push(b - b0(r));
            rows.push(vec![Cell::from(eps), r.into(), a.into(), b.into(), s.values()[k].into()]);
        }
        let diff = SymTensor2Radial::new(
            n,
            RadialProfile::new(g.clone(), diff_rr).map_err(ctx("difference"))?,
            RadialProfile::new(g.clone(), diff_s).map_err(ctx("difference"))?,
        )
        .map_err(ctx("difference"))?;
        let norms = sobolev_norms(&diff, &m, p, Region::whole(&g)).map_err(ctx("norms"))?;
        summaries.push(MollifySummary {
            eps,
            lambda: spec.lambda,
            sup_dev_a: da,
            sup_dev_b: db,
            identity_outside: same,
            min_scalar: s.min(),
            max_scalar: s.max(),
            cutoff_c1: cut.c1,
            cutoff_c2: cut.c2,
            difference_lp: norms.lp,
            difference_w1p: norms.w1p,
        });
    }
    out.csv("profiles.csv", &["eps", "r", "A", "B", "S"], rows)?;
    let ok = summaries.iter().all(|s| s.identity_outside);
    out.json("summary.json", &json!({ "dim": n, "alpha": cfg.alpha, "p": p, "sweep": summaries, "ok": ok }))?;
    Ok(ok)
}

pub fn flow(cfg: &ScenarioConfig, out: &mut Artifacts) -> Outcome {
    if cfg.dim != 3 {
        return Err("flow runs the three-dimensional positive-mass cone; use dim = 3".into());
    }
    let g = grid(cfg, GridSpec { core: 0.05, ..GridSpec::new(GridKind::SinhCore, 0.0, 40.0, 200) })?;
    let aux = Arc::new(RadialGrid::uniform(0.01, 10.0, 50).map_err(ctx("grid"))?);
    let cone = make_positive_mass_cone(cfg.flow.cone_eps, aux).map_err(ctx("positive-mass cone"))?;
    let u = |r: f64| cone.u_jet(r).v;
    let smooth = |eps: f64| -> Result<_, String> {
        let spec = MollifierSpec::new(3, eps, SingularSet::axis()).map_err(ctx("mollifier"))?;
        Ok(mollify_conformal_fn(3, u, &g, &spec).map_err(ctx("mollify"))?.to_warped())
    };
    let eps = cfg.eps_or(&[0.2])[0];
    let (g0, h) = (smooth(eps)?, smooth(cfg.flow.background_eps)?);
    let fc = FlowConfig { outputs: cfg.flow.outputs, ..FlowConfig::new(3, cfg.flow.t_final) };
    let tr = run_hflow(&g0, &h, &fc).map_err(ctx("flow"))?;
    let rep = monitor_estimates(&tr, &fc).map_err(ctx("monitors"))?;
    let drift = mass_drift(&tr).map_err(ctx("mass drift"))?;
    let decay = monitor_scalar_decay(&tr, fc.decay_q).map_err(ctx("scalar decay"))?;
    let rows = rep
        .samples
        .iter()
        .map(|s| {
            vec![
                Cell::from(s.t),
                s.j.into(),
                s.min_s.into(),
                s.sup_grad_scaled.into(),
                s.sup_hess_scaled.into(),
                s.closeness.into(),
                s.mass.unwrap_or(f64::NAN).into(),
                s.sup_dq_s.into(),
            ]
        })
        .collect();
    out.csv(
        "flow.csv",
        &["t", "J", "min_S", "sup_grad_scaled", "sup_hess_scaled", "closeness", "mass", "sup_dq_S"],
        rows,
    )?;
    let j_small = rep.max_j < 1e-3 * rep.initial_volume;
    let ok = tr.truncated.is_none() && j_small && drift.max_relative_drift < 0.01 && decay.bounded;
    out.json(
        "summary.json",
        &json!({
            "eps": eps, "background_eps": cfg.flow.background_eps, "cone_eps": cfg.flow.cone_eps,
            "t_final": fc.t_final, "steps": tr.steps, "rejected": tr.rejected, "truncated": tr.truncated,
            "delta": rep.delta, "q": rep.q, "initial_volume": rep.initial_volume,
            "sup_grad_scaled": rep.sup_grad_scaled, "sup_hess_scaled": rep.sup_hess_scaled,
            "sup_w_scaled": rep.sup_w_scaled, "min_scalar": rep.min_s, "max_j": rep.max_j,
            "c_hat": rep.c_hat, "j_monotone": rep.j_monotone, "j_small": j_small,
            "mass": drift, "scalar_decay": decay, "ok": ok,
        }),
    )?;
    Ok(ok)
}

pub fn yamabe(cfg: &ScenarioConfig, out: &mut Artifacts) -> Outcome {
    let t = &cfg.torus;
    let amp = t.amp;
    let a = PeriodicProfile::from_fn(1.0, t.samples, |x| 1.0 + 0.5 * amp * (std::f64::consts::TAU * x).cos())
        .map_err(ctx("torus"))?;
    let b = PeriodicProfile::from_fn(1.0, t.samples, |x| (1.0 + amp * (std::f64::consts::TAU * x).sin()).powi(2))
        .map_err(ctx("torus"))?;
    let g = PeriodicMetric::new(cfg.dim, a, b).map_err(ctx("torus"))?;
    let sol = solve_yamabe(&g, t.tol).map_err(ctx("yamabe"))?;
    let lq = lq_bound_check(&sol, &g, t.q).map_err(ctx("norm"))?;
    let hist = sol
        .functional_history
        .iter()
        .enumerate()
        .map(|(k, e)| vec![Cell::from(k), (*e).into()])
        .collect();
    out.csv("history.csv", &["iteration", "energy"], hist)?;
    let s = g.scalar();
    let rows = sol
        .u
        .nodes()
        .iter()
        .zip(sol.u.values())
        .zip(&s)
        .map(|((&x, &u), &s)| vec![Cell::from(x), u.into(), s.into()])
        .collect();
    out.csv("solution.csv", &["x", "u", "S"], rows)?;
    let monotone = sol.functional_history.windows(2).all(|w| w[1] <= w[0]);
    out.json(
        "solution.json",
        &json!({
            "dim": cfg.dim, "amp": amp, "samples": t.samples, "lambda": sol.lambda,
            "yamabe_constant": sol.yamabe_constant, "volume": sol.volume, "iterations": sol.iterations,
            "el_residual": sol.el_residual, "normalization_residual": sol.normalization_residual,
            "lq_exponent": t.q, "lq_norm": lq, "history_monotone": monotone,
        }),
    )?;
    Ok(monotone)
}

fn run_all(settings: &VerifySettings, threads: usize) -> Result<Vec<CriterionReport>, String> {
    let threads = threads.clamp(1, CRITERIA.len());
    let mut slots: Vec<Option<Result<CriterionReport, String>>> = vec![None; CRITERIA.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<_> = slots.chunks_mut(CRITERIA.len().div_ceil(threads)).collect();
        let mut start = 0;
        for chunk in chunks {
            let ids = &CRITERIA[start..start + chunk.len()];
            start += chunk.len();
            scope.spawn(move || {
                for (slot, &id) in chunk.iter_mut().zip(ids) {
                    eprintln!("criterion {id} ...");
                    *slot = Some(run_criterion(id, settings).map_err(|e| format!("criterion {id}: {e}")));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every criterion ran")).collect()
}

pub fn verify_all(cfg: &ScenarioConfig, threads: usize, out: &mut Artifacts) -> Outcome {
    let settings = VerifySettings { seed: cfg.seed, random_metrics: cfg.random_metrics };
    let reports = run_all(&settings, threads)?;
    let claims: usize = reports.iter().map(|r| r.claims.len()).sum();
    let count = |s: Status| reports.iter().flat_map(|r| &r.claims).filter(|c| c.status == s).count();
    let passed = reports.iter().all(|r| r.passed());
    let mut table = String::new();
    for r in &reports {
        table.push_str(&r.line());
        table.push('\n');
        for c in &r.claims {
            let tag = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Measured => "measured",
            };
            table.push_str(&format!("    {tag:<8} {:<40} {:>14.6e}  {}\n", c.anchor, c.value, c.detail));
        }
    }
    out.text("verdicts.txt", &table)?;
    out.json(
        "verdicts.json",
        &json!({
            "seed": cfg.seed, "passed": passed, "claims": claims,
            "pass": count(Status::Pass), "fail": count(Status::Fail), "measured": count(Status::Measured),
            "criteria": reports,
        }),
    )?;
    print!("{}", reports.iter().map(|r| r.line() + "\n").collect::<String>());
    Ok(passed)
}
