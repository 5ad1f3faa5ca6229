use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sci, Claim, VerifySettings};
use crate::constructions::{
    make_cone, make_glued_schwarzschild, make_positive_mass_cone, make_zero_area_singularity, smooth_step_down, ConeSpec,
};
use crate::curvature::{curvature_assembly, scalar_curvature_conformal, scalar_curvature_warped, warped_closed_form};
use crate::error::Result;
use crate::fit::{fit_through_origin, loglog_slope};
use crate::grid::{RadialGrid, RadialProfile};
use crate::mass::{adm_mass, mass_linearity};
use crate::metric::{MetricJet, WarpedMetric};
use crate::oracle::{equator, Oracle, WarpedField};
use crate::stencil::Jet;

/// `sum_k c_k cos(k r + theta_k)`.
struct Wave {
    c: [f64; 3],
    theta: [f64; 3],
}

impl Wave {
    fn random(rng: &mut ChaCha8Rng, amp: f64) -> Self {
        let mut w = Wave { c: [0.0; 3], theta: [0.0; 3] };
        for k in 0..3 {
            w.c[k] = amp * rng.gen_range(-1.0..1.0) / (k + 1) as f64;
            w.theta[k] = rng.gen_range(0.0..std::f64::consts::TAU);
        }
        w
    }

    fn jet(&self, r: f64) -> Jet {
        let mut j = Jet::new(0.0, 0.0, 0.0);
        for k in 0..3 {
            let kf = (k + 1) as f64;
            let (s, c) = (kf * r + self.theta[k]).sin_cos();
            j.v += self.c[k] * c;
            j.d1 -= self.c[k] * kf * s;
            j.d2 -= self.c[k] * kf * kf * c;
        }
        j
    }

    /// `A = exp(f)`.
    fn a(&self, r: f64) -> Jet {
        let f = self.jet(r);
        let e = f.v.exp();
        Jet::new(e, f.d1 * e, (f.d2 + f.d1 * f.d1) * e)
    }

    /// `phi = r exp(f/2)`.
    fn phi(&self, r: f64) -> Jet {
        let f = self.jet(r);
        let e = (0.5 * f.v).exp();
        let q = 1.0 + 0.5 * r * f.d1;
        Jet::new(r * e, q * e, e * (0.5 * f.d1 * q + 0.5 * f.d1 + 0.5 * r * f.d2))
    }
}

fn random_metric_errors(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let n = rng.gen_range(3..=5);
    let wa = Wave::random(rng, 0.3);
    let wb = Wave::random(rng, 0.3);
    let grid = Arc::new(RadialGrid::uniform(0.4, 2.0, 33)?);
    let jets: Vec<MetricJet> = grid.nodes().iter().map(|&r| MetricJet { a: wa.a(r), phi: wb.phi(r) }).collect();
    let g = WarpedMetric::new(
        n,
        RadialProfile::new(grid.clone(), jets.iter().map(|j| j.a.v).collect())?,
        RadialProfile::new(grid.clone(), jets.iter().map(|j| j.b().v).collect())?,
        false,
    )?
    .with_exact_jets(jets)?;
    let s = scalar_curvature_warped(&g)?;
    let asm = curvature_assembly(&g)?;
    let field = WarpedField { n, fiber: 1.0, a: |r: f64| wa.a(r).v, b: |r: f64| wb.phi(r).v.powi(2) };
    let oracle = Oracle::new(&field);
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for k in (0..grid.len()).step_by(4) {
        let x = equator(n, grid.r(k));
        let os = oracle.scalar(&x);
        let ric = oracle.ricci(&x);
        let pairs = [
            (s.values()[k], os),
            (asm.scalar.values()[k], os),
            (asm.ricci.rr.values()[k], ric[0]),
            (asm.ricci.s.values()[k], ric[n + 1]),
        ];
        for (mine, theirs) in pairs {
            diff = diff.max((mine - theirs).abs());
            scale = scale.max(theirs.abs());
        }
    }
    Ok((n, diff / scale.max(1.0)))
}

pub(super) fn oracle_agreement(s: &VerifySettings) -> Result<Vec<Claim>> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst = 0.0f64;
    let mut dims = [0usize; 3];
    for _ in 0..s.random_metrics {
        let (n, e) = random_metric_errors(&mut rng)?;
        dims[n - 3] += 1;
        worst = worst.max(e);
    }
    let mut out = vec![Claim::check(
        "warped-curvature-matches-oracle",
        worst,
        worst < 1e-6,
        format!(
            "max relative error over {} random metrics (n=3: {}, n=4: {}, n=5: {})",
            s.random_metrics, dims[0], dims[1], dims[2]
        ),
    )];
    // grid-sampled cone against the closed warped formula
    let spec = ConeSpec::new(3, 0.5, 2.0 / 3.0)?;
    let (mut hs, mut errs) = (vec![], vec![]);
    for m in [41, 81, 161] {
        let grid = Arc::new(RadialGrid::uniform(0.5, 1.5, m)?);
        let g = make_cone(&spec, grid.clone())?.without_exact_jets();
        let sc = scalar_curvature_warped(&g)?;
        let err = grid
            .nodes()
            .iter()
            .zip(sc.values())
            .map(|(&r, v)| {
                let p = spec.phi_jet(r);
                (v - warped_closed_form(3, p.v, p.d1, p.d2)).abs()
            })
            .fold(0.0, f64::max);
        hs.push(1.0 / (m - 1) as f64);
        errs.push(err);
    }
    let slope = loglog_slope(&hs, &errs).slope;
    out.push(Claim::check(
        "closed-form-refinement-slope",
        slope,
        (slope - 2.0).abs() <= 0.2,
        format!("sup error {} on h = {hs:.4?}", sci(&errs)),
    ));
    Ok(out)
}

pub(super) fn cone_signs() -> Result<Vec<Claim>> {
    let grid = Arc::new(RadialGrid::uniform(0.1, 3.0, 59)?);
    let scalar = |n: usize, alpha: f64, beta: f64| -> Result<RadialProfile> {
        scalar_curvature_warped(&make_cone(&ConeSpec::new(n, alpha, beta)?, grid.clone())?)
    };
    let mut out = vec![];
    for n in [3, 4] {
        let s = scalar(n, 0.5, 1.0)?;
        out.push(Claim::check(&format!("cone-narrow-positive-n{n}"), s.min(), s.min() > 0.0, "min S for alpha = 0.5"));
        let s = scalar(n, 1.0, 1.0)?;
        out.push(Claim::check(&format!("cone-flat-zero-n{n}"), s.max_abs(), s.max_abs() < 1e-10, "sup |S| for alpha = 1"));
        let s = scalar(n, 1.5, 1.0)?;
        out.push(Claim::check(&format!("cone-wide-negative-n{n}"), s.max(), s.max() < 0.0, "max S for alpha = 1.5"));
        let s = scalar(n, 1.0, 2.0 / n as f64)?;
        out.push(Claim::check(&format!("cusp-positive-n{n}"), s.min(), s.min() > 0.0, "min S for beta = 2/n"));
    }
    let k = grid.nodes().iter().position(|&r| (r - 1.0).abs() < 1e-12).expect("r = 1 is a node");
    let v = scalar(3, 0.5, 1.0)?.values()[k];
    out.push(Claim::check("cone-value-at-one", v, (v - 6.0).abs() <= 1e-6, "S(1) for n = 3, alpha = 0.5"));
    Ok(out)
}

/// `a = eps - int_1^2 t^2 eta` by composite Simpson, independent of the
/// construction's quadrature.
fn cone_mass_oracle(eps: f64) -> f64 {
    let panels = 4000;
    let h = 1.0 / panels as f64;
    let f = |t: f64| -eps * (1.0 - eps) * t.powf(-eps) * smooth_step_down(t - 1.0);
    let mut acc = f(1.0) + f(2.0);
    for k in 1..panels {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(1.0 + k as f64 * h);
    }
    eps - acc * h / 3.0
}

pub(super) fn positive_mass_cone() -> Result<Vec<Claim>> {
    let mut out = vec![];
    let grid = Arc::new(RadialGrid::geometric(1e-3, 10.0, 400)?);
    let (mut worst_neg, mut worst_ext) = (0.0f64, 0.0f64);
    for eps in [0.1, 0.2] {
        let c = make_positive_mass_cone(eps, grid.clone())?;
        let s = scalar_curvature_conformal(&c.metric)?;
        for (&r, &v) in grid.nodes().iter().zip(s.values()) {
            worst_neg = worst_neg.max(-v);
            if r >= 2.0 {
                worst_ext = worst_ext.max(v.abs());
            }
        }
        let fit = c.cone_angle_fit();
        let want = 1.0 - 2.0 * eps;
        out.push(Claim::check(
            &format!("cone-angle-eps{eps}"),
            fit,
            ((fit - want) / want).abs() <= 0.02,
            format!("fitted cone angle, expected {want}"),
        ));
    }
    out.push(Claim::check("pm-cone-scalar-nonnegative", -worst_neg, worst_neg <= 1e-10, "min S over the grid"));
    out.push(Claim::check("pm-cone-scalar-flat-outside", worst_ext, worst_ext <= 1e-8, "sup |S| on r >= 2"));
    let far = Arc::new(RadialGrid::geometric(1e-3, 1000.0, 800)?);
    let epss = [0.05, 0.1, 0.15, 0.2, 0.25];
    let (mut coeffs, mut masses) = (vec![], vec![]);
    for eps in epss {
        let c = make_positive_mass_cone(eps, far.clone())?;
        coeffs.push(cone_mass_oracle(eps));
        masses.push(adm_mass(&c.metric)?.extrapolated_mass);
    }
    let lin = mass_linearity(&coeffs, &masses);
    let min_mass = masses.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(Claim::check("pm-cone-mass-positive", min_mass, min_mass > 0.0, "smallest mass in the sweep"));
    out.push(Claim::check("pm-cone-mass-linear", lin.r2, lin.r2 > 0.999, "R^2 of mass against a through the origin"));
    out.push(Claim::check(
        "pm-cone-mass-constant",
        lin.slope,
        (lin.slope - 1.0).abs() <= 0.01,
        "mass / a, oracle value 1",
    ));
    Ok(out)
}

pub(super) fn zero_area() -> Result<Vec<Claim>> {
    let mut out = vec![];
    let (mut worst_s, mut worst_exp) = (0.0f64, 0.0f64);
    let (mut ms, mut masses) = (vec![], vec![]);
    for m in [0.5, 1.0, 2.0] {
        let grid = Arc::new(RadialGrid::uniform(2.5 * m, 20.0 * m, 200)?);
        let z = make_zero_area_singularity(m, grid)?;
        worst_s = worst_s.max(scalar_curvature_conformal(&z.metric)?.max_abs());
        worst_exp = worst_exp.max((z.exponent_fit() / (4.0 / 3.0) - 1.0).abs());
        let far = Arc::new(RadialGrid::geometric(2.5 * m, 1000.0 * m, 600)?);
        let z = make_zero_area_singularity(m, far)?;
        ms.push(m);
        masses.push(adm_mass(&z.metric)?.extrapolated_mass);
    }
    out.push(Claim::check("zero-area-scalar-flat", worst_s, worst_s <= 1e-8, "sup |S|"));
    out.push(Claim::check("zero-area-exponent", worst_exp, worst_exp <= 0.02, "relative deviation of the exponent from 4/3"));
    let max_mass = masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.push(Claim::check("zero-area-mass-negative", max_mass, max_mass < 0.0, "largest mass in the sweep"));
    let pts: Vec<(f64, f64)> = ms.iter().cloned().zip(masses.iter().cloned()).collect();
    let fit = fit_through_origin(&pts);
    out.push(Claim::check(
        "zero-area-mass-constant",
        fit.slope,
        (fit.slope + 2.0).abs() <= 0.02,
        "mass / m, oracle value -2",
    ));
    Ok(out)
}

pub(super) fn glued_neck() -> Result<Vec<Claim>> {
    let grid = Arc::new(RadialGrid::uniform(2.2, 12.0, 300)?);
    let g = make_glued_schwarzschild(1.0, 3.0, 6.0, grid.clone())?;
    let lap = g.flat_laplacian_y().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let s = scalar_curvature_conformal(&g.metric)?;
    let flat = grid
        .nodes()
        .iter()
        .zip(g.metric.u().values())
        .filter(|(&r, _)| r >= g.r1)
        .all(|(_, &u)| u == 1.0);
    Ok(vec![
        Claim::check("neck-y-superharmonic", lap, lap <= 1e-10, "max of the discrete flat Laplacian of y"),
        Claim::check("neck-scalar-nonnegative", s.min(), s.min() >= -1e-10, "min S"),
        Claim::check("neck-scalar-somewhere-positive", s.max(), s.max() > 0.0, "max S"),
        Claim::check("neck-euclidean-outside", if flat { 1.0 } else { 0.0 }, flat, "u == 1 node-wise on r >= r1"),
        Claim::measured("neck-y-at-infinity", g.y_inf, "y(inf)"),
    ])
}
