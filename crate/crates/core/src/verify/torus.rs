use std::f64::consts::PI;

use super::{sci, Claim};
use crate::error::Result;
use crate::yamabe::{
    lq_bound_check, perturb_traceless, scalar_expansion, solve_yamabe, volume_expansion, PeriodicMetric, PeriodicProfile,
};

const SAMPLES: usize = 64;

fn wavy(n: usize, amp: f64) -> Result<PeriodicMetric> {
    let a = PeriodicProfile::from_fn(1.0, SAMPLES, |x| 1.0 + 0.5 * amp * (2.0 * PI * x).cos())?;
    let b = PeriodicProfile::from_fn(1.0, SAMPLES, |x| (1.0 + amp * (2.0 * PI * x).sin()).powi(2))?;
    PeriodicMetric::new(n, a, b)
}

pub(super) fn yamabe_checks() -> Result<Vec<Claim>> {
    let mut out = vec![];
    let flat = PeriodicMetric::flat(3, 1.0, SAMPLES)?;
    let sol = solve_yamabe(&flat, 1e-10)?;
    let mean = sol.u.values().iter().sum::<f64>() / SAMPLES as f64;
    let dev = sol.u.values().iter().map(|u| (u / mean - 1.0).abs()).fold(0.0, f64::max);
    out.push(Claim::check("flat-torus-constant", sol.lambda, sol.lambda.abs() <= 1e-8, "lambda of the flat torus"));
    out.push(Claim::check("flat-torus-minimizer-constant", dev, dev <= 1e-10, "sup |u / mean(u) - 1|"));

    let g = wavy(3, 0.2)?;
    let bump = PeriodicProfile::from_fn(1.0, SAMPLES, |x| (PI * x).sin().powi(2))?;
    let taus = [0.02, 0.01, 0.005, 0.0025];
    let v = volume_expansion(&g, &bump, &taus)?;
    let s = scalar_expansion(&g, &bump, &taus)?;
    out.push(Claim::check(
        "volume-expansion-quadratic",
        v.fit.slope,
        (v.fit.slope - 2.0).abs() <= 0.1,
        format!("remainders {}", sci(&v.remainders)),
    ));
    out.push(Claim::check(
        "scalar-linearization-quadratic",
        s.fit.slope,
        (s.fit.slope - 2.0).abs() <= 0.1,
        format!("remainders {}", sci(&s.remainders)),
    ));
    let base = solve_yamabe(&g, 1e-9)?.lambda;
    let pert = solve_yamabe(&perturb_traceless(&g, 0.01, &bump)?, 1e-9)?.lambda;
    out.push(Claim::measured(
        "traceless-perturbation-lambda-change",
        pert - base,
        format!("lambda(0.01) - lambda(0), lambda(0) = {base:.3e}"),
    ));

    let q = 8.0;
    let (mut norms, mut s0) = (vec![], 0.0f64);
    for amp in [0.05, 0.1, 0.15, 0.2, 0.25] {
        let g = wavy(3, amp)?;
        let g = g.scaled(g.volume().powf(-1.0 / 3.0))?;
        s0 = s0.max(-g.scalar().into_iter().fold(f64::INFINITY, f64::min));
        let sol = solve_yamabe(&g, 1e-9)?;
        norms.push(lq_bound_check(&sol, &g, q)?);
    }
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().cloned().fold(0.0, f64::max);
    out.push(Claim::check(
        "minimizer-lq-uniform",
        hi / lo,
        hi / lo < 4.0,
        format!("||u||_{q} over a unit-volume family with S >= -{s0:.3}: {norms:.5?}"),
    ));
    out.push(Claim::measured("minimizer-lq-cap", hi, "largest ||u||_8 in the family"));
    Ok(out)
}
