//! Right side of the h-flow in SO(n)-invariant form.
//!
//! Both metrics are `A dr^2 + B h_0`. Derivatives of the evolving metric are
//! taken in the background connection through [`LocalFrame`]; at a regular
//! tip the jets come from the Cartesian coefficients `a = B/r^2`,
//! `b = A - a`, which are even and smooth across the axis.

use crate::curvature::point_curvature;
use crate::error::{Error, Result};
use crate::frame::{sectional, LocalFrame};
use crate::grid::{same_grid, RadialGrid, RadialProfile};
use crate::metric::{MetricJet, SymTensor2Radial, WarpedMetric};
use crate::stencil::{jets, Jet, Parity};

/// Jets of `A` and `B` at every node.
pub(crate) fn coefficient_jets(grid: &RadialGrid, a: &[f64], b: &[f64], tip: bool) -> Vec<(Jet, Jet)> {
    if tip && grid.tip_symmetric() {
        let r = grid.nodes();
        let ca: Vec<f64> = b.iter().zip(r).map(|(b, r)| b / (r * r)).collect();
        let cb: Vec<f64> = a.iter().zip(&ca).map(|(a, c)| a - c).collect();
        let ja = jets(grid, &ca, Parity::Even);
        let jb = jets(grid, &cb, Parity::Even);
        ja.into_iter()
            .zip(jb)
            .zip(r)
            .map(|((ja, jb), &r)| {
                let r2 = Jet::new(r * r, 2.0 * r, 2.0);
                (ja.add(jb), r2.mul(ja))
            })
            .collect()
    } else {
        jets(grid, a, Parity::None).into_iter().zip(jets(grid, b, Parity::None)).collect()
    }
}

pub(crate) fn metric_jets(g: &WarpedMetric) -> Vec<MetricJet> {
    coefficient_jets(g.grid(), g.a().values(), g.b().values(), g.tip_regular())
        .into_iter()
        .map(|(a, b)| MetricJet { a, phi: b.sqrt() })
        .collect()
}

/// Background jets: exact when attached, Cartesian stencils otherwise.
pub(crate) fn background_jets(h: &WarpedMetric) -> Vec<MetricJet> {
    if h.has_exact_jets() {
        h.jets()
    } else {
        metric_jets(h)
    }
}

/// Reduced right side at a single point: returns `(rr, s)`.
///
/// `hj` is the background jet, `a`, `b` the jets of the evolving metric.
pub fn hflow_point(n: usize, fiber: f64, hj: &MetricJet, a: Jet, b: Jet) -> (f64, f64) {
    let fr = LocalFrame::new(n, hj, a, b);
    let (k_rad, k_tan) = sectional(hj, fiber);
    let (al, be) = (hj.a.v, hj.b().v);
    let ginv = |i: usize| if i == 0 { 1.0 / a.v } else { 1.0 / b.v };
    let gdiag = |i: usize| if i == 0 { a.v } else { b.v };
    // sectional curvature of the background times h_ii h_aa
    let rt = |i: usize, k: usize| -> f64 {
        if i == k {
            0.0
        } else if i == 0 || k == 0 {
            k_rad * al * be
        } else {
            k_tan * be * be
        }
    };
    let s = |k: usize, i: usize, j: usize| fr.s(k, i, j);
    let comp = |i: usize| -> f64 {
        let mut lap = 0.0;
        let mut curv = 0.0;
        let mut quad = 0.0;
        for c in 0..n {
            let gc = ginv(c);
            lap += gc * fr.d2(c, c, i, i);
            curv += gc * rt(i, c);
            for p in 0..n {
                let gp = ginv(p);
                quad += gc
                    * gp
                    * (s(i, p, c) * s(i, p, c) + 2.0 * s(c, i, p) * s(p, i, c)
                        - 2.0 * s(c, i, p) * s(c, i, p)
                        - 4.0 * s(i, c, p) * s(c, i, p));
            }
        }
        curv *= 2.0 * gdiag(i) * fr.inv(i);
        lap - curv + 0.5 * quad
    };
    (comp(0), comp(1))
}

/// Radial component of `W^k = g^{pq} (Gamma(g) - Gamma(h))^k_pq` at a point.
pub fn deturck_point(n: usize, hj: &MetricJet, a: Jet, b: Jet) -> f64 {
    let n1 = n as f64 - 1.0;
    let (al, be) = (hj.a, hj.b());
    a.d1 / (2.0 * a.v * a.v) - al.d1 / (2.0 * al.v * a.v) - n1 * b.d1 / (2.0 * a.v * b.v)
        + n1 * be.d1 / (2.0 * al.v * b.v)
}

fn check_pair(g: &WarpedMetric, h: &WarpedMetric) -> Result<()> {
    if !same_grid(g.grid(), h.grid()) {
        return Err(Error::Contract("g and h live on different grids".into()));
    }
    if g.dim() != h.dim() || g.fiber_curvature() != h.fiber_curvature() {
        return Err(Error::Contract("g and h differ in dimension or fiber".into()));
    }
    Ok(())
}

/// Full right side of the h-flow for `g` against the background `h`.
pub fn hflow_rhs(g: &WarpedMetric, h: &WarpedMetric) -> Result<SymTensor2Radial> {
    check_pair(g, h)?;
    let hj = background_jets(h);
    let gj = coefficient_jets(g.grid(), g.a().values(), g.b().values(), g.tip_regular());
    let (rr, s): (Vec<f64>, Vec<f64>) = hj
        .iter()
        .zip(&gj)
        .map(|(hj, &(a, b))| hflow_point(g.dim(), g.fiber_curvature(), hj, a, b))
        .unzip();
    let grid = g.grid().clone();
    SymTensor2Radial::new(g.dim(), RadialProfile::new(grid.clone(), rr)?, RadialProfile::new(grid, s)?)
}

/// Radial DeTurck field of `(g, h)`.
pub fn deturck_field(g: &WarpedMetric, h: &WarpedMetric) -> Result<RadialProfile> {
    check_pair(g, h)?;
    let hj = background_jets(h);
    let gj = coefficient_jets(g.grid(), g.a().values(), g.b().values(), g.tip_regular());
    let w = hj.iter().zip(&gj).map(|(hj, &(a, b))| deturck_point(g.dim(), hj, a, b)).collect();
    RadialProfile::new(g.grid().clone(), w)
}

/// `-2 Ric(g) + L_W g` evaluated from the same jets; equal to
/// [`hflow_rhs`] up to discretization error.
pub fn deturck_rhs(g: &WarpedMetric, h: &WarpedMetric) -> Result<SymTensor2Radial> {
    let w = deturck_field(g, h)?;
    let tip = g.tip_regular() && g.grid().tip_symmetric();
    let wj = jets(g.grid(), w.values(), if tip { Parity::Odd } else { Parity::None });
    let gj = metric_jets(g);
    let (rr, s): (Vec<f64>, Vec<f64>) = gj
        .iter()
        .zip(&wj)
        .map(|(j, w)| {
            let pc = point_curvature(g.dim(), g.fiber_curvature(), j);
            let (a, b) = (j.a, j.b());
            (
                -2.0 * pc.ric_rr + w.v * a.d1 + 2.0 * a.v * w.d1,
                -2.0 * pc.ric_s + w.v * b.d1,
            )
        })
        .unzip();
    let grid = g.grid().clone();
    SymTensor2Radial::new(g.dim(), RadialProfile::new(grid.clone(), rr)?, RadialProfile::new(grid, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_assembly;
    use crate::oracle::{self, equator, WarpedField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn jet_of(f: impl Fn(f64) -> f64, r: f64) -> Jet {
        let e = 1e-4;
        let (fm2, fm, f0, fp, fp2) = (f(r - 2.0 * e), f(r - e), f(r), f(r + e), f(r + 2.0 * e));
        Jet::new(
            f0,
            (fm2 - 8.0 * fm + 8.0 * fp - fp2) / (12.0 * e),
            (-fm2 + 16.0 * fm - 30.0 * f0 + 16.0 * fp - fp2) / (12.0 * e * e),
        )
    }

    #[test]
    fn pointwise_rhs_matches_coordinate_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 4] {
            for _ in 0..4 {
                let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.2..0.2));
                let ga = move |r: f64| 1.0 + c[0] * r.sin() + c[1] * r * r;
                let gb = move |r: f64| r * r * (1.0 + c[2] * r.cos() + c[3] * r);
                let ha = move |r: f64| 1.0 + c[4] * r;
                let hb = move |r: f64| r * r * (1.0 + c[5] * r * r);
                let r = rng.gen_range(0.8..1.4);
                let hj = MetricJet { a: jet_of(&ha, r), phi: jet_of(&hb, r).sqrt() };
                let (rr, s) = hflow_point(n, 1.0, &hj, jet_of(&ga, r), jet_of(&gb, r));
                let gf = WarpedField { n, fiber: 1.0, a: ga, b: gb };
                let hf = WarpedField { n, fiber: 1.0, a: ha, b: hb };
                let x = equator(n, r);
                let o = oracle::hflow_rhs(&gf, &hf, &x, 1e-3);
                // the oracle works in angular coordinates; at the equator the
                // last angle direction has unit round metric
                let scale = o[0].abs().max(o[n * n - 1].abs()).max(1.0);
                assert!((rr - o[0]).abs() / scale < 1e-4, "rr {rr} {}", o[0]);
                assert!((s - o[n * n - 1]).abs() / scale < 1e-4, "s {s} {}", o[n * n - 1]);
                let w = deturck_point(n, &hj, jet_of(&ga, r), jet_of(&gb, r));
                let ow = oracle::deturck_vector(&gf, &hf, &x, 1e-3);
                assert!((w - ow[0]).abs() < 1e-6, "W {w} {}", ow[0]);
            }
        }
    }

    #[test]
    fn equal_metrics_give_minus_twice_ricci() {
        let grid = Arc::new(RadialGrid::uniform(0.4, 1.4, 200).unwrap());
        let h = WarpedMetric::new(
            3,
            RadialProfile::constant(grid.clone(), 1.0),
            RadialProfile::from_fn(grid.clone(), |r| r.sin().powi(2)).unwrap(),
            false,
        )
        .unwrap();
        let rhs = hflow_rhs(&h, &h).unwrap();
        let ca = curvature_assembly(&h).unwrap();
        let m = grid.len();
        for k in 0..m {
            // round sphere: Ric = 2 g; one-sided stencils at the two ends
            let tol = if k < 2 || k + 2 >= m { 1e-3 } else { 1e-7 };
            let r = grid.r(k);
            assert!((rhs.rr.values()[k] + 4.0).abs() < tol);
            assert!((rhs.s.values()[k] + 4.0 * r.sin().powi(2)).abs() < tol);
            assert!((ca.ricci.rr.values()[k] - 2.0).abs() < tol);
        }
        assert!(deturck_field(&h, &h).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn flat_pair_is_stationary_and_scale_invariant() {
        let grid = Arc::new(RadialGrid::cell_centered(2.0, 100).unwrap());
        let e = WarpedMetric::euclidean(3, grid.clone()).unwrap();
        assert!(hflow_rhs(&e, &e).unwrap().max_abs() < 1e-9);
        let g = e.with_profiles(vec![3.0; 100], e.b().values().iter().map(|b| 3.0 * b).collect()).unwrap();
        assert!(deturck_field(&g, &e).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn literal_and_deturck_forms_agree_on_grid() {
        let grid = Arc::new(RadialGrid::cell_centered(2.0, 400).unwrap());
        let mk = |fa: &dyn Fn(f64) -> f64, fb: &dyn Fn(f64) -> f64| {
            WarpedMetric::new(
                3,
                RadialProfile::from_fn(grid.clone(), fa).unwrap(),
                RadialProfile::from_fn(grid.clone(), fb).unwrap(),
                true,
            )
            .unwrap()
        };
        let bump = |r: f64| (-r * r).exp();
        let g = mk(&|r| 1.0 + 0.3 * bump(r) + 0.2 * r * r * bump(r), &|r| r * r * (1.0 + 0.3 * bump(r)));
        let h = mk(&|r| 1.0 + 0.1 * r * r * bump(r), &|r| r * r);
        let a = hflow_rhs(&g, &h).unwrap();
        let b = deturck_rhs(&g, &h).unwrap();
        let r = grid.nodes();
        for k in 0..grid.len() - 6 {
            assert!((a.rr.values()[k] - b.rr.values()[k]).abs() < 1e-6, "rr at {}", r[k]);
            assert!((a.s.values()[k] - b.s.values()[k]).abs() / (r[k] * r[k]) < 1e-6, "s at {}", r[k]);
        }
    }
}
