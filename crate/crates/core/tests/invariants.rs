use std::sync::Arc;

use conelab::constructions::{make_cone, make_zero_area_singularity, ConeSpec};
use conelab::curvature::scalar_curvature_warped;
use conelab::mass::adm_mass;
use conelab::mollify::{mollify_fn, MollifierSpec};
use conelab::{RadialGrid, SingularSet, WarpedMetric};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euclidean_space_is_flat(n in 3usize..7, r0 in 0.1f64..1.0, len in 1.0f64..5.0) {
        let grid = Arc::new(RadialGrid::uniform(r0, r0 + len, 41).unwrap());
        let s = scalar_curvature_warped(&WarpedMetric::euclidean(n, grid).unwrap()).unwrap();
        prop_assert!(s.max_abs() < 1e-8, "{}", s.max_abs());
    }

    #[test]
    fn straight_cone_curvature_matches_closed_form(n in 3usize..6, alpha in 0.2f64..2.0) {
        let grid = Arc::new(RadialGrid::uniform(0.5, 2.0, 31).unwrap());
        let g = make_cone(&ConeSpec::new(n, alpha, 1.0).unwrap(), grid.clone()).unwrap();
        let s = scalar_curvature_warped(&g).unwrap();
        let c = ((n - 1) * (n - 2)) as f64 * (1.0 - alpha * alpha) / (alpha * alpha);
        for (&r, &v) in grid.nodes().iter().zip(s.values()) {
            let want = c / (r * r);
            prop_assert!((v - want).abs() <= 1e-8 * (1.0 + want.abs()), "r {r}: {v} vs {want}");
        }
    }

    #[test]
    fn zero_area_mass_is_minus_two_m(m in 0.2f64..3.0) {
        let grid = Arc::new(RadialGrid::geometric(2.5 * m, 1000.0 * m, 600).unwrap());
        let z = make_zero_area_singularity(m, grid).unwrap();
        let rep = adm_mass(&z.metric).unwrap();
        prop_assert!((rep.extrapolated_mass / m + 2.0).abs() < 1e-3, "{}", rep.extrapolated_mass);
    }

    #[test]
    fn mollification_is_identity_away_from_the_axis(eps in 0.05f64..0.3, k in 0.2f64..1.5) {
        let grid = Arc::new(RadialGrid::uniform(0.0, 2.0, 161).unwrap());
        let f = |r: f64| r.powf(k);
        let spec = MollifierSpec::new(3, eps, SingularSet::axis()).unwrap();
        let out = mollify_fn(f, &grid, &spec).unwrap();
        for (&r, &v) in grid.nodes().iter().zip(out.values()) {
            if r > 2.0 * eps {
                prop_assert!((v - f(r)).abs() < 1e-12, "r {r}: {v} vs {}", f(r));
            }
        }
    }
}
