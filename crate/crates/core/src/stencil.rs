//! Finite-difference derivatives, interpolation and quadrature on radial grids.
//!
//! Interior derivatives use fourth-order central stencils in the index
//! coordinate. On axis-symmetric grids the inner end is closed with parity
//! ghost nodes; otherwise both ends fall back to second-order one-sided
//! stencils (central second order one node in).

use crate::grid::RadialGrid;

/// Reflection behaviour of a sampled function through `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    None,
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> Option<f64> {
        match self {
            Parity::None => None,
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
        }
    }
}

/// Value with its first two radial derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    pub fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }

    pub fn scale(self, c: f64) -> Jet {
        Jet {
            v: c * self.v,
            d1: c * self.d1,
            d2: c * self.d2,
        }
    }

    pub fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }

    /// `f(self)` given `f, f', f''` at `self.v`.
    pub fn compose(self, f: f64, df: f64, d2f: f64) -> Jet {
        Jet {
            v: f,
            d1: df * self.d1,
            d2: d2f * self.d1 * self.d1 + df * self.d2,
        }
    }

    pub fn powf(self, p: f64) -> Jet {
        let v = self.v;
        self.compose(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    pub fn sqrt(self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(self) -> Jet {
        let v = self.v;
        self.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

/// First and second radial derivatives of sampled values.
pub fn derivatives(grid: &RadialGrid, values: &[f64], parity: Parity) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len();
    assert_eq!(values.len(), n, "derivative input length mismatch");
    let ghost = if grid.tip_symmetric() { parity.sign() } else { None };
    let at = |k: isize| -> f64 {
        if k >= 0 {
            values[k as usize]
        } else {
            // index -1 mirrors node 0, -2 mirrors node 1
            ghost.expect("ghost requested without parity") * values[(-k - 1) as usize]
        }
    };
    let mut dx = vec![0.0; n];
    let mut dxx = vec![0.0; n];
    for k in 0..n {
        let ki = k as isize;
        let left_ok = ghost.is_some() || k >= 2;
        let right_ok = k + 2 < n;
        if left_ok && right_ok {
            let (fm2, fm1, f0, fp1, fp2) = (at(ki - 2), at(ki - 1), at(ki), at(ki + 1), at(ki + 2));
            dx[k] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / 12.0;
            dxx[k] = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / 12.0;
        } else if k == 0 && ghost.is_none() {
            let (f0, f1, f2, f3) = (values[0], values[1], values[2], values[3]);
            dx[k] = (-3.0 * f0 + 4.0 * f1 - f2) / 2.0;
            dxx[k] = 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3;
        } else if k == n - 1 {
            let (f0, f1, f2, f3) = (values[k], values[k - 1], values[k - 2], values[k - 3]);
            dx[k] = (3.0 * f0 - 4.0 * f1 + f2) / 2.0;
            dxx[k] = 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3;
        } else {
            let (fm, f0, fp) = (at(ki - 1), at(ki), at(ki + 1));
            dx[k] = (fp - fm) / 2.0;
            dxx[k] = fp - 2.0 * f0 + fm;
        }
    }
    let jac = grid.jac();
    let jac2 = grid.jac2();
    for k in 0..n {
        let fr = dx[k] / jac[k];
        dxx[k] = (dxx[k] - jac2[k] * fr) / (jac[k] * jac[k]);
        dx[k] = fr;
    }
    (dx, dxx)
}

pub fn first_derivative(grid: &RadialGrid, values: &[f64], parity: Parity) -> Vec<f64> {
    derivatives(grid, values, parity).0
}

pub fn jets(grid: &RadialGrid, values: &[f64], parity: Parity) -> Vec<Jet> {
    let (d1, d2) = derivatives(grid, values, parity);
    values
        .iter()
        .zip(d1.iter().zip(&d2))
        .map(|(&v, (&a, &b))| Jet::new(v, a, b))
        .collect()
}

/// Local cubic Lagrange interpolation of grid samples.
#[derive(Debug, Clone)]
pub struct Interpolator<'a> {
    grid: &'a RadialGrid,
    values: &'a [f64],
    ghost: Option<f64>,
}

impl<'a> Interpolator<'a> {
    pub fn new(grid: &'a RadialGrid, values: &'a [f64], parity: Parity) -> Self {
        let ghost = if grid.tip_symmetric() { parity.sign() } else { None };
        Self { grid, values, ghost }
    }

    fn node(&self, k: isize) -> (f64, f64) {
        if k >= 0 {
            let k = k as usize;
            (self.grid.r(k), self.values[k])
        } else {
            let m = (-k - 1) as usize;
            (-self.grid.r(m), self.ghost.unwrap_or(1.0) * self.values[m])
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.grid.len() as isize;
        let mut r = r;
        if self.ghost.is_some() && r < 0.0 {
            // reflect into the represented half line
            let s = self.ghost.unwrap();
            return s * self.eval(-r);
        }
        if r > self.grid.r_max() {
            r = r.min(self.grid.r_max() + 0.5 * self.grid.min_spacing().max(1e-300));
        }
        let cell = self.grid.locate(r) as isize;
        let lo_min = if self.ghost.is_some() { -2 } else { 0 };
        let start = if r < self.grid.r(0) && self.ghost.is_some() {
            -2
        } else {
            (cell - 1).clamp(lo_min, n - 4)
        };
        let pts: [(f64, f64); 4] = [
            self.node(start),
            self.node(start + 1),
            self.node(start + 2),
            self.node(start + 3),
        ];
        lagrange4(&pts, r)
    }
}

fn lagrange4(pts: &[(f64, f64); 4], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (x - pts[j].0) / (pts[i].0 - pts[j].0);
            }
        }
        acc += w * pts[i].1;
    }
    acc
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Integral of `f` over `[a, b]` by composite Gauss-Legendre on `panels` panels.
pub fn integrate_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi * f(mid + 0.5 * h * xi);
        }
    }
    acc * 0.5 * h
}

/// Integral of sampled values over `[a, b]`: each grid cell integrates the
/// local cubic interpolant exactly. The stretch between the axis and the first
/// node of a symmetric grid is covered by the same interpolant.
pub fn integrate(grid: &RadialGrid, values: &[f64], parity: Parity, a: f64, b: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let interp = Interpolator::new(grid, values, parity);
    let (gx, gw) = gauss_legendre(3);
    let segment = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| w * interp.eval(mid + half * x))
            .sum::<f64>()
            * half
    };
    let mut acc = 0.0;
    if a < grid.r(0) {
        acc += segment(a, b.min(grid.r(0)));
    }
    for k in 0..grid.len() - 1 {
        let (lo, hi) = (grid.r(k).max(a), grid.r(k + 1).min(b));
        acc += segment(lo, hi);
    }
    acc
}

/// Cumulative integral from the first node (or the axis) to every node.
pub fn cumulative(grid: &RadialGrid, values: &[f64], parity: Parity) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let start = grid.lower();
    let mut acc = integrate(grid, values, parity, start, grid.r(0));
    out.push(acc);
    for k in 1..grid.len() {
        acc += integrate(grid, values, parity, grid.r(k - 1), grid.r(k));
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(33);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(64)).sum();
        assert!((q - 2.0 / 65.0).abs() < 1e-13);
        let (x3, w3) = gauss_legendre(3);
        let q3: f64 = x3.iter().zip(&w3).map(|(x, w)| w * x.powi(4)).sum();
        assert!((q3 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn interior_stencil_is_fourth_order() {
        let mut errs = vec![];
        for n in [41, 81, 161] {
            let g = RadialGrid::uniform(0.5, 2.5, n).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|r| r.sin()).collect();
            let (d1, d2) = derivatives(&g, &v, Parity::None);
            let k = n / 2;
            let r = g.r(k);
            errs.push(((d1[k] - r.cos()).abs(), (d2[k] + r.sin()).abs()));
        }
        for w in errs.windows(2) {
            assert!((w[0].0 / w[1].0).log2() > 3.8);
            assert!((w[0].1 / w[1].1).log2() > 3.8);
        }
    }

    #[test]
    fn boundary_stencils_are_second_order() {
        let mut errs = vec![];
        for n in [41, 81, 161, 321] {
            let g = RadialGrid::uniform(0.5, 2.5, n).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|r| r.exp()).collect();
            let (_, d2) = derivatives(&g, &v, Parity::None);
            errs.push((d2[0] - 0.5f64.exp()).abs());
        }
        let slope = (errs[2] / errs[3]).log2();
        assert!((slope - 2.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn parity_ghosts_keep_fourth_order_at_axis() {
        let mut errs = vec![];
        for n in [40, 80, 160] {
            let g = RadialGrid::cell_centered(2.0, n).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|r| r.sin()).collect();
            let (d1, d2) = derivatives(&g, &v, Parity::Odd);
            let e = (0..3)
                .map(|k| (d1[k] - g.r(k).cos()).abs().max((d2[k] + g.r(k).sin()).abs()))
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!((errs[0] / errs[1]).log2() > 3.7);
        assert!((errs[1] / errs[2]).log2() > 3.7);
    }

    #[test]
    fn mapped_grids_differentiate_accurately() {
        let g = RadialGrid::geometric(1e-3, 10.0, 400).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|r| r.powf(-0.3)).collect();
        let (d1, d2) = derivatives(&g, &v, Parity::None);
        for k in 2..398 {
            let r = g.r(k);
            let e1 = (-0.3 * r.powf(-1.3) - d1[k]).abs() / r.powf(-1.3);
            let e2 = (0.39 * r.powf(-2.3) - d2[k]).abs() / r.powf(-2.3);
            assert!(e1 < 1e-6 && e2 < 1e-6, "{k} {e1} {e2}");
        }
        let s = RadialGrid::sinh_core(0.1, 10.0, 200).unwrap();
        let v: Vec<f64> = s.nodes().iter().map(|r| (r * r).cos()).collect();
        let (d1, _) = derivatives(&s, &v, Parity::Even);
        for k in 0..60 {
            let r = s.r(k);
            assert!((d1[k] + 2.0 * r * (r * r).sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn quadrature_and_interpolation() {
        let g = RadialGrid::cell_centered(1.0, 64).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let i = integrate(&g, &v, Parity::Even, 0.0, 1.0);
        assert!((i - 1.0 / 3.0).abs() < 1e-12);
        let p = Interpolator::new(&g, &v, Parity::Even);
        assert!((p.eval(0.0)).abs() < 1e-12);
        assert!((p.eval(0.3337) - 0.3337f64.powi(2)).abs() < 1e-12);
        let c = cumulative(&g, &v, Parity::Even);
        assert!((c[63] - g.r(63).powi(3) / 3.0).abs() < 1e-12);
    }
}
