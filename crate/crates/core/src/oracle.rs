//! Brute-force curvature oracle.
//!
//! Works with an arbitrary metric field `x -> g_ij(x)` on a coordinate
//! patch of `R^n` and evaluates Christoffel symbols, the Riemann tensor and
//! the h-flow operator by nested fourth-order central differences of the
//! coordinate formulas. Nothing here knows about rotational symmetry, which
//! makes it an independent check on the reduced formulas used elsewhere.
//!
//! Tensors are flat row-major `Vec<f64>`. The curvature convention is
//! `R_ijkl = <R(e_i, e_j) e_l, e_k>` so that `Ric_ik = g^{jl} R_ijkl` and
//! `R_ijij` is a sectional curvature.

use std::f64::consts::FRAC_PI_2;

/// A metric field on a coordinate patch.
pub trait MetricField {
    fn dim(&self) -> usize;
    /// Row-major `n x n` matrix `g_ij(x)`.
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

impl<F: Fn(&[f64]) -> Vec<f64>> MetricField for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.1)(x)
    }
}

/// `A(r) dr^2 + B(r) h` in polar coordinates `(r, theta_1, ..)`.
///
/// With `fiber = 1` the angles are hyperspherical, with `fiber = 0` they are
/// flat torus coordinates.
pub struct WarpedField<FA, FB> {
    pub n: usize,
    pub fiber: f64,
    pub a: FA,
    pub b: FB,
}

impl<FA: Fn(f64) -> f64, FB: Fn(f64) -> f64> MetricField for WarpedField<FA, FB> {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        g[0] = (self.a)(x[0]);
        let b = (self.b)(x[0]);
        let mut s = 1.0;
        for k in 1..n {
            g[k * n + k] = b * s;
            if self.fiber > 0.0 {
                s *= x[k].sin().powi(2);
            }
        }
        g
    }
}

/// The point `(r, pi/2, .., pi/2)` where the angular frame is orthonormal
/// for the round metric.
pub fn equator(n: usize, r: f64) -> Vec<f64> {
    let mut x = vec![FRAC_PI_2; n];
    x[0] = r;
    x
}

fn partial(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], k: usize, step: f64) -> Vec<f64> {
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[k] += s * step;
        f(&y)
    };
    let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
    (0..m1.len())
        .map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * step))
        .collect()
}

/// `d_k T` for every `k`, laid out as `out[k * len + idx]`.
fn gradient(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len()).flat_map(|k| partial(f, x, k, step)).collect()
}

pub fn invert(m: &[f64], n: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))
            .unwrap();
        for j in 0..n {
            a.swap(c * n + j, piv * n + j);
            inv.swap(c * n + j, piv * n + j);
        }
        let d = a[c * n + c];
        for j in 0..n {
            a[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = a[i * n + c];
                if f != 0.0 {
                    for j in 0..n {
                        a[i * n + j] -= f * a[c * n + j];
                        inv[i * n + j] -= f * inv[c * n + j];
                    }
                }
            }
        }
    }
    inv
}

/// Finite-difference evaluator for one metric field.
pub struct Oracle<'a> {
    field: &'a dyn MetricField,
    pub step: f64,
}

impl<'a> Oracle<'a> {
    pub fn new(field: &'a dyn MetricField) -> Self {
        Self { field, step: 1e-3 }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    fn n(&self) -> usize {
        self.field.dim()
    }

    pub fn metric(&self, x: &[f64]) -> Vec<f64> {
        self.field.eval(x)
    }

    /// `Gamma^l_ij` at `[l][i][j]`.
    pub fn christoffel(&self, x: &[f64]) -> Vec<f64> {
        christoffel_with(self.field, x, self.step)
    }

    /// Lowered Riemann tensor `R_ijkl`.
    pub fn riemann(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let s = self.step;
        let field = self.field;
        let gam = self.christoffel(x);
        let dgam = gradient(&|y: &[f64]| christoffel_with(field, y, s), x, s);
        let g = self.metric(x);
        let n3 = n * n * n;
        let gm = |l: usize, i: usize, j: usize| gam[(l * n + i) * n + j];
        let dg = |m: usize, l: usize, i: usize, j: usize| dgam[m * n3 + (l * n + i) * n + j];
        // R^l_{ijk}: R(e_i, e_j) e_k = R^l_{ijk} e_l
        let mut up = vec![0.0; n * n3];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = dg(i, l, j, k) - dg(j, l, i, k);
                        for p in 0..n {
                            v += gm(l, i, p) * gm(p, j, k) - gm(l, j, p) * gm(p, i, k);
                        }
                        up[((l * n + i) * n + j) * n + k] = v;
                    }
                }
            }
        }
        let mut rm = vec![0.0; n * n3];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        for m in 0..n {
                            v += g[k * n + m] * up[((m * n + i) * n + j) * n + l];
                        }
                        rm[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
        rm
    }

    pub fn ricci(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let rm = self.riemann(x);
        let gi = invert(&self.metric(x), n);
        let mut ric = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                for j in 0..n {
                    for l in 0..n {
                        v += gi[j * n + l] * rm[((i * n + j) * n + k) * n + l];
                    }
                }
                ric[i * n + k] = v;
            }
        }
        ric
    }

    pub fn scalar(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let gi = invert(&self.metric(x), n);
        let ric = self.ricci(x);
        (0..n * n).map(|k| gi[k] * ric[k]).sum()
    }
}

fn christoffel_with(field: &dyn MetricField, x: &[f64], step: f64) -> Vec<f64> {
    let n = field.dim();
    let g = field.eval(x);
    let gi = invert(&g, n);
    let dg = gradient(&|y: &[f64]| field.eval(y), x, step);
    let d = |k: usize, i: usize, j: usize| dg[k * n * n + i * n + j];
    let mut out = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for m in 0..n {
                    v += gi[l * n + m] * (d(i, m, j) + d(j, m, i) - d(m, i, j));
                }
                out[(l * n + i) * n + j] = 0.5 * v;
            }
        }
    }
    out
}

/// `W^k = g^{pq} (Gamma(g)^k_pq - Gamma(h)^k_pq)`.
pub fn deturck_vector(g: &dyn MetricField, h: &dyn MetricField, x: &[f64], step: f64) -> Vec<f64> {
    let n = g.dim();
    let gi = invert(&g.eval(x), n);
    let cg = christoffel_with(g, x, step);
    let ch = christoffel_with(h, x, step);
    (0..n)
        .map(|k| {
            let mut v = 0.0;
            for p in 0..n {
                for q in 0..n {
                    let idx = (k * n + p) * n + q;
                    v += gi[p * n + q] * (cg[idx] - ch[idx]);
                }
            }
            v
        })
        .collect()
}

/// `nabla^h_k g_ij` at `[k][i][j]`.
fn background_gradient(g: &dyn MetricField, h: &dyn MetricField, x: &[f64], step: f64) -> Vec<f64> {
    let n = g.dim();
    let gv = g.eval(x);
    let dg = gradient(&|y: &[f64]| g.eval(y), x, step);
    let gam = christoffel_with(h, x, step);
    let gm = |l: usize, i: usize, j: usize| gam[(l * n + i) * n + j];
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = dg[k * n * n + i * n + j];
                for l in 0..n {
                    v -= gm(l, k, i) * gv[l * n + j] + gm(l, k, j) * gv[i * n + l];
                }
                out[(k * n + i) * n + j] = v;
            }
        }
    }
    out
}

/// Right side of the h-flow for the metric `g` against background `h`,
/// written term by term from the coordinate formula.
pub fn hflow_rhs(g: &dyn MetricField, h: &dyn MetricField, x: &[f64], step: f64) -> Vec<f64> {
    let n = g.dim();
    let gv = g.eval(x);
    let gi = invert(&gv, n);
    let hi = invert(&h.eval(x), n);
    let rt = Oracle::new(h).with_step(step).riemann(x);
    let gam = christoffel_with(h, x, step);
    let s = background_gradient(g, h, x, step);
    let ds = gradient(&|y: &[f64]| background_gradient(g, h, y, step), x, step);
    let n3 = n * n * n;
    let sv = |k: usize, i: usize, j: usize| s[(k * n + i) * n + j];
    let gm = |l: usize, i: usize, j: usize| gam[(l * n + i) * n + j];
    let r4 = |i: usize, j: usize, k: usize, l: usize| rt[((i * n + j) * n + k) * n + l];
    // nabla_m nabla_k g_ij
    let d2 = |m: usize, k: usize, i: usize, j: usize| {
        let mut v = ds[m * n3 + (k * n + i) * n + j];
        for l in 0..n {
            v -= gm(l, m, k) * sv(l, i, j) + gm(l, m, i) * sv(k, l, j) + gm(l, m, j) * sv(k, i, l);
        }
        v
    };
    let ginv = |a: usize, b: usize| gi[a * n + b];
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut lap = 0.0;
            let mut curv = 0.0;
            let mut quad = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let gab = ginv(a, b);
                    if gab == 0.0 {
                        continue;
                    }
                    lap += gab * d2(a, b, i, j);
                    for p in 0..n {
                        for q in 0..n {
                            let hpq = hi[p * n + q];
                            if hpq != 0.0 {
                                curv += gab * hpq * (gv[i * n + p] * r4(j, a, q, b) + gv[j * n + p] * r4(i, a, q, b));
                            }
                            let gpq = ginv(p, q);
                            if gpq != 0.0 {
                                quad += gab
                                    * gpq
                                    * (sv(i, p, a) * sv(j, q, b) + 2.0 * sv(a, j, p) * sv(q, i, b)
                                        - 2.0 * sv(a, j, p) * sv(b, i, q)
                                        - 2.0 * sv(j, a, p) * sv(b, i, q)
                                        - 2.0 * sv(i, a, p) * sv(b, j, q));
                            }
                        }
                    }
                }
            }
            out[i * n + j] = lap - curv + 0.5 * quad;
        }
    }
    out
}

/// `-2 Ric(g) + L_W g` with the DeTurck vector field of `(g, h)`.
pub fn deturck_rhs(g: &dyn MetricField, h: &dyn MetricField, x: &[f64], step: f64) -> Vec<f64> {
    let n = g.dim();
    let gv = g.eval(x);
    let ric = Oracle::new(g).with_step(step).ricci(x);
    let w = deturck_vector(g, h, x, step);
    let dw = gradient(&|y: &[f64]| deturck_vector(g, h, y, step), x, step);
    let dg = gradient(&|y: &[f64]| g.eval(y), x, step);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut lie = 0.0;
            for k in 0..n {
                lie += w[k] * dg[k * n * n + i * n + j]
                    + gv[k * n + j] * dw[i * n + k]
                    + gv[i * n + k] * dw[j * n + k];
            }
            out[i * n + j] = -2.0 * ric[i * n + j] + lie;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_cap() {
        let f = WarpedField { n: 3, fiber: 1.0, a: |_| 1.0, b: |r: f64| r.sin().powi(2) };
        let o = Oracle::new(&f);
        let x = equator(3, 0.9);
        assert!((o.scalar(&x) - 6.0).abs() < 1e-6);
        let rm = o.riemann(&x);
        // R_0101 = K * g_00 * g_11
        assert!((rm[(0 * 3 + 1) * 3 * 3 + 0 * 3 + 1] - 0.9f64.sin().powi(2)).abs() < 1e-6);
    }

    #[test]
    fn cylinder_ricci() {
        let f = WarpedField { n: 3, fiber: 1.0, a: |_| 1.0, b: |_| 1.0 };
        let ric = Oracle::new(&f).ricci(&equator(3, 1.3));
        assert!(ric[0].abs() < 1e-8);
        assert!((ric[4] - 1.0).abs() < 1e-8);
        assert!((ric[8] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn flat_torus_fiber_is_flat() {
        let f = WarpedField { n: 4, fiber: 0.0, a: |_| 1.0, b: |_| 2.0 };
        assert!(Oracle::new(&f).scalar(&equator(4, 0.7)).abs() < 1e-9);
    }

    #[test]
    fn hflow_equals_deturck_form() {
        let g = WarpedField { n: 3, fiber: 1.0, a: |r: f64| 1.0 + 0.2 * r.sin(), b: |r: f64| r * r * (1.1 + 0.1 * r.cos()) };
        let h = WarpedField { n: 3, fiber: 1.0, a: |r: f64| 1.0 + 0.05 * r, b: |r: f64| r * r };
        let x = equator(3, 1.2);
        let a = hflow_rhs(&g, &h, &x, 1e-3);
        let b = deturck_rhs(&g, &h, &x, 1e-3);
        for k in 0..9 {
            assert!((a[k] - b[k]).abs() < 1e-6, "{k}: {} {}", a[k], b[k]);
        }
    }

    #[test]
    fn inverse_of_general_matrix() {
        let m = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let inv = invert(&m, 3);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
