//! Pointwise tensor calculus for SO(n)-invariant fields.
//!
//! At a point `p` on the sphere of radius `r` we use coordinates
//! `(r, y^1, .., y^{n-1})` with `y` normal coordinates of the unit sphere at
//! `p`, so the round metric is `delta` there and its Christoffel symbols
//! vanish. An invariant 2-tensor `T_rr dr^2 + T_s h` then has covariant
//! derivative (with respect to a warped metric `alpha dr^2 + beta h`)
//!
//! * `S_rrr = P = T_rr' - (alpha'/alpha) T_rr`
//! * `S_rab = Q delta_ab`, `Q = T_s' - (beta'/beta) T_s`
//! * `S_arb = S_abr = U delta_ab`, `U = (beta'/2) (T_rr/alpha - T_s/beta)`
//!
//! and all other components vanish identically, so their tangential
//! derivatives vanish at `p`. Index 0 is the radial direction.

use crate::metric::MetricJet;
use crate::stencil::Jet;

/// Connection of a warped metric at one point plus the first two covariant
/// derivatives of an invariant tensor.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    pub n: usize,
    pub alpha: Jet,
    pub beta: Jet,
    p: f64,
    q: f64,
    u: f64,
    dp: f64,
    dq: f64,
    du: f64,
}

impl LocalFrame {
    /// `conn` supplies the connection; `trr`, `ts` the tensor components.
    pub fn new(n: usize, conn: &MetricJet, trr: Jet, ts: Jet) -> Self {
        let alpha = conn.a;
        let beta = conn.b();
        let (al, al1, al2) = (alpha.v, alpha.d1, alpha.d2);
        let (be, be1, be2) = (beta.v, beta.d1, beta.d2);
        let p = trr.d1 - (al1 / al) * trr.v;
        let dp = trr.d2 - (al2 / al - al1 * al1 / (al * al)) * trr.v - (al1 / al) * trr.d1;
        let q = ts.d1 - (be1 / be) * ts.v;
        let dq = ts.d2 - (be2 / be - be1 * be1 / (be * be)) * ts.v - (be1 / be) * ts.d1;
        let m = trr.v / al - ts.v / be;
        let dm = trr.d1 / al - trr.v * al1 / (al * al) - ts.d1 / be + ts.v * be1 / (be * be);
        let u = 0.5 * be1 * m;
        let du = 0.5 * be2 * m + 0.5 * be1 * dm;
        Self {
            n,
            alpha,
            beta,
            p,
            q,
            u,
            dp,
            dq,
            du,
        }
    }

    pub fn pqu(&self) -> (f64, f64, f64) {
        (self.p, self.q, self.u)
    }

    /// Christoffel symbol `Gamma^l_ij` of the connection metric at `p`.
    #[inline]
    pub fn gamma(&self, l: usize, i: usize, j: usize) -> f64 {
        if l == 0 {
            if i == 0 && j == 0 {
                0.5 * self.alpha.d1 / self.alpha.v
            } else if i == j && i > 0 {
                -0.5 * self.beta.d1 / self.alpha.v
            } else {
                0.0
            }
        } else if (i == 0 && j == l) || (j == 0 && i == l) {
            0.5 * self.beta.d1 / self.beta.v
        } else {
            0.0
        }
    }

    #[inline]
    fn pattern(k: usize, i: usize, j: usize, p: f64, q: f64, u: f64) -> f64 {
        if k == 0 {
            if i == 0 && j == 0 {
                p
            } else if i == j {
                q
            } else {
                0.0
            }
        } else if (i == 0 && j == k) || (j == 0 && i == k) {
            u
        } else {
            0.0
        }
    }

    /// First covariant derivative `S_kij = nabla_k T_ij`.
    #[inline]
    pub fn s(&self, k: usize, i: usize, j: usize) -> f64 {
        Self::pattern(k, i, j, self.p, self.q, self.u)
    }

    /// Coordinate derivative `d_m S_kij` at `p`.
    #[inline]
    fn ds(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        if m == 0 {
            Self::pattern(k, i, j, self.dp, self.dq, self.du)
        } else {
            0.0
        }
    }

    /// Second covariant derivative `nabla_m nabla_k T_ij`.
    pub fn d2(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        let mut v = self.ds(m, k, i, j);
        for l in 0..self.n {
            v -= self.gamma(l, m, k) * self.s(l, i, j)
                + self.gamma(l, m, i) * self.s(k, l, j)
                + self.gamma(l, m, j) * self.s(k, i, l);
        }
        v
    }

    /// Inverse of the connection metric (diagonal) at index `i`.
    #[inline]
    pub fn inv(&self, i: usize) -> f64 {
        if i == 0 {
            1.0 / self.alpha.v
        } else {
            1.0 / self.beta.v
        }
    }

    /// `|nabla T|^2` measured with the connection metric.
    pub fn grad_norm_sq(&self) -> f64 {
        let (a, b) = (self.alpha.v, self.beta.v);
        let n1 = self.n as f64 - 1.0;
        self.p * self.p / (a * a * a) + n1 * (self.q * self.q + 2.0 * self.u * self.u) / (a * b * b)
    }

    /// `|nabla^2 T|^2` measured with the connection metric.
    pub fn hess_norm_sq(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for m in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let d = self.d2(m, k, i, j);
                        if d != 0.0 {
                            acc += d * d * self.inv(m) * self.inv(k) * self.inv(i) * self.inv(j);
                        }
                    }
                }
            }
        }
        acc
    }
}

/// Sectional curvatures `(K_rad, K_tan)` of `A dr^2 + phi^2 h` where `h` has
/// constant curvature `fiber`.
#[inline]
pub fn sectional(jet: &MetricJet, fiber: f64) -> (f64, f64) {
    let (a, a1) = (jet.a.v, jet.a.d1);
    let (p, p1, p2) = (jet.phi.v, jet.phi.d1, jet.phi.d2);
    let k_rad = -p2 / (a * p) + a1 * p1 / (2.0 * a * a * p);
    let k_tan = (fiber - p1 * p1 / a) / (p * p);
    (k_rad, k_tan)
}
