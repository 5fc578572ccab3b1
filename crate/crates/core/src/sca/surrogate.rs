//! First-order surrogates used to convexify the rate constraints.
//!
//! Each function comes in two flavours: a numeric evaluation (used by the
//! tests and the oracle probes) and a [`LinExpr`] builder over solver
//! variables with the same expansion point.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::cvxsub::{CVar, LinExpr, Var};

fn inner(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    h.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

/// Lower bound on `|h^H w|² / z` around `(w0, z0)`:
/// `2 Re{conj(a) h^H w} / z0 − |a|² z / z0²` with `a = h^H w0`.
pub fn qol_lower_bound(h: &[Complex64], w0: &[Complex64], z0: f64, w: &[Complex64], z: f64) -> f64 {
    let a = inner(h, w0);
    let hw = inner(h, w);
    2.0 * (a.conj() * hw).re / z0 - a.norm_sqr() * z / (z0 * z0)
}

/// Lower bound on `|h^H v|² / σ²` around `v0`.
pub fn relay_lower_bound(h_ld: &[Complex64], v0: &[Complex64], v: &[Complex64], sigma2: f64) -> f64 {
    let b = inner(h_ld, v0);
    let hv = inner(h_ld, v);
    (2.0 * (b.conj() * hv).re - b.norm_sqr()) / sigma2
}

/// Tangent of `log2(1 + γ)` at `g0`; an upper bound for all `γ > -1`.
pub fn log_tangent(g0: f64, g: f64) -> f64 {
    (1.0 + g0).log2() + (g - g0) / ((1.0 + g0) * LN_2)
}

pub(crate) fn qol_expr(h: &[Complex64], w0: &[Complex64], z0: f64, w: &CVar, z: Var) -> LinExpr {
    let a = inner(h, w0);
    let (re, im) = w.inner(h);
    let mut e = LinExpr::zero();
    e.add_expr(&re, 2.0 * a.re / z0)
        .add_expr(&im, 2.0 * a.im / z0)
        .add_term(z, -a.norm_sqr() / (z0 * z0));
    e
}

pub(crate) fn relay_expr(h_ld: &[Complex64], v0: &[Complex64], v: &CVar, sigma2: f64) -> LinExpr {
    let b = inner(h_ld, v0);
    let (re, im) = v.inner(h_ld);
    let mut e = LinExpr::constant(-b.norm_sqr() / sigma2);
    e.add_expr(&re, 2.0 * b.re / sigma2)
        .add_expr(&im, 2.0 * b.im / sigma2);
    e
}

pub(crate) fn tangent_expr(g0: f64, g: Var) -> LinExpr {
    let slope = 1.0 / ((1.0 + g0) * LN_2);
    let mut e = LinExpr::constant((1.0 + g0).log2() - g0 * slope);
    e.add_term(g, slope);
    e
}
