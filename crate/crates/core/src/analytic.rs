//! Closed-form quantities attached to the semicircle law
//!
//! The semicircle law `m1` lives on the vertical axis with density
//! `(1/pi) sqrt(2 - t^2)` on `[-sqrt 2, sqrt 2]`. Its potential is described
//! in the plane through the function
//!
//! `g(z) = (1/2pi) int log|z - cos(theta)| dtheta = log|z + sqrt(z^2-1)| - log 2`
//!
//! with the branch of `sqrt(z^2-1)` that behaves like `z` at infinity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI, SQRT_2, TAU};

use crate::error::{domain, Result};
use crate::kernel::Point;

/// Half-width of the support of the semicircle law.
pub const SUPPORT_HALFWIDTH: f64 = SQRT_2;

/// Inputs closer than this to the cut `[-1, 1]` are rejected.
pub const CUT_GUARD: f64 = 1e-12;

/// Exact constants of the equilibrium problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Value of `F = V*m1 + |x|^2/2` on the support, `1/2 + log(2)/2`.
    pub el_constant: f64,
    /// Minimal energy `I(m1) = 3/4 + log(2)/2`.
    pub minimal_energy: f64,
    /// Second moment of `m1`.
    pub confinement_moment: f64,
    pub support_halfwidth: f64,
    /// `1 - 2/e`, coefficient of the quadratic lower bound of the energy.
    pub lower_bound_coeff: f64,
}

pub fn constants() -> Constants {
    let el_constant = 0.5 + 0.5 * LN_2;
    let confinement_moment = 0.5;
    Constants {
        el_constant,
        minimal_energy: el_constant + 0.5 * confinement_moment,
        confinement_moment,
        support_halfwidth: SQRT_2,
        lower_bound_coeff: 1.0 - 2.0 * (-1.0f64).exp(),
    }
}

/// Density of the semicircle law on the line.
pub fn semicircle_density(t: f64) -> f64 {
    let s = 2.0 - t * t;
    if s > 0.0 {
        s.sqrt() / PI
    } else {
        0.0
    }
}

/// Distribution function of the semicircle law.
pub fn semicircle_cdf(t: f64) -> f64 {
    if t <= -SQRT_2 {
        return 0.0;
    }
    if t >= SQRT_2 {
        return 1.0;
    }
    let s = (2.0 - t * t).max(0.0).sqrt();
    let v = 0.5 + (t * s + 2.0 * (t / SQRT_2).clamp(-1.0, 1.0).asin()) / TAU;
    v.clamp(0.0, 1.0)
}

/// Inverse of [`semicircle_cdf`] on `[0, 1]`.
pub fn semicircle_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -SQRT_2;
    }
    if p >= 1.0 {
        return SQRT_2;
    }
    // safeguarded Newton on the monotone cdf
    let (mut lo, mut hi) = (-SQRT_2, SQRT_2);
    let mut t = 0.0;
    for _ in 0..200 {
        let f = semicircle_cdf(t) - p;
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = semicircle_density(t);
        let mut next = if d > 0.0 { t - f / d } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * (1.0 + t.abs()) || hi - lo <= 1e-15 {
            return next;
        }
        t = next;
    }
    t
}

fn check_off_cut(op: &'static str, z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(domain(op, format!("non-finite argument {z}")));
    }
    let dist = if z.re.abs() <= 1.0 {
        z.im.abs()
    } else {
        (z.re.abs() - 1.0).hypot(z.im)
    };
    if dist < CUT_GUARD {
        return Err(domain(
            op,
            format!("argument {z} lies on (or within {CUT_GUARD:e} of) the cut [-1, 1]"),
        ));
    }
    Ok(())
}

/// The branch of `sqrt(z^2 - 1)` asymptotic to `z` at infinity.
///
/// With `z = rho e^{i theta}`, `theta` in `[0, 2pi)`, the argument `theta1` of
/// `z^2 - 1` is taken in `[0, 2pi)` when `theta < pi` and in `[2pi, 4pi)`
/// otherwise; the result is `sqrt|z^2-1| e^{i theta1/2}`.
pub fn sqrt_branch(z: Complex64) -> Result<Complex64> {
    check_off_cut("sqrt_branch", z)?;
    let mut theta = z.im.atan2(z.re);
    if theta < 0.0 {
        theta += TAU;
    }
    let w = z * z - 1.0;
    let mut theta1 = w.im.atan2(w.re);
    if theta1 < 0.0 {
        theta1 += TAU;
    }
    if theta >= PI {
        theta1 += TAU;
    }
    Ok(Complex64::from_polar(w.norm().sqrt(), 0.5 * theta1))
}

/// `g(z) = log|z + sqrt(z^2-1)| - log 2`.
pub fn g_closed(z: Complex64) -> Result<f64> {
    let w = sqrt_branch(z)?;
    Ok((z + w).norm().ln() - LN_2)
}

/// Gradient `(d g/d eta1, d g/d eta2)` at `z = eta1 + i eta2`.
///
/// Equals `(Re w, Im w) / |z^2 - 1|` with `w = sqrt_branch(z)`, i.e.
/// `d_z g = conj(w) / (2 |z^2 - 1|)`.
pub fn grad_g(z: Complex64) -> Result<(f64, f64)> {
    let w = sqrt_branch(z)?;
    let m = (z * z - 1.0).norm();
    Ok((w.re / m, w.im / m))
}

/// Exact `dF/dx1` of `F = V*m1 + |x|^2/2` for `x1 > 0`.
///
/// With `xi = x / sqrt 2` and `z = xi2 + i xi1`,
/// `dF/dx1 = sqrt2 xi1 (xi2 dg/deta1 + xi1 dg/deta2)`.
pub fn df_dx1(x: Point) -> Result<f64> {
    if !(x.x1 > 0.0) || !x.x2.is_finite() || !x.x1.is_finite() {
        return Err(domain("df_dx1", format!("requires x1 > 0, got {:?}", x)));
    }
    let xi1 = x.x1 / SQRT_2;
    let xi2 = x.x2 / SQRT_2;
    let (g1, g2) = grad_g(Complex64::new(xi2, xi1))?;
    Ok(SQRT_2 * xi1 * (xi2 * g1 + xi1 * g2))
}

/// `d/dt (V*m1)(0, t)`, the Hilbert transform of the semicircle density.
pub fn axis_potential_derivative(t: f64) -> f64 {
    if t < -SQRT_2 {
        -t - outer_root(t)
    } else if t > SQRT_2 {
        -t + outer_root(t)
    } else {
        -t
    }
}

/// `sqrt(t^2 - 2)` for `|t| >= sqrt 2`, factored to avoid cancellation.
fn outer_root(t: f64) -> f64 {
    let a = t.abs();
    ((a - SQRT_2) * (a + SQRT_2)).max(0.0).sqrt()
}

/// `F(0, t)` in closed form.
///
/// Constant `c1` on the support; outside, the antiderivative of
/// `sqrt(t^2-2)` anchored at `sqrt 2`:
/// `c1 + |t| sqrt(t^2-2)/2 - acosh(|t|/sqrt 2)`.
pub fn f_axis(t: f64) -> f64 {
    let c1 = constants().el_constant;
    let a = t.abs();
    if a <= SQRT_2 {
        return c1;
    }
    let s = outer_root(t);
    // acosh(y) = log1p((y - 1) + sqrt((y - 1)(y + 1))), stable near y = 1
    let y = a / SQRT_2;
    let ym1 = (a - SQRT_2) / SQRT_2;
    let acosh = (ym1 + (ym1 * (y + 1.0)).sqrt()).ln_1p();
    c1 + 0.5 * a * s - acosh
}
