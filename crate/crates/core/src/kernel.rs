//! The anisotropic interaction potential
//!
//! `V(x) = -log|x| + x1^2/|x|^2`, with `V(0) = +inf`. The kernel is exact: no
//! clamping or mollification happens here, callers are responsible for keeping
//! away from the singularity.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Neg, Sub};

use crate::error::{domain, Error, Result};

/// A position in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x1: 0.0, x2: 0.0 };

    #[inline]
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }

    /// Checked constructor rejecting NaN and infinite coordinates.
    pub fn try_new(x1: f64, x2: f64) -> Result<Self> {
        if x1.is_finite() && x2.is_finite() {
            Ok(Point { x1, x2 })
        } else {
            Err(domain("Point", format!("non-finite coordinates ({x1}, {x2})")))
        }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x1, -self.x2)
    }
}

/// A real number or `+inf`.
///
/// `+inf` is produced only at the kernel singularity (and by energies that
/// contain a coincident pair); consumers treat it as "reject this state".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// The value as an `f64`, mapping the infinite case to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }
}

impl From<ExtendedReal> for f64 {
    fn from(v: ExtendedReal) -> f64 {
        v.to_f64()
    }
}

/// Coefficient of the confinement lower bound, `1/2 - 1/e`, per point.
fn half_minus_inv_e() -> f64 {
    0.5 - (-1.0f64).exp()
}

/// `V(dx, dx2)` for a nonzero displacement, without the zero check.
#[inline]
pub(crate) fn potential_raw(d1: f64, d2: f64) -> f64 {
    let r = d1.hypot(d2);
    let c = d1 / r;
    -r.ln() + c * c
}

/// Gradient of `V` for a nonzero displacement, without the zero check.
#[inline]
pub(crate) fn potential_grad_raw(d1: f64, d2: f64) -> (f64, f64) {
    let r = d1.hypot(d2);
    let u1 = d1 / r;
    let u2 = d2 / r;
    (
        u1 / r * (-1.0 + 2.0 * u2 * u2),
        u2 / r * (-1.0 - 2.0 * u1 * u1),
    )
}

/// The interaction potential `V(p) = -log|p| + p1^2/|p|^2`; `+inf` at the origin.
pub fn potential(p: Point) -> ExtendedReal {
    if p.x1 == 0.0 && p.x2 == 0.0 {
        ExtendedReal::PosInfinity
    } else {
        ExtendedReal::Finite(potential_raw(p.x1, p.x2))
    }
}

/// Analytic gradient of [`potential`].
pub fn potential_grad(p: Point) -> Result<(f64, f64)> {
    if p.x1 == 0.0 && p.x2 == 0.0 {
        return Err(domain("potential_grad", "gradient undefined at the origin"));
    }
    Ok(potential_grad_raw(p.x1, p.x2))
}

/// Pair integrand of the confined energy minus its quadratic lower bound:
///
/// `V(x-y) + (|x|^2+|y|^2)/2 - (1/2 - 1/e)(|x|^2+|y|^2)`, which is `>= 0`.
pub fn confined_pair_gap(x: Point, y: Point) -> Result<f64> {
    if x == y {
        return Err(Error::Domain {
            op: "confined_pair_gap",
            reason: "coincident points".into(),
        });
    }
    let d = x - y;
    let s = x.norm_sq() + y.norm_sq();
    Ok(potential_raw(d.x1, d.x2) + 0.5 * s - half_minus_inv_e() * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x1: f64, x2: f64) -> f64 {
        potential(Point::new(x1, x2)).to_f64()
    }

    #[test]
    fn potential_examples() {
        assert_eq!(v(1.0, 0.0), 1.0);
        assert_eq!(v(0.0, 2.0), -(2.0f64).ln());
        assert_eq!(potential(Point::ORIGIN), ExtendedReal::PosInfinity);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(potential_grad(Point::new(1.0, 0.0)).unwrap(), (-1.0, 0.0));
        assert_eq!(potential_grad(Point::new(0.0, 1.0)).unwrap(), (0.0, -1.0));
        assert!(potential_grad(Point::ORIGIN).is_err());

        let h = 1e-6;
        let (g1, g2) = potential_grad(Point::new(1.0, 1.0)).unwrap();
        let fd1 = (v(1.0 + h, 1.0) - v(1.0 - h, 1.0)) / (2.0 * h);
        let fd2 = (v(1.0, 1.0 + h) - v(1.0, 1.0 - h)) / (2.0 * h);
        // at (1,1) the x1 component vanishes, so compare as vectors
        let err = (g1 - fd1).hypot(g2 - fd2) / g1.hypot(g2);
        assert!(err < 1e-6, "{err}");
        assert!(g1.abs() < 1e-15 && (g2 + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pair_gap_examples() {
        let gap = confined_pair_gap(Point::new(0.0, 1.0), Point::new(0.0, -1.0)).unwrap();
        let expected = -(2.0f64).ln() + 2.0 / std::f64::consts::E;
        assert!((gap - expected).abs() < 1e-15);
        assert!((gap - 0.042_611_701_782_939_4).abs() < 1e-15);

        let gap = confined_pair_gap(Point::new(3.0, 0.0), Point::ORIGIN).unwrap();
        // -log 3 + 1 + 9/e
        assert!((gap - (1.0 - 3f64.ln() + 9.0 / std::f64::consts::E)).abs() < 1e-14);
        assert!(gap >= 0.0);

        let gap = confined_pair_gap(Point::new(1e-8, 0.0), Point::ORIGIN).unwrap();
        assert!(gap > 18.0);

        assert!(confined_pair_gap(Point::new(0.3, 0.3), Point::new(0.3, 0.3)).is_err());
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::try_new(f64::NAN, 0.0).is_err());
        assert!(Point::try_new(0.0, f64::INFINITY).is_err());
        assert!(Point::try_new(1.0, -2.0).is_ok());
    }
}
