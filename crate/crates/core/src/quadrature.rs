//! Adaptive Gauss–Kronrod quadrature and the potential of the semicircle law
//!
//! The integrator is a global adaptive bisection scheme on a 21-point
//! Gauss–Kronrod pair. Known singular points are passed as breakpoints so that
//! logarithmic and square-root singularities always sit on panel boundaries,
//! where the rule never evaluates the integrand.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{domain, precondition, Error, Result};
use crate::kernel::Point;

/// Default absolute tolerance of the field evaluators.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default cap on integrand evaluations per call.
pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate, always `>= 0`.
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Requested absolute accuracy.
    pub tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: DEFAULT_TOL,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self, op: &'static str) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(precondition(op, format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_evaluations < 2 * KRONROD_POINTS {
            return Err(precondition(op, "evaluation budget too small"));
        }
        Ok(())
    }
}

const KRONROD_POINTS: usize = 21;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

// Max-heap on error; ties broken by position so the refinement order is
// fully determined by the integrand.
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = (WGK[10] * fc).abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let resabs = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    let roundoff = 50.0 * f64::EPSILON * resabs;
    if error < roundoff {
        error = roundoff;
    }
    Panel { a, b, value, error }
}

/// Integrate `f` over `[points[0], points[last]]`, splitting at every
/// interior breakpoint. `points` need not be sorted.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadratureOptions,
) -> Result<QuadratureResult> {
    opts.validate("integrate")?;
    let mut pts: Vec<f64> = points.to_vec();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(domain("integrate", "non-finite breakpoint"));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(domain("integrate", "need at least two distinct breakpoints"));
    }

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let mut total_error = 0.0;
    for w in pts.windows(2) {
        let p = gauss_kronrod_21(&f, w[0], w[1]);
        evaluations += KRONROD_POINTS;
        total_error += p.error;
        heap.push(p);
    }
    let mut frozen: Vec<Panel> = Vec::new();

    while total_error > opts.tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel is at machine resolution, nothing more to gain here
            frozen.push(worst);
            continue;
        }
        if evaluations + 2 * KRONROD_POINTS > opts.max_evaluations {
            heap.push(worst);
            return Err(Error::Convergence {
                error_estimate: total_error,
                tol: opts.tol,
                evaluations,
            });
        }
        let left = gauss_kronrod_21(&f, worst.a, mid);
        let right = gauss_kronrod_21(&f, mid, worst.b);
        evaluations += 2 * KRONROD_POINTS;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // refresh the running sum now and then to shed cancellation drift
        if evaluations % (KRONROD_POINTS * 512) < 2 * KRONROD_POINTS {
            total_error = heap.iter().chain(frozen.iter()).map(|p| p.error).sum();
        }
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error_estimate: f64 = panels.iter().map(|p| p.error).sum();
    if !value.is_finite() {
        return Err(domain("integrate", "integrand produced a non-finite value"));
    }
    if error_estimate > opts.tol {
        return Err(Error::Convergence {
            error_estimate,
            tol: opts.tol,
            evaluations,
        });
    }
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// `g(eta1, eta2) = (1/4pi) int_{-pi}^{pi} log((eta1 - cos t)^2 + eta2^2) dt`
/// by adaptive quadrature, off the cut `[-1, 1]`.
pub fn g_quadrature(z: Complex64, tol: f64) -> Result<QuadratureResult> {
    g_quadrature_with(z, QuadratureOptions::with_tol(tol))
}

pub fn g_quadrature_with(z: Complex64, opts: QuadratureOptions) -> Result<QuadratureResult> {
    let (e1, e2) = (z.re, z.im);
    let dist = if e1.abs() <= 1.0 {
        e2.abs()
    } else {
        (e1.abs() - 1.0).hypot(e2)
    };
    if !(dist >= crate::analytic::CUT_GUARD) {
        return Err(domain("g_quadrature", format!("argument {z} on the cut [-1, 1]")));
    }
    let e2sq = e2 * e2;
    // even in theta: (1/2pi) int_0^pi
    let integrand = |t: f64| {
        let d = e1 - t.cos();
        (d * d + e2sq).ln()
    };
    let mut pts = vec![0.0, PI];
    if e1.abs() < 1.0 {
        pts.push(e1.acos());
    }
    let r = integrate(integrand, &pts, scale_opts(opts, 2.0 * PI))?;
    Ok(scaled(r, 1.0 / (2.0 * PI)))
}

fn scale_opts(opts: QuadratureOptions, factor: f64) -> QuadratureOptions {
    QuadratureOptions {
        tol: opts.tol * factor,
        ..opts
    }
}

fn scaled(r: QuadratureResult, factor: f64) -> QuadratureResult {
    QuadratureResult {
        value: r.value * factor,
        error_estimate: r.error_estimate * factor.abs(),
        evaluations: r.evaluations,
    }
}

/// `(V * m1)(x)`, the interaction potential generated by the semicircle law.
///
/// Integrated in the angle `t = sqrt2 sin(theta)`, which turns the density
/// weight into the smooth factor `2 cos^2(theta) / pi`; the projection of `x`
/// onto the support is a breakpoint.
pub fn conv_potential(x: Point, tol: f64) -> Result<QuadratureResult> {
    conv_potential_with(x, QuadratureOptions::with_tol(tol))
}

pub fn conv_potential_with(x: Point, opts: QuadratureOptions) -> Result<QuadratureResult> {
    if !x.is_finite() {
        return Err(domain("conv_potential", "non-finite point"));
    }
    let x1sq = x.x1 * x.x1;
    let x2 = x.x2;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let d = x2 - SQRT_2 * s;
        let r2 = x1sq + d * d;
        if r2 == 0.0 {
            return 0.0;
        }
        let k = -0.5 * r2.ln() + if x1sq > 0.0 { x1sq / r2 } else { 0.0 };
        k * 2.0 * c * c / PI
    };
    let mut pts = vec![-FRAC_PI_2, FRAC_PI_2];
    if x2.abs() < SQRT_2 {
        pts.push((x2 / SQRT_2).asin());
    }
    integrate(integrand, &pts, opts)
}

/// `F(x) = (V * m1)(x) + |x|^2 / 2`.
pub fn f_field(x: Point, tol: f64) -> Result<f64> {
    Ok(f_field_with(x, QuadratureOptions::with_tol(tol))?.value)
}

/// [`f_field`] with the quadrature bookkeeping attached.
pub fn f_field_with(x: Point, opts: QuadratureOptions) -> Result<QuadratureResult> {
    let r = conv_potential_with(x, opts)?;
    Ok(QuadratureResult {
        value: r.value + 0.5 * x.norm_sq(),
        ..r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{constants, f_axis, g_closed};

    #[test]
    fn integrates_polynomial_and_log() {
        let r = integrate(|x| x * x, &[0.0, 1.0], QuadratureOptions::default()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        // int_0^1 log x = -1, singular endpoint
        let r = integrate(|x| x.ln(), &[0.0, 1.0], QuadratureOptions::with_tol(1e-12)).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12, "{:?}", r);
        assert!(r.error_estimate >= 0.0 && r.evaluations > 0);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadratureOptions {
            tol: 1e-14,
            max_evaluations: 200,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), &[1e-6, 1.0], opts).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate(|x| x, &[1.0], QuadratureOptions::default()).is_err());
        assert!(integrate(|x| x, &[0.0, 1.0], QuadratureOptions::with_tol(0.0)).is_err());
        assert!(g_quadrature(Complex64::new(0.5, 0.0), 1e-10).is_err());
        assert!(conv_potential(Point::new(f64::NAN, 0.0), 1e-10).is_err());
    }

    #[test]
    fn g_quadrature_examples() {
        let r = g_quadrature(Complex64::new(1.25, 0.0), 1e-10).unwrap();
        assert!(r.value.abs() < 1e-10);
        let r = g_quadrature(Complex64::new(2.0, 0.0), 1e-10).unwrap();
        assert!((r.value - g_closed(Complex64::new(2.0, 0.0)).unwrap()).abs() < 1e-10);
        let r = g_quadrature(Complex64::new(0.0, 10.0), 1e-10).unwrap();
        let exact = ((10.0 + 101f64.sqrt()) / 2.0).ln();
        assert!((r.value - exact).abs() < 1e-10);
    }

    #[test]
    fn conv_potential_examples() {
        let c1 = constants().el_constant;
        let r = conv_potential(Point::ORIGIN, 1e-10).unwrap();
        assert!((r.value - c1).abs() < 1e-9, "{:?}", r);
        let r = conv_potential(Point::new(0.0, 1.0), 1e-10).unwrap();
        assert!((r.value - (c1 - 0.5)).abs() < 1e-9);
        // mpmath at 30 digits: 0.55412004560200294715981605783
        let r = conv_potential(Point::new(1.0, 0.0), 1e-10).unwrap();
        assert!((r.value - 0.554_120_045_602_002_9).abs() < 1e-10);
    }

    #[test]
    fn f_field_examples() {
        let c1 = constants().el_constant;
        assert!((f_field(Point::new(0.0, SQRT_2), 1e-10).unwrap() - c1).abs() < 1e-9);
        assert!((f_field(Point::new(0.0, 2.0), 1e-10).unwrap() - f_axis(2.0)).abs() < 1e-8);
        assert!(f_field(Point::new(1.0, 0.0), 1e-10).unwrap() >= c1 + 1e-3);
    }

    #[test]
    fn results_are_bit_reproducible() {
        let p = Point::new(0.3, 0.7);
        let a = conv_potential(p, 1e-10).unwrap();
        let b = conv_potential(p, 1e-10).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
    }
}
