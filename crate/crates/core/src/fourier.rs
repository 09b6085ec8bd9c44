//! Fourier-side structure of the interaction energy
//!
//! The distributional transform of `V` (with `f^(xi) = int f e^{-2 pi i xi.x}`)
//! pairs with a test function as
//!
//! `<V^, phi> = (1/2 + gamma + log pi) phi(0)
//!            + (1/pi) int_{|xi|<=1} (phi - phi(0)) xi2^2/|xi|^4
//!            + (1/pi) int_{|xi|>1} phi xi2^2/|xi|^4`,
//!
//! so for neutral densities `int (V*f) f = (1/pi) int xi2^2/|xi|^4 |f^|^2`.
//! This module evaluates both sides of that identity on grid densities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use rustfft::{Fft, FftPlanner};
use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::sync::Arc;

use crate::error::{domain, precondition, Error, Result};
use crate::grid::{bump, GridDensity};
use crate::kernel::{potential_raw, Point};
use crate::quadrature::{integrate, QuadratureOptions};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Zero-padding factor of the spectral evaluation.
pub const SPECTRAL_PADDING: usize = 4;

/// Neutral inputs to [`interaction_spectral`] may carry at most this much mass.
pub const SPECTRAL_MASS_TOL: f64 = 1e-10;

/// Smallest Gaussian damping rate of the low-frequency model in
/// [`interaction_spectral`]; coarse grids use a larger one.
const LOW_FREQUENCY_DAMPING: f64 = 1.0;

/// Unit-mass inputs may be off by this much and are then renormalised.
pub const UNIT_MASS_TOL: f64 = 1e-8;

/// Mean of `log|u - v|` for `u, v` independent and uniform on the unit square:
/// `-25/12 + pi/3 + log(2)/3`.
pub fn unit_square_mean_log_distance() -> f64 {
    -25.0 / 12.0 + PI / 3.0 + LN_2 / 3.0
}

/// `int int V(u - v) du dv / h^4` over two coincident `h x h` cells.
///
/// The logarithmic part is exact; the anisotropy averages to exactly `1/2`
/// over a square by the `u1 <-> u2` symmetry.
pub fn diagonal_cell_average(h: f64) -> f64 {
    -h.ln() - unit_square_mean_log_distance() + 0.5
}

/// Spectral weight `xi2^2 / (pi |xi|^4)`.
pub fn fhat_weight(xi1: f64, xi2: f64) -> Result<f64> {
    if xi1 == 0.0 && xi2 == 0.0 {
        return Err(domain("fhat_weight", "weight is singular at the origin"));
    }
    Ok(weight_raw(xi1, xi2))
}

#[inline]
fn weight_raw(xi1: f64, xi2: f64) -> f64 {
    let r2 = xi1 * xi1 + xi2 * xi2;
    xi2 * xi2 / (PI * r2 * r2)
}

// ---------------------------------------------------------------------------
// FFT plumbing

struct Fft1d {
    fft: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl Fft1d {
    fn forward(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        let scratch_len = fft.get_inplace_scratch_len();
        Fft1d { fft, scratch_len }
    }

    fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }
}

/// Sum of `weight(k1, k2) |F[k1, k2]|^2` over the `m x m` DFT `F` of the
/// samples zero-padded from `n x n`. Reductions run in a fixed order.
fn padded_spectrum_sum<W>(samples: &[f64], n: usize, m: usize, weight: W) -> f64
where
    W: Fn(usize, usize) -> f64 + Sync,
{
    let plan = Fft1d::forward(m);
    // transform along x2 for the n nonzero rows
    let mut rows = vec![Complex64::new(0.0, 0.0); n * m];
    rows.par_chunks_mut(m)
        .zip(samples.par_chunks(n))
        .for_each_init(
            || plan.scratch(),
            |scratch, (row, src)| {
                for (d, s) in row.iter_mut().zip(src) {
                    *d = Complex64::new(*s, 0.0);
                }
                plan.fft.process_with_scratch(row, scratch);
            },
        );
    // then along x1, one frequency column at a time
    let column_sums: Vec<f64> = (0..m)
        .into_par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); m], plan.scratch()),
            |(col, scratch), k2| {
                for (i, c) in col.iter_mut().enumerate() {
                    *c = if i < n { rows[i * m + k2] } else { Complex64::new(0.0, 0.0) };
                }
                plan.fft.process_with_scratch(col, scratch);
                col.iter()
                    .enumerate()
                    .map(|(k1, c)| weight(k1, k2) * c.norm_sqr())
                    .sum::<f64>()
            },
        )
        .collect();
    column_sums.iter().sum()
}

/// In-place 2-D DFT of a row-major `m x m` array.
fn fft2_square(data: &mut [Complex64], m: usize) {
    let plan = Fft1d::forward(m);
    let pass = |buf: &mut [Complex64]| {
        buf.par_chunks_mut(m)
            .for_each_init(|| plan.scratch(), |s, row| plan.fft.process_with_scratch(row, s));
    };
    pass(data);
    transpose_square(data, m);
    pass(data);
    transpose_square(data, m);
}

fn transpose_square(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

#[inline]
fn signed_index(k: usize, m: usize) -> f64 {
    if k < m / 2 {
        k as f64
    } else {
        k as f64 - m as f64
    }
}

// ---------------------------------------------------------------------------
// Real-space interaction

/// `sum_{a,b} V(x_a - x_b) f_a f_b h^4` with the diagonal terms replaced by
/// the exact self-interaction of a cell, [`diagonal_cell_average`].
///
/// The double sum is a discrete convolution; it is evaluated exactly (up to
/// rounding) through a `2N x 2N` FFT. [`interaction_direct_naive`] performs
/// the same sum term by term.
pub fn interaction_direct(f: &GridDensity) -> f64 {
    let n = f.resolution();
    let m = 2 * n;
    let h = f.spacing();
    if f.samples().iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let mut kernel = vec![Complex64::new(0.0, 0.0); m * m];
    kernel.par_chunks_mut(m).enumerate().for_each(|(a, row)| {
        let d1 = signed_index(a, m);
        if d1.abs() >= n as f64 {
            return;
        }
        for (b, k) in row.iter_mut().enumerate() {
            let d2 = signed_index(b, m);
            if d2.abs() >= n as f64 {
                continue;
            }
            let v = if a == 0 && b == 0 {
                diagonal_cell_average(h)
            } else {
                potential_raw(d1 * h, d2 * h)
            };
            *k = Complex64::new(v, 0.0);
        }
    });
    fft2_square(&mut kernel, m);
    let kernel_hat: Vec<f64> = kernel.iter().map(|c| c.re).collect();
    drop(kernel);
    let s = padded_spectrum_sum(f.samples(), n, m, |k1, k2| kernel_hat[k1 * m + k2]);
    s / (m * m) as f64 * h.powi(4)
}

/// Term-by-term evaluation of [`interaction_direct`], `O(N^4)`.
///
/// Rows are summed in parallel, each in fixed index order.
pub fn interaction_direct_naive(f: &GridDensity) -> f64 {
    let n = f.resolution();
    let h = f.spacing();
    let diag = diagonal_cell_average(h);
    let row_sums: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|a| {
            let fa = f.samples()[a];
            if fa == 0.0 {
                return 0.0;
            }
            let (ia, ja) = (a / n, a % n);
            let mut acc = 0.0;
            for ib in 0..n {
                for jb in 0..n {
                    let fb = f.value(ib, jb);
                    if fb == 0.0 {
                        continue;
                    }
                    let v = if ia == ib && ja == jb {
                        diag
                    } else {
                        potential_raw(
                            (ia as f64 - ib as f64) * h,
                            (ja as f64 - jb as f64) * h,
                        )
                    };
                    acc += v * fb;
                }
            }
            acc * fa
        })
        .collect();
    row_sums.iter().sum::<f64>() * h.powi(4)
}

// ---------------------------------------------------------------------------
// Spectral interaction

/// Low-frequency model of `|f^|^2` for a neutral density, damped by
/// `exp(-a |xi|^2)`, with its exact weighted integral.
///
/// Writing `f^(xi) = -2 pi i p.xi - 2 pi^2 Q(xi) + (4/3) pi^3 i T(xi) + ...`
/// with `Q`, `T` the second and third moment forms, the model is the Taylor
/// polynomial of `|f^(xi)|^2 exp(a |xi|^2)` through degree four. The lattice
/// sum of a homogeneous term of degree `d` times the weight is biased at
/// order `dxi^(d+2)`, so removing these terms leaves an `O(dxi^8)` remainder.
struct LowFrequencyModel {
    p: [f64; 2],
    q: [f64; 3],
    t: [f64; 4],
    a: f64,
}

impl LowFrequencyModel {
    fn new(f: &GridDensity, a: f64) -> Self {
        let m = |e1: i32, e2: i32| f.weighted_sum(|x| x.x1.powi(e1) * x.x2.powi(e2));
        LowFrequencyModel {
            p: [m(1, 0), m(0, 1)],
            q: [m(2, 0), m(1, 1), m(0, 2)],
            t: [m(3, 0), m(2, 1), m(1, 2), m(0, 3)],
            a,
        }
    }

    /// Polynomial part (before damping) split by degree.
    fn polynomial(&self, u1: f64, u2: f64) -> (f64, f64) {
        let pi2 = PI * PI;
        let pu = self.p[0] * u1 + self.p[1] * u2;
        let qu = self.q[0] * u1 * u1 + 2.0 * self.q[1] * u1 * u2 + self.q[2] * u2 * u2;
        let tu = self.t[0] * u1.powi(3)
            + 3.0 * self.t[1] * u1 * u1 * u2
            + 3.0 * self.t[2] * u1 * u2 * u2
            + self.t[3] * u2.powi(3);
        let r2 = u1 * u1 + u2 * u2;
        let deg2 = 4.0 * pi2 * pu * pu;
        let deg4 = 4.0 * pi2 * pi2 * qu * qu - 16.0 / 3.0 * pi2 * pi2 * pu * tu + self.a * r2 * deg2;
        (deg2, deg4)
    }

    fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        let (d2, d4) = self.polynomial(xi1, xi2);
        (d2 + d4) * (-self.a * (xi1 * xi1 + xi2 * xi2)).exp()
    }

    /// `(1/pi) int xi2^2/|xi|^4 model(xi) dxi` over the plane.
    fn weighted_integral(&self) -> f64 {
        // angular parts are trigonometric polynomials of degree <= 6, which
        // the periodic trapezoid rule integrates exactly
        const STEPS: usize = 32;
        let (mut s2, mut s4) = (0.0, 0.0);
        for k in 0..STEPS {
            let (s, c) = (2.0 * PI * k as f64 / STEPS as f64).sin_cos();
            let (d2, d4) = self.polynomial(c, s);
            s2 += s * s * d2;
            s4 += s * s * d4;
        }
        let dt = 2.0 * PI / STEPS as f64;
        // radial factors int r^{d-1} e^{-a r^2} dr for d = 2, 4
        (s2 * dt / (2.0 * self.a) + s4 * dt / (2.0 * self.a * self.a)) / PI
    }
}

/// `(1/pi) sum_{xi != 0} xi2^2/|xi|^4 |f^(xi)|^2 dxi^2` for a neutral density.
///
/// `f^` is the DFT of the grid zero-padded by [`SPECTRAL_PADDING`], scaled to
/// approximate the continuous transform. Near the origin the weighted
/// integrand is bounded but direction dependent, and a plain lattice sum of
/// it is biased at order `dxi^2` however fine the grid. The low-frequency
/// Taylor part of `|f^|^2`, damped by a Gaussian, is therefore subtracted
/// from the lattice sum and integrated in closed form instead.
pub fn interaction_spectral(f: &GridDensity) -> Result<f64> {
    check_neutral(f)?;
    let n = f.resolution();
    let m = SPECTRAL_PADDING * n;
    let h = f.spacing();
    let dxi = 1.0 / (m as f64 * h);
    let h4 = h.powi(4);
    // keep the damped model negligible at the Nyquist frequency 1/(2h)
    let damping = LOW_FREQUENCY_DAMPING.max(160.0 * h * h);
    let model = LowFrequencyModel::new(f, damping);

    let lattice = padded_spectrum_sum(f.samples(), n, m, |k1, k2| {
        if k1 == 0 && k2 == 0 {
            return 0.0;
        }
        let xi1 = signed_index(k1, m) * dxi;
        let xi2 = signed_index(k2, m) * dxi;
        weight_raw(xi1, xi2) * h4
    });
    // lattice sum of the model; the damping underflows well inside the grid
    let reach = ((750.0 / model.a).sqrt() / dxi).ceil().min((m / 2 - 1) as f64) as i64;
    let mut model_sum = 0.0;
    for k1 in -reach..=reach {
        let xi1 = k1 as f64 * dxi;
        let mut row = 0.0;
        for k2 in -reach..=reach {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let xi2 = k2 as f64 * dxi;
            row += weight_raw(xi1, xi2) * model.eval(xi1, xi2);
        }
        model_sum += row;
    }
    Ok((lattice - model_sum) * dxi * dxi + model.weighted_integral())
}

fn check_neutral(f: &GridDensity) -> Result<()> {
    let mass = f.mass();
    if mass.abs() > SPECTRAL_MASS_TOL {
        return Err(precondition(
            "interaction_spectral",
            format!("density must be neutral, total mass is {mass:e}"),
        ));
    }
    Ok(())
}

/// Plain lattice sum without the low-frequency correction of
/// [`interaction_spectral`]; kept for diagnostics.
pub fn interaction_spectral_uncorrected(f: &GridDensity) -> Result<f64> {
    check_neutral(f)?;
    let n = f.resolution();
    let m = SPECTRAL_PADDING * n;
    let h = f.spacing();
    let dxi = 1.0 / (m as f64 * h);
    let h4 = h.powi(4);
    let s = padded_spectrum_sum(f.samples(), n, m, |k1, k2| {
        if k1 == 0 && k2 == 0 {
            return 0.0;
        }
        weight_raw(signed_index(k1, m) * dxi, signed_index(k2, m) * dxi) * h4
    });
    Ok(s * dxi * dxi)
}

// ---------------------------------------------------------------------------
// Pairing with the transform of V

/// `phi(0)` by tensor cubic Lagrange interpolation of the cell-centre samples.
///
/// Its error multiplies the logarithmically large weight of the unit disk,
/// so a fourth-order rule is used.
fn value_at_origin(phi: &GridDensity) -> Result<f64> {
    let n = phi.resolution();
    // origin in continuous index coordinates of cell centres
    let u = phi.half_width() / phi.spacing() - 0.5;
    let i0 = u.floor();
    let t = u - i0;
    let i0 = i0 as isize;
    if t == 0.0 && i0 >= 0 && (i0 as usize) < n {
        let i = i0 as usize;
        return Ok(phi.value(i, i));
    }
    if i0 < 1 || (i0 + 2) as usize >= n {
        return Err(Error::Resolution(format!(
            "cannot interpolate phi(0): need a 4 x 4 stencil around the origin, grid has N = {n}"
        )));
    }
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    let base = (i0 - 1) as usize;
    let mut acc = 0.0;
    for (a, wa) in w.iter().enumerate() {
        for (b, wb) in w.iter().enumerate() {
            acc += wa * wb * phi.value(base + a, base + b);
        }
    }
    Ok(acc)
}

/// Fraction of the `h x h` cell centred at `c` that lies in the closed unit disk.
fn unit_disk_fraction(c: Point, h: f64) -> f64 {
    let r = c.norm();
    let reach = h * std::f64::consts::FRAC_1_SQRT_2;
    if r + reach <= 1.0 {
        return 1.0;
    }
    if r - reach >= 1.0 {
        return 0.0;
    }
    const SUB: usize = 16;
    let mut inside = 0usize;
    for a in 0..SUB {
        for b in 0..SUB {
            let p = Point::new(
                c.x1 + ((a as f64 + 0.5) / SUB as f64 - 0.5) * h,
                c.x2 + ((b as f64 + 0.5) / SUB as f64 - 0.5) * h,
            );
            if p.norm_sq() <= 1.0 {
                inside += 1;
            }
        }
    }
    inside as f64 / (SUB * SUB) as f64
}

/// `(1/pi) int W` over the part of the unit disk outside `[-L, L]^2`.
fn unit_disk_outside_box(half_width: f64) -> Result<f64> {
    if half_width >= 1.0 {
        return Ok(0.0);
    }
    // polar: (1/pi) * 4 int_0^{pi/2} sin^2(t) log(1 / r_box(t))^+ dt
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        let r_box = half_width / c.max(s);
        if r_box >= 1.0 {
            0.0
        } else {
            s * s * (-r_box.ln())
        }
    };
    let a = half_width.acos();
    let mut pts = vec![0.0, FRAC_PI_2, std::f64::consts::FRAC_PI_4];
    if a > 0.0 && a < FRAC_PI_2 {
        pts.push(a);
        pts.push(FRAC_PI_2 - a);
    }
    let r = integrate(integrand, &pts, QuadratureOptions::with_tol(1e-12))?;
    Ok(4.0 * r.value / PI)
}

/// `int (phi - phi(0)) W` over a cell centred at the origin, from the
/// quadratic Taylor term with a finite-difference Hessian.
///
/// Over a square, `xi1^2 xi2^2 / |xi|^4` averages to `pi/8 - 1/4` and
/// `xi2^4 / |xi|^4` to `3/4 - pi/8`; odd terms cancel.
fn origin_cell_average(phi: &GridDensity, i: usize, j: usize) -> f64 {
    let n = phi.resolution();
    if i == 0 || j == 0 || i + 1 >= n || j + 1 >= n {
        return 0.0;
    }
    let h = phi.spacing();
    let c = phi.value(i, j);
    let d11 = (phi.value(i + 1, j) - 2.0 * c + phi.value(i - 1, j)) / (h * h);
    let d22 = (phi.value(i, j + 1) - 2.0 * c + phi.value(i, j - 1)) / (h * h);
    let mixed = PI / 8.0 - 0.25;
    let pure = 0.75 - PI / 8.0;
    0.5 * (d11 * mixed + d22 * pure) / PI * h * h
}

/// Pairing `<V^, phi>` of the transform of `V` with a test function sampled
/// on a grid in frequency space.
pub fn vhat_pairing(phi: &GridDensity) -> Result<f64> {
    let phi0 = value_at_origin(phi)?;
    let n = phi.resolution();
    let h = phi.spacing();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                let c = phi.cell_center(i, j);
                if c.x1 == 0.0 && c.x2 == 0.0 {
                    acc += origin_cell_average(phi, i, j) / (h * h);
                    continue;
                }
                let frac = if phi0 != 0.0 { unit_disk_fraction(c, h) } else { 0.0 };
                let v = phi.value(i, j) - phi0 * frac;
                if v != 0.0 {
                    acc += v * weight_raw(c.x1, c.x2);
                }
            }
            acc
        })
        .collect();
    let grid_part = rows.iter().sum::<f64>() * h * h;
    let outside = if phi0 != 0.0 {
        phi0 * unit_disk_outside_box(phi.half_width())?
    } else {
        0.0
    };
    Ok((0.5 + EULER_GAMMA + PI.ln()) * phi0 + grid_part - outside)
}

/// Largest support radius `r0` for which a radial bump with `0 <= phi <= phi(0)`
/// is guaranteed `<V^, phi> <= -phi(0)`: `gamma + log(pi r0) + 1/2 = -1`.
pub fn negativity_radius() -> f64 {
    (-1.5 - EULER_GAMMA).exp() / PI
}

// ---------------------------------------------------------------------------
// Confined energy and convexity

/// `I_h(f)`: [`interaction_direct`] plus the confinement `sum |x|^2 f h^2`.
pub fn confined_energy(f: &GridDensity) -> f64 {
    interaction_direct(f) + f.second_moment()
}

fn unit_mass(op: &'static str, f: &GridDensity) -> Result<GridDensity> {
    if !f.is_nonnegative() {
        return Err(precondition(op, "density must be non-negative"));
    }
    let m = f.mass();
    if (m - 1.0).abs() > UNIT_MASS_TOL {
        return Err(precondition(op, format!("density must have unit mass, has {m}")));
    }
    f.clone().normalized()
}

/// `I_h(f_t)` for `f_t = t f1 + (1 - t) f0`, `t = 0, 1/k, ..., 1`.
pub fn convexity_probe(f0: &GridDensity, f1: &GridDensity, k: usize) -> Result<Vec<f64>> {
    if !f0.same_grid(f1) {
        return Err(Error::GridMismatch(format!(
            "convexity_probe: ({}, {}) vs ({}, {})",
            f0.half_width(),
            f0.resolution(),
            f1.half_width(),
            f1.resolution()
        )));
    }
    if k == 0 {
        return Err(precondition("convexity_probe", "k must be at least 1"));
    }
    if k == 1 {
        log::warn!("convexity_probe: k = 1 gives endpoints only, midpoint test skipped");
    }
    let f0 = unit_mass("convexity_probe", f0)?;
    let f1 = unit_mass("convexity_probe", f1)?;
    (0..=k)
        .map(|s| {
            let t = s as f64 / k as f64;
            Ok(confined_energy(&f0.lerp(&f1, t)?))
        })
        .collect()
}

/// Second differences of a sequence.
pub fn second_differences(values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .collect()
}

// ---------------------------------------------------------------------------
// Test densities

/// Neutral test densities used by the verification commands.
///
/// Cases 0 and 1 are vertical and horizontal dipoles. Higher cases are
/// pseudo-random signed sums of four smooth bumps seeded by the case index.
pub fn neutral_test_case(case: usize, half_width: f64, n: usize) -> Result<GridDensity> {
    let bumps: Vec<(f64, Point, f64)> = match case {
        0 => vec![
            (1.0, Point::new(0.0, 0.6), 0.8),
            (-1.0, Point::new(0.0, -0.6), 0.8),
        ],
        1 => vec![
            (1.0, Point::new(0.6, 0.0), 0.8),
            (-1.0, Point::new(-0.6, 0.0), 0.8),
        ],
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + case as u64);
            let reach = (half_width * 0.75).min(3.0);
            (0..4)
                .map(|k| {
                    let radius = rng.random_range(0.5f64..1.5).min(0.5 * reach);
                    let span = reach - radius;
                    let c = Point::new(rng.random_range(-span..span), rng.random_range(-span..span));
                    (if k % 2 == 0 { 1.0 } else { -1.0 }, c, radius)
                })
                .collect()
        }
    };
    let part = |sign: f64| {
        GridDensity::sample(half_width, n, |p| {
            bumps
                .iter()
                .filter(|(s, _, _)| *s == sign)
                .map(|(_, c, r)| bump(p, *c, *r))
                .sum()
        })
    };
    GridDensity::neutral_difference(&part(1.0)?, &part(-1.0)?)
}

// ---------------------------------------------------------------------------
// Verification drivers

/// Direct and spectral energies of one neutral test density at two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralIdentityCase {
    pub case: usize,
    pub n: usize,
    pub direct: f64,
    pub spectral: f64,
    pub spectral_uncorrected: f64,
    pub rel_discrepancy: f64,
    pub direct_refined: f64,
    pub spectral_refined: f64,
    pub rel_discrepancy_refined: f64,
    pub shrinks: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralIdentityReport {
    pub half_width: f64,
    pub n: usize,
    pub tol: f64,
    pub cases: Vec<SpectralIdentityCase>,
    pub violations: Vec<String>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Compares [`interaction_direct`] with [`interaction_spectral`] on
/// [`neutral_test_case`] densities at `N` and `2N`.
pub fn spectral_identity_check(
    half_width: f64,
    n: usize,
    cases: usize,
    tol: f64,
) -> Result<SpectralIdentityReport> {
    if cases == 0 || n < 8 || !(half_width > 0.0) {
        return Err(precondition(
            "spectral_identity_check",
            "need at least one case, N >= 8 and L > 0",
        ));
    }
    let mut out = Vec::with_capacity(cases);
    let mut violations = Vec::new();
    for case in 0..cases {
        let f = neutral_test_case(case, half_width, n)?;
        let g = neutral_test_case(case, half_width, 2 * n)?;
        let direct = interaction_direct(&f);
        let spectral = interaction_spectral(&f)?;
        let spectral_uncorrected = interaction_spectral_uncorrected(&f)?;
        let direct_refined = interaction_direct(&g);
        let spectral_refined = interaction_spectral(&g)?;
        let r0 = rel(direct, spectral);
        let r1 = rel(direct_refined, spectral_refined);
        if !(r0 <= tol) {
            violations.push(format!("case {case}: relative discrepancy {r0:e} > {tol:e} at N={n}"));
        }
        if !(r1 < r0) {
            violations.push(format!(
                "case {case}: discrepancy does not shrink ({r0:e} at N={n}, {r1:e} at N={})",
                2 * n
            ));
        }
        if !(spectral > 0.0) {
            violations.push(format!("case {case}: spectral energy {spectral:e} is not positive"));
        }
        out.push(SpectralIdentityCase {
            case,
            n,
            direct,
            spectral,
            spectral_uncorrected,
            rel_discrepancy: r0,
            direct_refined,
            spectral_refined,
            rel_discrepancy_refined: r1,
            shrinks: r1 < r0,
        });
    }
    Ok(SpectralIdentityReport {
        half_width,
        n,
        tol,
        cases: out,
        violations,
    })
}

/// Support radius of the negativity witness.
pub const WITNESS_RADIUS: f64 = 0.04;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSample {
    pub center: Point,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignStructureReport {
    /// Radial bump of radius [`WITNESS_RADIUS`] with `phi(0) = 1`.
    pub witness: PairingSample,
    /// Bumps with `phi >= 0`, `phi(0) = 0`.
    pub vanishing_at_origin: Vec<PairingSample>,
    pub violations: Vec<String>,
}

/// Pairing of `V^` with a bump, sampled on a box adapted to its support.
pub fn bump_pairing(center: Point, radius: f64, n: usize) -> Result<f64> {
    let reach = center.x1.abs().max(center.x2.abs()) + radius;
    let half_width = reach * (1.0 + 4.0 / n as f64) + 1e-3 * radius;
    let phi = GridDensity::sample(half_width, n, |p| bump(p, center, radius))?;
    vhat_pairing(&phi)
}

/// Sign checks of `<V^, phi>`: negative for the small centred bump, positive
/// for non-negative bumps that vanish at the origin.
pub fn sign_structure_check(n: usize) -> Result<SignStructureReport> {
    let mut violations = Vec::new();
    let w = bump_pairing(Point::ORIGIN, WITNESS_RADIUS, n)?;
    if !(w < 0.0) {
        violations.push(format!("witness pairing {w:e} is not negative"));
    }
    let shapes = [
        (Point::new(0.06, 0.06), WITNESS_RADIUS),
        (Point::new(0.0, 0.5), 0.3),
        (Point::new(0.5, 0.0), 0.3),
        (Point::new(0.3, -0.4), 0.2),
        (Point::new(-1.5, 0.2), 1.0),
        (Point::new(2.0, 2.0), 0.5),
    ];
    let mut samples = Vec::with_capacity(shapes.len());
    for (c, r) in shapes {
        let v = bump_pairing(c, r, n)?;
        if !(v > 0.0) {
            violations.push(format!(
                "pairing {v:e} of bump at ({}, {}) radius {r} is not positive",
                c.x1, c.x2
            ));
        }
        samples.push(PairingSample { center: c, radius: r, value: v });
    }
    Ok(SignStructureReport {
        witness: PairingSample {
            center: Point::ORIGIN,
            radius: WITNESS_RADIUS,
            value: w,
        },
        vanishing_at_origin: samples,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub half_width: f64,
    pub n: usize,
    pub k: usize,
    pub column_width: f64,
    pub values: Vec<f64>,
    pub second_differences: Vec<f64>,
    pub argmin_t: f64,
    pub strictly_convex: bool,
    pub violations: Vec<String>,
}

/// [`convexity_probe`] from the circle law to a semicircle column of
/// half-width `column_width`.
pub fn convexity_check(half_width: f64, n: usize, column_width: f64, k: usize) -> Result<ConvexityReport> {
    let f0 = GridDensity::circle_law(half_width, n)?;
    let f1 = GridDensity::mollified_semicircle(half_width, n, column_width)?;
    let values = convexity_probe(&f0, &f1, k)?;
    let second = second_differences(&values);
    let strictly_convex = second.iter().all(|&d| d > 0.0);
    let mut violations = Vec::new();
    for (i, d) in second.iter().enumerate() {
        if !(*d > 0.0) {
            violations.push(format!("second difference {d:e} at t = {}", (i + 1) as f64 / k as f64));
        }
    }
    let imin = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < values[best] { i } else { best });
    Ok(ConvexityReport {
        half_width,
        n,
        k,
        column_width,
        argmin_t: imin as f64 / k as f64,
        values,
        second_differences: second,
        strictly_convex,
        violations,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        assert!((fhat_weight(0.0, 1.0).unwrap() - 0.3183098861837907).abs() < 1e-16);
        assert_eq!(fhat_weight(1.0, 0.0).unwrap(), 0.0);
        assert!((fhat_weight(1.0, 1.0).unwrap() - 0.07957747154594767).abs() < 1e-16);
        assert!(fhat_weight(0.0, 0.0).is_err());
    }

    #[test]
    fn negativity_radius_value() {
        let r0 = negativity_radius();
        assert!((r0 - 0.0399).abs() < 1e-4, "{r0}");
        assert!((EULER_GAMMA + (PI * r0).ln() + 0.5 + 1.0).abs() < 1e-14);
    }

    #[test]
    fn fft_direct_matches_naive_sum() {
        let pos = GridDensity::sample(2.0, 24, |p| bump(p, Point::new(0.3, 0.2), 0.9)).unwrap();
        let neg = GridDensity::sample(2.0, 24, |p| bump(p, Point::new(-0.4, -0.1), 0.7)).unwrap();
        let f = GridDensity::neutral_difference(&pos, &neg).unwrap();
        for g in [&pos, &f] {
            let a = interaction_direct(g);
            let b = interaction_direct_naive(g);
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_density() {
        let z = GridDensity::new(1.0, 8, vec![0.0; 64], true).unwrap();
        assert_eq!(interaction_direct(&z), 0.0);
        assert_eq!(interaction_spectral(&z).unwrap(), 0.0);
    }

    #[test]
    fn spectral_rejects_charged_density() {
        let g = GridDensity::sample(2.0, 16, |p| bump(p, Point::ORIGIN, 1.0)).unwrap();
        assert!(interaction_spectral(&g).is_err());
    }

    #[test]
    fn convexity_probe_degenerate_cases() {
        let f0 = GridDensity::circle_law(1.5, 48).unwrap();
        let seq = convexity_probe(&f0, &f0, 4).unwrap();
        for v in &seq {
            assert!((v - seq[0]).abs() < 1e-12 * seq[0].abs());
        }
        let ends = convexity_probe(&f0, &f0, 1).unwrap();
        assert_eq!(ends.len(), 2);
        let other = GridDensity::circle_law(1.5, 40).unwrap();
        assert!(matches!(convexity_probe(&f0, &other, 4), Err(Error::GridMismatch(_))));
        let heavy = GridDensity::sample(1.5, 48, |p| bump(p, Point::ORIGIN, 1.0)).unwrap();
        assert!(convexity_probe(&f0, &heavy, 4).is_err());
    }

    fn radial_oracle(profile: impl Fn(f64) -> f64, outer: f64) -> f64 {
        let phi0 = profile(0.0);
        let opts = QuadratureOptions::with_tol(1e-12);
        let inner = integrate(|r| if r == 0.0 { 0.0 } else { (profile(r) - phi0) / r }, &[0.0, 1.0], opts)
            .unwrap()
            .value;
        let tail = if outer > 1.0 {
            integrate(|r| profile(r) / r, &[1.0, outer], opts).unwrap().value
        } else {
            0.0
        };
        (0.5 + EULER_GAMMA + PI.ln()) * phi0 + inner + tail
    }

    #[test]
    fn gaussian_pairing_matches_closed_form() {
        for s in [0.5f64, 1.0, 3.0] {
            let l = 4.0 * s.max(1.0);
            let phi = GridDensity::sample(l, 256, |p| (-PI * p.norm_sq() / (s * s)).exp()).unwrap();
            let v = vhat_pairing(&phi).unwrap();
            let exact = 0.5 + (EULER_GAMMA + PI.ln()) / 2.0 + s.ln();
            assert!(rel(v, exact) <= 0.02, "s={s}: {v} vs {exact}");
            let radial = radial_oracle(|r| (-PI * r * r / (s * s)).exp(), 40.0 * s);
            assert!((radial - exact).abs() < 1e-9, "{radial} vs {exact}");
        }
    }

    #[test]
    fn witness_matches_radial_oracle() {
        let v = bump_pairing(Point::ORIGIN, WITNESS_RADIUS, 256).unwrap();
        let r0 = WITNESS_RADIUS;
        let oracle = radial_oracle(
            |r| if r < r0 { crate::grid::bump_profile(r * r / (r0 * r0)) } else { 0.0 },
            1.0,
        );
        assert!(oracle < 0.0);
        assert!((v - oracle).abs() < 1e-2 * oracle.abs(), "{v} vs {oracle}");
    }

    #[test]
    fn sign_structure_holds() {
        let r = sign_structure_check(128).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
    }

    #[test]
    fn pairing_needs_interpolable_origin() {
        let phi = GridDensity::new(1.0, 3, vec![0.0; 9], false).unwrap();
        assert!(vhat_pairing(&phi).is_ok());
        let phi = GridDensity::new(1.0, 4, vec![0.0; 16], false).unwrap();
        assert_eq!(vhat_pairing(&phi).unwrap(), 0.0);
        // exact for cubics
        let phi = GridDensity::sample(1.0, 6, |p| 1.0 + p.x1.powi(3) - 2.0 * p.x1 * p.x2 * p.x2).unwrap();
        assert!((value_at_origin(&phi).unwrap() - 1.0).abs() < 1e-14);
    }
}
