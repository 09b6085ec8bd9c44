//! Densities sampled at the cell centres of a uniform square grid.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::analytic::semicircle_density;
use crate::error::{precondition, Error, Result};
use crate::kernel::Point;

/// Mass tolerance for densities flagged neutral.
pub const NEUTRAL_MASS_TOL: f64 = 1e-12;

/// A density on `[-L, L]^2` sampled at the centres of an `N x N` grid.
///
/// Samples are stored row-major with the first index running along `x1`:
/// `samples[i * n + j]` is the value at `(-L + (i + 1/2) h, -L + (j + 1/2) h)`,
/// `h = 2L / N`. The outer ring of cells is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    half_width: f64,
    n: usize,
    samples: Vec<f64>,
    neutral: bool,
}

/// JSON header accompanying the CSV form of a [`GridDensity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub schema_version: u32,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub neutral: bool,
}

impl GridDensity {
    /// Wrap raw samples, checking the grid invariants.
    pub fn new(half_width: f64, n: usize, samples: Vec<f64>, neutral: bool) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(precondition("GridDensity", "half width must be positive"));
        }
        if n < 3 {
            return Err(precondition("GridDensity", "need at least 3 cells per axis"));
        }
        if samples.len() != n * n {
            return Err(precondition(
                "GridDensity",
                format!("expected {} samples, got {}", n * n, samples.len()),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(precondition("GridDensity", "non-finite sample"));
        }
        let g = GridDensity {
            half_width,
            n,
            samples,
            neutral,
        };
        if g.ring_indices().any(|k| g.samples[k] != 0.0) {
            return Err(precondition(
                "GridDensity",
                "support must lie strictly inside the box (outer ring nonzero)",
            ));
        }
        if neutral && g.mass().abs() > NEUTRAL_MASS_TOL {
            return Err(precondition(
                "GridDensity",
                format!("flagged neutral but mass is {:e}", g.mass()),
            ));
        }
        Ok(g)
    }

    /// Sample `f` at the cell centres; the outer ring is set to zero.
    pub fn sample<F: Fn(Point) -> f64>(half_width: f64, n: usize, f: F) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        let mut samples = vec![0.0; n * n];
        for i in 1..n.saturating_sub(1) {
            let x1 = -half_width + (i as f64 + 0.5) * h;
            for j in 1..n - 1 {
                let x2 = -half_width + (j as f64 + 0.5) * h;
                samples[i * n + j] = f(Point::new(x1, x2));
            }
        }
        GridDensity::new(half_width, n, samples, false)
    }

    fn ring_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| {
            let all = i == 0 || i == n - 1;
            (0..n)
                .filter(move |&j| all || j == 0 || j == n - 1)
                .map(move |j| i * n + j)
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn is_neutral(&self) -> bool {
        self.neutral
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Cell side `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        let h = self.spacing();
        Point::new(
            -self.half_width + (i as f64 + 0.5) * h,
            -self.half_width + (j as f64 + 0.5) * h,
        )
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.n + j]
    }

    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }

    /// Midpoint-rule integral of `w(x) f(x)`.
    pub fn weighted_sum<F: Fn(Point) -> f64>(&self, w: F) -> f64 {
        let h = self.spacing();
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.value(i, j);
                if v != 0.0 {
                    total += v * w(self.cell_center(i, j));
                }
            }
        }
        total * h * h
    }

    /// Total mass by the midpoint rule.
    pub fn mass(&self) -> f64 {
        let h = self.spacing();
        self.samples.iter().sum::<f64>() * h * h
    }

    /// `int |x|^2 f`.
    pub fn second_moment(&self) -> f64 {
        self.weighted_sum(|p| p.norm_sq())
    }

    /// `int x f`.
    pub fn dipole_moment(&self) -> (f64, f64) {
        (self.weighted_sum(|p| p.x1), self.weighted_sum(|p| p.x2))
    }

    pub fn l1_norm(&self) -> f64 {
        let h = self.spacing();
        self.samples.iter().map(|v| v.abs()).sum::<f64>() * h * h
    }

    pub fn is_nonnegative(&self) -> bool {
        self.samples.iter().all(|&v| v >= 0.0)
    }

    /// Rescale to unit mass. Fails for densities of zero or negative mass.
    pub fn normalized(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(precondition("normalized", format!("mass {m} is not positive")));
        }
        for v in &mut self.samples {
            *v /= m;
        }
        self.neutral = false;
        Ok(self)
    }

    /// `pos / mass(pos) - neg / mass(neg)`: a neutral density.
    pub fn neutral_difference(pos: &GridDensity, neg: &GridDensity) -> Result<Self> {
        if !pos.same_grid(neg) {
            return Err(Error::GridMismatch(
                "neutral_difference needs densities on the same grid".into(),
            ));
        }
        let mp = pos.mass();
        let mn = neg.mass();
        if !(mp > 0.0 && mn > 0.0) {
            return Err(precondition(
                "neutral_difference",
                "both parts must have positive mass",
            ));
        }
        let samples = pos
            .samples
            .iter()
            .zip(&neg.samples)
            .map(|(a, b)| a / mp - b / mn)
            .collect();
        GridDensity::new(pos.half_width, pos.n, samples, true)
    }

    /// `t * other + (1 - t) * self` on the same grid.
    pub fn lerp(&self, other: &GridDensity, t: f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("lerp needs densities on the same grid".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| t * b + (1.0 - t) * a)
            .collect();
        Ok(GridDensity {
            half_width: self.half_width,
            n: self.n,
            samples,
            neutral: self.neutral && other.neutral,
        })
    }

    /// Uniform density `1/pi` on the unit disk, renormalised to unit mass on the grid.
    pub fn circle_law(half_width: f64, n: usize) -> Result<Self> {
        GridDensity::sample(half_width, n, |p| {
            if p.norm_sq() <= 1.0 {
                1.0 / std::f64::consts::PI
            } else {
                0.0
            }
        })?
        .normalized()
    }

    /// Semicircle law on the `x2`-axis smeared in `x1` by a smooth bump of
    /// half-width `width`, renormalised to unit mass.
    pub fn mollified_semicircle(half_width: f64, n: usize, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(precondition("mollified_semicircle", "width must be positive"));
        }
        GridDensity::sample(half_width, n, |p| {
            bump_profile((p.x1 / width).powi(2)) * semicircle_density(p.x2)
        })?
        .normalized()
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            schema_version: 1,
            half_width: self.half_width,
            n: self.n,
            neutral: self.neutral,
        }
    }

    /// CSV with columns `i,j,x1,x2,value`, one row per cell.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,x1,x2,value")?;
        for i in 0..self.n {
            for j in 0..self.n {
                let c = self.cell_center(i, j);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i,
                    j,
                    crate::io::fmt_f64(c.x1),
                    crate::io::fmt_f64(c.x2),
                    crate::io::fmt_f64(self.value(i, j))
                )?;
            }
        }
        Ok(())
    }

    /// Inverse of [`GridDensity::write_csv`] given the matching header.
    pub fn read_csv<R: BufRead>(header: &GridHeader, input: R) -> Result<Self> {
        let n = header.n;
        let mut samples = vec![0.0; n * n];
        let mut seen = vec![false; n * n];
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with('i')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 columns", lineno + 1)));
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let i = parse_idx(cols[0])?;
            let j = parse_idx(cols[1])?;
            let v: f64 = cols[4]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if i >= n || j >= n {
                return Err(Error::Parse(format!("line {}: index out of range", lineno + 1)));
            }
            samples[i * n + j] = v;
            seen[i * n + j] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse("missing grid cells".into()));
        }
        GridDensity::new(header.half_width, n, samples, header.neutral)
    }
}

/// `exp(1 - 1/(1 - q))` for `q < 1`, else 0; equals 1 at `q = 0`.
pub fn bump_profile(q: f64) -> f64 {
    if q < 1.0 {
        (1.0 - 1.0 / (1.0 - q)).exp()
    } else {
        0.0
    }
}

/// Smooth compactly supported bump of radius `radius` centred at `center`.
pub fn bump(p: Point, center: Point, radius: f64) -> f64 {
    bump_profile((p - center).norm_sq() / (radius * radius))
}
