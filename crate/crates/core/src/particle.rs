//! Discrete dislocation energy and its minimisation.
//!
//! `w_n(x) = sum_{i != j} V(x^i - x^j) + n sum_i |x^i|^2` over ordered pairs,
//! so that `w_n / n^2` approximates the continuum energy for large `n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::analytic::semicircle_quantile;
use crate::error::{precondition, Error, Result};
use crate::io::fmt_f64;
use crate::kernel::{potential_grad_raw, potential_raw, ExtendedReal, Point};

/// Pairs closer than this are treated as collisions by the line search.
pub const COLLISION_DISTANCE: f64 = 1e-12;

/// Horizontal amplitude of the perturbed wall initialisation.
pub const WALL_PERTURBATION: f64 = 0.01;

/// Particle positions with the provenance needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    positions: Vec<Point>,
    pub seed: u64,
    pub label: String,
}

impl Configuration {
    /// Requires at least one point, with all points finite and pairwise distinct.
    pub fn new(positions: Vec<Point>, seed: u64, label: impl Into<String>) -> Result<Self> {
        if positions.is_empty() {
            return Err(precondition("Configuration", "need at least one particle"));
        }
        if let Some(k) = positions.iter().position(|p| !p.is_finite()) {
            return Err(precondition("Configuration", format!("particle {k} is not finite")));
        }
        if let Some((i, j)) = first_collision(&positions, 0.0) {
            return Err(precondition(
                "Configuration",
                format!("particles {i} and {j} coincide"),
            ));
        }
        Ok(Configuration {
            positions,
            seed,
            label: label.into(),
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn into_positions(self) -> Vec<Point> {
        self.positions
    }

    /// CSV with a `#` comment header carrying `n`, `seed` and `label`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={} seed={} label={}", self.n(), self.seed, self.label)?;
        writeln!(w, "i,x1,x2")?;
        for (i, p) in self.positions.iter().enumerate() {
            writeln!(w, "{i},{},{}", fmt_f64(p.x1), fmt_f64(p.x2))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut seed = 0;
        let mut label = String::new();
        let mut declared_n = None;
        let mut positions = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                let (head, rest) = comment.split_once(" label=").unwrap_or((comment, ""));
                label = rest.to_string();
                for field in head.split_whitespace() {
                    match field.split_once('=') {
                        Some(("n", v)) => declared_n = Some(parse_num::<usize>(v, lineno)?),
                        Some(("seed", v)) => seed = parse_num::<u64>(v, lineno)?,
                        _ => {}
                    }
                }
                if let Some(l) = head.strip_prefix("label=") {
                    label = l.to_string();
                }
                continue;
            }
            if line.starts_with("i,") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 3 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            positions.push(Point::new(
                parse_num(cols[1], lineno)?,
                parse_num(cols[2], lineno)?,
            ));
        }
        if let Some(n) = declared_n {
            if n != positions.len() {
                return Err(Error::Parse(format!(
                    "header declares n={n} but {} rows were read",
                    positions.len()
                )));
            }
        }
        Configuration::new(positions, seed, label)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {}: cannot parse {s:?}", lineno + 1)))
}

/// First pair `(i, j)`, `i < j`, at distance `<= tol`.
fn first_collision(points: &[Point], tol: f64) -> Option<(usize, usize)> {
    let tol_sq = tol * tol;
    points
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            points[i + 1..]
                .iter()
                .position(|q| (*p - *q).norm_sq() <= tol_sq)
                .map(|k| (i, i + 1 + k))
        })
        .min()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Uniform on the unit disk.
    UniformDisk,
    /// The circle law `(1/pi) 1_{|x| < 1}`; sampled exactly like `UniformDisk`.
    CircleLaw,
    /// Semicircle quantiles on the `x2`-axis with a small random `x1` offset.
    PerturbedWall,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::UniformDisk => "uniform_disk",
            InitKind::CircleLaw => "circle_law",
            InitKind::PerturbedWall => "perturbed_wall",
        }
    }
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_disk" => Ok(InitKind::UniformDisk),
            "circle_law" => Ok(InitKind::CircleLaw),
            "perturbed_wall" => Ok(InitKind::PerturbedWall),
            other => Err(Error::Parse(format!("unknown initialisation {other:?}"))),
        }
    }
}

/// Deterministic initial configuration drawn from ChaCha8 seeded with `seed`.
pub fn init_configuration(n: usize, seed: u64, kind: InitKind) -> Result<Configuration> {
    if n == 0 {
        return Err(precondition("init_configuration", "n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = match kind {
        InitKind::UniformDisk | InitKind::CircleLaw => (0..n)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                Point::new(r * theta.cos(), r * theta.sin())
            })
            .collect(),
        InitKind::PerturbedWall => (0..n)
            .map(|i| {
                let q = semicircle_quantile((i as f64 + 0.5) / n as f64);
                let u: f64 = rng.random_range(-1.0..=1.0);
                Point::new(WALL_PERTURBATION * u, q)
            })
            .collect(),
    };
    Configuration::new(positions, seed, kind.name())
}

/// `w_n` of a set of points; `+inf` when two of them coincide.
pub fn energy_of(points: &[Point]) -> ExtendedReal {
    let n = points.len();
    let rows: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut acc = 0.0;
            for (j, q) in points.iter().enumerate() {
                if i != j {
                    let d = *p - *q;
                    if d.x1 == 0.0 && d.x2 == 0.0 {
                        return f64::INFINITY;
                    }
                    acc += potential_raw(d.x1, d.x2);
                }
            }
            acc + n as f64 * p.norm_sq()
        })
        .collect();
    let total: f64 = rows.iter().sum();
    if total == f64::INFINITY {
        ExtendedReal::PosInfinity
    } else {
        ExtendedReal::Finite(total)
    }
}

/// `w_n(c)` summed over ordered pairs.
pub fn discrete_energy(c: &Configuration) -> ExtendedReal {
    energy_of(c.positions())
}

fn grad_of(points: &[Point]) -> Result<Vec<(f64, f64)>> {
    let n = points.len() as f64;
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (mut g1, mut g2) = (0.0, 0.0);
            for (j, q) in points.iter().enumerate() {
                if i != j {
                    let d = *p - *q;
                    if d.x1 == 0.0 && d.x2 == 0.0 {
                        return Err(precondition(
                            "energy_grad",
                            format!("particles {i} and {j} collide"),
                        ));
                    }
                    let (a, b) = potential_grad_raw(d.x1, d.x2);
                    g1 += a;
                    g2 += b;
                }
            }
            Ok((2.0 * g1 + 2.0 * n * p.x1, 2.0 * g2 + 2.0 * n * p.x2))
        })
        .collect()
}

/// Per-particle gradient of `w_n`: `2 sum_{j != i} grad V(x^i - x^j) + 2n x^i`.
pub fn energy_grad(c: &Configuration) -> Result<Vec<(f64, f64)>> {
    grad_of(c.positions())
}

/// Largest per-particle gradient length.
pub fn grad_sup_norm(grad: &[(f64, f64)]) -> f64 {
    grad.iter().map(|g| g.0.hypot(g.1)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop once every particle's gradient is at most this long.
    pub grad_tol: f64,
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 20_000,
            grad_tol: 1e-6,
            initial_step: 1e-3,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.max_iters == 0 || !positive(self.grad_tol) || !positive(self.initial_step) {
            return Err(precondition(
                "MinimizeOptions",
                "max_iters, grad_tol and initial_step must be positive",
            ));
        }
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.backtrack_factor) || !unit(self.armijo_c) {
            return Err(precondition(
                "MinimizeOptions",
                "backtrack_factor and armijo_c must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

/// One row of the descent history. Row 0 is the starting point with `step = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub energy: f64,
    pub scaled_energy: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    /// Backtracking found no acceptable step; the energy is flat to rounding.
    LineSearchStalled,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub configuration: Configuration,
    pub trajectory: Vec<TrajectoryRow>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl MinimizeResult {
    pub fn final_row(&self) -> &TrajectoryRow {
        self.trajectory.last().expect("trajectory has a starting row")
    }
}

/// Writes the trajectory as `iter,energy,scaled_energy,grad_norm,step`.
pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], mut w: W) -> Result<()> {
    writeln!(w, "iter,energy,scaled_energy,grad_norm,step")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iter,
            fmt_f64(r.energy),
            fmt_f64(r.scaled_energy),
            fmt_f64(r.grad_norm),
            fmt_f64(r.step)
        )?;
    }
    Ok(())
}

const MAX_BACKTRACKS: usize = 80;

/// Steepest descent with Armijo backtracking.
///
/// Each line search starts from the previously accepted step enlarged by
/// `1 / backtrack_factor`. Trial points with a pair closer than
/// [`COLLISION_DISTANCE`] are rejected before their energy is evaluated, and
/// a step is accepted only if it satisfies the Armijo condition and strictly
/// lowers the energy. Failing to converge is not an error: the best point is
/// returned with `converged = false`.
pub fn minimize(c0: &Configuration, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    opts.validate()?;
    let n = c0.n();
    let scale = (n * n) as f64;
    let mut x = c0.positions().to_vec();
    let mut energy = energy_of(&x)
        .finite()
        .ok_or_else(|| precondition("minimize", "initial configuration has infinite energy"))?;
    let mut grad = grad_of(&x)?;
    let mut gnorm = grad_sup_norm(&grad);
    let mut trajectory = vec![TrajectoryRow {
        iter: 0,
        energy,
        scaled_energy: energy / scale,
        grad_norm: gnorm,
        step: 0.0,
    }];
    let mut step = opts.initial_step;
    let mut first = true;
    let mut stop = StopReason::MaxIterations;
    let mut trial = x.clone();

    for iter in 1..=opts.max_iters {
        if gnorm <= opts.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        let gsq: f64 = grad.iter().map(|g| g.0 * g.0 + g.1 * g.1).sum();
        let mut s = if first { step } else { step / opts.backtrack_factor };
        first = false;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((t, p), g) in trial.iter_mut().zip(&x).zip(&grad) {
                *t = Point::new(p.x1 - s * g.0, p.x2 - s * g.1);
            }
            if first_collision(&trial, COLLISION_DISTANCE).is_none() {
                if let ExtendedReal::Finite(e) = energy_of(&trial) {
                    if e < energy && e <= energy - opts.armijo_c * s * gsq {
                        accepted = Some(e);
                        break;
                    }
                }
            }
            s *= opts.backtrack_factor;
        }
        let Some(e) = accepted else {
            stop = StopReason::LineSearchStalled;
            break;
        };
        std::mem::swap(&mut x, &mut trial);
        energy = e;
        step = s;
        grad = grad_of(&x)?;
        gnorm = grad_sup_norm(&grad);
        trajectory.push(TrajectoryRow {
            iter,
            energy,
            scaled_energy: energy / scale,
            grad_norm: gnorm,
            step: s,
        });
    }
    if stop == StopReason::MaxIterations && gnorm <= opts.grad_tol {
        stop = StopReason::GradientTolerance;
    }
    let converged = stop == StopReason::GradientTolerance;
    if !converged {
        log::info!("minimize stopped without reaching grad_tol: {stop:?}, |grad| = {gnorm:e}");
    }
    let configuration = Configuration::new(x, c0.seed, c0.label.clone())?;
    Ok(MinimizeResult {
        configuration,
        trajectory,
        converged,
        stop_reason: stop,
    })
}
