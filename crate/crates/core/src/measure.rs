//! Diagnostics of particle configurations against the semicircle wall.

use serde::{Deserialize, Serialize};

use crate::analytic::{constants, semicircle_cdf};
use crate::error::{precondition, Result};
use crate::particle::{discrete_energy, Configuration};

/// Kolmogorov–Smirnov distance between the empirical law of the `x2`
/// coordinates and the semicircle law.
///
/// Both one-sided limits of the empirical CDF are compared at every distinct
/// value; repeated values form a single jump.
pub fn ks_semicircle(c: &Configuration) -> f64 {
    let mut ys: Vec<f64> = c.positions().iter().map(|p| p.x2).collect();
    ys.sort_by(f64::total_cmp);
    let n = ys.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < ys.len() {
        let v = ys[i];
        let mut j = i;
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        let g = semicircle_cdf(v);
        d = d.max((i as f64 / n - g).abs()).max((j as f64 / n - g).abs());
        i = j;
    }
    d.min(1.0)
}

/// Root mean square of the `x1` coordinates.
pub fn wall_width(c: &Configuration) -> f64 {
    let n = c.n() as f64;
    (c.positions().iter().map(|p| p.x1 * p.x1).sum::<f64>() / n).sqrt()
}

/// `w_n / n^2 - I(m1)`.
pub fn energy_gap(c: &Configuration) -> Result<f64> {
    let n = c.n();
    if n < 2 {
        return Err(precondition("energy_gap", "need at least two particles"));
    }
    Ok(discrete_energy(c).to_f64() / (n * n) as f64 - constants().minimal_energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub schema_version: u32,
    pub n: usize,
    pub ks_distance: f64,
    pub wall_width: f64,
    pub energy_gap: f64,
}

impl EmpiricalReport {
    pub fn new(c: &Configuration) -> Result<Self> {
        Ok(EmpiricalReport {
            schema_version: 1,
            n: c.n(),
            ks_distance: ks_semicircle(c),
            wall_width: wall_width(c),
            energy_gap: energy_gap(c)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::semicircle_quantile;
    use crate::kernel::Point;

    fn config(points: Vec<Point>) -> Configuration {
        Configuration::new(points, 0, "t").unwrap()
    }

    #[test]
    fn quantile_points_are_close() {
        for n in [10usize, 100, 1000] {
            let pts = (0..n)
                .map(|i| Point::new(0.0, semicircle_quantile((i as f64 + 0.5) / n as f64)))
                .collect();
            let d = ks_semicircle(&config(pts));
            assert!(d <= 0.5 / n as f64 + 1e-12, "n={n}: {d}");
        }
    }

    #[test]
    fn degenerate_samples() {
        let on_zero = config((0..5).map(|k| Point::new(k as f64, 0.0)).collect());
        assert!((ks_semicircle(&on_zero) - 0.5).abs() < 1e-15);
        let far = config(vec![Point::new(0.0, 3.0)]);
        assert_eq!(ks_semicircle(&far), 1.0);
    }

    #[test]
    fn width_examples() {
        let axis = config((0..4).map(|k| Point::new(0.0, k as f64)).collect());
        assert_eq!(wall_width(&axis), 0.0);
        let alt = config(
            (0..6)
                .map(|k| Point::new(if k % 2 == 0 { 1.0 } else { -1.0 }, k as f64))
                .collect(),
        );
        assert!((wall_width(&alt) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_of_two_particle_minimum() {
        let c = config(vec![Point::new(0.0, 0.5), Point::new(0.0, -0.5)]);
        let g = energy_gap(&c).unwrap();
        assert!((g - (0.25 - 1.0965735902799727)).abs() < 1e-15);
        assert!(energy_gap(&config(vec![Point::ORIGIN])).is_err());
    }
}
