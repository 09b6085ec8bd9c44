//! Seeded sweeps over the documented invariants that need many samples or
//! expensive evaluations.

use dislo_core::analytic::{
    axis_potential_derivative, sqrt_branch, constants, df_dx1, f_axis, g_closed, semicircle_density,
};
use dislo_core::fourier::{confined_energy, interaction_direct};
use dislo_core::grid::{bump, GridDensity};
use dislo_core::kernel::{confined_pair_gap, potential};
use dislo_core::particle::{discrete_energy, energy_grad, init_configuration, minimize, Configuration, InitKind, MinimizeOptions};
use dislo_core::quadrature::{
    conv_potential, f_field, f_field_with, g_quadrature, integrate, QuadratureOptions, DEFAULT_TOL,
};
use dislo_core::{Complex64, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::SQRT_2;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn potential_evenness_on_many_points() {
    let mut r = rng(1);
    for _ in 0..10_000 {
        let p = Point::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
        let v = potential(p);
        assert_eq!(v, potential(-p));
        assert_eq!(v, potential(Point::new(-p.x1, p.x2)));
    }
}

#[test]
fn sqrt_branch_on_all_quadrants() {
    let mut r = rng(7);
    let mut checked = 0;
    while checked < 10_000 {
        let z = Complex64::new(r.random_range(-4.0..4.0), r.random_range(-4.0..4.0));
        if z.im.abs() < 1e-9 && z.re.abs() <= 1.0 {
            continue;
        }
        let w = sqrt_branch(z).unwrap();
        let target = z * z - 1.0;
        assert!((w * w - target).norm() <= 1e-12 * target.norm(), "{z}");
        if z.re > 0.0 && z.im > 0.0 {
            assert!(w.re > 0.0 && w.im > 0.0);
        }
        checked += 1;
    }
}

#[test]
fn pair_gap_on_many_pairs() {
    let mut r = rng(2);
    let mut worst = f64::INFINITY;
    for k in 0..100_000 {
        let spread = if k % 2 == 0 { 3.0 } else { 0.05 };
        let x = Point::new(r.random_range(-spread..spread), r.random_range(-spread..spread));
        let y = Point::new(r.random_range(-spread..spread), r.random_range(-spread..spread));
        if x == y {
            continue;
        }
        worst = worst.min(confined_pair_gap(x, y).unwrap());
    }
    assert!(worst >= -1e-12, "{worst}");
}

#[test]
fn semicircle_mass_and_moment() {
    let opts = QuadratureOptions::with_tol(1e-13);
    let mass = integrate(semicircle_density, &[-SQRT_2, SQRT_2], opts).unwrap().value;
    let second = integrate(|t| t * t * semicircle_density(t), &[-SQRT_2, SQRT_2], opts)
        .unwrap()
        .value;
    assert!((mass - 1.0).abs() <= 1e-10, "{mass}");
    assert!((second - 0.5).abs() <= 1e-10, "{second}");
}

#[test]
fn g_closed_matches_quadrature_on_grid() {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let z = Complex64::new(0.1 + 2.9 * i as f64 / 19.0, 0.1 + 2.9 * j as f64 / 19.0);
            let q = g_quadrature(z, 1e-12).unwrap();
            let exact = g_closed(z).unwrap();
            worst = worst.max((q.value - exact).abs());
            assert!(
                (q.value - exact).abs() <= 10.0 * q.error_estimate.max(f64::EPSILON * exact.abs()),
                "error estimate not honest at {z}: {} vs {exact}, est {}",
                q.value,
                q.error_estimate
            );
        }
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn axis_quadrature_error_estimates_are_honest() {
    for k in 0..60 {
        let t = -3.0 + 6.0 * k as f64 / 59.0;
        let r = f_field_with(Point::new(0.0, t), QuadratureOptions::default()).unwrap();
        let exact = f_axis(t);
        assert!(
            (r.value - exact).abs() <= 10.0 * r.error_estimate.max(f64::EPSILON * exact.abs()),
            "t={t}: {} vs {exact}, est {}",
            r.value,
            r.error_estimate
        );
    }
}

#[test]
fn axis_derivative_from_quadrature() {
    let h = 1e-4;
    let v = |t: f64| conv_potential(Point::new(0.0, t), 1e-13).unwrap().value;
    for k in 0..50 {
        let t = -3.0 + 6.0 * (k as f64 + 0.5) / 50.0;
        let fd = (v(t + h) - v(t - h)) / (2.0 * h);
        let exact = axis_potential_derivative(t);
        assert!((fd - exact).abs() <= 1e-5, "t={t}: {fd} vs {exact}");
    }
}

#[test]
fn field_is_symmetric() {
    let mut r = rng(3);
    for _ in 0..100 {
        let p = Point::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let f = f_field(p, DEFAULT_TOL).unwrap();
        let a = f_field(Point::new(-p.x1, p.x2), DEFAULT_TOL).unwrap();
        let b = f_field(Point::new(p.x1, -p.x2), DEFAULT_TOL).unwrap();
        assert!((f - a).abs() <= 2.0 * DEFAULT_TOL && (f - b).abs() <= 2.0 * DEFAULT_TOL);
    }
}

#[test]
fn field_is_continuous_across_the_support() {
    for k in 0..21 {
        let x2 = -1.4 + 2.8 * k as f64 / 20.0;
        let on = f_field(Point::new(0.0, x2), DEFAULT_TOL).unwrap();
        let off = f_field(Point::new(1e-5, x2), DEFAULT_TOL).unwrap();
        assert!((on - off).abs() <= 1e-4, "x2={x2}: {on} vs {off}");
    }
}

#[test]
fn field_increases_in_x1() {
    for x2 in [0.0, 0.5, 1.0, 2.0] {
        let mut prev = f_field(Point::new(0.0, x2), DEFAULT_TOL).unwrap();
        for k in 1..=60 {
            let x1 = 0.05 * k as f64;
            let f = f_field(Point::new(x1, x2), DEFAULT_TOL).unwrap();
            assert!(f > prev, "x2={x2}, x1={x1}: {f} <= {prev}");
            assert!(df_dx1(Point::new(x1, x2)).unwrap() > 0.0);
            prev = f;
        }
    }
}

#[test]
fn quadrature_constant_on_support() {
    let c1 = constants().el_constant;
    for k in 0..11 {
        let t = -1.3 + 2.6 * k as f64 / 10.0;
        assert!((f_field(Point::new(0.0, t), DEFAULT_TOL).unwrap() - c1).abs() <= 1e-9);
    }
}

fn random_bumps(r: &mut ChaCha8Rng, half_width: f64, n: usize, count: usize) -> GridDensity {
    let bumps: Vec<(Point, f64, f64)> = (0..count)
        .map(|_| {
            let rad = r.random_range(0.2..1.0);
            let span = half_width - rad - 0.1;
            (
                Point::new(r.random_range(-span..span), r.random_range(-span..span)),
                rad,
                r.random_range(0.2..1.0),
            )
        })
        .collect();
    GridDensity::sample(half_width, n, |p| bumps.iter().map(|(c, rad, w)| w * bump(p, *c, *rad)).sum())
        .unwrap()
}

#[test]
fn neutral_densities_have_nonnegative_energy() {
    let mut r = rng(4);
    for _ in 0..100 {
        let pos = random_bumps(&mut r, 3.0, 48, 2);
        let neg = random_bumps(&mut r, 3.0, 48, 2);
        let f = GridDensity::neutral_difference(&pos, &neg).unwrap();
        let l1 = f.l1_norm();
        let e = interaction_direct(&f);
        assert!(e >= -1e-6 * l1 * l1, "{e}");
    }
}

#[test]
fn grid_energy_lower_bound() {
    let coeff = constants().lower_bound_coeff;
    let mut r = rng(5);
    for _ in 0..100 {
        let f = random_bumps(&mut r, 3.0, 48, 3).normalized().unwrap();
        let i = confined_energy(&f);
        assert!(i >= coeff * f.second_moment(), "{i} vs {}", coeff * f.second_moment());
    }
}

#[test]
fn energy_gradient_matches_finite_differences() {
    let mut r = rng(6);
    for trial in 0..20 {
        let n = 2 + trial % 19;
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect();
        let c = Configuration::new(pts.clone(), 0, "fd").unwrap();
        let g = energy_grad(&c).unwrap();
        let norm = g.iter().map(|v| v.0 * v.0 + v.1 * v.1).sum::<f64>().sqrt();
        let h = 1e-6;
        let mut err = 0.0;
        for i in 0..n {
            for axis in 0..2 {
                let shifted = |s: f64| {
                    let mut q = pts.clone();
                    if axis == 0 { q[i].x1 += s } else { q[i].x2 += s }
                    discrete_energy(&Configuration::new(q, 0, "fd").unwrap()).to_f64()
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                let an = if axis == 0 { g[i].0 } else { g[i].1 };
                err += (fd - an) * (fd - an);
            }
        }
        assert!(err.sqrt() <= 1e-6 * norm, "n={n}: {} vs {norm}", err.sqrt());
    }
}

#[test]
fn descent_is_monotone_and_deterministic() {
    let c = init_configuration(30, 9, InitKind::UniformDisk).unwrap();
    let opts = MinimizeOptions { max_iters: 300, ..Default::default() };
    let a = minimize(&c, &opts).unwrap();
    let b = minimize(&c, &opts).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.configuration, b.configuration);
    for w in a.trajectory.windows(2) {
        assert!(w[1].energy < w[0].energy);
    }
}
