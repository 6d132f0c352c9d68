//! Convergence, bounds, reproducibility and the Monte-Carlo oracle.

use std::f64::consts::PI;

use retrocav::exec::with_threads;
use retrocav::geometry::Vec2;
use retrocav::resistance::{
    integrand_grid, resistance_monte_carlo, resistance_quadrature, QuadratureConfig,
};
use retrocav::shapes::{
    double_parabola, flat, polyline_cavity, quadratic_cavity, rect_notch, triangle_notch, Cavity,
    QuadraticCavityParams,
};

fn midpoint(cavity: &Cavity, n: usize) -> f64 {
    resistance_quadrature(cavity, &QuadratureConfig::midpoint(n, n).unwrap())
        .unwrap()
        .value
}

fn shipped() -> Vec<(&'static str, Cavity)> {
    vec![
        ("flat", flat()),
        ("triangle", triangle_notch()),
        ("rect_10", rect_notch(10.0).unwrap()),
        ("double_parabola", double_parabola()),
        (
            "quadratic_1.2_0.2",
            quadratic_cavity(QuadraticCavityParams::new(1.2, 0.2).unwrap()).unwrap(),
        ),
        (
            "polyline",
            polyline_cavity(&[
                Vec2::new(-0.5, 0.0),
                Vec2::new(-0.2, 0.9),
                Vec2::new(0.4, 0.7),
                Vec2::new(0.5, 0.0),
            ])
            .unwrap(),
        ),
    ]
}

#[test]
fn successive_refinements_shrink() {
    let dp = double_parabola();
    let values: Vec<f64> = [128, 256, 512, 1024, 2048]
        .iter()
        .map(|&n| midpoint(&dp, n))
        .collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs.windows(2) {
        assert!(w[1] < w[0], "{diffs:?}");
    }
    assert!((values[4] - 1.4965).abs() < 1e-4);
}

#[test]
fn integrand_is_bounded_and_resistance_stays_below_three_halves() {
    let cfg = QuadratureConfig::midpoint(60, 60).unwrap();
    for (name, cavity) in shipped() {
        let grid = integrand_grid(&cavity, &cfg).unwrap();
        for (k, phi) in grid.phi_nodes.iter().enumerate() {
            for g in &grid.values[k] {
                assert!(*g >= 0.0 && *g <= 2.0 * phi.cos() + 1e-12, "{name}: G = {g}");
            }
        }
        let r = midpoint(&cavity, 200);
        assert!((1.0 - 1e-3..=1.5 + 1e-6).contains(&r), "{name}: R = {r}");
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dp = double_parabola();
    let cfg = QuadratureConfig::midpoint(300, 300).unwrap();
    let a = with_threads(1, || resistance_quadrature(&dp, &cfg).unwrap());
    let b = with_threads(4, || resistance_quadrature(&dp, &cfg).unwrap());
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let a = with_threads(1, || resistance_monte_carlo(&dp, 50_000, 9).unwrap());
    let b = with_threads(3, || resistance_monte_carlo(&dp, 50_000, 9).unwrap());
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error, b.std_error);
}

#[test]
fn monte_carlo_agrees_with_quadrature_on_every_family() {
    for (name, cavity) in shipped() {
        let q = midpoint(&cavity, 400);
        let mc = resistance_monte_carlo(&cavity, 200_000, 77).unwrap();
        let se = mc.std_error.unwrap();
        assert!(se > 0.0 || name == "flat");
        assert!((mc.value - q).abs() <= 3.0 * se + 1e-4, "{name}: {} +- {se} vs {q}", mc.value);
    }
}

#[test]
fn flat_matches_its_closed_form_integrand() {
    // G = (1 + cos 2φ) cos φ = 2 cos³ φ on the flat wall.
    let grid = integrand_grid(&flat(), &QuadratureConfig::midpoint(10, 50).unwrap()).unwrap();
    for (k, phi) in grid.phi_nodes.iter().enumerate() {
        for g in &grid.values[k] {
            assert!((g - 2.0 * phi.cos().powi(3)).abs() < 1e-12);
        }
    }
    assert!(grid.phi_nodes.iter().all(|p| p.abs() < PI / 2.0));
}
