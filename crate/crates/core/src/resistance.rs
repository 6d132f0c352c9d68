//! The normalized resistance functional
//!
//! ```text
//! R = 3/8 ∫∫ (1 + cos(φ⁺(x, φ) − φ)) cos φ dφ dx,   x ∈ (−1/2, 1/2), φ ∈ (−π/2, π/2)
//! ```
//!
//! evaluated by midpoint quadrature, by Simpson's rule in `φ` on the right
//! half of the aperture, or by seeded Monte-Carlo; plus the whole-body
//! weighted average.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::billiard::{trace_exit, EntryState, TraceError};
use crate::exec::{map_indexed, pairwise_sum};
use crate::sampling::map_batches;
use crate::shapes::{Cavity, ShapeSpec};

/// Reflection cap used by the integrators. Grazing entries into deep notches
/// legitimately need thousands of bounces.
pub const INTEGRATION_MAX_REFLECTIONS: usize = 100_000;

#[derive(Debug, Error)]
pub enum ResistanceError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("the Simpson half-domain rule needs a mirror-symmetric cavity")]
    Asymmetric,
    #[error("trace failed at x = {x}, phi = {phi}: {source}")]
    Trace {
        x: f64,
        phi: f64,
        #[source]
        source: TraceError,
    },
    #[error("invalid body: {0}")]
    InvalidBody(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Midpoint,
    SimpsonPhi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    n_x: usize,
    n_phi: usize,
    rule: Rule,
    max_reflections: usize,
}

impl QuadratureConfig {
    pub fn new(n_x: usize, n_phi: usize, rule: Rule) -> Result<Self, ResistanceError> {
        for (name, n) in [("n_x", n_x), ("n_phi", n_phi)] {
            if n < 2 || n % 2 != 0 {
                return Err(ResistanceError::InvalidConfig(format!(
                    "{name} must be an even integer >= 2, got {n}"
                )));
            }
        }
        Ok(Self {
            n_x,
            n_phi,
            rule,
            max_reflections: INTEGRATION_MAX_REFLECTIONS,
        })
    }

    pub fn midpoint(n_x: usize, n_phi: usize) -> Result<Self, ResistanceError> {
        Self::new(n_x, n_phi, Rule::Midpoint)
    }

    pub fn simpson(n_x: usize, n_phi: usize) -> Result<Self, ResistanceError> {
        Self::new(n_x, n_phi, Rule::SimpsonPhi)
    }

    pub fn with_max_reflections(mut self, max_reflections: usize) -> Self {
        self.max_reflections = max_reflections;
        self
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn max_reflections(&self) -> usize {
        self.max_reflections
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    pub fn dphi(&self) -> f64 {
        PI / self.n_phi as f64
    }

    /// Midpoint abscissae `−1/2 + (i − 1/2)Δx`, `i = 1..=N_x`.
    pub fn x_nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (1..=self.n_x)
            .map(|i| -0.5 + (i as f64 - 0.5) * dx)
            .collect()
    }

    /// Angle nodes: cell midpoints for [`Rule::Midpoint`], interior Simpson
    /// nodes `−π/2 + kΔφ`, `k = 1..N_φ`, for [`Rule::SimpsonPhi`].
    pub fn phi_nodes(&self) -> Vec<f64> {
        let dphi = self.dphi();
        match self.rule {
            Rule::Midpoint => (1..=self.n_phi)
                .map(|k| -FRAC_PI_2 + (k as f64 - 0.5) * dphi)
                .collect(),
            Rule::SimpsonPhi => (1..self.n_phi)
                .map(|k| -FRAC_PI_2 + k as f64 * dphi)
                .collect(),
        }
    }

    /// Simpson weight `w_k` (2 for odd `k`, 1 for even) or 1 for midpoint.
    pub fn weight(&self, k: usize) -> f64 {
        match self.rule {
            Rule::Midpoint => 1.0,
            Rule::SimpsonPhi if k % 2 == 1 => 2.0,
            Rule::SimpsonPhi => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Method {
    Midpoint { n_x: usize, n_phi: usize },
    Simpson { n_x: usize, n_phi: usize },
    MonteCarlo { n_samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResistanceEstimate {
    pub value: f64,
    #[serde(flatten)]
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub corner_hits: u64,
    /// Samples that hit the reflection cap; they are scored `G = cos φ`.
    pub non_terminated: u64,
}

/// One evaluation of the integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSample {
    pub g: f64,
    pub corner: bool,
    pub non_terminated: bool,
}

/// `G(x, φ) = (1 + cos(φ⁺ − φ)) cos φ`.
///
/// Trajectories that exceed the reflection cap are scored `cos φ`, the middle
/// of the admissible range `[0, 2 cos φ]`; escapes abort with the sample
/// coordinates.
pub fn integrand(
    cavity: &Cavity,
    x: f64,
    phi: f64,
    max_reflections: usize,
) -> Result<IntegrandSample, ResistanceError> {
    let wrap = |source| ResistanceError::Trace { x, phi, source };
    let entry = EntryState::new(x, phi).map_err(wrap)?;
    match trace_exit(cavity, entry, max_reflections) {
        Ok(exit) => Ok(IntegrandSample {
            g: (1.0 + (exit.exit_phi - phi).cos()) * phi.cos(),
            corner: exit.corner_hit,
            non_terminated: false,
        }),
        Err(TraceError::NonTermination(_)) => Ok(IntegrandSample {
            g: phi.cos(),
            corner: false,
            non_terminated: true,
        }),
        Err(e) => Err(wrap(e)),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RowSum {
    sum: f64,
    corners: u64,
    non_terminated: u64,
}

fn weighted_rows(
    cavity: &Cavity,
    cfg: &QuadratureConfig,
    x_nodes: &[f64],
) -> Result<RowSum, ResistanceError> {
    let phis = cfg.phi_nodes();
    let rows = map_indexed(x_nodes.len(), |i| -> Result<RowSum, ResistanceError> {
        let x = x_nodes[i];
        let mut terms = Vec::with_capacity(phis.len());
        let mut row = RowSum::default();
        for (j, &phi) in phis.iter().enumerate() {
            let s = integrand(cavity, x, phi, cfg.max_reflections)?;
            // Simpson nodes are numbered from k = 1.
            let k = match cfg.rule {
                Rule::Midpoint => j,
                Rule::SimpsonPhi => j + 1,
            };
            terms.push(cfg.weight(k) * s.g);
            row.corners += s.corner as u64;
            row.non_terminated += s.non_terminated as u64;
        }
        row.sum = pairwise_sum(&terms);
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let sums: Vec<f64> = rows.iter().map(|r| r.sum).collect();
    Ok(RowSum {
        sum: pairwise_sum(&sums),
        corners: rows.iter().map(|r| r.corners).sum(),
        non_terminated: rows.iter().map(|r| r.non_terminated).sum(),
    })
}

/// Midpoint rule in both variables over the full aperture.
pub fn resistance_quadrature(
    cavity: &Cavity,
    cfg: &QuadratureConfig,
) -> Result<ResistanceEstimate, ResistanceError> {
    if cfg.rule != Rule::Midpoint {
        return Err(ResistanceError::InvalidConfig(
            "resistance_quadrature uses the midpoint rule".into(),
        ));
    }
    let total = weighted_rows(cavity, cfg, &cfg.x_nodes())?;
    Ok(ResistanceEstimate {
        value: 0.375 * cfg.dx() * cfg.dphi() * total.sum,
        method: Method::Midpoint {
            n_x: cfg.n_x,
            n_phi: cfg.n_phi,
        },
        std_error: None,
        corner_hits: total.corners,
        non_terminated: total.non_terminated,
    })
}

/// Half-aperture sum
///
/// ```text
/// R = ½ Δx Δφ Σ_{i=N_x/2+1..N_x} Σ_{k=1..N_φ−1} w_k G(x_i, φ_k)
/// ```
///
/// which is composite Simpson in `φ` (the endpoint terms carry `cos(±π/2) = 0`)
/// and midpoint in `x`, doubled by mirror symmetry.
pub fn resistance_simpson(
    cavity: &Cavity,
    cfg: &QuadratureConfig,
) -> Result<ResistanceEstimate, ResistanceError> {
    if cfg.rule != Rule::SimpsonPhi {
        return Err(ResistanceError::InvalidConfig(
            "resistance_simpson uses the Simpson rule in phi".into(),
        ));
    }
    if !cavity.is_mirror_symmetric(1e-12) {
        return Err(ResistanceError::Asymmetric);
    }
    let xs = cfg.x_nodes();
    let total = weighted_rows(cavity, cfg, &xs[cfg.n_x / 2..])?;
    Ok(ResistanceEstimate {
        value: 0.5 * cfg.dx() * cfg.dphi() * total.sum,
        method: Method::Simpson {
            n_x: cfg.n_x,
            n_phi: cfg.n_phi,
        },
        std_error: None,
        corner_hits: total.corners,
        non_terminated: total.non_terminated,
    })
}

/// Dispatches on the configured rule.
pub fn resistance(
    cavity: &Cavity,
    cfg: &QuadratureConfig,
) -> Result<ResistanceEstimate, ResistanceError> {
    match cfg.rule {
        Rule::Midpoint => resistance_quadrature(cavity, cfg),
        Rule::SimpsonPhi => resistance_simpson(cavity, cfg),
    }
}

/// Streaming mean/variance accumulator (Welford, merged with Chan's rule).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

pub const MIN_MONTE_CARLO_SAMPLES: usize = 1000;

/// `R̂ = (3/8)·π·mean(G)` over seeded uniform entries.
pub fn resistance_monte_carlo(
    cavity: &Cavity,
    n_samples: usize,
    seed: u64,
) -> Result<ResistanceEstimate, ResistanceError> {
    resistance_monte_carlo_with(cavity, n_samples, seed, INTEGRATION_MAX_REFLECTIONS)
}

pub fn resistance_monte_carlo_with(
    cavity: &Cavity,
    n_samples: usize,
    seed: u64,
    max_reflections: usize,
) -> Result<ResistanceEstimate, ResistanceError> {
    if n_samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(ResistanceError::InvalidConfig(format!(
            "Monte-Carlo needs at least {MIN_MONTE_CARLO_SAMPLES} samples, got {n_samples}"
        )));
    }
    let batches = map_batches(seed, n_samples, |entries| {
        let mut m = Moments::default();
        let (mut corners, mut capped) = (0u64, 0u64);
        for e in entries {
            let s = integrand(cavity, e.x(), e.phi(), max_reflections)?;
            m.push(s.g);
            corners += s.corner as u64;
            capped += s.non_terminated as u64;
        }
        Ok::<_, ResistanceError>((m, corners, capped))
    });
    let mut total = Moments::default();
    let (mut corners, mut capped) = (0, 0);
    for b in batches {
        let (m, c, k) = b?;
        total = total.merge(m);
        corners += c;
        capped += k;
    }
    let scale = 0.375 * PI;
    let sample_var = total.m2 / (total.n - 1.0);
    Ok(ResistanceEstimate {
        value: scale * total.mean,
        method: Method::MonteCarlo { n_samples, seed },
        std_error: Some(scale * (sample_var / total.n).sqrt()),
        corner_hits: corners,
        non_terminated: capped,
    })
}

/// `sin(ε/2r) / (ε/2r)`: hull perimeter over disc perimeter.
pub fn perimeter_factor(eps: f64, r: f64) -> f64 {
    let u = eps / (2.0 * r);
    u.sin() / u
}

/// Perimeter factor for a disc tiled by `n_cavities` equal cavities
/// (`ε/r = 2π/n`).
pub fn perimeter_ratio(n_cavities: usize) -> f64 {
    assert!(n_cavities >= 3, "need at least 3 cavities, got {n_cavities}");
    let u = PI / n_cavities as f64;
    u.sin() / u
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyPiece {
    pub shape: ShapeSpec,
    /// `L_i / L`
    pub fraction: f64,
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodySpec {
    pub r: f64,
    pub eps: f64,
    pub pieces: Vec<BodyPiece>,
    /// `L_0 / L`
    pub smooth_fraction: f64,
}

impl BodySpec {
    /// Disc whose boundary is tiled by `n` copies of one cavity.
    pub fn tiled_disc(n: usize, shape: ShapeSpec, resistance: f64) -> Self {
        Self {
            r: 1.0,
            eps: 2.0 * PI / n as f64,
            pieces: vec![BodyPiece {
                shape,
                fraction: 1.0,
                resistance,
            }],
            smooth_fraction: 0.0,
        }
    }
}

/// Perimeter factor times the aperture-weighted mean of the piece resistances.
pub fn body_resistance(spec: &BodySpec) -> Result<f64, ResistanceError> {
    let bad = |m: String| Err(ResistanceError::InvalidBody(m));
    if !(spec.r > 0.0 && spec.eps > 0.0 && spec.eps < spec.r) {
        return bad(format!("need 0 < eps < r, got eps = {}, r = {}", spec.eps, spec.r));
    }
    let fractions: f64 = spec.smooth_fraction + spec.pieces.iter().map(|p| p.fraction).sum::<f64>();
    if (fractions - 1.0).abs() > 1e-12 {
        return bad(format!("aperture fractions sum to {fractions}, not 1"));
    }
    if spec.smooth_fraction < 0.0 || spec.pieces.iter().any(|p| p.fraction < 0.0) {
        return bad("negative aperture fraction".into());
    }
    let weighted: f64 = spec
        .pieces
        .iter()
        .map(|p| p.fraction * p.resistance)
        .sum();
    Ok(perimeter_factor(spec.eps, spec.r) * (spec.smooth_fraction + weighted))
}

/// Values on a tensor grid, indexed `[phi][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_nodes: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub type IntegrandGrid = Grid;

impl Grid {
    /// Evaluates `f(x, φ)` on the nodes of `cfg`, parallel over `x`.
    pub fn evaluate<F, E>(cfg: &QuadratureConfig, f: F) -> Result<Self, E>
    where
        F: Fn(f64, f64) -> Result<f64, E> + Sync + Send,
        E: Send,
    {
        let x_nodes = cfg.x_nodes();
        let phi_nodes = cfg.phi_nodes();
        let columns = map_indexed(x_nodes.len(), |i| {
            phi_nodes
                .iter()
                .map(|&phi| f(x_nodes[i], phi))
                .collect::<Result<Vec<f64>, E>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>, E>>()?;
        let values = (0..phi_nodes.len())
            .map(|k| columns.iter().map(|c| c[k]).collect())
            .collect();
        Ok(Self {
            x_nodes,
            phi_nodes,
            values,
        })
    }

    pub fn get(&self, phi_index: usize, x_index: usize) -> f64 {
        self.values[phi_index][x_index]
    }

    /// Header `phi\x,<x nodes>`, then one row per angle node; the angle
    /// column is in degrees, as are the values when `values_are_angles`.
    pub fn write_csv<W: Write>(&self, mut out: W, values_are_angles: bool) -> std::io::Result<()> {
        write!(out, "phi\\x")?;
        for x in &self.x_nodes {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
        for (phi, row) in self.phi_nodes.iter().zip(&self.values) {
            write!(out, "{}", phi.to_degrees())?;
            for v in row {
                let v = if values_are_angles { v.to_degrees() } else { *v };
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `G(x, φ)` on the quadrature nodes.
pub fn integrand_grid(
    cavity: &Cavity,
    cfg: &QuadratureConfig,
) -> Result<IntegrandGrid, ResistanceError> {
    Grid::evaluate(cfg, |x, phi| {
        integrand(cavity, x, phi, cfg.max_reflections).map(|s| s.g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{double_parabola, flat, polyline_cavity, triangle_notch};
    use crate::geometry::Vec2;
    use approx::assert_abs_diff_eq;

    #[test]
    fn config_rejects_odd_or_tiny_grids() {
        assert!(QuadratureConfig::midpoint(3, 4).is_err());
        assert!(QuadratureConfig::midpoint(0, 4).is_err());
        assert!(QuadratureConfig::simpson(4, 5).is_err());
        let cfg = QuadratureConfig::simpson(4, 4).unwrap();
        assert_eq!(cfg.x_nodes(), vec![-0.375, -0.125, 0.125, 0.375]);
        assert_eq!(cfg.phi_nodes().len(), 3);
        assert_eq!((1..4).map(|k| cfg.weight(k)).collect::<Vec<_>>(), vec![2.0, 1.0, 2.0]);
    }

    #[test]
    fn flat_is_unit_resistance() {
        let cav = flat();
        for n in [2, 10, 100] {
            let r = resistance_quadrature(&cav, &QuadratureConfig::midpoint(n, 500).unwrap())
                .unwrap();
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-5);
        }
        let s = resistance_simpson(&cav, &QuadratureConfig::simpson(10, 2000).unwrap()).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn flat_integrand_closed_form() {
        let grid = integrand_grid(&flat(), &QuadratureConfig::midpoint(6, 20).unwrap()).unwrap();
        for (k, phi) in grid.phi_nodes.iter().enumerate() {
            for i in 0..grid.x_nodes.len() {
                assert_abs_diff_eq!(
                    grid.get(k, i),
                    (1.0 + (2.0 * phi).cos()) * phi.cos(),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn integrand_within_bounds_on_double_parabola() {
        let grid =
            integrand_grid(&double_parabola(), &QuadratureConfig::midpoint(40, 40).unwrap())
                .unwrap();
        for (k, phi) in grid.phi_nodes.iter().enumerate() {
            for v in &grid.values[k] {
                assert!(*v >= 0.0 && *v <= 2.0 * phi.cos() + 1e-9);
            }
        }
    }

    #[test]
    fn simpson_rejects_asymmetric_and_wrong_rule() {
        let skew = polyline_cavity(&[
            Vec2::new(-0.5, 0.0),
            Vec2::new(0.2, 0.6),
            Vec2::new(0.5, 0.0),
        ])
        .unwrap();
        let cfg = QuadratureConfig::simpson(10, 10).unwrap();
        assert!(matches!(
            resistance_simpson(&skew, &cfg),
            Err(ResistanceError::Asymmetric)
        ));
        assert!(resistance_quadrature(&skew, &cfg).is_err());
        assert!(resistance_simpson(&skew, &QuadratureConfig::midpoint(10, 10).unwrap()).is_err());
    }

    #[test]
    fn half_domain_matches_full_domain_for_symmetric_cavities() {
        let cfg = QuadratureConfig::midpoint(60, 60).unwrap();
        for cav in [double_parabola(), triangle_notch()] {
            let full = weighted_rows(&cav, &cfg, &cfg.x_nodes()).unwrap().sum;
            let xs = cfg.x_nodes();
            let half = weighted_rows(&cav, &cfg, &xs[30..]).unwrap().sum;
            assert_abs_diff_eq!(full, 2.0 * half, epsilon = 1e-9 * full);
        }
    }

    #[test]
    fn monte_carlo_flat_and_validation() {
        let est = resistance_monte_carlo(&flat(), 100_000, 1).unwrap();
        let se = est.std_error.unwrap();
        assert!((est.value - 1.0).abs() < 3.0 * se, "{est:?}");
        assert!(resistance_monte_carlo(&flat(), 999, 1).is_err());
    }

    #[test]
    fn moments_merge_matches_two_pass() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut a = Moments::default();
        let mut b = Moments::default();
        data[..313].iter().for_each(|&v| a.push(v));
        data[313..].iter().for_each(|&v| b.push(v));
        let m = a.merge(b);
        let mean = data.iter().sum::<f64>() / 1000.0;
        let m2: f64 = data.iter().map(|v| (v - mean).powi(2)).sum();
        assert_abs_diff_eq!(m.mean, mean, epsilon = 1e-12);
        assert_abs_diff_eq!(m.m2, m2, epsilon = 1e-9);
    }

    #[test]
    fn perimeter_ratio_examples() {
        assert_abs_diff_eq!(perimeter_ratio(1_000_000), 1.0, epsilon = 1e-10);
        let u = PI / 42.0;
        assert_abs_diff_eq!(perimeter_ratio(42), u.sin() / u, epsilon = 1e-15);
        assert_abs_diff_eq!(perimeter_ratio(42), 0.99907, epsilon = 1e-5);
        let eps_over_r = 2.0 * PI / 1000.0;
        let approx_deficit = eps_over_r * eps_over_r / 24.0;
        let deficit = 1.0 - perimeter_ratio(1000);
        assert!((deficit - approx_deficit).abs() < 0.01 * approx_deficit);
    }

    #[test]
    fn body_examples() {
        let disc = BodySpec::tiled_disc(42, ShapeSpec::DoubleParabola, 1.4965);
        assert_abs_diff_eq!(body_resistance(&disc).unwrap(), 1.4951, epsilon = 1e-3);

        let smooth = BodySpec {
            r: 1.0,
            eps: 1e-9,
            pieces: vec![],
            smooth_fraction: 1.0,
        };
        assert_abs_diff_eq!(body_resistance(&smooth).unwrap(), 1.0, epsilon = 1e-15);

        let half = BodySpec {
            r: 1.0,
            eps: 1e-9,
            pieces: vec![
                BodyPiece {
                    shape: ShapeSpec::Flat,
                    fraction: 0.5,
                    resistance: 1.0,
                },
                BodyPiece {
                    shape: ShapeSpec::DoubleParabola,
                    fraction: 0.5,
                    resistance: 1.4965,
                },
            ],
            smooth_fraction: 0.0,
        };
        assert_abs_diff_eq!(body_resistance(&half).unwrap(), 1.24825, epsilon = 1e-12);

        let broken = BodySpec {
            smooth_fraction: 0.2,
            ..disc.clone()
        };
        assert!(body_resistance(&broken).is_err());
        let too_wide = BodySpec { eps: 2.0, ..disc };
        assert!(body_resistance(&too_wide).is_err());
    }

    #[test]
    fn estimate_json_shape() {
        let est = ResistanceEstimate {
            value: 1.0,
            method: Method::MonteCarlo {
                n_samples: 1000,
                seed: 4,
            },
            std_error: Some(0.01),
            corner_hits: 0,
            non_terminated: 0,
        };
        let v: serde_json::Value = serde_json::to_value(est).unwrap();
        assert_eq!(v["rule"], "monte_carlo");
        assert_eq!(v["n_samples"], 1000);
        assert_eq!(v["seed"], 4);
    }
}
