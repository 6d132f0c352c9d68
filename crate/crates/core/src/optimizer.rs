//! Derivative-free maximization of cavity resistance over parametric shape
//! families.
//!
//! Two local methods are provided, a bound-clipped Nelder–Mead simplex and a
//! coordinate pattern search. [`optimize_family`] runs both from seeded
//! uniform starts and keeps the overall best.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::map_indexed;
use crate::geometry::Vec2;
use crate::resistance::{resistance_quadrature, QuadratureConfig};
use crate::shapes::{ShapeSpec, APERTURE_LEFT, APERTURE_RIGHT};

/// Score given to parameters that do not describe a valid cavity.
pub const DEFAULT_PENALTY: f64 = -10.0;

/// Initial simplex edge and poll step, as a fraction of each parameter range.
pub const INITIAL_STEP: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("start point {0:?} lies outside the search bounds")]
    StartOutOfBounds(Vec<f64>),
    #[error("objective is not finite at the start point {0:?}")]
    ObjectiveFailure(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Parameters `(h, beta)`.
    Quadratic,
    /// `k` straight segments joining the aperture ends; parameters are the
    /// interior vertices `(x_1, y_1, ..., x_{k-1}, y_{k-1})`.
    Polyline { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    #[serde(flatten)]
    pub family: Family,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub penalty: f64,
}

impl SearchSpace {
    pub fn new(family: Family, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptError> {
        let dim = match family {
            Family::Quadratic => 2,
            Family::Polyline { k } if k >= 2 => 2 * (k - 1),
            Family::Polyline { k } => {
                return Err(OptError::InvalidSpace(format!(
                    "a polyline needs at least 2 segments, got {k}"
                )))
            }
        };
        if lower.len() != dim || upper.len() != dim {
            return Err(OptError::InvalidSpace(format!(
                "expected {dim} bounds, got {} lower and {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(OptError::InvalidSpace(format!(
                    "bounds for parameter {i} must be finite with lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            family,
            lower,
            upper,
            penalty: DEFAULT_PENALTY,
        })
    }

    /// `h ∈ [0.2, 4]`, `β ∈ [−2, 2]`.
    pub fn quadratic() -> Self {
        Self::new(Family::Quadratic, vec![0.2, -2.0], vec![4.0, 2.0]).unwrap()
    }

    /// Each interior vertex ranges over `[−1, 1] × [0.05, 3]`.
    pub fn polyline(k: usize) -> Result<Self, OptError> {
        let n = k.saturating_sub(1);
        let lower = [-1.0, 0.05].repeat(n);
        let upper = [1.0, 3.0].repeat(n);
        Self::new(Family::Polyline { k }, lower, upper)
    }

    pub fn with_penalty(mut self, penalty: f64) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    fn clip(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Shape described by a parameter vector. Validity is checked when the
    /// shape is built.
    pub fn shape(&self, params: &[f64]) -> ShapeSpec {
        match self.family {
            Family::Quadratic => ShapeSpec::Quadratic {
                h: params[0],
                beta: params[1],
            },
            Family::Polyline { .. } => {
                let mut points = vec![APERTURE_LEFT];
                points.extend(params.chunks(2).map(|p| Vec2::new(p[0], p[1])));
                points.push(APERTURE_RIGHT);
                ShapeSpec::Polyline { points }
            }
        }
    }

    /// Resistance of the shape at `params` on a fixed midpoint grid, or the
    /// penalty if the shape is invalid or cannot be traced.
    pub fn evaluate(&self, params: &[f64], grid: &QuadratureConfig) -> f64 {
        match self.shape(params).build() {
            Ok(cavity) => match resistance_quadrature(&cavity, grid) {
                Ok(est) => est.value,
                Err(_) => self.penalty,
            },
            Err(_) => self.penalty,
        }
    }

    fn uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Incumbent {
    /// 1-based index of the evaluation that produced this point.
    pub evaluation: usize,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// Every strict improvement of the best-so-far, in order.
    pub trace: Vec<Incumbent>,
}

/// Budget-counted, maximizing wrapper around an objective.
struct Counter<'a, F> {
    f: F,
    space: &'a SearchSpace,
    budget: usize,
    result: OptResult,
}

impl<'a, F: FnMut(&[f64]) -> f64> Counter<'a, F> {
    fn start(mut f: F, space: &'a SearchSpace, x0: &[f64], budget: usize) -> Result<Self, OptError> {
        if budget == 0 {
            return Err(OptError::InvalidConfig("budget must be at least 1".into()));
        }
        if !space.contains(x0) {
            return Err(OptError::StartOutOfBounds(x0.to_vec()));
        }
        let v = f(x0);
        if !v.is_finite() {
            return Err(OptError::ObjectiveFailure(x0.to_vec()));
        }
        Ok(Self {
            f,
            space,
            budget,
            result: OptResult {
                best_params: x0.to_vec(),
                best_value: v,
                evaluations: 1,
                trace: vec![Incumbent {
                    evaluation: 1,
                    params: x0.to_vec(),
                    value: v,
                }],
            },
        })
    }

    fn exhausted(&self) -> bool {
        self.result.evaluations >= self.budget
    }

    /// `None` once the budget is spent. Non-finite values score the penalty.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let mut v = (self.f)(x);
        if !v.is_finite() {
            v = self.space.penalty;
        }
        self.result.evaluations += 1;
        if v > self.result.best_value {
            self.result.best_value = v;
            self.result.best_params = x.to_vec();
            self.result.trace.push(Incumbent {
                evaluation: self.result.evaluations,
                params: x.to_vec(),
                value: v,
            });
        }
        Some(v)
    }
}

fn check_tol(tol: f64) -> Result<(), OptError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(OptError::InvalidConfig(format!("tol must be positive, got {tol}")))
    }
}

/// Maximizes `objective` with a Nelder–Mead simplex whose trial points are
/// clipped to the search bounds.
///
/// The initial simplex steps 10% of each parameter range away from `x0`
/// (inwards when `x0` sits on the upper bound). Stops when the simplex
/// diameter drops below `tol` or the budget is spent.
pub fn nelder_mead<F>(
    objective: F,
    x0: &[f64],
    space: &SearchSpace,
    budget: usize,
    tol: f64,
) -> Result<OptResult, OptError>
where
    F: FnMut(&[f64]) -> f64,
{
    check_tol(tol)?;
    let mut c = Counter::start(objective, space, x0, budget)?;
    let n = space.dim();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), c.result.best_value)];
    for i in 0..n {
        let mut v = x0.to_vec();
        let step = INITIAL_STEP * (space.upper[i] - space.lower[i]);
        v[i] = if v[i] + step <= space.upper[i] { v[i] + step } else { v[i] - step };
        let Some(f) = c.eval(&v) else {
            return Ok(c.result);
        };
        simplex.push((v, f));
    }

    let affine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect();
        space.clip(&mut p);
        p
    };

    loop {
        // Best first. Ties keep their current order.
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        if diameter(&simplex) < tol || c.exhausted() {
            break;
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second_worst = simplex[n - 1].1;
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let xr = affine(&centroid, &worst, -1.0);
        let Some(fr) = c.eval(&xr) else { break };
        if fr > f_best {
            let xe = affine(&centroid, &worst, -2.0);
            let Some(fe) = c.eval(&xe) else {
                simplex[n] = (xr, fr);
                break;
            };
            simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > f_second_worst {
            simplex[n] = (xr, fr);
            continue;
        }
        // Contraction, outside when the reflection beat the worst point.
        let (xc, fc_target) = if fr > f_worst {
            (affine(&centroid, &worst, -0.5), fr)
        } else {
            (affine(&centroid, &worst, 0.5), f_worst)
        };
        let Some(fc) = c.eval(&xc) else { break };
        if fc > fc_target {
            simplex[n] = (xc, fc);
            continue;
        }
        // Shrink towards the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = affine(&best, &vertex.0, 0.5);
            let Some(f) = c.eval(&v) else {
                return Ok(c.result);
            };
            *vertex = (v, f);
        }
    }
    Ok(c.result)
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, (a, _)) in simplex.iter().enumerate() {
        for (b, _) in &simplex[i + 1..] {
            let dist = a.iter().zip(b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

/// Maximizes `objective` by opportunistic coordinate polling.
///
/// Each poll tries `x ± s·(hi − lo)·e_i` coordinate by coordinate and moves
/// to the first strict improvement. A poll without improvement halves `s`,
/// which starts at [`INITIAL_STEP`]. Stops when the largest step drops below `tol` or the
/// budget is spent.
pub fn pattern_search<F>(
    objective: F,
    x0: &[f64],
    space: &SearchSpace,
    budget: usize,
    tol: f64,
) -> Result<OptResult, OptError>
where
    F: FnMut(&[f64]) -> f64,
{
    check_tol(tol)?;
    let mut c = Counter::start(objective, space, x0, budget)?;
    let ranges: Vec<f64> = space.upper.iter().zip(&space.lower).map(|(hi, lo)| hi - lo).collect();
    let max_range = ranges.iter().cloned().fold(0.0, f64::max);
    let mut scale = INITIAL_STEP;
    let mut x = x0.to_vec();
    let mut fx = c.result.best_value;

    'outer: while scale * max_range >= tol {
        let mut improved = false;
        'poll: for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] += sign * scale * ranges[i];
                space.clip(&mut trial);
                if trial == x {
                    continue;
                }
                let Some(f) = c.eval(&trial) else { break 'outer };
                if f > fx {
                    x = trial;
                    fx = f;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            scale *= 0.5;
        }
    }
    Ok(c.result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptMethod {
    NelderMead,
    PatternSearch,
}

impl OptMethod {
    pub fn run<F>(
        self,
        objective: F,
        x0: &[f64],
        space: &SearchSpace,
        budget: usize,
        tol: f64,
    ) -> Result<OptResult, OptError>
    where
        F: FnMut(&[f64]) -> f64,
    {
        match self {
            OptMethod::NelderMead => nelder_mead(objective, x0, space, budget, tol),
            OptMethod::PatternSearch => pattern_search(objective, x0, space, budget, tol),
        }
    }
}

/// Repeats `method` until `budget` is spent, first from `x0` and then from
/// uniform points drawn from `rng`. Returns the best over all restarts and
/// the number of local searches started.
pub fn with_restarts<F, R>(
    method: OptMethod,
    mut objective: F,
    x0: &[f64],
    space: &SearchSpace,
    budget: usize,
    tol: f64,
    rng: &mut R,
) -> Result<(OptResult, usize), OptError>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng,
{
    let mut total = method.run(&mut objective, x0, space, budget, tol)?;
    let mut searches = 1;
    while total.evaluations < budget {
        let start = space.uniform(rng);
        let r = method.run(&mut objective, &start, space, budget - total.evaluations, tol)?;
        for inc in r.trace {
            if inc.value > total.best_value {
                total.best_value = inc.value;
                total.best_params = inc.params.clone();
                total.trace.push(Incumbent {
                    evaluation: total.evaluations + inc.evaluation,
                    ..inc
                });
            }
        }
        total.evaluations += r.evaluations;
        searches += 1;
    }
    Ok((total, searches))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    /// Evaluations allowed per run for the polishing search.
    pub budget: usize,
    pub tol: f64,
    /// Midpoint grid side of the polishing objective.
    pub grid: usize,
    /// Grid side used to re-score the winner.
    pub rescore_grid: usize,
    /// Evaluations allowed per run for the restarted exploration; 0 skips it.
    pub explore_budget: usize,
    pub explore_tol: f64,
    /// Midpoint grid side of the exploration objective.
    pub explore_grid: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            budget: 400,
            tol: 1e-4,
            grid: 500,
            rescore_grid: 2000,
            explore_budget: 400,
            explore_tol: 1e-3,
            explore_grid: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exploration {
    pub searches: usize,
    pub result: OptResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Run {
    pub start_index: usize,
    pub method: OptMethod,
    pub start: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explore: Option<Exploration>,
    /// The polishing search, started from the best explored point.
    pub result: OptResult,
}

impl Run {
    pub fn evaluations(&self) -> usize {
        self.result.evaluations + self.explore.as_ref().map_or(0, |e| e.result.evaluations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyResult {
    pub space: SearchSpace,
    pub config: OptimizeConfig,
    pub multistart: usize,
    pub seed: u64,
    pub best_params: Vec<f64>,
    /// Objective value of the winner on the polishing grid.
    pub best_value: f64,
    /// The winner re-scored on the finer grid, or the penalty if invalid.
    pub rescored_value: f64,
    pub best_method: OptMethod,
    /// Total over all runs and both phases.
    pub evaluations: usize,
    pub runs: Vec<Run>,
}

fn grid_config(n: usize) -> Result<QuadratureConfig, OptError> {
    QuadratureConfig::midpoint(n, n).map_err(|e| OptError::InvalidConfig(e.to_string()))
}

/// Runs Nelder–Mead and pattern search from each of `multistart` seeded
/// uniform starts and returns the overall best.
///
/// Each run first explores with restarts on a coarse grid, which is cheap and
/// escapes the many local maxima of the resistance landscape, then polishes
/// its best point on the search grid. Runs are independent and may execute
/// concurrently; they are merged in start order, so the result depends only
/// on `(space, cfg, multistart, seed)`.
pub fn optimize_family(
    space: &SearchSpace,
    cfg: &OptimizeConfig,
    multistart: usize,
    seed: u64,
) -> Result<FamilyResult, OptError> {
    if multistart == 0 {
        return Err(OptError::InvalidConfig("multistart must be at least 1".into()));
    }
    let grid = grid_config(cfg.grid)?;
    let rescore = grid_config(cfg.rescore_grid)?;
    let explore_grid = grid_config(cfg.explore_grid)?;
    check_tol(cfg.tol)?;
    check_tol(cfg.explore_tol)?;

    // Stream 0 draws the starts; run j restarts from stream j + 1.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..multistart).map(|_| space.uniform(&mut rng)).collect();
    let methods = [OptMethod::NelderMead, OptMethod::PatternSearch];

    let runs = map_indexed(2 * multistart, |j| {
        let (start_index, method) = (j / 2, methods[j % 2]);
        let x0 = &starts[start_index];
        let explore = if cfg.explore_budget > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64 + 1);
            let f = |p: &[f64]| space.evaluate(p, &explore_grid);
            let (result, searches) =
                with_restarts(method, f, x0, space, cfg.explore_budget, cfg.explore_tol, &mut rng)?;
            Some(Exploration { searches, result })
        } else {
            None
        };
        let from = explore.as_ref().map_or(x0, |e| &e.result.best_params);
        let result = method.run(|p| space.evaluate(p, &grid), from, space, cfg.budget, cfg.tol)?;
        Ok(Run {
            start_index,
            method,
            start: x0.clone(),
            explore,
            result,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, OptError>>()?;

    // First run wins ties.
    let winner = runs
        .iter()
        .reduce(|a, b| if b.result.best_value > a.result.best_value { b } else { a })
        .expect("at least one run");
    let best_params = winner.result.best_params.clone();
    Ok(FamilyResult {
        space: space.clone(),
        config: *cfg,
        multistart,
        seed,
        best_value: winner.result.best_value,
        rescored_value: space.evaluate(&best_params, &rescore),
        best_method: winner.method,
        best_params,
        evaluations: runs.iter().map(Run::evaluations).sum(),
        runs,
    })
}
