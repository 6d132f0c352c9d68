//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! gated criterion fails.
//!
//! Runs without the libtest harness so the report is always printed.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retrocav::analysis::{census, constants, CensusReport};
use retrocav::billiard::{reverse_check, trace, EntryState, DEFAULT_MAX_REFLECTIONS};
use retrocav::exec::{current_threads, with_threads};
use retrocav::optimizer::{optimize_family, OptimizeConfig, SearchSpace};
use retrocav::resistance::{
    body_resistance, resistance_monte_carlo, resistance_quadrature, resistance_simpson, BodySpec,
    QuadratureConfig,
};
use retrocav::shapes::{double_parabola, flat, rect_notch, triangle_notch, Cavity, ShapeSpec};

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} {id:>3}  {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }

    fn note(&self, id: &str, detail: &str) {
        println!("NOTE {id:>3}  {detail}");
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn midpoint(cavity: &Cavity, n: usize) -> f64 {
    resistance_quadrature(cavity, &QuadratureConfig::midpoint(n, n).unwrap())
        .unwrap()
        .value
}

fn main() -> ExitCode {
    let mut g = Gate { failures: 0 };
    let cores = with_threads(0, current_threads);
    println!("acceptance suite, {cores} worker(s) available");

    // 1. Flat baseline.
    let (r, t) = timed(|| with_threads(1, || midpoint(&flat(), 500)));
    g.check(
        "1",
        (r - 1.0).abs() <= 1e-6 && t < Duration::from_secs(5),
        format!("flat 500^2: R = {r:.9} (tol 1e-6), {:.2} s single-threaded (limit 5 s)", t.as_secs_f64()),
    );

    // 2. Right-angled triangle notch.
    let tri = midpoint(&triangle_notch(), 1000);
    g.check(
        "2",
        (tri - SQRT_2).abs() <= 0.005,
        format!("triangle_notch 1000^2: R = {tri:.6}, expected 1.41421 +- 0.005"),
    );

    // 3. Deep rectangle.
    let rect = midpoint(&rect_notch(10.0).unwrap(), 1000);
    g.check(
        "3",
        (rect - 1.25).abs() <= 0.02,
        format!("rect_notch:10 1000^2: R = {rect:.6}, expected 1.25 +- 0.02"),
    );

    // 4. Double parabola, both rules.
    let dp = double_parabola();
    let (dp_mid, t_mid) = timed(|| midpoint(&dp, 1000));
    let dp_simpson = resistance_simpson(&dp, &QuadratureConfig::simpson(1000, 2000).unwrap())
        .unwrap()
        .value;
    g.check(
        "4",
        (dp_mid - 1.4965).abs() <= 0.001
            && (dp_simpson - 1.49650).abs() <= 5e-4
            && t_mid < Duration::from_secs(120),
        format!(
            "double_parabola: midpoint 1000^2 R = {dp_mid:.6} (1.4965 +- 1e-3), \
             Simpson 2000 phi-nodes R = {dp_simpson:.6} (1.49650 +- 5e-4), {:.2} s (limit 120 s)",
            t_mid.as_secs_f64()
        ),
    );
    if cores >= 2 {
        let (_, t1) = timed(|| with_threads(1, || midpoint(&dp, 1000)));
        let (_, tn) = timed(|| with_threads(cores, || midpoint(&dp, 1000)));
        g.note(
            "4",
            &format!("speedup {:.2}x on {cores} workers", t1.as_secs_f64() / tn.as_secs_f64()),
        );
    } else {
        g.note("4", "parallel speedup not measurable: only one worker available");
    }

    // 5. Disc tiled with 42 double-parabola cavities.
    let body = body_resistance(&BodySpec::tiled_disc(42, ShapeSpec::DoubleParabola, dp_mid)).unwrap();
    g.check(
        "5",
        (body - 1.4951).abs() <= 0.001,
        format!("42-cavity disc: R = {body:.6}, expected 1.4951 +- 1e-3"),
    );

    // 6. Optimizer rediscovers (sqrt 2, 0).
    let (opt, t_opt) =
        timed(|| optimize_family(&SearchSpace::quadratic(), &OptimizeConfig::default(), 8, 7).unwrap());
    let (h, beta) = (opt.best_params[0], opt.best_params[1]);
    g.check(
        "6",
        (h - SQRT_2).abs() < 0.01
            && beta.abs() < 0.01
            && opt.rescored_value >= 1.4955
            && opt.best_value <= 1.5 + 1e-6
            && t_opt < Duration::from_secs(600),
        format!(
            "quadratic family, 8 starts, seed 7: h = {h:.5}, beta = {beta:.6}, \
             R = {:.6} (2000^2 re-score {:.6}, >= 1.4955), {} evaluations, {:.0} s (limit 600 s)",
            opt.best_value,
            opt.rescored_value,
            opt.evaluations,
            t_opt.as_secs_f64()
        ),
    );

    // 7-9. Reflection theorems on 10^4 seeded samples.
    let report = census(&dp, 10_000, 42);
    let s = &report.summary;
    g.check(
        "7",
        s.violations.thm1 == 0 && s.failed == 0,
        format!(
            "|phi| > phi0: {} samples without exactly 3 alternating reflections, {} failed traces",
            s.violations.thm1, s.failed
        ),
    );
    let fewer = s.histogram.range(..3).map(|(_, c)| c).sum::<u64>();
    g.check(
        "8",
        s.violations.thm2 == 0 && fewer == 0,
        format!("samples with nc < 3: {fewer} (histogram {:?})", s.histogram),
    );
    let (max_dev, max_phi, many) = many_reflection_extremes(&report);
    g.check(
        "9",
        max_dev < 38.94 && max_phi < 19.48 && s.violations.corollary == 0,
        format!(
            "{many} samples with nc >= 4: max |phi - phi+| = {max_dev:.4} deg (< 38.94), \
             max |phi| = {max_phi:.4} deg (< 19.48)"
        ),
    );

    // 10. Monte-Carlo against quadrature.
    let shapes = [
        ("flat", flat(), 1.0),
        ("triangle_notch", triangle_notch(), tri),
        ("rect_notch:10", rect_notch(10.0).unwrap(), rect),
        ("double_parabola", dp.clone(), dp_mid),
    ];
    for (name, cavity, quad) in &shapes {
        let mc = resistance_monte_carlo(cavity, 1_000_000, 2024).unwrap();
        let se = mc.std_error.unwrap();
        let z = (mc.value - quad) / se;
        g.check(
            "10",
            z.abs() <= 3.0,
            format!(
                "{name}: Monte-Carlo 10^6 R = {:.5} +- {se:.5}, quadrature 1000^2 {quad:.5}, |z| = {:.2} (<= 3)",
                mc.value,
                z.abs()
            ),
        );
    }
    // 11. Per-bounce properties and printed constants.
    let (law, speed, rev, n_traj) = property_suite(&dp, 1000, 11);
    g.check(
        "11",
        law < 1e-9 && speed < 1e-12 && rev < 1e-6 && n_traj == 1000,
        format!(
            "{n_traj} double-parabola trajectories: reflection-law residual {law:.2e} (< 1e-9), \
             speed drift {speed:.2e} (< 1e-12), reversibility {rev:.2e} (< 1e-6)"
        ),
    );
    let c = constants();
    let phi0 = c.phi0.to_degrees();
    let [y1, y2, y3, _] = c.y_star;
    g.check(
        "11",
        // The printed 19.47 is compared in radians, the unit of the constant.
        (c.phi0 - 19.47f64.to_radians()).abs() <= 1e-3
            && (phi0 - 19.4712).abs() <= 1e-4
            && (y1 - 1.274).abs() <= 1e-3
            && (y2 - 1.356).abs() <= 1e-3
            && (y3 - 0.670).abs() <= 1e-3,
        format!("constants: phi0 = {phi0:.4} deg, y1* = {y1:.4}, y2* = {y2:.4}, y3* = {y3:.4}"),
    );

    // 12. Not gated.
    g.note(
        "12",
        "converged 1e-6 values at 5000 subdivisions are excluded (long-running, optional)",
    );

    if g.failures == 0 {
        println!("all gated criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} gated check(s) failed", g.failures);
        ExitCode::FAILURE
    }
}

/// `(max |φ − φ⁺|, max |φ|, count)` over samples with four or more bounces, degrees.
fn many_reflection_extremes(report: &CensusReport) -> (f64, f64, usize) {
    let mut out = (0.0f64, 0.0f64, 0usize);
    for r in &report.records {
        if let Some(e) = r.exit.filter(|e| e.nc >= 4) {
            out.0 = out.0.max((r.phi - e.phi_plus).abs().to_degrees());
            out.1 = out.1.max(r.phi.abs().to_degrees());
            out.2 += 1;
        }
    }
    out
}

/// Largest reflection-law residual, speed drift and reversal mismatch over
/// `n` random trajectories that touch no corner.
fn property_suite(cavity: &Cavity, n: usize, seed: u64) -> (f64, f64, f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut law, mut speed, mut rev) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    while done < n {
        let x = rng.random_range(-0.4999..0.4999);
        let phi = rng.random_range(-0.4999 * PI..0.4999 * PI);
        let entry = EntryState::new(x, phi).unwrap();
        let t = trace(cavity, entry, DEFAULT_MAX_REFLECTIONS).unwrap();
        if t.corner_hit {
            continue;
        }
        for b in &t.reflections {
            // Normal recomputed from the arc, independent of the tracer.
            let n = cavity.arcs()[b.arc_index].normal_at(b.point).unwrap();
            let tangent = n.perp_left();
            // Tangential component kept, normal component reversed.
            law = law
                .max((b.dir_out.dot(tangent) - b.dir_in.dot(tangent)).abs())
                .max((b.dir_out.dot(n) + b.dir_in.dot(n)).abs());
            speed = speed.max((b.dir_out.norm() - 1.0).abs());
        }
        rev = rev.max(reverse_check(cavity, entry).unwrap());
        done += 1;
    }
    (law, speed, rev, done)
}
