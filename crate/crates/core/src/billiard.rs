//! Particle tracing: entry through the aperture, specular bounces, exit.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{reflect, Hit, Ray, Vec2, ENDPOINT_TOL, T_MIN};
use crate::shapes::{Cavity, WallSide};

pub const DEFAULT_MAX_REFLECTIONS: usize = 1000;

/// Slack on the aperture bounds when accepting an exit crossing.
const APERTURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryState {
    x: f64,
    phi: f64,
}

impl EntryState {
    /// `x` in the open aperture, `phi` strictly inside `(-π/2, π/2)`.
    pub fn new(x: f64, phi: f64) -> Result<Self, TraceError> {
        if x.abs() < 0.5 && phi.abs() < FRAC_PI_2 {
            Ok(Self { x, phi })
        } else {
            Err(TraceError::InvalidEntry { x, phi })
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reflection {
    pub point: Vec2,
    pub arc_index: usize,
    /// Normal actually used for the bounce (averaged at shared corners).
    pub normal: Vec2,
    pub dir_in: Vec2,
    pub dir_out: Vec2,
    pub corner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryResult {
    pub entry: EntryState,
    pub reflections: Vec<Reflection>,
    pub nc: usize,
    pub exit_x: f64,
    pub exit_phi: f64,
    pub y_max: f64,
    pub corner_hit: bool,
}

impl TrajectoryResult {
    /// Consecutive bounces land on opposite side walls, never on a center arc.
    pub fn alternates(&self, cavity: &Cavity) -> bool {
        sides_alternate(self.reflections.iter().map(|r| cavity.side(r.arc_index)))
    }

    /// Rows `step,x,y,dir_x,dir_y`: entry, every bounce, exit.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,x,y,dir_x,dir_y")?;
        let d0 = entry_direction(self.entry.phi);
        writeln!(out, "0,{},{},{},{}", self.entry.x, 0.0, d0.x, d0.y)?;
        for (i, r) in self.reflections.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                r.point.x,
                r.point.y,
                r.dir_out.x,
                r.dir_out.y
            )?;
        }
        let d = Vec2::new(self.exit_phi.sin(), -self.exit_phi.cos());
        writeln!(
            out,
            "{},{},{},{},{}",
            self.nc + 1,
            self.exit_x,
            0.0,
            d.x,
            d.y
        )
    }
}

/// Trajectory recorded up to the point where tracing failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTrajectory {
    pub entry: EntryState,
    pub reflections: Vec<Reflection>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("entry state (x = {x}, phi = {phi}) outside the open aperture/angle range")]
    InvalidEntry { x: f64, phi: f64 },
    #[error("direction ({dx}, {dy}) does not leave the cavity")]
    NotExiting { dx: f64, dy: f64 },
    #[error("no exit after {} reflections (x = {}, phi = {})", .0.reflections.len(), .0.entry.x, .0.entry.phi)]
    NonTermination(Box<PartialTrajectory>),
    #[error("particle escaped outside the aperture after {} reflections (x = {}, phi = {})", .0.reflections.len(), .0.entry.x, .0.entry.phi)]
    EscapeAnomaly(Box<PartialTrajectory>),
}

/// Exit state without the per-bounce record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSummary {
    pub nc: usize,
    pub exit_x: f64,
    pub exit_phi: f64,
    pub y_max: f64,
    pub corner_hit: bool,
    pub alternating: bool,
}

/// Unit velocity of a particle entering at angle `phi` from the vertical.
pub fn entry_direction(phi: f64) -> Vec2 {
    Vec2::new(-phi.sin(), phi.cos())
}

/// Signed exit angle of a downward direction, so that `d = (sin φ⁺, -cos φ⁺)`.
pub fn exit_angle_of(direction: Vec2) -> Result<f64, TraceError> {
    if direction.y < 0.0 {
        Ok(direction.x.atan2(-direction.y))
    } else {
        Err(TraceError::NotExiting {
            dx: direction.x,
            dy: direction.y,
        })
    }
}

pub fn trace(
    cavity: &Cavity,
    entry: EntryState,
    max_reflections: usize,
) -> Result<TrajectoryResult, TraceError> {
    let mut reflections = Vec::new();
    let summary = run(cavity, entry, max_reflections, Some(&mut reflections))?;
    Ok(TrajectoryResult {
        entry,
        nc: summary.nc,
        exit_x: summary.exit_x,
        exit_phi: summary.exit_phi,
        y_max: summary.y_max,
        corner_hit: summary.corner_hit,
        reflections,
    })
}

/// Same as [`trace`] but only keeps the exit state; used by the integrators.
pub fn trace_exit(
    cavity: &Cavity,
    entry: EntryState,
    max_reflections: usize,
) -> Result<ExitSummary, TraceError> {
    match run(cavity, entry, max_reflections, None) {
        Ok(s) => Ok(s),
        // Failures are rare; re-run once to attach the partial trajectory.
        Err(TraceError::NonTermination(_)) | Err(TraceError::EscapeAnomaly(_)) => {
            let mut reflections = Vec::new();
            run(cavity, entry, max_reflections, Some(&mut reflections))
        }
        Err(e) => Err(e),
    }
}

/// Re-enters along the reversed exit velocity and returns `|φ_back − φ|`.
pub fn reverse_check(cavity: &Cavity, entry: EntryState) -> Result<f64, TraceError> {
    reverse_check_with(cavity, entry, DEFAULT_MAX_REFLECTIONS)
}

pub fn reverse_check_with(
    cavity: &Cavity,
    entry: EntryState,
    max_reflections: usize,
) -> Result<f64, TraceError> {
    let forward = trace_exit(cavity, entry, max_reflections)?;
    // -v⁺ = (-sin φ⁺, cos φ⁺) is exactly the entry direction for angle φ⁺.
    let back_entry = EntryState::new(forward.exit_x, forward.exit_phi)?;
    let back = trace_exit(cavity, back_entry, max_reflections)?;
    Ok((back.exit_phi - entry.phi).abs())
}

fn run(
    cavity: &Cavity,
    entry: EntryState,
    max_reflections: usize,
    mut record: Option<&mut Vec<Reflection>>,
) -> Result<ExitSummary, TraceError> {
    let d0 = entry_direction(entry.phi);
    // Start one unit below the aperture so that a wall lying on the aperture
    // line (the flat cavity) is hit at t = 1 rather than at t = 0.
    let mut pos = Vec2::new(entry.x, 0.0) - d0;
    let mut dir = d0;
    let mut nc = 0usize;
    let mut y_max = 0.0f64;
    let mut corner_hit = false;
    let mut last_side: Option<WallSide> = None;
    let mut alternating = true;

    let fail = |record: Option<&mut Vec<Reflection>>, escaped: bool| {
        let partial = Box::new(PartialTrajectory {
            entry,
            reflections: record.map(|r| r.clone()).unwrap_or_default(),
        });
        if escaped {
            TraceError::EscapeAnomaly(partial)
        } else {
            TraceError::NonTermination(partial)
        }
    };

    loop {
        let ray = Ray::new(pos, dir);
        let wall = nearest_hit(cavity, &ray);

        if nc > 0 && dir.y < 0.0 {
            let t_exit = (-pos.y / dir.y).max(0.0);
            if wall.is_none_or(|h| t_exit <= h.t) {
                let exit_x = pos.x + t_exit * dir.x;
                if exit_x.abs() > 0.5 + APERTURE_TOL {
                    return Err(fail(record, true));
                }
                return Ok(ExitSummary {
                    nc,
                    exit_x,
                    exit_phi: exit_angle_of(dir)?,
                    y_max,
                    corner_hit,
                    alternating,
                });
            }
        }

        let Some(hit) = wall else {
            return Err(fail(record, true));
        };
        if nc == max_reflections {
            return Err(fail(record, false));
        }

        let normal = if hit.endpoint_flag {
            corner_hit = true;
            corner_normal(cavity, &hit)
        } else {
            hit.inward_normal
        };
        let out = reflect(dir, normal);

        let side = cavity.side(hit.arc_index);
        alternating &= side != WallSide::Center && last_side.is_none_or(|s| s != side);
        last_side = Some(side);

        if let Some(r) = record.as_deref_mut() {
            r.push(Reflection {
                point: hit.point,
                arc_index: hit.arc_index,
                normal,
                dir_in: dir,
                dir_out: out,
                corner: hit.endpoint_flag,
            });
        }
        nc += 1;
        y_max = y_max.max(hit.point.y);
        pos = hit.point;
        dir = out;
    }
}

fn nearest_hit(cavity: &Cavity, ray: &Ray) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (i, arc) in cavity.arcs().iter().enumerate() {
        if let Some(mut h) = arc.intersect(ray, T_MIN) {
            if best.is_none_or(|b| h.t < b.t) {
                h.arc_index = i;
                best = Some(h);
            }
        }
    }
    best
}

/// At a vertex shared by two chain neighbours the bounce uses the bisecting
/// normal; at a free endpoint (next to the aperture) the arc's own normal.
fn corner_normal(cavity: &Cavity, hit: &Hit) -> Vec2 {
    let arcs = cavity.arcs();
    let i = hit.arc_index;
    let neighbours = [i.checked_sub(1), Some(i + 1)];
    for j in neighbours.into_iter().flatten() {
        let Some(other) = arcs.get(j) else { continue };
        let (e0, e1) = other.endpoints();
        if e0.distance(hit.point) <= 2.0 * ENDPOINT_TOL || e1.distance(hit.point) <= 2.0 * ENDPOINT_TOL
        {
            let sum = hit.inward_normal + other.normal_unchecked(hit.point);
            if sum.norm() > 1e-12 {
                return sum.normalized();
            }
        }
    }
    hit.inward_normal
}

pub(crate) fn sides_alternate(sides: impl IntoIterator<Item = WallSide>) -> bool {
    let mut last = None;
    for s in sides {
        if s == WallSide::Center || last == Some(s) {
            return false;
        }
        last = Some(s);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{double_parabola, flat, rect_notch, triangle_notch};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

    fn entry(x: f64, deg: f64) -> EntryState {
        EntryState::new(x, deg.to_radians()).unwrap()
    }

    #[test]
    fn entry_direction_examples() {
        let d = entry_direction(0.0);
        assert_abs_diff_eq!(d.x, 0.0);
        assert_abs_diff_eq!(d.y, 1.0);
        let d = entry_direction(FRAC_PI_4);
        assert_abs_diff_eq!(d.x, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(d.y, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn exit_angle_examples() {
        assert_eq!(exit_angle_of(Vec2::new(0.0, -1.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            exit_angle_of(Vec2::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)).unwrap(),
            FRAC_PI_4,
            epsilon = 1e-15
        );
        for phi in [-1.2, -0.3, 0.0, 0.7, 1.5] {
            assert_abs_diff_eq!(
                exit_angle_of(-entry_direction(phi)).unwrap(),
                phi,
                epsilon = 1e-15
            );
        }
        assert!(exit_angle_of(Vec2::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn entry_bounds_are_open() {
        assert!(EntryState::new(0.5, 0.0).is_err());
        assert!(EntryState::new(-0.5, 0.0).is_err());
        assert!(EntryState::new(0.0, FRAC_PI_2).is_err());
        assert!(EntryState::new(0.0, f64::NAN).is_err());
        assert!(EntryState::new(0.49, 1.57).is_ok());
    }

    #[test]
    fn flat_mirror() {
        let cav = flat();
        for (x, deg) in [(0.0, 0.0), (0.3, 40.0), (-0.45, -75.0)] {
            let r = trace(&cav, entry(x, deg), 10).unwrap();
            assert_eq!(r.nc, 1);
            assert_abs_diff_eq!(r.exit_phi, -deg.to_radians(), epsilon = 1e-15);
            assert_abs_diff_eq!(r.exit_x, x, epsilon = 1e-15);
            assert_eq!(r.y_max, 0.0);
            assert_eq!(reverse_check(&cav, entry(x, deg)).unwrap(), 0.0);
        }
    }

    #[test]
    fn double_parabola_figure_trajectory() {
        let cav = double_parabola();
        let r = trace(&cav, entry(0.45, 75.0), 100).unwrap();
        assert_eq!(r.nc, 3);
        assert!(r.alternates(&cav));
        assert!(!r.corner_hit);
        assert!(reverse_check(&cav, entry(0.45, 75.0)).unwrap() < 1e-6);
    }

    #[test]
    fn double_parabola_axis_ray_returns() {
        let cav = double_parabola();
        let r = trace(&cav, EntryState::new(0.0, 0.0).unwrap(), 100).unwrap();
        assert!(r.corner_hit);
        assert_eq!(r.nc, 1);
        assert_abs_diff_eq!(r.reflections[0].point.y, SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.exit_phi, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.exit_x, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rect_notch_head_on() {
        let cav = rect_notch(10.0).unwrap();
        let r = trace(&cav, EntryState::new(0.0, 0.0).unwrap(), 100).unwrap();
        assert_eq!(r.nc, 1);
        assert_eq!(r.exit_phi, 0.0);
        assert_eq!(r.y_max, 10.0);
    }

    #[test]
    fn triangle_two_bounce_retroreflects() {
        let cav = triangle_notch();
        for (x, deg) in [(0.2, 30.0), (-0.1, 10.0), (0.3, -20.0)] {
            let r = trace(&cav, entry(x, deg), 100).unwrap();
            if r.nc == 2 {
                assert_abs_diff_eq!(r.exit_phi, deg.to_radians(), epsilon = 1e-12);
            }
        }
        assert!(reverse_check(&cav, entry(0.2, 30.0)).unwrap() < 1e-6);
    }

    #[test]
    fn non_termination_carries_partial() {
        // grazing entry into a deep notch needs thousands of side bounces
        let cav = rect_notch(10.0).unwrap();
        let err = trace(&cav, entry(0.0, 89.9), 50).unwrap_err();
        match err {
            TraceError::NonTermination(p) => assert_eq!(p.reflections.len(), 50),
            other => panic!("unexpected {other:?}"),
        }
        let err = trace_exit(&cav, entry(0.0, 89.9), 50).unwrap_err();
        assert!(matches!(err, TraceError::NonTermination(p) if p.reflections.len() == 50));
    }

    #[test]
    fn trace_and_trace_exit_agree() {
        let cav = double_parabola();
        let full = trace(&cav, entry(-0.2, 12.0), 100).unwrap();
        let fast = trace_exit(&cav, entry(-0.2, 12.0), 100).unwrap();
        assert_eq!(full.nc, fast.nc);
        assert_eq!(full.exit_phi, fast.exit_phi);
        assert_eq!(full.alternates(&cav), fast.alternating);
    }

    #[test]
    fn csv_dump_has_one_row_per_event() {
        let cav = double_parabola();
        let r = trace(&cav, entry(0.45, 75.0), 100).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "step,x,y,dir_x,dir_y");
        assert_eq!(lines.len(), 1 + r.nc + 2);
    }

    proptest! {
        #[test]
        fn bounce_invariants_on_double_parabola(x in -0.499f64..0.499, phi in -1.57f64..1.57) {
            let cav = double_parabola();
            let r = trace(&cav, EntryState::new(x, phi).unwrap(), DEFAULT_MAX_REFLECTIONS).unwrap();
            prop_assert!(r.exit_x.abs() <= 0.5 + 1e-9);
            prop_assert!(r.nc == r.reflections.len() && r.nc >= 1);
            for b in &r.reflections {
                prop_assert!((b.dir_out.norm() - 1.0).abs() < 1e-12);
                let angle = |u: Vec2, v: Vec2| u.cross(v).abs().atan2(u.dot(v));
                let ang_in = angle(-b.dir_in, b.normal);
                let ang_out = angle(b.dir_out, b.normal);
                prop_assert!((ang_in - ang_out).abs() < 1e-9);
                prop_assert!(b.point.y >= -1e-9);
                prop_assert!(cav.arcs()[b.arc_index].distance_to(b.point) < 1e-9);
            }
            if !r.corner_hit {
                prop_assert!(reverse_check(&cav, EntryState::new(x, phi).unwrap()).unwrap() < 1e-6);
            }
        }
    }
}
