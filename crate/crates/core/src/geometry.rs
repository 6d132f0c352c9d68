//! Planar primitives: vectors, rays, boundary arcs, ray/arc intersection and
//! the specular reflection law.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum ray parameter accepted after a reflection.
pub const T_MIN: f64 = 1e-9;
/// Distance below which a hit counts as touching an arc endpoint.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Allowed distance between a point and an arc for it to count as "on" the arc.
pub const ON_ARC_TOL: f64 = 1e-9;

const DISC_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({x}, {y}) is {distance:e} away from the arc")]
    PointOffArc { x: f64, y: f64, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Counterclockwise quarter turn.
    pub fn perp_left(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Clockwise quarter turn.
    pub fn perp_right(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn mirror_x(self) -> Self {
        Self::new(-self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    pub direction: Vec2,
}

impl Ray {
    pub fn new(origin: Vec2, direction: Vec2) -> Self {
        Self { origin, direction }
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.origin + self.direction * t
    }
}

/// Which side of an arc's parametrization direction the cavity interior lies on.
///
/// Segments run from `p0` to `p1`; quadratic arcs run in the direction of
/// increasing `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interior {
    Left,
    Right,
}

impl Interior {
    fn flip(self) -> Self {
        match self {
            Interior::Left => Interior::Right,
            Interior::Right => Interior::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcKind {
    Segment {
        p0: Vec2,
        p1: Vec2,
    },
    /// The curve `x = a·y² + b·y + c` for `y` in `[y_lo, y_hi]`.
    QuadArc {
        a: f64,
        b: f64,
        c: f64,
        y_lo: f64,
        y_hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub kind: ArcKind,
    pub interior: Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec2,
    pub inward_normal: Vec2,
    pub arc_index: usize,
    pub endpoint_flag: bool,
}

impl BoundaryArc {
    pub fn segment(p0: Vec2, p1: Vec2, interior: Interior) -> Self {
        Self {
            kind: ArcKind::Segment { p0, p1 },
            interior,
        }
    }

    pub fn quad(a: f64, b: f64, c: f64, y_lo: f64, y_hi: f64, interior: Interior) -> Self {
        Self {
            kind: ArcKind::QuadArc {
                a,
                b,
                c,
                y_lo,
                y_hi,
            },
            interior,
        }
    }

    /// Endpoints in parametrization order.
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        match self.kind {
            ArcKind::Segment { p0, p1 } => (p0, p1),
            ArcKind::QuadArc {
                a,
                b,
                c,
                y_lo,
                y_hi,
            } => (
                Vec2::new(quad_x(a, b, c, y_lo), y_lo),
                Vec2::new(quad_x(a, b, c, y_hi), y_hi),
            ),
        }
    }

    /// Point at the middle of the parameter range.
    pub fn midpoint(&self) -> Vec2 {
        match self.kind {
            ArcKind::Segment { p0, p1 } => (p0 + p1) * 0.5,
            ArcKind::QuadArc {
                a,
                b,
                c,
                y_lo,
                y_hi,
            } => {
                let y = 0.5 * (y_lo + y_hi);
                Vec2::new(quad_x(a, b, c, y), y)
            }
        }
    }

    /// Mirror image across the line `x = 0`.
    pub fn mirrored(&self) -> Self {
        match self.kind {
            // Mirroring reverses handedness, so the interior side flips.
            ArcKind::Segment { p0, p1 } => {
                Self::segment(p0.mirror_x(), p1.mirror_x(), self.interior.flip())
            }
            ArcKind::QuadArc {
                a,
                b,
                c,
                y_lo,
                y_hi,
            } => Self::quad(-a, -b, -c, y_lo, y_hi, self.interior.flip()),
        }
    }

    /// Whether `other` describes the same point set with the same interior.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        let close = |u: f64, v: f64| (u - v).abs() <= tol;
        let close_v = |u: Vec2, v: Vec2| u.distance(v) <= tol;
        match (self.kind, other.kind) {
            (ArcKind::Segment { p0, p1 }, ArcKind::Segment { p0: q0, p1: q1 }) => {
                (close_v(p0, q0) && close_v(p1, q1) && self.interior == other.interior)
                    || (close_v(p0, q1) && close_v(p1, q0) && self.interior != other.interior)
            }
            (
                ArcKind::QuadArc {
                    a,
                    b,
                    c,
                    y_lo,
                    y_hi,
                },
                ArcKind::QuadArc {
                    a: a2,
                    b: b2,
                    c: c2,
                    y_lo: lo2,
                    y_hi: hi2,
                },
            ) => {
                close(a, a2)
                    && close(b, b2)
                    && close(c, c2)
                    && close(y_lo, lo2)
                    && close(y_hi, hi2)
                    && self.interior == other.interior
            }
            _ => false,
        }
    }

    /// Distance from `p` to the arc, measured horizontally for quadratic arcs
    /// (adequate for the on-arc checks this is used for).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        match self.kind {
            ArcKind::Segment { p0, p1 } => {
                let e = p1 - p0;
                let s = ((p - p0).dot(e) / e.dot(e)).clamp(0.0, 1.0);
                p.distance(p0 + e * s)
            }
            ArcKind::QuadArc {
                a,
                b,
                c,
                y_lo,
                y_hi,
            } => {
                if p.y < y_lo || p.y > y_hi {
                    let (e0, e1) = self.endpoints();
                    p.distance(e0).min(p.distance(e1))
                } else {
                    (p.x - quad_x(a, b, c, p.y)).abs()
                }
            }
        }
    }

    /// Unit normal pointing into the cavity interior at `point`.
    pub fn normal_at(&self, point: Vec2) -> Result<Vec2, GeometryError> {
        let distance = self.distance_to(point);
        // Negated so that NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(distance <= ON_ARC_TOL) {
            return Err(GeometryError::PointOffArc {
                x: point.x,
                y: point.y,
                distance,
            });
        }
        Ok(self.normal_unchecked(point))
    }

    pub(crate) fn normal_unchecked(&self, point: Vec2) -> Vec2 {
        let tangent = match self.kind {
            ArcKind::Segment { p0, p1 } => p1 - p0,
            ArcKind::QuadArc {
                a, b, y_lo, y_hi, ..
            } => {
                let y = point.y.clamp(y_lo, y_hi);
                Vec2::new(2.0 * a * y + b, 1.0)
            }
        };
        let n = match self.interior {
            Interior::Left => tangent.perp_left(),
            Interior::Right => tangent.perp_right(),
        };
        n.normalized()
    }

    /// Nearest intersection of `ray` with this arc with parameter `t > t_min`.
    ///
    /// The returned hit carries `arc_index = 0`; callers iterating over a
    /// cavity overwrite it.
    pub fn intersect(&self, ray: &Ray, t_min: f64) -> Option<Hit> {
        let t = match self.kind {
            ArcKind::Segment { p0, p1 } => intersect_segment(ray, p0, p1, t_min),
            ArcKind::QuadArc {
                a,
                b,
                c,
                y_lo,
                y_hi,
            } => intersect_quad(ray, a, b, c, y_lo, y_hi, t_min),
        }?;
        let point = ray.at(t);
        let (e0, e1) = self.endpoints();
        let endpoint_flag =
            point.distance(e0) <= ENDPOINT_TOL || point.distance(e1) <= ENDPOINT_TOL;
        Some(Hit {
            t,
            point,
            inward_normal: self.normal_unchecked(point),
            arc_index: 0,
            endpoint_flag,
        })
    }
}

/// Convenience wrapper over [`BoundaryArc::intersect`].
pub fn intersect(ray: &Ray, arc: &BoundaryArc, t_min: f64) -> Option<Hit> {
    arc.intersect(ray, t_min)
}

/// Specular reflection of `d` about the line with unit normal `n`.
pub fn reflect(d: Vec2, n: Vec2) -> Vec2 {
    d - n * (2.0 * d.dot(n))
}

#[inline]
pub(crate) fn quad_x(a: f64, b: f64, c: f64, y: f64) -> f64 {
    (a * y + b) * y + c
}

fn intersect_segment(ray: &Ray, p0: Vec2, p1: Vec2, t_min: f64) -> Option<f64> {
    let e = p1 - p0;
    let denom = ray.direction.cross(e);
    if denom == 0.0 {
        return None;
    }
    let w = p0 - ray.origin;
    let t = w.cross(e) / denom;
    let s = w.cross(ray.direction) / denom;
    let s_tol = ENDPOINT_TOL / e.norm();
    (t > t_min && (-s_tol..=1.0 + s_tol).contains(&s)).then_some(t)
}

fn intersect_quad(
    ray: &Ray,
    a: f64,
    b: f64,
    c: f64,
    y_lo: f64,
    y_hi: f64,
    t_min: f64,
) -> Option<f64> {
    let Ray {
        origin: p,
        direction: d,
    } = *ray;
    // Substituting the ray into x = a y² + b y + c.
    let qa = a * d.y * d.y;
    let qb = (2.0 * a * p.y + b) * d.y - d.x;
    let qc = quad_x(a, b, c, p.y) - p.x;

    let mut roots = [f64::NAN; 2];
    if qa == 0.0 {
        if qb == 0.0 {
            return None;
        }
        roots[0] = -qc / qb;
    } else {
        let mut disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            if disc < -DISC_CLAMP {
                return None;
            }
            disc = 0.0;
        }
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        if q == 0.0 {
            // qb == 0 and disc == 0: double root at the origin's parameter.
            roots[0] = 0.0;
        } else {
            roots[0] = q / qa;
            roots[1] = qc / q;
        }
    }

    let y_tol = ENDPOINT_TOL;
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t > t_min)
        .filter(|t| {
            let y = p.y + t * d.y;
            y >= y_lo - y_tol && y <= y_hi + y_tol
        })
        .min_by(f64::total_cmp)
}
