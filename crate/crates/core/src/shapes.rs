//! Normalized cavities.
//!
//! Every cavity is expressed in the same frame: the aperture is the segment
//! `[-1/2, 1/2] × {0}` and the hollow lies above it. The boundary is an
//! ordered chain of arcs running from `(-1/2, 0)` to `(1/2, 0)`, with the
//! interior on the right of the direction of travel.

use std::f64::consts::SQRT_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ArcKind, BoundaryArc, Interior, Vec2};

const CHAIN_TOL: f64 = 1e-9;

pub const APERTURE_LEFT: Vec2 = Vec2::new(-0.5, 0.0);
pub const APERTURE_RIGHT: Vec2 = Vec2::new(0.5, 0.0);

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("invalid shape: {0}")]
    Invalid(String),
    #[error("shape spec parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown shape alias `{0}`")]
    UnknownAlias(String),
}

fn invalid(msg: impl Into<String>) -> ShapeError {
    ShapeError::Invalid(msg.into())
}

/// Family tag plus parameters; also the on-disk shape-spec document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", try_from = "RawSpec")]
pub enum ShapeSpec {
    Flat,
    RectNotch { depth: f64 },
    TriangleNotch,
    Quadratic { h: f64, beta: f64 },
    DoubleParabola,
    Polyline { points: Vec<Vec2> },
}

/// Flat view of a shape-spec document. Deserializing through it lets the
/// JSON parser report unknown fields with their position.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "type")]
    kind: String,
    depth: Option<f64>,
    h: Option<f64>,
    beta: Option<f64>,
    points: Option<Vec<Vec2>>,
}

impl TryFrom<RawSpec> for ShapeSpec {
    type Error = String;

    fn try_from(raw: RawSpec) -> Result<Self, String> {
        let RawSpec {
            kind,
            depth,
            h,
            beta,
            points,
        } = raw;
        let present: Vec<&str> = [
            ("depth", depth.is_some()),
            ("h", h.is_some()),
            ("beta", beta.is_some()),
            ("points", points.is_some()),
        ]
        .into_iter()
        .filter_map(|(n, p)| p.then_some(n))
        .collect();
        let allowed: &[&str] = match kind.as_str() {
            "flat" | "triangle_notch" | "double_parabola" => &[],
            "rect_notch" => &["depth"],
            "quadratic" => &["h", "beta"],
            "polyline" => &["points"],
            other => return Err(format!("unknown shape type `{other}`")),
        };
        if let Some(extra) = present.iter().find(|f| !allowed.contains(f)) {
            return Err(format!("field `{extra}` does not apply to type `{kind}`"));
        }
        let need = |v: Option<f64>, name: &str| v.ok_or(format!("missing field `{name}`"));
        Ok(match kind.as_str() {
            "flat" => ShapeSpec::Flat,
            "triangle_notch" => ShapeSpec::TriangleNotch,
            "double_parabola" => ShapeSpec::DoubleParabola,
            "rect_notch" => ShapeSpec::RectNotch {
                depth: need(depth, "depth")?,
            },
            "quadratic" => ShapeSpec::Quadratic {
                h: need(h, "h")?,
                beta: need(beta, "beta")?,
            },
            _ => ShapeSpec::Polyline {
                points: points.ok_or("missing field `points`")?,
            },
        })
    }
}

impl ShapeSpec {
    pub fn build(&self) -> Result<Cavity, ShapeError> {
        match self {
            ShapeSpec::Flat => Ok(flat()),
            ShapeSpec::RectNotch { depth } => rect_notch(*depth),
            ShapeSpec::TriangleNotch => Ok(triangle_notch()),
            ShapeSpec::Quadratic { h, beta } => {
                quadratic_cavity(QuadraticCavityParams::new(*h, *beta)?)
            }
            ShapeSpec::DoubleParabola => Ok(double_parabola()),
            ShapeSpec::Polyline { points } => polyline_cavity(points),
        }
    }
}

/// Built-in aliases: `flat`, `double_parabola`, `triangle_notch`,
/// `rect_notch:<depth>`, `quadratic:<h>,<beta>`.
impl FromStr for ShapeSpec {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ShapeError::UnknownAlias(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| unknown());
        match (name, arg) {
            ("flat", None) => Ok(ShapeSpec::Flat),
            ("double_parabola", None) => Ok(ShapeSpec::DoubleParabola),
            ("triangle_notch", None) => Ok(ShapeSpec::TriangleNotch),
            ("rect_notch", Some(d)) => Ok(ShapeSpec::RectNotch { depth: num(d)? }),
            ("quadratic", Some(p)) => {
                let (h, beta) = p.split_once(',').ok_or_else(unknown)?;
                Ok(ShapeSpec::Quadratic {
                    h: num(h)?,
                    beta: num(beta)?,
                })
            }
            _ => Err(unknown()),
        }
    }
}

pub fn parse_shape_spec(text: &str) -> Result<ShapeSpec, ShapeError> {
    serde_json::from_str(text).map_err(|e| ShapeError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn emit_shape_spec(spec: &ShapeSpec) -> String {
    serde_json::to_string(spec).expect("shape specs always serialize")
}

/// Which wall of the cavity an arc belongs to, fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallSide {
    Left,
    Right,
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cavity {
    arcs: Vec<BoundaryArc>,
    sides: Vec<WallSide>,
    descriptor: ShapeSpec,
}

impl Cavity {
    /// Validates the chain invariants and tags each arc with its wall side.
    pub fn new(arcs: Vec<BoundaryArc>, descriptor: ShapeSpec) -> Result<Self, ShapeError> {
        if arcs.is_empty() {
            return Err(invalid("a cavity needs at least one arc"));
        }
        let mut cursor = APERTURE_LEFT;
        for (i, arc) in arcs.iter().enumerate() {
            check_arc(arc).map_err(|m| invalid(format!("arc {i}: {m}")))?;
            let (e0, e1) = arc.endpoints();
            if e0.y < -CHAIN_TOL || e1.y < -CHAIN_TOL {
                return Err(invalid(format!("arc {i} dips below the aperture line")));
            }
            cursor = if e0.distance(cursor) <= CHAIN_TOL {
                e1
            } else if e1.distance(cursor) <= CHAIN_TOL {
                e0
            } else {
                return Err(invalid(format!("arc {i} is not connected to its predecessor")));
            };
        }
        if cursor.distance(APERTURE_RIGHT) > CHAIN_TOL {
            return Err(invalid("boundary chain does not end at (1/2, 0)"));
        }
        let sides = arcs
            .iter()
            .map(|arc| {
                let x = arc.midpoint().x;
                if x < -1e-12 {
                    WallSide::Left
                } else if x > 1e-12 {
                    WallSide::Right
                } else {
                    WallSide::Center
                }
            })
            .collect();
        Ok(Self {
            arcs,
            sides,
            descriptor,
        })
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }

    pub fn side(&self, arc_index: usize) -> WallSide {
        self.sides[arc_index]
    }

    pub fn descriptor(&self) -> &ShapeSpec {
        &self.descriptor
    }

    /// Total length of the boundary chain (quadratic arcs by Gauss–Legendre).
    pub fn boundary_length(&self) -> f64 {
        self.arcs.iter().map(arc_length).sum()
    }

    /// Whether mirroring across `x = 0` maps the arc set onto itself.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        self.arcs.iter().all(|arc| {
            let m = arc.mirrored();
            self.arcs.iter().any(|other| other.same_as(&m, tol))
        })
    }
}

fn check_arc(arc: &BoundaryArc) -> Result<(), String> {
    match arc.kind {
        ArcKind::Segment { p0, p1 } => {
            if !(p0.is_finite() && p1.is_finite()) {
                return Err("non-finite endpoint".into());
            }
            if p0 == p1 {
                return Err("degenerate segment".into());
            }
        }
        ArcKind::QuadArc {
            a,
            b,
            c,
            y_lo,
            y_hi,
        } => {
            if ![a, b, c, y_lo, y_hi].iter().all(|v| v.is_finite()) {
                return Err("non-finite coefficient".into());
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(y_lo < y_hi) {
                return Err("empty y-range".into());
            }
        }
    }
    Ok(())
}

fn arc_length(arc: &BoundaryArc) -> f64 {
    match arc.kind {
        ArcKind::Segment { p0, p1 } => p0.distance(p1),
        ArcKind::QuadArc {
            a, b, y_lo, y_hi, ..
        } => {
            // 5-point Gauss–Legendre on 16 panels; the integrand is smooth.
            const NODES: [(f64, f64); 5] = [
                (0.0, 0.568_888_888_888_888_9),
                (-0.538_469_310_105_683, 0.478_628_670_499_366_47),
                (0.538_469_310_105_683, 0.478_628_670_499_366_47),
                (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
                (0.906_179_845_938_664, 0.236_926_885_056_189_08),
            ];
            let panels = 16;
            let w = (y_hi - y_lo) / panels as f64;
            (0..panels)
                .map(|p| {
                    let mid = y_lo + (p as f64 + 0.5) * w;
                    NODES
                        .iter()
                        .map(|(u, wt)| {
                            let y = mid + 0.5 * w * u;
                            wt * (2.0 * a * y + b).hypot(1.0)
                        })
                        .sum::<f64>()
                        * 0.5
                        * w
                })
                .sum()
        }
    }
}

/// The flat aperture with no hollow: the only wall is the aperture itself.
pub fn flat() -> Cavity {
    Cavity::new(
        vec![BoundaryArc::segment(
            APERTURE_LEFT,
            APERTURE_RIGHT,
            Interior::Right,
        )],
        ShapeSpec::Flat,
    )
    .expect("flat cavity is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCavityParams {
    h: f64,
    beta: f64,
}

impl QuadraticCavityParams {
    pub fn new(h: f64, beta: f64) -> Result<Self, ShapeError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("height must be positive, got {h}")));
        }
        if !beta.is_finite() {
            return Err(invalid("slope must be finite"));
        }
        Ok(Self { h, beta })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Leading coefficient chosen so that the half-width vanishes at `y = h`.
    pub fn alpha(&self) -> f64 {
        (-self.beta * self.h - 0.5) / (self.h * self.h)
    }

    /// Half-width `g(y) = α y² + β y + 1/2`.
    pub fn half_width(&self, y: f64) -> f64 {
        (self.alpha() * y + self.beta) * y + 0.5
    }
}

/// Cavity bounded by `x = ±g(y)`, `0 ≤ y ≤ h`.
pub fn quadratic_cavity(p: QuadraticCavityParams) -> Result<Cavity, ShapeError> {
    build_quadratic(p, ShapeSpec::Quadratic { h: p.h, beta: p.beta })
}

fn build_quadratic(p: QuadraticCavityParams, descriptor: ShapeSpec) -> Result<Cavity, ShapeError> {
    let (h, beta, alpha) = (p.h, p.beta, p.alpha());
    // g(0) > 0 and g(h) = 0; the other root of g is 1/(2αh). With α > 0 it must
    // not fall strictly inside (0, h).
    if alpha > 0.0 && 1.0 / (2.0 * alpha * h) < h {
        return Err(invalid(format!(
            "half-width becomes negative inside (0, h) for h = {h}, beta = {beta}"
        )));
    }
    let left = BoundaryArc::quad(-alpha, -beta, -0.5, 0.0, h, Interior::Right);
    let right = BoundaryArc::quad(alpha, beta, 0.5, 0.0, h, Interior::Left);
    Cavity::new(vec![left, right], descriptor)
}

/// Two congruent parabolas, each with its focus at the other's vertex:
/// `x = ±(1/2 − y²/4)`, `0 ≤ y ≤ √2`.
pub fn double_parabola() -> Cavity {
    // α = −1/(2h²) = −1/4 exactly; the generic formula rounds h² = 2.
    let left = BoundaryArc::quad(0.25, 0.0, -0.5, 0.0, SQRT_2, Interior::Right);
    let right = BoundaryArc::quad(-0.25, 0.0, 0.5, 0.0, SQRT_2, Interior::Left);
    Cavity::new(vec![left, right], ShapeSpec::DoubleParabola).expect("double parabola is valid")
}

/// Rectangular hollow of unit width and the given depth.
pub fn rect_notch(depth: f64) -> Result<Cavity, ShapeError> {
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(invalid(format!("depth must be positive, got {depth}")));
    }
    let arcs = segment_chain(&[
        APERTURE_LEFT,
        Vec2::new(-0.5, depth),
        Vec2::new(0.5, depth),
        APERTURE_RIGHT,
    ])?;
    Cavity::new(arcs, ShapeSpec::RectNotch { depth })
}

/// Right isosceles triangle with its apex at `(0, 1/2)`.
pub fn triangle_notch() -> Cavity {
    let arcs = segment_chain(&[APERTURE_LEFT, Vec2::new(0.0, 0.5), APERTURE_RIGHT])
        .expect("triangle is valid");
    Cavity::new(arcs, ShapeSpec::TriangleNotch).expect("triangle is valid")
}

pub fn polyline_cavity(points: &[Vec2]) -> Result<Cavity, ShapeError> {
    let arcs = segment_chain(points)?;
    Cavity::new(
        arcs,
        ShapeSpec::Polyline {
            points: points.to_vec(),
        },
    )
}

fn segment_chain(points: &[Vec2]) -> Result<Vec<BoundaryArc>, ShapeError> {
    if points.len() < 2 {
        return Err(invalid("a polyline needs at least two points"));
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    if first.distance(APERTURE_LEFT) > CHAIN_TOL || last.distance(APERTURE_RIGHT) > CHAIN_TOL {
        return Err(invalid("polyline must start at (-1/2, 0) and end at (1/2, 0)"));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite() || p.y < 0.0) {
        return Err(invalid(format!("point ({}, {}) is not admissible", p.x, p.y)));
    }
    let segments: Vec<(Vec2, Vec2)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    if let Some(i) = segments.iter().position(|(a, b)| a == b) {
        return Err(invalid(format!("repeated point at index {i}")));
    }
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            let (a0, a1) = segments[i];
            let (b0, b1) = segments[j];
            let clash = if j == i + 1 {
                folds_back(a0, a1, b1)
            } else {
                segments_touch(a0, a1, b0, b1)
            };
            if clash {
                return Err(invalid(format!("segments {i} and {j} intersect")));
            }
        }
    }
    Ok(segments
        .into_iter()
        .map(|(p0, p1)| BoundaryArc::segment(p0, p1, Interior::Right))
        .collect())
}

/// Consecutive segments `a→b`, `b→c` overlap when `c` doubles back along `a→b`.
fn folds_back(a: Vec2, b: Vec2, c: Vec2) -> bool {
    let (u, v) = (a - b, c - b);
    u.cross(v).abs() <= 1e-12 * u.norm() * v.norm() && u.dot(v) > 0.0
}

fn segments_touch(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> bool {
    let orient = |a: Vec2, b: Vec2, c: Vec2| {
        let v = (b - a).cross(c - a);
        if v.abs() <= 1e-14 {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let on_segment = |a: Vec2, b: Vec2, c: Vec2| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    let (o1, o2) = (orient(p0, p1, q0), orient(p0, p1, q1));
    let (o3, o4) = (orient(q0, q1, p0), orient(q0, q1, p1));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(p0, p1, q0))
        || (o2 == 0 && on_segment(p0, p1, q1))
        || (o3 == 0 && on_segment(q0, q1, p0))
        || (o4 == 0 && on_segment(q0, q1, p1))
}
