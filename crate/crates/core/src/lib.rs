//! Specular billiards in two-dimensional cavities and the Newtonian
//! resistance of bodies whose boundaries are carved with them.
//!
//! A particle enters a normalized cavity through its unit aperture, bounces
//! elastically off the walls and leaves with exit angle `φ⁺`. Averaging
//! `(1 + cos(φ⁺ − φ)) cos φ` over all entries gives the resistance of the
//! cavity relative to a flat segment; it lies in `[1, 1.5]`.

pub mod analysis;
pub mod billiard;
pub mod exec;
pub mod geometry;
pub mod optimizer;
pub mod resistance;
pub mod sampling;
pub mod shapes;

pub use billiard::{trace, EntryState, TraceError, TrajectoryResult};
pub use geometry::{BoundaryArc, Vec2};
pub use resistance::{QuadratureConfig, ResistanceEstimate, Rule};
pub use shapes::{Cavity, ShapeSpec};
