//! Desk-scale benchmark for dual-mode cleaning robots: a deterministic 2D
//! simulator, a scene library and generator, baseline policies, and the
//! episode metrics and harness that score them.
//!
//! Geometry and the motion kernels are generic over [`scalar::Scalar`]; the
//! aliases below fix them to `f64`, which the simulator uses throughout.

// NaN-rejecting checks read `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod procgen;
pub mod scalar;
pub mod sim;
pub mod world;

pub type Vec2 = geometry::Vec2<f64>;
pub type Pose = geometry::Pose<f64>;
pub type Rect = geometry::Rect<f64>;
pub type ConvexPolygon = geometry::ConvexPolygon<f64>;
pub type OrientedRect = geometry::OrientedRect<f64>;
