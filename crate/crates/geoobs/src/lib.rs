//! Obstacle geodesics around analytic boundary surfaces given as polynomial
//! graphs, together with the symbolic local-structure machinery needed to
//! check finiteness and uniform switch-point bounds at desk scale.
//!
//! The crate is organized around five layers:
//!
//! * [`series`] — exact-coefficient truncated power series in one and two
//!   variables, implicit solves, and rigid-motion re-expansion.
//! * [`geometry`] — surfaces as graphs `z = g(x, y)` with the feasible region
//!   `M = {z <= g}`, frame normalization for one- and two-obstacle
//!   configurations, normal forms, and chart re-expansion.
//! * [`classifier`] — Hessian shape classification, wedge decomposition of
//!   tangent directions, saddle sub-cases, and the two-surface decision tree,
//!   each with a predicted switch-point bound.
//! * [`tracer`] — event-driven unit-speed geodesic integration: boundary
//!   segments with outward-normal acceleration, straight interior segments,
//!   liftoff and contact events, and two-point shooting.
//! * [`harness`] — direction sweeps, epsilon cascades, alternation audits,
//!   sign-lemma checks, and byte-stable report export.
//!
//! The `examples/` directory contains one runnable example per capability;
//! the thin `geoobs` binary exposes the same flows as subcommands.

pub mod classifier;
pub mod cli;
pub mod geometry;
pub mod harness;
pub mod series;
pub mod tracer;
