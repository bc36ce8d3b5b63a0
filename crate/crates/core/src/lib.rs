//! Search-based kinodynamic trajectory planning for multirotors.
//!
//! Motion primitives generated by piecewise-constant controls of a chain of
//! integrators span a state lattice that is searched with A*, guided by
//! heuristics derived from a linear-quadratic minimum-time relaxation. The
//! resulting trajectory can be smoothed by a minimum-effort spline.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corpus;
pub mod gridmap;
pub mod lattice;
pub mod lti;
pub mod poly;
pub mod refine;
pub mod search;
pub mod trajio;
