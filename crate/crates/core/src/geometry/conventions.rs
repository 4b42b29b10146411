//! Frozen sign conventions for shear constraints.
//!
//! Calibrated by the `origin_constraint_calibration` test on n = 2, 3: with
//! corner shears as computed by [`super::shears`], the corner shears at a
//! boundary vertex sum to `BOUNDARY_CORNER_SIGN · L_b`, and the weighted sum
//! at the origin vanishes only when edge and corner arcs carry the same sign.

/// `Σ_j z_{c_{b,j}} = BOUNDARY_CORNER_SIGN · L_b`.
pub const BOUNDARY_CORNER_SIGN: f64 = -1.0;

/// Weight of an edge arc in the origin constraint; it starts and ends there.
pub const ORIGIN_EDGE_WEIGHT: f64 = 2.0;

/// Weight of a corner arc in the origin constraint.
pub const ORIGIN_CORNER_WEIGHT: f64 = 1.0;
