//! Decorated plane trees for genus-0 hyperbolic surfaces with a distinguished cusp.
//!
//! The crate enumerates the bicolored plane trees that parametrize the moduli
//! space, computes Weil–Petersson volumes as exact polynomials in `π²` and
//! `Lᵢ²`, solves the string equation and the distance-dependent three-point
//! function as truncated series, and samples random surfaces through the tree
//! bijection.

pub mod error;
pub mod exec;
pub mod geometry;
pub mod quad;
pub mod real;
pub mod sampler;
pub mod series;
pub mod trees;
pub mod wp_poly;

pub use error::{Error, Result};
pub use exec::Exec;

/// Engine version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
