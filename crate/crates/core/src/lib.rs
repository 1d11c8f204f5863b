//! Numerical laboratory for k-convex functions.
//!
//! The crate evaluates k-Hessian operators `F_k[u] = S_k(λ(∇²u))`, tests
//! membership in the Gårding cones `Γ_k` and their duals, checks
//! k-convexity of grid functions three independent ways, estimates
//! Hessian measures by mollification and measures the quantitative
//! regularity estimates that k-convex functions satisfy when `k > n/2`.

pub mod bump;
pub mod cli;
pub mod cones;
pub mod error;
pub mod grid;
pub mod json;
pub mod kconvexity;
pub mod khessian;
pub mod linalg;
pub mod measures;
pub mod regularity;
pub mod rng;

pub use error::{Error, Result};
