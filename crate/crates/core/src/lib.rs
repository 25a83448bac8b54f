//! Numerical construction of minimal locally concave (Bellman) functions on
//! planar strip-like domains between two convex curves.
//!
//! The library builds the full foliation of extremal segments for given
//! boundary data, tracks its evolution in the strip width `eps`, evaluates
//! the function and its gradient anywhere in the domain, synthesizes
//! extremal test functions, and verifies everything against an independent
//! grid oracle.

pub mod cups;
pub mod error;
pub mod evolution;
pub mod foliation;
pub mod forces;
pub mod fences;
pub mod expr;
pub mod geometry;
pub mod num;
pub mod oracle;

pub use error::{Error, Result};
