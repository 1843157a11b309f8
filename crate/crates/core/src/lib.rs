//! Exact construction and verification of simple wavelet sets: finite
//! unions of convex polytopes that tile space both under integer
//! translation and under a dilation.

pub mod construct;
pub mod error;
pub mod polytope;
pub mod ratgeom;
pub mod verify;

pub use error::{Result, WavekitError};
