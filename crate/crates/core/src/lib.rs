//! Invariant sets of finite differentiable iterated function systems and
//! their quantitative geometry: Hausdorff and d0 metrics, Lebesgue-measure
//! brackets, a distortion calculus for compositions of contractions,
//! dynamic covers with dimension sandwiches, and box-counting capacity.

pub mod error;
pub mod geometry;
pub mod ifs;
pub mod interval;
pub mod linalg;

pub use error::{FractalError, Result};
