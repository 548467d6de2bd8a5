//! Interval ARX modeling over a pattern moving space.
//!
//! Scalar operating-condition data is clustered into pattern classes, each
//! measured by an interval. The resulting interval series is modeled with an
//! interval ARX model whose centers and radii are identified separately
//! (ordinary and nonnegative least squares). Preliminary interval forecasts
//! are classified back into the space to give the final forecasts.

pub mod cli;
pub mod data;
pub mod error;
pub mod interval;
pub mod model;
pub mod nnls;
pub mod pattern_space;
pub mod pipeline;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalMatrix, RealMatrix2n};
pub use model::{IarxParams, RegressorPair};
pub use pattern_space::{FcmConfig, PatternClass, PatternSpace};
pub use pipeline::{MovingPatternModel, RmseReport};
