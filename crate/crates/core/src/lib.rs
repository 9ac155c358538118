//! Trajectory-local bounded variation for multifunctions: cumulative
//! variation functions, partial variation measures and delay sensitivity
//! of controlled ODEs.

pub mod catalog;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod scenario;
pub mod sensitivity;
pub mod trajectory;
pub mod variation;

pub use error::{Error, Result};
pub use geometry::SetValue;
pub use trajectory::Trajectory;
