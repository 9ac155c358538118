//! Partial variation measures of `m(·, x)` along a trajectory.

mod discrete;
mod field;
mod interval;
mod limit;
mod test_functions;

pub use discrete::{discrete_measure, discrete_measure_at, integrate, Atom, DiscreteMeasure, Window, XiRule};
pub use field::{BvDiagnostic, PointFn, ScalarField};
pub use interval::{interval_bound_check, IntervalBoundContext, IntervalBoundRow};
pub use limit::{measure_at_level, partial_variation_measure, CauchyStep, LevelSummary, MeasureLimit, MeasureSettings};
pub use test_functions::{test_catalog, TestFunction};
