//! Cumulative variation of a multifunction along a trajectory.

mod checks;
mod engine;
mod limits;
mod multifunction;
mod partition;

pub use checks::{
    check_endpoint_identities, check_increment_ordering, check_monotone_nesting, endpoint_jump, EndpointReport,
    EndpointRow, IncrementReport, IncrementRow, NestingProbe, NestingReport, NestingRow,
};
pub use engine::{
    eta, eta_delta, eta_delta_eps, eta_delta_eps_profile, eta_simple, partition_sum, MeshBound, ProfilePoint,
    RefinementStep, Schedule, ScheduleStep, VariationProfile, VariationSettings,
};
pub use limits::{discontinuity_scan, endpoint_regularize, one_sided_limit, Jump, LimitSchedule, Side};
pub use multifunction::{Multifunction, SetFn, TubeResolution, TubeSample};
pub use partition::Partition;
