//! Delay sensitivity of `J(u) = g(x(T))` for `ẋ = f(x, u(t))`.

mod control;
mod derivative;
mod system;

pub use control::{delayed_control, ControlSignal, Piece, PointValue};
pub use derivative::{
    delayed_field, fd_oracle, filippov_check, order_ratio, ratio_spread, sensitivity_derivative, smooth_gradient,
    sup_distance, trace_csv, DerivativeSide, FdReport, FdRow, FilippovRow, Orientation, SensitivityReport,
    SensitivitySettings, SmoothGradient,
};
pub use system::{
    integration_grid, output_j, simulate_costate, simulate_state, spot_check_hypotheses, ControlSystem,
    HypothesisReport, SimSettings, SystemBounds,
};
