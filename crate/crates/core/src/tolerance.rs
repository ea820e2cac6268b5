//! Numerical thresholds shared across the crate.

/// Relative threshold for the regularity test on the first two alpha vectors
/// and for column degeneracy in the orientation step.
pub const REGULARITY_RELATIVE: f64 = 1e-9;

/// Relative threshold on `‖alpha‖` for the screw-axis direction.
pub const DIRECTION_RELATIVE: f64 = 1e-9;

/// Per-entry deviation allowed for `RᵀR = I` and `det R = 1`.
pub const ROTATION_ORTHONORMALITY: f64 = 1e-12;

/// Quaternion norm deviation accepted before renormalization on load.
pub const QUATERNION_NORM: f64 = 1e-9;

/// Change (max-abs) above which a regularization step counts as active.
pub const REGULARIZATION_CHANGE: f64 = 1e-12;

/// Floor used in place of a zero scale.
pub const TINY_SCALE: f64 = 1e-300;

/// Below this rotation angle (rad) the logarithm uses a Taylor expansion.
pub const LOG_SMALL_ANGLE: f64 = 1e-5;

/// Above `π − LOG_NEAR_PI` the rotation logarithm extracts the axis from the
/// symmetric part of the matrix instead of the antisymmetric part.
pub const LOG_NEAR_PI: f64 = 1e-3;

/// Default pass threshold for the geometric assertions of the oracle.
pub const GEOMETRY_CHECK: f64 = 1e-10;
