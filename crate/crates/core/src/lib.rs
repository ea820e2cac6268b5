//! Coordinate-invariant representation of rigid-body screw trajectories.
//!
//! A trajectory of twists or wrenches is cut into windows of three
//! consecutive screws, and each window `Xi` (6×3) is factored as `Xi = S U`:
//! `S` is a screw transform (rotation `R`, position `p`) that moves with the
//! coordinate frame, and `U` is a dual upper-triangular 6×3 matrix that does
//! not. The entries of `U` along the trajectory form a signal that is the same
//! in every world frame.
//!
//! ```
//! use dutir::{su_decompose, LocalWindow, Screw, Vec3};
//!
//! let w = LocalWindow::new(
//!     Screw::twist(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.1, 0.0, 0.0)),
//!     Screw::twist(Vec3::new(0.0, 0.5, 1.0), Vec3::new(0.1, 0.2, 0.0)),
//!     Screw::twist(Vec3::new(0.3, 0.5, 1.0), Vec3::new(0.0, 0.2, 0.1)),
//! )
//! .unwrap();
//! let res = su_decompose(&w).unwrap();
//! assert!((res.reconstruct() - w.matrix()).amax() < 1e-12);
//! ```

pub mod decomposition;
pub mod geometry;
pub mod io;
pub mod regularization;
pub mod screw;
pub mod synth;
pub mod tolerance;
pub mod trajectory;

pub use decomposition::{
    check_regularity, check_regularity_with, orient_from_alpha, reconstruct, su_decompose,
    su_decompose_with, DecompositionError, DutirU, Regularity, RegularityTolerance, SuResult,
};
pub use geometry::{
    alpha_relations, common_normal_points, verify_su_geometry, AxisPair, GeometryError,
    GeometryReport,
};
pub use io::{load_trajectory, read_trajectory, write_pose_csv, write_screw_csv, TrajectoryFormat};
pub use regularization::{
    decompose, procrustes_rc, regularize_p, su_decompose_regularized,
    su_decompose_regularized_with, RegularizationConfig, RegularizationError,
};
pub use screw::{
    axis_direction, closest_point, compose, inverse, skew, transform_screw, Mat3, Screw,
    ScrewError, ScrewKind, ScrewTransform, SkewMatrix, Vec3,
};
pub use synth::{synth_poses, synth_trajectory, Archetype, Noise, SynthSpec};
pub use trajectory::{
    build_windows, pose_log_twist, LocalWindow, PoseSample, Trajectory, TrajectoryError,
};
