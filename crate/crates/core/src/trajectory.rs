//! Screw trajectories, pose samples and local windows.
//!
//! Twists extracted from poses are *spatial* twists: both the angular
//! velocity and the velocity of the world origin (as carried by the moving
//! body) are expressed in the world frame. Changing the world frame by a fixed
//! transform `G` therefore maps every extracted twist by the screw transform
//! of `G`.

use std::f64::consts::PI;

use nalgebra::{Matrix6x3, Quaternion, UnitQuaternion};
use thiserror::Error;

use crate::screw::{skew, Mat3, Screw, ScrewError, ScrewKind, ScrewTransform, Vec3};
use crate::tolerance::{LOG_NEAR_PI, LOG_SMALL_ANGLE};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("progress is not strictly increasing at sample {index} ({previous} then {current})")]
    NonMonotoneProgress {
        index: usize,
        previous: f64,
        current: f64,
    },
    #[error("trajectory has {len} screw samples; at least 3 are required")]
    TooShort { len: usize },
    #[error("progress step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("{progress} progress values for {samples} samples")]
    LengthMismatch { progress: usize, samples: usize },
    #[error("sample {index} is a {found}, trajectory holds {expected}s")]
    KindMismatch {
        index: usize,
        expected: ScrewKind,
        found: ScrewKind,
    },
    #[error("quaternion has zero or non-finite norm")]
    InvalidQuaternion,
    #[error("invalid synthetic trajectory spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Screw(#[from] ScrewError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Position and orientation of a body frame in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl PoseSample {
    /// Builds a pose from a `(w, x, y, z)` quaternion, renormalizing it.
    pub fn new(position: Vec3, w: f64, x: f64, y: f64, z: f64) -> Result<Self, TrajectoryError> {
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || norm == 0.0 || !position.iter().all(|v| v.is_finite()) {
            return Err(TrajectoryError::InvalidQuaternion);
        }
        Ok(PoseSample {
            position,
            orientation: UnitQuaternion::new_normalize(q),
        })
    }

    pub fn from_rotation(position: Vec3, rotation: &Mat3) -> Self {
        PoseSample {
            position,
            orientation: UnitQuaternion::from_matrix(rotation),
        }
    }

    pub fn rotation(&self) -> Mat3 {
        self.orientation.to_rotation_matrix().into_inner()
    }

    /// Expresses this pose in another world frame: `G ∘ T`.
    pub fn in_frame(&self, frame: &ScrewTransform) -> PoseSample {
        let rotation = frame.rotation() * self.rotation();
        PoseSample::from_rotation(
            frame.position() + frame.rotation() * self.position,
            &rotation,
        )
    }
}

/// Logarithm of a rotation matrix as a rotation vector (axis × angle).
pub fn rotation_log(r: &Mat3) -> Vec3 {
    // 2 sin(theta) * axis
    let vee = Vec3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let sin_theta = 0.5 * vee.norm();
    let cos_theta = 0.5 * (r.trace() - 1.0);
    let theta = sin_theta.atan2(cos_theta);

    if theta < LOG_SMALL_ANGLE {
        // theta / sin(theta) ≈ 1 + theta²/6
        return 0.5 * (1.0 + theta * theta / 6.0) * vee;
    }
    if theta > PI - LOG_NEAR_PI {
        // R + Rᵀ = 2 cos(theta) I + 2 (1 - cos(theta)) a aᵀ
        let one_minus_cos = 1.0 - cos_theta;
        let k = (0..3)
            .max_by(|&i, &j| r[(i, i)].total_cmp(&r[(j, j)]))
            .unwrap_or(0);
        let mut axis = Vec3::zeros();
        axis[k] = ((r[(k, k)] - cos_theta) / one_minus_cos).max(0.0).sqrt();
        for j in (0..3).filter(|&j| j != k) {
            axis[j] = (r[(j, k)] + r[(k, j)]) / (2.0 * one_minus_cos * axis[k]);
        }
        axis.normalize_mut();
        if axis.dot(&vee) < 0.0 {
            axis = -axis;
        }
        return theta * axis;
    }
    theta / (2.0 * sin_theta) * vee
}

/// Six-dimensional logarithm of the rigid displacement `(rotation, translation)`,
/// returned as the spatial screw `(omega, v)` whose exponential is the displacement.
pub fn displacement_log(rotation: &Mat3, translation: &Vec3) -> (Vec3, Vec3) {
    let omega = rotation_log(rotation);
    let theta = omega.norm();
    let w = skew(&omega).into_matrix();
    let coeff = if theta < LOG_SMALL_ANGLE {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        (1.0 - theta * theta.sin() / (2.0 * (1.0 - theta.cos()))) / (theta * theta)
    };
    let v_inv = Mat3::identity() - 0.5 * w + coeff * w * w;
    (omega, v_inv * translation)
}

/// Spatial twist that carries `from` to `to` over a progress step `delta_x`.
///
/// The displacement `to ∘ from⁻¹` is taken in the world frame, its logarithm
/// is divided by `delta_x`, and the result is expressed in world coordinates
/// with `beta` the velocity of the world origin.
pub fn pose_log_twist(
    from: &PoseSample,
    to: &PoseSample,
    delta_x: f64,
) -> Result<Screw, TrajectoryError> {
    if !(delta_x > 0.0) {
        return Err(TrajectoryError::NonPositiveStep(delta_x));
    }
    let r_from = from.rotation();
    let r_disp = to.rotation() * r_from.transpose();
    let t_disp = to.position - r_disp * from.position;
    let (omega, v) = displacement_log(&r_disp, &t_disp);
    Ok(Screw::twist(omega / delta_x, v / delta_x))
}

/// A discrete screw trajectory indexed by a strictly increasing progress variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    kind: ScrewKind,
    progress: Vec<f64>,
    samples: Vec<Screw>,
}

impl Trajectory {
    pub fn new(
        kind: ScrewKind,
        progress: Vec<f64>,
        samples: Vec<Screw>,
    ) -> Result<Self, TrajectoryError> {
        if progress.len() != samples.len() {
            return Err(TrajectoryError::LengthMismatch {
                progress: progress.len(),
                samples: samples.len(),
            });
        }
        for (index, pair) in progress.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(TrajectoryError::NonMonotoneProgress {
                    index: index + 1,
                    previous: pair[0],
                    current: pair[1],
                });
            }
        }
        if let Some(x) = progress.iter().find(|x| !x.is_finite()) {
            return Err(TrajectoryError::Parse {
                line: 0,
                message: format!("non-finite progress value {x}"),
            });
        }
        for (index, s) in samples.iter().enumerate() {
            if s.kind() != kind {
                return Err(TrajectoryError::KindMismatch {
                    index,
                    expected: kind,
                    found: s.kind(),
                });
            }
            if !s.to_vector().iter().all(|v| v.is_finite()) {
                return Err(ScrewError::NonFinite.into());
            }
        }
        Ok(Trajectory {
            kind,
            progress,
            samples,
        })
    }

    /// Twists between successive poses, anchored at the midpoints of the
    /// progress intervals. Yields one sample fewer than there are poses.
    pub fn from_poses(progress: &[f64], poses: &[PoseSample]) -> Result<Self, TrajectoryError> {
        if progress.len() != poses.len() {
            return Err(TrajectoryError::LengthMismatch {
                progress: progress.len(),
                samples: poses.len(),
            });
        }
        let mut mid = Vec::with_capacity(poses.len().saturating_sub(1));
        let mut twists = Vec::with_capacity(poses.len().saturating_sub(1));
        for (i, (x, p)) in progress.windows(2).zip(poses.windows(2)).enumerate() {
            let dx = x[1] - x[0];
            if !(dx > 0.0) {
                return Err(TrajectoryError::NonMonotoneProgress {
                    index: i + 1,
                    previous: x[0],
                    current: x[1],
                });
            }
            mid.push(0.5 * (x[0] + x[1]));
            twists.push(pose_log_twist(&p[0], &p[1], dx)?);
        }
        Trajectory::new(ScrewKind::Twist, mid, twists)
    }

    #[inline]
    pub fn kind(&self) -> ScrewKind {
        self.kind
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn progress(&self) -> &[f64] {
        &self.progress
    }

    pub fn samples(&self) -> &[Screw] {
        &self.samples
    }

    /// Largest `‖alpha‖` over the trajectory.
    pub fn alpha_scale(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.alpha().norm())
            .fold(0.0, f64::max)
    }

    /// Largest `‖beta‖` over the trajectory.
    pub fn beta_scale(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.beta().norm())
            .fold(0.0, f64::max)
    }

    /// The same trajectory expressed in another coordinate system.
    pub fn transformed(&self, frame: &ScrewTransform) -> Trajectory {
        Trajectory {
            kind: self.kind,
            progress: self.progress.clone(),
            samples: self.samples.iter().map(|s| frame.transform(s)).collect(),
        }
    }

    pub fn windows(&self) -> Result<Vec<LocalWindow>, TrajectoryError> {
        build_windows(self)
    }
}

/// Three consecutive screws `[xi(i-1) xi(i) xi(i+1)]` centred on sample `index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalWindow {
    pub xi_prev: Screw,
    pub xi_curr: Screw,
    pub xi_next: Screw,
    /// Zero-based index of the centre sample in the trajectory.
    pub index: usize,
    /// Progress value of the centre sample.
    pub progress: f64,
    /// Half the progress span covered by the window.
    pub delta_x: f64,
}

impl LocalWindow {
    pub fn new(xi_prev: Screw, xi_curr: Screw, xi_next: Screw) -> Result<Self, TrajectoryError> {
        let kind = xi_prev.kind();
        for (index, s) in [xi_curr, xi_next].iter().enumerate() {
            if s.kind() != kind {
                return Err(TrajectoryError::KindMismatch {
                    index: index + 1,
                    expected: kind,
                    found: s.kind(),
                });
            }
        }
        Ok(LocalWindow {
            xi_prev,
            xi_curr,
            xi_next,
            index: 1,
            progress: 0.0,
            delta_x: 1.0,
        })
    }

    /// Window whose columns are the columns of `m`.
    pub fn from_matrix(kind: ScrewKind, m: &Matrix6x3<f64>) -> Self {
        let col = |j: usize| {
            Screw::new(
                kind,
                m.fixed_view::<3, 1>(0, j).into_owned(),
                m.fixed_view::<3, 1>(3, j).into_owned(),
            )
        };
        LocalWindow {
            xi_prev: col(0),
            xi_curr: col(1),
            xi_next: col(2),
            index: 1,
            progress: 0.0,
            delta_x: 1.0,
        }
    }

    pub fn kind(&self) -> ScrewKind {
        self.xi_prev.kind()
    }

    pub fn screws(&self) -> [&Screw; 3] {
        [&self.xi_prev, &self.xi_curr, &self.xi_next]
    }

    /// The 6×3 matrix of stacked screws.
    pub fn matrix(&self) -> Matrix6x3<f64> {
        let mut m = Matrix6x3::zeros();
        for (j, s) in self.screws().into_iter().enumerate() {
            m.set_column(j, &s.to_vector());
        }
        m
    }

    /// Upper 3×3 block: the alpha vectors as columns.
    pub fn alpha_block(&self) -> Mat3 {
        Mat3::from_columns(&[
            *self.xi_prev.alpha(),
            *self.xi_curr.alpha(),
            *self.xi_next.alpha(),
        ])
    }

    /// Lower 3×3 block: the beta vectors as columns.
    pub fn beta_block(&self) -> Mat3 {
        Mat3::from_columns(&[
            *self.xi_prev.beta(),
            *self.xi_curr.beta(),
            *self.xi_next.beta(),
        ])
    }

    /// This window expressed in another coordinate system.
    pub fn transformed(&self, frame: &ScrewTransform) -> LocalWindow {
        LocalWindow {
            xi_prev: frame.transform(&self.xi_prev),
            xi_curr: frame.transform(&self.xi_curr),
            xi_next: frame.transform(&self.xi_next),
            ..*self
        }
    }
}

/// All `N - 2` windows of a trajectory, in progress order.
pub fn build_windows(traj: &Trajectory) -> Result<Vec<LocalWindow>, TrajectoryError> {
    let n = traj.len();
    if n < 3 {
        return Err(TrajectoryError::TooShort { len: n });
    }
    let x = traj.progress();
    let s = traj.samples();
    Ok((1..n - 1)
        .map(|i| LocalWindow {
            xi_prev: s[i - 1],
            xi_curr: s[i],
            xi_next: s[i + 1],
            index: i,
            progress: x[i],
            delta_x: 0.5 * (x[i + 1] - x[i - 1]),
        })
        .collect())
}
