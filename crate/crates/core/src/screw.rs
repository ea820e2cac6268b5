//! Screws, skew matrices and screw-transformation algebra.
//!
//! A screw is the pair `(alpha, beta)` of 3-vectors. For a twist, `alpha` is
//! the angular velocity and `beta` the velocity of the expression-frame
//! origin; for a wrench, `alpha` is the resultant force and `beta` the torque
//! about that origin. Both transform between coordinate systems with the same
//! 6×6 block matrix
//!
//! ```text
//! S = | R        0 |
//!     | [p]x R   R |
//! ```
//!
//! which is stored here as the pair `(R, p)` and never materialized.

use std::fmt;

use nalgebra::{Matrix3, Vector3, Vector6};
use thiserror::Error;

use crate::tolerance::{DIRECTION_RELATIVE, ROTATION_ORTHONORMALITY};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScrewError {
    #[error("screw component is not finite")]
    NonFinite,
    #[error("cannot combine a {0} with a {1}")]
    KindMismatch(ScrewKind, ScrewKind),
    #[error("alpha vector has zero magnitude; screw axis direction is undefined")]
    ZeroAlpha,
    #[error("matrix is not a proper rotation (max orthonormality deviation {deviation:e}, det {det})")]
    InvalidRotation { deviation: f64, det: f64 },
    #[error("position is not finite")]
    NonFinitePosition,
}

/// Physical interpretation of a screw. Algebra is kind-agnostic; the tag only
/// prevents accidental mixing of twists and wrenches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScrewKind {
    Twist,
    Wrench,
}

impl fmt::Display for ScrewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScrewKind::Twist => f.write_str("twist"),
            ScrewKind::Wrench => f.write_str("wrench"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Screw {
    alpha: Vec3,
    beta: Vec3,
    kind: ScrewKind,
}

impl Screw {
    /// Builds a screw without validation. Components are expected to be
    /// finite; use [`Screw::try_new`] for untrusted input.
    pub fn new(kind: ScrewKind, alpha: Vec3, beta: Vec3) -> Self {
        debug_assert!(alpha.iter().chain(beta.iter()).all(|v| v.is_finite()));
        Screw { alpha, beta, kind }
    }

    pub fn try_new(kind: ScrewKind, alpha: Vec3, beta: Vec3) -> Result<Self, ScrewError> {
        if alpha.iter().chain(beta.iter()).all(|v| v.is_finite()) {
            Ok(Screw { alpha, beta, kind })
        } else {
            Err(ScrewError::NonFinite)
        }
    }

    /// Twist from angular velocity `omega` and origin velocity `v`.
    pub fn twist(omega: Vec3, v: Vec3) -> Self {
        Screw::new(ScrewKind::Twist, omega, v)
    }

    /// Wrench from resultant force and torque about the origin.
    pub fn wrench(force: Vec3, torque: Vec3) -> Self {
        Screw::new(ScrewKind::Wrench, force, torque)
    }

    pub fn zero(kind: ScrewKind) -> Self {
        Screw::new(kind, Vec3::zeros(), Vec3::zeros())
    }

    pub fn from_vector(kind: ScrewKind, v: &Vector6<f64>) -> Self {
        Screw::new(
            kind,
            v.fixed_rows::<3>(0).into_owned(),
            v.fixed_rows::<3>(3).into_owned(),
        )
    }

    #[inline]
    pub fn alpha(&self) -> &Vec3 {
        &self.alpha
    }

    #[inline]
    pub fn beta(&self) -> &Vec3 {
        &self.beta
    }

    #[inline]
    pub fn kind(&self) -> ScrewKind {
        self.kind
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.alpha.x,
            self.alpha.y,
            self.alpha.z,
            self.beta.x,
            self.beta.y,
            self.beta.z,
        )
    }

    pub fn scaled(&self, factor: f64) -> Screw {
        Screw::new(self.kind, self.alpha * factor, self.beta * factor)
    }

    pub fn checked_add(&self, other: &Screw) -> Result<Screw, ScrewError> {
        self.same_kind(other)?;
        Ok(Screw::new(
            self.kind,
            self.alpha + other.alpha,
            self.beta + other.beta,
        ))
    }

    pub fn checked_sub(&self, other: &Screw) -> Result<Screw, ScrewError> {
        self.same_kind(other)?;
        Ok(Screw::new(
            self.kind,
            self.alpha - other.alpha,
            self.beta - other.beta,
        ))
    }

    fn same_kind(&self, other: &Screw) -> Result<(), ScrewError> {
        if self.kind == other.kind {
            Ok(())
        } else {
            Err(ScrewError::KindMismatch(self.kind, other.kind))
        }
    }
}

/// The cross-product matrix `[p]x`, satisfying `[p]x v = p × v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMatrix(Mat3);

impl SkewMatrix {
    pub fn new(p: &Vec3) -> Self {
        SkewMatrix(Mat3::new(
            0.0, -p.z, p.y, //
            p.z, 0.0, -p.x, //
            -p.y, p.x, 0.0,
        ))
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat3 {
        self.0
    }

    /// The vector this matrix was built from.
    pub fn vector(&self) -> Vec3 {
        Vec3::new(self.0[(2, 1)], self.0[(0, 2)], self.0[(1, 0)])
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

pub fn skew(p: &Vec3) -> SkewMatrix {
    SkewMatrix::new(p)
}

/// A change of coordinates for screws: orientation `R` of the source frame in
/// the target frame, and position `p` of the source origin in the target frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewTransform {
    rotation: Mat3,
    position: Vec3,
}

impl ScrewTransform {
    /// Validates that `rotation` is a proper rotation within `1e-12` per entry.
    pub fn new(rotation: Mat3, position: Vec3) -> Result<Self, ScrewError> {
        let deviation = (rotation.transpose() * rotation - Mat3::identity()).amax();
        let det = rotation.determinant();
        if !(deviation <= ROTATION_ORTHONORMALITY && (det - 1.0).abs() <= ROTATION_ORTHONORMALITY)
        {
            return Err(ScrewError::InvalidRotation { deviation, det });
        }
        if !position.iter().all(|v| v.is_finite()) {
            return Err(ScrewError::NonFinitePosition);
        }
        Ok(ScrewTransform { rotation, position })
    }

    /// Skips validation. For values produced by this crate's own constructions
    /// (products of rotations, orthonormalized frames).
    pub(crate) fn from_parts(rotation: Mat3, position: Vec3) -> Self {
        ScrewTransform { rotation, position }
    }

    pub fn identity() -> Self {
        ScrewTransform {
            rotation: Mat3::identity(),
            position: Vec3::zeros(),
        }
    }

    pub fn from_rotation(rotation: Mat3) -> Result<Self, ScrewError> {
        ScrewTransform::new(rotation, Vec3::zeros())
    }

    #[inline]
    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    #[inline]
    pub fn position(&self) -> &Vec3 {
        &self.position
    }

    /// `alpha' = R alpha`, `beta' = p × (R alpha) + R beta`.
    pub fn transform(&self, xi: &Screw) -> Screw {
        let r_alpha = self.rotation * xi.alpha;
        Screw::new(
            xi.kind,
            r_alpha,
            self.position.cross(&r_alpha) + self.rotation * xi.beta,
        )
    }

    /// `self ∘ inner`: applies `inner` first, then `self`.
    pub fn compose(&self, inner: &ScrewTransform) -> ScrewTransform {
        ScrewTransform {
            rotation: self.rotation * inner.rotation,
            position: self.position + self.rotation * inner.position,
        }
    }

    pub fn inverse(&self) -> ScrewTransform {
        let rt = self.rotation.transpose();
        ScrewTransform {
            rotation: rt,
            position: -(rt * self.position),
        }
    }
}

pub fn transform_screw(s: &ScrewTransform, xi: &Screw) -> Screw {
    s.transform(xi)
}

pub fn compose(outer: &ScrewTransform, inner: &ScrewTransform) -> ScrewTransform {
    outer.compose(inner)
}

pub fn inverse(s: &ScrewTransform) -> ScrewTransform {
    s.inverse()
}

/// Absolute threshold on `‖alpha‖` below which a screw axis is undefined:
/// `1e-9` times the characteristic alpha scale (1 when that scale is zero).
pub fn direction_tolerance(alpha_scale: f64) -> f64 {
    let scale = if alpha_scale > 0.0 { alpha_scale } else { 1.0 };
    DIRECTION_RELATIVE * scale
}

/// Unit direction `alpha / ‖alpha‖` of the screw axis.
pub fn axis_direction(xi: &Screw, tolerance: f64) -> Result<Vec3, ScrewError> {
    let norm = xi.alpha.norm();
    if norm <= tolerance || norm == 0.0 {
        return Err(ScrewError::ZeroAlpha);
    }
    Ok(xi.alpha / norm)
}

/// Point of the screw axis closest to the origin, `(alpha × beta) / ‖alpha‖²`.
pub fn closest_point(xi: &Screw, tolerance: f64) -> Result<Vec3, ScrewError> {
    let norm = xi.alpha.norm();
    if norm <= tolerance || norm == 0.0 {
        return Err(ScrewError::ZeroAlpha);
    }
    Ok(xi.alpha.cross(&xi.beta) / (norm * norm))
}
