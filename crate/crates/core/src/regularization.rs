//! Singularity-robust SU-decomposition.
//!
//! Two corrections keep the decomposition defined and well behaved near
//! representation singularities (pure translation, parallel rotation axes):
//!
//! 1. The position `p*` is confined to a sphere of radius `L` (the geometric
//!    scale). When `‖p*‖ > L`, the point on the sphere minimizing the squared
//!    lower-diagonal residuals `e51² + e61²` of `Û2` is selected in closed form.
//! 2. The orientation is corrected by a rotation `Rc` that brings both `U1`
//!    and `Û2` as close as possible to upper-triangular form (a weighted
//!    orthogonal Procrustes problem), giving `R̂ = R Rcᵀ`, `Û1 = Rc U1`,
//!    `Û2 ← Rc Û2`.
//!
//! The corrected factors still reproduce the window exactly; only the split
//! between `S` and `U` moves.

use thiserror::Error;

use crate::decomposition::{
    check_regularity_with, orient_with_tolerance, su_decompose_with, DecompositionError,
    DutirU, Regularity, RegularityTolerance, SuResult,
};
use crate::screw::{skew, Mat3, ScrewTransform, Vec3};
use crate::tolerance::{REGULARITY_RELATIVE, REGULARIZATION_CHANGE};
use crate::trajectory::LocalWindow;

/// Candidate vectors shorter than this fraction of their family's largest
/// norm, or closer than this (relative) to the first axis, are skipped when
/// seeding the orientation of an irregular window.
const SEED_RELATIVE: f64 = 1e-6;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RegularizationError {
    #[error("geometric scale L must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("weight w must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("first two columns of the lower block are degenerate")]
    DegenerateU2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationConfig {
    /// Geometric scale `L` in metres: largest admitted `‖p*‖`.
    pub scale: f64,
    /// Procrustes weight `w` in metres on the `U1` term.
    pub weight: f64,
    pub enabled: bool,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        RegularizationConfig {
            scale: 1.0,
            weight: 1.0,
            enabled: true,
        }
    }
}

impl RegularizationConfig {
    /// Enabled, with `w = L`.
    pub fn new(scale: f64) -> Result<Self, RegularizationError> {
        let cfg = RegularizationConfig {
            scale,
            weight: scale,
            enabled: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_weight(self, weight: f64) -> Result<Self, RegularizationError> {
        let cfg = RegularizationConfig { weight, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn disabled() -> Self {
        RegularizationConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), RegularizationError> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(RegularizationError::InvalidScale(self.scale));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(RegularizationError::InvalidWeight(self.weight));
        }
        Ok(())
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Projects `p*` onto the sphere of radius `scale` when it lies outside.
///
/// If the line `{(t, p*y, p*z)}` meets the sphere, `p*y` and `p*z` are kept and
/// `p*x` is moved along the line to the sphere (keeping its sign). Otherwise
/// `p*x` is zeroed and `(p*y, p*z)` scaled radially onto the sphere. Both choices
/// minimize `e51² + e61²` on the sphere. Returns whether the projection was
/// applied.
pub fn regularize_p(p_star: &Vec3, scale: f64) -> (Vec3, bool) {
    if p_star.norm() <= scale {
        return (*p_star, false);
    }
    let transverse_sq = p_star.y * p_star.y + p_star.z * p_star.z;
    let scale_sq = scale * scale;
    if transverse_sq <= scale_sq {
        let x = sign(p_star.x) * (scale_sq - transverse_sq).max(0.0).sqrt();
        (Vec3::new(x, p_star.y, p_star.z), true)
    } else {
        let k = scale / transverse_sq.sqrt();
        (Vec3::new(0.0, k * p_star.y, k * p_star.z), true)
    }
}

/// `e51² + e61²` for a candidate `p̂*`, with `e51 = (RᵀB)21 - u11 p̂*z` and
/// `e61 = (RᵀB)31 + u11 p̂*y`.
pub fn epsilon_objective(p_hat_star: &Vec3, u11: f64, rtb: &Mat3) -> f64 {
    let e51 = rtb[(1, 0)] - u11 * p_hat_star.z;
    let e61 = rtb[(2, 0)] + u11 * p_hat_star.y;
    e51 * e51 + e61 * e61
}

/// Upper-triangular factor of `u2_hat` under the same orientation procedure
/// used for the alpha block (`u11 > 0`, `u22 > 0`).
pub fn triangularize_u2(u2_hat: &Mat3) -> Result<Mat3, RegularizationError> {
    orient_with_tolerance(u2_hat, REGULARITY_RELATIVE)
        .map(|(_, t)| t)
        .map_err(|_| RegularizationError::DegenerateU2)
}

/// Value of `w² ‖U1 - Rc U1‖² + ‖T - Rc Û2‖²` (Frobenius).
pub fn procrustes_objective(rc: &Mat3, u1: &Mat3, u2_hat: &Mat3, u2_tri: &Mat3, w: f64) -> f64 {
    w * w * (u1 - rc * u1).norm_squared() + (u2_tri - rc * u2_hat).norm_squared()
}

/// Rotation minimizing [`procrustes_objective`].
///
/// Expanding the objective leaves `max tr(Rcᵀ M)` with
/// `M = w² U1 U1ᵀ + T Û2ᵀ`. With `M = U Σ Vᵀ` the optimum over SO(3) is
/// `U diag(1, 1, d) Vᵀ`, where `d = det(U Vᵀ)` is applied to the direction of
/// the smallest singular value.
pub fn procrustes_rc(u1: &Mat3, u2_hat: &Mat3, u2_tri: &Mat3, w: f64) -> Mat3 {
    let m = w * w * u1 * u1.transpose() + u2_tri * u2_hat.transpose();
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Mat3::identity(),
    };
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(2);
    let mut d = Mat3::identity();
    d[(smallest, smallest)] = sign((u * v_t).determinant());
    u * d * v_t
}

/// Deterministic orientation for a window whose first two alpha vectors do
/// not define one. Axes are taken, in order of preference, from the alpha
/// vectors, then the beta vectors, then the world axes, so the seed rotates
/// with the window under pure rotations whenever the data determine it.
fn seed_orientation(w: &LocalWindow) -> Mat3 {
    let screws = w.screws();
    let alphas: Vec<Vec3> = screws.iter().map(|s| *s.alpha()).collect();
    let betas: Vec<Vec3> = screws.iter().map(|s| *s.beta()).collect();
    let significant = |family: &[Vec3]| -> Vec<Vec3> {
        let top = family.iter().map(|v| v.norm()).fold(0.0, f64::max);
        family
            .iter()
            .filter(|v| top > 0.0 && v.norm() > SEED_RELATIVE * top)
            .copied()
            .collect()
    };
    let candidates: Vec<Vec3> = significant(&alphas)
        .into_iter()
        .chain(significant(&betas))
        .collect();

    let r1 = candidates
        .first()
        .map(|c| c.normalize())
        .unwrap_or_else(Vec3::x);
    let rejection = |c: &Vec3| c - r1 * r1.dot(c);
    let r2 = candidates
        .iter()
        .map(|c| (rejection(c), c.norm()))
        .find(|(rej, n)| rej.norm() > SEED_RELATIVE * n)
        .map(|(rej, _)| rej.normalize())
        .unwrap_or_else(|| {
            let axis = [Vec3::x(), Vec3::y(), Vec3::z()]
                .into_iter()
                .min_by(|a, b| r1.dot(a).abs().total_cmp(&r1.dot(b).abs()))
                .unwrap_or_else(Vec3::y);
            rejection(&axis).normalize()
        });
    Mat3::from_columns(&[r1, r2, r1.cross(&r2)])
}

pub fn su_decompose_regularized(w: &LocalWindow, cfg: &RegularizationConfig) -> SuResult {
    su_decompose_regularized_with(w, cfg, &RegularityTolerance::default())
}

/// Total decomposition: exact where the window is regular and `‖p*‖ ≤ L`,
/// regularized elsewhere. Always satisfies `reconstruct(S, U) = Xi`.
pub fn su_decompose_regularized_with(
    w: &LocalWindow,
    cfg: &RegularizationConfig,
    tol: &RegularityTolerance,
) -> SuResult {
    let regularity = check_regularity_with(w, tol);
    let a = w.alpha_block();
    let b = w.beta_block();

    let (r0, u1) = match regularity {
        Regularity::Regular => match orient_with_tolerance(&a, tol.relative) {
            Ok(pair) => pair,
            Err(_) => {
                let r = seed_orientation(w);
                (r, r.transpose() * a)
            }
        },
        _ => {
            let r = seed_orientation(w);
            (r, r.transpose() * a)
        }
    };
    let rtb = r0.transpose() * b;

    let (u11, u12, u22) = (u1[(0, 0)], u1[(0, 1)], u1[(1, 1)]);
    let p_star = match regularity {
        Regularity::Regular => {
            let z = rtb[(1, 0)] / u11;
            let y = -rtb[(2, 0)] / u11;
            Vec3::new((rtb[(2, 1)] + u12 * y) / u22, y, z)
        }
        Regularity::AlphaParallel => Vec3::new(0.0, -rtb[(2, 0)] / u11, rtb[(1, 0)] / u11),
        Regularity::AlphaZero => Vec3::zeros(),
    };

    let (p_hat_star, active) = regularize_p(&p_star, cfg.scale);
    if regularity.is_regular() && !active {
        if let Ok(exact) = su_decompose_with(w, tol) {
            return exact;
        }
    }

    let u2_hat = rtb - skew(&p_hat_star).into_matrix() * u1;
    let rc = match triangularize_u2(&u2_hat) {
        Ok(target) => procrustes_rc(&u1, &u2_hat, &target, cfg.weight),
        Err(_) => Mat3::identity(),
    };

    let rotation = r0 * rc.transpose();
    let position = r0 * p_hat_star;
    let mut u = DutirU::from_blocks(&(rc * u1), &(rc * u2_hat));
    u.regularized_p =
        active && (p_hat_star - p_star).amax() > REGULARIZATION_CHANGE * cfg.scale.max(1.0);
    u.regularized_r = (rc - Mat3::identity()).amax() > REGULARIZATION_CHANGE;

    SuResult {
        transform: ScrewTransform::from_parts(rotation, position),
        u,
        p_star: rc * p_hat_star,
        regularity,
    }
}

/// Exact or regularized decomposition according to `cfg.enabled`.
pub fn decompose(
    w: &LocalWindow,
    cfg: &RegularizationConfig,
    tol: &RegularityTolerance,
) -> Result<SuResult, DecompositionError> {
    if cfg.enabled {
        Ok(su_decompose_regularized_with(w, cfg, tol))
    } else {
        su_decompose_with(w, tol)
    }
}
