//! Exact SU-decomposition of a local window.
//!
//! A window `Xi = [A; B]` (alpha block over beta block) is factored as
//! `Xi = S U` where `S = (R, p)` is a screw transform and
//!
//! ```text
//!     | u11 u12 u13 |
//!     |  0  u22 u23 |
//! U = |  0   0  u33 |  = [U1; U2]
//!     | u41 u42 u43 |
//!     |  0  u52 u53 |
//!     |  0   0  u63 |
//! ```
//!
//! with `u11 > 0` and `u22 > 0`. `R` and `U1` come from orthonormalizing the
//! first two alpha vectors, `p* = Rᵀp` from the three lower-triangle entries of
//! `RᵀB = [p*]x U1 + U2`, and `U2` from the same relation. `U` is invariant
//! under coordinate changes, `(R, p)` is equivariant.

use nalgebra::Matrix6x3;
use thiserror::Error;

use crate::screw::{skew, Mat3, ScrewTransform, Vec3};
use crate::tolerance::{REGULARITY_RELATIVE, TINY_SCALE};
use crate::trajectory::{LocalWindow, Trajectory};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("first two columns are linearly dependent")]
    DegenerateColumns,
    #[error("diagonal entry u11 or u22 vanishes")]
    Singular,
    #[error("window is irregular ({0:?}); use the regularized decomposition")]
    IrregularWindow(Regularity),
}

/// Outcome of the regularity test on `alpha(i-1)` and `alpha(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularity {
    Regular,
    /// `alpha(i-1)` vanishes.
    AlphaZero,
    /// `alpha(i-1)` and `alpha(i)` are parallel.
    AlphaParallel,
}

impl Regularity {
    pub fn is_regular(self) -> bool {
        self == Regularity::Regular
    }

    pub fn label(self) -> &'static str {
        match self {
            Regularity::Regular => "regular",
            Regularity::AlphaZero => "alpha_zero",
            Regularity::AlphaParallel => "alpha_parallel",
        }
    }
}

/// Thresholds for the regularity test.
///
/// The scale against which `‖alpha(i-1)‖` and `‖alpha(i-1) × alpha(i)‖` are
/// compared is `max(‖alpha(i-1)‖, ‖alpha(i)‖, alpha_floor)`. A zero floor gives
/// a purely local test; trajectory pipelines pass the trajectory's largest
/// `‖alpha‖` so that round-off-level alphas count as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityTolerance {
    pub relative: f64,
    pub alpha_floor: f64,
}

impl Default for RegularityTolerance {
    fn default() -> Self {
        RegularityTolerance {
            relative: REGULARITY_RELATIVE,
            alpha_floor: 0.0,
        }
    }
}

impl RegularityTolerance {
    pub fn for_trajectory(traj: &Trajectory) -> Self {
        RegularityTolerance {
            relative: REGULARITY_RELATIVE,
            alpha_floor: traj.alpha_scale(),
        }
    }

    fn classify(&self, first: &Vec3, second: &Vec3) -> Regularity {
        let n1 = first.norm();
        let scale = n1.max(second.norm()).max(self.alpha_floor).max(TINY_SCALE);
        if n1 <= self.relative * scale {
            Regularity::AlphaZero
        } else if first.cross(second).norm() <= self.relative * scale * scale {
            Regularity::AlphaParallel
        } else {
            Regularity::Regular
        }
    }
}

pub fn check_regularity(w: &LocalWindow, tol: f64) -> Regularity {
    check_regularity_with(
        w,
        &RegularityTolerance {
            relative: tol,
            alpha_floor: 0.0,
        },
    )
}

pub fn check_regularity_with(w: &LocalWindow, tol: &RegularityTolerance) -> Regularity {
    tol.classify(w.xi_prev.alpha(), w.xi_curr.alpha())
}

/// Factors `a = R U1` with `R` a right-handed rotation and `U1` upper
/// triangular, `u11 > 0`, `u22 > 0`.
///
/// `r1` is the first column normalized, `r2` the normalized rejection of the
/// second column from the first, `r3 = r1 × r2`. The sign of `u33` follows.
pub fn orient_from_alpha(a: &Mat3) -> Result<(Mat3, Mat3), DecompositionError> {
    orient_with_tolerance(a, REGULARITY_RELATIVE)
}

pub(crate) fn orient_with_tolerance(
    a: &Mat3,
    relative: f64,
) -> Result<(Mat3, Mat3), DecompositionError> {
    let c1 = a.column(0).into_owned();
    let c2 = a.column(1).into_owned();
    let tol = RegularityTolerance {
        relative,
        alpha_floor: 0.0,
    };
    if !tol.classify(&c1, &c2).is_regular() {
        return Err(DecompositionError::DegenerateColumns);
    }
    let n1 = c1.norm();
    let r1 = c1 / n1;
    let normal = c1.cross(&c2);
    let rejection = normal.cross(&c1);
    let r2 = rejection / rejection.norm();
    let r3 = r1.cross(&r2);
    let r = Mat3::from_columns(&[r1, r2, r3]);

    let mut u1 = r.transpose() * a;
    u1[(0, 0)] = n1;
    u1[(1, 0)] = 0.0;
    u1[(2, 0)] = 0.0;
    u1[(2, 1)] = 0.0;
    Ok((r, u1))
}

/// Solves the lower-triangle equations of `RᵀB = [p*]x U1 + U2` for `p*`:
///
/// ```text
/// (RᵀB)21 =  u11 p*z
/// (RᵀB)31 = -u11 p*y
/// (RᵀB)32 =  u22 p*x - u12 p*y
/// ```
pub fn solve_p_star(r: &Mat3, b: &Mat3, u1: &Mat3) -> Result<Vec3, DecompositionError> {
    let (u11, u12, u22) = (u1[(0, 0)], u1[(0, 1)], u1[(1, 1)]);
    let scale = u11.abs().max(u12.hypot(u22)).max(TINY_SCALE);
    if u11.abs() <= REGULARITY_RELATIVE * scale
        || (u11 * u22).abs() <= REGULARITY_RELATIVE * scale * scale
    {
        return Err(DecompositionError::Singular);
    }
    let rtb = r.transpose() * b;
    Ok(p_star_from_rtb(&rtb, u1))
}

fn p_star_from_rtb(rtb: &Mat3, u1: &Mat3) -> Vec3 {
    let (u11, u12, u22) = (u1[(0, 0)], u1[(0, 1)], u1[(1, 1)]);
    let z = rtb[(1, 0)] / u11;
    let y = -rtb[(2, 0)] / u11;
    let x = (rtb[(2, 1)] + u12 * y) / u22;
    Vec3::new(x, y, z)
}

/// `U2 = RᵀB - [p*]x U1`.
pub fn compute_u2(r: &Mat3, b: &Mat3, u1: &Mat3, p_star: &Vec3) -> Mat3 {
    r.transpose() * b - skew(p_star).into_matrix() * u1
}

/// The invariant factor, stored as the full 6×3 matrix together with the
/// regularization diagnostics.
///
/// On the exact path the six below-diagonal entries of both blocks are exactly
/// zero. When the orientation has been corrected by regularization, `U1`
/// carries the corrected (approximately triangular) block and the lower
/// entries of both blocks may be non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DutirU {
    pub matrix: Matrix6x3<f64>,
    pub regularized_p: bool,
    pub regularized_r: bool,
}

impl DutirU {
    pub fn from_blocks(u1: &Mat3, u2: &Mat3) -> Self {
        let mut matrix = Matrix6x3::zeros();
        matrix.fixed_view_mut::<3, 3>(0, 0).copy_from(u1);
        matrix.fixed_view_mut::<3, 3>(3, 0).copy_from(u2);
        DutirU {
            matrix,
            regularized_p: false,
            regularized_r: false,
        }
    }

    pub fn u1(&self) -> Mat3 {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn u2(&self) -> Mat3 {
        self.matrix.fixed_view::<3, 3>(3, 0).into_owned()
    }

    /// Entry `u_jk` with one-based row `j` (1..=6) and column `k` (1..=3).
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.matrix[(j - 1, k - 1)]
    }

    /// Lower-diagonal residuals `(e51, e61, e62)` of the lower block.
    pub fn epsilon(&self) -> [f64; 3] {
        [self.entry(5, 1), self.entry(6, 1), self.entry(6, 2)]
    }

    pub fn is_regularized(&self) -> bool {
        self.regularized_p || self.regularized_r
    }
}

/// A decomposition `Xi = S U` with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuResult {
    pub transform: ScrewTransform,
    pub u: DutirU,
    /// `Rᵀp`: the position expressed along the functional axes.
    pub p_star: Vec3,
    pub regularity: Regularity,
}

impl SuResult {
    pub fn rotation(&self) -> &Mat3 {
        self.transform.rotation()
    }

    pub fn position(&self) -> &Vec3 {
        self.transform.position()
    }

    pub fn reconstruct(&self) -> Matrix6x3<f64> {
        reconstruct(&self.transform, &self.u)
    }
}

pub fn su_decompose(w: &LocalWindow) -> Result<SuResult, DecompositionError> {
    su_decompose_with(w, &RegularityTolerance::default())
}

pub fn su_decompose_with(
    w: &LocalWindow,
    tol: &RegularityTolerance,
) -> Result<SuResult, DecompositionError> {
    match check_regularity_with(w, tol) {
        Regularity::Regular => {}
        other => return Err(DecompositionError::IrregularWindow(other)),
    }
    let a = w.alpha_block();
    let b = w.beta_block();
    let (r, u1) = orient_with_tolerance(&a, tol.relative)?;
    let p_star = solve_p_star(&r, &b, &u1)?;
    let mut u2 = compute_u2(&r, &b, &u1, &p_star);
    u2[(1, 0)] = 0.0;
    u2[(2, 0)] = 0.0;
    u2[(2, 1)] = 0.0;
    Ok(SuResult {
        transform: ScrewTransform::from_parts(r, r * p_star),
        u: DutirU::from_blocks(&u1, &u2),
        p_star,
        regularity: Regularity::Regular,
    })
}

/// `S U` via the block form: top `R U1`, bottom `[p]x R U1 + R U2`.
pub fn reconstruct(s: &ScrewTransform, u: &DutirU) -> Matrix6x3<f64> {
    let r = s.rotation();
    let top = r * u.u1();
    let bottom = skew(s.position()).into_matrix() * top + r * u.u2();
    let mut m = Matrix6x3::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&top);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&bottom);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screw::{Screw, ScrewKind};
    use approx::assert_abs_diff_eq;
    use nalgebra::Rotation3;

    fn window(alphas: [Vec3; 3], betas: [Vec3; 3]) -> LocalWindow {
        LocalWindow::new(
            Screw::twist(alphas[0], betas[0]),
            Screw::twist(alphas[1], betas[1]),
            Screw::twist(alphas[2], betas[2]),
        )
        .unwrap()
    }

    fn upper(m: &Mat3) -> Mat3 {
        m.upper_triangle()
    }

    #[test]
    fn regularity_examples() {
        let z = Vec3::zeros();
        let w = window([Vec3::x(), Vec3::y(), Vec3::z()], [z; 3]);
        assert_eq!(check_regularity(&w, 1e-9), Regularity::Regular);
        let w = window([z, Vec3::y(), Vec3::z()], [z; 3]);
        assert_eq!(check_regularity(&w, 1e-9), Regularity::AlphaZero);
        let w = window([Vec3::x(), 2.0 * Vec3::x(), Vec3::z()], [z; 3]);
        assert_eq!(check_regularity(&w, 1e-9), Regularity::AlphaParallel);
        let w = window([z, z, z], [Vec3::x(); 3]);
        assert_eq!(check_regularity(&w, 1e-9), Regularity::AlphaZero);
    }

    #[test]
    fn regularity_floor_treats_roundoff_alpha_as_zero() {
        let tiny = Vec3::new(1e-16, -2e-16, 0.0);
        let w = window([tiny, Vec3::new(0.0, 3e-16, 1e-16), tiny], [Vec3::x(); 3]);
        assert_eq!(check_regularity(&w, 1e-9), Regularity::Regular);
        let tol = RegularityTolerance {
            relative: 1e-9,
            alpha_floor: 2.0,
        };
        assert_eq!(check_regularity_with(&w, &tol), Regularity::AlphaZero);
    }

    #[test]
    fn orient_identity() {
        let (r, u1) = orient_from_alpha(&Mat3::identity()).unwrap();
        assert_abs_diff_eq!(r, Mat3::identity(), epsilon = 1e-15);
        assert_abs_diff_eq!(u1, Mat3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn orient_already_triangular() {
        let a = Mat3::from_columns(&[
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(1.0, 3.0, 0.0),
            Vec3::new(0.0, 0.0, 4.0),
        ]);
        let (r, u1) = orient_from_alpha(&a).unwrap();
        assert_abs_diff_eq!(r, Mat3::identity(), epsilon = 1e-15);
        assert_abs_diff_eq!(u1, a, epsilon = 1e-15);
    }

    #[test]
    fn orient_flips_negative_first_column() {
        let a = Mat3::from_columns(&[
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.5, 1.0, 0.0),
            Vec3::new(0.0, 0.2, 1.0),
        ]);
        let (r, u1) = orient_from_alpha(&a).unwrap();
        assert_abs_diff_eq!(r.column(0).into_owned(), Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
        assert_eq!(u1[(0, 0)], 1.0);
        assert!(u1[(1, 1)] > 0.0);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
        assert!((r * u1 - a).amax() < 1e-14);
    }

    #[test]
    fn orient_u33_may_be_negative() {
        let a = Mat3::from_columns(&[Vec3::x(), Vec3::y(), Vec3::new(0.3, 0.1, -2.0)]);
        let (r, u1) = orient_from_alpha(&a).unwrap();
        assert_abs_diff_eq!(r, Mat3::identity(), epsilon = 1e-15);
        assert_eq!(u1[(2, 2)], -2.0);
    }

    #[test]
    fn orient_matches_gram_schmidt_columns() {
        let a1 = Vec3::new(0.3, -1.2, 0.8);
        let a2 = Vec3::new(1.1, 0.4, -0.7);
        let a = Mat3::from_columns(&[a1, a2, Vec3::new(0.2, 0.9, 0.5)]);
        let (r, u1) = orient_from_alpha(&a).unwrap();
        let r1 = a1.normalize();
        let r2 = (a2 - r1 * r1.dot(&a2)).normalize();
        assert!((r.column(0) - r1).amax() < 1e-15);
        assert!((r.column(1) - r2).amax() < 1e-15);
        assert!((r.transpose() * r - Mat3::identity()).amax() < 1e-14);
        assert!((r * u1 - a).amax() < 1e-14);
        assert_eq!(u1, upper(&u1));
        assert!(u1[(0, 0)] > 0.0 && u1[(1, 1)] > 0.0);
    }

    #[test]
    fn orient_rejects_parallel_columns() {
        let a = Mat3::from_columns(&[Vec3::x(), -3.0 * Vec3::x(), Vec3::z()]);
        assert_eq!(orient_from_alpha(&a), Err(DecompositionError::DegenerateColumns));
        assert_eq!(
            orient_from_alpha(&Mat3::zeros()),
            Err(DecompositionError::DegenerateColumns)
        );
    }

    #[test]
    fn p_star_examples() {
        let u1 = Mat3::new(1.0, 0.4, 0.2, 0.0, 2.0, -0.3, 0.0, 0.0, 0.7);
        let p = solve_p_star(&Mat3::identity(), &Mat3::zeros(), &u1).unwrap();
        assert_eq!(p, Vec3::zeros());

        let known = Vec3::new(0.3, -0.1, 0.2);
        let u2 = Mat3::new(0.5, -1.0, 2.0, 0.0, 0.25, 0.3, 0.0, 0.0, -0.8);
        let b = skew(&known).into_matrix() * u1 + u2;
        let p = solve_p_star(&Mat3::identity(), &b, &u1).unwrap();
        assert!((p - known).amax() < 1e-12);

        let mut singular = u1;
        singular[(1, 1)] = 0.0;
        assert_eq!(
            solve_p_star(&Mat3::identity(), &b, &singular),
            Err(DecompositionError::Singular)
        );
    }

    #[test]
    fn u2_examples() {
        let u1 = Mat3::new(1.0, 0.4, 0.2, 0.0, 2.0, -0.3, 0.0, 0.0, 0.7);
        let p = Vec3::new(0.1, 0.2, -0.4);
        let b = skew(&p).into_matrix() * u1;
        assert!(compute_u2(&Mat3::identity(), &b, &u1, &p).amax() < 1e-15);

        let r = Rotation3::from_scaled_axis(Vec3::new(0.2, -0.5, 1.0)).into_inner();
        let b = Mat3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.5);
        assert_eq!(compute_u2(&r, &b, &u1, &Vec3::zeros()), r.transpose() * b);
    }

    #[test]
    fn u2_lower_triangle_vanishes_for_solved_p_star() {
        let w = window(
            [
                Vec3::new(0.3, -1.0, 0.5),
                Vec3::new(1.0, 0.2, 0.1),
                Vec3::new(-0.4, 0.8, 1.3),
            ],
            [
                Vec3::new(2.0, 0.1, -0.5),
                Vec3::new(-1.0, 0.6, 0.9),
                Vec3::new(0.3, 0.3, 0.3),
            ],
        );
        let b = w.beta_block();
        let (r, u1) = orient_from_alpha(&w.alpha_block()).unwrap();
        let p = solve_p_star(&r, &b, &u1).unwrap();
        let u2 = compute_u2(&r, &b, &u1, &p);
        let bound = 1e-12 * b.amax();
        assert!(u2[(1, 0)].abs() < bound);
        assert!(u2[(2, 0)].abs() < bound);
        assert!(u2[(2, 1)].abs() < bound);
    }

    #[test]
    fn triangular_window_decomposes_to_identity() {
        let u1 = Mat3::new(1.5, 0.4, 0.2, 0.0, 2.0, -0.3, 0.0, 0.0, 0.7);
        let u2 = Mat3::new(0.5, -1.0, 2.0, 0.0, 0.25, 0.3, 0.0, 0.0, -0.8);
        let xi = DutirU::from_blocks(&u1, &u2).matrix;
        let res = su_decompose(&LocalWindow::from_matrix(ScrewKind::Twist, &xi)).unwrap();
        assert_abs_diff_eq!(*res.rotation(), Mat3::identity(), epsilon = 1e-15);
        assert_abs_diff_eq!(*res.position(), Vec3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(res.u.matrix, xi, epsilon = 1e-15);
    }

    #[test]
    fn construct_then_recover() {
        let u1 = Mat3::new(0.8, -0.4, 1.2, 0.0, 1.1, -0.3, 0.0, 0.0, -0.7);
        let u2 = Mat3::new(-0.5, 1.0, 0.2, 0.0, 0.6, -0.9, 0.0, 0.0, 0.4);
        let u0 = DutirU::from_blocks(&u1, &u2);
        let s0 = ScrewTransform::new(
            Rotation3::from_scaled_axis(Vec3::new(1.0, -2.0, 0.5)).into_inner(),
            Vec3::new(3.0, -1.0, 7.0),
        )
        .unwrap();
        let xi = reconstruct(&s0, &u0);
        let res = su_decompose(&LocalWindow::from_matrix(ScrewKind::Wrench, &xi)).unwrap();
        assert!((res.u.matrix - u0.matrix).amax() < 1e-10);
        assert!((res.rotation() - s0.rotation()).amax() < 1e-10);
        assert!((res.position() - s0.position()).amax() < 1e-10 * 7.0);
        assert!((res.rotation().transpose() * res.position() - res.p_star).amax() < 1e-12);
    }

    #[test]
    fn pure_translation_is_irregular() {
        let w = window([Vec3::zeros(); 3], [Vec3::x(), Vec3::y(), Vec3::z()]);
        assert_eq!(
            su_decompose(&w),
            Err(DecompositionError::IrregularWindow(Regularity::AlphaZero))
        );
    }

    #[test]
    fn reconstruct_examples() {
        let u = DutirU::from_blocks(
            &Mat3::new(1.0, 2.0, 3.0, 0.0, 4.0, 5.0, 0.0, 0.0, 6.0),
            &Mat3::new(7.0, 8.0, 9.0, 0.0, 1.0, 2.0, 0.0, 0.0, 3.0),
        );
        assert_eq!(reconstruct(&ScrewTransform::identity(), &u), u.matrix);
        let s = ScrewTransform::new(
            Rotation3::from_scaled_axis(Vec3::new(0.1, 0.2, 0.3)).into_inner(),
            Vec3::new(1.0, 1.0, 1.0),
        )
        .unwrap();
        let zero = DutirU::from_blocks(&Mat3::zeros(), &Mat3::zeros());
        assert_eq!(reconstruct(&s, &zero), Matrix6x3::zeros());
    }

    #[test]
    fn exact_path_has_exact_zeros() {
        let w = window(
            [
                Vec3::new(0.3, -1.0, 0.5),
                Vec3::new(1.0, 0.2, 0.1),
                Vec3::new(-0.4, 0.8, 1.3),
            ],
            [
                Vec3::new(2.0, 0.1, -0.5),
                Vec3::new(-1.0, 0.6, 0.9),
                Vec3::new(0.3, 0.3, 0.3),
            ],
        );
        let res = su_decompose(&w).unwrap();
        for (j, k) in [(2, 1), (3, 1), (3, 2), (5, 1), (6, 1), (6, 2)] {
            assert_eq!(res.u.entry(j, k), 0.0);
        }
        assert_eq!(res.u.epsilon(), [0.0; 3]);
        assert!(!res.u.is_regularized());
        assert!(res.u.entry(1, 1) > 0.0 && res.u.entry(2, 2) > 0.0);
    }
}
