//! Line geometry of a pair of screw axes, and cross-checks of a decomposition
//! against it.
//!
//! Axis `k` is the line `p⊥k + t ek` with `ek = αk/‖αk‖` and
//! `p⊥k = αk × βk / ‖αk‖²`. `p∥1` is the signed distance along `e1` from `p⊥1`
//! to the foot of the common normal with axis 2.
//!
//! Everything here is computed directly from the screw coordinates; the
//! decomposition result is only read through its public fields.

use std::fmt;

use thiserror::Error;

use crate::decomposition::SuResult;
use crate::screw::{axis_direction, closest_point, Screw, Vec3};
use crate::tolerance::{GEOMETRY_CHECK, REGULARITY_RELATIVE, TINY_SCALE};
use crate::trajectory::LocalWindow;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeometryError {
    #[error("screw pair is irregular (zero or parallel alpha vectors)")]
    IrregularPair,
}

fn check_pair(a1: &Vec3, a2: &Vec3) -> Result<(), GeometryError> {
    let scale = a1.norm().max(a2.norm()).max(TINY_SCALE);
    if a1.norm() <= REGULARITY_RELATIVE * scale
        || a1.cross(a2).norm() <= REGULARITY_RELATIVE * scale * scale
    {
        return Err(GeometryError::IrregularPair);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPair {
    pub xi_1: Screw,
    pub xi_2: Screw,
    /// Angle between the alpha vectors, in `[0, π]`.
    pub theta: f64,
}

impl AxisPair {
    pub fn new(xi_1: Screw, xi_2: Screw) -> Result<Self, GeometryError> {
        let (a1, a2) = (xi_1.alpha(), xi_2.alpha());
        if a1.norm() == 0.0 || a2.norm() == 0.0 {
            return Err(GeometryError::IrregularPair);
        }
        let theta = a1.cross(a2).norm().atan2(a1.dot(a2));
        Ok(AxisPair { xi_1, xi_2, theta })
    }

    pub fn direction_1(&self) -> Vec3 {
        self.xi_1.alpha().normalize()
    }

    pub fn direction_2(&self) -> Vec3 {
        self.xi_2.alpha().normalize()
    }

    pub fn closest_point_1(&self) -> Vec3 {
        perpendicular_foot(&self.xi_1)
    }

    pub fn closest_point_2(&self) -> Vec3 {
        perpendicular_foot(&self.xi_2)
    }
}

fn perpendicular_foot(xi: &Screw) -> Vec3 {
    xi.alpha().cross(xi.beta()) / xi.alpha().norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRelations {
    pub u11: f64,
    pub u12: f64,
    pub u22: f64,
    /// Unit common-normal direction `α1 × α2 / ‖α1 × α2‖`.
    pub r3: Vec3,
}

/// Upper-triangle entries of the alpha block expressed through `α1`, `α2`.
pub fn alpha_relations(xi_1: &Screw, xi_2: &Screw) -> Result<AlphaRelations, GeometryError> {
    let (a1, a2) = (xi_1.alpha(), xi_2.alpha());
    check_pair(a1, a2)?;
    let n = a1.cross(a2);
    let u11 = a1.norm();
    Ok(AlphaRelations {
        u11,
        u12: a1.dot(a2) / u11,
        u22: n.norm() / u11,
        r3: n / n.norm(),
    })
}

/// Relative residual of `‖α1‖²‖α2‖² − (α1·α2)² = u11² u22²`.
pub fn quartic_residual(xi_1: &Screw, xi_2: &Screw) -> Result<f64, GeometryError> {
    let rel = alpha_relations(xi_1, xi_2)?;
    let (a1, a2) = (xi_1.alpha(), xi_2.alpha());
    let lhs = a1.norm_squared() * a2.norm_squared() - a1.dot(a2).powi(2);
    let rhs = (rel.u11 * rel.u22).powi(2);
    Ok((lhs - rhs).abs() / (a1.norm_squared() * a2.norm_squared()).max(TINY_SCALE))
}

/// `p∥1` in the long form, written only with dot and cross products of the
/// screw coordinates.
pub fn p_parallel_long(xi_1: &Screw, xi_2: &Screw) -> Result<f64, GeometryError> {
    let (a1, b1, a2, b2) = (xi_1.alpha(), xi_1.beta(), xi_2.alpha(), xi_2.beta());
    check_pair(a1, a2)?;
    let n1 = a1.norm();
    let num = n1 * a1.dot(&a2.cross(b2)) + a1.dot(a2) / n1 * a2.dot(&a1.cross(b1));
    let den = a1.norm_squared() * a2.norm_squared() - a1.dot(a2).powi(2);
    Ok(num / den)
}

/// `p∥1` through `u11`, `u12`, `u22` and the projections of the beta vectors
/// on the common normal.
pub fn p_parallel_triangular(xi_1: &Screw, xi_2: &Screw) -> Result<f64, GeometryError> {
    let rel = alpha_relations(xi_1, xi_2)?;
    let (u11, u12, u22) = (rel.u11, rel.u12, rel.u22);
    let b1r3 = xi_1.beta().dot(&rel.r3);
    let b2r3 = xi_2.beta().dot(&rel.r3);
    Ok((u11 * u11 * u22 * b2r3 - u11 * u12 * u22 * b1r3) / (u11 * u11 * u22 * u22))
}

/// Fully reduced form `p∥1 = ((RᵀB)32 − (u12/u11)(RᵀB)31) / u22`, with
/// `(RᵀB)3k = r3·βk`.
pub fn p_parallel_reduced(xi_1: &Screw, xi_2: &Screw) -> Result<f64, GeometryError> {
    let rel = alpha_relations(xi_1, xi_2)?;
    let rtb31 = rel.r3.dot(xi_1.beta());
    let rtb32 = rel.r3.dot(xi_2.beta());
    Ok((rtb32 - rel.u12 / rel.u11 * rtb31) / rel.u22)
}

/// Point on axis 1 closest to axis 2, and its offset `p∥1` from `p⊥1`.
pub fn common_normal_points(xi_1: &Screw, xi_2: &Screw) -> Result<(Vec3, f64), GeometryError> {
    let p_par = p_parallel_long(xi_1, xi_2)?;
    let e1 = xi_1.alpha().normalize();
    Ok((perpendicular_foot(xi_1) + e1 * p_par, p_par))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryCheck {
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
}

impl GeometryCheck {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub applicable: bool,
    pub checks: Vec<GeometryCheck>,
}

impl GeometryReport {
    pub fn not_applicable() -> Self {
        GeometryReport {
            applicable: false,
            checks: Vec::new(),
        }
    }

    /// True when not applicable or every check passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(GeometryCheck::passed)
    }
}

impl fmt::Display for GeometryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.applicable {
            return writeln!(f, "not applicable (irregular or regularized window)");
        }
        for c in &self.checks {
            writeln!(
                f,
                "{:<20} {} error={:.3e} tol={:.1e}",
                c.name,
                if c.passed() { "PASS" } else { "FAIL" },
                c.error,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

/// Checks an exact decomposition against the axis geometry of its window:
/// `r1` along the first axis, `r3` along the common normal of the first two
/// axes, `p` on the first axis, and `p*x = p∥1`.
pub fn verify_su_geometry(result: &SuResult, w: &LocalWindow) -> GeometryReport {
    verify_su_geometry_with(result, w, GEOMETRY_CHECK)
}

pub fn verify_su_geometry_with(result: &SuResult, w: &LocalWindow, tol: f64) -> GeometryReport {
    let (xi_1, xi_2) = (&w.xi_prev, &w.xi_curr);
    if !result.regularity.is_regular()
        || result.u.is_regularized()
        || check_pair(xi_1.alpha(), xi_2.alpha()).is_err()
    {
        return GeometryReport::not_applicable();
    }
    let dir_tol = REGULARITY_RELATIVE * xi_1.alpha().norm();
    let (e1, foot) = match (axis_direction(xi_1, dir_tol), closest_point(xi_1, dir_tol)) {
        (Ok(e), Ok(p)) => (e, p),
        _ => return GeometryReport::not_applicable(),
    };
    let r = result.rotation();
    let r1: Vec3 = r.column(0).into();
    let r3: Vec3 = r.column(2).into();
    let normal = xi_1.alpha().cross(xi_2.alpha()).normalize();

    let p = result.position();
    let offset = p - foot;
    let off_axis = (offset - e1 * e1.dot(&offset)).norm() / p.norm().max(1.0);

    let p_par = p_parallel_long(xi_1, xi_2).unwrap_or(f64::NAN);
    let p_star_x = result.p_star.x;
    let par_err = (p_star_x - p_par).abs() / p_par.abs().max(1.0);

    let checks = vec![
        GeometryCheck {
            name: "r1_axis_direction",
            error: (r1 - e1).norm(),
            tolerance: tol,
        },
        GeometryCheck {
            name: "r3_common_normal",
            error: (r3 - normal).norm(),
            tolerance: tol,
        },
        GeometryCheck {
            name: "p_on_axis",
            error: off_axis,
            tolerance: tol,
        },
        GeometryCheck {
            name: "p_star_x_parallel",
            error: if par_err.is_nan() { f64::INFINITY } else { par_err },
            tolerance: tol,
        },
    ];
    GeometryReport {
        applicable: true,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::su_decompose;
    use approx::assert_relative_eq;

    /// Zero-pitch twist about the line through `q` with direction `d`.
    fn rotation_about(q: Vec3, d: Vec3) -> Screw {
        Screw::twist(d, q.cross(&d))
    }

    #[test]
    fn alpha_relations_examples() {
        let x = Screw::twist(Vec3::x(), Vec3::zeros());
        let y = Screw::twist(Vec3::y(), Vec3::zeros());
        let rel = alpha_relations(&x, &y).unwrap();
        assert_eq!((rel.u11, rel.u12, rel.u22), (1.0, 0.0, 1.0));
        assert_eq!(rel.r3, Vec3::z());

        let a = Screw::twist(Vec3::new(2.0, 0.0, 0.0), Vec3::zeros());
        let b = Screw::twist(Vec3::new(2.0, 2.0, 0.0), Vec3::zeros());
        let rel = alpha_relations(&a, &b).unwrap();
        assert_relative_eq!(rel.u11, 2.0);
        assert_relative_eq!(rel.u12, 2.0);
        assert_relative_eq!(rel.u22, 2.0);
        assert!(quartic_residual(&a, &b).unwrap() < 1e-15);

        assert_eq!(alpha_relations(&a, &a), Err(GeometryError::IrregularPair));
        let zero = Screw::twist(Vec3::zeros(), Vec3::x());
        assert_eq!(alpha_relations(&zero, &a), Err(GeometryError::IrregularPair));
    }

    #[test]
    fn theta_covers_full_range() {
        let x = Screw::twist(Vec3::x(), Vec3::zeros());
        let p = AxisPair::new(x, Screw::twist(Vec3::new(-3.0, 0.0, 0.0), Vec3::zeros())).unwrap();
        assert_relative_eq!(p.theta, std::f64::consts::PI);
        let p = AxisPair::new(x, Screw::twist(Vec3::new(1.0, 1.0, 0.0), Vec3::zeros())).unwrap();
        assert_relative_eq!(p.theta, std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn perpendicular_axes() {
        let z_axis = rotation_about(Vec3::zeros(), Vec3::z());
        let x_axis = rotation_about(Vec3::new(0.0, 0.0, 1.0), Vec3::x());
        let (point, p_par) = common_normal_points(&z_axis, &x_axis).unwrap();
        assert_relative_eq!(point, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        assert_relative_eq!(p_par, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn intersecting_axes_meet_at_origin() {
        let a = rotation_about(Vec3::zeros(), Vec3::new(1.0, 2.0, -0.5));
        let b = rotation_about(Vec3::zeros(), Vec3::new(-0.3, 0.4, 1.0));
        let (point, _) = common_normal_points(&a, &b).unwrap();
        assert!(point.norm() < 1e-15);
    }

    #[test]
    fn closed_forms_agree() {
        let a = Screw::twist(Vec3::new(0.4, -1.1, 0.3), Vec3::new(0.2, 0.5, -0.7));
        let b = Screw::twist(Vec3::new(1.2, 0.1, -0.6), Vec3::new(-0.3, 0.9, 0.4));
        let long = p_parallel_long(&a, &b).unwrap();
        assert_relative_eq!(p_parallel_triangular(&a, &b).unwrap(), long, max_relative = 1e-12);
        assert_relative_eq!(p_parallel_reduced(&a, &b).unwrap(), long, max_relative = 1e-12);
    }

    #[test]
    fn common_normal_point_matches_grid_minimum() {
        let a = Screw::twist(Vec3::new(0.4, -1.1, 0.3), Vec3::new(0.2, 0.5, -0.7));
        let b = Screw::twist(Vec3::new(1.2, 0.1, -0.6), Vec3::new(-0.3, 0.9, 0.4));
        let pair = AxisPair::new(a, b).unwrap();
        let (p1, p2) = (pair.closest_point_1(), pair.closest_point_2());
        let half = 10.0 * (p1 - p2).norm();
        let g = dutir_testkit::line_distance_grid(
            &p1,
            &pair.direction_1(),
            &p2,
            &pair.direction_2(),
            half,
            601,
        );
        let (point, p_par) = common_normal_points(&a, &b).unwrap();
        assert!((p_par - g.t).abs() <= 2.0 * g.step / pair.theta.sin());
        let grid_point = p1 + pair.direction_1() * g.t;
        assert!((point - grid_point).norm() <= 2.0 * g.step / pair.theta.sin());
    }

    #[test]
    fn known_axes_window() {
        let q = Vec3::new(0.3, -0.4, 1.2);
        let w = LocalWindow::new(
            rotation_about(q, Vec3::new(0.0, 0.0, 1.0)),
            rotation_about(q, Vec3::new(1.0, 0.0, 0.2)),
            rotation_about(q, Vec3::new(0.0, 1.0, 0.5)),
        )
        .unwrap();
        let res = su_decompose(&w).unwrap();
        assert_relative_eq!(*res.position(), q, epsilon = 1e-12);
        let report = verify_su_geometry(&res, &w);
        assert!(report.applicable && report.passed(), "{report}");
    }

    #[test]
    fn random_regular_window_passes() {
        let w = LocalWindow::new(
            Screw::twist(Vec3::new(0.3, -1.0, 0.5), Vec3::new(0.2, 0.1, -0.5)),
            Screw::twist(Vec3::new(1.0, 0.2, 0.1), Vec3::new(-0.1, 0.6, 0.3)),
            Screw::twist(Vec3::new(-0.4, 0.8, 1.3), Vec3::new(0.3, 0.3, 0.3)),
        )
        .unwrap();
        let report = verify_su_geometry(&su_decompose(&w).unwrap(), &w);
        assert!(report.applicable);
        assert_eq!(report.checks.len(), 4);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn irregular_window_is_not_applicable() {
        use crate::regularization::{su_decompose_regularized, RegularizationConfig};
        let w = LocalWindow::new(
            Screw::twist(Vec3::zeros(), Vec3::x()),
            Screw::twist(Vec3::zeros(), Vec3::y()),
            Screw::twist(Vec3::zeros(), Vec3::z()),
        )
        .unwrap();
        let res = su_decompose_regularized(&w, &RegularizationConfig::default());
        let report = verify_su_geometry(&res, &w);
        assert!(!report.applicable);
        assert!(report.passed());
        assert!(report.to_string().contains("not applicable"));
    }
}
