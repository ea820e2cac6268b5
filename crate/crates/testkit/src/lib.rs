//! Brute-force oracles and random generators shared by the test suites.
//!
//! Nothing here depends on the `dutir` crate, so agreement between these
//! helpers and the library is evidence rather than a restatement.

use nalgebra::{Matrix3, Matrix6, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> V3 {
    V3::from_fn(|_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    })
}

pub fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> V3 {
    V3::from_fn(|_, _| rng.random_range(-half_width..=half_width))
}

/// Rotation drawn uniformly (Haar measure) on SO(3) from a normalized
/// Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> M3 {
    loop {
        let mut c = [0.0f64; 4];
        for v in &mut c {
            *v = StandardNormal.sample(rng);
        }
        let q = Quaternion::new(c[0], c[1], c[2], c[3]);
        if q.norm() > 1e-6 {
            return *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix();
        }
    }
}

pub fn cross_matrix(p: &V3) -> M3 {
    M3::new(0.0, -p.z, p.y, p.z, 0.0, -p.x, -p.y, p.x, 0.0)
}

/// The 6×6 block matrix `[[R, 0], [[p]× R, R]]` acting on stacked `(α, β)`.
pub fn screw_matrix6(r: &M3, p: &V3) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(cross_matrix(p) * r));
    m
}

/// `n` nearly uniform points on the sphere of radius `radius`.
pub fn fibonacci_sphere(n: usize, radius: f64) -> Vec<V3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            radius * V3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Largest angular gap expected between neighbours of a Fibonacci grid of
/// `n` points, in radians (generous bound).
pub fn fibonacci_spacing(n: usize) -> f64 {
    4.0 * (std::f64::consts::PI / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct GridMinimum {
    pub t: f64,
    pub s: f64,
    pub distance: f64,
    /// Grid step in each parameter.
    pub step: f64,
}

/// Exhaustive minimization of `‖(a1 + t d1) - (a2 + s d2)‖` over an
/// `n × n` grid of `(t, s)` in `[-half_width, half_width]²`.
pub fn line_distance_grid(a1: &V3, d1: &V3, a2: &V3, d2: &V3, half_width: f64, n: usize) -> GridMinimum {
    let step = 2.0 * half_width / (n - 1) as f64;
    let mut best = GridMinimum {
        t: 0.0,
        s: 0.0,
        distance: f64::INFINITY,
        step,
    };
    for i in 0..n {
        let t = -half_width + step * i as f64;
        let q1 = a1 + d1 * t;
        for j in 0..n {
            let s = -half_width + step * j as f64;
            let d = (q1 - a2 - d2 * s).norm_squared();
            if d < best.distance {
                best.t = t;
                best.s = s;
                best.distance = d;
            }
        }
    }
    best.distance = best.distance.sqrt();
    best
}

/// Upper-triangular matrix with entries in `[-1, 1]` and diagonal entries
/// pushed away from zero; sign of the diagonal is random unless `positive`.
pub fn random_upper<R: Rng + ?Sized>(rng: &mut R, positive: [bool; 3]) -> M3 {
    let mut m = M3::zeros();
    for i in 0..3 {
        for j in i..3 {
            m[(i, j)] = rng.random_range(-1.0..1.0);
        }
        let mag = rng.random_range(0.2..1.5);
        let sign = if positive[i] || rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m[(i, i)] = sign * mag;
    }
    m
}
