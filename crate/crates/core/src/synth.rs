//! Analytic test trajectories.
//!
//! Pose archetypes are evaluated in closed form at `t = k·step` and turned
//! into screw samples with [`Trajectory::from_poses`]. Gaussian noise is
//! added to the screw samples only, from a random stream independent of the
//! one used by the [`Archetype::Random`] generator, so that the same seed with
//! and without noise yields identical underlying signals.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::screw::{Mat3, Screw, ScrewKind, ScrewTransform, Vec3};
use crate::trajectory::{PoseSample, Trajectory, TrajectoryError};

/// Timeline length of the slide-lift-pour archetype in its own units.
const SLP_SPAN: f64 = 2.8;
const SLP_SLIDE_END: f64 = 0.7;
const SLP_LIFT_END: f64 = 1.6;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Archetype {
    /// Rotation at `angular_rate` rad/s about the line through `point` along
    /// `axis`, with translation `pitch` m/rad along it.
    ConstantScrew {
        axis: Vec3,
        point: Vec3,
        angular_rate: f64,
        pitch: f64,
    },
    PureTranslation {
        velocity: Vec3,
    },
    PureRotation {
        axis: Vec3,
        point: Vec3,
        angular_rate: f64,
    },
    /// Slide on a table (pure translation), lift with a slight tilt, then a
    /// pouring rotation about a spout point.
    SlideLiftPour,
    /// Smooth motion whose instantaneous screw axis keeps changing direction
    /// and location.
    Tumble,
    /// Independent Gaussian screws.
    Random {
        alpha_sigma: f64,
        beta_sigma: f64,
    },
}

impl Archetype {
    pub fn label(&self) -> &'static str {
        match self {
            Archetype::ConstantScrew { .. } => "constant-screw",
            Archetype::PureTranslation { .. } => "pure-translation",
            Archetype::PureRotation { .. } => "pure-rotation",
            Archetype::SlideLiftPour => "slide-lift-pour",
            Archetype::Tumble => "tumble",
            Archetype::Random { .. } => "random",
        }
    }

    fn is_pose_based(&self) -> bool {
        !matches!(self, Archetype::Random { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Absolute { alpha_sigma: f64, beta_sigma: f64 },
    /// Standard deviation as a fraction of the largest `‖alpha‖` (resp.
    /// `‖beta‖`) of the noiseless trajectory.
    RelativeToPeak(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub archetype: Archetype,
    /// Seconds.
    pub duration: f64,
    /// Pose sampling interval in seconds.
    pub step: f64,
    pub kind: ScrewKind,
    pub noise: Option<Noise>,
    pub seed: u64,
    /// World frame in which the output is expressed.
    pub frame: ScrewTransform,
}

impl SynthSpec {
    pub fn new(archetype: Archetype, duration: f64, step: f64) -> Self {
        SynthSpec {
            archetype,
            duration,
            step,
            kind: ScrewKind::Twist,
            noise: None,
            seed: 0,
            frame: ScrewTransform::identity(),
        }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration / self.step + 1e-9).floor() as usize + 1
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let bad = |m: &str| Err(TrajectoryError::InvalidSpec(m.to_string()));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive and finite");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive and finite");
        }
        if self.sample_count() < 4 {
            return bad("duration/step must give at least 4 samples");
        }
        if self.sample_count() > 50_000_000 {
            return bad("too many samples");
        }
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        match self.archetype {
            Archetype::ConstantScrew {
                axis,
                point,
                angular_rate,
                pitch,
            } => {
                if !(finite(&axis) && axis.norm() > 0.0) {
                    return bad("axis must be a non-zero finite vector");
                }
                if !(finite(&point) && angular_rate.is_finite() && pitch.is_finite()) {
                    return bad("non-finite archetype parameter");
                }
            }
            Archetype::PureRotation {
                axis,
                point,
                angular_rate,
            } => {
                if !(finite(&axis) && axis.norm() > 0.0) {
                    return bad("axis must be a non-zero finite vector");
                }
                if !(finite(&point) && angular_rate.is_finite()) {
                    return bad("non-finite archetype parameter");
                }
            }
            Archetype::PureTranslation { velocity } => {
                if !finite(&velocity) {
                    return bad("non-finite velocity");
                }
            }
            Archetype::SlideLiftPour | Archetype::Tumble => {}
            Archetype::Random {
                alpha_sigma,
                beta_sigma,
            } => {
                if !(alpha_sigma >= 0.0 && beta_sigma >= 0.0)
                    || !(alpha_sigma.is_finite() && beta_sigma.is_finite())
                {
                    return bad("random sigmas must be non-negative and finite");
                }
            }
        }
        match self.noise {
            Some(Noise::Absolute {
                alpha_sigma,
                beta_sigma,
            }) if !(alpha_sigma >= 0.0 && beta_sigma >= 0.0)
                || !(alpha_sigma.is_finite() && beta_sigma.is_finite()) =>
            {
                bad("noise sigmas must be non-negative and finite")
            }
            Some(Noise::RelativeToPeak(f)) if !(f >= 0.0 && f.is_finite()) => {
                bad("relative noise must be non-negative and finite")
            }
            _ => Ok(()),
        }
    }
}

fn rotation(axis: &Vec3, angle: f64) -> Mat3 {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).into_inner()
}

/// Smooth 0→1 ramp with zero end velocities.
fn ramp(s: f64) -> f64 {
    0.5 * (1.0 - (PI * s).cos())
}

fn screw_motion(axis: &Vec3, point: &Vec3, angle: f64, pitch: f64) -> (Mat3, Vec3) {
    let r = rotation(axis, angle);
    let along = axis.normalize() * (pitch * angle);
    (r, (Mat3::identity() - r) * point + along)
}

fn slide_lift_pour(tau: f64) -> (Mat3, Vec3) {
    let p0 = Vec3::new(0.3, -0.2, 0.0);
    let slide = |t: f64| {
        p0 + Vec3::new(
            0.4 * t,
            0.3 * (SLP_SLIDE_END / PI) * (PI * t / SLP_SLIDE_END).sin(),
            0.0,
        )
    };
    let tilt_axis = Vec3::y();
    let lift = |t: f64| {
        let s = ramp((t - SLP_SLIDE_END) / (SLP_LIFT_END - SLP_SLIDE_END));
        (
            rotation(&tilt_axis, 0.1 * s),
            slide(SLP_SLIDE_END) + Vec3::new(0.05 * s, 0.0, 0.25 * s),
        )
    };
    if tau <= SLP_SLIDE_END {
        return (Mat3::identity(), slide(tau));
    }
    if tau <= SLP_LIFT_END {
        return lift(tau);
    }
    let (r_end, p_end) = lift(SLP_LIFT_END);
    let spout = p_end + r_end * Vec3::new(0.15, 0.0, 0.1);
    let s = (tau - SLP_LIFT_END) / (SLP_SPAN - SLP_LIFT_END);
    let g = rotation(&tilt_axis, 1.4 * ramp(s.min(1.0)));
    (g * r_end, spout + g * (p_end - spout))
}

fn tumble(t: f64) -> (Mat3, Vec3) {
    let r = rotation(&Vec3::z(), 0.9 * t) * rotation(&Vec3::x(), 0.6 * (1.3 * t).sin());
    let p = Vec3::new(0.4 * (0.7 * t).cos(), 0.3 * (1.1 * t).sin(), 0.2 * t);
    (r, p)
}

/// Progress-stamped world poses of a pose-based archetype (noise-free).
pub fn synth_poses(spec: &SynthSpec) -> Result<(Vec<f64>, Vec<PoseSample>), TrajectoryError> {
    spec.validate()?;
    if !spec.archetype.is_pose_based() {
        return Err(TrajectoryError::InvalidSpec(
            "random archetype has no pose form".into(),
        ));
    }
    if spec.noise.is_some() {
        return Err(TrajectoryError::InvalidSpec(
            "noise applies to screw output only".into(),
        ));
    }
    let n = spec.sample_count();
    let mut progress = Vec::with_capacity(n);
    let mut poses = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * spec.step;
        let (r, p) = match spec.archetype {
            Archetype::ConstantScrew {
                axis,
                point,
                angular_rate,
                pitch,
            } => screw_motion(&axis, &point, angular_rate * t, pitch),
            Archetype::PureRotation {
                axis,
                point,
                angular_rate,
            } => screw_motion(&axis, &point, angular_rate * t, 0.0),
            Archetype::PureTranslation { velocity } => (Mat3::identity(), velocity * t),
            Archetype::SlideLiftPour => slide_lift_pour(SLP_SPAN * t / spec.duration),
            Archetype::Tumble => tumble(t),
            Archetype::Random { .. } => unreachable!(),
        };
        progress.push(t);
        poses.push(PoseSample::from_rotation(p, &r).in_frame(&spec.frame));
    }
    Ok((progress, poses))
}

/// Screw trajectory for `spec`, noise included.
pub fn synth_trajectory(spec: &SynthSpec) -> Result<Trajectory, TrajectoryError> {
    spec.validate()?;
    let base = match spec.archetype {
        Archetype::Random {
            alpha_sigma,
            beta_sigma,
        } => {
            let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
            let n = spec.sample_count();
            let na = gaussian(alpha_sigma);
            let nb = gaussian(beta_sigma);
            let mut draw = |d: &Normal<f64>| Vec3::from_fn(|_, _| d.sample(&mut rng));
            let samples: Vec<Screw> = (0..n)
                .map(|_| {
                    let a = draw(&na);
                    let b = draw(&nb);
                    spec.frame.transform(&Screw::new(spec.kind, a, b))
                })
                .collect();
            let progress = (0..n).map(|k| k as f64 * spec.step).collect();
            Trajectory::new(spec.kind, progress, samples)?
        }
        _ => {
            let noiseless = SynthSpec {
                noise: None,
                ..*spec
            };
            let (progress, poses) = synth_poses(&noiseless)?;
            let twists = Trajectory::from_poses(&progress, &poses)?;
            retag(twists, spec.kind)?
        }
    };
    match spec.noise {
        None => Ok(base),
        Some(noise) => add_noise(&base, noise, spec.seed),
    }
}

fn gaussian(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated as finite and non-negative")
}

fn retag(traj: Trajectory, kind: ScrewKind) -> Result<Trajectory, TrajectoryError> {
    if traj.kind() == kind {
        return Ok(traj);
    }
    let samples = traj
        .samples()
        .iter()
        .map(|s| Screw::new(kind, *s.alpha(), *s.beta()))
        .collect();
    Trajectory::new(kind, traj.progress().to_vec(), samples)
}

/// Adds i.i.d. Gaussian noise to every alpha and beta component.
pub fn add_noise(traj: &Trajectory, noise: Noise, seed: u64) -> Result<Trajectory, TrajectoryError> {
    let (sa, sb) = match noise {
        Noise::Absolute {
            alpha_sigma,
            beta_sigma,
        } => (alpha_sigma, beta_sigma),
        Noise::RelativeToPeak(f) => (f * traj.alpha_scale(), f * traj.beta_scale()),
    };
    if !(sa >= 0.0 && sb >= 0.0 && sa.is_finite() && sb.is_finite()) {
        return Err(TrajectoryError::InvalidSpec("invalid noise level".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let (na, nb) = (gaussian(sa), gaussian(sb));
    let samples = traj
        .samples()
        .iter()
        .map(|s| {
            let a = s.alpha() + Vec3::from_fn(|_, _| na.sample(&mut rng));
            let b = s.beta() + Vec3::from_fn(|_, _| nb.sample(&mut rng));
            Screw::new(traj.kind(), a, b)
        })
        .collect();
    Trajectory::new(traj.kind(), traj.progress().to_vec(), samples)
}

/// Progress interval `[start, end]` of the sliding phase for a slide-lift-pour
/// spec of the given duration.
pub fn slide_interval(duration: f64) -> (f64, f64) {
    (0.0, duration * SLP_SLIDE_END / SLP_SPAN)
}
