//! Command-line front end: `decompose`, `check` and `synth`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dutir::decomposition::su_decompose_with;
use dutir::io::format_float;
use dutir::regularization::decompose;
use dutir::synth::Noise;
use dutir::{
    load_trajectory, synth_poses, synth_trajectory, verify_su_geometry, write_pose_csv,
    write_screw_csv, Archetype, GeometryReport, LocalWindow, RegularityTolerance,
    RegularizationConfig, ScrewKind, ScrewTransform, SuResult, SynthSpec, TrajectoryError,
    TrajectoryFormat, Vec3,
};
use nalgebra::Rotation3;
use rayon::prelude::*;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;

pub const U_COLUMNS: [&str; 15] = [
    "u11", "u12", "u13", "u22", "u23", "u33", "u41", "u42", "u43", "e51", "u52", "u53", "e61",
    "e62", "u63",
];
/// 1-based `(row, column)` of each entry in [`U_COLUMNS`].
const U_ENTRIES: [(usize, usize); 15] = [
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
    (4, 1),
    (4, 2),
    (4, 3),
    (5, 1),
    (5, 2),
    (5, 3),
    (6, 1),
    (6, 2),
    (6, 3),
];
pub const S_COLUMNS: [&str; 12] = [
    "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33", "px", "py", "pz",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "dutir", version, about = "Coordinate-invariant screw trajectory decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose every window of a trajectory and write the invariant signals.
    Decompose(DecomposeArgs),
    /// Check the exact decomposition of every window against the axis geometry.
    Check(CheckArgs),
    /// Write a synthetic trajectory.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Pose,
    Twist,
    Wrench,
}

impl From<InputFormat> for TrajectoryFormat {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Pose => TrajectoryFormat::PoseCsv,
            InputFormat::Twist => TrajectoryFormat::ScrewCsv(ScrewKind::Twist),
            InputFormat::Wrench => TrajectoryFormat::ScrewCsv(ScrewKind::Wrench),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: InputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Geometric scale L in metres.
    #[arg(long = "L", default_value_t = 1.0)]
    pub scale: f64,
    /// Procrustes weight w in metres (defaults to L).
    #[arg(long = "w")]
    pub weight: Option<f64>,
    #[arg(long)]
    pub no_regularization: bool,
    /// Append the rotation (row-major) and position columns.
    #[arg(long = "emit-S")]
    pub emit_s: bool,
    /// Accepted for symmetry with `synth`; decomposition is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long = "L", default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long = "w")]
    pub weight: Option<f64>,
    /// Accepted for symmetry with `decompose`; the check always uses the
    /// exact decomposition.
    #[arg(long)]
    pub no_regularization: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchetypeName {
    ConstantScrew,
    PureTranslation,
    PureRotation,
    SlideLiftPour,
    Tumble,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub archetype: ArchetypeName,
    /// Output format.
    #[arg(long, value_enum, default_value = "twist")]
    pub format: InputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Seconds.
    #[arg(long, default_value_t = 2.8)]
    pub duration: f64,
    /// Sampling interval in seconds.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Noise standard deviation as a fraction of the peak alpha and beta magnitudes.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Screw or rotation axis direction `x,y,z`.
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,1")]
    pub axis: Vec3,
    /// Point on the screw or rotation axis `x,y,z` (m).
    #[arg(long, value_parser = parse_vec3, default_value = "0.5,0,0")]
    pub point: Vec3,
    /// Angular rate in rad/s.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Pitch in m/rad.
    #[arg(long, default_value_t = 0.1)]
    pub pitch: f64,
    /// Translation velocity `x,y,z` (m/s).
    #[arg(long, value_parser = parse_vec3, default_value = "0.3,0.1,0")]
    pub velocity: Vec3,
    /// Translation of the output world frame `x,y,z` (m).
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
    pub frame_translation: Vec3,
    /// Rotation of the output world frame as a rotation vector `x,y,z` (rad).
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
    pub frame_axis_angle: Vec3,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected three finite comma-separated numbers, got {s:?}")),
    }
}

fn regularization_config(
    scale: f64,
    weight: Option<f64>,
    enabled: bool,
) -> Result<RegularizationConfig, CliError> {
    if !enabled {
        return Ok(RegularizationConfig::disabled());
    }
    let cfg = RegularizationConfig::new(scale).map_err(|e| CliError::Config(e.to_string()))?;
    match weight {
        Some(w) => cfg.with_weight(w).map_err(|e| CliError::Config(e.to_string())),
        None => Ok(cfg),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// One output row per window.
#[derive(Debug, Clone)]
pub struct WindowRow {
    pub progress: f64,
    pub result: Option<SuResult>,
}

impl WindowRow {
    fn status(&self) -> &'static str {
        match &self.result {
            Some(r) => r.regularity.label(),
            None => "irregular",
        }
    }
}

pub fn header(emit_s: bool) -> String {
    let mut cols: Vec<&str> = vec!["x"];
    cols.extend(U_COLUMNS);
    cols.extend(["reg_p", "reg_R", "status"]);
    if emit_s {
        cols.extend(S_COLUMNS);
    }
    cols.join(",")
}

pub fn format_row(row: &WindowRow, emit_s: bool) -> String {
    let mut fields = vec![format_float(row.progress)];
    match &row.result {
        Some(r) => {
            fields.extend(U_ENTRIES.iter().map(|&(j, k)| format_float(r.u.entry(j, k))));
            fields.push(u8::from(r.u.regularized_p).to_string());
            fields.push(u8::from(r.u.regularized_r).to_string());
        }
        None => {
            fields.extend(std::iter::repeat_n(format_float(f64::NAN), U_ENTRIES.len()));
            fields.extend(["0".to_string(), "0".to_string()]);
        }
    }
    fields.push(row.status().to_string());
    if emit_s {
        match &row.result {
            Some(r) => {
                let m = r.rotation();
                for i in 0..3 {
                    for j in 0..3 {
                        fields.push(format_float(m[(i, j)]));
                    }
                }
                fields.extend(r.position().iter().map(|v| format_float(*v)));
            }
            None => fields.extend(std::iter::repeat_n(format_float(f64::NAN), S_COLUMNS.len())),
        }
    }
    fields.join(",")
}

/// Decomposes every window in parallel; rows come back in window order.
pub fn decompose_windows(
    windows: &[LocalWindow],
    cfg: &RegularizationConfig,
    tol: &RegularityTolerance,
) -> Vec<WindowRow> {
    windows
        .par_iter()
        .map(|w| WindowRow {
            progress: w.progress,
            result: decompose(w, cfg, tol).ok(),
        })
        .collect()
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<u8, CliError> {
    let cfg = regularization_config(args.scale, args.weight, !args.no_regularization)?;
    let traj = load_trajectory(&args.input.input, args.input.format.into())?;
    let tol = RegularityTolerance::for_trajectory(&traj);
    let rows = decompose_windows(&traj.windows()?, &cfg, &tol);
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{}", header(args.emit_s))?;
    for row in &rows {
        writeln!(out, "{}", format_row(row, args.emit_s))?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

pub fn check_windows(
    windows: &[LocalWindow],
    tol: &RegularityTolerance,
) -> Vec<(usize, f64, GeometryReport)> {
    windows
        .par_iter()
        .map(|w| {
            let report = match su_decompose_with(w, tol) {
                Ok(res) => verify_su_geometry(&res, w),
                Err(_) => GeometryReport::not_applicable(),
            };
            (w.index, w.progress, report)
        })
        .collect()
}

pub fn cmd_check(args: &CheckArgs) -> Result<u8, CliError> {
    regularization_config(args.scale, args.weight, !args.no_regularization)?;
    let traj = load_trajectory(&args.input.input, args.input.format.into())?;
    let tol = RegularityTolerance::for_trajectory(&traj);
    let reports = check_windows(&traj.windows()?, &tol);
    let mut out = open_output(args.output.as_deref())?;
    let (mut passed, mut failed, mut skipped) = (0usize, 0usize, 0usize);
    for (index, x, report) in &reports {
        let verdict = if !report.applicable {
            skipped += 1;
            "n/a"
        } else if report.passed() {
            passed += 1;
            "pass"
        } else {
            failed += 1;
            "FAIL"
        };
        writeln!(out, "window {index} x={} {verdict}", format_float(*x))?;
        if report.applicable && !report.passed() {
            for line in report.to_string().lines() {
                writeln!(out, "  {line}")?;
            }
        }
    }
    writeln!(
        out,
        "summary: {passed} passed, {failed} failed, {skipped} not applicable"
    )?;
    out.flush()?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}

pub fn synth_spec(args: &SynthArgs) -> Result<SynthSpec, CliError> {
    let archetype = match args.archetype {
        ArchetypeName::ConstantScrew => Archetype::ConstantScrew {
            axis: args.axis,
            point: args.point,
            angular_rate: args.rate,
            pitch: args.pitch,
        },
        ArchetypeName::PureRotation => Archetype::PureRotation {
            axis: args.axis,
            point: args.point,
            angular_rate: args.rate,
        },
        ArchetypeName::PureTranslation => Archetype::PureTranslation {
            velocity: args.velocity,
        },
        ArchetypeName::SlideLiftPour => Archetype::SlideLiftPour,
        ArchetypeName::Tumble => Archetype::Tumble,
        ArchetypeName::Random => Archetype::Random {
            alpha_sigma: 1.0,
            beta_sigma: 1.0,
        },
    };
    if !(args.noise >= 0.0 && args.noise.is_finite()) {
        return Err(CliError::Config(format!(
            "noise must be non-negative, got {}",
            args.noise
        )));
    }
    let rotation = Rotation3::from_scaled_axis(args.frame_axis_angle).into_inner();
    let frame = ScrewTransform::new(rotation, args.frame_translation)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut spec = SynthSpec::new(archetype, args.duration, args.step);
    spec.seed = args.seed;
    spec.frame = frame;
    spec.noise = (args.noise > 0.0).then_some(Noise::RelativeToPeak(args.noise));
    spec.kind = match args.format {
        InputFormat::Wrench => ScrewKind::Wrench,
        _ => ScrewKind::Twist,
    };
    Ok(spec)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<u8, CliError> {
    let spec = synth_spec(args)?;
    spec.validate()?;
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        InputFormat::Pose => {
            let (progress, poses) = synth_poses(&spec)?;
            write_pose_csv(&mut out, &progress, &poses)?;
        }
        _ => write_screw_csv(&mut out, &synth_trajectory(&spec)?)?,
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// Runs a parsed command, printing diagnostics to stderr; returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Check(a) => cmd_check(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(CliError::Trajectory(TrajectoryError::Io(e)))
            if e.kind() == io::ErrorKind::BrokenPipe =>
        {
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
