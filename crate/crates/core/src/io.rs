//! Pose and screw CSV files.
//!
//! Both formats are UTF-8, comma-separated, with a fixed header row and
//! `#`-prefixed comment lines:
//!
//! * pose:  `x,px,py,pz,qw,qx,qy,qz`
//! * screw: `x,a1,a2,a3,b1,b2,b3` (twist or wrench, chosen by the caller)
//!
//! Floats are written with 17 significant digits so that a written file reads
//! back to bit-identical values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::screw::{Screw, ScrewKind, Vec3};
use crate::trajectory::{PoseSample, Trajectory, TrajectoryError};

pub const POSE_HEADER: [&str; 8] = ["x", "px", "py", "pz", "qw", "qx", "qy", "qz"];
pub const SCREW_HEADER: [&str; 7] = ["x", "a1", "a2", "a3", "b1", "b2", "b3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    /// Poses, converted to twists between successive rows.
    PoseCsv,
    /// Screws read verbatim, tagged with the given kind.
    ScrewCsv(ScrewKind),
}

/// Formats a float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_rows<R: Read>(
    reader: R,
    header: &[&str],
) -> Result<Vec<(u64, Vec<f64>)>, TrajectoryError> {
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .has_headers(false)
        .from_reader(reader);

    let mut rows = Vec::new();
    let mut seen_header = false;
    let mut record = StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| TrajectoryError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if !seen_header {
            let found: Vec<&str> = record.iter().collect();
            if found != header {
                return Err(TrajectoryError::Parse {
                    line,
                    message: format!(
                        "expected header `{}`, found `{}`",
                        header.join(","),
                        found.join(",")
                    ),
                });
            }
            seen_header = true;
            continue;
        }
        if record.len() != header.len() {
            return Err(TrajectoryError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let values = record
            .iter()
            .zip(header)
            .map(|(field, name)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| TrajectoryError::Parse {
                        line,
                        message: format!("column `{name}`: `{field}` is not a finite number"),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push((line, values));
    }
    if !seen_header {
        return Err(TrajectoryError::Parse {
            line: 0,
            message: "missing header row".into(),
        });
    }
    Ok(rows)
}

fn check_monotone(rows: &[(u64, Vec<f64>)]) -> Result<(), TrajectoryError> {
    for (index, pair) in rows.windows(2).enumerate() {
        let (previous, current) = (pair[0].1[0], pair[1].1[0]);
        if !(current > previous) {
            return Err(TrajectoryError::NonMonotoneProgress {
                index: index + 1,
                previous,
                current,
            });
        }
    }
    Ok(())
}

pub fn read_pose_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<PoseSample>), TrajectoryError> {
    let rows = parse_rows(reader, &POSE_HEADER)?;
    check_monotone(&rows)?;
    let mut progress = Vec::with_capacity(rows.len());
    let mut poses = Vec::with_capacity(rows.len());
    for (line, v) in rows {
        let pose = PoseSample::new(Vec3::new(v[1], v[2], v[3]), v[4], v[5], v[6], v[7]).map_err(
            |e| TrajectoryError::Parse {
                line,
                message: e.to_string(),
            },
        )?;
        progress.push(v[0]);
        poses.push(pose);
    }
    Ok((progress, poses))
}

pub fn read_screw_csv<R: Read>(reader: R, kind: ScrewKind) -> Result<Trajectory, TrajectoryError> {
    let rows = parse_rows(reader, &SCREW_HEADER)?;
    check_monotone(&rows)?;
    let (progress, samples): (Vec<f64>, Vec<Screw>) = rows
        .into_iter()
        .map(|(_, v)| {
            (
                v[0],
                Screw::new(kind, Vec3::new(v[1], v[2], v[3]), Vec3::new(v[4], v[5], v[6])),
            )
        })
        .unzip();
    Trajectory::new(kind, progress, samples)
}

/// Reads a trajectory and checks it holds at least three screw samples.
pub fn read_trajectory<R: Read>(
    reader: R,
    format: TrajectoryFormat,
) -> Result<Trajectory, TrajectoryError> {
    let traj = match format {
        TrajectoryFormat::PoseCsv => {
            let (progress, poses) = read_pose_csv(reader)?;
            Trajectory::from_poses(&progress, &poses)?
        }
        TrajectoryFormat::ScrewCsv(kind) => read_screw_csv(reader, kind)?,
    };
    if traj.len() < 3 {
        return Err(TrajectoryError::TooShort { len: traj.len() });
    }
    Ok(traj)
}

pub fn load_trajectory(
    path: impl AsRef<Path>,
    format: TrajectoryFormat,
) -> Result<Trajectory, TrajectoryError> {
    read_trajectory(File::open(path)?, format)
}

pub fn write_screw_csv<W: Write>(mut w: W, traj: &Trajectory) -> std::io::Result<()> {
    writeln!(w, "{}", SCREW_HEADER.join(","))?;
    for (x, s) in traj.progress().iter().zip(traj.samples()) {
        let fields: Vec<String> = std::iter::once(*x)
            .chain(s.to_vector().iter().copied())
            .map(format_float)
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_pose_csv<W: Write>(
    mut w: W,
    progress: &[f64],
    poses: &[PoseSample],
) -> std::io::Result<()> {
    writeln!(w, "{}", POSE_HEADER.join(","))?;
    for (x, p) in progress.iter().zip(poses) {
        let q = p.orientation.quaternion();
        let fields: Vec<String> = [
            *x,
            p.position.x,
            p.position.y,
            p.position.z,
            q.w,
            q.i,
            q.j,
            q.k,
        ]
        .into_iter()
        .map(format_float)
        .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}
