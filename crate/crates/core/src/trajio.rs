//! Piecewise-polynomial trajectories, fixed-step sampling, and the CSV and
//! segment text formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use thiserror::Error;

use crate::lattice::MotionPrimitive;
use crate::poly::Poly1;

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("trajectory has no segments")]
    EmptyTrajectory,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One polynomial piece; time is local, starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub axes: [Poly1; 3],
}

impl Segment {
    pub fn deriv_at(&self, i: usize, t: f64) -> Vector3<f64> {
        Vector3::from_fn(|a, _| self.axes[a].derivative(i).eval(t))
    }
}

/// Sequence of segments traversed back to back. `order` is the derivative
/// order of the control input (it decides whether jerk is exported).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub order: usize,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn from_primitives(prims: &[MotionPrimitive]) -> Self {
        Self {
            order: prims.first().map_or(0, MotionPrimitive::order),
            segments: prims
                .iter()
                .map(|p| Segment {
                    duration: p.duration(),
                    axes: p.axes().clone(),
                })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start time of each segment.
    pub fn offsets(&self) -> Vec<f64> {
        self.segments
            .iter()
            .scan(0.0, |acc, s| {
                let t = *acc;
                *acc += s.duration;
                Some(t)
            })
            .collect()
    }

    /// `i`-th derivative at global time `t`, clamped to the trajectory span.
    pub fn deriv_at(&self, i: usize, t: f64) -> Vector3<f64> {
        assert!(!self.is_empty(), "empty trajectory");
        let mut local = t.max(0.0);
        for (k, s) in self.segments.iter().enumerate() {
            if local <= s.duration || k + 1 == self.segments.len() {
                return s.deriv_at(i, local.min(s.duration));
            }
            local -= s.duration;
        }
        unreachable!()
    }

    /// Samples every `dt` within each segment; segment starts and the final
    /// time are always included.
    pub fn sample(&self, dt: f64) -> SampledTrajectory {
        assert!(dt > 0.0, "sampling step must be positive");
        let derivs = if self.order >= 3 { 4 } else { 3 };
        let mut rows = Vec::new();
        let row = |s: &Segment, t0: f64, t: f64| SampleRow {
            t: t0 + t,
            derivs: (0..derivs).map(|i| s.deriv_at(i, t)).collect(),
        };
        let offsets = self.offsets();
        for (s, &t0) in self.segments.iter().zip(&offsets) {
            let mut j = 0usize;
            loop {
                let t = j as f64 * dt;
                if j > 0 && t >= s.duration * (1.0 - 1e-12) {
                    break;
                }
                rows.push(row(s, t0, t));
                j += 1;
            }
        }
        if let (Some(s), Some(&t0)) = (self.segments.last(), offsets.last()) {
            rows.push(row(s, t0, s.duration));
        }
        SampledTrajectory { derivs, rows }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub t: f64,
    /// Position, velocity, acceleration and optionally jerk.
    pub derivs: Vec<Vector3<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    pub derivs: usize,
    pub rows: Vec<SampleRow>,
}

impl SampledTrajectory {
    pub fn header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        for name in ["p", "v", "a", "j"].iter().take(self.derivs) {
            cols.extend(["x", "y", "z"].iter().map(|a| format!("{name}{a}")));
        }
        cols.join(",")
    }

    pub fn to_csv(&self) -> Result<String, TrajError> {
        if self.rows.is_empty() {
            return Err(TrajError::EmptyTrajectory);
        }
        let mut s = self.header();
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{}", r.t);
            for d in &r.derivs {
                let _ = write!(s, ",{},{},{}", d.x, d.y, d.z);
            }
            s.push('\n');
        }
        Ok(s)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), TrajError> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

/// Segment file: a header, then per segment a `segment <duration>` line and
/// one line of monomial coefficients `c_0 .. c_K` per axis.
pub fn segments_to_text(traj: &Trajectory) -> Result<String, TrajError> {
    if traj.is_empty() {
        return Err(TrajError::EmptyTrajectory);
    }
    let mut s = String::from("segments v1 monomial\n");
    let _ = writeln!(s, "order {}", traj.order);
    for seg in &traj.segments {
        let _ = writeln!(s, "segment {}", seg.duration);
        for (name, p) in ["x", "y", "z"].iter().zip(&seg.axes) {
            s.push_str(name);
            for c in p.coeffs() {
                let _ = write!(s, " {c}");
            }
            s.push('\n');
        }
    }
    Ok(s)
}

pub fn parse_segments(text: &str) -> Result<Trajectory, TrajError> {
    let err = |line: usize, msg: &str| TrajError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, "segments v1 monomial")) => {}
        Some((n, _)) => return Err(err(n, "expected 'segments v1 monomial'")),
        None => return Err(TrajError::EmptyTrajectory),
    }
    let (n, l) = lines.next().ok_or_else(|| err(2, "missing order line"))?;
    let order = l
        .strip_prefix("order ")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| err(n, "expected 'order <n>'"))?;

    let floats = |n: usize, fields: &str| -> Result<Vec<f64>, TrajError> {
        fields
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| err(n, &format!("cannot parse '{t}'")))
            })
            .collect()
    };
    let mut segments = Vec::new();
    while let Some((n, l)) = lines.next() {
        let duration = match l.strip_prefix("segment ").map(|v| floats(n, v)) {
            Some(Ok(v)) if v.len() == 1 => v[0],
            _ => return Err(err(n, "expected 'segment <duration>'")),
        };
        let mut axes = Vec::with_capacity(3);
        for name in ["x", "y", "z"] {
            let (n, l) = lines
                .next()
                .ok_or_else(|| err(n, &format!("missing {name} coefficients")))?;
            let rest = l
                .strip_prefix(name)
                .filter(|r| r.is_empty() || r.starts_with(' '))
                .ok_or_else(|| err(n, &format!("expected '{name}' coefficients")))?;
            axes.push(Poly1::new(floats(n, rest)?));
        }
        let [x, y, z]: [Poly1; 3] = axes.try_into().expect("three axes");
        segments.push(Segment {
            duration,
            axes: [x, y, z],
        });
    }
    if segments.is_empty() {
        return Err(TrajError::EmptyTrajectory);
    }
    Ok(Trajectory { order, segments })
}

pub fn write_segments(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), TrajError> {
    fs::write(path, segments_to_text(traj)?)?;
    Ok(())
}

pub fn read_segments(path: impl AsRef<Path>) -> Result<Trajectory, TrajError> {
    parse_segments(&fs::read_to_string(path)?)
}
