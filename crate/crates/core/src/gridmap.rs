//! Occupancy-grid workspace, its text file format, and primitive feasibility
//! checks (sampled collision checking and exact derivative bounds).
//!
//! File format:
//!
//! ```text
//! gridmap v1
//! dims NX NY NZ
//! resolution R
//! origin OX OY OZ
//! <NZ blocks of NY lines of NX digits: 0 free, 1 occupied, 2 unknown>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use thiserror::Error;

use crate::lattice::MotionPrimitive;
use crate::poly::{Interval, Poly1};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("expected {expected} cells, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

impl Cell {
    fn digit(self) -> char {
        match self {
            Cell::Free => '0',
            Cell::Occupied => '1',
            Cell::Unknown => '2',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Vector3<f64>,
    resolution: f64,
    dims: [usize; 3],
    cells: Vec<Cell>,
    unknown_is_free: bool,
}

impl OccupancyGrid {
    /// An all-free grid. Panics on zero dimensions or a non-positive resolution.
    pub fn new(origin: Vector3<f64>, resolution: f64, dims: [usize; 3]) -> Self {
        assert!(dims.iter().all(|&d| d >= 1), "grid dimensions must be >= 1");
        assert!(resolution > 0.0, "grid resolution must be positive");
        Self {
            origin,
            resolution,
            dims,
            cells: vec![Cell::Free; dims[0] * dims[1] * dims[2]],
            unknown_is_free: false,
        }
    }

    /// Treat unknown cells as free (default: occupied).
    pub fn with_unknown_free(mut self, free: bool) -> Self {
        self.unknown_is_free = free;
        self
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Upper corner of the mapped volume.
    pub fn upper(&self) -> Vector3<f64> {
        self.origin
            + Vector3::new(
                self.dims[0] as f64,
                self.dims[1] as f64,
                self.dims[2] as f64,
            ) * self.resolution
    }

    fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    pub fn cell(&self, c: [usize; 3]) -> Cell {
        self.cells[self.index(c)]
    }

    pub fn set(&mut self, c: [usize; 3], v: Cell) {
        let i = self.index(c);
        self.cells[i] = v;
    }

    /// `floor((p - origin) / R)`; `None` outside the map.
    pub fn cell_of(&self, p: &Vector3<f64>) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.resolution).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }

    /// Center of a cell.
    pub fn center_of(&self, c: [usize; 3]) -> Vector3<f64> {
        self.origin
            + Vector3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5)
                * self.resolution
    }

    /// Out-of-map positions are never free.
    pub fn is_free(&self, p: &Vector3<f64>) -> bool {
        self.cell_of(p).is_some_and(|c| self.is_free_cell(c))
    }

    /// Applies the unknown-cell policy.
    pub fn is_free_cell(&self, c: [usize; 3]) -> bool {
        match self.cell(c) {
            Cell::Free => true,
            Cell::Unknown => self.unknown_is_free,
            Cell::Occupied => false,
        }
    }

    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| GridError::Parse {
                line: text.lines().count() + 1,
                msg: format!("missing {what}"),
            })
        };

        let (ln, magic) = next("header")?;
        if magic != "gridmap v1" {
            return Err(GridError::Parse {
                line: ln,
                msg: format!("expected 'gridmap v1', found '{magic}'"),
            });
        }
        let (ln, l) = next("dims line")?;
        let dims = parse_keyed::<usize>(ln, l, "dims", 3)?;
        if dims.contains(&0) {
            return Err(GridError::Parse {
                line: ln,
                msg: "dimensions must be >= 1".into(),
            });
        }
        let (ln, l) = next("resolution line")?;
        let resolution = parse_keyed::<f64>(ln, l, "resolution", 1)?[0];
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(GridError::Parse {
                line: ln,
                msg: "resolution must be positive".into(),
            });
        }
        let (ln, l) = next("origin line")?;
        let o = parse_keyed::<f64>(ln, l, "origin", 3)?;

        let expected = dims[0] * dims[1] * dims[2];
        let mut cells = Vec::with_capacity(expected);
        for (ln, row) in lines {
            if row.chars().count() != dims[0] {
                return Err(GridError::DimensionMismatch {
                    expected: dims[0],
                    found: row.chars().count(),
                });
            }
            for ch in row.chars() {
                cells.push(match ch {
                    '0' => Cell::Free,
                    '1' => Cell::Occupied,
                    '2' => Cell::Unknown,
                    other => {
                        return Err(GridError::Parse {
                            line: ln,
                            msg: format!("invalid cell value '{other}'"),
                        })
                    }
                });
            }
        }
        if cells.len() != expected {
            return Err(GridError::DimensionMismatch {
                expected,
                found: cells.len(),
            });
        }
        Ok(Self {
            origin: Vector3::new(o[0], o[1], o[2]),
            resolution,
            dims: [dims[0], dims[1], dims[2]],
            cells,
            unknown_is_free: false,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let [nx, ny, nz] = self.dims;
        let o = self.origin;
        let _ = writeln!(s, "gridmap v1");
        let _ = writeln!(s, "dims {nx} {ny} {nz}");
        let _ = writeln!(s, "resolution {}", self.resolution);
        let _ = writeln!(s, "origin {} {} {}", o.x, o.y, o.z);
        for z in 0..nz {
            for y in 0..ny {
                s.extend((0..nx).map(|x| self.cell([x, y, z]).digit()));
                s.push('\n');
            }
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GridError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_keyed<T: std::str::FromStr>(
    line: usize,
    text: &str,
    key: &str,
    count: usize,
) -> Result<Vec<T>, GridError> {
    let mut it = text.split_whitespace();
    if it.next() != Some(key) {
        return Err(GridError::Parse {
            line,
            msg: format!("expected '{key}'"),
        });
    }
    let vals: Vec<T> = it
        .map(|t| {
            t.parse::<T>().map_err(|_| GridError::Parse {
                line,
                msg: format!("cannot parse '{t}'"),
            })
        })
        .collect::<Result<_, _>>()?;
    if vals.len() != count {
        return Err(GridError::Parse {
            line,
            msg: format!("'{key}' takes {count} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

/// Per-axis magnitude bounds on velocity, acceleration and jerk; `None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DynBounds {
    pub v_max: Option<f64>,
    pub a_max: Option<f64>,
    pub j_max: Option<f64>,
}

impl DynBounds {
    /// `(derivative order, bound)` for every present bound.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        [(1, self.v_max), (2, self.a_max), (3, self.j_max)]
            .into_iter()
            .filter_map(|(i, b)| b.map(|b| (i, b)))
    }

    /// Whether a single state satisfies every bound.
    pub fn admits_state(&self, s: &crate::lti::State) -> bool {
        self.iter().all(|(i, b)| s.deriv(i).amax() <= b)
    }
}

/// Exact check of every bounded derivative over the primitive's duration.
pub fn check_dynamics(prim: &MotionPrimitive, bounds: &DynBounds) -> bool {
    let iv = prim.interval();
    bounds.iter().all(|(i, b)| {
        prim.derivative(i).iter().all(|p| {
            let (lo, hi) = p.extrema_on(iv);
            lo >= -b && hi <= b
        })
    })
}

/// Number of sampling intervals so consecutive samples are at most `R` apart per axis.
pub fn sample_count(duration: f64, v_max: f64, resolution: f64) -> usize {
    ((duration * v_max / resolution).ceil() as usize).max(1)
}

/// Collision check of a primitive: `I + 1` equally spaced samples,
/// `I = ceil(tau v_max / R)`, so consecutive samples are at most one cell apart.
///
/// Point samples alone miss trajectories that clip the corner of a cell
/// between two samples, so every gap between consecutive samples is also
/// covered by the bounding box of the curve over it (from exact per-axis
/// extrema), and every cell that box touches must be free.
pub fn check_collision(prim: &MotionPrimitive, grid: &OccupancyGrid, v_max: f64) -> bool {
    blocked_gaps(prim.axes(), prim.duration(), grid, v_max, true) == 0
}

/// Number of sampling gaps of a position polynomial whose swept box touches a
/// cell that is not free, using the sampling of [`check_collision`].
pub fn blocked_gaps(
    axes: &[Poly1; 3],
    duration: f64,
    grid: &OccupancyGrid,
    v_max: f64,
    stop_at_first: bool,
) -> usize {
    let count = sample_count(duration, v_max, grid.resolution());
    let mut blocked = 0;
    for i in 0..count {
        let iv = Interval::new(
            duration * i as f64 / count as f64,
            duration * (i + 1) as f64 / count as f64,
        );
        if !box_is_free(axes, iv, grid) {
            blocked += 1;
            if stop_at_first {
                break;
            }
        }
    }
    blocked
}

/// Whether only the sample points (no swept boxes) are free.
pub fn samples_free(axes: &[Poly1; 3], duration: f64, grid: &OccupancyGrid, v_max: f64) -> bool {
    let count = sample_count(duration, v_max, grid.resolution());
    (0..=count).all(|i| {
        let t = duration * i as f64 / count as f64;
        grid.is_free(&Vector3::from_fn(|a, _| axes[a].eval(t)))
    })
}

fn box_is_free(axes: &[Poly1; 3], iv: Interval, grid: &OccupancyGrid) -> bool {
    let o = grid.origin();
    let r = grid.resolution();
    let dims = grid.dims();
    let mut range = [(0usize, 0usize); 3];
    for a in 0..3 {
        let (lo, hi) = axes[a].extrema_on(iv);
        let (c_lo, c_hi) = (((lo - o[a]) / r).floor(), ((hi - o[a]) / r).floor());
        if !(c_lo >= 0.0 && c_hi < dims[a] as f64) {
            return false;
        }
        range[a] = (c_lo as usize, c_hi as usize);
    }
    for z in range[2].0..=range[2].1 {
        for y in range[1].0..=range[1].1 {
            for x in range[0].0..=range[0].1 {
                if !grid.is_free_cell([x, y, z]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Bounded derivatives of a polynomial segment that exceed their bound, as
/// `(derivative order, peak magnitude)`.
pub fn bound_violations(axes: &[Poly1; 3], duration: f64, bounds: &DynBounds) -> Vec<(usize, f64)> {
    let iv = Interval::new(0.0, duration);
    bounds
        .iter()
        .filter_map(|(i, b)| {
            let peak = axes
                .iter()
                .map(|p| {
                    let (lo, hi) = p.derivative(i).extrema_on(iv);
                    lo.abs().max(hi.abs())
                })
                .fold(0.0, f64::max);
            (peak > b).then_some((i, peak))
        })
        .collect()
}
