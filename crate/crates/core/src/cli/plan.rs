use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use nalgebra::Vector3;

use super::{parse_reals, status_code, summary_line, HeuristicArg, PlannerArgs};
use crate::gridmap::{blocked_gaps, bound_violations, DynBounds, OccupancyGrid};
use crate::lti::State;
use crate::poly::Interval;
use crate::refine::{refine, waypoints_from_plan, RefineError};
use crate::search::{plan, GoalSpec, PlanStatus};
use crate::trajio::{write_segments, Trajectory};

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// `px,py,pz[,vx,vy,vz[,ax,ay,az]]`; missing derivatives are zero.
    #[arg(long, allow_hyphen_values = true)]
    pub start: String,
    /// `px,py,pz`
    #[arg(long, allow_hyphen_values = true)]
    pub goal: String,
    #[command(flatten)]
    pub planner: PlannerArgs,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Lqmt)]
    pub heuristic: HeuristicArg,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_segs: Option<PathBuf>,
    /// Smooth the searched trajectory with a minimum-effort spline.
    #[arg(long)]
    pub refine: bool,
    #[arg(long, default_value_t = 3, requires = "refine",
          value_parser = clap::value_parser!(u8).range(3..=4))]
    pub refine_order: u8,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
}

/// Parses a start state given as 3, 6 or 9 numbers, zero-padded to `order`.
pub(crate) fn parse_state(text: &str, order: usize) -> Result<State, String> {
    let v = parse_reals(text)?;
    if !matches!(v.len(), 3 | 6 | 9) {
        return Err(format!("expected 3, 6 or 9 numbers, found {}", v.len()));
    }
    if v.len() / 3 > order {
        return Err(format!("state has more derivatives than order {order}"));
    }
    let mut derivs: Vec<Vector3<f64>> = v.chunks(3).map(Vector3::from_column_slice).collect();
    derivs.resize(order, Vector3::zeros());
    Ok(State::new(derivs))
}

pub(crate) fn parse_point(text: &str) -> Result<Vector3<f64>, String> {
    let v = parse_reals(text)?;
    if v.len() != 3 {
        return Err(format!("expected 3 numbers, found {}", v.len()));
    }
    Ok(Vector3::from_column_slice(&v))
}

pub(crate) fn load_grid(path: &PathBuf, unknown_free: bool) -> Result<OccupancyGrid, String> {
    OccupancyGrid::load(path)
        .map(|g| g.with_unknown_free(unknown_free))
        .map_err(|e| format!("{}: {e}", path.display()))
}

pub(crate) fn workspace_dims(grid: &OccupancyGrid) -> usize {
    if grid.dims()[2] == 1 {
        2
    } else {
        3
    }
}

pub fn run(args: &PlanArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    if !(args.dt > 0.0) {
        return Err("--dt must be positive".into());
    }
    let grid = load_grid(&args.map, args.planner.unknown_free)?;
    let cfg = args
        .planner
        .config(workspace_dims(&grid), args.heuristic.into())?;
    let start = parse_state(&args.start, cfg.order)?;
    let goal = GoalSpec::at(parse_point(&args.goal)?);

    let result = plan(&start, &goal, &cfg, &grid).map_err(|e| e.to_string())?;
    writeln!(out, "{}", summary_line(&result, !args.planner.no_timing))
        .map_err(|e| e.to_string())?;
    if result.status != PlanStatus::Solved {
        return Ok(status_code(result.status));
    }
    if result.primitives.is_empty() {
        if args.out_csv.is_some() || args.out_segs.is_some() || args.refine {
            let _ = writeln!(
                err,
                "warning: start already satisfies the goal; nothing to write"
            );
        }
        return Ok(status_code(result.status));
    }

    let traj = if args.refine {
        let spec = waypoints_from_plan(&result, args.refine_order as usize)
            .map_err(|e: RefineError| e.to_string())?;
        let spline = refine(&spec).map_err(|e| e.to_string())?;
        report_refined(&spline, &grid, &cfg.bounds, err);
        spline
    } else {
        Trajectory::from_primitives(&result.primitives)
    };
    if let Some(path) = &args.out_csv {
        traj.sample(args.dt)
            .write_csv(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(path) = &args.out_segs {
        write_segments(&traj, path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(status_code(result.status))
}

/// The spline is not guaranteed to stay collision free or within bounds;
/// report, but do not repair, any violation.
fn report_refined(
    traj: &Trajectory,
    grid: &OccupancyGrid,
    bounds: &DynBounds,
    err: &mut dyn Write,
) {
    let mut occupied = 0;
    let mut worst: Vec<(usize, f64)> = Vec::new();
    for seg in &traj.segments {
        let peak = seg
            .axes
            .iter()
            .map(|p| {
                let (lo, hi) = p.derivative(1).extrema_on(Interval::new(0.0, seg.duration));
                lo.abs().max(hi.abs())
            })
            .fold(0.0, f64::max);
        occupied += blocked_gaps(&seg.axes, seg.duration, grid, peak, false);
        for (i, v) in bound_violations(&seg.axes, seg.duration, bounds) {
            match worst.iter_mut().find(|(j, _)| *j == i) {
                Some(w) => w.1 = w.1.max(v),
                None => worst.push((i, v)),
            }
        }
    }
    if occupied > 0 {
        let _ = writeln!(
            err,
            "warning: refined trajectory leaves free space in {occupied} sampling intervals"
        );
    }
    for (i, v) in worst {
        let _ = writeln!(
            err,
            "warning: refined trajectory derivative {i} peaks at {v:.6}, above its bound"
        );
    }
}
