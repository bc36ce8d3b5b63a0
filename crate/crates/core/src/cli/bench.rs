use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use super::plan::{load_grid, parse_point, parse_state, workspace_dims};
use super::PlannerArgs;
use crate::corpus::random_cases;
use crate::gridmap::OccupancyGrid;
use crate::lti::State;
use crate::search::{plan, GoalSpec, Heuristic, PlanStatus};

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of `.map` files.
    #[arg(long, required_unless_present = "corpus", requires = "cases")]
    pub maps: Option<PathBuf>,
    /// One case per line: `start;goal` (run on every map) or `map;start;goal`.
    #[arg(long, requires = "maps")]
    pub cases: Option<PathBuf>,
    /// Use this many built-in random 20x20 cases instead of map files.
    #[arg(long, conflicts_with = "maps")]
    pub corpus: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub planner: PlannerArgs,
    /// Per-run CSV report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

struct BenchCase {
    map: String,
    grid: OccupancyGrid,
    start: State,
    goal: GoalSpec,
}

/// One row of the run report.
struct RunRecord {
    case: usize,
    map: String,
    heuristic: Heuristic,
    status: &'static str,
    error: Option<String>,
    cost: f64,
    expanded: usize,
    seconds: f64,
}

fn map_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, String> {
    let mut files: Vec<(String, PathBuf)> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "map"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), p))
        .collect();
    files.sort();
    Ok(files)
}

fn file_cases(args: &BenchArgs, dir: &Path, cases: &Path) -> Result<Vec<BenchCase>, String> {
    let order = args.planner.order as usize;
    let text = fs::read_to_string(cases).map_err(|e| format!("{}: {e}", cases.display()))?;
    let maps = map_files(dir)?;
    let unknown_free = args.planner.unknown_free;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |m: String| format!("{}:{}: {m}", cases.display(), ln + 1);
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        let (targets, start, goal) = match fields.as_slice() {
            [s, g] => (maps.clone(), *s, *g),
            [m, s, g] => (vec![(m.to_string(), dir.join(m))], *s, *g),
            _ => return Err(at("expected 'start;goal' or 'map;start;goal'".into())),
        };
        let start = parse_state(start, order).map_err(at)?;
        let goal = GoalSpec::at(parse_point(goal).map_err(at)?);
        for (name, path) in targets {
            out.push(BenchCase {
                map: name,
                grid: load_grid(&path, unknown_free)?,
                start: start.clone(),
                goal: goal.clone(),
            });
        }
    }
    Ok(out)
}

fn mean_std_max(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (
        mean,
        var.sqrt(),
        xs.iter().copied().fold(f64::MIN, f64::max),
    )
}

pub fn run(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    if args.planner.vmax.is_none() {
        return Err("bench runs the max-speed heuristic and needs --vmax".into());
    }
    let cases: Vec<BenchCase> = match (&args.maps, &args.cases, args.corpus) {
        (Some(dir), Some(cases), _) => file_cases(args, dir, cases)?,
        (_, _, Some(n)) => random_cases(n, args.seed, args.planner.order as usize)
            .into_iter()
            .map(|c| BenchCase {
                map: format!("corpus-{}", c.id),
                grid: c.grid.with_unknown_free(args.planner.unknown_free),
                start: c.start,
                goal: c.goal,
            })
            .collect(),
        _ => return Err("give --maps with --cases, or --corpus".into()),
    };
    if cases.is_empty() {
        return Err("no cases to run".into());
    }

    let timing = !args.planner.no_timing;
    let runs: Vec<Result<Vec<RunRecord>, String>> = cases
        .par_iter()
        .enumerate()
        .map(|(id, c)| {
            Heuristic::ALL
                .iter()
                .map(|&h| {
                    let cfg = args.planner.config(workspace_dims(&c.grid), h)?;
                    let (status, error, cost, expanded, seconds) =
                        match plan(&c.start, &c.goal, &cfg, &c.grid) {
                            Ok(r) => (
                                r.status.name(),
                                None,
                                if r.status == PlanStatus::Solved {
                                    r.total_cost
                                } else {
                                    f64::INFINITY
                                },
                                r.expanded,
                                r.planning_seconds,
                            ),
                            Err(e) => ("error", Some(e.to_string()), f64::INFINITY, 0, 0.0),
                        };
                    Ok(RunRecord {
                        case: id,
                        map: c.map.clone(),
                        heuristic: h,
                        status,
                        error,
                        cost,
                        expanded,
                        seconds: if timing { seconds } else { 0.0 },
                    })
                })
                .collect()
        })
        .collect();
    let runs: Vec<Vec<RunRecord>> = runs.into_iter().collect::<Result<_, _>>()?;

    let solved: Vec<&Vec<RunRecord>> = runs
        .iter()
        .filter(|r| r.iter().all(|x| x.status == PlanStatus::Solved.name()))
        .collect();
    for x in runs.iter().flatten() {
        if let Some(e) = &x.error {
            let _ = writeln!(
                err,
                "warning: case {} on {} ({}): {e}",
                x.case,
                x.map,
                x.heuristic.name()
            );
        }
    }
    for r in &solved {
        let c0 = r[0].cost;
        if r.iter()
            .any(|x| (x.cost - c0).abs() > 1e-9 * c0.abs().max(1.0))
        {
            let costs: Vec<String> = r
                .iter()
                .map(|x| format!("{}={}", x.heuristic.name(), x.cost))
                .collect();
            let _ = writeln!(
                err,
                "warning: case {} on {}: costs differ across heuristics ({})",
                r[0].case,
                r[0].map,
                costs.join(", ")
            );
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "cases {} solved {}", runs.len(), solved.len());
    let _ = writeln!(
        s,
        "heuristic expanded_avg expanded_std expanded_max seconds_avg seconds_std seconds_max"
    );
    for (k, h) in Heuristic::ALL.iter().enumerate() {
        let exp: Vec<f64> = solved.iter().map(|r| r[k].expanded as f64).collect();
        let sec: Vec<f64> = solved.iter().map(|r| r[k].seconds).collect();
        let (ea, es, em) = mean_std_max(&exp);
        let (sa, ss, sm) = mean_std_max(&sec);
        let _ = writeln!(
            s,
            "{} {ea:.3} {es:.3} {em:.0} {sa:.6} {ss:.6} {sm:.6}",
            h.name()
        );
    }
    let ordered = solved
        .iter()
        .filter(|r| r[2].expanded <= r[1].expanded && r[1].expanded <= r[0].expanded)
        .count();
    let ratio = if solved.is_empty() {
        0.0
    } else {
        ordered as f64 / solved.len() as f64
    };
    let _ = writeln!(
        s,
        "ordering lqmt<=maxspeed<=zero {ordered}/{} {ratio:.3}",
        solved.len()
    );
    out.write_all(s.as_bytes()).map_err(|e| e.to_string())?;

    if let Some(path) = &args.report {
        let mut csv = String::from("case,map,heuristic,status,cost,expanded,seconds\n");
        for r in runs.iter().flatten() {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                r.case,
                r.map,
                r.heuristic.name(),
                r.status,
                r.cost,
                r.expanded,
                r.seconds
            );
        }
        fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(super::EXIT_OK)
}
