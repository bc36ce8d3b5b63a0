//! Command-line front end. Every command writes to caller-supplied streams and
//! returns its exit code, so the binary is a thin wrapper.

mod bench;
mod genmap;
mod plan;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::gridmap::DynBounds;
use crate::lattice::ControlSet;
use crate::search::{Heuristic, PlanResult, PlanStatus, PlannerConfig};

pub use bench::BenchArgs;
pub use genmap::GenmapArgs;
pub use plan::PlanArgs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_PATH: i32 = 2;
pub const EXIT_EXPANSION_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kinoplan",
    version,
    about = "Motion-primitive trajectory planner"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one trajectory on a map.
    Plan(PlanArgs),
    /// Run cases under every heuristic and report statistics.
    Bench(BenchArgs),
    /// Write a seeded random occupancy grid.
    Genmap(GenmapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeuristicArg {
    Zero,
    Maxspeed,
    Lqmt,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Zero => Heuristic::Zero,
            HeuristicArg::Maxspeed => Heuristic::MaxSpeed,
            HeuristicArg::Lqmt => Heuristic::Lqmt,
        }
    }
}

/// Planner settings shared by `plan` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct PlannerArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub order: u8,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub umax: f64,
    #[arg(long, default_value_t = 1)]
    pub mu: u32,
    #[arg(long)]
    pub vmax: Option<f64>,
    #[arg(long)]
    pub amax: Option<f64>,
    #[arg(long)]
    pub jmax: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    #[arg(long, default_value_t = 0.5)]
    pub goal_tol: f64,
    /// Require zero velocity and higher derivatives at the goal.
    #[arg(long)]
    pub goal_rest: bool,
    /// Treat unknown cells as free.
    #[arg(long)]
    pub unknown_free: bool,
    #[arg(long, default_value_t = 100_000)]
    pub max_expansions: usize,
    /// Report zero planning time so output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

impl PlannerArgs {
    pub fn config(&self, dims: usize, heuristic: Heuristic) -> Result<PlannerConfig, String> {
        let control_set = ControlSet::new(self.umax, self.mu, dims).map_err(|e| e.to_string())?;
        let cfg = PlannerConfig {
            order: self.order as usize,
            tau: self.tau,
            rho: self.rho,
            control_set,
            bounds: DynBounds {
                v_max: self.vmax,
                a_max: self.amax,
                j_max: self.jmax,
            },
            goal_pos_tol: self.goal_tol,
            goal_requires_rest: self.goal_rest,
            heuristic,
            heuristic_weight: self.weight,
            max_expansions: self.max_expansions,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Parses `n` comma-separated reals.
pub(crate) fn parse_reals(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse '{}' as a number", t.trim()))
        })
        .collect()
}

pub(crate) fn status_code(status: PlanStatus) -> i32 {
    match status {
        PlanStatus::Solved => EXIT_OK,
        PlanStatus::NoPath => EXIT_NO_PATH,
        PlanStatus::ExpansionLimit => EXIT_EXPANSION_LIMIT,
    }
}

/// `status cost expanded seconds`; unsolved plans report an infinite cost.
pub fn summary_line(r: &PlanResult, timing: bool) -> String {
    let cost = if r.status == PlanStatus::Solved {
        format!("{:.6}", r.total_cost)
    } else {
        "inf".to_string()
    };
    let secs = if timing { r.planning_seconds } else { 0.0 };
    format!("{} {} {} {:.6}", r.status.name(), cost, r.expanded, secs)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Plan(a) => plan::run(a, out, err),
        Command::Bench(a) => bench::run(a, out, err),
        Command::Genmap(a) => genmap::run(a, out),
    };
    result.unwrap_or_else(|msg| {
        let _ = writeln!(err, "error: {msg}");
        EXIT_USAGE
    })
}
