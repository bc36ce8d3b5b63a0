use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use crate::corpus::random_grid;

#[derive(Debug, Clone, Args)]
pub struct GenmapArgs {
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], required = true)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub resolution: f64,
    /// Probability that a cell is occupied.
    #[arg(long)]
    pub density: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &GenmapArgs, out: &mut dyn Write) -> Result<i32, String> {
    if args.dims.contains(&0) {
        return Err("--dims must be positive".into());
    }
    if !(args.resolution > 0.0) || !args.resolution.is_finite() {
        return Err("--resolution must be positive".into());
    }
    if !(0.0..=1.0).contains(&args.density) {
        return Err("--density must lie in [0, 1]".into());
    }
    let dims = [args.dims[0], args.dims[1], args.dims[2]];
    let grid = random_grid(dims, args.resolution, args.density, args.seed);
    grid.save(&args.out)
        .map_err(|e| format!("{}: {e}", args.out.display()))?;
    writeln!(out, "wrote {}", args.out.display()).map_err(|e| e.to_string())?;
    Ok(super::EXIT_OK)
}
