//! Seeded random maps and planning problems used by the benchmark harness and
//! the test suite.

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridmap::{Cell, DynBounds, OccupancyGrid};
use crate::lattice::ControlSet;
use crate::lti::State;
use crate::search::{GoalSpec, Heuristic, PlannerConfig};

/// Grid at the origin whose cells are independently occupied with probability `density`.
pub fn random_grid(dims: [usize; 3], resolution: f64, density: f64, seed: u64) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = OccupancyGrid::new(Vector3::zeros(), resolution, dims);
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if rng.gen::<f64>() < density {
                    grid.set([x, y, z], Cell::Occupied);
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone)]
pub struct Case {
    pub id: usize,
    pub grid: OccupancyGrid,
    pub start: State,
    pub goal: GoalSpec,
}

/// `count` random 20x20x1 maps (R = 0.5, density 0.2), each with a start at
/// rest and a goal at the centers of two distinct free cells.
pub fn random_cases(count: usize, seed: u64, order: usize) -> Vec<Case> {
    (0..count)
        .map(|id| {
            let map_seed = seed.wrapping_add(id as u64);
            let grid = random_grid([20, 20, 1], 0.5, 0.2, map_seed);
            let mut free: Vec<[usize; 3]> = (0..20)
                .flat_map(|y| (0..20).map(move |x| [x, y, 0]))
                .filter(|&c| grid.cell(c) == Cell::Free)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(map_seed ^ 0x9e37_79b9_7f4a_7c15);
            free.shuffle(&mut rng);
            let start = State::at_rest(grid.center_of(free[0]), order);
            let goal = GoalSpec::at(grid.center_of(free[1]));
            Case {
                id,
                grid,
                start,
                goal,
            }
        })
        .collect()
}

/// Planner settings used with [`random_cases`]: double integrator, unit
/// controls and durations, `v_max = 2`, goal box half-width 0.5.
pub fn corpus_config(heuristic: Heuristic) -> PlannerConfig {
    PlannerConfig {
        order: 2,
        tau: 1.0,
        rho: 1.0,
        control_set: ControlSet::new(1.0, 1, 2).expect("valid control set"),
        bounds: DynBounds {
            v_max: Some(2.0),
            ..Default::default()
        },
        goal_pos_tol: 0.5,
        goal_requires_rest: false,
        heuristic,
        heuristic_weight: 1.0,
        max_expansions: 1_000_000,
    }
}
