//! A* over the motion-primitive lattice.
//!
//! Nodes carry the exact floating-point state of their cheapest arrival, and
//! lattice keys are only used for duplicate detection, so the returned
//! primitives chain without drift.

use std::cmp::Ordering;
use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use nalgebra::Vector3;
use thiserror::Error;

use crate::gridmap::{check_collision, check_dynamics, DynBounds, OccupancyGrid};
use crate::lattice::{lattice_key, ControlSet, MotionPrimitive};
use crate::lti::{lqmt_region_cost, LtiError, State, TerminalRegion};

/// Tolerance on derivatives when the goal requires coming to rest.
pub const REST_TOL: f64 = 1e-9;
/// Margin by which a new arrival must beat the stored one to reopen a key.
const REOPEN_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("start state is occupied or violates the dynamic bounds")]
    StartInfeasible,
    #[error("the selected heuristic needs a velocity bound")]
    MissingBound,
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    Zero,
    MaxSpeed,
    Lqmt,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::Zero, Heuristic::MaxSpeed, Heuristic::Lqmt];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Zero => "zero",
            Heuristic::MaxSpeed => "maxspeed",
            Heuristic::Lqmt => "lqmt",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub order: usize,
    pub tau: f64,
    pub rho: f64,
    pub control_set: ControlSet,
    pub bounds: DynBounds,
    /// Half-width of the goal box (infinity norm).
    pub goal_pos_tol: f64,
    pub goal_requires_rest: bool,
    pub heuristic: Heuristic,
    pub heuristic_weight: f64,
    pub max_expansions: usize,
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::InvalidConfig(m.to_string()));
        if !(1..=3).contains(&self.order) {
            return bad("order must be 1, 2 or 3");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if !(self.rho >= 0.0) {
            return bad("rho must be non-negative");
        }
        if !(self.goal_pos_tol > 0.0) {
            return bad("goal tolerance must be positive");
        }
        if !(self.heuristic_weight >= 1.0) {
            return bad("heuristic weight must be at least 1");
        }
        if self.bounds.iter().any(|(_, b)| !(b > 0.0)) {
            return bad("dynamic bounds must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl GoalSpec {
    pub fn at(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
        }
    }

    /// The goal as a full state of the given order (higher derivatives zero).
    pub fn state(&self, order: usize) -> State {
        let mut d = vec![Vector3::zeros(); order];
        d[0] = self.position;
        if order > 1 {
            d[1] = self.velocity;
        }
        State::new(d)
    }

    pub fn is_satisfied(&self, s: &State, cfg: &PlannerConfig) -> bool {
        if (s.position() - self.position).amax() > cfg.goal_pos_tol {
            return false;
        }
        !cfg.goal_requires_rest
            || ((s.velocity() - self.velocity).amax() <= REST_TOL
                && (2..s.order()).all(|i| s.deriv(i).amax() <= REST_TOL))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStatus {
    Solved,
    NoPath,
    ExpansionLimit,
}

impl PlanStatus {
    pub fn name(self) -> &'static str {
        match self {
            PlanStatus::Solved => "solved",
            PlanStatus::NoPath => "no_path",
            PlanStatus::ExpansionLimit => "expansion_limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub start: State,
    pub primitives: Vec<MotionPrimitive>,
    pub total_cost: f64,
    pub expanded: usize,
    pub planning_seconds: f64,
    pub status: PlanStatus,
}

impl PlanResult {
    pub fn end_state(&self) -> State {
        self.primitives
            .last()
            .map_or_else(|| self.start.clone(), MotionPrimitive::end_state)
    }

    /// States visited by the plan, start first.
    pub fn states(&self) -> Vec<State> {
        std::iter::once(self.start.clone())
            .chain(self.primitives.iter().map(MotionPrimitive::end_state))
            .collect()
    }
}

/// ∞-norm distance from `p` to the goal box.
fn box_distance(p: &Vector3<f64>, goal: &GoalSpec, tol: f64) -> f64 {
    ((p - goal.position).abs().add_scalar(-tol)).max().max(0.0)
}

/// `rho * d / v_max`, with `d` the ∞-norm distance to the goal box.
pub fn h_max_speed(s: &State, goal: &GoalSpec, cfg: &PlannerConfig) -> Result<f64, PlanError> {
    let v_max = cfg.bounds.v_max.ok_or(PlanError::MissingBound)?;
    Ok(cfg.rho * box_distance(&s.position(), goal, cfg.goal_pos_tol) / v_max)
}

/// Optimal cost of the LQMT relaxation from `s` into the goal region, with the
/// transfer time bounded below by the max-speed arrival time.
pub fn h_lqmt(s: &State, goal: &GoalSpec, cfg: &PlannerConfig) -> Result<f64, PlanError> {
    let t_lower = cfg.bounds.v_max.map_or(0.0, |v| {
        box_distance(&s.position(), goal, cfg.goal_pos_tol) / v
    });
    let region = TerminalRegion {
        center: goal.state(s.order()),
        pos_tol: cfg.goal_pos_tol,
        match_derivatives: cfg.goal_requires_rest,
    };
    Ok(lqmt_region_cost(s, &region, cfg.rho, t_lower)?.cost_total)
}

/// Unweighted value of the configured heuristic.
pub fn heuristic(s: &State, goal: &GoalSpec, cfg: &PlannerConfig) -> Result<f64, PlanError> {
    match cfg.heuristic {
        Heuristic::Zero => Ok(0.0),
        Heuristic::MaxSpeed => h_max_speed(s, goal, cfg),
        Heuristic::Lqmt => h_lqmt(s, goal, cfg),
    }
}

fn collision_speed(prim: &MotionPrimitive, bounds: &DynBounds) -> f64 {
    bounds.v_max.unwrap_or_else(|| prim.peak_abs(1))
}

/// Feasible one-step successors of `s`, in control-set order.
pub fn get_successors(
    s: &State,
    cfg: &PlannerConfig,
    grid: &OccupancyGrid,
) -> Vec<(usize, MotionPrimitive)> {
    cfg.control_set
        .controls()
        .iter()
        .enumerate()
        .filter_map(|(i, &u)| {
            let prim = MotionPrimitive::propagate(s, u, cfg.tau, cfg.rho);
            let ok = check_dynamics(&prim, &cfg.bounds)
                && check_collision(&prim, grid, collision_speed(&prim, &cfg.bounds));
            ok.then_some((i, prim))
        })
        .collect()
}

struct Node {
    state: State,
    g: f64,
    parent: Option<(usize, usize)>,
}

struct OpenEntry {
    f: f64,
    g: f64,
    control: usize,
    seq: usize,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // BinaryHeap pops the greatest element: smallest f, then largest g, then
    // lowest control index, then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.control.cmp(&self.control))
            .then(other.seq.cmp(&self.seq))
    }
}

fn goal_box_meets_grid(goal: &GoalSpec, tol: f64, grid: &OccupancyGrid) -> bool {
    let (lo, hi) = (grid.origin(), grid.upper());
    (0..3).all(|a| goal.position[a] + tol >= lo[a] && goal.position[a] - tol < hi[a])
}

pub fn plan(
    start: &State,
    goal: &GoalSpec,
    cfg: &PlannerConfig,
    grid: &OccupancyGrid,
) -> Result<PlanResult, PlanError> {
    let clock = Instant::now();
    cfg.validate()?;
    if start.order() != cfg.order {
        return Err(PlanError::InvalidConfig(format!(
            "start state has order {}, planner order is {}",
            start.order(),
            cfg.order
        )));
    }
    if cfg.heuristic == Heuristic::MaxSpeed && cfg.bounds.v_max.is_none() {
        return Err(PlanError::MissingBound);
    }
    if cfg.heuristic == Heuristic::Lqmt && !(cfg.rho > 0.0) {
        return Err(LtiError::NoFiniteMinimum(cfg.rho).into());
    }
    if !grid.is_free(&start.position()) || !cfg.bounds.admits_state(start) {
        return Err(PlanError::StartInfeasible);
    }

    let finish = |primitives: Vec<MotionPrimitive>, expanded, status| {
        let total_cost = primitives.iter().map(MotionPrimitive::cost).sum();
        PlanResult {
            start: start.clone(),
            primitives,
            total_cost,
            expanded,
            planning_seconds: clock.elapsed().as_secs_f64(),
            status,
        }
    };
    if !goal_box_meets_grid(goal, cfg.goal_pos_tol, grid) {
        return Ok(finish(Vec::new(), 0, PlanStatus::NoPath));
    }

    let du = cfg.control_set.step();
    let h = |s: &State| heuristic(s, goal, cfg).map(|v| v * cfg.heuristic_weight);

    let mut nodes = vec![Node {
        state: start.clone(),
        g: 0.0,
        parent: None,
    }];
    let mut best = HashMap::new();
    best.insert(lattice_key(start, du, cfg.tau, start), 0usize);
    let mut open = BinaryHeap::new();
    open.push(OpenEntry {
        f: h(start)?,
        g: 0.0,
        control: 0,
        seq: 0,
        node: 0,
    });
    let mut seq = 1;
    let mut expanded = 0;

    while let Some(entry) = open.pop() {
        let key = lattice_key(&nodes[entry.node].state, du, cfg.tau, start);
        if best.get(&key) != Some(&entry.node) {
            continue;
        }
        if goal.is_satisfied(&nodes[entry.node].state, cfg) {
            return Ok(finish(
                reconstruct(&nodes, entry.node, cfg),
                expanded,
                PlanStatus::Solved,
            ));
        }
        if expanded >= cfg.max_expansions {
            return Ok(finish(Vec::new(), expanded, PlanStatus::ExpansionLimit));
        }
        expanded += 1;

        let g0 = nodes[entry.node].g;
        for (ci, prim) in get_successors(&nodes[entry.node].state, cfg, grid) {
            let g = g0 + prim.cost();
            let end = prim.end_state();
            let k = lattice_key(&end, du, cfg.tau, start);
            let id = nodes.len();
            match best.entry(k) {
                MapEntry::Occupied(mut e) => {
                    if g >= nodes[*e.get()].g - REOPEN_MARGIN {
                        continue;
                    }
                    e.insert(id);
                }
                MapEntry::Vacant(e) => {
                    e.insert(id);
                }
            }
            let f = g + h(&end)?;
            nodes.push(Node {
                state: end,
                g,
                parent: Some((entry.node, ci)),
            });
            open.push(OpenEntry {
                f,
                g,
                control: ci,
                seq,
                node: id,
            });
            seq += 1;
        }
    }
    Ok(finish(Vec::new(), expanded, PlanStatus::NoPath))
}

fn reconstruct(nodes: &[Node], mut id: usize, cfg: &PlannerConfig) -> Vec<MotionPrimitive> {
    let mut chain = Vec::new();
    while let Some((parent, ci)) = nodes[id].parent {
        chain.push((parent, ci));
        id = parent;
    }
    chain
        .into_iter()
        .rev()
        .map(|(parent, ci)| {
            MotionPrimitive::propagate(
                &nodes[parent].state,
                cfg.control_set.controls()[ci],
                cfg.tau,
                cfg.rho,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::Cell;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn config(heuristic: Heuristic) -> PlannerConfig {
        PlannerConfig {
            order: 2,
            tau: 1.0,
            rho: 1.0,
            control_set: ControlSet::new(1.0, 1, 2).unwrap(),
            bounds: DynBounds {
                v_max: Some(2.0),
                ..Default::default()
            },
            goal_pos_tol: 0.25,
            goal_requires_rest: false,
            heuristic,
            heuristic_weight: 1.0,
            max_expansions: 100_000,
        }
    }

    fn open_grid() -> OccupancyGrid {
        OccupancyGrid::new(v(-10.0, -10.0, -0.5), 0.5, [40, 40, 2])
    }

    #[test]
    fn successors_on_open_grid() {
        let cfg = config(Heuristic::Zero);
        let s = State::zeros(2);
        assert_eq!(get_successors(&s, &cfg, &open_grid()).len(), 9);
    }

    #[test]
    fn enclosed_start_only_coasts() {
        let mut grid = OccupancyGrid::new(Vector3::zeros(), 1.0, [3, 3, 1]);
        for x in 0..3 {
            for y in 0..3 {
                if (x, y) != (1, 1) {
                    grid.set([x, y, 0], Cell::Occupied);
                }
            }
        }
        let mut cfg = config(Heuristic::Zero);
        cfg.tau = 1.5;
        let s = State::at_rest(v(1.5, 1.5, 0.5), 2);
        let succ = get_successors(&s, &cfg, &grid);
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1.control(), Vector3::zeros());
    }

    #[test]
    fn speed_limit_prunes_accelerating_controls() {
        let cfg = config(Heuristic::Zero);
        let s = State::new(vec![Vector3::zeros(), v(2.0, 0.0, 0.0)]);
        let succ = get_successors(&s, &cfg, &open_grid());
        assert_eq!(succ.len(), 6);
        assert!(succ.iter().all(|(_, p)| p.control().x <= 0.0));
    }

    #[test]
    fn max_speed_examples() {
        let mut cfg = config(Heuristic::MaxSpeed);
        cfg.goal_pos_tol = 0.0;
        let g = GoalSpec::at(v(3.0, 4.0, 0.0));
        assert_eq!(h_max_speed(&State::zeros(2), &g, &cfg).unwrap(), 2.0);
        assert_eq!(h_max_speed(&g.state(2), &g, &cfg).unwrap(), 0.0);
        cfg.rho = 0.0;
        assert_eq!(h_max_speed(&State::zeros(2), &g, &cfg).unwrap(), 0.0);
        cfg.bounds.v_max = None;
        assert_eq!(
            h_max_speed(&State::zeros(2), &g, &cfg),
            Err(PlanError::MissingBound)
        );
    }

    #[test]
    fn lqmt_examples() {
        let mut cfg = config(Heuristic::Lqmt);
        cfg.goal_pos_tol = 0.0;
        cfg.goal_requires_rest = true;
        cfg.rho = 36.0;
        cfg.bounds.v_max = Some(1e6);
        let g = GoalSpec::at(v(1.0, 0.0, 0.0));
        assert_eq!(h_lqmt(&g.state(2), &g, &cfg).unwrap(), 0.0);
        let h = h_lqmt(&State::zeros(2), &g, &cfg).unwrap();
        assert!((h - 48.0).abs() < 1e-9, "{h}");
    }

    #[test]
    fn open_grid_plan_costs_four() {
        let cfg = config(Heuristic::Lqmt);
        let start = State::zeros(2);
        let r = plan(&start, &GoalSpec::at(v(2.0, 0.0, 0.0)), &cfg, &open_grid()).unwrap();
        assert_eq!(r.status, PlanStatus::Solved);
        assert_eq!(r.total_cost, 4.0);
        let us: Vec<_> = r.primitives.iter().map(MotionPrimitive::control).collect();
        assert_eq!(us, vec![v(1.0, 0.0, 0.0), v(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn walled_goal_has_no_path() {
        let mut grid = OccupancyGrid::new(Vector3::zeros(), 0.5, [12, 12, 1]);
        for i in 6..12 {
            grid.set([i, 6, 0], Cell::Occupied);
            grid.set([6, i, 0], Cell::Occupied);
        }
        let cfg = config(Heuristic::MaxSpeed);
        let start = State::at_rest(v(1.25, 1.25, 0.25), 2);
        let r = plan(&start, &GoalSpec::at(v(5.0, 5.0, 0.25)), &cfg, &grid).unwrap();
        assert_eq!(r.status, PlanStatus::NoPath);
        assert!(r.primitives.is_empty());
    }

    #[test]
    fn goal_outside_map_has_no_path() {
        let cfg = config(Heuristic::Zero);
        let r = plan(
            &State::zeros(2),
            &GoalSpec::at(v(100.0, 0.0, 0.0)),
            &cfg,
            &open_grid(),
        )
        .unwrap();
        assert_eq!((r.status, r.expanded), (PlanStatus::NoPath, 0));
    }

    #[test]
    fn start_in_goal_is_empty_plan() {
        let cfg = config(Heuristic::Lqmt);
        let r = plan(
            &State::zeros(2),
            &GoalSpec::at(Vector3::zeros()),
            &cfg,
            &open_grid(),
        )
        .unwrap();
        assert_eq!(r.status, PlanStatus::Solved);
        assert_eq!(r.total_cost, 0.0);
        assert!(r.primitives.is_empty());
    }

    #[test]
    fn occupied_start_is_rejected() {
        let mut grid = open_grid();
        grid.set([20, 20, 1], Cell::Occupied);
        let cfg = config(Heuristic::Zero);
        let err = plan(
            &State::zeros(2),
            &GoalSpec::at(v(1.0, 0.0, 0.0)),
            &cfg,
            &grid,
        );
        assert_eq!(err.unwrap_err(), PlanError::StartInfeasible);
    }

    #[test]
    fn expansion_limit() {
        let mut cfg = config(Heuristic::Zero);
        cfg.max_expansions = 3;
        let r = plan(
            &State::zeros(2),
            &GoalSpec::at(v(6.0, 6.0, 0.0)),
            &cfg,
            &open_grid(),
        )
        .unwrap();
        assert_eq!(r.status, PlanStatus::ExpansionLimit);
        assert_eq!(r.expanded, 3);
    }
}
