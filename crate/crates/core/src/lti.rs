//! Chain-of-integrators dynamics `x' = A x + B u` for control order `n` in `1..=3`,
//! the controllability Gramian, and the Linear Quadratic Minimum-Time (LQMT)
//! boundary-value problem.
//!
//! States stack position and its derivatives, `[p; v; a; ...]`, each a 3-vector.
//! The axes decouple exactly, so every solve below works on one `n x n` scalar
//! system per axis instead of the full `3n x 3n` matrices.
//!
//! Gramian blocks are monomials in `T`, which lets every solve factor the time
//! scale out analytically: `W(T) = T * S * W1 * S` with `S = diag(T^(n-1-i))`
//! and `W1` the constant Gramian at `T = 1`.

use nalgebra::{DMatrix, DVector, Vector3};
use thiserror::Error;

use crate::poly::{Poly1, DEFAULT_ROOT_TOL};

/// Fixed-time solves below this duration are refused.
pub const MIN_DURATION: f64 = 1e-6;

const GOLDEN_REL_TOL: f64 = 1e-8;
const GOLDEN_MAX_ITER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtiError {
    #[error("control order {0} is not supported (expected 1, 2 or 3)")]
    InvalidOrder(usize),
    #[error("boundary states have different orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("duration {0} s is below the Gramian conditioning threshold")]
    SingularGramian(f64),
    #[error("rho = {0}: the free-final-time cost has no finite minimizer unless rho > 0")]
    NoFiniteMinimum(f64),
}

/// Which derivative of position is the control input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemOrder(usize);

impl SystemOrder {
    pub const VELOCITY: Self = Self(1);
    pub const ACCELERATION: Self = Self(2);
    pub const JERK: Self = Self(3);

    pub fn new(n: usize) -> Result<Self, LtiError> {
        if (1..=3).contains(&n) {
            Ok(Self(n))
        } else {
            Err(LtiError::InvalidOrder(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Position and its first `order - 1` derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    derivs: Vec<Vector3<f64>>,
}

impl State {
    /// Panics on an empty derivative list.
    pub fn new(derivs: Vec<Vector3<f64>>) -> Self {
        assert!(!derivs.is_empty(), "a state needs at least a position");
        Self { derivs }
    }

    pub fn zeros(order: usize) -> Self {
        Self::new(vec![Vector3::zeros(); order])
    }

    /// Position `p` with every derivative zero.
    pub fn at_rest(p: Vector3<f64>, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.derivs[0] = p;
        s
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }

    pub fn derivs(&self) -> &[Vector3<f64>] {
        &self.derivs
    }

    /// Derivative `i` (0 = position); zero past the state's order.
    pub fn deriv(&self, i: usize) -> Vector3<f64> {
        self.derivs.get(i).copied().unwrap_or_else(Vector3::zeros)
    }

    pub fn position(&self) -> Vector3<f64> {
        self.derivs[0]
    }

    pub fn velocity(&self) -> Vector3<f64> {
        self.deriv(1)
    }

    /// Truncates or zero-pads to `order`.
    pub fn resized(&self, order: usize) -> Self {
        Self::new((0..order).map(|i| self.deriv(i)).collect())
    }

    /// Derivatives `0..order` of one axis.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.derivs.iter().map(|d| d[axis]).collect()
    }

    /// Stacked `[p; v; ...]` vector of length `3 * order`.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            3 * self.order(),
            self.derivs.iter().flat_map(|d| d.iter().copied()),
        )
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        assert!(v.len().is_multiple_of(3) && !v.is_empty());
        Self::new(
            (0..v.len() / 3)
                .map(|i| Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2]))
                .collect(),
        )
    }

    /// Largest absolute component difference; orders are compared after zero-padding.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        let n = self.order().max(other.order());
        (0..n)
            .map(|i| (self.deriv(i) - other.deriv(i)).amax())
            .fold(0.0, f64::max)
    }
}

/// Boundary states and a fixed transfer time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPair {
    pub x0: State,
    pub xf: State,
    pub duration: f64,
}

impl BoundaryPair {
    pub fn new(x0: State, xf: State, duration: f64) -> Result<Self, LtiError> {
        if x0.order() != xf.order() {
            return Err(LtiError::OrderMismatch(x0.order(), xf.order()));
        }
        SystemOrder::new(x0.order())?;
        Ok(Self { x0, xf, duration })
    }
}

/// Minimum-effort trajectory between two states.
#[derive(Debug, Clone, PartialEq)]
pub struct LqmtSolution {
    /// Position polynomial of degree `2n - 1` per axis.
    pub axes: [Poly1; 3],
    /// `∫ ||u||^2 dt`.
    pub cost_effort: f64,
    /// `cost_effort + rho * duration`.
    pub cost_total: f64,
    pub duration: f64,
    pub order: SystemOrder,
}

impl LqmtSolution {
    /// Control input polynomials, `p^(n)(t)` per axis.
    pub fn control(&self) -> [Poly1; 3] {
        let n = self.order.get();
        [0, 1, 2].map(|a| self.axes[a].derivative(n))
    }

    pub fn state_at(&self, t: f64) -> State {
        State::new(
            (0..self.order.get())
                .map(|i| Vector3::from_fn(|a, _| self.axes[a].derivative(i).eval(t)))
                .collect(),
        )
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `k! / (k - i)!`
fn falling(k: usize, i: usize) -> f64 {
    ((k - i + 1)..=k).map(|j| j as f64).product()
}

/// `F(t) = e^{At}` and `G(t) = ∫_0^t e^{A(t-s)} B ds`.
pub fn state_transition(order: SystemOrder, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = order.get();
    let mut f = DMatrix::zeros(3 * n, 3 * n);
    let mut g = DMatrix::zeros(3 * n, 3);
    for i in 0..n {
        for j in i..n {
            let c = t.powi((j - i) as i32) / factorial(j - i);
            for a in 0..3 {
                f[(3 * i + a, 3 * j + a)] = c;
            }
        }
        let c = t.powi((n - i) as i32) / factorial(n - i);
        for a in 0..3 {
            g[(3 * i + a, a)] = c;
        }
    }
    (f, g)
}

/// Per-axis `n x n` Gramian `∫_0^T e^{At} b b^T e^{A^T t} dt`, position row first.
pub fn scalar_gramian(order: SystemOrder, duration: f64) -> DMatrix<f64> {
    let n = order.get();
    let unit = unit_gramian(n);
    DMatrix::from_fn(n, n, |i, j| {
        unit[(i, j)] * duration.powi((2 * n - 1 - i - j) as i32)
    })
}

/// Full `3n x 3n` Gramian; block `(i, j)` is `W_ij * I_3`.
pub fn gramian(order: SystemOrder, duration: f64) -> DMatrix<f64> {
    let n = order.get();
    let w = scalar_gramian(order, duration);
    DMatrix::from_fn(3 * n, 3 * n, |r, c| {
        if r % 3 == c % 3 {
            w[(r / 3, c / 3)]
        } else {
            0.0
        }
    })
}

/// Gramian at `T = 1`: `1 / (e_i! e_j! (e_i + e_j + 1))` with `e_i = n - 1 - i`.
fn unit_gramian(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let (ei, ej) = (n - 1 - i, n - 1 - j);
        1.0 / (factorial(ei) * factorial(ej) * (ei + ej + 1) as f64)
    })
}

/// Inverse of the unit Gramian restricted to the index set `idx`.
fn unit_gramian_inverse(n: usize, idx: &[usize]) -> DMatrix<f64> {
    let full = unit_gramian(n);
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]);
    if idx.is_empty() {
        return sub;
    }
    sub.try_inverse()
        .expect("unit Gramian blocks are positive definite")
}

/// `(F(T) x0)` for one axis, as polynomials in `T`, one per derivative order.
fn free_response(x0_axis: &[f64]) -> Vec<Poly1> {
    let n = x0_axis.len();
    (0..n)
        .map(|j| Poly1::new((j..n).map(|k| x0_axis[k] / factorial(k - j)).collect()))
        .collect()
}

fn check_pair(x0: &State, xf: &State) -> Result<SystemOrder, LtiError> {
    if x0.order() != xf.order() {
        return Err(LtiError::OrderMismatch(x0.order(), xf.order()));
    }
    SystemOrder::new(x0.order())
}

/// Effort `δ_T^T W_T^{-1} δ_T` of the fixed-time minimum-effort transfer.
pub fn lqmt_effort(x0: &State, xf: &State, duration: f64) -> Result<f64, LtiError> {
    let order = check_pair(x0, xf)?;
    if !(duration >= MIN_DURATION) {
        return Err(LtiError::SingularGramian(duration));
    }
    let n = order.get();
    let idx: Vec<usize> = (0..n).collect();
    let k = unit_gramian_inverse(n, &idx);
    Ok(effort_with(&k, n, x0, xf, duration))
}

fn effort_with(k: &DMatrix<f64>, n: usize, x0: &State, xf: &State, t: f64) -> f64 {
    let mut total = 0.0;
    for a in 0..3 {
        let free = free_response(&x0.axis(a));
        let delta: Vec<f64> = (0..n).map(|j| xf.derivs[j][a] - free[j].eval(t)).collect();
        for i in 0..n {
            for j in 0..n {
                let e = (2 * n - 1 - i - j) as i32;
                total += k[(i, j)] * delta[i] * delta[j] / t.powi(e);
            }
        }
    }
    total
}

/// Unconstrained minimum-effort trajectory through `x0` at `t = 0` and `xf` at `t = T`.
pub fn lqmt_fixed_time(bp: &BoundaryPair, rho: f64) -> Result<LqmtSolution, LtiError> {
    let order = check_pair(&bp.x0, &bp.xf)?;
    let t = bp.duration;
    if !(t >= MIN_DURATION) {
        return Err(LtiError::SingularGramian(t));
    }
    let n = order.get();
    // Time-normalized coefficients ĉ_k = c_k T^k turn the end conditions into a
    // constant matrix k!/(k-i)!.
    let m = DMatrix::from_fn(n, n, |i, c| falling(n + c, i));
    let lu = m.lu();
    let axes = [0, 1, 2].map(|a| {
        let x0 = bp.x0.axis(a);
        let xf = bp.xf.axis(a);
        let mut chat: Vec<f64> = (0..n)
            .map(|k| x0[k] * t.powi(k as i32) / factorial(k))
            .collect();
        let rhs = DVector::from_fn(n, |i, _| {
            let known: f64 = (i..n).map(|k| chat[k] * falling(k, i)).sum();
            xf[i] * t.powi(i as i32) - known
        });
        let upper = lu.solve(&rhs).expect("end-condition matrix is invertible");
        chat.extend(upper.iter());
        Poly1::new(
            chat.iter()
                .enumerate()
                .map(|(k, c)| c / t.powi(k as i32))
                .collect(),
        )
    });
    let cost_effort = lqmt_effort(&bp.x0, &bp.xf, t)?;
    Ok(LqmtSolution {
        axes,
        cost_effort,
        cost_total: cost_effort + rho * t,
        duration: t,
        order,
    })
}

/// True when `F(T) x0 = xf` for every `T`, i.e. nothing to do but wait.
fn is_stationary_match(x0: &State, xf: &State) -> bool {
    x0.derivs[1..].iter().all(|d| *d == Vector3::zeros()) && x0 == xf
}

fn stationary_solution(x0: &State, rho: f64, t: f64) -> LqmtSolution {
    let order = SystemOrder(x0.order());
    LqmtSolution {
        axes: [0, 1, 2].map(|a| Poly1::constant(x0.derivs[0][a])),
        cost_effort: 0.0,
        cost_total: rho * t,
        duration: t,
        order,
    }
}

fn total_cost(x0: &State, xf: &State, rho: f64, t: f64) -> f64 {
    lqmt_effort(x0, xf, t).map_or(f64::INFINITY, |e| e + rho * t)
}

/// Coefficients `[c0, c1, c2, c3, c4]` of `dC*/dT * T^4 = 0` for acceleration control.
pub fn acceleration_time_quartic(x0: &State, xf: &State, rho: f64) -> [f64; 5] {
    let dp = xf.position() - x0.position();
    let (v0, vf) = (x0.velocity(), xf.velocity());
    [
        -36.0 * dp.norm_squared(),
        24.0 * (v0 + vf).dot(&dp),
        -4.0 * (v0.norm_squared() + v0.dot(&vf) + vf.norm_squared()),
        0.0,
        rho,
    ]
}

fn argmin_over(candidates: &[f64], f: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    candidates
        .iter()
        .map(|&t| (t, f(t)))
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
}

fn quartic_candidates(coeffs: &[f64], lower: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Poly1::new(coeffs.to_vec())
        .real_roots(DEFAULT_ROOT_TOL)
        .unwrap_or_default()
        .into_iter()
        .filter(|&t| t >= lower && t >= MIN_DURATION)
        .collect();
    if lower >= MIN_DURATION {
        out.push(lower);
    }
    out
}

/// Free-final-time LQMT with `T >= t_lower`.
///
/// Velocity control uses the closed form, acceleration control the roots of the
/// stationarity quartic, jerk control the roots of the general stationarity
/// polynomial together with a bracketed golden-section search.
pub fn lqmt_optimal_time(
    x0: &State,
    xf: &State,
    rho: f64,
    t_lower: f64,
) -> Result<LqmtSolution, LtiError> {
    if !(rho > 0.0) {
        return Err(LtiError::NoFiniteMinimum(rho));
    }
    let order = check_pair(x0, xf)?;
    let t_lower = t_lower.max(0.0);
    if is_stationary_match(x0, xf) {
        return if t_lower >= MIN_DURATION {
            lqmt_fixed_time(&BoundaryPair::new(x0.clone(), xf.clone(), t_lower)?, rho)
        } else {
            Ok(stationary_solution(x0, rho, t_lower))
        };
    }
    let t_star = match order.get() {
        1 => {
            let dist = (xf.position() - x0.position()).norm();
            t_lower.max(dist / rho.sqrt()).max(MIN_DURATION)
        }
        2 => {
            let coeffs = acceleration_time_quartic(x0, xf, rho);
            let cands = quartic_candidates(&coeffs, t_lower);
            let (best, _) = argmin_over(&cands, |t| total_cost(x0, xf, rho, t))
                .unwrap_or((t_lower.max(MIN_DURATION), f64::NAN));
            let mut alt = coeffs;
            alt[0] = -3.0 * (xf.position() - x0.position()).norm_squared();
            let alt_cands = quartic_candidates(&alt, t_lower);
            if let Some((alt_best, _)) = argmin_over(&alt_cands, |t| total_cost(x0, xf, rho, t)) {
                if (alt_best - best).abs() > 1e-9 * (1.0 + best) {
                    log::debug!(
                        "quartic variants disagree: derived T* = {best}, c0 = -3|dp|^2 gives {alt_best}"
                    );
                }
            }
            best
        }
        _ => {
            // C*(T) need not be unimodal here, so the bracketed search alone
            // can stop at a local minimum. Every stationary point is a root
            // of a polynomial; the bracketed result is kept as a candidate.
            let mut cands = stationary_times(x0, xf, rho, t_lower);
            cands.push(minimize_time_numeric(x0, xf, rho, t_lower)?);
            argmin_over(&cands, |t| total_cost(x0, xf, rho, t))
                .map(|(t, _)| t)
                .expect("candidate set is non-empty")
        }
    };
    lqmt_fixed_time(&BoundaryPair::new(x0.clone(), xf.clone(), t_star)?, rho)
}

/// `t_lower` (when positive) and every root above it of
/// `N'(T) T - (2n-1) N(T) + rho T^(2n)`, where `C*(T) = N(T) / T^(2n-1) + rho T`.
fn stationary_times(x0: &State, xf: &State, rho: f64, t_lower: f64) -> Vec<f64> {
    let n = x0.order();
    let idx: Vec<usize> = (0..n).collect();
    let k = unit_gramian_inverse(n, &idx);
    let total = (0..3).fold(Poly1::zero(), |acc, a| {
        let free = free_response(&x0.axis(a));
        let deltas: Vec<Poly1> = (0..n)
            .map(|j| &Poly1::constant(xf.derivs[j][a]) - &free[j])
            .collect();
        &acc + &numerator(n, &idx, &k, &deltas)
    });
    let m = (2 * n - 1) as f64;
    let stationary =
        &(&total.derivative(1).shift_up(1) - &total.scale(m)) + &Poly1::monomial(rho, 2 * n);
    let lo = t_lower.max(MIN_DURATION);
    let mut out = vec![lo];
    if let Ok(roots) = stationary.real_roots(DEFAULT_ROOT_TOL) {
        out.extend(roots.into_iter().filter(|&t| t > lo));
    }
    out
}

/// Minimizes `C*(T) = effort(T) + rho T` over `T >= t_lower` by doubling from the
/// lower bound until the cost rises, then golden-section search on the bracket.
pub fn minimize_time_numeric(
    x0: &State,
    xf: &State,
    rho: f64,
    t_lower: f64,
) -> Result<f64, LtiError> {
    if !(rho > 0.0) {
        return Err(LtiError::NoFiniteMinimum(rho));
    }
    check_pair(x0, xf)?;
    let f = |t: f64| total_cost(x0, xf, rho, t);
    let lo = t_lower.max(MIN_DURATION);
    let (mut a, mut b) = (lo, lo);
    let mut fb = f(b);
    let mut c = 2.0 * b;
    let mut fc = f(c);
    let mut guard = 0;
    while fc < fb && guard < 2000 {
        a = b;
        b = c;
        fb = fc;
        c *= 2.0;
        fc = f(c);
        guard += 1;
    }
    let t = golden_section(&f, a, c);
    Ok(if f(lo) <= f(t) { lo } else { t })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_MAX_ITER {
        if b - a <= GOLDEN_REL_TOL * 0.5 * (a.abs() + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Set of admissible final states: position within an axis-aligned box of
/// half-width `pos_tol` around `center`; higher derivatives either pinned to the
/// center's or left free.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalRegion {
    pub center: State,
    pub pos_tol: f64,
    pub match_derivatives: bool,
}

impl TerminalRegion {
    /// Whether `x` already lies in the region.
    pub fn contains(&self, x: &State, deriv_tol: f64) -> bool {
        let pos_ok = (x.position() - self.center.position()).amax() <= self.pos_tol;
        pos_ok
            && (!self.match_derivatives
                || (1..x.order()).all(|i| (x.deriv(i) - self.center.deriv(i)).amax() <= deriv_tol))
    }
}

/// Optimal value of the LQMT relaxation to a terminal region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCost {
    pub cost_total: f64,
    pub duration: f64,
}

/// Per-axis pieces of the region cost, all polynomials in the transfer time `T`.
struct AxisCost {
    lo: f64,
    hi: f64,
    /// Minimizing final position when the box is ignored.
    best_final: Poly1,
    /// Cost numerators `N(T)` (cost = `N / T^(2n-1)`) for final position pinned at lo / hi.
    at_lo: Poly1,
    at_hi: Poly1,
    /// Numerator when the box constraint is inactive.
    inside: Poly1,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Regime {
    Lo,
    Inside,
    Hi,
}

impl AxisCost {
    fn regime(&self, t: f64) -> Regime {
        let p = self.best_final.eval(t);
        if p < self.lo {
            Regime::Lo
        } else if p > self.hi {
            Regime::Hi
        } else {
            Regime::Inside
        }
    }

    fn numerator(&self, r: Regime) -> &Poly1 {
        match r {
            Regime::Lo => &self.at_lo,
            Regime::Hi => &self.at_hi,
            Regime::Inside => &self.inside,
        }
    }
}

/// `N(T) = Σ K_jk δ_j δ_k T^(2n-2-e_j-e_k)` over the constrained index set.
fn numerator(n: usize, idx: &[usize], k: &DMatrix<f64>, deltas: &[Poly1]) -> Poly1 {
    let mut acc = Poly1::zero();
    for (r, &j) in idx.iter().enumerate() {
        for (c, &l) in idx.iter().enumerate() {
            let shift = 2 * n - 2 - (n - 1 - j) - (n - 1 - l);
            let term = (&deltas[j] * &deltas[l]).scale(k[(r, c)]).shift_up(shift);
            acc = &acc + &term;
        }
    }
    acc
}

fn axis_cost(n: usize, x0: &[f64], region: &TerminalRegion, axis: usize) -> AxisCost {
    let free = free_response(x0);
    let goal = region.center.axis(axis);
    let deltas_for = |pos: f64| -> Vec<Poly1> {
        (0..n)
            .map(|j| {
                let target = if j == 0 { pos } else { goal[j] };
                &Poly1::constant(target) - &free[j]
            })
            .collect()
    };
    let rest: Vec<usize> = if region.match_derivatives {
        (1..n).collect()
    } else {
        Vec::new()
    };
    let with_pos: Vec<usize> = std::iter::once(0).chain(rest.iter().copied()).collect();
    let k_pos = unit_gramian_inverse(n, &with_pos);
    let k_rest = unit_gramian_inverse(n, &rest);
    let lo = goal[0] - region.pos_tol;
    let hi = goal[0] + region.pos_tol;

    // Unconstrained final position: δ_0* = -Σ_r (K_0r / K_00) T^r δ_r.
    let mut best_final = free[0].clone();
    if !rest.is_empty() {
        let deltas = deltas_for(0.0);
        for (c, &r) in with_pos.iter().enumerate().skip(1) {
            let term = deltas[r].shift_up(r).scale(-k_pos[(0, c)] / k_pos[(0, 0)]);
            best_final = &best_final + &term;
        }
    }
    AxisCost {
        lo,
        hi,
        best_final,
        at_lo: numerator(n, &with_pos, &k_pos, &deltas_for(lo)),
        at_hi: numerator(n, &with_pos, &k_pos, &deltas_for(hi)),
        inside: numerator(n, &rest, &k_rest, &deltas_for(0.0)),
    }
}

/// Exact global minimum over `T >= t_lower` of the relaxed cost
/// `min_{xf in region} δ_T^T W_T^{-1} δ_T + rho T`.
///
/// Per axis the optimal final position is the box projection of an
/// unconstrained optimum that is polynomial in `T`; between the times where it
/// crosses a box face the total cost is `N(T) / T^(2n-1) + rho T` with `N`
/// polynomial, so every interior minimizer is a root of
/// `N'(T) T - (2n-1) N(T) + rho T^(2n)`.
pub fn lqmt_region_cost(
    x0: &State,
    region: &TerminalRegion,
    rho: f64,
    t_lower: f64,
) -> Result<RegionCost, LtiError> {
    if !(rho > 0.0) {
        return Err(LtiError::NoFiniteMinimum(rho));
    }
    let order = check_pair(x0, &region.center)?;
    let n = order.get();
    let t_lower = t_lower.max(0.0);
    if t_lower == 0.0 && region.contains(x0, 0.0) {
        return Ok(RegionCost {
            cost_total: 0.0,
            duration: 0.0,
        });
    }
    let axes: Vec<AxisCost> = (0..3)
        .map(|a| axis_cost(n, &x0.axis(a), region, a))
        .collect();
    let m = (2 * n - 1) as i32;
    let cost_at = |t: f64| -> f64 {
        if t <= 0.0 {
            return f64::INFINITY;
        }
        let num: f64 = axes
            .iter()
            .map(|ax| ax.numerator(ax.regime(t)).eval(t))
            .sum();
        num / t.powi(m) + rho * t
    };

    let mut knots = vec![t_lower];
    for ax in &axes {
        for bound in [ax.lo, ax.hi] {
            let p = &ax.best_final - &Poly1::constant(bound);
            if let Ok(roots) = p.real_roots(DEFAULT_ROOT_TOL) {
                knots.extend(roots.into_iter().filter(|&t| t > t_lower));
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut candidates: Vec<f64> = knots.iter().copied().filter(|&t| t > 0.0).collect();
    let rho_term = Poly1::monomial(rho, 2 * n);
    for (i, &a) in knots.iter().enumerate() {
        let b = knots.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let probe = if b.is_finite() {
            0.5 * (a + b)
        } else {
            2.0 * a + 1.0
        };
        let total = axes.iter().fold(Poly1::zero(), |acc, ax| {
            &acc + ax.numerator(ax.regime(probe))
        });
        let stationary = &(&total.derivative(1).shift_up(1) - &total.scale(m as f64)) + &rho_term;
        if let Ok(roots) = stationary.real_roots(DEFAULT_ROOT_TOL) {
            candidates.extend(roots.into_iter().filter(|&t| t > a && t < b && t > 0.0));
        }
    }
    let (duration, cost_total) =
        argmin_over(&candidates, cost_at).expect("rho > 0 guarantees a finite interior minimizer");
    Ok(RegionCost {
        cost_total,
        duration,
    })
}
