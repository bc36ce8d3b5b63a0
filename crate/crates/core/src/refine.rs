//! Minimum-effort spline refinement of a searched trajectory.
//!
//! Each segment is a polynomial of degree `2n' - 1` per axis. The spline passes
//! through the searched waypoints at the searched times, matches the start and
//! end states, and is continuous up to derivative `n' - 1`; among those splines
//! it minimizes `Σ ∫ ||p^(n')||^2 dt`. Axes decouple, and each is an
//! equality-constrained QP solved through its KKT system.
//!
//! Internally every segment uses normalized time `s = t / τ_k`, which keeps
//! the KKT matrix well scaled for segment times far from one.

use nalgebra::{DMatrix, DVector, Vector3};
use thiserror::Error;

use crate::lti::{State, MIN_DURATION};
use crate::poly::Poly1;
use crate::search::{PlanResult, PlanStatus};
use crate::trajio::{Segment, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("plan was not solved")]
    NotSolved,
    #[error("plan has no segments to refine")]
    EmptyPlan,
    #[error("KKT system is singular (segment time {0})")]
    SingularKkt(f64),
    #[error("invalid refinement input: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineSpec {
    pub n_prime: usize,
    /// Segment `k` ends at `waypoints[k]`; the last one must match `sg`.
    pub waypoints: Vec<Vector3<f64>>,
    pub seg_times: Vec<f64>,
    pub s0: State,
    pub sg: State,
}

pub type SplineTrajectory = Trajectory;

fn falling(j: usize, i: usize) -> f64 {
    if j < i {
        0.0
    } else {
        ((j - i + 1)..=j).map(|v| v as f64).product()
    }
}

/// Assembled KKT system for one axis: `matrix · [c; λ] = rhs`, where `c`
/// holds the normalized coefficients `ĉ_kj = c_kj τ_k^j` of all segments.
#[derive(Debug, Clone)]
pub struct KktSystem {
    pub hessian: DMatrix<f64>,
    pub constraints: DMatrix<f64>,
    pub targets: DVector<f64>,
}

impl KktSystem {
    pub fn matrix(&self) -> DMatrix<f64> {
        let (m, nv) = self.constraints.shape();
        let mut k = DMatrix::zeros(nv + m, nv + m);
        k.view_mut((0, 0), (nv, nv)).copy_from(&self.hessian);
        k.view_mut((nv, 0), (m, nv)).copy_from(&self.constraints);
        k.view_mut((0, nv), (nv, m))
            .copy_from(&self.constraints.transpose());
        k
    }

    pub fn rhs(&self) -> DVector<f64> {
        let nv = self.hessian.nrows();
        let mut r = DVector::zeros(nv + self.targets.len());
        r.rows_mut(nv, self.targets.len()).copy_from(&self.targets);
        r
    }

    /// `||K z - r||_∞ / max(1, ||r||_∞, ||K||_max)`.
    pub fn residual(&self, z: &DVector<f64>) -> f64 {
        let k = self.matrix();
        let r = self.rhs();
        let scale = 1f64.max(r.amax()).max(k.amax());
        (k * z - r).amax() / scale
    }

    pub fn solve(&self) -> Option<DVector<f64>> {
        self.matrix().lu().solve(&self.rhs())
    }
}

impl RefineSpec {
    fn validate(&self) -> Result<(), RefineError> {
        let bad = |m: String| Err(RefineError::InvalidSpec(m));
        let n = self.n_prime;
        if n == 0 {
            return bad("refinement order must be at least 1".into());
        }
        if self.waypoints.is_empty() || self.waypoints.len() != self.seg_times.len() {
            return bad("need one waypoint per segment".into());
        }
        if self.s0.order() != n || self.sg.order() != n {
            return bad(format!("boundary states must have order {n}"));
        }
        if let Some(&t) = self.seg_times.iter().find(|&&t| !(t >= MIN_DURATION)) {
            return Err(RefineError::SingularKkt(t));
        }
        let last = self.waypoints[self.waypoints.len() - 1];
        let scale = 1f64.max(last.amax());
        if (last - self.sg.position()).amax() > 1e-9 * scale {
            return bad("last waypoint differs from the end state position".into());
        }
        Ok(())
    }

    /// Builds the KKT system of one axis.
    pub fn assemble(&self, axis: usize) -> KktSystem {
        let n = self.n_prime;
        let d = 2 * n;
        let segs = self.seg_times.len();
        let nv = d * segs;

        let mut hessian = DMatrix::zeros(nv, nv);
        for (k, &tau) in self.seg_times.iter().enumerate() {
            let w = tau.powi(1 - 2 * n as i32);
            for a in n..d {
                for b in n..d {
                    let e = (a + b - 2 * n + 1) as f64;
                    hessian[(k * d + a, k * d + b)] = falling(a, n) * falling(b, n) / e * w;
                }
            }
        }

        // Row i-derivative at normalized time s (0 or 1), premultiplied by τ^i.
        let deriv_row = |s_end: bool, i: usize| -> Vec<f64> {
            (0..d)
                .map(|j| {
                    if s_end {
                        falling(j, i)
                    } else if j == i {
                        falling(i, i)
                    } else {
                        0.0
                    }
                })
                .collect()
        };

        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        let put = |k: usize, row: &[f64], scale: f64| -> Vec<(usize, f64)> {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (k * d + j, v * scale))
                .collect()
        };
        let tau = &self.seg_times;
        for i in 0..n {
            let r = put(0, &deriv_row(false, i), 1.0);
            rows.push((r, self.s0.deriv(i)[axis] * tau[0].powi(i as i32)));
        }
        for k in 0..segs - 1 {
            rows.push((put(k, &deriv_row(true, 0), 1.0), self.waypoints[k][axis]));
            // Continuity of derivative i, scaled by τ_k^i so both sides are O(1).
            for i in 0..n {
                let ratio = (tau[k] / tau[k + 1]).powi(i as i32);
                let mut r = put(k, &deriv_row(true, i), 1.0);
                r.extend(put(k + 1, &deriv_row(false, i), -ratio));
                rows.push((r, 0.0));
            }
        }
        let last = segs - 1;
        for i in 0..n {
            let r = put(last, &deriv_row(true, i), 1.0);
            rows.push((r, self.sg.deriv(i)[axis] * tau[last].powi(i as i32)));
        }

        let mut constraints = DMatrix::zeros(rows.len(), nv);
        let mut targets = DVector::zeros(rows.len());
        for (r, (entries, b)) in rows.into_iter().enumerate() {
            for (c, v) in entries {
                constraints[(r, c)] = v;
            }
            targets[r] = b;
        }
        KktSystem {
            hessian,
            constraints,
            targets,
        }
    }
}

/// Solves the refinement QP. The result has one segment per waypoint.
pub fn refine(spec: &RefineSpec) -> Result<SplineTrajectory, RefineError> {
    spec.validate()?;
    let d = 2 * spec.n_prime;
    let segs = spec.seg_times.len();
    let mut per_axis: Vec<Vec<Poly1>> = Vec::with_capacity(3);
    for axis in 0..3 {
        let sys = spec.assemble(axis);
        let z = sys.solve().ok_or_else(|| {
            let t = spec.seg_times.iter().copied().fold(f64::INFINITY, f64::min);
            RefineError::SingularKkt(t)
        })?;
        per_axis.push(
            (0..segs)
                .map(|k| {
                    let tau = spec.seg_times[k];
                    Poly1::new((0..d).map(|j| z[k * d + j] / tau.powi(j as i32)).collect())
                })
                .collect(),
        );
    }
    let segments = (0..segs)
        .map(|k| Segment {
            duration: spec.seg_times[k],
            axes: [0, 1, 2].map(|a| per_axis[a][k].clone()),
        })
        .collect();
    Ok(Trajectory {
        order: spec.n_prime,
        segments,
    })
}

/// Boundary state at the given refinement order. The searched trajectory has
/// constant control over the adjacent primitive, so derivative `n` is that
/// control and higher ones are zero.
fn boundary(s: &State, control: Vector3<f64>, n_prime: usize) -> State {
    let n = s.order();
    State::new(
        (0..n_prime)
            .map(|i| match i.cmp(&n) {
                std::cmp::Ordering::Less => s.deriv(i),
                std::cmp::Ordering::Equal => control,
                std::cmp::Ordering::Greater => Vector3::zeros(),
            })
            .collect(),
    )
}

pub fn waypoints_from_plan(r: &PlanResult, n_prime: usize) -> Result<RefineSpec, RefineError> {
    if r.status != PlanStatus::Solved {
        return Err(RefineError::NotSolved);
    }
    let (first, last) = match (r.primitives.first(), r.primitives.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(RefineError::EmptyPlan),
    };
    let ends: Vec<State> = r.primitives.iter().map(|p| p.end_state()).collect();
    Ok(RefineSpec {
        n_prime,
        waypoints: ends.iter().map(State::position).collect(),
        seg_times: r.primitives.iter().map(|p| p.duration()).collect(),
        s0: boundary(first.start(), first.control(), n_prime),
        sg: boundary(&ends[ends.len() - 1], last.control(), n_prime),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest(p: [f64; 3], n: usize) -> State {
        State::at_rest(Vector3::from(p), n)
    }

    #[test]
    fn min_jerk_rest_to_rest() {
        let spec = RefineSpec {
            n_prime: 3,
            waypoints: vec![Vector3::new(1.0, 0.0, 0.0)],
            seg_times: vec![1.0],
            s0: rest([0.0; 3], 3),
            sg: rest([1.0, 0.0, 0.0], 3),
        };
        let traj = refine(&spec).unwrap();
        let x = traj.segments[0].axes[0].coeffs();
        let expect = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
        for (a, b) in x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-8, "{x:?}");
        }
        assert!((traj.segments[0].axes[0].eval(0.5) - 0.5).abs() < 1e-12);
        assert!(traj.segments[0].axes[1].max_abs_coeff() < 1e-12);
    }

    #[test]
    fn constant_velocity_line_is_exact() {
        let v = Vector3::new(1.0, -0.5, 0.25);
        let state = |t: f64| State::new(vec![v * t, v, Vector3::zeros()]);
        let spec = RefineSpec {
            n_prime: 3,
            waypoints: (1..=4).map(|k| v * k as f64).collect(),
            seg_times: vec![1.0; 4],
            s0: state(0.0),
            sg: state(4.0),
        };
        let traj = refine(&spec).unwrap();
        for seg in &traj.segments {
            for a in 0..3 {
                assert!(seg.axes[a].derivative(2).max_abs_coeff() < 1e-9);
            }
        }
    }

    #[test]
    fn tiny_segment_is_singular() {
        let spec = RefineSpec {
            n_prime: 3,
            waypoints: vec![Vector3::zeros()],
            seg_times: vec![1e-7],
            s0: rest([0.0; 3], 3),
            sg: rest([0.0; 3], 3),
        };
        assert_eq!(refine(&spec), Err(RefineError::SingularKkt(1e-7)));
    }

    #[test]
    fn padding_uses_boundary_controls() {
        let s = State::new(vec![
            Vector3::new(1.0, 2.0, 3.0),
            Vector3::new(0.5, 0.0, 0.0),
        ]);
        let u = Vector3::new(-1.0, 1.0, 0.0);
        let b = boundary(&s, u, 4);
        assert_eq!(b.deriv(2), u);
        assert_eq!(b.deriv(3), Vector3::zeros());
        assert_eq!(boundary(&s, u, 1).order(), 1);
    }
}
