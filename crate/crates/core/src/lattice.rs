//! Discretized control sets, constant-input motion primitives and the integer
//! keys used for duplicate detection in the state lattice.

use nalgebra::Vector3;
use thiserror::Error;

use crate::lti::State;
use crate::poly::{Interval, Poly1};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("workspace dimension {0} is not supported (expected 2 or 3)")]
    InvalidDims(usize),
    #[error("invalid control sampling: u_max = {u_max}, mu = {mu}")]
    InvalidSampling { u_max: f64, mu: u32 },
}

/// The finite input set `{-mu..mu} * d_u` per active axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    u_max: f64,
    mu: u32,
    dims: usize,
    controls: Vec<Vector3<f64>>,
}

impl ControlSet {
    pub fn new(u_max: f64, mu: u32, dims: usize) -> Result<Self, LatticeError> {
        if dims != 2 && dims != 3 {
            return Err(LatticeError::InvalidDims(dims));
        }
        if !(u_max > 0.0) || mu == 0 {
            return Err(LatticeError::InvalidSampling { u_max, mu });
        }
        let du = u_max / mu as f64;
        let m = mu as i64;
        let zs: Vec<i64> = if dims == 3 {
            (-m..=m).collect()
        } else {
            vec![0]
        };
        let mut controls = Vec::with_capacity((2 * mu as usize + 1).pow(dims as u32));
        for kx in -m..=m {
            for ky in -m..=m {
                for &kz in &zs {
                    controls.push(Vector3::new(kx as f64, ky as f64, kz as f64) * du);
                }
            }
        }
        Ok(Self {
            u_max,
            mu,
            dims,
            controls,
        })
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Discretization step `u_max / mu`.
    pub fn step(&self) -> f64 {
        self.u_max / self.mu as f64
    }

    pub fn controls(&self) -> &[Vector3<f64>] {
        &self.controls
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }
}

/// Trajectory segment obtained by holding one control for `duration` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPrimitive {
    start: State,
    control: Vector3<f64>,
    duration: f64,
    axes: [Poly1; 3],
    cost: f64,
}

impl MotionPrimitive {
    /// Integrates `p^(n) = u` from `start`; the cost is `(||u||^2 + rho) * duration`.
    pub fn propagate(start: &State, control: Vector3<f64>, duration: f64, rho: f64) -> Self {
        assert!(duration > 0.0, "primitive duration must be positive");
        let axes = [0, 1, 2].map(|a| {
            let mut d = start.axis(a);
            d.push(control[a]);
            Poly1::from_factorial_scaled(&d)
        });
        Self {
            start: start.clone(),
            control,
            duration,
            axes,
            cost: (control.norm_squared() + rho) * duration,
        }
    }

    pub fn start(&self) -> &State {
        &self.start
    }

    pub fn control(&self) -> Vector3<f64> {
        self.control
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn order(&self) -> usize {
        self.start.order()
    }

    /// Position polynomial per axis.
    pub fn axes(&self) -> &[Poly1; 3] {
        &self.axes
    }

    pub fn interval(&self) -> Interval {
        Interval::new(0.0, self.duration)
    }

    /// `i`-th derivative polynomial per axis.
    pub fn derivative(&self, i: usize) -> [Poly1; 3] {
        [0, 1, 2].map(|a| self.axes[a].derivative(i))
    }

    pub fn position_at(&self, t: f64) -> Vector3<f64> {
        Vector3::from_fn(|a, _| self.axes[a].eval(t))
    }

    pub fn state_at(&self, t: f64) -> State {
        State::new(
            (0..self.order())
                .map(|i| Vector3::from_fn(|a, _| self.axes[a].derivative(i).eval(t)))
                .collect(),
        )
    }

    pub fn end_state(&self) -> State {
        self.state_at(self.duration)
    }

    /// `max_t ||p^(i)(t)||_inf` over the primitive.
    pub fn peak_abs(&self, i: usize) -> f64 {
        let iv = self.interval();
        self.derivative(i)
            .iter()
            .map(|p| {
                let (lo, hi) = p.extrema_on(iv);
                lo.abs().max(hi.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Integer identifier of a discretized state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeKey(pub Vec<[i64; 3]>);

/// Resolution of derivative `i` for control order `n`: `d_u * tau^(n-i) / (n-i)!`.
pub fn resolution(order: usize, i: usize, du: f64, tau: f64) -> f64 {
    let k = order - i;
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    du * tau.powi(k as i32) / fact
}

/// Rounds `s - origin` to the lattice resolutions.
pub fn lattice_key(s: &State, du: f64, tau: f64, origin: &State) -> LatticeKey {
    let n = s.order();
    assert_eq!(n, origin.order(), "state and origin orders differ");
    LatticeKey(
        (0..n)
            .map(|i| {
                let res = resolution(n, i, du, tau);
                let d = (s.deriv(i) - origin.deriv(i)) / res;
                [d.x.round() as i64, d.y.round() as i64, d.z.round() as i64]
            })
            .collect(),
    )
}
