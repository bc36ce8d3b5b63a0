//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use kinoplan::lti::State;
use kinoplan::poly::{Interval, Poly1};
use kinoplan::refine::{refine, RefineSpec, SplineTrajectory};
use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn falling(j: usize, i: usize) -> f64 {
    if j < i {
        0.0
    } else {
        ((j - i + 1)..=j).map(|v| v as f64).product()
    }
}

fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vector3<f64> {
    Vector3::new(
        rng.gen_range(-r..r),
        rng.gen_range(-r..r),
        rng.gen_range(-r..r),
    )
}

/// Seeded multi-segment refinement problem: 2 to 6 segments, order 3 or 4,
/// random segment times, waypoints and boundary derivatives.
pub fn multi_segment_case(seed: u64) -> RefineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_prime = rng.gen_range(3..=4);
    let segs = rng.gen_range(2..=6);
    let seg_times: Vec<f64> = (0..segs).map(|_| rng.gen_range(0.3..2.5)).collect();
    let mut p = random_vec(&mut rng, 3.0);
    let mut derivs = vec![p];
    derivs.extend((1..n_prime).map(|_| random_vec(&mut rng, 1.0)));
    let s0 = State::new(derivs);
    let waypoints: Vec<Vector3<f64>> = (0..segs)
        .map(|_| {
            p += random_vec(&mut rng, 2.0);
            p
        })
        .collect();
    let mut derivs = vec![p];
    derivs.extend((1..n_prime).map(|_| random_vec(&mut rng, 1.0)));
    RefineSpec {
        n_prime,
        waypoints,
        seg_times,
        s0,
        sg: State::new(derivs),
    }
}

/// Constraint matrix over raw monomial coefficients `c_kj` (segment-major) and
/// the right-hand side of one axis.
pub fn raw_constraints(spec: &RefineSpec, axis: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = spec.n_prime;
    let d = 2 * n;
    let segs = spec.seg_times.len();
    let row = |k: usize, t: f64, i: usize| -> DVector<f64> {
        let mut r = DVector::zeros(d * segs);
        for j in i..d {
            r[k * d + j] = falling(j, i) * t.powi((j - i) as i32);
        }
        r
    };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        rows.push(row(0, 0.0, i));
        rhs.push(spec.s0.deriv(i)[axis]);
    }
    for k in 0..segs - 1 {
        let t = spec.seg_times[k];
        rows.push(row(k, t, 0));
        rhs.push(spec.waypoints[k][axis]);
        for i in 0..n {
            rows.push(row(k, t, i) - row(k + 1, 0.0, i));
            rhs.push(0.0);
        }
    }
    for i in 0..n {
        rows.push(row(segs - 1, spec.seg_times[segs - 1], i));
        rhs.push(spec.sg.deriv(i)[axis]);
    }
    let a = DMatrix::from_fn(rows.len(), d * segs, |r, c| rows[r][c]);
    (a, DVector::from_vec(rhs))
}

/// Raw coefficients of one axis of a spline, padded to degree `2n' - 1`.
pub fn coefficients(traj: &SplineTrajectory, axis: usize) -> DVector<f64> {
    let d = 2 * traj.order;
    let mut c = DVector::zeros(d * traj.segments.len());
    for (k, seg) in traj.segments.iter().enumerate() {
        for (j, v) in seg.axes[axis].coeffs().iter().enumerate() {
            c[k * d + j] = *v;
        }
    }
    c
}

/// `Σ_k ∫ (p_k^(n'))^2 dt` for one axis given raw coefficients.
pub fn objective(spec: &RefineSpec, c: &DVector<f64>) -> f64 {
    let d = 2 * spec.n_prime;
    spec.seg_times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let p = Poly1::new(c.rows(k * d, d).iter().copied().collect());
            p.derivative(spec.n_prime)
                .integrate_squared(Interval::new(0.0, t))
        })
        .sum()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RefineAudit {
    pub waypoint_err: f64,
    pub continuity_err: f64,
    pub kkt_residual: f64,
    pub constraint_residual: f64,
    /// Smallest objective change over all null-space perturbations.
    pub min_increase: f64,
    /// Largest relative directional derivative along the null space.
    pub gradient: f64,
}

impl RefineAudit {
    pub fn passes(&self) -> bool {
        self.waypoint_err <= 1e-6
            && self.continuity_err <= 1e-8
            && self.kkt_residual <= 1e-8
            && self.constraint_residual <= 1e-8
            && self.min_increase >= 0.0
            && self.gradient <= 1e-6
    }
}

/// Refines `spec` and checks the result against the oracles above, using
/// `perturbations` random feasible directions of size 1e-3 per axis.
pub fn audit_refinement(spec: &RefineSpec, perturbations: usize, seed: u64) -> RefineAudit {
    let traj = refine(spec).expect("refinement succeeds");
    let n = spec.n_prime;
    let mut audit = RefineAudit {
        min_increase: f64::INFINITY,
        ..Default::default()
    };

    let mut t = 0.0;
    for (k, seg) in traj.segments.iter().enumerate() {
        t += seg.duration;
        let end = Vector3::from_fn(|a, _| seg.axes[a].eval(seg.duration));
        audit.waypoint_err = audit.waypoint_err.max((end - spec.waypoints[k]).amax());
        for i in 0..n {
            let left = seg.deriv_at(i, seg.duration);
            let right = match traj.segments.get(k + 1) {
                Some(next) => next.deriv_at(i, 0.0),
                None => spec.sg.deriv(i),
            };
            let scale = 1f64.max(left.amax());
            audit.continuity_err = audit.continuity_err.max((left - right).amax() / scale);
        }
    }
    assert!((t - traj.duration()).abs() < 1e-12);
    for i in 0..n {
        let start = traj.segments[0].deriv_at(i, 0.0);
        let scale = 1f64.max(start.amax());
        audit.continuity_err = audit
            .continuity_err
            .max((start - spec.s0.deriv(i)).amax() / scale);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for axis in 0..3 {
        let sys = spec.assemble(axis);
        let z = sys.solve().expect("nonsingular");
        audit.kkt_residual = audit.kkt_residual.max(sys.residual(&z));

        let (a, b) = raw_constraints(spec, axis);
        let c = coefficients(&traj, axis);
        let scale = 1f64.max(b.amax());
        audit.constraint_residual = audit.constraint_residual.max((&a * &c - &b).amax() / scale);

        // Orthonormal null-space basis from the SVD of `A` padded to square.
        let nv = c.len();
        let mut padded = DMatrix::zeros(nv, nv);
        padded.view_mut((0, 0), a.shape()).copy_from(&a);
        let svd = padded.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors");
        let tol = 1e-10 * svd.singular_values.max();
        let basis: Vec<DVector<f64>> = (0..nv)
            .filter(|&i| svd.singular_values[i] <= tol)
            .map(|i| vt.row(i).transpose())
            .collect();
        assert_eq!(basis.len(), nv - a.nrows(), "constraints are not full rank");
        let j0 = objective(spec, &c);
        for p in 0..perturbations {
            let mut dir = DVector::zeros(nv);
            for v in &basis {
                dir += v * rng.gen_range(-1.0..1.0);
            }
            dir /= dir.amax();
            assert!(
                (&a * &dir).amax() <= 1e-8 * a.amax(),
                "direction leaves the feasible set"
            );
            let step = &dir * 1e-3;
            audit.min_increase = audit.min_increase.min(objective(spec, &(&c + &step)) - j0);
            if p < 5 {
                let h = 1e-4;
                let fd = (objective(spec, &(&c + &dir * h)) - objective(spec, &(&c - &dir * h)))
                    / (2.0 * h);
                let curvature = (objective(spec, &(&c + &dir)) + objective(spec, &(&c - &dir))
                    - 2.0 * j0)
                    / 2.0;
                audit.gradient = audit.gradient.max(fd.abs() / (1.0 + j0 + curvature));
            }
        }
    }
    audit
}
