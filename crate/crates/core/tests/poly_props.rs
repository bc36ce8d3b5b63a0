use kinoplan::poly::{Interval, Poly1, DEFAULT_ROOT_TOL};
use proptest::prelude::*;

fn poly(max_degree: usize) -> impl Strategy<Value = Poly1> {
    prop::collection::vec(-10.0f64..10.0, 1..=max_degree + 1).prop_map(Poly1::new)
}

fn interval() -> impl Strategy<Value = Interval> {
    (-5.0f64..5.0, 0.01f64..5.0).prop_map(|(a, w)| Interval::new(a, a + w))
}

fn scale(p: &Poly1, iv: Interval) -> f64 {
    let m = iv.lo.abs().max(iv.hi.abs()).max(1.0);
    p.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * m.powi(k as i32))
        .sum::<f64>()
        .max(1.0)
}

proptest! {
    #[test]
    fn derivative_composes(p in poly(7), a in 0usize..4, b in 0usize..4) {
        prop_assert_eq!(p.derivative(a).derivative(b), p.derivative(a + b));
    }

    #[test]
    fn extrema_bound_dense_samples(p in poly(6), iv in interval()) {
        let (lo, hi) = p.extrema_on(iv);
        let tol = 1e-9 * scale(&p, iv);
        for i in 0..=1000 {
            let t = iv.lo + iv.length() * i as f64 / 1000.0;
            let v = p.eval(t);
            prop_assert!(v >= lo - tol && v <= hi + tol, "t={} v={} [{}, {}]", t, v, lo, hi);
        }
    }

    #[test]
    fn roots_have_small_residual_and_cover_sign_changes(p in poly(6)) {
        prop_assume!(!p.is_zero());
        let roots = p.real_roots(DEFAULT_ROOT_TOL).unwrap();
        let bound = roots.iter().fold(1.0f64, |m, r| m.max(r.abs()));
        for &r in &roots {
            let s: f64 = p
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.abs() * r.abs().powi(k as i32))
                .sum::<f64>()
                .max(1.0);
            prop_assert!(p.eval(r).abs() <= 1e-9 * s, "root {} residual {}", r, p.eval(r));
        }
        // Sign changes over a grid that spans every root and the Cauchy bound.
        let lead = p.coeffs().last().unwrap().abs();
        let cauchy = 1.0 + p.coeffs().iter().rev().skip(1).fold(0.0f64, |m, c| m.max(c.abs())) / lead;
        let span = cauchy.max(bound) + 1.0;
        let mut changes = 0;
        let mut prev = p.eval(-span);
        for i in 1..=20_000 {
            let v = p.eval(-span + 2.0 * span * i as f64 / 20_000.0);
            if v != 0.0 {
                if prev != 0.0 && v.signum() != prev.signum() {
                    changes += 1;
                }
                prev = v;
            }
        }
        prop_assert!(changes <= roots.len(), "{} sign changes, {} roots", changes, roots.len());
    }

    #[test]
    fn constructed_roots_are_found(rs in prop::collection::vec(-4.0f64..4.0, 1..=5)) {
        let mut sorted = rs.clone();
        sorted.sort_by(f64::total_cmp);
        // Skip clusters closer than the dedup radius; they are legitimately merged.
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-3));
        let p = rs.iter().fold(Poly1::constant(1.0), |acc, &r| &acc * &Poly1::new(vec![-r, 1.0]));
        let found = p.real_roots(DEFAULT_ROOT_TOL).unwrap();
        prop_assert_eq!(found.len(), sorted.len(), "{:?} vs {:?}", found, sorted);
        for (f, r) in found.iter().zip(&sorted) {
            prop_assert!((f - r).abs() < 1e-6, "{:?} vs {:?}", found, sorted);
        }
    }

    #[test]
    fn integrate_squared_matches_simpson(p in poly(5), iv in interval()) {
        let n = 2000;
        let h = iv.length() / n as f64;
        let f = |t: f64| p.eval(t).powi(2);
        let mut acc = f(iv.lo) + f(iv.hi);
        for i in 1..n {
            acc += f(iv.lo + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = acc * h / 3.0;
        let exact = p.integrate_squared(iv);
        prop_assert!((exact - simpson).abs() <= 1e-8 * simpson.abs().max(1.0));
    }
}
