//! One-dimensional polynomial algebra for trajectory components.
//!
//! Polynomials are stored in the plain monomial basis `c_0 + c_1 t + ... + c_K t^K`.
//! Factorial-scaled coefficients (`d_k t^k / k!`) are converted on construction.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Default relative residual tolerance for [`Poly1::real_roots`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-9;

/// Leading coefficients below this fraction of the largest coefficient are
/// treated as zero before root classification.
const DEGENERATE_LEAD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial is identically zero; every t is a root")]
    ZeroPolynomial,
}

/// A closed time interval `[lo, hi]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Real polynomial in monomial form.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    /// Builds a polynomial from monomial coefficients `c_0..c_K`.
    /// Exactly-zero trailing coefficients are dropped; an empty slice is the zero polynomial.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    /// Builds `sum d_k t^k / k!`.
    pub fn from_factorial_scaled(d: &[f64]) -> Self {
        let mut fact = 1.0;
        let coeffs = d
            .iter()
            .enumerate()
            .map(|(k, &dk)| {
                if k > 0 {
                    fact *= k as f64;
                }
                dk / fact
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `c * t^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// The `order`-th formal derivative, applied one order at a time so that
    /// composing derivatives is bit-identical to taking them at once.
    pub fn derivative(&self, order: usize) -> Self {
        if order > self.degree() {
            return Self::zero();
        }
        let mut coeffs = self.coeffs.clone();
        for _ in 0..order {
            coeffs = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect();
        }
        Self::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Self::new(coeffs)
    }

    /// `∫_lo^hi p(t)^2 dt`.
    pub fn integrate_squared(&self, iv: Interval) -> f64 {
        let sq = self * self;
        let anti = sq.antiderivative();
        anti.eval(iv.hi) - anti.eval(iv.lo)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiplies by `t^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// All real roots, sorted ascending.
    ///
    /// Each returned root `r` satisfies `|p(r)| <= tol * (1 + max|c_k|)`.
    /// Degrees up to two use the stable quadratic formula, cubics the
    /// trigonometric / Cardano forms followed by Newton polishing, and higher
    /// degrees are split into monotone pieces at the roots of the derivative
    /// (found recursively) and bracketed.
    pub fn real_roots(&self, tol: f64) -> Result<Vec<f64>, PolyError> {
        let scale_max = self.max_abs_coeff();
        if scale_max == 0.0 {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().unwrap().abs() < DEGENERATE_LEAD * scale_max {
            c.pop();
        }
        // exact roots at zero
        let zeros = c.iter().take_while(|&&x| x == 0.0).count();
        let reduced = Poly1::new(c[zeros..].to_vec());
        let mut roots = if zeros > 0 { vec![0.0] } else { Vec::new() };
        let thresh = tol * (1.0 + reduced.max_abs_coeff());
        roots.extend(reduced.roots_nonzero_constant(thresh));
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        Ok(roots)
    }

    fn roots_nonzero_constant(&self, thresh: f64) -> Vec<f64> {
        let c = &self.coeffs;
        match self.degree() {
            0 => Vec::new(),
            1 => vec![-c[0] / c[1]],
            2 => self.quadratic_roots(thresh),
            3 => self.cubic_roots(thresh),
            _ => self.subdivision_roots(thresh),
        }
    }

    fn quadratic_roots(&self, thresh: f64) -> Vec<f64> {
        let (c0, b, a) = (self.coeffs[0], self.coeffs[1], self.coeffs[2]);
        let disc = b * b - 4.0 * a * c0;
        if disc < 0.0 {
            let vertex = -b / (2.0 * a);
            return if self.eval(vertex).abs() <= thresh {
                vec![vertex]
            } else {
                Vec::new()
            };
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let mut out = vec![q / a];
        if q != 0.0 {
            out.push(c0 / q);
        }
        out.into_iter().map(|r| self.polish(r)).collect()
    }

    fn cubic_roots(&self, thresh: f64) -> Vec<f64> {
        let lead = self.coeffs[3];
        let a = self.coeffs[2] / lead;
        let b = self.coeffs[1] / lead;
        let c = self.coeffs[0] / lead;
        let q = (a * a - 3.0 * b) / 9.0;
        let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
        let q3 = q * q * q;
        if r * r < q3 {
            let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
            let m = -2.0 * q.sqrt();
            let two_pi = 2.0 * std::f64::consts::PI;
            return [theta, theta + two_pi, theta - two_pi]
                .iter()
                .map(|th| self.polish(m * (th / 3.0).cos() - a / 3.0))
                .collect();
        }
        let big_a = -r.signum() * (r.abs() + (r * r - q3).sqrt()).cbrt();
        let big_b = if big_a != 0.0 { q / big_a } else { 0.0 };
        let r0 = self.polish(big_a + big_b - a / 3.0);
        // deflate and pick up a possible (near-)double pair
        let (q2, _) = self.deflate(r0);
        let mut out = vec![r0];
        out.extend(
            q2.quadratic_roots(f64::INFINITY)
                .into_iter()
                .map(|x| self.polish(x))
                .filter(|&x| self.eval(x).abs() <= thresh),
        );
        out
    }

    /// Synthetic division by `(t - r)`; returns quotient and remainder.
    fn deflate(&self, r: f64) -> (Poly1, f64) {
        let n = self.coeffs.len();
        let mut quot = vec![0.0; n - 1];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc = acc * r + self.coeffs[k];
            if k > 0 {
                quot[k - 1] = acc;
            }
        }
        (Poly1::new(quot), acc)
    }

    /// Newton steps kept only while they reduce the residual.
    fn polish(&self, mut r: f64) -> f64 {
        let d = self.derivative(1);
        let mut best = self.eval(r).abs();
        for _ in 0..4 {
            let slope = d.eval(r);
            if slope == 0.0 || best == 0.0 {
                break;
            }
            let cand = r - self.eval(r) / slope;
            let res = self.eval(cand).abs();
            if res < best {
                best = res;
                r = cand;
            } else {
                break;
            }
        }
        r
    }

    fn subdivision_roots(&self, thresh: f64) -> Vec<f64> {
        let lead = *self.coeffs.last().unwrap();
        let cauchy = 1.0
            + self.coeffs[..self.coeffs.len() - 1]
                .iter()
                .fold(0.0_f64, |m, c| m.max((c / lead).abs()));
        let d = self.derivative(1);
        let dthresh = DEFAULT_ROOT_TOL * (1.0 + d.max_abs_coeff());
        let crit: Vec<f64> = d
            .roots_nonzero_constant(dthresh)
            .into_iter()
            .filter(|x| x.abs() < cauchy)
            .collect();
        let mut crit = crit;
        crit.sort_by(f64::total_cmp);
        let mut knots = Vec::with_capacity(crit.len() + 2);
        knots.push(-cauchy);
        knots.extend(crit.iter().copied());
        knots.push(cauchy);

        let mut out = Vec::new();
        for &c in &crit {
            if self.eval(c).abs() <= thresh {
                out.push(c);
            }
        }
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                out.push(a);
            } else if fa.signum() != fb.signum() && fb != 0.0 {
                out.push(self.bracketed(a, b, fa));
            }
        }
        if self.eval(cauchy) == 0.0 {
            out.push(cauchy);
        }
        out
    }

    /// Safeguarded Newton-bisection on a bracket with a sign change.
    fn bracketed(&self, mut a: f64, mut b: f64, fa: f64) -> f64 {
        let d = self.derivative(1);
        let sa = fa.signum();
        let mut x = 0.5 * (a + b);
        for _ in 0..300 {
            let fx = self.eval(x);
            if fx == 0.0 {
                return x;
            }
            if fx.signum() == sa {
                a = x;
            } else {
                b = x;
            }
            if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
            let slope = d.eval(x);
            let newton = x - fx / slope;
            if newton == x {
                break;
            }
            x = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
        }
        x
    }

    /// Exact minimum and maximum of the polynomial over `iv`.
    pub fn extrema_on(&self, iv: Interval) -> (f64, f64) {
        let mut lo = self.eval(iv.lo).min(self.eval(iv.hi));
        let mut hi = self.eval(iv.lo).max(self.eval(iv.hi));
        let d = self.derivative(1);
        if let Ok(crit) = d.real_roots(DEFAULT_ROOT_TOL) {
            for t in crit.into_iter().filter(|&t| iv.contains(t)) {
                let v = self.eval(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, rhs: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
            .collect();
        Poly1::new(coeffs)
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &Poly1) -> Poly1 {
        self + &(-rhs)
    }
}

impl Neg for &Poly1 {
    type Output = Poly1;
    fn neg(self) -> Poly1 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &Poly1) -> Poly1 {
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly1::new(coeffs)
    }
}
