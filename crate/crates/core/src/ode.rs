//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with step control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-10 }
    }
}

impl Tolerances {
    /// Both tolerances divided by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            abs: self.abs / factor,
            rel: self.rel / factor,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights (= last row of A, FSAL) minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Outcome of [`DormandPrince::advance_to`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Advance<const N: usize> {
    Reached,
    /// The stop predicate fired after the accepted step `[t_prev, t]`.
    Stopped { t_prev: f64, y_prev: [f64; N] },
}

/// Integrator state; advances `y' = f(t, y)` with FSAL stage reuse.
#[derive(Debug, Clone)]
pub struct DormandPrince<const N: usize> {
    t: f64,
    y: [f64; N],
    k_first: [f64; N],
    h: f64,
    tol: Tolerances,
    steps: usize,
    max_steps: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], coeffs: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl<const N: usize> DormandPrince<N> {
    pub fn new<F>(rhs: &F, t0: f64, y0: [f64; N], h0: f64, tol: Tolerances) -> Self
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        Self {
            t: t0,
            y: y0,
            k_first: rhs(t0, &y0),
            h: h0,
            tol,
            steps: 0,
            max_steps: 5_000_000,
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// One unchecked step of size `h` from `(t, y)`; returns the fifth-order
    /// solution and the embedded error estimate.
    pub fn step<F>(rhs: &F, t: f64, y: &[f64; N], k_first: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut k = [[0.0; N]; 7];
        k[0] = *k_first;
        for s in 1..7 {
            let ys = axpy(y, h, &k[..s], &A[s][..s]);
            k[s] = rhs(t + C[s] * h, &ys);
        }
        let y_new = axpy(y, h, &k[..6], &A[6]);
        let mut err = [0.0; N];
        for (s, ks) in k.iter().enumerate() {
            for i in 0..N {
                err[i] += h * E[s] * ks[i];
            }
        }
        (y_new, err, k[6])
    }

    fn error_norm(&self, y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.tol.abs + self.tol.rel * self.y[i].abs().max(y_new[i].abs());
            let e = err[i] / scale;
            acc += e * e;
        }
        let norm = (acc / N as f64).sqrt();
        if norm.is_finite() {
            norm
        } else {
            f64::INFINITY
        }
    }

    /// Integrate to exactly `t_end`, checking `stop` after each accepted step.
    pub fn advance_to<F, S>(&mut self, rhs: &F, t_end: f64, stop: S) -> Result<Advance<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        S: Fn(&[f64; N]) -> bool,
    {
        while self.t < t_end {
            if self.steps >= self.max_steps {
                return Err(Error::ToleranceNotMet {
                    r: self.t,
                    steps: self.steps,
                });
            }
            let remaining = t_end - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h < 1e-14 * self.t.abs().max(1e-300) {
                return Err(Error::StepSizeUnderflow { r: self.t });
            }
            let (y_new, err, k_last) = Self::step(rhs, self.t, &self.y, &self.k_first, h);
            let norm = self.error_norm(&y_new, &err);
            if norm <= 1.0 {
                let (t_prev, y_prev) = (self.t, self.y);
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.k_first = k_last;
                self.steps += 1;
                let factor = if norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // keep the proposed step when only shortened to hit t_end
                self.h = if last { self.h.max(h * factor) } else { h * factor };
                if stop(&self.y) {
                    return Ok(Advance::Stopped { t_prev, y_prev });
                }
            } else {
                let factor = if norm.is_finite() {
                    (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                self.h = h * factor;
            }
        }
        Ok(Advance::Reached)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_oscillator_one_period() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let tol = Tolerances::default();
        let mut dp = DormandPrince::new(&rhs, 0.0, [1.0, 0.0], 1e-3, tol);
        let period = 2.0 * std::f64::consts::PI;
        assert_eq!(dp.advance_to(&rhs, period, |_| false).unwrap(), Advance::Reached);
        assert_eq!(dp.t(), period);
        assert_relative_eq!(dp.y()[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(dp.y()[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn fifth_order_convergence_of_single_steps() {
        // y' = y: local error of one step scales like h^6
        let rhs = |_t: f64, y: &[f64; 1]| [y[0]];
        let err = |h: f64| {
            let (y, _, _) = DormandPrince::step(&rhs, 0.0, &[1.0], &[1.0], h);
            (y[0] - h.exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 50.0 && ratio < 80.0, "ratio {ratio}");
    }

    #[test]
    fn stop_predicate_reports_bracketing_step() {
        let rhs = |_t: f64, _y: &[f64; 1]| [-1.0];
        let mut dp = DormandPrince::new(&rhs, 0.0, [1.0], 0.3, Tolerances::default());
        match dp.advance_to(&rhs, 5.0, |y| y[0] <= 0.0).unwrap() {
            Advance::Stopped { t_prev, y_prev } => {
                assert!(t_prev < 1.0 && dp.t() >= 1.0);
                assert!(y_prev[0] > 0.0);
            }
            Advance::Reached => panic!("expected a stop"),
        }
    }

    #[test]
    fn blowup_underflows() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let rhs = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let mut dp = DormandPrince::new(&rhs, 0.0, [1.0], 1e-3, Tolerances::default());
        let res = dp.advance_to(&rhs, 2.0, |_| false);
        assert!(matches!(res, Err(Error::StepSizeUnderflow { .. }) | Err(Error::ToleranceNotMet { .. })));
    }
}
