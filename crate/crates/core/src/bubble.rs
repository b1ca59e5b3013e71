//! The explicit bubble family `φ(x) = c (t / (t² + |x - x₀|²))^((n-2)/2)`.
//!
//! With `c = [n(n-2)]^((n-2)/4)` every member solves `-Δφ = φ^((n+2)/(n-2))`,
//! so `(φ, φ)` solves the coupled system for any admissible `(α, β)`. The
//! closed form is the reference every solver in this crate is checked against.

use std::io::Write;

use serde::Serialize;

use crate::config::ExponentConfig;
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, RadialGrid, RadialProfilePair};
use crate::quadrature::fornberg_weights;

/// Log-spacing above which the residual stencil is considered unresolved.
pub const MAX_STENCIL_LOG_SPACING: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BubbleParams {
    n: usize,
    center: Vec<f64>,
    t: f64,
    c: f64,
}

/// `[n(n-2)]^((n-2)/4)`.
pub fn bubble_constant(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

pub fn make_bubble(config: &ExponentConfig, center: &[f64], t: f64) -> Result<BubbleParams> {
    let n = config.n();
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonpositiveScale(t));
    }
    if center.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: center.len(),
        });
    }
    Ok(BubbleParams {
        n,
        center: center.to_vec(),
        t,
        c: bubble_constant(n),
    })
}

/// `φ_{x₀,t}(x)`.
pub fn eval_bubble(params: &BubbleParams, x: &[f64]) -> f64 {
    let d2: f64 = x
        .iter()
        .zip(&params.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    params.at_squared_radius(d2)
}

impl BubbleParams {
    /// Bubble centred at the origin.
    pub fn centered(config: &ExponentConfig, t: f64) -> Result<Self> {
        make_bubble(config, &vec![0.0; config.n()], t)
    }

    /// Centred bubble whose peak value is `peak`: `t = (c / peak)^(2/(n-2))`.
    pub fn with_peak(config: &ExponentConfig, peak: f64) -> Result<Self> {
        if !(peak > 0.0) {
            return Err(Error::InvalidArgument(format!("peak must be positive (got {peak})")));
        }
        let nf = config.nf();
        let t = (bubble_constant(config.n()) / peak).powf(2.0 / (nf - 2.0));
        Self::centered(config, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    fn half_power(&self) -> f64 {
        0.5 * (self.n as f64 - 2.0)
    }

    /// Value at squared distance `d2` from the centre.
    pub fn at_squared_radius(&self, d2: f64) -> f64 {
        self.c * (self.t / (self.t * self.t + d2)).powf(self.half_power())
    }

    /// Value at distance `r` from the centre.
    pub fn radial(&self, r: f64) -> f64 {
        self.at_squared_radius(r * r)
    }

    /// `dφ/dr` at distance `r`.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        -(self.n as f64 - 2.0) * r / (self.t * self.t + r * r) * self.radial(r)
    }

    pub fn peak(&self) -> f64 {
        self.radial(0.0)
    }

    /// `φ(r_b) - φ(r_a)` without cancellation.
    fn difference(&self, ra: f64, rb: f64) -> f64 {
        let q = (rb - ra) * (rb + ra) / (self.t * self.t + ra * ra);
        self.radial(ra) * (-self.half_power() * q.ln_1p()).exp_m1()
    }

    /// `(φ, φ)` with exact derivatives on `grid`.
    pub fn sample_pair(&self, grid: &RadialGrid) -> RadialProfilePair {
        let u: Vec<f64> = grid.nodes().iter().map(|&r| self.radial(r)).collect();
        let du: Vec<f64> = grid.nodes().iter().map(|&r| self.radial_derivative(r)).collect();
        RadialProfilePair::new(grid.clone(), u.clone(), u, du.clone(), du)
            .expect("bubble samples are positive and finite")
    }

    /// CSV with header `r,phi`.
    pub fn write_csv<W: Write>(&self, grid: &RadialGrid, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "phi"])?;
        for &r in grid.nodes() {
            w.write_record([fmt_f64(r), fmt_f64(self.radial(r))])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `-Δφ(r_i)` from a five-point stencil in `s = ln r`, where the Laplacian
/// reads `r^-2 (φ_ss + (n-2) φ_s)`. Stencil weights come from a local Taylor
/// fit, so any smooth grid works; differences `φ(r_j) - φ(r_i)` are formed in
/// closed form, which keeps the stencil free of cancellation near the origin.
fn minus_laplacian(params: &BubbleParams, r: &[f64], i: usize) -> f64 {
    let ri = r[i];
    let offsets: Vec<f64> = (i - 2..=i + 2).map(|j| ((r[j] - ri) / ri).ln_1p()).collect();
    let w = fornberg_weights(0.0, &offsets, 2);
    let (mut d1, mut d2) = (0.0, 0.0);
    for (k, j) in (i - 2..=i + 2).enumerate() {
        if j == i {
            continue;
        }
        let diff = params.difference(ri, r[j]);
        d1 += w[1][k] * diff;
        d2 += w[2][k] * diff;
    }
    -(d2 + (params.n as f64 - 2.0) * d1) / (ri * ri)
}

fn check_residual_inputs(params: &BubbleParams, config: &ExponentConfig, grid: &RadialGrid) -> Result<()> {
    if params.n != config.n() {
        return Err(Error::InvalidArgument(format!(
            "bubble dimension {} does not match config dimension {}",
            params.n,
            config.n()
        )));
    }
    if params.center.iter().any(|x| *x != 0.0) {
        return Err(Error::InvalidArgument("radial residual needs a bubble centred at the origin".into()));
    }
    if grid.len() < 5 {
        return Err(Error::GridTooCoarse("residual stencil needs at least five nodes".into()));
    }
    let spacing = grid.max_log_spacing();
    if spacing > MAX_STENCIL_LOG_SPACING {
        return Err(Error::GridTooCoarse(format!(
            "log-spacing {spacing:.3e} exceeds {MAX_STENCIL_LOG_SPACING}"
        )));
    }
    Ok(())
}

/// Max over interior nodes of `|-Δφ - φ^((n+2)/(n-2))|`.
pub fn bubble_residual(params: &BubbleParams, config: &ExponentConfig, grid: &RadialGrid) -> Result<f64> {
    check_residual_inputs(params, config, grid)?;
    let p = config.critical_exponent();
    let r = grid.nodes();
    Ok((2..r.len() - 2)
        .map(|i| (minus_laplacian(params, r, i) - params.radial(r[i]).powf(p)).abs())
        .fold(0.0, f64::max))
}

/// Residuals of both equations of the coupled system for the pair `(φ, φ)`:
/// `max |-Δφ - φ^α φ^β|` and `max |-Δφ - φ^β φ^α|`.
pub fn system_residuals(params: &BubbleParams, config: &ExponentConfig, grid: &RadialGrid) -> Result<(f64, f64)> {
    check_residual_inputs(params, config, grid)?;
    let (a, b) = (config.alpha(), config.beta());
    let r = grid.nodes();
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for i in 2..r.len() - 2 {
        let lap = minus_laplacian(params, r, i);
        let (u, v) = (params.radial(r[i]), params.radial(r[i]));
        first = first.max((lap - u.powf(a) * v.powf(b)).abs());
        second = second.max((lap - u.powf(b) * v.powf(a)).abs());
    }
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg3() -> ExponentConfig {
        validate_config(3, 2.0, 3.0).unwrap()
    }

    #[test]
    fn amplitude_constants() {
        let b = make_bubble(&cfg3(), &[0.0; 3], 1.0).unwrap();
        assert_relative_eq!(b.c(), 1.316074, epsilon = 1e-6);
        assert_relative_eq!(b.c(), 3f64.powf(0.25), max_relative = 1e-15);
        let c4 = validate_config(4, 1.0, 2.0).unwrap();
        let b4 = make_bubble(&c4, &[0.0; 4], 2.0).unwrap();
        assert_relative_eq!(b4.c(), 2.828427, epsilon = 1e-6);
        assert_eq!(make_bubble(&cfg3(), &[0.0; 3], 0.0), Err(Error::NonpositiveScale(0.0)));
        assert!(make_bubble(&cfg3(), &[0.0; 2], 1.0).is_err());
    }

    #[test]
    fn point_values() {
        let b = make_bubble(&cfg3(), &[0.0; 3], 1.0).unwrap();
        assert_relative_eq!(eval_bubble(&b, &[0.0; 3]), 3f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(
            eval_bubble(&b, &[0.0, 1.0, 0.0]),
            3f64.powf(0.25) * 0.5f64.sqrt(),
            max_relative = 1e-15
        );
        let far = [1e3, 1e4, 1e5, 1e6].map(|x| eval_bubble(&b, &[x, 0.0, 0.0]));
        assert!(far.windows(2).all(|w| w[1] < w[0]));
        assert!(far[3] < 1e-5);
    }

    #[test]
    fn residual_certifies_the_constant() {
        let config = cfg3();
        let grid = RadialGrid::geometric(1e-6, 1e2, 4000).unwrap();
        let b = make_bubble(&config, &[0.0; 3], 1.0).unwrap();
        assert!(bubble_residual(&b, &config, &grid).unwrap() <= 1e-6);
        let b10 = make_bubble(&config, &[0.0; 3], 10.0).unwrap();
        assert!(bubble_residual(&b10, &config, &grid).unwrap() <= 1e-6);
        let wrong = BubbleParams { c: 2.0 * b.c, ..b.clone() };
        assert!(bubble_residual(&wrong, &config, &grid).unwrap() >= 0.1);
    }

    #[test]
    fn residual_error_paths() {
        let config = cfg3();
        let b = make_bubble(&config, &[0.0; 3], 1.0).unwrap();
        let coarse = RadialGrid::geometric(1e-6, 1e2, 50).unwrap();
        assert!(matches!(bubble_residual(&b, &config, &coarse), Err(Error::GridTooCoarse(_))));
        let off = make_bubble(&config, &[1.0, 0.0, 0.0], 1.0).unwrap();
        let grid = RadialGrid::default_grid();
        assert!(bubble_residual(&off, &config, &grid).is_err());
    }

    #[test]
    fn pair_solves_both_equations() {
        let config = cfg3();
        let b = BubbleParams::centered(&config, 1.0).unwrap();
        let (r1, r2) = system_residuals(&b, &config, &RadialGrid::default_grid()).unwrap();
        assert!(r1 <= 1e-6 && r2 <= 1e-6);
    }

    #[test]
    fn difference_matches_direct_evaluation() {
        let b = BubbleParams::centered(&cfg3(), 0.7).unwrap();
        for (a, c) in [(0.3, 0.31), (2.0, 1.5), (1e-3, 2e-3)] {
            assert_relative_eq!(b.difference(a, c), b.radial(c) - b.radial(a), max_relative = 1e-9);
        }
    }

    #[test]
    fn peak_parameterisation() {
        let b = BubbleParams::with_peak(&cfg3(), 1.0).unwrap();
        assert_relative_eq!(b.peak(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(b.t(), 3f64.sqrt(), max_relative = 1e-14);
    }

    proptest! {
        // φ_{x0,st}(x0 + s(x - x0)) = s^{-(n-2)/2} φ_{x0,t}(x)
        #[test]
        fn scaling_closure(
            s in 0.05f64..20.0, t in 0.05f64..20.0,
            x in proptest::collection::vec(-10.0f64..10.0, 3),
            c in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let config = cfg3();
            let b = make_bubble(&config, &c, t).unwrap();
            let bs = make_bubble(&config, &c, s * t).unwrap();
            let y: Vec<f64> = x.iter().zip(&c).map(|(xi, ci)| s * xi + (1.0 - s) * ci).collect();
            let lhs = eval_bubble(&bs, &y);
            let rhs = s.powf(-0.5) * eval_bubble(&b, &x);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }

        #[test]
        fn radially_decreasing(r1 in 0.0f64..100.0, dr in 1e-6f64..100.0, t in 0.1f64..10.0) {
            let b = BubbleParams::centered(&cfg3(), t).unwrap();
            prop_assert!(b.radial(r1) > b.radial(r1 + dr));
        }
    }
}
