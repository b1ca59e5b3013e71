//! Radial Newtonian potential, Picard iteration of the integral system, and
//! the Hardy–Littlewood–Sobolev functional.
//!
//! The potential is the normalized inverse Laplacian: for radial `f`,
//! `N f(r) = (1/(n-2)) ∫_0^∞ s^(n-1) f(s) max(r, s)^(2-n) ds`, so that
//! `-Δ N f = f`. The operator `T f(x) = ∫ |x - y|^(2-n) f(y) dy` used in the
//! HLS bound is `(n-2) ω_{n-1} N f`.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExponentConfig;
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfilePair};
use crate::norm::{lp_norm_radial, radial_integral};
use crate::quadrature::{cumulative_trapezoid, gauss_legendre, reverse_cumulative_trapezoid, sphere_area};

pub const DEFAULT_ANGULAR_NODES: usize = 64;
pub const MIN_ANGULAR_NODES: usize = 16;
/// Sup-norm above which a Picard iterate is declared blown up.
pub const BLOWUP_SUP: f64 = 1e6;
pub const PICARD_TOL: f64 = 1e-8;
pub const PICARD_MAX_STEPS: usize = 200;

/// Radial `N f` together with its exact derivative `-r^(1-n) ∫_0^r s^(n-1) f`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPotential {
    pub value: Vec<f64>,
    pub derivative: Vec<f64>,
}

/// Tail decay exponent `q` in `f ~ r^-q` estimated over the last decade.
fn tail_decay_exponent(f: &[f64], r: &[f64]) -> Option<f64> {
    let last = r.len() - 1;
    if f[last] == 0.0 {
        return None;
    }
    let r_far = r[last];
    let j = r.partition_point(|x| *x < r_far / 10.0).min(last - 1);
    if f[j] <= 0.0 {
        return Some(f64::NEG_INFINITY);
    }
    Some((f[j] / f[last]).ln() / (r_far / r[j]).ln())
}

/// `N f` on the grid. Beyond the last node the source is continued as
/// `C r^-(n+2)` and its contribution added in closed form.
pub fn newton_potential_with_derivative(f: &[f64], grid: &RadialGrid, n: usize) -> Result<NewtonPotential> {
    if f.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if f.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument("source must be finite and nonnegative".into()));
    }
    let r = grid.nodes();
    if let Some(q) = tail_decay_exponent(f, r) {
        if q <= 2.0 {
            return Err(Error::NonintegrableInput(format!(
                "source decays like r^-{q:.3} near r = {}; need faster than r^-2",
                grid.last()
            )));
        }
    }
    let nf = n as f64;
    let ni = n as i32;
    let r0 = r[0];
    let r_last = grid.last();
    let inner_w: Vec<f64> = r.iter().zip(f).map(|(ri, fi)| ri.powi(ni - 1) * fi).collect();
    let outer_w: Vec<f64> = r.iter().zip(f).map(|(ri, fi)| ri * fi).collect();
    let origin = f[0] * r0.powi(ni) / nf;
    let inner: Vec<f64> = cumulative_trapezoid(r, &inner_w).into_iter().map(|c| c + origin).collect();
    let tail = f[f.len() - 1] * r_last * r_last / nf;
    let outer: Vec<f64> = reverse_cumulative_trapezoid(r, &outer_w)
        .into_iter()
        .map(|c| c + tail)
        .collect();
    let value = r
        .iter()
        .zip(inner.iter().zip(&outer))
        .map(|(ri, (a, b))| (ri.powi(2 - ni) * a + b) / (nf - 2.0))
        .collect();
    let derivative = r.iter().zip(&inner).map(|(ri, a)| -ri.powi(1 - ni) * a).collect();
    Ok(NewtonPotential { value, derivative })
}

/// `N f(r_i)`: the radial solution of `-Δu = f` decaying at infinity.
pub fn newton_potential_radial(f: &[f64], grid: &RadialGrid, n: usize) -> Result<Vec<f64>> {
    Ok(newton_potential_with_derivative(f, grid, n)?.value)
}

/// `T f = ∫ |x - y|^(2-n) f(y) dy`, the potential without the Newtonian constant.
pub fn riesz_potential_radial(f: &[f64], grid: &RadialGrid, n: usize) -> Result<Vec<f64>> {
    let scale = (n as f64 - 2.0) * sphere_area(n - 1);
    Ok(newton_potential_radial(f, grid, n)?.into_iter().map(|x| scale * x).collect())
}

/// Radial `-Δu = -(u'' + (n-1) u'/r)` by three-point differences on a
/// nonuniform grid; endpoints are left at zero.
pub fn radial_minus_laplacian(u: &[f64], grid: &RadialGrid, n: usize) -> Vec<f64> {
    let r = grid.nodes();
    let mut out = vec![0.0; r.len()];
    for i in 1..r.len() - 1 {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let denom = hm * hp * (hm + hp);
        let d2 = 2.0 * (hm * u[i + 1] - (hm + hp) * u[i] + hp * u[i - 1]) / denom;
        let d1 = (hm * hm * u[i + 1] + (hp * hp - hm * hm) * u[i] - hp * hp * u[i - 1]) / denom;
        out[i] = -(d2 + (n as f64 - 1.0) / r[i] * d1);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardState {
    pub iterate: RadialProfilePair,
    /// Sup-norm of the last update over both components.
    pub residual: f64,
    pub step: usize,
    /// The iterate is identically zero (a trivial fixed point).
    pub degenerate: bool,
}

impl PicardState {
    pub fn new(iterate: RadialProfilePair) -> Self {
        let degenerate = iterate.u.iter().chain(&iterate.v).all(|x| *x == 0.0);
        Self {
            iterate,
            residual: f64::INFINITY,
            step: 0,
            degenerate,
        }
    }
}

/// One sweep of `u ← N(u^α v^β)`, `v ← N(u^β v^α)`.
pub fn picard_step(state: &PicardState, config: &ExponentConfig) -> Result<PicardState> {
    let it = &state.iterate;
    let grid = &it.grid;
    let n = config.n();
    let (a, b) = (config.alpha(), config.beta());
    let fu: Vec<f64> = it.u.iter().zip(&it.v).map(|(u, v)| u.powf(a) * v.powf(b)).collect();
    let fv: Vec<f64> = it.u.iter().zip(&it.v).map(|(u, v)| u.powf(b) * v.powf(a)).collect();
    let (pu, pv) = rayon::join(
        || newton_potential_with_derivative(&fu, grid, n),
        || newton_potential_with_derivative(&fv, grid, n),
    );
    let (pu, pv) = (pu?, pv?);
    let sup = pu.value.iter().chain(&pv.value).cloned().fold(0.0, f64::max);
    if !(sup <= BLOWUP_SUP) {
        return Err(Error::IterateBlowup {
            step: state.step + 1,
            sup,
        });
    }
    let residual = pu
        .value
        .iter()
        .zip(&it.u)
        .chain(pv.value.iter().zip(&it.v))
        .map(|(new, old)| (new - old).abs())
        .fold(0.0, f64::max);
    let iterate = RadialProfilePair::new(grid.clone(), pu.value, pv.value, pu.derivative, pv.derivative)?;
    let degenerate = iterate.u.iter().chain(&iterate.v).all(|x| *x == 0.0);
    Ok(PicardState {
        iterate,
        residual,
        step: state.step + 1,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardRun {
    pub last: PicardState,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Iterate until the residual drops below `tol` or `max_steps` sweeps ran.
/// `observe` sees every state (for step/residual logging). No contraction is
/// assumed; a run that never settles simply reports `converged = false`.
pub fn picard_iterate<F>(
    init: PicardState,
    config: &ExponentConfig,
    max_steps: usize,
    tol: f64,
    mut observe: F,
) -> Result<PicardRun>
where
    F: FnMut(&PicardState),
{
    let mut state = init;
    let mut residuals = Vec::new();
    for _ in 0..max_steps {
        state = picard_step(&state, config)?;
        residuals.push(state.residual);
        observe(&state);
        if state.residual < tol {
            return Ok(PicardRun {
                last: state,
                residuals,
                converged: true,
            });
        }
    }
    Ok(PicardRun {
        last: state,
        residuals,
        converged: false,
    })
}

/// Kernel `|x - y|^-λ` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub n: usize,
    pub lambda: f64,
    pub angular_nodes: usize,
    /// Use `max(r, s)^(2-n)` for the sphere average when `λ = n - 2`.
    pub closed_form_harmonic: bool,
}

impl KernelSpec {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        Self {
            n,
            lambda,
            angular_nodes: DEFAULT_ANGULAR_NODES,
            closed_form_harmonic: true,
        }
        .validated()
    }

    pub fn with_angular_nodes(self, angular_nodes: usize) -> Result<Self> {
        Self { angular_nodes, ..self }.validated()
    }

    /// Force the Gauss–Legendre sphere average even when `λ = n - 2`.
    pub fn without_closed_form(self) -> Self {
        Self {
            closed_form_harmonic: false,
            ..self
        }
    }

    fn validated(self) -> Result<Self> {
        if self.n < 3 {
            return Err(Error::DimensionTooSmall(self.n));
        }
        if !(self.lambda > 0.0 && self.lambda < self.n as f64) {
            return Err(Error::InvalidArgument(format!(
                "kernel power must lie in (0, n) (got {})",
                self.lambda
            )));
        }
        if self.angular_nodes < MIN_ANGULAR_NODES {
            return Err(Error::InvalidArgument(format!(
                "angular rule needs at least {MIN_ANGULAR_NODES} nodes"
            )));
        }
        Ok(self)
    }

    fn is_harmonic(&self) -> bool {
        self.closed_form_harmonic && (self.lambda - (self.n as f64 - 2.0)).abs() < 1e-14
    }
}

/// Sphere average of `|x - y|^-λ` over `|x| = r`, `|y| = s`, by Gauss–Legendre
/// in `cos θ` with weight `(1 - cos²θ)^((n-3)/2)`.
pub struct AngularAverage {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lambda: f64,
}

impl AngularAverage {
    pub fn new(kernel: &KernelSpec) -> Self {
        let (x, w) = gauss_legendre(kernel.angular_nodes);
        let n = kernel.n as f64;
        let norm = sphere_area(kernel.n - 2) / sphere_area(kernel.n - 1);
        let weights = x
            .iter()
            .zip(&w)
            .map(|(c, wi)| norm * wi * (1.0 - c * c).powf(0.5 * (n - 3.0)))
            .collect();
        Self {
            nodes: x,
            weights,
            lambda: kernel.lambda,
        }
    }

    pub fn eval(&self, r: f64, s: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * (r * r + s * s - 2.0 * r * s * c).powf(-0.5 * self.lambda))
            .sum()
    }
}

fn trapezoid_weights(r: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (r[i + 1] - r[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// `J(f, g) = ∫∫ f(x) g(y) |x - y|^-λ dx dy` for radial `f, g`.
pub fn hls_bilinear(f: &[f64], g: &[f64], grid: &RadialGrid, kernel: &KernelSpec) -> Result<f64> {
    let n = kernel.n;
    for arr in [f, g] {
        if arr.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: arr.len(),
            });
        }
        if arr.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument("HLS inputs must be finite and nonnegative".into()));
        }
    }
    let omega = sphere_area(n - 1);
    if kernel.is_harmonic() {
        // J = ω² (n-2) ∫ r^(n-1) f(r) N g(r) dr
        let ng = newton_potential_radial(g, grid, n)?;
        let prod: Vec<f64> = f.iter().zip(&ng).map(|(a, b)| a * b).collect();
        return Ok(omega * (n as f64 - 2.0) * radial_integral(&prod, grid.nodes(), n));
    }
    if kernel.lambda >= n as f64 - 1.0 {
        return Err(Error::QuadratureDivergence(format!(
            "sphere average is singular on r = s for lambda >= n - 1 (lambda = {})",
            kernel.lambda
        )));
    }
    let r = grid.nodes();
    let w = trapezoid_weights(r);
    let ni = n as i32;
    let fw: Vec<(f64, f64)> = (0..r.len())
        .filter(|&i| f[i] > 0.0)
        .map(|i| (r[i], w[i] * r[i].powi(ni - 1) * f[i]))
        .collect();
    let gw: Vec<(f64, f64)> = (0..r.len())
        .filter(|&j| g[j] > 0.0)
        .map(|j| (r[j], w[j] * r[j].powi(ni - 1) * g[j]))
        .collect();
    let avg = AngularAverage::new(kernel);
    let total: f64 = fw
        .par_iter()
        .map(|&(ri, fi)| fi * gw.iter().map(|&(sj, gj)| gj * avg.eval(ri, sj)).sum::<f64>())
        .sum();
    Ok(omega * omega * total)
}

/// `J(f, g) / (‖f‖_r ‖g‖_s)` under `1/r + 1/s + λ/n = 2`.
pub fn hls_functional(
    f: &[f64],
    g: &[f64],
    grid: &RadialGrid,
    kernel: &KernelSpec,
    r_exp: f64,
    s_exp: f64,
) -> Result<f64> {
    if !(r_exp > 1.0 && s_exp > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "HLS exponents must exceed 1 (r = {r_exp}, s = {s_exp})"
        )));
    }
    let got = 1.0 / r_exp + 1.0 / s_exp + kernel.lambda / kernel.n as f64;
    if (got - 2.0).abs() > 1e-12 {
        return Err(Error::ExponentRelationViolated { got });
    }
    let j = hls_bilinear(f, g, grid, kernel)?;
    if j == 0.0 {
        return Ok(0.0);
    }
    let nf = lp_norm_radial(f, grid, kernel.n, r_exp)?.value;
    let ng = lp_norm_radial(g, grid, kernel.n, s_exp)?.value;
    Ok(j / (nf * ng))
}

/// Both sides of `|T f|_p <= C |f|_{np/(n+2p)}` with `p = 2n/(n-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HlsBound {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the smallest constant that works for this `f` (0 for `f = 0`).
    pub ratio: f64,
}

pub fn verify_hls_operator_bound(f: &[f64], grid: &RadialGrid, config: &ExponentConfig) -> Result<HlsBound> {
    let n = config.n();
    let p = config.sobolev_exponent();
    let q = n as f64 * p / (n as f64 + 2.0 * p);
    let tf = riesz_potential_radial(f, grid, n)?;
    let lhs = lp_norm_radial(&tf, grid, n, p)?.value;
    let rhs = lp_norm_radial(f, grid, n, q)?.value;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(HlsBound { lhs, rhs, ratio })
}
