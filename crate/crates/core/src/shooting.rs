//! Radial shooting for the coupled system and the uniqueness experiments.
//!
//! In polar form the system reads
//! `u'' + (n-1) u'/r = -u^α v^β`, `v'' + (n-1) v'/r = -u^β v^α`
//! with `u'(0) = v'(0) = 0`. Trajectories are integrated from a second-order
//! Taylor start just off the origin and classified by their tail behaviour.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExponentConfig;
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, GridSpec, RadialGrid, RadialProfilePair, DEFAULT_R0, DEFAULT_RMAX};
use crate::norm::QUAD_RTOL;
use crate::ode::{Advance, DormandPrince, Tolerances};
use crate::quadrature::cumulative_trapezoid;

/// Relative variation of `r^(n-2) u` over `[r_max/10, r_max]` below which
/// the tail counts as the critical decay plateau.
pub const PLATEAU_TOL: f64 = 0.01;

/// Ratios this close to 1 are not asserted either way in a sweep.
pub const DIAGONAL_WINDOW: f64 = 1e-3;

pub const DEFAULT_SWEEP_RATIOS: [f64; 9] = [0.5, 0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.25, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    U,
    V,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::U => "u",
            Component::V => "v",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootInput {
    pub config: ExponentConfig,
    pub u0: f64,
    pub v0: f64,
    pub r_max: f64,
    pub tolerances: Tolerances,
}

impl ShootInput {
    pub fn new(config: ExponentConfig, u0: f64, v0: f64) -> Result<Self> {
        Self {
            config,
            u0,
            v0,
            r_max: DEFAULT_RMAX,
            tolerances: Tolerances::default(),
        }
        .validated()
    }

    pub fn with_r_max(self, r_max: f64) -> Result<Self> {
        Self { r_max, ..self }.validated()
    }

    pub fn with_tolerances(self, tolerances: Tolerances) -> Result<Self> {
        Self { tolerances, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.u0 > 0.0 && self.v0 > 0.0) || !self.u0.is_finite() || !self.v0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "initial values must be positive (u0 = {}, v0 = {})",
                self.u0, self.v0
            )));
        }
        if !(self.r_max > 10.0 * DEFAULT_R0) || !self.r_max.is_finite() {
            return Err(Error::InvalidArgument(format!("r_max = {} is too small", self.r_max)));
        }
        if !(self.tolerances.abs > 0.0 && self.tolerances.rel > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(self)
    }

    /// The mirrored problem with `u0` and `v0` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u0: self.v0,
            v0: self.u0,
            ..self.clone()
        }
    }

    pub fn output_grid(&self) -> Result<RadialGrid> {
        GridSpec::geometric_to(self.r_max).build()
    }
}

/// Where a component first reached zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vanishing {
    pub which: Component,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub profile: RadialProfilePair,
    /// Set when a component hit zero; beyond that radius the profile is the
    /// trivial continuation (vanished component 0, the other harmonic).
    pub vanished: Option<Vanishing>,
    pub steps: usize,
}

fn forcing(u: f64, v: f64, a: f64, b: f64) -> f64 {
    u.max(0.0).powf(a) * v.max(0.0).powf(b)
}

/// Integrate the radial system from `(u0, v0)` out to `r_max`.
pub fn integrate_radial(input: &ShootInput) -> Result<RadialSolution> {
    let grid = input.output_grid()?;
    let r = grid.nodes();
    let cfg = &input.config;
    let (n, a, b) = (cfg.nf(), cfg.alpha(), cfg.beta());
    let rhs = move |t: f64, y: &[f64; 4]| {
        [
            y[1],
            -(n - 1.0) / t * y[1] - forcing(y[0], y[2], a, b),
            y[3],
            -(n - 1.0) / t * y[3] - forcing(y[0], y[2], b, a),
        ]
    };

    let r0 = r[0];
    let fu = input.u0.powf(a) * input.v0.powf(b);
    let fv = input.u0.powf(b) * input.v0.powf(a);
    let start = [
        input.u0 - fu * r0 * r0 / (2.0 * n),
        -fu * r0 / n,
        input.v0 - fv * r0 * r0 / (2.0 * n),
        -fv * r0 / n,
    ];

    let len = r.len();
    let mut u = Vec::with_capacity(len);
    let mut du = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    let mut dv = Vec::with_capacity(len);
    let push = |y: &[f64; 4], u: &mut Vec<f64>, du: &mut Vec<f64>, v: &mut Vec<f64>, dv: &mut Vec<f64>| {
        u.push(y[0]);
        du.push(y[1]);
        v.push(y[2]);
        dv.push(y[3]);
    };
    push(&start, &mut u, &mut du, &mut v, &mut dv);

    let mut dp = DormandPrince::new(&rhs, r0, start, 0.01 * r0, input.tolerances);
    let mut event_state: Option<(Vanishing, [f64; 4])> = None;
    for &target in &r[1..] {
        match dp.advance_to(&rhs, target, |y| y[0] <= 0.0 || y[2] <= 0.0)? {
            Advance::Reached => push(dp.y(), &mut u, &mut du, &mut v, &mut dv),
            Advance::Stopped { t_prev, y_prev } => {
                let (r_e, y_e) = locate_zero(&rhs, t_prev, &y_prev, dp.t() - t_prev);
                let which = if y_e[0] <= y_e[2] { Component::U } else { Component::V };
                event_state = Some((Vanishing { which, r: r_e }, y_e));
                break;
            }
        }
    }
    let steps = dp.steps();

    if let Some((event, y_e)) = event_state {
        let r_e = event.r;
        let cn = cfg.nf();
        for &rr in &r[u.len()..] {
            let (w_e, dw_e) = match event.which {
                Component::U => (y_e[2], y_e[3]),
                Component::V => (y_e[0], y_e[1]),
            };
            let mut w = w_e + dw_e * r_e.powf(cn - 1.0) * (rr.powf(2.0 - cn) - r_e.powf(2.0 - cn)) / (2.0 - cn);
            let mut dw = dw_e * (r_e / rr).powf(cn - 1.0);
            if w <= 0.0 {
                w = 0.0;
                dw = 0.0;
            }
            match event.which {
                Component::U => push(&[0.0, 0.0, w, dw], &mut u, &mut du, &mut v, &mut dv),
                Component::V => push(&[w, dw, 0.0, 0.0], &mut u, &mut du, &mut v, &mut dv),
            }
        }
    }

    let profile = RadialProfilePair::new(grid, u, v, du, dv)?;
    Ok(RadialSolution {
        profile,
        vanished: event_state.map(|(e, _)| e),
        steps,
    })
}

/// Bisection on the length of a single step from `(t_prev, y_prev)` for the
/// first radius where `min(u, v)` reaches zero.
fn locate_zero<F>(rhs: &F, t_prev: f64, y_prev: &[f64; 4], h_max: f64) -> (f64, [f64; 4])
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
{
    let k0 = rhs(t_prev, y_prev);
    let eval = |h: f64| DormandPrince::step(rhs, t_prev, y_prev, &k0, h).0;
    let (mut lo, mut hi) = (0.0, h_max);
    let mut y_hi = eval(hi);
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * (t_prev + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y = eval(mid);
        if y[0].min(y[2]) <= 0.0 {
            hi = mid;
            y_hi = y;
        } else {
            lo = mid;
        }
    }
    (t_prev + hi, y_hi)
}

/// Classification of a trajectory's fate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ShootKind {
    BoundState,
    PositivityFailure { which: Component, at_r: f64 },
    NoDecay { at_r: f64 },
}

impl ShootKind {
    pub fn label(&self) -> &'static str {
        match self {
            ShootKind::BoundState => "BoundState",
            ShootKind::PositivityFailure { .. } => "PositivityFailure",
            ShootKind::NoDecay { .. } => "NoDecay",
        }
    }

    pub fn is_bound_state(&self) -> bool {
        matches!(self, ShootKind::BoundState)
    }
}

impl fmt::Display for ShootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShootKind::BoundState => f.write_str("BoundState"),
            ShootKind::PositivityFailure { which, at_r } => write!(f, "PositivityFailure({which} at r = {at_r:.6})"),
            ShootKind::NoDecay { at_r } => write!(f, "NoDecay(r = {at_r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootOutcome {
    pub kind: ShootKind,
    /// First radius where `v - u` changes sign with both components positive.
    pub crossing: Option<f64>,
    pub profile: RadialProfilePair,
    pub diagnostics: BTreeMap<String, f64>,
}

/// Relative variation `(max - min) / max` of `r^(n-2) w(r)` on `[r_max/10, r_max]`.
fn plateau_variation(profile: &RadialProfilePair, w: &[f64], n: f64) -> f64 {
    let r = profile.grid.nodes();
    let r_max = profile.grid.last();
    let scaled: Vec<f64> = r
        .iter()
        .zip(w)
        .filter(|(ri, _)| **ri >= r_max / 10.0 * (1.0 - 1e-12))
        .map(|(ri, wi)| ri.powf(n - 2.0) * wi)
        .collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        f64::INFINITY
    } else {
        (max - min) / max
    }
}

fn first_crossing(profile: &RadialProfilePair) -> Option<f64> {
    let r = profile.grid.nodes();
    (0..profile.len() - 1).find_map(|i| {
        let (d0, d1) = (profile.v[i] - profile.u[i], profile.v[i + 1] - profile.u[i + 1]);
        let positive = profile.u[i] > 0.0 && profile.v[i] > 0.0 && profile.u[i + 1] > 0.0 && profile.v[i + 1] > 0.0;
        (positive && d0 * d1 < 0.0).then(|| r[i] + (r[i + 1] - r[i]) * d0 / (d0 - d1))
    })
}

/// Integrate and classify: `PositivityFailure` if a component reaches zero,
/// else `BoundState` if both tails sit on the `r^-(n-2)` plateau, else `NoDecay`.
pub fn classify(input: &ShootInput) -> Result<ShootOutcome> {
    let sol = integrate_radial(input)?;
    let n = input.config.nf();
    let profile = sol.profile;
    let var_u = plateau_variation(&profile, &profile.u, n);
    let var_v = plateau_variation(&profile, &profile.v, n);
    let kind = match sol.vanished {
        Some(Vanishing { which, r }) => ShootKind::PositivityFailure { which, at_r: r },
        None if var_u < PLATEAU_TOL && var_v < PLATEAU_TOL => ShootKind::BoundState,
        None => ShootKind::NoDecay { at_r: input.r_max },
    };
    let crossing = first_crossing(&profile);
    let last = profile.len() - 1;
    let r_last = profile.grid.last();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("u0".into(), input.u0);
    diagnostics.insert("v0".into(), input.v0);
    diagnostics.insert("steps".into(), sol.steps as f64);
    diagnostics.insert("plateau_variation_u".into(), var_u);
    diagnostics.insert("plateau_variation_v".into(), var_v);
    diagnostics.insert("tail_u".into(), r_last.powf(n - 2.0) * profile.u[last]);
    diagnostics.insert("tail_v".into(), r_last.powf(n - 2.0) * profile.v[last]);
    if let Some(event) = sol.vanished {
        diagnostics.insert("vanish_r".into(), event.r);
    }
    if let Some(r0) = crossing {
        diagnostics.insert("crossing_r".into(), r0);
    }
    Ok(ShootOutcome {
        kind,
        crossing,
        profile,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub outcome: ShootOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub base: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Ratios contradicting "bound state iff ratio = 1"; ratios inside the
    /// diagonal window (other than 1 itself) are not judged.
    pub fn violations(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|row| {
                let bound = row.outcome.kind.is_bound_state();
                if row.ratio == 1.0 {
                    !bound
                } else if (row.ratio - 1.0).abs() < DIAGONAL_WINDOW {
                    false
                } else {
                    bound
                }
            })
            .map(|row| row.ratio)
            .collect()
    }

    /// CSV with header `ratio,kind,R0,diagnostics`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ratio", "kind", "R0", "diagnostics"])?;
        for row in &self.rows {
            let mut diag: BTreeMap<String, serde_json::Value> = row
                .outcome
                .diagnostics
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                .collect();
            if let ShootKind::PositivityFailure { which, at_r } = row.outcome.kind {
                diag.insert("which".into(), serde_json::json!(which.to_string()));
                diag.insert("at_r".into(), serde_json::json!(at_r));
            }
            w.write_record([
                fmt_f64(row.ratio),
                row.outcome.kind.label().to_string(),
                row.outcome.crossing.map(fmt_f64).unwrap_or_default(),
                serde_json::to_string(&diag)?,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Classify `(u0, v0) = (base, ratio · base)` for every ratio, in parallel.
pub fn uniqueness_sweep(config: &ExponentConfig, ratios: &[f64], base: f64) -> Result<SweepTable> {
    sweep_with(config, ratios, base, |input| input)
}

/// [`uniqueness_sweep`] with a hook to adjust each shot (radius, tolerances).
pub fn sweep_with<F>(config: &ExponentConfig, ratios: &[f64], base: f64, adjust: F) -> Result<SweepTable>
where
    F: Fn(ShootInput) -> ShootInput + Sync,
{
    config.require_uniqueness()?;
    if let Some(bad) = ratios.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidArgument(format!("ratios must be positive (got {bad})")));
    }
    let rows = ratios
        .par_iter()
        .map(|&ratio| {
            let input = adjust(ShootInput::new(*config, base, ratio * base)?);
            Ok(SweepRow {
                ratio,
                outcome: classify(&input)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { base, rows })
}

/// `u^α v^β - u^β v^α`; positive iff `v > u` when `α < β`.
pub fn ordering_term(u: f64, v: f64, config: &ExponentConfig) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) {
        return Err(Error::NonpositiveInput { u, v });
    }
    let (a, b) = (config.alpha(), config.beta());
    // u^α v^α u^(β-α) ((v/u)^(β-α) - 1), with the sign carried by v - u exactly
    let growth = ((b - a) * ((v - u) / u).ln_1p()).exp_m1();
    Ok(u.powf(a) * v.powf(a) * u.powf(b - a) * growth)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralIdentityReport {
    pub r_checked: Vec<f64>,
    /// `u(0) - u(r)` and `v(0) - v(r)`.
    pub lhs_u: Vec<f64>,
    pub lhs_v: Vec<f64>,
    /// `∫_0^r τ^(1-n) ∫_0^τ s^(n-1) F ds dτ` with the matching forcing.
    pub rhs_u: Vec<f64>,
    pub rhs_v: Vec<f64>,
    pub max_abs_gap: f64,
}

/// Running double integral `∫_0^{r_i} τ^(1-n) ∫_0^τ s^(n-1) F ds dτ` on the
/// nodes `r`, with the piece on `[0, r_0]` from a constant forcing.
/// Returns `(inner, outer)` running integrals.
fn nested_integral(r: &[f64], forcing: &[f64], n: f64) -> (Vec<f64>, Vec<f64>) {
    let r0 = r[0];
    let weighted: Vec<f64> = r.iter().zip(forcing).map(|(ri, f)| ri.powf(n - 1.0) * f).collect();
    let inner: Vec<f64> = cumulative_trapezoid(r, &weighted)
        .into_iter()
        .map(|c| c + forcing[0] * r0.powf(n) / n)
        .collect();
    let outer_integrand: Vec<f64> = r.iter().zip(&inner).map(|(ri, a)| ri.powf(1.0 - n) * a).collect();
    let outer = cumulative_trapezoid(r, &outer_integrand)
        .into_iter()
        .map(|c| c + forcing[0] * r0 * r0 / (2.0 * n))
        .collect();
    (inner, outer)
}

/// `rhs` of the identity at radius `r` from the nested integrals on `nodes`,
/// finishing the partial cell with the interpolated forcing `f_r`.
fn nested_at(nodes: &[f64], forcing: &[f64], inner: &[f64], outer: &[f64], n: f64, r: f64, f_r: f64) -> f64 {
    let r0 = nodes[0];
    if r <= 0.0 {
        return 0.0;
    }
    if r < r0 {
        return forcing[0] * r * r / (2.0 * n);
    }
    let j = nodes.partition_point(|x| *x <= r).saturating_sub(1).min(nodes.len() - 1);
    if r == nodes[j] || j == nodes.len() - 1 {
        return outer[j];
    }
    let rj = nodes[j];
    let inner_r = inner[j] + 0.5 * (r - rj) * (rj.powf(n - 1.0) * forcing[j] + r.powf(n - 1.0) * f_r);
    outer[j] + 0.5 * (r - rj) * (rj.powf(1.0 - n) * inner[j] + r.powf(1.0 - n) * inner_r)
}

/// Check `u(r) = u(0) - ∫_0^r τ^(1-n) ∫_0^τ s^(n-1) u^α v^β ds dτ` (and the
/// analogue for `v`) at the given radii by nested trapezoid quadrature.
pub fn check_integral_identity(
    profile: &RadialProfilePair,
    config: &ExponentConfig,
    radii: &[f64],
) -> Result<IntegralIdentityReport> {
    let r = profile.grid.nodes();
    if let Some(bad) = radii.iter().find(|x| !(**x >= 0.0) || **x > profile.grid.last()) {
        return Err(Error::InvalidArgument(format!(
            "radius {bad} outside [0, {}]",
            profile.grid.last()
        )));
    }
    let n = config.nf();
    let (a, b) = (config.alpha(), config.beta());
    let fu: Vec<f64> = profile.u.iter().zip(&profile.v).map(|(u, v)| forcing(*u, *v, a, b)).collect();
    let fv: Vec<f64> = profile.u.iter().zip(&profile.v).map(|(u, v)| forcing(*u, *v, b, a)).collect();
    let r0 = r[0];
    let u_origin = profile.u[0] + fu[0] * r0 * r0 / (2.0 * n);
    let v_origin = profile.v[0] + fv[0] * r0 * r0 / (2.0 * n);

    let fine_u = nested_integral(r, &fu, n);
    let fine_v = nested_integral(r, &fv, n);
    let idx = profile.grid.coarse_indices();
    let rc: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
    let fuc: Vec<f64> = idx.iter().map(|&i| fu[i]).collect();
    let fvc: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
    let coarse_u = nested_integral(&rc, &fuc, n);
    let coarse_v = nested_integral(&rc, &fvc, n);

    let mut report = IntegralIdentityReport {
        r_checked: radii.to_vec(),
        lhs_u: Vec::new(),
        lhs_v: Vec::new(),
        rhs_u: Vec::new(),
        rhs_v: Vec::new(),
        max_abs_gap: 0.0,
    };
    for &rr in radii {
        let (lu, lv, ru, rv, cu, cv);
        if rr == 0.0 {
            (lu, lv, ru, rv, cu, cv) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        } else if rr < r0 {
            // Taylor region: both sides agree by construction
            (ru, rv) = (fu[0] * rr * rr / (2.0 * n), fv[0] * rr * rr / (2.0 * n));
            (lu, lv, cu, cv) = (ru, rv, ru, rv);
        } else {
            let (u_r, v_r) = profile.interpolate(rr);
            let (fu_r, fv_r) = (forcing(u_r, v_r, a, b), forcing(u_r, v_r, b, a));
            lu = u_origin - u_r;
            lv = v_origin - v_r;
            ru = nested_at(r, &fu, &fine_u.0, &fine_u.1, n, rr, fu_r);
            rv = nested_at(r, &fv, &fine_v.0, &fine_v.1, n, rr, fv_r);
            cu = nested_at(&rc, &fuc, &coarse_u.0, &coarse_u.1, n, rr, fu_r);
            cv = nested_at(&rc, &fvc, &coarse_v.0, &coarse_v.1, n, rr, fv_r);
        }
        for (fine, coarse) in [(ru, cu), (rv, cv)] {
            let estimate = (fine - coarse).abs() / 3.0;
            if estimate > QUAD_RTOL * fine.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::GridTooCoarse(format!(
                    "nested quadrature error estimate {estimate:.3e} at r = {rr}"
                )));
            }
        }
        report.max_abs_gap = report.max_abs_gap.max((lu - ru).abs()).max((lv - rv).abs());
        report.lhs_u.push(lu);
        report.lhs_v.push(lv);
        report.rhs_u.push(ru);
        report.rhs_v.push(rv);
    }
    Ok(report)
}

/// Running `W(r_i) = ∫_0^{r_i} τ^(1-n) ∫_0^τ s^(n-1) (u^α v^β - u^β v^α) ds dτ`.
///
/// For a solution, `W(r) = (v(0) - u(0)) - (v(r) - u(r))`; while `0 < u < v`
/// the integrand is positive, so `W` is positive and increasing there.
pub fn witness_integral(profile: &RadialProfilePair, config: &ExponentConfig) -> Vec<f64> {
    let (a, b) = (config.alpha(), config.beta());
    let term: Vec<f64> = profile
        .u
        .iter()
        .zip(&profile.v)
        .map(|(u, v)| forcing(*u, *v, a, b) - forcing(*u, *v, b, a))
        .collect();
    nested_integral(profile.grid.nodes(), &term, config.nf()).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::BubbleParams;
    use crate::config::validate_config;
    use approx::assert_relative_eq;

    fn cfg() -> ExponentConfig {
        validate_config(3, 2.0, 3.0).unwrap()
    }

    #[test]
    fn ordering_term_examples() {
        let c = cfg();
        assert_relative_eq!(ordering_term(1.0, 2.0, &c).unwrap(), 4.0, max_relative = 1e-15);
        assert_eq!(ordering_term(5.0, 5.0, &c).unwrap(), 0.0);
        assert_relative_eq!(ordering_term(2.0, 1.0, &c).unwrap(), -4.0, max_relative = 1e-15);
        let u = 0.7f64;
        let v = f64::from_bits(u.to_bits() + 1);
        assert!(ordering_term(u, v, &c).unwrap() > 0.0);
        assert!(matches!(ordering_term(0.0, 1.0, &c), Err(Error::NonpositiveInput { .. })));
    }

    #[test]
    fn input_validation() {
        assert!(ShootInput::new(cfg(), 0.0, 1.0).is_err());
        assert!(ShootInput::new(cfg(), 1.0, -1.0).is_err());
        assert!(ShootInput::new(cfg(), 1.0, 1.0).unwrap().with_r_max(0.0).is_err());
    }

    #[test]
    fn diagonal_shot_is_the_bubble() {
        let c = cfg();
        let b = BubbleParams::centered(&c, 1.0).unwrap();
        let input = ShootInput::new(c, b.peak(), b.peak()).unwrap().with_r_max(100.0).unwrap();
        let sol = integrate_radial(&input).unwrap();
        assert!(sol.vanished.is_none());
        for (r, u) in sol.profile.grid.nodes().iter().zip(&sol.profile.u) {
            if *r <= 50.0 {
                assert_relative_eq!(*u, b.radial(*r), max_relative = 1e-6);
            }
        }
        assert_eq!(sol.profile.u, sol.profile.v);
        assert!(sol.profile.origin_consistent(10.0));
    }

    #[test]
    fn off_diagonal_shot_loses_positivity() {
        let out = classify(&ShootInput::new(cfg(), 1.0, 2.0).unwrap()).unwrap();
        match out.kind {
            ShootKind::PositivityFailure { which, at_r } => {
                assert_eq!(which, Component::U);
                assert!(at_r > 1.0 && at_r < 3.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(out.profile.u.iter().all(|x| *x >= 0.0));
        assert!(out.crossing.is_none());
    }

    #[test]
    fn identity_on_constant_profile_fails() {
        let grid = RadialGrid::geometric(1e-6, 10.0, 2801).unwrap();
        let ones = vec![1.0; grid.len()];
        let zeros = vec![0.0; grid.len()];
        let p = RadialProfilePair::new(grid, ones.clone(), ones, zeros.clone(), zeros).unwrap();
        let rep = check_integral_identity(&p, &cfg(), &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(rep.lhs_u[0], 0.0);
        assert_eq!(rep.rhs_u[0], 0.0);
        // lhs = 0, rhs = r^2 / (2n)
        assert_relative_eq!(rep.rhs_u[2], 4.0 / 6.0, max_relative = 2e-5);
        assert_relative_eq!(rep.max_abs_gap, 4.0 / 6.0, max_relative = 2e-5);
    }

    #[test]
    fn identity_rejects_radius_outside_grid() {
        let grid = RadialGrid::geometric(1e-6, 10.0, 2801).unwrap();
        let b = BubbleParams::centered(&cfg(), 1.0).unwrap();
        assert!(check_integral_identity(&b.sample_pair(&grid), &cfg(), &[20.0]).is_err());
    }

    #[test]
    fn sweep_requires_alpha_below_beta() {
        let c = validate_config(3, 2.5, 2.5).unwrap();
        assert!(matches!(
            uniqueness_sweep(&c, &[1.0], 1.0),
            Err(Error::HypothesisNotApplicable { .. })
        ));
    }
}
