//! The acceptance checks, runnable from the CLI (`verify-all`) and from the
//! test suite. Every threshold used here is a named constant.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bubble::{bubble_residual, eval_bubble, make_bubble, system_residuals, BubbleParams};
use crate::config::{validate_config, ExponentConfig};
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, DEFAULT_R0};
use crate::moving_plane::{
    critical_plane_scan, greens_reflection_identity, reflect, reflection_kernel_difference, CartesianSampler,
    PlaneParam, DEFAULT_IDENTITY_BUDGET,
};
use crate::potential::{hls_functional, newton_potential_radial, picard_step, KernelSpec, PicardState};
use crate::shooting::{
    check_integral_identity, classify, integrate_radial, ordering_term, uniqueness_sweep, Component, ShootInput,
    ShootKind, DEFAULT_SWEEP_RATIOS,
};

pub const RESIDUAL_TOL: f64 = 1e-6;
pub const SHOOT_RTOL: f64 = 1e-6;
pub const SHOOT_COMPARE_RADIUS: f64 = 50.0;
pub const IDENTITY_TOL: f64 = 1e-5;
pub const IDENTITY_CONVERGENCE: f64 = 3.5;
pub const POTENTIAL_TOL: f64 = 1e-6;
pub const PICARD_FIXED_POINT_TOL: f64 = 1e-4;
pub const GREEN_RTOL: f64 = 0.02;
pub const CONFORMAL_TOL: f64 = 1e-4;
pub const HOMOGENEITY_TOL: f64 = 1e-12;
pub const SWAP_TOL: f64 = 1e-8;
pub const PROPERTY_CASES: usize = 128;
pub const DEFAULT_SEED: u64 = 20_240_917;

pub const UNIQUENESS_RATIOS: [f64; 7] = [0.5, 0.8, 0.9, 1.0, 1.1, 1.25, 2.0];
pub const SCAN_HALF_WIDTH: f64 = 8.0;
pub const SCAN_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub property_cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            property_cases: PROPERTY_CASES,
        }
    }
}

struct Spec {
    id: u32,
    name: &'static str,
    budget_seconds: f64,
    run: fn(&VerifyOptions) -> Result<(bool, String)>,
}

const SPECS: [Spec; 12] = [
    Spec { id: 1, name: "bubble residual", budget_seconds: 9.0, run: bubble_residuals },
    Spec { id: 2, name: "system closure", budget_seconds: 3.0, run: system_closure },
    Spec { id: 3, name: "shooting matches bubble", budget_seconds: 15.0, run: shooting_oracle },
    Spec { id: 4, name: "uniqueness sweep", budget_seconds: 60.0, run: uniqueness },
    Spec { id: 5, name: "ordering sign", budget_seconds: 60.0, run: ordering_sign },
    Spec { id: 6, name: "integral identity", budget_seconds: 10.0, run: integral_identity },
    Spec { id: 7, name: "newton potential", budget_seconds: 1.0, run: newton_potential },
    Spec { id: 8, name: "picard fixed point", budget_seconds: 10.0, run: picard_fixed_point },
    Spec { id: 9, name: "moving-plane symmetry", budget_seconds: 60.0, run: plane_symmetry },
    Spec { id: 10, name: "green reflection identity", budget_seconds: 60.0, run: green_identity },
    Spec { id: 11, name: "hls invariance", budget_seconds: 30.0, run: hls_invariance },
    Spec { id: 12, name: "property suites", budget_seconds: 30.0, run: property_suites },
];

pub fn criterion_ids() -> Vec<u32> {
    SPECS.iter().map(|s| s.id).collect()
}

/// Run one criterion; errors count as failures and are reported in `detail`.
pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Result<CriterionReport> {
    let spec = SPECS
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::InvalidArgument(format!("no criterion {id}")))?;
    let start = Instant::now();
    let outcome = (spec.run)(opts);
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > spec.budget_seconds {
        passed = false;
        detail.push_str(&format!("; over time budget {}s", spec.budget_seconds));
    }
    Ok(CriterionReport {
        id: spec.id,
        name: spec.name,
        passed,
        detail,
        seconds,
        budget_seconds: spec.budget_seconds,
    })
}

pub fn verify_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    SPECS
        .iter()
        .map(|s| run_criterion(s.id, opts).expect("known id"))
        .collect()
}

/// One critical pair per dimension 3, 4, 5.
fn critical_configs() -> Result<Vec<ExponentConfig>> {
    [(3, 2.0, 3.0), (4, 1.0, 2.0), (5, 1.0, 4.0 / 3.0)]
        .iter()
        .map(|&(n, a, b)| validate_config(n, a, b))
        .collect()
}

fn bubble_residuals(_: &VerifyOptions) -> Result<(bool, String)> {
    let grid = RadialGrid::default_grid();
    let mut worst = 0.0f64;
    for config in critical_configs()? {
        for t in [0.5, 1.0, 2.0] {
            let b = BubbleParams::centered(&config, t)?;
            worst = worst.max(bubble_residual(&b, &config, &grid)?);
        }
    }
    Ok((worst <= RESIDUAL_TOL, format!("max residual {worst:.3e} (bound {RESIDUAL_TOL:e})")))
}

fn system_closure(_: &VerifyOptions) -> Result<(bool, String)> {
    let grid = RadialGrid::default_grid();
    let mut worst = 0.0f64;
    for config in critical_configs()? {
        let b = BubbleParams::centered(&config, 1.0)?;
        let (first, second) = system_residuals(&b, &config, &grid)?;
        worst = worst.max(first).max(second);
    }
    Ok((worst <= RESIDUAL_TOL, format!("max residual over both equations {worst:.3e}")))
}

fn shooting_oracle(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let worst = [0.5, 1.0, 2.0]
        .par_iter()
        .map(|&t| {
            let b = BubbleParams::centered(&config, t)?;
            let sol = integrate_radial(&ShootInput::new(config, b.peak(), b.peak())?)?;
            let p = &sol.profile;
            Ok(p.grid
                .nodes()
                .iter()
                .zip(p.u.iter().zip(&p.v))
                .filter(|(r, _)| **r <= SHOOT_COMPARE_RADIUS)
                .map(|(r, (u, v))| {
                    let phi = b.radial(*r);
                    ((u - phi) / phi).abs().max(((v - phi) / phi).abs())
                })
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst <= SHOOT_RTOL, format!("max relative error on [0, 50]: {worst:.3e}")))
}

fn uniqueness(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let table = uniqueness_sweep(&config, &UNIQUENESS_RATIOS, 1.0)?;
    let kinds: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{}:{}", r.ratio, r.outcome.kind.label()))
        .collect();
    // exact reading: bound state at ratio 1 and nowhere else
    let ok = table
        .rows
        .iter()
        .all(|r| r.outcome.kind.is_bound_state() == (r.ratio == 1.0));
    Ok((ok, kinds.join(" ")))
}

fn ordering_sign(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let mut ratios: Vec<f64> = DEFAULT_SWEEP_RATIOS.to_vec();
    ratios.extend(UNIQUENESS_RATIOS);
    let table = uniqueness_sweep(&config, &ratios, 1.0)?;
    let mut checked = 0usize;
    let mut violations = 0usize;
    for row in &table.rows {
        let p = &row.outcome.profile;
        for (u, v) in p.u.iter().zip(&p.v) {
            if *u > 0.0 && u < v {
                checked += 1;
                if !(ordering_term(*u, *v, &config)? > 0.0) {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        violations == 0 && checked > 0,
        format!("{violations} violations over {checked} nodes with 0 < u < v"),
    ))
}

fn integral_identity(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let b = BubbleParams::centered(&config, 1.0)?;
    let radii = [0.1, 1.0, 10.0];
    let grid = RadialGrid::geometric(DEFAULT_R0, 1e2, 3201)?;
    let coarse = check_integral_identity(&b.sample_pair(&grid), &config, &radii)?.max_abs_gap;
    let fine = check_integral_identity(&b.sample_pair(&grid.refined()), &config, &radii)?.max_abs_gap;
    let ratio = coarse / fine;
    Ok((
        coarse <= IDENTITY_TOL && ratio >= IDENTITY_CONVERGENCE,
        format!("gap {coarse:.3e}, refined {fine:.3e}, ratio {ratio:.2}"),
    ))
}

fn newton_potential(_: &VerifyOptions) -> Result<(bool, String)> {
    // uniform grid with a node exactly on r = 1, where the indicator takes 1/2
    let grid = RadialGrid::uniform(1e-4, 4.0, 40000)?;
    let f: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| if (r - 1.0).abs() < 1e-9 { 0.5 } else if r < 1.0 { 1.0 } else { 0.0 })
        .collect();
    let u = newton_potential_radial(&f, &grid, 3)?;
    let mass = 1.0 / 3.0; // ∫_0^1 s² ds; the potential carries no ω factor
    let centre_err = (u[0] - 0.5).abs();
    let exterior_err = grid
        .nodes()
        .iter()
        .zip(&u)
        .filter(|(r, _)| **r > 1.0 + 1e-9)
        .map(|(r, ui)| (ui - mass / r).abs())
        .fold(0.0, f64::max);
    Ok((
        centre_err <= POTENTIAL_TOL && exterior_err <= POTENTIAL_TOL,
        format!("u(0) = {:.9}, max exterior error {exterior_err:.3e}", u[0]),
    ))
}

fn picard_fixed_point(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let b = BubbleParams::centered(&config, 1.0)?;
    let state = PicardState::new(b.sample_pair(&RadialGrid::default_grid()));
    let next = picard_step(&state, &config)?;
    Ok((
        next.residual <= PICARD_FIXED_POINT_TOL,
        format!("residual {:.3e}", next.residual),
    ))
}

fn plane_symmetry(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let sampler = CartesianSampler::axisymmetric(3, SCAN_HALF_WIDTH, SCAN_NODES)?;
    let cell = sampler.cell();
    // sweep [-2L, 2L] at half-cell spacing
    let count = (8.0 * SCAN_HALF_WIDTH / cell) as usize + 1;
    let lambdas: Vec<f64> = (0..count).map(|i| -2.0 * SCAN_HALF_WIDTH + 0.5 * cell * i as f64).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for c1 in [0.0, 1.0] {
        let b = make_bubble(&config, &[c1, 0.0, 0.0], 1.0)?;
        let field = |x: &[f64]| eval_bubble(&b, x);
        let scan = critical_plane_scan(&field, &field, &sampler, &lambdas)?;
        let beyond_empty = scan
            .rows
            .iter()
            .filter(|r| r.lambda > scan.lambda0 + cell)
            .all(|r| r.bu_empty && r.bv_empty);
        ok &= (scan.lambda0 - c1).abs() <= cell && beyond_empty && !scan.degenerate;
        parts.push(format!("centre {c1}: lambda0 = {:.4}", scan.lambda0));
    }
    Ok((ok, format!("{} (cell {cell})", parts.join(", "))))
}

fn green_identity(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let b = make_bubble(&config, &[1.0, 0.0, 0.0], 1.0)?;
    let cases = [(0.0, -1.0), (0.5, -0.5), (-0.5, -2.0)];
    let mut worst = 0.0f64;
    for (lambda, x1) in cases {
        let plane = PlaneParam::along_e1(3, lambda)?;
        let sides = greens_reflection_identity(&b, &plane, &[x1, 0.0, 0.0], &config, DEFAULT_IDENTITY_BUDGET)?;
        worst = worst.max(sides.relative_gap());
    }
    Ok((worst <= GREEN_RTOL, format!("max relative gap {worst:.3e}")))
}

fn hls_invariance(_: &VerifyOptions) -> Result<(bool, String)> {
    let config = validate_config(3, 2.0, 3.0)?;
    let grid = RadialGrid::default_grid();
    let kernel = KernelSpec::new(3, 1.0)?;
    let e = 6.0 / 5.0;
    let extremal = |t: f64| -> Result<Vec<f64>> {
        let b = BubbleParams::centered(&config, t)?;
        Ok(grid.nodes().iter().map(|&r| b.radial(r).powi(5)).collect())
    };
    let ratios = [0.5, 1.0, 2.0]
        .iter()
        .map(|&t| hls_functional(&extremal(t)?, &extremal(t)?, &grid, &kernel, e, e))
        .collect::<Result<Vec<f64>>>()?;
    let mean = ratios.iter().sum::<f64>() / 3.0;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean;
    let f = extremal(1.0)?;
    let mut homogeneity = 0.0f64;
    for (c, c2) in [(2.0, 10.0), (10.0, 2.0), (2.0, 2.0), (10.0, 10.0)] {
        let cf: Vec<f64> = f.iter().map(|x| c * x).collect();
        let cg: Vec<f64> = f.iter().map(|x| c2 * x).collect();
        let scaled = hls_functional(&cf, &cg, &grid, &kernel, e, e)?;
        homogeneity = homogeneity.max((scaled - ratios[1]).abs() / ratios[1]);
    }
    Ok((
        spread <= CONFORMAL_TOL && homogeneity <= HOMOGENEITY_TOL,
        format!("ratio {mean:.8}, t-spread {spread:.3e}, homogeneity {homogeneity:.3e}"),
    ))
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Involution, swap mirror, equal-start collapse and kernel positivity over
/// seeded random cases; returns the violation count of each suite.
pub fn property_violations(opts: &VerifyOptions) -> Result<[usize; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cases = opts.property_cases;
    let config = validate_config(3, 2.0, 3.0)?;

    let mut involution = 0;
    for _ in 0..cases {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let plane = PlaneParam::new(rng.gen_range(-5.0..5.0), &random_unit(&mut rng, 3))?;
        let back = reflect(&reflect(&x, &plane), &plane);
        let scale = 1.0 + x.iter().map(|v| v.abs()).sum::<f64>() + plane.lambda().abs();
        if x.iter().zip(&back).any(|(a, b)| (a - b).abs() > 8.0 * f64::EPSILON * scale) {
            involution += 1;
        }
    }

    let starts: Vec<(f64, f64)> = (0..cases)
        .map(|_| (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)))
        .collect();
    let swap = starts
        .par_iter()
        .map(|&(u0, v0)| -> Result<usize> {
            let a = classify(&ShootInput::new(config, u0, v0)?)?;
            let b = classify(&ShootInput::new(config, v0, u0)?)?;
            let kinds_mirror = match (a.kind, b.kind) {
                (ShootKind::BoundState, ShootKind::BoundState) => true,
                (ShootKind::NoDecay { .. }, ShootKind::NoDecay { .. }) => true,
                (
                    ShootKind::PositivityFailure { which: wa, at_r: ra },
                    ShootKind::PositivityFailure { which: wb, at_r: rb },
                ) => wa == mirrored(wb) && (ra - rb).abs() <= SWAP_TOL * ra,
                _ => false,
            };
            let scale = a.profile.u.iter().chain(&a.profile.v).cloned().fold(0.0, f64::max);
            let gap = a
                .profile
                .u
                .iter()
                .zip(&b.profile.v)
                .chain(a.profile.v.iter().zip(&b.profile.u))
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            Ok(usize::from(!kinds_mirror || gap > SWAP_TOL * scale))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();

    let diag: Vec<f64> = (0..cases).map(|_| rng.gen_range(0.2..5.0)).collect();
    let collapse = diag
        .par_iter()
        .map(|&a| -> Result<usize> {
            let input = ShootInput::new(config, a, a)?;
            let sol = integrate_radial(&input)?;
            let tol = input.tolerances.abs + input.tolerances.rel * a;
            let gap = sol
                .profile
                .u
                .iter()
                .zip(&sol.profile.v)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            Ok(usize::from(gap > tol))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();

    let mut positivity = 0;
    let mut tried = 0;
    while tried < cases {
        let lambda = rng.gen_range(-3.0..3.0);
        let plane = PlaneParam::along_e1(3, lambda)?;
        let mut point = || -> Vec<f64> {
            let mut p: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            p[0] = lambda - rng.gen_range(1e-3..8.0);
            p
        };
        let (x, y) = (point(), point());
        tried += 1;
        if !(reflection_kernel_difference(&x, &y, &plane) > 0.0) {
            positivity += 1;
        }
    }
    Ok([involution, swap, collapse, positivity])
}

fn property_suites(opts: &VerifyOptions) -> Result<(bool, String)> {
    let [inv, swap, collapse, pos] = property_violations(opts)?;
    let cases = opts.property_cases;
    Ok((
        inv + swap + collapse + pos == 0 && cases >= 100,
        format!(
            "{cases} cases each, seed {}: involution {inv}, swap {swap}, collapse {collapse}, kernel {pos} violations",
            opts.seed
        ),
    ))
}

fn mirrored(which: Component) -> Component {
    match which {
        Component::U => Component::V,
        Component::V => Component::U,
    }
}
