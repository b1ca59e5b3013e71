//! Reflections across hyperplanes, exceedance sets, and the integral
//! estimates behind the moving-plane argument, evaluated on sampled fields.
//!
//! Fields are plain closures `Fn(&[f64]) -> f64`. Two samplers are offered: a
//! full Cartesian midpoint grid (n = 3, 4) and an axisymmetric grid in
//! `(x·e, ρ)` for fields that are rotationally symmetric about the line
//! through the origin along the plane normal `e`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bubble::BubbleParams;
use crate::config::ExponentConfig;
use crate::error::{Error, Result};
use crate::norm::LpNorm;
use crate::quadrature::{gauss_legendre_on, sphere_area};

/// Relative band inside which `f(x_λ)` and `f(x)` count as equal.
pub const TIE_RTOL: f64 = 1e-12;
pub const DEFAULT_SAMPLER_BUDGET: usize = 20_000_000;
pub const DEFAULT_IDENTITY_BUDGET: usize = 1_000_000;
pub const DEFAULT_SWEEP_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneParam {
    lambda: f64,
    direction: Vec<f64>,
}

impl PlaneParam {
    /// Plane `{x : x·e = λ}`; `direction` is normalized.
    pub fn new(lambda: f64, direction: &[f64]) -> Result<Self> {
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !lambda.is_finite() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("plane needs finite lambda and nonzero direction".into()));
        }
        Ok(Self {
            lambda,
            direction: direction.iter().map(|d| d / norm).collect(),
        })
    }

    pub fn along_e1(n: usize, lambda: f64) -> Result<Self> {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        Self::new(lambda, &e)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// Signed distance `x·e - λ`; negative on the half-space `H_λ`.
    pub fn offset(&self, x: &[f64]) -> f64 {
        dot(x, &self.direction) - self.lambda
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.offset(x) < 0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x - 2(x·e - λ)e`.
pub fn reflect(x: &[f64], plane: &PlaneParam) -> Vec<f64> {
    let s = 2.0 * plane.offset(x);
    x.iter().zip(&plane.direction).map(|(xi, ei)| xi - s * ei).collect()
}

/// `|x - y|^(2-n) - |x_λ - y|^(2-n)`, positive for `x, y ∈ H_λ`.
pub fn reflection_kernel_difference(x: &[f64], y: &[f64], plane: &PlaneParam) -> f64 {
    let n = x.len() as f64;
    let xl = reflect(x, plane);
    let d2 = |a: &[f64]| a.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    d2(x).powf(0.5 * (2.0 - n)) - d2(&xl).powf(0.5 * (2.0 - n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    Full,
    Axisymmetric,
}

/// Midpoint grid on `[-L, L]^n` (full) or on `[-L, L] × [0, L]` in `(x·e, ρ)`
/// (axisymmetric), with `m` cells along each full axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartesianSampler {
    half_width: f64,
    nodes_per_axis: usize,
    n: usize,
    mode: SamplerMode,
    budget: usize,
}

/// One sample point: position and the measure it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleNode {
    pub x: Vec<f64>,
    pub weight: f64,
}

impl CartesianSampler {
    pub fn full(n: usize, half_width: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(3..=4).contains(&n) {
            return Err(Error::InvalidArgument(format!("full scans support n = 3, 4 (got {n})")));
        }
        Self::build(n, half_width, nodes_per_axis, SamplerMode::Full)
    }

    pub fn axisymmetric(n: usize, half_width: f64, nodes_per_axis: usize) -> Result<Self> {
        Self::build(n, half_width, nodes_per_axis, SamplerMode::Axisymmetric)
    }

    fn build(n: usize, half_width: f64, nodes_per_axis: usize, mode: SamplerMode) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        if !(half_width > 0.0 && half_width.is_finite()) || nodes_per_axis < 2 || !nodes_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "sampler needs L > 0 and an even node count of at least 2".into(),
            ));
        }
        Ok(Self {
            half_width,
            nodes_per_axis,
            n,
            mode,
            budget: DEFAULT_SAMPLER_BUDGET,
        })
    }

    pub fn with_budget(self, budget: usize) -> Self {
        Self { budget, ..self }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    /// Edge length of one cell.
    pub fn cell(&self) -> f64 {
        2.0 * self.half_width / self.nodes_per_axis as f64
    }

    pub fn node_count(&self) -> usize {
        let m = self.nodes_per_axis;
        match self.mode {
            SamplerMode::Full => m.saturating_pow(self.n as u32),
            SamplerMode::Axisymmetric => m * m / 2,
        }
    }

    fn midpoint(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.cell()
    }

    /// All nodes for reflections across `plane`. The axisymmetric layout is
    /// oriented along the plane normal.
    pub fn nodes(&self, plane: &PlaneParam) -> Result<Vec<SampleNode>> {
        if plane.dim() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: plane.dim(),
            });
        }
        let total = self.node_count();
        if total > self.budget {
            return Err(Error::BudgetExceeded {
                nodes: total,
                budget: self.budget,
            });
        }
        let m = self.nodes_per_axis;
        let h = self.cell();
        match self.mode {
            SamplerMode::Full => {
                let w = h.powi(self.n as i32);
                Ok((0..total)
                    .map(|mut idx| {
                        let mut x = vec![0.0; self.n];
                        for xi in x.iter_mut() {
                            *xi = self.midpoint(idx % m);
                            idx /= m;
                        }
                        SampleNode { x, weight: w }
                    })
                    .collect())
            }
            SamplerMode::Axisymmetric => {
                let e = plane.direction();
                let perp = orthogonal_unit(e);
                let ring = sphere_area(self.n - 2);
                let mut out = Vec::with_capacity(total);
                for i in 0..m {
                    let a = self.midpoint(i);
                    for j in 0..m / 2 {
                        let rho = (j as f64 + 0.5) * h;
                        let x = e.iter().zip(&perp).map(|(ei, pi)| a * ei + rho * pi).collect();
                        let weight = h * h * ring * rho.powi(self.n as i32 - 2);
                        out.push(SampleNode { x, weight });
                    }
                }
                Ok(out)
            }
        }
    }
}

/// A unit vector orthogonal to the unit vector `e`.
fn orthogonal_unit(e: &[f64]) -> Vec<f64> {
    let k = (0..e.len())
        .min_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs()))
        .unwrap_or(0);
    let mut p: Vec<f64> = e.iter().map(|ei| -e[k] * ei).collect();
    p[k] += 1.0;
    let norm = dot(&p, &p).sqrt();
    p.iter().map(|x| x / norm).collect()
}

fn exceeds(reflected: f64, original: f64) -> bool {
    reflected - original > TIE_RTOL * reflected.abs().max(original.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceSet {
    pub measure: f64,
    pub nodes: Vec<Vec<f64>>,
}

impl ExceedanceSet {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes of `H_λ` where `field(x_λ) > field(x)`, and their total measure.
pub fn exceedance_sets<F>(field: &F, plane: &PlaneParam, sampler: &CartesianSampler) -> Result<ExceedanceSet>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let nodes = sampler.nodes(plane)?;
    let hits: Vec<(Vec<f64>, f64)> = nodes
        .into_par_iter()
        .filter(|node| plane.contains(&node.x) && exceeds(field(&reflect(&node.x, plane)), field(&node.x)))
        .map(|node| (node.x, node.weight))
        .collect();
    let measure = hits.iter().fold(0.0, |acc, (_, w)| acc + w);
    Ok(ExceedanceSet {
        measure,
        nodes: hits.into_iter().map(|(x, _)| x).collect(),
    })
}

/// Every norm and inequality margin of the reflection estimates at one plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectionReport {
    pub lambda: f64,
    pub bu_measure: f64,
    pub bv_measure: f64,
    pub norms: BTreeMap<String, LpNorm>,
    pub inequality_margins: BTreeMap<String, f64>,
}

impl ReflectionReport {
    pub fn norm(&self, name: &str) -> f64 {
        self.norms.get(name).map_or(0.0, |n| n.value)
    }
}

#[derive(Default, Clone, Copy)]
struct PowerSums {
    diff: f64,
    u_refl: f64,
    v_refl: f64,
}

impl PowerSums {
    fn add(self, o: Self) -> Self {
        Self {
            diff: self.diff + o.diff,
            u_refl: self.u_refl + o.u_refl,
            v_refl: self.v_refl + o.v_refl,
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Accum {
    bu: PowerSums,
    bv: PowerSums,
    bu_measure: f64,
    bv_measure: f64,
    u_box: f64,
    v_box: f64,
}

impl Accum {
    fn add(self, o: Self) -> Self {
        Self {
            bu: self.bu.add(o.bu),
            bv: self.bv.add(o.bv),
            bu_measure: self.bu_measure + o.bu_measure,
            bv_measure: self.bv_measure + o.bv_measure,
            u_box: self.u_box + o.u_box,
            v_box: self.v_box + o.v_box,
        }
    }
}

/// Norms over `B^u_λ`, `B^v_λ` with `p = 2n/(n-2)`, plus both sides of the
/// two coupled reflection estimates (with the constant factored out) and the
/// smallness factors relative to the norms over the whole sampled box.
pub fn reflection_inequality_check<U, V>(
    u_field: &U,
    v_field: &V,
    plane: &PlaneParam,
    config: &ExponentConfig,
    sampler: &CartesianSampler,
) -> Result<ReflectionReport>
where
    U: Fn(&[f64]) -> f64 + Sync,
    V: Fn(&[f64]) -> f64 + Sync,
{
    if config.n() != sampler.n() {
        return Err(Error::LengthMismatch {
            expected: sampler.n(),
            got: config.n(),
        });
    }
    let p = config.sobolev_exponent();
    let nodes = sampler.nodes(plane)?;
    let acc = nodes
        .par_iter()
        .map(|node| {
            let (u, v) = (u_field(&node.x), v_field(&node.x));
            let mut a = Accum {
                u_box: node.weight * u.abs().powf(p),
                v_box: node.weight * v.abs().powf(p),
                ..Accum::default()
            };
            if plane.contains(&node.x) {
                let xl = reflect(&node.x, plane);
                let (ul, vl) = (u_field(&xl), v_field(&xl));
                let sums = |diff: f64| PowerSums {
                    diff: node.weight * diff.abs().powf(p),
                    u_refl: node.weight * ul.abs().powf(p),
                    v_refl: node.weight * vl.abs().powf(p),
                };
                if exceeds(ul, u) {
                    a.bu = sums(ul - u);
                    a.bu_measure = node.weight;
                }
                if exceeds(vl, v) {
                    a.bv = sums(vl - v);
                    a.bv_measure = node.weight;
                }
            }
            a
        })
        .reduce(Accum::default, Accum::add);

    let root = |s: f64| s.powf(1.0 / p);
    let entries = [
        ("u_lambda_minus_u|Bu", root(acc.bu.diff)),
        ("v_lambda_minus_v|Bv", root(acc.bv.diff)),
        ("u_lambda|Bu", root(acc.bu.u_refl)),
        ("v_lambda|Bu", root(acc.bu.v_refl)),
        ("u_lambda|Bv", root(acc.bv.u_refl)),
        ("v_lambda|Bv", root(acc.bv.v_refl)),
        ("u|box", root(acc.u_box)),
        ("v|box", root(acc.v_box)),
    ];
    let norms: BTreeMap<String, LpNorm> = entries
        .iter()
        .map(|(name, value)| {
            let domain = name.split('|').nth(1).unwrap_or("box").to_string();
            (name.to_string(), LpNorm { p, value: *value, domain })
        })
        .collect();
    let g = |k: &str| norms[k].value;
    let (a, b) = (config.alpha(), config.beta());
    let (du, dv) = (g("u_lambda_minus_u|Bu"), g("v_lambda_minus_v|Bv"));
    // products with an empty-set factor vanish even where 0^0 = 1 appears
    let term = |x: f64, ex: f64, y: f64, ey: f64, d: f64| if d == 0.0 { 0.0 } else { x.powf(ex) * y.powf(ey) * d };
    let rhs_u = term(g("u_lambda|Bu"), a - 1.0, g("v_lambda|Bu"), b, du)
        + term(g("u_lambda|Bv"), a, g("v_lambda|Bv"), b - 1.0, dv);
    let rhs_v = term(g("v_lambda|Bv"), a - 1.0, g("u_lambda|Bv"), b, dv)
        + term(g("v_lambda|Bu"), a, g("u_lambda|Bu"), b - 1.0, du);
    let implied = |lhs: f64, rhs: f64| if rhs > 0.0 { lhs / rhs } else { 0.0 };
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let mut margins = BTreeMap::new();
    margins.insert("u_estimate_lhs".to_string(), du);
    margins.insert("u_estimate_rhs_over_c".to_string(), rhs_u);
    margins.insert("u_estimate_implied_c".to_string(), implied(du, rhs_u));
    margins.insert("v_estimate_lhs".to_string(), dv);
    margins.insert("v_estimate_rhs_over_c".to_string(), rhs_v);
    margins.insert("v_estimate_implied_c".to_string(), implied(dv, rhs_v));
    margins.insert(
        "smallness_u".to_string(),
        ratio(g("u_lambda|Bu").max(g("u_lambda|Bv")), g("u|box")),
    );
    margins.insert(
        "smallness_v".to_string(),
        ratio(g("v_lambda|Bv").max(g("v_lambda|Bu")), g("v|box")),
    );
    Ok(ReflectionReport {
        lambda: plane.lambda(),
        bu_measure: acc.bu_measure,
        bv_measure: acc.bv_measure,
        norms,
        inequality_margins: margins,
    })
}

/// Both sides of the reflected Green representation at a point `x ∈ H_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentitySides {
    /// `φ(x_λ) - φ(x)` from the closed form.
    pub lhs: f64,
    /// The integral over `H_λ` by product Gauss quadrature.
    pub rhs: f64,
    pub nodes: usize,
}

impl IdentitySides {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / scale
        }
    }
}

const ANGULAR_PANELS: usize = 16;
const PANEL_NODES: usize = 16;

/// `u_λ(x) - u(x) = ∫_{H_λ} (f(y_λ) - f(y)) (G(x - y) - G(x_λ - y)) dy` for the
/// bubble pair `u = v = φ` with `f = φ^α φ^β` and the normalized Green kernel
/// `G(z) = |z|^(2-n) / ((n-2) ω_{n-1})`.
///
/// `x` must lie on the line through the bubble centre along the plane normal,
/// so that the integrand is axisymmetric about that line; the integral is then
/// done in polar coordinates `(R, ψ)` centred at `x`.
pub fn greens_reflection_identity(
    bubble: &BubbleParams,
    plane: &PlaneParam,
    x: &[f64],
    config: &ExponentConfig,
    budget: usize,
) -> Result<IdentitySides> {
    let n = config.n();
    if bubble.n() != n || plane.dim() != n || x.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x.len() });
    }
    let e = plane.direction();
    let xi_p = -plane.offset(x);
    if !(xi_p > 0.0) {
        return Err(Error::InvalidArgument("x must lie in the open half-space H_lambda".into()));
    }
    let rel: Vec<f64> = bubble.center().iter().zip(x).map(|(c, xi)| c - xi).collect();
    let xi_c = dot(&rel, e);
    let off_axis = rel
        .iter()
        .zip(e)
        .map(|(r, ei)| (r - xi_c * ei).powi(2))
        .sum::<f64>()
        .sqrt();
    if off_axis > 1e-12 * (1.0 + dot(&rel, &rel).sqrt()) {
        return Err(Error::InvalidArgument(
            "x must lie on the axis through the bubble centre along the plane normal".into(),
        ));
    }

    let lhs = bubble.at_squared_radius((2.0 * xi_p - xi_c).powi(2)) - bubble.at_squared_radius(xi_c * xi_c);
    let (a, b) = (config.alpha(), config.beta());
    let source = |d2: f64| {
        let phi = bubble.at_squared_radius(d2);
        phi.powf(a) * phi.powf(b)
    };
    let nf = n as f64;
    let t = bubble.t();
    let prefactor = sphere_area(n - 2) / ((nf - 2.0) * sphere_area(n - 1));
    let r_far = 1e3 * (t + xi_c.abs() + xi_p);

    // radial breakpoints shared by all directions
    let mut breaks = vec![0.0];
    let mut r = t.min(xi_p) / 64.0;
    while r < r_far {
        breaks.push(r);
        r *= 2.0;
    }
    for centre in [xi_c.abs(), (2.0 * xi_p - xi_c).abs(), 2.0 * xi_p] {
        for shift in [-t, -0.25 * t, 0.0, 0.25 * t, t] {
            breaks.push(centre + shift);
        }
    }
    breaks.push(r_far);
    breaks.retain(|r| *r >= 0.0 && *r <= r_far);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * r_far);

    let angular: Vec<(f64, f64)> = (0..ANGULAR_PANELS)
        .flat_map(|k| {
            let h = std::f64::consts::PI / ANGULAR_PANELS as f64;
            let (x, w) = gauss_legendre_on(PANEL_NODES, k as f64 * h, (k + 1) as f64 * h);
            x.into_iter().zip(w)
        })
        .collect();
    let nodes = angular.len() * (breaks.len() - 1) * PANEL_NODES;
    if nodes > budget {
        return Err(Error::QuadratureBudgetExceeded { nodes, budget });
    }

    let integrand = |rr: f64, cos: f64, sin: f64| {
        let (xi, rho) = (rr * cos, rr * sin);
        let rho2 = rho * rho;
        let s = source((2.0 * xi_p - xi - xi_c).powi(2) + rho2) - source((xi - xi_c).powi(2) + rho2);
        let d2 = (2.0 * xi_p - xi).powi(2) + rho2;
        // R^(n-1) (R^(2-n) - D^(2-n)) without forming R^(2-n)
        let kernel = rr - rr.powi(n as i32 - 1) * d2.powf(0.5 * (2.0 - nf));
        s * kernel
    };

    let rhs: f64 = angular
        .par_iter()
        .map(|&(psi, w_psi)| {
            let (sin, cos) = psi.sin_cos();
            let r_max = if cos > 0.0 { (xi_p / cos).min(r_far) } else { r_far };
            let mut total = 0.0;
            for pair in breaks.windows(2) {
                let (lo, hi) = (pair[0], pair[1].min(r_max));
                if hi <= lo {
                    break;
                }
                let (rs, ws) = gauss_legendre_on(PANEL_NODES, lo, hi);
                total += rs.iter().zip(&ws).map(|(rr, w)| w * integrand(*rr, cos, sin)).sum::<f64>();
            }
            if r_max >= r_far {
                // tail continued as R^-(n+2)
                total += integrand(r_far, cos, sin) * r_far / (nf + 1.0);
            }
            w_psi * sin.powi(n as i32 - 2) * total
        })
        .sum();
    Ok(IdentitySides {
        lhs,
        rhs: prefactor * rhs,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub bu_measure: f64,
    pub bv_measure: f64,
    pub bu_empty: bool,
    pub bv_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneScan {
    /// Smallest swept λ with `B^u` empty at it and every larger swept λ.
    pub lambda0: f64,
    /// Every set was empty (e.g. a vanishing field).
    pub degenerate: bool,
    pub cell: f64,
    pub rows: Vec<ScanRow>,
}

/// `λ` values evenly covering `[-2L, 2L]`.
pub fn default_lambdas(sampler: &CartesianSampler) -> Vec<f64> {
    let l = sampler.half_width();
    let k = DEFAULT_SWEEP_LEN;
    (0..k).map(|i| -2.0 * l + 4.0 * l * i as f64 / (k - 1) as f64).collect()
}

/// Sweep planes `x₁ = λ` and locate the critical position `λ₀`.
pub fn critical_plane_scan<U, V>(
    u_field: &U,
    v_field: &V,
    sampler: &CartesianSampler,
    lambdas: &[f64],
) -> Result<PlaneScan>
where
    U: Fn(&[f64]) -> f64 + Sync,
    V: Fn(&[f64]) -> f64 + Sync,
{
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda sweep".into()));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows = sorted
        .par_iter()
        .map(|&lambda| {
            let plane = PlaneParam::along_e1(sampler.n(), lambda)?;
            let bu = exceedance_sets(u_field, &plane, sampler)?;
            let bv = exceedance_sets(v_field, &plane, sampler)?;
            Ok(ScanRow {
                lambda,
                bu_measure: bu.measure,
                bv_measure: bv.measure,
                bu_empty: bu.is_empty(),
                bv_empty: bv.is_empty(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last_hit = rows.iter().rposition(|r| !r.bu_empty);
    let lambda0 = match last_hit {
        None => rows[0].lambda,
        Some(k) if k + 1 == rows.len() => {
            return Err(Error::ScanInconclusive(
                "exceedance set never empties inside the sweep".into(),
            ))
        }
        Some(k) => {
            // planes left of every node give empty sets vacuously; skip those
            let first_node = -sampler.half_width() + 0.5 * sampler.cell();
            if let Some(gap) = rows[..k].iter().find(|r| r.bu_empty && r.lambda > first_node) {
                return Err(Error::ScanInconclusive(format!(
                    "exceedance set empty at lambda = {} but not at lambda = {}",
                    gap.lambda, rows[k].lambda
                )));
            }
            rows[k + 1].lambda
        }
    };
    Ok(PlaneScan {
        lambda0,
        degenerate: rows.iter().all(|r| r.bu_empty && r.bv_empty),
        cell: sampler.cell(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{eval_bubble, make_bubble};
    use crate::config::validate_config;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> ExponentConfig {
        validate_config(3, 2.0, 3.0).unwrap()
    }

    fn bubble_at(c1: f64) -> BubbleParams {
        make_bubble(&cfg(), &[c1, 0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn reflect_examples() {
        let p = PlaneParam::along_e1(3, 1.0).unwrap();
        assert_eq!(reflect(&[0.0, 0.0, 0.0], &p), vec![2.0, 0.0, 0.0]);
        assert_eq!(reflect(&[1.0, 3.0, -2.0], &p), vec![1.0, 3.0, -2.0]);
        let q = PlaneParam::new(0.0, &[3.0, 4.0]).unwrap();
        assert_relative_eq!(q.direction()[0], 0.6);
        assert!(PlaneParam::new(0.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn exceedance_examples() {
        let s = CartesianSampler::axisymmetric(3, 4.0, 64).unwrap();
        let centred = bubble_at(0.0);
        let shifted = bubble_at(1.0);
        let f0 = |x: &[f64]| eval_bubble(&centred, x);
        let f1 = |x: &[f64]| eval_bubble(&shifted, x);
        let p = PlaneParam::along_e1(3, 0.5).unwrap();
        assert!(exceedance_sets(&f0, &p, &s).unwrap().is_empty());
        let p = PlaneParam::along_e1(3, 0.0).unwrap();
        let b = exceedance_sets(&f1, &p, &s).unwrap();
        assert!(!b.is_empty() && b.measure > 0.0);
        let p = PlaneParam::along_e1(3, 13.0).unwrap();
        assert!(exceedance_sets(&f1, &p, &s).unwrap().is_empty());
    }

    #[test]
    fn full_and_axisymmetric_measures_agree() {
        let shifted = bubble_at(1.0);
        let f = |x: &[f64]| eval_bubble(&shifted, x);
        let p = PlaneParam::along_e1(3, 0.0).unwrap();
        // B = {x₁ < 0} in both; the cylinder and the cube differ in cross-section
        let full = exceedance_sets(&f, &p, &CartesianSampler::full(3, 2.0, 32).unwrap()).unwrap();
        assert_relative_eq!(full.measure, 2.0 * 4.0 * 4.0, max_relative = 1e-12);
        let axi = exceedance_sets(&f, &p, &CartesianSampler::axisymmetric(3, 2.0, 64).unwrap()).unwrap();
        assert_relative_eq!(axi.measure, 2.0 * std::f64::consts::PI * 4.0, max_relative = 1e-3);
    }

    #[test]
    fn budget_is_enforced() {
        let s = CartesianSampler::full(3, 1.0, 64).unwrap().with_budget(1000);
        let p = PlaneParam::along_e1(3, 0.0).unwrap();
        assert!(matches!(
            exceedance_sets(&|_: &[f64]| 0.0, &p, &s),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(CartesianSampler::full(5, 1.0, 8).is_err());
    }

    #[test]
    fn report_for_symmetric_pair_is_empty() {
        let b = bubble_at(0.0);
        let f = |x: &[f64]| eval_bubble(&b, x);
        let s = CartesianSampler::axisymmetric(3, 10.0, 64).unwrap();
        let p = PlaneParam::along_e1(3, 1.0).unwrap();
        let rep = reflection_inequality_check(&f, &f, &p, &cfg(), &s).unwrap();
        assert_eq!(rep.bu_measure, 0.0);
        assert_eq!(rep.bv_measure, 0.0);
        for (name, norm) in &rep.norms {
            if !name.ends_with("|box") {
                assert_eq!(norm.value, 0.0, "{name}");
            }
        }
        assert!(rep.norm("u|box") > 0.0);
    }

    #[test]
    fn zero_fields_give_zero_report() {
        let z = |_: &[f64]| 0.0;
        let s = CartesianSampler::axisymmetric(3, 10.0, 32).unwrap();
        let p = PlaneParam::along_e1(3, -1.0).unwrap();
        let rep = reflection_inequality_check(&z, &z, &p, &cfg(), &s).unwrap();
        assert!(rep.norms.values().all(|n| n.value == 0.0));
        assert!(rep.inequality_margins.values().all(|m| *m == 0.0));
    }

    #[test]
    fn planes_far_out_have_small_sets() {
        let b = bubble_at(1.0);
        let f = |x: &[f64]| eval_bubble(&b, x);
        let s = CartesianSampler::axisymmetric(3, 10.0, 64).unwrap();
        let report = |lambda: f64| {
            let p = PlaneParam::along_e1(3, lambda).unwrap();
            reflection_inequality_check(&f, &f, &p, &cfg(), &s).unwrap()
        };
        for lambda in [5.0, 8.0] {
            let rep = report(lambda);
            assert!(rep.inequality_margins["smallness_u"] < 0.1);
            assert!(rep.inequality_margins["smallness_v"] < 0.1);
        }
        // from the far side the factors shrink as the plane moves out
        let near = report(-5.0).inequality_margins["smallness_u"];
        let far = report(-9.5).inequality_margins["smallness_u"];
        assert!(far < near && far > 0.0, "{far} {near}");
    }

    #[test]
    fn scan_finds_the_centre() {
        let s = CartesianSampler::axisymmetric(3, 8.0, 64).unwrap();
        let lambdas: Vec<f64> = (0..81).map(|i| -2.0 + 0.05 * i as f64).collect();
        for c1 in [0.0, 1.0] {
            let b = bubble_at(c1);
            let f = |x: &[f64]| eval_bubble(&b, x);
            let scan = critical_plane_scan(&f, &f, &s, &lambdas).unwrap();
            assert!((scan.lambda0 - c1).abs() <= scan.cell, "{c1}: {}", scan.lambda0);
            assert!(!scan.degenerate);
        }
        // planes left of the whole box are vacuously empty
        let b = bubble_at(1.0);
        let f = |x: &[f64]| eval_bubble(&b, x);
        let wide: Vec<f64> = (0..64).map(|i| -20.0 + 0.5 * i as f64).collect();
        assert_eq!(critical_plane_scan(&f, &f, &s, &wide).unwrap().lambda0, 1.0);
        let z = |_: &[f64]| 0.0;
        let scan = critical_plane_scan(&z, &z, &s, &lambdas).unwrap();
        assert!(scan.degenerate);
        assert_eq!(scan.lambda0, -2.0);
    }

    #[test]
    fn scan_rejects_reappearing_sets() {
        // increasing along x₁: every plane has a nonempty set
        let s = CartesianSampler::axisymmetric(3, 2.0, 16).unwrap();
        let f = |x: &[f64]| 1.0 + x[0];
        assert!(matches!(
            critical_plane_scan(&f, &f, &s, &[0.0, 1.0]),
            Err(Error::ScanInconclusive(_))
        ));
        // non-monotone emptiness pattern
        let g = |x: &[f64]| if x[0] > 0.0 && x[0] < 0.5 { 2.0 } else { 1.0 };
        assert!(matches!(
            critical_plane_scan(&g, &g, &s, &[-1.5, 0.0, 0.3, 1.5]),
            Err(Error::ScanInconclusive(_))
        ));
    }

    #[test]
    fn identity_vanishes_for_centred_bubble() {
        let b = bubble_at(0.0);
        let p = PlaneParam::along_e1(3, 0.0).unwrap();
        let sides = greens_reflection_identity(&b, &p, &[-0.7, 0.0, 0.0], &cfg(), DEFAULT_IDENTITY_BUDGET).unwrap();
        assert!(sides.lhs.abs() < 1e-15);
        assert!(sides.rhs.abs() < 1e-12);
    }

    #[test]
    fn identity_off_centre() {
        let b = bubble_at(1.0);
        let p = PlaneParam::along_e1(3, 0.0).unwrap();
        let sides = greens_reflection_identity(&b, &p, &[-1.0, 0.0, 0.0], &cfg(), DEFAULT_IDENTITY_BUDGET).unwrap();
        assert!(sides.lhs > 0.0);
        assert!(sides.relative_gap() < 0.02, "{sides:?}");
    }

    #[test]
    fn identity_rejects_bad_points() {
        let b = bubble_at(1.0);
        let p = PlaneParam::along_e1(3, 0.0).unwrap();
        let c = cfg();
        assert!(greens_reflection_identity(&b, &p, &[1.0, 0.0, 0.0], &c, DEFAULT_IDENTITY_BUDGET).is_err());
        assert!(greens_reflection_identity(&b, &p, &[-1.0, 0.5, 0.0], &c, DEFAULT_IDENTITY_BUDGET).is_err());
        assert!(matches!(
            greens_reflection_identity(&b, &p, &[-1.0, 0.0, 0.0], &c, 10),
            Err(Error::QuadratureBudgetExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn reflection_is_an_involution(
            x in proptest::collection::vec(-10.0f64..10.0, 3),
            d in proptest::collection::vec(-1.0f64..1.0, 3),
            lambda in -5.0f64..5.0,
        ) {
            prop_assume!(d.iter().map(|v| v * v).sum::<f64>() > 1e-3);
            let p = PlaneParam::new(lambda, &d).unwrap();
            let back = reflect(&reflect(&x, &p), &p);
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-14 * (1.0 + x.iter().map(|v| v.abs()).sum::<f64>() + lambda.abs()));
            }
        }

        #[test]
        fn kernel_difference_is_positive(
            x in proptest::collection::vec(-5.0f64..5.0, 3),
            y in proptest::collection::vec(-5.0f64..5.0, 3),
            lambda in -2.0f64..8.0,
        ) {
            let p = PlaneParam::along_e1(3, lambda).unwrap();
            prop_assume!(p.offset(&x) < -1e-6 && p.offset(&y) < -1e-6);
            prop_assume!(x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum::<f64>() > 1e-9);
            prop_assert!(reflection_kernel_difference(&x, &y, &p) > 0.0);
        }
    }
}
