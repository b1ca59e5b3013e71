//! Lebesgue norms of radial functions on R^n.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::quadrature::{sphere_area, trapezoid};

/// Relative Richardson error bound above which a radial quadrature is
/// reported as under-resolved.
pub const QUAD_RTOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpNorm {
    pub p: f64,
    pub value: f64,
    pub domain: String,
}

impl LpNorm {
    pub fn zero(p: f64, domain: impl Into<String>) -> Self {
        Self {
            p,
            value: 0.0,
            domain: domain.into(),
        }
    }
}

/// `∫_0^{r_last} g(r) ω_{n-1} r^(n-1) dr` for nonnegative samples `g`, with the
/// piece on `[0, r_0]` taken as `g(r_0) r_0^n / n`.
pub(crate) fn radial_integral(g: &[f64], r: &[f64], n: usize) -> f64 {
    let nf = n as f64;
    let weighted: Vec<f64> = g.iter().zip(r).map(|(gi, ri)| gi * ri.powi(n as i32 - 1)).collect();
    let core = g[0] * r[0].powi(n as i32) / nf + trapezoid(r, &weighted);
    sphere_area(n - 1) * core
}

/// `(∫ |f|^p dx)^(1/p)` over R^n for a radial `f` sampled on `grid`.
///
/// Composite trapezoid in `r`; the result is compared against the same rule
/// on every other node and rejected when the Richardson estimate
/// `|I_h - I_2h| / 3` exceeds `QUAD_RTOL` relative to `I_h`.
pub fn lp_norm_radial(samples: &[f64], grid: &RadialGrid, n: usize, p: f64) -> Result<LpNorm> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("L^p exponent must exceed 1 (got {p})")));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let powered: Vec<f64> = samples.iter().map(|f| f.abs().powf(p)).collect();
    let fine = radial_integral(&powered, grid.nodes(), n);
    if fine == 0.0 {
        return Ok(LpNorm::zero(p, "R^n"));
    }
    if grid.len() >= 5 {
        let idx = grid.coarse_indices();
        let g: Vec<f64> = idx.iter().map(|&i| powered[i]).collect();
        let r: Vec<f64> = idx.iter().map(|&i| grid.nodes()[i]).collect();
        let coarse = radial_integral(&g, &r, n);
        let estimate = (fine - coarse).abs() / 3.0;
        if estimate > QUAD_RTOL * fine {
            return Err(Error::GridTooCoarse(format!(
                "L^{p} quadrature error estimate {estimate:.3e} exceeds {QUAD_RTOL} of {fine:.3e}"
            )));
        }
    }
    Ok(LpNorm {
        p,
        value: fine.powf(1.0 / p),
        domain: "R^n".into(),
    })
}
