//! Exponent configuration and the JSON run-config schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RadialGrid};

/// Band around the critical line `alpha + beta = (n+2)/(n-2)`.
pub const CRITICALITY_TOL: f64 = 1e-12;

/// Dimension and exponents of the coupled system
/// `-Δu = u^α v^β`, `-Δv = u^β v^α`, validated against the critical line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentConfig {
    n: usize,
    alpha: f64,
    beta: f64,
    uniqueness_applicable: bool,
}

impl ExponentConfig {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True iff `alpha < beta`, the hypothesis under which the uniqueness
    /// experiments are meaningful.
    pub fn uniqueness_applicable(&self) -> bool {
        self.uniqueness_applicable
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `(n+2)/(n-2)`.
    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.n)
    }

    /// The Lebesgue exponent `2n/(n-2)` of the natural solution space.
    pub fn sobolev_exponent(&self) -> f64 {
        2.0 * self.nf() / (self.nf() - 2.0)
    }

    /// Errors unless the configuration admits `alpha < beta`.
    pub fn require_uniqueness(&self) -> Result<()> {
        if self.uniqueness_applicable {
            Ok(())
        } else if self.critical_exponent() <= 2.0 {
            Err(Error::InfeasibleHypothesis(self.n))
        } else {
            Err(Error::HypothesisNotApplicable {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }
}

pub fn critical_exponent(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 2.0) / (nf - 2.0)
}

/// Validate `(n, alpha, beta)` against `n >= 3`, `alpha, beta >= 1` and the
/// critical constraint.
pub fn validate_config(n: usize, alpha: f64, beta: f64) -> Result<ExponentConfig> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !alpha.is_finite() || !beta.is_finite() || alpha < 1.0 || beta < 1.0 {
        return Err(Error::ExponentOutOfRange { alpha, beta });
    }
    let critical = critical_exponent(n);
    let sum = alpha + beta;
    if (sum - critical).abs() > CRITICALITY_TOL {
        return Err(Error::CriticalityViolated { sum, critical });
    }
    if n >= 6 {
        log::warn!(
            "n = {n}: alpha < beta is infeasible under criticality; uniqueness experiments are unavailable"
        );
    }
    Ok(ExponentConfig {
        n,
        alpha,
        beta,
        uniqueness_applicable: alpha < beta,
    })
}

/// On-disk run configuration shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            alpha: 2.0,
            beta: 3.0,
            grid: GridSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }

    pub fn exponents(&self) -> Result<ExponentConfig> {
        validate_config(self.n, self.alpha, self.beta)
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        self.grid.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bose_einstein_case_is_valid() {
        let c = validate_config(3, 2.0, 3.0).unwrap();
        assert!(c.uniqueness_applicable());
        assert_eq!(c.critical_exponent(), 5.0);
        assert_eq!(c.sobolev_exponent(), 6.0);
        c.require_uniqueness().unwrap();
    }

    #[test]
    fn diagonal_case_is_valid_but_not_applicable() {
        let c = validate_config(3, 2.5, 2.5).unwrap();
        assert!(!c.uniqueness_applicable());
        assert!(matches!(
            c.require_uniqueness(),
            Err(Error::HypothesisNotApplicable { .. })
        ));
    }

    #[test]
    fn dimension_six_forces_the_diagonal() {
        let c = validate_config(6, 1.0, 1.0).unwrap();
        assert!(!c.uniqueness_applicable());
        assert_eq!(c.require_uniqueness(), Err(Error::InfeasibleHypothesis(6)));
        assert!(matches!(
            validate_config(6, 0.9, 1.1),
            Err(Error::ExponentOutOfRange { .. })
        ));
        // n = 7: (n+2)/(n-2) = 9/5 < 2, nothing with alpha, beta >= 1 works
        assert!(validate_config(7, 0.9, 0.9).is_err());
    }

    #[test]
    fn error_cases() {
        assert_eq!(validate_config(2, 1.0, 1.0), Err(Error::DimensionTooSmall(2)));
        assert!(matches!(
            validate_config(3, 0.5, 4.5),
            Err(Error::ExponentOutOfRange { .. })
        ));
        assert!(matches!(
            validate_config(3, 2.0, 3.0 + 1e-9),
            Err(Error::CriticalityViolated { .. })
        ));
        assert!(validate_config(4, 1.0, 2.0).is_ok());
        assert!(validate_config(5, 1.0, 4.0 / 3.0).is_ok());
    }

    #[test]
    fn run_config_json_schema() {
        let text = r#"{ "n": 4, "alpha": 1.0, "beta": 2.0,
                        "grid": {"r0": 1e-6, "rmax": 100.0, "nodes": 801} }"#;
        let rc = RunConfig::from_json(text).unwrap();
        assert_eq!(rc.n, 4);
        assert_eq!(rc.grid.nodes, 801);
        let grid = rc.radial_grid().unwrap();
        assert_eq!(grid.len(), 801);
        let back = RunConfig::from_json(&rc.to_json()).unwrap();
        assert_eq!(back, rc);

        let no_grid = RunConfig::from_json(r#"{"n": 3, "alpha": 2, "beta": 3}"#).unwrap();
        assert_eq!(no_grid.grid, GridSpec::default());
    }

    proptest! {
        // validation is total: always one valid config or one specific error
        #[test]
        fn validation_is_total(n in 0usize..12, alpha in -1.0f64..6.0, beta in -1.0f64..6.0) {
            match validate_config(n, alpha, beta) {
                Ok(c) => {
                    prop_assert!(n >= 3 && alpha >= 1.0 && beta >= 1.0);
                    prop_assert!((alpha + beta - critical_exponent(n)).abs() <= CRITICALITY_TOL);
                    prop_assert_eq!(c.uniqueness_applicable(), alpha < beta);
                }
                Err(Error::DimensionTooSmall(m)) => prop_assert!(m < 3),
                Err(Error::ExponentOutOfRange { .. }) => prop_assert!(alpha < 1.0 || beta < 1.0),
                Err(Error::CriticalityViolated { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e:?}"),
            }
        }

        #[test]
        fn critical_pairs_validate(n in 3usize..6, frac in 0.0f64..1.0) {
            let crit = critical_exponent(n);
            let alpha = 1.0 + frac * (crit - 2.0);
            let beta = crit - alpha;
            let c = validate_config(n, alpha, beta).unwrap();
            prop_assert_eq!(c.uniqueness_applicable(), alpha < beta);
        }
    }
}
