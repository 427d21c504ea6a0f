//! One-dimensional minimization of a loss over the clipping fraction.
//!
//! All methods search `[alpha_min, 1]`. Golden-section is the production
//! method; bisection and Nelder-Mead exist for comparison, and the grid scan
//! is the brute-force reference used to check the others.
//!
//! The bisection and Nelder-Mead bodies are this toolkit's own definitions;
//! see their modules for the exact rules.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{QuantError, Result};

mod bisection;
mod golden;
mod grid;
mod nelder_mead;

pub use bisection::bisection;
pub use golden::{golden_section, golden_section_traced, GoldenTrace};
pub use grid::grid_oracle;
pub use nelder_mead::{nelder_mead_1d, NM_MAX_EVALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Golden,
    Bisection,
    NelderMead,
    Grid,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Golden => "golden",
            Method::Bisection => "bisection",
            Method::NelderMead => "nelder-mead",
            Method::Grid => "grid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = QuantError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "golden" => Ok(Method::Golden),
            "bisection" => Ok(Method::Bisection),
            "nelder-mead" => Ok(Method::NelderMead),
            "grid" => Ok(Method::Grid),
            other => Err(QuantError::InvalidInput(format!(
                "unknown search method `{other}`"
            ))),
        }
    }
}

/// `(sqrt(5) - 1) / 2`. Only this factor puts the reused golden-section probe
/// exactly where the next bracket needs it.
pub const GOLDEN_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Stop once the bracket (or simplex) is at most this wide.
    pub epsilon: f64,
    /// Golden-section contraction factor. Values other than [`GOLDEN_PHI`]
    /// (such as the rounded 0.618) are accepted, but then the reused probe
    /// drifts away from its ideal position a little more each iteration.
    pub phi: f64,
    /// Left end of the search interval.
    pub alpha_min: f64,
    pub method: Method,
    /// Number of probes for [`Method::Grid`].
    pub grid_points: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            phi: GOLDEN_PHI,
            alpha_min: 1e-3,
            method: Method::Golden,
            grid_points: 100_001,
        }
    }
}

impl SearchSettings {
    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.phi) {
            return Err(QuantError::InvalidInput(format!(
                "phi {} outside (0, 1)",
                self.phi
            )));
        }
        if !open_unit(self.epsilon) {
            return Err(QuantError::InvalidInput(format!(
                "epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        if !open_unit(self.alpha_min) {
            return Err(QuantError::InvalidInput(format!(
                "alpha_min {} outside (0, 1)",
                self.alpha_min
            )));
        }
        if self.method == Method::Grid && self.grid_points < 2 {
            return Err(QuantError::InvalidInput(
                "grid needs at least 2 points".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub alpha: f64,
    /// Objective value at `alpha`.
    pub loss: f64,
    pub evals: u64,
    pub wall_time_ms: f64,
    pub method: Method,
    /// False when an evaluation budget ran out before the width tolerance was met.
    pub converged: bool,
}

/// Runs the method named in `settings`.
pub fn search<F>(objective: F, settings: &SearchSettings) -> Result<SearchResult>
where
    F: FnMut(f64) -> f64,
{
    match settings.method {
        Method::Golden => golden_section(objective, settings),
        Method::Bisection => bisection(objective, settings),
        Method::NelderMead => nelder_mead_1d(objective, settings),
        Method::Grid => grid_oracle(objective, settings, settings.grid_points),
    }
}

/// Wraps an objective: counts calls and rejects non-finite values.
struct Probe<F> {
    objective: F,
    evals: u64,
}

impl<F: FnMut(f64) -> f64> Probe<F> {
    fn new(objective: F) -> Self {
        Self {
            objective,
            evals: 0,
        }
    }

    fn eval(&mut self, alpha: f64) -> Result<f64> {
        self.evals += 1;
        let value = (self.objective)(alpha);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuantError::SearchAborted { alpha, value })
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_validation() {
        SearchSettings::default().validate().unwrap();
        let bad = |f: fn(&mut SearchSettings)| {
            let mut s = SearchSettings::default();
            f(&mut s);
            s.validate().is_err()
        };
        assert!(bad(|s| s.phi = 1.0));
        assert!(bad(|s| s.phi = 0.0));
        assert!(bad(|s| s.epsilon = 0.0));
        assert!(bad(|s| s.alpha_min = 1.0));
        assert!(bad(|s| {
            s.method = Method::Grid;
            s.grid_points = 1;
        }));
    }

    #[test]
    fn dispatch_and_method_names() {
        for m in [
            Method::Golden,
            Method::Bisection,
            Method::NelderMead,
            Method::Grid,
        ] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            let s = SearchSettings {
                grid_points: 1001,
                ..SearchSettings::default().with_method(m)
            };
            let r = search(|x| (x - 0.4) * (x - 0.4), &s).unwrap();
            assert_eq!(r.method, m);
            assert!((r.alpha - 0.4).abs() < 1e-3, "{m}: {}", r.alpha);
        }
    }

    #[test]
    fn non_finite_objective_aborts() {
        for m in [
            Method::Golden,
            Method::Bisection,
            Method::NelderMead,
            Method::Grid,
        ] {
            let s = SearchSettings {
                grid_points: 11,
                ..SearchSettings::default().with_method(m)
            };
            let e = search(|x| if x > 0.2 { f64::NAN } else { x }, &s).unwrap_err();
            match e {
                QuantError::SearchAborted { alpha, value } => {
                    assert!(alpha > 0.2);
                    assert!(value.is_nan());
                }
                other => panic!("{m}: unexpected {other:?}"),
            }
        }
    }
}
