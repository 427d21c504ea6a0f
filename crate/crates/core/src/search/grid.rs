use std::time::Instant;

use super::{elapsed_ms, Method, Probe, SearchResult, SearchSettings};
use crate::error::{QuantError, Result};

/// Exhaustive scan over `points` evenly spaced alphas in `[alpha_min, 1]`.
///
/// Returns the exact arg-min over the grid; ties go to the larger alpha.
/// The last grid point is exactly 1.
pub fn grid_oracle<F>(
    objective: F,
    settings: &SearchSettings,
    points: usize,
) -> Result<SearchResult>
where
    F: FnMut(f64) -> f64,
{
    if points < 2 {
        return Err(QuantError::InvalidInput(
            "grid needs at least 2 points".into(),
        ));
    }
    let start = Instant::now();
    let mut probe = Probe::new(objective);
    let lo = settings.alpha_min;
    let span = 1.0 - lo;
    let last = (points - 1) as f64;

    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..points {
        let alpha = if i + 1 == points {
            1.0
        } else {
            lo + span * (i as f64 / last)
        };
        let f = probe.eval(alpha)?;
        if f <= best.1 {
            best = (alpha, f);
        }
    }

    Ok(SearchResult {
        alpha: best.0,
        loss: best.1,
        evals: probe.evals,
        wall_time_ms: elapsed_ms(start),
        method: Method::Grid,
        converged: true,
    })
}
