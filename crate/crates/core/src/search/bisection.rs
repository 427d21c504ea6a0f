use std::time::Instant;

use super::{elapsed_ms, Method, Probe, SearchResult, SearchSettings};
use crate::error::Result;

/// Derivative-free bisection on the slope sign.
///
/// Each step probes `m - h` and `m + h` around the midpoint `m` with
/// `h = epsilon / 4`. A rising central difference keeps the left half, a
/// falling or flat one keeps the right half. Stops when the interval is at
/// most `epsilon` wide and reports the midpoint of the final interval.
pub fn bisection<F>(objective: F, settings: &SearchSettings) -> Result<SearchResult>
where
    F: FnMut(f64) -> f64,
{
    settings.validate()?;
    let start = Instant::now();
    let mut probe = Probe::new(objective);
    let h = settings.epsilon / 4.0;

    let (mut lo, mut hi) = (settings.alpha_min, 1.0);
    while hi - lo > settings.epsilon {
        let m = 0.5 * (lo + hi);
        let slope = probe.eval(m + h)? - probe.eval(m - h)?;
        if slope > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }

    let alpha = 0.5 * (lo + hi);
    let loss = probe.eval(alpha)?;
    Ok(SearchResult {
        alpha,
        loss,
        evals: probe.evals,
        wall_time_ms: elapsed_ms(start),
        method: Method::Bisection,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let s = SearchSettings::default();
        let r = bisection(|x| (x - 0.3) * (x - 0.3), &s).unwrap();
        assert!((r.alpha - 0.3).abs() <= s.epsilon);
        assert_eq!(r.method, Method::Bisection);
    }

    #[test]
    fn constant_objective() {
        let s = SearchSettings::default();
        let r = bisection(|_| 2.5, &s).unwrap();
        assert!(r.alpha > s.alpha_min && r.alpha <= 1.0);
        assert_eq!(r.loss, 2.5);
    }

    #[test]
    fn boundary_minima() {
        let s = SearchSettings::default();
        let r = bisection(|x| x, &s).unwrap();
        assert!(r.alpha - s.alpha_min <= s.epsilon);
        let r = bisection(|x| -x, &s).unwrap();
        assert!(1.0 - r.alpha <= s.epsilon);
    }

    #[test]
    fn eval_count_is_two_per_step_plus_one() {
        let s = SearchSettings::default();
        let r = bisection(|x| (x - 0.6).abs(), &s).unwrap();
        // width 0.999 halves until <= 1e-4: 14 steps
        assert_eq!(r.evals, 2 * 14 + 1);
    }
}
