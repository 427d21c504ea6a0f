use std::time::Instant;

use super::{elapsed_ms, Method, Probe, SearchResult, SearchSettings};
use crate::error::Result;

/// Evaluation budget for [`nelder_mead_1d`].
pub const NM_MAX_EVALS: u64 = 200;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const START: [f64; 2] = [0.5, 0.95];

/// Nelder-Mead on a two-point simplex.
///
/// Standard coefficients (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5), starting simplex `{0.5, 0.95}`. Every trial point is clamped
/// into `[alpha_min, 1]`, and an outside contraction that lands back on the
/// best point counts as rejected. Stops when the simplex is at most `epsilon` wide or
/// after [`NM_MAX_EVALS`] evaluations; the latter sets `converged = false`.
pub fn nelder_mead_1d<F>(objective: F, settings: &SearchSettings) -> Result<SearchResult>
where
    F: FnMut(f64) -> f64,
{
    settings.validate()?;
    let start = Instant::now();
    let clamp = |x: f64| x.clamp(settings.alpha_min, 1.0);
    let mut probe = Probe::new(objective);

    let a = clamp(START[0]);
    let b = clamp(START[1]);
    let mut simplex = [(a, probe.eval(a)?), (b, probe.eval(b)?)];
    let mut converged = false;

    loop {
        if simplex[1].1 < simplex[0].1 {
            simplex.swap(0, 1);
        }
        let (xb, fb) = simplex[0];
        let (xw, fw) = simplex[1];
        if (xw - xb).abs() <= settings.epsilon {
            converged = true;
            break;
        }
        if probe.evals >= NM_MAX_EVALS {
            break;
        }

        // In one dimension the centroid of the non-worst points is the best point.
        let xr = clamp(xb + REFLECT * (xb - xw));
        let fr = probe.eval(xr)?;

        let next = if fr < fb {
            if probe.evals >= NM_MAX_EVALS {
                Some((xr, fr))
            } else {
                let xe = clamp(xb + EXPAND * (xr - xb));
                let fe = probe.eval(xe)?;
                Some(if fe < fr { (xe, fe) } else { (xr, fr) })
            }
        } else if probe.evals >= NM_MAX_EVALS {
            None
        } else if fr < fw {
            let xc = clamp(xb + CONTRACT * (xr - xb));
            let fc = probe.eval(xc)?;
            // A reflection clamped onto the best point would collapse the simplex.
            (fc <= fr && xc != xb).then_some((xc, fc))
        } else {
            let xc = clamp(xb + CONTRACT * (xw - xb));
            let fc = probe.eval(xc)?;
            (fc < fw).then_some((xc, fc))
        };

        match next {
            Some(p) => simplex[1] = p,
            None => {
                if probe.evals >= NM_MAX_EVALS {
                    break;
                }
                let xs = xb + SHRINK * (xw - xb);
                simplex[1] = (xs, probe.eval(xs)?);
            }
        }
    }

    let (alpha, loss) = if simplex[1].1 < simplex[0].1 {
        simplex[1]
    } else {
        simplex[0]
    };
    Ok(SearchResult {
        alpha,
        loss,
        evals: probe.evals,
        wall_time_ms: elapsed_ms(start),
        method: Method::NelderMead,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let r = nelder_mead_1d(|x| (x - 0.3) * (x - 0.3), &SearchSettings::default()).unwrap();
        assert!((r.alpha - 0.3).abs() < 1e-3, "{}", r.alpha);
        assert!(r.converged);
        assert!(r.evals < NM_MAX_EVALS);
    }

    #[test]
    fn boundary_minimum_is_reached_exactly() {
        let r = nelder_mead_1d(|x| (x - 2.0).powi(2), &SearchSettings::default()).unwrap();
        assert_eq!(r.alpha, 1.0);
    }

    #[test]
    fn minimum_next_to_boundary_is_not_skipped() {
        let r = nelder_mead_1d(|x| (x - 0.999) * (x - 0.999), &SearchSettings::default()).unwrap();
        assert!((r.alpha - 0.999).abs() < 2e-4, "{}", r.alpha);
        assert!(r.converged);
    }

    #[test]
    fn result_stays_in_interval() {
        let s = SearchSettings::default();
        let r = nelder_mead_1d(|x| x, &s).unwrap();
        assert!(r.alpha >= s.alpha_min && r.alpha <= s.alpha_min + s.epsilon);
    }

    #[test]
    fn oscillating_objective_exhausts_budget() {
        let s = SearchSettings {
            epsilon: 1e-310,
            alpha_min: 1e-300,
            ..SearchSettings::default()
        };
        let r = nelder_mead_1d(wild, &s).unwrap();
        assert_eq!(r.evals, NM_MAX_EVALS);
        assert!(!r.converged);
    }

    // Log-periodic wiggle on a valley at 1e-200.
    fn wild(x: f64) -> f64 {
        (x / 1e-200).ln().abs() * (1.5 + 0.5 * (3.0 * x.ln()).sin())
    }
}
