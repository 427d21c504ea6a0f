use std::time::Instant;

use super::{elapsed_ms, Method, Probe, SearchResult, SearchSettings};
use crate::error::Result;

/// Per-iteration record of a golden-section run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldenTrace {
    /// Bracket width `d - c` after each loop iteration.
    pub widths: Vec<f64>,
    /// Every `(alpha, loss)` the objective was called with, in call order.
    pub probes: Vec<(f64, f64)>,
}

impl GoldenTrace {
    pub fn iterations(&self) -> usize {
        self.widths.len()
    }
}

/// Golden-section search on `[alpha_min, 1]`.
///
/// Follows the classic listing: two interior probes
/// `x1 = d - phi (d - c)` and `x2 = c + phi (d - c)`; the side with the larger
/// loss is cut off and the surviving probe is reused, so each iteration costs
/// one new evaluation. Ties move the left end. Stops when `d - c <= epsilon`
/// and returns `x1` if `f1 <= f2`, else `x2`.
///
/// The bracket is stored as `(c, d - c)`, so the width after `k` iterations is
/// `phi^k (1 - alpha_min)` up to rounding of the product alone, and the
/// iteration count is `ceil(ln(epsilon / (1 - alpha_min)) / ln(phi))`.
pub fn golden_section<F>(objective: F, settings: &SearchSettings) -> Result<SearchResult>
where
    F: FnMut(f64) -> f64,
{
    run(objective, settings, None)
}

/// Like [`golden_section`], also returning the bracket widths and probes.
pub fn golden_section_traced<F>(
    objective: F,
    settings: &SearchSettings,
) -> Result<(SearchResult, GoldenTrace)>
where
    F: FnMut(f64) -> f64,
{
    let mut trace = GoldenTrace::default();
    let result = run(objective, settings, Some(&mut trace))?;
    Ok((result, trace))
}

fn run<F>(
    objective: F,
    settings: &SearchSettings,
    mut trace: Option<&mut GoldenTrace>,
) -> Result<SearchResult>
where
    F: FnMut(f64) -> f64,
{
    settings.validate()?;
    let start = Instant::now();
    let phi = settings.phi;
    let mut probe = Probe::new(objective);
    let mut eval = |x: f64, trace: &mut Option<&mut GoldenTrace>| -> Result<f64> {
        let f = probe.eval(x)?;
        if let Some(t) = trace.as_deref_mut() {
            t.probes.push((x, f));
        }
        Ok(f)
    };

    let mut c = settings.alpha_min;
    let mut width = 1.0 - settings.alpha_min;
    let mut x1 = (c + width) - phi * width;
    let mut x2 = c + phi * width;
    let mut f1 = eval(x1, &mut trace)?;
    let mut f2 = eval(x2, &mut trace)?;

    while width > settings.epsilon {
        if f1 < f2 {
            // d <- x2
            width *= phi;
            x2 = x1;
            f2 = f1;
            x1 = (c + width) - phi * width;
            f1 = eval(x1, &mut trace)?;
        } else {
            c = x1;
            width *= phi;
            x1 = x2;
            f1 = f2;
            x2 = c + phi * width;
            f2 = eval(x2, &mut trace)?;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.widths.push(width);
        }
    }

    let (alpha, loss) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(SearchResult {
        alpha,
        loss,
        evals: probe.evals,
        wall_time_ms: elapsed_ms(start),
        method: Method::Golden,
        converged: true,
    })
}
