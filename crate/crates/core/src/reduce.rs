//! Deterministic chunked reduction for the per-probe MSE loop.
//!
//! The tensor is cut into fixed-size chunks, each chunk is summed left to
//! right, and the partial sums are added in chunk order. Whether the chunks
//! run on one thread or many, the floating-point result is the same.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 8192;

/// Below this many chunks the work is done on the calling thread.
const PAR_MIN_CHUNKS: usize = 8;

pub(crate) fn mean_of<F>(values: &[f64], per_element: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    if values.is_empty() {
        return 0.0;
    }
    let chunk_sum = |chunk: &[f64]| chunk.iter().map(|&w| per_element(w)).sum::<f64>();
    let n_chunks = values.len().div_ceil(CHUNK);
    let total = if n_chunks >= PAR_MIN_CHUNKS {
        let partials: Vec<f64> = values.par_chunks(CHUNK).map(chunk_sum).collect();
        partials.iter().sum::<f64>()
    } else {
        values.chunks(CHUNK).map(chunk_sum).sum::<f64>()
    };
    total / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_serial_paths_agree_bitwise() {
        let values: Vec<f64> = (0..CHUNK * PAR_MIN_CHUNKS + 17)
            .map(|i| ((i as f64) * 0.618).sin())
            .collect();
        let par = mean_of(&values, |w| w * w);
        let serial = values
            .chunks(CHUNK)
            .map(|c| c.iter().map(|w| w * w).sum::<f64>())
            .sum::<f64>()
            / values.len() as f64;
        assert_eq!(par.to_bits(), serial.to_bits());
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(mean_of(&[], |w| w), 0.0);
    }
}
