//! Writes a small random model for trying the CLI.
//!
//! ```text
//! cargo run --example make_fixture -- demo
//! ```

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use requant::io::save_model;
use requant::WeightTensor;

fn main() -> requant::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "demo".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let layers = [
        ("conv1", vec![3, 3, 3, 16], 0.2),
        ("conv2", vec![3, 3, 16, 32], 0.05),
        ("conv3", vec![3, 3, 32, 64], 0.05),
        ("fc", vec![64, 10], 0.1),
    ];
    let tensors = layers
        .into_iter()
        .map(|(name, shape, sigma)| {
            let n = shape.iter().product();
            let normal = Normal::new(0.0, sigma).unwrap();
            let mut values: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            values[0] = 6.0 * sigma;
            WeightTensor::new(name, shape, values)
        })
        .collect::<requant::Result<Vec<_>>>()?;
    save_model(&dir, "model.json", &tensors)?;
    println!("{}", dir.join("model.json").display());
    Ok(())
}
