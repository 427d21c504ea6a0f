#![allow(dead_code)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use requant::io::save_model;
use requant::{BitWidth, WeightTensor};

pub const SIGMA: f64 = 0.05;
pub const SEEDED_COUNT: u64 = 50;
pub const SEEDED_LEN: usize = 10_000;

pub fn bits(b: u32) -> BitWidth {
    BitWidth::new(b).unwrap()
}

pub fn gaussian(name: &str, seed: u64, n: usize, sigma: f64) -> WeightTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    let values = (0..n).map(|_| normal.sample(&mut rng)).collect();
    WeightTensor::from_values(name, values).unwrap()
}

/// Laplace samples by inverse CDF, scale chosen so the standard deviation is `sigma`.
pub fn laplacian(name: &str, seed: u64, n: usize, sigma: f64) -> WeightTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sigma / std::f64::consts::SQRT_2;
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(-0.5..0.5);
            -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        })
        .collect();
    WeightTensor::from_values(name, values).unwrap()
}

/// Seeded tensor `i` of the shared corpus: even indices Gaussian, odd Laplacian,
/// paired with a bit-width cycling through 4, 6, 8.
pub fn seeded(i: u64) -> (WeightTensor, BitWidth) {
    let name = format!("t{i:02}");
    let t = if i.is_multiple_of(2) {
        gaussian(&name, 1000 + i, SEEDED_LEN, SIGMA)
    } else {
        laplacian(&name, 1000 + i, SEEDED_LEN, SIGMA)
    };
    (t, bits([4, 6, 8][(i % 3) as usize]))
}

pub fn seeded_corpus() -> Vec<(WeightTensor, BitWidth)> {
    (0..SEEDED_COUNT).map(seeded).collect()
}

/// Gaussian body with one large outlier at index 0.
pub fn outlier_fixture() -> WeightTensor {
    let mut values = gaussian("outlier", 7, SEEDED_LEN, SIGMA).values().to_vec();
    values[0] = 1.0;
    WeightTensor::from_values("outlier", values).unwrap()
}

/// Every code is 1 for all alpha at b = 2, so the uniform loss is the
/// quadratic `((1 - a)^2 + 3 (0.6 - a)^2) / 4` with its minimum at 0.7.
pub fn unimodal_fixture() -> WeightTensor {
    WeightTensor::from_values("unimodal", vec![1.0, 0.6, 0.6, 0.6]).unwrap()
}

/// A 3x3x64x64 convolution kernel.
pub fn conv_fixture() -> WeightTensor {
    let t = gaussian("conv", 11, 3 * 3 * 64 * 64, SIGMA);
    WeightTensor::new("conv", vec![3, 3, 64, 64], t.values().to_vec()).unwrap()
}

/// Rounds values through f32 so a save/load cycle is lossless.
pub fn f32_exact(t: &WeightTensor) -> WeightTensor {
    let v: Vec<f32> = t.values().iter().map(|&x| x as f32).collect();
    WeightTensor::from_f32(t.name(), t.shape().to_vec(), &v).unwrap()
}

pub fn write_fixture(dir: &Path, tensors: &[WeightTensor]) -> std::path::PathBuf {
    save_model(dir, "model.json", tensors).unwrap();
    dir.join("model.json")
}

pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("requant").chain(args.iter().copied());
    let code = requant::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}
