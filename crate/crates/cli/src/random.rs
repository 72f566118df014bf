//! Seeded generators for test matrices, parameters and small networks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use requnet::matrix_nets::spectral_norm;
use requnet::{Network, Result, SparseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..=hi))
}

/// Entries uniform in `[−1, 1]`, rescaled so that `‖A‖₂ = 1 − δ`.
pub fn boundary_matrix(rng: &mut impl Rng, d: usize, delta: f64) -> Result<DMatrix<f64>> {
    loop {
        let a = uniform_matrix(rng, d, d, -1.0, 1.0);
        let norm = spectral_norm(&a)?;
        if norm > 0.0 {
            return Ok(a * ((1.0 - delta) / norm));
        }
    }
}

/// `count` parameter vectors, uniform in `[0, 1]^p`.
pub fn params(rng: &mut impl Rng, p: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..p).map(|_| rng.gen_range(0.0..=1.0)).collect()).collect()
}

pub fn uniform_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Random network with the given input width and depth. Each weight is zero
/// with probability 0.3 and otherwise uniform in `[−1, 1]/fan_in`, which
/// keeps activations of order one.
pub fn network(rng: &mut impl Rng, input: usize, output: usize, depth: usize, max_width: usize) -> Network {
    let mut pairs = Vec::with_capacity(depth);
    let mut cols = input;
    for k in 0..depth {
        let rows = if k + 1 == depth { output } else { rng.gen_range(1..=max_width) };
        let scale = 1.0 / cols as f64;
        let entry = |rng: &mut dyn rand::RngCore| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(-1.0..=1.0) * scale
            }
        };
        let data: Vec<f64> = (0..rows * cols).map(|_| entry(rng)).collect();
        let bias: Vec<f64> = (0..rows).map(|_| entry(rng)).collect();
        pairs.push((SparseMatrix::from_row_major(rows, cols, &data).expect("shape"), bias));
        cols = rows;
    }
    Network::from_pairs(pairs).expect("consistent shapes")
}

/// Random network with input width, output width and depth drawn from
/// `1..=max_in`, `1..=max_out` and `1..=max_depth`.
pub fn any_network(rng: &mut impl Rng, max_in: usize, max_out: usize, max_depth: usize, max_width: usize) -> Network {
    let input = rng.gen_range(1..=max_in);
    let output = rng.gen_range(1..=max_out);
    let depth = rng.gen_range(1..=max_depth);
    network(rng, input, output, depth, max_width)
}

/// Selection-type matrix: every row has at most one nonzero.
pub fn selection(rng: &mut impl Rng, rows: usize, cols: usize) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(rows);
    for r in 0..rows {
        if rng.gen_bool(0.8) {
            triplets.push((r, rng.gen_range(0..cols), rng.gen_range(-2.0..=2.0)));
        }
    }
    SparseMatrix::from_triplets(rows, cols, triplets).expect("in range")
}
