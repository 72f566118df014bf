#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use requnet::{Network, SparseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..=hi))
}

pub fn vector(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Sparse random network with weights scaled by the fan-in.
pub fn network(rng: &mut impl Rng, input: usize, output: usize, depth: usize) -> Network {
    let mut pairs = Vec::new();
    let mut cols = input;
    for k in 0..depth {
        let rows = if k + 1 == depth { output } else { rng.gen_range(1..=5) };
        let mut draw = || if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-1.0..=1.0) / cols as f64 };
        let data: Vec<f64> = (0..rows * cols).map(|_| draw()).collect();
        let bias: Vec<f64> = (0..rows).map(|_| draw()).collect();
        pairs.push((SparseMatrix::from_row_major(rows, cols, &data).unwrap(), bias));
        cols = rows;
    }
    Network::from_pairs(pairs).unwrap()
}

/// `‖x − y‖ / ‖y‖`.
pub fn rel(x: &[f64], y: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / norm
}

/// `‖x − y‖ / max(‖y‖, 1)`.
pub fn mixed(x: &[f64], y: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / norm.max(1.0)
}

/// Spectral norm from a full SVD.
pub fn norm2(a: &DMatrix<f64>) -> f64 {
    a.singular_values().max()
}
