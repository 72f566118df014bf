//! ReQU networks for matrix products, squares, dyadic powers and the
//! Neumann-series inverse `A ↦ Σ_{k<2^l} A^k ≈ (I − A)⁻¹`.
//!
//! Matrices travel through networks in column-major vectorized form
//! ([`vec`] / [`matr`]).

use nalgebra::{DMatrix, DVector};

use crate::calculus::{affine_network, concat, fan_out, parallelize, sparse_concat, BETA, GAMMA, OMEGA};
use crate::error::{mismatch, Error, Result};
use crate::network::{Layer, Network};
use crate::sparse::SparseMatrix;

/// Column-major flattening `(A₁₁, …, A_d1, …, A_1l, …, A_dl)`.
pub fn vec(a: &DMatrix<f64>) -> Vec<f64> {
    a.as_slice().to_vec()
}

/// Inverse of [`vec`] for a `rows × cols` matrix.
pub fn matr(v: &[f64], rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if v.len() != rows * cols {
        return Err(mismatch(format!("vector of length {} cannot be a {rows}x{cols} matrix", v.len())));
    }
    Ok(DMatrix::from_column_slice(rows, cols, v))
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Two-layer network with `(x, y) ↦ xy`, exact for all reals.
pub fn scalar_product_network() -> Network {
    let first = (0..4).flat_map(|t| [(t, 0, OMEGA[t]), (t, 1, GAMMA[t])]).collect();
    let second = (0..4).map(|t| (0, t, BETA[t])).collect();
    Network::from_pairs(vec![
        (SparseMatrix::from_triplets(4, 2, first).expect("in range"), vec![0.0; 4]),
        (SparseMatrix::from_triplets(1, 4, second).expect("in range"), vec![0.0]),
    ])
    .expect("static shapes")
}

/// `Φ_mult^{d,n,l}`: maps `(vec A, vec B)` with `A ∈ R^{d×n}`, `B ∈ R^{n×l}`
/// to `vec(AB)`. Depth 2, `8dnl` first-layer and `4dnl` last-layer weights.
///
/// The weights are written out directly; they coincide with the
/// composition `P(Φ_{1,1}, …, Φ_{d,l}) • ((Id;…;Id), 0)` of selected scalar
/// product gadgets summed by `((1ᵀ, 0))` (see the tests).
pub fn mult_network(d: usize, n: usize, l: usize) -> Result<Network> {
    positive("d", d)?;
    positive("n", n)?;
    positive("l", l)?;
    let inputs = n * (d + l);
    let outputs = d * l;
    let hidden = 4 * outputs * n;
    let mut first = Vec::with_capacity(2 * hidden);
    let mut second = Vec::with_capacity(hidden);
    for j in 0..l {
        for i in 0..d {
            let o = i + j * d;
            for k in 0..n {
                let a_col = i + k * d;
                let b_col = d * n + k + j * n;
                for t in 0..4 {
                    let h = (o * n + k) * 4 + t;
                    first.push((h, a_col, OMEGA[t]));
                    first.push((h, b_col, GAMMA[t]));
                    second.push((o, h, BETA[t]));
                }
            }
        }
    }
    Network::from_pairs(vec![
        (SparseMatrix::from_triplets(hidden, inputs, first)?, vec![0.0; hidden]),
        (SparseMatrix::from_triplets(outputs, hidden, second)?, vec![0.0; outputs]),
    ])
}

/// `Φ₂^d = Φ_mult^{d,d,d} • ((Id; Id), 0)`: `vec A ↦ vec A²`.
pub fn square_network(d: usize) -> Result<Network> {
    positive("d", d)?;
    concat(mult_network(d, d, d)?, fan_out(d * d, 2)?)
}

/// `Φ_{2^j}^d`: `vec A ↦ vec A^{2^j}`, built as `Φ₂ ⊙ Φ_{2^{j−1}}`.
/// Depth is exactly `2j`.
pub fn power_network(d: usize, j: usize) -> Result<Network> {
    positive("d", d)?;
    positive("j", j)?;
    let mut net = square_network(d)?;
    for _ in 1..j {
        net = sparse_concat(square_network(d)?, net)?;
    }
    Ok(net)
}

/// Truncation length of the Neumann series for accuracy `epsilon` on
/// matrices with `‖A‖₂ ≤ 1 − delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannPlan {
    pub epsilon: f64,
    pub delta: f64,
    pub l: usize,
}

impl NeumannPlan {
    /// `(1 − δ)^{2^l} / δ`, the worst-case truncation error at this plan.
    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.delta, self.l)
    }

    /// Number of series terms `2^l`.
    pub fn terms(&self) -> u128 {
        1u128 << self.l
    }
}

fn tail_bound(delta: f64, l: usize) -> f64 {
    // (1-δ)^(2^l) by repeated squaring; 2^l can exceed i32 range.
    let mut p = 1.0 - delta;
    for _ in 0..l {
        p *= p;
    }
    p / delta
}

fn in_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidArgument(format!("{name} = {v} must lie in (0, 1)")));
    }
    Ok(())
}

/// `l = ⌈log₂(log_{1−δ}(δε) + 1)⌉`.
///
/// If floating-point rounding of the closed form lands one short of the
/// tail bound `(1−δ)^{2^l}/δ ≤ ε`, `l` is bumped until it holds.
pub fn neumann_length(epsilon: f64, delta: f64) -> Result<NeumannPlan> {
    in_open_unit("epsilon", epsilon)?;
    in_open_unit("delta", delta)?;
    let log_base = (delta * epsilon).ln() / (1.0 - delta).ln();
    let mut l = (log_base + 1.0).log2().ceil().max(1.0) as usize;
    while tail_bound(delta, l) > epsilon {
        l += 1;
    }
    Ok(NeumannPlan { epsilon, delta, l })
}

/// `Φ₁ = ((Id, vec(Id)))`: `vec A ↦ vec(A + I)`.
fn shift_by_identity(d: usize) -> Result<Network> {
    affine_network(SparseMatrix::identity(d * d), vec(&DMatrix::identity(d, d)))
}

/// `π_l` from the Neumann factorization `Σ_{k<2^l} A^k = ∏_{i<l}(A^{2^i} + I)`.
/// Consumes `l` copies of `vec A`.
fn neumann_product(d: usize, l: usize) -> Result<Network> {
    let mut pi = shift_by_identity(d)?;
    for k in 2..=l {
        let factor = sparse_concat(shift_by_identity(d)?, power_network(d, k - 1)?)?;
        let lanes = parallelize(vec![pi, factor])?;
        pi = sparse_concat(mult_network(d, d, d)?, lanes)?;
    }
    Ok(pi)
}

/// `Φ_inv;ε^d`: `vec A ↦ vec Σ_{k<2^l} A^k`, within `epsilon` of
/// `(I − A)⁻¹` in spectral norm whenever `‖A‖₂ ≤ 1 − delta`. Depth `2l + 1`.
pub fn inversion_network(d: usize, epsilon: f64, delta: f64) -> Result<Network> {
    positive("d", d)?;
    let plan = neumann_length(epsilon, delta)?;
    inversion_network_for_plan(d, &plan)
}

pub fn inversion_network_for_plan(d: usize, plan: &NeumannPlan) -> Result<Network> {
    positive("d", d)?;
    positive("l", plan.l)?;
    concat(neumann_product(d, plan.l)?, fan_out(d * d, plan.l)?)
}

/// Explicit weight bound for the inversion network:
/// `(32l² + 60l − 80)d³ + (40l² − 44l − 112)d²` for `l ≥ 2`.
///
/// For `l = 1` the polynomial is not a valid bound (it is negative for
/// small `d`); the network is then `((Id, vec Id))` and its exact count
/// `d² + d` is returned instead.
pub fn inversion_nnz_bound(d: usize, l: usize) -> u128 {
    let (d, l) = (d as i128, l as i128);
    if l <= 1 {
        return (d * d + d) as u128;
    }
    let v = (32 * l * l + 60 * l - 80) * d * d * d + (40 * l * l - 44 * l - 112) * d * d;
    v.max(0) as u128
}

/// `Σ_{k=0}^{2^l − 1} A^k` by direct term-by-term accumulation.
pub fn neumann_partial_sum_oracle(a: &DMatrix<f64>, l: usize) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(mismatch(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    if l == 0 || l >= 40 {
        return Err(Error::InvalidArgument(format!("l = {l} outside 1..40")));
    }
    let n = a.nrows();
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for _ in 1..(1u64 << l) {
        term = &term * a;
        sum += &term;
    }
    Ok(sum)
}

/// Largest singular value by power iteration on `AᵀA`.
///
/// Starts from `(1, …, 1)/√n`; if the iterate collapses to zero (start
/// vector in the null space) it restarts from the next unit basis vector.
/// Converged once the Rayleigh quotient changes by at most `1e-12`
/// relatively and either the eigen-residual is below `1e-6` relative or
/// the quotient has stalled for 50 consecutive iterations.
pub fn spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 100_000;
    const STALL: usize = 50;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEntry("matrix".into()));
    }
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 || a.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let at = a.transpose();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut restarts = 0;
    let mut prev = f64::NAN;
    let mut stalled = 0;
    for _ in 0..MAX_ITER {
        let w = &at * (a * &v);
        let norm = w.norm();
        if norm == 0.0 {
            if restarts >= n {
                return Ok(0.0);
            }
            v = DVector::zeros(n);
            v[restarts] = 1.0;
            restarts += 1;
            prev = f64::NAN;
            continue;
        }
        let lambda = v.dot(&w);
        let residual = (&w - &v * lambda).norm();
        if (lambda - prev).abs() <= TOL * lambda {
            stalled += 1;
            if residual <= 1e-6 * lambda || stalled >= STALL {
                return Ok(lambda.max(0.0).sqrt());
            }
        } else {
            stalled = 0;
        }
        prev = lambda;
        v = w / norm;
    }
    Err(Error::ConvergenceFailure { iterations: MAX_ITER })
}

/// Layers of a network as `(rows, cols)` pairs; handy in diagnostics.
pub fn layer_shapes(net: &Network) -> Vec<(usize, usize)> {
    net.layers().iter().map(|l: &Layer| (l.out_dim(), l.in_dim())).collect()
}
