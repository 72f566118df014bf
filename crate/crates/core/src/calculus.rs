//! Structural operations on networks: concatenation, identity networks,
//! sparse concatenation, depth extension and parallelization.
//!
//! Every operation takes its operands by value so that layers of large
//! networks are moved rather than copied.

use crate::error::{mismatch, Error, Result};
use crate::network::{Layer, Network};
use crate::sparse::SparseMatrix;

/// Weights of the scalar gadgets: with σ₂ applied componentwise,
/// `x = βᵀσ₂(ωx + γ)` and `xy = βᵀσ₂(ωx + γy)`.
pub const OMEGA: [f64; 4] = [1.0, -1.0, 1.0, -1.0];
pub const GAMMA: [f64; 4] = [1.0, -1.0, -1.0, 1.0];
pub const BETA: [f64; 4] = [0.25, 0.25, -0.25, -0.25];

/// Single affine layer `x ↦ Ax + b`.
pub fn affine_network(a: SparseMatrix, b: Vec<f64>) -> Result<Network> {
    Network::new(vec![Layer::new(a, b)?])
}

/// `x ↦ (x, …, x)` with `copies` lanes.
pub fn fan_out(n: usize, copies: usize) -> Result<Network> {
    affine_network(SparseMatrix::stacked_identity(n, copies), vec![0.0; n * copies])
}

/// `Φ¹ • Φ²`: fuses the last layer of `inner` into the first layer of
/// `outer`. Realizes `outer ∘ inner` and has depth `L₁ + L₂ − 1`.
pub fn concat(outer: Network, inner: Network) -> Result<Network> {
    if outer.input_dim() != inner.output_dim() {
        return Err(mismatch(format!(
            "concat: outer input dimension {} differs from inner output dimension {}",
            outer.input_dim(),
            inner.output_dim()
        )));
    }
    let mut inner_layers = inner.into_layers();
    let mut outer_layers = outer.into_layers().into_iter();
    let boundary = inner_layers.pop().expect("non-empty");
    let first = outer_layers.next().expect("non-empty");

    let weights = first.weights.matmul(&boundary.weights)?;
    let mut bias = first.weights.matvec(&boundary.bias);
    bias.iter_mut().zip(&first.bias).for_each(|(v, b)| *v += b);

    inner_layers.push(Layer::new(weights, bias)?);
    inner_layers.extend(outer_layers);
    Network::new(inner_layers)
}

fn gadget_encoder(n: usize) -> (SparseMatrix, Vec<f64>) {
    let mut w = Vec::with_capacity(4 * n);
    for i in 0..n {
        for (t, &o) in OMEGA.iter().enumerate() {
            w.push((4 * i + t, i, o));
        }
    }
    let gamma = (0..n).flat_map(|_| GAMMA).collect();
    (SparseMatrix::from_triplets(4 * n, n, w).expect("in range"), gamma)
}

fn gadget_decoder(n: usize) -> SparseMatrix {
    let mut b = Vec::with_capacity(4 * n);
    for i in 0..n {
        for (t, &v) in BETA.iter().enumerate() {
            b.push((i, 4 * i + t, v));
        }
    }
    SparseMatrix::from_triplets(n, 4 * n, b).expect("in range")
}

/// The block matrix `WB`: n diagonal blocks `ωβᵀ`, each 4×4 and fully dense.
fn gadget_relay(n: usize) -> SparseMatrix {
    let mut t = Vec::with_capacity(16 * n);
    for i in 0..n {
        for (r, &o) in OMEGA.iter().enumerate() {
            for (c, &b) in BETA.iter().enumerate() {
                t.push((4 * i + r, 4 * i + c, o * b));
            }
        }
    }
    SparseMatrix::from_triplets(4 * n, 4 * n, t).expect("in range")
}

/// `Φ^Id_{n,L}`: realizes the identity on `Rⁿ` with depth `L`.
///
/// For `L = 1` this is `((Id, 0))` with `n` weights; otherwise it is
/// `((W, Γ), (WB, Γ) × (L−2), (B, 0))` with exactly `20nL − 28n` weights.
pub fn identity_network(n: usize, depth: usize) -> Result<Network> {
    if n == 0 || depth == 0 {
        return Err(Error::InvalidArgument(format!(
            "identity network needs n ≥ 1 and L ≥ 1 (got n = {n}, L = {depth})"
        )));
    }
    if depth == 1 {
        return affine_network(SparseMatrix::identity(n), vec![0.0; n]);
    }
    let (w, gamma) = gadget_encoder(n);
    let mut layers = Vec::with_capacity(depth);
    layers.push(Layer::new(w, gamma.clone())?);
    if depth > 2 {
        let relay = gadget_relay(n);
        for _ in 0..depth - 2 {
            layers.push(Layer::new(relay.clone(), gamma.clone())?);
        }
    }
    layers.push(Layer::new(gadget_decoder(n), vec![0.0; n])?);
    Network::new(layers)
}

/// `Φ¹ ⊙ Φ² = Φ¹ • Φ^Id_{n,2} • Φ²`: composition routed through a two-layer
/// identity so that weight counts stay additive. Depth is `L₁ + L₂`.
pub fn sparse_concat(outer: Network, inner: Network) -> Result<Network> {
    if outer.input_dim() != inner.output_dim() {
        return Err(mismatch(format!(
            "sparse_concat: outer input dimension {} differs from inner output dimension {}",
            outer.input_dim(),
            inner.output_dim()
        )));
    }
    let relay = identity_network(inner.output_dim(), 2)?;
    concat(outer, concat(relay, inner)?)
}

/// `E_L(Φ)`: pads `phi` to depth `target` by prepending an identity network
/// through sparse concatenation.
pub fn extend(phi: Network, target: usize) -> Result<Network> {
    let depth = phi.depth();
    if target < depth {
        return Err(Error::InvalidArgument(format!("cannot extend a depth-{depth} network to depth {target}")));
    }
    if target == depth {
        return Ok(phi);
    }
    let pad = identity_network(phi.output_dim(), target - depth)?;
    sparse_concat(pad, phi)
}

/// `P(Φ¹, …, Φᵏ)`: block-diagonal stacking after padding every network to
/// the largest depth. Lanes have independent inputs; the result consumes the
/// concatenation `(x₁, …, x_k)` and emits `(R(Φ¹)(x₁), …, R(Φᵏ)(x_k))`.
///
/// For a shared input, compose with [`fan_out`].
pub fn parallelize(phis: Vec<Network>) -> Result<Network> {
    let depth = phis.iter().map(Network::depth).max().ok_or(Error::EmptyList)?;
    if phis.len() == 1 {
        return extend(phis.into_iter().next().expect("one network"), depth);
    }
    let padded: Vec<Vec<Layer>> =
        phis.into_iter().map(|p| extend(p, depth).map(Network::into_layers)).collect::<Result<_>>()?;
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let blocks: Vec<&SparseMatrix> = padded.iter().map(|l| &l[k].weights).collect();
        let bias = padded.iter().flat_map(|l| l[k].bias.iter().copied()).collect();
        layers.push(Layer::new(SparseMatrix::block_diag(&blocks), bias)?);
    }
    Network::new(layers)
}
