//! Chessboard diffusion problem on the unit square, its reduced basis, and
//! networks approximating the parameter-to-solution map.
//!
//! The coefficient is `μ + Σ yᵢ χ_{Ωᵢ}` on an `s × s` partition, discretized
//! by P1 elements on a uniform mesh of right triangles. Interior node `(i, j)`
//! (`1 ≤ i, j ≤ n`) has index `(j − 1)n + (i − 1)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::Serialize;

use crate::calculus::{affine_network, concat, fan_out, parallelize, sparse_concat, BETA, GAMMA, OMEGA};
use crate::error::{mismatch, Error, Result};
use crate::matrix_nets::{
    inversion_network_for_plan, inversion_nnz_bound, mult_network, neumann_length, vec, NeumannPlan,
};
use crate::network::Network;
use crate::sparse::SparseMatrix;

/// Right-hand side `f(x) = 20 + 10x₁ − 5x₂`.
pub fn default_load(x1: f64, x2: f64) -> f64 {
    20.0 + 10.0 * x1 - 5.0 * x2
}

#[derive(Debug, Clone)]
pub struct AffineSystem {
    grid_n: usize,
    chessboard: usize,
    mu: f64,
    components: Vec<SparseMatrix>,
    load: Vec<f64>,
    gram: SparseMatrix,
}

/// Assembles `B₀ = μK`, `Bᵢ` (stiffness restricted to `Ωᵢ`), the load vector
/// and `G = K`, where `K` is the unit-coefficient stiffness matrix.
pub fn assemble_affine_system(grid_n: usize, s: usize, mu: f64) -> Result<AffineSystem> {
    assemble_with_load(grid_n, s, mu, default_load)
}

pub fn assemble_with_load(grid_n: usize, s: usize, mu: f64, f: impl Fn(f64, f64) -> f64) -> Result<AffineSystem> {
    if grid_n < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 3 interior nodes per side (got {grid_n})"
        )));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("chessboard side must be at least 1".into()));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu = {mu} must be positive")));
    }
    let n = grid_n;
    let dim = n * n;
    let p = s * s;
    let h = 1.0 / (n + 1) as f64;
    let node = |i: usize, j: usize| -> Option<usize> {
        ((1..=n).contains(&i) && (1..=n).contains(&j)).then(|| (j - 1) * n + (i - 1))
    };

    let mut unit = Vec::new();
    let mut parts: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); p];
    let mut load = vec![0.0; dim];
    let area = 0.5 * h * h;

    for cj in 0..=n {
        for ci in 0..=n {
            let cells = [[(ci, cj), (ci + 1, cj), (ci + 1, cj + 1)], [(ci, cj), (ci + 1, cj + 1), (ci, cj + 1)]];
            for tri in cells {
                let local = local_stiffness(tri);
                let cx = tri.iter().map(|v| v.0 as f64).sum::<f64>() * h / 3.0;
                let cy = tri.iter().map(|v| v.1 as f64).sum::<f64>() * h / 3.0;
                let col = ((cx * s as f64) as usize).min(s - 1);
                let row = ((cy * s as f64) as usize).min(s - 1);
                let region = row * s + col;
                for a in 0..3 {
                    let Some(ga) = node(tri[a].0, tri[a].1) else { continue };
                    for b in 0..3 {
                        let Some(gb) = node(tri[b].0, tri[b].1) else { continue };
                        unit.push((ga, gb, local[a][b]));
                        parts[region].push((ga, gb, local[a][b]));
                    }
                    // Edge-midpoint rule: exact for the quadratic f·φ.
                    let mid = |b: usize| {
                        let x = 0.5 * (tri[a].0 + tri[b].0) as f64 * h;
                        let y = 0.5 * (tri[a].1 + tri[b].1) as f64 * h;
                        f(x, y)
                    };
                    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                    load[ga] += area / 3.0 * 0.5 * (mid(b) + mid(c));
                }
            }
        }
    }

    let gram = SparseMatrix::from_triplets(dim, dim, unit)?;
    let mut components = Vec::with_capacity(p + 1);
    components.push(gram.clone().scale(mu));
    for part in parts {
        components.push(SparseMatrix::from_triplets(dim, dim, part)?);
    }
    Ok(AffineSystem { grid_n, chessboard: s, mu, components, load, gram })
}

/// P1 stiffness of a triangle given in grid units. The 2D stiffness is
/// invariant under scaling, so integer coordinates give exact entries.
fn local_stiffness(tri: [(usize, usize); 3]) -> [[f64; 3]; 3] {
    let p: Vec<(f64, f64)> = tri.iter().map(|&(i, j)| (i as f64, j as f64)).collect();
    let det = (p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1);
    let grad = |a: usize| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        ((p[b].1 - p[c].1) / det, (p[c].0 - p[b].0) / det)
    };
    let g = [grad(0), grad(1), grad(2)];
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = 0.5 * det.abs() * (g[a].0 * g[b].0 + g[a].1 * g[b].1);
        }
    }
    k
}

impl AffineSystem {
    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn chessboard(&self) -> usize {
        self.chessboard
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// High-fidelity dimension `D = grid_n²`.
    pub fn dim(&self) -> usize {
        self.grid_n * self.grid_n
    }

    /// Number of parameters `p = s²`.
    pub fn params(&self) -> usize {
        self.components.len() - 1
    }

    /// `B₀, B₁, …, B_p`.
    pub fn components(&self) -> &[SparseMatrix] {
        &self.components
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn gram(&self) -> &SparseMatrix {
        &self.gram
    }

    fn check_param(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.params() {
            return Err(mismatch(format!("expected {} parameters, got {}", self.params(), y.len())));
        }
        if let Some(v) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("parameter {v} outside [0, 1]")));
        }
        Ok(())
    }

    /// `B_y = B₀ + Σ yᵢ Bᵢ`.
    pub fn operator(&self, y: &[f64]) -> Result<SparseMatrix> {
        self.check_param(y)?;
        let terms: Vec<(f64, &SparseMatrix)> =
            std::iter::once(1.0).chain(y.iter().copied()).zip(&self.components).collect();
        SparseMatrix::linear_combination(&terms)
    }
}

fn to_csc(m: &SparseMatrix) -> CscMatrix<f64> {
    let mut coo = CooMatrix::new(m.rows(), m.cols());
    for r in 0..m.rows() {
        let (cols, vals) = m.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            coo.push(r, c as usize, v);
        }
    }
    CscMatrix::from(&coo)
}

fn sparse_cholesky(m: &SparseMatrix, what: &str) -> Result<CscCholesky<f64>> {
    CscCholesky::factor(&to_csc(m)).map_err(|e| Error::SingularSystem(format!("{what}: {e:?}")))
}

/// `u^h_y = B_y⁻¹ f` by sparse Cholesky.
pub fn solve_high_fidelity(sys: &AffineSystem, y: &[f64]) -> Result<Vec<f64>> {
    let op = sys.operator(y)?;
    let chol = sparse_cholesky(&op, "B_y")?;
    let rhs = DVector::from_column_slice(&sys.load);
    let u = chol.solve(&rhs);
    Ok(u.as_slice().to_vec())
}

/// `|v|_G = |Lᵀv|` with `G = LLᵀ`.
pub struct GramNorm {
    factor: CscCholesky<f64>,
}

impl GramNorm {
    pub fn new(gram: &SparseMatrix) -> Result<Self> {
        Ok(GramNorm { factor: sparse_cholesky(gram, "G")? })
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        let l = self.factor.l();
        l.col_iter()
            .map(|col| {
                let s: f64 = col.row_indices().iter().zip(col.values()).map(|(&r, &x)| x * v[r]).sum();
                s * s
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ReducedBasis {
    /// `D × d`, G-orthonormal columns.
    pub v: DMatrix<f64>,
    /// `θᵢ = VᵀBᵢV` for `i = 0, …, p`.
    pub theta: Vec<DMatrix<f64>>,
    pub f_rb: DVector<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl ReducedBasis {
    /// Reduced dimension `d`.
    pub fn dim(&self) -> usize {
        self.v.ncols()
    }

    pub fn params(&self) -> usize {
        self.theta.len() - 1
    }

    /// `B^rb_y = θ₀ + Σ yᵢθᵢ`.
    pub fn operator(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        if y.len() != self.params() {
            return Err(mismatch(format!("expected {} parameters, got {}", self.params(), y.len())));
        }
        let mut op = self.theta[0].clone();
        for (yi, t) in y.iter().zip(&self.theta[1..]) {
            op += t * *yi;
        }
        Ok(op)
    }

    /// `V c`.
    pub fn lift(&self, c: &[f64]) -> Vec<f64> {
        (&self.v * DVector::from_column_slice(c)).as_slice().to_vec()
    }

    /// `C_f`: `|f^rb|` plus a 1% margin.
    pub fn load_bound(&self) -> f64 {
        1.01 * self.f_rb.norm()
    }
}

fn g_dot(gram: &SparseMatrix, a: &[f64], b: &[f64]) -> f64 {
    gram.matvec(b).iter().zip(a).map(|(x, y)| x * y).sum()
}

/// Snapshots at `snapshot_params`, G-orthonormalized by modified
/// Gram–Schmidt with one reorthogonalization pass. A vector is dropped when
/// its remaining G-norm is at most `drop_tol` times the largest snapshot
/// G-norm.
pub fn build_reduced_basis(sys: &AffineSystem, snapshot_params: &[Vec<f64>], drop_tol: f64) -> Result<ReducedBasis> {
    if snapshot_params.is_empty() {
        return Err(Error::EmptySnapshotSet);
    }
    if !(drop_tol >= 0.0 && drop_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("drop tolerance {drop_tol} must be non-negative")));
    }
    let gram = sys.gram();
    let snapshots: Vec<Vec<f64>> =
        snapshot_params.iter().map(|y| solve_high_fidelity(sys, y)).collect::<Result<_>>()?;
    let largest = snapshots.iter().map(|u| g_dot(gram, u, u).sqrt()).fold(0.0, f64::max);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut w in snapshots {
        for _ in 0..2 {
            for q in &basis {
                let c = g_dot(gram, &w, q);
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = g_dot(gram, &w, &w).max(0.0).sqrt();
        if norm > drop_tol * largest && norm > 0.0 {
            w.iter_mut().for_each(|a| *a /= norm);
            basis.push(w);
        }
    }
    if basis.is_empty() {
        return Err(Error::InvalidArgument("all snapshots vanish; reduced basis is empty".into()));
    }

    let dim = sys.dim();
    let v = DMatrix::from_fn(dim, basis.len(), |r, c| basis[c][r]);
    let theta = sys
        .components()
        .iter()
        .map(|b| {
            let bv = DMatrix::from_fn(dim, v.ncols(), |r, c| {
                let (cols, vals) = b.row(r);
                cols.iter().zip(vals).map(|(&k, &x)| x * v[(k as usize, c)]).sum()
            });
            let t = v.transpose() * bv;
            (&t + t.transpose()) * 0.5
        })
        .collect();
    let f_rb = v.transpose() * DVector::from_column_slice(sys.load());
    let alpha = sys.mu() + 1.0;
    let beta = sys.mu();
    let lambda = 1.0 / (alpha + beta);
    Ok(ReducedBasis { v, theta, f_rb, alpha, beta, lambda, delta: lambda * beta })
}

/// `u^rb_y = (B^rb_y)⁻¹ f^rb`.
pub fn reduced_solve(rb: &ReducedBasis, y: &[f64]) -> Result<Vec<f64>> {
    let op = rb.operator(y)?;
    let chol = op.cholesky().ok_or_else(|| Error::SingularSystem("reduced operator".into()))?;
    Ok(chol.solve(&rb.f_rb).as_slice().to_vec())
}

/// `Φ^B`: `y ↦ vec(λθ₀ + λΣ yᵢθᵢ)`, exact. Each `yᵢ` is relayed through the
/// identity gadget so that the ReQU layer does not distort it.
pub fn b_network(rb: &ReducedBasis) -> Result<Network> {
    let p = rb.params();
    let d2 = rb.dim() * rb.dim();
    let mut first = Vec::with_capacity(4 * p);
    let mut second = Vec::with_capacity(4 * p * d2);
    for i in 0..p {
        let col = vec(&(&rb.theta[i + 1] * rb.lambda));
        for t in 0..4 {
            first.push((4 * i + t, i, OMEGA[t]));
            for (r, &x) in col.iter().enumerate() {
                second.push((r, 4 * i + t, x * BETA[t]));
            }
        }
    }
    let gamma = (0..p).flat_map(|_| GAMMA).collect();
    Network::from_pairs(vec![
        (SparseMatrix::from_triplets(4 * p, p, first)?, gamma),
        (SparseMatrix::from_triplets(d2, 4 * p, second)?, vec(&(&rb.theta[0] * rb.lambda))),
    ])
}

/// `Φ^f`: the constant map `y ↦ f^rb`.
pub fn f_network(rb: &ReducedBasis) -> Result<Network> {
    affine_network(SparseMatrix::zeros(rb.dim(), rb.params()), rb.f_rb.as_slice().to_vec())
}

/// `Φ^{B,Id}`: `y ↦ vec(I − λB^rb_y)`.
pub fn b_shift_network(rb: &ReducedBasis) -> Result<Network> {
    let d = rb.dim();
    b_network(rb)?.negate_last_and_shift(&vec(&DMatrix::identity(d, d)))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// Neumann plan used inside [`inv_b_network`]: accuracy `ε/(2λ)` (capped
/// at ½ so it stays a valid accuracy) on matrices with margin `δ/2`.
pub fn inv_b_plan(rb: &ReducedBasis, eps: f64) -> Result<NeumannPlan> {
    check_eps(eps)?;
    neumann_length((eps / (2.0 * rb.lambda)).min(0.5), rb.delta / 2.0)
}

/// `Φ^B_inv;ε = ((λI, 0)) • (Φ_inv;ε/2λ ⊙ Φ^{B,Id})`: `y ↦ ≈ vec((B^rb_y)⁻¹)`.
pub fn inv_b_network(rb: &ReducedBasis, eps: f64) -> Result<Network> {
    let plan = inv_b_plan(rb, eps)?;
    let d = rb.dim();
    let inner = sparse_concat(inversion_network_for_plan(d, &plan)?, b_shift_network(rb)?)?;
    concat(affine_network(SparseMatrix::scaled_identity(d * d, rb.lambda), vec![0.0; d * d])?, inner)
}

/// Accuracy split of the solution networks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolutionBudget {
    pub epsilon: f64,
    pub c_f: f64,
    /// `ε′ = ε/(εβ + 2C_f)`, accuracy of the inverse operator network.
    pub eps_inverse: f64,
    /// `ε″ = εβ/2`, allowed error of `Φ^f` (unused: `Φ^f` is exact).
    pub eps_load: f64,
    /// `ε‴ = min{3ε′λβ²/8, λβ/4}`, allowed error of `Φ^B` (unused: `Φ^B` is exact).
    pub eps_operator: f64,
    pub l: usize,
    /// Upper estimate of the nonzero weights of the h-variant.
    pub estimated_nnz: u128,
}

pub fn solution_budget(sys_dim: usize, rb: &ReducedBasis, eps: f64, c_f: f64) -> Result<SolutionBudget> {
    check_eps(eps)?;
    if !(c_f > 0.0 && c_f.is_finite()) {
        return Err(Error::InvalidArgument(format!("C_f = {c_f} must be positive")));
    }
    let eps_inverse = eps / (eps * rb.beta + 2.0 * c_f);
    let eps_load = eps * rb.beta / 2.0;
    let eps_operator = (3.0 * eps_inverse * rb.lambda * rb.beta * rb.beta / 8.0).min(rb.lambda * rb.beta / 4.0);
    let plan = inv_b_plan(rb, eps_inverse)?;
    let (d, p, big) = (rb.dim() as u128, rb.params() as u128, sys_dim as u128);
    let b_net = 8 * p + (4 * p + 1) * d * d;
    let pieces = inversion_nnz_bound(rb.dim(), plan.l) + b_net + 12 * d * d + d + big * d;
    Ok(SolutionBudget {
        epsilon: eps,
        c_f,
        eps_inverse,
        eps_load,
        eps_operator,
        l: plan.l,
        estimated_nnz: 5 * pieces + 4 * (d * d + d + big),
    })
}

pub struct SolutionNetworks {
    /// `y ↦ ≈ u^rb_y`.
    pub rb: Network,
    /// `y ↦ ≈ V u^rb_y`.
    pub h: Network,
    pub budget: SolutionBudget,
}

/// `Φ^{u,rb} = Φ_mult^{d,d,1} ⊙ (P(Φ^B_inv;ε′, Φ^f) • ((Id; Id), 0))` and
/// `Φ^{u,h} = ((V, 0)) ⊙ Φ^{u,rb}`.
///
/// Fails with [`Error::ResourceLimit`] before building anything if the
/// estimated size exceeds `max_nnz`.
pub fn solution_networks(
    sys: &AffineSystem,
    rb: &ReducedBasis,
    eps: f64,
    c_f: f64,
    max_nnz: Option<u128>,
) -> Result<SolutionNetworks> {
    let budget = solution_budget(sys.dim(), rb, eps, c_f)?;
    if let Some(limit) = max_nnz {
        if budget.estimated_nnz > limit {
            return Err(Error::ResourceLimit { estimated: budget.estimated_nnz, limit });
        }
    }
    let d = rb.dim();
    let lanes = parallelize(vec![inv_b_network(rb, budget.eps_inverse)?, f_network(rb)?])?;
    let rb_net = sparse_concat(mult_network(d, d, 1)?, concat(lanes, fan_out(rb.params(), 2)?)?)?;
    let head = affine_network(SparseMatrix::from_dense(&rb.v), vec![0.0; sys.dim()])?;
    let h_net = sparse_concat(head, rb_net.clone())?;
    Ok(SolutionNetworks { rb: rb_net, h: h_net, budget })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    /// `|u^rb_y − net(y)|` for a network with `d` outputs.
    EuclideanRb,
    /// `|V u^rb_y − net(y)|_G` for a network with `D` outputs.
    GNormH,
    /// `|V u^rb_y − net(y)|_G / |V u^rb_y|_G`.
    RelativeG,
}

impl FromStr for ErrorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean-rb" => Ok(ErrorMode::EuclideanRb),
            "g-norm-h" => Ok(ErrorMode::GNormH),
            "relative-g" => Ok(ErrorMode::RelativeG),
            other => Err(Error::InvalidArgument(format!("unknown error mode {other:?}"))),
        }
    }
}

impl fmt::Display for ErrorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMode::EuclideanRb => "euclidean-rb",
            ErrorMode::GNormH => "g-norm-h",
            ErrorMode::RelativeG => "relative-g",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub mode: ErrorMode,
    pub errors: Vec<f64>,
    pub worst_case: f64,
    pub target_eps: Option<f64>,
    /// Largest G-norm distance between `u^h_y` and its G-projection onto
    /// the range of `V`, over the same parameters.
    pub rb_truncation: f64,
}

impl ErrorReport {
    pub fn within_target(&self) -> bool {
        self.target_eps.is_none_or(|eps| self.worst_case <= eps)
    }
}

/// Errors of `net` against the reduced solution at every parameter.
pub fn evaluate_error(
    sys: &AffineSystem,
    rb: &ReducedBasis,
    gram: &GramNorm,
    net: &Network,
    params: &[Vec<f64>],
    mode: ErrorMode,
) -> Result<ErrorReport> {
    if net.input_dim() != rb.params() {
        return Err(mismatch(format!(
            "network takes {} inputs, problem has {} parameters",
            net.input_dim(),
            rb.params()
        )));
    }
    let expected_out = if mode == ErrorMode::EuclideanRb { rb.dim() } else { sys.dim() };
    if net.output_dim() != expected_out {
        return Err(mismatch(format!("{mode} needs {expected_out} network outputs, got {}", net.output_dim())));
    }
    let vt_g = rb.v.transpose() * sys.gram().to_dense();
    let mut errors = Vec::with_capacity(params.len());
    let mut rb_truncation = 0.0f64;
    for y in params {
        let c = reduced_solve(rb, y)?;
        let out = net.realize(y)?;
        let err = match mode {
            ErrorMode::EuclideanRb => c.iter().zip(&out).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            ErrorMode::GNormH | ErrorMode::RelativeG => {
                let lifted = rb.lift(&c);
                let diff: Vec<f64> = lifted.iter().zip(&out).map(|(a, b)| a - b).collect();
                let e = gram.norm(&diff);
                if mode == ErrorMode::RelativeG {
                    e / gram.norm(&lifted)
                } else {
                    e
                }
            }
        };
        errors.push(err);

        let u = solve_high_fidelity(sys, y)?;
        let coeffs = &vt_g * DVector::from_column_slice(&u);
        let proj = rb.lift(coeffs.as_slice());
        let rest: Vec<f64> = u.iter().zip(&proj).map(|(a, b)| a - b).collect();
        rb_truncation = rb_truncation.max(gram.norm(&rest));
    }
    let worst_case = errors.iter().copied().fold(0.0, f64::max);
    Ok(ErrorReport { mode, errors, worst_case, target_eps: None, rb_truncation })
}

/// CSV with header `y_1,…,y_p,err_euclid_rb,err_g_h,err_rel_g`, one row per
/// parameter and a final `MAX` row holding the column maxima.
pub fn error_csv(params: &[Vec<f64>], euclid: &ErrorReport, g: &ErrorReport, rel: &ErrorReport) -> String {
    let p = params.first().map_or(0, Vec::len);
    let mut out = String::new();
    let header: Vec<String> = (1..=p).map(|i| format!("y_{i}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",err_euclid_rb,err_g_h,err_rel_g\n");
    for (k, y) in params.iter().enumerate() {
        for v in y {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{:e},{:e},{:e}\n", euclid.errors[k], g.errors[k], rel.errors[k]));
    }
    out.push_str("MAX");
    out.push_str(&",".repeat(p.saturating_sub(1)));
    out.push_str(&format!(",{:e},{:e},{:e}\n", euclid.worst_case, g.worst_case, rel.worst_case));
    out
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Network JSON with an extra top-level `"reduced_basis"` entry.
pub fn basis_document(net: &Network, rb: &ReducedBasis) -> Result<String> {
    let mut doc = serde_json::to_value(net).map_err(|e| Error::Format(e.to_string()))?;
    let basis = serde_json::json!({
        "V": rows_of(&rb.v),
        "theta": rb.theta.iter().map(rows_of).collect::<Vec<_>>(),
        "f_rb": rb.f_rb.as_slice(),
        "alpha": rb.alpha,
        "beta": rb.beta,
    });
    doc.as_object_mut().expect("network serializes to an object").insert("reduced_basis".into(), basis);
    serde_json::to_string(&doc).map_err(|e| Error::Format(e.to_string()))
}
