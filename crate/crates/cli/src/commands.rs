use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use requnet::matrix_nets::{inversion_network, inversion_nnz_bound, matr, neumann_length, vec};
use requnet::oracle::{shifted_inverse, svd_norm};
use requnet::pde::{
    assemble_affine_system, b_network, build_reduced_basis, error_csv, evaluate_error, solution_networks, ErrorMode,
    GramNorm,
};
use requnet::{Error, Result};

use crate::random;

#[derive(Debug, Clone, Serialize)]
pub struct InvertReport {
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub l: usize,
    pub depth: usize,
    pub nnz: usize,
    pub nnz_bound: u128,
    pub measured_error: Option<f64>,
}

/// Reads a square matrix stored as a JSON array of rows.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("{} is not a non-empty square matrix", path.display())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub enum MatrixSource<'a> {
    Random { seed: u64 },
    File(&'a Path),
}

/// Builds the inversion network and applies it to the chosen matrix. A
/// random matrix is rescaled to the admissible boundary `‖A‖₂ = 1 − δ`.
pub fn invert(d: usize, eps: f64, delta: f64, source: MatrixSource, save: Option<&Path>) -> Result<InvertReport> {
    let plan = neumann_length(eps, delta)?;
    let net = inversion_network(d, eps, delta)?;
    let a = match source {
        MatrixSource::Random { seed } => random::boundary_matrix(&mut random::rng(seed), d, delta)?,
        MatrixSource::File(path) => read_matrix(path)?,
    };
    if a.nrows() != d {
        return Err(Error::InvalidArgument(format!("matrix is {}x{} but --dim is {d}", a.nrows(), a.ncols())));
    }
    let out = matr(&net.realize(&vec(&a))?, d, d)?;
    let measured_error = shifted_inverse(&a).ok().map(|inv| svd_norm(&(inv - out)));
    if let Some(path) = save {
        net.save(path)?;
    }
    Ok(InvertReport {
        d,
        eps,
        delta,
        l: plan.l,
        depth: net.depth(),
        nnz: net.nnz(),
        nnz_bound: inversion_nnz_bound(d, plan.l),
        measured_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRow {
    pub d: usize,
    pub eps: f64,
    pub l: usize,
    pub depth: usize,
    pub nnz: usize,
    pub bound: u128,
}

pub fn complexity_table(dims: &[usize], eps: &[f64], delta: f64) -> Result<Vec<ComplexityRow>> {
    if dims.is_empty() || eps.is_empty() {
        return Err(Error::InvalidArgument("dimension and epsilon lists must be non-empty".into()));
    }
    let mut rows = Vec::with_capacity(dims.len() * eps.len());
    for &d in dims {
        for &e in eps {
            let plan = neumann_length(e, delta)?;
            let net = inversion_network(d, e, delta)?;
            rows.push(ComplexityRow {
                d,
                eps: e,
                l: plan.l,
                depth: net.depth(),
                nnz: net.nnz(),
                bound: inversion_nnz_bound(d, plan.l),
            });
        }
    }
    Ok(rows)
}

pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from("d,eps,l,depth,nnz,bound\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.d, r.eps, r.l, r.depth, r.nnz, r.bound));
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct PdeConfig {
    pub grid: usize,
    pub chessboard: usize,
    pub mu: f64,
    pub snapshots: usize,
    pub drop_tol: f64,
    pub eps: f64,
    pub test: usize,
    pub seed: u64,
    pub max_nnz: u128,
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct PdeSummary {
    pub D: usize,
    pub d: usize,
    pub p: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
    pub eps: f64,
    pub c_f: f64,
    pub l: usize,
    pub b_network_nnz: usize,
    pub b_network_bound: usize,
    pub estimated_nnz: u128,
    pub worst_euclid: Option<f64>,
    pub worst_g: Option<f64>,
    pub worst_rel_g: Option<f64>,
    pub rb_truncation: Option<f64>,
    pub depth: Option<usize>,
    pub nnz: Option<usize>,
    pub error: Option<String>,
}

impl PdeSummary {
    pub fn within_eps(&self) -> bool {
        let ok = |v: Option<f64>| v.is_some_and(|e| e <= self.eps);
        self.error.is_none() && ok(self.worst_euclid) && ok(self.worst_g)
    }
}

pub struct PdeOutcome {
    pub summary: PdeSummary,
    pub csv: Option<String>,
}

/// Full pipeline: assembly, reduced basis from random snapshots, solution
/// networks, and errors on random test parameters. Snapshot parameters are
/// drawn before test parameters from the same seeded stream.
///
/// If the networks would exceed `max_nnz` weights, the summary carries the
/// reduced-basis data and the error message, and no CSV is produced.
pub fn pde(cfg: &PdeConfig) -> Result<PdeOutcome> {
    let sys = assemble_affine_system(cfg.grid, cfg.chessboard, cfg.mu)?;
    let mut rng = random::rng(cfg.seed);
    let p = sys.params();
    let snapshots = random::params(&mut rng, p, cfg.snapshots);
    let tests = random::params(&mut rng, p, cfg.test);
    let rb = build_reduced_basis(&sys, &snapshots, cfg.drop_tol)?;
    let d = rb.dim();
    let c_f = rb.load_bound();
    let bnet = b_network(&rb)?;
    let budget = requnet::pde::solution_budget(sys.dim(), &rb, cfg.eps, c_f)?;
    let mut summary = PdeSummary {
        D: sys.dim(),
        d,
        p,
        alpha: rb.alpha,
        beta: rb.beta,
        lambda: rb.lambda,
        delta: rb.delta,
        eps: cfg.eps,
        c_f,
        l: budget.l,
        b_network_nnz: bnet.nnz(),
        b_network_bound: 8 * p + (4 * p + 1) * d * d,
        estimated_nnz: budget.estimated_nnz,
        worst_euclid: None,
        worst_g: None,
        worst_rel_g: None,
        rb_truncation: None,
        depth: None,
        nnz: None,
        error: None,
    };
    let nets = match solution_networks(&sys, &rb, cfg.eps, c_f, Some(cfg.max_nnz)) {
        Ok(nets) => nets,
        Err(e @ Error::ResourceLimit { .. }) => {
            summary.error = Some(e.to_string());
            return Ok(PdeOutcome { summary, csv: None });
        }
        Err(e) => return Err(e),
    };
    let gram = GramNorm::new(sys.gram())?;
    let euclid = evaluate_error(&sys, &rb, &gram, &nets.rb, &tests, ErrorMode::EuclideanRb)?;
    let g = evaluate_error(&sys, &rb, &gram, &nets.h, &tests, ErrorMode::GNormH)?;
    let rel = evaluate_error(&sys, &rb, &gram, &nets.h, &tests, ErrorMode::RelativeG)?;
    summary.worst_euclid = Some(euclid.worst_case);
    summary.worst_g = Some(g.worst_case);
    summary.worst_rel_g = Some(rel.worst_case);
    summary.rb_truncation = Some(g.rb_truncation);
    summary.depth = Some(nets.h.depth());
    summary.nnz = Some(nets.h.nnz());
    Ok(PdeOutcome { summary, csv: Some(error_csv(&tests, &euclid, &g, &rel)) })
}

/// `report.csv` → `report.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some_and(|e| e == "json") {
        csv.with_extension("summary.json")
    } else {
        csv.with_extension("json")
    }
}
