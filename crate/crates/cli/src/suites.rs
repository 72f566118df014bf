//! Verification suites. Each check aggregates many randomized instances into
//! one measured value compared against a bound.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use requnet::calculus::{affine_network, concat, extend, identity_network, parallelize, sparse_concat};
use requnet::matrix_nets::{
    inversion_network, inversion_nnz_bound, matr, mult_network, neumann_length, neumann_partial_sum_oracle,
    power_network, spectral_norm, square_network, vec,
};
use requnet::oracle::{dense_product, neumann_factored, relative_error, repeated_squaring, shifted_inverse, svd_norm};
use requnet::{Network, Result};

use crate::random;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

impl Check {
    /// Passes when `measured ≤ bound`.
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Check { name: name.to_string(), pass: measured <= bound, measured, bound }
    }

    /// Counts violations of an exact property; passes when there are none.
    pub fn violations(name: &str, count: usize) -> Self {
        Check::at_most(name, count as f64, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub quick: bool,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, quick: false, dim: 8, eps: 1e-3, delta: 0.2 }
    }
}

impl SuiteConfig {
    fn count(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(1)
        } else {
            full
        }
    }
}

/// Relative error with a unit floor on the reference norm; outputs that
/// cancel to near zero are compared absolutely.
fn mixed_error(x: &[f64], y: &[f64]) -> f64 {
    relative_error(x, y, 1.0)
}

fn realize_chain(nets: &[&Network], x: &[f64]) -> Result<Vec<f64>> {
    let mut v = x.to_vec();
    for n in nets.iter().rev() {
        v = n.realize(&v)?;
    }
    Ok(v)
}

fn small_pair(rng: &mut impl Rng) -> (Network, Network) {
    let mid = rng.gen_range(1..=4);
    let (input, inner_depth) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
    let inner = random::network(rng, input, mid, inner_depth, 5);
    let (output, outer_depth) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
    let outer = random::network(rng, mid, output, outer_depth, 5);
    (outer, inner)
}

pub fn calculus(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rng = random::rng(cfg.seed);
    let instances = cfg.count(200);
    let inputs = 10;
    let mut checks = Vec::new();

    let mut id_err = 0.0f64;
    let mut id_count = 0;
    let mut id_depth = 0;
    for n in 1..=16 {
        for l in 1..=8 {
            let net = identity_network(n, l)?;
            if net.depth() != l {
                id_depth += 1;
            }
            let expected = if l == 1 { n } else { 20 * n * l - 28 * n };
            if net.nnz() != expected {
                id_count += 1;
            }
            for _ in 0..cfg.count(50) {
                let x = random::uniform_vec(&mut rng, n, -100.0, 100.0);
                id_err = id_err.max(relative_error(&net.realize(&x)?, &x, 1e-300));
            }
        }
    }
    checks.push(Check::at_most("identity_exactness", id_err, 1e-10));
    checks.push(Check::violations("identity_weight_count", id_count));
    checks.push(Check::violations("identity_depth", id_depth));

    let mut concat_err = 0.0f64;
    let mut concat_depth = 0;
    let mut sc_err = 0.0f64;
    let mut sc_depth = 0;
    let mut sc_bound = 0;
    let mut sc_layers = 0;
    for _ in 0..instances {
        let (outer, inner) = small_pair(&mut rng);
        let fused = concat(outer.clone(), inner.clone())?;
        let sparse = sparse_concat(outer.clone(), inner.clone())?;
        if fused.depth() != outer.depth() + inner.depth() - 1 {
            concat_depth += 1;
        }
        if sparse.depth() != outer.depth() + inner.depth() {
            sc_depth += 1;
        }
        let (m1, m2) = (outer.nnz(), inner.nnz());
        let out2 = inner.output_dim();
        let fine = m1 + m2 + 4 * outer.first_layer_nnz() + 4 * inner.last_layer_nnz() + 4 * out2;
        if sparse.nnz() > fine || sparse.nnz() > 5 * m1 + 5 * m2 + 4 * out2 {
            sc_bound += 1;
        }
        if (inner.depth() >= 2 && sparse.first_layer_nnz() != inner.first_layer_nnz())
            || (outer.depth() >= 2 && sparse.last_layer_nnz() != outer.last_layer_nnz())
        {
            sc_layers += 1;
        }
        for _ in 0..inputs {
            let x = random::uniform_vec(&mut rng, inner.input_dim(), -1.0, 1.0);
            let oracle = realize_chain(&[&outer, &inner], &x)?;
            concat_err = concat_err.max(mixed_error(&fused.realize(&x)?, &oracle));
            sc_err = sc_err.max(mixed_error(&sparse.realize(&x)?, &oracle));
        }
    }
    checks.push(Check::at_most("concat_realization", concat_err, 1e-10));
    checks.push(Check::violations("concat_depth", concat_depth));
    checks.push(Check::at_most("sparse_concat_realization", sc_err, 1e-10));
    checks.push(Check::violations("sparse_concat_depth", sc_depth));
    checks.push(Check::violations("sparse_concat_weight_bound", sc_bound));
    checks.push(Check::violations("sparse_concat_boundary_layers", sc_layers));

    let mut ext_err = 0.0f64;
    let mut ext_depth = 0;
    for _ in 0..instances {
        let net = random::any_network(&mut rng, 4, 4, 3, 5);
        let depth = net.depth();
        let target = depth + rng.gen_range(0..=4);
        let ext = extend(net.clone(), target)?;
        if ext.depth() != target {
            ext_depth += 1;
        }
        for _ in 0..inputs {
            let x = random::uniform_vec(&mut rng, net.input_dim(), -1.0, 1.0);
            ext_err = ext_err.max(mixed_error(&ext.realize(&x)?, &net.realize(&x)?));
        }
    }
    checks.push(Check::at_most("extend_realization", ext_err, 1e-10));
    checks.push(Check::violations("extend_depth", ext_depth));

    let mut par_err = 0.0f64;
    let mut par_depth = 0;
    let mut par_bound = 0;
    let mut par_equal = 0;
    let mut par_first = 0;
    for _ in 0..instances {
        let k = rng.gen_range(1..=4);
        let equal = rng.gen_bool(0.5);
        let common = rng.gen_range(1..=3);
        let nets: Vec<Network> = (0..k)
            .map(|_| {
                let depth = if equal { common } else { rng.gen_range(1..=4) };
                let (input, output) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
                random::network(&mut rng, input, output, depth, 4)
            })
            .collect();
        let depth = nets.iter().map(Network::depth).max().unwrap();
        let par = parallelize(nets.clone())?;
        if par.depth() != depth {
            par_depth += 1;
        }
        let total: usize =
            nets.iter().map(|n| n.nnz() + 4 * n.last_layer_nnz() + n.output_dim() * (20 * depth + 8)).sum();
        let last: usize = nets.iter().map(|n| n.last_layer_nnz().max(4 * n.output_dim())).sum();
        if par.nnz() > total || par.last_layer_nnz() > last {
            par_bound += 1;
        }
        let all_equal = nets.iter().all(|n| n.depth() == depth);
        if all_equal && par.nnz() != nets.iter().map(Network::nnz).sum::<usize>() {
            par_equal += 1;
        }
        if (all_equal || nets.iter().all(|n| n.depth() >= 2))
            && par.first_layer_nnz() != nets.iter().map(Network::first_layer_nnz).sum::<usize>()
        {
            par_first += 1;
        }
        for _ in 0..inputs {
            let xs: Vec<Vec<f64>> =
                nets.iter().map(|n| random::uniform_vec(&mut rng, n.input_dim(), -1.0, 1.0)).collect();
            let mut oracle = Vec::new();
            for (n, x) in nets.iter().zip(&xs) {
                oracle.extend(n.realize(x)?);
            }
            par_err = par_err.max(mixed_error(&par.realize(&xs.concat())?, &oracle));
        }
    }
    checks.push(Check::at_most("parallelize_realization", par_err, 1e-10));
    checks.push(Check::violations("parallelize_depth", par_depth));
    checks.push(Check::violations("parallelize_weight_bound", par_bound));
    checks.push(Check::violations("parallelize_equal_depth_additive", par_equal));
    checks.push(Check::violations("parallelize_first_layer_additive", par_first));

    let mut sel = 0;
    for _ in 0..instances {
        let net = random::any_network(&mut rng, 4, 4, 3, 5);
        let cols = rng.gen_range(1..=5);
        let d = random::selection(&mut rng, net.input_dim(), cols);
        let composed = concat(net.clone(), affine_network(d, vec![0.0; net.input_dim()])?)?;
        let worse = composed.layers().iter().zip(net.layers()).any(|(a, b)| a.nnz() > b.nnz());
        if worse {
            sel += 1;
        }
    }
    checks.push(Check::violations("selection_composition_layer_weights", sel));

    Ok(SuiteReport { suite: "calculus".into(), checks })
}

fn mult_input(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let mut x = vec(a);
    x.extend(vec(b));
    x
}

pub fn matrix(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rng = random::rng(cfg.seed);
    let mut checks = Vec::new();

    let mut mult_err = 0.0f64;
    let mut mult_shape = 0;
    for _ in 0..cfg.count(200) {
        let (d, n, l) = (rng.gen_range(1..=8), rng.gen_range(1..=8), rng.gen_range(1..=8));
        let net = mult_network(d, n, l)?;
        let c = net.complexity();
        if c.depth != 2
            || c.total_nnz > 12 * d * n * l
            || c.layer_nnz[0] > 8 * d * n * l
            || c.layer_nnz[1] > 4 * d * n * l
        {
            mult_shape += 1;
        }
        let a = random::uniform_matrix(&mut rng, d, n, -1.0, 1.0);
        let b = random::uniform_matrix(&mut rng, n, l, -1.0, 1.0);
        let out = net.realize(&mult_input(&a, &b))?;
        mult_err = mult_err.max(relative_error(&out, &vec(&dense_product(&a, &b)?), 1e-300));
    }
    checks.push(Check::at_most("mult_exactness", mult_err, 1e-10));
    checks.push(Check::violations("mult_depth_and_weights", mult_shape));

    let mut sq_err = 0.0f64;
    let mut sq_shape = 0;
    for d in 1..=8 {
        let net = square_network(d)?;
        if net.depth() != 2 || net.nnz() > 12 * d * d * d {
            sq_shape += 1;
        }
        for _ in 0..cfg.count(10) {
            let a = random::uniform_matrix(&mut rng, d, d, -1.0, 1.0);
            sq_err = sq_err.max(relative_error(&net.realize(&vec(&a))?, &vec(&(&a * &a)), 1e-300));
        }
    }
    checks.push(Check::at_most("square_exactness", sq_err, 1e-10));
    checks.push(Check::violations("square_depth_and_weights", sq_shape));

    let mut pow_err = 0.0f64;
    let mut pow_shape = 0;
    for d in 1..=6 {
        for j in 1..=5 {
            let net = power_network(d, j)?;
            let d3 = d * d * d;
            if net.depth() != 2 * j
                || net.nnz() > 64 * j * d3
                || net.first_layer_nnz() > 8 * d3
                || net.last_layer_nnz() > 4 * d3
            {
                pow_shape += 1;
            }
            for _ in 0..cfg.count(5) {
                let a = random::uniform_matrix(&mut rng, d, d, -0.3, 0.3);
                // The relay gadget adds and removes unit offsets, so accuracy is
                // ~1e-16 absolute; small powers are compared absolutely.
                let oracle = vec(&repeated_squaring(&a, j));
                pow_err = pow_err.max(mixed_error(&net.realize(&vec(&a))?, &oracle));
            }
        }
    }
    checks.push(Check::at_most("power_exactness", pow_err, 1e-8));
    checks.push(Check::violations("power_depth_and_weights", pow_shape));

    let one = mult_network(2, 2, 2)?;
    let pair = parallelize(vec![one.clone(), one.clone()])?;
    checks.push(Check::violations("parallel_mult_additive", usize::from(pair.nnz() != 2 * one.nnz())));

    let mut sn_err = 0.0f64;
    for _ in 0..cfg.count(20) {
        let a = random::uniform_matrix(&mut rng, 10, 10, -1.0, 1.0);
        let svd = svd_norm(&a);
        sn_err = sn_err.max((spectral_norm(&a)? - svd).abs() / svd);
    }
    checks.push(Check::at_most("spectral_norm_vs_svd", sn_err, 1e-8));

    Ok(SuiteReport { suite: "matrix".into(), checks })
}

pub fn inversion(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rng = random::rng(cfg.seed);
    let mut checks = Vec::new();
    let (d, eps, delta) = (cfg.dim, cfg.eps, cfg.delta);
    let plan = neumann_length(eps, delta)?;
    let net = inversion_network(d, eps, delta)?;

    let mut err = 0.0f64;
    let mut partial = 0.0f64;
    for _ in 0..cfg.count(50) {
        let a = random::boundary_matrix(&mut rng, d, delta)?;
        let out = matr(&net.realize(&vec(&a))?, d, d)?;
        err = err.max(svd_norm(&(shifted_inverse(&a)? - &out)));
        let sum = neumann_partial_sum_oracle(&a, plan.l)?;
        partial = partial.max(relative_error(&vec(&out), &vec(&sum), 1e-300));
    }
    checks.push(Check::at_most("inversion_spectral_error", err, eps));
    checks.push(Check::at_most("inversion_matches_partial_sum", partial, 1e-8));
    checks.push(Check::violations("inversion_depth", usize::from(net.depth() != 2 * plan.l + 1)));
    let bound = inversion_nnz_bound(d, plan.l) as f64;
    checks.push(Check::at_most("inversion_weight_bound", net.nnz() as f64, bound));

    let mut tail = 0;
    for i in 0..20 {
        for j in 0..20 {
            let e = 10f64.powf(-1.0 - 5.0 * i as f64 / 19.0);
            let dl = 0.01 + 0.97 * j as f64 / 19.0;
            let p = neumann_length(e, dl)?;
            if p.tail_bound() > e {
                tail += 1;
            }
        }
    }
    checks.push(Check::violations("neumann_tail_bound", tail));

    let mut cross = 0.0f64;
    for _ in 0..cfg.count(10) {
        let a = random::boundary_matrix(&mut rng, 6, 0.5)?;
        let acc = neumann_partial_sum_oracle(&a, 4)?;
        cross = cross.max(relative_error(&vec(&neumann_factored(&a, 4)), &vec(&acc), 1e-300));
    }
    checks.push(Check::at_most("neumann_factored_vs_accumulated", cross, 1e-10));

    let a = random::boundary_matrix(&mut rng, 4, delta)?;
    let exact = shifted_inverse(&a)?;
    let mut previous = f64::INFINITY;
    let mut increases = 0;
    for e in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let net = inversion_network(4, e, delta)?;
        let measured = svd_norm(&(&exact - matr(&net.realize(&vec(&a))?, 4, 4)?));
        if measured > previous + 1e-12 {
            increases += 1;
        }
        previous = measured;
    }
    checks.push(Check::violations("inversion_error_monotone_in_eps", increases));

    Ok(SuiteReport { suite: "inversion".into(), checks })
}
