mod common;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use requnet::calculus::affine_network;
use requnet::matrix_nets::{matr, vec};
use requnet::pde::{
    assemble_affine_system, assemble_with_load, b_network, b_shift_network, basis_document, build_reduced_basis,
    error_csv, evaluate_error, f_network, inv_b_network, reduced_solve, solution_networks, solve_high_fidelity,
    AffineSystem, ErrorMode, GramNorm, ReducedBasis,
};
use requnet::{Error, SparseMatrix};

fn params(rng: &mut impl Rng, p: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| common::vector(rng, p, 0.0, 1.0)).collect()
}

fn small(grid: usize, s: usize, snapshots: usize, seed: u64) -> (AffineSystem, ReducedBasis) {
    let sys = assemble_affine_system(grid, s, 0.1).unwrap();
    let mut rng = common::rng(seed);
    let ys = params(&mut rng, sys.params(), snapshots);
    let rb = build_reduced_basis(&sys, &ys, 1e-8).unwrap();
    (sys, rb)
}

fn dense_quadratic(m: &SparseMatrix, v: &[f64]) -> f64 {
    m.matvec(v).iter().zip(v).map(|(a, b)| a * b).sum()
}

#[test]
fn single_cell_is_proportional_to_unit_stiffness() {
    let sys = assemble_affine_system(7, 1, 0.1).unwrap();
    let k = sys.gram().to_dense();
    for y in [0.0, 0.3, 1.0] {
        let b = sys.operator(&[y]).unwrap().to_dense();
        assert!((b - &k * (0.1 + y)).amax() <= 1e-12);
    }
}

#[test]
fn subdomain_parts_tile_the_square() {
    let sys = assemble_affine_system(11, 3, 0.1).unwrap();
    let parts: Vec<(f64, &SparseMatrix)> = sys.components()[1..].iter().map(|b| (1.0, b)).collect();
    let sum = SparseMatrix::linear_combination(&parts).unwrap().to_dense();
    assert!((sum - sys.gram().to_dense()).amax() <= 1e-12);
    for b in sys.components() {
        assert!(b.is_symmetric(0.0));
    }
}

#[test]
fn parts_are_positive_semidefinite() {
    let sys = assemble_affine_system(9, 3, 0.1).unwrap();
    for b in &sys.components()[1..] {
        let min = b.to_dense().symmetric_eigenvalues().min();
        assert!(min >= -1e-12, "{min}");
    }
}

#[test]
fn operator_is_spd_on_the_reference_grid() {
    let sys = assemble_affine_system(33, 3, 0.1).unwrap();
    assert_eq!((sys.dim(), sys.params()), (1089, 9));
    let mut rng = common::rng(21);
    for y in params(&mut rng, 9, 10) {
        let min = sys.operator(&y).unwrap().to_dense().symmetric_eigenvalues().min();
        assert!(min > 0.0);
    }
}

#[test]
fn scaling_of_single_cell_solution() {
    let sys = assemble_affine_system(9, 1, 0.1).unwrap();
    let u1 = solve_high_fidelity(&sys, &[1.0]).unwrap();
    let u0 = solve_high_fidelity(&sys, &[0.0]).unwrap();
    let scaled: Vec<f64> = u0.iter().map(|v| v * 0.1 / 1.1).collect();
    assert!(common::rel(&u1, &scaled) <= 1e-12);
}

#[test]
fn residuals_are_small() {
    let sys = assemble_affine_system(17, 3, 0.1).unwrap();
    let f_norm = sys.load().iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut rng = common::rng(22);
    for y in params(&mut rng, 9, 20) {
        let u = solve_high_fidelity(&sys, &y).unwrap();
        let r = sys.operator(&y).unwrap().matvec(&u);
        let res = r.iter().zip(sys.load()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * f_norm);
    }
}

#[test]
fn solution_is_symmetric_under_diagonal_reflection() {
    // Constant load and y symmetric under transposition of the chessboard:
    // the mesh diagonal is invariant under (x₁, x₂) ↦ (x₂, x₁).
    let n = 12;
    let sys = assemble_with_load(n, 3, 0.1, |_, _| 1.0).unwrap();
    let y = [0.2, 0.7, 0.1, 0.7, 0.5, 0.9, 0.1, 0.9, 0.4];
    let u = solve_high_fidelity(&sys, &y).unwrap();
    for j in 0..n {
        for i in 0..n {
            assert!((u[j * n + i] - u[i * n + j]).abs() <= 1e-9);
        }
    }
}

#[test]
fn out_of_box_parameters_are_rejected() {
    let sys = assemble_affine_system(5, 2, 0.1).unwrap();
    assert!(matches!(solve_high_fidelity(&sys, &[0.5; 3]), Err(Error::DimensionMismatch(_))));
    assert!(matches!(solve_high_fidelity(&sys, &[0.5, 0.5, 1.5, 0.0]), Err(Error::InvalidArgument(_))));
}

#[test]
fn one_snapshot_basis() {
    let sys = assemble_affine_system(9, 2, 0.1).unwrap();
    let y = vec![0.3, 0.6, 0.2, 0.9];
    let rb = build_reduced_basis(&sys, std::slice::from_ref(&y), 1e-8).unwrap();
    assert_eq!(rb.dim(), 1);
    let vtgv = dense_quadratic(sys.gram(), rb.v.column(0).as_slice());
    assert!((vtgv - 1.0).abs() <= 1e-12);
    let u = solve_high_fidelity(&sys, &y).unwrap();
    let norm = dense_quadratic(sys.gram(), &u).sqrt();
    let normalized: Vec<f64> = u.iter().map(|v| v / norm).collect();
    assert!(common::rel(rb.v.column(0).as_slice(), &normalized) <= 1e-12);
    assert!(matches!(build_reduced_basis(&sys, &[], 1e-8), Err(Error::EmptySnapshotSet)));
}

#[test]
fn coercivity_constants() {
    let (_, rb) = small(9, 2, 3, 23);
    assert_eq!((rb.alpha, rb.beta), (1.1, 0.1));
    assert!((rb.lambda - 1.0 / 1.2).abs() <= 1e-15);
    assert!((rb.delta - 1.0 / 12.0).abs() <= 1e-15);
}

#[test]
fn single_cell_manifold_has_rank_one() {
    let (sys, rb) = small(15, 1, 10, 24);
    assert_eq!(rb.dim(), 1);
    let snaps: Vec<Vec<f64>> = (0..10).map(|k| solve_high_fidelity(&sys, &[k as f64 / 9.0]).unwrap()).collect();
    let m = DMatrix::from_fn(sys.dim(), 10, |r, c| snaps[c][r]);
    let sv = m.singular_values();
    assert!(sv[1] <= 1e-10 * sv[0]);
}

#[test]
fn basis_is_g_orthonormal() {
    let (sys, rb) = small(17, 3, 40, 25);
    let g = sys.gram().to_dense();
    let gram = rb.v.transpose() * g * &rb.v;
    assert!((gram - DMatrix::identity(rb.dim(), rb.dim())).amax() <= 1e-10);
}

#[test]
fn spectral_sandwich() {
    let (_, rb) = small(13, 3, 30, 26);
    let mut rng = common::rng(27);
    let d = rb.dim();
    for y in params(&mut rng, 9, 100) {
        let op = rb.operator(&y).unwrap();
        let eig = op.clone().symmetric_eigenvalues();
        assert!(eig.min() >= rb.beta - 1e-9);
        assert!(eig.max() <= rb.alpha + 1e-9);
        let inv = op.clone().try_inverse().unwrap();
        assert!(common::norm2(&inv) <= 1.0 / rb.beta + 1e-9);
        let contraction = DMatrix::identity(d, d) - op * rb.lambda;
        assert!(common::norm2(&contraction) <= 1.0 - rb.delta + 1e-9);
    }
}

#[test]
fn galerkin_error_is_quasi_optimal() {
    let (sys, rb) = small(13, 3, 12, 28);
    let g = sys.gram().to_dense();
    let mut rng = common::rng(29);
    for y in params(&mut rng, 9, 10) {
        let u = DVector::from_vec(solve_high_fidelity(&sys, &y).unwrap());
        let ur = DVector::from_vec(rb.lift(&reduced_solve(&rb, &y).unwrap()));
        let proj = &rb.v * (rb.v.transpose() * &g * &u);
        let gnorm = |v: &DVector<f64>| (v.transpose() * &g * v)[(0, 0)].max(0.0).sqrt();
        assert!(gnorm(&(&u - &ur)) <= rb.alpha / rb.beta * gnorm(&(&u - &proj)) + 1e-9);
    }
}

#[test]
fn reduced_solve_examples() {
    let (sys, rb) = small(9, 1, 1, 30);
    let y = [0.4];
    let theta = rb.theta[0][(0, 0)] + 0.4 * rb.theta[1][(0, 0)];
    let c = reduced_solve(&rb, &y).unwrap();
    assert!((c[0] - rb.f_rb[0] / theta).abs() <= 1e-14 * c[0].abs());

    let (sys3, rb3) = small(11, 3, 15, 31);
    let mut rng = common::rng(32);
    let gram = GramNorm::new(sys3.gram()).unwrap();
    for y in params(&mut rng, 9, 10) {
        let c = reduced_solve(&rb3, &y).unwrap();
        let res = rb3.operator(&y).unwrap() * DVector::from_column_slice(&c) - &rb3.f_rb;
        assert!(res.norm() <= 1e-12);
        let lifted = gram.norm(&rb3.lift(&c));
        let euclid = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((lifted - euclid).abs() <= 1e-10 * euclid);
    }
    let _ = sys;
}

#[test]
fn gram_norm_matches_quadratic_form() {
    let sys = assemble_affine_system(6, 2, 0.1).unwrap();
    let gram = GramNorm::new(sys.gram()).unwrap();
    let mut rng = common::rng(33);
    let v = common::vector(&mut rng, sys.dim(), -1.0, 1.0);
    assert!((gram.norm(&v) - dense_quadratic(sys.gram(), &v).sqrt()).abs() <= 1e-12);
}

#[test]
fn affine_networks_are_exact() {
    let (_, rb) = small(11, 3, 8, 34);
    let (d, p) = (rb.dim(), rb.params());
    let net = b_network(&rb).unwrap();
    assert_eq!(net.depth(), 2);
    assert!(net.nnz() <= 8 * p + (4 * p + 1) * d * d);
    let at = |y: &[f64]| matr(&net.realize(y).unwrap(), d, d).unwrap();
    let zero = at(&vec![0.0; p]);
    assert!(common::rel(&vec(&zero), &vec(&(&rb.theta[0] * rb.lambda))) <= 1e-12);
    let mut e1 = vec![0.0; p];
    e1[0] = 1.0;
    let target = (&rb.theta[0] + &rb.theta[1]) * rb.lambda;
    assert!(common::rel(&vec(&at(&e1)), &vec(&target)) <= 1e-10);
    let mut rng = common::rng(35);
    for y in params(&mut rng, p, 50) {
        let target = rb.operator(&y).unwrap() * rb.lambda;
        assert!(common::rel(&vec(&at(&y)), &vec(&target)) <= 1e-10);
    }

    let f = f_network(&rb).unwrap();
    assert_eq!(f.depth(), 1);
    assert!(f.nnz() <= d);
    for y in params(&mut rng, p, 5) {
        assert_eq!(f.realize(&y).unwrap(), rb.f_rb.as_slice());
    }
}

#[test]
fn shifted_operator_is_a_contraction() {
    let (_, rb) = small(11, 3, 8, 36);
    let d = rb.dim();
    let net = b_shift_network(&rb).unwrap();
    let mut rng = common::rng(37);
    for y in params(&mut rng, 9, 30) {
        let m = matr(&net.realize(&y).unwrap(), d, d).unwrap();
        assert!(common::norm2(&m) <= 1.0 - rb.delta / 2.0);
    }
}

#[test]
fn scalar_inverse_network() {
    let (_, rb) = small(9, 1, 3, 38);
    assert_eq!(rb.dim(), 1);
    let eps = 1e-3;
    let net = inv_b_network(&rb, eps).unwrap();
    for k in 0..=10 {
        let y = k as f64 / 10.0;
        let theta = rb.theta[0][(0, 0)] + y * rb.theta[1][(0, 0)];
        let out = net.realize(&[y]).unwrap()[0];
        assert!((out - 1.0 / theta).abs() <= eps);
    }
}

#[test]
fn inverse_network_on_a_parameter_sample() {
    let (_, rb) = small(9, 2, 4, 39);
    let d = rb.dim();
    let eps = 1e-4;
    let net = inv_b_network(&rb, eps).unwrap();
    let mut rng = common::rng(40);
    for y in params(&mut rng, 4, 100) {
        let exact = rb.operator(&y).unwrap().try_inverse().unwrap();
        let out = matr(&net.realize(&y).unwrap(), d, d).unwrap();
        assert!(common::norm2(&(exact - out)) <= eps);
    }
}

fn end_to_end(grid: usize, s: usize, snapshots: usize, eps: f64, seed: u64) -> (f64, f64, usize, usize) {
    let (sys, rb) = small(grid, s, snapshots, seed);
    let nets = solution_networks(&sys, &rb, eps, rb.load_bound(), None).unwrap();
    let gram = GramNorm::new(sys.gram()).unwrap();
    let mut rng = common::rng(seed + 1);
    let tests = params(&mut rng, sys.params(), 30);
    let e = evaluate_error(&sys, &rb, &gram, &nets.rb, &tests, ErrorMode::EuclideanRb).unwrap();
    let g = evaluate_error(&sys, &rb, &gram, &nets.h, &tests, ErrorMode::GNormH).unwrap();
    (e.worst_case, g.worst_case, nets.rb.depth(), nets.h.depth())
}

#[test]
fn scalar_end_to_end() {
    let (e, g, rb_depth, h_depth) = end_to_end(11, 1, 2, 1e-3, 41);
    assert!(e <= 1e-3 && g <= 1e-3);
    assert_eq!(h_depth, rb_depth + 1);
}

#[test]
fn small_chessboard_end_to_end() {
    let (e, g, rb_depth, h_depth) = end_to_end(9, 2, 3, 1e-3, 42);
    assert!(e <= 1e-3 && g <= 1e-3, "{e} {g}");
    assert_eq!(h_depth, rb_depth + 1);
}

#[test]
fn halving_eps_does_not_increase_error() {
    let mut previous = f64::INFINITY;
    for eps in [0.5, 0.25, 0.125, 0.0625] {
        let (e, _, _, _) = end_to_end(7, 2, 3, eps, 43);
        assert!(e <= eps);
        assert!(e <= previous + 1e-12, "{e} after {previous}");
        previous = e;
    }
}

#[test]
fn resource_limit_is_checked_before_building() {
    let (sys, rb) = small(9, 2, 3, 44);
    let err = solution_networks(&sys, &rb, 1e-3, rb.load_bound(), Some(1000)).err().unwrap();
    assert!(matches!(err, Error::ResourceLimit { limit: 1000, .. }));
}

#[test]
fn error_modes() {
    let (sys, rb) = small(9, 1, 2, 45);
    let gram = GramNorm::new(sys.gram()).unwrap();
    let y = vec![0.35];
    let exact = reduced_solve(&rb, &y).unwrap();
    let lookup = affine_network(SparseMatrix::zeros(rb.dim(), 1), exact).unwrap();
    let report = evaluate_error(&sys, &rb, &gram, &lookup, std::slice::from_ref(&y), ErrorMode::EuclideanRb).unwrap();
    assert_eq!(report.worst_case, 0.0);

    let zero = affine_network(SparseMatrix::zeros(sys.dim(), 1), vec![0.0; sys.dim()]).unwrap();
    let ys = vec![vec![0.0], vec![0.5], vec![1.0]];
    let rel = evaluate_error(&sys, &rb, &gram, &zero, &ys, ErrorMode::RelativeG).unwrap();
    assert!(rel.errors.iter().all(|e| (e - 1.0).abs() <= 1e-12));
    assert!(matches!(
        evaluate_error(&sys, &rb, &gram, &zero, &ys, ErrorMode::EuclideanRb),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn csv_and_basis_document() {
    let (sys, rb) = small(7, 2, 2, 46);
    let gram = GramNorm::new(sys.gram()).unwrap();
    let nets = solution_networks(&sys, &rb, 1e-2, rb.load_bound(), None).unwrap();
    let ys = vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.9, 0.8, 0.7, 0.6]];
    let e = evaluate_error(&sys, &rb, &gram, &nets.rb, &ys, ErrorMode::EuclideanRb).unwrap();
    let g = evaluate_error(&sys, &rb, &gram, &nets.h, &ys, ErrorMode::GNormH).unwrap();
    let r = evaluate_error(&sys, &rb, &gram, &nets.h, &ys, ErrorMode::RelativeG).unwrap();
    let csv = error_csv(&ys, &e, &g, &r);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "y_1,y_2,y_3,y_4,err_euclid_rb,err_g_h,err_rel_g");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("MAX,,,,"));
    assert_eq!(lines[3].split(',').count(), 7);

    let doc: serde_json::Value = serde_json::from_str(&basis_document(&nets.rb, &rb).unwrap()).unwrap();
    assert_eq!(doc["reduced_basis"]["alpha"], 1.1);
    assert_eq!(doc["reduced_basis"]["theta"].as_array().unwrap().len(), 5);
    assert!(doc["layers"].is_array());
}
