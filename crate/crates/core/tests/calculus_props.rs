mod common;

use proptest::prelude::*;
use requnet::calculus::{affine_network, concat, extend, fan_out, identity_network, parallelize, sparse_concat};
use requnet::matrix_nets::mult_network;
use requnet::{Network, SparseMatrix};

fn chain(outer: &Network, inner: &Network, x: &[f64]) -> Vec<f64> {
    outer.realize(&inner.realize(x).unwrap()).unwrap()
}

fn pair(seed: u64, l1: usize, l2: usize) -> (Network, Network, Vec<f64>) {
    let mut rng = common::rng(seed);
    let inner = common::network(&mut rng, 3, 2, l2);
    let outer = common::network(&mut rng, 2, 3, l1);
    let x = common::vector(&mut rng, 3, -1.0, 1.0);
    (outer, inner, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn identity_is_exact(n in 1usize..=16, l in 1usize..=8, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let x = common::vector(&mut rng, n, -100.0, 100.0);
        let net = identity_network(n, l).unwrap();
        prop_assert!(common::rel(&net.realize(&x).unwrap(), &x) <= 1e-10);
        prop_assert_eq!(net.depth(), l);
        prop_assert_eq!(net.nnz(), if l == 1 { n } else { 20 * n * l - 28 * n });
    }

    #[test]
    fn concat_composes(seed in any::<u64>(), l1 in 1usize..4, l2 in 1usize..4) {
        let (outer, inner, x) = pair(seed, l1, l2);
        let net = concat(outer.clone(), inner.clone()).unwrap();
        prop_assert_eq!(net.depth(), l1 + l2 - 1);
        prop_assert!(common::mixed(&net.realize(&x).unwrap(), &chain(&outer, &inner, &x)) <= 1e-10);
    }

    #[test]
    fn sparse_concat_composes_with_additive_weights(seed in any::<u64>(), l1 in 1usize..4, l2 in 1usize..4) {
        let (outer, inner, x) = pair(seed, l1, l2);
        let net = sparse_concat(outer.clone(), inner.clone()).unwrap();
        prop_assert_eq!(net.depth(), l1 + l2);
        prop_assert!(common::mixed(&net.realize(&x).unwrap(), &chain(&outer, &inner, &x)) <= 1e-10);
        let (m1, m2, out) = (outer.nnz(), inner.nnz(), inner.output_dim());
        prop_assert!(net.nnz() <= m1 + m2 + 4 * outer.first_layer_nnz() + 4 * inner.last_layer_nnz() + 4 * out);
        prop_assert!(net.nnz() <= 5 * m1 + 5 * m2 + 4 * out);
        if l2 >= 2 {
            prop_assert_eq!(net.first_layer_nnz(), inner.first_layer_nnz());
        }
        if l1 >= 2 {
            prop_assert_eq!(net.last_layer_nnz(), outer.last_layer_nnz());
        }
    }

    #[test]
    fn extend_preserves_realization(seed in any::<u64>(), depth in 1usize..4, extra in 0usize..5) {
        let mut rng = common::rng(seed);
        let net = common::network(&mut rng, 2, 2, depth);
        let x = common::vector(&mut rng, 2, -1.0, 1.0);
        let ext = extend(net.clone(), depth + extra).unwrap();
        prop_assert_eq!(ext.depth(), depth + extra);
        prop_assert!(common::mixed(&ext.realize(&x).unwrap(), &net.realize(&x).unwrap()) <= 1e-10);
    }

    #[test]
    fn parallel_lanes(seed in any::<u64>(), depths in prop::collection::vec(1usize..5, 1..5)) {
        let mut rng = common::rng(seed);
        let nets: Vec<Network> = depths.iter().map(|&d| common::network(&mut rng, 2, 3, d)).collect();
        let xs: Vec<Vec<f64>> = nets.iter().map(|_| common::vector(&mut rng, 2, -1.0, 1.0)).collect();
        let depth = *depths.iter().max().unwrap();
        let par = parallelize(nets.clone()).unwrap();
        prop_assert_eq!(par.depth(), depth);
        let oracle: Vec<f64> = nets.iter().zip(&xs).flat_map(|(n, x)| n.realize(x).unwrap()).collect();
        prop_assert!(common::mixed(&par.realize(&xs.concat()).unwrap(), &oracle) <= 1e-10);
        let bound: usize = nets.iter().map(|n| n.nnz() + 4 * n.last_layer_nnz() + n.output_dim() * (20 * depth + 8)).sum();
        prop_assert!(par.nnz() <= bound);
        let last: usize = nets.iter().map(|n| n.last_layer_nnz().max(4 * n.output_dim())).sum();
        prop_assert!(par.last_layer_nnz() <= last);
        if depths.iter().all(|&d| d == depth) {
            prop_assert_eq!(par.nnz(), nets.iter().map(Network::nnz).sum::<usize>());
        }
        if depths.iter().all(|&d| d >= 2) {
            prop_assert_eq!(par.first_layer_nnz(), nets.iter().map(Network::first_layer_nnz).sum::<usize>());
        }
    }

    #[test]
    fn selection_never_adds_weights(seed in any::<u64>(), depth in 1usize..4, cols in 1usize..6) {
        let mut rng = common::rng(seed);
        let net = common::network(&mut rng, 3, 2, depth);
        let picks: Vec<(usize, usize, f64)> = (0..3).map(|r| (r, (seed as usize + r) % cols, 1.5)).collect();
        let d = SparseMatrix::from_triplets(3, cols, picks).unwrap();
        let composed = concat(net.clone(), affine_network(d, vec![0.0; 3]).unwrap()).unwrap();
        for (a, b) in composed.layers().iter().zip(net.layers()) {
            prop_assert!(a.nnz() <= b.nnz());
        }
    }
}

#[test]
fn concat_with_identity_keeps_realization() {
    let mut rng = common::rng(3);
    let net = common::network(&mut rng, 3, 2, 3);
    let with_id = concat(net.clone(), affine_network(SparseMatrix::identity(3), vec![0.0; 3]).unwrap()).unwrap();
    let x = [0.3, -0.2, 0.9];
    assert_eq!(with_id.realize(&x).unwrap(), net.realize(&x).unwrap());
    assert_eq!(with_id.complexity().layer_nnz, net.complexity().layer_nnz);
}

#[test]
fn concat_depths() {
    let mut rng = common::rng(4);
    let a = common::network(&mut rng, 2, 2, 3);
    let b = common::network(&mut rng, 2, 2, 4);
    assert_eq!(concat(a.clone(), b.clone()).unwrap().depth(), 6);
    let c = common::network(&mut rng, 2, 2, 2);
    let d = common::network(&mut rng, 2, 2, 2);
    assert_eq!(sparse_concat(c, d).unwrap().depth(), 4);
}

#[test]
fn parallel_mult_copies_are_additive() {
    let one = mult_network(2, 2, 2).unwrap();
    let pair = parallelize(vec![one.clone(), one.clone()]).unwrap();
    assert_eq!(pair.nnz(), 2 * one.nnz());
}

#[test]
fn parallel_mixed_depths() {
    let mut rng = common::rng(5);
    let a = common::network(&mut rng, 1, 1, 2);
    let b = common::network(&mut rng, 2, 1, 4);
    let par = parallelize(vec![a.clone(), b.clone()]).unwrap();
    assert_eq!(par.depth(), 4);
    let out = par.realize(&[0.5, -0.25, 0.75]).unwrap();
    let expected = [a.realize(&[0.5]).unwrap(), b.realize(&[-0.25, 0.75]).unwrap()].concat();
    assert!(common::mixed(&out, &expected) <= 1e-10);
}

#[test]
fn fan_out_duplicates() {
    let net = fan_out(2, 3).unwrap();
    assert_eq!(net.realize(&[1.0, -2.0]).unwrap(), vec![1.0, -2.0, 1.0, -2.0, 1.0, -2.0]);
}
