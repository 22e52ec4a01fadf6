mod common;

use approx::assert_abs_diff_eq;
use connotation::factor_graph::{
    enumerate_marginals, loopy_sum_product, max_marginal_decode, sum_product_tree, FactorGraph, LoopyConfig,
};
use connotation::selfcheck::{random_frame_graph, random_tree};
use connotation::{Error, Polarity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_marginals, max_diff_vs_brute};

fn tree(seed: u64) -> FactorGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=9);
    random_tree(&mut rng, n, 2.0)
}

fn cycle3(scale: f64, seed: u64) -> FactorGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = FactorGraph::new();
    for v in ["a", "b", "c"] {
        g.add_variable(v).unwrap();
    }
    for (i, (x, y)) in [("a", "b"), ("b", "c"), ("c", "a")].iter().enumerate() {
        let t = (0..9).map(|_| rng.gen_range(-scale..=scale)).collect();
        g.add_factor(format!("p{i}"), &[x, y], t).unwrap();
    }
    for v in ["a", "b", "c"] {
        let t = (0..3).map(|_| rng.gen_range(-scale..=scale)).collect();
        g.add_factor(format!("u{v}"), &[v], t).unwrap();
    }
    g
}

#[test]
fn unary_ln2_marginal() {
    let mut g = FactorGraph::new();
    g.add_variable("x").unwrap();
    g.add_factor("u", &["x"], vec![0.0, 0.0, 2f64.ln()]).unwrap();
    for m in [sum_product_tree(&g).unwrap(), enumerate_marginals(&g).unwrap()] {
        let p = m.get("x").unwrap();
        assert_abs_diff_eq!(p[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p[2], 0.5, epsilon = 1e-12);
    }
}

#[test]
fn zero_potentials_give_uniform() {
    let mut g = FactorGraph::new();
    for v in ["a", "b", "c", "d"] {
        g.add_variable(v).unwrap();
    }
    g.add_factor("f", &["a", "b", "c"], vec![0.0; 27]).unwrap();
    g.add_factor("g", &["c", "d"], vec![0.0; 9]).unwrap();
    let m = sum_product_tree(&g).unwrap();
    for p in m.marginals.values() {
        for x in p {
            assert_abs_diff_eq!(*x, 1.0 / 3.0, epsilon = 1e-12);
        }
    }
    let d = max_marginal_decode(&m);
    assert!(d.values().all(|&p| p == Polarity::Negative));
}

#[test]
fn agreement_pair_is_symmetric() {
    let mut g = FactorGraph::new();
    g.add_variable("a").unwrap();
    g.add_variable("b").unwrap();
    let mut t = vec![0.0; 9];
    for c in 0..3 {
        t[c * 3 + c] = 3f64.ln();
    }
    g.add_factor("agree", &["a", "b"], t).unwrap();
    let m = enumerate_marginals(&g).unwrap();
    for p in m.marginals.values() {
        for x in p {
            assert_abs_diff_eq!(*x, 1.0 / 3.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn enumeration_matches_independent_oracle() {
    for seed in 0..30 {
        let g = tree(seed);
        let m = enumerate_marginals(&g).unwrap();
        assert!(max_diff_vs_brute(&g, &m) < 1e-12, "seed {seed}");
    }
    let g = cycle3(1.5, 4);
    assert!(max_diff_vs_brute(&g, &enumerate_marginals(&g).unwrap()) < 1e-12);
}

#[test]
fn frame_graph_tree_bp_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let g = random_frame_graph(&mut rng, 2.0);
        let m = sum_product_tree(&g).unwrap();
        assert!(max_diff_vs_brute(&g, &m) < 1e-9);
        let oracle = brute_marginals(&g);
        let decoded = max_marginal_decode(&m);
        for (i, v) in g.variables().iter().enumerate() {
            assert_eq!(decoded[&v.id], Polarity::argmax(&oracle[i]));
        }
    }
}

#[test]
fn cycle_is_rejected_by_tree_bp() {
    let g = cycle3(0.5, 1);
    assert!(!g.is_acyclic());
    assert!(matches!(sum_product_tree(&g), Err(Error::Structure(_))));
}

#[test]
fn loopy_zero_iterations_is_uniform() {
    let g = cycle3(1.0, 2);
    let cfg = LoopyConfig {
        max_iters: 0,
        ..LoopyConfig::default()
    };
    let m = loopy_sum_product(&g, &cfg).unwrap();
    assert!(!m.converged);
    assert_eq!(m.iterations, 0);
    for p in m.marginals.values() {
        assert_eq!(*p, [1.0 / 3.0; 3]);
    }
}

#[test]
fn loopy_weak_cycle_close_to_exact() {
    for seed in 0..10 {
        let g = cycle3(0.2, seed);
        let m = loopy_sum_product(&g, &LoopyConfig::default()).unwrap();
        assert!(m.converged);
        assert!(max_diff_vs_brute(&g, &m) < 1e-3, "seed {seed}");
    }
}

#[test]
fn loopy_on_trees_is_exact() {
    let cfg = LoopyConfig {
        max_iters: 1000,
        damping: 0.1,
        tol: 1e-12,
    };
    for seed in 0..20 {
        let g = tree(seed + 100);
        let m = loopy_sum_product(&g, &cfg).unwrap();
        assert!(m.converged, "seed {seed}");
        let exact = sum_product_tree(&g).unwrap();
        assert!(m.max_abs_diff(&exact) < 1e-7, "seed {seed}");
    }
}

#[test]
fn invalid_factors_are_rejected() {
    let mut g = FactorGraph::new();
    g.add_variable("a").unwrap();
    assert!(g.add_variable("a").is_err());
    assert!(g.add_factor("f", &["a"], vec![0.0; 2]).is_err());
    assert!(g.add_factor("f", &["a"], vec![0.0, f64::NAN, 0.0]).is_err());
    assert!(g.add_factor("f", &["zz"], vec![0.0; 3]).is_err());
    assert!(g.add_factor("f", &["a", "a"], vec![0.0; 9]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_bp_equals_enumeration(seed in any::<u64>()) {
        let g = tree(seed);
        let bp = sum_product_tree(&g).unwrap();
        let ex = enumerate_marginals(&g).unwrap();
        prop_assert!(bp.max_abs_diff(&ex) < 1e-9);
        for p in bp.marginals.values() {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn constant_shift_leaves_marginals(seed in any::<u64>(), shift in -50.0f64..50.0) {
        let g = tree(seed);
        let before = sum_product_tree(&g).unwrap();
        let mut h = g.clone();
        let k = seed as usize % h.factors().len().max(1);
        if !h.factors().is_empty() {
            for v in h.factor_mut(k).log_potential.iter_mut() {
                *v += shift;
            }
        }
        let after = sum_product_tree(&h).unwrap();
        prop_assert!(before.max_abs_diff(&after) < 1e-9);
    }

    #[test]
    fn inference_is_deterministic(seed in any::<u64>()) {
        let g = tree(seed);
        let a = sum_product_tree(&g).unwrap();
        let b = sum_product_tree(&g.clone()).unwrap();
        for (k, v) in &a.marginals {
            let w = b.get(k).unwrap();
            prop_assert!(v.iter().zip(w).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
