mod common;

use std::collections::HashSet;

use bilink::bipartivity::{assess, BipartivityConfig};
use bilink::eigen::{extremal_eigs, EigenOptions};
use bilink::eval::{average_precision, evaluate_method, EvalConfig};
use bilink::graph::{parse_bipartite, split_edges, BipartiteGraph, Edge, ParseOptions, UnipartiteGraph};
use bilink::learn::{fit, optimal_scale, residual, FitOptions, FitTargets};
use bilink::predict::SpectralScorer;
use bilink::transform::{Family, SpectralTransform};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn edge_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, i64)>)> {
    (1usize..8, 1usize..8).prop_flat_map(|(l, r)| {
        (
            Just(l),
            Just(r),
            prop::collection::vec((0..l, 0..r, -5i64..50), 1..30),
        )
    })
}

proptest! {
    #[test]
    fn parse_write_parse_is_identity((l, r, raw) in edge_strategy()) {
        let edges: Vec<Edge> = raw
            .iter()
            .map(|&(left, right, t)| Edge { left, right, timestamp: Some(t) })
            .collect();
        let g = BipartiteGraph::new(l, r, edges).unwrap();
        let mut text = Vec::new();
        g.write_edge_list(&mut text).unwrap();
        let options = ParseOptions { has_weight: true, has_timestamp: true, strict_unweighted: false };
        let back = parse_bipartite(text.as_slice(), options).unwrap();
        let mut again = Vec::new();
        back.write_edge_list(&mut again).unwrap();
        prop_assert_eq!(text, again);
        prop_assert_eq!(back.edge_count(), g.edge_count());
        for e in g.edges() {
            let l = back.labels().lookup(bilink::graph::Side::Left, &g.labels().left[e.left]).unwrap();
            let r = back.labels().lookup(bilink::graph::Side::Right, &g.labels().right[e.right]).unwrap();
            prop_assert!(back.has_edge(l, r));
        }
    }

    #[test]
    fn biadjacency_is_corner_of_block((l, r, raw) in edge_strategy()) {
        let g = BipartiteGraph::from_pairs(l, r, raw.iter().map(|e| (e.0, e.1))).unwrap();
        let b = g.biadjacency().to_dense();
        let a = g.block_adjacency().to_dense();
        prop_assert_eq!(a.clone(), block(&b));
        prop_assert!(g.block_adjacency().is_symmetric());
        let degrees: Vec<f64> = g.left_degrees().iter().map(|&d| d as f64).collect();
        prop_assert_eq!(g.biadjacency().row_sums(), degrees);
    }
}

#[test]
fn splits_partition_the_edges() {
    let mut r = rng(11);
    let g = random_bipartite(&mut r, 12, 15, 0.3);
    let all: HashSet<(usize, usize)> = g.edges().iter().map(|e| (e.left, e.right)).collect();
    let expected = (0.3 * g.edge_count() as f64 - 1e-9).ceil() as usize;
    for seed in 0..1000 {
        let s = split_edges(&g, 0.3, seed, false).unwrap();
        let train: HashSet<(usize, usize)> = s.train.edges().iter().map(|e| (e.left, e.right)).collect();
        let test: HashSet<(usize, usize)> = s.test_edges.iter().cloned().collect();
        assert_eq!(test.len(), expected);
        assert!(train.is_disjoint(&test));
        assert_eq!(&train | &test, all);
    }
}

#[test]
fn time_split_takes_newest_with_input_order_ties() {
    let edges = vec![
        Edge { left: 0, right: 0, timestamp: Some(1) },
        Edge { left: 0, right: 1, timestamp: Some(2) },
        Edge { left: 1, right: 0, timestamp: Some(3) },
        Edge { left: 1, right: 1, timestamp: Some(3) },
    ];
    let g = BipartiteGraph::new(2, 2, edges).unwrap();
    let s = split_edges(&g, 0.5, 9, true).unwrap();
    let mut test = s.test_edges.clone();
    test.sort();
    assert_eq!(test, vec![(1, 0), (1, 1)]);
}

#[test]
fn svd_reconstructs_small_graphs() {
    let mut r = rng(3);
    for _ in 0..20 {
        let g = random_small_bipartite(&mut r, 12);
        let model = full_model(&g);
        let b = dense_biadjacency(&g);
        let mut rebuilt = zeros(g.left_count(), g.right_count());
        for (i, &s) in model.singular_values().iter().enumerate() {
            let (u, v) = (model.left_vector(i), model.right_vector(i));
            for a in 0..g.left_count() {
                for c in 0..g.right_count() {
                    rebuilt[a][c] += s * u[a] * v[c];
                }
            }
        }
        assert!(max_abs_diff(&b, &rebuilt) < 1e-9);
    }
}

#[test]
fn cubic_scores_count_paths_of_length_three() {
    let mut r = rng(8);
    for _ in 0..10 {
        let g = random_small_bipartite(&mut r, 10);
        let model = full_model(&g);
        let scorer = SpectralScorer::new(&model, &SpectralTransform::OddPolynomial { coeffs: vec![0.0, 1.0] }).unwrap();
        for u in 0..g.left_count() {
            let row = scorer.score_row(u);
            for w in 0..g.right_count() {
                let mut paths = 0;
                for e1 in g.edges().iter().filter(|e| e.left == u) {
                    for e2 in g.edges().iter().filter(|e| e.right == e1.right) {
                        if g.has_edge(e2.left, w) {
                            paths += 1;
                        }
                    }
                }
                assert!((row[w] - paths as f64).abs() < 1e-8, "u={u} w={w}");
            }
        }
    }
}

#[test]
fn bipartite_spectrum_is_symmetric() {
    let mut r = rng(21);
    for _ in 0..10 {
        let g = random_bipartite(&mut r, 15, 12, 0.3);
        let n = g.node_count();
        let graph = UnipartiteGraph::new(n, g.edges().iter().map(|e| (e.left, g.left_count() + e.right))).unwrap();
        let model = extremal_eigs(&graph.adjacency(), &EigenOptions { top: 5, bottom: 5, ..EigenOptions::default() }).unwrap();
        let mut pos: Vec<f64> = model.eigenvalues().iter().filter(|&&x| x > 1e-9).cloned().collect();
        let mut neg: Vec<f64> = model.eigenvalues().iter().filter(|&&x| x < -1e-9).map(|x| -x).collect();
        pos.sort_by(|a, b| b.total_cmp(a));
        neg.sort_by(|a, b| b.total_cmp(a));
        let common = pos.len().min(neg.len());
        assert!(common >= 4);
        for i in 0..common {
            assert!((pos[i] - neg[i]).abs() < 1e-8);
        }
    }
}

#[test]
fn fitted_scale_and_alpha_are_locally_optimal() {
    let mut r = rng(17);
    for _ in 0..10 {
        let pairs: Vec<(f64, f64)> = (0..24)
            .map(|i| {
                let s = 8.0 - 0.3 * i as f64;
                (s, 0.4 * (0.2 * s).sinh() + 0.05 * gaussian(&mut r))
            })
            .collect();
        let targets = FitTargets::new(pairs).unwrap();
        let report = fit(Family::Sinh, &targets, &FitOptions::default()).unwrap();
        let SpectralTransform::Sinh { alpha, beta } = report.transform else { panic!() };
        for factor in [0.9, 0.99, 1.01, 1.1] {
            let worse_beta = residual(&SpectralTransform::Sinh { alpha, beta: beta * factor }, &targets).unwrap();
            let worse_alpha = residual(&SpectralTransform::Sinh { alpha: alpha * factor, beta }, &targets).unwrap();
            assert!(worse_beta >= report.residual * (1.0 - 1e-12));
            assert!(worse_alpha >= report.residual * (1.0 - 1e-9));
        }
        // brute scan over α with the optimal β at each point
        for i in 0..400 {
            let a = 1e-3 * (1.0 + i as f64 * 0.5);
            let g: Vec<f64> = targets.pairs().iter().map(|p| (a * p.0).sinh()).collect();
            let d: Vec<f64> = targets.pairs().iter().map(|p| p.1).collect();
            let b = optimal_scale(&g, &d, false);
            let res: f64 = g.iter().zip(&d).map(|(x, y)| (b * x - y).powi(2)).sum();
            assert!(res >= report.residual * (1.0 - 1e-6), "alpha {a} beats the fit");
        }
    }
}

#[test]
fn average_precision_properties() {
    assert_eq!(average_precision(&[4], &[4]).unwrap(), 1.0);
    assert_eq!(average_precision(&[1, 2], &[3]).unwrap(), 0.0);
    assert!(average_precision(&[1], &[]).is_err());
    let mut r = rng(2);
    for _ in 0..200 {
        let mut ranked: Vec<usize> = (0..10).collect();
        ranked.shuffle(&mut r);
        let relevant: Vec<usize> = (0..10).filter(|_| r.random::<f64>() < 0.4).collect();
        if relevant.is_empty() {
            continue;
        }
        let ap = average_precision(&ranked, &relevant).unwrap();
        assert!((ap - brute_ap(&ranked, &relevant)).abs() < 1e-12);
        let last = ranked.iter().rposition(|x| relevant.contains(x)).unwrap();
        let truncated = &ranked[..=last];
        assert!((average_precision(truncated, &relevant).unwrap() - ap).abs() < 1e-15);
        for p in 0..9 {
            if relevant.contains(&ranked[p]) && !relevant.contains(&ranked[p + 1]) {
                let mut swapped = ranked.clone();
                swapped.swap(p, p + 1);
                assert!(average_precision(&swapped, &relevant).unwrap() < ap);
            }
        }
    }
}

#[test]
fn planted_rank_one_reaches_perfect_map() {
    // users 0..6 like items 0..4; the test edges are the only missing
    // entries of that all-ones block
    let test = [(0, 1), (2, 3), (5, 0)];
    let pairs: Vec<(usize, usize)> = (0..6)
        .flat_map(|u| (0..4).map(move |w| (u, w)))
        .filter(|p| !test.contains(p))
        .collect();
    let train = BipartiteGraph::from_pairs(6, 9, pairs).unwrap();
    let b = dense_biadjacency(&train);
    let reconstruction = |u: usize, w: usize| b[u][w] + if w < 4 && u < 6 { 1.0 } else { 0.0 };
    let score = evaluate_method(&train, &test, &reconstruction, &EvalConfig::default()).unwrap();
    assert_eq!(score.map, 1.0);

    let oracle = |u: usize, w: usize| if test.contains(&(u, w)) { 1.0 } else { 0.0 };
    assert_eq!(evaluate_method(&train, &test, &oracle, &EvalConfig::default()).unwrap().map, 1.0);
}

#[test]
fn random_scorer_matches_harmonic_expectation() {
    // one user, K candidates, one relevant item
    let k = 20;
    let train = BipartiteGraph::from_pairs(1, k + 1, [(0, k)]).unwrap();
    let test = [(0, 3)];
    let trials = 2000;
    let mut values = Vec::with_capacity(trials);
    for seed in 0..trials as u64 {
        let mut r = rng(seed);
        let noise: Vec<f64> = (0..=k).map(|_| r.random()).collect();
        let scorer = move |_: usize, w: usize| noise[w];
        values.push(evaluate_method(&train, &test, &scorer, &EvalConfig::default()).unwrap().map);
    }
    let mean = values.iter().sum::<f64>() / trials as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let expected: f64 = (1..=k).map(|p| 1.0 / p as f64).sum::<f64>() / k as f64;
    assert!((mean - expected).abs() < 3.0 * (var / trials as f64).sqrt());
}

#[test]
fn candidate_cap_approaches_uncapped_map() {
    let mut r = rng(4);
    let g = random_bipartite(&mut r, 15, 30, 0.25);
    let split = split_edges(&g, 0.3, 1, false).unwrap();
    let scorer = |u: usize, w: usize| ((u * 31 + w * 17) % 23) as f64;
    let full = evaluate_method(&split.train, &split.test_edges, &scorer, &EvalConfig::default()).unwrap().map;
    let capped = |cap| {
        let config = EvalConfig { candidate_cap: Some(cap), ..EvalConfig::default() };
        evaluate_method(&split.train, &split.test_edges, &scorer, &config).unwrap().map
    };
    assert_eq!(capped(1000), full);
    let gap_small = (capped(5) - full).abs();
    let gap_large = (capped(25) - full).abs();
    assert!(gap_large <= gap_small + 0.05);
}

#[test]
fn verdict_survives_relabeling() {
    let mut r = rng(12);
    for graph in [complete_bipartite(3, 4), complete(6)] {
        let base = assess(&graph, &BipartivityConfig::default()).unwrap().verdict;
        for _ in 0..3 {
            let mut perm: Vec<usize> = (0..graph.node_count()).collect();
            perm.shuffle(&mut r);
            let relabeled = UnipartiteGraph::new(
                graph.node_count(),
                graph.edges().iter().map(|&(a, b)| (perm[a], perm[b])),
            )
            .unwrap();
            assert_eq!(assess(&relabeled, &BipartivityConfig::default()).unwrap().verdict, base);
        }
    }
}

#[test]
fn bipartivity_is_stable_across_seeds() {
    for seed in 1..=10 {
        let config = BipartivityConfig { seed, ..BipartivityConfig::default() };
        let report = assess(&complete_bipartite(3, 4), &config).unwrap();
        assert!(report.ratio > 0.0 && report.ratio < 1.0);
    }
}
