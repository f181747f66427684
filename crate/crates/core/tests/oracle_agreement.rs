use boppana::adversary::{apply_monotone_moves, MonotoneMove};
use boppana::generators::{hypercube, hypercube_dimension_cut, planted_bisection, planted_regular};
use boppana::oracle::brute_force_bw;
use boppana::solver::{solve, SolveOptions};
use boppana::structure::fixtures;
use boppana::{cut_width, BisectionVector};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn set(v: &[BisectionVector]) -> BTreeSet<BisectionVector> {
    v.iter().map(|b| b.canonical()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn certified_solves_match_oracle(seed in 0u64..100_000, half in 2usize..7, p in 0.15f64..0.8) {
        let g = planted_bisection(2 * half, p, p, seed).unwrap().graph;
        let oracle = brute_force_bw(&g).unwrap();
        let rep = solve(&g, &SolveOptions::default()).unwrap();
        prop_assert!(rep.h_hat <= oracle.bw as f64 + 1e-9);
        prop_assert!(rep.best_cut >= oracle.bw);
        if rep.certified() {
            prop_assert_eq!(rep.best_cut, oracle.bw);
            prop_assert_eq!(set(&rep.bisections), set(&oracle.optimal_bisections));
        }
    }
}

#[test]
fn hypercube_with_inner_additions_certifies() {
    let g = hypercube(4).unwrap();
    let y = hypercube_dimension_cut(4, 0);
    let mut moves = Vec::new();
    'outer: for u in 0..16 {
        for v in u + 1..16 {
            if y.get(u) == y.get(v) && !g.has_edge(u, v) {
                moves.push(MonotoneMove::add(u, v));
                if moves.len() == 10 {
                    break 'outer;
                }
            }
        }
    }
    let h = apply_monotone_moves(&g, &y, &moves).unwrap();
    let rep = solve(&h, &SolveOptions::default()).unwrap();
    assert!(rep.certified());
    assert_eq!(rep.best_cut, 8);
    assert_eq!(cut_width(&h, &y).unwrap(), 8);
}

#[test]
fn planted_regular_instances_certify_planted_cut() {
    for seed in 0..5 {
        let inst = planted_regular(40, 6, 4, seed).unwrap();
        let rep = solve(&inst.graph, &SolveOptions::default()).unwrap();
        assert!(rep.certified(), "seed {seed}");
        assert_eq!(rep.best_cut, 4);
        assert!(rep.contains(&inst.planted));
    }
}

#[test]
fn failure_fixtures_have_known_width() {
    let (g, y, _) = fixtures::double_k4_path();
    let o = brute_force_bw(&g).unwrap();
    assert_eq!(o.bw, 1);
    assert!(o.optimal_bisections.contains(&y.canonical()));
    let rep = solve(&g, &SolveOptions::default()).unwrap();
    assert!(!rep.certified());
    assert_eq!(rep.best_cut, 1);
    assert!(rep.h_hat < 1.0 - 1e-5);

    let g = fixtures::c4_plus_isolated();
    assert_eq!(brute_force_bw(&g).unwrap().bw, 2);
    assert!(!solve(&g, &SolveOptions::default()).unwrap().certified());
}
