mod common;

use ddgnoc_core::curvature::{
    min_cost_transport, neighbor_measure, orc_edge, wasserstein1, CurvatureConfig, CurvatureGraph,
    DistanceMode,
};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=6).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let k = pairs.len();
        proptest::collection::vec(any::<bool>(), k).prop_map(move |keep| {
            let edges = pairs
                .iter()
                .zip(keep)
                .filter_map(|(&p, k)| k.then_some(p))
                .collect();
            (n, edges)
        })
    })
}

fn build(n: usize, edges: &[(usize, usize)]) -> CurvatureGraph {
    CurvatureGraph::from_edges(n, edges.iter().map(|&(a, b)| (a, b, 1.0)))
}

fn oracle_w1(n: usize, edges: &[(usize, usize)], u: usize, v: usize, idle: f64) -> f64 {
    let d = common::hop_distances(n, edges);
    let (su, mu) = common::uniform_measure(n, edges, u, idle);
    let (sv, mv) = common::uniform_measure(n, edges, v, idle);
    let cost: Vec<Vec<f64>> = su
        .iter()
        .map(|&x| sv.iter().map(|&y| d[x][y]).collect())
        .collect();
    common::transport_by_bases(&mu, &mv, &cost)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn w1_matches_basis_enumeration((n, edges) in graph_strategy(), idle in prop_oneof![Just(0.0), Just(0.5)]) {
        let g = build(n, &edges);
        for u in 0..n {
            for v in 0..n {
                if g.degree(u) == 0 || g.degree(v) == 0 {
                    continue;
                }
                let mu = neighbor_measure(&g, u, idle).unwrap();
                let nu = neighbor_measure(&g, v, idle).unwrap();
                if mu.support.len() > 4 || nu.support.len() > 4 {
                    continue;
                }
                let fast = wasserstein1(&mu, &nu, &g, DistanceMode::Hop);
                let slow = oracle_w1(n, &edges, u, v, idle);
                prop_assert!((fast - slow).abs() < 1e-9, "u={u} v={v} fast={fast} slow={slow}");
            }
        }
    }

    #[test]
    fn random_transport_problems(
        m in 1usize..=4,
        n in 1usize..=4,
        raw in proptest::collection::vec(1u32..20, 8),
        costs in proptest::collection::vec(0u32..10, 16),
    ) {
        let norm = |xs: &[u32]| {
            let s: u32 = xs.iter().sum();
            xs.iter().map(|&x| x as f64 / s as f64).collect::<Vec<f64>>()
        };
        let a = norm(&raw[..m]);
        let b = norm(&raw[4..4 + n]);
        let cost: Vec<Vec<f64>> = (0..m).map(|i| (0..n).map(|j| costs[i * 4 + j] as f64).collect()).collect();
        let fast = min_cost_transport(&a, &b, &cost);
        let slow = common::transport_by_bases(&a, &b, &cost);
        prop_assert!((fast - slow).abs() < 1e-9);
    }

    #[test]
    fn w1_is_a_metric((n, edges) in graph_strategy()) {
        let g = build(n, &edges);
        let live: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
        let m: Vec<_> = live.iter().map(|&v| neighbor_measure(&g, v, 0.0).unwrap()).collect();
        for i in 0..m.len() {
            prop_assert!(wasserstein1(&m[i], &m[i], &g, DistanceMode::Hop).abs() < 1e-12);
            for j in 0..m.len() {
                let dij = wasserstein1(&m[i], &m[j], &g, DistanceMode::Hop);
                let dji = wasserstein1(&m[j], &m[i], &g, DistanceMode::Hop);
                prop_assert!(dij >= -1e-12);
                prop_assert!((dij - dji).abs() < 1e-9);
                for k in 0..m.len() {
                    let dik = wasserstein1(&m[i], &m[k], &g, DistanceMode::Hop);
                    let dkj = wasserstein1(&m[k], &m[j], &g, DistanceMode::Hop);
                    prop_assert!(dij <= dik + dkj + 1e-9);
                }
            }
        }
    }

    #[test]
    fn curvature_at_most_one((n, edges) in graph_strategy()) {
        let g = build(n, &edges);
        let cfg = CurvatureConfig::default();
        for &(a, b) in &edges {
            prop_assert!(orc_edge(&g, a, b, &cfg).unwrap() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn complete_graph_curvature_is_positive() {
    // K_n edge: each endpoint's mass on the n-2 shared neighbors stays put and
    // the 1/(n-1) on the other endpoint moves one hop, so W1 = 1/(n-1).
    for n in 3..=7 {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let g = build(n, &edges);
        let k = orc_edge(&g, 0, 1, &CurvatureConfig::default()).unwrap();
        if n <= 5 {
            let w1 = oracle_w1(n, &edges, 0, 1, 0.0);
            assert!((k - (1.0 - w1)).abs() < 1e-12);
        }
        assert!((k - (1.0 - 1.0 / (n - 1) as f64)).abs() < 1e-12);
        assert!(k > 0.0);
    }
}
