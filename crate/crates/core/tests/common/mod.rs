//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

/// All-pairs hop distances by Floyd-Warshall; unreachable pairs get `n`.
pub fn hop_distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b) in edges {
        d[a][b] = 1.0;
        d[b][a] = 1.0;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    for row in &mut d {
        for x in row.iter_mut() {
            if x.is_infinite() {
                *x = n as f64;
            }
        }
    }
    d
}

/// Optimal transport cost by enumerating every basic solution of the
/// transportation polytope: each spanning tree of the bipartite cell graph
/// fixes a unique plan, and the optimum sits at one of them.
pub fn transport_by_bases(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        if let Some(plan) = solve_basis(
            supply,
            demand,
            &pick.iter().map(|&c| cells[c]).collect::<Vec<_>>(),
        ) {
            let c: f64 = plan.iter().map(|&((i, j), x)| x * cost[i][j]).sum();
            best = best.min(c);
        }
        // Next k-combination of cell indices.
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < cells.len() - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

type Plan = Vec<((usize, usize), f64)>;

/// Leaf-peels the basis; `None` if it has a cycle or forces a negative flow.
fn solve_basis(supply: &[f64], demand: &[f64], basis: &[(usize, usize)]) -> Option<Plan> {
    let m = supply.len();
    let mut residual: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut open: Vec<bool> = vec![true; basis.len()];
    let mut plan = Vec::with_capacity(basis.len());
    for _ in 0..basis.len() {
        let mut progress = false;
        for node in 0..residual.len() {
            let incident: Vec<usize> = (0..basis.len())
                .filter(|&c| open[c] && (basis[c].0 == node || m + basis[c].1 == node))
                .collect();
            if incident.len() == 1 {
                let c = incident[0];
                let x = residual[node];
                if x < -1e-12 {
                    return None;
                }
                let other = if basis[c].0 == node {
                    m + basis[c].1
                } else {
                    basis[c].0
                };
                residual[node] = 0.0;
                residual[other] -= x;
                open[c] = false;
                plan.push((basis[c], x));
                progress = true;
                break;
            }
        }
        if !progress {
            return None;
        }
    }
    residual.iter().all(|r| r.abs() < 1e-9).then_some(plan)
}

/// Uniform measure over the neighbors of `v` with `idle` mass kept on `v`.
pub fn uniform_measure(
    n: usize,
    edges: &[(usize, usize)],
    v: usize,
    idle: f64,
) -> (Vec<usize>, Vec<f64>) {
    let mut nb: Vec<usize> = edges
        .iter()
        .filter_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
        .collect();
    nb.sort_unstable();
    nb.dedup();
    assert!(v < n && !nb.is_empty());
    let share = (1.0 - idle) / nb.len() as f64;
    let mut support = Vec::new();
    let mut mass = Vec::new();
    if idle > 0.0 {
        support.push(v);
        mass.push(idle);
    }
    for u in nb {
        support.push(u);
        mass.push(share);
    }
    (support, mass)
}
