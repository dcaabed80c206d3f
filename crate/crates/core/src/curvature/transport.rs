//! Exact discrete optimal transport by successive shortest augmenting paths
//! on the bipartite transportation network.

const EPS: f64 = 1e-13;

struct Arc {
    to: usize,
    cap: f64,
    cost: f64,
}

struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    /// Adds an arc and its residual twin; the twin is always at `id ^ 1`.
    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, cost });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
    }

    /// Bellman-Ford over arcs with residual capacity; returns the arc used to
    /// reach each node.
    fn shortest_path(&self, source: usize, sink: usize) -> Option<(Vec<Option<usize>>, f64)> {
        let n = self.out.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u].is_infinite() {
                    continue;
                }
                for &a in &self.out[u] {
                    let arc = &self.arcs[a];
                    if arc.cap > EPS && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                        dist[arc.to] = dist[u] + arc.cost;
                        via[arc.to] = Some(a);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist[sink].is_finite().then(|| (via, dist[sink]))
    }
}

/// Minimum total cost of moving `supply` onto `demand` where moving one unit
/// from `i` to `j` costs `cost[i][j]`. Transports `min(sum supply, sum
/// demand)`.
pub fn min_cost_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let source = m + n;
    let sink = m + n + 1;
    let mut net = Network::new(m + n + 2);
    for (i, &s) in supply.iter().enumerate() {
        net.add(source, i, s, 0.0);
    }
    for (j, &d) in demand.iter().enumerate() {
        net.add(m + j, sink, d, 0.0);
    }
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            net.add(i, m + j, f64::INFINITY, c);
        }
    }

    let target = supply.iter().sum::<f64>().min(demand.iter().sum::<f64>());
    let mut moved = 0.0;
    let mut total = 0.0;
    while target - moved > EPS {
        let Some((via, path_cost)) = net.shortest_path(source, sink) else {
            break;
        };
        let mut bottleneck = target - moved;
        let mut v = sink;
        while let Some(a) = via[v] {
            bottleneck = bottleneck.min(net.arcs[a].cap);
            v = net.arcs[a ^ 1].to;
        }
        let mut v = sink;
        while let Some(a) = via[v] {
            net.arcs[a].cap -= bottleneck;
            net.arcs[a ^ 1].cap += bottleneck;
            v = net.arcs[a ^ 1].to;
        }
        moved += bottleneck;
        total += bottleneck * path_cost;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_plan_is_free() {
        let cost = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(min_cost_transport(&[0.5, 0.5], &[0.5, 0.5], &cost), 0.0);
    }

    #[test]
    fn point_masses() {
        assert_eq!(min_cost_transport(&[1.0], &[1.0], &[vec![3.0]]), 3.0);
    }

    #[test]
    fn requires_rerouting_through_residual() {
        // Greedy i0->j0 is cheapest locally but forces i1 onto an expensive
        // cell; the optimum sends i0->j1.
        let cost = vec![vec![1.0, 2.0], vec![10.0, 100.0]];
        let w = min_cost_transport(&[0.5, 0.5], &[0.5, 0.5], &cost);
        assert!((w - 6.0).abs() < 1e-12);
    }

    #[test]
    fn uneven_supports() {
        // Three thirds onto two halves on a line 0,1,2 vs 0,2.
        let pos_a = [0.0, 1.0, 2.0];
        let pos_b = [0.0, 2.0];
        let cost: Vec<Vec<f64>> = pos_a
            .iter()
            .map(|a| pos_b.iter().map(|b| f64::abs(a - b)).collect())
            .collect();
        let w = min_cost_transport(&[1.0 / 3.0; 3], &[0.5; 2], &cost);
        // 1D W1 = integral of |F - G| = 1/6 + 1/6.
        assert!((w - 1.0 / 3.0).abs() < 1e-12);
    }
}
