//! Curvature-based community discovery with preferential attachment, and the
//! partition quality function.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arch::{Mesh, NocParams};
use crate::curvature::{CurvatureConfig, CurvatureGraph, Pruning};
use crate::ddg::{cluster_stats, Ddg};
use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Minimum inter-cluster weight, then maximum quality, then fewest
    /// communities.
    #[default]
    MinCut,
    /// Maximum quality, then minimum inter-cluster weight, then fewest
    /// communities.
    MaxQ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub curvature: CurvatureConfig,
    /// 0 selects `max(1, ceil(|V| / (4 * target)))`.
    pub min_community_size: usize,
    pub selection: SelectionRule,
    /// Bytes represented by one unit of edge weight when converting a cut to
    /// traffic.
    pub bytes_per_weight_unit: f64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            curvature: CurvatureConfig::default(),
            min_community_size: 0,
            selection: SelectionRule::MinCut,
            bytes_per_weight_unit: 1.0,
        }
    }
}

impl PartitionConfig {
    pub fn min_size_for(&self, nodes: usize, target: usize) -> usize {
        if self.min_community_size > 0 {
            self.min_community_size
        } else {
            nodes.div_ceil(4 * target).max(1)
        }
    }
}

/// Communication cost estimate used before any mapping exists: traffic is
/// priced at the mean path energy between distinct tiles of the mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommEnergyModel {
    pub mean_routers: f64,
    pub e_s_bit: f64,
    pub e_l_bit: f64,
}

impl CommEnergyModel {
    pub fn for_mesh(mesh: &Mesh, params: &NocParams) -> Self {
        CommEnergyModel {
            mean_routers: mesh.mean_routers(),
            e_s_bit: params.e_s_bit,
            e_l_bit: params.e_l_bit,
        }
    }

    pub fn per_bit(&self) -> f64 {
        self.mean_routers * self.e_s_bit + (self.mean_routers - 1.0) * self.e_l_bit
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// Node energy per cluster, joules.
    pub cluster_energy: Vec<f64>,
    /// Estimated communication energy of the cut, joules.
    pub communication: f64,
    /// Reference chip energy: node energy plus the cost of sending every
    /// dependency across the network.
    pub total: f64,
}

pub fn estimate_energy(
    g: &Ddg,
    partition: &Partition,
    model: &CommEnergyModel,
    bytes_per_weight_unit: f64,
) -> Result<EnergyEstimate> {
    let stats = cluster_stats(g, partition)?;
    let mut cluster_energy = vec![0.0; partition.community_count()];
    for node in &g.nodes {
        cluster_energy[partition.community_of(node.id)] += node.energy;
    }
    let bits = |weight: u64| weight as f64 * bytes_per_weight_unit * 8.0;
    let communication = bits(stats.cut) * model.per_bit();
    let total = g.total_energy() + bits(stats.total) * model.per_bit();
    Ok(EnergyEstimate {
        cluster_energy,
        communication,
        total,
    })
}

/// Partition quality: intra-cluster retention minus load imbalance minus the
/// energy share. With zero total weight the first two terms are taken as 0.
pub fn quality(g: &Ddg, partition: &Partition, energies: &EnergyEstimate) -> Result<f64> {
    let stats = cluster_stats(g, partition)?;
    if energies.total == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let mut structural = 0.0;
    if stats.total > 0 {
        let w = stats.total as f64;
        for (&wc, &sc) in stats.internal.iter().zip(&stats.boundary) {
            let wc = wc as f64;
            let imbalance = wc - stats.mean_internal;
            structural += (wc - sc as f64) / w - imbalance * imbalance / w;
        }
    }
    let node_energy = energies.cluster_energy.iter().fold(0.0, |acc, x| acc + x);
    Ok(structural - (node_energy + energies.communication) / energies.total)
}

/// Merges components into at most `target` communities.
///
/// While some group is smaller than `min_size`, or there are more groups than
/// `target`, the smallest such group (lowest member on ties) is merged into
/// the group it shares the most original edge weight with, lowest member on
/// ties. A group with no edge to any other joins the smallest other group.
pub fn preferential_attachment(
    original: &CurvatureGraph,
    components: &[Vec<usize>],
    target: usize,
    min_size: usize,
) -> Result<Partition> {
    let nodes = original.node_count();
    if target < 1 || target > nodes {
        return Err(Error::InvalidTarget { target, nodes });
    }
    let mut groups: Vec<Option<Vec<usize>>> = components.iter().cloned().map(Some).collect();
    let mut label = vec![usize::MAX; nodes];
    for (g, comp) in components.iter().enumerate() {
        for &v in comp {
            label[v] = g;
        }
    }
    let low = |grp: &Vec<usize>| grp.iter().copied().min().unwrap_or(usize::MAX);
    let mut alive = groups.len();

    loop {
        let live = groups
            .iter()
            .enumerate()
            .filter_map(|(g, grp)| grp.as_ref().map(|m| (g, m.len(), low(m))));
        let pick = if alive > target {
            live.min_by_key(|&(_, len, lo)| (len, lo))
        } else if alive > 1 {
            live.filter(|&(_, len, _)| len < min_size)
                .min_by_key(|&(_, len, lo)| (len, lo))
        } else {
            None
        };
        let Some((g, _, _)) = pick else { break };

        let members = groups[g].take().expect("live group");
        let mut weight: BTreeMap<usize, f64> = BTreeMap::new();
        for &v in &members {
            for u in original.neighbors(v) {
                if label[u] != g {
                    let e = original.edge_between(v, u).expect("adjacent");
                    *weight.entry(label[u]).or_default() += original.edge(e).weight;
                }
            }
        }
        let into = weight
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(&h, &w)| (h, w, low(groups[h].as_ref().expect("live group"))))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.2.cmp(&a.2)))
            .map(|(h, _, _)| h)
            .unwrap_or_else(|| {
                groups
                    .iter()
                    .enumerate()
                    .filter_map(|(h, grp)| grp.as_ref().map(|m| (h, m.len(), low(m))))
                    .min_by_key(|&(_, len, lo)| (len, lo))
                    .map(|(h, _, _)| h)
                    .expect("another group exists")
            });
        for &v in &members {
            label[v] = into;
        }
        groups[into].as_mut().expect("live group").extend(members);
        alive -= 1;
    }
    Ok(Partition::from_labels(&label))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub target: usize,
    pub communities: usize,
    pub inter_cluster_weight: u64,
    pub quality: f64,
    pub removed_edges: usize,
    pub partition: Partition,
    pub energy: EnergyEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityResult {
    pub core_count: usize,
    pub selection: SelectionRule,
    pub communities: usize,
    pub quality: f64,
    pub inter_cluster_weight: u64,
    /// Community id per DDG node.
    pub partition: Partition,
    pub energy: EnergyEstimate,
    pub candidates: Vec<Candidate>,
}

impl CommunityResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<CommunityResult> {
        Ok(serde_json::from_str(text)?)
    }
}

fn evaluate(
    g: &Ddg,
    partition: Partition,
    target: usize,
    removed_edges: usize,
    model: &CommEnergyModel,
    cfg: &PartitionConfig,
) -> Result<Candidate> {
    let stats = cluster_stats(g, &partition)?;
    let energy = estimate_energy(g, &partition, model, cfg.bytes_per_weight_unit)?;
    let quality = quality(g, &partition, &energy)?;
    Ok(Candidate {
        target,
        communities: partition.community_count(),
        inter_cluster_weight: stats.cut,
        quality,
        removed_edges,
        partition,
        energy,
    })
}

/// Runs prune + attach for every community count from 2 to `core_count` and
/// selects one candidate by the configured rule.
pub fn discover_communities(
    g: &Ddg,
    core_count: usize,
    cfg: &PartitionConfig,
    model: &CommEnergyModel,
) -> Result<CommunityResult> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if core_count < 2 {
        return Err(Error::CoreCount(core_count));
    }
    let nodes = g.node_count();
    let original = CurvatureGraph::from_ddg(g);
    // The negative-curvature phase does not depend on the target count, so it
    // runs once and each count continues from a copy.
    let mut pruned = Pruning::new(original.clone(), cfg.curvature);
    pruned.remove_negative_loop();

    let max_target = core_count.min(nodes);
    let targets: Vec<usize> = if max_target >= 2 {
        (2..=max_target).collect()
    } else {
        vec![1]
    };
    let candidates: Vec<Candidate> = targets
        .par_iter()
        .map(|&target| {
            let min_size = cfg.min_size_for(nodes, target);
            let mut p = pruned.clone();
            p.split_until(target, min_size);
            let partition =
                preferential_attachment(&original, &p.graph.components(), target, min_size)?;
            evaluate(g, partition, target, p.removed.len(), model, cfg)
        })
        .collect::<Result<_>>()?;

    let best = select(&candidates, cfg.selection);
    let chosen = &candidates[best];
    Ok(CommunityResult {
        core_count,
        selection: cfg.selection,
        communities: chosen.communities,
        quality: chosen.quality,
        inter_cluster_weight: chosen.inter_cluster_weight,
        partition: chosen.partition.clone(),
        energy: chosen.energy.clone(),
        candidates,
    })
}

fn select(candidates: &[Candidate], rule: SelectionRule) -> usize {
    (0..candidates.len())
        .min_by(|&a, &b| {
            let (x, y) = (&candidates[a], &candidates[b]);
            let by_cut = x.inter_cluster_weight.cmp(&y.inter_cluster_weight);
            let by_q = y.quality.total_cmp(&x.quality);
            let primary = match rule {
                SelectionRule::MinCut => by_cut.then(by_q),
                SelectionRule::MaxQ => by_q.then(by_cut),
            };
            primary
                .then(x.communities.cmp(&y.communities))
                .then(a.cmp(&b))
        })
        .expect("at least one candidate")
}
