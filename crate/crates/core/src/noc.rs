//! Interconnect energy and the discrete-event timing simulation of a mapped
//! task graph.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arch::{ArchGraph, Link, Tile};
use crate::error::{Error, Result};
use crate::mapping::{Algorithm, Mapping};
use crate::taskgraph::TaskGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SendOrder {
    /// Outbound packets leave in ascending destination cluster id.
    #[default]
    AscendingDestination,
    /// Outbound packets leave in task-graph edge order.
    Declaration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// When false, ports and links have unlimited capacity and senders do not
    /// serialize.
    pub contention: bool,
    pub send_order: SendOrder,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            contention: true,
            send_order: SendOrder::AscendingDestination,
        }
    }
}

/// Per-bit dynamic energy of every packet summed.
pub fn dynamic_energy(tg: &TaskGraph, mapping: &Mapping, ag: &ArchGraph) -> Result<f64> {
    let mut total = 0.0;
    for e in &tg.edges {
        let (a, b) = (mapping.tile_of(e.from)?, mapping.tile_of(e.to)?);
        total += e.volume_bits as f64 * ag.path_energy(a, b);
    }
    Ok(total)
}

/// Σ P_St · w_i · t_i over congestion events.
pub fn static_energy(events: &[CongestionEvent], p_st: f64) -> f64 {
    events
        .iter()
        .map(|ev| p_st * ev.bits as f64 * ev.wait_ns as f64)
        .fold(0.0, |acc, x| acc + x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub e_dy_noc: f64,
    pub e_st_noc: f64,
    pub e_noc: f64,
    pub node_energy: f64,
    pub total: f64,
}

pub fn chip_energy(node_energy: f64, e_dy_noc: f64, e_st_noc: f64) -> EnergyReport {
    let e_noc = e_st_noc + e_dy_noc;
    EnergyReport {
        e_dy_noc,
        e_st_noc,
        e_noc,
        node_energy,
        total: node_energy + e_noc,
    }
}

impl EnergyReport {
    pub fn validate(&self) -> Result<()> {
        if self.e_noc != self.e_st_noc + self.e_dy_noc {
            return Err(Error::ReportIdentity("E_NoC = E_StNoC + E_DyNoC"));
        }
        if self.total != self.node_energy + self.e_noc {
            return Err(Error::ReportIdentity("E = sum of node energies + E_NoC"));
        }
        Ok(())
    }
}

/// Resource a packet holds while in flight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Resource {
    Ejection(Tile),
    Link(Link),
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Ejection(t) => write!(f, "input port {t}"),
            Resource::Link(l) => write!(f, "link {}->{}", l.from, l.to),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongestionEvent {
    pub packet: usize,
    pub from: usize,
    pub to: usize,
    pub wait_ns: u64,
    pub bits: u64,
    /// First resource found busy.
    pub location: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketTiming {
    pub packet: usize,
    pub from: usize,
    pub to: usize,
    pub bits: u64,
    pub flits: u64,
    pub routers: usize,
    /// Source cluster finished.
    pub ready_ns: u64,
    /// Reached the head of the sender queue.
    pub eligible_ns: u64,
    pub injected_ns: u64,
    pub head_ns: u64,
    pub tail_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterTiming {
    pub cluster: usize,
    pub start_ns: u64,
    pub finish_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub clusters: Vec<ClusterTiming>,
    pub packets: Vec<PacketTiming>,
    pub congestion: Vec<CongestionEvent>,
    pub makespan_ns: u64,
}

struct Flight {
    from: usize,
    to: usize,
    bits: u64,
    flits: u64,
    routers: usize,
    resources: Vec<Resource>,
    head_delay: u64,
    tail_delay: u64,
}

/// Runs the mapped task graph. Packets hold their whole route plus the
/// destination input port from head injection to tail arrival; a sender
/// pushes one packet at a time; waits for resources are congestion.
pub fn simulate(
    tg: &TaskGraph,
    mapping: &Mapping,
    ag: &ArchGraph,
    cfg: &SimConfig,
) -> Result<Timeline> {
    let n = tg.node_count();
    let params = &ag.params;
    let mut flights = Vec::with_capacity(tg.edges.len());
    for e in &tg.edges {
        if e.volume_bits == 0 {
            return Err(Error::ZeroSizePacket {
                from: e.from,
                to: e.to,
            });
        }
        let (src, dst) = (mapping.tile_of(e.from)?, mapping.tile_of(e.to)?);
        let route = ag.route(src, dst)?;
        let mut resources: Vec<Resource> = route.links.iter().map(|&l| Resource::Link(l)).collect();
        resources.push(Resource::Ejection(dst));
        flights.push(Flight {
            from: e.from,
            to: e.to,
            bits: e.volume_bits,
            flits: params.flits(e.volume_bits),
            routers: route.routers,
            resources,
            head_delay: params.head_latency(route.routers),
            tail_delay: params.tail_delay(e.volume_bits),
        });
    }
    for c in 0..n {
        mapping.tile_of(c)?;
    }

    let mut outbound: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut inbound = vec![0usize; n];
    for (id, f) in flights.iter().enumerate() {
        outbound[f.from].push(id);
        inbound[f.to] += 1;
    }
    if cfg.send_order == SendOrder::AscendingDestination {
        for q in &mut outbound {
            q.sort_by_key(|&id| (flights[id].to, id));
        }
    }

    let mut start: Vec<Option<u64>> = vec![None; n];
    let mut finish: Vec<Option<u64>> = vec![None; n];
    let mut arrived = vec![0usize; n];
    let mut last_tail = vec![0u64; n];
    let mut next_out = vec![0usize; n];
    let mut sender_free = vec![0u64; n];
    let mut eligible: Vec<Option<u64>> = vec![None; flights.len()];
    let mut blocked_at: Vec<Option<Resource>> = vec![None; flights.len()];
    let mut timing: Vec<Option<PacketTiming>> = vec![None; flights.len()];
    let mut busy: BTreeMap<Resource, u64> = BTreeMap::new();
    let mut delivered = 0usize;

    for c in 0..n {
        if inbound[c] == 0 {
            start[c] = Some(0);
            finish[c] = Some(tg.nodes[c].exec_time_ns);
        }
    }

    let mut t = 0u64;
    loop {
        // Sender queues release packets.
        for c in 0..n {
            let Some(done) = finish[c] else { continue };
            if done > t {
                continue;
            }
            if cfg.contention {
                if let Some(&id) = outbound[c].get(next_out[c]) {
                    if sender_free[c] <= t && eligible[id].is_none() {
                        eligible[id] = Some(t);
                    }
                }
            } else {
                for &id in &outbound[c] {
                    eligible[id].get_or_insert(t);
                }
            }
        }

        let mut waiting: Vec<usize> = (0..flights.len())
            .filter(|&id| eligible[id].is_some() && timing[id].is_none())
            .collect();
        waiting.sort_by_key(|&id| (eligible[id], id));
        for id in waiting {
            let f = &flights[id];
            if cfg.contention {
                if let Some(r) = f
                    .resources
                    .iter()
                    .find(|r| busy.get(r).is_some_and(|&b| b > t))
                {
                    blocked_at[id].get_or_insert(*r);
                    continue;
                }
            }
            let head = t + f.head_delay;
            let tail = head + f.tail_delay;
            if cfg.contention {
                for r in &f.resources {
                    busy.insert(*r, tail);
                }
                sender_free[f.from] = t + f.flits * params.flit_cycle_ns;
                next_out[f.from] += 1;
            }
            let ready = finish[f.from].expect("sender finished");
            timing[id] = Some(PacketTiming {
                packet: id,
                from: f.from,
                to: f.to,
                bits: f.bits,
                flits: f.flits,
                routers: f.routers,
                ready_ns: ready,
                eligible_ns: eligible[id].expect("eligible"),
                injected_ns: t,
                head_ns: head,
                tail_ns: tail,
            });
        }

        // Deliveries complete and receivers start.
        for (id, tm) in timing.iter().enumerate() {
            let Some(tm) = tm else { continue };
            if tm.tail_ns == t {
                let d = flights[id].to;
                arrived[d] += 1;
                last_tail[d] = last_tail[d].max(t);
                delivered += 1;
            }
        }
        for c in 0..n {
            if start[c].is_none() && arrived[c] == inbound[c] {
                start[c] = Some(last_tail[c]);
                finish[c] = Some(last_tail[c] + tg.nodes[c].exec_time_ns);
            }
        }

        if delivered == flights.len() && start.iter().all(Option::is_some) {
            break;
        }

        // Advance to the next instant at which anything can change.
        let mut next = u64::MAX;
        let mut consider = |v: u64| {
            if v > t && v < next {
                next = v;
            }
        };
        finish.iter().flatten().for_each(|&v| consider(v));
        busy.values().for_each(|&v| consider(v));
        sender_free.iter().for_each(|&v| consider(v));
        timing.iter().flatten().for_each(|p| consider(p.tail_ns));
        if next == u64::MAX {
            return Err(Error::Cycle);
        }
        t = next;
    }

    let packets: Vec<PacketTiming> = timing.into_iter().map(|p| p.expect("delivered")).collect();
    let congestion = packets
        .iter()
        .filter(|p| p.injected_ns > p.eligible_ns)
        .map(|p| CongestionEvent {
            packet: p.packet,
            from: p.from,
            to: p.to,
            wait_ns: p.injected_ns - p.eligible_ns,
            bits: p.bits,
            location: blocked_at[p.packet]
                .map(|r| r.to_string())
                .unwrap_or_default(),
        })
        .collect();
    let clusters: Vec<ClusterTiming> = (0..n)
        .map(|c| ClusterTiming {
            cluster: c,
            start_ns: start[c].expect("started"),
            finish_ns: finish[c].expect("finished"),
        })
        .collect();
    let makespan_ns = clusters
        .iter()
        .map(|c| c.finish_ns)
        .chain(packets.iter().map(|p| p.tail_ns))
        .max()
        .unwrap_or(0);
    Ok(Timeline {
        clusters,
        packets,
        congestion,
        makespan_ns,
    })
}

/// Makespan with unlimited network capacity, by longest path over clusters.
pub fn critical_path_bound(tg: &TaskGraph, mapping: &Mapping, ag: &ArchGraph) -> Result<u64> {
    let depth = crate::taskgraph::depth_assign(tg)?;
    let mut order: Vec<usize> = (0..tg.node_count()).collect();
    order.sort_by_key(|&c| (depth[c], c));
    let mut finish = vec![0u64; tg.node_count()];
    for &c in &order {
        let mut start = 0;
        for e in tg.edges.iter().filter(|e| e.to == c) {
            let routers = mapping.tile_of(e.from)?.manhattan(mapping.tile_of(e.to)?) + 1;
            let arrive = finish[e.from]
                + ag.params.head_latency(routers)
                + ag.params.tail_delay(e.volume_bits);
            start = start.max(arrive);
        }
        finish[c] = start + tg.nodes[c].exec_time_ns;
    }
    Ok(finish.into_iter().max().unwrap_or(0))
}

impl Timeline {
    /// One row per event: cluster start/finish, packet inject/head/tail and
    /// congestion waits, ordered by time.
    pub fn to_csv(&self, tg: &TaskGraph, mapping: &Mapping) -> Result<String> {
        let mut rows: Vec<(u64, u8, usize, String, String, String)> = Vec::new();
        let label = |c: usize| tg.nodes[c].label.clone();
        for c in &self.clusters {
            let at = mapping.tile_of(c.cluster)?.to_string();
            rows.push((
                c.start_ns,
                0,
                c.cluster,
                "cluster_start".into(),
                label(c.cluster),
                at.clone(),
            ));
            rows.push((
                c.finish_ns,
                5,
                c.cluster,
                "cluster_finish".into(),
                label(c.cluster),
                at,
            ));
        }
        for p in &self.packets {
            let name = format!("{}->{}", label(p.from), label(p.to));
            let src = mapping.tile_of(p.from)?.to_string();
            let dst = mapping.tile_of(p.to)?.to_string();
            rows.push((
                p.injected_ns,
                2,
                p.packet,
                "inject".into(),
                name.clone(),
                src,
            ));
            rows.push((
                p.head_ns,
                3,
                p.packet,
                "head_arrival".into(),
                name.clone(),
                dst.clone(),
            ));
            rows.push((p.tail_ns, 4, p.packet, "tail_arrival".into(), name, dst));
        }
        for ev in &self.congestion {
            let p = &self.packets[ev.packet];
            rows.push((
                p.eligible_ns,
                1,
                ev.packet,
                format!("blocked_{}ns", ev.wait_ns),
                format!("{}->{}", label(ev.from), label(ev.to)),
                ev.location.clone(),
            ));
        }
        rows.sort();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["event", "time_ns", "subject", "location"])?;
        for (time, _, _, event, subject, location) in rows {
            w.write_record([event, time.to_string(), subject, location])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Everything produced by simulating one mapping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub algorithm: Algorithm,
    pub task_graph_digest: String,
    pub mapping: Mapping,
    pub makespan_ns: u64,
    pub congestion: Vec<CongestionEvent>,
    pub energy: EnergyReport,
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SimulationReport> {
        let r: SimulationReport = serde_json::from_str(text)?;
        r.energy.validate()?;
        r.mapping.validate()?;
        Ok(r)
    }
}

/// Maps, simulates and prices one algorithm end to end.
pub fn evaluate(
    algorithm: Algorithm,
    tg: &TaskGraph,
    mapping: Mapping,
    ag: &ArchGraph,
    cfg: &SimConfig,
) -> Result<(SimulationReport, Timeline)> {
    let timeline = simulate(tg, &mapping, ag, cfg)?;
    let e_dy = dynamic_energy(tg, &mapping, ag)?;
    let e_st = static_energy(&timeline.congestion, ag.params.p_st);
    let report = SimulationReport {
        algorithm,
        task_graph_digest: tg.digest(),
        mapping,
        makespan_ns: timeline.makespan_ns,
        congestion: timeline.congestion.clone(),
        energy: chip_energy(tg.total_energy(), e_dy, e_st),
    };
    Ok((report, timeline))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub cdm: f64,
    pub cwm: f64,
    /// cwm - cdm
    pub absolute: f64,
    /// Relative to cdm; `None` when cdm is zero and the values differ.
    pub percent: Option<f64>,
}

impl Delta {
    fn new(cdm: f64, cwm: f64) -> Delta {
        let absolute = cwm - cdm;
        let percent = if absolute == 0.0 {
            Some(0.0)
        } else if cdm == 0.0 {
            None
        } else {
            Some(absolute / cdm * 100.0)
        };
        Delta {
            cdm,
            cwm,
            absolute,
            percent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub task_graph_digest: String,
    pub e_dy_noc: Delta,
    pub e_st_noc: Delta,
    pub e_noc: Delta,
    pub makespan_ns: Delta,
}

impl Comparison {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn compare_mappings(cdm: &SimulationReport, cwm: &SimulationReport) -> Result<Comparison> {
    if cdm.task_graph_digest != cwm.task_graph_digest {
        return Err(Error::MismatchedTaskGraphs);
    }
    cdm.energy.validate()?;
    cwm.energy.validate()?;
    Ok(Comparison {
        task_graph_digest: cdm.task_graph_digest.clone(),
        e_dy_noc: Delta::new(cdm.energy.e_dy_noc, cwm.energy.e_dy_noc),
        e_st_noc: Delta::new(cdm.energy.e_st_noc, cwm.energy.e_st_noc),
        e_noc: Delta::new(cdm.energy.e_noc, cwm.energy.e_noc),
        makespan_ns: Delta::new(cdm.makespan_ns as f64, cwm.makespan_ns as f64),
    })
}
