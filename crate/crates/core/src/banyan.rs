//! N x N self-routing Banyan fabric built from 2 x 2 switch units.
//!
//! A payload at stage i follows the i-th most significant bit of its
//! destination address: 1 selects the lower switch output, 0 the upper.
//! Classically, two payloads demanding the same internal link block the
//! fabric. In quantum-fusion mode the conflicting pair is fused into one
//! two-bin carrier photon, travels the contested link together, and is
//! fissioned apart at the first stage where the route bits diverge.
//!
//! Every engaged unit is heralded, so a routing instance succeeds only if
//! all its units succeed; probabilities multiply per unit.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::components::{ClickPattern, DetectorModel};
use crate::error::{Error, Result};
use crate::fock::QubitSpec;
use crate::gates::{fusion_probability, FeedForward, FREDKIN_SUCCESS};
use crate::switch::SwitchControls;

/// Inter-stage wiring pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Wiring {
    /// Perfect shuffle (rotate-left of the line address) before every stage,
    /// switches pairing adjacent lines.
    OmegaShuffle,
    /// Identity wiring with switches pairing lines that differ in the bit
    /// the stage routes on.
    Butterfly,
}

/// Stage/switch structure of an N x N Banyan fabric, N a power of two.
#[derive(Debug, Clone, Serialize)]
pub struct BanyanTopology {
    n_ports: usize,
    n_stages: usize,
    wiring: Wiring,
}

impl BanyanTopology {
    pub fn new(n_ports: usize, wiring: Wiring) -> Result<Self> {
        if n_ports < 4 || !n_ports.is_power_of_two() {
            return Err(Error::InvalidNetworkSize(n_ports));
        }
        Ok(BanyanTopology {
            n_ports,
            n_stages: n_ports.trailing_zeros() as usize,
            wiring,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn n_stages(&self) -> usize {
        self.n_stages
    }

    pub fn switches_per_stage(&self) -> usize {
        self.n_ports / 2
    }

    pub fn wiring(&self) -> Wiring {
        self.wiring
    }

    /// Maps a line at boundary `stage - 1` to the line entering the switch
    /// column of `stage` (1-based). A bijection at every stage.
    pub fn permuted(&self, _stage: usize, line: usize) -> usize {
        match self.wiring {
            Wiring::OmegaShuffle => {
                ((line << 1) | (line >> (self.n_stages - 1))) & (self.n_ports - 1)
            }
            Wiring::Butterfly => line,
        }
    }

    fn stage_bit(&self, stage: usize) -> usize {
        self.n_stages - stage
    }

    /// Switch index and input side (0 upper, 1 lower) a boundary line
    /// enters at `stage`.
    pub fn switch_of(&self, stage: usize, line: usize) -> (usize, usize) {
        let l = self.permuted(stage, line);
        match self.wiring {
            Wiring::OmegaShuffle => (l >> 1, l & 1),
            Wiring::Butterfly => {
                let b = self.stage_bit(stage);
                let side = (l >> b) & 1;
                let sw = ((l >> (b + 1)) << b) | (l & ((1 << b) - 1));
                (sw, side)
            }
        }
    }

    /// Boundary line fed by output `out` (0 upper, 1 lower) of a switch.
    pub fn output_line(&self, stage: usize, switch_index: usize, out: usize) -> usize {
        match self.wiring {
            Wiring::OmegaShuffle => (switch_index << 1) | out,
            Wiring::Butterfly => {
                let b = self.stage_bit(stage);
                ((switch_index >> b) << (b + 1)) | (out << b) | (switch_index & ((1 << b) - 1))
            }
        }
    }
}

/// Routing decision at one stage: bit 1 selects the lower output, 0 the
/// upper. `stage` is 1-based; bit 1 is the most significant address bit.
pub fn route_bit(dest: usize, stage: usize, n_stages: usize) -> usize {
    (dest >> (n_stages - stage)) & 1
}

/// One payload offered to the fabric.
#[derive(Debug, Clone, Serialize)]
pub struct Packet {
    pub input_port: usize,
    pub dest: usize,
    pub payload: QubitSpec,
}

impl Packet {
    pub fn new(input_port: usize, dest: usize, payload: QubitSpec) -> Self {
        Packet {
            input_port,
            dest,
            payload,
        }
    }

    /// A packet carrying |H>, for pure routing studies.
    pub fn basis(input_port: usize, dest: usize) -> Self {
        Packet::new(input_port, dest, QubitSpec::horizontal())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RoutingMode {
    Classical,
    QuantumFusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RouteStatus {
    Delivered,
    BlockedClassical,
    UnsupportedContention,
    HeraldFailed,
}

/// What a switch was asked to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitKind {
    /// Ordinary Fredkin routing of one or two single payloads.
    Fredkin { cross: bool },
    /// Fusion of two conflicting payloads; `select_upper` places the fused
    /// carrier on the upper output (the unit's b7 port).
    Fusion { select_upper: bool },
    /// A fused pair passing straight through an intermediate stage.
    FusedThrough { cross: bool },
    /// Fission of a fused pair at its divergence stage, internal Fredkin
    /// routing the two reborn qubits to opposite outputs.
    Fission { cross: bool },
}

impl UnitKind {
    /// The control settings a unit of this kind runs under.
    pub fn controls(&self) -> SwitchControls {
        match *self {
            UnitKind::Fredkin { cross } => SwitchControls::new(false, cross, false, false),
            UnitKind::Fusion { select_upper } => SwitchControls::new(true, false, select_upper, true),
            UnitKind::FusedThrough { cross } => SwitchControls::new(false, cross, false, false),
            UnitKind::Fission { cross } => SwitchControls::new(false, cross, false, true),
        }
    }

    /// Analytic success probability of the unit under ideal detectors.
    pub fn probability(&self, ff: FeedForward) -> f64 {
        match self {
            UnitKind::Fredkin { .. } | UnitKind::FusedThrough { .. } => FREDKIN_SUCCESS,
            UnitKind::Fusion { .. } => fusion_probability(ff),
            UnitKind::Fission { .. } => fusion_probability(ff) * FREDKIN_SUCCESS,
        }
    }

    /// Required herald pattern, for detector-model degradation.
    pub fn herald_pattern(&self) -> ClickPattern {
        match self {
            UnitKind::Fredkin { .. } | UnitKind::FusedThrough { .. } => {
                ClickPattern::of(&[("D1", 0), ("D2", 0)])
            }
            UnitKind::Fusion { .. } => {
                ClickPattern::of(&[("D3", 1), ("D4", 0), ("D5", 1), ("D6", 0)])
            }
            UnitKind::Fission { .. } => ClickPattern::of(&[
                ("PBS20_H", 1),
                ("PBS20_V", 0),
                ("D1", 0),
                ("D2", 0),
            ]),
        }
    }
}

/// One engaged switch in a routing instance.
#[derive(Debug, Clone, Serialize)]
pub struct UnitEngagement {
    pub stage: usize,
    pub switch_index: usize,
    pub kind: UnitKind,
    pub controls: SwitchControls,
    pub probability: f64,
}

/// A fused pair's life span: fused at `fuse_stage`, split at
/// `fission_stage` (the packets are indices into the offered packet list).
#[derive(Debug, Clone, Serialize)]
pub struct FusedSegment {
    pub packets: (usize, usize),
    pub fuse_stage: usize,
    pub fission_stage: usize,
}

/// Outcome of one routing instance.
#[derive(Debug, Clone, Serialize)]
pub struct RouteResult {
    pub status: RouteStatus,
    pub engagements: Vec<UnitEngagement>,
    pub fused_segments: Vec<FusedSegment>,
    /// Product over engaged units; zero when the instance cannot deliver.
    pub success_probability: f64,
    /// Output port -> index of the packet delivered there.
    pub delivered: BTreeMap<usize, usize>,
    /// Switches where two payloads demanded one output link (classical).
    pub conflicts: Vec<(usize, usize)>,
}

fn validate_packets(packets: &[Packet], n: usize) -> Result<()> {
    let mut ins = BTreeMap::new();
    let mut outs = BTreeMap::new();
    for (i, p) in packets.iter().enumerate() {
        if p.input_port >= n {
            return Err(Error::PortOutOfRange {
                index: i,
                port: p.input_port,
                n,
            });
        }
        if p.dest >= n {
            return Err(Error::PortOutOfRange {
                index: i,
                port: p.dest,
                n,
            });
        }
        if ins.insert(p.input_port, i).is_some() {
            return Err(Error::DuplicateInputPort(i));
        }
        if outs.insert(p.dest, i).is_some() {
            return Err(Error::DuplicateDestination(i));
        }
    }
    Ok(())
}

/// Routes a batch of packets through the fabric.
///
/// Classical mode walks each packet along its unique path and reports every
/// switch where two packets demand one output link. Quantum-fusion mode
/// resolves such pairwise conflicts by fusing; a fused pair meeting a third
/// payload is surfaced as `UnsupportedContention`, never silently resolved.
pub fn route(
    packets: &[Packet],
    mode: RoutingMode,
    topology: &BanyanTopology,
    ff: FeedForward,
) -> Result<RouteResult> {
    validate_packets(packets, topology.n_ports())?;
    match mode {
        RoutingMode::Classical => Ok(route_classical(packets, topology)),
        RoutingMode::QuantumFusion => Ok(route_quantum(packets, topology, ff)),
    }
}

fn route_classical(packets: &[Packet], topology: &BanyanTopology) -> RouteResult {
    let stages = topology.n_stages();
    // Link occupancy per (stage, switch, output bit), pure path following.
    let mut usage: BTreeMap<(usize, usize, usize), u32> = BTreeMap::new();
    for p in packets {
        let mut line = p.input_port;
        for stage in 1..=stages {
            let (sw, _) = topology.switch_of(stage, line);
            let bit = route_bit(p.dest, stage, stages);
            *usage.entry((stage, sw, bit)).or_insert(0) += 1;
            line = topology.output_line(stage, sw, bit);
        }
        debug_assert_eq!(line, p.dest, "self-routing lands on the destination");
    }
    let mut conflicts: Vec<(usize, usize)> = usage
        .iter()
        .filter(|(_, &n)| n >= 2)
        .map(|(&(stage, sw, _), _)| (stage, sw))
        .collect();
    conflicts.dedup();

    if conflicts.is_empty() {
        let delivered = packets
            .iter()
            .enumerate()
            .map(|(i, p)| (p.dest, i))
            .collect();
        RouteResult {
            status: RouteStatus::Delivered,
            engagements: Vec::new(),
            fused_segments: Vec::new(),
            success_probability: 1.0,
            delivered,
            conflicts,
        }
    } else {
        RouteResult {
            status: RouteStatus::BlockedClassical,
            engagements: Vec::new(),
            fused_segments: Vec::new(),
            success_probability: 0.0,
            delivered: BTreeMap::new(),
            conflicts,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Single(usize),
    /// Fused pair: the packet whose qubit stays in polarization, the packet
    /// indexing the time bin, and the stage it was fused at.
    Fused {
        pol: usize,
        index: usize,
        fuse_stage: usize,
    },
}

fn route_quantum(packets: &[Packet], topology: &BanyanTopology, ff: FeedForward) -> RouteResult {
    let stages = topology.n_stages();
    let mut lines: BTreeMap<usize, Slot> = packets
        .iter()
        .enumerate()
        .map(|(i, p)| (p.input_port, Slot::Single(i)))
        .collect();

    let mut engagements: Vec<UnitEngagement> = Vec::new();
    let mut fused_segments: Vec<FusedSegment> = Vec::new();
    let engage = |engagements: &mut Vec<UnitEngagement>, stage, sw, kind: UnitKind| {
        engagements.push(UnitEngagement {
            stage,
            switch_index: sw,
            kind,
            controls: kind.controls(),
            probability: kind.probability(ff),
        });
    };

    for stage in 1..=stages {
        let mut per_switch: BTreeMap<usize, Vec<(usize, Slot)>> = BTreeMap::new();
        for (&line, &slot) in &lines {
            let (sw, side) = topology.switch_of(stage, line);
            per_switch.entry(sw).or_default().push((side, slot));
        }

        let mut next: BTreeMap<usize, Slot> = BTreeMap::new();
        let place = |next: &mut BTreeMap<usize, Slot>, sw, out, slot| {
            let line = topology.output_line(stage, sw, out);
            let prev = next.insert(line, slot);
            debug_assert!(prev.is_none(), "one payload per link");
        };

        for (sw, entries) in per_switch {
            match entries.as_slice() {
                [(side, Slot::Single(i))] => {
                    let r = route_bit(packets[*i].dest, stage, stages);
                    engage(&mut engagements, stage, sw, UnitKind::Fredkin { cross: side != &r });
                    place(&mut next, sw, r, Slot::Single(*i));
                }
                [(side, Slot::Fused { pol, index, fuse_stage })] => {
                    let r_pol = route_bit(packets[*pol].dest, stage, stages);
                    let r_index = route_bit(packets[*index].dest, stage, stages);
                    if r_pol == r_index {
                        engage(
                            &mut engagements,
                            stage,
                            sw,
                            UnitKind::FusedThrough { cross: side != &r_pol },
                        );
                        place(
                            &mut next,
                            sw,
                            r_pol,
                            Slot::Fused {
                                pol: *pol,
                                index: *index,
                                fuse_stage: *fuse_stage,
                            },
                        );
                    } else {
                        // Divergence: fission. The bin-index qubit exits the
                        // upper port under through.
                        engage(
                            &mut engagements,
                            stage,
                            sw,
                            UnitKind::Fission { cross: r_index == 1 },
                        );
                        fused_segments.push(FusedSegment {
                            packets: (*pol, *index),
                            fuse_stage: *fuse_stage,
                            fission_stage: stage,
                        });
                        place(&mut next, sw, r_pol, Slot::Single(*pol));
                        place(&mut next, sw, r_index, Slot::Single(*index));
                    }
                }
                [(side_a, Slot::Single(i)), (side_b, Slot::Single(j))] => {
                    let (r_i, r_j) = (
                        route_bit(packets[*i].dest, stage, stages),
                        route_bit(packets[*j].dest, stage, stages),
                    );
                    if r_i != r_j {
                        // No contention; one Fredkin setting serves both.
                        let (upper, _) = if side_a < side_b { (i, j) } else { (j, i) };
                        let cross = route_bit(packets[*upper].dest, stage, stages) == 1;
                        engage(&mut engagements, stage, sw, UnitKind::Fredkin { cross });
                        place(&mut next, sw, r_i, Slot::Single(*i));
                        place(&mut next, sw, r_j, Slot::Single(*j));
                    } else {
                        // Output competition: fuse. The upper input keeps
                        // its qubit in polarization, the lower indexes the
                        // time bin.
                        let (pol, index) = if side_a < side_b { (*i, *j) } else { (*j, *i) };
                        engage(
                            &mut engagements,
                            stage,
                            sw,
                            UnitKind::Fusion {
                                select_upper: r_i == 0,
                            },
                        );
                        place(
                            &mut next,
                            sw,
                            r_i,
                            Slot::Fused {
                                pol,
                                index,
                                fuse_stage: stage,
                            },
                        );
                    }
                }
                _ => {
                    // A fused pair shares the switch with a third payload.
                    return RouteResult {
                        status: RouteStatus::UnsupportedContention,
                        engagements,
                        fused_segments,
                        success_probability: 0.0,
                        delivered: BTreeMap::new(),
                        conflicts: vec![(stage, sw)],
                    };
                }
            }
        }
        lines = next;
    }

    let mut delivered = BTreeMap::new();
    for (line, slot) in lines {
        match slot {
            Slot::Single(i) => {
                debug_assert_eq!(line, packets[i].dest);
                delivered.insert(line, i);
            }
            Slot::Fused { .. } => {
                unreachable!("distinct destinations diverge before the last boundary")
            }
        }
    }
    let success_probability = engagements.iter().map(|e| e.probability).product();
    RouteResult {
        status: RouteStatus::Delivered,
        engagements,
        fused_segments,
        success_probability,
        delivered,
        conflicts: Vec::new(),
    }
}

/// Blocking census over offered permutations.
#[derive(Debug, Clone, Serialize)]
pub struct BlockingStats {
    pub n_ports: usize,
    pub wiring: Wiring,
    pub total: u64,
    pub blocked_classical: u64,
    pub unsupported_quantum: u64,
    pub delivered_quantum: u64,
    pub blocked_fraction: f64,
    pub unsupported_fraction: f64,
    pub exhaustive: bool,
    /// Binomial standard errors, present for sampled censuses.
    pub std_error_blocked: Option<f64>,
    pub std_error_unsupported: Option<f64>,
}

fn census_one(topology: &BanyanTopology, perm: &[usize]) -> (bool, bool) {
    let packets: Vec<Packet> = perm
        .iter()
        .enumerate()
        .map(|(i, &d)| Packet::basis(i, d))
        .collect();
    let classical = route(&packets, RoutingMode::Classical, topology, FeedForward::on())
        .expect("validated permutation");
    let quantum = route(
        &packets,
        RoutingMode::QuantumFusion,
        topology,
        FeedForward::on(),
    )
    .expect("validated permutation");
    (
        classical.status == RouteStatus::BlockedClassical,
        quantum.status == RouteStatus::UnsupportedContention,
    )
}

/// Counts blocked and unsupported fractions, exhaustively over all N!
/// permutations, or over seeded samples when `sampling` is given.
pub fn enumerate_blocking(
    topology: &BanyanTopology,
    sampling: Option<(u64, u64)>,
) -> Result<BlockingStats> {
    let n = topology.n_ports();
    let mut blocked = 0u64;
    let mut unsupported = 0u64;
    let mut delivered_q = 0u64;
    let exhaustive = sampling.is_none();

    let total = match sampling {
        None => {
            let mut perm: Vec<usize> = (0..n).collect();
            let mut count = 0u64;
            loop {
                let (b, u) = census_one(topology, &perm);
                blocked += u64::from(b);
                unsupported += u64::from(u);
                delivered_q += u64::from(!u);
                count += 1;
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            count
        }
        Some((trials, seed)) => {
            if trials == 0 {
                return Err(Error::NoTrials);
            }
            for t in 0..trials {
                let mut rng = trial_rng(seed, t);
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let (b, u) = census_one(topology, &perm);
                blocked += u64::from(b);
                unsupported += u64::from(u);
                delivered_q += u64::from(!u);
            }
            trials
        }
    };

    let bf = blocked as f64 / total as f64;
    let uf = unsupported as f64 / total as f64;
    let se = |p: f64| (p * (1.0 - p) / total as f64).sqrt();
    Ok(BlockingStats {
        n_ports: n,
        wiring: topology.wiring(),
        total,
        blocked_classical: blocked,
        unsupported_quantum: unsupported,
        delivered_quantum: delivered_q,
        blocked_fraction: bf,
        unsupported_fraction: uf,
        exhaustive,
        std_error_blocked: (!exhaustive).then(|| se(bf)),
        std_error_unsupported: (!exhaustive).then(|| se(uf)),
    })
}

/// Lexicographic successor in place; false when wrapped around.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Per-trial rng stream: one seed, one independent stream per trial, so
/// parallel and serial execution see identical randomness.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Offered traffic for Monte Carlo runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TrafficSpec {
    /// A fixed permutation: packet i enters port i and exits `perm[i]`.
    Permutation(Vec<usize>),
    /// A fresh uniform random permutation each trial.
    UniformRandom,
}

/// Aggregate network Monte Carlo statistics.
#[derive(Debug, Clone, Serialize)]
pub struct NetworkStats {
    pub trials: u64,
    pub delivered: u64,
    pub blocked_or_unsupported: u64,
    pub herald_failed: u64,
    pub end_to_end_success: u64,
    /// Fraction of trials the routing plan delivers (analytic level).
    pub delivery_rate: f64,
    /// Fraction of trials where every engaged herald fired.
    pub end_to_end_rate: f64,
    pub std_error_end_to_end: f64,
    /// Mean analytic success probability over delivered trials.
    pub mean_success_probability: f64,
}

/// Samples routing instances; each trial draws its traffic (if random) and
/// one Bernoulli per engaged heralded unit.
///
/// Deterministic in `seed`; `parallel` fans trials across threads with
/// bit-identical results to the serial order.
pub fn network_monte_carlo(
    topology: &BanyanTopology,
    traffic: &TrafficSpec,
    ff: FeedForward,
    model: &DetectorModel,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<NetworkStats> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if let TrafficSpec::Permutation(perm) = traffic {
        // Validate once up front.
        let packets: Vec<Packet> = perm
            .iter()
            .enumerate()
            .map(|(i, &d)| Packet::basis(i, d))
            .collect();
        validate_packets(&packets, topology.n_ports())?;
    }

    let run_trial = |t: u64| -> (bool, bool, f64) {
        let mut rng = trial_rng(seed, t);
        let packets: Vec<Packet> = match traffic {
            TrafficSpec::Permutation(perm) => perm
                .iter()
                .enumerate()
                .map(|(i, &d)| Packet::basis(i, d))
                .collect(),
            TrafficSpec::UniformRandom => {
                let mut perm: Vec<usize> = (0..topology.n_ports()).collect();
                perm.shuffle(&mut rng);
                perm.iter()
                    .enumerate()
                    .map(|(i, &d)| Packet::basis(i, d))
                    .collect()
            }
        };
        let plan = route(&packets, RoutingMode::QuantumFusion, topology, ff)
            .expect("validated traffic");
        if plan.status != RouteStatus::Delivered {
            return (false, false, 0.0);
        }
        let mut p_total = 1.0;
        let mut all_fired = true;
        for e in &plan.engagements {
            let p = e.probability * model.herald_factor(&e.kind.herald_pattern());
            p_total *= p;
            if rng.gen::<f64>() >= p {
                all_fired = false;
            }
        }
        (true, all_fired, p_total)
    };

    let outcomes: Vec<(bool, bool, f64)> = if parallel {
        (0..trials).into_par_iter().map(run_trial).collect()
    } else {
        (0..trials).map(run_trial).collect()
    };

    let mut delivered = 0u64;
    let mut end_to_end = 0u64;
    let mut prob_sum = 0.0;
    for (d, ok, p) in &outcomes {
        if *d {
            delivered += 1;
            prob_sum += p;
            if *ok {
                end_to_end += 1;
            }
        }
    }
    let rate = end_to_end as f64 / trials as f64;
    Ok(NetworkStats {
        trials,
        delivered,
        blocked_or_unsupported: trials - delivered,
        herald_failed: delivered - end_to_end,
        end_to_end_success: end_to_end,
        delivery_rate: delivered as f64 / trials as f64,
        end_to_end_rate: rate,
        std_error_end_to_end: (rate * (1.0 - rate) / trials as f64).sqrt(),
        mean_success_probability: if delivered > 0 {
            prob_sum / delivered as f64
        } else {
            0.0
        },
    })
}

/// Fusion-engage policy for single-unit Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FusePolicy {
    Fixed(bool),
    /// Fusion engaged with probability one half each trial.
    UniformRandom,
}

/// Single-unit Monte Carlo statistics.
#[derive(Debug, Clone, Serialize)]
pub struct UnitStats {
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    /// Analytic mean success probability under the policy.
    pub expected_rate: f64,
    pub std_error: f64,
}

/// Samples one switch unit over many trials: each trial draws the fusion
/// control per policy and one Bernoulli at the unit's analytic probability.
pub fn unit_monte_carlo(
    policy: FusePolicy,
    ff: FeedForward,
    model: &DetectorModel,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<UnitStats> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let prob_for = |fusion: bool| {
        let kind = if fusion {
            UnitKind::Fusion { select_upper: true }
        } else {
            UnitKind::Fredkin { cross: false }
        };
        kind.probability(ff) * model.herald_factor(&kind.herald_pattern())
    };
    let (p0, p1) = (prob_for(false), prob_for(true));
    let expected = match policy {
        FusePolicy::Fixed(f) => {
            if f {
                p1
            } else {
                p0
            }
        }
        FusePolicy::UniformRandom => 0.5 * p0 + 0.5 * p1,
    };

    let run_trial = |t: u64| -> bool {
        let mut rng = trial_rng(seed, t);
        let fusion = match policy {
            FusePolicy::Fixed(f) => f,
            FusePolicy::UniformRandom => rng.gen::<bool>(),
        };
        let p = if fusion { p1 } else { p0 };
        rng.gen::<f64>() < p
    };

    let hits: Vec<bool> = if parallel {
        (0..trials).into_par_iter().map(run_trial).collect()
    } else {
        (0..trials).map(run_trial).collect()
    };
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let rate = successes as f64 / trials as f64;
    Ok(UnitStats {
        trials,
        successes,
        empirical_rate: rate,
        expected_rate: expected,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}
