//! Routing checked against independent oracles built from pure
//! link-occupancy counting over each packet's unique self-routing path,
//! plus a replay oracle that re-walks the fabric using only the reported
//! per-switch control settings.

use std::collections::BTreeMap;

use qbanyan_core::banyan::{
    enumerate_blocking, route, route_bit, BanyanTopology, Packet, RouteResult, RouteStatus,
    RoutingMode, UnitKind, Wiring,
};
use qbanyan_core::gates::FeedForward;

/// The unique path of one packet: the (switch, output-bit) it uses per stage.
fn classical_path(t: &BanyanTopology, p: &Packet) -> Vec<(usize, usize)> {
    let mut line = p.input_port;
    let mut hops = Vec::new();
    for stage in 1..=t.n_stages() {
        let (sw, _) = t.switch_of(stage, line);
        let bit = route_bit(p.dest, stage, t.n_stages());
        hops.push((sw, bit));
        line = t.output_line(stage, sw, bit);
    }
    assert_eq!(line, p.dest, "self-routing lands on the destination");
    hops
}

struct OracleVerdict {
    blocked_classical: bool,
    unsupported_quantum: bool,
    /// (fusions, fissions, fused_through, fredkin) unit counts.
    units: (usize, usize, usize, usize),
}

/// Link-occupancy oracle. Every quantum-mode behavior is a function of the
/// multiset of classical paths: a shared switch-output link means fusion, a
/// shared input link means the pair arrives fused, three packets on one
/// switch means a fused pair met a third payload.
fn oracle(t: &BanyanTopology, packets: &[Packet]) -> OracleVerdict {
    let paths: Vec<Vec<(usize, usize)>> = packets.iter().map(|p| classical_path(t, p)).collect();
    let stages = t.n_stages();

    let mut blocked = false;
    let mut unsupported = false;
    let mut fusions = 0;
    let mut fissions = 0;
    let mut fused_through = 0;
    let mut fredkin = 0;

    for stage in 1..=stages {
        // Packets per switch at this stage, with their output bits and
        // whether they shared their input link (arrived fused).
        let mut at_switch: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, path) in paths.iter().enumerate() {
            at_switch.entry(path[stage - 1].0).or_default().push(i);
        }
        for (sw, members) in at_switch {
            match members.len() {
                0 => unreachable!(),
                1 => fredkin += 1,
                2 => {
                    let (a, b) = (members[0], members[1]);
                    let same_out = paths[a][stage - 1].1 == paths[b][stage - 1].1;
                    let shared_input = stage > 1 && paths[a][stage - 2] == paths[b][stage - 2];
                    if same_out {
                        blocked = true;
                        if shared_input {
                            fused_through += 1;
                        } else {
                            fusions += 1;
                        }
                    } else if shared_input {
                        fissions += 1;
                    } else {
                        fredkin += 1;
                    }
                    let _ = sw;
                }
                _ => {
                    blocked = true;
                    unsupported = true;
                }
            }
        }
        if unsupported {
            break;
        }
    }
    OracleVerdict {
        blocked_classical: blocked,
        unsupported_quantum: unsupported,
        units: (fusions, fissions, fused_through, fredkin),
    }
}

/// Replays a delivered plan using only the reported controls: through and
/// cross moves, fusion onto the selected output, fission splitting the
/// index qubit to the upper output under through.
fn replay_controls(t: &BanyanTopology, packets: &[Packet], plan: &RouteResult) {
    #[derive(Clone, Copy)]
    enum Load {
        One(usize),
        Pair { pol: usize, index: usize },
    }
    let mut lines: BTreeMap<usize, Load> = packets
        .iter()
        .enumerate()
        .map(|(i, p)| (p.input_port, Load::One(i)))
        .collect();

    for stage in 1..=t.n_stages() {
        let mut next: BTreeMap<usize, Load> = BTreeMap::new();
        let mut by_switch: BTreeMap<usize, Vec<(usize, Load)>> = BTreeMap::new();
        for (&line, &load) in &lines {
            let (sw, side) = t.switch_of(stage, line);
            by_switch.entry(sw).or_default().push((side, load));
        }
        for (sw, mut members) in by_switch {
            members.sort_by_key(|(side, _)| *side);
            let engagement = plan
                .engagements
                .iter()
                .find(|e| e.stage == stage && e.switch_index == sw)
                .unwrap_or_else(|| panic!("engagement missing for stage {stage} switch {sw}"));
            match engagement.kind {
                UnitKind::Fredkin { cross } => {
                    for (side, load) in members {
                        let out = if cross { 1 - side } else { side };
                        next.insert(t.output_line(stage, sw, out), load);
                    }
                }
                UnitKind::FusedThrough { cross } => {
                    assert_eq!(members.len(), 1);
                    let (side, load) = members[0];
                    let out = if cross { 1 - side } else { side };
                    next.insert(t.output_line(stage, sw, out), load);
                }
                UnitKind::Fusion { select_upper } => {
                    assert_eq!(members.len(), 2, "fusion takes two payloads");
                    let (pol, index) = match (members[0].1, members[1].1) {
                        (Load::One(a), Load::One(b)) => (a, b),
                        _ => panic!("fusion inputs must be single payloads"),
                    };
                    let out = if select_upper { 0 } else { 1 };
                    next.insert(t.output_line(stage, sw, out), Load::Pair { pol, index });
                }
                UnitKind::Fission { cross } => {
                    assert_eq!(members.len(), 1);
                    let (pol, index) = match members[0].1 {
                        Load::Pair { pol, index } => (pol, index),
                        Load::One(_) => panic!("fission takes a fused pair"),
                    };
                    let (index_out, pol_out) = if cross { (1, 0) } else { (0, 1) };
                    next.insert(t.output_line(stage, sw, index_out), Load::One(index));
                    next.insert(t.output_line(stage, sw, pol_out), Load::One(pol));
                }
            }
        }
        lines = next;
    }

    for (line, load) in lines {
        match load {
            Load::One(i) => assert_eq!(
                packets[i].dest, line,
                "replayed controls deliver packet {i} to its destination"
            ),
            Load::Pair { .. } => panic!("no fused pair may survive to the outputs"),
        }
    }
}

fn packets_of(perm: &[usize]) -> Vec<Packet> {
    perm.iter()
        .enumerate()
        .map(|(i, &d)| Packet::basis(i, d))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

#[test]
fn n4_exhaustive_matches_oracle_both_wirings() {
    for wiring in [Wiring::OmegaShuffle, Wiring::Butterfly] {
        let t = BanyanTopology::new(4, wiring).unwrap();
        let mut blocked = 0u32;
        let mut unsupported = 0u32;
        for perm in permutations(4) {
            let packets = packets_of(&perm);
            let verdict = oracle(&t, &packets);
            let classical = route(&packets, RoutingMode::Classical, &t, FeedForward::on()).unwrap();
            assert_eq!(
                classical.status == RouteStatus::BlockedClassical,
                verdict.blocked_classical,
                "{wiring:?} perm {perm:?}"
            );
            let quantum =
                route(&packets, RoutingMode::QuantumFusion, &t, FeedForward::on()).unwrap();
            assert_eq!(
                quantum.status == RouteStatus::UnsupportedContention,
                verdict.unsupported_quantum,
                "{wiring:?} perm {perm:?}"
            );
            if quantum.status == RouteStatus::Delivered {
                replay_controls(&t, &packets, &quantum);
                // Probability equals the product over the oracle's units.
                let (fu, fi, ft, fr) = verdict.units;
                let expect = 0.125f64.powi(fu as i32)
                    * (0.125f64 * 0.25).powi(fi as i32)
                    * 0.25f64.powi((ft + fr) as i32);
                let rel = (quantum.success_probability - expect).abs() / expect;
                assert!(rel < 1e-12, "{wiring:?} perm {perm:?}");
                assert_eq!(quantum.fused_segments.len(), fu);
            }
            blocked += u32::from(verdict.blocked_classical);
            unsupported += u32::from(verdict.unsupported_quantum);
        }
        let stats = enumerate_blocking(&t, None).unwrap();
        assert_eq!(stats.blocked_classical, u64::from(blocked));
        assert_eq!(stats.unsupported_quantum, u64::from(unsupported));
        println!(
            "{wiring:?} N=4: blocked {blocked}/24, unsupported {unsupported}/24"
        );
    }
}

#[test]
fn n8_sampled_matches_oracle() {
    let t = BanyanTopology::new(8, Wiring::OmegaShuffle).unwrap();
    // Deterministic sample: every 17th lexicographic permutation.
    let perms = permutations(8);
    for perm in perms.iter().step_by(17) {
        let packets = packets_of(perm);
        let verdict = oracle(&t, &packets);
        let classical = route(&packets, RoutingMode::Classical, &t, FeedForward::on()).unwrap();
        assert_eq!(
            classical.status == RouteStatus::BlockedClassical,
            verdict.blocked_classical
        );
        let quantum = route(&packets, RoutingMode::QuantumFusion, &t, FeedForward::on()).unwrap();
        assert_eq!(
            quantum.status == RouteStatus::UnsupportedContention,
            verdict.unsupported_quantum
        );
        if quantum.status == RouteStatus::Delivered {
            replay_controls(&t, &packets, &quantum);
        }
    }
}

// Partial traffic: idle switches contribute no engagement and no
// probability factor.
#[test]
fn idle_switches_are_not_engaged() {
    let t = BanyanTopology::new(8, Wiring::OmegaShuffle).unwrap();
    let packets = vec![Packet::basis(2, 6)];
    let plan = route(&packets, RoutingMode::QuantumFusion, &t, FeedForward::on()).unwrap();
    assert_eq!(plan.engagements.len(), t.n_stages());
    for e in &plan.engagements {
        assert!(matches!(e.kind, UnitKind::Fredkin { .. }));
    }
}
