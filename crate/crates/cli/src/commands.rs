//! Dispatch from resolved arguments to the simulation core, producing the
//! config echo and the result payload of each report.

use serde_json::{json, Value};

use qbanyan_core::banyan::{
    enumerate_blocking, network_monte_carlo, route, unit_monte_carlo, BanyanTopology, FusePolicy,
    Packet, TrafficSpec,
};
use qbanyan_core::gates::{self, FeedForward};
use qbanyan_core::switch::{oqsu, unit_probability, PortContent, SwitchControls};
use qbanyan_core::{DetectorModel, PhotonicState, Polarization, QubitSpec, RoutingMode};

use crate::args::{
    parse_bit, parse_fused, parse_perm, parse_qubit, resolve_ff, EnumerateArgs, FileConfig,
    GateArgs, ModeArg, RouteArgs, StatsArgs, UnitArgs, WiringArg,
};
use crate::report::{fused_triples, state_triples, to_json_value};
use crate::CliError;

fn domain(e: qbanyan_core::Error) -> CliError {
    CliError::Domain(e.to_string())
}

fn qubit_json(q: &QubitSpec) -> Value {
    json!([[q.beta_h.re, q.beta_h.im], [q.beta_v.re, q.beta_v.im]])
}

fn port_json(content: &PortContent) -> Value {
    match content {
        PortContent::Vacuum => json!({ "kind": "vacuum" }),
        PortContent::Qubit(q) => json!({ "kind": "qubit", "amplitudes": qubit_json(q) }),
        PortContent::Fused(f) => json!({
            "kind": "fused",
            "carrier": f.carrier(),
            "coefficients": fused_triples(f),
        }),
    }
}

pub fn run_gate(
    args: &GateArgs,
    file: &FileConfig,
    model: &DetectorModel,
) -> Result<(Value, Value), CliError> {
    let picked = u8::from(args.fredkin) + u8::from(args.fuse) + u8::from(args.fission);
    if picked != 1 {
        return Err(CliError::Usage(
            "gate needs exactly one of --fredkin, --fuse, --fission".into(),
        ));
    }
    let ff = FeedForward {
        enabled: resolve_ff(args.ff, args.no_ff, file.ff),
    };

    if args.fredkin {
        let q1 = match args.q1.as_deref().or(file.q1.as_deref()) {
            Some(t) => parse_qubit(t, "q1")?,
            None => QubitSpec::horizontal(),
        };
        let q2 = match args.q2.as_deref().or(file.q2.as_deref()) {
            Some(t) => parse_qubit(t, "q2")?,
            None => QubitSpec::vertical(),
        };
        let control = parse_bit(args.control.or(file.control).unwrap_or(0), "control")?;
        let joint = PhotonicState::qubit("a1", 0, &q1)
            .and_then(|s| s.tensor(&PhotonicState::qubit("a2", 0, &q2)?))
            .map_err(domain)?;
        let out = gates::fredkin(&joint, "a1", "a2", "b1", "b2", control, model)
            .map_err(|e| CliError::Domain(format!("fredkin: {e}")))?;
        let config = json!({
            "command": "gate",
            "channel": "fredkin",
            "control": u8::from(control),
            "q1": qubit_json(&q1),
            "q2": qubit_json(&q2),
            "detector": to_json_value(model),
        });
        let result = json!({
            "analytic": true,
            "success_probability": out.probability,
            "herald": to_json_value(&out.pattern),
            "state": out.state().ok().map(state_triples),
        });
        return Ok((config, result));
    }

    if args.fuse {
        let q3 = match args.q1.as_deref().or(file.q1.as_deref()) {
            Some(t) => parse_qubit(t, "q1")?,
            None => QubitSpec::horizontal(),
        };
        let q4 = match args.q2.as_deref().or(file.q2.as_deref()) {
            Some(t) => parse_qubit(t, "q2")?,
            None => QubitSpec::vertical(),
        };
        let joint = PhotonicState::qubit("a3", 0, &q3)
            .and_then(|s| s.tensor(&PhotonicState::qubit("a4", 0, &q4)?))
            .map_err(domain)?;
        let out = gates::fuse(&joint, "a3", "a4", "b43", ff, true, model)
            .map_err(|e| CliError::Domain(format!("fuse: {e}")))?;
        let fused = gates::FusedState::from_state(out.state().map_err(domain)?, "b43")
            .map_err(domain)?;
        let config = json!({
            "command": "gate",
            "channel": "fuse",
            "q1": qubit_json(&q3),
            "q2": qubit_json(&q4),
            "feed_forward": ff.enabled,
            "detector": to_json_value(model),
        });
        let result = json!({
            "analytic": true,
            "success_probability": out.probability,
            "herald": to_json_value(&out.pattern),
            "fused_coefficients": fused_triples(&fused),
            "state": out.state().ok().map(state_triples),
        });
        return Ok((config, result));
    }

    // Fission; the default payload is the maximally entangled
    // (bin0 H + bin1 V)/sqrt(2).
    let fused = match args.coeffs.as_deref().or(file.coeffs.as_deref()) {
        Some(t) => parse_fused(t, "coeffs", "a56")?,
        None => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            parse_fused(&format!("{r},0,0,0,0,0,{r},0"), "coeffs", "a56")?
        }
    };
    let out = gates::fission(&fused, "b5", "b6", ff, model)
        .map_err(|e| CliError::Domain(format!("fission: {e}")))?;
    let config = json!({
        "command": "gate",
        "channel": "fission",
        "coeffs": fused_triples(&fused),
        "feed_forward": ff.enabled,
        "detector": to_json_value(model),
    });
    let result = json!({
        "analytic": true,
        "success_probability": out.probability,
        "herald": to_json_value(&out.pattern),
        "state": out.state().ok().map(state_triples),
    });
    Ok((config, result))
}

/// Expected unit behavior for one truth-table row, checked at 1e-12.
fn verify_row(
    row: SwitchControls,
    q7: &QubitSpec,
    q8: &QubitSpec,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<(bool, Value), CliError> {
    let out = oqsu(q7, q8, row, ff, model).map_err(domain)?;
    let tol = 1e-12;
    let ideal = model.is_ideal();
    let mut pass = true;

    if !row.fusion {
        let (e7, e8) = if row.cross { (q8, q7) } else { (q7, q8) };
        match (&out.out_b7, &out.out_b8) {
            (PortContent::Qubit(b7), PortContent::Qubit(b8)) => {
                pass &= b7.distance_up_to_phase(e7) < tol;
                pass &= b8.distance_up_to_phase(e8) < tol;
            }
            _ => pass = false,
        }
        if ideal {
            pass &= (out.probability - 0.25).abs() < tol;
        }
        pass &= out.herald.get("D1") == Some(0) && out.herald.get("D2") == Some(0);
    } else {
        let (fused_port, vacuum_port) = if row.select_b7 {
            (&out.out_b7, &out.out_b8)
        } else {
            (&out.out_b8, &out.out_b7)
        };
        pass &= vacuum_port.is_vacuum();
        match fused_port {
            PortContent::Fused(f) => {
                for bin in [0u32, 1] {
                    for pol in [Polarization::H, Polarization::V] {
                        let bin_amp = if bin == 0 { q8.beta_h } else { q8.beta_v };
                        pass &= (f.coeff(bin, pol) - bin_amp * q7.amp(pol)).norm() < tol;
                    }
                }
            }
            _ => pass = false,
        }
        if ideal {
            pass &= (out.probability - unit_probability(&row, ff)).abs() < tol;
        }
        pass &= out.herald.get("D3") == Some(1)
            && out.herald.get("D4") == Some(0)
            && out.herald.get("D5") == Some(1)
            && out.herald.get("D6") == Some(0);
    }

    let detail = json!({
        "f": u8::from(row.fusion),
        "F": u8::from(row.cross),
        "s": u8::from(row.select_b7),
        "pass": pass,
        "success_probability": out.probability,
        "herald": to_json_value(&out.herald),
        "b7": port_json(&out.out_b7),
        "b8": port_json(&out.out_b8),
    });
    Ok((pass, detail))
}

pub fn run_unit(
    args: &UnitArgs,
    file: &FileConfig,
    model: &DetectorModel,
) -> Result<(Value, Value), CliError> {
    let ff = FeedForward {
        enabled: resolve_ff(args.ff, args.no_ff, file.ff),
    };
    let q7 = match args.q7.as_deref().or(file.q7.as_deref()) {
        Some(t) => parse_qubit(t, "q7")?,
        None => QubitSpec::from_reals(0.6, 0.8).expect("normalized default"),
    };
    let q8 = match args.q8.as_deref().or(file.q8.as_deref()) {
        Some(t) => parse_qubit(t, "q8")?,
        None => QubitSpec::from_reals(0.8, -0.6).expect("normalized default"),
    };

    if args.table1 {
        let mut rows = Vec::new();
        let mut all_pass = true;
        for row in SwitchControls::all_rows() {
            let (pass, detail) = verify_row(row, &q7, &q8, ff, model)?;
            all_pass &= pass;
            rows.push(detail);
        }
        let config = json!({
            "command": "unit",
            "table1": true,
            "q7": qubit_json(&q7),
            "q8": qubit_json(&q8),
            "feed_forward": ff.enabled,
            "detector": to_json_value(model),
        });
        return Ok((config, json!({ "all_pass": all_pass, "rows": rows })));
    }

    let controls = SwitchControls::row(
        parse_bit(args.f.unwrap_or(0), "f")?,
        parse_bit(args.cross.unwrap_or(0), "cross")?,
        parse_bit(args.select.unwrap_or(0), "select")?,
    );
    let out = oqsu(&q7, &q8, controls, ff, model).map_err(domain)?;
    let config = json!({
        "command": "unit",
        "controls": to_json_value(&controls),
        "q7": qubit_json(&q7),
        "q8": qubit_json(&q8),
        "feed_forward": ff.enabled,
        "detector": to_json_value(model),
    });
    let result = json!({
        "analytic": true,
        "success_probability": out.probability,
        "expected_probability": unit_probability(&controls, ff),
        "herald": to_json_value(&out.herald),
        "b7": port_json(&out.out_b7),
        "b8": port_json(&out.out_b8),
    });
    Ok((config, result))
}

pub fn run_route(args: &RouteArgs, file: &FileConfig) -> Result<(Value, Value), CliError> {
    let perm = match args.perm.as_deref() {
        Some(t) => parse_perm(t)?,
        None => file
            .perm
            .clone()
            .ok_or_else(|| CliError::Usage("route needs --perm".into()))?,
    };
    let n = args.n.or(file.n).unwrap_or(perm.len());
    if n != perm.len() {
        return Err(CliError::Usage(format!(
            "--n {n} does not match the {} entries of --perm",
            perm.len()
        )));
    }
    let wiring = args
        .wiring
        .or(file.wiring_arg()?)
        .unwrap_or(WiringArg::Omega);
    let mode = args.mode.or(file.mode_arg()?).unwrap_or(ModeArg::Quantum);
    let ff = FeedForward {
        enabled: resolve_ff(args.ff, args.no_ff, file.ff),
    };
    let seed = args.seed.or(file.seed);

    let topology = BanyanTopology::new(n, wiring.to_core()).map_err(domain)?;
    let packets: Vec<Packet> = perm
        .iter()
        .enumerate()
        .map(|(i, &d)| Packet::basis(i, d))
        .collect();
    let core_mode = match mode {
        ModeArg::Classical => RoutingMode::Classical,
        ModeArg::Quantum => RoutingMode::QuantumFusion,
    };
    let result = route(&packets, core_mode, &topology, ff).map_err(domain)?;

    let config = json!({
        "command": "route",
        "n": n,
        "wiring": to_json_value(&wiring),
        "mode": to_json_value(&mode),
        "perm": perm,
        "feed_forward": ff.enabled,
        "seed": seed,
    });
    Ok((config, to_json_value(&result)))
}

pub fn run_stats(
    args: &StatsArgs,
    file: &FileConfig,
    model: &DetectorModel,
) -> Result<(Value, Value), CliError> {
    if args.unit == args.network {
        return Err(CliError::Usage(
            "stats needs exactly one of --unit or --network".into(),
        ));
    }
    let seed = args
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::Usage("stats needs --seed for reproducible sampling".into()))?;
    let trials = args.trials.or(file.trials).unwrap_or(100_000);
    let ff = FeedForward {
        enabled: resolve_ff(args.ff, args.no_ff, file.ff),
    };
    let parallel = !(args.serial || file.serial.unwrap_or(false));

    if args.unit {
        let policy = match args.f {
            Some(bit) => FusePolicy::Fixed(parse_bit(bit, "f")?),
            None => FusePolicy::UniformRandom,
        };
        let stats = unit_monte_carlo(policy, ff, model, trials, seed, parallel).map_err(domain)?;
        let config = json!({
            "command": "stats",
            "target": "unit",
            "policy": to_json_value(&policy),
            "trials": trials,
            "seed": seed,
            "feed_forward": ff.enabled,
            "parallel": parallel,
            "detector": to_json_value(model),
        });
        return Ok((config, to_json_value(&stats)));
    }

    let n = args.n.or(file.n).unwrap_or(8);
    let wiring = args
        .wiring
        .or(file.wiring_arg()?)
        .unwrap_or(WiringArg::Omega);
    let topology = BanyanTopology::new(n, wiring.to_core()).map_err(domain)?;
    let traffic = match args.perm.as_deref() {
        Some(t) => TrafficSpec::Permutation(parse_perm(t)?),
        None => match &file.perm {
            Some(p) => TrafficSpec::Permutation(p.clone()),
            None => TrafficSpec::UniformRandom,
        },
    };
    let stats = network_monte_carlo(&topology, &traffic, ff, model, trials, seed, parallel)
        .map_err(domain)?;
    let config = json!({
        "command": "stats",
        "target": "network",
        "n": n,
        "wiring": to_json_value(&wiring),
        "traffic": to_json_value(&traffic),
        "trials": trials,
        "seed": seed,
        "feed_forward": ff.enabled,
        "parallel": parallel,
        "detector": to_json_value(model),
    });
    Ok((config, to_json_value(&stats)))
}

pub fn run_enumerate(args: &EnumerateArgs, file: &FileConfig) -> Result<(Value, Value), CliError> {
    let n = args.n.or(file.n).unwrap_or(4);
    let wiring = args
        .wiring
        .or(file.wiring_arg()?)
        .unwrap_or(WiringArg::Omega);
    let topology = BanyanTopology::new(n, wiring.to_core()).map_err(domain)?;

    let samples = args.samples.or(file.samples);
    let sampling = match samples {
        Some(k) => {
            let seed = args.seed.or(file.seed).ok_or_else(|| {
                CliError::Usage("enumerate with --samples needs --seed".into())
            })?;
            Some((k, seed))
        }
        None => {
            if n > 8 {
                return Err(CliError::Usage(format!(
                    "exhaustive census of {n}! permutations is impractical; pass --samples"
                )));
            }
            None
        }
    };
    let stats = enumerate_blocking(&topology, sampling).map_err(domain)?;
    let config = json!({
        "command": "enumerate",
        "n": n,
        "wiring": to_json_value(&wiring),
        "samples": samples,
        "seed": args.seed.or(file.seed),
    });
    Ok((config, to_json_value(&stats)))
}
