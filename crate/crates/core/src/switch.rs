//! The block-free optical quantum switch unit and its composite variants.
//!
//! The unit takes two polarization qubits on a7 and a8 and four classical
//! control settings. Without output competition it runs the heralded
//! Fredkin gate (through or cross); under competition it fuses both qubits
//! into one two-bin carrier photon and routes it to the selected output,
//! leaving vacuum on the other. The truth table:
//!
//! ```text
//!  f  F  s | b7        b8        condition
//!  0  0  * | psi_a7    psi_a8    D1, D2 silent
//!  0  1  * | psi_a8    psi_a7    D1, D2 silent
//!  1  *  0 | vacuum    fused     D3, D5 one photon each; D4, D6 silent
//!  1  *  1 | fused     vacuum    D3, D5 one photon each; D4, D6 silent
//! ```

use rand::Rng;
use serde::Serialize;

use crate::components::{ClickPattern, DetectorModel};
use crate::error::{Error, Result};
use crate::fock::{factor_qubit, PhotonicState, QubitSpec};
use crate::gates::{
    fission_state, fredkin, fuse, fusion_probability, FeedForward, FusedState, FREDKIN_SUCCESS,
};

/// The four classical control settings of one switch unit.
///
/// `fusion` engages the fusion path (output competition), `cross` sets the
/// Fredkin gate to cross, `select_b7` sends the fused state to b7 rather
/// than b8, and `convert` enables the spatial-to-time converter stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SwitchControls {
    pub fusion: bool,
    pub cross: bool,
    pub select_b7: bool,
    pub convert: bool,
}

impl SwitchControls {
    pub fn new(fusion: bool, cross: bool, select_b7: bool, convert: bool) -> Self {
        SwitchControls {
            fusion,
            cross,
            select_b7,
            convert,
        }
    }

    /// A truth-table row (f, F, s); the converter follows the fusion bit.
    pub fn row(fusion: bool, cross: bool, select_b7: bool) -> Self {
        SwitchControls {
            fusion,
            cross,
            select_b7,
            convert: fusion,
        }
    }

    /// All eight (f, F, s) rows in table order.
    pub fn all_rows() -> Vec<SwitchControls> {
        let mut rows = Vec::with_capacity(8);
        for f in [false, true] {
            for cross in [false, true] {
                for s in [false, true] {
                    rows.push(SwitchControls::row(f, cross, s));
                }
            }
        }
        rows
    }
}

/// What a unit output port carries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PortContent {
    Vacuum,
    Qubit(QubitSpec),
    Fused(FusedState),
}

impl PortContent {
    pub fn is_vacuum(&self) -> bool {
        matches!(self, PortContent::Vacuum)
    }
}

/// Outcome of one switch unit operation.
#[derive(Debug, Clone)]
pub struct UnitOutcome {
    pub out_b7: PortContent,
    pub out_b8: PortContent,
    pub success: bool,
    pub probability: f64,
    pub herald: ClickPattern,
}

impl UnitOutcome {
    /// One Bernoulli draw of the heralding; on failure the outputs are
    /// dropped and the herald cleared.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> UnitOutcome {
        if rng.gen::<f64>() < self.probability {
            self
        } else {
            UnitOutcome {
                out_b7: PortContent::Vacuum,
                out_b8: PortContent::Vacuum,
                success: false,
                probability: self.probability,
                herald: ClickPattern::new(),
            }
        }
    }
}

/// Routes both inputs to the Fredkin arm (`f` low, labels `'`) or the
/// fusion arm (`f` high, labels `''`). Payload amplitudes are untouched.
pub fn path_select(
    state: &PhotonicState,
    in7: &str,
    in8: &str,
    fusion: bool,
) -> Result<(PhotonicState, String, String)> {
    let suffix = if fusion { "''" } else { "'" };
    let arm7 = format!("{in7}{suffix}");
    let arm8 = format!("{in8}{suffix}");
    for arm in [&arm7, &arm8] {
        if state.paths().contains(arm.as_str()) {
            return Err(Error::PathInUse(arm.clone()));
        }
    }
    let routed = state.relabel(|m| {
        let path = m.path();
        let target = if path == in7 {
            &arm7
        } else if path == in8 {
            &arm8
        } else {
            return m.clone();
        };
        crate::fock::Mode::new(target.as_str(), m.pol(), m.bin()).expect("non-empty label")
    });
    Ok((routed, arm7, arm8))
}

/// Analytic success probability of a unit under the given controls.
pub fn unit_probability(controls: &SwitchControls, ff: FeedForward) -> f64 {
    if controls.fusion {
        fusion_probability(ff)
    } else {
        FREDKIN_SUCCESS
    }
}

/// Runs the switch unit on two input qubits.
///
/// Fusion slot assignment is fixed: the a7 input keeps its qubit in
/// polarization, the a8 input indexes the time bin. The fused carrier goes
/// to b7 when `select_b7` is set, b8 otherwise.
pub fn oqsu(
    q7: &QubitSpec,
    q8: &QubitSpec,
    controls: SwitchControls,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<UnitOutcome> {
    if controls.fusion && !controls.convert {
        return Err(Error::InvalidControls(
            "fusion requires the converter stage engaged",
        ));
    }
    let joint = PhotonicState::qubit("a7", 0, q7)?.tensor(&PhotonicState::qubit("a8", 0, q8)?)?;
    let (routed, arm7, arm8) = path_select(&joint, "a7", "a8", controls.fusion)?;

    if !controls.fusion {
        let out = fredkin(&routed, &arm7, &arm8, "b7", "b8", controls.cross, model)?;
        let state = out.state()?;
        let (qb7, rest) = factor_qubit(state, "b7")?;
        let (qb8, _) = factor_qubit(&rest, "b8")?;
        Ok(UnitOutcome {
            out_b7: PortContent::Qubit(qb7),
            out_b8: PortContent::Qubit(qb8),
            success: true,
            probability: out.probability,
            herald: out.pattern,
        })
    } else {
        let carrier = if controls.select_b7 { "b7" } else { "b8" };
        let out = fuse(&routed, &arm7, &arm8, carrier, ff, controls.convert, model)?;
        let fused = FusedState::from_state(out.state()?, carrier)?;
        let (out_b7, out_b8) = if controls.select_b7 {
            (PortContent::Fused(fused), PortContent::Vacuum)
        } else {
            (PortContent::Vacuum, PortContent::Fused(fused))
        };
        Ok(UnitOutcome {
            out_b7,
            out_b8,
            success: true,
            probability: out.probability,
            herald: out.pattern,
        })
    }
}

/// Outcome of a composite variant unit: the joint output state over the two
/// ports plus the merged herald.
#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub success: bool,
    pub probability: f64,
    pub herald: ClickPattern,
    pub output: Option<PhotonicState>,
    pub ports: (String, String),
}

impl VariantOutcome {
    pub fn state(&self) -> Result<&PhotonicState> {
        self.output.as_ref().ok_or(Error::ImpossibleOutcome)
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> VariantOutcome {
        if rng.gen::<f64>() < self.probability {
            self
        } else {
            VariantOutcome {
                success: false,
                probability: self.probability,
                herald: ClickPattern::new(),
                output: None,
                ports: self.ports,
            }
        }
    }
}

/// Variant (a): one fission followed by one Fredkin gate. The fused input
/// splits into its bin-index qubit and its polarization qubit, which exit on
/// `out1`/`out2` (through) or swapped (cross).
pub fn variant_a(
    fused: &FusedState,
    cross: bool,
    out1: &str,
    out2: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<VariantOutcome> {
    let idx = format!("{out1}~idx");
    let pol = format!("{out1}~pol");
    let fis = fission_state(&fused.to_state(), fused.carrier(), &idx, &pol, ff, model)?;
    let fred = fredkin(fis.state()?, &idx, &pol, out1, out2, cross, model)?;
    Ok(VariantOutcome {
        success: true,
        probability: fis.probability * fred.probability,
        herald: fis
            .pattern
            .prefixed("fission.")
            .merged(&fred.pattern.prefixed("fredkin.")),
        output: Some(fred.state()?.clone()),
        ports: (out1.to_string(), out2.to_string()),
    })
}

/// Variant (b): one fission and one fusion. One qubit from the fissioned
/// input exits directly on `out_qubit`; the other is fused with the incoming
/// single qubit onto `out_carrier`.
///
/// With `select` low the bin-index qubit re-fuses and the polarization
/// qubit exits; `select` high swaps those roles. The re-fused qubit takes
/// the polarization slot of the new carrier, the incoming single the
/// bin-index slot.
pub fn variant_b(
    fused: &FusedState,
    single: &QubitSpec,
    select: bool,
    out_qubit: &str,
    out_carrier: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<VariantOutcome> {
    let idx = format!("{out_carrier}~idx");
    let pol = format!("{out_carrier}~pol");
    let single_in = format!("{out_carrier}~in");

    let joint = fused
        .to_state()
        .tensor(&PhotonicState::qubit(&single_in, 0, single)?)?;
    let fis = fission_state(&joint, fused.carrier(), &idx, &pol, ff, model)?;
    let (refuse, exit) = if select { (&pol, &idx) } else { (&idx, &pol) };
    let fus = fuse(fis.state()?, refuse, &single_in, out_carrier, ff, true, model)?;
    let output = fus.state()?.relabel(|m| {
        if m.path() == exit.as_str() {
            crate::fock::Mode::new(out_qubit, m.pol(), m.bin()).expect("non-empty label")
        } else {
            m.clone()
        }
    });
    Ok(VariantOutcome {
        success: true,
        probability: fis.probability * fus.probability,
        herald: fis
            .pattern
            .prefixed("fission.")
            .merged(&fus.pattern.prefixed("fusion.")),
        output: Some(output),
        ports: (out_qubit.to_string(), out_carrier.to_string()),
    })
}

/// Variant (c): one Fredkin gate over a fused payload and a single qubit.
/// The single input is padded with vacuum in bin 1 so that both ports carry
/// two-bin payloads; cross exchanges the whole payloads.
pub fn variant_c(
    fused: &FusedState,
    single: &QubitSpec,
    cross: bool,
    out1: &str,
    out2: &str,
    model: &DetectorModel,
) -> Result<VariantOutcome> {
    let single_in = format!("{out2}~in");
    let joint = fused
        .to_state()
        .tensor(&PhotonicState::qubit(&single_in, 0, single)?)?;
    let fred = fredkin(&joint, fused.carrier(), &single_in, out1, out2, cross, model)?;
    let output = fred.state()?.clone();
    Ok(VariantOutcome {
        success: true,
        probability: fred.probability,
        herald: fred.pattern,
        output: Some(output),
        ports: (out1.to_string(), out2.to_string()),
    })
}

/// Variant (d): two fissions and two fusions. Both fused inputs split, the
/// two bin-index qubits trade places, and both pairs re-fuse: carriers
/// `out1` and `out2` hold (pol of input 1, index of input 2) and (pol of
/// input 2, index of input 1).
pub fn variant_d(
    fused1: &FusedState,
    fused2: &FusedState,
    out1: &str,
    out2: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<VariantOutcome> {
    if fused1.carrier() == fused2.carrier() {
        return Err(Error::PathOverlap(fused1.carrier().to_string()));
    }
    let idx1 = format!("{out1}~idx1");
    let pol1 = format!("{out1}~pol1");
    let idx2 = format!("{out2}~idx2");
    let pol2 = format!("{out2}~pol2");

    let joint = fused1.to_state().tensor(&fused2.to_state())?;
    let fis1 = fission_state(&joint, fused1.carrier(), &idx1, &pol1, ff, model)?;
    let fis2 = fission_state(fis1.state()?, fused2.carrier(), &idx2, &pol2, ff, model)?;
    let fus1 = fuse(fis2.state()?, &pol1, &idx2, out1, ff, true, model)?;
    let fus2 = fuse(fus1.state()?, &pol2, &idx1, out2, ff, true, model)?;

    Ok(VariantOutcome {
        success: true,
        probability: fis1.probability * fis2.probability * fus1.probability * fus2.probability,
        herald: fis1
            .pattern
            .prefixed("fission1.")
            .merged(&fis2.pattern.prefixed("fission2."))
            .merged(&fus1.pattern.prefixed("fusion1."))
            .merged(&fus2.pattern.prefixed("fusion2.")),
        output: Some(fus2.state()?.clone()),
        ports: (out1.to_string(), out2.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Polarization;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_pair(seed: u64) -> (QubitSpec, QubitSpec) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (QubitSpec::random(&mut rng), QubitSpec::random(&mut rng))
    }

    fn port_qubit(content: &PortContent) -> &QubitSpec {
        match content {
            PortContent::Qubit(q) => q,
            other => panic!("expected qubit, got {other:?}"),
        }
    }

    fn port_fused(content: &PortContent) -> &FusedState {
        match content {
            PortContent::Fused(f) => f,
            other => panic!("expected fused payload, got {other:?}"),
        }
    }

    #[test]
    fn path_select_routes_to_arms() {
        let (q7, q8) = random_pair(1);
        let joint = PhotonicState::qubit("a7", 0, &q7)
            .unwrap()
            .tensor(&PhotonicState::qubit("a8", 0, &q8).unwrap())
            .unwrap();
        let (fredkin_arm, a7p, a8p) = path_select(&joint, "a7", "a8", false).unwrap();
        assert_eq!((a7p.as_str(), a8p.as_str()), ("a7'", "a8'"));
        assert!(fredkin_arm.paths().contains("a7'"));
        let (fusion_arm, a7pp, _) = path_select(&joint, "a7", "a8", true).unwrap();
        assert_eq!(a7pp, "a7''");
        assert!(fusion_arm.paths().contains("a8''"));
        // Amplitudes ride along unchanged.
        let expect = PhotonicState::qubit("a7''", 0, &q7)
            .unwrap()
            .tensor(&PhotonicState::qubit("a8''", 0, &q8).unwrap())
            .unwrap();
        assert!(fusion_arm.distance(&expect) < 1e-12);
    }

    #[test]
    fn table1_fredkin_rows() {
        for (seed, cross) in [(2u64, false), (3, true)] {
            let (q7, q8) = random_pair(seed);
            for select in [false, true] {
                let out = oqsu(
                    &q7,
                    &q8,
                    SwitchControls::row(false, cross, select),
                    FeedForward::on(),
                    &DetectorModel::ideal(),
                )
                .unwrap();
                let (expect_b7, expect_b8) = if cross { (&q8, &q7) } else { (&q7, &q8) };
                assert!(port_qubit(&out.out_b7).distance_up_to_phase(expect_b7) < 1e-12);
                assert!(port_qubit(&out.out_b8).distance_up_to_phase(expect_b8) < 1e-12);
                assert!((out.probability - 0.25).abs() < 1e-15);
                assert_eq!(out.herald.get("D1"), Some(0));
                assert_eq!(out.herald.get("D2"), Some(0));
            }
        }
    }

    #[test]
    fn table1_fusion_rows() {
        let (q7, q8) = random_pair(4);
        for cross in [false, true] {
            for select in [false, true] {
                let out = oqsu(
                    &q7,
                    &q8,
                    SwitchControls::row(true, cross, select),
                    FeedForward::on(),
                    &DetectorModel::ideal(),
                )
                .unwrap();
                let (fused_port, vacuum_port) = if select {
                    (&out.out_b7, &out.out_b8)
                } else {
                    (&out.out_b8, &out.out_b7)
                };
                assert!(vacuum_port.is_vacuum());
                let fused = port_fused(fused_port);
                // Outer product: a8 indexes the bin, a7 stays polarization.
                for bin in [0u32, 1] {
                    for pol in [Polarization::H, Polarization::V] {
                        let bin_amp = if bin == 0 { q8.beta_h } else { q8.beta_v };
                        let expect = bin_amp * q7.amp(pol);
                        assert!((fused.coeff(bin, pol) - expect).norm() < 1e-12);
                    }
                }
                assert!((out.probability - 0.125).abs() < 1e-15);
                assert_eq!(out.herald.get("D3"), Some(1));
                assert_eq!(out.herald.get("D4"), Some(0));
                assert_eq!(out.herald.get("D5"), Some(1));
                assert_eq!(out.herald.get("D6"), Some(0));
            }
        }
    }

    #[test]
    fn fusion_without_converter_is_rejected() {
        let (q7, q8) = random_pair(5);
        let controls = SwitchControls::new(true, false, true, false);
        assert!(matches!(
            oqsu(&q7, &q8, controls, FeedForward::on(), &DetectorModel::ideal()).unwrap_err(),
            Error::InvalidControls(_)
        ));
    }

    #[test]
    fn unit_probability_constants() {
        let ff = FeedForward::on();
        assert_eq!(unit_probability(&SwitchControls::row(false, false, false), ff), 0.25);
        assert_eq!(unit_probability(&SwitchControls::row(true, false, false), ff), 0.125);
        assert_eq!(
            unit_probability(&SwitchControls::row(true, true, true), FeedForward::off()),
            1.0 / 32.0
        );
        // Uniform f with feed-forward averages to 3/16.
        let mean: f64 = 0.5 * 0.125 + 0.5 * 0.25;
        assert!((mean - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn unit_outcome_sampling_is_bernoulli() {
        let (q7, q8) = random_pair(6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 20_000;
        let mut hits = 0u32;
        for _ in 0..trials {
            let out = oqsu(
                &q7,
                &q8,
                SwitchControls::row(false, false, false),
                FeedForward::on(),
                &DetectorModel::ideal(),
            )
            .unwrap()
            .sample(&mut rng);
            if out.success {
                hits += 1;
            } else {
                assert!(out.out_b7.is_vacuum() && out.out_b8.is_vacuum());
            }
        }
        let freq = f64::from(hits) / f64::from(trials);
        assert!((freq - 0.25).abs() < 3.0 * (0.25 * 0.75 / trials as f64).sqrt());
    }

    // Oracle: compose the fission basis map and the Fredkin relabeling by
    // hand for a product payload.
    #[test]
    fn variant_a_splits_and_routes() {
        let (qa, qb) = random_pair(8);
        let fused = FusedState::outer("in", &qb, &qa).unwrap();
        for cross in [false, true] {
            let out = variant_a(&fused, cross, "o1", "o2", FeedForward::on(), &DetectorModel::ideal()).unwrap();
            // Index qubit (qb) exits out1 through, out2 cross.
            let (p1, p2) = if cross { (&qa, &qb) } else { (&qb, &qa) };
            let expect = PhotonicState::qubit("o1", 0, p1)
                .unwrap()
                .tensor(&PhotonicState::qubit("o2", 0, p2).unwrap())
                .unwrap();
            assert!(out.state().unwrap().distance_up_to_phase(&expect) < 1e-10);
            assert!((out.probability - 0.125 * 0.25).abs() < 1e-15);
        }
    }

    // Oracle: fission then fusion composed by hand. With select low the
    // index qubit (qb) re-fuses with the single (qc) and qa exits.
    #[test]
    fn variant_b_refuses_one_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (qa, qb) = (QubitSpec::random(&mut rng), QubitSpec::random(&mut rng));
        let qc = QubitSpec::random(&mut rng);
        let fused = FusedState::outer("in", &qb, &qa).unwrap();
        let out = variant_b(&fused, &qc, false, "oq", "oc", FeedForward::on(), &DetectorModel::ideal()).unwrap();
        let expect_carrier = FusedState::outer("oc", &qc, &qb).unwrap();
        let expect = PhotonicState::qubit("oq", 0, &qa)
            .unwrap()
            .tensor(&expect_carrier.to_state())
            .unwrap();
        assert!(out.state().unwrap().distance_up_to_phase(&expect) < 1e-10);
        assert!((out.probability - 0.125 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn variant_c_swaps_whole_payloads() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let fused = FusedState::outer(
            "in",
            &QubitSpec::random(&mut rng),
            &QubitSpec::random(&mut rng),
        )
        .unwrap();
        let single = QubitSpec::random(&mut rng);

        let through = variant_c(&fused, &single, false, "o1", "o2", &DetectorModel::ideal()).unwrap();
        let expect = fused
            .with_carrier("o1")
            .unwrap()
            .to_state()
            .tensor(&PhotonicState::qubit("o2", 0, &single).unwrap())
            .unwrap();
        assert!(through.state().unwrap().distance(&expect) < 1e-12);
        assert!((through.probability - 0.25).abs() < 1e-15);

        let crossed = variant_c(&fused, &single, true, "o1", "o2", &DetectorModel::ideal()).unwrap();
        let expect = fused
            .with_carrier("o2")
            .unwrap()
            .to_state()
            .tensor(&PhotonicState::qubit("o1", 0, &single).unwrap())
            .unwrap();
        assert!(crossed.state().unwrap().distance(&expect) < 1e-12);

        // The padded port never acquires bin-1 amplitude.
        for (cfg, _) in crossed.state().unwrap().terms() {
            assert_eq!(cfg.photons_on_path_bin("o1", 1), 0);
        }
    }

    // Oracle: compose two fission maps, exchange index qubits, re-fuse.
    #[test]
    fn variant_d_exchanges_index_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (qa, qb) = (QubitSpec::random(&mut rng), QubitSpec::random(&mut rng));
        let (qc, qd) = (QubitSpec::random(&mut rng), QubitSpec::random(&mut rng));
        let f1 = FusedState::outer("in1", &qb, &qa).unwrap();
        let f2 = FusedState::outer("in2", &qd, &qc).unwrap();
        let out = variant_d(&f1, &f2, "o1", "o2", FeedForward::on(), &DetectorModel::ideal()).unwrap();
        let expect = FusedState::outer("o1", &qd, &qa)
            .unwrap()
            .to_state()
            .tensor(&FusedState::outer("o2", &qb, &qc).unwrap().to_state())
            .unwrap();
        assert!(out.state().unwrap().distance_up_to_phase(&expect) < 1e-10);
        let p = 0.125f64;
        assert!((out.probability - p.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn variant_d_rejects_shared_carrier() {
        let f = FusedState::new(
            "x",
            [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(variant_d(&f, &f, "o1", "o2", FeedForward::on(), &DetectorModel::ideal()).is_err());
    }
}
