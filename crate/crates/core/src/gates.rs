//! Heralded switching primitives: Fredkin gate, state fusion, state fission.
//!
//! The three cores are modeled as heralded channels: the exact input-output
//! map plus the analytic success probability announced by their detector
//! pattern. The spatial<->time mode converters around fusion and fission are
//! built from components (delays, beam splitters, gated polarization flips),
//! and each composite is unitary on its domain.
//!
//! Success probabilities under ideal detectors are constants independent of
//! the input state: 1/4 for the Fredkin gate, 1/32 for fusion and fission,
//! raised to 1/8 by feed-forward. Non-ideal detectors only degrade the
//! heralding of the success branch; degraded values are reported, never
//! substituted for the constants.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::components::{
    controlled_flip, delay_apply, hwp_apply, pbs_apply, BinSelector, ClickPattern, DetectorModel,
    HwpSetting,
};
use crate::error::{Error, Result};
use crate::fock::{FockConfig, Mode, PhotonicState, Polarization, QubitSpec};

/// Fredkin gate success rate with ideal detectors.
pub const FREDKIN_SUCCESS: f64 = 0.25;
/// Fusion (and fission) success rate without feed-forward.
pub const FUSION_SUCCESS_RAW: f64 = 1.0 / 32.0;
/// Fusion (and fission) success rate with feed-forward.
pub const FUSION_SUCCESS_FF: f64 = 1.0 / 8.0;

/// Whether downstream optics adapt to the herald, raising fusion and fission
/// from 1/32 to 1/8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeedForward {
    pub enabled: bool,
}

impl Default for FeedForward {
    fn default() -> Self {
        FeedForward { enabled: true }
    }
}

impl FeedForward {
    pub fn on() -> Self {
        FeedForward { enabled: true }
    }

    pub fn off() -> Self {
        FeedForward { enabled: false }
    }
}

/// Fusion/fission success constant for a feed-forward setting.
pub fn fusion_probability(ff: FeedForward) -> f64 {
    if ff.enabled {
        FUSION_SUCCESS_FF
    } else {
        FUSION_SUCCESS_RAW
    }
}

/// Result of a post-selected channel.
///
/// `probability` is the analytic success probability (the channel constant,
/// degraded by the detector model when it is not ideal). In analytic mode
/// `success` is true and `output` holds the conditioned state; `sample`
/// turns the outcome into one Bernoulli draw.
#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    pub success: bool,
    pub probability: f64,
    pub pattern: ClickPattern,
    pub output: Option<PhotonicState>,
}

impl HeraldOutcome {
    fn succeeded(probability: f64, pattern: ClickPattern, output: PhotonicState) -> Self {
        HeraldOutcome {
            success: true,
            probability,
            pattern,
            output: Some(output),
        }
    }

    /// Draws success with the outcome's probability. On failure the herald
    /// pattern is cleared and the output dropped: the paper constrains only
    /// what the detectors announce on success.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> HeraldOutcome {
        if rng.gen::<f64>() < self.probability {
            self
        } else {
            HeraldOutcome {
                success: false,
                probability: self.probability,
                pattern: ClickPattern::new(),
                output: None,
            }
        }
    }

    pub fn state(&self) -> Result<&PhotonicState> {
        self.output.as_ref().ok_or(Error::ImpossibleOutcome)
    }
}

/// Reads a control qubit as a classical bit. Only the computational basis
/// states are supported.
pub fn control_bit_from_qubit(q: &QubitSpec) -> Result<bool> {
    if q.beta_v.norm() < 1e-9 {
        Ok(false)
    } else if q.beta_h.norm() < 1e-9 {
        Ok(true)
    } else {
        Err(Error::UnsupportedControl)
    }
}

fn require_one_photon_per_path(state: &PhotonicState, paths: &[&str]) -> Result<()> {
    for (cfg, _) in state.terms() {
        for path in paths {
            if cfg.photons_on_path(path) != 1 {
                return Err(Error::SinglePhotonExpected((*path).to_string()));
            }
        }
    }
    Ok(())
}

fn require_bin_zero(state: &PhotonicState, paths: &[&str]) -> Result<()> {
    for (cfg, _) in state.terms() {
        for (m, _) in cfg.iter() {
            if paths.contains(&m.path()) && m.bin() != 0 {
                return Err(Error::BinOutOfRange {
                    path: m.path().to_string(),
                    bin: m.bin(),
                });
            }
        }
    }
    Ok(())
}

fn check_outputs_free(state: &PhotonicState, ins: &[&str], outs: &[&str]) -> Result<()> {
    for (i, a) in outs.iter().enumerate() {
        for b in outs.iter().skip(i + 1) {
            if a == b {
                return Err(Error::DuplicateModes);
            }
        }
        if !ins.contains(a) && state.paths().contains(*a) {
            return Err(Error::PathInUse((*a).to_string()));
        }
    }
    Ok(())
}

/// Heralded Fredkin (controlled-swap) channel.
///
/// With `control` low the payloads pass through (`in1 -> out1`); with
/// `control` high they cross (`in1 -> out2`). The swap moves the whole path
/// contents, all bins and polarizations, so single-photon qubits and
/// two-bin payloads ride the same channel. Succeeds when detectors D1 and
/// D2 both stay silent, with probability 1/4.
pub fn fredkin(
    input: &PhotonicState,
    in1: &str,
    in2: &str,
    out1: &str,
    out2: &str,
    control: bool,
    model: &DetectorModel,
) -> Result<HeraldOutcome> {
    require_one_photon_per_path(input, &[in1, in2])?;
    check_outputs_free(input, &[in1, in2], &[out1, out2])?;
    let (to1, to2) = if control { (out2, out1) } else { (out1, out2) };
    let output = input.relabel(|m| {
        let target = if m.path() == in1 {
            to1
        } else if m.path() == in2 {
            to2
        } else {
            return m.clone();
        };
        Mode::new(target, m.pol(), m.bin()).expect("output label is non-empty")
    });
    let pattern = ClickPattern::of(&[("D1", 0), ("D2", 0)]);
    let probability = FREDKIN_SUCCESS * model.herald_factor(&pattern);
    Ok(HeraldOutcome::succeeded(probability, pattern, output))
}

/// Fredkin on two fresh qubits, wired like the standalone gate
/// (a1, a2 -> b1, b2) with ideal detectors.
pub fn fredkin_pair(q1: &QubitSpec, q2: &QubitSpec, control: bool) -> Result<HeraldOutcome> {
    let joint = PhotonicState::qubit("a1", 0, q1)?.tensor(&PhotonicState::qubit("a2", 0, q2)?)?;
    fredkin(&joint, "a1", "a2", "b1", "b2", control, &DetectorModel::ideal())
}

/// Heralded fusion core: combines the qubits of two photons into the
/// four-dimensional spatial-polarization state of one photon.
///
/// The `in_arm` qubit becomes the which-arm index (H -> `out_arm0`,
/// V -> `out_arm1`); the `in_pol` qubit stays in polarization. Succeeds when
/// D3 and D5 (the H channels behind the fusion beam splitters) each see
/// exactly one photon while D4 and D6 stay silent.
pub fn fuse_spatial(
    input: &PhotonicState,
    in_pol: &str,
    in_arm: &str,
    out_arm0: &str,
    out_arm1: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<HeraldOutcome> {
    require_one_photon_per_path(input, &[in_pol, in_arm])?;
    require_bin_zero(input, &[in_pol, in_arm])?;
    check_outputs_free(input, &[in_pol, in_arm], &[out_arm0, out_arm1])?;

    let mut terms = Vec::new();
    for (cfg, amp) in input.terms() {
        let mut pol = None;
        let mut arm = None;
        let mut rest = FockConfig::vacuum();
        for (m, n) in cfg.iter() {
            if m.path() == in_pol {
                pol = Some(m.pol());
            } else if m.path() == in_arm {
                arm = Some(m.pol());
            } else {
                rest.add_photons(m.clone(), n);
            }
        }
        let (pol, arm) = (pol.expect("checked above"), arm.expect("checked above"));
        let target = match arm {
            Polarization::H => out_arm0,
            Polarization::V => out_arm1,
        };
        rest.add_photons(Mode::new(target, pol, 0)?, 1);
        terms.push((rest, amp));
    }
    let output = PhotonicState::from_terms(terms)?;
    let pattern = ClickPattern::of(&[("D3", 1), ("D4", 0), ("D5", 1), ("D6", 0)]);
    let probability = fusion_probability(ff) * model.herald_factor(&pattern);
    Ok(HeraldOutcome::succeeded(probability, pattern, output))
}

fn scratch(label: &str, tag: &str) -> String {
    format!("{label}~{tag}")
}

/// Converts a two-arm spatial-polarization photon into a two-bin
/// time-polarization photon on `carrier`: `arm0` amplitudes land in bin 0,
/// `arm1` amplitudes in bin 1, polarization preserved.
///
/// Component realization: the arm-1 line is delayed by one bin, the arms
/// interfere on a polarizing beam splitter, the bin-0 components (exactly
/// the photons that entered on `arm0`) are flipped by gated NOT elements on
/// both intermediate rails and once more after the merging beam splitter.
/// With `convert` low the circuit is bypassed.
pub fn spatial_to_time(
    input: &PhotonicState,
    arm0: &str,
    arm1: &str,
    carrier: &str,
    convert: bool,
) -> Result<PhotonicState> {
    if !convert {
        return Ok(input.clone());
    }
    for (cfg, _) in input.terms() {
        if cfg.photons_on_path(arm0) + cfg.photons_on_path(arm1) != 1 {
            return Err(Error::SinglePhotonExpected(format!("{arm0}|{arm1}")));
        }
    }
    require_bin_zero(input, &[arm0, arm1])?;
    check_outputs_free(input, &[arm0, arm1], &[carrier])?;

    let rail_h = scratch(carrier, "railH");
    let rail_v = scratch(carrier, "railV");
    let waste = scratch(carrier, "waste");

    let s = delay_apply(input, arm1, 1);
    let s = pbs_apply(&s, arm1, arm0, &rail_h, &rail_v, BinSelector::All)?;
    let s = controlled_flip(&s, true, &rail_h, BinSelector::Only(0));
    let s = controlled_flip(&s, true, &rail_v, BinSelector::Only(0));
    let s = pbs_apply(&s, &rail_h, &rail_v, carrier, &waste, BinSelector::All)?;
    let s = controlled_flip(&s, true, carrier, BinSelector::Only(0));
    debug_assert!(
        s.paths().iter().all(|p| p != &waste),
        "waste port stays empty on the converter domain"
    );
    Ok(s)
}

/// Converts a two-bin time-polarization photon on `carrier` back into a
/// two-arm spatial photon: bin 0 exits on `out0`, bin 1 on `out1`, both
/// re-timed to bin 0.
///
/// Component realization mirrors the forward converter: a polarizing beam
/// splitter separates the polarization rails, gated NOT elements act only on
/// the photon in the second time bin, a second beam splitter reassembles the
/// arms and a 45 degree half-wave plate restores the bin-1 polarizations.
/// With `convert` low the circuit is bypassed.
pub fn time_to_spatial(
    input: &PhotonicState,
    carrier: &str,
    out0: &str,
    out1: &str,
    convert: bool,
) -> Result<PhotonicState> {
    if !convert {
        return Ok(input.clone());
    }
    for (cfg, _) in input.terms() {
        if cfg.photons_on_path(carrier) != 1 {
            return Err(Error::SinglePhotonExpected(carrier.to_string()));
        }
        for (m, _) in cfg.iter() {
            if m.path() == carrier && m.bin() > 1 {
                return Err(Error::BinOutOfRange {
                    path: carrier.to_string(),
                    bin: m.bin(),
                });
            }
        }
    }
    check_outputs_free(input, &[carrier], &[out0, out1])?;

    let aux = scratch(carrier, "aux");
    let rail_h = scratch(carrier, "railH");
    let rail_v = scratch(carrier, "railV");

    let s = pbs_apply(input, carrier, &aux, &rail_h, &rail_v, BinSelector::All)?;
    let s = controlled_flip(&s, true, &rail_h, BinSelector::Only(1));
    let s = controlled_flip(&s, true, &rail_v, BinSelector::Only(1));
    let s = pbs_apply(&s, &rail_h, &rail_v, out0, out1, BinSelector::All)?;
    let s = hwp_apply(&s, out1, HwpSetting::new(45.0)?)?;
    // Each port is re-timed to its own arrival slot.
    let s = s.relabel(|m| {
        if m.path() == out1 && m.bin() == 1 {
            Mode::new(out1, m.pol(), 0).expect("label valid")
        } else {
            m.clone()
        }
    });
    Ok(s)
}

/// Full fusion: heralded core followed by the spatial-to-time converter.
///
/// On success the carrier photon occupies `carrier` bins 0 and 1. With
/// `convert` low the output stays on the spatial arms `{carrier}~arm0` and
/// `{carrier}~arm1`.
pub fn fuse(
    input: &PhotonicState,
    in_pol: &str,
    in_arm: &str,
    carrier: &str,
    ff: FeedForward,
    convert: bool,
    model: &DetectorModel,
) -> Result<HeraldOutcome> {
    let arm0 = scratch(carrier, "arm0");
    let arm1 = scratch(carrier, "arm1");
    let core = fuse_spatial(input, in_pol, in_arm, &arm0, &arm1, ff, model)?;
    let converted = spatial_to_time(core.state()?, &arm0, &arm1, carrier, convert)?;
    Ok(HeraldOutcome::succeeded(
        core.probability,
        core.pattern,
        converted,
    ))
}

/// Fusion of two fresh qubits on the standalone wiring (a3, a4 -> b43) with
/// ideal detectors and the converter engaged.
pub fn fuse_pair(
    q3: &QubitSpec,
    q4: &QubitSpec,
    ff: FeedForward,
) -> Result<(HeraldOutcome, FusedState)> {
    let joint = PhotonicState::qubit("a3", 0, q3)?.tensor(&PhotonicState::qubit("a4", 0, q4)?)?;
    let outcome = fuse(&joint, "a3", "a4", "b43", ff, true, &DetectorModel::ideal())?;
    let fused = FusedState::from_state(outcome.state()?, "b43")?;
    Ok((outcome, fused))
}

/// Heralded fission core: splits a two-arm spatial-polarization photon into
/// two photons, the arm index onto `out_index` (arm 0 -> H, arm 1 -> V) and
/// the polarization onto `out_pol`.
///
/// Succeeds when the H channel behind the exit beam splitter sees exactly
/// one photon and its V channel none; same constant as fusion.
pub fn fission_spatial(
    input: &PhotonicState,
    in0: &str,
    in1: &str,
    out_index: &str,
    out_pol: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<HeraldOutcome> {
    for (cfg, _) in input.terms() {
        if cfg.photons_on_path(in0) + cfg.photons_on_path(in1) != 1 {
            return Err(Error::SinglePhotonExpected(format!("{in0}|{in1}")));
        }
    }
    require_bin_zero(input, &[in0, in1])?;
    check_outputs_free(input, &[in0, in1], &[out_index, out_pol])?;

    let mut terms = Vec::new();
    for (cfg, amp) in input.terms() {
        let mut rest = FockConfig::vacuum();
        let mut photon = None;
        for (m, n) in cfg.iter() {
            if m.path() == in0 {
                photon = Some((Polarization::H, m.pol()));
            } else if m.path() == in1 {
                photon = Some((Polarization::V, m.pol()));
            } else {
                rest.add_photons(m.clone(), n);
            }
        }
        let (index_pol, pol) = photon.expect("checked above");
        rest.add_photons(Mode::new(out_index, index_pol, 0)?, 1);
        rest.add_photons(Mode::new(out_pol, pol, 0)?, 1);
        terms.push((rest, amp));
    }
    let output = PhotonicState::from_terms(terms)?;
    let pattern = ClickPattern::of(&[("PBS20_H", 1), ("PBS20_V", 0)]);
    let probability = fusion_probability(ff) * model.herald_factor(&pattern);
    Ok(HeraldOutcome::succeeded(probability, pattern, output))
}

/// Full fission of a time-bin carrier inside a joint state: time-to-spatial
/// conversion followed by the heralded core. The bin index exits as the
/// `out_index` qubit (bin 0 -> H, bin 1 -> V), the polarization as
/// `out_pol`.
pub fn fission_state(
    input: &PhotonicState,
    carrier: &str,
    out_index: &str,
    out_pol: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<HeraldOutcome> {
    let arm0 = scratch(carrier, "fis0");
    let arm1 = scratch(carrier, "fis1");
    let converted = time_to_spatial(input, carrier, &arm0, &arm1, true)?;
    fission_spatial(&converted, &arm0, &arm1, out_index, out_pol, ff, model)
}

/// Fission of a standalone fused payload onto the documented output ports.
pub fn fission(
    fused: &FusedState,
    out_index: &str,
    out_pol: &str,
    ff: FeedForward,
    model: &DetectorModel,
) -> Result<HeraldOutcome> {
    fission_state(&fused.to_state(), fused.carrier(), out_index, out_pol, ff, model)
}

/// Fission on the standalone wiring (b5, b6) with ideal detectors.
pub fn fission_pair(fused: &FusedState, ff: FeedForward) -> Result<HeraldOutcome> {
    fission(fused, "b5", "b6", ff, &DetectorModel::ideal())
}

/// The four-dimensional state of one photon over (time bin, polarization)
/// on a single carrier path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusedState {
    carrier: String,
    /// Indexed by bin * 2 + pol with H = 0, V = 1.
    coeffs: [Complex64; 4],
}

impl FusedState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(carrier: impl Into<String>, coeffs: [Complex64; 4]) -> Result<Self> {
        let carrier = carrier.into();
        if carrier.is_empty() {
            return Err(Error::EmptyPath);
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::QubitNorm(norm));
        }
        Ok(FusedState { carrier, coeffs })
    }

    /// Coefficients as the outer product of an index qubit (which bin) and a
    /// polarization qubit, the pattern fusion produces from two inputs.
    pub fn outer(carrier: impl Into<String>, index: &QubitSpec, pol: &QubitSpec) -> Result<Self> {
        let mut coeffs = [Complex64::new(0.0, 0.0); 4];
        for (bin, bin_pol) in [(0u32, Polarization::H), (1, Polarization::V)] {
            for p in [Polarization::H, Polarization::V] {
                coeffs[Self::index(bin, p)] = index.amp(bin_pol) * pol.amp(p);
            }
        }
        Self::new(carrier, coeffs)
    }

    fn index(bin: u32, pol: Polarization) -> usize {
        (bin as usize) * 2 + matches!(pol, Polarization::V) as usize
    }

    /// Reads a fused payload out of a state that spans exactly the carrier
    /// path with one photon over bins 0 and 1.
    pub fn from_state(state: &PhotonicState, carrier: &str) -> Result<Self> {
        let mut coeffs = [Complex64::new(0.0, 0.0); 4];
        for (cfg, amp) in state.terms() {
            let modes: Vec<(&Mode, u32)> = cfg.iter().collect();
            if modes.len() != 1 || modes[0].1 != 1 {
                return Err(Error::NotFused(carrier.to_string()));
            }
            let m = modes[0].0;
            if m.path() != carrier || m.bin() > 1 {
                return Err(Error::NotFused(carrier.to_string()));
            }
            coeffs[Self::index(m.bin(), m.pol())] = amp;
        }
        Self::new(carrier, coeffs)
    }

    pub fn to_state(&self) -> PhotonicState {
        let terms = (0..4u32).filter_map(|i| {
            let amp = self.coeffs[i as usize];
            if amp.norm() <= crate::fock::PRUNE_THRESHOLD {
                return None;
            }
            let pol = if i % 2 == 0 {
                Polarization::H
            } else {
                Polarization::V
            };
            let mode = Mode::new(&self.carrier, pol, i / 2).expect("carrier is non-empty");
            Some((FockConfig::from_modes([mode]), amp))
        });
        PhotonicState::from_terms(terms).expect("fused coefficients are normalized")
    }

    pub fn coeff(&self, bin: u32, pol: Polarization) -> Complex64 {
        self.coeffs[Self::index(bin, pol)]
    }

    pub fn coeffs(&self) -> &[Complex64; 4] {
        &self.coeffs
    }

    pub fn carrier(&self) -> &str {
        &self.carrier
    }

    /// Same payload re-labelled onto another carrier path.
    pub fn with_carrier(&self, carrier: impl Into<String>) -> Result<Self> {
        Self::new(carrier, self.coeffs)
    }

    pub fn distance(&self, other: &FusedState) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_photon(path: &str, pol: Polarization, bin: u32) -> FockConfig {
        FockConfig::from_modes([Mode::new(path, pol, bin).unwrap()])
    }

    fn two_photons(p1: (&str, Polarization, u32), p2: (&str, Polarization, u32)) -> FockConfig {
        FockConfig::from_modes([
            Mode::new(p1.0, p1.1, p1.2).unwrap(),
            Mode::new(p2.0, p2.1, p2.2).unwrap(),
        ])
    }

    #[test]
    fn fredkin_through_keeps_ports() {
        let q1 = QubitSpec::random(&mut ChaCha8Rng::seed_from_u64(1));
        let q2 = QubitSpec::random(&mut ChaCha8Rng::seed_from_u64(2));
        let out = fredkin_pair(&q1, &q2, false).unwrap();
        assert!((out.probability - 0.25).abs() < 1e-15);
        let expect = PhotonicState::qubit("b1", 0, &q1)
            .unwrap()
            .tensor(&PhotonicState::qubit("b2", 0, &q2).unwrap())
            .unwrap();
        assert!(out.state().unwrap().distance(&expect) < 1e-12);
    }

    #[test]
    fn fredkin_cross_swaps_basis_states() {
        let out = fredkin_pair(&QubitSpec::horizontal(), &QubitSpec::vertical(), true).unwrap();
        let cfg = two_photons(("b1", Polarization::V, 0), ("b2", Polarization::H, 0));
        assert!((out.state().unwrap().amplitude(&cfg) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((out.probability - 0.25).abs() < 1e-15);
    }

    // The cross-state output amplitudes are the four products of the input
    // amplitudes, with the a1 qubit on b2 and the a2 qubit on b1.
    #[test]
    fn fredkin_cross_generic_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q1 = QubitSpec::random(&mut rng);
            let q2 = QubitSpec::random(&mut rng);
            let out = fredkin_pair(&q1, &q2, true).unwrap();
            let state = out.state().unwrap();
            for p1 in [Polarization::H, Polarization::V] {
                for p2 in [Polarization::H, Polarization::V] {
                    let cfg = two_photons(("b2", p1, 0), ("b1", p2, 0));
                    let expect = q1.amp(p1) * q2.amp(p2);
                    assert!((state.amplitude(&cfg) - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fredkin_cross_twice_equals_through() {
        let q1 = QubitSpec::random(&mut ChaCha8Rng::seed_from_u64(4));
        let q2 = QubitSpec::random(&mut ChaCha8Rng::seed_from_u64(5));
        let joint =
            PhotonicState::qubit("a1", 0, &q1).unwrap().tensor(&PhotonicState::qubit("a2", 0, &q2).unwrap()).unwrap();
        let once = fredkin(&joint, "a1", "a2", "m1", "m2", true, &DetectorModel::ideal()).unwrap();
        let twice = fredkin(once.state().unwrap(), "m1", "m2", "b1", "b2", true, &DetectorModel::ideal()).unwrap();
        let through = fredkin(&joint, "a1", "a2", "b1", "b2", false, &DetectorModel::ideal()).unwrap();
        assert!(twice.state().unwrap().distance(through.state().unwrap()) < 1e-12);
    }

    #[test]
    fn fredkin_rejects_multi_photon_input() {
        let mut cfg = FockConfig::vacuum();
        cfg.add_photons(Mode::new("a1", Polarization::H, 0).unwrap(), 2);
        cfg.add_photons(Mode::new("a2", Polarization::H, 0).unwrap(), 1);
        let s = PhotonicState::from_config(cfg);
        assert!(matches!(
            fredkin(&s, "a1", "a2", "b1", "b2", false, &DetectorModel::ideal()).unwrap_err(),
            Error::SinglePhotonExpected(_)
        ));
    }

    #[test]
    fn superposed_control_rejected() {
        assert!(matches!(
            control_bit_from_qubit(&QubitSpec::plus()).unwrap_err(),
            Error::UnsupportedControl
        ));
        assert!(!control_bit_from_qubit(&QubitSpec::horizontal()).unwrap());
        assert!(control_bit_from_qubit(&QubitSpec::vertical()).unwrap());
    }

    #[test]
    fn fuse_spatial_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let q3 = QubitSpec::random(&mut rng);
            let q4 = QubitSpec::random(&mut rng);
            let joint = PhotonicState::qubit("a3", 0, &q3)
                .unwrap()
                .tensor(&PhotonicState::qubit("a4", 0, &q4).unwrap())
                .unwrap();
            let out = fuse_spatial(
                &joint, "a3", "a4", "b3p", "b4p",
                FeedForward::off(),
                &DetectorModel::ideal(),
            )
            .unwrap();
            let state = out.state().unwrap();
            for p in [Polarization::H, Polarization::V] {
                let a0 = state.amplitude(&one_photon("b3p", p, 0));
                let a1 = state.amplitude(&one_photon("b4p", p, 0));
                assert!((a0 - q4.beta_h * q3.amp(p)).norm() < 1e-12);
                assert!((a1 - q4.beta_v * q3.amp(p)).norm() < 1e-12);
            }
            assert!((out.probability - 1.0 / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fuse_probability_constants() {
        let q = QubitSpec::plus();
        let (raw, _) = fuse_pair(&q, &q, FeedForward::off()).unwrap();
        let (ff, _) = fuse_pair(&q, &q, FeedForward::on()).unwrap();
        assert!((raw.probability - 1.0 / 32.0).abs() < 1e-15);
        assert!((ff.probability - 0.125).abs() < 1e-15);
    }

    #[test]
    fn converter_basis_cases() {
        let s = PhotonicState::qubit("b3p", 0, &QubitSpec::horizontal()).unwrap();
        let t = spatial_to_time(&s, "b3p", "b4p", "b43", true).unwrap();
        assert!((t.amplitude(&one_photon("b43", Polarization::H, 0)) - c(1.0, 0.0)).norm() < 1e-12);

        let s = PhotonicState::qubit("b4p", 0, &QubitSpec::vertical()).unwrap();
        let t = spatial_to_time(&s, "b3p", "b4p", "b43", true).unwrap();
        assert!((t.amplitude(&one_photon("b43", Polarization::V, 1)) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn converter_bypass_when_disabled() {
        let s = PhotonicState::qubit("b3p", 0, &QubitSpec::plus()).unwrap();
        let t = spatial_to_time(&s, "b3p", "b4p", "b43", false).unwrap();
        assert!(s.distance(&t) < 1e-15);
    }

    #[test]
    fn converters_are_mutually_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            // Random single photon over two arms and both polarizations.
            let qa = QubitSpec::random(&mut rng);
            let qb = QubitSpec::random(&mut rng);
            let w: f64 = rng.gen();
            let terms = vec![
                (one_photon("u", Polarization::H, 0), qa.beta_h * w.sqrt()),
                (one_photon("u", Polarization::V, 0), qa.beta_v * w.sqrt()),
                (one_photon("v", Polarization::H, 0), qb.beta_h * (1.0 - w).sqrt()),
                (one_photon("v", Polarization::V, 0), qb.beta_v * (1.0 - w).sqrt()),
            ];
            let s = PhotonicState::from_terms(terms).unwrap();
            let t = spatial_to_time(&s, "u", "v", "carrier", true).unwrap();
            assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
            let back = time_to_spatial(&t, "carrier", "u", "v", true).unwrap();
            assert!(s.distance(&back) < 1e-12, "roundtrip distance {}", s.distance(&back));
        }
    }

    #[test]
    fn time_to_spatial_basis_cases() {
        let fused = FusedState::new(
            "a56",
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let t = time_to_spatial(&fused.to_state(), "a56", "a5p", "a6p", true).unwrap();
        assert!((t.amplitude(&one_photon("a5p", Polarization::H, 0)) - c(1.0, 0.0)).norm() < 1e-12);

        let fused = FusedState::new(
            "a56",
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let t = time_to_spatial(&fused.to_state(), "a56", "a5p", "a6p", true).unwrap();
        assert!((t.amplitude(&one_photon("a6p", Polarization::V, 0)) - c(1.0, 0.0)).norm() < 1e-12);
    }

    // Oracle: the fission basis map by hand. (bin 0, p) -> |H> on the index
    // port and |p> on the polarization port; (bin 1, p) -> |V> and |p>.
    #[test]
    fn fission_basis_map() {
        for idx in 0..4usize {
            let mut coeffs = [c(0.0, 0.0); 4];
            coeffs[idx] = c(1.0, 0.0);
            let fused = FusedState::new("a56", coeffs).unwrap();
            let out = fission_pair(&fused, FeedForward::on()).unwrap();
            let index_pol = if idx / 2 == 0 { Polarization::H } else { Polarization::V };
            let pol = if idx % 2 == 0 { Polarization::H } else { Polarization::V };
            let cfg = two_photons(("b5", index_pol, 0), ("b6", pol, 0));
            assert!((out.state().unwrap().amplitude(&cfg) - c(1.0, 0.0)).norm() < 1e-12);
            assert!((out.probability - 0.125).abs() < 1e-15);
        }
    }

    // Oracle: applying the basis map to (1,0,0,1)/sqrt(2) gives the Bell
    // state (|HH> + |VV>)/sqrt(2) across the two output photons.
    #[test]
    fn fission_of_entangled_payload_gives_bell_pair() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let fused = FusedState::new(
            "a56",
            [c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)],
        )
        .unwrap();
        let out = fission_pair(&fused, FeedForward::on()).unwrap();
        let hh = two_photons(("b5", Polarization::H, 0), ("b6", Polarization::H, 0));
        let vv = two_photons(("b5", Polarization::V, 0), ("b6", Polarization::V, 0));
        let state = out.state().unwrap();
        assert!((state.amplitude(&hh) - c(r, 0.0)).norm() < 1e-12);
        assert!((state.amplitude(&vv) - c(r, 0.0)).norm() < 1e-12);
        assert_eq!(state.num_terms(), 2);
    }

    #[test]
    fn fuse_then_fission_recovers_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let qa = QubitSpec::random(&mut rng);
            let qb = QubitSpec::random(&mut rng);
            let (_, fused) = fuse_pair(&qa, &qb, FeedForward::on()).unwrap();
            let out = fission_pair(&fused, FeedForward::on()).unwrap();
            // b5 carries the arm-index qubit (from a4), b6 the polarization
            // qubit (from a3).
            let expect = PhotonicState::qubit("b5", 0, &qb)
                .unwrap()
                .tensor(&PhotonicState::qubit("b6", 0, &qa).unwrap())
                .unwrap();
            let d = out.state().unwrap().distance_up_to_phase(&expect);
            assert!(d < 1e-10, "roundtrip distance {d}");
        }
    }

    #[test]
    fn fused_state_round_trips_through_photonic_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let qa = QubitSpec::random(&mut rng);
        let qb = QubitSpec::random(&mut rng);
        let f = FusedState::outer("b43", &qb, &qa).unwrap();
        let g = FusedState::from_state(&f.to_state(), "b43").unwrap();
        assert!(f.distance(&g) < 1e-15);
    }

    #[test]
    fn herald_sampling_matches_probability() {
        let q = QubitSpec::plus();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let trials = 100_000;
        let mut hits = 0u32;
        for _ in 0..trials {
            let out = fredkin_pair(&q, &q, false).unwrap().sample(&mut rng);
            if out.success {
                hits += 1;
            }
        }
        let freq = f64::from(hits) / f64::from(trials);
        // 3 sigma for p = 1/4 over 1e5 trials.
        assert!((freq - 0.25).abs() < 3.0 * (0.25 * 0.75 / trials as f64).sqrt() + 1e-9);
    }

    #[test]
    fn degraded_detectors_lower_reported_probability() {
        let q = QubitSpec::plus();
        let joint = PhotonicState::qubit("a3", 0, &q)
            .unwrap()
            .tensor(&PhotonicState::qubit("a4", 0, &q).unwrap())
            .unwrap();
        let model = DetectorModel::new(0.9, 0.0).unwrap();
        let out = fuse(&joint, "a3", "a4", "b43", FeedForward::on(), true, &model).unwrap();
        assert!(out.probability < 0.125);
    }
}
