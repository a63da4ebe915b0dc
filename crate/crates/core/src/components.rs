//! Passive optical elements and measurement models.
//!
//! Half-wave plates act on the two polarization modes of a path; polarizing
//! beam splitters, delay lines and controlled polarization flips are exact
//! mode relabelings. Detectors observe the photon count of a path, thinned
//! by quantum efficiency and augmented by dark counts.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockConfig, Mode, PhotonicState, Polarization, Unitary};

/// Which time bins an element acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinSelector {
    /// Every time bin (the physical, time-stationary element).
    All,
    /// A single bin, for elements gated by pulse timing.
    Only(u32),
}

impl BinSelector {
    pub fn matches(&self, bin: u32) -> bool {
        match self {
            BinSelector::All => true,
            BinSelector::Only(b) => *b == bin,
        }
    }
}

/// Half-wave plate orientation, degrees from the H axis, canonical in
/// (-90, 90].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HwpSetting {
    theta_deg: f64,
}

impl HwpSetting {
    pub fn new(theta_deg: f64) -> Result<Self> {
        if !theta_deg.is_finite() {
            return Err(Error::DetectorModel("plate angle must be finite"));
        }
        let mut t = theta_deg % 180.0;
        if t <= -90.0 {
            t += 180.0;
        } else if t > 90.0 {
            t -= 180.0;
        }
        Ok(HwpSetting { theta_deg: t })
    }

    pub fn degrees(&self) -> f64 {
        self.theta_deg
    }
}

/// The half-wave plate matrix on {H, V}:
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]]. Hermitian and involutive.
pub fn hwp_matrix(setting: HwpSetting) -> Unitary {
    let t2 = 2.0 * setting.theta_deg.to_radians();
    let (s, c) = t2.sin_cos();
    Unitary::new(vec![
        vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
    ])
    .expect("hwp matrix is unitary for every angle")
}

/// Applies a half-wave plate to every occupied bin of `path`.
pub fn hwp_apply(state: &PhotonicState, path: &str, setting: HwpSetting) -> Result<PhotonicState> {
    let u = hwp_matrix(setting);
    let mut bins: Vec<u32> = Vec::new();
    for (cfg, _) in state.terms() {
        for (m, _) in cfg.iter() {
            if m.path() == path && !bins.contains(&m.bin()) {
                bins.push(m.bin());
            }
        }
    }
    let mut out = state.clone();
    for bin in bins {
        let modes = vec![
            Mode::new(path, Polarization::H, bin)?,
            Mode::new(path, Polarization::V, bin)?,
        ];
        out = out.apply_mode_map(&modes, &u)?;
    }
    Ok(out)
}

/// Polarizing beam splitter: H transmits, V reflects, no reflection phase.
///
/// Photons from `in1` exit at `out_transmit` (H) or `out_reflect` (V);
/// photons from `in2` exit at `out_reflect` (H) or `out_transmit` (V).
/// Output labels may alias the inputs per the caller's wiring; they must not
/// collide with unrelated occupied paths.
pub fn pbs_apply(
    state: &PhotonicState,
    in1: &str,
    in2: &str,
    out_transmit: &str,
    out_reflect: &str,
    bins: BinSelector,
) -> Result<PhotonicState> {
    for out in [out_transmit, out_reflect] {
        if out != in1 && out != in2 && state.paths().contains(out) {
            return Err(Error::PathInUse(out.to_string()));
        }
    }
    Ok(state.relabel(|m| {
        if !bins.matches(m.bin()) {
            return m.clone();
        }
        let target = match (m.path(), m.pol()) {
            (p, Polarization::H) if p == in1 => out_transmit,
            (p, Polarization::V) if p == in1 => out_reflect,
            (p, Polarization::H) if p == in2 => out_reflect,
            (p, Polarization::V) if p == in2 => out_transmit,
            _ => return m.clone(),
        };
        Mode::new(target, m.pol(), m.bin()).expect("non-empty output label")
    }))
}

/// Shifts every photon on `path` forward by `delta_bins` time bins.
pub fn delay_apply(state: &PhotonicState, path: &str, delta_bins: u32) -> PhotonicState {
    if delta_bins == 0 {
        return state.clone();
    }
    state.relabel(|m| {
        if m.path() == path {
            Mode::new(m.path(), m.pol(), m.bin() + delta_bins).expect("path already valid")
        } else {
            m.clone()
        }
    })
}

/// Classically controlled polarization flip (the switched NOT element).
/// With `control` low the element is transparent.
pub fn controlled_flip(
    state: &PhotonicState,
    control: bool,
    path: &str,
    bins: BinSelector,
) -> PhotonicState {
    if !control {
        return state.clone();
    }
    state.relabel(|m| {
        if m.path() == path && bins.matches(m.bin()) {
            Mode::new(m.path(), m.pol().flipped(), m.bin()).expect("path already valid")
        } else {
            m.clone()
        }
    })
}

/// Moves the global time reference: every bin decreases by `shift`.
/// Pure relabeling; fails if any photon would land on a negative bin.
pub fn shift_time_origin(state: &PhotonicState, shift: u32) -> Result<PhotonicState> {
    if shift == 0 {
        return Ok(state.clone());
    }
    for (cfg, _) in state.terms() {
        for (m, _) in cfg.iter() {
            if m.bin() < shift {
                return Err(Error::NegativeBin);
            }
        }
    }
    Ok(state.relabel(|m| {
        Mode::new(m.path(), m.pol(), m.bin() - shift).expect("path already valid")
    }))
}

/// Single-photon detector model.
///
/// `number_resolving` distinguishes one photon from two; the heralding
/// conditions simulated here need that, so it defaults on. Switching it off
/// collapses every observed count to a click/no-click bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_count_prob: f64,
    pub number_resolving: bool,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            efficiency: 1.0,
            dark_count_prob: 0.0,
            number_resolving: true,
        }
    }
}

impl DetectorModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn new(efficiency: f64, dark_count_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::DetectorModel("efficiency must be in [0, 1]"));
        }
        if !(0.0..1.0).contains(&dark_count_prob) {
            return Err(Error::DetectorModel("dark count probability must be in [0, 1)"));
        }
        Ok(DetectorModel {
            efficiency,
            dark_count_prob,
            number_resolving: true,
        })
    }

    pub fn is_ideal(&self) -> bool {
        self.efficiency == 1.0 && self.dark_count_prob == 0.0
    }

    /// Probability of observing exactly `k` counts given `n` photons arrive.
    fn observe_prob(&self, n: u32, k: u32) -> f64 {
        let eta = self.efficiency;
        let q = self.dark_count_prob;
        if !self.number_resolving {
            let p_click = 1.0 - (1.0 - q) * (1.0 - eta).powi(n as i32);
            return match k {
                0 => 1.0 - p_click,
                1 => p_click,
                _ => 0.0,
            };
        }
        // Binomial thinning plus at most one dark count per window.
        let mut p = 0.0;
        if k <= n {
            p += binom_pmf(n, k, eta) * (1.0 - q);
        }
        if k >= 1 && k - 1 <= n {
            p += binom_pmf(n, k - 1, eta) * q;
        }
        p
    }

    /// Degradation factor for a required herald pattern: detectors that must
    /// see exactly one photon and detectors that must stay silent.
    ///
    /// Only the success branch is modeled; the internal layouts that could
    /// convert failure branches into false positives are not simulated.
    pub fn herald_factor(&self, required: &ClickPattern) -> f64 {
        let mut f = 1.0;
        for (_, count) in required.iter() {
            f *= self.observe_prob(count, count);
        }
        f
    }
}

fn binom_pmf(n: u32, k: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Counts observed per detector label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct ClickPattern {
    counts: BTreeMap<String, u32>,
}

impl ClickPattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(entries: &[(&str, u32)]) -> Self {
        let mut counts = BTreeMap::new();
        for (label, n) in entries {
            counts.insert((*label).to_string(), *n);
        }
        ClickPattern { counts }
    }

    pub fn set(&mut self, label: &str, count: u32) {
        self.counts.insert(label.to_string(), count);
    }

    pub fn get(&self, label: &str) -> Option<u32> {
        self.counts.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(l, n)| (l.as_str(), *n))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Same counts with every label prefixed, for composing sub-circuits.
    pub fn prefixed(&self, prefix: &str) -> ClickPattern {
        let counts = self
            .counts
            .iter()
            .map(|(l, n)| (format!("{prefix}{l}"), *n))
            .collect();
        ClickPattern { counts }
    }

    /// Union of two patterns over disjoint label sets.
    pub fn merged(&self, other: &ClickPattern) -> ClickPattern {
        let mut counts = self.counts.clone();
        for (l, n) in &other.counts {
            counts.insert(l.clone(), *n);
        }
        ClickPattern { counts }
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|(l, n)| format!("{l}={n}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A detector watching one path, possibly gated to a time bin.
#[derive(Debug, Clone)]
pub struct Detector {
    pub label: String,
    pub path: String,
    pub bins: BinSelector,
}

impl Detector {
    pub fn new(label: &str, path: &str, bins: BinSelector) -> Self {
        Detector {
            label: label.to_string(),
            path: path.to_string(),
            bins,
        }
    }

    fn true_count(&self, cfg: &FockConfig) -> u32 {
        cfg.iter()
            .filter(|(m, _)| m.path() == self.path && self.bins.matches(m.bin()))
            .map(|(_, n)| n)
            .sum()
    }
}

fn true_count_distribution(
    state: &PhotonicState,
    detectors: &[Detector],
) -> Vec<(Vec<u32>, f64)> {
    let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (cfg, amp) in state.terms() {
        let counts: Vec<u32> = detectors.iter().map(|d| d.true_count(cfg)).collect();
        *acc.entry(counts).or_insert(0.0) += amp.norm_sqr();
    }
    acc.into_iter().collect()
}

/// Enumerates click patterns with exact probabilities: photon-number
/// outcomes on the measured paths, thinned by efficiency and augmented by
/// dark counts. Probabilities sum to one for a normalized state.
pub fn detect_distribution(
    state: &PhotonicState,
    detectors: &[Detector],
    model: &DetectorModel,
) -> Vec<(ClickPattern, f64)> {
    let mut acc: BTreeMap<ClickPattern, f64> = BTreeMap::new();
    for (counts, p_true) in true_count_distribution(state, detectors) {
        // Observed counts per detector spread independently.
        let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), p_true)];
        for (d, &n) in detectors.iter().zip(&counts) {
            let _ = d;
            let max_obs = if model.number_resolving { n + 1 } else { 1 };
            let mut next = Vec::new();
            for (obs, p) in &partial {
                for k in 0..=max_obs {
                    let pk = model.observe_prob(n, k);
                    if pk <= 0.0 {
                        continue;
                    }
                    let mut o2 = obs.clone();
                    o2.push(k);
                    next.push((o2, p * pk));
                }
            }
            partial = next;
        }
        for (obs, p) in partial {
            let mut pattern = ClickPattern::new();
            for (d, k) in detectors.iter().zip(&obs) {
                pattern.set(&d.label, *k);
            }
            *acc.entry(pattern).or_insert(0.0) += p;
        }
    }
    acc.into_iter().collect()
}

/// Samples one detection event.
///
/// The projective count measurement is sampled first from the Born rule and
/// the state conditioned on those true counts; efficiency and dark counts
/// then distort only the observed pattern. Measured modes stay in the
/// returned state so that superpositions behind a count are kept intact.
pub fn detect_sample<R: Rng + ?Sized>(
    state: &PhotonicState,
    detectors: &[Detector],
    model: &DetectorModel,
    rng: &mut R,
) -> Result<(ClickPattern, PhotonicState)> {
    let dist = true_count_distribution(state, detectors);
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = dist.last().map(|(c, _)| c.clone()).unwrap_or_default();
    for (counts, p) in &dist {
        acc += p;
        if x < acc {
            chosen = counts.clone();
            break;
        }
    }
    let (conditioned, _) = state.project(|cfg| {
        detectors
            .iter()
            .zip(&chosen)
            .all(|(d, &n)| d.true_count(cfg) == n)
    })?;
    let mut pattern = ClickPattern::new();
    for (d, &n) in detectors.iter().zip(&chosen) {
        let max_obs = if model.number_resolving { n + 1 } else { 1 };
        let y: f64 = rng.gen();
        let mut a = 0.0;
        let mut obs = 0;
        for k in 0..=max_obs {
            a += model.observe_prob(n, k);
            obs = k;
            if y < a {
                break;
            }
        }
        pattern.set(&d.label, obs);
    }
    Ok((pattern, conditioned))
}
