//! Sparse multi-photon states over labelled optical modes.
//!
//! A mode is identified by a path label, a polarization and an integer time
//! bin. States are stored as sparse superpositions of Fock configurations
//! (mode -> photon count maps) with complex double-precision amplitudes.
//! The circuits simulated here produce at most a few dozen terms, so the
//! sparse map is exact and cheap.
//!
//! All operations are pure: they take states by reference and return new
//! values, so states can be shared freely across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Amplitudes smaller than this in magnitude are dropped after each map.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Default tolerance on the squared norm of a state exposed as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Photon polarization. `H` encodes the logical |0>, `V` the logical |1>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    /// The orthogonal polarization.
    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// A single optical mode: (path label, polarization, time bin).
///
/// Two modes are the same degree of freedom iff all three fields are equal.
/// Time bins are abstract integers; the physical bin spacing is assumed
/// larger than the pulse width and the detector dead time, so distinct
/// bins are orthogonal modes and bin arithmetic is exact bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    path: String,
    pol: Polarization,
    bin: u32,
}

impl Mode {
    pub fn new(path: impl Into<String>, pol: Polarization, bin: u32) -> Result<Self> {
        let path = path.into();
        if path.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(Mode { path, pol, bin })
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn pol(&self) -> Polarization {
        self.pol
    }

    pub fn bin(&self) -> u32 {
        self.bin
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.path, self.pol, self.bin)
    }
}

/// A Fock configuration: photon counts per mode, zero counts never stored.
///
/// The backing map is ordered, so equal configurations compare equal
/// structurally and iteration order is canonical.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FockConfig {
    occupations: BTreeMap<Mode, u32>,
}

impl FockConfig {
    /// The vacuum configuration (no photons anywhere).
    pub fn vacuum() -> Self {
        FockConfig::default()
    }

    /// Builds a configuration from one photon in each listed mode.
    /// Repeated modes accumulate.
    pub fn from_modes<I: IntoIterator<Item = Mode>>(modes: I) -> Self {
        let mut cfg = FockConfig::vacuum();
        for m in modes {
            cfg.add_photons(m, 1);
        }
        cfg
    }

    pub fn add_photons(&mut self, mode: Mode, count: u32) {
        if count == 0 {
            return;
        }
        *self.occupations.entry(mode).or_insert(0) += count;
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn count(&self, mode: &Mode) -> u32 {
        self.occupations.get(mode).copied().unwrap_or(0)
    }

    /// Total photon number.
    pub fn total_photons(&self) -> u32 {
        self.occupations.values().sum()
    }

    /// Photons on a given path, summed over polarizations and bins.
    pub fn photons_on_path(&self, path: &str) -> u32 {
        self.occupations
            .iter()
            .filter(|(m, _)| m.path() == path)
            .map(|(_, n)| *n)
            .sum()
    }

    /// Photons on a given path restricted to one bin.
    pub fn photons_on_path_bin(&self, path: &str, bin: u32) -> u32 {
        self.occupations
            .iter()
            .filter(|(m, _)| m.path() == path && m.bin() == bin)
            .map(|(_, n)| *n)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, u32)> {
        self.occupations.iter().map(|(m, n)| (m, *n))
    }

    /// Rewrites every occupied mode through `f`, accumulating counts.
    /// Correct for injective mode maps (relabelings).
    pub(crate) fn map_modes<F: Fn(&Mode) -> Mode>(&self, f: F) -> FockConfig {
        let mut out = FockConfig::vacuum();
        for (m, n) in self.iter() {
            out.add_photons(f(m), n);
        }
        out
    }
}

impl fmt::Display for FockConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return write!(f, "vacuum");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(m, n)| {
                if n == 1 {
                    m.to_string()
                } else {
                    format!("{m}*{n}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Single-qubit polarization amplitudes: `beta_h |H> + beta_v |V>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitSpec {
    pub beta_h: Complex64,
    pub beta_v: Complex64,
}

impl QubitSpec {
    /// Tolerance on |bh|^2 + |bv|^2 - 1.
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(beta_h: Complex64, beta_v: Complex64) -> Result<Self> {
        let norm = beta_h.norm_sqr() + beta_v.norm_sqr();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::QubitNorm(norm));
        }
        Ok(QubitSpec { beta_h, beta_v })
    }

    pub fn from_reals(beta_h: f64, beta_v: f64) -> Result<Self> {
        Self::new(Complex64::new(beta_h, 0.0), Complex64::new(beta_v, 0.0))
    }

    /// |H>, the logical |0>.
    pub fn horizontal() -> Self {
        QubitSpec {
            beta_h: Complex64::new(1.0, 0.0),
            beta_v: Complex64::new(0.0, 0.0),
        }
    }

    /// |V>, the logical |1>.
    pub fn vertical() -> Self {
        QubitSpec {
            beta_h: Complex64::new(0.0, 0.0),
            beta_v: Complex64::new(1.0, 0.0),
        }
    }

    /// (|H> + |V>)/sqrt(2).
    pub fn plus() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitSpec {
            beta_h: r,
            beta_v: r,
        }
    }

    /// Amplitude of the given polarization.
    pub fn amp(&self, pol: Polarization) -> Complex64 {
        match pol {
            Polarization::H => self.beta_h,
            Polarization::V => self.beta_v,
        }
    }

    /// Haar-random qubit: uniform |bh|^2 and independent uniform phases.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u: f64 = rng.gen();
        let ph: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        let pv: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        QubitSpec {
            beta_h: Complex64::from_polar(u.sqrt(), ph),
            beta_v: Complex64::from_polar((1.0 - u).sqrt(), pv),
        }
    }

    /// Max amplitude difference against another qubit.
    pub fn distance(&self, other: &QubitSpec) -> f64 {
        (self.beta_h - other.beta_h)
            .norm()
            .max((self.beta_v - other.beta_v).norm())
    }

    /// Distance after removing one global phase.
    pub fn distance_up_to_phase(&self, other: &QubitSpec) -> f64 {
        let phase = dominant_phase(
            &[self.beta_h, self.beta_v],
            &[other.beta_h, other.beta_v],
        );
        (self.beta_h * phase - other.beta_h)
            .norm()
            .max((self.beta_v * phase - other.beta_v).norm())
    }
}

fn dominant_phase(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut best = 0usize;
    for (i, amp) in a.iter().enumerate() {
        if amp.norm_sqr() > a[best].norm_sqr() {
            best = i;
        }
    }
    if a[best].norm() < PRUNE_THRESHOLD || b[best].norm() < PRUNE_THRESHOLD {
        return Complex64::new(1.0, 0.0);
    }
    let ratio = b[best] / a[best];
    ratio / ratio.norm()
}

/// A square matrix acting on a list of modes, checked unitary on construction.
#[derive(Debug, Clone)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Unitary {
    /// Unitarity tolerance for `U U^dagger = I`.
    pub const UNITARITY_TOL: f64 = 1e-10;

    pub fn new(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        for row in &rows {
            if row.len() != dim {
                return Err(Error::MatrixShape {
                    rows: dim,
                    cols: row.len(),
                    expected: dim,
                });
            }
        }
        let entries: Vec<Complex64> = rows.into_iter().flatten().collect();
        let u = Unitary { dim, entries };
        if !u.is_unitary(Self::UNITARITY_TOL) {
            return Err(Error::NonUnitaryMatrix);
        }
        Ok(u)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Unitary { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    fn is_unitary(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut dot = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    dot += self.entry(i, k) * self.entry(j, k).conj();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Sparse superposition of Fock configurations with complex amplitudes.
///
/// The vacuum state is the empty configuration with amplitude one; it is an
/// ordinary term, not a special object. Terms are kept in canonical order,
/// so identical states built along different routes compare identically and
/// sampling is deterministic for a fixed rng stream.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    terms: BTreeMap<FockConfig, Complex64>,
}

impl PhotonicState {
    /// The vacuum state |phi>.
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(FockConfig::vacuum(), Complex64::new(1.0, 0.0));
        PhotonicState { terms }
    }

    /// A single-configuration state with amplitude one.
    pub fn from_config(config: FockConfig) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(config, Complex64::new(1.0, 0.0));
        PhotonicState { terms }
    }

    /// Builds a state from raw terms. Amplitudes below the prune threshold
    /// are dropped; the squared norm must land within `NORM_TOLERANCE` of 1.
    pub fn from_terms<I: IntoIterator<Item = (FockConfig, Complex64)>>(terms: I) -> Result<Self> {
        let state = Self::collect(terms);
        let n = state.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::StateNorm(n));
        }
        Ok(state)
    }

    /// One photon on `path` at `bin` carrying the qubit amplitudes of `q`.
    pub fn qubit(path: &str, bin: u32, q: &QubitSpec) -> Result<Self> {
        // Re-validate: QubitSpec values built from struct literals elsewhere
        // must not smuggle in an unnormalized payload.
        let q = QubitSpec::new(q.beta_h, q.beta_v)?;
        let mut terms = Vec::new();
        for pol in [Polarization::H, Polarization::V] {
            let amp = q.amp(pol);
            if amp.norm() > PRUNE_THRESHOLD {
                let cfg = FockConfig::from_modes([Mode::new(path, pol, bin)?]);
                terms.push((cfg, amp));
            }
        }
        Self::from_terms(terms)
    }

    fn collect<I: IntoIterator<Item = (FockConfig, Complex64)>>(terms: I) -> Self {
        let mut map: BTreeMap<FockConfig, Complex64> = BTreeMap::new();
        for (cfg, amp) in terms {
            let slot = map.entry(cfg).or_insert(Complex64::new(0.0, 0.0));
            *slot += amp;
        }
        map.retain(|_, amp| amp.norm() > PRUNE_THRESHOLD);
        PhotonicState { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockConfig, Complex64)> {
        self.terms.iter().map(|(c, a)| (c, *a))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn amplitude(&self, config: &FockConfig) -> Complex64 {
        self.terms
            .get(config)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// All path labels occupied by at least one photon in some term.
    pub fn paths(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (cfg, _) in self.terms() {
            for (m, _) in cfg.iter() {
                out.insert(m.path().to_string());
            }
        }
        out
    }

    /// Tensor product of two states on disjoint path label sets.
    pub fn tensor(&self, other: &PhotonicState) -> Result<PhotonicState> {
        let mine = self.paths();
        for p in other.paths() {
            if mine.contains(&p) {
                return Err(Error::PathOverlap(p));
            }
        }
        let mut terms = Vec::with_capacity(self.num_terms() * other.num_terms());
        for (c1, a1) in self.terms() {
            for (c2, a2) in other.terms() {
                let mut cfg = c1.clone();
                for (m, n) in c2.iter() {
                    cfg.add_photons(m.clone(), n);
                }
                terms.push((cfg, a1 * a2));
            }
        }
        Ok(Self::collect(terms))
    }

    /// Applies a unitary mode map: each listed mode's creation operator is
    /// replaced by the matrix-weighted combination of the same mode list,
    /// with the usual sqrt(n!) bosonic factors so that norm is preserved.
    ///
    /// `u.entry(j, i)` weights output mode `j` for input mode `i`.
    pub fn apply_mode_map(&self, modes: &[Mode], u: &Unitary) -> Result<PhotonicState> {
        let dim = modes.len();
        if u.dim() != dim {
            return Err(Error::MatrixShape {
                rows: u.dim(),
                cols: u.dim(),
                expected: dim,
            });
        }
        let unique: BTreeSet<&Mode> = modes.iter().collect();
        if unique.len() != dim {
            return Err(Error::DuplicateModes);
        }

        let mut out: Vec<(FockConfig, Complex64)> = Vec::new();
        for (cfg, amp) in self.terms() {
            // Split the configuration into acted photon counts and spectators.
            let mut acted = vec![0u32; dim];
            let mut spectator = FockConfig::vacuum();
            'modes: for (m, n) in cfg.iter() {
                for (i, probe) in modes.iter().enumerate() {
                    if m == probe {
                        acted[i] = n;
                        continue 'modes;
                    }
                }
                spectator.add_photons(m.clone(), n);
            }

            // Monomial expansion over output occupation vectors.
            let mut monomials: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
            monomials.insert(vec![0u32; dim], Complex64::new(1.0, 0.0));
            for (i, &n) in acted.iter().enumerate() {
                for _ in 0..n {
                    let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
                    for (mono, coeff) in &monomials {
                        for j in 0..dim {
                            let w = u.entry(j, i);
                            if w.norm() <= PRUNE_THRESHOLD {
                                continue;
                            }
                            let mut m2 = mono.clone();
                            m2[j] += 1;
                            *next.entry(m2).or_insert(Complex64::new(0.0, 0.0)) += coeff * w;
                        }
                    }
                    monomials = next;
                }
            }

            let in_norm: f64 = acted.iter().map(|&n| factorial(n)).product();
            for (mono, coeff) in monomials {
                let out_norm: f64 = mono.iter().map(|&n| factorial(n)).product();
                let weight = amp * coeff * (out_norm / in_norm).sqrt();
                if weight.norm() <= PRUNE_THRESHOLD {
                    continue;
                }
                let mut cfg_out = spectator.clone();
                for (j, &n) in mono.iter().enumerate() {
                    cfg_out.add_photons(modes[j].clone(), n);
                }
                out.push((cfg_out, weight));
            }
        }
        Ok(Self::collect(out))
    }

    /// Relabels modes through an injective map. Photon counts and amplitudes
    /// are carried over unchanged; this realizes permutation elements (beam
    /// splitter wiring, delays, polarization flips) exactly.
    pub(crate) fn relabel<F: Fn(&Mode) -> Mode>(&self, f: F) -> PhotonicState {
        let terms = self
            .terms()
            .map(|(cfg, amp)| (cfg.map_modes(&f), amp))
            .collect::<Vec<_>>();
        Self::collect(terms)
    }

    /// Projects onto the configurations satisfying `pred`.
    ///
    /// Returns the renormalized conditioned state and the outcome
    /// probability. An outcome with probability below 1e-15 is impossible.
    pub fn project<F: Fn(&FockConfig) -> bool>(&self, pred: F) -> Result<(PhotonicState, f64)> {
        let mut prob = 0.0;
        let mut kept: Vec<(FockConfig, Complex64)> = Vec::new();
        for (cfg, amp) in self.terms() {
            if pred(cfg) {
                prob += amp.norm_sqr();
                kept.push((cfg.clone(), amp));
            }
        }
        if prob < 1e-15 {
            return Err(Error::ImpossibleOutcome);
        }
        let scale = prob.sqrt();
        let conditioned = Self::collect(kept.into_iter().map(|(c, a)| (c, a / scale)));
        Ok((conditioned, prob))
    }

    /// Draws one configuration with probability |amplitude|^2.
    ///
    /// Deterministic for a fixed rng stream: terms are walked in canonical
    /// order. The state must be normalized.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FockConfig> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::StateNorm(n));
        }
        let x: f64 = rng.gen::<f64>() * n;
        let mut acc = 0.0;
        let mut last = None;
        for (cfg, amp) in self.terms() {
            acc += amp.norm_sqr();
            last = Some(cfg);
            if x < acc {
                return Ok(cfg.clone());
            }
        }
        // Float round-off at the top of the ladder falls to the last term.
        Ok(last.expect("normalized state has at least one term").clone())
    }

    /// Max amplitude difference across the union of configurations.
    pub fn distance(&self, other: &PhotonicState) -> f64 {
        let mut d: f64 = 0.0;
        for (cfg, amp) in self.terms() {
            d = d.max((amp - other.amplitude(cfg)).norm());
        }
        for (cfg, amp) in other.terms() {
            d = d.max((amp - self.amplitude(cfg)).norm());
        }
        d
    }

    /// Distance after rotating `self` by the global phase that matches the
    /// dominant term of `other`.
    pub fn distance_up_to_phase(&self, other: &PhotonicState) -> f64 {
        let dominant = self
            .terms()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(cfg, _)| cfg.clone());
        let Some(cfg) = dominant else {
            return other.norm_sqr().sqrt();
        };
        let a = self.amplitude(&cfg);
        let b = other.amplitude(&cfg);
        if b.norm() < PRUNE_THRESHOLD {
            return self.distance(other);
        }
        let phase = (b / a) / (b / a).norm();
        let rotated = Self::collect(self.terms().map(|(c, amp)| (c.clone(), amp * phase)));
        rotated.distance(other)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Factors one photon living on `path` (over the listed (pol, bin) slots)
/// out of a joint state: `state = local ⊗ rest`, up to the usual gauge
/// freedom of one phase between the factors.
///
/// Fails with `NotSeparable` when the photon is entangled with the rest.
pub(crate) fn factor_photon(
    state: &PhotonicState,
    path: &str,
    slots: &[(Polarization, u32)],
) -> Result<(Vec<Complex64>, PhotonicState)> {
    let mut rows: BTreeMap<FockConfig, Vec<Complex64>> = BTreeMap::new();
    for (cfg, amp) in state.terms() {
        if cfg.photons_on_path(path) != 1 {
            return Err(Error::SinglePhotonExpected(path.to_string()));
        }
        let mut slot = None;
        let mut rest = FockConfig::vacuum();
        for (m, n) in cfg.iter() {
            if m.path() == path {
                slot = slots.iter().position(|(p, b)| *p == m.pol() && *b == m.bin());
                if slot.is_none() {
                    return Err(Error::BinOutOfRange {
                        path: path.to_string(),
                        bin: m.bin(),
                    });
                }
            } else {
                rest.add_photons(m.clone(), n);
            }
        }
        let row = rows
            .entry(rest)
            .or_insert_with(|| vec![Complex64::new(0.0, 0.0); slots.len()]);
        row[slot.expect("exactly one photon on path")] += amp;
    }

    // Reference column: the rest-configuration with the largest weight.
    let (_, pivot_row) = rows
        .iter()
        .max_by(|a, b| {
            let wa: f64 = a.1.iter().map(|c| c.norm_sqr()).sum();
            let wb: f64 = b.1.iter().map(|c| c.norm_sqr()).sum();
            wa.total_cmp(&wb)
        })
        .ok_or(Error::ImpossibleOutcome)?;
    let pivot_norm: f64 = pivot_row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let local: Vec<Complex64> = pivot_row.iter().map(|c| c / pivot_norm).collect();

    let lead = local
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .expect("non-empty slot list");

    let mut rest_terms = Vec::new();
    for (rest, row) in &rows {
        let beta = row[lead] / local[lead];
        for (k, amp) in row.iter().enumerate() {
            if (amp - local[k] * beta).norm() > 1e-9 {
                return Err(Error::NotSeparable(path.to_string()));
            }
        }
        if beta.norm() > PRUNE_THRESHOLD {
            rest_terms.push((rest.clone(), beta));
        }
    }
    let rest = PhotonicState::from_terms(rest_terms)?;
    Ok((local, rest))
}

/// Factors a polarization qubit at bin 0 of `path` out of a joint state.
pub fn factor_qubit(state: &PhotonicState, path: &str) -> Result<(QubitSpec, PhotonicState)> {
    let (local, rest) = factor_photon(
        state,
        path,
        &[(Polarization::H, 0), (Polarization::V, 0)],
    )?;
    Ok((QubitSpec::new(local[0], local[1])?, rest))
}
